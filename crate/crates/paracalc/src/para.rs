//! Bony paraproducts, resonant product, commutator and paralinearization.

use crate::error::Result;
use crate::field::{Field, TimeSlab};
use crate::kernel::TimeKernel;
use crate::partition::{make_partition, Blocks};
use crate::spectral::{dealiased_map, dealiased_product, padded_blocks, padded_size, truncate_padded};

pub(crate) fn accumulate(acc: &mut [f64], a: &[f64], b: &[f64]) {
    for ((o, x), y) in acc.iter_mut().zip(a).zip(b) {
        *o += x * y;
    }
}

/// f < g = sum_j (S_j f)(Delta_j g), S_j f = sum_{i <= j-2} Delta_i f.
pub fn para_lt(f: &Field, g: &Field) -> Field {
    f.grid().check_same(&g.grid()).expect("grid mismatch");
    let m = padded_size(f.grid().n());
    let bf = padded_blocks(f);
    let bg = padded_blocks(g);
    let mut low = vec![0.0; m * m];
    let mut acc = vec![0.0; m * m];
    let top = bf.len() as i32 - 2;
    for j in 1..=top {
        for (l, v) in low.iter_mut().zip(&bf[(j - 1) as usize]) {
            *l += v;
        }
        accumulate(&mut acc, &low, &bg[(j + 1) as usize]);
    }
    truncate_padded(f.grid(), &acc)
}

/// f > g = g < f.
pub fn para_gt(f: &Field, g: &Field) -> Field {
    para_lt(g, f)
}

/// f o g = sum_{|i-j| <= 1} (Delta_i f)(Delta_j g).
pub fn resonant(f: &Field, g: &Field) -> Field {
    f.grid().check_same(&g.grid()).expect("grid mismatch");
    let m = padded_size(f.grid().n());
    let bf = padded_blocks(f);
    let bg = padded_blocks(g);
    let count = bf.len();
    let mut acc = vec![0.0; m * m];
    let mut near = vec![0.0; m * m];
    for i in 0..count {
        near.iter_mut().for_each(|v| *v = 0.0);
        for j in i.saturating_sub(1)..(i + 2).min(count) {
            for (o, v) in near.iter_mut().zip(&bg[j]) {
                *o += v;
            }
        }
        accumulate(&mut acc, &bf[i], &near);
    }
    truncate_padded(f.grid(), &acc)
}

/// C(f, g, h) = ((f < g) o h) - f (g o h).
pub fn commutator_c(f: &Field, g: &Field, h: &Field) -> Field {
    let left = resonant(&para_lt(f, g), h);
    let right = dealiased_product(f, &resonant(g, h));
    left - right
}

/// R_F(f) = F(f) - F'(f) < f, with F and F' evaluated on the refined grid.
pub fn paralin_remainder(func: impl Fn(f64) -> f64, deriv: impl Fn(f64) -> f64, f: &Field) -> Field {
    let composed = dealiased_map(f, func);
    let slope = dealiased_map(f, deriv);
    paralin_remainder_of(&composed, &slope, f)
}

/// R_F(f) from precomputed F(f) and F'(f).
pub fn paralin_remainder_of(composed: &Field, slope: &Field, f: &Field) -> Field {
    composed - &para_lt(slope, f)
}

/// Causal time average of a frame sequence with lag weights; frames before
/// the first are replaced by the first one.
pub fn time_average<'a>(frame: impl Fn(usize) -> &'a Field, weights: &[f64], m: usize) -> Field {
    if weights.len() == 1 {
        return frame(m).clone();
    }
    let mut acc = Field::zeros(frame(0).grid());
    let mut first = 0.0;
    for (l, &w) in weights.iter().enumerate() {
        if l >= m {
            first += w;
        } else if w != 0.0 {
            acc.axpy(w, frame(m - l));
        }
    }
    acc.axpy(first, frame(0));
    acc
}

/// g << h (t) = sum_j (Q_j * S_j g)(t) (Delta_j h)(t).
pub fn time_smoothed_para(g: &TimeSlab, h: &TimeSlab) -> Result<TimeSlab> {
    g.check_aligned(h)?;
    let grid = g.grid();
    let p = make_partition(grid)?;
    let kernel = TimeKernel::standard();
    let top = p.top();
    // lows[m][j+1] = S_j g(t_m)
    let lows: Vec<Vec<Field>> = crate::parallel::map_slice(g.frames(), |f| Blocks::of(f).lows());
    let weights: Vec<Vec<f64>> = (-1..=top).map(|j| kernel.lag_weights(j, g.dt())).collect();
    let frames = crate::parallel::map_range(g.len(), |m| {
        let hb = Blocks::of(h.frame(m));
        let mut out = Field::zeros(grid);
        for j in 1..=top {
            let idx = (j + 1) as usize;
            let smooth = time_average(|s| &lows[s][idx], &weights[idx], m);
            out += &dealiased_product(&smooth, hb.get(j));
        }
        out
    });
    Ok(TimeSlab::raw(grid, g.t0(), g.dt(), frames))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn grid() -> Grid {
        Grid::new(32).unwrap()
    }

    #[test]
    fn zero_argument() {
        let z = Field::zeros(grid());
        let g = Field::from_fn(grid(), |x, y| (3.0 * x).sin() + y.cos());
        assert_eq!(para_lt(&z, &g).sup_norm(), 0.0);
        assert_eq!(resonant(&z, &g).sup_norm(), 0.0);
        assert_eq!(para_gt(&z, &g).sup_norm(), 0.0);
        assert_eq!(commutator_c(&g, &z, &g).sup_norm(), 0.0);
    }

    #[test]
    fn constant_remainder() {
        let f = Field::from_fn(grid(), |x, _| x.sin());
        let r = paralin_remainder(|_| 2.5, |_| 0.0, &f);
        assert!(r.max_abs_diff(&Field::constant(grid(), 2.5)) < 1e-13);
    }

    #[test]
    fn time_average_with_unit_weight() {
        let a = Field::constant(grid(), 1.0);
        let b = Field::constant(grid(), 3.0);
        let frames = [a.clone(), b.clone()];
        assert_eq!(time_average(|m| &frames[m], &[1.0], 1), b);
        // half the weight reaches back before the first frame
        let avg = time_average(|m| &frames[m], &[0.5, 0.25, 0.25], 1);
        assert!((avg.mean() - 2.0).abs() < 1e-15);
    }
}
