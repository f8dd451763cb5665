use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::fft2;
use crate::field::{Field, SpectralField};
use crate::grid::Grid;
use crate::partition::make_partition;

pub fn to_spectral(f: &Field) -> Result<SpectralField> {
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(f.spectrum())
}

pub fn from_spectral(s: &SpectralField) -> Result<Field> {
    if s.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(s.to_field())
}

/// Delta_j f.
pub fn lp_block(f: &Field, j: i32) -> Result<Field> {
    let p = make_partition(f.grid())?;
    p.block_of(&f.spectrum(), j)
}

/// S_j f = sum_{i < j-1} Delta_i f.
pub fn lp_low(f: &Field, j: i32) -> Result<Field> {
    let p = make_partition(f.grid())?;
    let mut s = f.spectrum();
    s.scale_by(p.low(j)?);
    Ok(s.to_field())
}

/// Coefficient-wise multiplication by m(k1, k2); the real part is returned.
pub fn fourier_multiplier(f: &Field, m: impl Fn(i64, i64) -> Complex64) -> Field {
    let g = f.grid();
    let n = g.n();
    let mut s = f.spectrum();
    for (idx, c) in s.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = g.wavevector(idx / n, idx % n);
        *c *= m(k1, k2);
    }
    s.to_field()
}

/// Real radial multiplier m(|k|^2).
pub fn radial_multiplier(f: &Field, m: impl Fn(f64) -> f64) -> Field {
    let g = f.grid();
    let mut s = f.spectrum();
    for (idx, c) in s.coeffs_mut().iter_mut().enumerate() {
        *c *= m(g.k2_at(idx));
    }
    s.to_field()
}

pub fn laplacian(f: &Field) -> Field {
    radial_multiplier(f, |k2| -k2)
}

/// First derivative along axis 0 or 1. The Nyquist row is dropped.
pub fn partial(f: &Field, axis: usize) -> Field {
    let n = f.grid().n() as i64;
    fourier_multiplier(f, |k1, k2| {
        let k = if axis == 0 { k1 } else { k2 };
        if k == -n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k as f64)
        }
    })
}

/// Zero-mean g with (-Laplacian) g = f.
pub fn inv_laplacian(f: &Field) -> Result<Field> {
    let g = f.grid();
    let mut s = to_spectral(f)?;
    let mean = s.coeffs()[0].norm();
    if mean > 1e-10 * (2.0 * PI).powi(2) * f.sup_norm() {
        return Err(Error::NonzeroMean(mean / (2.0 * PI).powi(2)));
    }
    for (idx, c) in s.coeffs_mut().iter_mut().enumerate() {
        let k2 = g.k2_at(idx);
        *c = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { *c / k2 };
    }
    Ok(s.to_field())
}

/// e^{eta t Laplacian} f.
pub fn heat_propagate(f: &Field, eta: f64, t: f64) -> Result<Field> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if !(eta > 0.0) {
        return Err(Error::ParameterRange { value: eta, lo: 0.0, hi: f64::INFINITY });
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(radial_multiplier(f, |k2| (-eta * k2 * t).exp()))
}

/// Size of the zero-padded grid used for dealiased products.
#[inline]
pub(crate) fn padded_size(n: usize) -> usize {
    3 * n / 2
}

/// Coefficients (optionally times a real multiplier) embedded into the padded
/// lattice with Nyquist rows dropped, returned as physical samples there.
pub(crate) fn padded_samples(s: &SpectralField, mult: Option<&[f64]>) -> Vec<f64> {
    samples_on(s, mult, padded_size(s.grid().n()))
}

/// Inverse of `padded_samples` restricted to the original lattice; Nyquist zeroed.
pub(crate) fn truncate_padded(grid: Grid, samples: &[f64]) -> Field {
    truncate_from(grid, samples, padded_size(grid.n()))
}

fn samples_on(s: &SpectralField, mult: Option<&[f64]>, m: usize) -> Vec<f64> {
    let g = s.grid();
    let n = g.n();
    let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
    let wrap = |k: i64| -> usize { if k >= 0 { k as usize } else { (k + m as i64) as usize } };
    for a in 0..n {
        for b in 0..n {
            if g.is_nyquist(a, b) {
                continue;
            }
            let (k1, k2) = g.wavevector(a, b);
            let mut c = s.coeffs()[a * n + b];
            if let Some(w) = mult {
                c *= w[a * n + b];
            }
            buf[wrap(k1) * m + wrap(k2)] = c;
        }
    }
    fft2(&mut buf, m, true);
    let scale = 1.0 / (2.0 * PI).powi(2);
    buf.iter().map(|c| c.re * scale).collect()
}

fn truncate_from(grid: Grid, samples: &[f64], m: usize) -> Field {
    let n = grid.n();
    let mut pf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut pf, m, false);
    let w = (2.0 * PI / m as f64).powi(2);
    let mut out = SpectralField::zeros(grid);
    let wrap = |k: i64| -> usize { if k >= 0 { k as usize } else { (k + m as i64) as usize } };
    {
        let c = out.coeffs_mut();
        for a in 0..n {
            for b in 0..n {
                if grid.is_nyquist(a, b) {
                    continue;
                }
                let (k1, k2) = grid.wavevector(a, b);
                c[a * n + b] = pf[wrap(k1) * m + wrap(k2)] * w;
            }
        }
    }
    out.to_field()
}

/// Samples of the band-limited interpolant of f (Nyquist rows dropped) on the
/// 2n grid used for nonlinear pointwise maps.
pub(crate) fn fine_samples(f: &Field) -> Vec<f64> {
    samples_on(&f.spectrum(), None, 2 * f.grid().n())
}

/// Projection of 2n-grid samples back onto the resolved modes of `grid`.
pub(crate) fn coarsen(grid: Grid, samples: &[f64]) -> Field {
    truncate_from(grid, samples, 2 * grid.n())
}

/// F(f) evaluated on the 2n grid and truncated back, so that the part of F(f)
/// above the resolved band does not fold onto it. The output has no Nyquist content.
pub fn dealiased_map(f: &Field, func: impl Fn(f64) -> f64) -> Field {
    let fine: Vec<f64> = fine_samples(f).into_iter().map(func).collect();
    coarsen(f.grid(), &fine)
}

/// Padded samples of every Littlewood-Paley block of f, index j+1.
pub(crate) fn padded_blocks(f: &Field) -> Vec<Vec<f64>> {
    let p = make_partition(f.grid()).expect("valid grid");
    let s = f.spectrum();
    crate::parallel::map_range(p.count(), |i| padded_samples(&s, Some(p.rho(i as i32 - 1).unwrap())))
}

/// Product of the band-limited representatives (Nyquist rows excluded),
/// computed on a 3n/2 grid and truncated back. The output has no Nyquist content.
pub fn dealiased_product(f: &Field, g: &Field) -> Field {
    f.grid().check_same(&g.grid()).expect("grid mismatch");
    let mut pf = padded_samples(&f.spectrum(), None);
    let pg = padded_samples(&g.spectrum(), None);
    for (a, b) in pf.iter_mut().zip(&pg) {
        *a *= b;
    }
    truncate_padded(f.grid(), &pf)
}

/// Copy of f with its Nyquist rows removed.
pub fn drop_nyquist(f: &Field) -> Field {
    let mut s = f.spectrum();
    s.zero_nyquist();
    s.to_field()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(32).unwrap()
    }

    #[test]
    fn eigenfunctions() {
        let f = Field::from_fn(grid(), |x, _| x.cos());
        assert!(laplacian(&f).max_abs_diff(&-&f) < 1e-12);
        let g = Field::from_fn(grid(), |x, _| (2.0 * x).cos());
        assert!(inv_laplacian(&g).unwrap().max_abs_diff(&g.scale(0.25)) < 1e-13);
        let d = partial(&f, 0);
        assert!(d.max_abs_diff(&Field::from_fn(grid(), |x, _| -x.sin())) < 1e-12);
        assert!(partial(&f, 1).sup_norm() < 1e-12);
    }

    #[test]
    fn inverse_laplacian_needs_zero_mean() {
        assert!(matches!(inv_laplacian(&Field::constant(grid(), 1.0)), Err(Error::NonzeroMean(_))));
    }

    #[test]
    fn heat_guards() {
        let f = Field::from_fn(grid(), |x, y| (x + 2.0 * y).sin());
        assert!(heat_propagate(&f, 1.0, -0.1).is_err());
        assert!(heat_propagate(&f, 0.0, 0.1).is_err());
        assert_eq!(heat_propagate(&f, 1.0, 0.0).unwrap(), f);
    }

    #[test]
    fn unit_multiplier_is_identity() {
        let f = Field::from_fn(grid(), |x, y| (x - y).sin() + 0.3);
        assert!(fourier_multiplier(&f, |_, _| Complex64::new(1.0, 0.0)).max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn product_identities() {
        let c = Field::from_fn(grid(), |x, _| x.cos());
        let want = Field::from_fn(grid(), |x, _| 0.5 * (1.0 + (2.0 * x).cos()));
        assert!(dealiased_product(&c, &c).max_abs_diff(&want) < 1e-13);
        let one = Field::constant(grid(), 1.0);
        assert!(dealiased_product(&one, &c).max_abs_diff(&c) < 1e-13);
        assert!(dealiased_map(&c, |v| v * v).max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn drop_nyquist_removes_alternating_mode() {
        let alt = Field::from_fn(grid(), |x, _| (16.0 * x).cos());
        assert!(drop_nyquist(&alt).sup_norm() < 1e-12);
    }
}
