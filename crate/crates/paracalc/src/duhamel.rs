//! Exact per-mode solutions of d_t U = eta Laplacian U + f on every eta node,
//! together with their first two eta-derivatives.

use num_complex::Complex64;

use crate::error::Result;
use crate::eta::{EtaGrid, ParamSlab};
use crate::field::{Field, SpectralField, TimeSlab};
use crate::grid::Grid;

/// J_p = int_0^h r^p e^{-mu r} dr for p = 0..=3.
fn moments(mu: f64, h: f64) -> [f64; 4] {
    let x = mu * h;
    let mut out = [0.0; 4];
    if x < 2.0 {
        // sum_n (-mu)^n h^{n+p+1} / (n! (n+p+1))
        for (p, o) in out.iter_mut().enumerate() {
            let mut term = h.powi(p as i32 + 1);
            let mut s = 0.0;
            for n in 0..60 {
                let add = term / (n + p + 1) as f64;
                s += add;
                if add.abs() < 1e-18 * s.abs() {
                    break;
                }
                term *= -x / (n + 1) as f64;
            }
            *o = s;
        }
    } else {
        let e = (-x).exp();
        out[0] = (1.0 - e) / mu;
        for p in 1..4 {
            out[p] = (p as f64 * out[p - 1] - h.powi(p as i32) * e) / mu;
        }
    }
    out
}

fn spectra(f: &TimeSlab) -> Vec<SpectralField> {
    crate::parallel::map_slice(f.frames(), Field::spectrum)
}

fn to_slab(grid: Grid, t0: f64, dt: f64, frames: Vec<Vec<Complex64>>) -> TimeSlab {
    let frames = crate::parallel::map_slice(&frames, |c| {
        SpectralField::from_coeffs(grid, c.clone()).expect("finite").to_field()
    });
    TimeSlab::new(t0, dt, frames).expect("valid slab")
}

/// U_f(eta, t) = int_0^t e^{eta Laplacian (t-s)} f(s) ds with f linear in time
/// between frames, plus exact d/d eta and d^2/d eta^2.
pub fn parametric_duhamel(f: &TimeSlab, eta: &EtaGrid) -> Result<ParamSlab> {
    let grid = f.grid();
    let n2 = grid.len();
    let h = f.dt();
    let fs = spectra(f);
    let count = f.len();
    let per_node = crate::parallel::map_slice(eta.nodes(), |&e| {
        let zero = vec![Complex64::new(0.0, 0.0); n2];
        let mut u = vec![zero.clone(); count];
        let mut v = vec![zero.clone(); count];
        let mut w = vec![zero; count];
        for idx in 0..n2 {
            let k2 = grid.k2_at(idx);
            let mu = e * k2;
            let ex = (-mu * h).exp();
            let jm = moments(mu, h);
            let (mut cu, mut cv, mut cw) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for m in 0..count - 1 {
                let a = fs[m + 1].coeffs()[idx];
                let slope = (a - fs[m].coeffs()[idx]) / h;
                // int_0^h r^p e^{-mu r} (a - slope r) dr
                let loc = |p: usize| a * jm[p] - slope * jm[p + 1];
                let nu = ex * cu + loc(0);
                let nv = ex * (cv - k2 * h * cu) - k2 * loc(1);
                let nw = ex * (cw - 2.0 * k2 * h * cv + k2 * k2 * h * h * cu) + k2 * k2 * loc(2);
                cu = nu;
                cv = nv;
                cw = nw;
                u[m + 1][idx] = cu;
                v[m + 1][idx] = cv;
                w[m + 1][idx] = cw;
            }
        }
        (
            to_slab(grid, f.t0(), h, u),
            to_slab(grid, f.t0(), h, v),
            to_slab(grid, f.t0(), h, w),
        )
    });
    let mut nodes = Vec::new();
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for (a, b, c) in per_node {
        nodes.push(a);
        d1.push(b);
        d2.push(c);
    }
    Ok(ParamSlab::nodal(eta.clone(), nodes)?.with_derivatives(d1, d2))
}

/// e^{eta Laplacian (t - t0)} u0 on every node, with exact eta-derivatives.
pub fn parametric_heat(u0: &Field, eta: &EtaGrid, t0: f64, dt: f64, count: usize) -> Result<ParamSlab> {
    let grid = u0.grid();
    let s = u0.spectrum();
    let per_node = crate::parallel::map_slice(eta.nodes(), |&e| {
        let mut u = Vec::with_capacity(count);
        let mut v = Vec::with_capacity(count);
        let mut w = Vec::with_capacity(count);
        for m in 0..count {
            let t = m as f64 * dt;
            let (mut a, mut b, mut c) = (s.clone(), s.clone(), s.clone());
            for idx in 0..grid.len() {
                let k2 = grid.k2_at(idx);
                let ex = (-e * k2 * t).exp();
                a.coeffs_mut()[idx] *= ex;
                b.coeffs_mut()[idx] *= -k2 * t * ex;
                c.coeffs_mut()[idx] *= k2 * k2 * t * t * ex;
            }
            u.push(a.to_field());
            v.push(b.to_field());
            w.push(c.to_field());
        }
        (
            TimeSlab::new(t0, dt, u).expect("valid slab"),
            TimeSlab::new(t0, dt, v).expect("valid slab"),
            TimeSlab::new(t0, dt, w).expect("valid slab"),
        )
    });
    let mut nodes = Vec::new();
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for (a, b, c) in per_node {
        nodes.push(a);
        d1.push(b);
        d2.push(c);
    }
    Ok(ParamSlab::nodal(eta.clone(), nodes)?.with_derivatives(d1, d2))
}

#[cfg(test)]
mod tests {
    use super::moments;

    #[test]
    fn moments_match_quadrature_on_both_branches() {
        for &(mu, h) in &[(0.0, 0.01), (3.0, 0.1), (50.0, 0.1), (400.0, 0.05)] {
            let m = moments(mu, h);
            for (p, &v) in m.iter().enumerate() {
                let q = crate::kernel::simpson(|r: f64| r.powi(p as i32) * (-mu * r).exp(), 0.0, h, 20000);
                assert!((v - q).abs() <= 1e-10 * q.abs().max(1e-300), "mu={mu} p={p}: {v} vs {q}");
            }
        }
    }
}
