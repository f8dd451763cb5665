//! Spectral synthesis of test fields with prescribed regularity.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::field::{Field, SpectralField};
use crate::grid::Grid;
use crate::rng::mode_stream;

/// True for the representative of each pair {k, -k}: k1 > 0, or k1 = 0 and k2 > 0.
#[inline]
pub fn is_canonical(k1: i64, k2: i64) -> bool {
    k1 > 0 || (k1 == 0 && k2 > 0)
}

/// Builds a real field from coefficients given on the canonical half.
/// k = 0 and Nyquist rows are left at zero.
pub fn hermitian_field(grid: Grid, coeff: impl Fn(i64, i64) -> Complex64) -> Field {
    let n = grid.n();
    let mut s = SpectralField::zeros(grid);
    {
        let c = s.coeffs_mut();
        for a in 0..n {
            for b in 0..n {
                if grid.is_nyquist(a, b) {
                    continue;
                }
                let (k1, k2) = grid.wavevector(a, b);
                if !is_canonical(k1, k2) {
                    continue;
                }
                let v = coeff(k1, k2);
                c[a * n + b] = v;
                let ma = grid.index_of(-k1).expect("on lattice");
                let mb = grid.index_of(-k2).expect("on lattice");
                c[ma * n + mb] = v.conj();
            }
        }
    }
    s.to_field()
}

fn phase(seed: u64, k1: i64, k2: i64) -> Complex64 {
    let mut rng = mode_stream(seed, k1, k2);
    let p: f64 = rng.random::<f64>() * 2.0 * PI;
    Complex64::from_polar(1.0, p)
}

/// Random-phase field with |f^(k)| = (2pi)^2 |k|^{-alpha-1}; block sup norms scale like 2^{-j alpha}.
pub fn synthesize_holder(grid: Grid, alpha: f64, seed: u64) -> Field {
    let w = (2.0 * PI).powi(2);
    hermitian_field(grid, |k1, k2| {
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        phase(seed, k1, k2) * (w * r.powf(-alpha - 1.0))
    })
}

/// Deterministic radial field f^(k) = (2pi)^2 |k|^{-s}.
pub fn synthesize_radial(grid: Grid, s: f64) -> Field {
    let w = (2.0 * PI).powi(2);
    hermitian_field(grid, |k1, k2| {
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        Complex64::new(w * r.powf(-s), 0.0)
    })
}

/// Gaussian coefficients on |k|_inf <= kmax, plus a random mean.
pub fn random_band_limited(grid: Grid, kmax: i64, seed: u64) -> Field {
    let w = (2.0 * PI).powi(2);
    let mut f = hermitian_field(grid, |k1, k2| {
        if k1.abs() > kmax || k2.abs() > kmax {
            return Complex64::new(0.0, 0.0);
        }
        let mut rng = mode_stream(seed, k1, k2);
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        Complex64::new(x, y) * (w * 0.25 / (1.0 + (k1 * k1 + k2 * k2) as f64).sqrt())
    });
    let mut rng = mode_stream(seed, 0, 0);
    let m: f64 = rng.sample(StandardNormal);
    f.values_mut().iter_mut().for_each(|v| *v += 0.5 * m);
    f
}

/// Weierstrass-type field sum_j 2^{-j alpha} (cos(2^j x1 + p_j) + cos(2^j x2 + q_j)) over
/// the octaves below n/2. Its block sup norms follow 2^{-j alpha} with no logarithmic factor.
pub fn synthesize_lacunary(grid: Grid, alpha: f64, seed: u64) -> Field {
    let n = grid.n();
    let mut octaves = Vec::new();
    let mut k = 1usize;
    while 2 * k < n {
        let mut rng = mode_stream(seed, k as i64, -(k as i64));
        let p: f64 = rng.random::<f64>() * 2.0 * PI;
        let q: f64 = rng.random::<f64>() * 2.0 * PI;
        octaves.push((k as f64, (k as f64).powf(-alpha), p, q));
        k *= 2;
    }
    Field::from_fn(grid, |x, y| {
        octaves.iter().map(|&(k, a, p, q)| a * ((k * x + p).cos() + (k * y + q).cos())).sum()
    })
}

/// One axis frequency per Littlewood-Paley level: 1, 2, then 3 * 2^m below n/2.
/// Level -1 holds 1, level 0 holds 2 and level m >= 1 holds 3 * 2^(m-1), so the
/// top level is populated too.
pub fn level_frequencies(grid: Grid) -> Vec<i64> {
    let half = grid.n() as i64 / 2;
    let mut ks = vec![1, 2];
    let mut k = 3;
    while k < half {
        ks.push(k);
        k *= 2;
    }
    ks
}

/// Amplitudes k^{-alpha} on `level_frequencies`.
pub fn octave_amplitudes(grid: Grid, alpha: f64) -> Vec<f64> {
    level_frequencies(grid).iter().map(|&k| (k as f64).powf(-alpha)).collect()
}

/// Amplitudes whose partial sums over levels -1..=i equal 2^{-alpha (i + 2)}, so
/// that the low-pass parts S_j f of the aligned field grow exactly like 2^{-alpha j}.
pub fn geometric_amplitudes(grid: Grid, alpha: f64) -> Vec<f64> {
    let partial = |i: i32| 2f64.powf(-alpha * (i + 2) as f64);
    (0..level_frequencies(grid).len() as i32)
        .map(|idx| {
            let i = idx - 1;
            if idx == 0 {
                partial(i)
            } else {
                partial(i) - partial(i - 1)
            }
        })
        .collect()
}

/// sum_l a_l (cos(k_l x1 + p_l) + cos(k_l x2 + q_l)) over `level_frequencies`.
/// Phases are drawn from `seed`; with `None` every phase is zero and all
/// octaves peak together at the origin.
pub fn synthesize_octaves(grid: Grid, amplitudes: &[f64], seed: Option<u64>) -> Field {
    let terms: Vec<(f64, f64, f64, f64)> = level_frequencies(grid)
        .into_iter()
        .zip(amplitudes)
        .map(|(k, &a)| {
            let (p, q) = match seed {
                Some(s) => {
                    let mut rng = mode_stream(s, k, -k);
                    (rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI)
                }
                None => (0.0, 0.0),
            };
            (k as f64, a, p, q)
        })
        .collect();
    Field::from_fn(grid, |x, y| {
        terms.iter().map(|&(k, a, p, q)| a * ((k * x + p).cos() + (k * y + q).cos())).sum()
    })
}
