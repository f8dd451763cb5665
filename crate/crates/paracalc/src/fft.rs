//! Cached 2D complex FFTs. Plans live in a read-mostly registry keyed by
//! size and direction, safe for concurrent lookup.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

type Plan = Arc<dyn Fft<f64>>;

fn registry() -> &'static RwLock<HashMap<(usize, bool), Plan>> {
    static PLANS: OnceLock<RwLock<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    PLANS.get_or_init(|| RwLock::new(HashMap::new()))
}

fn plan(n: usize, inverse: bool) -> Plan {
    if let Some(p) = registry().read().expect("fft registry").get(&(n, inverse)) {
        return p.clone();
    }
    let mut map = registry().write().expect("fft registry");
    map.entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized 2D DFT of an n x n row-major array, in place.
/// Forward uses e^{-ik.x}; inverse uses e^{+ik.x} without the 1/n^2 factor.
pub fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n);
    let p = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];
    p.process_with_scratch(data, &mut scratch);
    transpose(data, n);
    p.process_with_scratch(data, &mut scratch);
    transpose(data, n);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_then_inverse_scales_by_n_squared() {
        let n = 16;
        let orig: Vec<Complex64> = (0..n * n).map(|i| Complex64::new((i % 7) as f64, (i % 3) as f64 - 1.0)).collect();
        let mut data = orig.clone();
        fft2(&mut data, n, false);
        fft2(&mut data, n, true);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        let n = 16;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data[0] = Complex64::new(1.0, 0.0);
        fft2(&mut data, n, false);
        assert!(data.iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }
}
