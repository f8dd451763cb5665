use std::f64::consts::PI;

use paracalc::spectral::{dealiased_map, drop_nyquist, partial};
use paracalc::synth::{random_band_limited, synthesize_holder};
use paracalc::{dealiased_product, heat_propagate, inv_laplacian, laplacian, Field, Grid};
use paracalc_oracle::{naive_dft, naive_multiplier, truncated_product};
use proptest::prelude::*;

fn arbitrary_field(n: usize, seed: u64) -> Field {
    // includes Nyquist content, unlike the synthesizers
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let values = (0..n * n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    Field::from_values(Grid::new(n).unwrap(), values).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn spectrum_matches_naive_transform() {
    for (n, seed) in [(16, 1), (32, 2)] {
        let f = arbitrary_field(n, seed);
        let naive = naive_dft(f.values(), n);
        let s = f.spectrum();
        let h = (n / 2) as i64;
        for k1 in -h..h {
            for k2 in -h..h {
                let want = naive[k1.rem_euclid(n as i64) as usize * n + k2.rem_euclid(n as i64) as usize] * (4.0 * PI * PI);
                assert!((s.at(k1, k2) - want).norm() < 1e-12, "k = ({k1}, {k2})");
            }
        }
    }
}

#[test]
fn multipliers_match_naive_transform() {
    let n = 16;
    let f = arbitrary_field(n, 7);
    let lap = naive_multiplier(f.values(), n, |a, b| -((a * a + b * b) as f64));
    assert!(max_diff(laplacian(&f).values(), &lap) < 1e-10);
    let heat = naive_multiplier(f.values(), n, |a, b| (-0.3 * 0.05 * (a * a + b * b) as f64).exp());
    assert!(max_diff(heat_propagate(&f, 0.3, 0.05).unwrap().values(), &heat) < 1e-12);
    let dropped = naive_multiplier(f.values(), n, |a, b| if a == -8 || b == -8 { 0.0 } else { 1.0 });
    assert!(max_diff(drop_nyquist(&f).values(), &dropped) < 1e-12);
}

#[test]
fn derivative_of_a_sine() {
    let grid = Grid::new(32).unwrap();
    let f = Field::from_fn(grid, |x, y| (3.0 * x - 2.0 * y).sin());
    let want = Field::from_fn(grid, |x, y| -2.0 * (3.0 * x - 2.0 * y).cos());
    assert!(partial(&f, 1).max_abs_diff(&want) < 1e-11);
}

#[test]
fn dealiased_product_matches_convolution() {
    for (n, seed) in [(16, 3), (32, 4)] {
        let f = arbitrary_field(n, seed);
        let g = arbitrary_field(n, seed + 10);
        let want = truncated_product(f.values(), g.values(), n);
        assert!(max_diff(dealiased_product(&f, &g).values(), &want) < 1e-12);
        let square = truncated_product(f.values(), f.values(), n);
        let band = Field::from_values(f.grid(), f.values().to_vec()).unwrap();
        let got = dealiased_map(&drop_nyquist(&band), |v| v * v);
        assert!(max_diff(got.values(), &square) < 1e-12);
    }
}

#[test]
fn inverse_laplacian_inverts() {
    let grid = Grid::new(32).unwrap();
    let f = synthesize_holder(grid, 0.5, 3);
    let f = &f - &Field::constant(grid, f.mean());
    let g = inv_laplacian(&f).unwrap();
    assert!(laplacian(&g).scale(-1.0).max_abs_diff(&drop_nyquist(&f)) < 1e-10 * f.sup_norm().max(1.0));
    assert!(inv_laplacian(&Field::constant(grid, 1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_and_parseval(seed in any::<u64>()) {
        let f = arbitrary_field(16, seed);
        let s = f.spectrum();
        prop_assert!(s.to_field().max_abs_diff(&f) < 1e-13);
        let physical = f.l2_norm_sq();
        let spectral: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() / (4.0 * PI * PI);
        prop_assert!((physical - spectral).abs() < 1e-10 * physical);
    }

    #[test]
    fn product_is_bilinear_and_symmetric(seed in any::<u64>(), a in -3.0f64..3.0) {
        let grid = Grid::new(32).unwrap();
        let f = random_band_limited(grid, 15, seed);
        let g = random_band_limited(grid, 15, seed ^ 1);
        let k = random_band_limited(grid, 15, seed ^ 2);
        let lhs = dealiased_product(&(&f.scale(a) + &g), &k);
        let rhs = &dealiased_product(&f, &k).scale(a) + &dealiased_product(&g, &k);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        prop_assert!(dealiased_product(&f, &g).max_abs_diff(&dealiased_product(&g, &f)) < 1e-12);
    }

    #[test]
    fn heat_contracts_sup_norm(seed in any::<u64>(), t in 0.0f64..0.5, eta in 0.5f64..1.0) {
        let f = random_band_limited(Grid::new(32).unwrap(), 10, seed);
        let g = heat_propagate(&f, eta, t).unwrap();
        prop_assert!(g.sup_norm() <= f.sup_norm() * (1.0 + 1e-10));
        prop_assert!((g.mean() - f.mean()).abs() < 1e-12);
        let two = heat_propagate(&heat_propagate(&f, eta, t / 2.0).unwrap(), eta, t / 2.0).unwrap();
        prop_assert!(two.max_abs_diff(&g) < 1e-12);
    }
}
