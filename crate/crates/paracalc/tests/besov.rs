use paracalc::besov::{block_sup_norms, fit_block_decay, fit_line};
use paracalc::para::{para_gt, para_lt, resonant};
use paracalc::synth::{random_band_limited, synthesize_holder, synthesize_octaves, octave_amplitudes};
use paracalc::{dealiased_product, estimate_regularity, lp_block, lp_low, Field, Grid};
use paracalc_oracle::{block_sup, least_squares, naive_multiplier};
use proptest::prelude::*;

fn step(u: f64) -> f64 {
    let tail = |v: f64| if v <= 0.0 { 0.0 } else { (-1.0 / v).exp() };
    if u >= 1.0 {
        1.0
    } else {
        tail(u) / (tail(u) + tail(1.0 - u))
    }
}

fn cut(r: f64) -> f64 {
    1.0 - step((r - 1.1) / 0.3)
}

/// Block multiplier at level j for a grid whose top level is `top`.
fn block(j: i32, top: i32, k1: i64, k2: i64) -> f64 {
    let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
    match j {
        -1 => cut(r),
        j if j == top => 1.0 - cut(r / 2f64.powi(top)),
        j => cut(r / 2f64.powi(j + 1)) - cut(r / 2f64.powi(j)),
    }
}

#[test]
fn block_norms_match_naive_blocks() {
    let grid = Grid::new(32).unwrap();
    let f = synthesize_holder(grid, 0.3, 5);
    let top = 3;
    let fast = block_sup_norms(&f);
    assert_eq!(fast.len(), (top + 2) as usize);
    for j in -1..=top {
        let want = block_sup(f.values(), 32, |a, b| block(j, top, a, b));
        assert!((fast[(j + 1) as usize] - want).abs() < 1e-12, "level {j}");
    }
}

#[test]
fn low_part_matches_naive_multiplier() {
    let grid = Grid::new(32).unwrap();
    let f = random_band_limited(grid, 15, 8);
    for j in 1..=3 {
        let want = naive_multiplier(f.values(), 32, |a, b| cut(((a * a + b * b) as f64).sqrt() / 2f64.powi(j - 1)));
        let got = lp_low(&f, j).unwrap();
        let diff = got.values().iter().zip(&want).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff < 1e-12, "level {j}");
    }
    assert_eq!(lp_low(&f, 0).unwrap().sup_norm(), 0.0);
}

#[test]
fn line_fit_agrees_with_normal_equations() {
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let ys = [0.3, -0.4, -1.2, -1.7, -2.6];
    let fit = fit_line(&xs, &ys);
    let (intercept, slope) = least_squares(&xs, &ys);
    assert!((fit.slope - slope).abs() < 1e-14);
    assert!((fit.intercept - intercept).abs() < 1e-14);
}

#[test]
fn decay_fit_of_clean_octaves() {
    let grid = Grid::new(128).unwrap();
    let amps = octave_amplitudes(grid, 0.6);
    let f = synthesize_octaves(grid, &amps, None);
    let fit = fit_block_decay(&block_sup_norms(&f)).unwrap();
    assert!((fit.slope + 0.6).abs() < 0.05, "slope {}", fit.slope);
}

#[test]
fn regularity_of_random_holder_fields() {
    let grid = Grid::new(128).unwrap();
    for alpha in [-0.5, 0.5, 1.2] {
        let r = estimate_regularity(&synthesize_holder(grid, alpha, 3)).unwrap();
        assert!((r.alpha - alpha).abs() < 0.35, "alpha {alpha} fitted {}", r.alpha);
    }
    assert!(estimate_regularity(&Field::constant(grid, 1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_reconstruct_the_field(seed in any::<u64>()) {
        let grid = Grid::new(32).unwrap();
        let f = synthesize_holder(grid, 0.2, seed);
        let mut sum = Field::zeros(grid);
        for j in -1..=3 {
            sum = &sum + &lp_block(&f, j).unwrap();
        }
        prop_assert!(sum.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn bony_pieces_sum_to_product(seed in any::<u64>(), a in -1.0f64..1.5, b in -1.0f64..1.5) {
        let grid = Grid::new(32).unwrap();
        let f = synthesize_holder(grid, a, seed);
        let g = synthesize_holder(grid, b, seed.wrapping_add(1));
        let sum = &(&para_lt(&f, &g) + &resonant(&f, &g)) + &para_gt(&f, &g);
        let whole = dealiased_product(&f, &g);
        prop_assert!(sum.max_abs_diff(&whole) < 1e-11 * (1.0 + whole.sup_norm()));
        prop_assert!(para_gt(&f, &g).max_abs_diff(&para_lt(&g, &f)) < 1e-13);
    }
}
