use paracalc::noise::EnhancedNoise;
use paracalc::solvers::linear_heat_solution;
use paracalc::synth::random_band_limited;
use paracalc::{
    enhanced_noise, sample_white_noise, solve_classical, solve_paracontrolled, DiffusionSpec, EtaGrid, Field, Grid,
    Mollifier, SolverConfig,
};

fn config(n: usize, horizon: f64, dt: f64) -> SolverConfig {
    SolverConfig { n, horizon, dt, ..SolverConfig::default() }
}

#[test]
fn unit_diffusion_matches_exact_heat_solution() {
    let cfg = config(32, 0.05, 1e-4);
    let grid = cfg.grid().unwrap();
    let spec = DiffusionSpec::constant(1.0).unwrap();
    let u0 = random_band_limited(grid, 6, 1);
    let xi = random_band_limited(grid, 6, 2);
    let u = solve_classical(&cfg, &spec, &xi, 0.7, &u0).unwrap();
    let exact = linear_heat_solution(&u0, &xi, u.horizon());
    assert!(u.last().max_abs_diff(&exact) < 1e-3 * exact.sup_norm(), "err {}", u.last().max_abs_diff(&exact));
}

#[test]
fn classical_solver_converges_in_time() {
    let grid = Grid::new(32).unwrap();
    let spec = DiffusionSpec::default();
    let u0 = random_band_limited(grid, 4, 3);
    let xi = random_band_limited(grid, 4, 4);
    let run = |dt: f64| solve_classical(&config(32, 0.04, dt), &spec, &xi, 0.0, &u0).unwrap().last().clone();
    let (coarse, mid, fine) = (run(4e-3), run(2e-3), run(1e-3));
    let (e1, e2) = (coarse.max_abs_diff(&fine), mid.max_abs_diff(&fine));
    assert!(e2 < 0.6 * e1, "errors {e1} {e2}");
}

#[test]
fn solvers_agree_without_noise() {
    let cfg = config(32, 0.02, 5e-4);
    let grid = cfg.grid().unwrap();
    let eta = cfg.eta_grid().unwrap();
    let spec = DiffusionSpec::default();
    let u0 = random_band_limited(grid, 3, 5);
    let classical = solve_classical(&cfg, &spec, &Field::zeros(grid), 0.0, &u0).unwrap();
    let state = solve_paracontrolled(&cfg, &EnhancedNoise::zero(grid, &eta), &spec, &u0).unwrap();
    assert!(state.diagnostics.converged);
    let n = classical.len().min(state.u.len()) - 1;
    let diff = classical.frame(n).max_abs_diff(state.u.frame(n));
    assert!(diff < 1e-3 * classical.sup_norm(), "gap {diff}");
}

#[test]
fn paracontrolled_solve_is_reproducible() {
    let cfg = config(32, 0.01, 1e-3);
    let grid = cfg.grid().unwrap();
    let eta = EtaGrid::new(cfg.lambda, cfg.eta_nodes).unwrap();
    let xi = sample_white_noise(grid, 8);
    let data = enhanced_noise(&xi, 0.25, Mollifier::Gaussian, &eta, 8).unwrap();
    let u0 = Field::zeros(grid);
    let a = solve_paracontrolled(&cfg, &data, &DiffusionSpec::default(), &u0).unwrap();
    let b = solve_paracontrolled(&cfg, &data, &DiffusionSpec::default(), &u0).unwrap();
    assert_eq!(a.u.frames(), b.u.frames());
    assert_eq!(a.diagnostics.residuals, b.diagnostics.residuals);
}

#[test]
fn invalid_step_is_rejected() {
    let grid = Grid::new(32).unwrap();
    let u0 = Field::zeros(grid);
    let bad = config(32, 0.01, 0.02);
    assert!(solve_classical(&bad, &DiffusionSpec::default(), &u0, 0.0, &u0).is_err());
}
