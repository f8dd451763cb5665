//! Classical IMEX solver and the paracontrolled fixed-point solver.

use serde::{Deserialize, Serialize};

use crate::besov::besov_norm;
use crate::coeff::DiffusionSpec;
use crate::duhamel::{parametric_duhamel, parametric_heat};
use crate::error::{Error, Result};
use crate::eta::{EtaGrid, ParamField, ParamSlab};
use crate::field::{Field, SpectralField, TimeSlab};
use crate::grid::Grid;
use crate::noise::{counterterm_rhs, EnhancedNoise};
use crate::nonlinear::{apply_l, nl_compose, nl_para_lt, self_resonance, time_derivative, SmoothedModulation};
use crate::para::{commutator_c, para_gt, para_lt, paralin_remainder_of, resonant};
use crate::spectral::{dealiased_product, laplacian};

/// Guard for the explicit solvers.
pub const BLOWUP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    pub max_iter: usize,
    /// Stop when the sup distance between successive iterates of u is below this.
    pub tolerance: f64,
    /// Relaxation factor in (0, 1]; 1 is undamped.
    pub damping: f64,
    /// How often the horizon may be halved when the iteration does not contract.
    pub max_halvings: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { max_iter: 25, tolerance: 1e-6, damping: 1.0, max_halvings: 3 }
    }
}

/// Source of L U# inside Psi(a(u), U#).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SharpForcing {
    /// Apply the discrete operator d_t - eta Laplacian to the current U#.
    #[default]
    Stencil,
    /// Reuse the forcing of the previous iterate.
    Lagged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub n: usize,
    pub horizon: f64,
    pub dt: f64,
    pub lambda: f64,
    pub eta_nodes: usize,
    pub imex_split: f64,
    pub picard: PicardConfig,
    pub alpha: f64,
    pub sharp_forcing: SharpForcing,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: 64,
            horizon: 0.05,
            dt: 1e-3,
            lambda: 0.5,
            eta_nodes: 5,
            imex_split: 1.0,
            picard: PicardConfig::default(),
            alpha: 0.8,
            sharp_forcing: SharpForcing::Stencil,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, spec: &DiffusionSpec) -> Result<()> {
        Grid::new(self.n)?;
        if !(self.dt > 0.0) || !(self.horizon > 0.0) || self.dt > self.horizon {
            return Err(Error::Invalid(format!("need 0 < dt = {} <= horizon = {}", self.dt, self.horizon)));
        }
        let up = spec.upper();
        if self.imex_split < up / 2.0 - 1e-12 || self.imex_split > up + 1e-12 {
            return Err(Error::Invalid(format!(
                "imex split {} outside [{}, {}]",
                self.imex_split,
                up / 2.0,
                up
            )));
        }
        if !(self.picard.tolerance > 0.0) {
            return Err(Error::Invalid("picard tolerance must be positive".into()));
        }
        if !(self.picard.damping > 0.0 && self.picard.damping <= 1.0) {
            return Err(Error::Invalid("picard damping must lie in (0, 1]".into()));
        }
        EtaGrid::new(self.lambda, self.eta_nodes)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n)
    }

    pub fn eta_grid(&self) -> Result<EtaGrid> {
        EtaGrid::new(self.lambda, self.eta_nodes)
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

/// Explicit part of one IMEX step, in Fourier space, plus the semi-implicit solve.
fn imex_advance(u: &Field, explicit: &Field, dt: f64, split: f64) -> Field {
    let grid = u.grid();
    let mut su = u.spectrum();
    let se = explicit.spectrum();
    for (idx, (c, e)) in su.coeffs_mut().iter_mut().zip(se.coeffs()).enumerate() {
        let k2 = grid.k2_at(idx);
        *c = (*c + dt * e) / (1.0 + dt * split * k2);
    }
    su.to_field()
}

/// d_t u - a1(u) Laplacian u = a2(u) xi_eps + counterterm, IMEX in time.
pub fn solve_classical_rhs(
    cfg: &SolverConfig,
    a1: &DiffusionSpec,
    a2: &DiffusionSpec,
    xi_eps: &Field,
    sigma: f64,
    u0: &Field,
) -> Result<TimeSlab> {
    cfg.validate(a1)?;
    let grid = cfg.grid()?;
    grid.check_same(&u0.grid())?;
    grid.check_same(&xi_eps.grid())?;
    let steps = cfg.steps();
    let split = cfg.imex_split;
    let mut frames = Vec::with_capacity(steps + 1);
    frames.push(u0.clone());
    let mut u = u0.clone();
    for step in 1..=steps {
        let coef = u.map(|v| a1.a(v) - split);
        let mut explicit = dealiased_product(&coef, &laplacian(&u));
        explicit += &dealiased_product(&u.map(|v| a2.a(v)), xi_eps);
        explicit += &counterterm_rhs(a1, a2, &u, sigma)?;
        u = imex_advance(&u, &explicit, cfg.dt, split);
        let norm = u.sup_norm();
        if !norm.is_finite() || norm > BLOWUP {
            return Err(Error::Instability { step, norm });
        }
        frames.push(u.clone());
    }
    TimeSlab::new(0.0, cfg.dt, frames)
}

/// d_t u - a(u) Laplacian u = xi_eps + sigma a'(u)/a(u)^2.
pub fn solve_classical(cfg: &SolverConfig, spec: &DiffusionSpec, xi_eps: &Field, sigma: f64, u0: &Field) -> Result<TimeSlab> {
    let unit = DiffusionSpec::constant(1.0)?;
    solve_classical_rhs(cfg, spec, &unit, xi_eps, sigma, u0)
}

/// u0# = u0 - Pi_<(a(u0), vartheta).
pub fn usharp0(u0: &Field, theta: &ParamField, spec: &DiffusionSpec) -> Result<Field> {
    let g = spec.a_of(u0);
    Ok(u0 - &nl_para_lt(&g, theta)?)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// sup distance between successive iterates of u.
    pub residuals: Vec<f64>,
    /// Relaxation factor used at each iteration.
    pub damping: Vec<f64>,
    pub halvings: usize,
    pub horizon: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct ParacontrolledState {
    pub u: TimeSlab,
    pub usharp: ParamSlab,
    pub u0sharp: Field,
    pub theta_slab: TimeSlab,
    /// Forcing F that produced `usharp`.
    pub forcing: TimeSlab,
    /// e^{eta Laplacian t} u0# on every node.
    pub heat: ParamSlab,
    pub diagnostics: Diagnostics,
}

impl ParacontrolledState {
    /// Picard starting point: u constant in time, U# = 0.
    pub fn initial(cfg: &SolverConfig, data: &EnhancedNoise, spec: &DiffusionSpec, u0: &Field) -> Result<Self> {
        let eta = cfg.eta_grid()?;
        let count = cfg.steps() + 1;
        let u = TimeSlab::constant(u0, 0.0, cfg.dt, count)?;
        let zero = TimeSlab::constant(&Field::zeros(u0.grid()), 0.0, cfg.dt, count)?;
        let u0sharp = usharp0(u0, &data.theta, spec)?;
        let heat = parametric_heat(&u0sharp, &eta, 0.0, cfg.dt, count)?;
        Ok(ParacontrolledState {
            u: u.clone(),
            usharp: ParamSlab::constant(eta, zero.clone()),
            u0sharp,
            theta_slab: u,
            forcing: zero,
            heat,
            diagnostics: Diagnostics { horizon: cfg.horizon, ..Default::default() },
        })
    }
}

/// Terms of the paracontrolled decomposition at every frame.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// a'(u) Pi_diamond(a(u), Theta_2)
    pub counter: TimeSlab,
    pub phi1: TimeSlab,
    pub phi2: TimeSlab,
    /// Psi(a,vartheta) + Psi(a,U#) + Psi(a, P u0#)
    pub psi: TimeSlab,
    /// a(u) < Laplacian u
    pub para: TimeSlab,
    pub theta: TimeSlab,
    /// Pi_<<(a(u), U#) and Pi_<<(a(u), P u0#)
    pub sharp: TimeSlab,
    pub heat: TimeSlab,
}

fn slab(grid: Grid, like: &TimeSlab, frames: Vec<Field>) -> TimeSlab {
    TimeSlab::new(like.t0(), like.dt(), frames).unwrap_or_else(|_| {
        panic!("slab on n = {} with {} frames", grid.n(), like.len())
    })
}

/// Evaluates every term of F for the current (u, U#).
pub fn decompose(
    state: &ParacontrolledState,
    data: &EnhancedNoise,
    spec: &DiffusionSpec,
    mode: SharpForcing,
) -> Result<Decomposition> {
    let u = &state.u;
    let grid = u.grid();
    let eta = state.usharp.eta().clone();
    let g = u.map_frames(|f| spec.a_of(f));
    let modu = SmoothedModulation::new(&g, &eta)?;
    let theta = modu.apply(&data.theta)?;
    let sharp = modu.apply(&state.usharp)?;
    let heat = modu.apply(&state.heat)?;
    let lu = match mode {
        SharpForcing::Stencil => apply_l(&state.usharp)?,
        SharpForcing::Lagged => ParamSlab::constant(eta.clone(), state.forcing.clone()),
    };
    let lifted = modu.apply(&lu)?;
    // d_t S - a < Laplacian S with S = theta + sharp + heat, shared by the three Psi terms.
    let total = theta.zip_frames(&sharp, |a, b| a + b)?.zip_frames(&heat, |a, b| a + b)?;
    let dts = time_derivative(&total)?;
    let raw = self_resonance(&data.theta);

    let per_frame = crate::parallel::map_range(u.len(), |m| -> Result<[Field; 5]> {
        let uf = u.frame(m);
        let a = g.frame(m);
        let da = spec.da_of(uf);
        let lap_u = laplacian(uf);
        let th = theta.frame(m);
        let lap_th = laplacian(th);
        let counter = dealiased_product(&da, &nl_compose(a, &data.xi2)?);

        let lambda = resonant(th, &lap_th) - nl_compose(a, &raw)?;
        let us = sharp.frame(m);
        let mut phi1 = para_gt(a, &lap_u);
        phi1 += &commutator_c(&da, uf, &lap_th);
        phi1 += &resonant(&paralin_remainder_of(a, &da, uf), &lap_th);
        phi1 += &dealiased_product(&da, &lambda);
        phi1 += &dealiased_product(&da, &resonant(us, &lap_th));
        phi1 += &resonant(a, &laplacian(us));

        let phi2 = if m == 0 {
            Field::zeros(grid)
        } else {
            let ps = heat.frame(m);
            dealiased_product(&da, &resonant(ps, &lap_th)) + resonant(a, &laplacian(ps))
        };

        let para = para_lt(a, &lap_u);
        let mut psi = data.xi_eps.clone();
        psi += lifted.frame(m);
        psi -= dts.frame(m);
        psi += &para_lt(a, &laplacian(total.frame(m)));
        Ok([counter, phi1, phi2, psi, para])
    });
    let mut cols: [Vec<Field>; 5] = Default::default();
    for r in per_frame {
        for (c, f) in cols.iter_mut().zip(r?) {
            c.push(f);
        }
    }
    let [counter, phi1, phi2, psi, para] = cols;
    Ok(Decomposition {
        counter: slab(grid, u, counter),
        phi1: slab(grid, u, phi1),
        phi2: slab(grid, u, phi2),
        psi: slab(grid, u, psi),
        para: slab(grid, u, para),
        theta,
        sharp,
        heat,
    })
}

/// F(u, U#, u0#) as an eta-independent slab.
pub fn forcing(d: &Decomposition) -> Result<TimeSlab> {
    d.counter
        .zip_frames(&d.phi1, |a, b| a + b)?
        .zip_frames(&d.phi2, |a, b| a + b)?
        .zip_frames(&d.psi, |a, b| a + b)
}

/// F broadcast over the eta nodes.
pub fn build_f(
    state: &ParacontrolledState,
    data: &EnhancedNoise,
    spec: &DiffusionSpec,
    mode: SharpForcing,
) -> Result<ParamSlab> {
    let d = decompose(state, data, spec, mode)?;
    Ok(ParamSlab::constant(state.usharp.eta().clone(), forcing(&d)?))
}

/// One application of the fixed-point map with relaxation `damping`.
pub fn gamma_step(
    state: &ParacontrolledState,
    data: &EnhancedNoise,
    spec: &DiffusionSpec,
    cfg: &SolverConfig,
    damping: f64,
) -> Result<ParacontrolledState> {
    let d = decompose(state, data, spec, cfg.sharp_forcing)?;
    let f = forcing(&d)?;
    let eta = state.usharp.eta().clone();
    let usharp = parametric_duhamel(&f, &eta)?;
    let g = state.u.map_frames(|x| spec.a_of(x));
    let modu = SmoothedModulation::new(&g, &eta)?;
    let lifted = modu.apply(&usharp)?;
    let fresh = d.theta.zip_frames(&lifted, |a, b| a + b)?.zip_frames(&d.heat, |a, b| a + b)?;
    let u = if damping < 1.0 {
        state.u.zip_frames(&fresh, |old, new| {
            let mut out = old.scale(1.0 - damping);
            out.axpy(damping, new);
            out
        })?
    } else {
        fresh
    };
    let residual = u.max_abs_diff(&state.u)?;
    if !residual.is_finite() || u.sup_norm() > BLOWUP {
        return Err(Error::NoContraction(format!("iterate blew up (sup distance {residual:e})")));
    }
    let mut diagnostics = state.diagnostics.clone();
    diagnostics.residuals.push(residual);
    diagnostics.damping.push(damping);
    Ok(ParacontrolledState {
        u,
        usharp,
        u0sharp: state.u0sharp.clone(),
        theta_slab: d.theta,
        forcing: f,
        heat: state.heat.clone(),
        diagnostics,
    })
}

fn increasing_run(res: &[f64], len: usize) -> bool {
    res.len() > len && res[res.len() - len - 1..].windows(2).all(|w| w[1] > w[0])
}

/// Picard iteration of `gamma_step` from u = u0, U# = 0. The horizon is halved
/// (at most `max_halvings` times) when the iteration fails to contract.
pub fn solve_paracontrolled(cfg: &SolverConfig, data: &EnhancedNoise, spec: &DiffusionSpec, u0: &Field) -> Result<ParacontrolledState> {
    cfg.validate(spec)?;
    let mut cfg = cfg.clone();
    let mut halvings = 0;
    loop {
        match picard(&cfg, data, spec, u0) {
            Ok(mut state) => {
                state.diagnostics.halvings = halvings;
                return Ok(state);
            }
            Err(Error::NoContraction(msg)) => {
                if halvings >= cfg.picard.max_halvings || cfg.horizon / 2.0 < 2.0 * cfg.dt {
                    return Err(Error::NoContraction(format!("{msg}; reduce T (last tried {})", cfg.horizon)));
                }
                halvings += 1;
                cfg.horizon /= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
}

fn picard(cfg: &SolverConfig, data: &EnhancedNoise, spec: &DiffusionSpec, u0: &Field) -> Result<ParacontrolledState> {
    let mut state = ParacontrolledState::initial(cfg, data, spec, u0)?;
    let mut damping = cfg.picard.damping;
    let mut relaxed = damping < 1.0;
    for _ in 0..cfg.picard.max_iter {
        state = gamma_step(&state, data, spec, cfg, damping)?;
        let res = &state.diagnostics.residuals;
        if *res.last().unwrap() <= cfg.picard.tolerance {
            state.diagnostics.converged = true;
            return Ok(state);
        }
        if increasing_run(res, 3) {
            if relaxed {
                return Err(Error::NoContraction(format!("residual grew three times in a row: {res:?}")));
            }
            relaxed = true;
            damping = 0.5;
        }
    }
    Err(Error::NoContraction(format!(
        "tolerance {} not reached in {} iterations (last {:e})",
        cfg.picard.tolerance,
        cfg.picard.max_iter,
        state.diagnostics.residuals.last().copied().unwrap_or(f64::NAN)
    )))
}

/// a(u) <> Laplacian u = a < Laplacian u + a' Pi_diamond(a, Xi_2) + Phi_1 + Phi_2 on every frame.
pub fn renormalized_product_slab(state: &ParacontrolledState, data: &EnhancedNoise, spec: &DiffusionSpec) -> Result<TimeSlab> {
    let d = decompose(state, data, spec, SharpForcing::Stencil)?;
    d.para
        .zip_frames(&d.counter, |a, b| a + b)?
        .zip_frames(&d.phi1, |a, b| a + b)?
        .zip_frames(&d.phi2, |a, b| a + b)
}

/// The renormalized diffusion term at the final time.
pub fn renormalized_product(state: &ParacontrolledState, data: &EnhancedNoise, spec: &DiffusionSpec) -> Result<Field> {
    Ok(renormalized_product_slab(state, data, spec)?.last().clone())
}

/// sup_t of the C^{alpha-2} norm of d_t u - (a(u) <> Laplacian u) - xi_eps.
pub fn renormalized_residual(
    state: &ParacontrolledState,
    data: &EnhancedNoise,
    spec: &DiffusionSpec,
    alpha: f64,
) -> Result<f64> {
    let prod = renormalized_product_slab(state, data, spec)?;
    let dt = time_derivative(&state.u)?;
    let mut worst = 0.0f64;
    for m in 1..state.u.len() {
        let r = dt.frame(m) - prod.frame(m) - &data.xi_eps;
        worst = worst.max(besov_norm(&r, alpha - 2.0).norm);
    }
    Ok(worst)
}

/// Residual of the classical equation for a given trajectory, with the same stencil.
pub fn classical_residual(
    u: &TimeSlab,
    spec: &DiffusionSpec,
    xi_eps: &Field,
    sigma: f64,
    alpha: f64,
) -> Result<f64> {
    let dt = time_derivative(u)?;
    let unit = DiffusionSpec::constant(1.0)?;
    let mut worst = 0.0f64;
    for m in 1..u.len() {
        let f = u.frame(m);
        let mut r = dt.frame(m) - &dealiased_product(&spec.a_of(f), &laplacian(f));
        r -= xi_eps;
        r -= &counterterm_rhs(spec, &unit, f, sigma)?;
        worst = worst.max(besov_norm(&r, alpha - 2.0).norm);
    }
    Ok(worst)
}

/// Exact solution of d_t u = Laplacian u + xi for constant unit diffusion.
pub fn linear_heat_solution(u0: &Field, xi: &Field, t: f64) -> Field {
    let grid = u0.grid();
    let s0 = u0.spectrum();
    let sx = xi.spectrum();
    let mut out = SpectralField::zeros(grid);
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let k2 = grid.k2_at(idx);
        let e = (-k2 * t).exp();
        let w = if k2 == 0.0 { t } else { (1.0 - e) / k2 };
        *c = s0.coeffs()[idx] * e + sx.coeffs()[idx] * w;
    }
    out.to_field()
}
