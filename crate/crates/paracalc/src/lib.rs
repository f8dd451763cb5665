//! Spectral paracontrolled calculus on the two-dimensional torus.

pub mod error;
mod fft;
pub mod field;
pub mod grid;
pub mod parallel;
pub mod partition;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Field, SpectralField, TimeSlab};
pub use grid::Grid;
pub use partition::{make_partition, Blocks, DyadicPartition};
pub use spectral::{
    dealiased_product, fourier_multiplier, from_spectral, heat_propagate, inv_laplacian,
    laplacian, lp_block, lp_low, to_spectral,
};
pub mod besov;
pub mod kernel;
pub mod para;
pub mod rng;
pub mod synth;

pub use besov::{besov_norm, estimate_regularity, parabolic_norm, BesovReport};
pub use kernel::TimeKernel;
pub use para::{commutator_c, para_gt, para_lt, paralin_remainder, resonant, time_smoothed_para};
pub mod eta;
pub use eta::{eta_sup_norm, eval_param, EtaGrid, EtaLaw, InnerNorm, ParamField, ParamSlab};
pub mod nonlinear;
pub use nonlinear::{
    apply_l, nl_commutator_lambda, nl_compose, nl_para_gt, nl_para_lt, nl_para_res,
    nl_para_smoothed, para_lt_op, psi, SmoothedModulation,
};
pub mod duhamel;
pub use duhamel::{parametric_duhamel, parametric_heat};
pub mod coeff;
pub mod noise;
pub mod snapshot;
pub mod sum;

pub use coeff::{DiffusionKind, DiffusionSpec};
pub use noise::{
    counterterm_rhs, enhanced_noise, h_eps, h_eps_general, make_vartheta, mollify,
    sample_param_noise, sample_white_noise, sigma_eps, wick_mc_estimate, EnhancedNoise,
    Mollifier, NoiseFactor, WickEstimate,
};
pub mod kernel_reference;
pub mod solvers;
pub use solvers::{
    build_f, gamma_step, renormalized_product, solve_classical, solve_classical_rhs,
    solve_paracontrolled, usharp0, ParacontrolledState, PicardConfig, SharpForcing, SolverConfig,
};
