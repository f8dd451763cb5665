//! White noise, mollification, renormalization constants and the enhanced noise.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::path::Path;
use std::sync::Arc;

use crate::coeff::DiffusionSpec;
use crate::error::{Error, Result};
use crate::eta::{EtaGrid, EtaLaw, ParamField};
use crate::field::Field;
use crate::grid::Grid;
use crate::para::resonant;
use crate::rng::{derive_seed, mode_stream};
use crate::spectral::{inv_laplacian, laplacian, radial_multiplier};
use crate::sum::exact_sum;
use crate::synth::hermitian_field;

/// Spectral profile of the mollifier, evaluated at eps*|k|.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mollifier {
    /// e^{-|eps k|^2 / 2}
    #[default]
    Gaussian,
    /// indicator of |eps k| <= 1
    Sharp,
}

impl Mollifier {
    /// Multiplier at |k|^2 for a given eps.
    pub fn multiplier(&self, eps: f64, k2: f64) -> f64 {
        match self {
            Mollifier::Gaussian => (-0.5 * eps * eps * k2).exp(),
            Mollifier::Sharp => {
                if eps * eps * k2 <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Gaussian white noise with E|xi^(k)|^2 = (2pi)^2, zero mean, no Nyquist content.
pub fn sample_white_noise(grid: Grid, seed: u64) -> Field {
    let scale = 2.0 * PI / SQRT_2;
    hermitian_field(grid, |k1, k2| {
        let mut rng = mode_stream(seed, k1, k2);
        let x: f64 = StandardNormal.sample(&mut rng);
        let y: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(x, y) * scale
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterRange { value: eps, lo: 0.0, hi: f64::INFINITY })
    }
}

/// xi_eps = psi_eps * xi.
pub fn mollify(xi: &Field, eps: f64, m: Mollifier) -> Result<Field> {
    check_eps(eps)?;
    Ok(radial_multiplier(xi, |k2| m.multiplier(eps, k2)))
}

/// vartheta(eta) = (-Laplacian)^{-1} xi_eps / eta, tagged as eta^-1.
pub fn make_vartheta(xi_eps: &Field, eta: &EtaGrid) -> Result<ParamField> {
    let v = inv_laplacian(xi_eps)?;
    Ok(ParamField::power(eta.clone(), v, -1))
}

/// Wavevectors k != 0 off the Nyquist rows, sorted by decreasing |k|
/// (ties broken lexicographically).
pub fn radial_order(grid: Grid) -> Vec<(i64, i64)> {
    let h = (grid.n() / 2) as i64;
    let mut ks: Vec<(i64, i64)> = Vec::with_capacity(grid.len());
    for k1 in (1 - h)..h {
        for k2 in (1 - h)..h {
            if k1 != 0 || k2 != 0 {
                ks.push((k1, k2));
            }
        }
    }
    ks.sort_by(|a, b| {
        let ra = a.0 * a.0 + a.1 * a.1;
        let rb = b.0 * b.0 + b.1 * b.1;
        rb.cmp(&ra).then(a.cmp(b))
    });
    ks
}

/// sigma_eps = (2pi)^{-2} sum_{k != 0} psi(eps k)^2 / |k|^2 over the resolved lattice,
/// summed with correct rounding so the value is independent of order.
pub fn sigma_eps(m: Mollifier, eps: f64, grid: Grid) -> Result<f64> {
    check_eps(eps)?;
    let terms = radial_order(grid).into_iter().map(|(k1, k2)| {
        let k2s = (k1 * k1 + k2 * k2) as f64;
        let w = m.multiplier(eps, k2s);
        w * w / k2s
    });
    Ok(exact_sum(terms) / (4.0 * PI * PI))
}

/// H_eps(eta) = -sigma / eta^2.
pub fn h_eps(eta: f64, sigma: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::ParameterRange { value: eta, lo: 0.0, hi: f64::INFINITY });
    }
    Ok(-sigma / (eta * eta))
}

/// (xi_eps, Xi_2) with Xi_2(eta) = vartheta o Delta vartheta - H_eps(eta).
#[derive(Clone, Debug)]
pub struct EnhancedNoise {
    pub xi_eps: Field,
    pub theta: ParamField,
    pub xi2: ParamField,
    pub sigma: f64,
    pub eps: f64,
    pub seed: u64,
    pub mollifier: Mollifier,
}

impl EnhancedNoise {
    pub fn grid(&self) -> Grid {
        self.xi_eps.grid()
    }

    pub fn eta(&self) -> &EtaGrid {
        self.theta.eta()
    }

    /// Raw resonant product vartheta o Delta vartheta as an eta^-2 field.
    pub fn raw_resonance(&self) -> ParamField {
        let base = self.xi2.base().expect("power law").map(|v| v - self.sigma);
        ParamField::power(self.eta().clone(), base, -2)
    }

    /// Same noise with a different counterterm constant.
    pub fn with_sigma(&self, sigma: f64) -> EnhancedNoise {
        let raw = self.raw_resonance();
        let base = raw.base().expect("power law").map(|v| v + sigma);
        EnhancedNoise { xi2: ParamField::power(self.eta().clone(), base, -2), sigma, ..self.clone() }
    }

    /// Zero noise on a grid.
    pub fn zero(grid: Grid, eta: &EtaGrid) -> EnhancedNoise {
        let z = Field::zeros(grid);
        EnhancedNoise {
            xi_eps: z.clone(),
            theta: ParamField::power(eta.clone(), z.clone(), -1),
            xi2: ParamField::power(eta.clone(), z, -2),
            sigma: 0.0,
            eps: 1.0,
            seed: 0,
            mollifier: Mollifier::Gaussian,
        }
    }
}

pub fn enhanced_noise(xi: &Field, eps: f64, m: Mollifier, eta: &EtaGrid, seed: u64) -> Result<EnhancedNoise> {
    let xi_eps = mollify(xi, eps, m)?;
    let sigma = sigma_eps(m, eps, xi.grid())?;
    enhance_with_sigma(xi_eps, sigma, eps, m, eta, seed)
}

/// Enhanced noise with an explicitly chosen counterterm constant.
pub fn enhance_with_sigma(xi_eps: Field, sigma: f64, eps: f64, m: Mollifier, eta: &EtaGrid, seed: u64) -> Result<EnhancedNoise> {
    let theta = make_vartheta(&xi_eps, eta)?;
    let v = theta.base().expect("power law");
    let raw = resonant(v, &laplacian(v));
    let xi2 = ParamField::power(eta.clone(), raw.map(|x| x + sigma), -2);
    Ok(EnhancedNoise { xi_eps, theta, xi2, sigma, eps, seed, mollifier: m })
}

/// Monte-Carlo statistics of vartheta_eps o Delta vartheta_eps at one eta.
#[derive(Clone, Debug)]
pub struct WickEstimate {
    pub mean: Field,
    pub stderr: Field,
    /// Mean over samples of the spatial average, and its standard error.
    pub spatial_mean: f64,
    pub spatial_stderr: f64,
    pub samples: usize,
}

pub fn wick_mc_estimate(samples: usize, eps: f64, eta: f64, grid: Grid, m: Mollifier, seed: u64) -> Result<WickEstimate> {
    if samples < 2 {
        return Err(Error::Invalid("need at least 2 samples".into()));
    }
    check_eps(eps)?;
    if !(eta > 0.0) {
        return Err(Error::ParameterRange { value: eta, lo: 0.0, hi: 1.0 });
    }
    let draws = crate::parallel::map_range(samples, |i| {
        let xi = sample_white_noise(grid, derive_seed(seed, i as u64));
        let xe = mollify(&xi, eps, m).expect("eps checked");
        let v = inv_laplacian(&xe).expect("zero mean").scale(1.0 / eta);
        resonant(&v, &laplacian(&v))
    });
    Ok(summarize(&draws))
}

/// Pointwise and spatial-average sample statistics, reduced in sample order.
pub fn summarize(draws: &[Field]) -> WickEstimate {
    let grid = draws[0].grid();
    let count = draws.len() as f64;
    let mut mean = Field::zeros(grid);
    let mut m2 = Field::zeros(grid);
    for (i, d) in draws.iter().enumerate() {
        let k = (i + 1) as f64;
        for ((mu, s), &x) in mean.values_mut().iter_mut().zip(m2.values_mut()).zip(d.values()) {
            let delta = x - *mu;
            *mu += delta / k;
            *s += delta * (x - *mu);
        }
    }
    let stderr = m2.map(|s| (s / (count - 1.0) / count).sqrt());
    let avgs: Vec<f64> = draws.iter().map(Field::mean).collect();
    let am = exact_sum(avgs.iter().copied()) / count;
    let var = exact_sum(avgs.iter().map(|a| (a - am) * (a - am))) / (count - 1.0);
    WickEstimate { mean, stderr, spatial_mean: am, spatial_stderr: (var / count).sqrt(), samples: draws.len() }
}

/// sigma * (a1' a2^2 / a1^2 - a2' a2 / a1), pointwise in u.
pub fn counterterm_rhs(a1: &DiffusionSpec, a2: &DiffusionSpec, u: &Field, sigma: f64) -> Result<Field> {
    let lam = a1.lambda();
    let mut out = Vec::with_capacity(u.values().len());
    for &v in u.values() {
        let a = a1.a(v);
        if a < lam / 2.0 {
            return Err(Error::Degenerate(format!("a({v}) = {a} below lambda/2 = {}", lam / 2.0)));
        }
        let b = a2.a(v);
        out.push(sigma * (a1.da(v) * b * b / (a * a) - a2.da(v) * b / a));
    }
    Field::from_values(u.grid(), out)
}

/// H_eps(eta, eta') = (eta'_2/eta_1) dF1(eta_2, eta_2) sigma - (eta'_1/eta_1^2) F(eta_2, eta_2) sigma.
pub fn h_eps_general(
    eta: (f64, f64),
    eta_prime: (f64, f64),
    f: impl Fn(f64, f64) -> f64,
    df1: impl Fn(f64, f64) -> f64,
    sigma: f64,
) -> Result<f64> {
    let (e1, e2) = eta;
    if !(e1 > 0.0) {
        return Err(Error::ParameterRange { value: e1, lo: 0.0, hi: f64::INFINITY });
    }
    let (p1, p2) = eta_prime;
    Ok((p2 / e1) * df1(e2, e2) * sigma - (p1 / (e1 * e1)) * f(e2, e2) * sigma)
}

/// One rank-one piece c(eta_2) W of a parametric noise.
#[derive(Clone)]
pub struct NoiseFactor {
    pub coeff: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub seed: u64,
}

impl NoiseFactor {
    pub fn new(coeff: impl Fn(f64) -> f64 + Send + Sync + 'static, seed: u64) -> Self {
        NoiseFactor { coeff: Arc::new(coeff), seed }
    }
}

/// xi(eta_2, .) = sum_i c_i(eta_2) W_i with independent white noises W_i.
pub fn sample_param_noise(factors: &[NoiseFactor], grid: Grid, eta: &EtaGrid) -> ParamField {
    let noises: Vec<Field> = crate::parallel::map_slice(factors, |f| sample_white_noise(grid, f.seed));
    let nodes = eta
        .nodes()
        .iter()
        .map(|&e| {
            let mut acc = Field::zeros(grid);
            for (f, w) in factors.iter().zip(&noises) {
                acc.axpy((f.coeff)(e), w);
            }
            acc
        })
        .collect();
    ParamField::nodal(eta.clone(), nodes).expect("one field per node")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveManifest {
    pub eps: f64,
    pub seed: u64,
    pub sigma: f64,
    pub eta_nodes: Vec<f64>,
    pub lambda: f64,
    pub mollifier: Mollifier,
    pub n: usize,
}

/// Writes xi_eps, the vartheta base and the Xi_2 base plus a manifest into `dir`.
pub fn save_archive(noise: &EnhancedNoise, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    crate::snapshot::write_field(dir.join("xi_eps.bin"), &noise.xi_eps)?;
    crate::snapshot::write_field(dir.join("theta_base.bin"), noise.theta.base().expect("power law"))?;
    crate::snapshot::write_field(dir.join("xi2_base.bin"), noise.xi2.base().expect("power law"))?;
    let manifest = ArchiveManifest {
        eps: noise.eps,
        seed: noise.seed,
        sigma: noise.sigma,
        eta_nodes: noise.eta().nodes().to_vec(),
        lambda: noise.eta().lambda(),
        mollifier: noise.mollifier,
        n: noise.grid().n(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

pub fn load_archive(dir: impl AsRef<Path>) -> Result<EnhancedNoise> {
    let dir = dir.as_ref();
    let text = std::fs::read_to_string(dir.join("manifest.json"))?;
    let m: ArchiveManifest = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    let eta = EtaGrid::new(m.lambda, m.eta_nodes.len())?;
    let xi_eps = crate::snapshot::read_field(dir.join("xi_eps.bin"))?;
    let theta_base = crate::snapshot::read_field(dir.join("theta_base.bin"))?;
    let xi2_base = crate::snapshot::read_field(dir.join("xi2_base.bin"))?;
    Ok(EnhancedNoise {
        xi_eps,
        theta: ParamField::power(eta.clone(), theta_base, -1),
        xi2: ParamField::power(eta, xi2_base, -2),
        sigma: m.sigma,
        eps: m.eps,
        seed: m.seed,
        mollifier: m.mollifier,
    })
}

/// True when the parametric field carries the eta^p law.
pub fn has_power_law(h: &ParamField, p: i32) -> bool {
    h.law() == EtaLaw::Power(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(32).unwrap()
    }

    #[test]
    fn white_noise_is_reproducible_and_centered() {
        let a = sample_white_noise(grid(), 4);
        assert_eq!(a, sample_white_noise(grid(), 4));
        assert_ne!(a, sample_white_noise(grid(), 5));
        assert!(a.mean().abs() < 1e-12);
    }

    #[test]
    fn multipliers() {
        assert_eq!(Mollifier::Gaussian.multiplier(0.5, 0.0), 1.0);
        assert!((Mollifier::Gaussian.multiplier(0.5, 8.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(Mollifier::Sharp.multiplier(0.5, 4.0), 1.0);
        assert_eq!(Mollifier::Sharp.multiplier(0.5, 5.0), 0.0);
    }

    #[test]
    fn sigma_grows_as_eps_shrinks() {
        let s: Vec<f64> = [1.0, 0.5, 0.25].iter().map(|&e| sigma_eps(Mollifier::Gaussian, e, grid()).unwrap()).collect();
        assert!(s[0] < s[1] && s[1] < s[2]);
        assert!(sigma_eps(Mollifier::Gaussian, 0.0, grid()).is_err());
        // the sharp cutoff at eps = 1 keeps |k|^2 in {1, 2}
        let sharp = sigma_eps(Mollifier::Sharp, 1.0, grid()).unwrap();
        assert!((sharp - 4.0 / (4.0 * PI * PI)).abs() < 1e-15);
        let sharp = sigma_eps(Mollifier::Sharp, 0.7, grid()).unwrap();
        assert!((sharp - (4.0 + 4.0 / 2.0) / (4.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn counterterm_constant_in_eta() {
        assert_eq!(h_eps(2.0, 4.0).unwrap(), -1.0);
        assert!(h_eps(0.0, 1.0).is_err());
    }

    #[test]
    fn zero_noise_has_no_resonance() {
        let eta = EtaGrid::new(0.5, 5).unwrap();
        let z = EnhancedNoise::zero(grid(), &eta);
        assert_eq!(z.sigma, 0.0);
        assert_eq!(z.xi2.node(0).sup_norm(), 0.0);
    }

    #[test]
    fn enhanced_noise_keeps_power_laws() {
        let eta = EtaGrid::new(0.5, 5).unwrap();
        let xi = sample_white_noise(grid(), 1);
        let e = enhanced_noise(&xi, 0.25, Mollifier::Gaussian, &eta, 1).unwrap();
        assert!(has_power_law(&e.theta, -1));
        assert!(has_power_law(&e.xi2, -2));
        let shifted = e.with_sigma(e.sigma + 1.0);
        let diff = shifted.xi2.eval(1.0).unwrap().max_abs_diff(&e.xi2.eval(1.0).unwrap());
        assert!((diff - 1.0).abs() < 1e-12);
    }

    #[test]
    fn archive_round_trip() {
        let eta = EtaGrid::new(0.5, 5).unwrap();
        let e = enhanced_noise(&sample_white_noise(grid(), 2), 0.25, Mollifier::Sharp, &eta, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_archive(&e, dir.path()).unwrap();
        let back = load_archive(dir.path()).unwrap();
        assert_eq!(back.xi_eps, e.xi_eps);
        assert_eq!(back.sigma.to_bits(), e.sigma.to_bits());
        assert_eq!(back.xi2.node(3), e.xi2.node(3));
    }
}
