//! Fields depending on a diffusivity parameter eta in [lambda, 1].

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, parabolic_norm};
use crate::error::{Error, Result};
use crate::field::{Field, TimeSlab};

/// Tolerance for eta values slightly outside [lambda, 1].
pub const RANGE_TOL: f64 = 1e-9;

/// Chebyshev-Lobatto nodes on [lambda, 1], increasing, with barycentric weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaGrid {
    lambda: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl EtaGrid {
    pub fn new(lambda: f64, count: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::ParameterRange { value: lambda, lo: 0.0, hi: 1.0 });
        }
        if count < 5 {
            return Err(Error::Invalid(format!("need at least 5 eta nodes, got {count}")));
        }
        let last = (count - 1) as f64;
        let nodes: Vec<f64> = (0..count)
            .map(|m| {
                let x = -(std::f64::consts::PI * m as f64 / last).cos();
                lambda + (1.0 - lambda) * (x + 1.0) / 2.0
            })
            .collect();
        let mut nodes = nodes;
        nodes[0] = lambda;
        nodes[count - 1] = 1.0;
        let weights = (0..count)
            .map(|m| {
                let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                if m == 0 || m == count - 1 {
                    s * 0.5
                } else {
                    s
                }
            })
            .collect();
        Ok(EtaGrid { lambda, nodes, weights })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn check(&self, eta: f64) -> Result<()> {
        if eta.is_finite() && eta >= self.lambda - RANGE_TOL && eta <= 1.0 + RANGE_TOL {
            Ok(())
        } else {
            Err(Error::ParameterRange { value: eta, lo: self.lambda, hi: 1.0 })
        }
    }

    /// Lagrange basis values at eta, written into `out`.
    pub fn basis_into(&self, eta: f64, out: &mut [f64]) {
        for (m, &x) in self.nodes.iter().enumerate() {
            if eta == x {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[m] = 1.0;
                return;
            }
        }
        let mut total = 0.0;
        for ((o, &x), &w) in out.iter_mut().zip(&self.nodes).zip(&self.weights) {
            *o = w / (eta - x);
            total += *o;
        }
        out.iter_mut().for_each(|v| *v /= total);
    }

    pub fn basis(&self, eta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.basis_into(eta, &mut out);
        out
    }

    /// Spectral differentiation matrix, row-major.
    pub fn diff_matrix(&self) -> Vec<f64> {
        let m = self.len();
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            let mut diag = 0.0;
            for j in 0..m {
                if i != j {
                    let v = (self.weights[j] / self.weights[i]) / (self.nodes[i] - self.nodes[j]);
                    d[i * m + j] = v;
                    diag -= v;
                }
            }
            d[i * m + i] = diag;
        }
        d
    }
}

/// How a parametric object depends on eta.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EtaLaw {
    /// Only node values are known; off-node values by interpolation.
    Nodal,
    /// Exactly eta^p times a base object.
    Power(i32),
}

fn power_derivative(p: i32, order: usize, eta: f64) -> f64 {
    let mut c = 1.0;
    for i in 0..order {
        c *= (p - i as i32) as f64;
    }
    c * eta.powi(p - order as i32)
}

/// One field per eta node.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamField {
    eta: EtaGrid,
    law: EtaLaw,
    base: Option<Field>,
    nodes: Vec<Field>,
}

impl ParamField {
    pub fn nodal(eta: EtaGrid, nodes: Vec<Field>) -> Result<Self> {
        if nodes.len() != eta.len() {
            return Err(Error::Invalid(format!("{} fields for {} eta nodes", nodes.len(), eta.len())));
        }
        let grid = nodes[0].grid();
        for f in &nodes[1..] {
            grid.check_same(&f.grid())?;
        }
        Ok(ParamField { eta, law: EtaLaw::Nodal, base: None, nodes })
    }

    /// h(eta) = eta^p * base.
    pub fn power(eta: EtaGrid, base: Field, p: i32) -> Self {
        let nodes = eta.nodes().iter().map(|&e| base.scale(e.powi(p))).collect();
        ParamField { eta, law: EtaLaw::Power(p), base: Some(base), nodes }
    }

    /// eta-independent field.
    pub fn constant(eta: EtaGrid, v: Field) -> Self {
        Self::power(eta, v, 0)
    }

    pub fn from_fn(eta: EtaGrid, f: impl Fn(f64) -> Field) -> Result<Self> {
        let nodes = eta.nodes().iter().map(|&e| f(e)).collect();
        Self::nodal(eta, nodes)
    }

    #[inline]
    pub fn eta(&self) -> &EtaGrid {
        &self.eta
    }

    #[inline]
    pub fn law(&self) -> EtaLaw {
        self.law
    }

    /// Closed-form description, e.g. "eta^-1".
    pub fn tag(&self) -> Option<String> {
        match self.law {
            EtaLaw::Nodal => None,
            EtaLaw::Power(p) => Some(format!("eta^{p}")),
        }
    }

    pub fn base(&self) -> Option<&Field> {
        self.base.as_ref()
    }

    pub fn nodes(&self) -> &[Field] {
        &self.nodes
    }

    pub fn node(&self, m: usize) -> &Field {
        &self.nodes[m]
    }

    pub fn grid(&self) -> crate::grid::Grid {
        self.nodes[0].grid()
    }

    /// Fields multiplied by the expansion coefficients: the base for a power
    /// law, the node values otherwise.
    pub fn terms(&self) -> Vec<&Field> {
        match (&self.law, &self.base) {
            (EtaLaw::Power(_), Some(b)) => vec![b],
            _ => self.nodes.iter().collect(),
        }
    }

    /// h(eta*, .).
    pub fn eval(&self, eta_star: f64) -> Result<Field> {
        self.eta.check(eta_star)?;
        if let (EtaLaw::Power(p), Some(b)) = (self.law, &self.base) {
            return Ok(b.scale(eta_star.powi(p)));
        }
        let phi = self.eta.basis(eta_star);
        let mut out = Field::zeros(self.grid());
        for (w, f) in phi.iter().zip(&self.nodes) {
            if *w != 0.0 {
                out.axpy(*w, f);
            }
        }
        Ok(out)
    }

    /// d^k h / d eta^k at every node (k <= 2). Exact for power laws,
    /// Chebyshev differentiation otherwise.
    pub fn derivative(&self, order: usize) -> Result<Vec<Field>> {
        if order > 2 {
            return Err(Error::DerivativeOrder(order));
        }
        if order == 0 {
            return Ok(self.nodes.clone());
        }
        if let (EtaLaw::Power(p), Some(b)) = (self.law, &self.base) {
            return Ok(self
                .eta
                .nodes()
                .iter()
                .map(|&e| b.scale(power_derivative(p, order, e)))
                .collect());
        }
        let mut cur = self.nodes.clone();
        let d = self.eta.diff_matrix();
        for _ in 0..order {
            cur = apply_matrix(&d, &cur);
        }
        Ok(cur)
    }

    /// Applies f node by node. Power laws are kept when `power` is given.
    pub fn map_nodes(&self, f: impl Fn(&Field) -> Field, power: Option<i32>) -> ParamField {
        match (power, &self.base) {
            (Some(p), Some(b)) => ParamField::power(self.eta.clone(), f(b), p),
            _ => ParamField {
                eta: self.eta.clone(),
                law: EtaLaw::Nodal,
                base: None,
                nodes: self.nodes.iter().map(f).collect(),
            },
        }
    }
}

fn apply_matrix(d: &[f64], fields: &[Field]) -> Vec<Field> {
    let m = fields.len();
    (0..m)
        .map(|i| {
            let mut acc = Field::zeros(fields[0].grid());
            for j in 0..m {
                let w = d[i * m + j];
                if w != 0.0 {
                    acc.axpy(w, &fields[j]);
                }
            }
            acc
        })
        .collect()
}

/// One time slab per eta node, optionally with exact eta-derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSlab {
    eta: EtaGrid,
    law: EtaLaw,
    base: Option<TimeSlab>,
    nodes: Vec<TimeSlab>,
    derivs: Option<[Vec<TimeSlab>; 2]>,
}

impl ParamSlab {
    pub fn nodal(eta: EtaGrid, nodes: Vec<TimeSlab>) -> Result<Self> {
        if nodes.len() != eta.len() {
            return Err(Error::Invalid(format!("{} slabs for {} eta nodes", nodes.len(), eta.len())));
        }
        for s in &nodes[1..] {
            nodes[0].check_aligned(s)?;
        }
        Ok(ParamSlab { eta, law: EtaLaw::Nodal, base: None, nodes, derivs: None })
    }

    pub fn power(eta: EtaGrid, base: TimeSlab, p: i32) -> Self {
        let nodes = eta
            .nodes()
            .iter()
            .map(|&e| {
                let c = e.powi(p);
                base.map_frames(|f| f.scale(c))
            })
            .collect();
        ParamSlab { eta, law: EtaLaw::Power(p), base: Some(base), nodes, derivs: None }
    }

    /// Same slab at every node.
    pub fn constant(eta: EtaGrid, base: TimeSlab) -> Self {
        let nodes = vec![base.clone(); eta.len()];
        ParamSlab { eta, law: EtaLaw::Power(0), base: Some(base), nodes, derivs: None }
    }

    /// Time-constant slab built from a parametric field.
    pub fn from_field(h: &ParamField, t0: f64, dt: f64, count: usize) -> Result<Self> {
        let mk = |f: &Field| TimeSlab::constant(f, t0, dt, count);
        let nodes = h.nodes().iter().map(mk).collect::<Result<Vec<_>>>()?;
        let base = match h.base() {
            Some(b) => Some(mk(b)?),
            None => None,
        };
        Ok(ParamSlab { eta: h.eta().clone(), law: h.law(), base, nodes, derivs: None })
    }

    pub(crate) fn with_derivatives(mut self, first: Vec<TimeSlab>, second: Vec<TimeSlab>) -> Self {
        self.derivs = Some([first, second]);
        self
    }

    #[inline]
    pub fn eta(&self) -> &EtaGrid {
        &self.eta
    }

    #[inline]
    pub fn law(&self) -> EtaLaw {
        self.law
    }

    pub fn base(&self) -> Option<&TimeSlab> {
        self.base.as_ref()
    }

    pub fn nodes(&self) -> &[TimeSlab] {
        &self.nodes
    }

    pub fn node(&self, m: usize) -> &TimeSlab {
        &self.nodes[m]
    }

    pub fn template(&self) -> &TimeSlab {
        &self.nodes[0]
    }

    pub fn has_exact_derivatives(&self) -> bool {
        self.derivs.is_some()
    }

    pub fn terms_at(&self, frame: usize) -> Vec<&Field> {
        match (&self.law, &self.base) {
            (EtaLaw::Power(_), Some(b)) => vec![b.frame(frame)],
            _ => self.nodes.iter().map(|s| s.frame(frame)).collect(),
        }
    }

    /// Parametric field at one frame.
    pub fn at_frame(&self, frame: usize) -> ParamField {
        match (self.law, &self.base) {
            (EtaLaw::Power(p), Some(b)) => ParamField::power(self.eta.clone(), b.frame(frame).clone(), p),
            _ => ParamField {
                eta: self.eta.clone(),
                law: EtaLaw::Nodal,
                base: None,
                nodes: self.nodes.iter().map(|s| s.frame(frame).clone()).collect(),
            },
        }
    }

    /// Slab at an arbitrary eta in [lambda, 1].
    pub fn eval(&self, eta_star: f64) -> Result<TimeSlab> {
        self.eta.check(eta_star)?;
        if let (EtaLaw::Power(p), Some(b)) = (self.law, &self.base) {
            let c = eta_star.powi(p);
            return Ok(b.map_frames(|f| f.scale(c)));
        }
        let phi = self.eta.basis(eta_star);
        let t = self.template();
        let frames = (0..t.len())
            .map(|m| {
                let mut acc = Field::zeros(t.grid());
                for (w, s) in phi.iter().zip(&self.nodes) {
                    if *w != 0.0 {
                        acc.axpy(*w, s.frame(m));
                    }
                }
                acc
            })
            .collect();
        TimeSlab::new(t.t0(), t.dt(), frames)
    }

    /// eta-derivative slabs at every node (order <= 2).
    pub fn derivative(&self, order: usize) -> Result<Vec<TimeSlab>> {
        if order > 2 {
            return Err(Error::DerivativeOrder(order));
        }
        if order == 0 {
            return Ok(self.nodes.clone());
        }
        if let Some(d) = &self.derivs {
            return Ok(d[order - 1].clone());
        }
        if let (EtaLaw::Power(p), Some(b)) = (self.law, &self.base) {
            return Ok(self
                .eta
                .nodes()
                .iter()
                .map(|&e| {
                    let c = power_derivative(p, order, e);
                    b.map_frames(|f| f.scale(c))
                })
                .collect());
        }
        let t = self.template();
        let d = self.eta.diff_matrix();
        let mut per_frame: Vec<Vec<Field>> = (0..t.len())
            .map(|m| self.nodes.iter().map(|s| s.frame(m).clone()).collect())
            .collect();
        for _ in 0..order {
            per_frame = per_frame.iter().map(|fs| apply_matrix(&d, fs)).collect();
        }
        (0..self.eta.len())
            .map(|mu| TimeSlab::new(t.t0(), t.dt(), per_frame.iter().map(|fs| fs[mu].clone()).collect()))
            .collect()
    }

    pub fn map_nodes(&self, f: impl Fn(&TimeSlab) -> TimeSlab) -> ParamSlab {
        ParamSlab {
            eta: self.eta.clone(),
            law: EtaLaw::Nodal,
            base: None,
            nodes: self.nodes.iter().map(f).collect(),
            derivs: None,
        }
    }
}

/// Inner norm for `eta_sup_norm`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InnerNorm {
    Sup,
    Besov(f64),
    /// Parabolic norm in time and space; equals `Besov` for time-independent input.
    Parabolic(f64),
}

/// Either kind of parametric object.
#[derive(Clone, Copy, Debug)]
pub enum ParamRef<'a> {
    Field(&'a ParamField),
    Slab(&'a ParamSlab),
}

impl<'a> From<&'a ParamField> for ParamRef<'a> {
    fn from(h: &'a ParamField) -> Self {
        ParamRef::Field(h)
    }
}

impl<'a> From<&'a ParamSlab> for ParamRef<'a> {
    fn from(h: &'a ParamSlab) -> Self {
        ParamRef::Slab(h)
    }
}

fn field_norm(f: &Field, inner: InnerNorm) -> f64 {
    match inner {
        InnerNorm::Sup => f.sup_norm(),
        InnerNorm::Besov(a) | InnerNorm::Parabolic(a) => besov_norm(f, a).norm,
    }
}

fn slab_norm(s: &TimeSlab, inner: InnerNorm) -> f64 {
    match inner {
        InnerNorm::Parabolic(a) => parabolic_norm(s, a),
        _ => s.frames().iter().map(|f| field_norm(f, inner)).fold(0.0, f64::max),
    }
}

/// sup over eta nodes and derivative orders 0..=k of the inner norm.
pub fn eta_sup_norm<'a>(h: impl Into<ParamRef<'a>>, k: usize, inner: InnerNorm) -> Result<f64> {
    if k > 2 {
        return Err(Error::DerivativeOrder(k));
    }
    let mut best = 0.0f64;
    match h.into() {
        ParamRef::Field(h) => {
            for order in 0..=k {
                for f in h.derivative(order)? {
                    best = best.max(field_norm(&f, inner));
                }
            }
        }
        ParamRef::Slab(h) => {
            for order in 0..=k {
                for s in h.derivative(order)? {
                    best = best.max(slab_norm(&s, inner));
                }
            }
        }
    }
    Ok(best)
}

/// Barycentric interpolation of `h` at eta*.
pub fn eval_param(h: &ParamField, eta_star: f64) -> Result<Field> {
    h.eval(eta_star)
}

impl<'a> ParamRef<'a> {
    pub fn eta(&self) -> &'a EtaGrid {
        match self {
            ParamRef::Field(h) => h.eta(),
            ParamRef::Slab(h) => h.eta(),
        }
    }

    pub fn law(&self) -> EtaLaw {
        match self {
            ParamRef::Field(h) => h.law(),
            ParamRef::Slab(h) => h.law(),
        }
    }

    /// Expansion term fields at a frame (ignored for time-independent input).
    pub fn terms_at(&self, frame: usize) -> Vec<&'a Field> {
        match self {
            ParamRef::Field(h) => h.terms(),
            ParamRef::Slab(h) => h.terms_at(frame),
        }
    }

    pub fn slab(&self) -> Option<&'a ParamSlab> {
        match self {
            ParamRef::Field(_) => None,
            ParamRef::Slab(h) => Some(h),
        }
    }
}
