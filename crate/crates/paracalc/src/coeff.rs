use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Named choices of diffusion coefficient usable from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffusionKind {
    /// 3/4 + (1/4) sin(v), lower bound 1/2.
    Sine,
    /// mid + amp * sin(v).
    ScaledSine { mid: f64, amp: f64 },
    /// A constant coefficient.
    Constant { value: f64 },
}

/// Coefficient a with its first two derivatives and a lower bound lambda.
#[derive(Clone)]
pub struct DiffusionSpec {
    name: String,
    lambda: f64,
    upper: f64,
    a: Scalar,
    da: Scalar,
    dda: Scalar,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec").field("name", &self.name).field("lambda", &self.lambda).finish()
    }
}

impl Default for DiffusionSpec {
    fn default() -> Self {
        Self::from_kind(&DiffusionKind::Sine).expect("valid default")
    }
}

impl DiffusionSpec {
    pub fn new(
        name: impl Into<String>,
        lambda: f64,
        upper: f64,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        da: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dda: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DiffusionSpec { name: name.into(), lambda, upper, a: Arc::new(a), da: Arc::new(da), dda: Arc::new(dda) }
    }

    pub fn from_kind(kind: &DiffusionKind) -> Result<Self> {
        Ok(match *kind {
            DiffusionKind::Sine => Self::scaled_sine(0.75, 0.25)?,
            DiffusionKind::ScaledSine { mid, amp } => Self::scaled_sine(mid, amp)?,
            DiffusionKind::Constant { value } => Self::constant(value)?,
        })
    }

    pub fn scaled_sine(mid: f64, amp: f64) -> Result<Self> {
        let lambda = mid - amp.abs();
        if !(lambda > 0.0) || mid + amp.abs() > 1.0 + 1e-12 || amp.abs() > 1.0 {
            return Err(Error::Invalid(format!("{mid} + {amp} sin(v) must stay in (0, 1]")));
        }
        Ok(Self::new(
            format!("{mid}+{amp}sin"),
            lambda,
            mid + amp.abs(),
            move |v| mid + amp * v.sin(),
            move |v| amp * v.cos(),
            move |v| -amp * v.sin(),
        ))
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::ParameterRange { value, lo: 0.0, hi: 1.0 });
        }
        Ok(Self::new(format!("const{value}"), value, value, move |_| value, |_| 0.0, |_| 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Upper bound of a.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn a(&self, v: f64) -> f64 {
        (self.a)(v)
    }

    pub fn da(&self, v: f64) -> f64 {
        (self.da)(v)
    }

    pub fn dda(&self, v: f64) -> f64 {
        (self.dda)(v)
    }

    pub fn a_of(&self, u: &Field) -> Field {
        u.map(|v| self.a(v))
    }

    pub fn da_of(&self, u: &Field) -> Field {
        u.map(|v| self.da(v))
    }

    pub fn dda_of(&self, u: &Field) -> Field {
        u.map(|v| self.dda(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_three_quarters_plus_quarter_sine() {
        let a = DiffusionSpec::default();
        assert_eq!(a.lambda(), 0.5);
        assert_eq!(a.upper(), 1.0);
        assert!((a.a(1.0) - (0.75 + 0.25 * 1f64.sin())).abs() < 1e-15);
        assert!((a.da(1.0) - 0.25 * 1f64.cos()).abs() < 1e-15);
        assert!((a.dda(1.0) + 0.25 * 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn range_checks() {
        assert!(DiffusionSpec::scaled_sine(0.9, 0.2).is_err());
        assert!(DiffusionSpec::scaled_sine(0.2, 0.3).is_err());
        assert!(DiffusionSpec::constant(0.0).is_err());
        assert_eq!(DiffusionSpec::constant(0.4).unwrap().da(3.0), 0.0);
    }
}
