use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::fft::fft2;
use crate::grid::Grid;

/// Real samples on the grid, row-major: `values[i*n + j] = f(2pi i/n, 2pi j/n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

/// Fourier coefficients with f^(k) = (2pi/n)^2 * DFT(f), so that
/// f(x) = (2pi)^-2 sum_k f^(k) e^{ik.x}.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field { grid, values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for an n = {} grid",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Field { grid, values })
    }

    /// Internal constructor for values produced by trusted arithmetic.
    pub(crate) fn raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x1, x2) = grid.point(i, j);
                values.push(f(x1, x2));
            }
        }
        Field { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Discrete L2 norm squared, sum |f|^2 times the cell area.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Field::raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// Pointwise product on the grid (aliased; see `dealiased_product`).
    pub fn pointwise(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// self += c * other
    pub fn axpy(&mut self, c: f64, other: &Field) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn spectrum(&self) -> SpectralField {
        let n = self.grid.n();
        let mut data: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut data, n, false);
        let w = self.grid.cell_area();
        for c in data.iter_mut() {
            *c *= w;
        }
        SpectralField { grid: self.grid, coeffs: data }
    }
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} coefficients for an n = {} grid",
                coeffs.len(),
                grid.n()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SpectralField { grid, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at wavevector (k1, k2), zero if off the lattice.
    pub fn at(&self, k1: i64, k2: i64) -> Complex64 {
        match (self.grid.index_of(k1), self.grid.index_of(k2)) {
            (Some(a), Some(b)) => self.coeffs[a * self.grid.n() + b],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn zero_nyquist(&mut self) {
        let n = self.grid.n();
        let h = n / 2;
        for b in 0..n {
            self.coeffs[h * n + b] = Complex64::new(0.0, 0.0);
            self.coeffs[b * n + h] = Complex64::new(0.0, 0.0);
        }
    }

    /// Real part of the inverse transform.
    pub fn to_field(&self) -> Field {
        let n = self.grid.n();
        let mut data = self.coeffs.clone();
        fft2(&mut data, n, true);
        let s = 1.0 / (2.0 * std::f64::consts::PI).powi(2);
        Field::raw(self.grid, data.iter().map(|c| c.re * s).collect())
    }

    /// Multiply in place by a real per-index multiplier.
    pub fn scale_by(&mut self, m: &[f64]) {
        for (c, &w) in self.coeffs.iter_mut().zip(m) {
            *c *= w;
        }
    }
}

macro_rules! field_binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&Field> for &Field {
            type Output = Field;
            fn $f(self, rhs: &Field) -> Field {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $tr<Field> for Field {
            type Output = Field;
            #[allow(clippy::assign_op_pattern)]
            fn $f(mut self, rhs: Field) -> Field {
                assert_eq!(self.grid, rhs.grid, "grid mismatch");
                for (a, b) in self.values.iter_mut().zip(&rhs.values) {
                    *a = *a $op *b;
                }
                self
            }
        }
        impl $tr<&Field> for Field {
            type Output = Field;
            #[allow(clippy::assign_op_pattern)]
            fn $f(mut self, rhs: &Field) -> Field {
                assert_eq!(self.grid, rhs.grid, "grid mismatch");
                for (a, b) in self.values.iter_mut().zip(&rhs.values) {
                    *a = *a $op *b;
                }
                self
            }
        }
    };
}

field_binop!(Add, add, +);
field_binop!(Sub, sub, -);

impl AddAssign<&Field> for Field {
    fn add_assign(&mut self, rhs: &Field) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&Field> for Field {
    fn sub_assign(&mut self, rhs: &Field) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, c: f64) -> Field {
        self.scale(c)
    }
}

impl Mul<f64> for Field {
    type Output = Field;
    fn mul(mut self, c: f64) -> Field {
        self.values.iter_mut().for_each(|v| *v *= c);
        self
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        self * -1.0
    }
}

/// A field sampled at t0, t0 + dt, ..., on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSlab {
    grid: Grid,
    t0: f64,
    dt: f64,
    frames: Vec<Field>,
}

impl TimeSlab {
    pub fn new(t0: f64, dt: f64, frames: Vec<Field>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::TooFewFrames(frames.len()));
        }
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::Invalid(format!("time step {dt} must be positive")));
        }
        let grid = frames[0].grid();
        for f in &frames[1..] {
            grid.check_same(&f.grid())?;
        }
        Ok(TimeSlab { grid, t0, dt, frames })
    }

    pub(crate) fn raw(grid: Grid, t0: f64, dt: f64, frames: Vec<Field>) -> Self {
        TimeSlab { grid, t0, dt, frames }
    }

    /// `count` copies of `f`.
    pub fn constant(f: &Field, t0: f64, dt: f64, count: usize) -> Result<Self> {
        TimeSlab::new(t0, dt, vec![f.clone(); count])
    }

    /// Frames f(t0 + m dt) for m in 0..count.
    pub fn from_fn(grid: Grid, t0: f64, dt: f64, count: usize, f: impl Fn(f64) -> Field) -> Result<Self> {
        let frames: Vec<Field> = (0..count).map(|m| f(t0 + m as f64 * dt)).collect();
        for fr in &frames {
            grid.check_same(&fr.grid())?;
        }
        TimeSlab::new(t0, dt, frames)
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut [Field] {
        &mut self.frames
    }

    pub fn into_frames(self) -> Vec<Field> {
        self.frames
    }

    #[inline]
    pub fn frame(&self, m: usize) -> &Field {
        &self.frames[m]
    }

    pub fn last(&self) -> &Field {
        self.frames.last().expect("slab has frames")
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.frames.len() - 1)
    }

    pub fn check_aligned(&self, other: &TimeSlab) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        let tol = 1e-12 * self.dt.abs().max(1.0);
        if self.frames.len() != other.frames.len()
            || (self.t0 - other.t0).abs() > tol
            || (self.dt - other.dt).abs() > tol
        {
            return Err(Error::MisalignedSlabs);
        }
        Ok(())
    }

    pub fn map_frames(&self, f: impl Fn(&Field) -> Field + Sync + Send) -> TimeSlab {
        let frames = crate::parallel::map_slice(&self.frames, |fr| f(fr));
        TimeSlab::raw(self.grid, self.t0, self.dt, frames)
    }

    pub fn zip_frames(&self, other: &TimeSlab, f: impl Fn(&Field, &Field) -> Field + Sync + Send) -> Result<TimeSlab> {
        self.check_aligned(other)?;
        let frames = crate::parallel::map_range(self.frames.len(), |m| f(&self.frames[m], &other.frames[m]));
        Ok(TimeSlab::raw(self.grid, self.t0, self.dt, frames))
    }

    /// sup over frames of the sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.frames.iter().fold(0.0, |m, f| m.max(f.sup_norm()))
    }

    pub fn max_abs_diff(&self, other: &TimeSlab) -> Result<f64> {
        self.check_aligned(other)?;
        Ok(self
            .frames
            .iter()
            .zip(&other.frames)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(16).unwrap()
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Field::from_values(grid(), vec![0.0; 10]).is_err());
        let mut v = vec![0.0; 256];
        v[3] = f64::NAN;
        assert!(Field::from_values(grid(), v).is_err());
    }

    #[test]
    fn constant_spectrum() {
        let s = Field::constant(grid(), 1.0).spectrum();
        assert!((s.at(0, 0).re - 4.0 * PI * PI).abs() < 1e-12);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn cosine_spectrum() {
        let s = Field::from_fn(grid(), |x, _| x.cos()).spectrum();
        let half = 2.0 * PI * PI;
        assert!((s.at(1, 0).re - half).abs() < 1e-12);
        assert!((s.at(-1, 0).re - half).abs() < 1e-12);
        assert!(s.at(0, 1).norm() < 1e-12);
    }

    #[test]
    fn arithmetic() {
        let a = Field::from_fn(grid(), |x, y| x + y);
        let b = Field::constant(grid(), 2.0);
        let c = &a - &b;
        assert_eq!((&c + &b).max_abs_diff(&a), 0.0);
        assert_eq!((&a * 2.0).max_abs_diff(&a.scale(2.0)), 0.0);
        assert_eq!((-&b).mean(), -2.0);
    }

    #[test]
    fn slab_guards() {
        let f = Field::zeros(grid());
        assert!(TimeSlab::new(0.0, 0.1, vec![f.clone()]).is_err());
        assert!(TimeSlab::new(0.0, 0.0, vec![f.clone(), f.clone()]).is_err());
        let other = Field::zeros(Grid::new(32).unwrap());
        assert!(TimeSlab::new(0.0, 0.1, vec![f.clone(), other]).is_err());
        let s = TimeSlab::constant(&f, 1.0, 0.25, 5).unwrap();
        assert_eq!(s.time(4), 2.0);
        assert_eq!(s.horizon(), 2.0);
    }

    #[test]
    fn owned_operands_match_borrowed() {
        let grid = Grid::new(16).unwrap();
        let a = Field::from_fn(grid, |x, y| x + 2.0 * y);
        let b = Field::from_fn(grid, |x, _| x.cos());
        assert_eq!(a.clone() + b.clone(), &a + &b);
        assert_eq!(a.clone() + &b, &a + &b);
        assert_eq!(a.clone() - b.clone(), &a - &b);
        assert_eq!(a.clone() - &b, &a - &b);
        assert_ne!(&a + &b, &a - &b);
    }
}
