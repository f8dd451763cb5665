use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform n x n grid on the torus [0, 2pi)^2 with integer wavenumbers
/// -n/2..n/2-1 per axis. Row index a carries the first coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Grid {
    n: usize,
}

impl TryFrom<usize> for Grid {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Grid::new(n)
    }
}

impl From<Grid> for usize {
    fn from(g: Grid) -> usize {
        g.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 16"
            )));
        }
        Ok(Grid { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed wavenumber stored at array index `idx`.
    #[inline]
    pub fn freq(&self, idx: usize) -> i64 {
        if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Array index holding wavenumber `k`, if it is on the lattice.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if k < -h || k >= h {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    #[inline]
    pub fn wavevector(&self, a: usize, b: usize) -> (i64, i64) {
        (self.freq(a), self.freq(b))
    }

    /// |k|^2 at flat index `idx`.
    #[inline]
    pub fn k2_at(&self, idx: usize) -> f64 {
        let (k1, k2) = self.wavevector(idx / self.n, idx % self.n);
        (k1 * k1 + k2 * k2) as f64
    }

    /// True on the Nyquist row or column (wavenumber -n/2 on either axis).
    #[inline]
    pub fn is_nyquist(&self, a: usize, b: usize) -> bool {
        a == self.n / 2 || b == self.n / 2
    }

    #[inline]
    pub fn is_nyquist_at(&self, idx: usize) -> bool {
        self.is_nyquist(idx / self.n, idx % self.n)
    }

    /// Physical coordinates of grid point (i, j).
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let h = 2.0 * PI / self.n as f64;
        (i as f64 * h, j as f64 * h)
    }

    /// Area of one grid cell, (2pi/n)^2.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = 2.0 * PI / self.n as f64;
        h * h
    }

    /// Number of resolved nonzero modes (Nyquist rows excluded).
    pub fn resolved_modes(&self) -> usize {
        (self.n - 1) * (self.n - 1) - 1
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n {
            Err(Error::GridMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_odd_sizes() {
        assert!(Grid::new(8).is_err());
        assert!(Grid::new(48).is_err());
        assert!(Grid::new(16).is_ok());
    }

    #[test]
    fn frequency_index_round_trip() {
        let g = Grid::new(16).unwrap();
        for idx in 0..16 {
            assert_eq!(g.index_of(g.freq(idx)), Some(idx));
        }
        assert_eq!(g.freq(8), -8);
        assert_eq!(g.index_of(8), None);
        assert!(g.is_nyquist(8, 3) && g.is_nyquist(0, 8) && !g.is_nyquist(7, 9));
    }

    #[test]
    fn resolved_mode_count() {
        let g = Grid::new(16).unwrap();
        let count = (0..g.len()).filter(|&i| !g.is_nyquist_at(i) && g.k2_at(i) > 0.0).count();
        assert_eq!(count, g.resolved_modes());
    }
}
