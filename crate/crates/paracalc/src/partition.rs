use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::field::{Field, SpectralField};
use crate::grid::Grid;

const INNER: f64 = 1.1;
const OUTER: f64 = 1.4;

fn bump_tail(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth step from 0 at u <= 0 to 1 at u >= 1.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = bump_tail(u);
    a / (a + bump_tail(1.0 - u))
}

/// Radial cutoff: 1 on r <= 1.1, 0 on r >= 1.4.
pub fn cutoff(r: f64) -> f64 {
    1.0 - smooth_step((r - INNER) / (OUTER - INNER))
}

/// Littlewood-Paley partition on a grid. Levels run from -1 to `top`;
/// the top block absorbs everything beyond 1.1 * 2^top, Nyquist included.
#[derive(Debug)]
pub struct DyadicPartition {
    grid: Grid,
    top: i32,
    chi: Vec<f64>,
    rho: Vec<Vec<f64>>,
    low: Vec<Vec<f64>>,
}

impl DyadicPartition {
    fn build(grid: Grid) -> Result<Self> {
        let n = grid.n();
        let top = n.trailing_zeros() as i32 - 2;
        if top < 2 {
            return Err(Error::InvalidGrid(format!("n = {n} admits fewer than two dyadic levels")));
        }
        let len = grid.len();
        let radius: Vec<f64> = (0..len).map(|i| grid.k2_at(i).sqrt()).collect();
        let scaled = |j: i32| -> Vec<f64> {
            let s = 2f64.powi(j);
            radius.iter().map(|r| cutoff(r / s)).collect()
        };
        // chis[j] = cutoff(|k| / 2^j), j = 0..=top
        let chis: Vec<Vec<f64>> = (0..=top).map(scaled).collect();
        let mut rho = Vec::with_capacity(top as usize + 2);
        rho.push(chis[0].clone());
        for j in 0..top as usize {
            rho.push((0..len).map(|i| chis[j + 1][i] - chis[j][i]).collect());
        }
        rho.push(chis[top as usize].iter().map(|c| 1.0 - c).collect());

        // low[j+1] multiplies S_j = sum_{i <= j-2} rho_i, which telescopes to cutoff(|k|/2^{j-1}).
        let mut low = Vec::with_capacity(top as usize + 2);
        for j in -1..=top {
            if j <= 0 {
                low.push(vec![0.0; len]);
            } else {
                low.push(chis[(j - 1) as usize].clone());
            }
        }
        Ok(DyadicPartition { grid, top, chi: chis[0].clone(), rho, low })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Highest level J.
    #[inline]
    pub fn top(&self) -> i32 {
        self.top
    }

    /// Number of levels, J + 2.
    #[inline]
    pub fn count(&self) -> usize {
        self.top as usize + 2
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.top
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    fn check(&self, j: i32) -> Result<usize> {
        if j < -1 || j > self.top {
            Err(Error::LevelOutOfRange { level: j, top: self.top })
        } else {
            Ok((j + 1) as usize)
        }
    }

    pub fn rho(&self, j: i32) -> Result<&[f64]> {
        Ok(&self.rho[self.check(j)?])
    }

    /// Multiplier of S_j.
    pub fn low(&self, j: i32) -> Result<&[f64]> {
        Ok(&self.low[self.check(j)?])
    }

    /// Levels whose multiplier is nonzero at wavevector (k1, k2).
    pub fn active_levels(&self, k1: i64, k2: i64) -> Vec<i32> {
        let (Some(a), Some(b)) = (self.grid.index_of(k1), self.grid.index_of(k2)) else {
            return Vec::new();
        };
        let idx = a * self.grid.n() + b;
        self.levels().filter(|&j| self.rho[(j + 1) as usize][idx] != 0.0).collect()
    }

    pub fn block_of(&self, spec: &SpectralField, j: i32) -> Result<Field> {
        let mut s = spec.clone();
        s.scale_by(self.rho(j)?);
        Ok(s.to_field())
    }

    /// All blocks Delta_{-1} .. Delta_J of a spectrum, index j+1.
    pub fn blocks_of(&self, spec: &SpectralField) -> Vec<Field> {
        crate::parallel::map_range(self.count(), |i| {
            let mut s = spec.clone();
            s.scale_by(&self.rho[i]);
            s.to_field()
        })
    }
}

fn registry() -> &'static RwLock<HashMap<usize, Arc<DyadicPartition>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<DyadicPartition>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared partition for `grid`, built once per grid size.
pub fn make_partition(grid: Grid) -> Result<Arc<DyadicPartition>> {
    if let Some(p) = registry().read().expect("partition registry").get(&grid.n()) {
        return Ok(p.clone());
    }
    let built = Arc::new(DyadicPartition::build(grid)?);
    let mut map = registry().write().expect("partition registry");
    Ok(map.entry(grid.n()).or_insert(built).clone())
}

/// A field split into its Littlewood-Paley blocks.
#[derive(Clone, Debug)]
pub struct Blocks {
    top: i32,
    blocks: Vec<Field>,
}

impl Blocks {
    pub fn of(f: &Field) -> Blocks {
        let p = make_partition(f.grid()).expect("valid grid");
        Blocks { top: p.top(), blocks: p.blocks_of(&f.spectrum()) }
    }

    #[inline]
    pub fn top(&self) -> i32 {
        self.top
    }

    /// Delta_j, or zero-extension semantics left to the caller.
    #[inline]
    pub fn get(&self, j: i32) -> &Field {
        &self.blocks[(j + 1) as usize]
    }

    pub fn all(&self) -> &[Field] {
        &self.blocks
    }

    /// S_j for every level: sum_{i <= j-2} Delta_i, index j+1.
    pub fn lows(&self) -> Vec<Field> {
        let grid = self.blocks[0].grid();
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut acc = Field::zeros(grid);
        for j in -1..=self.top {
            if j >= 1 {
                acc += self.get(j - 2);
            }
            out.push(acc.clone());
        }
        out
    }

    /// Mass-one low-pass: S_j for j >= 1 and Delta_{-1} for j <= 0.
    pub fn lows_mass_one(&self) -> Vec<Field> {
        let mut out = self.lows();
        out[0] = self.get(-1).clone();
        out[1] = self.get(-1).clone();
        out
    }

    /// Sum of all blocks.
    pub fn total(&self) -> Field {
        let mut acc = Field::zeros(self.blocks[0].grid());
        for b in &self.blocks {
            acc += b;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(1.1), 1.0);
        assert_eq!(cutoff(1.4), 0.0);
        let mid = cutoff(1.25);
        assert!((mid - 0.5).abs() < 1e-12);
        assert!((1..100).all(|i| cutoff(1.1 + 0.003 * i as f64) <= cutoff(1.1 + 0.003 * (i - 1) as f64)));
    }

    #[test]
    fn top_level_for_n64() {
        let p = make_partition(Grid::new(64).unwrap()).unwrap();
        assert_eq!(p.top(), 4);
        assert_eq!(p.count(), 6);
        assert!(p.rho(5).is_err() && p.rho(-2).is_err());
    }

    #[test]
    fn partition_of_unity_and_disjointness() {
        let p = make_partition(Grid::new(64).unwrap()).unwrap();
        let len = p.grid().len();
        for idx in 0..len {
            let total: f64 = p.levels().map(|j| p.rho(j).unwrap()[idx]).sum();
            assert!((total - 1.0).abs() < 1e-14);
            for i in p.levels() {
                for j in p.levels().filter(|j| (j - i).abs() > 1) {
                    assert_eq!(p.rho(i).unwrap()[idx] * p.rho(j).unwrap()[idx], 0.0);
                }
            }
        }
        assert_eq!(p.chi()[0], 1.0);
        for j in 0..=p.top() {
            assert_eq!(p.rho(j).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn registry_shares_instances() {
        let g = Grid::new(32).unwrap();
        assert!(Arc::ptr_eq(&make_partition(g).unwrap(), &make_partition(g).unwrap()));
    }
}
