//! Slow, direct reference computations used as test oracles.
//!
//! Nothing here shares code with the main crate: transforms are naive sums,
//! products are explicit convolutions, and lattice sums are accumulated exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Index of frequency k (in -n/2..n/2) in a length-n axis.
fn slot(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Fourier series coefficients c(k) = n^-2 sum_x f(x) e^{-i k.x}, stored at
/// [slot(k1) * n + slot(k2)], for samples at x = 2 pi (i, j) / n.
pub fn naive_dft(values: &[f64], n: usize) -> Vec<Complex64> {
    assert_eq!(values.len(), n * n);
    let w = 2.0 * PI / n as f64;
    let h = (n / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for k1 in -h..h {
        for k2 in -h..h {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let phase = -w * (k1 as f64 * i as f64 + k2 as f64 * j as f64);
                    acc += values[i * n + j] * Complex64::from_polar(1.0, phase);
                }
            }
            out[slot(k1, n) * n + slot(k2, n)] = acc / (n * n) as f64;
        }
    }
    out
}

/// Real part of sum_k c(k) e^{i k.x} on the grid.
pub fn naive_synthesis(coeffs: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(coeffs.len(), n * n);
    let w = 2.0 * PI / n as f64;
    let h = (n / 2) as i64;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k1 in -h..h {
                for k2 in -h..h {
                    let c = coeffs[slot(k1, n) * n + slot(k2, n)];
                    let phase = w * (k1 as f64 * i as f64 + k2 as f64 * j as f64);
                    acc += c * Complex64::from_polar(1.0, phase);
                }
            }
            out[i * n + j] = acc.re;
        }
    }
    out
}

/// Product of the two band-limited interpolants with all Nyquist content
/// removed from inputs and output, by explicit convolution of coefficients.
pub fn truncated_product(f: &[f64], g: &[f64], n: usize) -> Vec<f64> {
    let cf = naive_dft(f, n);
    let cg = naive_dft(g, n);
    let h = (n / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for a1 in (1 - h)..h {
        for a2 in (1 - h)..h {
            let x = cf[slot(a1, n) * n + slot(a2, n)];
            for b1 in (1 - h)..h {
                let s1 = a1 + b1;
                if s1 <= -h || s1 >= h {
                    continue;
                }
                for b2 in (1 - h)..h {
                    let s2 = a2 + b2;
                    if s2 <= -h || s2 >= h {
                        continue;
                    }
                    out[slot(s1, n) * n + slot(s2, n)] += x * cg[slot(b1, n) * n + slot(b2, n)];
                }
            }
        }
    }
    naive_synthesis(&out, n)
}

/// Fourier multiplier applied through the naive transform pair.
pub fn naive_multiplier(f: &[f64], n: usize, m: impl Fn(i64, i64) -> f64) -> Vec<f64> {
    let mut c = naive_dft(f, n);
    let h = (n / 2) as i64;
    for k1 in -h..h {
        for k2 in -h..h {
            c[slot(k1, n) * n + slot(k2, n)] *= m(k1, k2);
        }
    }
    naive_synthesis(&c, n)
}

/// Exact sum of nonnegative doubles, rounded once to nearest-even.
///
/// Every term is added as an integer multiple of 2^-1074 into a wide
/// fixed-point register, so the result does not depend on summation order.
#[derive(Clone, Debug)]
pub struct ExactAccumulator {
    limbs: Vec<u64>,
}

const LIMBS: usize = 20;

impl Default for ExactAccumulator {
    fn default() -> Self {
        ExactAccumulator { limbs: vec![0; LIMBS] }
    }
}

impl ExactAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        assert!(x >= 0.0 && x.is_finite(), "exact accumulator takes finite nonnegative terms");
        if x == 0.0 {
            return;
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as usize;
        let frac = bits & ((1u64 << 52) - 1);
        // value = mant * 2^(shift - 1074)
        let (mant, shift) = if exp == 0 { (frac, 0) } else { (frac | (1u64 << 52), exp - 1) };
        let limb = shift / 64;
        let off = shift % 64;
        let wide = (mant as u128) << off;
        let mut carry = 0u128;
        let parts = [wide as u64, (wide >> 64) as u64];
        let mut i = limb;
        for p in parts {
            let s = self.limbs[i] as u128 + p as u128 + carry;
            self.limbs[i] = s as u64;
            carry = s >> 64;
            i += 1;
        }
        while carry != 0 {
            let s = self.limbs[i] as u128 + carry;
            self.limbs[i] = s as u64;
            carry = s >> 64;
            i += 1;
        }
    }

    fn bit(&self, pos: usize) -> bool {
        (self.limbs[pos / 64] >> (pos % 64)) & 1 == 1
    }

    /// Correctly rounded value.
    pub fn value(&self) -> f64 {
        let Some(top_limb) = self.limbs.iter().rposition(|&l| l != 0) else {
            return 0.0;
        };
        let top = top_limb * 64 + 63 - self.limbs[top_limb].leading_zeros() as usize;
        if top < 53 {
            // fewer than 54 significant bits: exact multiple of 2^-1074
            return (self.limbs[0] as f64) * f64::from_bits(1);
        }
        let low = top - 52;
        let mut mant = 0u64;
        for pos in (low..=top).rev() {
            mant = (mant << 1) | self.bit(pos) as u64;
        }
        let half = self.bit(low - 1);
        let sticky = (0..low - 1).any(|p| self.bit(p));
        if half && (sticky || mant & 1 == 1) {
            mant += 1;
        }
        // mant in [2^52, 2^53]; value = mant * 2^(low - 1074)
        let mut e = low as i32 - 1074;
        if mant == 1u64 << 53 {
            mant >>= 1;
            e += 1;
        }
        let biased = e + 52 + 1023;
        assert!(biased < 0x7ff, "sum overflows f64");
        f64::from_bits(((biased as u64) << 52) | (mant & ((1u64 << 52) - 1)))
    }
}

/// (2 pi)^-2 sum over k != 0 off the Nyquist rows of m(|k|^2)^2 / |k|^2,
/// by a plain double loop with exact accumulation.
pub fn lattice_sum(n: usize, m: impl Fn(f64) -> f64) -> f64 {
    let h = (n / 2) as i64;
    let mut acc = ExactAccumulator::new();
    for k1 in (1 - h)..h {
        for k2 in (1 - h)..h {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let k2s = (k1 * k1 + k2 * k2) as f64;
            let w = m(k2s);
            acc.add(w * w / k2s);
        }
    }
    acc.value() / (4.0 * PI * PI)
}

/// Ordinary least squares y ~ a + b x via centered normal equations.
/// Returns (intercept, slope).
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// sup |f| of a physical-space block, computed by a naive multiplier.
pub fn block_sup(f: &[f64], n: usize, m: impl Fn(i64, i64) -> f64) -> f64 {
    naive_multiplier(f, n, m).iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_round_trip() {
        let n = 8;
        let f: Vec<f64> = (0..n * n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let back = naive_synthesis(&naive_dft(&f, n), n);
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn product_of_low_modes_is_exact() {
        let n = 8;
        let w = 2.0 * PI / n as f64;
        let f: Vec<f64> = (0..n * n).map(|i| ((i / n) as f64 * w).cos()).collect();
        let g: Vec<f64> = (0..n * n).map(|i| ((i % n) as f64 * w).sin()).collect();
        let p = truncated_product(&f, &g, n);
        for i in 0..n * n {
            assert!((p[i] - f[i] * g[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn accumulator_rounds_correctly() {
        let mut acc = ExactAccumulator::new();
        acc.add(1.0);
        acc.add(f64::EPSILON / 2.0);
        assert_eq!(acc.value(), 1.0);
        acc.add(f64::EPSILON / 4.0);
        assert_eq!(acc.value(), 1.0 + f64::EPSILON);

        let mut tiny = ExactAccumulator::new();
        tiny.add(f64::from_bits(1));
        tiny.add(f64::from_bits(2));
        assert_eq!(tiny.value(), f64::from_bits(3));

        let mut big = ExactAccumulator::new();
        for _ in 0..1000 {
            big.add(0.1);
        }
        // 1000 * fl(0.1) exceeds 100 by far less than half an ulp of 100
        assert_eq!(big.value(), 100.0);
    }

    #[test]
    fn least_squares_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (a, b) = least_squares(&x, &y);
        assert!((a - 2.0).abs() < 1e-14 && (b + 0.5).abs() < 1e-14);
    }
}
