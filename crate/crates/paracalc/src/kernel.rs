use std::sync::OnceLock;

/// Smooth bump Q(r) = c exp(-1/(r(1-r))) on (0, 1) with unit mass, used
/// for causal time averaging at parabolic scale 2^{-2i}.
#[derive(Clone, Debug)]
pub struct TimeKernel {
    norm: f64,
}

fn raw_bump(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        0.0
    } else {
        (-1.0 / (r * (1.0 - r))).exp()
    }
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let p = panels + panels % 2;
    let h = (b - a) / p as f64;
    let mut s = f(a) + f(b);
    for i in 1..p {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

impl TimeKernel {
    pub fn new() -> Self {
        let mass = simpson(raw_bump, 0.0, 1.0, 4096);
        TimeKernel { norm: 1.0 / mass }
    }

    /// Process-wide instance.
    pub fn standard() -> &'static TimeKernel {
        static K: OnceLock<TimeKernel> = OnceLock::new();
        K.get_or_init(TimeKernel::new)
    }

    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn density(&self, r: f64) -> f64 {
        self.norm * raw_bump(r)
    }

    /// Q_i(r) = 2^{2i} Q(2^{2i} r).
    pub fn scaled(&self, level: i32, r: f64) -> f64 {
        let s = 4f64.powi(level);
        s * self.density(s * r)
    }

    /// Support length 2^{-2i} of Q_i.
    pub fn support(level: i32) -> f64 {
        4f64.powi(-level)
    }

    /// Weights w_l (lag l = 0, 1, ...) with (Q_i * g)(t_m) ~ sum_l w_l g(t_{m-l}),
    /// obtained by integrating Q_i against the piecewise-linear interpolant in
    /// time. Normalized to sum 1. A single unit weight when 2^{-2i} < dt.
    pub fn lag_weights(&self, level: i32, dt: f64) -> Vec<f64> {
        let s = Self::support(level);
        if s < dt {
            return vec![1.0];
        }
        let lags = (s / dt).ceil() as usize + 1;
        let mut w = vec![0.0; lags + 1];
        for (l, wl) in w.iter_mut().enumerate() {
            let lo = ((l as f64 - 1.0) * dt).max(0.0);
            let hi = ((l as f64 + 1.0) * dt).min(s);
            if hi <= lo {
                continue;
            }
            let hat = |r: f64| (1.0 - (r / dt - l as f64).abs()).max(0.0);
            let mid = (l as f64 * dt).clamp(lo, hi);
            let g = |r: f64| self.scaled(level, r) * hat(r);
            *wl = simpson(g, lo, mid, 256) + simpson(g, mid, hi, 256);
        }
        while w.len() > 1 && *w.last().unwrap() == 0.0 {
            w.pop();
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    }
}

impl Default for TimeKernel {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass_and_support() {
        let k = TimeKernel::standard();
        let mass = simpson(|r| k.density(r), 0.0, 1.0, 8192);
        assert!((mass - 1.0).abs() < 1e-10);
        assert_eq!(k.density(-0.1), 0.0);
        assert_eq!(k.density(1.0), 0.0);
        let scaled = simpson(|r| k.scaled(2, r), 0.0, TimeKernel::support(2), 8192);
        assert!((scaled - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lag_weights_sum_to_one() {
        let k = TimeKernel::standard();
        assert_eq!(k.lag_weights(5, 1e-2), vec![1.0]);
        let w = k.lag_weights(0, 0.05);
        assert!(w.len() > 10);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|&x| x >= 0.0));
    }
}
