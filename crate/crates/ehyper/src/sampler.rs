//! Seeded parameter draws with modulus windows and a balancing product.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::specfun::{BasePair, TIE_GUARD};

pub const MAX_REJECTIONS: usize = 1000;

/// Closed modulus interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

pub fn window(lo: f64, hi: f64) -> Window {
    Window { lo, hi }
}

pub fn windows(spec: &[(Window, usize)]) -> Vec<Window> {
    spec.iter().flat_map(|&(w, k)| std::iter::repeat(w).take(k)).collect()
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of the stream used for one trial of one identity.
pub fn derived_seed(identity: &str, seed: u64, trial: u64) -> u64 {
    let mut bytes = identity.as_bytes().to_vec();
    bytes.extend(seed.to_le_bytes());
    bytes.extend(trial.to_le_bytes());
    fnv1a(&bytes)
}

pub struct Sampler {
    rng: ChaCha8Rng,
    pub max_rejections: usize,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), max_rejections: MAX_REJECTIONS }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            return lo;
        }
        self.uniform(lo.ln(), hi.ln()).exp()
    }

    pub fn phase(&mut self) -> C64 {
        C64::from_polar(1.0, self.uniform(0.0, TAU))
    }

    /// Log-uniform modulus in `[lo, hi]`, uniform phase.
    pub fn point(&mut self, lo: f64, hi: f64) -> C64 {
        self.log_uniform(lo, hi) * self.phase()
    }

    /// `|p|, |q| ∈ [0.15, 0.4]` with random phases, generic (`p ≠ q`).
    pub fn base(&mut self) -> BasePair {
        loop {
            let (p, q) = (self.point(0.15, 0.4), self.point(0.15, 0.4));
            if (p - q).norm() > 1e-3 {
                return BasePair::new(p, q).expect("moduli below 0.4");
            }
        }
    }

    /// Draws `t` with `|t_i|` inside `windows[i]` and `∏ t = target`, rejecting
    /// ties and any draw refused by `accept`.
    pub fn balanced<F>(&mut self, target: C64, windows: &[Window], accept: F) -> Result<Vec<C64>>
    where
        F: Fn(&[C64]) -> bool,
    {
        let n = windows.len();
        let lo: Vec<f64> = windows.iter().map(|w| w.lo.ln()).collect();
        let hi: Vec<f64> = windows.iter().map(|w| w.hi.ln()).collect();
        let goal = target.norm().ln();
        let (slo, shi): (f64, f64) = (lo.iter().sum(), hi.iter().sum());
        if n == 0 || !(slo < goal && goal < shi) {
            return Err(Error::SamplerInfeasible(format!(
                "log|target| = {goal:.4} outside window range ({slo:.4}, {shi:.4}) for {n} parameters"
            )));
        }
        for _ in 0..self.max_rejections {
            let lg: Vec<f64> = (0..n)
                .map(|_| {
                    let u = self.uniform(0.02, 0.98);
                    (u / (1.0 - u)).ln()
                })
                .collect();
            let total = |lam: f64| -> f64 { (0..n).map(|i| lo[i] + (hi[i] - lo[i]) * logistic(lg[i] + lam)).sum() };
            let (mut a, mut b) = (-60.0, 60.0);
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if total(mid) > goal {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            let lam = 0.5 * (a + b);
            let phases: Vec<f64> = (0..n).map(|_| self.uniform(0.0, TAU)).collect();
            let shift = (target.arg() - phases.iter().sum::<f64>()) / n as f64;
            let mut t: Vec<C64> = (0..n)
                .map(|i| C64::from_polar((lo[i] + (hi[i] - lo[i]) * logistic(lg[i] + lam)).exp(), phases[i] + shift))
                .collect();
            let rest: C64 = t[..n - 1].iter().product();
            t[n - 1] = target / rest;
            if has_tie(&t) || !accept(&t) {
                continue;
            }
            return Ok(t);
        }
        Err(Error::SamplerInfeasible(format!("{} rejections", self.max_rejections)))
    }
}

pub fn has_tie(t: &[C64]) -> bool {
    (0..t.len()).any(|i| (i + 1..t.len()).any(|j| (t[i] / t[j] - 1.0).norm() < TIE_GUARD))
}

/// Multiplicative distance of `x` from the zero set `p^Z` of `θ_p`.
pub fn theta_zero_distance(x: C64, p: C64) -> f64 {
    let k = (x.norm().ln() / p.norm().ln()).round() as i32;
    (k - 1..=k + 1).map(|j| (x / p.powi(j) - 1.0).norm()).fold(f64::INFINITY, f64::min)
}

/// True when every argument keeps a distance of at least `TIE_GUARD` from the
/// zeros of `θ_p`.
pub fn theta_safe(args: &[C64], p: C64) -> bool {
    args.iter().all(|&x| theta_zero_distance(x, p) > TIE_GUARD)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_draw_respects_windows() {
        let mut s = Sampler::new(3);
        let base = s.base();
        let w = windows(&[(window(0.05, 0.9 * base.q().norm()), 3), (window(0.1, 0.85), 5)]);
        let target = base.p().powi(2) * base.q().powi(3);
        for _ in 0..50 {
            let t = s.balanced(target, &w, |_| true).unwrap();
            let prod: C64 = t.iter().product();
            assert!((prod - target).norm() < 1e-13 * target.norm());
            for (x, w) in t.iter().zip(&w) {
                assert!(x.norm() >= w.lo * (1.0 - 1e-12) && x.norm() <= w.hi * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn infeasible_windows() {
        let mut s = Sampler::new(1);
        let r = s.balanced(C64::new(2.0, 0.0), &[window(0.1, 0.5); 4], |_| true);
        assert!(matches!(r, Err(Error::SamplerInfeasible(_))));
        let r = s.balanced(C64::new(0.01, 0.0), &[window(0.1, 0.9); 4], |_| false);
        assert!(matches!(r, Err(Error::SamplerInfeasible(_))));
    }

    #[test]
    fn deterministic_streams() {
        let a = Sampler::new(derived_seed("x", 0, 1)).point(0.1, 1.0);
        let b = Sampler::new(derived_seed("x", 0, 1)).point(0.1, 1.0);
        let c = Sampler::new(derived_seed("x", 0, 2)).point(0.1, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn theta_zero_distances() {
        let p = C64::new(0.3, 0.1);
        assert!(theta_zero_distance(p * p * 1.0000001, p) < 1e-6);
        assert!(theta_zero_distance(C64::new(0.0, 0.7), p) > 0.1);
    }
}
