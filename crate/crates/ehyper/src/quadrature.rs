//! Trapezoidal quadrature on circles for the measure `dz/(2πi z)`.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const CONTOUR_MARGIN: f64 = 0.02;

/// A positively oriented circle. `rotation` offsets the node angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub center: C64,
    pub radius: f64,
    pub rotation: f64,
}

impl Default for Contour {
    fn default() -> Self {
        Self { center: C64::new(0.0, 0.0), radius: 1.0, rotation: 0.0 }
    }
}

impl Contour {
    pub fn circle(radius: f64) -> Self {
        Self { radius, ..Self::default() }
    }

    pub fn centered_at(center: C64, radius: f64) -> Self {
        Self { center, radius, rotation: 0.0 }
    }

    pub fn rotated(self, rotation: f64) -> Self {
        Self { rotation, ..self }
    }

    fn node(&self, k: usize, n: usize) -> (C64, C64) {
        let u = C64::from_polar(self.radius, TAU * k as f64 / n as f64 + self.rotation);
        let z = self.center + u;
        (z, u / z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSpec {
    pub n0: usize,
    pub n_max: usize,
    pub rel_tol: f64,
    pub abs_floor: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { n0: 64, n_max: 16384, rel_tol: 1e-11, abs_floor: 1e-300 }
    }
}

impl QuadSpec {
    /// Per-axis defaults for tensor-product rules.
    pub fn tensor() -> Self {
        Self { n0: 32, n_max: 512, rel_tol: 1e-9, abs_floor: 1e-300 }
    }

    /// A single fixed-size rule.
    pub fn fixed(n: usize) -> Self {
        Self { n0: n, n_max: n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.n0 >= 16
            && self.n0.is_power_of_two()
            && self.n_max >= self.n0
            && (self.n_max / self.n0).is_power_of_two()
            && self.n_max % self.n0 == 0
            && self.rel_tol > 0.0
            && self.abs_floor > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad quadrature spec {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    /// Last inter-refinement delta (infinite if no refinement happened).
    pub err_est: f64,
    pub nodes_used: usize,
    pub converged: bool,
    /// Mean of `|f|` over the final rule.
    pub magnitude: f64,
}

impl QuadResult {
    pub fn require(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged(self))
        }
    }
}

fn ordered_sum(xs: &[(C64, f64)]) -> (C64, f64) {
    xs.iter().fold((C64::new(0.0, 0.0), 0.0), |(s, m), &(v, a)| (s + v, m + a))
}

pub fn contour_integrate<F>(f: F, contour: &Contour, spec: &QuadSpec) -> Result<QuadResult>
where
    F: Fn(C64) -> C64 + Sync,
{
    spec.validate()?;
    let eval = |k: usize, n: usize| {
        let (z, w) = contour.node(k, n);
        let v = f(z) * w;
        (v, v.norm())
    };
    let mut n = spec.n0;
    let first: Vec<_> = (0..n).into_par_iter().map(|k| eval(k, n)).collect();
    let (mut sum, mut mag) = ordered_sum(&first);
    let mut value = sum / n as f64;
    let mut err_est = f64::INFINITY;
    let mut converged = false;
    while n < spec.n_max {
        let m = 2 * n;
        let new: Vec<_> = (0..n).into_par_iter().map(|k| eval(2 * k + 1, m)).collect();
        let (s, a) = ordered_sum(&new);
        sum += s;
        mag += a;
        n = m;
        let next = sum / n as f64;
        err_est = (next - value).norm();
        value = next;
        if err_est <= spec.rel_tol * value.norm().max(spec.abs_floor) {
            converged = true;
            break;
        }
    }
    Ok(QuadResult { value, err_est, nodes_used: n, converged, magnitude: mag / n as f64 })
}

pub fn tensor_integrate<F>(f: F, contour: &Contour, spec: &QuadSpec, n: usize) -> Result<QuadResult>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    tensor_integrate_weighted(|_| C64::new(1.0, 0.0), f, contour, spec, n)
}

/// Tensor rule for integrands of the form `∏_i w(z_i) · f(z_1,…,z_n)`; the
/// axis weights are evaluated once per node.
pub fn tensor_integrate_weighted<W, F>(
    weight: W,
    f: F,
    contour: &Contour,
    spec: &QuadSpec,
    n: usize,
) -> Result<QuadResult>
where
    W: Fn(C64) -> C64 + Sync,
    F: Fn(&[C64]) -> C64 + Sync,
{
    if n == 0 || n > 3 {
        return Err(Error::CapExceeded(n));
    }
    spec.validate()?;
    let mut nodes: Vec<(C64, C64)> = Vec::new();
    let mut size = spec.n0;
    let (mut sum, mut mag) = (C64::new(0.0, 0.0), 0.0);
    let mut value = C64::new(0.0, 0.0);
    let mut err_est = f64::INFINITY;
    let mut converged = false;
    let mut level = 0;
    loop {
        let fresh: Vec<(C64, C64)> = if level == 0 {
            (0..size).into_par_iter().map(|k| contour.node(k, size)).collect()
        } else {
            (0..size / 2).into_par_iter().map(|k| contour.node(2 * k + 1, size)).collect()
        };
        let fresh_w: Vec<C64> = fresh.par_iter().map(|&(z, w)| weight(z) * w).collect();
        let mut merged = Vec::with_capacity(size);
        if level == 0 {
            merged.extend(fresh.iter().zip(&fresh_w).map(|(&(z, _), &w)| (z, w)));
        } else {
            for k in 0..size / 2 {
                merged.push(nodes[k]);
                merged.push((fresh[k].0, fresh_w[k]));
            }
        }
        nodes = merged;
        let refine = level > 0;
        let rows: Vec<(C64, f64)> = (0..size)
            .into_par_iter()
            .map(|i| {
                let mut s = C64::new(0.0, 0.0);
                let mut a = 0.0;
                let mut z = [C64::new(0.0, 0.0); 3];
                let total = size.pow(n as u32 - 1);
                for rest in 0..total {
                    let mut idx = [i, 0, 0];
                    let mut r = rest;
                    for d in (1..n).rev() {
                        idx[d] = r % size;
                        r /= size;
                    }
                    if refine && idx[..n].iter().all(|&k| k % 2 == 0) {
                        continue;
                    }
                    let mut w = C64::new(1.0, 0.0);
                    for d in 0..n {
                        z[d] = nodes[idx[d]].0;
                        w *= nodes[idx[d]].1;
                    }
                    let v = w * f(&z[..n]);
                    s += v;
                    a += v.norm();
                }
                (s, a)
            })
            .collect();
        let (s, a) = ordered_sum(&rows);
        sum += s;
        mag += a;
        let count = size.pow(n as u32) as f64;
        let next = sum / count;
        if level > 0 {
            err_est = (next - value).norm();
        }
        value = next;
        if level > 0 && err_est <= spec.rel_tol * value.norm().max(spec.abs_floor) {
            converged = true;
            break;
        }
        if size >= spec.n_max {
            break;
        }
        size *= 2;
        level += 1;
    }
    let count = size.pow(n as u32);
    Ok(QuadResult { value, err_est, nodes_used: count, converged, magnitude: mag / count as f64 })
}

/// `max|t_j| < r(1−δ)` and `r < (1−δ)/max|t_j|` with `δ =` [`CONTOUR_MARGIN`].
pub fn circle_contour_valid(params: &[C64], r: f64) -> bool {
    circle_contour_valid_with_margin(params, r, CONTOUR_MARGIN)
}

pub fn circle_contour_valid_with_margin(params: &[C64], r: f64, margin: f64) -> bool {
    let m = params.iter().map(|t| t.norm()).fold(0.0, f64::max);
    m < r * (1.0 - margin) && r * m < 1.0 - margin
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_monomials() {
        let c = Contour::default();
        let r = contour_integrate(|_| C64::new(1.0, 0.0), &c, &QuadSpec::fixed(16)).unwrap();
        assert_eq!(r.value, C64::new(1.0, 0.0));
        for k in [-3i32, -2, -1, 1, 2, 3] {
            let r = contour_integrate(|z| z.powi(k), &Contour::circle(0.9), &QuadSpec::fixed(16)).unwrap();
            assert!(r.value.norm() < 1e-15, "k = {k}: {}", r.value);
        }
    }

    #[test]
    fn converges_on_analytic_integrand() {
        let a = C64::new(0.5, 0.3);
        let r = contour_integrate(|z| 1.0 / (1.0 - a / z), &Contour::default(), &QuadSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).norm() < 1e-14);
        assert!(r.nodes_used <= 256);
    }

    #[test]
    fn off_centre_circle_picks_residue() {
        // ∮ dz/(2πi z) · z/(z−a) around a = 1
        let a = C64::new(0.8, 0.1);
        let r = contour_integrate(|z| z / (z - a), &Contour::centered_at(a, 0.2), &QuadSpec::default()).unwrap();
        assert!((r.value - 1.0).norm() < 1e-13);
    }

    #[test]
    fn not_converged_is_flagged() {
        let a = C64::new(0.999, 0.0);
        let r = contour_integrate(|z| 1.0 / (1.0 - a / z), &Contour::default(), &QuadSpec::fixed(64)).unwrap();
        assert!(!r.converged);
        assert!(matches!(r.require(), Err(Error::NotConverged(_))));
    }

    #[test]
    fn tensor_cases() {
        let c = Contour::default();
        let one = tensor_integrate(|_| C64::new(1.0, 0.0), &c, &QuadSpec::tensor(), 2).unwrap();
        assert!((one.value - 1.0).norm() < 1e-15);
        let r = tensor_integrate(|z| z[0] / z[1], &c, &QuadSpec::fixed(16), 2).unwrap();
        assert!(r.value.norm() < 1e-15);
        let a = C64::new(0.4, -0.2);
        let r = tensor_integrate(|z| 1.0 / ((1.0 - a / z[0]) * (1.0 - a * z[1])), &c, &QuadSpec::tensor(), 2).unwrap();
        assert!(r.converged && (r.value - 1.0).norm() < 1e-12);
        assert!(matches!(
            tensor_integrate(|_| C64::new(1.0, 0.0), &c, &QuadSpec::tensor(), 4),
            Err(Error::CapExceeded(4))
        ));
    }

    #[test]
    fn validity_examples() {
        let t = |m: f64| C64::from_polar(m, 0.7);
        assert!(circle_contour_valid(&[t(0.8), t(0.5)], 1.0));
        assert!(!circle_contour_valid(&[t(1.1), t(0.5)], 1.0));
        assert!(circle_contour_valid_with_margin(&[t(0.979)], 1.0, 0.02));
        assert!(!circle_contour_valid_with_margin(&[t(0.981)], 1.0, 0.02));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadSpec { n0: 8, ..QuadSpec::default() }.validate().is_err());
        assert!(QuadSpec { n0: 48, ..QuadSpec::default() }.validate().is_err());
        assert!(QuadSpec { n_max: 32, ..QuadSpec::default() }.validate().is_err());
    }
}
