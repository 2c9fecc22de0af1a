//! Quadrature-free checks: functional equations of `θ_p` and `Γ_{p,q}`, the
//! theta addition formula, the recurrence kernel, the elliptic Cauchy
//! determinant and exterior powers.

use num_complex::Complex64 as C64;

use super::{outcome, retry, versus, Draw, Ev, Identity, Outcome, PLAIN};
use crate::error::Result;
use crate::matrixkit::{elliptic_cauchy_det, exterior_power_det_check, CMatrix};
use crate::sampler::{has_tie, theta_safe, Sampler};
use crate::specfun::{elliptic_gamma, recurrence1_kernel_residual, theta, theta_addition_residual, BasePair};

pub(super) fn identities() -> Vec<Identity> {
    vec![
        Identity {
            name: "theta-functional",
            summary: "theta_p(pz) = -theta_p(z)/z and theta_p(1/z) = -theta_p(z)/z",
            variants: PLAIN,
            tol: 1e-12,
            sample: sample_point,
            check: check_theta,
        },
        Identity {
            name: "gamma-functional",
            summary: "q- and p-shifts, reflection and p<->q symmetry of the elliptic gamma function",
            variants: PLAIN,
            tol: 1e-12,
            sample: sample_point,
            check: check_gamma,
        },
        Identity {
            name: "theta-addition",
            summary: "three-term theta addition formula",
            variants: PLAIN,
            tol: 1e-11,
            sample: sample_addition,
            check: check_addition,
        },
        Identity {
            name: "recurrence1-kernel",
            summary: "the theta identity behind the (n+2)-term recurrence",
            variants: &[(1, 0), (2, 0), (3, 0)],
            tol: 1e-11,
            sample: sample_kernel,
            check: check_kernel,
        },
        Identity {
            name: "cauchy-det",
            summary: "elliptic Cauchy determinant",
            variants: &[(1, 0), (2, 0), (3, 0)],
            tol: 1e-10,
            sample: sample_cauchy,
            check: check_cauchy,
        },
        Identity {
            name: "exterior-power",
            summary: "det of the n-th exterior power of an N x N matrix (n = size, m = power)",
            variants: &[(3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3), (4, 4)],
            tol: 1e-12,
            sample: sample_matrix,
            check: check_exterior,
        },
    ]
}

const LO: f64 = 0.3;
const HI: f64 = 2.0;

/// `|z| ∈ [0.3, 2]`: between the zeros (`|z| ≤ 0.16`) and the poles
/// (`|z| ≥ 2.5`) of `Γ_{p,q}` nearest the unit circle.
fn sample_point(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let z = retry(s, "point", |s| {
        let z = s.point(LO, HI);
        Ok((theta_safe(&[z], base.p()) && theta_safe(&[z], base.q())).then_some(z))
    })?;
    Ok(Draw::new(base, n, m, Vec::new()).with_aux(vec![z]))
}

fn check_theta(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (p, z, pol) = (d.base.p(), d.aux[0], &ev.cfg.policy);
    let tz = theta(z, p, pol)?;
    Ok(vec![
        versus("quasi-periodicity", theta(p * z, p, pol)?, -tz / z, 1e-12),
        versus("inversion", theta(1.0 / z, p, pol)?, -tz / z, 1e-12),
    ])
}

fn check_gamma(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (b, z, pol) = (d.base, d.aux[0], &ev.cfg.policy);
    let (p, q) = (b.p(), b.q());
    let g = |x: C64| elliptic_gamma(x, &b, pol);
    let gz = g(z)?;
    Ok(vec![
        versus("q-shift", g(q * z)?, theta(z, p, pol)? * gz, 1e-12),
        versus("p-shift", g(p * z)?, theta(z, q, pol)? * gz, 1e-12),
        versus("reflection", gz * g(p * q / z)?, C64::new(1.0, 0.0), 1e-12),
        versus("symmetry", elliptic_gamma(z, &b.swapped(), pol)?, gz, 1e-12),
    ])
}

fn points(s: &mut Sampler, k: usize) -> Vec<C64> {
    (0..k).map(|_| s.point(LO, HI)).collect()
}

fn ratios(t: &[C64]) -> Vec<C64> {
    let mut v = Vec::new();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            v.extend([t[i] * t[j], t[i] / t[j]]);
        }
    }
    v
}

fn sample_addition(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let aux = retry(s, "addition", |s| {
        let x = points(s, 4);
        Ok((!has_tie(&x)).then_some(x))
    })?;
    Ok(Draw::new(base, n, m, Vec::new()).with_aux(aux))
}

fn check_addition(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let a = &d.aux;
    let r = theta_addition_residual(a[0], a[1], a[2], a[3], d.base.p(), &ev.cfg.policy)?;
    Ok(vec![outcome("", r.relative(), r.scale, 1e-11)])
}

fn sample_kernel(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let (t, z) = retry(s, "kernel", |s| {
        let t = points(s, n + 2);
        let z = points(s, n);
        Ok((!has_tie(&t) && theta_safe(&ratios(&t), base.p())).then_some((t, z)))
    })?;
    Ok(Draw::new(base, n, m, t).with_aux(z))
}

fn check_kernel(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let r = recurrence1_kernel_residual(&d.t, &d.aux, d.base.p(), &ev.cfg.policy)?;
    Ok(vec![outcome("", r.relative(), r.scale, 1e-11)])
}

fn sample_cauchy(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let p = base.p();
    let (a, z) = retry(s, "cauchy", |s| {
        let a = points(s, n);
        let z = points(s, n);
        let cross: Vec<C64> = a.iter().flat_map(|&x| z.iter().flat_map(move |&y| [x * y, x / y])).collect();
        let ok = !has_tie(&a)
            && !has_tie(&z)
            && theta_safe(&cross, p)
            && theta_safe(&ratios(&a), p)
            && theta_safe(&ratios(&z), p);
        Ok(ok.then_some((a, z)))
    })?;
    Ok(Draw::new(base, n, m, a).with_aux(z))
}

fn check_cauchy(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (l, r) = elliptic_cauchy_det(&d.t, &d.aux, d.base.p(), &ev.cfg.policy)?;
    Ok(vec![versus("", l, r, 1e-10)])
}

/// Entries uniform in the unit square; the base pair is drawn but unused.
fn sample_matrix(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base: BasePair = s.base();
    let t = (0..n * n).map(|_| C64::new(s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0))).collect();
    Ok(Draw::new(base, n, m, t))
}

fn check_exterior(d: &Draw, _: &Ev) -> Result<Vec<Outcome>> {
    let m = CMatrix::from_row_slice(d.n, d.n, &d.t);
    let (l, r) = exterior_power_det_check(&m, d.m as usize)?;
    Ok(vec![versus("", l, r, 1e-12)])
}
