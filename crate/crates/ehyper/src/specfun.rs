//! Truncated infinite products: `(z;p)∞`, the theta function `θ_p`, and the
//! elliptic gamma function `Γ_{p,q}`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const POLE_GUARD: f64 = 1e-6;
pub const TIE_GUARD: f64 = 1e-3;

/// The pair of bases `(p, q)`, both strictly inside the unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePair {
    p: C64,
    q: C64,
}

impl BasePair {
    pub fn new(p: C64, q: C64) -> Result<Self> {
        for b in [p, q] {
            if !(b.norm() < 1.0) {
                return Err(Error::NonConvergent(b.norm()));
            }
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> C64 {
        self.p
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn pq(&self) -> C64 {
        self.p * self.q
    }

    pub fn swapped(&self) -> Self {
        Self { p: self.q, q: self.p }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    eps_trunc: f64,
    max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { eps_trunc: 1e-17, max_terms: 512 }
    }
}

impl TruncationPolicy {
    pub fn new(eps_trunc: f64, max_terms: usize) -> Result<Self> {
        if !(eps_trunc > 0.0 && eps_trunc < 1e-6) {
            return Err(Error::InvalidInput(format!("eps_trunc {eps_trunc:e} outside (0, 1e-6)")));
        }
        if max_terms < 8 {
            return Err(Error::InvalidInput(format!("max_terms {max_terms} below 8")));
        }
        Ok(Self { eps_trunc, max_terms })
    }

    pub fn eps_trunc(&self) -> f64 {
        self.eps_trunc
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

/// A truncated product together with a flag telling whether the term cap
/// was reached before the cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncated {
    pub value: C64,
    pub cap_hit: bool,
}

fn check_base(p: C64) -> Result<()> {
    if p.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::NonConvergent(p.norm()))
    }
}

fn poch_raw(z: C64, p: C64, eps2: f64, max_terms: usize) -> (C64, bool) {
    let mut acc = C64::new(1.0, 0.0);
    let mut x = z;
    for _ in 0..max_terms {
        if x.norm_sqr() < eps2 {
            return (acc, false);
        }
        acc *= 1.0 - x;
        x *= p;
    }
    (acc, x.norm_sqr() >= eps2)
}

pub fn qpochhammer_inf(z: C64, p: C64, policy: &TruncationPolicy) -> Result<Truncated> {
    check_base(p)?;
    let (value, cap_hit) = poch_raw(z, p, policy.eps_trunc.powi(2), policy.max_terms);
    Ok(Truncated { value, cap_hit })
}

/// `θ_p(z) = (z;p)∞ (p/z;p)∞`.
pub fn theta(z: C64, p: C64, policy: &TruncationPolicy) -> Result<C64> {
    check_base(p)?;
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Domain("theta at z = 0".into()));
    }
    let eps2 = policy.eps_trunc.powi(2);
    let (a, ca) = poch_raw(z, p, eps2, policy.max_terms);
    let (b, cb) = poch_raw(p / z, p, eps2, policy.max_terms);
    if ca || cb {
        return Err(Error::TruncationCapHit(policy.max_terms));
    }
    Ok(a * b)
}

pub fn elliptic_gamma(z: C64, base: &BasePair, policy: &TruncationPolicy) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Domain("elliptic gamma at z = 0".into()));
    }
    let k = Kernel::new(*base, *policy);
    let (v, cap) = k.gamma_impl(z, true)?;
    if cap {
        return Err(Error::TruncationCapHit(policy.max_terms));
    }
    Ok(v)
}

/// An argument `t · z₁^{±1} ⋯ z_k^{±1}`, standing for the `2^k` products
/// obtained from all sign choices.
#[derive(Clone, Debug, PartialEq)]
pub struct Compound {
    pub t: C64,
    pub pm: Vec<C64>,
}

impl Compound {
    pub fn plain(t: C64) -> Self {
        Self { t, pm: Vec::new() }
    }

    pub fn pm(t: C64, z: C64) -> Self {
        Self { t, pm: vec![z] }
    }

    pub fn pm2(t: C64, z1: C64, z2: C64) -> Self {
        Self { t, pm: vec![z1, z2] }
    }

    /// All expanded arguments, sign patterns in binary order (`+` before `−`).
    pub fn expand(&self) -> Vec<C64> {
        let k = self.pm.len();
        (0..1usize << k)
            .map(|mask| {
                self.pm.iter().enumerate().fold(
                    self.t,
                    |acc, (i, z)| {
                        if mask >> (k - 1 - i) & 1 == 0 {
                            acc * z
                        } else {
                            acc / z
                        }
                    },
                )
            })
            .collect()
    }
}

pub fn theta_compound(args: &[Compound], p: C64, policy: &TruncationPolicy) -> Result<C64> {
    let mut acc = C64::new(1.0, 0.0);
    for a in args {
        for x in a.expand() {
            acc *= theta(x, p, policy)?;
        }
    }
    Ok(acc)
}

pub fn gamma_compound(args: &[Compound], base: &BasePair, policy: &TruncationPolicy) -> Result<C64> {
    let mut acc = C64::new(1.0, 0.0);
    for a in args {
        for x in a.expand() {
            acc *= elliptic_gamma(x, base, policy)?;
        }
    }
    Ok(acc)
}

/// A vanishing-sum residual together with the size of its largest term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub value: C64,
    pub scale: f64,
}

impl Residual {
    pub fn from_terms(terms: &[C64]) -> Self {
        let value = terms.iter().sum();
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        Self { value, scale }
    }

    pub fn relative(&self) -> f64 {
        self.value.norm() / self.scale.max(1e-300)
    }
}

fn nonzero(xs: &[C64]) -> Result<()> {
    if xs.iter().any(|x| *x == C64::new(0.0, 0.0)) {
        Err(Error::Domain("zero argument".into()))
    } else {
        Ok(())
    }
}

pub fn theta_addition_residual(
    t1: C64,
    t2: C64,
    t3: C64,
    z: C64,
    p: C64,
    policy: &TruncationPolicy,
) -> Result<Residual> {
    nonzero(&[t1, t2, t3, z])?;
    let th = |args: &[Compound]| theta_compound(args, p, policy);
    let terms = [
        t3 * th(&[Compound::pm(t2, t3), Compound::pm(t1, z)])?,
        t1 * th(&[Compound::pm(t3, t1), Compound::pm(t2, z)])?,
        t2 * th(&[Compound::pm(t1, t2), Compound::pm(t3, z)])?,
    ];
    Ok(Residual::from_terms(&terms))
}

pub(crate) fn check_ties(t: &[C64]) -> Result<()> {
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            if (t[i] / t[j] - 1.0).norm() < TIE_GUARD {
                return Err(Error::TieBreak(i, j));
            }
        }
    }
    Ok(())
}

/// `Σ_i t_i ∏_j θ_p(t_i z_j^{±1}) / ∏_{j≠i} θ_p(t_i t_j^{±1})` for `n+2`
/// values `t` and `n` values `z`.
pub fn recurrence1_kernel_residual(t: &[C64], z: &[C64], p: C64, policy: &TruncationPolicy) -> Result<Residual> {
    if t.len() != z.len() + 2 {
        return Err(Error::InvalidInput(format!("expected {} t values, got {}", z.len() + 2, t.len())));
    }
    nonzero(t)?;
    nonzero(z)?;
    check_ties(t)?;
    let mut terms = Vec::with_capacity(t.len());
    for (i, &ti) in t.iter().enumerate() {
        let num: Vec<Compound> = z.iter().map(|&zj| Compound::pm(ti, zj)).collect();
        let den: Vec<Compound> =
            t.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &tj)| Compound::pm(ti, tj)).collect();
        terms.push(ti * theta_compound(&num, p, policy)? / theta_compound(&den, p, policy)?);
    }
    Ok(Residual::from_terms(&terms))
}

/// Unchecked evaluator used inside integrands and identity checks.
///
/// No pole or cap diagnostics: callers guarantee valid arguments.
#[derive(Clone, Copy, Debug)]
pub struct Kernel {
    pub base: BasePair,
    eps2: f64,
    max_terms: usize,
}

impl Kernel {
    pub fn new(base: BasePair, policy: TruncationPolicy) -> Self {
        Self { base, eps2: policy.eps_trunc.powi(2), max_terms: policy.max_terms }
    }

    pub fn with_base(&self, base: BasePair) -> Self {
        Self { base, ..*self }
    }

    pub fn theta_in(&self, z: C64, p: C64) -> C64 {
        poch_raw(z, p, self.eps2, self.max_terms).0 * poch_raw(p / z, p, self.eps2, self.max_terms).0
    }

    pub fn theta_p(&self, z: C64) -> C64 {
        self.theta_in(z, self.base.p)
    }

    pub fn theta_q(&self, z: C64) -> C64 {
        self.theta_in(z, self.base.q)
    }

    /// Product of `θ_p` over the given arguments.
    pub fn th(&self, args: &[C64]) -> C64 {
        args.iter().map(|&x| self.theta_p(x)).product()
    }

    /// `θ_p(t z^{±1})`.
    pub fn th_pm(&self, t: C64, z: C64) -> C64 {
        self.theta_p(t * z) * self.theta_p(t / z)
    }

    pub fn gamma(&self, z: C64) -> C64 {
        match self.gamma_impl(z, false) {
            Ok((v, _)) => v,
            Err(_) => unreachable!(),
        }
    }

    /// Product of `Γ_{p,q}` over the given arguments.
    pub fn gam(&self, args: &[C64]) -> C64 {
        args.iter().map(|&x| self.gamma(x)).product()
    }

    /// `Γ(t z^{±1})`.
    pub fn gam_pm(&self, t: C64, z: C64) -> C64 {
        self.gamma(t * z) * self.gamma(t / z)
    }

    /// `1/(Γ(x)Γ(1/x)) = −x⁻¹ θ_p(x) θ_q(x)`, entire in `x ≠ 0`.
    pub fn inv_gamma_pair(&self, x: C64) -> C64 {
        -self.theta_p(x) * self.theta_q(x) / x
    }

    fn gamma_impl(&self, z: C64, guard: bool) -> Result<(C64, bool)> {
        let (p, q) = (self.base.p, self.base.q);
        let mut num = C64::new(1.0, 0.0);
        let mut den = C64::new(1.0, 0.0);
        let mut a_row = z;
        let mut b_row = p * q / z;
        let mut capped = true;
        for _ in 0..self.max_terms {
            if a_row.norm_sqr() < self.eps2 && b_row.norm_sqr() < self.eps2 {
                capped = false;
                break;
            }
            let (mut a, mut b) = (a_row, b_row);
            let mut row_done = false;
            for _ in 0..self.max_terms {
                if a.norm_sqr() < self.eps2 && b.norm_sqr() < self.eps2 {
                    row_done = true;
                    break;
                }
                let d = 1.0 - a;
                if guard && d.norm() < POLE_GUARD {
                    return Err(Error::PoleProximity(format!("elliptic gamma argument {z} near a pole")));
                }
                den *= d;
                num *= 1.0 - b;
                a *= q;
                b *= q;
            }
            if !row_done {
                return Ok((num / den, true));
            }
            a_row *= p;
            b_row *= p;
        }
        Ok((num / den, capped))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / a.norm().max(b.norm())
    }

    #[test]
    fn pochhammer_trivial_cases() {
        let pol = TruncationPolicy::default();
        let p = c(0.3, 0.1);
        assert_eq!(qpochhammer_inf(c(0.0, 0.0), p, &pol).unwrap().value, c(1.0, 0.0));
        assert_eq!(qpochhammer_inf(c(0.0, 0.0), c(0.0, 0.0), &pol).unwrap().value, c(1.0, 0.0));
        assert!(qpochhammer_inf(c(0.5, 0.0), c(1.0, 0.0), &pol).is_err());
    }

    #[test]
    fn pochhammer_reference_values() {
        let pol = TruncationPolicy::default();
        let v = qpochhammer_inf(c(0.5, 0.0), c(0.3, 0.0), &pol).unwrap();
        assert!(!v.cap_hit);
        assert!(rel(v.value, c(0.398_082_204_301_877_67, 0.0)) < 1e-15);
        let w = qpochhammer_inf(c(0.5, 0.2), c(0.3, 0.1), &pol).unwrap();
        assert!(rel(w.value, c(0.384_264_645_485_794_57, -0.250_454_807_982_139_66)) < 1e-15);
    }

    #[test]
    fn cap_flag() {
        let pol = TruncationPolicy::new(1e-17, 8).unwrap();
        assert!(qpochhammer_inf(c(0.5, 0.0), c(0.9, 0.0), &pol).unwrap().cap_hit);
        assert!(matches!(theta(c(0.5, 0.0), c(0.9, 0.0), &pol), Err(Error::TruncationCapHit(8))));
    }

    #[test]
    fn theta_values() {
        let pol = TruncationPolicy::default();
        let p = c(0.3, 0.1);
        assert_eq!(theta(c(1.0, 0.0), p, &pol).unwrap(), c(0.0, 0.0));
        let v = theta(c(0.7, 0.4), p, &pol).unwrap();
        assert!(rel(v, c(0.080_069_552_981_655_66, -0.199_613_866_452_119_78)) < 1e-14);
        assert!(theta(c(0.0, 0.0), p, &pol).is_err());
        let z = c(0.9, -1.3);
        let t = theta(z, p, &pol).unwrap();
        assert!(rel(theta(p * z, p, &pol).unwrap(), -t / z) < 1e-13);
        assert!(rel(theta(1.0 / z, p, &pol).unwrap(), -t / z) < 1e-13);
    }

    #[test]
    fn gamma_values() {
        let pol = TruncationPolicy::default();
        let base = BasePair::new(c(0.3, 0.1), c(0.2, -0.25)).unwrap();
        let g = elliptic_gamma(c(0.7, 0.4), &base, &pol).unwrap();
        assert!(rel(g, c(1.172_892_744_517_436_3, 3.185_913_541_725_786_5)) < 1e-13);
        let g2 = elliptic_gamma(c(-1.3, 0.5), &base, &pol).unwrap();
        assert!(rel(g2, c(0.164_675_016_790_390_5, 0.165_573_673_935_867_39)) < 1e-13);
        assert!(matches!(elliptic_gamma(c(1.0, 0.0), &base, &pol), Err(Error::PoleProximity(_))));
        assert!(elliptic_gamma(c(0.0, 0.0), &base, &pol).is_err());
    }

    #[test]
    fn gamma_functional_equations() {
        let pol = TruncationPolicy::default();
        let base = BasePair::new(c(0.3, 0.1), c(0.2, -0.25)).unwrap();
        let (p, q) = (base.p(), base.q());
        let a = c(0.6, 0.5);
        let g = |z| elliptic_gamma(z, &base, &pol).unwrap();
        assert!((g(a) * g(p * q / a) - 1.0).norm() < 1e-12);
        assert!(rel(g(a), elliptic_gamma(a, &base.swapped(), &pol).unwrap()) < 1e-13);
        assert!(rel(g(q * a), theta(a, p, &pol).unwrap() * g(a)) < 1e-12);
        assert!(rel(g(p * a), theta(a, q, &pol).unwrap() * g(a)) < 1e-12);
    }

    #[test]
    fn compound_expansion() {
        let pol = TruncationPolicy::default();
        let p = c(0.25, -0.1);
        let (t, z1, z2) = (c(0.4, 0.3), c(0.9, 0.2), c(-0.3, 1.1));
        let x = Compound::pm2(t, z1, z2).expand();
        assert_eq!(x, vec![t * z1 * z2, t * z1 / z2, t / z1 * z2, t / z1 / z2]);
        let two = theta_compound(&[Compound::pm(t, z1)], p, &pol).unwrap();
        let explicit = theta(t * z1, p, &pol).unwrap() * theta(t / z1, p, &pol).unwrap();
        assert_eq!(two, explicit);
        let killed = theta_compound(&[Compound::pm(t, 1.0 / t)], p, &pol).unwrap();
        assert_eq!(killed, c(0.0, 0.0));
        let pair = theta_compound(&[Compound::plain(t), Compound::plain(z1)], p, &pol).unwrap();
        let prod = theta(t, p, &pol).unwrap() * theta(z1, p, &pol).unwrap();
        assert!(rel(pair, prod) < 1e-15);
    }

    #[test]
    fn gamma_compound_cases() {
        let pol = TruncationPolicy::default();
        let base = BasePair::new(c(0.3, 0.1), c(0.2, -0.25)).unwrap();
        let (t, z1, z2) = (c(0.4, 0.3), c(0.9, 0.2), c(-0.3, 1.1));
        let four = gamma_compound(&[Compound::pm2(t, z1, z2)], &base, &pol).unwrap();
        let explicit: C64 =
            Compound::pm2(t, z1, z2).expand().into_iter().map(|x| elliptic_gamma(x, &base, &pol).unwrap()).product();
        assert_eq!(four, explicit);
        let s = base.pq().sqrt();
        let (tt, zz) = (s, c(1.0, 0.0));
        let v = gamma_compound(&[Compound::pm(tt, zz)], &base, &pol).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn addition_and_kernel_examples() {
        let pol = TruncationPolicy::default();
        let p = c(0.3, 0.1);
        let (t1, t3, z) = (c(0.5, 0.2), c(-0.4, 0.7), c(0.8, 0.6));
        let r = theta_addition_residual(t1, t1, t3, z, p, &pol).unwrap();
        assert!(r.relative() < 1e-13);
        let r = theta_addition_residual(t1, c(0.2, -0.9), t3, t1, p, &pol).unwrap();
        assert!(r.relative() < 1e-13);
        let r = recurrence1_kernel_residual(&[t1, t3], &[], p, &pol).unwrap();
        assert!(r.relative() < 1e-13);
        let r = recurrence1_kernel_residual(&[t1, t3, c(0.2, 0.3)], &[t1], p, &pol).unwrap();
        assert!(r.relative() < 1e-13);
        assert!(matches!(
            recurrence1_kernel_residual(&[t1, t1 * 1.0001, t3], &[z], p, &pol),
            Err(Error::TieBreak(0, 1))
        ));
    }
}
