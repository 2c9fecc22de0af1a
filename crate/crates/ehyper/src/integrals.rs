//! The integrals themselves: `V`, `W`, `U`, `I_1^(m)`, `I_n^(m)` and the
//! `|q| > 1` solution.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrixkit::det_lu;
use crate::quadrature::{
    circle_contour_valid, contour_integrate, tensor_integrate_weighted, Contour, QuadResult, QuadSpec, CONTOUR_MARGIN,
};
use crate::specfun::{check_ties, elliptic_gamma, qpochhammer_inf, BasePair, Kernel, TruncationPolicy};

pub const BALANCE_TOL: f64 = 1e-12;

fn balance_residual(t: &[C64], target: C64) -> f64 {
    let prod: C64 = t.iter().product();
    (prod - target).norm() / target.norm()
}

/// Parameters of a type I integral `I_n^(m)`; `t` has `2n+2m+4` entries with
/// `∏ t = (pq)^{m+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeIParams {
    n: usize,
    m: i32,
    t: Vec<C64>,
    base: BasePair,
}

impl TypeIParams {
    /// With `normalize` the last parameter is solved from the balancing
    /// condition; otherwise the condition is checked.
    pub fn new(n: usize, m: i32, mut t: Vec<C64>, base: BasePair, normalize: bool) -> Result<Self> {
        if m < -1 {
            return Err(Error::InvalidInput(format!("m = {m} below -1")));
        }
        let len = 2 * n as i64 + 2 * m as i64 + 4;
        if t.len() as i64 != len {
            return Err(Error::InvalidInput(format!("(n, m) = ({n}, {m}) needs {len} parameters, got {}", t.len())));
        }
        let given = if normalize { &t[..t.len() - 1] } else { &t[..] };
        if given.iter().any(|x| x.norm() == 0.0 || !x.norm().is_finite()) {
            return Err(Error::Domain("parameters must be finite and nonzero".into()));
        }
        let target = Self::target(&base, m);
        if normalize {
            let rest: C64 = t[..t.len() - 1].iter().product();
            let last = t.len() - 1;
            t[last] = target / rest;
        } else {
            let r = balance_residual(&t, target);
            if !(r <= BALANCE_TOL) {
                return Err(Error::BalancingViolated(r));
            }
        }
        Ok(Self { n, m, t, base })
    }

    pub fn target(base: &BasePair, m: i32) -> C64 {
        base.pq().powi(m + 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn t(&self) -> &[C64] {
        &self.t
    }

    pub fn base(&self) -> BasePair {
        self.base
    }

    pub fn kappa_n(&self, policy: &TruncationPolicy) -> Result<C64> {
        kappa_n(&self.base, self.n, policy)
    }
}

/// The eight parameters of `V`, with `∏ t = (pq)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct VParams(TypeIParams);

impl VParams {
    pub fn new(t: [C64; 8], base: BasePair, normalize: bool) -> Result<Self> {
        TypeIParams::new(1, 1, t.to_vec(), base, normalize).map(Self)
    }

    pub fn t(&self) -> &[C64] {
        self.0.t()
    }

    pub fn base(&self) -> BasePair {
        self.0.base
    }

    pub fn as_type_i(&self) -> &TypeIParams {
        &self.0
    }
}

/// Multiplication of one parameter by `p^{p_power} q^{q_power}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftSpec {
    pub index: usize,
    pub p_power: i32,
    pub q_power: i32,
}

impl ShiftSpec {
    pub fn new(index: usize, p_power: i32, q_power: i32) -> Self {
        Self { index, p_power, q_power }
    }
}

pub trait Shiftable: Sized {
    fn params(&self) -> &[C64];
    fn base_pair(&self) -> BasePair;
    /// Rebuilds from new parameters, re-checking (never fixing) balancing.
    fn rebuild(&self, t: Vec<C64>) -> Result<Self>;
}

impl Shiftable for TypeIParams {
    fn params(&self) -> &[C64] {
        &self.t
    }

    fn base_pair(&self) -> BasePair {
        self.base
    }

    fn rebuild(&self, t: Vec<C64>) -> Result<Self> {
        TypeIParams::new(self.n, self.m, t, self.base, false)
    }
}

impl Shiftable for VParams {
    fn params(&self) -> &[C64] {
        self.0.t()
    }

    fn base_pair(&self) -> BasePair {
        self.0.base
    }

    fn rebuild(&self, t: Vec<C64>) -> Result<Self> {
        self.0.rebuild(t).map(Self)
    }
}

pub fn apply_shifts<P: Shiftable>(params: &P, shifts: &[ShiftSpec]) -> Result<P> {
    let base = params.base_pair();
    let mut t = params.params().to_vec();
    for s in shifts {
        let slot =
            t.get_mut(s.index).ok_or_else(|| Error::InvalidInput(format!("shift index {} out of range", s.index)))?;
        *slot *= base.p().powi(s.p_power) * base.q().powi(s.q_power);
    }
    params.rebuild(t)
}

/// `κ_n = (p;p)∞ⁿ (q;q)∞ⁿ / (2ⁿ n!)`.
pub fn kappa_n(base: &BasePair, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    let pp = qpochhammer_inf(base.p(), base.p(), policy)?.value;
    let qq = qpochhammer_inf(base.q(), base.q(), policy)?.value;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    Ok((pp * qq).powi(n as i32) / (2f64.powi(n as i32) * fact))
}

/// Integrand of `I_1^(m)` (without `κ`): `∏ Γ(t_r z^{±1}) / Γ(z^{±2})`.
pub fn density(k: &Kernel, t: &[C64], z: C64) -> C64 {
    let mut v = k.inv_gamma_pair(z * z);
    for &tj in t {
        v *= k.gam_pm(tj, z);
    }
    v
}

fn scaled(r: QuadResult, c: C64) -> QuadResult {
    QuadResult { value: r.value * c, err_est: r.err_est * c.norm(), magnitude: r.magnitude * c.norm(), ..r }
}

/// `κ ∮ density`, on an arbitrary contour and with no validity checks.
pub fn i1_on_contour(
    t: &[C64],
    base: &BasePair,
    contour: &Contour,
    spec: &QuadSpec,
    policy: &TruncationPolicy,
) -> Result<QuadResult> {
    let k = Kernel::new(*base, *policy);
    let r = contour_integrate(|z| density(&k, t, z), contour, spec)?;
    Ok(scaled(r, kappa_n(base, 1, policy)?))
}

fn unit_circle_checked(t: &[C64], what: &str) -> Result<()> {
    if circle_contour_valid(t, 1.0) {
        Ok(())
    } else {
        let m = t.iter().map(|x| x.norm()).fold(0.0, f64::max);
        Err(Error::ContourInvalid(format!("{what}: max |t| = {m:.6} leaves no margin around the unit circle")))
    }
}

fn i1_raw(t: &[C64], base: &BasePair, spec: &QuadSpec, policy: &TruncationPolicy) -> Result<QuadResult> {
    unit_circle_checked(t, "I_1")?;
    i1_on_contour(t, base, &Contour::default(), spec, policy)?.require()
}

pub fn v_function(params: &VParams, spec: &QuadSpec) -> Result<QuadResult> {
    i1_raw(params.t(), &params.base(), spec, &TruncationPolicy::default())
}

pub fn i1m(params: &TypeIParams, spec: &QuadSpec) -> Result<QuadResult> {
    if params.n != 1 {
        return Err(Error::InvalidInput(format!("i1m needs n = 1, got {}", params.n)));
    }
    i1_raw(&params.t, &params.base, spec, &TruncationPolicy::default())
}

/// The residue term picked up when the pole pair of `t_j` crosses the unit circle:
/// `∏_{k≠j} Γ(t_k t_j^{±1}) / Γ(t_j^{−2})`.
pub fn crossing_residue(k: &Kernel, t: &[C64], j: usize) -> C64 {
    let tj = t[j];
    let mut r = 1.0 / k.gamma(1.0 / (tj * tj));
    for (i, &ti) in t.iter().enumerate() {
        if i != j {
            r *= k.gam_pm(ti, tj);
        }
    }
    r
}

/// `I_1^(m)` continued to parameters with `1 < |t_j| < 1/max(|p|,|q|)`: the
/// unit-circle integral plus one residue term per such parameter.
pub fn i1m_continued(t: &[C64], base: &BasePair, spec: &QuadSpec, policy: &TruncationPolicy) -> Result<QuadResult> {
    let lim = 1.0 - CONTOUR_MARGIN;
    let mq = base.p().norm().max(base.q().norm());
    let mut outside = Vec::new();
    for (j, x) in t.iter().enumerate() {
        let r = x.norm();
        if r < lim {
            continue;
        }
        if r * lim > 1.0 && r * mq < lim {
            outside.push(j);
        } else {
            return Err(Error::ContourInvalid(format!("parameter {j} with |t| = {r:.6} cannot be continued")));
        }
    }
    let k = Kernel::new(*base, *policy);
    let mut r = i1_on_contour(t, base, &Contour::default(), spec, policy)?.require()?;
    for j in outside {
        r.value += crossing_residue(&k, t, j);
    }
    Ok(r)
}

pub fn inm_direct(params: &TypeIParams, spec: &QuadSpec) -> Result<QuadResult> {
    let n = params.n;
    if n >= 3 {
        return Err(Error::CapExceeded(n));
    }
    if n == 0 {
        return Ok(QuadResult {
            value: C64::new(1.0, 0.0),
            err_est: 0.0,
            nodes_used: 0,
            converged: true,
            magnitude: 1.0,
        });
    }
    unit_circle_checked(&params.t, "I_n")?;
    let policy = TruncationPolicy::default();
    let k = Kernel::new(params.base, policy);
    let t = &params.t;
    let r = tensor_integrate_weighted(
        |z| density(&k, t, z),
        |z| {
            let mut c = C64::new(1.0, 0.0);
            for i in 0..z.len() {
                for j in i + 1..z.len() {
                    c *= k.inv_gamma_pair(z[i] * z[j]) * k.inv_gamma_pair(z[i] / z[j]);
                }
            }
            c
        },
        &Contour::default(),
        spec,
        n,
    )?;
    Ok(scaled(r, params.kappa_n(&policy)?)).and_then(QuadResult::require)
}

/// A determinant value with its LU condition estimate and total node count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetEval {
    pub value: C64,
    pub cond: f64,
    pub nodes_used: usize,
}

pub fn inm_det(params: &TypeIParams, spec: &QuadSpec) -> Result<DetEval> {
    let n = params.n;
    let a: Vec<usize> = (0..n).collect();
    let b: Vec<usize> = (n..2 * n).collect();
    inm_det_with(params, &a, &b, spec)
}

/// Determinant reduction with `a_i = t[a_idx[i]]`, `b_i = t[b_idx[i]]`.
pub fn inm_det_with(params: &TypeIParams, a_idx: &[usize], b_idx: &[usize], spec: &QuadSpec) -> Result<DetEval> {
    let n = params.n;
    let len = params.t.len();
    if a_idx.len() != n || b_idx.len() != n {
        return Err(Error::InvalidInput("a and b index sets must have n entries".into()));
    }
    let mut seen = vec![false; len];
    for &i in a_idx.iter().chain(b_idx) {
        if i >= len || seen[i] {
            return Err(Error::InvalidInput("a and b index sets must be disjoint and in range".into()));
        }
        seen[i] = true;
    }
    if n == 0 {
        return Ok(DetEval { value: C64::new(1.0, 0.0), cond: 1.0, nodes_used: 0 });
    }
    let base = params.base;
    let (p, q) = (base.p(), base.q());
    let a: Vec<C64> = a_idx.iter().map(|&i| params.t[i]).collect();
    let b: Vec<C64> = b_idx.iter().map(|&i| params.t[i]).collect();
    check_ties(&a)?;
    check_ties(&b)?;
    let entry_params = |i: usize, j: usize| {
        let mut s = params.t.clone();
        for k in 0..n {
            if k != i {
                s[a_idx[k]] *= q;
            }
            if k != j {
                s[b_idx[k]] *= p;
            }
        }
        s
    };
    for i in 0..n {
        for j in 0..n {
            unit_circle_checked(&entry_params(i, j), &format!("determinant entry ({i}, {j})"))?;
        }
    }
    let policy = TruncationPolicy::default();
    let entries: Vec<QuadResult> = (0..n * n)
        .into_par_iter()
        .map(|e| i1_raw(&entry_params(e / n, e % n), &base, spec, &policy))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(n, n, |i, j| entries[i * n + j].value);
    let (det, cond) = det_lu(&m);
    let k = Kernel::new(base, policy);
    let mut pref = C64::new(1.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            pref *= a[j] * k.theta_p(a[i] * a[j]) * k.theta_p(a[i] / a[j]);
            pref *= b[j] * k.theta_q(b[i] * b[j]) * k.theta_q(b[i] / b[j]);
        }
    }
    Ok(DetEval { value: det / pref, cond, nodes_used: entries.iter().map(|r| r.nodes_used).sum() })
}

/// `∏ Γ(args)` through the guarded evaluator.
pub fn checked_gamma_product(args: &[C64], base: &BasePair) -> Result<C64> {
    let policy = TruncationPolicy::default();
    let mut d = C64::new(1.0, 0.0);
    for &x in args {
        d *= elliptic_gamma(x, base, &policy)?;
    }
    if d.norm() == 0.0 || !d.norm().is_finite() {
        return Err(Error::PoleProximity("normalizer vanishes or overflows".into()));
    }
    Ok(d)
}

/// `W = V / ∏ Γ(t_j z^{±1})`.
pub fn w_function(params: &VParams, z: C64, spec: &QuadSpec) -> Result<QuadResult> {
    let args: Vec<C64> = params.t().iter().flat_map(|&t| [t * z, t / z]).collect();
    let d = checked_gamma_product(&args, &params.base())?;
    Ok(scaled(v_function(params, spec)?, 1.0 / d))
}

/// `U = V / ∏_{k=1,2} Γ(t_k t_3^{±1})`.
pub fn u_function(params: &VParams, spec: &QuadSpec) -> Result<QuadResult> {
    let t = params.t();
    let d = checked_gamma_product(&[t[0] * t[2], t[0] / t[2], t[1] * t[2], t[1] / t[2]], &params.base())?;
    Ok(scaled(v_function(params, spec)?, 1.0 / d))
}

/// The solution for `|q| > 1`:
/// `V(p^{1/2}/t; q⁻¹, p) / ∏_{k=1,2} Γ_{p,q⁻¹}(p/(t_k t_3), t_3/t_k)`.
pub fn v_qgt1_solution(t: &[C64; 8], p: C64, q: C64, spec: &QuadSpec) -> Result<QuadResult> {
    if !(q.norm() > 1.0) {
        return Err(Error::InvalidInput(format!("|q| = {} is not above 1", q.norm())));
    }
    let inner = BasePair::new(p, 1.0 / q)?;
    let sp = p.sqrt();
    let s: Vec<C64> = t.iter().map(|&x| sp / x).collect();
    let sv = VParams::new(s.try_into().expect("eight parameters"), inner, false)?;
    let d = checked_gamma_product(&[p / (t[0] * t[2]), t[2] / t[0], p / (t[1] * t[2]), t[2] / t[1]], &inner)?;
    Ok(scaled(v_function(&sv, spec)?, 1.0 / d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn base() -> BasePair {
        BasePair::new(c(0.25, 0.12), c(-0.18, 0.22)).unwrap()
    }

    fn pair_product(k: &Kernel, t: &[C64]) -> C64 {
        let mut r = C64::new(1.0, 0.0);
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                r *= k.gamma(t[i] * t[j]);
            }
        }
        r
    }

    fn six() -> Vec<C64> {
        vec![c(0.5, 0.2), c(-0.3, 0.6), c(0.4, -0.5), c(-0.6, -0.2), c(0.1, 0.7), c(0.0, 0.0)]
    }

    #[test]
    fn normalization_and_balancing() {
        let b = base();
        let p = TypeIParams::new(1, 0, six(), b, true).unwrap();
        let prod: C64 = p.t().iter().product();
        assert!((prod - b.pq()).norm() < 1e-15);
        let mut t = p.t().to_vec();
        t[0] *= 1.01;
        assert!(matches!(TypeIParams::new(1, 0, t, b, false), Err(Error::BalancingViolated(_))));
        assert!(TypeIParams::new(1, 0, vec![c(0.5, 0.0); 5], b, true).is_err());
    }

    #[test]
    fn shifts() {
        let b = base();
        let p = TypeIParams::new(1, 0, six(), b, true).unwrap();
        let s = apply_shifts(&p, &[ShiftSpec::new(0, 0, 1), ShiftSpec::new(1, 0, -1)]).unwrap();
        assert!((s.t()[0] - p.t()[0] * b.q()).norm() < 1e-16);
        assert!(matches!(apply_shifts(&p, &[ShiftSpec::new(0, 0, 1)]), Err(Error::BalancingViolated(_))));
        let s2 = apply_shifts(&p, &[ShiftSpec::new(1, 0, -1), ShiftSpec::new(0, 0, 1)]).unwrap();
        assert_eq!(s.t(), s2.t());
    }

    #[test]
    fn beta_integral_value() {
        let b = base();
        let p = TypeIParams::new(1, 0, six(), b, true).unwrap();
        let k = Kernel::new(b, TruncationPolicy::default());
        let r = i1m(&p, &QuadSpec::default()).unwrap();
        let exact = pair_product(&k, p.t());
        assert!((r.value - exact).norm() / exact.norm() < 1e-12, "{} vs {}", r.value, exact);
        let sw = TypeIParams::new(1, 0, p.t().to_vec(), b.swapped(), false).unwrap();
        let r2 = i1m(&sw, &QuadSpec::default()).unwrap();
        assert!((r2.value - r.value).norm() / exact.norm() < 1e-12);
    }

    #[test]
    fn contour_invalid_reported() {
        let b = base();
        let mut t = six();
        t[0] = c(1.05, 0.0);
        let p = TypeIParams::new(1, 0, t, b, true).unwrap();
        assert!(matches!(i1m(&p, &QuadSpec::default()), Err(Error::ContourInvalid(_))));
    }

    #[test]
    fn direct_and_det_for_n1() {
        let b = base();
        let p = TypeIParams::new(1, 0, six(), b, true).unwrap();
        let u = i1m(&p, &QuadSpec::default()).unwrap().value;
        let d = inm_direct(&p, &QuadSpec::tensor()).unwrap().value;
        let e = inm_det(&p, &QuadSpec::default()).unwrap().value;
        assert!((u - d).norm() / u.norm() < 1e-9);
        assert!((u - e).norm() / u.norm() < 1e-13);
        let mut big = vec![c(0.3, 0.1); 4];
        big.extend(six());
        let p3 = TypeIParams::new(3, 0, big, b, true).unwrap();
        assert!(matches!(inm_direct(&p3, &QuadSpec::tensor()), Err(Error::CapExceeded(3))));
    }

    #[test]
    fn w_and_u_invert() {
        let b = base();
        let t = [
            c(0.5, 0.2),
            c(-0.3, 0.6),
            c(0.4, -0.5),
            c(-0.6, -0.2),
            c(0.1, 0.7),
            c(0.6, 0.1),
            c(-0.2, -0.5),
            c(0.0, 0.0),
        ];
        let v = VParams::new(t, b, true).unwrap();
        let spec = QuadSpec::default();
        let val = v_function(&v, &spec).unwrap().value;
        let z = c(0.9, 0.3);
        let k = Kernel::new(b, TruncationPolicy::default());
        let w = w_function(&v, z, &spec).unwrap().value;
        let norm: C64 = v.t().iter().map(|&x| k.gam_pm(x, z)).product();
        assert!((w * norm - val).norm() / val.norm() < 1e-13);
        let w2 = w_function(&v, 1.0 / z, &spec).unwrap().value;
        assert!((w - w2).norm() / w.norm() < 1e-13);
        let u = u_function(&v, &spec).unwrap().value;
        let tt = v.t();
        let nu = k.gam_pm(tt[0], tt[2]) * k.gam_pm(tt[1], tt[2]);
        assert!((u * nu - val).norm() / val.norm() < 1e-13);
    }
}
