//! Residual checks, one registry entry per identity. A check draws admissible
//! parameters from a seeded [`Sampler`], evaluates both sides and reports the
//! relative residual.

mod algebraic;
mod typei;
mod vfun;

use std::cell::Cell;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::integrals::{
    checked_gamma_product, i1_on_contour, i1m, i1m_continued, inm_det_with, inm_direct, TypeIParams,
};
use crate::matrixkit::CMatrix;
use crate::quadrature::{Contour, QuadSpec};
use crate::report;
use crate::sampler::{derived_seed, theta_zero_distance, Sampler, MAX_REJECTIONS};
use crate::specfun::{BasePair, Kernel, TruncationPolicy, TIE_GUARD};

pub use typei::q_inversion_residuals;
pub use vfun::potential_a;

/// Quadrature and truncation settings shared by every check of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub quad: QuadSpec,
    pub tensor: QuadSpec,
    pub policy: TruncationPolicy,
    /// Overrides every per-check tolerance when set.
    pub tol: Option<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { quad: QuadSpec::default(), tensor: QuadSpec::tensor(), policy: TruncationPolicy::default(), tol: None }
    }
}

/// One admissible draw. `u` holds a second parameter vector for checks that
/// need two independent draws, `aux` auxiliary points, `a` real exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw {
    pub base: BasePair,
    pub n: usize,
    pub m: i32,
    pub t: Vec<C64>,
    pub u: Vec<C64>,
    pub aux: Vec<C64>,
    pub a: Vec<f64>,
}

impl Draw {
    pub fn new(base: BasePair, n: usize, m: i32, t: Vec<C64>) -> Self {
        Self { base, n, m, t, u: Vec::new(), aux: Vec::new(), a: Vec::new() }
    }

    pub fn with_aux(mut self, aux: Vec<C64>) -> Self {
        self.aux = aux;
        self
    }
}

/// A single sub-check result before it is turned into a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub sub: String,
    pub residual: f64,
    pub scale: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub residual: f64,
    pub scale: f64,
    pub tol: f64,
    pub pass: bool,
    /// The draw as a JSON object.
    pub params_echo: String,
    pub nodes_used: usize,
    pub seed: u64,
}

pub type SampleFn = fn(&mut Sampler, usize, i32) -> Result<Draw>;
pub type CheckFn = fn(&Draw, &Ev) -> Result<Vec<Outcome>>;

pub struct Identity {
    pub name: &'static str,
    pub summary: &'static str,
    /// Supported `(n, m)`; `[(0, 0)]` for identities without a size parameter.
    pub variants: &'static [(usize, i32)],
    /// Tolerance used for the failure report when a check errors out.
    pub tol: f64,
    pub sample: SampleFn,
    pub check: CheckFn,
}

const PLAIN: &[(usize, i32)] = &[(0, 0)];

impl Identity {
    pub fn is_plain(&self) -> bool {
        self.variants == PLAIN
    }

    pub fn label(&self, n: usize, m: i32) -> String {
        if self.is_plain() {
            self.name.to_string()
        } else {
            format!("{}[n={n},m={m}]", self.name)
        }
    }
}

pub fn registry() -> Vec<Identity> {
    let mut v = algebraic::identities();
    v.extend(vfun::identities());
    v.extend(typei::identities());
    v
}

/// Short names accepted by [`find`].
pub const ALIASES: &[(&str, &str)] = &[("trafo", "transformation"), ("beta", "elliptic-beta")];

pub fn find(name: &str) -> Option<Identity> {
    let name = ALIASES.iter().find(|(a, _)| *a == name).map_or(name, |(_, full)| full);
    registry().into_iter().find(|i| i.name == name)
}

/// Draws trial `trial` of `id` at variant `(n, m)` and runs the check.
///
/// Sampler infeasibility is returned as an error; any other failure becomes a
/// failing report whose echo carries the diagnostic.
pub fn run_trial(
    id: &Identity,
    n: usize,
    m: i32,
    seed: u64,
    trial: u64,
    cfg: &EvalConfig,
) -> Result<Vec<IdentityReport>> {
    if !id.variants.contains(&(n, m)) {
        return Err(Error::InvalidInput(format!("{} has no variant (n, m) = ({n}, {m})", id.name)));
    }
    let label = id.label(n, m);
    let dseed = derived_seed(&label, seed, trial);
    let mut s = Sampler::new(dseed);
    let draw = (id.sample)(&mut s, n, m)?;
    let nodes = AtomicUsize::new(0);
    let ev = Ev::new(draw.base, cfg, &nodes);
    let result = (id.check)(&draw, &ev);
    let nodes_used = nodes.load(Ordering::Relaxed);
    match result {
        Ok(outs) => {
            let echo = report::draw_json(&draw, trial, None);
            Ok(outs
                .into_iter()
                .map(|o| {
                    let tol = cfg.tol.unwrap_or(o.tol);
                    IdentityReport {
                        name: if o.sub.is_empty() { label.clone() } else { format!("{label}:{}", o.sub) },
                        residual: o.residual,
                        scale: o.scale,
                        tol,
                        pass: o.residual <= tol,
                        params_echo: echo.clone(),
                        nodes_used,
                        seed: dseed,
                    }
                })
                .collect())
        }
        Err(Error::SamplerInfeasible(e)) => Err(Error::SamplerInfeasible(e)),
        Err(e) => Ok(vec![IdentityReport {
            name: format!("{label}:error"),
            residual: f64::NAN,
            scale: f64::NAN,
            tol: cfg.tol.unwrap_or(id.tol),
            pass: false,
            params_echo: report::draw_json(&draw, trial, Some(&e.to_string())),
            nodes_used,
            seed: dseed,
        }]),
    }
}

/// Evaluator bound to one base pair; counts the quadrature nodes it spends.
pub struct Ev<'a> {
    pub base: BasePair,
    pub k: Kernel,
    pub cfg: &'a EvalConfig,
    nodes: &'a AtomicUsize,
}

fn m_of(len: usize, n: usize) -> Result<i32> {
    let extra = len as i64 - 2 * n as i64 - 4;
    if extra < -2 || extra % 2 != 0 {
        return Err(Error::InvalidInput(format!("{len} parameters do not fit n = {n}")));
    }
    Ok((extra / 2) as i32)
}

impl<'a> Ev<'a> {
    pub fn new(base: BasePair, cfg: &'a EvalConfig, nodes: &'a AtomicUsize) -> Self {
        Self { base, k: Kernel::new(base, cfg.policy), cfg, nodes }
    }

    pub fn rebased(&self, base: BasePair) -> Ev<'a> {
        Ev::new(base, self.cfg, self.nodes)
    }

    pub fn p(&self) -> C64 {
        self.base.p()
    }

    pub fn q(&self) -> C64 {
        self.base.q()
    }

    /// Guarded `θ_p` products.
    pub fn th(&self) -> Th<'_> {
        Th::new(&self.k, self.base.p())
    }

    fn count(&self, n: usize) {
        self.nodes.fetch_add(n, Ordering::Relaxed);
    }

    fn params(&self, n: usize, t: &[C64]) -> Result<TypeIParams> {
        TypeIParams::new(n, m_of(t.len(), n)?, t.to_vec(), self.base, false)
    }

    /// `I_1^(m)` on the unit circle; `m` is read off the parameter count.
    pub fn i1(&self, t: &[C64]) -> Result<C64> {
        let r = i1m(&self.params(1, t)?, &self.cfg.quad)?;
        self.count(r.nodes_used);
        Ok(r.value)
    }

    /// `I_1^(m)` continued past the unit circle by residue terms.
    pub fn i1c(&self, t: &[C64]) -> Result<C64> {
        self.params(1, t)?;
        let r = i1m_continued(t, &self.base, &self.cfg.quad, &self.cfg.policy)?;
        self.count(r.nodes_used);
        Ok(r.value)
    }

    /// `κ ∮ density` on an arbitrary contour (balancing still checked).
    pub fn i1_on(&self, t: &[C64], contour: &Contour, spec: &QuadSpec) -> Result<C64> {
        self.params(1, t)?;
        let r = i1_on_contour(t, &self.base, contour, spec, &self.cfg.policy)?.require()?;
        self.count(r.nodes_used);
        Ok(r.value)
    }

    /// `I_n^(m)` with `n ≤ 2`, through the determinant reduction for `n = 2`.
    pub fn inm(&self, n: usize, t: &[C64]) -> Result<C64> {
        match n {
            0 => {
                self.params(0, t)?;
                Ok(C64::new(1.0, 0.0))
            }
            1 => self.i1(t),
            _ => {
                let a: Vec<usize> = (0..n).collect();
                let b: Vec<usize> = (n..2 * n).collect();
                self.det_with(t, &a, &b)
            }
        }
    }

    pub fn det_with(&self, t: &[C64], a: &[usize], b: &[usize]) -> Result<C64> {
        let r = inm_det_with(&self.params(a.len(), t)?, a, b, &self.cfg.quad)?;
        self.count(r.nodes_used);
        Ok(r.value)
    }

    /// `I_n^(m)` by the tensor-product rule.
    pub fn direct(&self, n: usize, t: &[C64]) -> Result<C64> {
        let r = inm_direct(&self.params(n, t)?, &self.cfg.tensor)?;
        self.count(r.nodes_used);
        Ok(r.value)
    }

    pub fn gamma(&self, args: &[C64]) -> Result<C64> {
        checked_gamma_product(args, &self.base)
    }

    /// `∏_{j<k} Γ(t_j t_k)`.
    pub fn pair_product(&self, t: &[C64]) -> Result<C64> {
        let args: Vec<C64> =
            (0..t.len()).flat_map(|i| (i + 1..t.len()).map(move |j| (i, j))).map(|(i, j)| t[i] * t[j]).collect();
        self.gamma(&args)
    }
}

/// `θ_p` products that remember how close any denominator argument came to a
/// zero of `θ_p`.
pub struct Th<'k> {
    k: &'k Kernel,
    p: C64,
    dist: Cell<f64>,
}

impl<'k> Th<'k> {
    pub fn new(k: &'k Kernel, p: C64) -> Self {
        Self { k, p, dist: Cell::new(f64::INFINITY) }
    }

    pub fn num(&self, args: &[C64]) -> C64 {
        args.iter().map(|&x| self.k.theta_in(x, self.p)).product()
    }

    pub fn den(&self, args: &[C64]) -> C64 {
        for &x in args {
            self.dist.set(self.dist.get().min(theta_zero_distance(x, self.p)));
        }
        self.num(args)
    }

    pub fn safe(&self) -> bool {
        self.dist.get() > TIE_GUARD
    }
}

/// `[t z, t/z]`.
pub fn pm(t: C64, z: C64) -> [C64; 2] {
    [t * z, t / z]
}

pub fn shifted(t: &[C64], shifts: &[(usize, C64)]) -> Vec<C64> {
    let mut s = t.to_vec();
    for &(i, f) in shifts {
        s[i] *= f;
    }
    s
}

/// Retries `f` until it yields a value, at most [`MAX_REJECTIONS`] times.
pub fn retry<T>(s: &mut Sampler, what: &str, mut f: impl FnMut(&mut Sampler) -> Result<Option<T>>) -> Result<T> {
    for _ in 0..MAX_REJECTIONS {
        if let Some(v) = f(s)? {
            return Ok(v);
        }
    }
    Err(Error::SamplerInfeasible(format!("{what}: {MAX_REJECTIONS} rejections")))
}

pub fn outcome(sub: &str, residual: f64, scale: f64, tol: f64) -> Outcome {
    Outcome { sub: sub.to_string(), residual, scale, tol }
}

/// Vanishing sum, relative to its largest term.
pub fn vanishing(sub: &str, terms: &[C64], tol: f64) -> Outcome {
    let s: C64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    outcome(sub, s.norm() / scale.max(1e-300), scale, tol)
}

/// `|a − b| / max(|a|, |b|)`.
pub fn versus(sub: &str, a: C64, b: C64, tol: f64) -> Outcome {
    let scale = a.norm().max(b.norm());
    outcome(sub, (a - b).norm() / scale.max(1e-300), scale, tol)
}

/// `max |a − b| / max |a|` entrywise.
pub fn matrix_versus(sub: &str, a: &CMatrix, b: &CMatrix, tol: f64) -> Outcome {
    let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let d = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    outcome(sub, d / scale.max(1e-300), scale, tol)
}

/// The largest of several sub-results, under one name.
pub fn worst(sub: &str, outs: Vec<Outcome>, tol: f64) -> Outcome {
    let residual =
        outs.iter()
            .map(|o| o.residual)
            .fold(0.0, |a: f64, r| if r.is_nan() || a.is_nan() { f64::NAN } else { a.max(r) });
    let scale = outs.iter().map(|o| o.scale).fold(0.0, f64::max);
    outcome(sub, residual, scale, tol)
}
