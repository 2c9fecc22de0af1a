//! Checks on the type I integrals `I_n^(m)`: the explicit first order system,
//! recurrences, the `g`-function, the zero mode, evaluations, the
//! transformation, the big determinant and q-inversion invariance.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{matrix_versus, outcome, retry, shifted, vanishing, versus, Draw, Ev, Identity, Outcome, Th};
use crate::error::{Error, Result};
use crate::integrals::density;
use crate::matrixkit::{binomial, colex_subsets, det_lu, CMatrix};
use crate::quadrature::{contour_integrate, Contour, QuadSpec};
use crate::sampler::{has_tie, window, windows, Sampler, Window};
use crate::specfun::{BasePair, Kernel, TruncationPolicy};

pub(super) fn identities() -> Vec<Identity> {
    vec![
        Identity {
            name: "explicit-system",
            summary: "explicit first order q-difference system for shifted I_1^(m)",
            variants: &[(1, 1), (1, 2)],
            tol: 1e-6,
            sample: sample_explicit,
            check: check_explicit,
        },
        Identity {
            name: "recurrence1",
            summary: "(n+2)-term recurrence with q-shifts",
            variants: &[(1, 0), (2, 0)],
            tol: 1e-6,
            sample: sample_rec1,
            check: check_rec1,
        },
        Identity {
            name: "g-function",
            summary: "symmetry, quasi-periodicity, partial fractions and vanishing integral of g",
            variants: &[(1, 1), (1, 2)],
            tol: 1e-8,
            sample: sample_g,
            check: check_g,
        },
        Identity {
            name: "recurrence-univariate",
            summary: "(m+2)-term recurrence for I_1^(m) with inverse q-shifts",
            variants: &[(1, 0), (1, 1)],
            tol: 1e-6,
            sample: sample_rec2,
            check: check_rec2,
        },
        Identity {
            name: "zero-mode",
            summary: "left kernel vector of the matrix of doubly shifted integrals",
            variants: &[(1, 0), (1, 1)],
            tol: 1e-7,
            sample: sample_zero,
            check: check_zero,
        },
        Identity {
            name: "recurrence2",
            summary: "(m+2)-term recurrence for I_2^(m) via determinant reduction",
            variants: &[(2, 0), (2, 1)],
            tol: 1e-6,
            sample: sample_rec2,
            check: check_rec2,
        },
        Identity {
            name: "in0-evaluation",
            summary: "I_n^(0) equals the product of Gamma(t_i t_j)",
            variants: &[(1, 0), (2, 0)],
            tol: 1e-6,
            sample: sample_in0,
            check: check_in0,
        },
        Identity {
            name: "det-direct",
            summary: "determinant reduction agrees with tensor quadrature",
            variants: &[(2, 0), (2, 1)],
            tol: 1e-6,
            sample: sample_in0,
            check: check_det_direct,
        },
        Identity {
            name: "transformation",
            summary: "I_n^(m)(t) = prod Gamma(t_r t_s) I_m^(n)(sqrt(pq)/t)",
            variants: &[(1, 1), (2, 1), (1, 2)],
            tol: 1e-6,
            sample: sample_trafo,
            check: check_trafo,
        },
        Identity {
            name: "big-determinant",
            summary: "determinant of p- and q-shifted I_n^(m) in closed form",
            variants: &[(1, 1)],
            tol: 1e-6,
            sample: sample_bigdet,
            check: check_bigdet,
        },
        Identity {
            name: "q-inversion",
            summary: "recurrence coefficients are invariant under t -> p^a/t, q -> 1/q",
            variants: &[(1, 1), (2, 1), (1, 2)],
            tol: 1e-11,
            sample: sample_qinv,
            check: check_qinv,
        },
    ]
}

fn kernel(base: BasePair) -> Kernel {
    Kernel::new(base, TruncationPolicy::default())
}

fn count(n: usize, m: i32) -> usize {
    (2 * n as i64 + 2 * m as i64 + 4) as usize
}

fn points(s: &mut Sampler, k: usize, lo: f64, hi: f64) -> Vec<C64> {
    (0..k).map(|_| s.point(lo, hi)).collect()
}

// ---- explicit system for (m+1)×(m+1) matrices of shifted I_1^(m)

fn explicit_a(th: &Th, t: &[C64], m: usize, x: C64, v: C64) -> CMatrix {
    let big_t: C64 = t.iter().product();
    let tx = big_t * x;
    let lo = 0..=m;
    let hi = m + 1..2 * m + 4;
    let common = th.num(&[big_t * x * x]) * lo.clone().map(|l| th.num(&[t[l] * tx])).product::<C64>()
        / hi.clone().map(|l| th.den(&[tx / t[l]])).product::<C64>();
    CMatrix::from_fn(m + 1, m + 1, |i, j| {
        let (ti, tj) = (t[i], t[j]);
        let d = if i == j {
            th.num(&[x * ti, x / ti, tx * v, tx / v]) / th.den(&[x * v, x / v, tx * ti, tx / ti])
        } else {
            C64::new(0.0, 0.0)
        };
        let row = th.num(&[ti * v, ti / v, tx * v, tx / v]) / th.den(&[ti * tx, ti / tx, x * v, x / v]);
        let col = th.num(&[tj * x]) * hi.clone().map(|l| th.num(&[1.0 / (t[l] * tj)])).product::<C64>()
            / (th.den(&[tj * tx, v / tj, 1.0 / (v * tj)])
                * lo.clone().filter(|&l| l != j).map(|l| th.den(&[t[l] / tj])).product::<C64>());
        d + row * common * col
    })
}

/// The normalised entry `F(t; x, v)`. The parameter `1/(Tx)` lies outside
/// the unit circle while its `p`- and `q`-multiples lie inside; the integral
/// is taken on the unit circle itself.
fn explicit_f(ev: &Ev, t: &[C64], m: usize, x: C64, v: C64) -> Result<C64> {
    let pq = ev.base.pq();
    let big_t: C64 = t.iter().product();
    let tx = big_t * x;
    let mut norm = vec![v * v, 1.0 / (v * v)];
    for &tr in &t[..=m] {
        norm.extend([v / tr, 1.0 / (v * tr)]);
    }
    let mut den = vec![x * v, x / v, v / tx, 1.0 / (v * tx)];
    for &tr in &t[m + 1..] {
        den.extend([tr * v, tr / v]);
    }
    let mut params: Vec<C64> = t[..=m].iter().map(|&tr| pq * tr).collect();
    params.extend_from_slice(&t[m + 1..]);
    params.extend([x, 1.0 / tx]);
    Ok(ev.gamma(&norm)? / ev.gamma(&den)? * ev.i1_on(&params, &Contour::default(), &ev.cfg.quad)?)
}

/// Rows carry `t_i → t_i/q`, columns `t_j → t_j/p`.
fn explicit_m(ev: &Ev, t: &[C64], m: usize, x: C64, v: C64) -> Result<CMatrix> {
    let (p, q) = (ev.p(), ev.q());
    let mut e = Vec::with_capacity((m + 1) * (m + 1));
    for i in 0..=m {
        for j in 0..=m {
            let s = shifted(&shifted(t, &[(i, 1.0 / q)]), &[(j, 1.0 / p)]);
            e.push(explicit_f(ev, &s, m, x, v)?);
        }
    }
    Ok(CMatrix::from_row_slice(m + 1, m + 1, &e))
}

fn sample_explicit(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let mu = m as usize;
    let (base, t, x) = retry(s, "explicit-system", |s| {
        let base = s.base();
        let t = points(s, 2 * mu + 4, 0.8, 0.93);
        let x = s.point(0.8, 0.9);
        let tx: C64 = t.iter().product::<C64>() * x;
        if has_tie(&t) || (base.p() / tx).norm() >= 0.85 || (base.q() / tx).norm() >= 0.85 {
            return Ok(None);
        }
        Ok(Some((base, t, x)))
    })?;
    let p = base.p();
    let k = kernel(base);
    let v = retry(s, "explicit-system auxiliary point", |s| {
        let v = s.point(0.8, 1.25);
        let th = Th::new(&k, p);
        explicit_a(&th, &t, mu, x, v);
        explicit_a(&th, &t, mu, p * x, v);
        Ok(th.safe().then_some(v))
    })?;
    Ok(Draw::new(base, n, m, t).with_aux(vec![x, v]))
}

fn check_explicit(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let m = d.m as usize;
    let (x, v) = (d.aux[0], d.aux[1]);
    let (p, q) = (ev.p(), ev.q());
    let th = ev.th();
    let a = explicit_a(&th, &d.t, m, x, v);
    let m0 = explicit_m(ev, &d.t, m, x, v)?;
    let mq = explicit_m(ev, &d.t, m, q * x, v)?;
    let swapped = explicit_m(&ev.rebased(ev.base.swapped()), &d.t, m, x, v)?;
    Ok(vec![
        matrix_versus("difference-equation", &mq, &(&a * &m0), 1e-6),
        matrix_versus("ellipticity", &a, &explicit_a(&th, &d.t, m, p * x, v), 1e-11),
        matrix_versus("transpose", &m0.transpose(), &swapped, 1e-10),
    ])
}

// ---- recurrences

fn rec1_coefs(th: &Th, t: &[C64], n: usize) -> Vec<C64> {
    (0..n + 2)
        .map(|i| {
            let den: Vec<C64> = (0..n + 2).filter(|&j| j != i).flat_map(|j| [t[i] * t[j], t[i] / t[j]]).collect();
            t[i] / th.den(&den)
        })
        .collect()
}

fn sample_rec1(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let k = kernel(base);
    let w = if n == 1 { window(0.1, 0.93) } else { window(0.3, 0.93) };
    let target = base.pq().powi(m) * base.p();
    let t = s.balanced(target, &windows(&[(w, count(n, m))]), |t| {
        let th = Th::new(&k, base.p());
        rec1_coefs(&th, t, n);
        th.safe()
    })?;
    Ok(Draw::new(base, n, m, t))
}

fn check_rec1(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let c = rec1_coefs(&ev.th(), &d.t, d.n);
    let mut terms = Vec::new();
    for (i, ci) in c.into_iter().enumerate() {
        terms.push(ci * ev.inm(d.n, &shifted(&d.t, &[(i, ev.q())]))?);
    }
    Ok(vec![vanishing("", &terms, 1e-6)])
}

/// Coefficients of the `(m+2)`-term recurrence in the inverse `qq`-shifts.
fn rec2_coefs(th: &Th, t: &[C64], m: usize, qq: C64) -> Vec<C64> {
    (0..m + 2)
        .map(|k| {
            let num: Vec<C64> = (m + 2..t.len()).map(|i| t[i] * t[k] / qq).collect();
            let den: Vec<C64> = (0..m + 2).filter(|&i| i != k).map(|i| t[i] / t[k]).collect();
            th.num(&num) / (t[k] * th.den(&den))
        })
        .collect()
}

fn rec2_windows(q: C64, n: usize, m: i32) -> Vec<Window> {
    let head = m as usize + 2;
    windows(&[(window(0.05, 0.9 * q.norm()), head), (window(0.1, 0.9), count(n, m) - head)])
}

fn sample_rec2(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let k = kernel(base);
    let target = base.pq().powi(m + 1) * base.q();
    let t = s.balanced(target, &rec2_windows(base.q(), n, m), |t| {
        let th = Th::new(&k, base.p());
        rec2_coefs(&th, t, m as usize, base.q());
        th.safe()
    })?;
    Ok(Draw::new(base, n, m, t))
}

fn check_rec2(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let q = ev.q();
    let c = rec2_coefs(&ev.th(), &d.t, d.m as usize, q);
    let mut terms = Vec::new();
    for (k, ck) in c.into_iter().enumerate() {
        terms.push(ck * ev.inm(d.n, &shifted(&d.t, &[(k, 1.0 / q)]))?);
    }
    Ok(vec![vanishing("", &terms, 1e-6)])
}

// ---- g-function

struct GData<'a> {
    t: &'a [C64],
    v: &'a [C64],
}

impl GData<'_> {
    fn half(&self, th: &Th, z: C64, pq: C64) -> C64 {
        let num = th.num(&self.v.iter().map(|&vi| vi * z).collect::<Vec<_>>());
        let den: Vec<C64> = self.t.iter().map(|&ti| pq * z / ti).collect();
        num / (z * th.den(&[z * z]) * th.den(&den))
    }

    fn g(&self, th: &Th, z: C64, pq: C64) -> C64 {
        self.half(th, z, pq) + self.half(th, 1.0 / z, pq)
    }

    fn partial_fractions(&self, th: &Th, z: C64, pq: C64, q: C64) -> C64 {
        let t = self.t;
        (0..t.len())
            .map(|i| {
                let num: Vec<C64> = self.v.iter().map(|&vj| vj * t[i] / q).collect();
                let den: Vec<C64> = (0..t.len()).filter(|&j| j != i).map(|j| t[j] / t[i]).collect();
                let alpha = q * th.num(&num) / (t[i] * th.den(&den));
                alpha / th.den(&[pq * z / t[i], pq / (z * t[i])])
            })
            .sum()
    }
}

fn sample_g(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let (p, q, pq) = (base.p(), base.q(), base.pq());
    let k = kernel(base);
    let head = m as usize + 2;
    let w = windows(&[(window(0.05, 0.9 * q.norm()), head), (window(0.1, 0.9), m as usize + 4)]);
    let z = s.point(0.7, 1.3);
    let tt = s.balanced(pq.powi(m + 1) * q, &w, |tt| {
        let th = Th::new(&k, p);
        let g = GData { t: &tt[..head], v: &tt[head..] };
        for y in [z, p * z] {
            g.g(&th, y, pq);
            g.partial_fractions(&th, y, pq, q);
        }
        th.safe()
    })?;
    Ok(Draw::new(base, n, m, tt).with_aux(vec![z]))
}

fn check_g(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (p, q, pq) = (ev.p(), ev.q(), ev.base.pq());
    let head = d.m as usize + 2;
    let g = GData { t: &d.t[..head], v: &d.t[head..] };
    let z = d.aux[0];
    let th = ev.th();
    let gz = g.g(&th, z, pq);
    let mut out = vec![
        versus("symmetry", g.g(&th, 1.0 / z, pq), gz, 1e-11),
        versus("quasi-periodicity", g.g(&th, p * z, pq), p * z * z * gz, 1e-11),
        versus("partial-fractions", g.partial_fractions(&th, z, pq, q), gz, 1e-10),
    ];
    // g has removable singularities at z = ±1; the rotation keeps every node
    // of every refinement level off them.
    let spec = ev.cfg.quad;
    let contour = Contour::default().rotated(PI / spec.n_max as f64);
    let k = &ev.k;
    let f = |z: C64| {
        let th = Th::new(k, p);
        g.g(&th, z, pq) * density(k, &d.t, z)
    };
    let probe = contour_integrate(|z| C64::new(f(z).norm(), 0.0), &contour, &QuadSpec::fixed(spec.n0))?;
    let r = contour_integrate(f, &contour, &QuadSpec { abs_floor: probe.value.re, ..spec })?.require()?;
    ev.count(r.nodes_used + probe.nodes_used);
    out.push(outcome("vanishing", r.value.norm() / r.magnitude, r.magnitude, 1e-8));
    Ok(out)
}

// ---- zero mode

fn zero_v(th: &Th, t: &[C64], m: usize, q: C64) -> Vec<C64> {
    (0..m + 2)
        .map(|k| {
            let num: Vec<C64> = (m + 2..t.len()).map(|i| t[i] * t[k] / q).collect();
            let den: Vec<C64> = (0..m + 2).filter(|&i| i != k).map(|i| t[i] / t[k]).collect();
            th.num(&num) / th.den(&den)
        })
        .collect()
}

/// `∏ t = (pq)^{m+2}`; the last two parameters lie outside the unit circle.
fn sample_zero(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let (p, q) = (base.p(), base.q());
    let k = kernel(base);
    let head = m as usize + 2;
    let mq = p.norm().max(q.norm());
    let w = windows(&[
        (window(0.3 * q.norm(), 0.85 * q.norm()), head),
        (window(0.3 * p.norm(), 0.85 * p.norm()), head),
        (window(1.1, 0.85 / mq), 2),
    ]);
    let t = s.balanced(base.pq().powi(m + 2), &w, |t| {
        let th = Th::new(&k, p);
        zero_v(&th, t, m as usize, q);
        th.safe()
    })?;
    Ok(Draw::new(base, n, m, t))
}

fn check_zero(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let m = d.m as usize;
    let h = m + 2;
    let (p, q) = (ev.p(), ev.q());
    let v = zero_v(&ev.th(), &d.t, m, q);
    let mut e = Vec::with_capacity(h * h);
    for k in 0..h {
        for l in 0..h {
            e.push(ev.i1c(&shifted(&d.t, &[(k, 1.0 / q), (h + l, 1.0 / p)]))?);
        }
    }
    let mat = CMatrix::from_row_slice(h, h, &e);
    let mut out = Vec::new();
    for l in 0..h {
        let terms: Vec<C64> = (0..h).map(|k| v[k] * mat[(k, l)]).collect();
        out.push(vanishing(&format!("column-{l}"), &terms, 1e-7));
    }
    let rows: f64 = (0..h).map(|k| mat.row(k).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()).product();
    let (det, _) = det_lu(&mat);
    out.push(outcome("determinant", det.norm() / rows, rows, 1e-6));
    Ok(out)
}

// ---- evaluations

fn sample_in0(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let t = s.balanced(base.pq().powi(m + 1), &windows(&[(window(0.1, 0.85), count(n, m))]), |_| true)?;
    Ok(Draw::new(base, n, m, t))
}

fn check_in0(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let prod = ev.pair_product(&d.t)?;
    if d.n == 1 {
        return Ok(vec![versus("quadrature", ev.i1(&d.t)?, prod, 1e-8)]);
    }
    Ok(vec![versus("det", ev.inm(d.n, &d.t)?, prod, 1e-6), versus("direct", ev.direct(d.n, &d.t)?, prod, 1e-6)])
}

fn check_det_direct(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let n = d.n;
    let det = ev.inm(n, &d.t)?;
    let a: Vec<usize> = (n..2 * n).collect();
    let b: Vec<usize> = (0..n).collect();
    let swapped = ev.det_with(&d.t, &a, &b)?;
    Ok(vec![versus("det-vs-direct", det, ev.direct(n, &d.t)?, 1e-6), versus("role-swap", swapped, det, 1e-8)])
}

// ---- transformation

fn sample_trafo(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let lo = base.pq().norm().sqrt() / 0.9;
    let t = s.balanced(base.pq().powi(m + 1), &windows(&[(window(lo, 0.9), count(n, m))]), |_| true)?;
    Ok(Draw::new(base, n, m, t))
}

fn check_trafo(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (n, m) = (d.n, d.m as usize);
    let r = ev.base.pq().sqrt();
    let u: Vec<C64> = d.t.iter().map(|&x| r / x).collect();
    let neg: Vec<C64> = u.iter().map(|&x| -x).collect();
    let lhs = ev.inm(n, &d.t)?;
    let dual = ev.inm(m, &u)?;
    let dual_neg = ev.inm(m, &neg)?;
    let tol = if (n, m) == (1, 1) { 1e-7 } else { 1e-6 };
    Ok(vec![versus("relation", lhs, ev.pair_product(&d.t)? * dual, tol), versus("sign-flip", dual_neg, dual, 1e-9)])
}

// ---- big determinant

fn sample_bigdet(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let k = kernel(base);
    let g = n + m as usize;
    let t = s.balanced(base.pq(), &windows(&[(window(0.1, 0.85), count(n, m))]), |t| {
        let thq = Th::new(&k, base.q());
        let thp = Th::new(&k, base.p());
        bigdet_prefactor(&thq, &thp, t, g);
        thq.safe() && thp.safe()
    })?;
    Ok(Draw::new(base, n, m, t))
}

/// `∏_{i<j} t_j θ_q(t_i t_j^{±1}) · t_{g+j} θ_p(t_{g+i} t_{g+j}^{±1})` over
/// `i < j < g`.
fn bigdet_prefactor(thq: &Th, thp: &Th, t: &[C64], g: usize) -> C64 {
    let mut r = C64::new(1.0, 0.0);
    for i in 0..g {
        for j in i + 1..g {
            r *= t[j] * thq.den(&[t[i] * t[j], t[i] / t[j]]);
            r *= t[g + j] * thp.den(&[t[g + i] * t[g + j], t[g + i] / t[g + j]]);
        }
    }
    r
}

fn check_bigdet(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (n, m) = (d.n, d.m as usize);
    let g = n + m;
    let (p, q) = (ev.p(), ev.q());
    let subs = colex_subsets(g, m);
    let size = subs.len();
    let mut e = Vec::with_capacity(size * size);
    for r in &subs {
        for s in &subs {
            let mut sh: Vec<(usize, C64)> = r.iter().map(|&i| (i, p)).collect();
            sh.extend(s.iter().map(|&j| (g + j, q)));
            e.push(ev.inm(n, &shifted(&d.t, &sh))?);
        }
    }
    let (lhs, _) = det_lu(&CMatrix::from_row_slice(size, size, &e));
    let pre = bigdet_prefactor(&Th::new(&ev.k, q), &ev.th(), &d.t, g);
    let rhs = pre.powi(binomial(g - 2, m - 1) as i32) * ev.pair_product(&d.t)?.powi(binomial(g - 1, m) as i32);
    Ok(vec![versus("", lhs, rhs, 1e-6)])
}

// ---- q-inversion

fn qinv_rec1(th: &Th, t: &[C64], n: usize, z: C64) -> Vec<C64> {
    rec1_coefs(th, t, n)
        .into_iter()
        .enumerate()
        .map(|(i, c)| c * th.num(&[t[i] * z, t[i] / z]).powi(n as i32))
        .collect()
}

fn qinv_rec2(th: &Th, t: &[C64], n: usize, m: usize, qq: C64, z: C64) -> Vec<C64> {
    rec2_coefs(th, t, m, qq)
        .into_iter()
        .enumerate()
        .map(|(k, c)| c / th.den(&[t[k] * z / qq, t[k] / (z * qq)]).powi(n as i32))
        .collect()
}

fn ratio_spread(a: &[C64], b: &[C64]) -> f64 {
    let r: Vec<C64> = a.iter().zip(b).map(|(x, y)| x / y).collect();
    r.iter().map(|x| (x / r[0] - 1.0).norm()).fold(0.0, f64::max)
}

/// Ratio-of-ratios residuals `(rec1, rec2)` of the rescaled recurrence
/// coefficients under `t_i ↦ p^{a_i}/t_i`, `q ↦ 1/q`. `t1` is balanced as
/// `(pq)^m p`, `t2` as `(pq)^{m+1} q`; `a` must sum to `2m+2` and be all
/// integers or all half-integers (then also `z ↦ p^{1/2} z`).
pub fn q_inversion_residuals(
    n: usize,
    m: i32,
    t1: &[C64],
    t2: &[C64],
    a: &[f64],
    z: C64,
    base: &BasePair,
    policy: &TruncationPolicy,
) -> Result<(f64, f64)> {
    let len = count(n, m);
    if m < 0 || t1.len() != len || t2.len() != len || a.len() != len {
        return Err(Error::InvalidInput(format!("(n, m) = ({n}, {m}) needs {len} parameters and exponents")));
    }
    let sum: f64 = a.iter().sum();
    if (sum - (2 * m + 2) as f64).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("exponents sum to {sum}, not {}", 2 * m + 2)));
    }
    let frac = |x: f64| (x - x.floor() - 0.5).abs() < 1e-12;
    let int = |x: f64| (x - x.round()).abs() < 1e-12;
    let half = a.iter().all(|&x| frac(x));
    if !half && !a.iter().all(|&x| int(x)) {
        return Err(Error::InvalidInput("exponents must be all integers or all half-integers".into()));
    }
    let (p, q) = (base.p(), base.q());
    let sp = p.sqrt();
    let pw = |x: f64| sp.powi((2.0 * x).round() as i32);
    let inv = |t: &[C64]| -> Vec<C64> { t.iter().zip(a).map(|(&x, &ai)| pw(ai) / x).collect() };
    let zs = if half { sp * z } else { z };
    let k = Kernel::new(*base, *policy);
    let th = Th::new(&k, p);
    let mu = m as usize;
    let r1 = ratio_spread(&qinv_rec1(&th, &inv(t1), n, zs), &qinv_rec1(&th, t1, n, z));
    let r2 = ratio_spread(&qinv_rec2(&th, &inv(t2), n, mu, 1.0 / q, zs), &qinv_rec2(&th, t2, n, mu, q, z));
    if !th.safe() {
        return Err(Error::PoleProximity("a recurrence coefficient denominator is near a theta zero".into()));
    }
    Ok((r1, r2))
}

fn exponent_sets(d: &Draw) -> Vec<(&'static str, Vec<f64>)> {
    let len = count(d.n, d.m);
    let top = (2 * d.m + 2) as f64;
    let mut lead = vec![0.0; len];
    lead[0] = top;
    let mut sets = vec![("leading", lead), ("spread", d.a.clone())];
    if d.n as i32 == d.m {
        sets.push(("half", vec![0.5; len]));
    }
    sets
}

fn sample_qinv(s: &mut Sampler, n: usize, m: i32) -> Result<Draw> {
    let base = s.base();
    let len = count(n, m);
    let z = s.point(0.8, 1.2);
    let a = retry(s, "q-inversion exponents", |s| {
        let mut a: Vec<f64> = (0..len - 1).map(|_| s.uniform(-1.0, 3.0).floor()).collect();
        let last = (2 * m + 2) as f64 - a.iter().sum::<f64>();
        a.push(last);
        Ok((-2.0..=4.0).contains(&last).then_some(a))
    })?;
    let pol = TruncationPolicy::default();
    let w = windows(&[(window(0.2, 0.9), len)]);
    let (t1, t2) = retry(s, "q-inversion", |s| {
        let t1 = s.balanced(base.pq().powi(m) * base.p(), &w, |_| true)?;
        let t2 = s.balanced(base.pq().powi(m + 1) * base.q(), &w, |_| true)?;
        let mut d = Draw::new(base, n, m, t1.clone());
        d.a = a.clone();
        let ok =
            exponent_sets(&d).iter().all(|(_, e)| q_inversion_residuals(n, m, &t1, &t2, e, z, &base, &pol).is_ok());
        Ok(ok.then_some((t1, t2)))
    })?;
    let mut d = Draw::new(base, n, m, t1).with_aux(vec![z]);
    d.u = t2;
    d.a = a;
    Ok(d)
}

fn check_qinv(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for (name, e) in exponent_sets(d) {
        let (r1, r2) = q_inversion_residuals(d.n, d.m, &d.t, &d.u, &e, d.aux[0], &ev.base, &ev.cfg.policy)?;
        out.push(outcome(&format!("rec1-{name}"), r1, 1.0, 1e-11));
        out.push(outcome(&format!("rec2-{name}"), r2, 1.0, 1e-11));
    }
    Ok(out)
}
