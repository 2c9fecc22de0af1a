//! Checks built on the elliptic beta integral and the `V`-function: beta
//! evaluation, reduction, contiguity, the elliptic hypergeometric equation,
//! the Casoratian, residue crossing, the `W` relations and the matrix system.

use num_complex::Complex64 as C64;

use super::{
    matrix_versus, outcome, pm, retry, shifted, vanishing, versus, worst, Draw, Ev, Identity, Outcome, Th, PLAIN,
};
use crate::error::{Error, Result};
use crate::integrals::{crossing_residue, v_qgt1_solution};
use crate::matrixkit::CMatrix;
use crate::quadrature::{Contour, CONTOUR_MARGIN};
use crate::sampler::{window, windows, Sampler, Window};
use crate::specfun::{BasePair, Kernel, TruncationPolicy};

pub(super) fn identities() -> Vec<Identity> {
    vec![
        Identity {
            name: "elliptic-beta",
            summary: "six-parameter elliptic beta integral equals the product of Gamma(t_j t_k)",
            variants: PLAIN,
            tol: 1e-8,
            sample: sample_beta,
            check: check_beta,
        },
        Identity {
            name: "v-reduction",
            summary: "V with t7 t8 = pq reduces to the elliptic beta integral",
            variants: PLAIN,
            tol: 1e-8,
            sample: sample_vred,
            check: check_vred,
        },
        Identity {
            name: "contiguity1",
            summary: "three-term contiguity relation with q-shifts",
            variants: PLAIN,
            tol: 1e-7,
            sample: sample_cont1,
            check: check_cont1,
        },
        Identity {
            name: "contiguity3",
            summary: "three-term contiguity relation with inverse q-shifts",
            variants: PLAIN,
            tol: 1e-7,
            sample: sample_cont3,
            check: check_cont3,
        },
        Identity {
            name: "potential",
            summary: "p-ellipticity and q-inversion symmetry of the eheq potential",
            variants: PLAIN,
            tol: 1e-11,
            sample: sample_potential,
            check: check_potential,
        },
        Identity {
            name: "eheq",
            summary: "U satisfies the elliptic hypergeometric equation",
            variants: PLAIN,
            tol: 1e-7,
            sample: sample_eheq,
            check: check_eheq,
        },
        Identity {
            name: "eheq-second",
            summary: "the independent solution U(t1/p, p t2) satisfies the same equation",
            variants: PLAIN,
            tol: 1e-7,
            sample: sample_eheq,
            check: check_eheq_second,
        },
        Identity {
            name: "eheq-qgt1",
            summary: "the |q| > 1 solution satisfies the equation with base 1/q",
            variants: PLAIN,
            tol: 1e-6,
            sample: sample_eheq,
            check: check_eheq_qgt1,
        },
        Identity {
            name: "casoratian",
            summary: "Casoratian of V-functions in closed form",
            variants: PLAIN,
            tol: 1e-6,
            sample: sample_pq8,
            check: check_casoratian,
        },
        Identity {
            name: "three-routes",
            summary: "Casoratian, determinant reduction and tensor quadrature agree on I_2^(0)",
            variants: PLAIN,
            tol: 1e-6,
            sample: sample_pq8,
            check: check_three_routes,
        },
        Identity {
            name: "residue-crossing",
            summary: "deformed contour equals unit circle plus residue term",
            variants: PLAIN,
            tol: 1e-8,
            sample: sample_crossing,
            check: check_crossing,
        },
        Identity {
            name: "w-relations",
            summary: "linear relations among q-shifted W-functions and p-ellipticity of their coefficients",
            variants: PLAIN,
            tol: 1e-7,
            sample: sample_w,
            check: check_w,
        },
        Identity {
            name: "matrix-system",
            summary: "M(qx) = A M(x), M(px) = M(x) B and the p <-> q transposition",
            variants: PLAIN,
            tol: 1e-7,
            sample: sample_matrix_system,
            check: check_matrix_system,
        },
    ]
}

fn kernel(base: BasePair) -> Kernel {
    Kernel::new(base, TruncationPolicy::default())
}

fn uniform(w: Window, k: usize) -> Vec<Window> {
    windows(&[(w, k)])
}

fn sample_beta(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let t = s.balanced(base.pq(), &uniform(window(0.1, 0.85), 6), |_| true)?;
    Ok(Draw::new(base, 1, -1, t))
}

fn check_beta(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    Ok(vec![versus("", ev.i1(&d.t)?, ev.pair_product(&d.t)?, 1e-8)])
}

fn sample_vred(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let six = s.balanced(base.pq(), &uniform(window(0.1, 0.85), 6), |_| true)?;
    let t = retry(s, "v-reduction", |s| {
        let t7 = s.point(0.5, 0.85);
        let mut t = six.clone();
        t.extend([t7, base.pq() / t7]);
        Ok((!crate::sampler::has_tie(&t)).then_some(t))
    })?;
    Ok(Draw::new(base, 1, 1, t))
}

fn check_vred(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let t = &d.t;
    let prod = ev.pair_product(&t[..6])?;
    let permuted = [t[0], t[1], t[2], t[3], t[6], t[7], t[4], t[5]];
    Ok(vec![versus("t7t8", ev.i1(t)?, prod, 1e-8), versus("t5t6", ev.i1(&permuted)?, prod, 1e-8)])
}

const OTHERS: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

fn cont1_terms(th: &Th, ev: Option<&Ev>, t: &[C64], q: C64) -> Result<Vec<C64>> {
    let mut terms = Vec::new();
    for (i, &(j, k)) in OTHERS.iter().enumerate() {
        let (ti, tj, tk) = (t[i], t[j], t[k]);
        let c = ti / th.den(&[ti * tj, ti / tj, ti * tk, ti / tk]);
        if let Some(ev) = ev {
            terms.push(c * ev.i1(&shifted(t, &[(i, q)]))?);
        }
    }
    Ok(terms)
}

fn sample_cont1(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let k = kernel(base);
    let target = base.p() * base.p() * base.q();
    let t = s.balanced(target, &uniform(window(0.1, 0.8), 8), |t| {
        let th = Th::new(&k, base.p());
        cont1_terms(&th, None, t, base.q()).is_ok() && th.safe()
    })?;
    Ok(Draw::new(base, 1, 1, t))
}

fn check_cont1(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let terms = cont1_terms(&ev.th(), Some(ev), &d.t, ev.q())?;
    Ok(vec![vanishing("", &terms, 1e-7)])
}

fn cont3_terms(th: &Th, ev: Option<&Ev>, t: &[C64], q: C64) -> Result<Vec<C64>> {
    let mut terms = Vec::new();
    for (i, &(j, k)) in OTHERS.iter().enumerate() {
        let ti = t[i];
        let num: Vec<C64> = (3..8).map(|l| ti * t[l] / q).collect();
        let c = th.num(&num) / (ti * th.den(&[t[j] / ti, t[k] / ti]));
        if let Some(ev) = ev {
            terms.push(c * ev.i1(&shifted(t, &[(i, 1.0 / q)]))?);
        }
    }
    Ok(terms)
}

fn sample_cont3(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let (p, q) = (base.p(), base.q());
    let k = kernel(base);
    let w = windows(&[(window(0.05, 0.9 * q.norm()), 3), (window(0.1, 0.85), 5)]);
    let t = s.balanced(p * p * q * q * q, &w, |t| {
        let th = Th::new(&k, p);
        cont3_terms(&th, None, t, q).is_ok() && th.safe()
    })?;
    Ok(Draw::new(base, 1, 1, t))
}

fn check_cont3(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let terms = cont3_terms(&ev.th(), Some(ev), &d.t, ev.q())?;
    Ok(vec![vanishing("", &terms, 1e-7)])
}

fn pot(th: &Th, t: &[C64], q: C64) -> C64 {
    let (t1, t2, t3) = (t[0], t[1], t[2]);
    let mut r = th.num(&[t1 / (q * t3), t3 * t1, t3 / t1]) / th.den(&[t1 / t2, t2 / (q * t1), t1 * t2 / q]);
    for &tk in &t[3..8] {
        r *= th.num(&[tk * t2 / q]) / th.den(&[tk * t3]);
    }
    r
}

/// The potential `𝒜(t_1,…,t_8; q; p)` of the elliptic hypergeometric equation.
pub fn potential_a(t: &[C64], q: C64, p: C64, policy: &TruncationPolicy) -> Result<C64> {
    if t.len() != 8 {
        return Err(Error::InvalidInput(format!("the potential takes 8 parameters, got {}", t.len())));
    }
    if t.iter().chain([&q]).any(|x| x.norm() == 0.0) {
        return Err(Error::Domain("zero argument".into()));
    }
    let k = Kernel::new(BasePair::new(p, p)?, *policy);
    let th = Th::new(&k, p);
    let v = pot(&th, t, q);
    if th.safe() {
        Ok(v)
    } else {
        Err(Error::PoleProximity("a denominator of the potential is near a theta zero".into()))
    }
}

fn swap12(t: &[C64]) -> Vec<C64> {
    let mut s = t.to_vec();
    s.swap(0, 1);
    s
}

fn eheq_windows(q: C64) -> Vec<Window> {
    windows(&[(window(0.05, 0.9 * q.norm()), 2), (window(0.1, 0.85), 6)])
}

fn sample_potential(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let (p, q) = (base.p(), base.q());
    let k = kernel(base);
    let t = s.balanced(base.pq() * base.pq(), &eheq_windows(q), |t| {
        let th = Th::new(&k, p);
        let sp = p.sqrt();
        let inv: Vec<C64> = t.iter().map(|&x| sp / x).collect();
        pot(&th, t, q);
        pot(&th, &inv, q);
        pot(&th, t, 1.0 / q);
        th.safe()
    })?;
    Ok(Draw::new(base, 1, 1, t))
}

fn check_potential(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (p, q) = (ev.p(), ev.q());
    let th = ev.th();
    let t = &d.t;
    let a = pot(&th, t, q);
    let ell = worst(
        "p-ellipticity",
        vec![
            versus("", pot(&th, &shifted(t, &[(0, 1.0 / p), (1, p)]), q), a, 0.0),
            versus("", pot(&th, &shifted(t, &[(3, p), (7, 1.0 / p)]), q), a, 0.0),
            versus("", pot(&th, &shifted(t, &[(2, p), (5, 1.0 / p)]), q), a, 0.0),
        ],
        1e-11,
    );
    let sp = p.sqrt();
    let inv: Vec<C64> = t.iter().map(|&x| sp / x).collect();
    Ok(vec![ell, versus("q-inversion", pot(&th, &inv, q), pot(&th, t, 1.0 / q), 1e-11)])
}

fn sample_eheq(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let (p, q) = (base.p(), base.q());
    let k = kernel(base);
    let t = s.balanced(base.pq() * base.pq(), &eheq_windows(q), |t| {
        let th = Th::new(&k, p);
        let sp = p.sqrt();
        let inv: Vec<C64> = t.iter().map(|&x| sp / x).collect();
        let tp = shifted(t, &[(0, p), (1, 1.0 / p)]);
        for x in [t.to_vec(), tp] {
            pot(&th, &x, q);
            pot(&th, &swap12(&x), q);
        }
        pot(&th, &inv, 1.0 / q);
        pot(&th, &swap12(&inv), 1.0 / q);
        th.safe()
    })?;
    Ok(Draw::new(base, 1, 1, t))
}

fn u_at(ev: &Ev, t: &[C64]) -> Result<C64> {
    Ok(ev.i1(t)? / ev.gamma(&[t[0] * t[2], t[0] / t[2], t[1] * t[2], t[1] / t[2]])?)
}

fn eheq_residual(u: impl Fn(&[C64]) -> Result<C64>, t: &[C64], a: C64, b: C64, q: C64) -> Result<Outcome> {
    let u0 = u(t)?;
    let u1 = u(&shifted(t, &[(0, q), (1, 1.0 / q)]))?;
    let u2 = u(&shifted(t, &[(0, 1.0 / q), (1, q)]))?;
    Ok(vanishing("", &[a * u1, -a * u0, b * u2, -b * u0, u0], 0.0))
}

fn check_eheq(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let th = ev.th();
    let q = ev.q();
    let (a, b) = (pot(&th, &d.t, q), pot(&th, &swap12(&d.t), q));
    let o = eheq_residual(|s| u_at(ev, s), &d.t, a, b, q)?;
    Ok(vec![Outcome { tol: 1e-7, ..o }])
}

/// `U(t_1/p, p t_2)` solves the equation at `t`: the draw is the shifted
/// point and the coefficients are taken at `(p t_1, t_2/p, …)`.
fn check_eheq_second(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let th = ev.th();
    let (p, q) = (ev.p(), ev.q());
    let t = shifted(&d.t, &[(0, p), (1, 1.0 / p)]);
    let (a, b) = (pot(&th, &t, q), pot(&th, &swap12(&t), q));
    let o = eheq_residual(|s| u_at(ev, s), &d.t, a, b, q)?;
    Ok(vec![Outcome { tol: 1e-7, ..o }])
}

/// The draw `s` lives in the inverted frame; the equation is posed at
/// `t = p^{1/2}/s` with base `Q = 1/q`.
fn check_eheq_qgt1(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let th = ev.th();
    let p = ev.p();
    let big_q = 1.0 / ev.q();
    let sp = p.sqrt();
    let t: Vec<C64> = d.t.iter().map(|&x| sp / x).collect();
    let (a, b) = (pot(&th, &t, big_q), pot(&th, &swap12(&t), big_q));
    let u = |s: &[C64]| -> Result<C64> {
        let arr: [C64; 8] = s.try_into().map_err(|_| Error::InvalidInput("eight parameters".into()))?;
        let r = v_qgt1_solution(&arr, p, big_q, &ev.cfg.quad)?;
        ev.count(r.nodes_used);
        Ok(r.value)
    };
    let o = eheq_residual(u, &t, a, b, big_q)?;
    Ok(vec![Outcome { tol: 1e-6, ..o }])
}

fn sample_pq8(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let t = s.balanced(base.pq(), &uniform(window(0.1, 0.85), 8), |_| true)?;
    Ok(Draw::new(base, 2, 0, t))
}

/// `(V(pq t_1, t_2)V(t_1, pq t_2), t_1⁻²t_2⁻² V(q t_1, p t_2)V(p t_1, q t_2))`.
fn casoratian_products(ev: &Ev, t: &[C64]) -> Result<(C64, C64)> {
    let (p, q) = (ev.p(), ev.q());
    let pq = p * q;
    let p1 = ev.i1(&shifted(t, &[(0, pq)]))? * ev.i1(&shifted(t, &[(1, pq)]))?;
    let p2 =
        ev.i1(&shifted(t, &[(0, q), (1, p)]))? * ev.i1(&shifted(t, &[(0, p), (1, q)]))? / (t[0] * t[0] * t[1] * t[1]);
    Ok((p1, p2))
}

fn check_casoratian(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let t = &d.t;
    let (p1, p2) = casoratian_products(ev, t)?;
    let k = &ev.k;
    let rhs = ev.pair_product(t)? * k.inv_gamma_pair(t[0] * t[1]) * k.inv_gamma_pair(t[0] / t[1]);
    let scale = p1.norm().max(p2.norm()).max(rhs.norm());
    Ok(vec![outcome("", (p1 - p2 - rhs).norm() / scale, scale, 1e-6)])
}

fn check_three_routes(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let t = &d.t;
    let (p1, p2) = casoratian_products(ev, t)?;
    let k = &ev.k;
    let cas = (p1 - p2) / (k.inv_gamma_pair(t[0] * t[1]) * k.inv_gamma_pair(t[0] / t[1]));
    let det = ev.inm(2, t)?;
    let direct = ev.direct(2, t)?;
    Ok(vec![
        versus("casoratian-det", cas, det, 1e-6),
        versus("casoratian-direct", cas, direct, 1e-6),
        versus("det-direct", det, direct, 1e-6),
    ])
}

const SMALL_RADIUS: f64 = 0.1;

/// `|t_3| ∈ [1.15, 1.3]`, the others in `[0.1, 0.7]`, `∏ t = (pq)²`.
fn sample_crossing(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let w = windows(&[(window(0.1, 0.7), 2), (window(1.15, 1.3), 1), (window(0.1, 0.7), 5)]);
    let t = s.balanced(base.pq() * base.pq(), &w, |t| {
        let c = 1.0 / t[2];
        t.iter().enumerate().all(|(k, &x)| k == 2 || (x - c).norm() > 2.5 * SMALL_RADIUS)
    })?;
    Ok(Draw::new(base, 1, 1, t))
}

fn check_crossing(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let t = &d.t;
    let inner = t[2].norm();
    let others = t.iter().enumerate().filter(|&(k, _)| k != 2).map(|(_, x)| x.norm()).fold(0.0, f64::max);
    let mq = ev.p().norm().max(ev.q().norm());
    let outer = (1.0 / others).min(1.0 / (inner * mq));
    if !(inner * (1.0 + CONTOUR_MARGIN) < outer * (1.0 - CONTOUR_MARGIN)) {
        return Err(Error::ContourInvalid(format!("no circle separates |t_3| = {inner:.4} from {outer:.4}")));
    }
    let spec = ev.cfg.quad;
    let excised = ev.i1_on(t, &Contour::centered_at(1.0 / t[2], SMALL_RADIUS), &spec)?;
    let v_def = |r: f64| -> Result<C64> { Ok(ev.i1_on(t, &Contour::circle(r), &spec)? - excised) };
    let (ra, rb) = (inner.powf(2.0 / 3.0) * outer.powf(1.0 / 3.0), inner.powf(1.0 / 3.0) * outer.powf(2.0 / 3.0));
    let (da, db) = (v_def(ra)?, v_def(rb)?);
    let v_t = ev.i1_on(t, &Contour::default(), &spec)?;
    let res = crossing_residue(&ev.k, t, 2);
    let scale = da.norm().max(v_t.norm()).max(res.norm());
    Ok(vec![outcome("crossing", (da - v_t - res).norm() / scale, scale, 1e-8), versus("radius", da, db, 1e-8)])
}

const REST: [usize; 5] = [0, 1, 4, 5, 6];

/// `[α, β, γ, δ]` of the W relations.
fn coefs(th: &Th, t: &[C64], z: C64) -> [C64; 4] {
    let (t2, t3, t6, t7) = (t[2], t[3], t[6], t[7]);
    let alpha = th.num(&[t3 * z, t3 / z, t6 * t7, t6 / t7]) / th.den(&[t6 * z, t6 / z, t3 * t7, t3 / t7]);
    let beta = th.num(&[t7 * z, t7 / z, t6 * t3, t6 / t3]) / th.den(&[t6 * z, t6 / z, t7 * t3, t7 / t3]);
    let mut gamma = th.num(&[t7 * z, t7 / z, t2 / t7]) / th.den(&[t3 * z, t3 / z, t2 / t3]);
    let mut delta = th.num(&[t7 * z, t7 / z, t3 / t7]) / th.den(&[t2 * z, t2 / z, t3 / t2]);
    for j in REST {
        gamma *= th.num(&[t3 * t[j]]) / th.den(&[t7 * t[j]]);
        delta *= th.num(&[t2 * t[j]]) / th.den(&[t7 * t[j]]);
    }
    [alpha, beta, gamma, delta]
}

fn coef_variants(t: &[C64], z: C64, p: C64) -> Vec<(Vec<C64>, C64)> {
    vec![
        (t.to_vec(), p * z),
        (t.to_vec(), 1.0 / z),
        (shifted(t, &[(0, p), (1, 1.0 / p)]), z),
        (shifted(t, &[(3, p), (7, 1.0 / p)]), z),
        (shifted(t, &[(2, p), (6, 1.0 / p)]), z),
    ]
}

fn sample_w(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let p = base.p();
    let k = kernel(base);
    let z = s.point(0.9, 1.1);
    let t = s.balanced(p * p, &uniform(window(0.1, 0.8), 8), |t| {
        let th = Th::new(&k, p);
        coefs(&th, t, z);
        for (u, y) in coef_variants(t, z, p) {
            coefs(&th, &u, y);
        }
        th.safe()
    })?;
    Ok(Draw::new(base, 1, 1, t).with_aux(vec![z]))
}

/// `W(t; z) = V(t) / ∏ Γ(t_j z^{±1})`.
fn w_at(ev: &Ev, t: &[C64], z: C64) -> Result<C64> {
    let args: Vec<C64> = t.iter().flat_map(|&x| pm(x, z)).collect();
    Ok(ev.i1(t)? / ev.gamma(&args)?)
}

fn check_w(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (t, z, p, q) = (&d.t, d.aux[0], ev.p(), ev.q());
    let wa = |i: usize, j: usize| w_at(ev, &shifted(t, &[(i, q), (j, q)]), z);
    let (w26, w23, w27, w37) = (wa(2, 6)?, wa(2, 3)?, wa(2, 7)?, wa(3, 7)?);
    let th = ev.th();
    let [a, b, g, dl] = coefs(&th, t, z);
    let mut ell = Vec::new();
    for (u, y) in coef_variants(t, z, p) {
        let c = coefs(&th, &u, y);
        for (x, y) in c.iter().zip([a, b, g, dl]) {
            ell.push(versus("", *x, y, 0.0));
        }
    }
    Ok(vec![
        vanishing("c1", &[w26, -a * w23, -b * w27], 1e-7),
        vanishing("c2", &[w23, -g * w27, -dl * w37], 1e-7),
        vanishing("c3", &[w26, -(a * g + b) * w27, -a * dl * w37], 1e-7),
        worst("coefficient-ellipticity", ell, 1e-11),
    ])
}

fn with_x(t: &[C64], x: C64) -> Vec<C64> {
    shifted(t, &[(6, x), (7, 1.0 / x)])
}

fn swap34(t: &[C64]) -> Vec<C64> {
    let mut s = t.to_vec();
    s.swap(2, 3);
    s
}

fn a_matrix(th: &Th, t: &[C64], z: C64, pp: C64, qq: C64) -> CMatrix {
    let entries = |u: &[C64]| {
        let s = shifted(u, &[(0, pp), (7, 1.0 / qq)]);
        let [a, b, g, d] = coefs(th, &s, z);
        (a * g + b, a * d)
    };
    let (a11, a12) = entries(t);
    let (b12, b11) = entries(&swap34(t));
    CMatrix::from_row_slice(2, 2, &[a11, a12, b11, b12])
}

fn role_swap(t: &[C64]) -> Vec<C64> {
    let mut s = vec![t[2], t[3], t[0], t[1]];
    s.extend_from_slice(&t[4..]);
    s
}

fn b_matrix(k: &Kernel, t: &[C64], z: C64, p: C64, q: C64) -> (CMatrix, bool) {
    let th = Th::new(k, q);
    let a = a_matrix(&th, &role_swap(t), z, q, p);
    (a.transpose(), th.safe())
}

fn m_matrix(ev: &Ev, t: &[C64], z: C64) -> Result<CMatrix> {
    let (pp, qq) = (ev.p(), ev.q());
    let w = |i: usize, j: usize| w_at(ev, &shifted(t, &[(i, pp), (j, qq)]), z);
    Ok(CMatrix::from_row_slice(2, 2, &[w(0, 2)?, w(1, 2)?, w(0, 3)?, w(1, 3)?]))
}

fn sample_matrix_system(s: &mut Sampler, _: usize, _: i32) -> Result<Draw> {
    let base = s.base();
    let (p, q) = (base.p(), base.q());
    let k = kernel(base);
    let z = s.point(0.9, 1.1);
    let x = s.phase();
    let mq = p.norm().min(q.norm());
    let w = windows(&[(window(0.1, 0.93), 7), (window(0.05, 0.93 * mq), 1)]);
    let t = s.balanced(base.pq(), &w, |t| {
        let th = Th::new(&k, p);
        let tx = with_x(t, x);
        a_matrix(&th, &tx, z, p, q);
        a_matrix(&th, &shifted(&tx, &[(0, 1.0 / p), (1, p)]), z, p, q);
        th.safe() && b_matrix(&k, &tx, z, p, q).1
    })?;
    Ok(Draw::new(base, 1, 1, t).with_aux(vec![z, x]))
}

fn check_matrix_system(d: &Draw, ev: &Ev) -> Result<Vec<Outcome>> {
    let (z, x) = (d.aux[0], d.aux[1]);
    let (p, q) = (ev.p(), ev.q());
    let tx = with_x(&d.t, x);
    let m0 = m_matrix(ev, &tx, z)?;
    let mq = m_matrix(ev, &with_x(&d.t, q * x), z)?;
    let mp = m_matrix(ev, &with_x(&d.t, p * x), z)?;
    let th = ev.th();
    let a = a_matrix(&th, &tx, z, p, q);
    let (b, _) = b_matrix(&ev.k, &tx, z, p, q);
    let swapped = m_matrix(&ev.rebased(ev.base.swapped()), &role_swap(&tx), z)?;
    let a_shift = a_matrix(&th, &shifted(&tx, &[(0, 1.0 / p), (1, p)]), z, p, q);
    Ok(vec![
        matrix_versus("A-equation", &mq, &(&a * &m0), 1e-7),
        matrix_versus("B-equation", &mp, &(&m0 * &b), 1e-7),
        matrix_versus("transpose", &m0.transpose(), &swapped, 1e-10),
        matrix_versus("A-ellipticity", &a, &a_shift, 1e-11),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_rejects_bad_input() {
        let p = C64::new(0.3, 0.1);
        let pol = TruncationPolicy::default();
        assert!(matches!(potential_a(&[C64::new(0.5, 0.0); 7], p, p, &pol), Err(Error::InvalidInput(_))));
        let mut t = [C64::new(0.5, 0.1); 8];
        t[1] = C64::new(0.2, 0.3);
        t[2] = C64::new(-0.4, 0.2);
        // t1 = t2 puts theta(t1/t2) on a zero
        let mut tie = t;
        tie[1] = tie[0];
        assert!(matches!(potential_a(&tie, C64::new(0.2, -0.1), p, &pol), Err(Error::PoleProximity(_))));
    }
}
