//! Small dense determinants: elliptic Cauchy determinant, left-kernel minor
//! relations, exterior powers.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::specfun::{check_ties, BasePair, Kernel, TruncationPolicy, POLE_GUARD};

pub type CMatrix = DMatrix<C64>;

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Determinant by partial-pivot LU and the 1-norm condition number
/// (infinite for singular input).
pub fn det_lu(m: &CMatrix) -> (C64, f64) {
    assert!(m.is_square(), "determinant of a non-square matrix");
    if m.nrows() == 0 {
        return (C64::new(1.0, 0.0), 1.0);
    }
    let lu = m.clone().lu();
    let det = lu.determinant();
    let cond = match lu.try_inverse() {
        Some(inv) => norm1(m) * norm1(&inv),
        None => f64::INFINITY,
    };
    (det, cond)
}

/// `lhs = det[1/(a_i⁻¹ θ_p(a_i z_j^{±1}))]` and the product formula `rhs`.
pub fn elliptic_cauchy_det(a: &[C64], z: &[C64], p: C64, policy: &TruncationPolicy) -> Result<(C64, C64)> {
    let n = a.len();
    if z.len() != n {
        return Err(Error::InvalidInput("a and z must have equal length".into()));
    }
    if a.iter().chain(z).any(|x| x.norm() == 0.0) {
        return Err(Error::Domain("zero argument".into()));
    }
    check_ties(a)?;
    check_ties(z)?;
    let k = Kernel::new(BasePair::new(p, p)?, *policy);
    let e = |x: C64, y: C64| k.th_pm(x, y) / x;
    let mut cross = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = e(a[i], z[j]);
            if v.norm() < POLE_GUARD * 1e-6 * (1.0 / a[i]).norm().max(1.0) {
                return Err(Error::PoleProximity(format!("theta(a_{i} z_{j}^(+-1)) vanishes")));
            }
            cross[(i, j)] = v;
        }
    }
    let (lhs, _) = det_lu(&cross.map(|v| 1.0 / v));
    let mut num = C64::new(1.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            num *= e(a[i], a[j]) * e(z[i], z[j]);
        }
    }
    let den: C64 = cross.iter().product();
    let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok((lhs, num / (sign * den)))
}

/// Residuals of `Σ_{j≤i≤n} v_i det(M[{1..j−1, i}, {1..j}])` for each leading
/// column count `j = 1..=k`, after checking `vM ≈ 0` to `tol`.
pub fn minor_relation_residual(m: &CMatrix, v: &[C64], tol: f64) -> Result<Vec<C64>> {
    let (n, k) = (m.nrows(), m.ncols());
    if v.len() != n || k == 0 || k > n {
        return Err(Error::InvalidInput(format!("need n >= k >= 1 and |v| = n, got {n}x{k}, |v| = {}", v.len())));
    }
    let mut kernel = 0.0f64;
    let mut scale = 0.0f64;
    for c in 0..k {
        let s: C64 = (0..n).map(|i| v[i] * m[(i, c)]).sum();
        kernel = kernel.max(s.norm());
        scale = scale.max((0..n).map(|i| (v[i] * m[(i, c)]).norm()).fold(0.0, f64::max));
    }
    if kernel > tol * scale.max(1e-300) {
        return Err(Error::KernelViolated(kernel / scale.max(1e-300)));
    }
    let mut out = Vec::with_capacity(k);
    for j in 1..=k {
        let mut acc = C64::new(0.0, 0.0);
        for i in j - 1..n {
            let rows: Vec<usize> = (0..j - 1).chain(std::iter::once(i)).collect();
            let sub = CMatrix::from_fn(j, j, |r, c| m[(rows[r], c)]);
            acc += v[i] * det_lu(&sub).0;
        }
        out.push(acc);
    }
    Ok(out)
}

/// All `k`-subsets of `0..n` in colexicographic order.
pub fn colex_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `n`-th exterior power of `M`: the matrix of its `n×n` minors.
pub fn exterior_power(m: &CMatrix, n: usize) -> CMatrix {
    let subs = colex_subsets(m.nrows(), n);
    let d = subs.len();
    CMatrix::from_fn(d, d, |r, c| {
        let sub = CMatrix::from_fn(n, n, |i, j| m[(subs[r][i], subs[c][j])]);
        det_lu(&sub).0
    })
}

/// `lhs = det Λⁿ M`, `rhs = det(M)^{C(N−1, n−1)}` for square `M` of size `N ≤ 4`.
pub fn exterior_power_det_check(m: &CMatrix, n: usize) -> Result<(C64, C64)> {
    let size = m.nrows();
    if !m.is_square() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    if size > 4 {
        return Err(Error::CapExceeded(size));
    }
    if n == 0 || n > size {
        return Err(Error::InvalidInput(format!("exterior power {n} of a {size}x{size} matrix")));
    }
    let lhs = det_lu(&exterior_power(m, n)).0;
    let rhs = det_lu(m).0.powi(binomial(size - 1, n - 1) as i32);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lu_determinant() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let (d, k) = det_lu(&m);
        assert!((d + 2.0).norm() < 1e-15);
        assert!(k.is_finite() && k > 1.0);
        let s = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(det_lu(&s).1.is_infinite());
    }

    #[test]
    fn colex_order() {
        assert_eq!(colex_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(colex_subsets(4, 2)[3], vec![0, 3]);
        assert_eq!(binomial(4, 2), 6);
    }

    #[test]
    fn exterior_trivial() {
        let id = CMatrix::identity(3, 3);
        let (l, r) = exterior_power_det_check(&id, 2).unwrap();
        assert_eq!((l, r), (c(1.0, 0.0), c(1.0, 0.0)));
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(3.0, 0.0)]));
        let (l, r) = exterior_power_det_check(&d, 1).unwrap();
        assert!((l - 6.0).norm() < 1e-15 && (r - 6.0).norm() < 1e-15);
        assert!(matches!(exterior_power_det_check(&CMatrix::identity(5, 5), 2), Err(Error::CapExceeded(5))));
    }

    #[test]
    fn cauchy_small() {
        let pol = TruncationPolicy::default();
        let p = c(0.3, 0.1);
        let (l, r) = elliptic_cauchy_det(&[c(0.5, 0.3)], &[c(0.9, -0.4)], p, &pol).unwrap();
        assert!((l - r).norm() / l.norm() < 1e-15);
        assert!(matches!(
            elliptic_cauchy_det(&[c(0.5, 0.3), c(0.5, 0.3)], &[c(0.9, -0.4), c(0.2, 1.0)], p, &pol),
            Err(Error::TieBreak(0, 1))
        ));
    }

    #[test]
    fn minor_relation_rank_deficient() {
        // row 3 is a combination of rows 1 and 2
        let r1 = [c(1.0, 0.5), c(-0.3, 2.0)];
        let r2 = [c(0.7, -1.1), c(0.4, 0.2)];
        let (x, y) = (c(0.3, 0.9), c(-1.2, 0.4));
        let r3 = [r1[0] * x + r2[0] * y, r1[1] * x + r2[1] * y];
        let m = CMatrix::from_row_slice(3, 2, &[r1[0], r1[1], r2[0], r2[1], r3[0], r3[1]]);
        let v = [x, y, c(-1.0, 0.0)];
        let res = minor_relation_residual(&m, &v, 1e-13).unwrap();
        assert_eq!(res.len(), 2);
        for r in res {
            assert!(r.norm() < 1e-13);
        }
        let bad = [x, y, c(1.0, 0.0)];
        assert!(matches!(minor_relation_residual(&m, &bad, 1e-13), Err(Error::KernelViolated(_))));
    }
}
