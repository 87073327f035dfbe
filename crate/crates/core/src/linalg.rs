//! Small dense complex linear-algebra helpers shared by the other modules.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `e^{j·phase}`.
#[inline]
pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Thin singular value decomposition `A = U·diag(s)·V^*` with `s` descending.
///
/// `U` is m×k and `V` is n×k with `k = min(m, n)`; both have orthonormal
/// columns, including those belonging to zero singular values.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// nalgebra's complex bidiagonal SVD returns non-reconstructing factors for
/// some exactly rank-deficient inputs (single-ray channels), so the
/// decomposition is computed here by orthogonalizing columns pairwise.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let mut w = a.clone();
    let mut v = CMatrix::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // align the phase of column q, then apply a real rotation
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                rotate(&mut w, p, q, phase, c, sn);
                rotate(&mut v, p, q, phase, c, sn);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = w.column_iter().map(|col| col.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let v = v.select_columns(&order);
    let s_max = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().take_while(|&&x| x > 0.0 && x > s_max * f64::EPSILON * m as f64).count();
    let mut u = CMatrix::from_element(m, rank, ZERO);
    for (k, &i) in order.iter().take(rank).enumerate() {
        u.set_column(k, &(w.column(i) / C64::new(s[k], 0.0)));
    }
    let u = complete_orthonormal(&u, n);
    debug_assert!(u.ncols() == n);
    Svd { u, s, v }
}

fn rotate(m: &mut CMatrix, p: usize, q: usize, phase: C64, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let a = m[(r, p)];
        let b = m[(r, q)] * phase;
        m[(r, p)] = a * c - b * s;
        m[(r, q)] = a * s + b * c;
    }
}

/// Extends orthonormal columns `q` (m×k) to `cols ≤ m` orthonormal columns.
pub fn complete_orthonormal(q: &CMatrix, cols: usize) -> CMatrix {
    let (m, k) = q.shape();
    debug_assert!(k <= cols && cols <= m);
    if k == cols {
        return q.clone();
    }
    if k == 0 {
        return CMatrix::identity(m, cols);
    }
    // the trailing columns of the full Householder Q span the complement
    let mut q_adj = CMatrix::identity(m, m);
    q.clone().qr().q_tr_mul(&mut q_adj);
    let full = q_adj.adjoint();
    let mut out = CMatrix::from_element(m, cols, ZERO);
    out.columns_mut(0, k).copy_from(q);
    out.columns_mut(k, cols - k).copy_from(&full.columns(k, cols - k));
    out
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    svd(m).s
}

/// Ratio of the smallest to the largest singular value; 0 for an all-zero matrix.
pub fn conditioning_ratio(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Orthonormal basis of the column space of a full-column-rank matrix (thin QR).
pub fn orthonormal_columns(m: &CMatrix) -> CMatrix {
    m.clone().qr().q()
}

/// `log2 det(A)` for a Hermitian positive-definite `A`.
///
/// Uses the Cholesky factor so that large determinants never leave the log
/// domain. If round-off makes the factorization fail, falls back to the
/// Hermitian eigenvalues clamped at zero.
pub fn log2_det_hpd(a: &CMatrix) -> f64 {
    debug_assert!(a.is_square());
    if let Some(chol) = Cholesky::new(a.clone()) {
        let l = chol.l_dirty();
        return 2.0 * (0..a.nrows()).map(|i| l[(i, i)].re.log2()).sum::<f64>();
    }
    let herm = (a + a.adjoint()).scale(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .map(|&ev| ev.max(0.0).log2())
        .sum()
}

/// `log2 |det(A)|` for a general square matrix via LU.
pub fn log2_abs_det(a: &CMatrix) -> f64 {
    debug_assert!(a.is_square());
    let lu = a.clone().lu();
    let u = lu.u();
    (0..a.nrows()).map(|i| u[(i, i)].norm().log2()).sum()
}

/// `I_n + c·A` for square `A`.
pub(crate) fn identity_plus(a: &CMatrix, c: f64) -> CMatrix {
    let n = a.nrows();
    let mut out = a.scale(c);
    for i in 0..n {
        out[(i, i)] += ONE;
    }
    out
}
