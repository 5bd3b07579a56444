use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower Cholesky factor of a symmetric matrix, or `None` when some pivot
/// falls at or below `floor`.
pub fn cholesky<T: Scalar>(s: &Matrix<T>, floor: T) -> Option<Matrix<T>> {
    let n = s.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v = v - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / djj;
        }
    }
    Some(l)
}

/// Solves `L y = b` in place for lower-triangular `L`.
pub fn forward_subst<T: Scalar>(l: &Matrix<T>, b: &mut [T]) {
    for i in 0..l.rows() {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Solves `Lᵀ y = b` in place for lower-triangular `L`.
pub fn backward_subst_t<T: Scalar>(l: &Matrix<T>, b: &mut [T]) {
    for i in (0..l.rows()).rev() {
        let mut s = b[i];
        for k in i + 1..l.rows() {
            s = s - l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        forward_subst(l, &mut e);
        for i in 0..n {
            inv[(i, j)] = e[i];
        }
    }
    inv
}

/// True iff the symmetrized `s` admits a Cholesky factorization whose pivots all
/// exceed 1e-12·‖S‖_F.
pub fn certify_pd<T: Scalar>(s: &Matrix<T>) -> Result<bool> {
    if !s.is_square() {
        return Err(Error::Dimension(format!("certify_pd of non-square {}x{}", s.rows(), s.cols())));
    }
    s.ensure_finite("certify_pd input")?;
    let asym = s.asymmetry();
    if asym > T::tol(1e-12) {
        return Err(Error::Asymmetric { asymmetry: asym.to_f64_lossy() });
    }
    let sym = s.symmetrize();
    let floor = T::tol(1e-12) * sym.norm_fro();
    Ok(cholesky(&sym, floor).is_some())
}
