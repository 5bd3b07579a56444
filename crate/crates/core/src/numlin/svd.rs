use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 80;

/// Singular values (descending) by one-sided Jacobi rotations.
pub fn singular_values<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>> {
    m.ensure_finite("singular value input")?;
    // Work on columns of the taller orientation.
    let a = if m.rows() >= m.cols() { m.clone() } else { m.transpose() };
    let (rows, cols) = a.shape();
    let mut u: Vec<Vec<T>> = (0..cols).map(|j| a.col(j)).collect();
    let eps = T::epsilon();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..rows {
                    alpha = alpha + u[p][i] * u[p][i];
                    beta = beta + u[q][i] * u[q][i];
                    gamma = gamma + u[p][i] * u[q][i];
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = {
                    let mag = T::one() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    if zeta >= T::zero() { mag } else { -mag }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let up = u[p][i];
                    let uq = u[q][i];
                    u[p][i] = c * up - s * uq;
                    u[q][i] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: MAX_SWEEPS });
    }
    let mut sv: Vec<T> = u.iter().map(|c| c.iter().map(|&v| v * v).sum::<T>().sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

pub fn sigma_max<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(singular_values(m)?.first().copied().unwrap_or(T::zero()))
}

/// Smallest of the min(rows, cols) singular values.
pub fn sigma_min<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(singular_values(m)?.last().copied().unwrap_or(T::zero()))
}

/// Real embedding [[Re, −Im], [Im, Re]] of a complex matrix; its singular
/// values are those of `re + i·im`, each repeated twice.
pub fn complex_embedding<T: Scalar>(re: &Matrix<T>, im: &Matrix<T>) -> Matrix<T> {
    assert_eq!(re.shape(), im.shape(), "complex parts must share a shape");
    let (r, c) = re.shape();
    let mut out = Matrix::zeros(2 * r, 2 * c);
    out.set_block(0, 0, re);
    out.set_block(0, c, &-im);
    out.set_block(r, 0, im);
    out.set_block(r, c, re);
    out
}

/// Largest singular value of `re + i·im`.
pub fn sigma_max_complex<T: Scalar>(re: &Matrix<T>, im: &Matrix<T>) -> Result<T> {
    sigma_max(&complex_embedding(re, im))
}

/// Smallest singular value of `re + i·im` (rows ≤ cols or rows ≥ cols).
pub fn sigma_min_complex<T: Scalar>(re: &Matrix<T>, im: &Matrix<T>) -> Result<T> {
    sigma_min(&complex_embedding(re, im))
}
