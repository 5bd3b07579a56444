use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on the 1-norm condition estimate accepted by [`solve_linear`].
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    norm_one: T,
}

impl<T: Scalar> Lu<T> {
    /// Returns `None` only when an exactly zero pivot column is met.
    pub fn factor(a: &Matrix<T>) -> Result<Option<Self>> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("LU of non-square {}x{}", a.rows(), a.cols())));
        }
        a.ensure_finite("LU input")?;
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() {
                return Ok(None);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - f * v;
                    }
                }
            }
        }
        Ok(Some(Self { lu, perm, norm_one: a.norm_one() }))
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s = s - self.lu[(j, i)] * w[j];
            }
            w[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s = s - self.lu[(j, i)] * w[j];
            }
            w[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }

    pub fn solve(&self, b: &Matrix<T>) -> Matrix<T> {
        assert_eq!(b.rows(), self.dim(), "LU solve: right-hand side has wrong row count");
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.col(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Hager's estimate of ‖A‖₁·‖A⁻¹‖₁.
    pub fn condition_estimate(&self) -> T {
        let n = self.dim();
        if n == 0 {
            return T::one();
        }
        let mut x = vec![T::one() / T::of(n); n];
        let mut est = T::zero();
        for _ in 0..5 {
            let y = self.solve_vec(&x);
            est = y.iter().map(|v| v.abs()).sum();
            let xi: Vec<T> = y.iter().map(|&v| if v >= T::zero() { T::one() } else { -T::one() }).collect();
            let z = self.solve_transpose_vec(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .fold((0, T::zero()), |(bj, bv), (j, &v)| if v.abs() > bv { (j, v.abs()) } else { (bj, bv) });
            let ztx: T = z.iter().zip(&x).map(|(&a, &b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![T::zero(); n];
            x[jmax] = T::one();
        }
        est * self.norm_one
    }
}

/// Solves `A X = B`, refusing matrices whose condition estimate exceeds `cap`.
pub fn solve_linear_capped<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, cap: T) -> Result<Matrix<T>> {
    if a.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "solve: A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    b.ensure_finite("right-hand side")?;
    let lu = Lu::factor(a)?.ok_or(Error::Singular { cond: f64::INFINITY })?;
    let cond = lu.condition_estimate();
    if !cond.is_finite() || cond > cap {
        return Err(Error::Singular { cond: cond.to_f64_lossy() });
    }
    Ok(lu.solve(b))
}

/// Solves `A X = B` with the default condition cap of 1e12.
pub fn solve_linear<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    solve_linear_capped(a, b, T::lit(DEFAULT_CONDITION_CAP))
}

pub fn inverse<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    solve_linear(a, &Matrix::identity(a.rows()))
}
