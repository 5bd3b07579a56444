//! Dense real linear algebra: solves, definiteness certificates, eigenvalues
//! and singular values.

mod chol;
mod eig;
mod lu;
mod matrix;
mod svd;

pub use chol::{backward_subst_t, certify_pd, cholesky, forward_subst, lower_inverse};
pub use eig::{eig, sym_eigvals, sym_max_eig, ComplexSpectrum};
pub use lu::{inverse, solve_linear, solve_linear_capped, Lu, DEFAULT_CONDITION_CAP};
pub use matrix::Matrix;
pub use svd::{complex_embedding, sigma_max, sigma_max_complex, sigma_min, sigma_min_complex, singular_values};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let a = Matrix::<f64>::from_f64_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let s = eig(&a).unwrap().sorted();
        assert!(s[0].re.abs() < 1e-15 && (s[0].im + 1.0).abs() < 1e-15);
        assert!(s[1].re.abs() < 1e-15 && (s[1].im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_spectrum() {
        let s = eig(&Matrix::<f64>::identity(3)).unwrap();
        assert!(s.values.iter().all(|v| (v.re - 1.0).abs() < 1e-15 && v.im == 0.0));
    }

    #[test]
    fn diagonal_solve() {
        let a = Matrix::<f64>::diag(&[2.0, 4.0]);
        let b = Matrix::column(&[2.0, 4.0]);
        let x = solve_linear(&a, &b).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = Matrix::<f64>::from_f64_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(solve_linear(&a, &Matrix::identity(2)), Err(crate::Error::Singular { .. })));
        let near = Matrix::<f64>::from_f64_rows(&[&[1.0, 1.0], &[1.0, 1.0 + 1e-14]]).unwrap();
        assert!(matches!(solve_linear(&near, &Matrix::identity(2)), Err(crate::Error::Singular { .. })));
    }

    #[test]
    fn certify_small_cases() {
        assert!(certify_pd(&Matrix::<f64>::identity(4)).unwrap());
        assert!(!certify_pd(&Matrix::<f64>::diag(&[1.0, -1.0])).unwrap());
        assert!(!certify_pd(&Matrix::<f64>::zeros(2, 2)).unwrap());
        let asym = Matrix::<f64>::from_f64_rows(&[&[2.0, 1.0], &[0.0, 2.0]]).unwrap();
        assert!(matches!(certify_pd(&asym), Err(crate::Error::Asymmetric { .. })));
        let nan = Matrix::<f64>::diag(&[f64::NAN, 1.0]);
        assert!(matches!(certify_pd(&nan), Err(crate::Error::NonFinite(_))));
    }

    #[test]
    fn sigma_small_cases() {
        assert_eq!(sigma_max(&Matrix::<f64>::identity(2)).unwrap(), 1.0);
        assert_eq!(sigma_max(&Matrix::<f64>::diag(&[3.0, -5.0])).unwrap(), 5.0);
        // |1 + i| = sqrt(2)
        let s = sigma_max_complex(&Matrix::<f64>::diag(&[1.0]), &Matrix::diag(&[1.0])).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_eigenvalues_of_known_matrix() {
        // tridiag(-1, 2, -1) of size 4: 2 - 2cos(kπ/5)
        let n = 4;
        let a = Matrix::<f64>::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let ev = sym_eigvals(&a).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * (((k + 1) as f64) * std::f64::consts::PI / 5.0).cos();
            assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_f64_rows(&[&[4.0, 1.0], &[2.0, 3.0]]).unwrap();
        let s = eig(&a).unwrap().sorted();
        assert!((s[0].re - 2.0).abs() < 1e-5 && (s[1].re - 5.0).abs() < 1e-5);
        assert!(certify_pd(&Matrix::<f32>::diag(&[1.0, 2.0])).unwrap());
    }
}
