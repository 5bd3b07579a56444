use declfc_core::model::{build_area, AreaParams};
use declfc_core::numlin::{
    certify_pd, eig, inverse, sigma_max, sigma_max_complex, solve_linear, sym_eigvals, sym_max_eig, Matrix,
};
use declfc_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn cases() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

fn mat(n: usize, m: usize, v: &[f64]) -> Matrix<f64> {
    Matrix::from_vec(n, m, v[..n * m].to_vec()).unwrap()
}

/// Characteristic polynomial coefficients (monic, highest first) by Faddeev-LeVerrier.
fn charpoly(a: &Matrix<f64>) -> Vec<f64> {
    let n = a.rows();
    let mut c = vec![1.0];
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut shifted = mk.clone();
        for i in 0..n {
            shifted[(i, i)] += c[k - 1];
        }
        mk = a.matmul(&shifted);
        c.push(-mk.trace() / k as f64);
    }
    c
}

/// Polynomial roots by Durand-Kerner iteration.
fn durand_kerner(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let eval = |z: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck);
    let seed = Complex64::new(0.4, 0.9);
    let radius = 1.0 + c.iter().skip(1).map(|x| x.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..5000 {
        let prev = z.clone();
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
        }
        if z.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15 * (1.0 + a.norm())) {
            break;
        }
    }
    z
}

fn matched(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = (0..b.len()).filter(|&j| !used[j]).min_by(|&i, &j| {
            (b[i] - x).norm().partial_cmp(&(b[j] - x).norm()).unwrap()
        });
        match best {
            Some(j) if (b[j] - x).norm() <= tol => {
                used[j] = true;
                true
            }
            _ => false,
        }
    })
}

fn area1_matrix() -> Matrix<f64> {
    let p = AreaParams { m: 10.0, d: 1.0, t_g: 0.1, t_ch: 0.3, r: 0.05, beta: 1.0 };
    build_area(&p, &[(1, 0.1986), (2, 0.2148)]).unwrap().a
}

#[test]
fn area_spectrum_matches_polynomial_roots() {
    let a = area1_matrix();
    let ours: Vec<Complex64> = eig(&a).unwrap().values.iter().map(|v| Complex64::new(v.re, v.im)).collect();
    let oracle = durand_kerner(&charpoly(&a));
    assert!(matched(&ours, &oracle, 1e-6 * a.norm_fro()), "eig {ours:?}\nroots {oracle:?}");
}

#[test]
fn small_examples() {
    let s = eig(&Matrix::<f64>::identity(3)).unwrap();
    assert!(s.values.iter().all(|v| (v.re - 1.0).abs() < 1e-14 && v.im.abs() < 1e-14));
    let b = Matrix::<f64>::from_f64_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
    assert_eq!(solve_linear(&Matrix::identity(2), &b).unwrap(), b);
    assert!(certify_pd(&Matrix::<f64>::identity(4)).unwrap());
    assert!(!certify_pd(&Matrix::diag(&[1.0, -1.0])).unwrap());
    assert!((sigma_max(&Matrix::<f64>::identity(2)).unwrap() - 1.0).abs() < 1e-14);
    assert!((sigma_max(&Matrix::<f64>::diag(&[3.0, -5.0])).unwrap() - 5.0).abs() < 1e-13);
}

#[test]
fn singular_solve_is_an_error() {
    let a = Matrix::<f64>::from_f64_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
    assert!(matches!(solve_linear(&a, &Matrix::column(&[1.0, 1.0])), Err(Error::Singular { .. })));
    assert!(inverse(&Matrix::<f64>::from_f64_rows(&[&[1.0, 0.0], &[0.0, 1e-14]]).unwrap()).is_err());
}

#[test]
fn asymmetric_input_to_certify_pd_is_rejected() {
    let s = Matrix::<f64>::from_f64_rows(&[&[2.0, 1.0], &[0.0, 2.0]]).unwrap();
    assert!(matches!(certify_pd(&s), Err(Error::Asymmetric { .. })));
}

#[test]
fn non_finite_input_is_rejected() {
    let s = Matrix::<f64>::from_f64_rows(&[&[f64::NAN, 0.0], &[0.0, 1.0]]).unwrap();
    assert!(eig(&s).is_err());
    assert!(certify_pd(&s).is_err());
}

#[test]
fn single_precision_kernel() {
    let a = Matrix::<f32>::from_f64_rows(&[&[0.0, 1.0], &[-2.0, -3.0]]).unwrap();
    let mut re: Vec<f32> = eig(&a).unwrap().values.iter().map(|v| v.re).collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((re[0] + 2.0).abs() < 1e-5 && (re[1] + 1.0).abs() < 1e-5);
}

#[test]
fn complex_sigma_uses_embedding() {
    // [[1, i], [0, 1]] has singular values (sqrt(5) ± 1)/2
    let re = Matrix::<f64>::identity(2);
    let im = Matrix::from_f64_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    let s = sigma_max_complex(&re, &im).unwrap();
    assert!((s - (5f64.sqrt() + 1.0) / 2.0).abs() < 1e-12);
}

fn entries(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn solve_multiply_back(n in 1usize..=8, v in entries(64), rhs in entries(24)) {
        // diagonal shift keeps the instance well conditioned
        let mut a = mat(n, n, &v);
        for i in 0..n {
            a[(i, i)] += 2.0 * n as f64 * a[(i, i)].signum().max(0.5);
        }
        let b = mat(n, 3, &rhs);
        let x = solve_linear(&a, &b).unwrap();
        let r = (&a.matmul(&x) - &b).norm_fro();
        prop_assert!(r <= 1e-10 * a.norm_fro() * x.norm_fro() + 1e-12, "residual {r}");
    }

    #[test]
    fn spectrum_trace_and_determinant(n in 1usize..=8, v in entries(64)) {
        let a = mat(n, n, &v);
        let s = eig(&a).unwrap();
        prop_assert_eq!(s.len(), n);
        let sum = s.sum();
        let scale = a.norm_fro().max(1e-300);
        prop_assert!((sum.re - a.trace()).abs() <= 1e-6 * scale);
        prop_assert!(sum.im.abs() <= 1e-6 * scale);
        // product of eigenvalues against the LU determinant oracle
        let prod = s.values.iter().fold(Complex64::new(1.0, 0.0), |p, v| p * Complex64::new(v.re, v.im));
        let det = gauss_det(&a);
        prop_assert!((prod.re - det).abs() <= 1e-8 * scale.powi(n as i32).max(1.0));
        // conjugate pairs
        let vals: Vec<Complex64> = s.values.iter().map(|v| Complex64::new(v.re, v.im)).collect();
        let conj: Vec<Complex64> = vals.iter().map(|v| v.conj()).collect();
        prop_assert!(matched(&vals, &conj, 1e-8 * scale));
    }

    #[test]
    fn certify_pd_agrees_with_spectrum(n in 1usize..=8, v in entries(64), shift in -1.0f64..3.0) {
        let g = mat(n, n, &v);
        let mut s = g.matmul(&g.transpose()).symmetrize();
        for i in 0..n {
            s[(i, i)] += shift;
        }
        let lam = sym_eigvals(&s).unwrap();
        let lo = lam.iter().cloned().fold(f64::INFINITY, f64::min);
        let pd = certify_pd(&s).unwrap();
        if pd {
            prop_assert!(lo > 0.0, "certified with λ_min = {lo}");
        }
        if lo > 1e-8 * s.norm_fro() {
            prop_assert!(pd, "λ_min = {lo} but not certified");
        }
        let top = sym_max_eig(&s).unwrap();
        prop_assert!((top - lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).abs() <= 1e-12 * (1.0 + s.norm_fro()));
    }

    #[test]
    fn sigma_max_gram_oracle(r in 1usize..=6, c in 1usize..=6, v in entries(36)) {
        let m = mat(r, c, &v);
        let s = sigma_max(&m).unwrap();
        let gram = m.transpose().matmul(&m).symmetrize();
        let oracle = sym_max_eig(&gram).unwrap().max(0.0).sqrt();
        prop_assert!((s - oracle).abs() <= 1e-8 * oracle.max(1e-12) + 1e-12, "{s} vs {oracle}");
    }
}

fn gauss_det(a: &Matrix<f64>) -> f64 {
    let n = a.rows();
    let mut m = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().partial_cmp(&m[(j, k)].abs()).unwrap()).unwrap();
        if m[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            det = -det;
        }
        det *= m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                let v = m[(k, j)];
                m[(i, j)] -= f * v;
            }
        }
    }
    det
}
