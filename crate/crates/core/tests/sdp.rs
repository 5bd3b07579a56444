use declfc_core::io::{Config, CASE1_TOML};
use declfc_core::numlin::{certify_pd, Matrix};
use declfc_core::sdp::{
    evaluate_residuals, solve_feasibility, write_sparse_dump, AffineLmi, AffineMatrix, FeasibilityProblem,
    SolveOutcome, SolverOptions, VariableLayout,
};
use declfc_core::synthesis::{assemble_theorem2, decouplers_for, DesignPlant, DesignSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar_times(l: &VariableLayout, k: usize, m: &Matrix<f64>) -> AffineMatrix<f64> {
    // x_k · m for symmetric m = Σ λ u uᵀ, built from rank-one terms
    let n = m.rows();
    let id = declfc_core::sdp::RectId(k);
    let v = AffineMatrix::rect_var(l, id);
    let mut acc = AffineMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] != 0.0 {
                let mut ei = Matrix::zeros(n, 1);
                ei[(i, 0)] = m[(i, j)];
                let mut ej = Matrix::zeros(1, n);
                ej[(0, j)] = 1.0;
                acc = acc.add(&v.left_mul(&ei).right_mul(&ej));
            }
        }
    }
    acc
}

fn scalar_layout(nv: usize) -> VariableLayout {
    let mut l = VariableLayout::new();
    for k in 0..nv {
        l.add_rect(format!("x{k}"), 1, 1);
    }
    l
}

fn feasible(out: SolveOutcome<f64>) -> declfc_core::sdp::LmiSolution<f64> {
    match out {
        SolveOutcome::Feasible(s) => s,
        SolveOutcome::Infeasible(r) => panic!("infeasible at {}: {}", r.margin, r.blocking),
    }
}

#[test]
fn shifted_identity_needs_x_below_minus_one() {
    // x·I + I ≺ 0, plus a dummy symmetric block whose floor keeps the problem bounded
    let mut l = VariableLayout::new();
    l.add_rect("x", 1, 1);
    l.add_sym("dummy", 2);
    let expr = scalar_times(&l, 0, &Matrix::identity(3)).add(&AffineMatrix::constant(Matrix::identity(3)));
    let p = FeasibilityProblem::new(l, vec![AffineLmi::new("shift", expr).unwrap()], 1e-6).unwrap();
    let sol = feasible(solve_feasibility(&p, &SolverOptions::default()).unwrap());
    assert!(sol.x[0] < -1.0);
    let res = evaluate_residuals(&p, &sol.x).unwrap();
    assert!(res.iter().all(|r| r.1 < 0.0));
}

#[test]
fn constant_positive_lmi_is_infeasible_with_margin() {
    let l = scalar_layout(1);
    let expr = AffineMatrix::constant(Matrix::diag(&[1.0, -1.0])).add(&scalar_times(&l, 0, &Matrix::diag(&[0.0, 1.0])));
    let p = FeasibilityProblem::new(l, vec![AffineLmi::new("stuck", expr).unwrap()], 0.0).unwrap();
    match solve_feasibility(&p, &SolverOptions::default()).unwrap() {
        SolveOutcome::Infeasible(r) => {
            assert_eq!(r.blocking, "stuck");
            assert!((r.margin - 1.0).abs() < 1e-6, "margin {}", r.margin);
        }
        SolveOutcome::Feasible(_) => panic!("λ_max ≥ 1 for every x"),
    }
}

#[test]
fn hand_residual() {
    // F(x) = [[x, 1], [1, x]] has λ_max = x + 1
    let l = scalar_layout(1);
    let off = Matrix::from_f64_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
    let expr = scalar_times(&l, 0, &Matrix::identity(2)).add(&AffineMatrix::constant(off));
    let p = FeasibilityProblem::new(l, vec![AffineLmi::new("h", expr).unwrap()], 0.0).unwrap();
    let r = evaluate_residuals(&p, &[-3.0]).unwrap();
    assert!((r[0].1 + 2.0).abs() < 1e-14);
    assert!(evaluate_residuals(&p, &[0.0, 1.0]).is_err());
}

#[test]
fn asymmetric_lmi_rejected() {
    let c = Matrix::<f64>::from_f64_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    assert!(AffineLmi::new("bad", AffineMatrix::constant(c)).is_err());
}

/// Random LMI feasible by construction: at x0, F(x0) = −I.
fn random_problem(rng: &mut ChaCha8Rng, dim: usize, nv: usize) -> FeasibilityProblem<f64> {
    let l = scalar_layout(nv);
    let x0: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut f0 = Matrix::identity(dim).scale(-1.0);
    let mut expr = AffineMatrix::zeros(dim, dim);
    for (k, &xk) in x0.iter().enumerate() {
        let g = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        let s = g.symmetrize();
        f0 = &f0 - &s.scale(xk);
        expr = expr.add(&scalar_times(&l, k, &s));
    }
    let lmi = AffineLmi::new("rand", expr.add(&AffineMatrix::constant(f0))).unwrap();
    FeasibilityProblem::new(l, vec![lmi], 0.0).unwrap()
}

#[test]
fn certificate_sound_scale_equivariant_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SolverOptions::default();
    for _ in 0..40 {
        let dim = rng.gen_range(2..6);
        let nv = rng.gen_range(1..4);
        let p = random_problem(&mut rng, dim, nv);
        let sol = feasible(solve_feasibility(&p, &opts).unwrap());
        // reported residuals match independent re-evaluation
        let res = evaluate_residuals(&p, &sol.x).unwrap();
        for ((_, a), (_, b)) in res.iter().zip(&sol.residuals) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
        for l in &p.lmis {
            assert!(certify_pd(&l.eval(&sol.x).symmetrize().scale(-1.0)).unwrap());
        }
        // scaling every LMI by α scales the residuals at the same x
        let alpha = rng.gen_range(0.01..100.0);
        let scaled = FeasibilityProblem::new(
            p.layout.clone(),
            p.lmis.iter().map(|l| l.scaled(alpha)).collect(),
            p.pd_floor,
        )
        .unwrap();
        let rs = evaluate_residuals(&scaled, &sol.x).unwrap();
        for ((_, a), (_, b)) in res.iter().zip(&rs) {
            assert!((alpha * a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            assert!(*b < 0.0);
        }
        let again = solve_feasibility(&p, &opts).unwrap();
        assert_eq!(again.solution(), &sol);
    }
}

fn case1() -> (Config, declfc_core::CompositeSystem64) {
    let cfg = Config::from_toml_str(CASE1_TOML).unwrap();
    let sys = cfg.system().unwrap();
    (cfg, sys)
}

#[test]
fn omega_problem_dimensions_and_affinity() {
    let (cfg, sys) = case1();
    let out = cfg.output_selection(&sys).unwrap();
    let spec: DesignSpec<f64> = cfg.spec().unwrap();
    let dec = decouplers_for(&sys).unwrap();
    let (p, _) = assemble_theorem2(&sys, &out, &spec, &dec).unwrap();
    assert_eq!(p.lmis[0].dim, 7 * 15 + 3);
    assert_eq!(p.layout.count(), 3 * 15 + 3 * 15 + 3 * 5 + 3 * 15);
    // x = 0 violates the floor
    let zero = vec![0.0; p.layout.count()];
    assert!(evaluate_residuals(&p, &zero).unwrap().iter().any(|r| r.1 >= 0.0));
    // F(αx) − F(0) = α(F(x) − F(0))
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..p.layout.count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x2: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
    let c = p.lmis[0].eval(&zero);
    let lhs = &p.lmis[0].eval(&x2) - &c;
    let rhs = (&p.lmis[0].eval(&x) - &c).scale(2.5);
    assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.max_abs());
}

#[test]
fn interactions_vanish_without_ties() {
    let mut text = CASE1_TOML.replace("t = 0.1986", "t = 0.0");
    text = text.replace("t = 0.2148", "t = 0.0").replace("t = 0.1830", "t = 0.0");
    let cfg = Config::from_toml_str(&text).unwrap();
    let sys = cfg.system::<f64>().unwrap();
    assert_eq!(sys.da.max_abs(), 0.0);
    let out = cfg.output_selection(&sys).unwrap();
    let plant = DesignPlant::integrated(&sys, &out, &decouplers_for(&sys).unwrap()).unwrap();
    let spec = cfg.spec().unwrap();
    let (p, _) = declfc_core::synthesis::assemble_plant_problem(&plant, &spec, 1e-6).unwrap();
    // block (1,5) of Ω starts after the (n, n, q, n) columns
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x: Vec<f64> = (0..p.layout.count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let om = p.lmis[0].eval(&x);
    assert_eq!(om.block(0, 15 + 15 + 3 + 15, 15, 15).max_abs(), 0.0);
}

#[test]
fn sparse_dump_format() {
    let l = scalar_layout(1);
    let expr = scalar_times(&l, 0, &Matrix::identity(2)).add(&AffineMatrix::constant(Matrix::diag(&[-1.0, 0.0])));
    let p = FeasibilityProblem::new(l, vec![AffineLmi::new("tiny", expr).unwrap()], 0.0).unwrap();
    let mut buf = Vec::new();
    write_sparse_dump(&p, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data, vec!["0 0 0 0 -1e0", "0 1 0 0 1e0", "0 1 1 1 1e0"]);
    assert!(text.starts_with("# declfc sparse-lmi format-version 1"));
}
