use std::f64::consts::PI;

use declfc_core::io::{Config, CASE1_TOML};
use declfc_core::model::{
    build_area, build_composite, build_system, default_output_selection, AreaParams, OutputSelection, TieLineMatrix,
    AREA_STATES,
};
use declfc_core::numlin::Matrix;
use declfc_core::Error;
use proptest::prelude::*;

fn reference_areas() -> (Vec<AreaParams<f64>>, TieLineMatrix<f64>) {
    let cfg = Config::from_toml_str(CASE1_TOML).unwrap();
    (cfg.areas.clone(), cfg.tie_matrix().unwrap())
}

#[test]
fn area1_entries() {
    let (p, _) = reference_areas();
    let a = build_area(&p[0], &[(1, 0.1986), (2, 0.2148)]).unwrap();
    assert_eq!(a.a[(0, 0)], -0.1);
    assert!((a.a[(1, 1)] + 3.3333).abs() < 1e-4);
    assert_eq!(a.a[(2, 0)], -1.0 / (0.05 * 0.1));
    assert!((a.a[(3, 0)] - 2.5975).abs() < 1e-4);
    assert_eq!(a.a[(3, 0)], 2.0 * PI * (0.1986 + 0.2148));
    assert_eq!(a.b[(2, 0)], 10.0);
    assert_eq!(a.f[(0, 0)], -0.1);
    let d12 = &a.da[&1];
    assert!((d12[(3, 0)] + 1.2479).abs() < 1e-4);
    assert_eq!(d12[(3, 0)], -2.0 * PI * 0.1986);
    assert_eq!(d12.as_slice().iter().filter(|v| **v != 0.0).count(), 1);
}

#[test]
fn zero_ties_give_isolated_area() {
    let (p, _) = reference_areas();
    let a = build_area(&p[0], &[(1, 0.0), (2, 0.0)]).unwrap();
    assert_eq!(a.a[(3, 0)], 0.0);
    assert!(a.da.values().all(|d| d.max_abs() == 0.0));
}

#[test]
fn composite_dimensions_and_interactions() {
    let (p, t) = reference_areas();
    let sys = build_system(&p, &t).unwrap();
    assert_eq!((sys.n(), sys.m(), sys.q(), sys.p()), (15, 3, 3, 9));
    assert_eq!(sys.da[(AREA_STATES + 3, 0)], -2.0 * PI * 0.1986);
    for i in 0..3 {
        let blk = sys.da.block(i * 5, i * 5, 5, 5);
        assert_eq!(blk.max_abs(), 0.0);
    }
    let sel = default_output_selection(&sys);
    assert_eq!(sel.cx, Matrix::identity(15));
    assert_eq!(sel.ce, Matrix::identity(15));
}

#[test]
fn single_area_has_no_interactions() {
    let (p, _) = reference_areas();
    let t = TieLineMatrix::zeros(1);
    let sys = build_system(&p[..1], &t).unwrap();
    assert_eq!(sys.da, Matrix::zeros(5, 5));
    assert_eq!(sys.a, sys.areas[0].a);
}

#[test]
fn invalid_parameters_name_the_field() {
    let (mut p, _) = reference_areas();
    p[0].t_g = 0.0;
    match build_area(&p[0], &[]) {
        Err(Error::Parameter { field, .. }) => assert_eq!(field, "t_g"),
        other => panic!("{other:?}"),
    }
    let (p, _) = reference_areas();
    assert!(matches!(build_area(&p[0], &[(1, -0.1)]), Err(Error::Parameter { .. })));
}

#[test]
fn tie_matrix_invariants_enforced() {
    let asym = Matrix::<f64>::from_f64_rows(&[&[0.0, 0.1], &[0.2, 0.0]]).unwrap();
    assert!(TieLineMatrix::new(asym).is_err());
    let diag = Matrix::<f64>::from_f64_rows(&[&[0.1, 0.0], &[0.0, 0.0]]).unwrap();
    assert!(TieLineMatrix::new(diag).is_err());
}

#[test]
fn dimension_mismatch_rejected() {
    let (p, t) = reference_areas();
    assert!(matches!(build_system(&p[..2], &t), Err(Error::Dimension(_))));
    let areas = p.iter().map(|a| build_area(a, &[]).unwrap()).collect();
    assert!(build_composite(areas, &t).is_err());
}

#[test]
fn output_overrides() {
    let w = [1.0, 0.0, 0.0, 2.0, 0.5];
    let sel = OutputSelection::<f64>::from_diagonal_weights(3, &w, &w).unwrap();
    assert_eq!(sel.cx_block(1), Matrix::diag(&w));
    let mut cx = Matrix::<f64>::identity(15);
    cx[(0, 7)] = 1.0;
    assert!(OutputSelection::new(3, cx, Matrix::identity(15)).is_err());
}

#[test]
fn permuting_areas_permutes_blocks() {
    let (p, t) = reference_areas();
    let sys = build_system(&p, &t).unwrap();
    let perm = [2, 0, 1];
    let pp: Vec<_> = perm.iter().map(|&i| p[i]).collect();
    let sys2 = build_system(&pp, &t.permuted(&perm)).unwrap();
    for (new_i, &old_i) in perm.iter().enumerate() {
        for (new_j, &old_j) in perm.iter().enumerate() {
            let a = sys.a_total().block(old_i * 5, old_j * 5, 5, 5);
            let b = sys2.a_total().block(new_i * 5, new_j * 5, 5, 5);
            assert_eq!(a, b);
        }
    }
}

fn params() -> impl Strategy<Value = AreaParams<f64>> {
    (1.0f64..20.0, 0.0f64..2.0, 0.05f64..1.0, 0.1f64..1.0, 0.01f64..0.2, 0.1f64..2.0)
        .prop_map(|(m, d, t_g, t_ch, r, beta)| AreaParams { m, d, t_g, t_ch, r, beta })
}

proptest! {
    #[test]
    fn template_and_interaction_sums(ps in prop::collection::vec(params(), 2..5), ts in prop::collection::vec(0.0f64..0.5, 10)) {
        let n = ps.len();
        let mut entries = Vec::new();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                entries.push((i, j, ts[k]));
                k += 1;
            }
        }
        let tie = TieLineMatrix::from_entries(n, &entries).unwrap();
        let sys = build_system(&ps, &tie).unwrap();
        for (i, (area, p)) in sys.areas.iter().zip(&ps).enumerate() {
            let a = &area.a;
            prop_assert_eq!(a[(0, 0)], -p.d / p.m);
            prop_assert_eq!(a[(0, 1)], 1.0 / p.m);
            prop_assert_eq!(a[(0, 3)], -1.0 / p.m);
            prop_assert_eq!(a[(1, 1)], -1.0 / p.t_ch);
            prop_assert_eq!(a[(1, 2)], 1.0 / p.t_ch);
            prop_assert_eq!(a[(2, 0)], -1.0 / (p.r * p.t_g));
            prop_assert_eq!(a[(2, 2)], -1.0 / p.t_g);
            prop_assert_eq!(a[(4, 0)], p.beta);
            prop_assert_eq!(a[(4, 3)], 1.0);
            prop_assert_eq!(a.as_slice().iter().filter(|v| **v != 0.0).count() <= 10, true);
            // interactions in row i cancel the tie-line coefficient of A_i
            let mut s = 0.0;
            for j in 0..n {
                let blk = sys.da.block(i * 5, j * 5, 5, 5);
                let nz = blk.as_slice().iter().filter(|v| **v != 0.0).count();
                prop_assert!(nz <= 1);
                if i == j {
                    prop_assert_eq!(nz, 0);
                }
                s += blk[(3, 0)];
            }
            prop_assert!((s + a[(3, 0)]).abs() <= 1e-12 * a[(3, 0)].abs().max(1.0));
        }
    }
}
