#![allow(dead_code)]

use declfc_core::io::{Config, CASE1_TOML};
use declfc_core::model::{build_composite, TieLineMatrix};
use declfc_core::numlin::Matrix;
use declfc_core::synthesis::{DesignSpec, DesignVariables};
use declfc_core::CompositeSystem64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn case1() -> (CompositeSystem64, DesignSpec<f64>) {
    let cfg = Config::from_toml_str(CASE1_TOML).unwrap();
    (cfg.system().unwrap(), cfg.spec().unwrap())
}

/// Area 1 of the three-area fixture on its own, tie coefficient kept in A but no interactions.
pub fn one_area() -> CompositeSystem64 {
    let (sys, _) = case1();
    let mut area = sys.areas[0].clone();
    area.da.clear();
    build_composite(vec![area], &TieLineMatrix::zeros(1)).unwrap()
}

/// Plain Cholesky of `m - delta·I`; success with `delta` above the rounding
/// bound of the factorization certifies `m ≻ 0`.
pub fn shifted_cholesky(m: &Matrix<f64>, delta: f64) -> bool {
    let n = m.rows();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = m[(j, j)] - delta - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if d <= 0.0 {
            return false;
        }
        d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..n {
            l[i][j] = (m[(i, j)] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / d;
        }
    }
    true
}

/// Decision vector with Z, Q = I + small symmetric noise and random M1, M2.
pub fn random_point(vars: &DesignVariables, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = &vars.layout;
    let mut x: Vec<f64> = (0..l.count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for &id in vars.z.iter().chain(&vars.q) {
        let d = l.sym_dim(id);
        for i in 0..d {
            for j in i..d {
                x[l.sym_index(id, i, j)] = if i == j { 1.0 } else { rng.gen_range(-0.05..0.05) };
            }
        }
    }
    x
}
