//! Per-area and composite N-area load-frequency-control realizations.
//!
//! State order per area is fixed: `[Δf, ΔP_m, ΔP_v, ΔP_tie, ∫ACE]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::Matrix;
use crate::scalar::Scalar;

/// States per area.
pub const AREA_STATES: usize = 5;
/// Control inputs per area.
pub const AREA_INPUTS: usize = 1;
/// Load disturbances per area.
pub const AREA_DISTURBANCES: usize = 1;
/// Measured outputs per area (Δf, ΔP_tie, ∫ACE).
pub const AREA_OUTPUTS: usize = 3;

pub const STATE_FREQ: usize = 0;
pub const STATE_MECH: usize = 1;
pub const STATE_VALVE: usize = 2;
pub const STATE_TIE: usize = 3;
pub const STATE_ACE: usize = 4;

pub const STATE_LABELS: [&str; AREA_STATES] = ["df", "dpm", "dpv", "dptie", "iace"];

/// Physical parameters of one control area.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaParams<T> {
    /// Inertia constant M.
    pub m: T,
    /// Damping D.
    pub d: T,
    /// Governor time constant.
    pub t_g: T,
    /// Turbine time constant.
    pub t_ch: T,
    /// Speed droop R.
    pub r: T,
    /// Frequency bias β.
    pub beta: T,
}

impl<T: Scalar> AreaParams<T> {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("m", self.m, self.m > T::zero(), "must be positive"),
            ("t_g", self.t_g, self.t_g > T::zero(), "must be positive"),
            ("t_ch", self.t_ch, self.t_ch > T::zero(), "must be positive"),
            ("r", self.r, self.r > T::zero(), "must be positive"),
            ("d", self.d, self.d >= T::zero(), "must be non-negative"),
            ("beta", self.beta, self.beta > T::zero(), "must be positive"),
        ];
        for (field, value, ok, reason) in checks {
            if !value.is_finite() || !ok {
                return Err(Error::Parameter { field: field.into(), reason: format!("{reason}, got {value}") });
            }
        }
        Ok(())
    }
}

/// Symmetric tie-line synchronizing coefficients with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct TieLineMatrix<T> {
    t: Matrix<T>,
}

impl<T: Scalar> TieLineMatrix<T> {
    pub fn new(t: Matrix<T>) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::Dimension(format!("tie-line matrix is {}x{}", t.rows(), t.cols())));
        }
        let n = t.rows();
        for i in 0..n {
            if t[(i, i)] != T::zero() {
                return Err(Error::Parameter { field: format!("tie[{i}][{i}]"), reason: "diagonal must be zero".into() });
            }
            for j in 0..n {
                let v = t[(i, j)];
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::Parameter {
                        field: format!("tie[{i}][{j}]"),
                        reason: format!("must be finite and non-negative, got {v}"),
                    });
                }
                if v != t[(j, i)] {
                    return Err(Error::Parameter { field: format!("tie[{i}][{j}]"), reason: "must be symmetric".into() });
                }
            }
        }
        Ok(Self { t })
    }

    /// From `(i, j, T_ij)` entries with `i != j`, 0-based; mirrored automatically.
    pub fn from_entries(n: usize, entries: &[(usize, usize, T)]) -> Result<Self> {
        let mut t = Matrix::zeros(n, n);
        for &(i, j, v) in entries {
            if i >= n || j >= n || i == j {
                return Err(Error::Parameter {
                    field: format!("tie[{i}][{j}]"),
                    reason: format!("indices must be distinct and below {n}"),
                });
            }
            t[(i, j)] = v;
            t[(j, i)] = v;
        }
        Self::new(t)
    }

    pub fn zeros(n: usize) -> Self {
        Self { t: Matrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.t.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.t[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.t
    }

    /// `(j, T_ij)` for every `j != i`.
    pub fn row_entries(&self, i: usize) -> Vec<(usize, T)> {
        (0..self.n()).filter(|&j| j != i).map(|j| (j, self.t[(i, j)])).collect()
    }

    /// Same coefficients with areas reordered: new area `k` is old area `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { t: Matrix::from_fn(self.n(), self.n(), |i, j| self.t[(perm[i], perm[j])]) }
    }
}

/// The (A, ΔA_ij, B, F, C) realization of one area.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaMatrices<T> {
    pub a: Matrix<T>,
    pub da: BTreeMap<usize, Matrix<T>>,
    pub b: Matrix<T>,
    pub f: Matrix<T>,
    pub c: Matrix<T>,
    pub params: AreaParams<T>,
}

fn two_pi<T: Scalar>() -> T {
    T::lit(2.0) * T::PI()
}

/// Builds the 5-state area model; `tie_row` lists `(j, T_ij)` for the other areas.
pub fn build_area<T: Scalar>(params: &AreaParams<T>, tie_row: &[(usize, T)]) -> Result<AreaMatrices<T>> {
    params.validate()?;
    for &(j, t) in tie_row {
        if !t.is_finite() || t < T::zero() {
            return Err(Error::Parameter { field: format!("tie coefficient to area {j}"), reason: format!("got {t}") });
        }
    }
    let p = params;
    let one = T::one();
    let tie_sum: T = tie_row.iter().map(|&(_, t)| t).sum();
    let mut a = Matrix::zeros(AREA_STATES, AREA_STATES);
    a[(0, 0)] = -p.d / p.m;
    a[(0, 1)] = one / p.m;
    a[(0, 3)] = -one / p.m;
    a[(1, 1)] = -one / p.t_ch;
    a[(1, 2)] = one / p.t_ch;
    a[(2, 0)] = -one / (p.r * p.t_g);
    a[(2, 2)] = -one / p.t_g;
    a[(3, 0)] = two_pi::<T>() * tie_sum;
    a[(4, 0)] = p.beta;
    a[(4, 3)] = one;

    let mut da = BTreeMap::new();
    for &(j, t) in tie_row {
        let mut d = Matrix::zeros(AREA_STATES, AREA_STATES);
        d[(3, 0)] = -two_pi::<T>() * t;
        da.insert(j, d);
    }

    let mut b = Matrix::zeros(AREA_STATES, AREA_INPUTS);
    b[(2, 0)] = one / p.t_g;
    let mut f = Matrix::zeros(AREA_STATES, AREA_DISTURBANCES);
    f[(0, 0)] = -one / p.m;
    let mut c = Matrix::zeros(AREA_OUTPUTS, AREA_STATES);
    c[(0, STATE_FREQ)] = one;
    c[(1, STATE_TIE)] = one;
    c[(2, STATE_ACE)] = one;
    Ok(AreaMatrices { a, da, b, f, c, params: *params })
}

/// Block-assembled N-area system.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeSystem<T> {
    pub n_areas: usize,
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub f: Matrix<T>,
    pub c: Matrix<T>,
    pub da: Matrix<T>,
    pub areas: Vec<AreaMatrices<T>>,
    pub tie: TieLineMatrix<T>,
}

impl<T: Scalar> CompositeSystem<T> {
    pub fn n(&self) -> usize {
        AREA_STATES * self.n_areas
    }

    pub fn m(&self) -> usize {
        AREA_INPUTS * self.n_areas
    }

    pub fn q(&self) -> usize {
        AREA_DISTURBANCES * self.n_areas
    }

    pub fn p(&self) -> usize {
        AREA_OUTPUTS * self.n_areas
    }

    /// A + ΔA.
    pub fn a_total(&self) -> Matrix<T> {
        &self.a + &self.da
    }
}

pub fn build_composite<T: Scalar>(areas: Vec<AreaMatrices<T>>, tie: &TieLineMatrix<T>) -> Result<CompositeSystem<T>> {
    let nn = areas.len();
    if nn == 0 {
        return Err(Error::Dimension("composite system needs at least one area".into()));
    }
    if tie.n() != nn {
        return Err(Error::Dimension(format!("{} areas but tie-line matrix is {}x{}", nn, tie.n(), tie.n())));
    }
    for (i, area) in areas.iter().enumerate() {
        let keys: Vec<usize> = area.da.keys().copied().collect();
        let expected: Vec<usize> = (0..nn).filter(|&j| j != i).collect();
        if keys != expected {
            return Err(Error::Dimension(format!("area {i} interaction keys {keys:?}, expected {expected:?}")));
        }
    }
    let n = AREA_STATES * nn;
    let a = Matrix::block_diag(&areas.iter().map(|x| x.a.clone()).collect::<Vec<_>>());
    let b = Matrix::block_diag(&areas.iter().map(|x| x.b.clone()).collect::<Vec<_>>());
    let f = Matrix::block_diag(&areas.iter().map(|x| x.f.clone()).collect::<Vec<_>>());
    let c = Matrix::block_diag(&areas.iter().map(|x| x.c.clone()).collect::<Vec<_>>());
    let mut da = Matrix::zeros(n, n);
    for (i, area) in areas.iter().enumerate() {
        for (&j, blk) in &area.da {
            da.set_block(i * AREA_STATES, j * AREA_STATES, blk);
        }
    }
    Ok(CompositeSystem { n_areas: nn, a, b, f, c, da, areas, tie: tie.clone() })
}

/// Builds every area from its parameters and the tie-line matrix, then assembles.
pub fn build_system<T: Scalar>(params: &[AreaParams<T>], tie: &TieLineMatrix<T>) -> Result<CompositeSystem<T>> {
    if params.len() != tie.n() {
        return Err(Error::Dimension(format!("{} areas but tie-line matrix is {}x{}", params.len(), tie.n(), tie.n())));
    }
    let areas = params
        .iter()
        .enumerate()
        .map(|(i, p)| build_area(p, &tie.row_entries(i)))
        .collect::<Result<Vec<_>>>()?;
    build_composite(areas, tie)
}

/// Performance output weights `z_c = C_x x + C_e e`, block-diagonal per area.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputSelection<T> {
    pub cx: Matrix<T>,
    pub ce: Matrix<T>,
}

impl<T: Scalar> OutputSelection<T> {
    /// Validates that both matrices are n×n and block-diagonal over 5×5 area blocks.
    pub fn new(n_areas: usize, cx: Matrix<T>, ce: Matrix<T>) -> Result<Self> {
        let n = AREA_STATES * n_areas;
        for (name, m) in [("cx", &cx), ("ce", &ce)] {
            if m.shape() != (n, n) {
                return Err(Error::Dimension(format!("{name} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
            }
            m.ensure_finite(name)?;
            for i in 0..n {
                for j in 0..n {
                    if i / AREA_STATES != j / AREA_STATES && m[(i, j)] != T::zero() {
                        return Err(Error::Parameter {
                            field: name.into(),
                            reason: format!("entry ({i},{j}) couples areas; weights must be block-diagonal"),
                        });
                    }
                }
            }
        }
        Ok(Self { cx, ce })
    }

    /// Diagonal weights repeated over every area.
    pub fn from_diagonal_weights(n_areas: usize, cx_diag: &[T], ce_diag: &[T]) -> Result<Self> {
        if cx_diag.len() != AREA_STATES || ce_diag.len() != AREA_STATES {
            return Err(Error::Dimension(format!("diagonal weights need {AREA_STATES} entries per area")));
        }
        let rep = |d: &[T]| Matrix::block_diag(&vec![Matrix::diag(d); n_areas]);
        Self::new(n_areas, rep(cx_diag), rep(ce_diag))
    }

    pub fn cx_block(&self, i: usize) -> Matrix<T> {
        let o = i * AREA_STATES;
        self.cx.block(o, o, AREA_STATES, AREA_STATES)
    }

    pub fn ce_block(&self, i: usize) -> Matrix<T> {
        let o = i * AREA_STATES;
        self.ce.block(o, o, AREA_STATES, AREA_STATES)
    }
}

pub fn default_output_selection<T: Scalar>(sys: &CompositeSystem<T>) -> OutputSelection<T> {
    OutputSelection { cx: Matrix::identity(sys.n()), ce: Matrix::identity(sys.n()) }
}
