//! Structured LMI feasibility: find `x` with every `F_k(x) ≺ 0`.

mod affine;
mod layout;
mod solver;

use std::io::Write;

pub use affine::{affine_block_diag, AffineLmi, AffineMatrix, BlockLmiBuilder, Entries};
pub use layout::{RectBlock, RectId, SymBlock, SymId, VariableLayout};
pub use solver::{solve_feasibility, InfeasibleReport, LmiSolution, SolveOutcome, SolverOptions};

use crate::error::{Error, Result};
use crate::numlin::{eig, Matrix};
use crate::scalar::Scalar;

/// Default positive-definiteness floor on symmetric decision blocks.
pub const DEFAULT_PD_FLOOR: f64 = 1e-6;

/// LMIs over a variable layout, each required negative definite, plus
/// `Z ⪰ δI` for every symmetric block.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityProblem<T> {
    pub layout: VariableLayout,
    pub lmis: Vec<AffineLmi<T>>,
    pub pd_floor: T,
}

impl<T: Scalar> FeasibilityProblem<T> {
    pub fn new(layout: VariableLayout, lmis: Vec<AffineLmi<T>>, pd_floor: T) -> Result<Self> {
        if !(pd_floor >= T::zero()) {
            return Err(Error::Parameter { field: "pd_floor".into(), reason: format!("must be >= 0, got {pd_floor}") });
        }
        for l in &lmis {
            if let Some(k) = l.max_var_index() {
                if k >= layout.count() {
                    return Err(Error::Dimension(format!(
                        "LMI `{}` references variable {k}, layout has {}",
                        l.name,
                        layout.count()
                    )));
                }
            }
        }
        Ok(Self { layout, lmis, pd_floor })
    }

    /// `δI − Z ≺ 0` for each symmetric block.
    pub fn floor_lmis(&self) -> Vec<AffineLmi<T>> {
        self.layout
            .sym_blocks()
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let z = AffineMatrix::sym_var(&self.layout, SymId(i));
                let expr = AffineMatrix::constant(Matrix::identity(b.dim).scale(self.pd_floor)).sub(&z);
                AffineLmi::new(format!("floor:{}", b.name), expr).expect("floor LMI is symmetric")
            })
            .collect()
    }

    /// User LMIs followed by the floor LMIs.
    pub fn all_lmis(&self) -> Vec<AffineLmi<T>> {
        let mut v = self.lmis.clone();
        v.extend(self.floor_lmis());
        v
    }
}

/// λ_max of every LMI (user LMIs then floors), from dense assembly and `eig`.
pub fn evaluate_residuals<T: Scalar>(p: &FeasibilityProblem<T>, x: &[T]) -> Result<Vec<(String, T)>> {
    if x.len() != p.layout.count() {
        return Err(Error::Dimension(format!("decision vector has {} entries, layout has {}", x.len(), p.layout.count())));
    }
    p.all_lmis()
        .iter()
        .map(|l| {
            let f = l.eval(x).symmetrize();
            Ok((l.name.clone(), eig(&f)?.max_real()))
        })
        .collect()
}

/// Writes the problem as one line per nonzero: `lmi var row col value`.
///
/// Variable index 0 is the constant term, index `k+1` is scalar `x_k`. Only
/// the upper triangle (`row <= col`) is written; indices are 0-based.
pub fn write_sparse_dump<T: Scalar, W: Write>(p: &FeasibilityProblem<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# declfc sparse-lmi format-version 1")?;
    writeln!(w, "# variables {}", p.layout.count())?;
    let lmis = p.all_lmis();
    for (i, l) in lmis.iter().enumerate() {
        writeln!(w, "# lmi {i} {} dim {}", l.name, l.dim)?;
    }
    for (i, l) in lmis.iter().enumerate() {
        for r in 0..l.dim {
            for c in r..l.dim {
                let v = l.constant[(r, c)];
                if v != T::zero() {
                    writeln!(w, "{i} 0 {r} {c} {:e}", v.to_f64_lossy())?;
                }
            }
        }
        for (k, e) in &l.coeffs {
            for &(r, c, v) in e {
                if r <= c {
                    writeln!(w, "{i} {} {r} {c} {:e}", k + 1, v.to_f64_lossy())?;
                }
            }
        }
    }
    Ok(())
}
