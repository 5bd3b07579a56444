use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numlin::Matrix;
use crate::scalar::Scalar;

use super::layout::{RectId, SymId, VariableLayout};

/// Sparse entries `(row, col, value)`.
pub type Entries<T> = Vec<(usize, usize, T)>;

fn merge<T: Scalar>(mut e: Entries<T>) -> Entries<T> {
    e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Entries<T> = Vec::with_capacity(e.len());
    for (r, c, v) in e {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 = last.2 + v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|&(_, _, v)| v != T::zero());
    out
}

/// Matrix-valued affine expression `C + Σ_k x_k·S_k` with sparse `S_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMatrix<T> {
    rows: usize,
    cols: usize,
    constant: Matrix<T>,
    terms: BTreeMap<usize, Entries<T>>,
}

impl<T: Scalar> AffineMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, constant: Matrix::zeros(rows, cols), terms: BTreeMap::new() }
    }

    pub fn constant(m: Matrix<T>) -> Self {
        Self { rows: m.rows(), cols: m.cols(), constant: m, terms: BTreeMap::new() }
    }

    /// The symmetric matrix variable of block `id`.
    pub fn sym_var(layout: &VariableLayout, id: SymId) -> Self {
        let d = layout.sym_dim(id);
        let mut out = Self::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let k = layout.sym_index(id, i, j);
                let mut e = vec![(i, j, T::one())];
                if i != j {
                    e.push((j, i, T::one()));
                }
                out.terms.insert(k, e);
            }
        }
        out
    }

    /// The rectangular matrix variable of block `id`.
    pub fn rect_var(layout: &VariableLayout, id: RectId) -> Self {
        let (r, c) = layout.rect_dims(id);
        let mut out = Self::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                out.terms.insert(layout.rect_index(id, i, j), vec![(i, j, T::one())]);
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn constant_part(&self) -> &Matrix<T> {
        &self.constant
    }

    pub fn terms(&self) -> &BTreeMap<usize, Entries<T>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.max_abs() == T::zero()
    }

    /// `M · self`.
    pub fn left_mul(&self, m: &Matrix<T>) -> Self {
        assert_eq!(m.cols(), self.rows, "left_mul dimension mismatch");
        let mut terms = BTreeMap::new();
        for (&k, e) in &self.terms {
            let mut out = Vec::new();
            for &(r, c, v) in e {
                for a in 0..m.rows() {
                    let w = m[(a, r)];
                    if w != T::zero() {
                        out.push((a, c, w * v));
                    }
                }
            }
            let out = merge(out);
            if !out.is_empty() {
                terms.insert(k, out);
            }
        }
        Self { rows: m.rows(), cols: self.cols, constant: m.matmul(&self.constant), terms }
    }

    /// `self · M`.
    pub fn right_mul(&self, m: &Matrix<T>) -> Self {
        assert_eq!(self.cols, m.rows(), "right_mul dimension mismatch");
        let mut terms = BTreeMap::new();
        for (&k, e) in &self.terms {
            let mut out = Vec::new();
            for &(r, c, v) in e {
                for b in 0..m.cols() {
                    let w = m[(c, b)];
                    if w != T::zero() {
                        out.push((r, b, v * w));
                    }
                }
            }
            let out = merge(out);
            if !out.is_empty() {
                terms.insert(k, out);
            }
        }
        Self { rows: self.rows, cols: m.cols(), constant: self.constant.matmul(m), terms }
    }

    pub fn transpose(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&k, e)| (k, merge(e.iter().map(|&(r, c, v)| (c, r, v)).collect())))
            .collect();
        Self { rows: self.cols, cols: self.rows, constant: self.constant.transpose(), terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "affine add dimension mismatch");
        let mut terms = self.terms.clone();
        for (&k, e) in &other.terms {
            let slot = terms.entry(k).or_default();
            slot.extend_from_slice(e);
        }
        let terms = terms.into_iter().map(|(k, e)| (k, merge(e))).filter(|(_, e)| !e.is_empty()).collect();
        Self { rows: self.rows, cols: self.cols, constant: &self.constant + &other.constant, terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn scale(&self, s: T) -> Self {
        let terms = if s == T::zero() {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(&k, e)| (k, e.iter().map(|&(r, c, v)| (r, c, v * s)).collect())).collect()
        };
        Self { rows: self.rows, cols: self.cols, constant: self.constant.scale(s), terms }
    }

    /// `X + Xᵀ`.
    pub fn he(&self) -> Self {
        self.add(&self.transpose())
    }

    pub fn eval(&self, x: &[T]) -> Matrix<T> {
        let mut m = self.constant.clone();
        for (&k, e) in &self.terms {
            let xk = x[k];
            for &(r, c, v) in e {
                m[(r, c)] = m[(r, c)] + xk * v;
            }
        }
        m
    }
}

/// Symmetric affine matrix function `F(x) = F₀ + Σ_k x_k F_k`, required ≺ 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLmi<T> {
    pub name: String,
    pub dim: usize,
    pub constant: Matrix<T>,
    /// `(variable index, full symmetric entry list)`, sorted by variable.
    pub coeffs: Vec<(usize, Entries<T>)>,
}

impl<T: Scalar> AffineLmi<T> {
    /// Validates symmetry of constant and basis matrices.
    pub fn new(name: impl Into<String>, expr: AffineMatrix<T>) -> Result<Self> {
        let name = name.into();
        if expr.rows != expr.cols {
            return Err(Error::Dimension(format!("LMI `{name}` is {}x{}", expr.rows, expr.cols)));
        }
        let tol = T::tol(1e-12);
        let asym = expr.constant.asymmetry();
        if asym > tol {
            return Err(Error::Asymmetric { asymmetry: asym.to_f64_lossy() });
        }
        let mut coeffs = Vec::with_capacity(expr.terms.len());
        for (k, e) in expr.terms {
            let dense: BTreeMap<(usize, usize), T> = e.iter().map(|&(r, c, v)| ((r, c), v)).collect();
            let scale = e.iter().fold(T::zero(), |m, &(_, _, v)| m.max(v.abs()));
            for (&(r, c), &v) in &dense {
                let w = dense.get(&(c, r)).copied().unwrap_or(T::zero());
                if (v - w).abs() > tol * scale {
                    return Err(Error::Asymmetric { asymmetry: ((v - w).abs() / scale).to_f64_lossy() });
                }
            }
            coeffs.push((k, e));
        }
        Ok(Self { name, dim: expr.rows, constant: expr.constant.symmetrize(), coeffs })
    }

    pub fn eval(&self, x: &[T]) -> Matrix<T> {
        let mut m = self.constant.clone();
        for (k, e) in &self.coeffs {
            let xk = x[*k];
            for &(r, c, v) in e {
                m[(r, c)] = m[(r, c)] + xk * v;
            }
        }
        m
    }

    /// Every constant and coefficient entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            name: self.name.clone(),
            dim: self.dim,
            constant: self.constant.scale(alpha),
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, e)| (*k, e.iter().map(|&(r, c, v)| (r, c, v * alpha)).collect()))
                .collect(),
        }
    }

    pub fn max_coeff_abs(&self) -> T {
        self.coeffs.iter().flat_map(|(_, e)| e.iter()).fold(T::zero(), |m, &(_, _, v)| m.max(v.abs()))
    }

    pub fn max_var_index(&self) -> Option<usize> {
        self.coeffs.iter().map(|(k, _)| *k).max()
    }
}

/// Assembles a symmetric block matrix from its upper-triangular blocks.
pub struct BlockLmiBuilder<T> {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    blocks: BTreeMap<(usize, usize), AffineMatrix<T>>,
}

impl<T: Scalar> BlockLmiBuilder<T> {
    pub fn new(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in sizes {
            offsets.push(acc);
            acc += s;
        }
        Self { sizes: sizes.to_vec(), offsets, blocks: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Sets block `(i, j)` with `i <= j`; the lower block is its transpose.
    pub fn set(&mut self, i: usize, j: usize, block: AffineMatrix<T>) -> Result<()> {
        if i > j || j >= self.sizes.len() {
            return Err(Error::Dimension(format!("block ({i},{j}) is not in the upper triangle")));
        }
        if block.rows() != self.sizes[i] || block.cols() != self.sizes[j] {
            return Err(Error::Dimension(format!(
                "block ({i},{j}) is {}x{}, expected {}x{}",
                block.rows(),
                block.cols(),
                self.sizes[i],
                self.sizes[j]
            )));
        }
        self.blocks.insert((i, j), block);
        Ok(())
    }

    pub fn build(self, name: impl Into<String>) -> Result<AffineLmi<T>> {
        let d = self.dim();
        let mut constant = Matrix::zeros(d, d);
        let mut terms: BTreeMap<usize, Entries<T>> = BTreeMap::new();
        for (&(i, j), blk) in &self.blocks {
            let (ro, co) = (self.offsets[i], self.offsets[j]);
            let c = blk.constant_part();
            for r in 0..blk.rows() {
                for s in 0..blk.cols() {
                    let v = c[(r, s)];
                    if v != T::zero() {
                        constant[(ro + r, co + s)] = v;
                        if i != j {
                            constant[(co + s, ro + r)] = v;
                        }
                    }
                }
            }
            for (&k, e) in blk.terms() {
                let slot = terms.entry(k).or_default();
                for &(r, s, v) in e {
                    slot.push((ro + r, co + s, v));
                    if i != j {
                        slot.push((co + s, ro + r, v));
                    }
                }
            }
        }
        let mut expr = AffineMatrix::constant(constant);
        expr.terms = terms.into_iter().map(|(k, e)| (k, merge(e))).filter(|(_, e)| !e.is_empty()).collect();
        AffineLmi::new(name, expr)
    }
}

/// Block-diagonal matrix expression from per-block expressions.
pub fn affine_block_diag<T: Scalar>(blocks: &[AffineMatrix<T>]) -> AffineMatrix<T> {
    let rows = blocks.iter().map(|b| b.rows()).sum();
    let cols = blocks.iter().map(|b| b.cols()).sum();
    let mut constant = Matrix::zeros(rows, cols);
    let mut terms: BTreeMap<usize, Entries<T>> = BTreeMap::new();
    let (mut ro, mut co) = (0, 0);
    for b in blocks {
        constant.set_block(ro, co, b.constant_part());
        for (&k, e) in b.terms() {
            terms.entry(k).or_default().extend(e.iter().map(|&(r, c, v)| (ro + r, co + c, v)));
        }
        ro += b.rows();
        co += b.cols();
    }
    let mut out = AffineMatrix::constant(constant);
    out.terms = terms.into_iter().map(|(k, e)| (k, merge(e))).collect();
    out
}
