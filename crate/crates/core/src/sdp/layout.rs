use crate::numlin::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RectId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymBlock {
    pub name: String,
    pub dim: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectBlock {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

/// Maps structured decision blocks onto a flat scalar vector.
///
/// Symmetric blocks store their upper triangle row by row; rectangular blocks
/// are row-major. Offsets follow insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableLayout {
    sym: Vec<SymBlock>,
    rect: Vec<RectBlock>,
    count: usize,
}

impl VariableLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sym(&mut self, name: impl Into<String>, dim: usize) -> SymId {
        self.sym.push(SymBlock { name: name.into(), dim, offset: self.count });
        self.count += dim * (dim + 1) / 2;
        SymId(self.sym.len() - 1)
    }

    pub fn add_rect(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> RectId {
        self.rect.push(RectBlock { name: name.into(), rows, cols, offset: self.count });
        self.count += rows * cols;
        RectId(self.rect.len() - 1)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sym_blocks(&self) -> &[SymBlock] {
        &self.sym
    }

    pub fn rect_blocks(&self) -> &[RectBlock] {
        &self.rect
    }

    pub fn sym_dim(&self, id: SymId) -> usize {
        self.sym[id.0].dim
    }

    pub fn rect_dims(&self, id: RectId) -> (usize, usize) {
        let b = &self.rect[id.0];
        (b.rows, b.cols)
    }

    /// Scalar index of entry `(i, j)` (either triangle) of a symmetric block.
    pub fn sym_index(&self, id: SymId, i: usize, j: usize) -> usize {
        let b = &self.sym[id.0];
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        assert!(j < b.dim, "symmetric index out of range");
        // rows 0..i hold dim + (dim-1) + ... + (dim-i+1) entries
        b.offset + i * b.dim - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn rect_index(&self, id: RectId, i: usize, j: usize) -> usize {
        let b = &self.rect[id.0];
        assert!(i < b.rows && j < b.cols, "rectangular index out of range");
        b.offset + i * b.cols + j
    }

    pub fn extract_sym<T: Scalar>(&self, id: SymId, x: &[T]) -> Matrix<T> {
        let d = self.sym_dim(id);
        Matrix::from_fn(d, d, |i, j| x[self.sym_index(id, i, j)])
    }

    pub fn extract_rect<T: Scalar>(&self, id: RectId, x: &[T]) -> Matrix<T> {
        let (r, c) = self.rect_dims(id);
        Matrix::from_fn(r, c, |i, j| x[self.rect_index(id, i, j)])
    }

    pub fn sym_by_name(&self, name: &str) -> Option<SymId> {
        self.sym.iter().position(|b| b.name == name).map(SymId)
    }

    pub fn rect_by_name(&self, name: &str) -> Option<RectId> {
        self.rect.iter().position(|b| b.name == name).map(RectId)
    }
}
