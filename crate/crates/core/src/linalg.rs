//! Exact linear algebra over the rationals: reduced row echelon form,
//! kernels, images, solving, and span membership. Dimensions here are
//! desk-scale, so plain Gaussian elimination with exact pivots is the
//! right tool.

use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use num::Zero;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>, // row-major
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            entries: vec![rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Columns given as vectors.
    pub fn from_cols(cols: Vec<Vec<Rat>>) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        assert!(cols.iter().all(|x| x.len() == r), "ragged columns");
        Self::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Rat> {
        (0..self.cols).map(|j| self[(i, j)].clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut m = QMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = &self[(i, k)] * &other[(k, j)];
                    m[(i, j)] += t;
                }
            }
        }
        Ok(m)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * vec[{}]",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![rat::zero(); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self[(i, j)].is_zero() && !v[j].is_zero() {
                    out[i] += &self[(i, j)] * &v[j];
                }
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form together with the pivot column indices.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = {
                let piv = m[(row, col)].clone();
                rat::one() / piv
            };
            for j in col..m.cols {
                let t = &m[(row, j)] * &inv;
                m[(row, j)] = t;
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let factor = m[(r, col)].clone();
                    for j in col..m.cols {
                        let t = &m[(row, j)] * &factor;
                        m[(r, j)] -= t;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{ v : M v = 0 }`, one vector per non-pivot column.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let (r, pivots) = self.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row_idx, &c) in pivots.iter().enumerate() {
                v[c] = Some(row_idx);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut v = vec![rat::zero(); self.cols];
            v[free] = rat::one();
            for (col, &ps) in pivot_set.iter().enumerate() {
                if let Some(row_idx) = ps {
                    v[col] = -r[(row_idx, free)].clone();
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the column space: the pivot columns of the original matrix.
    pub fn image_basis(&self) -> Vec<Vec<Rat>> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&c| self.col(c)).collect()
    }

    /// One exact solution of `M x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Rat]) -> Result<Option<Vec<Rat>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve: {}x{} with rhs[{}]",
                self.rows,
                self.cols,
                b.len()
            )));
        }
        // Eliminate on the augmented matrix.
        let mut aug = QMatrix::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return Ok(None); // pivot in the constants column
        }
        let mut x = vec![rat::zero(); self.cols];
        for (row_idx, &c) in pivots.iter().enumerate() {
            x[c] = r[(row_idx, self.cols)].clone();
        }
        Ok(Some(x))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.entries[i * self.cols + j]
    }
}

/// Exact membership of `v` in the span of `basis`.
pub fn in_span(v: &[Rat], basis: &[Vec<Rat>]) -> bool {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero());
    }
    let m = QMatrix::from_cols(basis.to_vec());
    matches!(m.solve(v), Ok(Some(_)))
}

/// A subspace of Q^n held in reduced row form, supporting exact membership
/// tests and canonical coset representatives (pivot coordinates cleared).
#[derive(Debug, Clone)]
pub struct Subspace {
    dim_ambient: usize,
    rref_rows: Vec<Vec<Rat>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn from_spanning(dim_ambient: usize, vectors: &[Vec<Rat>]) -> Self {
        for v in vectors {
            assert_eq!(v.len(), dim_ambient, "spanning vector of wrong length");
        }
        if vectors.is_empty() {
            return Subspace {
                dim_ambient,
                rref_rows: Vec::new(),
                pivots: Vec::new(),
            };
        }
        let m = QMatrix::from_rows(vectors.to_vec());
        let (r, pivots) = m.rref();
        let rref_rows = (0..pivots.len()).map(|i| r.row(i)).collect();
        Subspace {
            dim_ambient,
            rref_rows,
            pivots,
        }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim_ambient
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Canonical representative of `v + W`: subtract rref rows so all pivot
    /// coordinates vanish.
    pub fn reduce(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.dim_ambient);
        let mut out = v.to_vec();
        for (row, &p) in self.rref_rows.iter().zip(&self.pivots) {
            if out[p].is_zero() {
                continue;
            }
            let c = out[p].clone();
            for (o, r) in out.iter_mut().zip(row) {
                *o -= &c * r;
            }
        }
        out
    }

    /// Non-pivot coordinate positions; the canonical complement of the
    /// subspace is spanned by these standard basis vectors.
    pub fn complement_coords(&self) -> Vec<usize> {
        (0..self.dim_ambient)
            .filter(|i| !self.pivots.contains(i))
            .collect()
    }
}
