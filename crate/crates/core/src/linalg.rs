//! Exact rational linear algebra: reduced row echelon form, kernels and
//! affine solution sets.

use num::{BigInt, BigRational, One, Zero};

use crate::domain::Rational;

pub type Q = BigRational;

pub fn q(r: &Rational) -> Q {
    Q::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Dense row-major matrix over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<Q>>) -> Self {
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), cols, "row {i} has the wrong width");
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, i64)>) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for (i, j, v) in entries {
            let cur = m.get(i).get(j).cloned().unwrap_or_else(Q::zero);
            m.set(i, j, cur + q_int(v));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[Q]) -> Vec<Q> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.get(i).iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&i| !self.data[i * self.cols + col].is_zero()) else { continue };
            self.swap_rows(row, p);
            let inv = self.data[row * self.cols + col].recip();
            if !inv.is_one() {
                for j in col..self.cols {
                    let v = &self.data[row * self.cols + j] * &inv;
                    self.data[row * self.cols + j] = v;
                }
            }
            let pivot_row: Vec<Q> = self.get(row)[col..].to_vec();
            for i in 0..self.rows {
                if i == row {
                    continue;
                }
                let factor = self.data[i * self.cols + col].clone();
                if factor.is_zero() {
                    continue;
                }
                for (k, pv) in pivot_row.iter().enumerate() {
                    if !pv.is_zero() {
                        let idx = i * self.cols + col + k;
                        let v = &self.data[idx] - &factor * pv;
                        self.data[idx] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{ x : A x = 0 }`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let mut r = self.clone();
        let pivots = r.rref();
        kernel_from_rref(&r, &pivots)
    }
}

fn kernel_from_rref(r: &Matrix, pivots: &[usize]) -> Vec<Vec<Q>> {
    let mut is_pivot = vec![false; r.cols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..r.cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![Q::zero(); r.cols];
            v[f] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(i)[f].clone();
            }
            v
        })
        .collect()
}

/// `point + span(directions)`; directions are kept in reduced echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSpace {
    pub point: Vec<Q>,
    directions: Matrix,
    pivots: Vec<usize>,
}

impl AffineSpace {
    pub fn new(point: Vec<Q>, directions: &[Vec<Q>]) -> Self {
        let dim = point.len();
        let mut m = Matrix::from_rows(dim, directions.to_vec());
        let pivots = m.rref();
        let rows = pivots.len();
        let basis: Vec<Vec<Q>> = (0..rows).map(|i| m.get(i).to_vec()).collect();
        AffineSpace { point, directions: Matrix::from_rows(dim, basis), pivots }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn directions(&self) -> Vec<Vec<Q>> {
        (0..self.directions.rows()).map(|i| self.directions.get(i).to_vec()).collect()
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        if x.len() != self.point.len() {
            return false;
        }
        let mut residual: Vec<Q> = x.iter().zip(&self.point).map(|(a, b)| a - b).collect();
        for (i, &p) in self.pivots.iter().enumerate() {
            let factor = residual[p].clone();
            if factor.is_zero() {
                continue;
            }
            for (r, d) in residual.iter_mut().zip(self.directions.get(i)) {
                *r -= &factor * d;
            }
        }
        residual.iter().all(Zero::is_zero)
    }

    /// The image under coordinate projection onto `coords`.
    pub fn project(&self, coords: &[usize]) -> AffineSpace {
        let point = coords.iter().map(|&c| self.point[c].clone()).collect();
        let dirs: Vec<Vec<Q>> =
            self.directions().iter().map(|d| coords.iter().map(|&c| d[c].clone()).collect()).collect();
        AffineSpace::new(point, &dirs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Inconsistent,
    Affine(AffineSpace),
}

/// Solves `A x = b` exactly.
pub fn solve(a: &Matrix, b: &[Q]) -> Solution {
    assert_eq!(a.rows(), b.len());
    let cols = a.cols();
    let mut aug = Matrix::zeros(a.rows(), cols + 1);
    for (i, bi) in b.iter().enumerate() {
        for j in 0..cols {
            aug.set(i, j, a.get(i)[j].clone());
        }
        aug.set(i, cols, bi.clone());
    }
    let pivots = aug.rref();
    if pivots.last() == Some(&cols) {
        return Solution::Inconsistent;
    }
    let mut point = vec![Q::zero(); cols];
    for (i, &p) in pivots.iter().enumerate() {
        point[p] = aug.get(i)[cols].clone();
    }
    let mut coef = Matrix::zeros(aug.rows(), cols);
    for i in 0..aug.rows() {
        for j in 0..cols {
            coef.set(i, j, aug.get(i)[j].clone());
        }
    }
    let kernel = kernel_from_rref(&coef, &pivots);
    Solution::Affine(AffineSpace::new(point, &kernel))
}

/// Whether `target` is a linear combination of `vectors`.
pub fn in_span(vectors: &[Vec<Q>], target: &[Q]) -> bool {
    let zero = vec![Q::zero(); target.len()];
    AffineSpace::new(zero, vectors).contains(target)
}

pub fn is_zero_vector(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}
