//! Dense linear algebra over Q(zeta_N). Sizes here are small (tens of rows).

use crate::cyclotomic::Cyclotomic;

pub type Vector = Vec<Cyclotomic>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    order: u32,
    rows: usize,
    cols: usize,
    data: Vec<Cyclotomic>,
}

impl Matrix {
    pub fn zeros(order: u32, rows: usize, cols: usize) -> Self {
        Self { order, rows, cols, data: vec![Cyclotomic::zero(order); rows * cols] }
    }

    pub fn identity(order: u32, n: usize) -> Self {
        let mut m = Self::zeros(order, n, n);
        for i in 0..n {
            m.set(i, i, Cyclotomic::one(order));
        }
        m
    }

    pub fn from_rows(order: u32, rows: Vec<Vector>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Self { order, rows: r, cols: c, data }
    }

    pub fn from_columns(order: u32, rows: usize, cols: &[Vector]) -> Self {
        let mut m = Self::zeros(order, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Cyclotomic {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cyclotomic) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.order, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + &(a * b);
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Cyclotomic]) -> Vector {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Cyclotomic::zero(self.order);
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = &acc + &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(other.data.iter()).map(|(a, b)| a - b).collect();
        Matrix { data, ..self.clone() }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(other.data.iter()).map(|(a, b)| a + b).collect();
        Matrix { data, ..self.clone() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.order, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self.get(r, c).inverse().expect("nonzero pivot");
            for j in c..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in c..self.cols {
                    let pv = self.get(r, j);
                    if pv.is_zero() {
                        continue;
                    }
                    let v = self.get(i, j) - &(&f * pv);
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel.
    pub fn nullspace(&self) -> Vec<Vector> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Cyclotomic::zero(self.order); self.cols];
                v[f] = Cyclotomic::one(self.order);
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m.get(r, f);
                }
                v
            })
            .collect()
    }

    /// Solve `self * x = b` for one solution, if any.
    pub fn solve(&self, b: &[Cyclotomic]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.order, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![Cyclotomic::zero(self.order); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    pub fn trace(&self) -> Cyclotomic {
        (0..self.rows.min(self.cols))
            .fold(Cyclotomic::zero(self.order), |acc, i| &acc + self.get(i, i))
    }
}

/// Rank of a list of vectors (as rows).
pub fn rank_of(order: u32, vectors: &[Vector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(order, vectors.to_vec()).rank()
}

/// Basis of the intersection of the kernels of several square matrices.
pub fn common_kernel(order: u32, mats: &[Matrix]) -> Vec<Vector> {
    let Some(first) = mats.first() else {
        return Vec::new();
    };
    let n = first.cols();
    let mut stacked = Vec::with_capacity(mats.len() * first.rows());
    for m in mats {
        for i in 0..m.rows() {
            stacked.push(m.row(i));
        }
    }
    if stacked.is_empty() {
        return (0..n)
            .map(|k| {
                let mut v = vec![Cyclotomic::zero(order); n];
                v[k] = Cyclotomic::one(order);
                v
            })
            .collect();
    }
    Matrix::from_rows(order, stacked).nullspace()
}

/// Dimension of {X : X A = A X for all A in `mats`}.
pub fn commutant_dimension(order: u32, mats: &[Matrix]) -> usize {
    let n = mats.first().map_or(0, |m| m.rows());
    // Unknown X[i][k] at index i*n + k; equation (XA - AX)[i][j] = 0.
    let mut rows = Vec::new();
    for a in mats {
        for i in 0..n {
            for j in 0..n {
                let mut eq = vec![Cyclotomic::zero(order); n * n];
                for k in 0..n {
                    let akj = a.get(k, j);
                    if !akj.is_zero() {
                        eq[i * n + k] = &eq[i * n + k] + akj;
                    }
                    let aik = a.get(i, k);
                    if !aik.is_zero() {
                        eq[k * n + j] = &eq[k * n + j] - aik;
                    }
                }
                if eq.iter().any(|e| !e.is_zero()) {
                    rows.push(eq);
                }
            }
        }
    }
    if rows.is_empty() {
        return n * n;
    }
    n * n - Matrix::from_rows(order, rows).rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Cyclotomic {
        Cyclotomic::from_integer(4, v)
    }

    #[test]
    fn rank_and_nullspace() {
        let m = Matrix::from_rows(4, vec![vec![int(1), int(2), int(3)], vec![int(2), int(4), int(6)]]);
        assert_eq!(m.rank(), 1);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(m.apply(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solve_with_complex_entries() {
        let i = Cyclotomic::root_of_unity(4, 1);
        let m = Matrix::from_rows(4, vec![vec![int(1), i.clone()], vec![-&i, int(1)]]);
        // singular: det = 1 - (i)(-i) = 1 - 1 = 0
        assert_eq!(m.rank(), 1);
        let b = vec![int(1), -&i];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
        assert!(m.solve(&[int(1), int(1)]).is_none());
    }

    #[test]
    fn commutant_of_scalar_and_swap() {
        let swap = Matrix::from_rows(4, vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
        assert_eq!(commutant_dimension(4, std::slice::from_ref(&swap)), 2);
        let diag = Matrix::from_rows(4, vec![vec![int(1), int(0)], vec![int(0), int(-1)]]);
        assert_eq!(commutant_dimension(4, &[swap, diag]), 1);
    }
}
