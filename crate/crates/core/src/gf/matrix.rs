use super::{Fe, Field, GfError};

/// Dense row-major matrix over a finite field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![Fe(0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fe(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Fe>>) -> Result<Matrix, GfError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(GfError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Fe> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j));
            }
        }
        m
    }
}

/// `k × n` Vandermonde matrix with column `j` equal to `(1, x_j, …, x_j^{k−1})`
/// at `x_j = j`, so any `k` columns are independent.
pub fn vandermonde(field: &Field, k: usize, n: usize) -> Result<Matrix, GfError> {
    if n as u64 > field.order() as u64 {
        return Err(GfError::TooManyPoints {
            points: n,
            order: field.order(),
        });
    }
    let mut m = Matrix::zeros(k, n);
    for j in 0..n {
        let x = Fe(j as u16);
        for i in 0..k {
            m.set(i, j, field.pow(x, i as u64));
        }
    }
    Ok(m)
}

pub fn mat_mul(field: &Field, a: &Matrix, b: &Matrix) -> Result<Matrix, GfError> {
    if a.cols != b.rows {
        return Err(GfError::DimensionMismatch(format!(
            "{}×{} times {}×{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut m = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for l in 0..a.cols {
            let x = a.get(i, l);
            if x.0 == 0 {
                continue;
            }
            for j in 0..b.cols {
                let v = field.mul_add(m.get(i, j), x, b.get(l, j));
                m.set(i, j, v);
            }
        }
    }
    Ok(m)
}

/// Gauss–Jordan inverse.
pub fn mat_inv(field: &Field, a: &Matrix) -> Result<Matrix, GfError> {
    if a.rows != a.cols {
        return Err(GfError::DimensionMismatch(format!(
            "inverse of non-square {}×{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = Matrix::identity(n);
    for c in 0..n {
        let pivot = (c..n)
            .find(|&r| m.get(r, c).0 != 0)
            .ok_or(GfError::Singular)?;
        if pivot != c {
            for j in 0..n {
                let (x, y) = (m.get(c, j), m.get(pivot, j));
                m.set(c, j, y);
                m.set(pivot, j, x);
                let (x, y) = (inv.get(c, j), inv.get(pivot, j));
                inv.set(c, j, y);
                inv.set(pivot, j, x);
            }
        }
        let scale = field.inv(m.get(c, c))?;
        for j in 0..n {
            m.set(c, j, field.mul(m.get(c, j), scale));
            inv.set(c, j, field.mul(inv.get(c, j), scale));
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let factor = m.get(r, c);
            if factor.0 == 0 {
                continue;
            }
            for j in 0..n {
                m.set(r, j, field.sub(m.get(r, j), field.mul(factor, m.get(c, j))));
                inv.set(
                    r,
                    j,
                    field.sub(inv.get(r, j), field.mul(factor, inv.get(c, j))),
                );
            }
        }
    }
    Ok(inv)
}

/// Determinant by cofactor-free elimination.
pub fn determinant(field: &Field, a: &Matrix) -> Result<Fe, GfError> {
    if a.rows != a.cols {
        return Err(GfError::DimensionMismatch(
            "determinant of non-square matrix".into(),
        ));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut det = Fe(1);
    for c in 0..n {
        let Some(pivot) = (c..n).find(|&r| m.get(r, c).0 != 0) else {
            return Ok(Fe(0));
        };
        if pivot != c {
            for j in 0..n {
                let (x, y) = (m.get(c, j), m.get(pivot, j));
                m.set(c, j, y);
                m.set(pivot, j, x);
            }
            det = field.neg(det);
        }
        let p = m.get(c, c);
        det = field.mul(det, p);
        let pinv = field.inv(p)?;
        for r in c + 1..n {
            let factor = field.mul(m.get(r, c), pinv);
            for j in c..n {
                m.set(r, j, field.sub(m.get(r, j), field.mul(factor, m.get(c, j))));
            }
        }
    }
    Ok(det)
}
