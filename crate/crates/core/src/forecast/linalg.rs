use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Precondition("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub(crate) fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn mul_vec(&self, w: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), w)).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least squares `min ||A w - b||` by Householder QR, for a tall matrix
/// given column-major as `cols[j][i]`.
///
/// Fails with [`Error::RankDeficient`] when a diagonal entry of R collapses
/// below `rows * eps * max|R_ii|`.
pub(crate) fn lstsq_qr(mut cols: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let d = cols.len();
    let m = b.len();
    if d == 0 {
        return Ok(Vec::new());
    }
    if m < d {
        return Err(Error::RankDeficient {
            column: m,
            pivot: 0.0,
        });
    }
    let mut diag = vec![0.0; d];
    for k in 0..d {
        let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, stored in place of column k below the diagonal.
        cols[k][k] -= alpha;
        let vnorm2: f64 = cols[k][k..].iter().map(|v| v * v).sum();
        diag[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let (head, tail) = cols.split_at_mut(k + 1);
        let v = &head[k][k..];
        for c in tail.iter_mut() {
            let s = 2.0 * dot(v, &c[k..]) / vnorm2;
            for (ci, vi) in c[k..].iter_mut().zip(v) {
                *ci -= s * vi;
            }
        }
        let s = 2.0 * dot(v, &b[k..]) / vnorm2;
        for (bi, vi) in b[k..].iter_mut().zip(v) {
            *bi -= s * vi;
        }
    }

    let scale = diag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = scale * m as f64 * f64::EPSILON;
    for (j, r) in diag.iter().enumerate() {
        if r.abs() <= tol {
            return Err(Error::RankDeficient {
                column: j,
                pivot: *r,
            });
        }
    }

    // Back substitution on R (upper triangle lives in cols[j][i], i < j).
    let mut w = vec![0.0; d];
    for i in (0..d).rev() {
        let mut acc = b[i];
        for j in i + 1..d {
            acc -= cols[j][i] * w[j];
        }
        w[i] = acc / diag[i];
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_system() {
        // [[2,1],[1,3]] w = [3,5] -> w = [0.8, 1.4]
        let cols = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let w = lstsq_qr(cols, vec![3.0, 5.0]).unwrap();
        assert!((w[0] - 0.8).abs() < 1e-14);
        assert!((w[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn collinear_columns_are_rank_deficient() {
        let cols = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        assert!(matches!(
            lstsq_qr(cols, vec![1.0, 2.0, 3.0]),
            Err(Error::RankDeficient { column: 1, .. })
        ));
    }
}
