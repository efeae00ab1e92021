//! Row-major dense real matrices acting on complex vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let (mut re, mut im) = (0.0, 0.0);
            for (a, z) in row.iter().zip(x) {
                re += a * z.re;
                im += a * z.im;
            }
            *o = Complex64::new(re, im);
        }
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Inverse by LU with partial pivoting; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let m = DMatrix::from_row_slice(self.rows, self.cols, &self.data);
        let inv = m.lu().try_inverse()?;
        Some(Self::from_fn(self.rows, self.cols, |i, j| inv[(i, j)]))
    }

    /// max |(self · other − I)_{ij}|.
    pub fn identity_defect(&self, other: &Self) -> f64 {
        let a = DMatrix::from_row_slice(self.rows, self.cols, &self.data);
        let b = DMatrix::from_row_slice(other.rows, other.cols, &other.data);
        let p = a * b;
        let mut worst: f64 = 0.0;
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - e).abs());
            }
        }
        worst
    }
}
