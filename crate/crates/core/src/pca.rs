//! Principal components of a (standardized) feature matrix.
//!
//! The sample covariance (divisor `n − 1`) is diagonalised with cyclic
//! Jacobi rotations. Components are sorted by descending eigenvalue and
//! each is signed so that its largest-magnitude loading is positive.

use alloc::vec::Vec;
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::{Error, Result};

pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Unsorted eigenvalues.
    pub values: Vec<f64>,
    /// Column `j` is the eigenvector for `values[j]`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Stops once the off-diagonal Frobenius norm falls below
/// `tolerance · ‖A‖_F`, or after `max_sweeps` full sweeps.
pub fn jacobi_eigen(a: &Matrix, tolerance: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::DimensionMismatch { expected: n, got: a.cols() });
    }
    let mut a = a.clone();
    let mut v = Matrix::identity(n);
    let total: f64 = a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = tolerance * total.max(f64::MIN_POSITIVE);
    let off_norm = |a: &Matrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while sweeps < max_sweeps && off_norm(&a) > threshold {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok(SymmetricEigen { values, vectors: v, sweeps })
}

/// Sample covariance of the columns of `x` (divisor `rows − 1`).
pub fn covariance(x: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if x.rows() < 2 {
        return Err(Error::TooFewRows { need: 2, got: x.rows() });
    }
    let (n, d) = (x.rows(), x.cols());
    let mut means = alloc::vec![0.0; d];
    for row in x.iter_rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix::zeros(d, d);
    let mut centred = alloc::vec![0.0; d];
    for row in x.iter_rows() {
        for ((c, v), m) in centred.iter_mut().zip(row).zip(&means) {
            *c = v - m;
        }
        for i in 0..d {
            let ci = centred[i];
            for j in i..d {
                cov[(i, j)] += ci * centred[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((means, cov))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Column means of the matrix the model was fit on.
    pub means: Vec<f64>,
    /// Row `j` is the `j`-th principal axis.
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn fit(x: &Matrix) -> Result<Self> {
        let (means, cov) = covariance(x)?;
        let d = cov.rows();
        let eig = jacobi_eigen(&cov, JACOBI_TOLERANCE, JACOBI_MAX_SWEEPS)?;
        let mut order: Vec<usize> = (0..d).collect();
        // Stable sort keeps original column order among equal eigenvalues.
        order.sort_by(|&i, &j| eig.values[j].total_cmp(&eig.values[i]));
        let mut components = Matrix::zeros(d, d);
        let mut explained_variance = Vec::with_capacity(d);
        for (r, &j) in order.iter().enumerate() {
            let col = eig.vectors.column(j);
            let pivot = col.iter().copied().fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for (k, v) in col.iter().enumerate() {
                components[(r, k)] = sign * v;
            }
            explained_variance.push(eig.values[j]);
        }
        Ok(Self { means, components, explained_variance })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.explained_variance.iter().map(|v| v.max(0.0)).sum();
        self.explained_variance.iter().map(|v| if total > 0.0 { v.max(0.0) / total } else { 0.0 }).collect()
    }

    fn check_components(&self, n_components: usize) -> Result<()> {
        if n_components == 0 || n_components > self.dim() {
            return Err(Error::ComponentsOutOfRange { got: n_components, max: self.dim() });
        }
        Ok(())
    }

    pub fn project_row(&self, row: &[f64], n_components: usize, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate().take(n_components) {
            *o = self.components.row(j).iter().zip(row).zip(&self.means).map(|((c, v), m)| c * (v - m)).sum();
        }
    }

    /// Scores of each row on the leading `n_components` axes.
    pub fn project(&self, x: &Matrix, n_components: usize) -> Result<Matrix> {
        self.check_components(n_components)?;
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.cols() });
        }
        let mut out = Matrix::zeros(x.rows(), n_components);
        for i in 0..x.rows() {
            self.project_row(x.row(i), n_components, out.row_mut(i));
        }
        Ok(out)
    }

    /// Maps scores back into the input space.
    pub fn back_project(&self, scores: &Matrix) -> Result<Matrix> {
        let k = scores.cols();
        self.check_components(k)?;
        let mut out = Matrix::zeros(scores.rows(), self.dim());
        for i in 0..scores.rows() {
            let dst = out.row_mut(i);
            dst.copy_from_slice(&self.means);
            for j in 0..k {
                let s = scores[(i, j)];
                for (d, c) in dst.iter_mut().zip(self.components.row(j)) {
                    *d += s * c;
                }
            }
        }
        Ok(out)
    }
}

pub fn fit_pca(x: &Matrix) -> Result<PcaModel> {
    PcaModel::fit(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_known_matrix() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = jacobi_eigen(&a, 1e-14, 50).unwrap();
        let mut vals = e.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn axis_aligned_data() {
        let x = Matrix::from_rows(&[[-2.0, 1.0], [-1.0, 1.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]]).unwrap();
        let m = PcaModel::fit(&x).unwrap();
        assert_eq!(m.components.row(0), &[1.0, 0.0]);
        let ratio = m.explained_variance_ratio();
        assert!((ratio[0] - 1.0).abs() < 1e-12 && ratio[1].abs() < 1e-12);
        let p = m.project(&x, 1).unwrap();
        assert_eq!(p.column(0), [-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(m.project(&x, 0).is_err());
        assert!(m.project(&x, 3).is_err());
    }

    #[test]
    fn too_few_rows() {
        assert_eq!(PcaModel::fit(&Matrix::zeros(1, 3)).unwrap_err(), Error::TooFewRows { need: 2, got: 1 });
    }
}
