//! Soft-margin SVM with a polynomial kernel, trained by sequential minimal
//! optimization, combined one-vs-one for more than two classes.
//!
//! The binary solver works on the dual
//!
//! ```text
//! min_α  ½ αᵀQα − eᵀα   s.t.  0 ≤ αᵢ ≤ C,  yᵀα = 0,   Qᵢⱼ = yᵢyⱼK(xᵢ, xⱼ)
//! ```
//!
//! choosing the maximal-violating `i` and the `j` with the largest
//! second-order decrease, until the KKT gap drops below `tol`.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use serde::{Deserialize, Serialize};

use super::TrainingSet;
use crate::linalg::{dot, Matrix};

const TAU: f64 = 1e-12;

/// `K(u, v) = (u·v + 1)^degree`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialKernel {
    pub degree: u32,
}

impl PolynomialKernel {
    #[inline]
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        (dot(u, v) + 1.0).powi(self.degree as i32)
    }

    pub fn gram(&self, x: &Matrix) -> Matrix {
        let n = x.rows();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval(x.row(i), x.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ αᵢyᵢK(xᵢ, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves the binary dual for a precomputed kernel matrix and labels ±1.
pub fn smo_solve(kernel: &Matrix, y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // yᵢ·∇ᵢ rather than ∇ᵢ; with labels ±1 the two are exact sign flips.
    let mut yg: Vec<f64> = y.iter().map(|&yt| -yt).collect();
    let diag: Vec<f64> = (0..n).map(|i| kernel[(i, i)]).collect();
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let in_up = |yt: f64, a: f64| if yt > 0.0 { !upper(a) } else { !lower(a) };
    let in_low = |yt: f64, a: f64| if yt > 0.0 { !lower(a) } else { !upper(a) };
    let mut up: Vec<bool> = (0..n).map(|t| in_up(y[t], 0.0)).collect();
    let mut low: Vec<bool> = (0..n).map(|t| in_low(y[t], 0.0)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i: maximal violator in I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for (t, (&u, &g)) in up.iter().zip(&yg).enumerate() {
            if u && -g >= gmax {
                gmax = -g;
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        // j: best second-order step among I_low.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        let ki = kernel.row(i);
        let di = diag[i];
        for t in 0..n {
            if !low[t] {
                continue;
            }
            let v = yg[t];
            if v >= gmax2 {
                gmax2 = v;
            }
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = di + diag[t] - 2.0 * ki[t];
                let quad = if quad > 0.0 { quad } else { TAU };
                let obj = -(grad_diff * grad_diff) / quad;
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < tol {
            converged = true;
            break;
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (grad_i, grad_j) = (y[i] * yg[i], y[j] * yg[j]);
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let quad = diag[i] + diag[j] + 2.0 * qij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad_i - grad_j) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = diag[i] + diag[j] - 2.0 * qij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad_i - grad_j) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let a = y[i] * (alpha[i] - old_i);
        let b = y[j] * (alpha[j] - old_j);
        for ((g, &p), &q) in yg.iter_mut().zip(ki).zip(kernel.row(j)) {
            *g += a * p + b * q;
        }
        for t in [i, j] {
            up[t] = in_up(y[t], alpha[t]);
            low[t] = in_low(y[t], alpha[t]);
        }
    }

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut n_free = 0usize;
    for t in 0..n {
        let v = yg[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(v)
            } else {
                lb = lb.max(v)
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(v)
            } else {
                lb = lb.max(v)
            }
        } else {
            n_free += 1;
            free_sum += v;
        }
    }
    let rho = if n_free > 0 { free_sum / n_free as f64 } else { (ub + lb) / 2.0 };
    SmoSolution { alpha, rho, iterations, converged }
}

/// One pairwise machine: positive class `pos`, negative class `neg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub pos: usize,
    pub neg: usize,
    pub support: Matrix,
    /// `αᵢyᵢ` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
}

impl BinarySvm {
    pub fn decision(&self, kernel: &PolynomialKernel, x: &[f64]) -> f64 {
        self.support.iter_rows().zip(&self.coef).map(|(s, c)| c * kernel.eval(s, x)).sum::<f64>() - self.rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub kernel: PolynomialKernel,
    pub n_features: usize,
    pub n_classes: usize,
    pub machines: Vec<BinarySvm>,
}

pub fn max_iterations(n: usize) -> usize {
    (100 * n).max(10_000_000)
}

impl Svm {
    pub(crate) fn train(data: &TrainingSet<'_>, degree: u32, c: f64, tol: f64) -> Self {
        let kernel = PolynomialKernel { degree };
        let present = data.present_classes();
        let mut machines = Vec::new();
        for (a_idx, &pos) in present.iter().enumerate() {
            for &neg in &present[a_idx + 1..] {
                let rows: Vec<usize> = (0..data.x.rows()).filter(|&r| data.y[r] == pos || data.y[r] == neg).collect();
                let x = data.x.select_rows(&rows);
                let y: Vec<f64> = rows.iter().map(|&r| if data.y[r] == pos { 1.0 } else { -1.0 }).collect();
                let sol = smo_solve(&kernel.gram(&x), &y, c, tol, max_iterations(rows.len()));
                let sv: Vec<usize> = (0..rows.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
                machines.push(BinarySvm {
                    pos,
                    neg,
                    support: x.select_rows(&sv),
                    coef: sv.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
                    rho: sol.rho,
                });
            }
        }
        Self { kernel, n_features: data.x.cols(), n_classes: data.n_classes, machines }
    }

    /// Pairwise votes per class.
    pub(crate) fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for m in &self.machines {
            if m.decision(&self.kernel, x) > 0.0 {
                votes[m.pos] += 1.0;
            } else {
                votes[m.neg] += 1.0;
            }
        }
        votes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_is_separable_with_cubic_kernel() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let y = [1.0, 1.0, -1.0, -1.0];
        let kernel = PolynomialKernel { degree: 3 };
        let sol = smo_solve(&kernel.gram(&x), &y, 1.0, 1e-8, 1000);
        assert!(sol.converged);
        for a in &sol.alpha {
            assert!((a - 1.0 / 24.0).abs() < 1e-6, "{a}");
        }
        for i in 0..4 {
            let f: f64 = (0..4).map(|j| sol.alpha[j] * y[j] * kernel.eval(x.row(j), x.row(i))).sum::<f64>() - sol.rho;
            assert!(f * y[i] > 0.0);
        }
    }
}
