//! Direct singular quadratures for `Λ⁻¹`, `H` and `Λ`.
//!
//! These evaluate the defining integrals node by node and never touch the
//! FFT (except for the `u''` diagonal correction in `Λ`), which is what makes
//! them a meaningful cross-check of the multiplier route.
//!
//! * log kernel: product integration against the trigonometric interpolant
//!   (Kress), exact for degree `< n/2`.
//! * cot kernel: alternating-point trapezoid, summing only over nodes at odd
//!   offsets with doubled weight. Skipping the diagonal alone leaves an
//!   `O(k/n)` error; the odd-offset rule is exact for `|k| < n/2`.
//! * hypersingular difference kernel: symmetric trapezoid with the diagonal
//!   replaced by its limit `-u''(α)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{derivative_n, Grid1D, PeriodicField};

/// Precomputed circulant weights for one grid size.
#[derive(Debug, Clone)]
pub struct SingularQuadrature {
    grid: Grid1D,
    log_weights: Vec<f64>,
    cot_weights: Vec<f64>,
    diff_weights: Vec<f64>,
}

impl SingularQuadrature {
    pub fn new(grid: &Grid1D) -> Self {
        let n = grid.len();
        let nf = n as f64;
        // W(m) = (2/n) Σ_{k=1}^{n/2-1} cos(2πkm/n)/k, summed by one inverse FFT.
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for k in 1..n / 2 {
            let w = Complex64::new(1.0 / (nf * k as f64), 0.0);
            buf[k] = w;
            buf[n - k] = w;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let log_weights = buf.iter().map(|c| c.re).collect();
        let cot_weights = (0..n)
            .map(|m| {
                if m % 2 == 1 {
                    2.0 / nf / (PI * m as f64 / nf).tan()
                } else {
                    0.0
                }
            })
            .collect();
        let diff_weights = (0..n)
            .map(|m| {
                if m == 0 {
                    0.0
                } else {
                    let s = (PI * m as f64 / nf).sin();
                    1.0 / (nf * 2.0 * s * s)
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            log_weights,
            cot_weights,
            diff_weights,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// `(1/2π) ∫ log(4 sin²((αᵢ-β)/2)) v(β) dβ` at every node.
    pub fn log_integral(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.circulant(&self.log_weights, v);
        out.iter_mut().for_each(|x| *x = -*x);
        out
    }

    /// Weight of node `j` in the log-kernel rule evaluated at node `i`;
    /// `(1/2π)∫ log(4 sin²) v = Σⱼ weight(i-j) vⱼ`.
    pub fn log_weight(&self, offset: usize) -> f64 {
        -self.log_weights[offset % self.grid.len()]
    }

    pub fn lambda_inv(&self, f: &PeriodicField) -> PeriodicField {
        let values = self.circulant(&self.log_weights, f.values());
        PeriodicField::from_values(&self.grid, values).expect("grid sized")
    }

    pub fn hilbert(&self, f: &PeriodicField) -> PeriodicField {
        let values = self.circulant(&self.cot_weights, f.values());
        PeriodicField::from_values(&self.grid, values).expect("grid sized")
    }

    pub fn lambda(&self, f: &PeriodicField) -> PeriodicField {
        let n = self.grid.len();
        let u = f.values();
        let upp = derivative_n(f, 2);
        let values = (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for m in 1..n {
                    acc += self.diff_weights[m] * (u[i] - u[(i + n - m) % n]);
                }
                acc - upp.values()[i] / n as f64
            })
            .collect();
        PeriodicField::from_values(&self.grid, values).expect("grid sized")
    }

    fn circulant(&self, weights: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        assert_eq!(v.len(), n, "circulant input sized to grid");
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for m in 0..n {
                    let w = weights[m];
                    if w != 0.0 {
                        acc += w * v[(i + n - m) % n];
                    }
                }
                acc
            })
            .collect()
    }
}
