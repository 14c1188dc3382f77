//! Real periodic fields on the 2π-torus.
//!
//! A [`PeriodicField`] carries both its nodal samples and its Fourier
//! coefficients. Coefficients are phased against the physical coordinate
//! `α ∈ [-π, π)`, so `cos(3α)` has `ĉ₋₃ = ĉ₃ = 1/2` regardless of where the
//! grid starts.
//!
//! ```text
//! αⱼ = -π + 2πj/n,      u(αⱼ) = Σₖ ĉₖ e^{ikαⱼ},      k ∈ {-n/2+1, …, n/2}
//! ```
//!
//! Linear combinations are applied to both representations, so a field that
//! starts with `ĉ₀ = 0` and is only ever updated with zero-mean increments
//! keeps an exactly zero mean coefficient.

mod ops;
mod singular;

pub use ops::{
    apply_linear_semigroup, derivative, derivative_n, hilbert, lambda, lambda_inv,
    lambda_inv_half_norm_sq, product, product3,
};
pub use singular::SingularQuadrature;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("grid size {0} must be a power of two and at least 16")]
    InvalidGridSize(usize),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids ({0} vs {1} nodes)")]
    GridMismatch(usize, usize),
    #[error("semigroup time must be non-negative, got {0}")]
    NegativeTime(f64),
}

/// Uniform grid on the torus with cached FFT plans.
#[derive(Clone)]
pub struct Grid1D {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid1D {
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(SpectralError::InvalidGridSize(n));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing `Δα = 2π/n`.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + self.spacing() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed wavenumber stored at FFT index `idx`; the Nyquist slot maps to `+n/2`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// FFT slot of wavenumber `k` (taken modulo `n`).
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Largest wavenumber kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        // e^{-ikαⱼ} = (-1)^k e^{-2πijk/n} because α₀ = -π.
        for (idx, c) in buf.iter_mut().enumerate() {
            let s = if idx % 2 == 0 { scale } else { -scale };
            *c *= s;
        }
        buf
    }

    fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| if idx % 2 == 0 { c } else { -c })
            .collect();
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Which reflection symmetry a field is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Real scalar field on the torus, held in physical and spectral form.
#[derive(Clone, Debug)]
pub struct PeriodicField {
    grid: Grid1D,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl PeriodicField {
    pub fn zeros(grid: &Grid1D) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: &Grid1D, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.values.iter_mut().for_each(|v| *v = c);
        f.coeffs[0] = Complex64::new(c, 0.0);
        f
    }

    pub fn from_values(grid: &Grid1D, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let coeffs = grid.forward(&values);
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::from_values(grid, values).expect("length matches grid by construction")
    }

    /// Builds a field from coefficients in FFT order, projecting onto the
    /// conjugate-symmetric (real) subspace.
    pub fn from_coefficients(
        grid: &Grid1D,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, SpectralError> {
        let n = grid.len();
        if coeffs.len() != n {
            return Err(SpectralError::LengthMismatch {
                expected: n,
                got: coeffs.len(),
            });
        }
        let mut sym = coeffs.clone();
        for idx in 0..n {
            let mirror = (n - idx) % n;
            sym[idx] = 0.5 * (coeffs[idx] + coeffs[mirror].conj());
        }
        let values = grid.inverse(&sym);
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs: sym,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coefficients in FFT order (see [`Grid1D::wavenumber`]).
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `‖u‖_{L²}` with `∫_{-π}^{π} u² dα`.
    pub fn l2_norm(&self) -> f64 {
        (TAU * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Homogeneous Sobolev norm `(2π Σ_{k≠0} |k|^{2s} |ĉₖ|²)^{1/2}`.
    pub fn hdot_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(idx, c)| (self.grid.wavenumber(idx).unsigned_abs() as f64).powf(2.0 * s) * c.norm_sqr())
            .sum();
        (TAU * sum).sqrt()
    }

    /// Inhomogeneous Sobolev norm `(2π Σ (1+k²)^s |ĉₖ|²)^{1/2}`.
    pub fn h_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let k = self.grid.wavenumber(idx) as f64;
                (1.0 + k * k).powf(s) * c.norm_sqr()
            })
            .sum();
        (TAU * sum).sqrt()
    }

    /// `∫ u v dα`, evaluated by Parseval.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "inner product across grids");
        TAU * self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>()
    }

    /// Energy fraction carried by `|k| > n/4`.
    pub fn tail_fraction(&self) -> f64 {
        self.tail_fraction_floored(0.0)
    }

    /// As [`tail_fraction`](Self::tail_fraction), but relative to at least
    /// `floor` (in `Σ|ĉₖ|²` units), so a field that has decayed into
    /// round-off is not mistaken for an unresolved one.
    pub fn tail_fraction_floored(&self, floor: f64) -> f64 {
        let quarter = (self.grid.len() / 4) as i64;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if self.grid.wavenumber(idx).abs() > quarter {
                tail += e;
            }
        }
        let total = total.max(floor);
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Largest `|ĉₖ|` over `|k| > n/4`, relative to the largest coefficient.
    pub fn tail_peak_ratio(&self) -> f64 {
        let quarter = (self.grid.len() / 4) as i64;
        let mut peak = 0.0f64;
        let mut tail = 0.0f64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let a = c.norm();
            peak = peak.max(a);
            if self.grid.wavenumber(idx).abs() > quarter {
                tail = tail.max(a);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            tail / peak
        }
    }

    /// Evaluates the trigonometric interpolant at an arbitrary `α`.
    pub fn eval(&self, alpha: f64) -> f64 {
        self.eval_derivative(alpha, 0)
    }

    /// `order`-th derivative of the trigonometric interpolant at `α`.
    /// The Nyquist mode is ignored for `order > 0`.
    pub fn eval_derivative(&self, alpha: f64, order: u32) -> f64 {
        let n = self.grid.len();
        let mut acc = if order == 0 { self.coeffs[0].re } else { 0.0 };
        let step = Complex64::from_polar(1.0, alpha);
        let mut phase = step;
        for k in 1..n / 2 {
            let c = self.coeffs[k];
            let ik = Complex64::new(0.0, k as f64).powu(order);
            // ĉ₋ₖ = conj(ĉₖ), so the pair contributes 2 Re(ĉₖ (ik)^p e^{ikα}).
            acc += 2.0 * (c * ik * phase).re;
            phase *= step;
        }
        if order == 0 {
            acc += self.coeffs[n / 2].re * ((n / 2) as f64 * alpha).cos();
        }
        acc
    }

    /// Applies a Fourier multiplier; the Nyquist slot is always zeroed.
    pub fn apply_multiplier(&self, multiplier: impl Fn(i64) -> Complex64) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (idx, c) in coeffs.iter_mut().enumerate() {
            *c *= multiplier(self.grid.wavenumber(idx));
        }
        coeffs[self.grid.nyquist()] = Complex64::new(0.0, 0.0);
        Self::from_coefficients(&self.grid, coeffs).expect("length preserved")
    }

    /// Spectral interpolation onto another grid: modes `|k| < min(n, m)/2`
    /// are carried over, everything else (including both Nyquist slots) is
    /// dropped.
    pub fn resampled(&self, grid: &Grid1D) -> Self {
        let keep = (self.grid.len().min(grid.len()) / 2) as i64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (idx, c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(idx);
            if k.abs() < keep {
                coeffs[grid.index_of(k)] = *c;
            }
        }
        Self::from_coefficients(grid, coeffs).expect("length matches grid")
    }

    /// Zeroes every mode with `|k| > n/3`.
    pub fn dealiased(&self) -> Self {
        let cutoff = self.grid.dealias_cutoff() as i64;
        let mut coeffs = self.coeffs.clone();
        let mut touched = false;
        for (idx, c) in coeffs.iter_mut().enumerate() {
            if self.grid.wavenumber(idx).abs() > cutoff && (c.re != 0.0 || c.im != 0.0) {
                *c = Complex64::new(0.0, 0.0);
                touched = true;
            }
        }
        if !touched {
            return self.clone();
        }
        Self::from_coefficients(&self.grid, coeffs).expect("length preserved")
    }

    /// `self += a * other` on both representations.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "axpy across grids");
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            *v += a * w;
        }
        for (c, d) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * d;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// Samples `u(-α)` at the nodes.
    pub fn reflected(&self) -> Self {
        let n = self.len();
        let values = (0..n).map(|j| self.values[(n - j) % n]).collect();
        Self::from_values(&self.grid, values).expect("length preserved")
    }

    /// Max-norm of `(u ∓ u(-·))/2`: zero for an exactly odd (even) field.
    pub fn symmetry_defect(&self, parity: Parity) -> f64 {
        let n = self.len();
        (0..n)
            .map(|j| {
                let r = self.values[(n - j) % n];
                match parity {
                    Parity::Odd => 0.5 * (self.values[j] + r).abs(),
                    Parity::Even => 0.5 * (self.values[j] - r).abs(),
                }
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise map on nodal values (no dealiasing).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::from_values(&self.grid, values).expect("length preserved")
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Add for &PeriodicField {
    type Output = PeriodicField;

    fn add(self, rhs: &PeriodicField) -> PeriodicField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &PeriodicField {
    type Output = PeriodicField;

    fn sub(self, rhs: &PeriodicField) -> PeriodicField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &PeriodicField {
    type Output = PeriodicField;

    fn mul(self, a: f64) -> PeriodicField {
        self.scaled(a)
    }
}

impl Neg for &PeriodicField {
    type Output = PeriodicField;

    fn neg(self) -> PeriodicField {
        self.scaled(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(Grid1D::new(8).unwrap_err(), SpectralError::InvalidGridSize(8));
        assert_eq!(Grid1D::new(48).unwrap_err(), SpectralError::InvalidGridSize(48));
        assert!(Grid1D::new(16).is_ok());
    }

    #[test]
    fn nodes_start_at_minus_pi() {
        let g = Grid1D::new(16).unwrap();
        assert_eq!(g.node(0), -PI);
        assert!((g.node(8)).abs() < 1e-15);
        assert_eq!(g.wavenumber(8), 8);
        assert_eq!(g.wavenumber(9), -7);
        assert_eq!(g.index_of(-7), 9);
    }

    #[test]
    fn cosine_has_half_coefficients() {
        let g = Grid1D::new(32).unwrap();
        let f = PeriodicField::from_fn(&g, |a| (3.0 * a).cos() + 0.5);
        assert!((f.coefficient(3).re - 0.5).abs() < 1e-15);
        assert!((f.coefficient(-3).re - 0.5).abs() < 1e-15);
        assert!((f.mean() - 0.5).abs() < 1e-15);
        let s = PeriodicField::from_fn(&g, |a| (2.0 * a).sin());
        // sin(2α) = (e^{2iα} - e^{-2iα}) / 2i
        assert!((s.coefficient(2) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn round_trip_is_tight() {
        let g = Grid1D::new(64).unwrap();
        let f = PeriodicField::from_fn(&g, |a| (a.sin() * 2.0).exp());
        let back = PeriodicField::from_coefficients(&g, f.coefficients().to_vec()).unwrap();
        let scale = f.max_abs();
        assert!(f.max_abs_diff(&back) <= 1e-12 * scale);
    }

    #[test]
    fn norms_of_cosine() {
        let g = Grid1D::new(32).unwrap();
        let f = PeriodicField::from_fn(&g, f64::cos);
        let sqrt_pi = PI.sqrt();
        assert!((f.l2_norm() - sqrt_pi).abs() < 1e-14);
        assert!((f.hdot_norm(4.0) - sqrt_pi).abs() < 1e-14);
        let f3 = PeriodicField::from_fn(&g, |a| (3.0 * a).cos());
        assert!((f3.hdot_norm(2.0) - 9.0 * sqrt_pi).abs() < 1e-12);
    }

    #[test]
    fn interpolant_matches_band_limited_function() {
        let g = Grid1D::new(32).unwrap();
        let f = PeriodicField::from_fn(&g, |a| a.sin() + 0.3 * (5.0 * a).cos());
        for &x in &[0.123, -2.9, 1.7] {
            assert!((f.eval(x) - (x.sin() + 0.3 * (5.0 * x).cos())).abs() < 1e-13);
            let d1 = x.cos() - 1.5 * (5.0 * x).sin();
            assert!((f.eval_derivative(x, 1) - d1).abs() < 1e-12);
            let d2 = -x.sin() - 7.5 * (5.0 * x).cos();
            assert!((f.eval_derivative(x, 2) - d2).abs() < 1e-11);
        }
    }

    #[test]
    fn parity_defects() {
        let g = Grid1D::new(32).unwrap();
        let s = PeriodicField::from_fn(&g, f64::sin);
        let c = PeriodicField::from_fn(&g, f64::cos);
        assert!(s.symmetry_defect(Parity::Odd) < 1e-15);
        assert!((c.symmetry_defect(Parity::Odd) - 1.0).abs() < 1e-15);
        assert!(c.symmetry_defect(Parity::Even) < 1e-15);
    }

    #[test]
    fn dealias_zeroes_upper_third() {
        let g = Grid1D::new(32).unwrap();
        let f = PeriodicField::from_fn(&g, |a| a.cos() + (12.0 * a).cos());
        let d = f.dealiased();
        assert!(d.coefficient(12).norm() == 0.0);
        assert!((d.coefficient(1).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tail_fraction_detects_high_modes() {
        let g = Grid1D::new(32).unwrap();
        let lo = PeriodicField::from_fn(&g, f64::cos);
        assert!(lo.tail_fraction() < 1e-28);
        let hi = PeriodicField::from_fn(&g, |a| a.cos() + (10.0 * a).cos());
        assert!((hi.tail_fraction() - 0.5).abs() < 1e-12);
        assert_eq!(PeriodicField::zeros(&g).tail_fraction(), 0.0);
    }
}
