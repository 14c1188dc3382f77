//! Graph form `z = (α, h(α))` of the interface equation.
//!
//! With `δh = h(α) - h(β)`, `y = α - β`, `Q = sinh²(δh/2) + sin²(y/2)`:
//!
//! ```text
//! h_t = (ρ̄/2π) ∫ log(4 sin²(y/2)) h(β) [1 + h'(α)h'(β)] dβ
//!     + (ρ̄/2π) ∫ log(1 + sinh²(δh/2)/sin²(y/2)) h(β) [1 + h'(α)h'(β)] dβ
//!     + (ρ̄/2π) ∫ h(β) δh / (2Q) · (h'(α)h'(β) - 1) sinh δh dβ
//!     + (ρ̄/2π) ∫ h(β) δh / (2Q) · (h'(α) + h'(β)) sin y dβ
//! ```
//!
//! The first integral is `ρ̄[-Λ⁻¹h - h'(α) Λ⁻¹(h h')]` by the Kress rule; the
//! other three are smooth and periodic once their removable diagonal values
//! are filled in.

use super::ContourError;
use crate::par::map_indices;
use crate::spectral::{derivative, PeriodicField, SingularQuadrature};

/// Largest `|ĉₖ|, |k| > n/4` relative to the peak coefficient that
/// [`graph_rhs`] accepts.
pub const GRAPH_RESOLUTION_GUARD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GraphState {
    pub h: PeriodicField,
    pub rho_bar: f64,
}

impl GraphState {
    pub fn new(h: PeriodicField, rho_bar: f64) -> Self {
        Self { h, rho_bar }
    }

    /// Heavier fluid below.
    pub fn is_stable(&self) -> bool {
        self.rho_bar > 0.0
    }
}

pub fn graph_rhs(g: &GraphState) -> Result<PeriodicField, ContourError> {
    graph_rhs_with_guard(g, GRAPH_RESOLUTION_GUARD)
}

pub fn graph_rhs_with_guard(g: &GraphState, guard: f64) -> Result<PeriodicField, ContourError> {
    let h = &g.h;
    if !h.is_finite() {
        return Err(ContourError::NonFinite);
    }
    let ratio = h.tail_peak_ratio();
    if ratio > guard {
        return Err(ContourError::UnderResolved { ratio, guard });
    }
    let grid = h.grid();
    let n = grid.len();
    let hv = h.values();
    let hp = derivative(h);
    let dp = hp.values();
    let nodes = grid.nodes();

    let quad = SingularQuadrature::new(grid);
    let hhp: Vec<f64> = hv.iter().zip(dp).map(|(a, b)| a * b).collect();
    let log_h = quad.log_integral(hv);
    let log_hhp = quad.log_integral(&hhp);

    let smooth = map_indices(n, |i| {
        let mut acc = 0.0;
        for j in 0..n {
            acc += if j == i {
                let s = dp[i] * dp[i];
                hv[i] * ((1.0 + s).ln() * (1.0 + s) + 2.0 * s * (s - 1.0) / (1.0 + s) + 4.0 * s / (1.0 + s))
            } else {
                let dh = hv[i] - hv[j];
                let y = nodes[i] - nodes[j];
                let sh = (0.5 * dh).sinh();
                let sy = (0.5 * y).sin();
                let q = sh * sh + sy * sy;
                let t2 = (sh * sh / (sy * sy)).ln_1p() * (1.0 + dp[i] * dp[j]);
                let frac = dh / (2.0 * q);
                let t3 = frac * (dp[i] * dp[j] - 1.0) * dh.sinh();
                let t4 = frac * (dp[i] + dp[j]) * y.sin();
                hv[j] * (t2 + t3 + t4)
            };
        }
        acc / n as f64
    });

    let values = (0..n)
        .map(|i| g.rho_bar * (log_h[i] + dp[i] * log_hhp[i] + smooth[i]))
        .collect();
    Ok(PeriodicField::from_values(grid, values)?)
}
