//! Functionals monitored during runs.
//!
//! * the minimal slope `m(t) = min u_α` and the Riccati comparison
//!   `ṁ ≤ -m² - log(4) m` behind quadratic blow-up,
//! * the Lagrangian functional `L(t)` for the cubic-local model,
//! * the weighted functional `J(t) = ∫ u²/x^{1+δ}` for odd cubic-nonlocal
//!   data, taken over the half period `(0, π]`,
//! * power-law decay fits, the analyticity-strip width, symmetry defects.

use std::f64::consts::PI;

use crate::fit::least_squares;
use crate::quad::{integrate, integrate_pieces, QuadError, QuadOptions};
use crate::spectral::{derivative, lambda_inv, Parity, PeriodicField};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("delta must lie in (0, 1/2), got {0}")]
    Delta(f64),
    #[error("field is not odd (defect {0:.3e})")]
    NotOdd(f64),
    #[error("non-positive value {value} at t = {t}; cannot take logarithms")]
    NonPositive { t: f64, value: f64 },
    #[error("need at least {need} points in the fit window, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("spectrum at k = {k} is below the noise floor")]
    NoiseFloor { k: usize },
    #[error("least-squares fit is degenerate")]
    Degenerate,
    #[error("quadrature failed: {0}")]
    Quad(#[from] QuadError),
}

fn check_delta(delta: f64) -> Result<(), DiagnosticsError> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(DiagnosticsError::Delta(delta))
    }
}

/// `m = min u_α` and where it sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeMin {
    pub m: f64,
    pub location: f64,
}

/// Minimum of `u_α`: grid argmin refined by three Newton steps on the
/// trigonometric interpolant.
pub fn track_min_slope(u: &PeriodicField) -> SlopeMin {
    let du = derivative(u);
    let (j, _) = du
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (j, &v)| if v < b.1 { (j, v) } else { b });
    let grid = u.grid();
    let h = grid.spacing();
    let x0 = grid.node(j);
    let mut x = x0;
    for _ in 0..3 {
        let d2 = u.eval_derivative(x, 2);
        let d3 = u.eval_derivative(x, 3);
        if !(d3 > 0.0) {
            break;
        }
        let next = x - d2 / d3;
        if (next - x0).abs() > h {
            break;
        }
        x = next;
    }
    let m = u.eval_derivative(x, 1);
    let m0 = du.values()[j];
    // Newton can only help; never report a worse minimum than the grid one.
    if m <= m0 {
        SlopeMin { m, location: x }
    } else {
        SlopeMin { m: m0, location: x0 }
    }
}

/// `Λ⁻¹u_α(x_t) - log(4) m`. The kernel argument gives `≥ 0` for every
/// smooth periodic `u`.
pub fn riccati_residual(u: &PeriodicField) -> f64 {
    let s = track_min_slope(u);
    let v = lambda_inv(&derivative(u)).eval(s.location);
    v - 4f64.ln() * s.m
}

/// Closed-form solution of `ṁ = -m² - a m`, `m(0) = m0`. Infinite past the
/// blow-up time.
pub fn comparison_ode(m0: f64, a: f64, t: f64) -> f64 {
    if m0 == 0.0 {
        return 0.0;
    }
    let k = m0 / (m0 + a);
    let e = k * (-a * t).exp();
    if m0 < -a && e <= 1.0 {
        return f64::NEG_INFINITY;
    }
    a * e / (1.0 - e)
}

/// Blow-up time of [`comparison_ode`], `ln(m0/(m0+a))/a`, when `m0 < -a`.
pub fn comparison_blowup_time(m0: f64, a: f64) -> Option<f64> {
    (m0 < -a).then(|| (m0 / (m0 + a)).ln() / a)
}

/// Trajectory `y(t)` and the history of `L`.
#[derive(Debug, Clone)]
pub struct LagrangianTracker {
    pub y: f64,
    delta: f64,
    pub history: Vec<(f64, f64)>,
}

impl LagrangianTracker {
    pub fn new(delta: f64) -> Result<Self, DiagnosticsError> {
        check_delta(delta)?;
        Ok(Self {
            y: 0.0,
            delta,
            history: Vec::new(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn record(&mut self, t: f64, u: &PeriodicField) -> Result<f64, DiagnosticsError> {
        let l = functional_l(u, self)?;
        self.history.push((t, l));
        Ok(l)
    }
}

/// `L = ∫_{-1}^{1} (W(0) - W(x)) (|x|^{-δ} - 1) sign(x) dx` with
/// `W(x) = u(x + y)²`.
///
/// Substituting `|x| = s^p`, `p = 1/(1-δ)`, absorbs the weight:
/// `L = ∫₀¹ (W(-s^p) - W(s^p)) p (1 - s^{p-1}) ds`.
pub fn functional_l(u: &PeriodicField, tracker: &LagrangianTracker) -> Result<f64, DiagnosticsError> {
    let p = 1.0 / (1.0 - tracker.delta);
    let y = tracker.y;
    let w = |x: f64| {
        let v = u.eval(x + y);
        v * v
    };
    let f = |s: f64| {
        let x = s.powf(p);
        (w(-x) - w(x)) * p * (1.0 - s.powf(p - 1.0))
    };
    let scale = u.max_abs().powi(2).max(f64::MIN_POSITIVE);
    let opts = QuadOptions::with_tol(1e-13 * scale, 1e-12);
    Ok(integrate(f, 0.0, 1.0, opts)?.value)
}

/// Running history of `J`.
#[derive(Debug, Clone)]
pub struct WeightedTracker {
    delta: f64,
    pub history: Vec<(f64, f64)>,
}

impl WeightedTracker {
    pub fn new(delta: f64) -> Result<Self, DiagnosticsError> {
        check_delta(delta)?;
        Ok(Self {
            delta,
            history: Vec::new(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn record(&mut self, t: f64, u: &PeriodicField) -> Result<f64, DiagnosticsError> {
        let j = functional_j(u, self.delta)?;
        self.history.push((t, j));
        Ok(j)
    }

    /// Whether `J` increased over the records with `t ≥ t_from`.
    pub fn increasing_since(&self, t_from: f64) -> Option<bool> {
        let tail: Vec<f64> = self
            .history
            .iter()
            .filter(|(t, _)| *t >= t_from)
            .map(|(_, j)| *j)
            .collect();
        (tail.len() >= 2).then(|| tail.windows(2).all(|w| w[1] > w[0]))
    }
}

const ODD_TOLERANCE: f64 = 1e-8;
const HALF_PERIOD_BREAKS: [f64; 6] = [0.0, 1e-3, 1e-2, 0.1, 1.0, PI];

fn half_period_integral(
    u: &PeriodicField,
    power: i32,
    weight: f64,
) -> Result<f64, DiagnosticsError> {
    let defect = u.symmetry_defect(Parity::Odd);
    if defect > ODD_TOLERANCE * u.max_abs().max(1.0) {
        return Err(DiagnosticsError::NotOdd(defect));
    }
    if u.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let f = |x: f64| u.eval(x).powi(power) / x.powf(weight);
    let scale = u.max_abs().powi(power);
    let opts = QuadOptions::with_tol(1e-14 * scale, 1e-12);
    Ok(integrate_pieces(f, &HALF_PERIOD_BREAKS, opts)?.value)
}

/// `J = ∫₀^π u²/x^{1+δ} dx` for odd `u`.
pub fn functional_j(u: &PeriodicField, delta: f64) -> Result<f64, DiagnosticsError> {
    check_delta(delta)?;
    half_period_integral(u, 2, 1.0 + delta)
}

/// `∫₀^π u⁴/x^{2+δ} dx` for odd `u`.
pub fn quartic_integral(u: &PeriodicField, delta: f64) -> Result<f64, DiagnosticsError> {
    check_delta(delta)?;
    half_period_integral(u, 4, 2.0 + delta)
}

/// `C` in `∫₀^π u⁴/x^{2+δ} ≥ C (∫₀^π u²/x^{1+δ})²`, from Cauchy–Schwarz
/// against `x^{-δ}` on `(0, π]`.
pub fn holder_constant(delta: f64) -> f64 {
    (1.0 - delta) / PI.powf(1.0 - delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Slope of `log value` against `log(1+t)`.
    pub exponent: f64,
    pub intercept: f64,
    pub points: usize,
    /// The local slope keeps steepening across the window: the data decays
    /// faster than any fixed power.
    pub steeper_than_power: bool,
}

fn slope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let rows: Vec<Vec<f64>> = points.iter().map(|(t, _)| vec![1.0, (1.0 + t).ln()]).collect();
    let b: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    least_squares(&rows, &b).map(|x| (x[1], x[0]))
}

/// Least-squares power-law exponent of `series` on `t ∈ [window.0, window.1]`.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit, DiagnosticsError> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    if pts.len() < 2 {
        return Err(DiagnosticsError::TooFewPoints {
            need: 2,
            got: pts.len(),
        });
    }
    if let Some(&(t, value)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(DiagnosticsError::NonPositive { t, value });
    }
    let (exponent, intercept) = slope(&pts).ok_or(DiagnosticsError::Degenerate)?;
    let half = pts.len() / 2;
    let steeper_than_power = if half >= 4 {
        match (slope(&pts[..half]), slope(&pts[half..])) {
            (Some((early, _)), Some((late, _))) => late < early - 0.1 * early.abs().max(1.0),
            _ => false,
        }
    } else {
        false
    };
    Ok(DecayFit {
        exponent,
        intercept,
        points: pts.len(),
        steeper_than_power,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripFit {
    /// Width `δ` of the analyticity strip.
    pub delta: f64,
    /// Algebraic prefactor exponent `p`.
    pub power: f64,
    pub log_c: f64,
}

/// Relative level below which Fourier coefficients are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Fits `log|ûₖ| ≈ log C - p log k - δ k` over `k ∈ [n/8, n/3]`.
pub fn analyticity_strip(u: &PeriodicField) -> Result<StripFit, DiagnosticsError> {
    let n = u.len();
    let lo = (n / 8).max(1);
    let hi = n / 3;
    let peak = (1..n / 2)
        .map(|k| u.coefficient(k as i64).norm())
        .fold(0.0, f64::max);
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for k in lo..=hi {
        let a = u.coefficient(k as i64).norm();
        if !(a > NOISE_FLOOR * peak) {
            return Err(DiagnosticsError::NoiseFloor { k });
        }
        let kf = k as f64;
        rows.push(vec![1.0, -kf.ln(), -kf]);
        b.push(a.ln());
    }
    if rows.len() < 3 {
        return Err(DiagnosticsError::TooFewPoints {
            need: 3,
            got: rows.len(),
        });
    }
    let x = least_squares(&rows, &b).ok_or(DiagnosticsError::Degenerate)?;
    Ok(StripFit {
        log_c: x[0],
        power: x[1],
        delta: x[2],
    })
}

/// Max-norm of `(u ∓ u(-·))/2`.
pub fn symmetry_defect(u: &PeriodicField, kind: Parity) -> f64 {
    u.symmetry_defect(kind)
}
