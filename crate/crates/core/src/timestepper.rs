//! Classical RK4 with step-doubling error control, a transport CFL cap and
//! conservative blow-up bookkeeping.
//!
//! A run ends `completed` when it reaches `t_end`. Three blow-up signals are
//! tracked independently: the step has collapsed relative to the first
//! accepted step, the spectral tail has grown, and the blow-up functional has
//! passed its ceiling. The run stops as soon as all three agree (`blew_up`),
//! or earlier when the step falls below `dt_min`, the tail passes the
//! resolution guard, or the state stops being finite. An early stop without
//! all three signals is `under_resolved`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::contour::{contour_rhs, Contour};
use crate::models::{rhs as model_rhs, transport_speed, Model, ModelState};
use crate::spectral::{derivative, PeriodicField};
use crate::stokeslet::DensityPatch;

/// Linear-space operations the integrator needs.
pub trait StateVector: Clone {
    /// `self += a·other`.
    fn axpy(&mut self, a: f64, other: &Self);
    fn max_abs_diff(&self, other: &Self) -> f64;
    fn max_abs(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl StateVector for PeriodicField {
    fn axpy(&mut self, a: f64, other: &Self) {
        PeriodicField::axpy(self, a, other)
    }
    fn max_abs_diff(&self, other: &Self) -> f64 {
        PeriodicField::max_abs_diff(self, other)
    }
    fn max_abs(&self) -> f64 {
        PeriodicField::max_abs(self)
    }
    fn is_finite(&self) -> bool {
        PeriodicField::is_finite(self)
    }
}

impl StateVector for ModelState {
    fn axpy(&mut self, a: f64, other: &Self) {
        ModelState::axpy(self, a, other)
    }
    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.u.max_abs_diff(&other.u)
    }
    fn max_abs(&self) -> f64 {
        self.u.max_abs()
    }
    fn is_finite(&self) -> bool {
        ModelState::is_finite(self)
    }
}

impl StateVector for Contour {
    fn axpy(&mut self, a: f64, other: &Self) {
        Contour::axpy(self, a, other)
    }
    fn max_abs_diff(&self, other: &Self) -> f64 {
        Contour::max_abs_diff(self, other)
    }
    fn max_abs(&self) -> f64 {
        self.p1().max_abs().max(self.z2().max_abs())
    }
    fn is_finite(&self) -> bool {
        Contour::is_finite(self)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("right-hand side failed: {0}")]
    Rhs(String),
    #[error("state became non-finite")]
    NonFinite,
}

/// One classical fourth-order Runge–Kutta step.
pub fn step_rk4<S, E, F>(state: &S, dt: f64, mut f: F) -> Result<S, StepError>
where
    S: StateVector,
    E: fmt::Display,
    F: FnMut(&S) -> Result<S, E>,
{
    if !(dt > 0.0) {
        return Err(StepError::NonPositiveDt(dt));
    }
    let mut eval = |s: &S| f(s).map_err(|e| StepError::Rhs(e.to_string()));
    let k1 = eval(state)?;
    let mut y = state.clone();
    y.axpy(0.5 * dt, &k1);
    let k2 = eval(&y)?;
    let mut y = state.clone();
    y.axpy(0.5 * dt, &k2);
    let k3 = eval(&y)?;
    let mut y = state.clone();
    y.axpy(dt, &k3);
    let k4 = eval(&y)?;
    let mut out = state.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    if !out.is_finite() {
        return Err(StepError::NonFinite);
    }
    Ok(out)
}

/// A system the integrator can advance.
pub trait Dynamics {
    type State: StateVector;

    fn rhs(&self, s: &Self::State) -> Result<Self::State, String>;
    /// Largest characteristic speed, for the CFL cap.
    fn speed(&self, s: &Self::State) -> f64;
    /// Grid spacing `Δα`.
    fn spacing(&self) -> f64;
    /// Spectral energy fraction in `|k| > n/4`.
    fn tail_fraction(&self, s: &Self::State) -> f64;
    /// Quantity that diverges at a singularity (e.g. `max|u_α|`).
    fn blowup_functional(&self, s: &Self::State) -> f64;
}

/// One of the three 1D models.
#[derive(Debug, Clone, Copy)]
pub struct ModelDynamics {
    pub model: Model,
    pub spacing: f64,
    /// Tail fractions are taken relative to at least this energy.
    pub energy_floor: f64,
}

/// Relative amplitude below which a decayed model solution is round-off.
const DECAYED: f64 = 1e-12;

impl ModelDynamics {
    pub fn new(model: Model, state: &ModelState) -> Self {
        let energy: f64 = state.u.coefficients().iter().map(|c| c.norm_sqr()).sum();
        Self {
            model,
            spacing: state.u.grid().spacing(),
            energy_floor: DECAYED * DECAYED * energy,
        }
    }
}

impl Dynamics for ModelDynamics {
    type State = ModelState;

    fn rhs(&self, s: &ModelState) -> Result<ModelState, String> {
        model_rhs(s).map_err(|e| e.to_string())
    }
    fn speed(&self, s: &ModelState) -> f64 {
        transport_speed(self.model, &s.u).map_or(f64::INFINITY, |v| v.max_abs())
    }
    fn spacing(&self) -> f64 {
        self.spacing
    }
    fn tail_fraction(&self, s: &ModelState) -> f64 {
        s.u.tail_fraction_floored(self.energy_floor)
    }
    fn blowup_functional(&self, s: &ModelState) -> f64 {
        derivative(&s.u).max_abs()
    }
}

/// The graph equation at fixed `ρ̄`, state `h`.
#[derive(Debug, Clone, Copy)]
pub struct GraphDynamics {
    pub rho_bar: f64,
    pub spacing: f64,
    pub guard: f64,
}

impl Dynamics for GraphDynamics {
    type State = PeriodicField;

    fn rhs(&self, h: &PeriodicField) -> Result<PeriodicField, String> {
        let g = crate::contour::GraphState::new(h.clone(), self.rho_bar);
        crate::contour::graph_rhs_with_guard(&g, self.guard).map_err(|e| e.to_string())
    }
    fn speed(&self, _: &PeriodicField) -> f64 {
        0.0
    }
    fn spacing(&self) -> f64 {
        self.spacing
    }
    fn tail_fraction(&self, h: &PeriodicField) -> f64 {
        h.tail_fraction()
    }
    fn blowup_functional(&self, h: &PeriodicField) -> f64 {
        derivative(h).max_abs()
    }
}

/// The full contour equation.
#[derive(Debug, Clone, Copy)]
pub struct ContourDynamics {
    pub patch: DensityPatch,
    pub spacing: f64,
}

impl Dynamics for ContourDynamics {
    type State = Contour;

    fn rhs(&self, c: &Contour) -> Result<Contour, String> {
        contour_rhs(c, &self.patch)
            .map(|v| v.into_increment())
            .map_err(|e| e.to_string())
    }
    fn speed(&self, c: &Contour) -> f64 {
        contour_rhs(c, &self.patch).map_or(f64::INFINITY, |v| v.max_abs())
    }
    fn spacing(&self) -> f64 {
        self.spacing
    }
    fn tail_fraction(&self, c: &Contour) -> f64 {
        c.p1().tail_fraction().max(c.z2().tail_fraction())
    }
    fn blowup_functional(&self, c: &Contour) -> f64 {
        crate::contour::arc_chord(c).value
    }
}

fn default_collapse_ratio() -> f64 {
    3.0
}
fn default_tail_growth() -> f64 {
    1e6
}
fn default_tail_floor() -> f64 {
    1e-14
}
fn default_ceiling_ratio() -> f64 {
    4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt_init: f64,
    pub cfl_fraction: f64,
    pub dt_min: f64,
    pub t_end: f64,
    /// Tail energy fraction above which the run stops as unresolved.
    pub resolution_guard: f64,
    /// Local error tolerance for step doubling; `None` gives fixed steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// The step has collapsed once it falls this far below the first step.
    #[serde(default = "default_collapse_ratio")]
    pub collapse_ratio: f64,
    /// Tail growth factor over the initial tail that counts as a signal.
    #[serde(default = "default_tail_growth")]
    pub tail_growth: f64,
    /// Absolute floor for the tail-growth signal.
    #[serde(default = "default_tail_floor")]
    pub tail_floor: f64,
    /// Blow-up functional ceiling, relative to its initial value.
    #[serde(default = "default_ceiling_ratio")]
    pub ceiling_ratio: f64,
    /// Time between hook invocations; 0 calls the hook after every step.
    #[serde(default)]
    pub hook_interval: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            dt_init: 1e-2,
            cfl_fraction: 0.5,
            dt_min: 1e-10,
            t_end: 1.0,
            resolution_guard: 1e-4,
            tolerance: Some(1e-13),
            collapse_ratio: default_collapse_ratio(),
            tail_growth: default_tail_growth(),
            tail_floor: default_tail_floor(),
            ceiling_ratio: default_ceiling_ratio(),
            hook_interval: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("dt_min ({dt_min}) must be positive and below dt_init ({dt_init})")]
    StepBounds { dt_min: f64, dt_init: f64 },
    #[error("cfl_fraction must lie in (0, 1], got {0}")]
    Cfl(f64),
    #[error("t_end must be finite and non-negative, got {0}")]
    EndTime(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

impl StepControl {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_init) {
            return Err(ControlError::StepBounds {
                dt_min: self.dt_min,
                dt_init: self.dt_init,
            });
        }
        if !(self.cfl_fraction > 0.0 && self.cfl_fraction <= 1.0) {
            return Err(ControlError::Cfl(self.cfl_fraction));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(ControlError::EndTime(self.t_end));
        }
        if !(self.resolution_guard > 0.0) {
            return Err(ControlError::NonPositive("resolution_guard"));
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                return Err(ControlError::NonPositive("tolerance"));
            }
        }
        if !(self.collapse_ratio > 1.0) {
            return Err(ControlError::NonPositive("collapse_ratio - 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlewUp,
    UnderResolved,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlewUp => "blew_up",
            RunStatus::UnderResolved => "under_resolved",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The three independent blow-up indicators, with the measured values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlowupSignals {
    pub dt_collapse: bool,
    pub tail_growth: bool,
    pub functional: bool,
    /// First accepted step over the last attempted step.
    pub dt_ratio: f64,
    /// Largest tail fraction seen.
    pub tail_max: f64,
    /// Largest functional value over its initial value.
    pub functional_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub status: RunStatus,
    pub t_final: f64,
    pub reason: String,
    /// The diagnostic value that ended the run, if it ended early.
    pub trigger_value: Option<f64>,
    pub signals: BlowupSignals,
}

/// What a hook sees after every step (or at its cadence).
pub struct StepInfo<'a, S> {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub state: &'a S,
    pub tail: f64,
    pub functional: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("hook failed at step {step} (t = {t}): {message}")]
    Hook { step: usize, t: f64, message: String },
    #[error("initial state rejected: {0}")]
    Initial(String),
}

#[derive(Debug, Clone)]
pub struct Run<S> {
    pub state: S,
    pub verdict: RunVerdict,
    pub steps: usize,
    pub rejected: usize,
}

enum Stop {
    Collapse(f64),
    Guard(f64),
    Failure(String),
}

/// Advances `state` to `control.t_end` or to an early stop.
pub fn integrate<D, H>(
    dynamics: &D,
    state: D::State,
    control: &StepControl,
    mut hook: H,
) -> Result<Run<D::State>, IntegrateError>
where
    D: Dynamics,
    H: FnMut(&StepInfo<'_, D::State>) -> Result<(), String>,
{
    control.validate()?;
    let mut state = state;
    let mut t = 0.0;
    let tail0 = dynamics.tail_fraction(&state);
    let f0 = dynamics.blowup_functional(&state);
    if !state.is_finite() || !f0.is_finite() {
        return Err(IntegrateError::Initial("initial state is not finite".into()));
    }
    let mut signals = BlowupSignals {
        tail_max: tail0,
        functional_ratio: 1.0,
        dt_ratio: 1.0,
        ..Default::default()
    };
    let tail_threshold = (control.tail_growth * tail0).max(control.tail_floor);
    let call = |hook: &mut H, step: usize, t: f64, dt: f64, s: &D::State, tail, func| {
        hook(&StepInfo {
            step,
            t,
            dt,
            state: s,
            tail,
            functional: func,
        })
        .map_err(|message| IntegrateError::Hook { step, t, message })
    };
    call(&mut hook, 0, 0.0, 0.0, &state, tail0, f0)?;

    let mut steps = 0;
    let mut rejected = 0;
    let mut dt_prop = control.dt_init;
    let mut dt_first: Option<f64> = None;
    let mut next_hook = control.hook_interval;
    let eps = 1e-12 * control.t_end.max(1.0);

    let mut last_hooked = 0;
    let mut last_dt = 0.0;
    let stop = loop {
        if t >= control.t_end - eps {
            break None;
        }
        let speed = dynamics.speed(&state);
        let dt_cfl = if speed > 0.0 {
            control.cfl_fraction * dynamics.spacing() / speed
        } else {
            f64::INFINITY
        };
        let remaining = control.t_end - t;
        let dt_free = dt_prop.min(control.dt_init).min(dt_cfl);
        let dt = dt_free.min(remaining);
        if let Some(first) = dt_first {
            signals.dt_ratio = signals.dt_ratio.max(first / dt_free);
            if first / dt_free >= control.collapse_ratio {
                signals.dt_collapse = true;
            }
        }
        if dt_free < control.dt_min {
            signals.dt_collapse = true;
            break Some(Stop::Collapse(dt_free));
        }
        if signals.dt_collapse && signals.tail_growth && signals.functional {
            break Some(Stop::Collapse(dt_free));
        }

        let rhs = |s: &D::State| dynamics.rhs(s);
        let next = match control.tolerance {
            None => match step_rk4(&state, dt, rhs) {
                Ok(s) => s,
                Err(e) => break Some(Stop::Failure(e.to_string())),
            },
            Some(tol) => {
                let full = step_rk4(&state, dt, rhs);
                let half = step_rk4(&state, 0.5 * dt, rhs)
                    .and_then(|h| step_rk4(&h, 0.5 * dt, rhs));
                match (full, half) {
                    (Ok(full), Ok(half)) => {
                        let err = half.max_abs_diff(&full) / (tol * (1.0 + half.max_abs()));
                        if err > 1.0 {
                            rejected += 1;
                            dt_prop = dt * (0.9 * err.powf(-0.2)).max(0.1);
                            continue;
                        }
                        let grow = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 4.0 };
                        if dt == dt_free {
                            dt_prop = dt * grow.min(4.0);
                        }
                        half
                    }
                    _ => {
                        rejected += 1;
                        dt_prop = 0.25 * dt;
                        continue;
                    }
                }
            }
        };
        if dt_first.is_none() && dt == dt_free {
            dt_first = Some(dt);
        }
        state = next;
        t += dt;
        steps += 1;
        last_dt = dt;

        let tail = dynamics.tail_fraction(&state);
        let func = dynamics.blowup_functional(&state);
        signals.tail_max = signals.tail_max.max(tail);
        if tail > tail_threshold {
            signals.tail_growth = true;
        }
        if f0 > 0.0 {
            signals.functional_ratio = signals.functional_ratio.max(func / f0);
        }
        if func >= control.ceiling_ratio * f0 && f0 > 0.0 {
            signals.functional = true;
        }
        if control.hook_interval <= 0.0 || t >= next_hook - eps || t >= control.t_end - eps {
            call(&mut hook, steps, t, dt, &state, tail, func)?;
            last_hooked = steps;
            while next_hook <= t + eps && control.hook_interval > 0.0 {
                next_hook += control.hook_interval;
            }
        }
        if !func.is_finite() {
            break Some(Stop::Failure("blow-up functional is not finite".into()));
        }
        if tail > control.resolution_guard {
            break Some(Stop::Guard(tail));
        }
    };
    // The final state is always recorded, whatever the cadence.
    if steps > last_hooked {
        let tail = dynamics.tail_fraction(&state);
        let func = dynamics.blowup_functional(&state);
        call(&mut hook, steps, t, last_dt, &state, tail, func)?;
    }

    let verdict = match stop {
        None => RunVerdict {
            status: RunStatus::Completed,
            t_final: t,
            reason: format!("reached t_end = {} in {steps} steps", control.t_end),
            trigger_value: None,
            signals,
        },
        Some(stop) => {
            let (reason, trigger) = match &stop {
                Stop::Collapse(dt) => (format!("time step collapsed to {dt:.3e}"), Some(*dt)),
                Stop::Guard(tail) => (
                    format!(
                        "spectral tail {tail:.3e} exceeded guard {:.3e}",
                        control.resolution_guard
                    ),
                    Some(*tail),
                ),
                Stop::Failure(msg) => (msg.clone(), None),
            };
            let all = signals.dt_collapse && signals.tail_growth && signals.functional;
            let status = if all {
                RunStatus::BlewUp
            } else {
                RunStatus::UnderResolved
            };
            let detail = format!(
                "{reason}; signals: dt collapse {} (ratio {:.1}), tail growth {} (max {:.2e}), functional {} (ratio {:.2})",
                signals.dt_collapse,
                signals.dt_ratio,
                signals.tail_growth,
                signals.tail_max,
                signals.functional,
                signals.functional_ratio
            );
            RunVerdict {
                status,
                t_final: t,
                reason: detail,
                trigger_value: trigger,
                signals,
            }
        }
    };
    Ok(Run {
        state,
        verdict,
        steps,
        rejected,
    })
}
