//! Amplitude bisection between decay and blow-up.
//!
//! Each amplitude is run at `n` and `2n` (half the initial step) and
//! classified only if both verdicts agree and neither is `under_resolved`.
//! Otherwise it is re-run once at `4n`; agreement of `2n` and `4n` decides,
//! and anything else is inconclusive and stops the bisection without an
//! interval. Near the threshold the blow-up time sits at the horizon, where
//! a single coarse run can flag blow-up that a finer one resolves past.

use serde::Serialize;

use crate::diagnostics::{functional_l, LagrangianTracker};
use crate::par::map_indices;
use crate::spectral::Grid1D;

use super::config::{ExperimentConfig, System};
use super::run::simulate;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Decay,
    BlowUp,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRun {
    pub amplitude: f64,
    pub n: usize,
    pub status: String,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub amplitude: f64,
    pub l_initial: f64,
    pub u0_l2: f64,
    pub squared: bool,
    pub unsquared: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectReport {
    pub system: String,
    pub family: String,
    /// `[decay, blow-up]` amplitudes, absent when the bisection failed.
    pub interval: Option<[f64; 2]>,
    /// Endpoint verdicts re-checked at doubled resolution.
    pub endpoints_stable: Option<bool>,
    pub note: String,
    /// Every run, in the order performed.
    pub runs: Vec<SweepRun>,
    /// Cubic-local only: the blow-up hypothesis on the upper endpoint's data.
    pub hypothesis: Option<HypothesisCheck>,
}

impl BisectReport {
    pub fn relative_width(&self) -> Option<f64> {
        self.interval.map(|[a, b]| (b - a) / b.abs().max(f64::MIN_POSITIVE))
    }
}

fn at(base: &ExperimentConfig, amplitude: f64, n: usize, dt_scale: f64) -> ExperimentConfig {
    let mut c = base.clone();
    c.initial = c.initial.with_amplitude(amplitude);
    c.n = n;
    c.control.dt_init *= dt_scale;
    c.control.dt_min = c.control.dt_min.min(0.5 * c.control.dt_init);
    c.name = format!("{}-a{amplitude}-n{n}", base.name);
    c
}

fn run_at(base: &ExperimentConfig, amplitude: f64, level: u32) -> Result<SweepRun, HarnessError> {
    let n = base.n << level;
    let rec = simulate(&at(base, amplitude, n, 0.5f64.powi(level as i32)))?;
    Ok(SweepRun {
        amplitude,
        n,
        status: rec.status().name().into(),
        t_final: rec.verdict.t_final,
    })
}

fn class_of(status: &str) -> Class {
    match status {
        "completed" => Class::Decay,
        "blew_up" => Class::BlowUp,
        _ => Class::Inconclusive,
    }
}

/// A class is accepted only when two consecutive resolutions agree on it.
fn classify(base: &ExperimentConfig, amplitude: f64) -> Result<(Class, Vec<SweepRun>), HarnessError> {
    let mut runs = Vec::new();
    for r in map_indices(2, |i| run_at(base, amplitude, i as u32)) {
        runs.push(r?);
    }
    let (c0, c1) = (class_of(&runs[0].status), class_of(&runs[1].status));
    if c0 == c1 && c0 != Class::Inconclusive {
        return Ok((c0, runs));
    }
    runs.push(run_at(base, amplitude, 2)?);
    let c2 = class_of(&runs[2].status);
    let class = if c2 == c1 { c2 } else { Class::Inconclusive };
    Ok((class, runs))
}

/// Some resolution `n` and its double both gave `status` at `amplitude`.
fn stable_under_doubling(runs: &[SweepRun], amplitude: f64, status: &str) -> bool {
    let hit = |n: usize| {
        runs.iter()
            .any(|r| r.amplitude == amplitude && r.n == n && r.status == status)
    };
    runs.iter()
        .any(|r| r.amplitude == amplitude && r.status == status && hit(2 * r.n))
}

fn hypothesis(base: &ExperimentConfig, amplitude: f64) -> Result<HypothesisCheck, HarnessError> {
    let grid = Grid1D::new(base.n).map_err(|e| HarnessError::Config(e.to_string()))?;
    let u0 = base.initial.with_amplitude(amplitude).field(&grid)?;
    let tracker =
        LagrangianTracker::new(base.deltas.l).map_err(|e| HarnessError::Config(e.to_string()))?;
    let l0 = functional_l(&u0, &tracker).map_err(|e| HarnessError::Config(e.to_string()))?;
    let norm = u0.l2_norm();
    Ok(HypothesisCheck {
        amplitude,
        l_initial: l0,
        u0_l2: norm,
        squared: l0 >= norm * norm,
        unsquared: l0 > norm,
    })
}

/// Bisects the amplitude of `base.initial` on `[lo, hi]` for `budget`
/// halvings. `lo` must decay and `hi` must blow up.
pub fn threshold_bisect(
    base: &ExperimentConfig,
    lo: f64,
    hi: f64,
    budget: u32,
) -> Result<BisectReport, HarnessError> {
    base.validate()?;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(HarnessError::Config(format!("invalid bracket [{lo}, {hi}]")));
    }
    let mut report = BisectReport {
        system: base.system.name().into(),
        family: base.initial.family().into(),
        interval: None,
        endpoints_stable: None,
        note: String::new(),
        runs: Vec::new(),
        hypothesis: None,
    };
    if lo == hi {
        report.interval = Some([lo, hi]);
        report.note = "degenerate bracket; nothing to run".into();
        return Ok(report);
    }

    // The two endpoints are independent; run them side by side.
    let ends = map_indices(2, |i| classify(base, if i == 0 { lo } else { hi }));
    let mut classes = Vec::new();
    for e in ends {
        let (class, runs) = e?;
        classes.push(class);
        report.runs.extend(runs);
    }
    if classes[0] != Class::Decay || classes[1] != Class::BlowUp {
        report.note = format!(
            "bracket precondition failed: lo classified {:?}, hi classified {:?}",
            classes[0], classes[1]
        );
        return Ok(report);
    }

    let (mut a, mut b) = (lo, hi);
    for _ in 0..budget {
        let mid = 0.5 * (a + b);
        let (class, runs) = classify(base, mid)?;
        report.runs.extend(runs);
        match class {
            Class::Decay => a = mid,
            Class::BlowUp => b = mid,
            Class::Inconclusive => {
                report.note = format!("amplitude {mid}: no two consecutive resolutions agree");
                return Ok(report);
            }
        }
    }

    // At any fixed resolution, a decay verdict above a blow-up verdict means
    // the verdict map is not monotone in the amplitude.
    let mut sizes: Vec<usize> = report.runs.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for n in sizes {
        let at_n = || report.runs.iter().filter(move |r| r.n == n);
        let max_decay = at_n()
            .filter(|r| r.status == "completed")
            .map(|r| r.amplitude)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_blow = at_n()
            .filter(|r| r.status == "blew_up")
            .map(|r| r.amplitude)
            .fold(f64::INFINITY, f64::min);
        if max_decay > min_blow {
            report.note = format!(
                "non-monotone classification at n = {n}: decay at {max_decay} above blow-up at {min_blow}"
            );
            return Ok(report);
        }
    }

    let stable = stable_under_doubling(&report.runs, a, "completed")
        && stable_under_doubling(&report.runs, b, "blew_up");
    report.interval = Some([a, b]);
    report.endpoints_stable = Some(stable);
    report.note = format!("{} runs", report.runs.len());
    if base.system == System::CubicLocal {
        report.hypothesis = Some(hypothesis(base, b)?);
    }
    Ok(report)
}
