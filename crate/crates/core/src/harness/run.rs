use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::contour::{arc_chord, Contour, GRAPH_RESOLUTION_GUARD};
use crate::diagnostics::{
    analyticity_strip, comparison_blowup_time, comparison_ode, fit_decay, functional_j,
    functional_l, riccati_residual, track_min_slope, LagrangianTracker,
};
use crate::fit::least_squares;
use crate::models::{energy_balance, rhs_field, Model, ModelState, TripleNorm};
use crate::spectral::{Grid1D, Parity, PeriodicField};
use crate::timestepper::{
    integrate, ContourDynamics, GraphDynamics, ModelDynamics, Run, RunStatus, RunVerdict,
    StepInfo,
};

use super::config::{ExperimentConfig, System};
use super::HarnessError;

/// Recorded time series; one row per hook invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// `(t, value)` pairs of one column.
    pub fn column(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let i = self.index(name)?;
        Some(self.rows.iter().map(|r| (r[0], r[i])).collect())
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Scalars derived from a run. Every entry can be recomputed from the
/// series and the config.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub system: String,
    pub n: usize,
    pub status: String,
    pub reason: String,
    pub t_final: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_window: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_steeper_than_power: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triple_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triple_norm_attained_at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_initial: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ode_blowup_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub riccati_residual_min: Option<f64>,
    /// `max (m - m_ode)` over the records.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_excess_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_residual_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odd_defect_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_initial: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0_l2: Option<f64>,
    /// `L(0) ≥ ‖u₀‖²` (theorem statement).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_hypothesis_squared: Option<bool>,
    /// `L(0) > ‖u₀‖` (as used in the proof).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_hypothesis_unsquared: Option<bool>,
    /// `J` strictly increasing on `[0.9 t_final, t_final]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_increasing_final_decade: Option<bool>,
    /// Least-squares slope of `log(mode amplitude)` against `t`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_decay_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_monotone: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arc_chord_max: Option<f64>,
}

impl Summary {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("summary is always serialisable")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub series: Series,
    pub verdict: RunVerdict,
    pub summary: Summary,
}

impl ExperimentRecord {
    pub fn status(&self) -> RunStatus {
        self.verdict.status
    }
}

/// Paths written by [`write_record`].
#[derive(Debug, Clone)]
pub struct RecordPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub config: PathBuf,
}

fn nan_on_err<E>(r: Result<f64, E>) -> f64 {
    r.unwrap_or(f64::NAN)
}

fn strip_width(u: &PeriodicField) -> f64 {
    nan_on_err(analyticity_strip(u).map(|s| s.delta))
}

fn mode_amplitude(u: &PeriodicField, k: u32) -> f64 {
    2.0 * u.coefficient(k as i64).norm()
}

fn finish<S>(
    config: &ExperimentConfig,
    series: Series,
    run: Run<S>,
    extra: impl FnOnce(&mut Summary, &Series),
) -> ExperimentRecord {
    let v = &run.verdict;
    let mut summary = Summary {
        name: config.name.clone(),
        system: config.system.name().into(),
        n: config.n,
        status: v.status.name().into(),
        reason: v.reason.clone(),
        t_final: v.t_final,
        steps: run.steps,
        rejected_steps: run.rejected,
        trigger_value: v.trigger_value,
        blowup_time: (v.status == RunStatus::BlewUp).then_some(v.t_final),
        ..Default::default()
    };
    extra(&mut summary, &series);
    ExperimentRecord {
        config: config.clone(),
        series,
        verdict: run.verdict,
        summary,
    }
}

fn column_extreme(series: &Series, name: &str, max: bool) -> Option<f64> {
    let col = series.column(name)?;
    let it = col.into_iter().map(|(_, v)| v).filter(|v| !v.is_nan());
    Some(if max {
        it.fold(f64::NEG_INFINITY, f64::max)
    } else {
        it.fold(f64::INFINITY, f64::min)
    })
}

fn hook_error(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn simulate_model(config: &ExperimentConfig, model: Model) -> Result<ExperimentRecord, HarnessError> {
    let grid = Grid1D::new(config.n).map_err(|e| HarnessError::Config(e.to_string()))?;
    let u0 = config.initial.field(&grid)?;
    let odd = config.initial.is_odd();
    let (exponent, sobolev) = model.triple_norm_params();
    let a = 4f64.ln();
    let m0 = track_min_slope(&u0).m;

    let mut columns = vec!["t", "dt", "l2", "hdot", "linf", "mean", "m", "riccati_residual"];
    let with_ode = model == Model::Quadratic;
    let with_l = model == Model::CubicLocal;
    let with_j = model == Model::CubicNonlocal && odd;
    let with_energy = model != Model::CubicNonlocal;
    if with_ode {
        columns.push("m_ode");
    }
    if with_l {
        columns.push("lagrangian_l");
    }
    if with_j {
        columns.push("weighted_j");
    }
    columns.extend(["delta_strip", "tail_fraction"]);
    if with_energy {
        columns.push("energy_residual");
    }
    if odd {
        columns.push("odd_defect");
    }
    let mut series = Series::new(columns);
    let mut tracker = LagrangianTracker::new(config.deltas.l).map_err(|e| HarnessError::Config(e.to_string()))?;
    let delta_j = config.deltas.j;

    let state = ModelState::new(u0.clone(), model);
    let dynamics = ModelDynamics::new(model, &state);
    // J is judged on its final decade, which a blow-up run may cross in a
    // handful of cadence intervals; those runs see every step and thin the
    // rows themselves.
    let mut control = config.control;
    control.hook_interval = if with_j { 0.0 } else { config.cadence };
    let mut j_history: Vec<(f64, f64)> = Vec::new();
    let mut pending: Option<Vec<f64>> = None;
    let mut next_row = 0.0;
    let eps = 1e-12 * control.t_end.max(1.0);
    let hook = |info: &StepInfo<'_, ModelState>| -> Result<(), String> {
        let u = &info.state.u;
        let slope = track_min_slope(u);
        let mut row = vec![
            info.t,
            info.dt,
            u.l2_norm(),
            u.hdot_norm(sobolev),
            u.max_abs(),
            u.mean(),
            slope.m,
            riccati_residual(u),
        ];
        if with_ode {
            row.push(comparison_ode(m0, a, info.t));
        }
        if with_l {
            tracker.y = info.state.trajectory;
            row.push(functional_l(u, &tracker).map_err(hook_error)?);
        }
        if with_j {
            let j = functional_j(u, delta_j).map_err(hook_error)?;
            j_history.push((info.t, j));
            row.push(j);
        }
        row.push(strip_width(u));
        row.push(info.tail);
        if with_energy {
            let r = rhs_field(model, u).map_err(hook_error)?;
            row.push(energy_balance(info.state, &r).map_err(hook_error)?);
        }
        if odd {
            row.push(u.symmetry_defect(Parity::Odd));
        }
        if !with_j || info.t >= next_row - eps {
            series.rows.push(row);
            pending = None;
            while next_row <= info.t + eps && config.cadence > 0.0 {
                next_row += config.cadence;
            }
        } else {
            pending = Some(row);
        }
        Ok(())
    };
    let run = integrate(&dynamics, state, &control, hook).map_err(HarnessError::from_integrate)?;
    series.rows.extend(pending);

    let window = config.fit_window();
    let u0_l2 = u0.l2_norm();
    Ok(finish(config, series, run, |s, series| {
        if s.status == "completed" {
            if let Some(fit) = series
                .column("l2")
                .and_then(|c| fit_decay(&c, window).ok())
            {
                s.decay_exponent = Some(fit.exponent);
                s.decay_window = Some([window.0, window.1]);
                s.decay_steeper_than_power = Some(fit.steeper_than_power);
            }
        }
        let mut tn = TripleNorm::new(exponent, sobolev);
        let (il, ih) = (series.index("l2").unwrap(), series.index("hdot").unwrap());
        for r in &series.rows {
            let v = (1.0 + r[0]).powf(exponent) * r[il] + r[ih];
            if v > tn.value {
                tn.value = v;
                tn.attained_at = r[0];
            }
        }
        s.triple_norm = Some(tn.value);
        s.triple_norm_attained_at = Some(tn.attained_at);
        s.m_initial = Some(m0);
        s.riccati_residual_min = column_extreme(series, "riccati_residual", false);
        if with_ode {
            s.ode_blowup_time = comparison_blowup_time(m0, a);
            let (im, io) = (series.index("m").unwrap(), series.index("m_ode").unwrap());
            s.m_excess_max = Some(
                series
                    .rows
                    .iter()
                    .filter(|r| r[io].is_finite())
                    .map(|r| r[im] - r[io])
                    .fold(f64::NEG_INFINITY, f64::max),
            );
        }
        s.energy_residual_max = column_extreme(series, "energy_residual", true);
        s.odd_defect_max = column_extreme(series, "odd_defect", true);
        if with_l {
            let l0 = series.rows[0][series.index("lagrangian_l").unwrap()];
            s.l_initial = Some(l0);
            s.u0_l2 = Some(u0_l2);
            s.l_hypothesis_squared = Some(l0 >= u0_l2 * u0_l2);
            s.l_hypothesis_unsquared = Some(l0 > u0_l2);
        }
        if with_j {
            let t_from = 0.9 * s.t_final;
            let tail: Vec<f64> = j_history
                .iter()
                .filter(|(t, _)| *t >= t_from)
                .map(|(_, j)| *j)
                .collect();
            s.j_increasing_final_decade =
                (tail.len() >= 2).then(|| tail.windows(2).all(|w| w[1] > w[0]));
        }
    }))
}

/// Slope of `log(amplitude)` against `t` and whether the amplitude never grew.
fn mode_trend(series: &Series) -> (Option<f64>, Option<bool>) {
    let Some(col) = series.column("mode_amplitude") else {
        return (None, None);
    };
    let pts: Vec<(f64, f64)> = col.into_iter().filter(|(_, v)| *v > 0.0).collect();
    let monotone = pts.windows(2).all(|w| w[1].1 <= w[0].1);
    let rows: Vec<Vec<f64>> = pts.iter().map(|(t, _)| vec![1.0, *t]).collect();
    let b: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let rate = if pts.len() >= 2 {
        least_squares(&rows, &b).map(|x| x[1])
    } else {
        None
    };
    (rate, Some(monotone))
}

fn simulate_graph(config: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    let grid = Grid1D::new(config.n).map_err(|e| HarnessError::Config(e.to_string()))?;
    let h0 = config.initial.field(&grid)?;
    let patch = config.densities.patch()?;
    let k = config.initial.leading_mode();
    let dynamics = GraphDynamics {
        rho_bar: patch.rho_bar(),
        spacing: grid.spacing(),
        guard: GRAPH_RESOLUTION_GUARD,
    };
    let mut control = config.control;
    control.hook_interval = config.cadence;
    let mut series = Series::new(vec![
        "t",
        "dt",
        "l2",
        "linf",
        "mode_amplitude",
        "delta_strip",
        "tail_fraction",
    ]);
    let hook = |info: &StepInfo<'_, PeriodicField>| -> Result<(), String> {
        let h = info.state;
        series.rows.push(vec![
            info.t,
            info.dt,
            h.l2_norm(),
            h.max_abs(),
            mode_amplitude(h, k),
            strip_width(h),
            info.tail,
        ]);
        Ok(())
    };
    let run = integrate(&dynamics, h0, &control, hook).map_err(HarnessError::from_integrate)?;
    Ok(finish(config, series, run, |s, series| {
        let (rate, mono) = mode_trend(series);
        s.mode_decay_rate = rate;
        s.mode_monotone = mono;
    }))
}

fn simulate_contour(config: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    let grid = Grid1D::new(config.n).map_err(|e| HarnessError::Config(e.to_string()))?;
    let h0 = config.initial.field(&grid)?;
    let patch = config.densities.patch()?;
    let k = config.initial.leading_mode();
    let dynamics = ContourDynamics {
        patch,
        spacing: grid.spacing(),
    };
    let mut control = config.control;
    control.hook_interval = config.cadence;
    let mut series = Series::new(vec![
        "t",
        "dt",
        "z2_l2",
        "z2_linf",
        "mode_amplitude",
        "arc_chord",
        "tail_fraction",
    ]);
    let hook = |info: &StepInfo<'_, Contour>| -> Result<(), String> {
        let c = info.state;
        series.rows.push(vec![
            info.t,
            info.dt,
            c.z2().l2_norm(),
            c.max_abs_z2(),
            mode_amplitude(c.z2(), k),
            arc_chord(c).value,
            info.tail,
        ]);
        Ok(())
    };
    let run = integrate(&dynamics, Contour::graph(&h0), &control, hook)
        .map_err(HarnessError::from_integrate)?;
    Ok(finish(config, series, run, |s, series| {
        let (rate, mono) = mode_trend(series);
        s.mode_decay_rate = rate;
        s.mode_monotone = mono;
        s.arc_chord_max = column_extreme(series, "arc_chord", true);
    }))
}

/// Runs a config in memory; nothing is written.
pub fn simulate(config: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    config.validate()?;
    match config.system {
        System::Graph => simulate_graph(config),
        System::Contour => simulate_contour(config),
        other => simulate_model(config, other.model().expect("model system")),
    }
}

/// Writes `<name>.csv`, `<name>.summary.toml` and `<name>.config.toml`.
pub fn write_record(record: &ExperimentRecord, dir: &Path) -> Result<RecordPaths, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    let name = &record.config.name;
    let paths = RecordPaths {
        csv: dir.join(format!("{name}.csv")),
        summary: dir.join(format!("{name}.summary.toml")),
        config: dir.join(format!("{name}.config.toml")),
    };
    let write = |p: &Path, bytes: &[u8]| {
        fs::write(p, bytes).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))
    };
    write(&paths.csv, &record.series.to_csv())?;
    write(&paths.summary, record.summary.to_toml().as_bytes())?;
    write(&paths.config, record.config.to_toml().as_bytes())?;
    Ok(paths)
}

/// [`simulate`] followed by [`write_record`] into `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(ExperimentRecord, RecordPaths), HarnessError> {
    let record = simulate(config)?;
    let paths = write_record(&record, Path::new(&config.output_dir))?;
    Ok((record, paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::InitialData;

    fn small(system: System, initial: InitialData, t_end: f64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new("t", system, 64, initial, t_end);
        c.cadence = t_end / 10.0;
        c
    }

    #[test]
    fn zero_horizon_records_one_row() {
        let c = small(System::Quadratic, InitialData::SingleMode { k: 1, amplitude: 0.1 }, 0.0);
        let r = simulate(&c).unwrap();
        assert_eq!(r.status(), RunStatus::Completed);
        assert_eq!(r.series.rows.len(), 1);
        assert_eq!(r.summary.steps, 0);
    }

    #[test]
    fn series_is_monotone_and_summary_recomputable() {
        let c = small(System::CubicLocal, InitialData::OddRandom { seed: 2, band: 4, amplitude: 0.2, decay: 1.0 }, 1.0);
        let r = simulate(&c).unwrap();
        assert!(r.series.rows.windows(2).all(|w| w[1][0] > w[0][0]));
        assert_eq!(r.series.rows.last().unwrap()[0], r.summary.t_final);
        let e = r.summary.energy_residual_max.unwrap();
        assert!(e < 1e-10);
        // Odd data makes W even, so L vanishes initially.
        assert!(r.summary.l_initial.unwrap().abs() < 1e-12);
        assert_eq!(r.summary.l_hypothesis_unsquared, Some(false));
    }

    #[test]
    fn csv_is_deterministic() {
        let c = small(System::CubicNonlocal, InitialData::SingleMode { k: 1, amplitude: 0.5 }, 0.5);
        let a = simulate(&c).unwrap().series.to_csv();
        let b = simulate(&c).unwrap().series.to_csv();
        assert_eq!(a, b);
        let header = String::from_utf8(a).unwrap();
        assert!(header.starts_with("t,dt,l2,hdot,linf,mean,m,riccati_residual,weighted_j,"));
    }

    #[test]
    fn graph_run_decays_at_linear_rate() {
        let c = small(System::Graph, InitialData::GraphCos { k: 2, epsilon: 1e-3 }, 1.0);
        let r = simulate(&c).unwrap();
        assert_eq!(r.status(), RunStatus::Completed);
        assert!((r.summary.mode_decay_rate.unwrap() + 0.5).abs() < 1e-3);
        assert_eq!(r.summary.mode_monotone, Some(true));
    }

    #[test]
    fn writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let c = small(System::Quadratic, InitialData::SingleMode { k: 1, amplitude: 0.1 }, 0.2);
        let r = simulate(&c).unwrap();
        let p = write_record(&r, dir.path()).unwrap();
        let summary = fs::read_to_string(&p.summary).unwrap();
        assert!(summary.contains("status = \"completed\""));
        let cfg = ExperimentConfig::from_toml(&fs::read_to_string(&p.config).unwrap()).unwrap();
        assert_eq!(cfg, c);
        assert_eq!(fs::read(&p.csv).unwrap(), r.series.to_csv());
    }
}
