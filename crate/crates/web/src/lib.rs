//! Browser demo: thin wasm-bindgen wrappers over the core crate.

use std::f64::consts::PI;

use stokes_lab::harness::{simulate, ExperimentConfig, InitialData, System};
use stokes_lab::stokeslet::{reduced_kernels, StripPoint};
use wasm_bindgen::prelude::*;

/// Result of one run: status line plus the recorded series as CSV.
#[wasm_bindgen]
pub struct RunOutput {
    status: String,
    csv: String,
}

#[wasm_bindgen]
impl RunOutput {
    #[wasm_bindgen(getter)]
    pub fn status(&self) -> String {
        self.status.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn csv(&self) -> String {
        self.csv.clone()
    }
}

/// Runs `system` from a single-mode datum (`ε cos kα` for the graph).
#[wasm_bindgen]
pub fn run_system(
    system: &str,
    k: u32,
    amplitude: f64,
    n: usize,
    t_end: f64,
) -> Result<RunOutput, JsError> {
    let system: System = system.parse().map_err(|e: String| JsError::new(&e))?;
    let initial = match system {
        System::Graph | System::Contour => InitialData::GraphCos { k, epsilon: amplitude },
        _ => InitialData::SingleMode { k, amplitude },
    };
    let cfg = ExperimentConfig::new("web", system, n, initial, t_end);
    let rec = simulate(&cfg).map_err(|e| JsError::new(&e.to_string()))?;
    let s = &rec.summary;
    let mut status = format!("{} at t = {:.6} after {} steps", s.status, s.t_final, s.steps);
    if let Some(t) = s.ode_blowup_time {
        status.push_str(&format!(", comparison ODE blows up at {t:.6}"));
    }
    if let Some(r) = s.mode_decay_rate {
        status.push_str(&format!(", mode decay rate {r:.4} (expected {:.4})", -1.0 / k as f64));
    }
    Ok(RunOutput {
        status,
        csv: String::from_utf8_lossy(&rec.series.to_csv()).into_owned(),
    })
}

/// Reduced kernels along `y₂ = const`: `[y1, S̃₁, S̃₂]` interleaved over
/// `count` points of `(-π, π]`, skipping the origin.
#[wasm_bindgen]
pub fn kernel_slice(y2: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * count);
    for i in 1..=count {
        let y1 = -PI + 2.0 * PI * i as f64 / count as f64;
        if let Ok((s1, s2)) = reduced_kernels(StripPoint::new(y1, y2)) {
            out.extend([y1, s1, s2]);
        }
    }
    out
}
