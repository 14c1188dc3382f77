use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::models::Model;
use crate::spectral::{Grid1D, PeriodicField};
use crate::stokeslet::DensityPatch;
use crate::timestepper::StepControl;

use super::HarnessError;

/// What gets integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    Quadratic,
    CubicLocal,
    CubicNonlocal,
    /// Graph form of the interface equation, state `h`.
    Graph,
    /// Full parametric contour.
    Contour,
}

impl System {
    pub fn model(self) -> Option<Model> {
        match self {
            System::Quadratic => Some(Model::Quadratic),
            System::CubicLocal => Some(Model::CubicLocal),
            System::CubicNonlocal => Some(Model::CubicNonlocal),
            System::Graph | System::Contour => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            System::Graph => "graph",
            System::Contour => "contour",
            other => other.model().expect("model system").name(),
        }
    }
}

impl From<Model> for System {
    fn from(m: Model) -> Self {
        match m {
            Model::Quadratic => System::Quadratic,
            Model::CubicLocal => System::CubicLocal,
            Model::CubicNonlocal => System::CubicNonlocal,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graph" => Ok(System::Graph),
            "contour" => Ok(System::Contour),
            other => other.parse::<Model>().map(System::from).map_err(|_| {
                format!(
                    "unknown system `{other}` (expected quadratic, cubic-local, cubic-nonlocal, graph or contour)"
                )
            }),
        }
    }
}

/// Named initial-data families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialData {
    /// `A sin(kα)`.
    SingleMode { k: u32, amplitude: f64 },
    /// `A (sin(k₁α) + r cos(k₂α))`.
    TwoMode {
        amplitude: f64,
        k1: u32,
        k2: u32,
        ratio: f64,
    },
    /// `A Σ_{k≤band} bₖ sin(kα)` with seeded `bₖ ∝ U(-1,1) k^{-decay}`,
    /// normalised to `Σ bₖ² = 1`.
    OddRandom {
        seed: u64,
        band: u32,
        amplitude: f64,
        decay: f64,
    },
    /// `ε cos(kα)`.
    GraphCos { k: u32, epsilon: f64 },
}

impl InitialData {
    pub fn family(&self) -> &'static str {
        match self {
            InitialData::SingleMode { .. } => "single_mode",
            InitialData::TwoMode { .. } => "two_mode",
            InitialData::OddRandom { .. } => "odd_random",
            InitialData::GraphCos { .. } => "graph_cos",
        }
    }

    /// Default member of a family by name, at unit amplitude.
    pub fn named(family: &str) -> Result<Self, HarnessError> {
        Ok(match family {
            "single_mode" => InitialData::SingleMode { k: 1, amplitude: 1.0 },
            "two_mode" => InitialData::TwoMode {
                amplitude: 1.0,
                k1: 1,
                k2: 2,
                ratio: 0.5,
            },
            "odd_random" => InitialData::OddRandom {
                seed: 1,
                band: 8,
                amplitude: 1.0,
                decay: 1.0,
            },
            "graph_cos" => InitialData::GraphCos { k: 1, epsilon: 1.0 },
            other => return Err(HarnessError::Config(format!("unknown family `{other}`"))),
        })
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            InitialData::SingleMode { amplitude, .. }
            | InitialData::TwoMode { amplitude, .. }
            | InitialData::OddRandom { amplitude, .. } => amplitude,
            InitialData::GraphCos { epsilon, .. } => epsilon,
        }
    }

    pub fn with_amplitude(mut self, a: f64) -> Self {
        match &mut self {
            InitialData::SingleMode { amplitude, .. }
            | InitialData::TwoMode { amplitude, .. }
            | InitialData::OddRandom { amplitude, .. } => *amplitude = a,
            InitialData::GraphCos { epsilon, .. } => *epsilon = a,
        }
        self
    }

    pub fn is_odd(&self) -> bool {
        matches!(self, InitialData::SingleMode { .. } | InitialData::OddRandom { .. })
    }

    /// The wavenumber whose amplitude is tracked in graph and contour runs.
    pub fn leading_mode(&self) -> u32 {
        match *self {
            InitialData::SingleMode { k, .. } | InitialData::GraphCos { k, .. } => k,
            InitialData::TwoMode { k1, .. } => k1,
            InitialData::OddRandom { .. } => 1,
        }
    }

    pub fn field(&self, grid: &Grid1D) -> Result<PeriodicField, HarnessError> {
        let max_k = grid.dealias_cutoff() as u32;
        let check = |k: u32| {
            if k == 0 || k > max_k {
                Err(HarnessError::Config(format!(
                    "wavenumber {k} outside 1..={max_k} for n = {}",
                    grid.len()
                )))
            } else {
                Ok(())
            }
        };
        Ok(match *self {
            InitialData::SingleMode { k, amplitude } => {
                check(k)?;
                PeriodicField::from_fn(grid, |a| amplitude * (k as f64 * a).sin())
            }
            InitialData::TwoMode {
                amplitude,
                k1,
                k2,
                ratio,
            } => {
                check(k1)?;
                check(k2)?;
                PeriodicField::from_fn(grid, |a| {
                    amplitude * ((k1 as f64 * a).sin() + ratio * (k2 as f64 * a).cos())
                })
            }
            InitialData::OddRandom {
                seed,
                band,
                amplitude,
                decay,
            } => {
                check(band)?;
                let b = odd_random_coefficients(seed, band, decay);
                PeriodicField::from_fn(grid, |a| {
                    amplitude
                        * b.iter()
                            .enumerate()
                            .map(|(i, c)| c * ((i + 1) as f64 * a).sin())
                            .sum::<f64>()
                })
            }
            InitialData::GraphCos { k, epsilon } => {
                check(k)?;
                PeriodicField::from_fn(grid, |a| epsilon * (k as f64 * a).cos())
            }
        })
    }
}

/// Seeded sine coefficients for `odd_random`, unit Euclidean norm.
pub fn odd_random_coefficients(seed: u64, band: u32, decay: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b: Vec<f64> = (1..=band)
        .map(|k| rng.random_range(-1.0..1.0) * (k as f64).powf(-decay))
        .collect();
    let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        b.iter_mut().for_each(|v| *v /= norm);
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Densities {
    pub rho_plus: f64,
    pub rho_minus: f64,
}

impl Default for Densities {
    /// `ρ̄ = 1`, heavier fluid below.
    fn default() -> Self {
        Self {
            rho_plus: 0.0,
            rho_minus: 4.0,
        }
    }
}

impl Densities {
    pub fn patch(&self) -> Result<DensityPatch, HarnessError> {
        DensityPatch::new(self.rho_plus, self.rho_minus).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    /// Exponent in the Lagrangian functional `L`.
    pub l: f64,
    /// Exponent in the weighted functional `J`.
    pub j: f64,
}

impl Default for Deltas {
    fn default() -> Self {
        Self { l: 0.25, j: 0.25 }
    }
}

fn default_output_dir() -> String {
    "out".into()
}

/// One run, serialised as TOML. Scalars come first, then tables, so the
/// canonical form is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub system: System,
    pub n: usize,
    /// Time between recorded rows.
    pub cadence: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Window for the decay fit; defaults to `[t_end/10, t_end]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    pub initial: InitialData,
    #[serde(default)]
    pub densities: Densities,
    #[serde(default)]
    pub deltas: Deltas,
    pub control: StepControl,
}

impl ExperimentConfig {
    pub fn new(name: &str, system: System, n: usize, initial: InitialData, t_end: f64) -> Self {
        Self {
            name: name.into(),
            system,
            n,
            cadence: t_end / 200.0,
            output_dir: default_output_dir(),
            fit_window: None,
            initial,
            densities: Densities::default(),
            deltas: Deltas::default(),
            control: StepControl {
                t_end,
                ..StepControl::default()
            },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("invalid run name `{}`", self.name));
        }
        let grid = Grid1D::new(self.n).map_err(|e| HarnessError::Config(e.to_string()))?;
        if !(self.cadence >= 0.0) {
            return bad(format!("cadence must be non-negative, got {}", self.cadence));
        }
        self.control
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.initial.field(&grid)?;
        if matches!(self.system, System::Graph | System::Contour) {
            self.densities.patch()?;
        }
        for d in [self.deltas.l, self.deltas.j] {
            if !(d > 0.0 && d < 0.5) {
                return bad(format!("delta must lie in (0, 1/2), got {d}"));
            }
        }
        if let Some([a, b]) = self.fit_window {
            if !(a < b) {
                return bad(format!("empty fit window [{a}, {b}]"));
            }
        }
        Ok(())
    }

    pub fn fit_window(&self) -> (f64, f64) {
        match self.fit_window {
            Some([a, b]) => (a, b),
            None => (0.1 * self.control.t_end, self.control.t_end),
        }
    }
}
