//! The three 1D models
//!
//! ```text
//! quadratic       u_t + u u_α        = -Λ⁻¹u
//! cubic-local     u_t + u² u_α       = -Λ⁻¹u
//! cubic-nonlocal  u_t + ½ H(u²) u_α  = -Λ⁻¹u
//! ```
//!
//! The local transport terms are evaluated in conservative form,
//! `u u_α = ½ ∂(u²)` and `u² u_α = ⅓ ∂(u³)`, so the mean is conserved to
//! round-off. Every product is followed by the 2/3 rule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::spectral::{
    derivative, hilbert, lambda_inv, lambda_inv_half_norm_sq, product, product3, PeriodicField,
    SpectralError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Quadratic,
    CubicLocal,
    CubicNonlocal,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Quadratic, Model::CubicLocal, Model::CubicNonlocal];

    pub fn name(self) -> &'static str {
        match self {
            Model::Quadratic => "quadratic",
            Model::CubicLocal => "cubic-local",
            Model::CubicNonlocal => "cubic-nonlocal",
        }
    }

    /// `(e, s)` of the energy norm `sup (1+t)^e ‖u‖_{L²} + ‖u‖_{Ḣˢ}`.
    pub fn triple_norm_params(self) -> (f64, f64) {
        match self {
            Model::Quadratic => (2.25, 4.0),
            Model::CubicLocal | Model::CubicNonlocal => (1.25, 3.0),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quadratic" => Ok(Model::Quadratic),
            "cubic-local" => Ok(Model::CubicLocal),
            "cubic-nonlocal" => Ok(Model::CubicNonlocal),
            other => Err(format!(
                "unknown model `{other}` (expected quadratic, cubic-local or cubic-nonlocal)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("energy identity is not claimed for the {0} model")]
    EnergyNotClaimed(Model),
    #[error("state is not finite")]
    NonFinite,
}

/// A model field together with the Lagrangian point `y(t)`, `y' = u²(y)`,
/// carried along so it is advanced by the same integrator stages as `u`.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub u: PeriodicField,
    pub model: Model,
    pub time: f64,
    pub trajectory: f64,
}

impl ModelState {
    pub fn new(u: PeriodicField, model: Model) -> Self {
        Self {
            u,
            model,
            time: 0.0,
            trajectory: 0.0,
        }
    }

    /// `self += a·other` on the field and the trajectory.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.u.axpy(a, &other.u);
        self.trajectory += a * other.trajectory;
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.trajectory.is_finite()
    }
}

/// The nonlinear transport term (what is subtracted from `-Λ⁻¹u`).
pub fn transport(model: Model, u: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    Ok(match model {
        Model::Quadratic => derivative(&product(u, u)?).scaled(0.5),
        Model::CubicLocal => derivative(&product3(u, u, u)?).scaled(1.0 / 3.0),
        Model::CubicNonlocal => {
            let speed = hilbert(&product(u, u)?);
            product(&speed, &derivative(u))?.scaled(0.5)
        }
    })
}

/// Characteristic speed: `u`, `u²` or `½ H(u²)`.
pub fn transport_speed(model: Model, u: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    Ok(match model {
        Model::Quadratic => u.clone(),
        Model::CubicLocal => product(u, u)?,
        Model::CubicNonlocal => hilbert(&product(u, u)?).scaled(0.5),
    })
}

pub fn rhs_field(model: Model, u: &PeriodicField) -> Result<PeriodicField, ModelError> {
    if !u.is_finite() {
        return Err(ModelError::NonFinite);
    }
    let mut out = lambda_inv(u).scaled(-1.0);
    out.axpy(-1.0, &transport(model, u)?);
    Ok(out)
}

/// Time derivative of the whole state, including `y' = u(y)²`.
pub fn rhs(state: &ModelState) -> Result<ModelState, ModelError> {
    let du = rhs_field(state.model, &state.u)?;
    let uy = state.u.eval(state.trajectory);
    Ok(ModelState {
        u: du,
        model: state.model,
        time: 0.0,
        trajectory: uy * uy,
    })
}

/// `|⟨u, rhs⟩ + ‖Λ^{-1/2}u‖²|`, i.e. the defect in
/// `d/dt ½‖u‖² = -‖Λ^{-1/2}u‖²`.
pub fn energy_balance(state: &ModelState, rhs_val: &PeriodicField) -> Result<f64, ModelError> {
    if state.model == Model::CubicNonlocal {
        return Err(ModelError::EnergyNotClaimed(state.model));
    }
    Ok((state.u.inner(rhs_val) + lambda_inv_half_norm_sq(&state.u)).abs())
}

/// Running value of `sup_t ((1+t)^e ‖u‖_{L²} + ‖u‖_{Ḣˢ})` and the time at
/// which it was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleNorm {
    pub exponent: f64,
    pub sobolev: f64,
    pub value: f64,
    pub attained_at: f64,
}

impl TripleNorm {
    pub fn new(exponent: f64, sobolev: f64) -> Self {
        Self {
            exponent,
            sobolev,
            value: 0.0,
            attained_at: 0.0,
        }
    }

    pub fn for_model(model: Model) -> Self {
        let (e, s) = model.triple_norm_params();
        Self::new(e, s)
    }

    pub fn update(&mut self, t: f64, u: &PeriodicField) {
        let v = (1.0 + t).powf(self.exponent) * u.l2_norm() + u.hdot_norm(self.sobolev);
        if v > self.value {
            self.value = v;
            self.attained_at = t;
        }
    }
}

/// Triple norm of a recorded series.
pub fn triple_norm<'a>(
    series: impl IntoIterator<Item = (f64, &'a PeriodicField)>,
    exponent: f64,
    sobolev: f64,
) -> TripleNorm {
    let mut tn = TripleNorm::new(exponent, sobolev);
    for (t, u) in series {
        tn.update(t, u);
    }
    tn
}
