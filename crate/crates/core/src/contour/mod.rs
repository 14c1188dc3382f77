//! Interface dynamics for the two-phase gravity Stokes problem.
//!
//! The interface is `z(α) = (α + p₁(α), z₂(α))` with `p₁`, `z₂` periodic and
//! moves with
//!
//! ```text
//! z_t(α) = (ρ⁻-ρ⁺) ∫ S(z(α)-z(β)) · ∂_β z^⊥(β) z₂(β) dβ,     (a,b)^⊥ = (-b, a)
//! S(y)   = (1/8π) [ log(2(cosh y₂ - cos y₁)) I - (y₂/(cosh y₂ - cos y₁)) [[-sinh y₂, sin y₁], [sin y₁, sinh y₂]] ]
//! ```
//!
//! The logarithm is split as `log(4 sin²((α-β)/2))`, integrated with the
//! Kress rule, plus a smooth remainder integrated by the trapezoid rule. The
//! rational part is bounded with a direction-dependent limit at `β = α`; the
//! along-curve limits are
//!
//! ```text
//! y₂ sinh y₂ / (cosh y₂ - cos y₁) → 2 z₂'²/|z'|²
//! y₂ sin y₁  / (cosh y₂ - cos y₁) → 2 z₁'z₂'/|z'|²
//! ```

mod cubic;
mod graph;

pub use cubic::{cubic_terms, printed_c2_c3_identity, CubicTerms};
pub use graph::{graph_rhs, graph_rhs_with_guard, GraphState, GRAPH_RESOLUTION_GUARD};

use std::f64::consts::PI;

use crate::par::map_indices;
use crate::spectral::{derivative, Grid1D, PeriodicField, SingularQuadrature, SpectralError};
use crate::stokeslet::DensityPatch;

/// Default refusal threshold for [`contour_rhs`].
pub const ARC_CHORD_LIMIT: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContourError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("arc-chord constant {value:.3e} exceeds {limit:.3e} (worst pair {pair:?})")]
    ArcChordExceeded {
        value: f64,
        limit: f64,
        pair: (usize, usize),
    },
    #[error("graph is under-resolved: spectral tail/peak {ratio:.3e} above {guard:.3e}")]
    UnderResolved { ratio: f64, guard: f64 },
    #[error("contour samples are not finite")]
    NonFinite,
}

/// Discretized interface with `z₁ - α` and `z₂` stored as periodic fields.
#[derive(Debug, Clone)]
pub struct Contour {
    p1: PeriodicField,
    z2: PeriodicField,
}

impl Contour {
    /// Builds a contour from nodal samples of `z₁` and `z₂`.
    pub fn new(grid: &Grid1D, z1: Vec<f64>, z2: Vec<f64>) -> Result<Self, ContourError> {
        let p1: Vec<f64> = z1.iter().zip(grid.nodes()).map(|(z, a)| z - a).collect();
        Self::from_periodic(
            PeriodicField::from_values(grid, p1)?,
            PeriodicField::from_values(grid, z2)?,
        )
    }

    pub fn from_periodic(p1: PeriodicField, z2: PeriodicField) -> Result<Self, ContourError> {
        if p1.grid() != z2.grid() {
            return Err(SpectralError::GridMismatch(p1.len(), z2.len()).into());
        }
        if !p1.is_finite() || !z2.is_finite() {
            return Err(ContourError::NonFinite);
        }
        Ok(Self { p1, z2 })
    }

    /// `z₁ = f₁(α)`, `z₂ = f₂(α)`; `f₁(α) - α` must be periodic.
    pub fn from_fns(grid: &Grid1D, f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> Self {
        Self {
            p1: PeriodicField::from_fn(grid, |a| f1(a) - a),
            z2: PeriodicField::from_fn(grid, f2),
        }
    }

    /// The graph `z = (α, h(α))`.
    pub fn graph(h: &PeriodicField) -> Self {
        Self {
            p1: PeriodicField::zeros(h.grid()),
            z2: h.clone(),
        }
    }

    pub fn flat(grid: &Grid1D, height: f64) -> Self {
        Self {
            p1: PeriodicField::zeros(grid),
            z2: PeriodicField::constant(grid, height),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.z2.grid()
    }

    pub fn len(&self) -> usize {
        self.z2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z2.is_empty()
    }

    pub fn z1(&self) -> Vec<f64> {
        self.p1
            .values()
            .iter()
            .zip(self.grid().nodes())
            .map(|(p, a)| p + a)
            .collect()
    }

    /// Periodic part `z₁ - α`.
    pub fn p1(&self) -> &PeriodicField {
        &self.p1
    }

    pub fn z2(&self) -> &PeriodicField {
        &self.z2
    }

    /// Nodal tangent `(z₁', z₂')`.
    pub fn tangent(&self) -> (Vec<f64>, Vec<f64>) {
        let d1 = derivative(&self.p1).values().iter().map(|v| 1.0 + v).collect();
        (d1, derivative(&self.z2).values().to_vec())
    }

    /// Point on the trigonometric interpolant.
    pub fn point(&self, alpha: f64) -> (f64, f64) {
        (alpha + self.p1.eval(alpha), self.z2.eval(alpha))
    }

    pub fn point_derivative(&self, alpha: f64) -> (f64, f64) {
        (1.0 + self.p1.eval_derivative(alpha, 1), self.z2.eval_derivative(alpha, 1))
    }

    pub fn max_abs_z2(&self) -> f64 {
        self.z2.max_abs()
    }

    /// Rigid vertical translate.
    pub fn translated(&self, dz2: f64) -> Self {
        Self {
            p1: self.p1.clone(),
            z2: self.z2.map_values(|v| v + dz2),
        }
    }

    /// Same curve, parametrization origin moved forward by `m` nodes.
    pub fn reparametrized(&self, m: usize) -> Self {
        let n = self.len();
        let z1 = self.z1();
        let nodes = self.grid().nodes();
        // z₁(α + 2π) = z₁(α) + 2π picks up the wrap-around.
        let p1 = (0..n)
            .map(|j| {
                let src = j + m;
                let wrap = if src >= n { 2.0 * PI } else { 0.0 };
                z1[src % n] + wrap - nodes[j]
            })
            .collect();
        let z2 = (0..n).map(|j| self.z2.values()[(j + m) % n]).collect();
        Self {
            p1: PeriodicField::from_values(self.grid(), p1).expect("length preserved"),
            z2: PeriodicField::from_values(self.grid(), z2).expect("length preserved"),
        }
    }

    /// `self += a·other`, treating `other` as a velocity field.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.p1.axpy(a, &other.p1);
        self.z2.axpy(a, &other.z2);
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p1.max_abs_diff(&other.p1).max(self.z2.max_abs_diff(&other.z2))
    }

    pub fn is_finite(&self) -> bool {
        self.p1.is_finite() && self.z2.is_finite()
    }
}

/// Result of [`arc_chord`]. `value` is `+∞` when two distinct nodes coincide
/// in the strip metric; `pair` then names them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcChord {
    pub value: f64,
    pub pair: (usize, usize),
}

impl ArcChord {
    pub fn self_intersecting(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `sup 2|sin((α-β)/2)| / d(z(α), z(β))` over node pairs, with
/// `d² = 4(sinh²(Δz₂/2) + sin²(Δz₁/2))`. The chord is measured with the
/// same periodic metric, so the flat interface scores exactly 1.
pub fn arc_chord(c: &Contour) -> ArcChord {
    let n = c.len();
    let z1 = c.z1();
    let z2 = c.z2.values();
    let nodes = c.grid().nodes();
    let (t1, t2) = c.tangent();
    let rows = map_indices(n, |i| {
        let mut best = (1.0 / t1[i].hypot(t2[i]), (i, i));
        for j in (i + 1)..n {
            let arc = (2.0 * (0.5 * (nodes[i] - nodes[j])).sin()).abs();
            let sh = (0.5 * (z2[i] - z2[j])).sinh();
            let s1 = (0.5 * (z1[i] - z1[j])).sin();
            let d = 2.0 * (sh * sh + s1 * s1).sqrt();
            let ratio = if d == 0.0 { f64::INFINITY } else { arc / d };
            if ratio > best.0 {
                best = (ratio, (i, j));
            }
        }
        best
    });
    let (value, pair) = rows
        .into_iter()
        .fold((0.0, (0, 0)), |acc, r| if r.0 > acc.0 { r } else { acc });
    ArcChord { value, pair }
}

/// Nodal velocity of the interface.
#[derive(Debug, Clone)]
pub struct ContourVelocity {
    pub v1: PeriodicField,
    pub v2: PeriodicField,
}

impl ContourVelocity {
    pub fn max_abs(&self) -> f64 {
        self.v1.max_abs().max(self.v2.max_abs())
    }

    /// Velocity as a contour-shaped increment for time stepping.
    pub fn into_increment(self) -> Contour {
        Contour {
            p1: self.v1,
            z2: self.v2,
        }
    }
}

/// Right-hand side of the contour equation, refusing contours whose
/// arc-chord constant exceeds [`ARC_CHORD_LIMIT`].
pub fn contour_rhs(c: &Contour, patch: &DensityPatch) -> Result<ContourVelocity, ContourError> {
    contour_rhs_with_limit(c, patch, ARC_CHORD_LIMIT)
}

pub fn contour_rhs_with_limit(
    c: &Contour,
    patch: &DensityPatch,
    limit: f64,
) -> Result<ContourVelocity, ContourError> {
    let ac = arc_chord(c);
    if !(ac.value <= limit) {
        return Err(ContourError::ArcChordExceeded {
            value: ac.value,
            limit,
            pair: ac.pair,
        });
    }
    Ok(contour_integral(c, c.z2.values(), patch.jump()))
}

/// `prefactor · ∫ S(z(α)-z(β)) ∂_β z^⊥(β) w(β) dβ` for an arbitrary nodal
/// weight `w`. With `w = z₂` and `prefactor = ρ⁻-ρ⁺` this is the contour
/// velocity; `w ≡ 1` gives the response to a rigid vertical translation.
pub fn contour_integral(c: &Contour, w: &[f64], prefactor: f64) -> ContourVelocity {
    let grid = c.grid();
    let n = grid.len();
    assert_eq!(w.len(), n, "weight sized to grid");
    let z1 = c.z1();
    let z2 = c.z2.values();
    let nodes = grid.nodes();
    let (t1, t2) = c.tangent();
    let vx: Vec<f64> = (0..n).map(|j| -t2[j] * w[j]).collect();
    let vy: Vec<f64> = (0..n).map(|j| t1[j] * w[j]).collect();

    let quad = SingularQuadrature::new(grid);
    let log_x = quad.log_integral(&vx);
    let log_y = quad.log_integral(&vy);

    let rows = map_indices(n, |i| {
        let mut ax = 0.0;
        let mut ay = 0.0;
        for j in 0..n {
            let (r, a, b) = if j == i {
                let sq = t1[i] * t1[i] + t2[i] * t2[i];
                (sq.ln(), 2.0 * t2[i] * t2[i] / sq, 2.0 * t1[i] * t2[i] / sq)
            } else {
                let y1 = z1[i] - z1[j];
                let y2 = z2[i] - z2[j];
                let sh = (0.5 * y2).sinh();
                let s1 = (0.5 * y1).sin();
                let q = sh * sh + s1 * s1;
                let half = (0.5 * (nodes[i] - nodes[j])).sin();
                let d = 2.0 * q;
                ((q / (half * half)).ln(), y2 * y2.sinh() / d, y2 * y1.sin() / d)
            };
            // S·V = (1/8π)(log(2D) V - M V),  M = [[-A, B], [B, A]].
            ax += r * vx[j] + a * vx[j] - b * vy[j];
            ay += r * vy[j] - b * vx[j] - a * vy[j];
        }
        (ax, ay)
    });

    let scale_log = prefactor / 4.0;
    let scale_sum = prefactor / (4.0 * n as f64);
    let v1 = (0..n).map(|i| scale_log * log_x[i] + scale_sum * rows[i].0).collect();
    let v2 = (0..n).map(|i| scale_log * log_y[i] + scale_sum * rows[i].1).collect();
    ContourVelocity {
        v1: PeriodicField::from_values(grid, v1).expect("grid sized"),
        v2: PeriodicField::from_values(grid, v2).expect("grid sized"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch() -> DensityPatch {
        DensityPatch::new(1.0, 5.0).unwrap()
    }

    #[test]
    fn flat_contour_is_steady() {
        for &n in &[64usize, 128] {
            let g = Grid1D::new(n).unwrap();
            for &c in &[-0.7, 0.0, 1.3] {
                let v = contour_rhs(&Contour::flat(&g, c), &patch()).unwrap();
                assert!(v.max_abs() < 1e-12, "n={n} c={c}: {}", v.max_abs());
            }
        }
    }

    #[test]
    fn arc_chord_of_flat_and_translate() {
        let g = Grid1D::new(64).unwrap();
        let flat = arc_chord(&Contour::flat(&g, 0.0));
        assert!((flat.value - 1.0).abs() < 1e-14);
        let c = Contour::from_fns(&g, |a| a + 0.1 * a.sin(), |a| 0.4 * a.cos());
        let a = arc_chord(&c).value;
        let b = arc_chord(&c.translated(3.0)).value;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn coincident_nodes_are_reported() {
        let g = Grid1D::new(16).unwrap();
        let mut z1 = g.nodes();
        let z2 = vec![0.0; 16];
        z1[5] = z1[4];
        let c = Contour::new(&g, z1, z2).unwrap();
        let ac = arc_chord(&c);
        assert!(ac.self_intersecting());
        assert_eq!(ac.pair, (4, 5));
        assert!(matches!(
            contour_rhs(&c, &patch()),
            Err(ContourError::ArcChordExceeded { .. })
        ));
    }

    #[test]
    fn linearization_matches_lambda_inv() {
        let g = Grid1D::new(64).unwrap();
        let eps = 1e-4;
        let p = DensityPatch::new(0.0, 4.0).unwrap();
        for k in 1..4 {
            let kf = k as f64;
            let h = PeriodicField::from_fn(&g, |a| eps * (kf * a).cos());
            let v = contour_rhs(&Contour::graph(&h), &p).unwrap();
            let expect = h.scaled(-1.0 / kf);
            let rel = v.v2.max_abs_diff(&expect) / expect.max_abs();
            assert!(rel < 10.0 * eps * eps, "k={k}: {rel}");
        }
    }

    #[test]
    fn reparametrization_rolls_velocity() {
        let g = Grid1D::new(64).unwrap();
        let c = Contour::from_fns(&g, |a| a + 0.2 * a.sin(), |a| 0.3 * a.cos() + 0.1 * (2.0 * a).sin());
        let v = contour_rhs(&c, &patch()).unwrap();
        let m = 5;
        let shifted = c.reparametrized(m);
        let expect = c.point(g.node(m));
        let got = (shifted.z1()[0], shifted.z2().values()[0]);
        assert!((expect.0 - got.0).abs() < 1e-12 && (expect.1 - got.1).abs() < 1e-12);
        let vs = contour_rhs(&shifted, &patch()).unwrap();
        for j in 0..64 {
            assert!((vs.v1.values()[j] - v.v1.values()[(j + m) % 64]).abs() < 1e-12);
            assert!((vs.v2.values()[j] - v.v2.values()[(j + m) % 64]).abs() < 1e-12);
        }
    }
}
