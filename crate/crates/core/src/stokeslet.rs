//! The x₁-periodic Stokeslet and its gravity-reduced kernels.
//!
//! ```text
//! S(y) = (1/8π) log(2(cosh y₂ - cos y₁)) I - y₂/(8π(cosh y₂ - cos y₁)) [[-sinh y₂, sin y₁], [sin y₁, sinh y₂]]
//! ```
//!
//! Applied to the vertical gravity force `(0, ρ)` it gives the velocity
//! `u = (1/8π)(-S̃₁ ∗ ρ, S̃₂ ∗ ρ)` with
//!
//! ```text
//! S̃₁ = y₂ sin y₁ / (cosh y₂ - cos y₁)
//! S̃₂ = log(2(cosh y₂ - cos y₁)) - y₂ sinh y₂ / (cosh y₂ - cos y₁)
//! ```
//!
//! `S̃₂` is the second row of `8πS` exactly. Dropping the factor 2 inside the
//! logarithm shifts it by `-log 2` and the kernel no longer decays in `y₂`.
//!
//! Near the origin `2(cosh y₂ - cos y₁) = 4(sinh²(y₂/2) + sin²(y₁/2))` avoids
//! cancellation; for `|y₂| ≥ 1` everything is rewritten in `q = e^{-|y₂|}` so
//! the exponentially small kernels are computed without subtracting large
//! numbers.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::sync::OnceLock;

use crate::contour::Contour;
use crate::fit::least_squares;
use crate::quad::{integrate, integrate_pieces, QuadError, QuadOptions};

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StokesletError {
    #[error("the Stokeslet is singular at the origin")]
    Origin,
    #[error("densities must be finite, got ρ⁺ = {0}, ρ⁻ = {1}")]
    InvalidDensity(f64, f64),
    #[error("cutoff {0} is below the decay-fit window start 5")]
    InvalidCutoff(f64),
    #[error("inconclusive: {what}: {source}")]
    Inconclusive { what: String, source: QuadError },
    #[error("inconclusive: {0}")]
    FitFailed(String),
    #[error("point ({x1}, {x2}) lies within one grid cell ({cell:.3e}) of the contour (distance {distance:.3e})")]
    NearContour {
        x1: f64,
        x2: f64,
        distance: f64,
        cell: f64,
    },
}

/// Argument of the kernel, with `y₁` reduced into `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripPoint {
    pub y1: f64,
    pub y2: f64,
}

impl StripPoint {
    pub fn new(y1: f64, y2: f64) -> Self {
        let mut r = (y1 + PI).rem_euclid(TAU) - PI;
        if r == -PI {
            r = PI;
        }
        Self { y1: r, y2 }
    }
}

/// Upper (`ρ⁺`) and lower (`ρ⁻`) fluid densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPatch {
    rho_plus: f64,
    rho_minus: f64,
}

impl DensityPatch {
    pub fn new(rho_plus: f64, rho_minus: f64) -> Result<Self, StokesletError> {
        if !rho_plus.is_finite() || !rho_minus.is_finite() {
            return Err(StokesletError::InvalidDensity(rho_plus, rho_minus));
        }
        Ok(Self { rho_plus, rho_minus })
    }

    /// Patch with the given `ρ̄`, lower density `4ρ̄` and upper density 0.
    pub fn from_rho_bar(rho_bar: f64) -> Result<Self, StokesletError> {
        Self::new(0.0, 4.0 * rho_bar)
    }

    pub fn rho_plus(&self) -> f64 {
        self.rho_plus
    }

    pub fn rho_minus(&self) -> f64 {
        self.rho_minus
    }

    /// `ρ⁻ - ρ⁺`.
    pub fn jump(&self) -> f64 {
        self.rho_minus - self.rho_plus
    }

    /// `(ρ⁻ - ρ⁺)/4`.
    pub fn rho_bar(&self) -> f64 {
        self.jump() / 4.0
    }

    pub fn is_stable(&self) -> bool {
        self.jump() > 0.0
    }

    /// `‖ρ‖_{L∞}`.
    pub fn max_abs(&self) -> f64 {
        self.rho_plus.abs().max(self.rho_minus.abs())
    }
}

/// `(log(2D), y₂ sinh y₂/D, y₂ sin y₁/D)` with `D = cosh y₂ - cos y₁`.
fn kernel_parts(y1: f64, y2: f64) -> (f64, f64, f64) {
    let s = y2.abs();
    if s >= 1.0 {
        let q = (-s).exp();
        let c = y1.cos();
        let e = 1.0 - 2.0 * c * q + q * q;
        let log2d = s + (q * q - 2.0 * c * q).ln_1p();
        let a = s * (1.0 - q * q) / e;
        let b = y2 * 2.0 * q * y1.sin() / e;
        (log2d, a, b)
    } else {
        let sh = (0.5 * y2).sinh();
        let s1 = (0.5 * y1).sin();
        let d = 2.0 * (sh * sh + s1 * s1);
        ((2.0 * d).ln(), y2 * y2.sinh() / d, y2 * y1.sin() / d)
    }
}

fn check_origin(y: StripPoint) -> Result<(), StokesletError> {
    if y.y1 == 0.0 && y.y2 == 0.0 {
        Err(StokesletError::Origin)
    } else {
        Ok(())
    }
}

pub fn stokeslet_matrix(y: StripPoint) -> Result<Matrix2, StokesletError> {
    check_origin(y)?;
    let (l, a, b) = kernel_parts(y.y1, y.y2);
    let k = 1.0 / (8.0 * PI);
    Ok([[k * (l + a), -k * b], [-k * b, k * (l - a)]])
}

/// The plane Stokeslet in the same normalization, i.e. the small-`|y|`
/// limit of [`stokeslet_matrix`].
pub fn classical_stokeslet(y: StripPoint) -> Result<Matrix2, StokesletError> {
    check_origin(y)?;
    let r2 = y.y1 * y.y1 + y.y2 * y.y2;
    let k = 1.0 / (8.0 * PI);
    let l = r2.ln();
    let f = 2.0 * y.y2 / r2;
    Ok([
        [k * (l + f * y.y2), -k * f * y.y1],
        [-k * f * y.y1, k * (l - f * y.y2)],
    ])
}

/// `(S̃₁, S̃₂)`.
pub fn reduced_kernels(y: StripPoint) -> Result<(f64, f64), StokesletError> {
    check_origin(y)?;
    Ok(reduced_unchecked(y.y1, y.y2))
}

fn reduced_unchecked(y1: f64, y2: f64) -> (f64, f64) {
    let s = y2.abs();
    if s >= 1.0 {
        let q = (-s).exp();
        let c = y1.cos();
        let e = 1.0 - 2.0 * c * q + q * q;
        let s1 = y2 * 2.0 * q * y1.sin() / e;
        let s2 = (q * q - 2.0 * c * q).ln_1p() + 2.0 * s * q * (q - c) / e;
        (s1, s2)
    } else {
        let (l, a, b) = kernel_parts(y1, y2);
        (b, l - a)
    }
}

/// One kernel's share of a [`KernelL1Report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelComponent {
    /// `∫∫ |S̃ᵢ|` over `𝕋 × [-Y, Y]`.
    pub body: f64,
    /// Bound on the remainder beyond `|y₂| = Y` from the fitted envelope.
    pub tail: f64,
    pub total: f64,
    /// `-λ` in `sup_{y₁}|S̃ᵢ| ≈ C y₂^p e^{-λ y₂}`.
    pub decay_exponent: f64,
    /// `p` in the same fit.
    pub prefactor_power: f64,
    pub log_prefactor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelL1Report {
    pub cutoff: f64,
    pub tol: f64,
    pub s1: KernelComponent,
    pub s2: KernelComponent,
}

impl KernelL1Report {
    /// Both tails below `tol` relative to their totals.
    pub fn is_cauchy(&self) -> bool {
        self.s1.tail <= self.tol * self.s1.total && self.s2.tail <= self.tol * self.s2.total
    }

    /// `‖(S̃₁, S̃₂)/8π‖`, the constant in `‖u‖_{L∞} ≤ C ‖ρ‖_{L∞}`.
    pub fn velocity_constant(&self) -> f64 {
        self.s1.total.hypot(self.s2.total) / (8.0 * PI)
    }
}

const NEAR_ORIGIN: f64 = 0.1;
const FIT_START: f64 = 5.0;

/// `sup_{y₁} |S̃ᵢ(y₁, y₂)|` sampled on a dense `y₁` grid.
pub fn kernel_envelope(which: usize, y2: f64) -> f64 {
    let m = 2048;
    (0..=m)
        .map(|j| {
            let y1 = PI * j as f64 / m as f64;
            let (a, b) = reduced_unchecked(y1, y2);
            if which == 1 {
                a.abs()
            } else {
                b.abs()
            }
        })
        .fold(0.0, f64::max)
}

fn abs_kernel(which: usize) -> impl Fn(f64, f64) -> f64 + Copy {
    move |y1, y2| {
        let (a, b) = reduced_unchecked(y1, y2);
        if which == 1 {
            a.abs()
        } else {
            b.abs()
        }
    }
}

fn quad_err(what: &str) -> impl FnOnce(QuadError) -> StokesletError + '_ {
    move |source| StokesletError::Inconclusive {
        what: what.to_string(),
        source,
    }
}

/// `∫∫ |S̃ᵢ|` over the quarter domain `[0, π] × [0, Y]`, assembled from
/// fixed `y₂` slabs so the value is exactly monotone in `Y`.
fn quarter_body(which: usize, cutoff: f64, tol: f64) -> Result<f64, StokesletError> {
    let f = abs_kernel(which);
    let inner = QuadOptions::with_tol(1e-15, 0.1 * tol);
    let outer = QuadOptions::with_tol(1e-14, tol);
    let name = format!("S̃{which}");

    // Polar square [0, r₀]²: the log singularity becomes r·log r.
    let mut polar_err = None;
    let polar = integrate_pieces(
        |theta| {
            let (c, s) = (theta.cos(), theta.sin());
            let rmax = NEAR_ORIGIN / c.max(s);
            match integrate(|r| r * f(r * c, r * s), 0.0, rmax, inner) {
                Ok(v) => v.value,
                Err(e) => {
                    polar_err.get_or_insert(e);
                    0.0
                }
            }
        },
        &[0.0, FRAC_PI_4, FRAC_PI_2],
        outer,
    )
    .map_err(quad_err(&name))?;
    if let Some(e) = polar_err {
        return Err(quad_err(&name)(e));
    }

    // Strip y₂ ∈ [0, r₀], y₁ ∈ [r₀, π].
    let mut slab_err = None;
    let mut column = |lo1: f64, y2: f64| match integrate(|y1| f(y1, y2), lo1, PI, inner) {
        Ok(v) => v.value,
        Err(e) => {
            slab_err.get_or_insert(e);
            0.0
        }
    };
    let strip = integrate(|y2| column(NEAR_ORIGIN, y2), 0.0, NEAR_ORIGIN, outer)
        .map_err(quad_err(&name))?
        .value;

    let mut edges = vec![NEAR_ORIGIN, 1.0, 2.5, 5.0];
    let mut e = 10.0;
    while e < cutoff {
        edges.push(e);
        e *= 2.0;
    }
    edges.retain(|&x| x < cutoff);
    edges.push(cutoff);
    let mut slabs = 0.0;
    for w in edges.windows(2) {
        slabs += integrate(|y2| column(0.0, y2), w[0], w[1], outer)
            .map_err(quad_err(&name))?
            .value;
    }
    if let Some(e) = slab_err {
        return Err(quad_err(&name)(e));
    }
    Ok(polar.value + strip + slabs)
}

fn fit_envelope(which: usize, cutoff: f64) -> Result<(f64, f64, f64), StokesletError> {
    let m = 64;
    let mut rows = Vec::with_capacity(m + 1);
    let mut rhs = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let y = FIT_START + (cutoff - FIT_START) * j as f64 / m as f64;
        let v = kernel_envelope(which, y);
        if !(v > 0.0) {
            return Err(StokesletError::FitFailed(format!(
                "envelope of S̃{which} vanished at y₂ = {y}"
            )));
        }
        rows.push(vec![1.0, y.ln(), -y]);
        rhs.push(v.ln());
    }
    let x = least_squares(&rows, &rhs).ok_or_else(|| {
        StokesletError::FitFailed(format!("envelope fit of S̃{which} is degenerate"))
    })?;
    Ok((x[0], x[1], x[2]))
}

/// Integrability check of `S̃₁`, `S̃₂` over `𝕋 × ℝ`.
///
/// The body is integrated over `|y₂| ≤ cutoff` (four quarter domains by
/// symmetry); the remainder is bounded with the fitted envelope
/// `C y^p e^{-λy}`, using `∫_Y^∞ y^p e^{-λy} dy ≤ Y^p e^{-λY}/(λ - p/Y)`.
pub fn kernel_l1_check(cutoff: f64, tol: f64) -> Result<KernelL1Report, StokesletError> {
    if !(cutoff >= FIT_START) {
        return Err(StokesletError::InvalidCutoff(cutoff));
    }
    let component = |which: usize| -> Result<KernelComponent, StokesletError> {
        let body = 4.0 * quarter_body(which, cutoff, tol)?;
        let (log_c, p, lambda) = fit_envelope(which, cutoff)?;
        let rate = lambda - p.max(0.0) / cutoff;
        if !(rate > 0.0) {
            return Err(StokesletError::FitFailed(format!(
                "S̃{which} envelope does not decay (λ = {lambda:.3}, p = {p:.3})"
            )));
        }
        let tail = 2.0 * TAU * log_c.exp() * cutoff.powf(p) * (-lambda * cutoff).exp() / rate;
        Ok(KernelComponent {
            body,
            tail,
            total: body + tail,
            decay_exponent: -lambda,
            prefactor_power: p,
            log_prefactor: log_c,
        })
    };
    Ok(KernelL1Report {
        cutoff,
        tol,
        s1: component(1)?,
        s2: component(2)?,
    })
}

/// Kernel norms at cutoff 40, computed once per process.
pub fn reference_l1() -> Result<KernelL1Report, StokesletError> {
    static CACHE: OnceLock<Result<KernelL1Report, StokesletError>> = OnceLock::new();
    CACHE.get_or_init(|| kernel_l1_check(40.0, 1e-8)).clone()
}

/// Points on the interface where the vertical line `x₁ = y₁ (mod 2π)`
/// crosses it, as heights.
struct ColumnCrossings {
    alphas: Vec<f64>,
    z1: Vec<f64>,
    z2: Vec<f64>,
}

impl ColumnCrossings {
    fn new(contour: &Contour, factor: usize) -> Self {
        let n = contour.len() * factor;
        let fine = crate::spectral::Grid1D::new(n).expect("power of two");
        let p1 = contour.p1().resampled(&fine);
        let z2f = contour.z2().resampled(&fine);
        let mut alphas = fine.nodes();
        let mut z1: Vec<f64> = p1.values().iter().zip(&alphas).map(|(p, a)| p + a).collect();
        let mut z2 = z2f.values().to_vec();
        alphas.push(alphas[0] + TAU);
        z1.push(z1[0] + TAU);
        z2.push(z2[0]);
        Self { alphas, z1, z2 }
    }

    fn heights(&self, contour: &Contour, y1: f64) -> Vec<f64> {
        let g = |z: f64| (0.5 * (z - y1)).sin();
        let mut out = Vec::new();
        for k in 0..self.alphas.len() - 1 {
            let (g0, g1) = (g(self.z1[k]), g(self.z1[k + 1]));
            if g0 == 0.0 {
                out.push(self.z2[k]);
                continue;
            }
            if g0 * g1 >= 0.0 {
                continue;
            }
            let (a0, a1) = (self.alphas[k], self.alphas[k + 1]);
            let mut a = a0 + (a1 - a0) * g0 / (g0 - g1);
            for _ in 0..3 {
                let (z, _) = contour.point(a);
                let (dz, _) = contour.point_derivative(a);
                let r = g(z);
                let dr = 0.5 * (0.5 * (z - y1)).cos() * dz;
                if dr == 0.0 {
                    break;
                }
                let next = a - r / dr;
                if !(next > a0 && next < a1) {
                    break;
                }
                a = next;
            }
            out.push(contour.point(a).1);
        }
        out.sort_by(f64::total_cmp);
        out
    }

    fn distance_to(&self, x1: f64, x2: f64) -> f64 {
        let m = self.alphas.len() - 1;
        let mut best = f64::INFINITY;
        for k in 0..m {
            let dx = (x1 - self.z1[k] + PI).rem_euclid(TAU) - PI;
            let ex = self.z1[k + 1] - self.z1[k];
            let ey = self.z2[k + 1] - self.z2[k];
            let dy = x2 - self.z2[k];
            let len2 = ex * ex + ey * ey;
            let t = if len2 > 0.0 {
                ((dx * ex + dy * ey) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min((dx - t * ex).hypot(dy - t * ey));
        }
        best
    }
}

/// Velocity induced at `x` by the band `|x₂| ≤ 2 max|z₂|` of the density;
/// the horizontally invariant layers outside it contribute nothing.
pub fn velocity_at(
    x: StripPoint,
    contour: &Contour,
    patch: &DensityPatch,
    tol: f64,
) -> Result<[f64; 2], StokesletError> {
    let band = 2.0 * contour.max_abs_z2();
    let crossings = ColumnCrossings::new(contour, 8);
    let z1 = contour.z1();
    let z2 = contour.z2().values();
    let n = contour.len();
    let cell = (0..n)
        .map(|j| {
            let k = (j + 1) % n;
            let dz1 = if k == 0 { z1[0] + TAU - z1[j] } else { z1[k] - z1[j] };
            dz1.hypot(z2[k] - z2[j])
        })
        .fold(0.0, f64::max);
    let distance = crossings.distance_to(x.y1, x.y2);
    if distance < cell {
        return Err(StokesletError::NearContour {
            x1: x.y1,
            x2: x.y2,
            distance,
            cell,
        });
    }
    if band == 0.0 {
        return Ok([0.0, 0.0]);
    }

    let inner = QuadOptions::with_tol(0.01 * tol, 0.0);
    let outer = QuadOptions::with_tol(tol, 0.0);
    let mut first_err = None;
    let mut column = |y1: f64, which: usize| -> f64 {
        let hs = crossings.heights(contour, y1);
        let mut breaks: Vec<f64> = hs.iter().copied().filter(|h| h.abs() < band).collect();
        breaks.push(-band);
        breaks.push(band);
        if x.y2.abs() < band {
            breaks.push(x.y2);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let above = hs.iter().filter(|&&h| h > mid).count();
            let rho = if above % 2 == 0 {
                patch.rho_plus
            } else {
                patch.rho_minus
            };
            if rho == 0.0 {
                continue;
            }
            let r = integrate(
                |y2| {
                    let (a, b) = reduced_unchecked(x.y1 - y1, x.y2 - y2);
                    if which == 1 {
                        a
                    } else {
                        b
                    }
                },
                w[0],
                w[1],
                inner,
            );
            match r {
                Ok(v) => acc += rho * v.value,
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        acc
    };
    let k = 1.0 / (8.0 * PI);
    let mut comp = |which: usize| {
        integrate_pieces(|y1| column(y1, which), &[x.y1 - PI, x.y1, x.y1 + PI], outer)
    };
    let u1 = comp(1).map_err(quad_err("velocity u₁"))?.value;
    let u2 = comp(2).map_err(quad_err("velocity u₂"))?.value;
    if let Some(e) = first_err {
        return Err(quad_err("velocity column")(e));
    }
    Ok([-k * u1, k * u2])
}
