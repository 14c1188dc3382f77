//! Self-check batteries behind `stokes-lab verify`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contour::{contour_rhs, cubic_terms, Contour};
use crate::spectral::{
    derivative, hilbert, lambda, lambda_inv, Grid1D, PeriodicField, SingularQuadrature,
};
use crate::stokeslet::{
    classical_stokeslet, kernel_l1_check, reduced_kernels, stokeslet_matrix, DensityPatch,
    Matrix2, StokesletError, StripPoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown level `{other}` (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub battery: &'static str,
    pub name: String,
    pub defect: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(battery: &'static str, name: impl Into<String>, defect: f64, tolerance: f64) -> Self {
        Self {
            battery,
            name: name.into(),
            defect,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.defect <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: defect {:.3e} (tol {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.battery,
            self.name,
            self.defect,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn battery_passed(&self, battery: &str) -> bool {
        self.checks
            .iter()
            .filter(|c| c.battery == battery)
            .all(Check::passed)
    }
}

fn random_band_limited(grid: &Grid1D, band: usize, seed: u64) -> PeriodicField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    c[0] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
    for k in 1..=band as i64 {
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        c[grid.index_of(k)] = z;
        c[grid.index_of(-k)] = z.conj();
    }
    PeriodicField::from_coefficients(grid, c).expect("grid sized")
}

/// Operator identities and quadrature/multiplier route agreement.
pub fn operator_battery(sizes: &[usize]) -> Vec<Check> {
    let mut out = Vec::new();
    let tol = 1e-8;
    for &n in sizes {
        let g = Grid1D::new(n).expect("power of two");
        let f = random_band_limited(&g, n / 4, n as u64);
        let scale = f.max_abs();
        let centred = &f - &PeriodicField::constant(&g, f.mean());
        let q = SingularQuadrature::new(&g);
        let lam = lambda(&f);
        let rel = |d: f64, s: f64| d / s.max(1.0);
        let c = |name: &str, d: f64| Check::new("operators", format!("{name} n={n}"), d, tol);
        out.push(c(
            "d(Λ⁻¹f) = -Hf",
            rel((&derivative(&lambda_inv(&f)) + &hilbert(&f)).max_abs(), scale),
        ));
        out.push(c(
            "d(Hf) = Λf",
            rel((&derivative(&hilbert(&f)) - &lam).max_abs(), lam.max_abs()),
        ));
        out.push(c("H²f = -(f - mean)", rel((&hilbert(&hilbert(&f)) + &centred).max_abs(), scale)));
        out.push(c(
            "Λ(Λ⁻¹f) = f - mean",
            rel((&lambda(&lambda_inv(&f)) - &centred).max_abs(), scale),
        ));
        out.push(c(
            "route Λ⁻¹",
            rel(q.lambda_inv(&f).max_abs_diff(&lambda_inv(&f)), scale),
        ));
        out.push(c("route H", rel(q.hilbert(&f).max_abs_diff(&hilbert(&f)), scale)));
        out.push(c("route Λ", rel(q.lambda(&f).max_abs_diff(&lam), lam.max_abs())));
        let one = PeriodicField::constant(&g, 1.0);
        let annihilated = [lambda_inv(&one), hilbert(&one), lambda(&one)]
            .iter()
            .map(PeriodicField::max_abs)
            .fold(0.0, f64::max);
        out.push(c("constants annihilated", annihilated));
    }
    out
}

pub type KernelFn = fn(StripPoint) -> Result<Matrix2, StokesletError>;

fn kernel_samples() -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for &y1 in &[0.3, 1.1, 2.0, 3.0] {
        for &y2 in &[-4.0, -0.7, 0.2, 1.5, 6.0] {
            pts.push((y1, y2));
        }
    }
    pts
}

/// Symmetry and parity of a Stokeslet matrix, and its consistency with the
/// reduced kernels and the plane Stokeslet. Takes the kernel as a parameter
/// so a deliberately broken one can be fed in.
pub fn kernel_symmetry_battery(kernel: KernelFn) -> Vec<Check> {
    let mut sym: f64 = 0.0;
    let mut parity: f64 = 0.0;
    let mut reduced: f64 = 0.0;
    let mut period: f64 = 0.0;
    let k = 8.0 * PI;
    let mut failed = None;
    for (y1, y2) in kernel_samples() {
        let eval = |a: f64, b: f64| kernel(StripPoint::new(a, b));
        let (m, mr, mp, mw) = match (eval(y1, y2), eval(-y1, y2), eval(y1, -y2), eval(y1 + 2.0 * PI, y2)) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
            _ => {
                failed = Some((y1, y2));
                continue;
            }
        };
        sym = sym.max((m[0][1] - m[1][0]).abs());
        // Diagonal entries are even in y₁; off-diagonal ones odd.
        parity = parity
            .max((m[0][0] - mr[0][0]).abs())
            .max((m[1][1] - mr[1][1]).abs())
            .max((m[1][0] + mr[1][0]).abs())
            .max((m[1][0] + mp[1][0]).abs())
            .max((m[0][0] - mp[0][0]).abs());
        period = period.max(
            (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| (m[i][j] - mw[i][j]).abs())
                .fold(0.0, f64::max),
        );
        let (s1, s2) = reduced_kernels(StripPoint::new(y1, y2)).expect("off origin");
        reduced = reduced
            .max((s1 + k * m[1][0]).abs())
            .max((s2 - k * m[1][1]).abs());
    }
    let mut near: f64 = 0.0;
    for th in [0.2, 1.3, 2.9, 4.4] {
        let r = 1e-3;
        let y = StripPoint::new(r * f64::cos(th), r * f64::sin(th));
        if let (Ok(m), Ok(c)) = (kernel(y), classical_stokeslet(y)) {
            for i in 0..2 {
                for j in 0..2 {
                    near = near.max((m[i][j] - c[i][j]).abs());
                }
            }
        } else {
            near = f64::INFINITY;
        }
    }
    let origin_refused = if kernel(StripPoint::new(0.0, 0.0)).is_err() { 0.0 } else { 1.0 };
    let broken = if failed.is_some() { f64::INFINITY } else { 0.0 };
    vec![
        Check::new("kernel", "evaluates off the origin", broken, 0.0),
        Check::new("kernel", "matrix symmetric", sym, 1e-14),
        Check::new("kernel", "parity in y₁ and y₂", parity, 1e-14),
        Check::new("kernel", "2π-periodic in y₁", period, 1e-13),
        Check::new("kernel", "reduced kernels match matrix", reduced, 1e-12),
        Check::new("kernel", "plane Stokeslet near origin", near, 1e-6),
        Check::new("kernel", "origin refused", origin_refused, 0.0),
    ]
}

/// Vertical decay of the reduced kernels and L¹ convergence.
pub fn kernel_decay_battery(full: bool) -> Vec<Check> {
    let mut out = Vec::new();
    let (s1, s2) = reduced_kernels(StripPoint::new(1.0, 30.0)).expect("off origin");
    out.push(Check::new("kernel", "S̃ decays at y₂ = 30", s1.abs().max(s2.abs()), 1e-10));
    if full {
        match (kernel_l1_check(20.0, 1e-8), kernel_l1_check(40.0, 1e-8)) {
            (Ok(a), Ok(b)) => {
                let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
                out.push(Check::new(
                    "kernel",
                    "L¹ Cauchy between cutoffs 20 and 40",
                    rel(a.s1.total, b.s1.total).max(rel(a.s2.total, b.s2.total)),
                    1e-2,
                ));
                out.push(Check::new("kernel", "S̃₁ decay exponent ≤ -0.95", (b.s1.decay_exponent + 0.95).max(0.0), 0.0));
                out.push(Check::new("kernel", "S̃₂ decay exponent ≤ -0.475", (b.s2.decay_exponent + 0.475).max(0.0), 0.0));
            }
            _ => out.push(Check::new("kernel", "L¹ check converged", f64::INFINITY, 0.0)),
        }
    }
    out
}

/// Cubic expansion of the graph equation: algebraic identities across routes.
pub fn cubic_battery(n: usize) -> Vec<Check> {
    let g = Grid1D::new(n).expect("power of two");
    let h = PeriodicField::from_fn(&g, |a| 0.8 * a.cos() + 0.3 * (2.0 * a).sin() - 0.1 * (3.0 * a).cos());
    let tol = 1e-8;
    match cubic_terms(&h) {
        Ok(t) => vec![
            Check::new("cubic", format!("C₃ = -2C₂ n={n}"), (&t.c3 + &t.c2.scaled(2.0)).max_abs(), tol),
            Check::new(
                "cubic",
                format!("C₂ + C₃ identity n={n}"),
                (&t.c2 + &t.c3).max_abs_diff(&t.c2_c3_closed),
                tol,
            ),
            Check::new("cubic", format!("C₄ closed form n={n}"), t.c4.max_abs_diff(&t.c4_closed), tol),
            Check::new("cubic", format!("combined cubic term n={n}"), t.sum.max_abs_diff(&t.combined), tol),
        ],
        Err(_) => vec![Check::new("cubic", format!("cubic terms resolved n={n}"), f64::INFINITY, 0.0)],
    }
}

/// Flat interfaces do not move.
pub fn flat_battery(sizes: &[usize]) -> Vec<Check> {
    let patch = DensityPatch::new(1.0, 3.0).expect("valid densities");
    let mut out = Vec::new();
    for &n in sizes {
        let g = Grid1D::new(n).expect("power of two");
        for height in [-1.0, 0.0, 0.7] {
            let d = contour_rhs(&Contour::flat(&g, height), &patch)
                .map_or(f64::INFINITY, |v| v.max_abs());
            out.push(Check::new("flat", format!("height {height} n={n}"), d, 1e-8));
        }
    }
    out
}

pub fn verify_suite(level: Level) -> VerifyReport {
    let full = level == Level::Full;
    let mut checks = Vec::new();
    let sizes: &[usize] = if full { &[64, 256, 1024] } else { &[64, 256] };
    checks.extend(operator_battery(sizes));
    checks.extend(kernel_symmetry_battery(stokeslet_matrix));
    checks.extend(kernel_decay_battery(full));
    checks.extend(cubic_battery(if full { 256 } else { 64 }));
    checks.extend(flat_battery(if full { &[128, 512] } else { &[128] }));
    VerifyReport { checks }
}
