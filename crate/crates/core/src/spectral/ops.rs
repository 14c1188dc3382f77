//! Fourier-multiplier forms of the periodic nonlocal operators.
//!
//! | operator | kernel                                   | multiplier   |
//! |----------|------------------------------------------|--------------|
//! | `Λ⁻¹`    | `-(1/2π) log(4 sin²((α-β)/2))`           | `1/|k|`, 0 at k=0 |
//! | `H`      | `(1/2π) cot((α-β)/2)` (principal value)  | `-i sign k`  |
//! | `Λ`      | `(1/2π) (u(α)-u(β)) / (2 sin²((α-β)/2))` | `|k|`        |
//!
//! so that `∂Λ⁻¹ = -H` and `∂H = Λ`.

use num_complex::Complex64;

use super::{PeriodicField, SpectralError};

pub fn lambda_inv(f: &PeriodicField) -> PeriodicField {
    f.apply_multiplier(|k| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0 / k.unsigned_abs() as f64, 0.0)
        }
    })
}

pub fn hilbert(f: &PeriodicField) -> PeriodicField {
    f.apply_multiplier(|k| Complex64::new(0.0, -(k.signum() as f64)))
}

pub fn lambda(f: &PeriodicField) -> PeriodicField {
    f.apply_multiplier(|k| Complex64::new(k.unsigned_abs() as f64, 0.0))
}

pub fn derivative(f: &PeriodicField) -> PeriodicField {
    f.apply_multiplier(|k| Complex64::new(0.0, k as f64))
}

pub fn derivative_n(f: &PeriodicField, order: u32) -> PeriodicField {
    f.apply_multiplier(|k| Complex64::new(0.0, k as f64).powu(order))
}

/// Pointwise product followed by 2/3-rule truncation.
pub fn product(f: &PeriodicField, g: &PeriodicField) -> Result<PeriodicField, SpectralError> {
    if f.grid() != g.grid() {
        return Err(SpectralError::GridMismatch(f.len(), g.len()));
    }
    let values = f.values().iter().zip(g.values()).map(|(a, b)| a * b).collect();
    Ok(PeriodicField::from_values(f.grid(), values)?.dealiased())
}

/// Triple pointwise product with a single truncation of the result.
pub fn product3(
    f: &PeriodicField,
    g: &PeriodicField,
    h: &PeriodicField,
) -> Result<PeriodicField, SpectralError> {
    if f.grid() != g.grid() {
        return Err(SpectralError::GridMismatch(f.len(), g.len()));
    }
    if f.grid() != h.grid() {
        return Err(SpectralError::GridMismatch(f.len(), h.len()));
    }
    let values = f
        .values()
        .iter()
        .zip(g.values())
        .zip(h.values())
        .map(|((a, b), c)| a * b * c)
        .collect();
    Ok(PeriodicField::from_values(f.grid(), values)?.dealiased())
}

/// `e^{-tΛ⁻¹} f`: each mode `k ≠ 0` decays like `e^{-t/|k|}`; the mean is untouched.
pub fn apply_linear_semigroup(f: &PeriodicField, t: f64) -> Result<PeriodicField, SpectralError> {
    if t < 0.0 || t.is_nan() {
        return Err(SpectralError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.apply_multiplier(|k| {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new((-t / k.unsigned_abs() as f64).exp(), 0.0)
        }
    }))
}

/// `‖Λ^{-1/2} f‖²_{L²} = 2π Σ_{k≠0} |f̂ₖ|²/|k|`.
pub fn lambda_inv_half_norm_sq(f: &PeriodicField) -> f64 {
    let grid = f.grid();
    std::f64::consts::TAU
        * f.coefficients()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(idx, c)| c.norm_sqr() / grid.wavenumber(idx).unsigned_abs() as f64)
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(n).unwrap()
    }

    #[test]
    fn lambda_inv_examples() {
        let g = grid(64);
        let c3 = PeriodicField::from_fn(&g, |a| (3.0 * a).cos());
        let out = lambda_inv(&c3);
        let expect = PeriodicField::from_fn(&g, |a| (3.0 * a).cos() / 3.0);
        assert!(out.max_abs_diff(&expect) < 1e-15);
        assert!(lambda_inv(&PeriodicField::constant(&g, 1.0)).max_abs() < 1e-16);
        assert_eq!(lambda_inv(&PeriodicField::zeros(&g)).max_abs(), 0.0);
    }

    #[test]
    fn hilbert_examples() {
        let g = grid(64);
        for k in 1..6 {
            let kf = k as f64;
            let c = PeriodicField::from_fn(&g, |a| (kf * a).cos());
            let s = PeriodicField::from_fn(&g, |a| (kf * a).sin());
            assert!(hilbert(&c).max_abs_diff(&s) < 1e-14);
            assert!(hilbert(&s).max_abs_diff(&(-&c)) < 1e-14);
        }
        assert!(hilbert(&PeriodicField::constant(&g, 1.0)).max_abs() < 1e-16);
    }

    #[test]
    fn lambda_examples() {
        let g = grid(64);
        let f = PeriodicField::from_fn(&g, |a| a.cos() + (4.0 * a).sin());
        let expect = PeriodicField::from_fn(&g, |a| a.cos() + 4.0 * (4.0 * a).sin());
        assert!(lambda(&f).max_abs_diff(&expect) < 1e-13);
        let c5 = PeriodicField::from_fn(&g, |a| (5.0 * a).cos());
        assert!(lambda(&c5).max_abs_diff(&c5.scaled(5.0)) < 1e-13);
        assert!(lambda(&PeriodicField::constant(&g, 1.0)).max_abs() < 1e-16);
    }

    #[test]
    fn derivative_and_product_examples() {
        let g = grid(64);
        let s = PeriodicField::from_fn(&g, f64::sin);
        let c = PeriodicField::from_fn(&g, f64::cos);
        assert!(derivative(&s).max_abs_diff(&c) < 1e-14);
        let cc = product(&c, &c).unwrap();
        let expect = PeriodicField::from_fn(&g, |a| 0.5 * (1.0 + (2.0 * a).cos()));
        assert!(cc.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn product_truncates_high_modes() {
        let g = grid(32);
        // cos(6α)·cos(6α) has a mode at 12 > 32/3, which must be removed.
        let c6 = PeriodicField::from_fn(&g, |a| (6.0 * a).cos());
        let p = product(&c6, &c6).unwrap();
        assert_eq!(p.coefficient(12).norm(), 0.0);
        assert!((p.mean() - 0.5).abs() < 1e-15);
        let other = PeriodicField::zeros(&grid(64));
        assert!(matches!(product(&c6, &other), Err(SpectralError::GridMismatch(32, 64))));
    }

    #[test]
    fn semigroup_examples() {
        let g = grid(64);
        let c = PeriodicField::from_fn(&g, f64::cos);
        let out = apply_linear_semigroup(&c, 1.0).unwrap();
        assert!(out.max_abs_diff(&c.scaled((-1.0f64).exp())) < 1e-15);
        let f = PeriodicField::from_fn(&g, |a| 0.2 + a.sin() * (2.0 * a).cos());
        assert!(apply_linear_semigroup(&f, 0.0).unwrap().max_abs_diff(&f) == 0.0);
        assert!(matches!(
            apply_linear_semigroup(&f, -0.1),
            Err(SpectralError::NegativeTime(_))
        ));
        let later = apply_linear_semigroup(&f, 3.0).unwrap();
        assert!((later.mean() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn semigroup_decay_is_bounded_by_sobolev_norm() {
        // Per mode, (1+t)^{2.25} e^{-t/k} ≤ k^{2.25} sup_s (1+s)^{2.25} e^{-s},
        // and the supremum sits at s = 1.25.
        let g = grid(128);
        let f = PeriodicField::from_fn(&g, |a| {
            (1..=12).map(|k| ((k * k) as f64).recip() * (k as f64 * a + 0.3 * k as f64).sin()).sum()
        });
        let c0 = 2.25f64.powf(2.25) * (-1.25f64).exp();
        let bound = c0 * f.hdot_norm(2.5);
        let mut t = 0.0;
        while t <= 100.0 {
            let u = apply_linear_semigroup(&f, t).unwrap();
            assert!((1.0 + t).powf(2.25) * u.l2_norm() <= bound * (1.0 + 1e-12), "t = {t}");
            t += 0.5;
        }
    }

    #[test]
    fn half_norm_of_single_mode() {
        let g = grid(32);
        let c3 = PeriodicField::from_fn(&g, |a| (3.0 * a).cos());
        // ∫cos² = π, divided by |k| = 3.
        assert!((lambda_inv_half_norm_sq(&c3) - std::f64::consts::PI / 3.0).abs() < 1e-14);
    }
}
