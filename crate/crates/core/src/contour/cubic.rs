//! Cubic terms of the graph equation at `ρ̄ = 1`.
//!
//! ```text
//! C₁ = ½ h' H(h²)
//! C₂ = ¼ (1/2π) ∫ δh² h(β) / sin²(y/2) dβ
//! C₃ = -½ (1/2π) ∫ δh² h(β) / sin²(y/2) dβ
//! C₄ = ½ (1/2π) ∫ δh h(β) (h'(α) + h'(β)) sin y / sin²(y/2) dβ
//!    = ½ (h²)' H(h) - h' H(h²) + ½ h Λ(h²) - ⅓ Λ(h³)
//! ```
//!
//! Writing `h(β) = h(α) - δh` in `C₂ + C₃ = -C₂` gives
//!
//! ```text
//! C₂ + C₃ = ¼ (1/2π) ∫ δh³ / sin²(y/2) dβ - h² Λ(h) + ½ h Λ(h²)
//! ```
//!
//! The often-quoted form with `+ h² Λ(h) - ½ h Λ(h²)` has the last two signs
//! flipped; [`printed_c2_c3_identity`] evaluates it so the discrepancy can be
//! measured. The combined cubic term therefore reads
//!
//! ```text
//! C = -½ h' H(h²) - h² Λ(h) + h Λ(h²) + ½ (h²)' H(h) - ⅓ Λ(h³) + ¼ (1/2π) ∫ δh³ / sin²(y/2) dβ
//! ```

use super::{ContourError, GRAPH_RESOLUTION_GUARD};
use crate::par::map_indices;
use crate::spectral::{derivative, hilbert, lambda, product, product3, PeriodicField};

#[derive(Debug, Clone)]
pub struct CubicTerms {
    pub c1: PeriodicField,
    pub c2: PeriodicField,
    pub c3: PeriodicField,
    /// `C₄` by quadrature of its integral.
    pub c4: PeriodicField,
    /// `C₄` from its operator closed form.
    pub c4_closed: PeriodicField,
    /// `¼ (1/2π) ∫ δh³ / sin²(y/2) dβ`.
    pub cubic_integral: PeriodicField,
    /// `C₂ + C₃` through the operator identity.
    pub c2_c3_closed: PeriodicField,
    /// Combined closed form `C`.
    pub combined: PeriodicField,
    /// `C₁ + C₂ + C₃ + C₄`, every integral by quadrature.
    pub sum: PeriodicField,
}

fn field(h: &PeriodicField, v: Vec<f64>) -> PeriodicField {
    PeriodicField::from_values(h.grid(), v).expect("grid sized")
}

/// Trapezoid sums of the three smooth kernels `δh² h(β)/sin²`, `δh³/sin²`
/// and `δh h(β)(h'(α)+h'(β)) sin y/sin²`, each divided by `n`.
fn kernel_sums(h: &PeriodicField, hp: &PeriodicField) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = h.len();
    let hv = h.values();
    let dp = hp.values();
    let nodes = h.grid().nodes();
    let rows = map_indices(n, |i| {
        let (mut sq, mut cube, mut c4) = (0.0, 0.0, 0.0);
        for j in 0..n {
            if j == i {
                sq += 4.0 * dp[i] * dp[i] * hv[i];
                c4 += 8.0 * dp[i] * dp[i] * hv[i];
            } else {
                let dh = hv[i] - hv[j];
                let y = nodes[i] - nodes[j];
                let s = (0.5 * y).sin();
                let s2 = s * s;
                sq += dh * dh * hv[j] / s2;
                cube += dh * dh * dh / s2;
                c4 += dh * hv[j] * (dp[i] + dp[j]) * y.sin() / s2;
            }
        }
        let nf = n as f64;
        (sq / nf, cube / nf, c4 / nf)
    });
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for (x, y, z) in rows {
        a.push(x);
        b.push(y);
        c.push(z);
    }
    (a, b, c)
}

pub fn cubic_terms(h: &PeriodicField) -> Result<CubicTerms, ContourError> {
    let ratio = h.tail_peak_ratio();
    if ratio > GRAPH_RESOLUTION_GUARD {
        return Err(ContourError::UnderResolved {
            ratio,
            guard: GRAPH_RESOLUTION_GUARD,
        });
    }
    let hp = derivative(h);
    let h2 = product(h, h)?;
    let h3 = product3(h, h, h)?;
    let h_h2 = hilbert(&h2);
    let hh = hilbert(h);
    let lam_h = lambda(h);
    let lam_h2 = lambda(&h2);
    let lam_h3 = lambda(&h3);
    let h2p = derivative(&h2);

    let (sq, cube, c4q) = kernel_sums(h, &hp);
    let c2 = field(h, sq.iter().map(|v| 0.25 * v).collect());
    let c3 = field(h, sq.iter().map(|v| -0.5 * v).collect());
    let c4 = field(h, c4q.iter().map(|v| 0.5 * v).collect());
    let cubic_integral = field(h, cube.iter().map(|v| 0.25 * v).collect());

    let c1 = product(&hp, &h_h2)?.scaled(0.5);
    let hp_hh2 = product(&hp, &h_h2)?;
    let h2p_hh = product(&h2p, &hh)?;
    let h_lam_h2 = product(h, &lam_h2)?;
    let h2_lam_h = product(&h2, &lam_h)?;

    let mut c4_closed = h2p_hh.scaled(0.5);
    c4_closed.axpy(-1.0, &hp_hh2);
    c4_closed.axpy(0.5, &h_lam_h2);
    c4_closed.axpy(-1.0 / 3.0, &lam_h3);

    let mut c2_c3_closed = cubic_integral.clone();
    c2_c3_closed.axpy(-1.0, &h2_lam_h);
    c2_c3_closed.axpy(0.5, &h_lam_h2);

    let mut combined = hp_hh2.scaled(-0.5);
    combined.axpy(-1.0, &h2_lam_h);
    combined.axpy(1.0, &h_lam_h2);
    combined.axpy(0.5, &h2p_hh);
    combined.axpy(-1.0 / 3.0, &lam_h3);
    combined.axpy(1.0, &cubic_integral);

    let mut sum = c1.clone();
    sum.axpy(1.0, &c2);
    sum.axpy(1.0, &c3);
    sum.axpy(1.0, &c4);

    Ok(CubicTerms {
        c1,
        c2,
        c3,
        c4,
        c4_closed,
        cubic_integral,
        c2_c3_closed,
        combined,
        sum,
    })
}

/// Right-hand side of the `C₂ + C₃` identity with the signs as commonly
/// displayed: `¼ (1/2π) ∫ δh³/sin² + h² Λ(h) - ½ h Λ(h²)`.
pub fn printed_c2_c3_identity(h: &PeriodicField) -> Result<PeriodicField, ContourError> {
    let t = cubic_terms(h)?;
    let h2 = product(h, h)?;
    let mut out = t.cubic_integral;
    out.axpy(1.0, &product(&h2, &lambda(h))?);
    out.axpy(-0.5, &product(h, &lambda(&h2))?);
    Ok(out)
}
