//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the total
//! estimate meets `max(abs_tol, rel_tol·|I|)` or the subdivision budget runs
//! out. Running out is an error, never a silently returned value.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {subdivisions} subdivisions")]
    NotConverged {
        value: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(c));
    }
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(c - dx));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(c + dx));
        }
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    fc = k * h;
    Ok((fc, ((k - g) * h).abs()))
}

/// Integrates `f` over `[a, b]`. Endpoints are never evaluated, so integrable
/// endpoint singularities are acceptable.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadEstimate, QuadError> {
    if a == b {
        return Ok(QuadEstimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = kronrod(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut subdivisions = 0;
    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if subdivisions >= opts.max_subdivisions {
            return Err(QuadError::NotConverged {
                value: total,
                error: total_err,
                subdivisions,
            });
        }
        let seg = heap.pop().expect("heap never empties");
        let mid = 0.5 * (seg.a + seg.b);
        let (v1, e1) = kronrod(&mut f, seg.a, mid)?;
        let (v2, e2) = kronrod(&mut f, mid, seg.b)?;
        evaluations += 30;
        subdivisions += 1;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
        if subdivisions % 64 == 0 {
            // Re-sum to shed accumulated cancellation in the running totals.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    Ok(QuadEstimate {
        value,
        error: total_err,
        evaluations,
    })
}

/// Integrates over consecutive breakpoints, e.g. to isolate a kink or a
/// singularity at a known interior location.
pub fn integrate_pieces(
    mut f: impl FnMut(f64) -> f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadEstimate, QuadError> {
    let mut out = QuadEstimate {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    for w in breakpoints.windows(2) {
        let est = integrate(&mut f, w[0], w[1], opts)?;
        out.value += est.value;
        out.error += est.error;
        out.evaluations += est.evaluations;
    }
    Ok(out)
}
