//! Singular-limit period of the relaxation oscillator.
//!
//! In the limit of small `epsilon` the orbit of the xy-subsystem slides along
//! the two stable branches of the cubic nullcline `y = f(x)`. On a branch,
//! `y = f(x)` and `dy/dt = eta1 (x - rho) y`, so `dt = f'(x) dx / (eta1 (x - rho) f(x))`.
//! The right branch runs from the landing point `x = 4` down to the fold at
//! `x = 3`, the left branch from `x = 0` up to the fold at `x = 1`:
//!
//! ```text
//! T1 = int_4^3 f'(x) / (eta1 (x - rho) f(x)) dx
//! T2 = int_0^1 f'(x) / (eta1 (x - rho) f(x)) dx
//! ```
//!
//! `T1` is written with its bounds reversed; the integrand is negative on
//! `[3, 4]`, so the oriented value is positive and is reported as such.

use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::oscillator::{nullcline_cubic, nullcline_slope};

/// Subdivision budget for [`adaptive_quadrature`].
pub const MAX_INTERVALS: usize = 200_000;

/// Absolute accuracy to which the eta1-free branch integrals are always resolved.
pub const INNER_TOL_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
    #[error("tolerance {tol} not reached after {MAX_INTERVALS} intervals (best {best:?})")]
    Budget { tol: f64, best: Quadrature },
    #[error("invalid quadrature input: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    /// Richardson-corrected value on [a, b].
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson quadrature with a global error queue: the panel with
/// the largest local error estimate is bisected until the estimates sum to at
/// most `tol`. Deterministic for fixed inputs.
pub fn adaptive_quadrature<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(QuadratureError::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::Domain("bounds must be finite".into()));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_bound: 0.0,
        });
    }
    if a > b {
        return adaptive_quadrature(f, b, a, tol).map(|q| Quadrature {
            value: -q.value,
            error_bound: q.error_bound,
        });
    }
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite(x))
        }
    };
    let make = |a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64| -> Result<Panel, QuadratureError> {
        let m = 0.5 * (a + b);
        let flm = eval(0.5 * (a + m))?;
        let frm = eval(0.5 * (m + b))?;
        let halves = simpson(a, m, fa, flm, fm) + simpson(m, b, fm, frm, fb);
        let diff = halves - whole;
        Ok(Panel {
            a,
            b,
            fa,
            fm,
            fb,
            value: halves + diff / 15.0,
            error: diff.abs() / 15.0,
        })
    };

    let (fa, fm, fb) = (eval(a)?, eval(0.5 * (a + b))?, eval(b)?);
    let root = make(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb))?;
    let mut total_error = root.error;
    let mut heap = BinaryHeap::from([root]);
    while total_error > tol {
        if heap.len() >= MAX_INTERVALS {
            let (value, error_bound) = sum_panels(&heap);
            return Err(QuadratureError::Budget {
                tol,
                best: Quadrature { value, error_bound },
            });
        }
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        let flm = eval(0.5 * (p.a + m))?;
        let frm = eval(0.5 * (m + p.b))?;
        let left = make(p.a, m, p.fa, flm, p.fm, simpson(p.a, m, p.fa, flm, p.fm))?;
        let right = make(m, p.b, p.fm, frm, p.fb, simpson(m, p.b, p.fm, frm, p.fb))?;
        total_error += left.error + right.error - p.error;
        heap.push(left);
        heap.push(right);
        if total_error <= tol {
            // the running sum drifts; confirm before stopping
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }
    let (value, error_bound) = sum_panels(&heap);
    Ok(Quadrature { value, error_bound })
}

fn sum_panels(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    // sum in abscissa order so the result does not depend on heap layout
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    pub t1: f64,
    pub t2: f64,
    pub total: f64,
    pub quadrature_error_bound: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum PeriodEstimateError {
    #[error("rho = {0} must lie strictly inside (1, 3) so the pole x = rho avoids [0, 1] and [3, 4]")]
    RhoOutOfRange(f64),
    #[error("eta1 must be positive and finite, got {0}")]
    InvalidEta1(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// `f'(x) / ((x - rho) f(x))`: the branch-time integrand without the `1/eta1`
/// factor.
pub fn branch_integrand(x: f64, rho: f64) -> f64 {
    nullcline_slope(x) / ((x - rho) * nullcline_cubic(x))
}

/// `T1`, `T2` and their sum. Each integral is resolved to an absolute error of
/// `tol / 2`, so the reported combined bound stays below `tol`.
pub fn estimate_period(eta1: f64, rho: f64, tol: f64) -> Result<PeriodEstimate, PeriodEstimateError> {
    if !(eta1 > 0.0 && eta1.is_finite()) {
        return Err(PeriodEstimateError::InvalidEta1(eta1));
    }
    if !(rho > 1.0 && rho < 3.0) {
        return Err(PeriodEstimateError::RhoOutOfRange(rho));
    }
    // A fixed floor makes the subdivision independent of eta1 for all but
    // extreme tolerances, so the period scales exactly as 1/eta1.
    let g = |x: f64| branch_integrand(x, rho);
    let inner_tol = (0.5 * tol * eta1).min(INNER_TOL_FLOOR);
    let right = adaptive_quadrature(g, 4.0, 3.0, inner_tol)?;
    let left = adaptive_quadrature(g, 0.0, 1.0, inner_tol)?;
    let t1 = right.value / eta1;
    let t2 = left.value / eta1;
    Ok(PeriodEstimate {
        t1,
        t2,
        total: t1 + t2,
        quadrature_error_bound: (right.error_bound + left.error_bound) / eta1,
    })
}
