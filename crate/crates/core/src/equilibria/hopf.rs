//! Sweep a parameter and locate crossings of H* = sqrt(k_hat), the
//! boundary where the bee-mite interior equilibrium trades stability and
//! oscillations appear. The interior Jacobian trace is proportional to
//! k_hat - H*^2, so each crossing is where its sign flips.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::thresholds::thresholds;
use serde::Serialize;

/// Parameters H* = d_m/(alpha c) or sqrt(k_hat) actually depend on.
pub const HOPF_SWEEP_PARAMS: [&str; 4] = ["d_m", "alpha", "c", "K_hat"];

/// Relative width to which a crossing is localized in the swept parameter.
const CROSSING_TOL_REL: f64 = 1e-6;

/// One localized stability-boundary crossing.
#[derive(Clone, Debug, Serialize)]
pub struct HopfCrossing {
    /// Swept-parameter value of the crossing, localized to 1e-6 relative.
    pub param_value: f64,
    /// H* - sqrt(k_hat) just below and above the crossing.
    pub gap_below: f64,
    pub gap_above: f64,
    /// Interior-equilibrium Jacobian trace just below and above; None when
    /// the interior equilibrium does not exist on that side.
    pub trace_below: Option<f64>,
    pub trace_above: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HopfScanReport {
    pub param: String,
    pub range: (f64, f64),
    pub step: f64,
    pub crossings: Vec<HopfCrossing>,
    /// Sweep values where H* or the interior equilibrium was undefined,
    /// and similar non-fatal observations.
    pub notes: Vec<String>,
}

fn with_param(base: &Params, key: &str, value: f64) -> Params {
    let mut p = base.clone();
    // key is pre-validated against HOPF_SWEEP_PARAMS
    p.set(key, value).expect("swept key must exist");
    p
}

/// H* - sqrt(k_hat), None when H* is undefined (alpha c = 0).
fn gap(p: &Params) -> Option<f64> {
    thresholds(p).h_star.map(|h| h - p.k_hat.sqrt())
}

/// Trace of the bee-mite interior Jacobian, None when the interior
/// equilibrium (H*, M*) does not exist.
fn interior_trace(p: &Params) -> Option<f64> {
    let th = thresholds(p);
    let (h, m) = (th.h_star?, th.m_star?);
    if m <= 0.0 {
        return None;
    }
    let denom = p.k_hat + h * h;
    Some(p.r * h * (p.k_hat - h * h) / (denom * denom))
}

/// Sweep `param` over `range` in increments of `step`, reporting every
/// sign change of H*(p) - sqrt(k_hat(p)) localized by bisection, with the
/// interior trace evaluated on both sides of each crossing. A missing
/// interior equilibrium at a sweep point is reported in `notes` and the
/// scan continues.
pub fn hopf_scan(p: &Params, param: &str, range: (f64, f64), step: f64) -> Result<HopfScanReport> {
    if !HOPF_SWEEP_PARAMS.contains(&param) {
        return Err(Error::HopfScan(format!(
            "swept parameter must be one of {HOPF_SWEEP_PARAMS:?}, got {param:?}"
        )));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::HopfScan(format!("range ({lo}, {hi}) is not a finite interval")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::HopfScan(format!("step {step} must be positive")));
    }

    let mut report = HopfScanReport {
        param: param.to_string(),
        range,
        step,
        crossings: Vec::new(),
        notes: Vec::new(),
    };

    // Sweep grid, always including the right endpoint.
    let mut values = Vec::new();
    let mut v = lo;
    while v < hi {
        values.push(v);
        v += step;
    }
    values.push(hi);

    let mut prev: Option<(f64, f64)> = None; // (value, gap)
    for &v in &values {
        let pv = with_param(p, param, v);
        let Some(g) = gap(&pv) else {
            report
                .notes
                .push(format!("{param} = {v}: mite break-even level undefined"));
            prev = None;
            continue;
        };
        if interior_trace(&pv).is_none() {
            report.notes.push(format!(
                "{param} = {v}: interior equilibrium does not exist here"
            ));
        }
        if let Some((v0, g0)) = prev {
            if g0 == 0.0 || g0 * g < 0.0 {
                let crossing = localize(p, param, v0, g0, v, g);
                report.crossings.push(crossing);
            }
        }
        prev = Some((v, g));
    }
    Ok(report)
}

/// Bisect [a, b] (gap signs differ) down to 1e-6 relative width, then
/// sample the gap and interior trace at the final bracket endpoints.
fn localize(p: &Params, param: &str, mut a: f64, mut ga: f64, mut b: f64, _gb: f64) -> HopfCrossing {
    for _ in 0..200 {
        if (b - a).abs() <= CROSSING_TOL_REL * a.abs().max(b.abs()) {
            break;
        }
        let mid = 0.5 * (a + b);
        let gm = gap(&with_param(p, param, mid)).unwrap_or(f64::NAN);
        if !gm.is_finite() {
            break;
        }
        if gm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if ga * gm < 0.0 {
            b = mid;
        } else {
            a = mid;
            ga = gm;
        }
    }
    let p_lo = with_param(p, param, a);
    let p_hi = with_param(p, param, b);
    HopfCrossing {
        param_value: 0.5 * (a + b),
        gap_below: gap(&p_lo).unwrap_or(f64::NAN),
        gap_above: gap(&p_hi).unwrap_or(f64::NAN),
        trace_below: interior_trace(&p_lo),
        trace_above: interior_trace(&p_hi),
    }
}
