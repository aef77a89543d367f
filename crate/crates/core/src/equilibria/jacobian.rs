//! Jacobians of the right-hand sides: central-difference numeric for every
//! system, closed-form analytic for the two 2-D subsystems at their
//! interior equilibria.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::rhs::{birth_rate, birth_slope, rhs, EPS_DENOM};
use crate::state::SystemId;
use crate::thresholds::thresholds;
use nalgebra::DMatrix;

use super::Eigenvalue;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    /// Closed-form matrix; only supported at interior equilibria of the
    /// bee–mite and bee–virus subsystems.
    Analytic,
    /// Central differences with per-coordinate step max(1e-6, 1e-6 |x_i|).
    Numeric,
}

/// Jacobian of `sys` at `point`.
///
/// Numeric mode works anywhere the rhs is smooth; it refuses points with
/// N_h below the frequency-term guard for systems whose rhs divides by
/// N_h, since differencing across that branch is meaningless.
pub fn jacobian(sys: SystemId, point: &[f64], p: &Params, mode: JacobianMode) -> Result<DMatrix<f64>> {
    let n = sys.compartments().len();
    if point.len() != n {
        return Err(Error::DimensionMismatch { sys, expected: n, got: point.len() });
    }
    match mode {
        JacobianMode::Numeric => numeric(sys, point, p),
        JacobianMode::Analytic => analytic(sys, point, p),
    }
}

fn has_frequency_terms(sys: SystemId) -> bool {
    matches!(
        sys,
        SystemId::Full | SystemId::MiteFree | SystemId::HealthyMiteFree
    )
}

fn numeric(sys: SystemId, point: &[f64], p: &Params) -> Result<DMatrix<f64>> {
    let n = point.len();
    if has_frequency_terms(sys) {
        // n_h occupies the leading compartments: S_h always, I_h when present.
        let n_h: f64 = match sys {
            SystemId::MiteFree | SystemId::HealthyMiteFree | SystemId::Full => {
                point[0] + point[1]
            }
            _ => point[0],
        };
        if n_h <= EPS_DENOM {
            return Err(Error::SingularPoint {
                sys,
                reason: format!(
                    "total bee population {n_h:e} is inside the zero-denominator \
                     guard; the rhs is discontinuous here"
                ),
            });
        }
    }
    let mut jac = DMatrix::zeros(n, n);
    let mut lo = point.to_vec();
    let mut hi = point.to_vec();
    for j in 0..n {
        let h = 1e-6_f64.max(1e-6 * point[j].abs());
        lo[j] = point[j] - h;
        hi[j] = point[j] + h;
        let f_lo = rhs(sys, p, &lo);
        let f_hi = rhs(sys, p, &hi);
        for i in 0..n {
            jac[(i, j)] = (f_hi[i] - f_lo[i]) / (2.0 * h);
        }
        lo[j] = point[j];
        hi[j] = point[j];
    }
    Ok(jac)
}

fn analytic(sys: SystemId, point: &[f64], p: &Params) -> Result<DMatrix<f64>> {
    match sys {
        SystemId::VirusFree => analytic_bee_mite(point, p),
        SystemId::MiteFree => analytic_bee_virus(point, p),
        _ => Err(Error::AnalyticJacobian {
            sys,
            reason: "closed form is only available for the two-compartment subsystems".into(),
        }),
    }
}

/// Bee–mite interior Jacobian
///   [ r H (k_hat - H^2)/(k_hat + H^2)^2,  -alpha H ]
///   [ c alpha M,                           0       ]
/// valid only where both equilibrium identities hold:
/// c alpha H = d_m and b(H)/H = d_h + alpha M.
fn analytic_bee_mite(point: &[f64], p: &Params) -> Result<DMatrix<f64>> {
    let (h, m) = (point[0], point[1]);
    let sys = SystemId::VirusFree;
    if h <= 0.0 {
        return Err(Error::AnalyticJacobian {
            sys,
            reason: "interior form needs H > 0".into(),
        });
    }
    let mite_gap = (p.c * p.alpha * h - p.d_m).abs();
    if mite_gap > 1e-6 * p.d_m.max(1.0) {
        return Err(Error::AnalyticJacobian {
            sys,
            reason: format!(
                "point is not on the mite break-even line: |c alpha H - d_m| = {mite_gap:e}"
            ),
        });
    }
    let bee_rate = p.d_h + p.alpha * m;
    let bee_gap = (birth_rate(p, h) / h - bee_rate).abs();
    if bee_gap > 1e-6 * bee_rate.max(1.0) {
        return Err(Error::AnalyticJacobian {
            sys,
            reason: format!(
                "point is not on the bee balance curve: |b(H)/H - d_h - alpha M| = {bee_gap:e}"
            ),
        });
    }
    let denom = p.k_hat + h * h;
    let j11 = p.r * h * (p.k_hat - h * h) / (denom * denom);
    Ok(DMatrix::from_row_slice(2, 2, &[
        j11,
        -p.alpha * h,
        p.c * p.alpha * m,
        0.0,
    ]))
}

/// Bee–virus Jacobian on the infected ray S_h = a I_h, a = 1/(R0_V - 1).
/// The identity beta_h a/(1+a) = d_h + mu_h collapses the frequency terms,
/// so the form holds at every point of the ray, not just the equilibria.
fn analytic_bee_virus(point: &[f64], p: &Params) -> Result<DMatrix<f64>> {
    let sys = SystemId::MiteFree;
    let th = thresholds(p);
    let a = th.a.ok_or_else(|| Error::AnalyticJacobian {
        sys,
        reason: "infected ray needs R0_V > 1".into(),
    })?;
    let (s_h, i_h) = (point[0], point[1]);
    if i_h <= 0.0 {
        return Err(Error::AnalyticJacobian {
            sys,
            reason: "interior form needs I_h > 0".into(),
        });
    }
    let off_ray = (s_h - a * i_h).abs();
    if off_ray > 1e-6 * s_h.abs().max(1.0) {
        return Err(Error::AnalyticJacobian {
            sys,
            reason: format!("point is off the infected ray: |S_h - a I_h| = {off_ray:e}"),
        });
    }
    let one_a2 = (1.0 + a) * (1.0 + a);
    let bp = birth_slope(p, (a + p.rho) * i_h);
    Ok(DMatrix::from_row_slice(2, 2, &[
        bp - p.d_h - p.beta_h / one_a2,
        p.rho * bp - p.beta_h * a * a / one_a2,
        p.beta_h / one_a2,
        -a * p.beta_h / one_a2,
    ]))
}

/// Eigenvalues of a square matrix, sorted by (re, im) for deterministic
/// reporting.
pub fn eigenvalues_of(m: &DMatrix<f64>) -> Vec<Eigenvalue> {
    let eigs = m.clone().complex_eigenvalues();
    let mut out: Vec<Eigenvalue> = eigs
        .iter()
        .map(|c| Eigenvalue { re: c.re, im: c.im })
        .collect();
    out.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    out
}
