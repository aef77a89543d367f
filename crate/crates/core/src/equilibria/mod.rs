//! Equilibrium location and stability classification for every system
//! variant: closed forms for the 1-D and 2-D subsystems, numeric root
//! finding for the 3-D and 4-D interiors, and Hopf-boundary scanning.

pub mod hopf;
pub mod interior;
pub mod jacobian;

pub use hopf::{hopf_scan, HopfCrossing, HopfScanReport};
pub use interior::{
    interior_full, interior_healthy_mite_free, no_interior_bundles, BranchCondition,
    InequalityCheck, InteriorSolveReport,
};
pub use jacobian::{jacobian, JacobianMode};

use crate::params::Params;
use crate::rhs::{birth_slope, rhs};
use crate::state::{SysVec, SystemId};
use crate::thresholds::{f_pair, thresholds};
use serde::Serialize;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StabilityClass {
    Sink,
    Source,
    Saddle,
    Nonhyperbolic,
}

impl StabilityClass {
    pub fn label(self) -> &'static str {
        match self {
            StabilityClass::Sink => "sink",
            StabilityClass::Source => "source",
            StabilityClass::Saddle => "saddle",
            StabilityClass::Nonhyperbolic => "nonhyperbolic",
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn modulus(self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// An equilibrium with its local linearization summary.
#[derive(Clone, Debug, Serialize)]
pub struct ClassifiedEquilibrium {
    pub sys: SystemId,
    /// Coordinates in the layout of `sys`.
    pub location: SysVec,
    pub eigenvalues: Vec<Eigenvalue>,
    pub class: StabilityClass,
    /// Which existence branch produced this point.
    pub existence_condition: String,
    /// max |rhs| at the location; equilibria must keep this below
    /// 1e-9 * max(r, 1).
    pub residual: f64,
}

/// Relative tolerance for calling an eigenvalue's real part zero.
pub const TAU_EIG_REL: f64 = 1e-8;

/// Classify by eigenvalue real parts. Real parts within
/// 1e-8 * max modulus of zero make the point nonhyperbolic (marginal cases
/// are reported, not guessed at).
pub fn classify_eigs(eigs: &[Eigenvalue]) -> StabilityClass {
    let max_mod = eigs.iter().map(|e| e.modulus()).fold(0.0, f64::max);
    if max_mod == 0.0 {
        return StabilityClass::Nonhyperbolic;
    }
    let tau = TAU_EIG_REL * max_mod;
    if eigs.iter().any(|e| e.re.abs() <= tau) {
        StabilityClass::Nonhyperbolic
    } else if eigs.iter().all(|e| e.re < 0.0) {
        StabilityClass::Sink
    } else if eigs.iter().all(|e| e.re > 0.0) {
        StabilityClass::Source
    } else {
        StabilityClass::Saddle
    }
}

/// max |rhs| at a point, the residual recorded on every equilibrium.
pub fn residual_at(sys: SystemId, p: &Params, y: &[f64]) -> f64 {
    rhs(sys, p, y).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Eigenvalues of a 2x2 matrix from trace and determinant, deterministic
/// ordering (by real part, then imaginary part).
fn eig_from_trace_det(trace: f64, det: f64) -> Vec<Eigenvalue> {
    let disc = trace * trace - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        vec![
            Eigenvalue::real((trace - s) / 2.0),
            Eigenvalue::real((trace + s) / 2.0),
        ]
    } else {
        let im = (-disc).sqrt() / 2.0;
        vec![
            Eigenvalue { re: trace / 2.0, im: -im },
            Eigenvalue { re: trace / 2.0, im },
        ]
    }
}

fn make(
    sys: SystemId,
    p: &Params,
    location: &[f64],
    eigenvalues: Vec<Eigenvalue>,
    existence_condition: &str,
) -> ClassifiedEquilibrium {
    ClassifiedEquilibrium {
        sys,
        location: SysVec::from_slice(location),
        class: classify_eigs(&eigenvalues),
        eigenvalues,
        existence_condition: existence_condition.to_string(),
        residual: residual_at(sys, p, location),
    }
}

/// Equilibria of the single-population bee model: the origin always, plus
/// the Allee threshold and carrying level when peak per-capita growth
/// r/(2 sqrt(k_hat)) exceeds d_h. The scalar derivative b'(x) - d_h
/// classifies each; at the tangency (zero discriminant) it vanishes
/// identically, recorded as an exact zero.
pub fn equilibria_bee_only(p: &Params) -> Vec<ClassifiedEquilibrium> {
    let mut out = vec![make(
        SystemId::BeeOnly,
        p,
        &[0.0],
        vec![Eigenvalue::real(-p.d_h)],
        "origin",
    )];
    let (lo, hi) = f_pair(p.r, p.k_hat, p.d_h, 1.0);
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo == hi => {
            out.push(make(
                SystemId::BeeOnly,
                p,
                &[lo],
                vec![Eigenvalue::real(0.0)],
                "bee-tangency-double-root",
            ));
        }
        (Some(lo), Some(hi)) => {
            out.push(make(
                SystemId::BeeOnly,
                p,
                &[lo],
                vec![Eigenvalue::real(birth_slope(p, lo) - p.d_h)],
                "bee-allee-threshold",
            ));
            out.push(make(
                SystemId::BeeOnly,
                p,
                &[hi],
                vec![Eigenvalue::real(birth_slope(p, hi) - p.d_h)],
                "bee-carrying-level",
            ));
        }
        _ => {}
    }
    out
}

/// Equilibria of the bee–mite (virus-free) subsystem: the bee-only set
/// embedded at M = 0, plus the interior (H*, M*) when the mite break-even
/// level H* lies strictly between the bee Allee threshold and carrying
/// level (equivalently M* > 0).
///
/// Boundary eigenvalues are b'(x) - d_h (bee direction) and c alpha x - d_m
/// (mite invasion); the interior uses the analytic Jacobian, whose trace
/// r H*(k_hat - H*^2)/(k_hat + H*^2)^2 changes sign at H* = sqrt(k_hat)
/// (the oscillation boundary).
pub fn equilibria_virus_free(p: &Params) -> Vec<ClassifiedEquilibrium> {
    let sys = SystemId::VirusFree;
    let ca = p.c * p.alpha;
    let mut out = vec![make(
        sys,
        p,
        &[0.0, 0.0],
        vec![Eigenvalue::real(-p.d_h), Eigenvalue::real(-p.d_m)],
        "origin",
    )];

    let mite_eig = |x: f64| Eigenvalue::real(ca * x - p.d_m);
    let (lo, hi) = f_pair(p.r, p.k_hat, p.d_h, 1.0);
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo == hi => {
            out.push(make(
                sys,
                p,
                &[lo, 0.0],
                vec![Eigenvalue::real(0.0), mite_eig(lo)],
                "bee-tangency-double-root",
            ));
        }
        (Some(lo), Some(hi)) => {
            out.push(make(
                sys,
                p,
                &[lo, 0.0],
                vec![Eigenvalue::real(birth_slope(p, lo) - p.d_h), mite_eig(lo)],
                "bee-allee-threshold",
            ));
            out.push(make(
                sys,
                p,
                &[hi, 0.0],
                vec![Eigenvalue::real(birth_slope(p, hi) - p.d_h), mite_eig(hi)],
                "bee-carrying-level",
            ));
        }
        _ => {}
    }

    let th = thresholds(p);
    if let (Some(h), Some(m)) = (th.h_star, th.m_star) {
        if m > 0.0 {
            let denom = p.k_hat + h * h;
            let trace = p.r * h * (p.k_hat - h * h) / (denom * denom);
            let det = p.c * p.alpha * p.alpha * h * m;
            out.push(make(
                sys,
                p,
                &[h, m],
                eig_from_trace_det(trace, det),
                "mite-bee-interior",
            ));
        }
    }
    out
}

/// Equilibria of the bee–virus (mite-free) subsystem: the bee-only set
/// embedded at I_h = 0, plus two interior points on the ray S_h = a I_h when
/// the virus can invade (R0_V > 1) and growth clears the infected-population
/// threshold d_tilde/(a + rho).
///
/// Boundary eigenvalues are b'(x) - d_h and beta_h - (d_h + mu_h) (virus
/// invasion at a healthy colony). Interior eigenvalues come from the
/// analytic on-ray Jacobian; the lower point is a saddle and the upper a
/// sink for all admissible parameters.
pub fn equilibria_mite_free(p: &Params) -> Vec<ClassifiedEquilibrium> {
    let sys = SystemId::MiteFree;
    let mut out = vec![make(
        sys,
        p,
        &[0.0, 0.0],
        vec![
            Eigenvalue::real(-p.d_h),
            Eigenvalue::real(-(p.d_h + p.mu_h)),
        ],
        "origin",
    )];

    let virus_eig = Eigenvalue::real(p.beta_h - (p.d_h + p.mu_h));
    let (lo, hi) = f_pair(p.r, p.k_hat, p.d_h, 1.0);
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo == hi => {
            out.push(make(
                sys,
                p,
                &[lo, 0.0],
                vec![Eigenvalue::real(0.0), virus_eig],
                "bee-tangency-double-root",
            ));
        }
        (Some(lo), Some(hi)) => {
            out.push(make(
                sys,
                p,
                &[lo, 0.0],
                vec![Eigenvalue::real(birth_slope(p, lo) - p.d_h), virus_eig],
                "bee-allee-threshold",
            ));
            out.push(make(
                sys,
                p,
                &[hi, 0.0],
                vec![Eigenvalue::real(birth_slope(p, hi) - p.d_h), virus_eig],
                "bee-carrying-level",
            ));
        }
        _ => {}
    }

    let th = thresholds(p);
    if let (Some(a), Some(d_tilde)) = (th.a, th.d_tilde) {
        let y = (a + p.rho) * (a + p.rho);
        let (ilo, ihi) = f_pair(p.r, p.k_hat, d_tilde, y);
        let endemic = |i_h: f64, tag: &str, out: &mut Vec<ClassifiedEquilibrium>| {
            let s_h = a * i_h;
            out.push(make(
                sys,
                p,
                &[s_h, i_h],
                mite_free_ray_eigs(p, a, i_h),
                tag,
            ));
        };
        match (ilo, ihi) {
            (Some(ilo), Some(ihi)) if ilo == ihi => {
                endemic(ilo, "virus-endemic-tangency", &mut out)
            }
            (Some(ilo), Some(ihi)) => {
                endemic(ilo, "virus-endemic-lower", &mut out);
                endemic(ihi, "virus-endemic-upper", &mut out);
            }
            _ => {}
        }
    }
    out
}

/// Analytic Jacobian eigenvalues on the infected ray S_h = a I_h of the
/// mite-free subsystem. Valid at any point of the ray because
/// beta_h a/(a+1) = d_h + mu_h is a parameter identity given
/// a = 1/(R0_V - 1).
fn mite_free_ray_eigs(p: &Params, a: f64, i_h: f64) -> Vec<Eigenvalue> {
    let one_a2 = (1.0 + a) * (1.0 + a);
    let bp = birth_slope(p, (a + p.rho) * i_h);
    let j11 = bp - p.d_h - p.beta_h / one_a2;
    let j12 = p.rho * bp - p.beta_h * a * a / one_a2;
    let j21 = p.beta_h / one_a2;
    let j22 = -a * p.beta_h / one_a2;
    eig_from_trace_det(j11 + j22, j11 * j22 - j12 * j21)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_params, ParamsRaw};

    fn base_raw() -> ParamsRaw {
        ParamsRaw {
            r: 1500.0,
            k: 2.5e5,
            xi_h: 0.5,
            xi_m: 0.5,
            rho: 0.9,
            d_h: 0.15,
            d_m: 0.1,
            mu_h: 0.1,
            mu_m: 0.01,
            alpha_hat: 0.02,
            c: 0.005,
            beta_h: 0.24,
            beta_mh: 0.06,
            beta_mh2: 0.4,
            beta_hm: 0.06,
        }
    }

    #[test]
    fn bee_only_set_has_three_points_when_growth_clears_death() {
        let p = derive_params(&base_raw()).unwrap();
        let eqs = equilibria_bee_only(&p);
        assert_eq!(eqs.len(), 3);
        assert_eq!(eqs[0].class, StabilityClass::Sink);
        assert_eq!(eqs[1].class, StabilityClass::Source);
        assert_eq!(eqs[2].class, StabilityClass::Sink);
        for e in &eqs {
            assert!(e.residual <= 1e-9 * p.r.max(1.0), "{e:?}");
        }
    }

    #[test]
    fn bee_only_double_root_is_nonhyperbolic() {
        let mut raw = base_raw();
        // r = 2 d_h sqrt(k_hat): tangency of birth and death curves.
        raw.k = 2.5e5; // k_hat = 1e6, sqrt = 1000
        raw.d_h = raw.r / 2000.0;
        let p = derive_params(&raw).unwrap();
        let eqs = equilibria_bee_only(&p);
        assert_eq!(eqs.len(), 2);
        assert_eq!(eqs[1].class, StabilityClass::Nonhyperbolic);
        assert!((eqs[1].location[0] - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn weak_growth_leaves_only_origin() {
        let mut raw = base_raw();
        raw.d_h = 10.0;
        let p = derive_params(&raw).unwrap();
        assert_eq!(equilibria_bee_only(&p).len(), 1);
        assert_eq!(equilibria_virus_free(&p).len(), 1);
        assert_eq!(equilibria_mite_free(&p).len(), 1);
    }

    #[test]
    fn classify_eigs_cases() {
        let e = |re: f64, im: f64| Eigenvalue { re, im };
        assert_eq!(classify_eigs(&[e(-1.0, 2.0), e(-1.0, -2.0)]), StabilityClass::Sink);
        assert_eq!(classify_eigs(&[e(1.0, 0.0), e(2.0, 0.0)]), StabilityClass::Source);
        assert_eq!(classify_eigs(&[e(-1.0, 0.0), e(2.0, 0.0)]), StabilityClass::Saddle);
        assert_eq!(classify_eigs(&[e(0.0, 1.0), e(0.0, -1.0)]), StabilityClass::Nonhyperbolic);
        assert_eq!(classify_eigs(&[e(1e-12, 1.0), e(-1e-12, -1.0)]), StabilityClass::Nonhyperbolic);
    }
}
