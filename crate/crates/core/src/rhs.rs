use crate::params::Params;
use crate::state::{SysVec, SystemId};

/// Threshold under which a shared-population denominator is treated as zero.
///
/// Frequency-dependent infection terms contain I/(S+I), which the model only
/// defines by continuity (value 0) at S = I = 0. Trajectories graze that
/// corner, so the quotient gets an explicit branch instead of relying on
/// floating-point luck.
pub const EPS_DENOM: f64 = 1e-12;

#[inline]
fn guarded_div(num: f64, den: f64) -> f64 {
    if den <= EPS_DENOM {
        0.0
    } else {
        num / den
    }
}

/// Sigmoidal brood-survival birth term: r w^2 / (k_hat + w^2) where w is the
/// reproduction-weighted adult count S_h + rho I_h.
#[inline]
pub fn birth_rate(p: &Params, w: f64) -> f64 {
    p.r * w * w / (p.k_hat + w * w)
}

/// Derivative of [`birth_rate`] with respect to w: 2 r k_hat w / (k_hat + w^2)^2.
#[inline]
pub fn birth_slope(p: &Params, w: f64) -> f64 {
    let d = p.k_hat + w * w;
    2.0 * p.r * p.k_hat * w / (d * d)
}

/// Time derivative of `y` for the chosen system variant.
///
/// `y` is laid out per [`SystemId::compartments`]. Panics in debug builds if
/// the length is wrong; callers go through [`SystemId::project`] /
/// [`SysVec::from_slice`] which enforce it.
///
/// Restriction invariant: each reduced variant below is written by deleting
/// the terms of the full system that vanish identically on its invariant
/// subspace, keeping the surviving expression trees (operand order and
/// grouping) unchanged. Dropped terms are exact zeros of the form x*0 or
/// 0/n, and IEEE addition/subtraction of a zero term is exact, so the
/// reduced right-hand side equals the full right-hand side evaluated at the
/// embedded state, componentwise. Tests assert that equality; keep it when
/// editing.
pub fn rhs(sys: SystemId, p: &Params, y: &[f64]) -> SysVec {
    debug_assert_eq!(y.len(), sys.dim());
    let mut dy = SysVec::zeros(sys.dim());
    match sys {
        SystemId::Full => {
            let (s_h, i_h, s_m, i_m) = (y[0], y[1], y[2], y[3]);
            let n_h = s_h + i_h;
            let n_m = s_m + i_m;
            let frac_ih = guarded_div(i_h, n_h);
            let frac_im = guarded_div(i_m, n_h);
            let infect = p.beta_h * frac_ih + p.beta_mh_hat * frac_im + p.beta_mh_tilde * i_m;
            let ca = p.c * p.alpha;
            let b = birth_rate(p, s_h + p.rho * i_h);
            dy[0] = b - p.d_h * s_h - s_h * infect - p.alpha * s_h * n_m;
            dy[1] = s_h * infect - p.alpha * i_h * n_m - (p.d_h + p.mu_h) * i_h;
            dy[2] = s_m * (ca * s_h - p.beta_hm_hat * frac_ih - p.d_m);
            dy[3] = ca * (i_h * n_m + s_h * i_m) + p.beta_hm_hat * frac_ih * s_m
                - (p.d_m + p.mu_m) * i_m;
        }
        SystemId::VirusFree => {
            let (s_h, s_m) = (y[0], y[1]);
            let ca = p.c * p.alpha;
            let b = birth_rate(p, s_h);
            dy[0] = b - p.d_h * s_h - p.alpha * s_h * s_m;
            dy[1] = s_m * (ca * s_h - p.d_m);
        }
        SystemId::MiteFree => {
            let (s_h, i_h) = (y[0], y[1]);
            let n_h = s_h + i_h;
            let frac_ih = guarded_div(i_h, n_h);
            let infect = p.beta_h * frac_ih;
            let b = birth_rate(p, s_h + p.rho * i_h);
            dy[0] = b - p.d_h * s_h - s_h * infect;
            dy[1] = s_h * infect - (p.d_h + p.mu_h) * i_h;
        }
        SystemId::HealthyMiteFree => {
            let (s_h, i_h, i_m) = (y[0], y[1], y[2]);
            let n_h = s_h + i_h;
            let frac_ih = guarded_div(i_h, n_h);
            let frac_im = guarded_div(i_m, n_h);
            let infect = p.beta_h * frac_ih + p.beta_mh_hat * frac_im + p.beta_mh_tilde * i_m;
            let ca = p.c * p.alpha;
            let b = birth_rate(p, s_h + p.rho * i_h);
            dy[0] = b - p.d_h * s_h - s_h * infect - p.alpha * s_h * i_m;
            dy[1] = s_h * infect - p.alpha * i_h * i_m - (p.d_h + p.mu_h) * i_h;
            dy[2] = ca * (i_h * i_m + s_h * i_m) - (p.d_m + p.mu_m) * i_m;
        }
        SystemId::BeeOnly => {
            let s_h = y[0];
            let b = birth_rate(p, s_h);
            dy[0] = b - p.d_h * s_h;
        }
    }
    dy
}
