use crate::params::Params;
use serde::Serialize;

/// The two roots of r w/(k_hat + w^2) = x scaled by y: solutions of
/// w^2 - (r/x) w + k_hat/y = 0. Returns (lower, upper); both `None` when the
/// discriminant is negative (growth too weak to reach the level x), both
/// equal to the vertex when it is exactly zero.
pub fn f_pair(r: f64, k_hat: f64, x: f64, y: f64) -> (Option<f64>, Option<f64>) {
    if x <= 0.0 || y <= 0.0 {
        return (None, None);
    }
    let q = r / x;
    let disc = q * q - 4.0 * k_hat / y;
    if disc < 0.0 {
        (None, None)
    } else if disc == 0.0 {
        (Some(q / 2.0), Some(q / 2.0))
    } else {
        let s = disc.sqrt();
        (Some((q - s) / 2.0), Some((q + s) / 2.0))
    }
}

/// Every closed-form constant of the threshold ladder. Values whose defining
/// discriminant is negative, or whose defining quotient is singular, are
/// `None` rather than NaN so that downstream predicates can reason about
/// them ("undefined" is a first-class answer, not an error).
///
/// Naming: `*_c` is the lower (critical / Allee) root, `*_star` the upper
/// (asymptotic) root of the same quadratic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    /// min(d_h, d_m), the decay rate governing the weighted total c N_h + N_m.
    pub d: f64,
    /// Critical weighted total below which everything can die out.
    pub n_c: Option<f64>,
    /// Asymptotic bound on the weighted total c N_h + N_m.
    pub n_star: Option<f64>,
    /// Bee-population Allee threshold (lower root at level d_h).
    pub nbar_h_c: Option<f64>,
    /// Bee-population carrying level (upper root at level d_h).
    pub nbar_h_star: Option<f64>,
    /// Persistence threshold under full infection + parasitism pressure.
    pub nund_h_c: Option<f64>,
    /// Persistence floor for the bee total under that pressure.
    pub nund_h_star: Option<f64>,
    /// Healthy-bee Allee threshold under the aggregate loss rate D_beta.
    pub s_h_c: Option<f64>,
    /// Healthy-bee persistence floor.
    pub s_h_star: Option<f64>,
    /// Aggregate healthy-bee loss rate used for s_h_c / s_h_star.
    pub d_beta: Option<f64>,
    /// Bee level at which the mite population breaks even: d_m/(alpha c).
    pub h_star: Option<f64>,
    /// Mite level of the bee–mite interior equilibrium.
    pub m_star: Option<f64>,
    /// Basic reproduction number of the virus: beta_h/(d_h + mu_h).
    pub r0_v: Option<f64>,
    /// Basic reproduction number of mites: nbar_h_star / h_star.
    pub r0_m: Option<f64>,
    /// Slope of the infected-bee ray S_h = a I_h; defined only when r0_v > 1.
    pub a: Option<f64>,
    /// Effective loss rate (a+1) d_h + mu_h on that ray.
    pub d_tilde: Option<f64>,
    /// Bee total at which infected mites break even: (d_m + mu_m)/(c alpha).
    pub p_star: Option<f64>,
}

fn div(num: f64, den: f64) -> Option<f64> {
    if den > 0.0 && num.is_finite() {
        let v = num / den;
        v.is_finite().then_some(v)
    } else {
        None
    }
}

/// Compute the full threshold ladder from working parameters.
pub fn thresholds(p: &Params) -> Thresholds {
    let d = p.d_h.min(p.d_m);

    let (fb_lo_d, fb_hi_d) = f_pair(p.r, p.k_hat, d, 1.0);
    let n_c = fb_lo_d.map(|v| p.c * v);
    let n_star = fb_hi_d.map(|v| p.c * v);

    let (nbar_h_c, nbar_h_star) = f_pair(p.r, p.k_hat, p.d_h, 1.0);

    let (nund_h_c, nund_h_star) = match n_star {
        Some(ns) => f_pair(
            p.r,
            p.k_hat,
            p.d_h + p.mu_h + p.alpha * ns,
            p.rho * p.rho,
        ),
        None => (None, None),
    };

    // Aggregate loss rate on healthy bees: baseline death, bee-to-bee
    // infection, mite-borne infection at the worst-case mite load, and
    // parasitism, each bounded by the asymptotic population sizes.
    let d_beta = match (n_star, nund_h_star) {
        (Some(ns), Some(nus)) => Some(
            p.d_h
                + p.beta_h
                + p.beta_mh_hat * ns / nus
                + (p.beta_mh_tilde + p.alpha) * (ns - p.c * nus),
        ),
        _ => None,
    };
    let (s_h_c, s_h_star) = match d_beta {
        Some(db) => f_pair(p.r, p.k_hat, db, 1.0),
        None => (None, None),
    };

    let h_star = div(p.d_m, p.alpha * p.c);
    let m_star = h_star.and_then(|h| {
        let g = p.r * h / (p.k_hat + h * h) - p.d_h;
        div(g, p.alpha)
    });

    let r0_v = div(p.beta_h, p.d_h + p.mu_h);
    let r0_m = match (nbar_h_star, h_star) {
        (Some(n), Some(h)) => div(n, h),
        _ => None,
    };

    let a = r0_v.and_then(|r0| (r0 > 1.0).then(|| 1.0 / (r0 - 1.0)));
    let d_tilde = a.map(|a| (a + 1.0) * p.d_h + p.mu_h);

    let p_star = div(p.d_m + p.mu_m, p.c * p.alpha);

    Thresholds {
        d,
        n_c,
        n_star,
        nbar_h_c,
        nbar_h_star,
        nund_h_c,
        nund_h_star,
        s_h_c,
        s_h_star,
        d_beta,
        h_star,
        m_star,
        r0_v,
        r0_m,
        a,
        d_tilde,
        p_star,
    }
}

impl Thresholds {
    /// Named (label, value) pairs for reporting; order is stable.
    pub fn entries(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("d", Some(self.d)),
            ("N_c", self.n_c),
            ("N_star", self.n_star),
            ("Nbar_h_c", self.nbar_h_c),
            ("Nbar_h_star", self.nbar_h_star),
            ("Nund_h_c", self.nund_h_c),
            ("Nund_h_star", self.nund_h_star),
            ("S_h_c", self.s_h_c),
            ("S_h_star", self.s_h_star),
            ("D_beta", self.d_beta),
            ("H_star", self.h_star),
            ("M_star", self.m_star),
            ("R0_V", self.r0_v),
            ("R0_M", self.r0_m),
            ("a", self.a),
            ("d_tilde", self.d_tilde),
            ("P_star", self.p_star),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_pair_double_root() {
        // r = 2, k_hat = 1, x = 1, y = 1: disc = 4 - 4 = 0, both roots 1.
        let (lo, hi) = f_pair(2.0, 1.0, 1.0, 1.0);
        assert_eq!(lo, Some(1.0));
        assert_eq!(hi, Some(1.0));
    }

    #[test]
    fn f_pair_negative_discriminant() {
        assert_eq!(f_pair(1.0, 100.0, 1.0, 1.0), (None, None));
    }

    #[test]
    fn f_pair_roots_satisfy_quadratic() {
        let (r, k_hat, x, y) = (1500.0, 1.0e6, 0.15, 0.81);
        let (lo, hi) = f_pair(r, k_hat, x, y);
        for w in [lo.unwrap(), hi.unwrap()] {
            let resid = w * w - (r / x) * w + k_hat / y;
            assert!(resid.abs() <= 1e-9 * (k_hat / y), "w={w}: {resid}");
        }
    }
}
