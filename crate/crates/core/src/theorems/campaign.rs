//! Randomized agreement campaign: draw parameter sets away from every
//! threshold the clauses compare against, simulate all four systems, and
//! tally how clause predictions fare against the trajectories.
//!
//! Draws are rejection-sampled to be well conditioned (at least 5% relative
//! separation on each strictly compared pair, where defined) so that finite
//! horizons and finite tolerances cannot manufacture spurious violations;
//! clauses with undefined thresholds simply come out vacuous. Each draw has
//! its own deterministic RNG stream, so reports are reproducible and
//! independent of thread count.

use super::cross::{cross_validate, Agreement};
use super::{check_all, d_beta_no_c, growth, rho_guard};
use crate::equilibria::no_interior_bundles;
use crate::integrate::{integrate, IntegrationConfig};
use crate::params::Params;
use crate::state::{State, SystemId};
use crate::thresholds::{thresholds, Thresholds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const MAX_PARAM_ATTEMPTS: usize = 200;
const MAX_X0_ATTEMPTS: usize = 200;

/// Minimum relative separation for a strictly compared pair.
pub const CONDITION_MARGIN: f64 = 0.05;

/// Minimum relative clearance of the initial state from basin thresholds.
pub const X0_MARGIN: f64 = 0.10;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CampaignConfig {
    pub draws: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self { draws: 1000, seed: 17, rel_tol: 1e-7, abs_tol: 1e-9 }
    }
}

/// One clause of one draw.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CampaignRow {
    pub draw: u64,
    pub theorem: u8,
    pub clause: &'static str,
    pub hypothesis_holds: bool,
    pub agreement: Agreement,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignReport {
    pub rows: Vec<CampaignRow>,
    pub draws_attempted: u64,
    /// Draws that produced a well-conditioned sample and were evaluated.
    pub draws_used: u64,
    pub violations: usize,
    pub notes: Vec<String>,
}

pub fn run_campaign(cfg: &CampaignConfig) -> CampaignReport {
    let results: Vec<_> = (0..cfg.draws as u64)
        .into_par_iter()
        .map(|draw| run_draw(cfg, draw))
        .collect();

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut draws_used = 0u64;
    for (r, n, used) in results {
        rows.extend(r);
        notes.extend(n);
        draws_used += used as u64;
    }
    let violations = rows.iter().filter(|r| r.agreement == Agreement::Violated).count();
    CampaignReport {
        rows,
        draws_attempted: cfg.draws as u64,
        draws_used,
        violations,
        notes,
    }
}

fn run_draw(cfg: &CampaignConfig, draw: u64) -> (Vec<CampaignRow>, Vec<String>, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(draw);

    let mut picked = None;
    for _ in 0..MAX_PARAM_ATTEMPTS {
        let p = sample_params(&mut rng);
        if p.validate().is_ok() && well_conditioned(&p) {
            picked = Some(p);
            break;
        }
    }
    let Some(p) = picked else {
        return (
            Vec::new(),
            vec![format!(
                "draw {draw}: no well-conditioned parameter sample in {MAX_PARAM_ATTEMPTS} attempts"
            )],
            false,
        );
    };
    let th = thresholds(&p);
    let Some(x0) = sample_x0(&mut rng, &p, &th) else {
        return (
            Vec::new(),
            vec![format!(
                "draw {draw}: no initial state clear of basin thresholds in {MAX_X0_ATTEMPTS} attempts"
            )],
            false,
        );
    };

    let horizon = (10.0 / p.d_h.min(p.d_m)).clamp(200.0, 4000.0);
    let mut icfg = IntegrationConfig::to(horizon);
    icfg.rel_tol = cfg.rel_tol;
    icfg.abs_tol = cfg.abs_tol;
    icfg.record_stride = (horizon / 2000.0).max(1.0);
    // A draw that collapses into the unbounded-stiffness regime (bees gone,
    // mites not) should fail fast; its clauses come out undetermined.
    icfg.max_steps = 1_000_000;

    let inits: [(SystemId, Vec<f64>); 4] = [
        (SystemId::Full, x0.as_array().to_vec()),
        (SystemId::VirusFree, vec![x0.s_h, x0.s_m]),
        (SystemId::MiteFree, vec![x0.s_h, x0.i_h]),
        (SystemId::HealthyMiteFree, vec![x0.s_h, x0.i_h, x0.i_m]),
    ];
    let mut trajs = Vec::with_capacity(4);
    let mut notes = Vec::new();
    for (sys, y0) in inits {
        match integrate(sys, &y0, &p, &icfg) {
            Ok(t) => trajs.push(t),
            Err(e) => notes.push(format!("draw {draw}: {} integration failed: {e}", sys.label())),
        }
    }

    let verdicts = check_all(&p, None, &x0);
    let cvs = cross_validate(&verdicts, &trajs);
    let mut rows = Vec::with_capacity(cvs.len());
    for cv in cvs {
        // A nonexistence clause colliding with a verified root is surfaced
        // through notes so the summary is auditable without the full report.
        if cv.verdict.clause.contains("no-interior") && cv.agreement == Agreement::Undetermined {
            for n in &cv.notes {
                notes.push(format!("draw {draw}: {}: {n}", cv.verdict.clause));
            }
        }
        rows.push(CampaignRow {
            draw,
            theorem: cv.verdict.theorem,
            clause: cv.verdict.clause,
            hypothesis_holds: cv.verdict.hypothesis_holds,
            agreement: cv.agreement,
        });
    }
    (rows, notes, true)
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn sample_params<R: Rng>(rng: &mut R) -> Params {
    let sqrt_k = log_uniform(rng, 500.0, 5000.0);
    Params {
        r: log_uniform(rng, 500.0, 3000.0),
        k_hat: sqrt_k * sqrt_k,
        rho: rng.random_range(0.5..1.0),
        d_h: log_uniform(rng, 0.01, 0.3),
        d_m: log_uniform(rng, 0.02, 0.3),
        mu_h: log_uniform(rng, 0.001, 0.3),
        mu_m: log_uniform(rng, 0.001, 0.1),
        alpha: log_uniform(rng, 1e-4, 0.1),
        c: log_uniform(rng, 1e-3, 0.05),
        beta_h: log_uniform(rng, 0.01, 0.9),
        beta_mh_hat: log_uniform(rng, 1e-3, 0.2),
        beta_mh_tilde: log_uniform(rng, 1e-5, 0.01),
        beta_hm_hat: log_uniform(rng, 1e-3, 0.2),
    }
}

/// True when both sides are defined and closer than the margin: the draw
/// would put a strict comparison inside the noise floor, so reject it.
fn too_close(lhs: Option<f64>, rhs: Option<f64>) -> bool {
    match (lhs, rhs) {
        (Some(a), Some(b)) => {
            if a.is_nan() || b.is_nan() {
                return true;
            }
            if !a.is_finite() || !b.is_finite() {
                return false;
            }
            (a - b).abs() < CONDITION_MARGIN * a.abs().max(b.abs()).max(1e-12)
        }
        _ => false,
    }
}

/// Every strictly compared pair in the clause catalog, kept at least 5%
/// apart so finite-horizon evidence can be read unambiguously.
fn well_conditioned(p: &Params) -> bool {
    let th = thresholds(p);
    let g = growth(p);

    let t2c_ratio = th.s_h_star.map(|shs| {
        p.beta_h
            .min(p.c * p.beta_mh_hat + p.c * p.beta_mh_tilde + p.c * p.alpha * shs)
            / (p.d_h + p.mu_h).max(p.d_m + p.mu_m)
    });
    let t2d_ratio = match (th.n_star, th.nund_h_star, th.nbar_h_star) {
        (Some(ns), Some(nus), Some(nbs)) => Some(
            (p.beta_h + p.beta_hm_hat * ns / nus)
                .max(p.c * p.beta_mh_hat + p.c * p.beta_mh_tilde + p.c * p.alpha * nbs)
                / (p.d_h + p.mu_h).min(p.d_m + p.mu_m),
        ),
        _ => None,
    };
    let t6_ratio = th.nbar_h_star.map(|nbs| {
        p.beta_h
            .min(p.c * p.beta_mh_hat + p.c * p.beta_mh_tilde + p.c * p.alpha * nbs)
            / (p.d_h + p.mu_h).max(p.d_m + p.mu_m)
    });
    let endemic_guard = match (th.a, th.d_tilde) {
        (Some(a), Some(dt)) => Some(dt / (a + p.rho)),
        _ => None,
    };

    let pairs: Vec<(Option<f64>, Option<f64>)> = vec![
        (Some(g), Some(th.d)),
        (Some(g), Some(p.d_h)),
        (Some(g), rho_guard(p, &th)),
        (Some(g), th.d_beta),
        (Some(g), d_beta_no_c(p, &th)),
        (Some(g), endemic_guard),
        (th.n_star, Some(p.d_m / p.alpha)),
        (th.nbar_h_star, Some(p.d_m / (p.alpha * p.c))),
        (th.nbar_h_star, th.h_star),
        (th.nbar_h_c, th.h_star),
        (th.nbar_h_star, th.p_star),
        (th.h_star, Some(p.k_hat.sqrt())),
        (th.r0_v, Some(1.0)),
        (t2c_ratio, Some(1.0)),
        (t2d_ratio, Some(1.0)),
        (t6_ratio, Some(1.0)),
        (Some(p.r * p.c * p.alpha), Some(p.d_h * (p.d_m + p.mu_m))),
    ];
    if pairs.iter().any(|(a, b)| too_close(*a, *b)) {
        return false;
    }

    no_interior_bundles(p)
        .iter()
        .flat_map(|b| b.checks.iter())
        .all(|c| !too_close(Some(c.lhs), Some(c.rhs)))
}

/// Positive initial state whose basin-relevant aggregates are at least 10%
/// away from each defined threshold.
fn sample_x0<R: Rng>(rng: &mut R, p: &Params, th: &Thresholds) -> Option<State> {
    let scale = th.nbar_h_star.unwrap_or_else(|| p.k_hat.sqrt());
    // The persistence/extinction results are statements about the attracting
    // region {c*N_h + N_m <= N*}: outside it, transient mite pressure can
    // exceed the alpha*N* bound their floors are built from, and a crash on
    // the way in is not a counterexample. Spawn 10% inside whenever the
    // region exists.
    let budget = th.n_star.map(|n| 0.9 * n);
    let clear = |v: f64, t: Option<f64>| match t {
        Some(t) if t > 0.0 => (v - t).abs() >= X0_MARGIN * t,
        _ => true,
    };
    for _ in 0..MAX_X0_ATTEMPTS {
        let x0 = match budget {
            Some(b) => {
                let nh_cap = b / p.c;
                let s_h = log_uniform(rng, 10.0, (2.0 * scale).min(0.45 * nh_cap));
                let i_h = log_uniform(rng, 1.0, (0.3 * scale).min(0.13 * nh_cap));
                // Whatever weight the bees left is split between the mite
                // compartments, keeping the total strictly under the budget.
                let left = b - p.c * (s_h + i_h);
                let m_hi = 0.45 * left;
                let m_lo = (0.25 * m_hi).min(0.5);
                State::new(
                    s_h,
                    i_h,
                    log_uniform(rng, m_lo, m_hi),
                    log_uniform(rng, m_lo, m_hi),
                )
            }
            // No attracting region (growth below the slower death rate):
            // only extinction clauses can hold, and those claim all initial
            // states, so sample wide.
            None => State::new(
                log_uniform(rng, 10.0, 2.0 * scale),
                log_uniform(rng, 1.0, 0.3 * scale),
                log_uniform(rng, 0.5, 0.1 * scale),
                log_uniform(rng, 0.5, 0.1 * scale),
            ),
        };
        if clear(x0.weighted_total(p.c), th.n_c)
            && clear(x0.n_h(), th.nbar_h_c)
            && clear(x0.n_h(), th.nund_h_c)
            && clear(x0.s_h, th.s_h_c)
        {
            return Some(x0);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_campaign_is_deterministic_and_clean() {
        let cfg = CampaignConfig { draws: 6, seed: 3, ..Default::default() };
        let a = run_campaign(&cfg);
        let b = run_campaign(&cfg);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.draws_used > 0);
        assert!(!a.rows.is_empty());
        assert_eq!(a.violations, 0, "violated rows: {:#?}",
            a.rows.iter().filter(|r| r.agreement == Agreement::Violated).collect::<Vec<_>>());
    }

    #[test]
    fn rows_cover_every_draw_used() {
        let cfg = CampaignConfig { draws: 3, seed: 11, ..Default::default() };
        let rep = run_campaign(&cfg);
        let mut draws: Vec<u64> = rep.rows.iter().map(|r| r.draw).collect();
        draws.dedup();
        assert_eq!(draws.len() as u64, rep.draws_used);
    }

}
