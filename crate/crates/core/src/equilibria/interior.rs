//! Interior-equilibrium solvers for the 3-D and 4-D systems, where no
//! closed form exists. Both reduce the equilibrium conditions to a single
//! scalar equation in one unknown, scan the admissible interval for sign
//! changes, refine each bracket, and reconstruct the remaining compartments.

use crate::params::Params;
use crate::rhs::birth_rate;
use crate::state::{SysVec, SystemId};
use crate::thresholds::thresholds;
use rayon::prelude::*;
use serde::Serialize;

use super::jacobian::{eigenvalues_of, jacobian, JacobianMode};
use super::{classify_eigs, residual_at, ClassifiedEquilibrium};

/// One evaluated inequality: `lhs relation rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityCheck {
    pub label: String,
    pub lhs: f64,
    pub relation: &'static str,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn lt(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { label: label.into(), lhs, relation: "<", rhs, holds: lhs < rhs }
    }

    fn gt(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { label: label.into(), lhs, relation: ">", rhs, holds: lhs > rhs }
    }
}

/// A conjunction of inequalities gating one no-interior branch.
#[derive(Clone, Debug, Serialize)]
pub struct BranchCondition {
    pub tag: &'static str,
    pub holds: bool,
    pub checks: Vec<InequalityCheck>,
}

impl BranchCondition {
    fn new(tag: &'static str, checks: Vec<InequalityCheck>) -> Self {
        let holds = checks.iter().all(|c| c.holds);
        Self { tag, holds, checks }
    }
}

/// Everything an interior solve produced, including the evidence trail:
/// scanned interval, sign-change brackets, refinement failures, and the
/// no-interior conditions that were evaluated alongside the scan.
#[derive(Clone, Debug, Serialize)]
pub struct InteriorSolveReport {
    pub sys: SystemId,
    /// Scan interval in the solve variable (I_h for the 3-D system, S_h
    /// for the 4-D one); None when a branch returned before scanning.
    pub admissible: Option<(f64, f64)>,
    /// Which branch produced the result: a no-interior or degenerate tag,
    /// "interior-roots-found", or "no-root-found". A no-root scan is not a
    /// nonexistence proof; the no-interior tags are.
    pub branch: String,
    pub conditions: Vec<BranchCondition>,
    pub roots: Vec<ClassifiedEquilibrium>,
    /// Sign-change brackets before refinement.
    pub brackets: Vec<(f64, f64)>,
    /// Per-bracket refinement/reconstruction problems; roots from other
    /// brackets are still returned.
    pub failures: Vec<String>,
    /// A no-interior condition held and the scan still found roots. This
    /// surfaces the discrepancy instead of suppressing either side.
    pub inconsistent: bool,
    pub samples_used: usize,
}

impl InteriorSolveReport {
    fn empty(sys: SystemId, branch: &str) -> Self {
        Self {
            sys,
            admissible: None,
            branch: branch.to_string(),
            conditions: Vec::new(),
            roots: Vec::new(),
            brackets: Vec::new(),
            failures: Vec::new(),
            inconsistent: false,
            samples_used: 0,
        }
    }
}

/// Margin carved out around poles, relative to interval length.
const POLE_MARGIN_REL: f64 = 1e-9;
const SCAN_INITIAL: usize = 4096;
const SCAN_CAP: usize = 1 << 20;
const REFINE_TOL_REL: f64 = 1e-10;

/// Bracket sign changes of `f` on the open interval (lo, hi), skipping
/// poles. Starts at 4096 samples and doubles until the bracket count is
/// unchanged twice in a row (capped at 2^20): the scanned functions can be
/// steep near poles, hiding crossings at coarse resolution. Sample
/// evaluation parallelizes; results merge in coordinate order, so the
/// outcome is deterministic.
fn scan_sign_changes<F>(f: &F, lo: f64, hi: f64, poles: &[f64]) -> (Vec<(f64, f64)>, usize)
where
    F: Fn(f64) -> f64 + Sync,
{
    let len = hi - lo;
    let margin = POLE_MARGIN_REL * len;
    let mut n = SCAN_INITIAL;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut samples_used = 0usize;
    let mut last_count = usize::MAX;
    let mut stable = 0u8;
    loop {
        let pts: Vec<f64> = (1..n)
            .map(|i| lo + len * (i as f64) / (n as f64))
            .filter(|x| poles.iter().all(|p| (x - p).abs() > margin))
            .collect();
        let vals: Vec<f64> = pts.par_iter().map(|&x| f(x)).collect();
        samples_used += pts.len();

        brackets.clear();
        for w in 0..pts.len().saturating_sub(1) {
            let (a, b) = (vals[w], vals[w + 1]);
            if !a.is_finite() || !b.is_finite() {
                continue;
            }
            // A pair straddling a pole flips sign without a root between.
            if poles.iter().any(|p| pts[w] < *p && *p < pts[w + 1]) {
                continue;
            }
            if a == 0.0 {
                brackets.push((pts[w], pts[w]));
            } else if a * b < 0.0 {
                brackets.push((pts[w], pts[w + 1]));
            }
        }

        if brackets.len() == last_count {
            stable += 1;
            if stable >= 2 {
                break;
            }
        } else {
            stable = 0;
            last_count = brackets.len();
        }
        if n >= SCAN_CAP {
            break;
        }
        n *= 2;
    }
    (brackets, samples_used)
}

/// Drive a bracket to a root by bisection (≤ 200 halvings), then polish
/// with a few secant steps. Succeeds only if |f| ≤ 1e-10·scale at the
/// result.
fn refine_root<F>(f: &F, bracket: (f64, f64), scale: f64) -> Result<f64, String>
where
    F: Fn(f64) -> f64,
{
    let tol_f = REFINE_TOL_REL * scale;
    let (mut a, mut b) = bracket;
    let mut fa = f(a);
    let fb = f(b);
    if a == b {
        return if fa.abs() <= tol_f {
            Ok(a)
        } else {
            Err(format!("degenerate bracket at {a:e} has residual {fa:e}"))
        };
    }
    if !fa.is_finite() || !fb.is_finite() {
        return Err("nonfinite value at a bracket endpoint".to_string());
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(format!("bracket ({a:e}, {b:e}) does not straddle a sign change"));
    }

    let (mut best_x, mut best_f) = (a, fa.abs());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(format!("nonfinite value at {mid:e} during bisection"));
        }
        if fm.abs() < best_f {
            best_x = mid;
            best_f = fm.abs();
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        if (b - a).abs() <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }

    // Secant polish from the best bisection point.
    let mut x0 = a;
    let mut x1 = b;
    let mut f0 = f(x0);
    let mut f1v = f(x1);
    for _ in 0..8 {
        let df = f1v - f0;
        if df == 0.0 || !df.is_finite() {
            break;
        }
        let x2 = x1 - f1v * (x1 - x0) / df;
        if !x2.is_finite() || x2 < bracket.0.min(bracket.1) || x2 > bracket.0.max(bracket.1) {
            break;
        }
        let f2v = f(x2);
        if !f2v.is_finite() {
            break;
        }
        if f2v.abs() < best_f {
            best_x = x2;
            best_f = f2v.abs();
        }
        x0 = x1;
        f0 = f1v;
        x1 = x2;
        f1v = f2v;
        if best_f <= tol_f {
            break;
        }
    }

    if best_f <= tol_f {
        Ok(best_x)
    } else {
        Err(format!(
            "refinement stalled at x = {best_x:e} with |f| = {best_f:e} (tolerance {tol_f:e})"
        ))
    }
}

fn dedup_sorted(mut xs: Vec<f64>, tol: f64) -> Vec<f64> {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        if out.last().is_none_or(|l| (x - l).abs() > tol) {
            out.push(x);
        }
    }
    out
}

/// Classify a reconstructed point with the finite-difference Jacobian and
/// push it onto the report, or record why it was rejected.
fn push_root(report: &mut InteriorSolveReport, p: &Params, point: &[f64]) {
    let sys = report.sys;
    let resid = residual_at(sys, p, point);
    if resid > 1e-9 * p.r.max(1.0) {
        report.failures.push(format!(
            "candidate at {point:?} rejected: residual {resid:.3e} exceeds gate"
        ));
        return;
    }
    match jacobian(sys, point, p, JacobianMode::Numeric) {
        Ok(j) => {
            let eigs = eigenvalues_of(&j);
            report.roots.push(ClassifiedEquilibrium {
                sys,
                location: SysVec::from_slice(point),
                class: classify_eigs(&eigs),
                eigenvalues: eigs,
                existence_condition: "interior-root".to_string(),
                residual: resid,
            });
        }
        Err(e) => report
            .failures
            .push(format!("jacobian failed at {point:?}: {e}")),
    }
}

/// Interior equilibria of the healthy-mite-free (S_h, I_h, I_m) system.
///
/// At an interior point the infected-mite balance pins the bee total to
/// P = (d_m + mu_m)/(c alpha). The total-population balance then gives
/// I_m = f1(I_h) and the infected-bee balance gives I_m = f2(I_h); interior
/// equilibria are crossings of f1 and f2 on (0, P). When peak recruitment
/// cannot offset losses at that pinned total (r·c·alpha < d_h(d_m + mu_m)),
/// no interior point exists and the solve returns without scanning.
pub fn interior_healthy_mite_free(p: &Params) -> InteriorSolveReport {
    let sys = SystemId::HealthyMiteFree;
    let ca = p.c * p.alpha;

    let low_recruitment = InequalityCheck::lt(
        "r c alpha vs d_h (d_m + mu_m)",
        p.r * ca,
        p.d_h * (p.d_m + p.mu_m),
    );
    let mut report = InteriorSolveReport::empty(sys, "");
    report
        .conditions
        .push(BranchCondition::new("no-interior-low-recruitment", vec![low_recruitment]));
    if report.conditions[0].holds {
        report.branch = "no-interior-low-recruitment".to_string();
        return report;
    }

    let pcap = match thresholds(p).p_star {
        Some(v) if v > 0.0 => v,
        _ => {
            report.branch = "degenerate-no-mite-turnover".to_string();
            return report;
        }
    };

    let q = p.beta_mh_hat / pcap + p.beta_mh_tilde;
    let f1 = |i_h: f64| {
        (birth_rate(p, pcap - (1.0 - p.rho) * i_h) - p.d_h * pcap - p.mu_h * i_h)
            / (p.alpha * pcap)
    };
    let f2 = |i_h: f64| {
        i_h * ((pcap - i_h) * p.beta_h / pcap - (p.d_h + p.mu_h))
            / ((p.alpha + q) * i_h - pcap * q)
    };
    let func = |i_h: f64| f1(i_h) - f2(i_h);
    let pole = pcap * q / (p.alpha + q);

    let (brackets, samples) = scan_sign_changes(&func, 0.0, pcap, &[pole]);
    report.admissible = Some((0.0, pcap));
    report.samples_used = samples;
    report.brackets = brackets.clone();

    let mut found = Vec::new();
    for bracket in brackets {
        let scale = 1.0_f64.max(f1(0.5 * (bracket.0 + bracket.1)).abs());
        match refine_root(&func, bracket, scale) {
            Ok(i_h) => found.push(i_h),
            Err(e) => report
                .failures
                .push(format!("bracket ({:e}, {:e}): {e}", bracket.0, bracket.1)),
        }
    }
    for i_h in dedup_sorted(found, 1e-8 * pcap) {
        let s_h = pcap - i_h;
        let i_m = f1(i_h);
        if s_h <= 0.0 || i_h <= 0.0 || i_m <= 0.0 {
            continue;
        }
        push_root(&mut report, p, &[s_h, i_h, i_m]);
    }
    report.branch = if report.roots.is_empty() {
        "no-root-found".to_string()
    } else {
        "interior-roots-found".to_string()
    };
    report
}

/// The four no-interior parameter bundles for the full system, each a
/// conjunction of inequalities; any one of them holding rules out an
/// interior equilibrium. Evaluated verbatim as stated (the accompanying
/// proof carries extra guard conjuncts the statement drops, so
/// `interior_full` always cross-checks by scanning and flags disagreement
/// instead of trusting these unconditionally).
pub fn no_interior_bundles(p: &Params) -> Vec<BranchCondition> {
    let ca = p.c * p.alpha;
    let dmb = p.d_m + p.beta_hm_hat;
    let dhm = p.d_h + p.mu_h;
    let ratio_v = p.beta_h / dhm;
    let ratio_m = p.beta_hm_hat / dmb;
    // Shared denominator: alpha mu_m bhm/dmb + c alpha bmh - btm bhm.
    let denom = p.alpha * p.mu_m * p.beta_hm_hat / dmb + ca * p.beta_mh_hat
        - p.beta_mh_tilde * p.beta_hm_hat;
    let guard_lhs = p.alpha * p.mu_m * p.beta_hm_hat / dmb;
    let guard_rhs = p.beta_mh_tilde * p.beta_hm_hat - ca;
    let mid = (ratio_v - ratio_m) / (p.beta_h * dmb * dhm);

    vec![
        BranchCondition::new(
            "no-interior-1",
            vec![
                InequalityCheck::gt("bee transmission ratio vs mite uptake ratio", ratio_v, ratio_m),
                InequalityCheck::gt(
                    "mite-to-bee rate over mixed-rate balance vs scaled mite turnover",
                    p.beta_mh_hat / denom,
                    (p.d_m + p.mu_m) / (ca * (dmb + p.mu_m)),
                ),
            ],
        ),
        BranchCondition::new(
            "no-interior-2",
            vec![
                InequalityCheck::gt("mite-loss coupling vs free-transmission excess", guard_lhs, guard_rhs),
                InequalityCheck::gt("normalized transmission gap vs zero", mid, 0.0),
                InequalityCheck::lt("normalized transmission gap vs d_m", mid, p.d_m),
            ],
        ),
        BranchCondition::new(
            "no-interior-3",
            vec![
                InequalityCheck::lt("bee transmission ratio vs mite uptake ratio", ratio_v, ratio_m),
                InequalityCheck::gt("scaled rate balance vs zero", p.beta_mh_hat * dmb / denom, 0.0),
                InequalityCheck::lt(
                    "scaled rate balance vs mite break-even level",
                    p.beta_mh_hat * dmb / denom,
                    p.d_m / ca,
                ),
            ],
        ),
        BranchCondition::new(
            "no-interior-4",
            vec![
                InequalityCheck::lt("mite-loss coupling vs free-transmission excess", guard_lhs, guard_rhs),
                InequalityCheck::gt(
                    "normalized transmission gap vs scaled mite turnover",
                    mid,
                    (p.d_m + p.mu_m) * dmb / (dmb + p.mu_m),
                ),
            ],
        ),
    ]
}

/// Interior equilibria of the full 4-D system.
///
/// The healthy-mite balance expresses N_h as g1(S_h); the bee total
/// balance gives N_m = g2(S_h); the mite total balance gives the infected
/// fraction I_m/N_m = g3(S_h) ∈ (0,1); and the infected-bee balance gives
/// an independent N_m = g4(S_h). Interior equilibria are the g2 = g4
/// crossings on the S_h interval where g1 > 0 and 0 < g3 < 1, with every
/// reconstructed compartment strictly positive.
///
/// The no-interior bundles are evaluated regardless, the scan runs even
/// when one holds, and `inconsistent` is raised if they disagree.
pub fn interior_full(p: &Params) -> InteriorSolveReport {
    let sys = SystemId::Full;
    let ca = p.c * p.alpha;
    let mut report = InteriorSolveReport::empty(sys, "");
    report.conditions = no_interior_bundles(p);

    // Structural degeneracies where the g-function reduction divides by
    // zero; each makes a strictly positive 4-D equilibrium impossible.
    if ca == 0.0 {
        report.branch = "degenerate-no-mite-reproduction".to_string();
        return report;
    }
    if p.mu_m == 0.0 {
        report.branch = "degenerate-zero-infected-mite-loss".to_string();
        return report;
    }
    if p.beta_hm_hat == 0.0 {
        report.branch = "degenerate-no-bee-to-mite-transmission".to_string();
        return report;
    }

    let dmb = p.d_m + p.beta_hm_hat;
    let lo = p.d_m / ca;
    let hi = dmb * (p.d_m + p.mu_m) / (ca * (dmb + p.mu_m));

    let dd = |s: f64| dmb - ca * s;
    let g1 = |s: f64| p.beta_hm_hat * s / dd(s);
    let g2 = |s: f64| {
        let n_h = g1(s);
        let i_h = n_h - s;
        (birth_rate(p, s + p.rho * i_h) - p.d_h * n_h - p.mu_h * i_h) / (p.alpha * n_h)
    };
    let g3 = |s: f64| (ca * s - p.d_m) * dmb / (p.mu_m * dd(s));
    let k1 = p.alpha * p.mu_m * p.beta_hm_hat + ca * p.beta_mh_hat * dmb
        - p.beta_mh_tilde * p.beta_hm_hat * dmb;
    let k2 = p.beta_mh_hat * dmb * dmb;
    let g4 = |s: f64| {
        p.mu_m * s
            * (p.beta_h * dmb - p.beta_hm_hat * (p.d_h + p.mu_h) - ca * p.beta_h * s)
            / (k1 * s - k2)
    };
    let func = |s: f64| g2(s) - g4(s);

    let mut poles = Vec::new();
    if k1 != 0.0 {
        poles.push(k2 / k1);
    }

    let (brackets, samples) = scan_sign_changes(&func, lo, hi, &poles);
    report.admissible = Some((lo, hi));
    report.samples_used = samples;
    report.brackets = brackets.clone();

    let mut found = Vec::new();
    for bracket in brackets {
        let scale = 1.0_f64.max(g2(0.5 * (bracket.0 + bracket.1)).abs());
        match refine_root(&func, bracket, scale) {
            Ok(s) => found.push(s),
            Err(e) => report
                .failures
                .push(format!("bracket ({:e}, {:e}): {e}", bracket.0, bracket.1)),
        }
    }
    for s_h in dedup_sorted(found, 1e-8 * hi) {
        let n_h = g1(s_h);
        let i_h = n_h - s_h;
        let n_m = g2(s_h);
        let i_m = g3(s_h) * n_m;
        let s_m = n_m - i_m;
        if s_h <= 0.0 || i_h <= 0.0 || s_m <= 0.0 || i_m <= 0.0 {
            continue;
        }
        push_root(&mut report, p, &[s_h, i_h, s_m, i_m]);
    }

    let holding = report.conditions.iter().find(|b| b.holds).map(|b| b.tag);
    report.inconsistent = holding.is_some() && !report.roots.is_empty();
    report.branch = match holding {
        Some(tag) => tag.to_string(),
        None if report.roots.is_empty() => "no-root-found".to_string(),
        None => "interior-roots-found".to_string(),
    };
    report
}
