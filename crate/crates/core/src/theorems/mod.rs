//! Mechanical evaluation of the analytic persistence/extinction results:
//! each clause's hypothesis is checked numerically against parameters and
//! initial conditions, and its predicted conclusion is emitted as a
//! structured verdict. Verdicts never look at trajectories; comparing
//! predictions with simulation lives in `cross`.

pub mod campaign;
pub mod cross;

pub use campaign::{run_campaign, CampaignConfig, CampaignReport, CampaignRow};
pub use cross::{cross_validate, Agreement, CrossValidation};

use crate::params::{Params, ParamsRaw};
use crate::state::{State, SystemId};
use crate::thresholds::{thresholds, Thresholds};
use serde::Serialize;

/// Outcome of evaluating one clause hypothesis.
///
/// `Boundary` marks a strict inequality sitting inside the guard band
/// (neither true nor false at working precision); `Vacuous` marks a clause
/// whose thresholds are undefined for these parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HypothesisStatus {
    Holds,
    Boundary,
    Fails,
    Vacuous,
}

impl HypothesisStatus {
    fn rank(self) -> u8 {
        match self {
            HypothesisStatus::Holds => 0,
            HypothesisStatus::Boundary => 1,
            HypothesisStatus::Fails => 2,
            HypothesisStatus::Vacuous => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HypothesisStatus::Holds => "holds",
            HypothesisStatus::Boundary => "boundary",
            HypothesisStatus::Fails => "fails",
            HypothesisStatus::Vacuous => "vacuous",
        }
    }

    fn combine(statuses: impl IntoIterator<Item = HypothesisStatus>) -> HypothesisStatus {
        statuses
            .into_iter()
            .max_by_key(|s| s.rank())
            .unwrap_or(HypothesisStatus::Holds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Lt,
    Gt,
    Le,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Gt => ">",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

/// Relative guard band around strict inequalities.
pub const STRICT_BAND_REL: f64 = 1e-9;

/// One inequality of a clause hypothesis with both sides evaluated.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionEval {
    pub label: String,
    pub lhs: Option<f64>,
    pub relation: Relation,
    pub rhs: Option<f64>,
    pub status: HypothesisStatus,
}

fn cond(label: impl Into<String>, lhs: Option<f64>, relation: Relation, rhs: Option<f64>) -> ConditionEval {
    let status = match (lhs, rhs) {
        (Some(a), Some(b)) if a.is_nan() || b.is_nan() => HypothesisStatus::Vacuous,
        (Some(a), Some(b)) => {
            let holds = match relation {
                Relation::Lt => a < b,
                Relation::Gt => a > b,
                Relation::Le => a <= b,
                Relation::Ge => a >= b,
            };
            let strict = matches!(relation, Relation::Lt | Relation::Gt);
            let band = STRICT_BAND_REL * 1.0_f64.max(a.abs()).max(b.abs());
            if strict && a.is_finite() && b.is_finite() && (a - b).abs() <= band {
                HypothesisStatus::Boundary
            } else if holds {
                HypothesisStatus::Holds
            } else {
                HypothesisStatus::Fails
            }
        }
        _ => HypothesisStatus::Vacuous,
    };
    ConditionEval { label: label.into(), lhs, relation, rhs, status }
}

/// What a clause predicts when its hypothesis holds. Tags are structural;
/// the cross-validator maps each to a trajectory or equilibrium predicate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Conclusion {
    /// c N_h + N_m eventually enters [0, N*].
    BoundedAttractor,
    /// limsup N_h <= barN_h*.
    BeeTotalBound,
    /// liminf N_h >= underlineN_h*.
    BeePersistence,
    /// liminf S_h >= S_h*.
    HealthyBeePersistence,
    /// Everything dies from every initial condition.
    GlobalExtinction,
    /// Everything dies from this initial condition.
    LocalExtinction,
    /// N_m -> 0.
    MiteExtinction,
    /// N_h persists while S_m -> 0.
    BeesPersistHealthyMitesDie,
    /// The composite disease load c I_h + I_m persists.
    DiseasePersistence,
    /// I_h -> 0 and I_m -> 0.
    DiseaseExtinction,
    /// Bee-mite system dies out for almost all initial conditions.
    ExtinctionAlmostAll,
    /// Bee-virus system dies out for every initial condition.
    ExtinctionAllInitial,
    /// Almost every orbit settles on one of these points.
    ConvergesToOneOf { targets: Vec<(f64, f64)> },
    /// The bee-mite system has exactly one interior equilibrium.
    UniqueInteriorVirusFree,
    /// Interior class follows the sign of H* - sqrt(k_hat).
    InteriorStabilityVirusFree,
    /// limsup I_m = 0; dynamics reduce to the mite-free system.
    InfectedMiteExtinction,
    /// Interior equilibria are exactly the f1 = f2 crossings with the bee
    /// total pinned to (d_m + mu_m)/(c alpha).
    InteriorCharacterizationHealthyMiteFree,
    NoInteriorHealthyMiteFree,
    /// I_h and I_m persist (virus endures through the mite route).
    VirusMitePersistence,
    /// I_h, S_m, I_m all -> 0; dynamics reduce to the bee-only system.
    ReducesToBeeOnly,
    NoInteriorFull,
    /// N_m = S_m + I_m persists.
    MitePersistence,
}

impl Conclusion {
    pub fn label(&self) -> &'static str {
        match self {
            Conclusion::BoundedAttractor => "bounded-attractor",
            Conclusion::BeeTotalBound => "bee-total-bound",
            Conclusion::BeePersistence => "bee-persistence",
            Conclusion::HealthyBeePersistence => "healthy-bee-persistence",
            Conclusion::GlobalExtinction => "global-extinction",
            Conclusion::LocalExtinction => "local-extinction",
            Conclusion::MiteExtinction => "mite-extinction",
            Conclusion::BeesPersistHealthyMitesDie => "bees-persist-healthy-mites-die",
            Conclusion::DiseasePersistence => "disease-persistence",
            Conclusion::DiseaseExtinction => "disease-extinction",
            Conclusion::ExtinctionAlmostAll => "extinction-almost-all",
            Conclusion::ExtinctionAllInitial => "extinction-all-initial",
            Conclusion::ConvergesToOneOf { .. } => "converges-to-one-of",
            Conclusion::UniqueInteriorVirusFree => "unique-interior-virus-free",
            Conclusion::InteriorStabilityVirusFree => "interior-stability-virus-free",
            Conclusion::InfectedMiteExtinction => "infected-mite-extinction",
            Conclusion::InteriorCharacterizationHealthyMiteFree => {
                "interior-characterization-healthy-mite-free"
            }
            Conclusion::NoInteriorHealthyMiteFree => "no-interior-healthy-mite-free",
            Conclusion::VirusMitePersistence => "virus-mite-persistence",
            Conclusion::ReducesToBeeOnly => "reduces-to-bee-only",
            Conclusion::NoInteriorFull => "no-interior-full",
            Conclusion::MitePersistence => "mite-persistence",
        }
    }
}

/// One clause of one theorem: its evaluated hypothesis and its prediction.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremVerdict {
    pub theorem: u8,
    pub clause: &'static str,
    pub conditions: Vec<ConditionEval>,
    pub hypothesis: HypothesisStatus,
    /// True exactly when `hypothesis` is `Holds`.
    pub hypothesis_holds: bool,
    pub predicted_conclusion: Conclusion,
    pub notes: Vec<String>,
}

fn verdict(
    theorem: u8,
    clause: &'static str,
    conditions: Vec<ConditionEval>,
    predicted_conclusion: Conclusion,
    notes: Vec<String>,
) -> TheoremVerdict {
    let hypothesis = HypothesisStatus::combine(conditions.iter().map(|c| c.status));
    TheoremVerdict {
        theorem,
        clause,
        conditions,
        hypothesis,
        hypothesis_holds: hypothesis == HypothesisStatus::Holds,
        predicted_conclusion,
        notes,
    }
}

/// Which system each theorem's conclusions speak about.
pub fn theorem_system(theorem: u8) -> SystemId {
    match theorem {
        3 => SystemId::VirusFree,
        4 => SystemId::MiteFree,
        5 => SystemId::HealthyMiteFree,
        _ => SystemId::Full,
    }
}

/// Peak per-capita recruitment r/(2 sqrt(k_hat)).
fn growth(p: &Params) -> f64 {
    p.r / (2.0 * p.k_hat.sqrt())
}

/// (d_h + mu_h + alpha N*)/rho, the brood-weighted persistence guard.
fn rho_guard(p: &Params, th: &Thresholds) -> Option<f64> {
    th.n_star.map(|ns| (p.d_h + p.mu_h + p.alpha * ns) / p.rho)
}

/// Healthy-bee loss bound without the conversion factor on underlineN_h*
/// (the disease-persistence clauses print it this way; the persistence
/// clause in the basics theorem carries the factor c).
fn d_beta_no_c(p: &Params, th: &Thresholds) -> Option<f64> {
    let (ns, nus) = (th.n_star?, th.nund_h_star?);
    Some(
        p.d_h
            + p.beta_h
            + p.beta_mh_hat * ns / nus
            + (p.beta_mh_tilde + p.alpha) * (ns - nus),
    )
}

fn min2(a: f64, b: f64) -> f64 {
    a.min(b)
}

fn max2(a: f64, b: f64) -> f64 {
    a.max(b)
}

/// Basic dynamical properties of the full system: boundedness, bee
/// persistence, healthy-bee persistence, and extinction clauses. `raw`
/// enables the adult-fraction reformulation of the persistence condition,
/// which is stated in pre-rescaling parameters; pass the raw set the
/// derived parameters came from, or None to mark that clause vacuous.
pub fn check_theorem1(p: &Params, raw: Option<&ParamsRaw>, x0: &State) -> Vec<TheoremVerdict> {
    let th = thresholds(p);
    let g = growth(p);
    let guard = rho_guard(p, &th);
    let mut out = Vec::new();

    out.push(verdict(
        1,
        "1a-attractor-bound",
        vec![cond(
            "peak per-capita growth vs min death rate",
            Some(g),
            Relation::Gt,
            Some(th.d),
        )],
        Conclusion::BoundedAttractor,
        vec![],
    ));

    out.push(verdict(
        1,
        "1b-bee-total-bound",
        vec![cond("peak per-capita growth vs d_h", Some(g), Relation::Gt, Some(p.d_h))],
        Conclusion::BeeTotalBound,
        vec![],
    ));

    out.push(verdict(
        1,
        "1c-bee-persistence",
        vec![
            cond("peak per-capita growth vs brood-weighted guard", Some(g), Relation::Gt, guard),
            cond("initial bee total vs lower threshold", Some(x0.n_h()), Relation::Gt, th.nund_h_c),
        ],
        Conclusion::BeePersistence,
        vec![],
    ));

    out.push(verdict(
        1,
        "1d-healthy-bee-persistence",
        vec![
            cond("peak per-capita growth vs infection-loaded bound", Some(g), Relation::Gt, th.d_beta),
            cond("peak per-capita growth vs brood-weighted guard", Some(g), Relation::Gt, guard),
            cond("initial bee total vs initial healthy bees", Some(x0.n_h()), Relation::Ge, Some(x0.s_h)),
            cond("initial healthy bees vs healthy-bee threshold", Some(x0.s_h), Relation::Gt, th.s_h_c),
        ],
        Conclusion::HealthyBeePersistence,
        vec![],
    ));

    out.push(verdict(
        1,
        "1e-global-extinction",
        vec![cond("d_h vs peak per-capita growth", Some(p.d_h), Relation::Gt, Some(g))],
        Conclusion::GlobalExtinction,
        vec![],
    ));

    out.push(verdict(
        1,
        "1f-local-extinction-total",
        vec![cond(
            "initial weighted total vs lower attractor threshold",
            Some(x0.weighted_total(p.c)),
            Relation::Lt,
            th.n_c,
        )],
        Conclusion::LocalExtinction,
        vec![],
    ));

    out.push(verdict(
        1,
        "1f-local-extinction-bees",
        vec![cond(
            "initial bee total vs bee threshold",
            Some(x0.n_h()),
            Relation::Lt,
            th.nbar_h_c,
        )],
        Conclusion::LocalExtinction,
        vec![],
    ));

    // Adult-fraction reformulation of the 1c growth condition, stated in
    // raw parameters. Implemented exactly as printed (its right side
    // replaces N* by r/(2d)); the note text treats it as equivalent.
    let mut notes = vec![
        "raw-parameter reformulation of the bee-persistence growth condition, as printed"
            .to_string(),
    ];
    let (lhs, rhs) = match raw {
        Some(rw) => {
            let disc = (rw.r / th.d).powi(2) - 4.0 * rw.k / (rw.xi_h * rw.xi_h);
            let lhs = rw.r * rw.xi_h / (2.0 * rw.k.sqrt())
                - p.alpha * disc.sqrt() / (2.0 * p.rho);
            let rhs = (p.d_h + p.mu_h + p.alpha * rw.r / (2.0 * th.d)) / p.rho;
            (Some(lhs), Some(rhs))
        }
        None => {
            notes.push("raw parameters not supplied; clause not evaluable".to_string());
            (None, None)
        }
    };
    out.push(verdict(
        1,
        "1g-adult-fraction-persistence",
        vec![
            cond("adult-fraction growth margin vs brood-weighted guard", lhs, Relation::Gt, rhs),
            cond("initial bee total vs lower threshold", Some(x0.n_h()), Relation::Gt, th.nund_h_c),
        ],
        Conclusion::BeePersistence,
        notes,
    ));

    out
}

/// Persistence/extinction of disease or mites in the full system.
pub fn check_theorem2(p: &Params, x0: &State) -> Vec<TheoremVerdict> {
    let th = thresholds(p);
    let g = growth(p);
    let mut out = Vec::new();

    out.push(verdict(
        2,
        "2a-mite-extinction",
        vec![cond(
            "weighted carrying level vs mite break-even per attack",
            th.n_star,
            Relation::Lt,
            Some(p.d_m / p.alpha),
        )],
        Conclusion::MiteExtinction,
        vec![],
    ));

    out.push(verdict(
        2,
        "2b-healthy-mite-extinction",
        vec![
            cond("peak per-capita growth vs d_h", Some(g), Relation::Gt, Some(p.d_h)),
            cond(
                "bee carrying level vs healthy-mite break-even",
                th.nbar_h_star,
                Relation::Lt,
                Some(p.d_m / (p.alpha * p.c)),
            ),
            cond("initial healthy bees vs healthy-bee threshold", Some(x0.s_h), Relation::Gt, th.s_h_c),
        ],
        Conclusion::BeesPersistHealthyMitesDie,
        vec![],
    ));

    let t2c_ratio = th.s_h_star.map(|shs| {
        min2(
            p.beta_h,
            p.c * p.beta_mh_hat + p.c * p.beta_mh_tilde + p.c * p.alpha * shs,
        ) / max2(p.d_h + p.mu_h, p.d_m + p.mu_m)
    });
    out.push(verdict(
        2,
        "2c-disease-persistence",
        vec![
            cond(
                "peak per-capita growth vs infection-loaded bound (unconverted)",
                Some(g),
                Relation::Gt,
                d_beta_no_c(p, &th),
            ),
            cond("initial healthy bees vs healthy-bee threshold", Some(x0.s_h), Relation::Gt, th.s_h_c),
            cond("disease gain-to-loss ratio vs one", t2c_ratio, Relation::Ge, Some(1.0)),
        ],
        Conclusion::DiseasePersistence,
        vec!["gain ratio uses the healthy-bee persistence floor".to_string()],
    ));

    let t2d_ratio = match (th.n_star, th.nund_h_star, th.nbar_h_star) {
        (Some(ns), Some(nus), Some(nbs)) => Some(
            max2(
                p.beta_h + p.beta_hm_hat * ns / nus,
                p.c * p.beta_mh_hat + p.c * p.beta_mh_tilde + p.c * p.alpha * nbs,
            ) / min2(p.d_h + p.mu_h, p.d_m + p.mu_m),
        ),
        _ => None,
    };
    out.push(verdict(
        2,
        "2d-disease-extinction",
        vec![
            cond(
                "peak per-capita growth vs brood-weighted guard",
                Some(g),
                Relation::Gt,
                rho_guard(p, &th),
            ),
            cond("initial bee total vs lower threshold", Some(x0.n_h()), Relation::Gt, th.nund_h_c),
            cond("disease loss-to-gain ratio vs one", t2d_ratio, Relation::Lt, Some(1.0)),
        ],
        Conclusion::DiseaseExtinction,
        vec![],
    ));

    out
}

/// Global dynamics of the bee-mite subsystem (no initial-condition inputs:
/// every clause is a statement about almost all or structurally about the
/// equilibrium set).
pub fn check_theorem3_virus_free(p: &Params) -> Vec<TheoremVerdict> {
    let th = thresholds(p);
    let g = growth(p);
    let mut out = Vec::new();

    out.push(verdict(
        3,
        "3a-extinction-no-growth",
        vec![cond("peak per-capita growth vs d_h", Some(g), Relation::Lt, Some(p.d_h))],
        Conclusion::ExtinctionAlmostAll,
        vec![],
    ));

    out.push(verdict(
        3,
        "3a-extinction-mites-kill",
        vec![cond(
            "mite break-even level vs bee threshold",
            th.h_star,
            Relation::Lt,
            th.nbar_h_c,
        )],
        Conclusion::ExtinctionAlmostAll,
        vec![],
    ));

    let bistable_targets = th
        .nbar_h_star
        .map(|nbs| vec![(0.0, 0.0), (nbs, 0.0)])
        .unwrap_or_default();
    out.push(verdict(
        3,
        "3b-bistable-no-mites",
        vec![
            cond("peak per-capita growth vs d_h", Some(g), Relation::Gt, Some(p.d_h)),
            cond("bee carrying level vs mite break-even level", th.nbar_h_star, Relation::Lt, th.h_star),
        ],
        Conclusion::ConvergesToOneOf { targets: bistable_targets },
        vec![],
    ));

    let interior_conditions = || {
        vec![
            cond("bee threshold vs mite break-even level", th.nbar_h_c, Relation::Lt, th.h_star),
            cond("mite break-even level vs bee carrying level", th.h_star, Relation::Lt, th.nbar_h_star),
        ]
    };
    out.push(verdict(
        3,
        "3c-unique-interior",
        interior_conditions(),
        Conclusion::UniqueInteriorVirusFree,
        vec![],
    ));

    out.push(verdict(
        3,
        "3d-interior-stability",
        interior_conditions(),
        Conclusion::InteriorStabilityVirusFree,
        vec![],
    ));

    out
}

/// Global dynamics of the bee-virus subsystem.
pub fn check_theorem4_mite_free(p: &Params) -> Vec<TheoremVerdict> {
    let th = thresholds(p);
    let g = growth(p);
    let endemic_guard = match (th.a, th.d_tilde) {
        (Some(a), Some(dt)) => Some(dt / (a + p.rho)),
        _ => None,
    };
    let mut out = Vec::new();

    out.push(verdict(
        4,
        "4a-extinction-no-growth",
        vec![cond("peak per-capita growth vs d_h", Some(g), Relation::Lt, Some(p.d_h))],
        Conclusion::ExtinctionAllInitial,
        vec![],
    ));

    out.push(verdict(
        4,
        "4a-extinction-virus-drag",
        vec![
            cond("virus invasion number vs one", th.r0_v, Relation::Gt, Some(1.0)),
            cond("peak per-capita growth vs d_h", Some(g), Relation::Gt, Some(p.d_h)),
            cond("peak per-capita growth vs endemic guard", Some(g), Relation::Lt, endemic_guard),
        ],
        Conclusion::ExtinctionAllInitial,
        vec![],
    ));

    let df_targets = th
        .nbar_h_star
        .map(|nbs| vec![(0.0, 0.0), (nbs, 0.0)])
        .unwrap_or_default();
    out.push(verdict(
        4,
        "4b-bistable-disease-free",
        vec![
            cond("virus invasion number vs one", th.r0_v, Relation::Lt, Some(1.0)),
            cond("peak per-capita growth vs d_h", Some(g), Relation::Gt, Some(p.d_h)),
        ],
        Conclusion::ConvergesToOneOf { targets: df_targets },
        vec![],
    ));

    // Upper endemic point (S^2, I^2) = (a I^2, I^2).
    let endemic_targets = match (th.a, th.d_tilde) {
        (Some(a), Some(dt)) => {
            let y = (a + p.rho) * (a + p.rho);
            match crate::thresholds::f_pair(p.r, p.k_hat, dt, y) {
                (_, Some(ih2)) => vec![(0.0, 0.0), (a * ih2, ih2)],
                _ => vec![(0.0, 0.0)],
            }
        }
        _ => Vec::new(),
    };
    out.push(verdict(
        4,
        "4c-bistable-endemic",
        vec![
            cond("virus invasion number vs one", th.r0_v, Relation::Gt, Some(1.0)),
            cond("peak per-capita growth vs d_h", Some(g), Relation::Gt, Some(p.d_h)),
            cond("peak per-capita growth vs endemic guard", Some(g), Relation::Gt, endemic_guard),
        ],
        Conclusion::ConvergesToOneOf { targets: endemic_targets },
        vec![],
    ));

    out
}

/// Dynamics of the healthy-mite-free 3-D system. `x0` supplies the bee
/// compartments; its healthy-mite field is ignored here.
pub fn check_theorem5_hvmi(p: &Params, x0: &State) -> Vec<TheoremVerdict> {
    let th = thresholds(p);
    let g = growth(p);
    let mut out = Vec::new();

    out.push(verdict(
        5,
        "5-reduction-to-mite-free",
        vec![
            cond("peak per-capita growth vs d_h", Some(g), Relation::Gt, Some(p.d_h)),
            cond("bee carrying level vs mite break-even total", th.nbar_h_star, Relation::Lt, th.p_star),
        ],
        Conclusion::InfectedMiteExtinction,
        vec![],
    ));

    out.push(verdict(
        5,
        "5-interior-characterization",
        vec![cond("mite break-even total vs zero", th.p_star, Relation::Gt, Some(0.0))],
        Conclusion::InteriorCharacterizationHealthyMiteFree,
        vec![],
    ));

    out.push(verdict(
        5,
        "5-no-interior-low-recruitment",
        vec![cond(
            "scaled recruitment vs scaled mite losses",
            Some(p.r * p.c * p.alpha),
            Relation::Lt,
            Some(p.d_h * (p.d_m + p.mu_m)),
        )],
        Conclusion::NoInteriorHealthyMiteFree,
        vec![],
    ));

    out.push(verdict(
        5,
        "5-virus-mite-persistence",
        vec![
            cond(
                "peak per-capita growth vs brood-weighted guard",
                Some(g),
                Relation::Gt,
                rho_guard(p, &th),
            ),
            cond("initial bee total vs lower threshold", Some(x0.n_h()), Relation::Gt, th.nund_h_c),
            cond("bee carrying level vs mite break-even total", th.nbar_h_star, Relation::Gt, th.p_star),
            cond("virus invasion number vs one", th.r0_v, Relation::Lt, Some(1.0)),
        ],
        Conclusion::VirusMitePersistence,
        vec!["virus persists through the mite route despite subcritical direct transmission"
            .to_string()],
    ));

    out
}

/// Persistence results for the full system, including the four
/// no-interior-equilibrium bundles.
pub fn check_theorem6_full(p: &Params, x0: &State) -> Vec<TheoremVerdict> {
    let th = thresholds(p);
    let g = growth(p);
    let guard = rho_guard(p, &th);
    let mut out = Vec::new();

    out.push(verdict(
        6,
        "6-reduction-to-bee-only",
        vec![
            cond("peak per-capita growth vs d_h", Some(g), Relation::Gt, Some(p.d_h)),
            cond(
                "weighted carrying level vs mite break-even per attack",
                th.n_star,
                Relation::Lt,
                Some(p.d_m / p.alpha),
            ),
            cond("virus invasion number vs one", th.r0_v, Relation::Lt, Some(1.0)),
        ],
        Conclusion::ReducesToBeeOnly,
        vec![],
    ));

    out.push(verdict(
        6,
        "6-healthy-bee-persistence",
        vec![
            cond("peak per-capita growth vs infection-loaded bound", Some(g), Relation::Gt, th.d_beta),
            cond("peak per-capita growth vs brood-weighted guard", Some(g), Relation::Gt, guard),
            cond("initial bee total vs initial healthy bees", Some(x0.n_h()), Relation::Ge, Some(x0.s_h)),
            cond("initial healthy bees vs healthy-bee threshold", Some(x0.s_h), Relation::Gt, th.s_h_c),
        ],
        Conclusion::HealthyBeePersistence,
        vec![],
    ));

    let ratio = th.nbar_h_star.map(|nbs| {
        min2(
            p.beta_h,
            p.c * p.beta_mh_hat + p.c * p.beta_mh_tilde + p.c * p.alpha * nbs,
        ) / max2(p.d_h + p.mu_h, p.d_m + p.mu_m)
    });
    out.push(verdict(
        6,
        "6-disease-persistence",
        vec![
            cond(
                "peak per-capita growth vs infection-loaded bound (unconverted)",
                Some(g),
                Relation::Gt,
                d_beta_no_c(p, &th),
            ),
            cond("initial healthy bees vs healthy-bee threshold", Some(x0.s_h), Relation::Gt, th.s_h_c),
            cond(
                "bee carrying level vs healthy-mite break-even",
                th.nbar_h_star,
                Relation::Lt,
                Some(p.d_m / (p.alpha * p.c)),
            ),
            cond("disease gain-to-loss ratio vs one", ratio, Relation::Ge, Some(1.0)),
        ],
        Conclusion::DiseasePersistence,
        vec!["gain ratio uses the bee carrying level".to_string()],
    ));

    // The four no-interior bundles, re-expressed with the strict guard
    // band. Tags double as clause ids.
    for bundle in crate::equilibria::no_interior_bundles(p) {
        let clause: &'static str = match bundle.tag {
            "no-interior-1" => "6-no-interior-1",
            "no-interior-2" => "6-no-interior-2",
            "no-interior-3" => "6-no-interior-3",
            _ => "6-no-interior-4",
        };
        let conditions = bundle
            .checks
            .iter()
            .map(|c| {
                let relation = if c.relation == "<" { Relation::Lt } else { Relation::Gt };
                cond(c.label.clone(), Some(c.lhs), relation, Some(c.rhs))
            })
            .collect();
        out.push(verdict(6, clause, conditions, Conclusion::NoInteriorFull, vec![]));
    }

    out.push(verdict(
        6,
        "6-mite-persistence",
        vec![
            cond("peak per-capita growth vs brood-weighted guard", Some(g), Relation::Gt, guard),
            cond("initial bee total vs lower threshold", Some(x0.n_h()), Relation::Gt, th.nund_h_c),
            cond("bee carrying level vs mite break-even total", th.nbar_h_star, Relation::Gt, th.p_star),
            cond("virus invasion number vs one", th.r0_v, Relation::Lt, Some(1.0)),
        ],
        Conclusion::MitePersistence,
        vec![],
    ));

    out
}

/// All six theorem checks against one parameter set and full-system
/// initial state, in theorem order.
pub fn check_all(p: &Params, raw: Option<&ParamsRaw>, x0: &State) -> Vec<TheoremVerdict> {
    let mut out = check_theorem1(p, raw, x0);
    out.extend(check_theorem2(p, x0));
    out.extend(check_theorem3_virus_free(p));
    out.extend(check_theorem4_mite_free(p));
    out.extend(check_theorem5_hvmi(p, x0));
    out.extend(check_theorem6_full(p, x0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_params() -> Params {
        let p = Params {
            r: 1500.0,
            k_hat: 1e6,
            rho: 0.9,
            d_h: 0.15,
            d_m: 0.1,
            mu_h: 0.1,
            mu_m: 0.01,
            alpha: 0.005,
            c: 0.005,
            beta_h: 0.24,
            beta_mh_hat: 0.03,
            beta_mh_tilde: 0.005,
            beta_hm_hat: 0.03,
        };
        p.validate().unwrap();
        p
    }

    fn find<'a>(vs: &'a [TheoremVerdict], clause: &str) -> &'a TheoremVerdict {
        vs.iter().find(|v| v.clause == clause).unwrap()
    }

    #[test]
    fn fig2_bee_total_bound_holds() {
        let p = fig2_params();
        let x0 = State::new(4001.0, 10.0, 5.0, 10.0);
        let vs = check_theorem1(&p, None, &x0);
        let v = find(&vs, "1b-bee-total-bound");
        assert!(v.hypothesis_holds);
        // growth 0.75 > d_h 0.15
        assert!((v.conditions[0].lhs.unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn fig2_healthy_mite_clause_fails_as_expected() {
        let p = fig2_params();
        let x0 = State::new(4001.0, 10.0, 5.0, 10.0);
        let vs = check_theorem2(&p, &x0);
        let v = find(&vs, "2b-healthy-mite-extinction");
        assert!(!v.hypothesis_holds);
        // the healthy-bee threshold is undefined here, so the clause as a
        // whole is vacuous, but the carrying-level condition itself fails:
        // 9898.98 is not below d_m/(alpha c) = 4000
        assert_eq!(v.hypothesis, HypothesisStatus::Vacuous);
        let c = &v.conditions[1];
        assert_eq!(c.status, HypothesisStatus::Fails);
        assert!((c.lhs.unwrap() - 9898.97948557).abs() < 1e-6);
        assert!((c.rhs.unwrap() - 4000.0).abs() < 1e-9);
    }

    #[test]
    fn fig2_mite_persistence_holds() {
        let p = fig2_params();
        let x0 = State::new(4001.0, 10.0, 5.0, 10.0);
        let vs = check_theorem6_full(&p, &x0);
        let v = find(&vs, "6-mite-persistence");
        assert!(v.hypothesis_holds, "{v:?}");
        assert_eq!(v.predicted_conclusion, Conclusion::MitePersistence);
        // bundle 4 holds at these parameters
        assert!(find(&vs, "6-no-interior-4").hypothesis_holds);
        assert!(!find(&vs, "6-no-interior-1").hypothesis_holds);
    }

    #[test]
    fn weak_parasitism_predicts_mite_extinction() {
        let mut p = fig2_params();
        p.alpha = 0.0;
        let x0 = State::new(4001.0, 10.0, 5.0, 10.0);
        let vs = check_theorem2(&p, &x0);
        let v = find(&vs, "2a-mite-extinction");
        assert!(v.hypothesis_holds, "{v:?}");
    }

    #[test]
    fn exact_equality_is_boundary() {
        let mut p = fig2_params();
        // growth = r/(2 sqrt(k_hat)) = d_h exactly
        p.r = 2.0 * p.k_hat.sqrt() * p.d_h;
        let x0 = State::new(100.0, 0.0, 0.0, 0.0);
        let vs = check_theorem1(&p, None, &x0);
        let v = find(&vs, "1b-bee-total-bound");
        assert_eq!(v.hypothesis, HypothesisStatus::Boundary);
        assert!(!v.hypothesis_holds);
    }

    #[test]
    fn raw_note_clause_vacuous_without_raw_params() {
        let p = fig2_params();
        let x0 = State::new(4001.0, 10.0, 5.0, 10.0);
        let vs = check_theorem1(&p, None, &x0);
        let v = find(&vs, "1g-adult-fraction-persistence");
        assert_eq!(v.hypothesis, HypothesisStatus::Vacuous);
    }

    #[test]
    fn verdicts_are_pure() {
        let p = fig2_params();
        let x0 = State::new(4001.0, 10.0, 5.0, 10.0);
        let a = serde_json::to_string(&check_all(&p, None, &x0)).unwrap();
        let b = serde_json::to_string(&check_all(&p, None, &x0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn virus_free_clauses_at_fig3() {
        // bee-mite parameters with an interior below the oscillation level
        let p = Params {
            r: 1500.0,
            k_hat: 1600001.0,
            rho: 0.9,
            d_h: 0.15,
            d_m: 0.1,
            mu_h: 0.1,
            mu_m: 0.01,
            alpha: 0.05,
            c: 0.005,
            beta_h: 0.3,
            beta_mh_hat: 0.08,
            beta_mh_tilde: 0.001,
            beta_hm_hat: 0.03,
        };
        let vs = check_theorem3_virus_free(&p);
        assert!(find(&vs, "3c-unique-interior").hypothesis_holds);
        assert!(find(&vs, "3d-interior-stability").hypothesis_holds);
        assert!(!find(&vs, "3a-extinction-no-growth").hypothesis_holds);
        assert!(!find(&vs, "3b-bistable-no-mites").hypothesis_holds);
    }
}
