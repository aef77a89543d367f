//! Closed-form threshold values pinned against an independently computed
//! reference, plus the ordering relations the persistence theory relies on.

use apis_core::scenarios::preset;
use apis_core::{thresholds, Params, Thresholds};
use proptest::prelude::*;

fn assert_rel(label: &str, got: Option<f64>, want: f64) {
    let got = got.unwrap_or_else(|| panic!("{label}: expected {want}, got None"));
    let tol = 1e-9 * want.abs().max(1.0);
    assert!(
        (got - want).abs() <= tol,
        "{label}: got {got}, want {want}"
    );
}

fn assert_none(label: &str, got: Option<f64>) {
    assert!(got.is_none(), "{label}: expected None, got {got:?}");
}

#[test]
fn boundary_oscillation_parameters() {
    let th = thresholds(&preset("fig1").unwrap().params);
    assert_eq!(th.d, 0.01);
    assert_rel("n_c", th.n_c, 0.266714090938);
    assert_rel("n_star", th.n_star, 1499.73328591);
    assert_rel("nbar_h_c", th.nbar_h_c, 26.6714090938);
    assert_rel("nbar_h_star", th.nbar_h_star, 149973.328591);
    assert_none("nund_h_c", th.nund_h_c);
    assert_none("nund_h_star", th.nund_h_star);
    assert_none("d_beta", th.d_beta);
    assert_none("s_h_c", th.s_h_c);
    assert_none("s_h_star", th.s_h_star);
    assert_rel("h_star", th.h_star, 2000.0);
    assert_rel("m_star", th.m_star, 73.0);
    assert_rel("r0_v", th.r0_v, 0.0);
    assert_rel("r0_m", th.r0_m, 74.9866642955);
    assert_none("a", th.a);
    assert_none("d_tilde", th.d_tilde);
    assert_rel("p_star", th.p_star, 2000.0);
}

#[test]
fn low_virus_transmission_parameters() {
    let th = thresholds(&preset("fig2_full").unwrap().params);
    assert_eq!(th.d, 0.1);
    assert_rel("n_c", th.n_c, 0.334828131704);
    assert_rel("n_star", th.n_star, 74.6651718683);
    assert_rel("nbar_h_c", th.nbar_h_c, 101.020514434);
    assert_rel("nbar_h_star", th.nbar_h_star, 9898.97948557);
    assert_rel("nund_h_c", th.nund_h_c, 741.511334974);
    assert_rel("nund_h_star", th.nund_h_star, 1664.93463148);
    assert_rel("d_beta", th.d_beta, 1.05475035834);
    assert_none("s_h_c", th.s_h_c);
    assert_none("s_h_star", th.s_h_star);
    assert_rel("h_star", th.h_star, 4000.0);
    assert_rel("m_star", th.m_star, 40.5882352941);
    assert_rel("r0_v", th.r0_v, 0.96);
    assert_rel("r0_m", th.r0_m, 2.47474487139);
    assert_none("a", th.a);
    assert_none("d_tilde", th.d_tilde);
    assert_rel("p_star", th.p_star, 4400.0);
}

#[test]
fn high_parasitism_parameters() {
    let th = thresholds(&preset("fig3_full").unwrap().params);
    assert_eq!(th.d, 0.1);
    assert_rel("n_c", th.n_c, 0.537181181625);
    assert_rel("n_star", th.n_star, 74.4628188184);
    assert_rel("nbar_h_c", th.nbar_h_c, 162.645454383);
    assert_rel("nbar_h_star", th.nbar_h_star, 9837.35454562);
    assert_none("nund_h_c", th.nund_h_c);
    assert_none("nund_h_star", th.nund_h_star);
    assert_none("d_beta", th.d_beta);
    assert_rel("h_star", th.h_star, 400.0);
    assert_rel("m_star", th.m_star, 3.81817794422);
    assert_rel("r0_v", th.r0_v, 1.2);
    assert_rel("r0_m", th.r0_m, 24.593386364);
    assert_rel("a", th.a, 5.0);
    assert_rel("d_tilde", th.d_tilde, 1.0);
    assert_rel("p_star", th.p_star, 440.0);
}

#[test]
fn high_parasitism_small_brood_constant() {
    let th = thresholds(&preset("fig3_virusfree").unwrap().params);
    assert_rel("n_c", th.n_c, 0.0533716471029);
    assert_rel("n_star", th.n_star, 74.9466283529);
    assert_rel("nbar_h_c", th.nbar_h_c, 16.0257825707);
    assert_rel("nbar_h_star", th.nbar_h_star, 9983.97421743);
    assert_rel("h_star", th.h_star, 400.0);
    assert_rel("m_star", th.m_star, 34.4998828129);
    assert_rel("r0_m", th.r0_m, 24.9599355436);
}

// The mite invasion number equals the break-even ratio in both algebraic
// forms: barN_h*/H* and c*alpha*barN_h*/d_m.
#[test]
fn mite_invasion_number_reformulation() {
    for id in ["fig1", "fig2_full", "fig3_full", "fig3_virusfree"] {
        let p = preset(id).unwrap().params;
        let th = thresholds(&p);
        let (r0m, nbar) = (th.r0_m.unwrap(), th.nbar_h_star.unwrap());
        let alt = p.c * p.alpha * nbar / p.d_m;
        assert!(
            (r0m - alt).abs() <= 1e-12 * r0m.abs(),
            "{id}: {r0m} vs {alt}"
        );
    }
}

#[test]
fn entries_expose_every_threshold_in_stable_order() {
    let th = thresholds(&preset("fig2_full").unwrap().params);
    let names: Vec<&str> = th.entries().iter().map(|(n, _)| *n).collect();
    // Order is part of the output contract (CSV columns, CLI lines).
    let again: Vec<&str> = thresholds(&preset("fig1").unwrap().params)
        .entries()
        .iter()
        .map(|(n, _)| *n)
        .collect();
    assert_eq!(names, again);
    assert_eq!(names.len(), 17);
    assert!(names.contains(&"R0_V") && names.contains(&"H_star"));
}

fn plausible_params() -> impl Strategy<Value = Params> {
    (
        500.0..3000.0_f64,          // r
        (500.0..5000.0_f64).prop_map(|s| s * s), // k_hat via sqrt scale
        0.5..1.0_f64,               // rho
        0.01..0.3_f64,              // d_h
        0.02..0.3_f64,              // d_m
        0.001..0.3_f64,             // mu_h
        0.001..0.1_f64,             // mu_m
        1e-4..0.05_f64,             // alpha
        1e-3..0.05_f64,             // c
        0.01..0.9_f64,              // beta_h
    )
        .prop_map(
            |(r, k_hat, rho, d_h, d_m, mu_h, mu_m, alpha, c, beta_h)| Params {
                r,
                k_hat,
                rho,
                d_h,
                d_m,
                mu_h,
                mu_m,
                alpha,
                c,
                beta_h,
                beta_mh_hat: 0.03,
                beta_mh_tilde: 0.001,
                beta_hm_hat: 0.03,
            },
        )
}

fn ordered(th: &Thresholds) -> Vec<(&'static str, f64)> {
    let mut chain = Vec::new();
    if let Some(v) = th.n_c {
        chain.push(("n_c", v));
    }
    if let Some(v) = th.nbar_h_c {
        chain.push(("nbar_h_c", v));
    }
    if let Some(v) = th.nund_h_c {
        chain.push(("nund_h_c", v));
    }
    if let Some(v) = th.nund_h_star {
        chain.push(("nund_h_star", v));
    }
    if let Some(v) = th.nbar_h_star {
        chain.push(("nbar_h_star", v));
    }
    chain
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    // The threshold ladder: the weighted-total floor sits below the bee
    // floor, harder per-capita conditions push the lower root up and the
    // upper root down, and the bee ceiling stays under the scaled attractor
    // bound. Only adjacent defined pairs are compared; a missing middle
    // rung (negative discriminant) drops out of the chain.
    #[test]
    fn threshold_ladder_is_ordered(p in plausible_params()) {
        let th = thresholds(&p);
        let chain = ordered(&th);
        for w in chain.windows(2) {
            prop_assert!(
                w[0].1 <= w[1].1 + 1e-9 * w[1].1.abs().max(1.0),
                "{} = {} > {} = {}",
                w[0].0, w[0].1, w[1].0, w[1].1
            );
        }
        if let (Some(n_star), Some(nbar)) = (th.n_star, th.nbar_h_star) {
            prop_assert!(nbar <= n_star / p.c * (1.0 + 1e-12));
        }
        // Roots actually solve their defining balance.
        if let (Some(lo), Some(hi)) = (th.nbar_h_c, th.nbar_h_star) {
            for x in [lo, hi] {
                let balance = p.r * x * x / (p.k_hat + x * x) - p.d_h * x;
                prop_assert!(balance.abs() <= 1e-7 * (p.r + x), "residual {balance} at {x}");
            }
        }
    }

    // Raising recruitment (everything else fixed) widens the viability
    // window whenever it exists on both sides.
    #[test]
    fn recruitment_widens_the_window(p in plausible_params(), bump in 1.05..2.0_f64) {
        let mut stronger = p.clone();
        stronger.r = p.r * bump;
        let a = thresholds(&p);
        let b = thresholds(&stronger);
        if let (Some(c1), Some(s1), Some(c2), Some(s2)) =
            (a.nbar_h_c, a.nbar_h_star, b.nbar_h_c, b.nbar_h_star)
        {
            prop_assert!(c2 <= c1 * (1.0 + 1e-12), "lower root moved up: {c1} -> {c2}");
            prop_assert!(s2 >= s1 * (1.0 - 1e-12), "upper root moved down: {s1} -> {s2}");
        }
    }
}
