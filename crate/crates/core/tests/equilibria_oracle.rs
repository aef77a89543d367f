//! Equilibrium locations, stability classes, and interior solves pinned
//! against independently computed reference values for the four published
//! parameter sets.

use apis_core::equilibria::jacobian::eigenvalues_of;
use apis_core::equilibria::{
    classify_eigs, equilibria_bee_only, equilibria_mite_free, equilibria_virus_free, hopf_scan,
    interior_full, interior_healthy_mite_free, jacobian, residual_at, ClassifiedEquilibrium,
    JacobianMode, StabilityClass,
};
use apis_core::scenarios::preset;
use apis_core::{Params, SystemId};

fn params(id: &str) -> Params {
    preset(id).unwrap().params
}

fn residual_bound(p: &Params) -> f64 {
    1e-9 * p.r.max(1.0)
}

fn find<'a>(set: &'a [ClassifiedEquilibrium], tag: &str) -> &'a ClassifiedEquilibrium {
    set.iter()
        .find(|e| e.existence_condition == tag)
        .unwrap_or_else(|| {
            let tags: Vec<&str> = set.iter().map(|e| e.existence_condition.as_str()).collect();
            panic!("no equilibrium tagged {tag:?}; present: {tags:?}")
        })
}

fn assert_loc(eq: &ClassifiedEquilibrium, want: &[f64]) {
    assert_eq!(eq.location.len(), want.len());
    for (got, want) in eq.location.iter().zip(want) {
        let tol = 1e-9 * want.abs().max(1e-6);
        assert!(
            (got - want).abs() <= tol,
            "{}: located at {:?}, want {want} (component off by {})",
            eq.existence_condition,
            &eq.location[..],
            got - want
        );
    }
}

#[test]
fn bee_only_set_above_viability() {
    let p = params("fig2_full");
    let set = equilibria_bee_only(&p);
    assert_eq!(set.len(), 3);

    let origin = find(&set, "origin");
    assert_loc(origin, &[0.0]);
    assert_eq!(origin.class, StabilityClass::Sink);

    let allee = find(&set, "bee-allee-threshold");
    assert_loc(allee, &[101.020514434]);
    assert_eq!(allee.class, StabilityClass::Source);

    let carrying = find(&set, "bee-carrying-level");
    assert_loc(carrying, &[9898.97948557]);
    assert_eq!(carrying.class, StabilityClass::Sink);

    for eq in &set {
        assert!(
            eq.residual <= residual_bound(&p),
            "{}: residual {}",
            eq.existence_condition,
            eq.residual
        );
    }
}

#[test]
fn bee_only_origin_only_when_growth_cannot_beat_mortality() {
    let mut p = params("fig2_full");
    // Peak per-capita growth r/(2 sqrt(k_hat)) = 0.05 < d_h = 0.15.
    p.r = 100.0;
    let set = equilibria_bee_only(&p);
    assert_eq!(set.len(), 1);
    assert_eq!(set[0].existence_condition, "origin");
}

#[test]
fn virus_free_set_at_the_oscillation_boundary() {
    let p = params("fig1");
    let set = equilibria_virus_free(&p);
    assert_eq!(set.len(), 4);

    assert_eq!(find(&set, "origin").class, StabilityClass::Sink);

    let allee = find(&set, "bee-allee-threshold");
    assert_loc(allee, &[26.6714090938, 0.0]);
    assert_eq!(allee.class, StabilityClass::Saddle);

    // Mites invade the bee carrying level (invasion number 75 > 1), so the
    // boundary point that is a sink for bees alone is a saddle here.
    let carrying = find(&set, "bee-carrying-level");
    assert_loc(carrying, &[149973.328591, 0.0]);
    assert_eq!(carrying.class, StabilityClass::Saddle);

    // Interior sits exactly on the oscillation boundary H* = sqrt(k_hat):
    // trace zero, a marginal case that must be reported, not guessed at.
    let interior = find(&set, "mite-bee-interior");
    assert_loc(interior, &[2000.0, 73.0]);
    assert_eq!(interior.class, StabilityClass::Nonhyperbolic);
    let trace: f64 = interior.eigenvalues.iter().map(|e| e.re).sum();
    assert!(trace.abs() <= 1e-12, "trace {trace}");

    for eq in &set {
        assert!(eq.residual <= residual_bound(&p));
    }
}

#[test]
fn virus_free_interior_is_damped_for_low_parasitism() {
    let p = params("fig2_full");
    let set = equilibria_virus_free(&p);
    let interior = find(&set, "mite-bee-interior");
    assert_loc(interior, &[4000.0, 40.5882352941]);
    assert_eq!(interior.class, StabilityClass::Sink);
    // Complex pair: the approach to coexistence is a damped oscillation.
    assert!(interior.eigenvalues.iter().all(|e| e.re < 0.0));

    assert_eq!(find(&set, "bee-carrying-level").class, StabilityClass::Saddle);
}

#[test]
fn virus_free_interior_destabilizes_past_the_boundary() {
    let p = params("fig3_virusfree");
    let set = equilibria_virus_free(&p);
    let interior = find(&set, "mite-bee-interior");
    assert_loc(interior, &[400.0, 34.4998828129]);
    // H* = 400 < sqrt(k_hat) ~ 400.001: barely past the boundary, but the
    // positive real part (2.9e-6) still clears the nonhyperbolicity band.
    assert_eq!(interior.class, StabilityClass::Source);
}

#[test]
fn mite_free_endemic_pair_for_supercritical_virus() {
    let p = params("fig3_full");
    let set = equilibria_mite_free(&p);

    // Endemic points lie on the ray S_h = a I_h with a = 5.
    let lower = find(&set, "virus-endemic-lower");
    assert_loc(lower, &[5.0 * 31.2954934273, 31.2954934273]);
    assert_eq!(lower.class, StabilityClass::Saddle);

    let upper = find(&set, "virus-endemic-upper");
    assert_loc(upper, &[7343.52253286, 1468.70450657]);
    assert_eq!(upper.class, StabilityClass::Sink);

    for eq in &set {
        assert!(eq.residual <= residual_bound(&p));
    }
}

#[test]
fn mite_free_has_no_endemic_point_below_threshold() {
    // Invasion number 0.96 < 1: only the disease-free (bee-only) points.
    let set = equilibria_mite_free(&params("fig2_full"));
    assert_eq!(set.len(), 3);
    assert!(set
        .iter()
        .all(|e| !e.existence_condition.starts_with("virus-endemic")));
}

#[test]
fn healthy_mite_free_interior_root() {
    let p = params("fig2_full");
    let rep = interior_healthy_mite_free(&p);
    assert_eq!(rep.branch, "interior-roots-found", "branch: {}", rep.branch);
    assert_eq!(rep.roots.len(), 1);
    assert!(!rep.inconsistent);
    assert!(rep.failures.is_empty(), "{:?}", rep.failures);

    let root = &rep.roots[0];
    assert_loc(root, &[2781.94088254, 1618.05911746, 27.2313506748]);
    assert_eq!(root.class, StabilityClass::Sink);
    assert!(root.residual <= residual_bound(&p), "residual {}", root.residual);
}

#[test]
fn full_interior_absent_for_low_transmission() {
    let p = params("fig2_full");
    let rep = interior_full(&p);
    assert!(rep.roots.is_empty(), "unexpected roots: {:?}", rep.roots);
    assert!(!rep.inconsistent);

    let (lo, hi) = rep.admissible.expect("scan interval");
    assert!((lo - 4000.0).abs() <= 1e-9 * 4000.0);
    assert!((hi - 4085.714285714285).abs() <= 1e-9 * 4085.7);

    // The closed-form nonexistence certificate agrees with the scan.
    let bundle4 = rep
        .conditions
        .iter()
        .find(|b| b.tag == "no-interior-4")
        .unwrap();
    assert!(bundle4.holds);
}

// Subsystem equilibria remain equilibria of the full system once absent
// compartments are pinned to zero; the restriction is exact, so the
// residual bound carries over unchanged.
#[test]
fn embedded_points_stay_equilibria_of_the_full_system() {
    let p = params("fig2_full");
    let bound = residual_bound(&p);

    let mut points: Vec<(SystemId, Vec<f64>)> = Vec::new();
    for eq in equilibria_virus_free(&p) {
        points.push((SystemId::VirusFree, eq.location.to_vec()));
    }
    for eq in equilibria_mite_free(&p) {
        points.push((SystemId::MiteFree, eq.location.to_vec()));
    }
    for root in interior_healthy_mite_free(&p).roots {
        points.push((SystemId::HealthyMiteFree, root.location.to_vec()));
    }

    for (sys, loc) in points {
        let full = sys.embed(&loc).unwrap();
        let res = residual_at(
            SystemId::Full,
            &p,
            &[full.s_h, full.i_h, full.s_m, full.i_m],
        );
        assert!(res <= bound, "{sys}: embedded residual {res} at {loc:?}");
    }
}

// The stored closed-form eigenvalues and a fresh numeric Jacobian
// eigensolve must tell the same stability story at every hyperbolic point.
#[test]
fn stored_classes_match_numeric_eigensolve() {
    let p = params("fig2_full");
    let mut points: Vec<ClassifiedEquilibrium> = equilibria_virus_free(&p);
    points.extend(equilibria_mite_free(&p));
    points.extend(interior_healthy_mite_free(&p).roots);

    for eq in points {
        // The origin of the bee-virus system sits inside the frequency-term
        // guard; numeric differencing refuses it by contract.
        let jac = match jacobian(eq.sys, &eq.location, &p, JacobianMode::Numeric) {
            Ok(j) => j,
            Err(apis_core::Error::SingularPoint { .. }) => {
                assert_eq!(eq.existence_condition, "origin");
                continue;
            }
            Err(e) => panic!("{}: {e}", eq.sys),
        };
        let recomputed = classify_eigs(&eigenvalues_of(&jac));
        assert_eq!(
            recomputed, eq.class,
            "{} / {}: numeric {:?} vs stored {:?}",
            eq.sys, eq.existence_condition, recomputed, eq.class
        );
    }
}

// The closed-form Jacobian exists for the two-compartment interiors; it
// must match central differences there.
#[test]
fn analytic_and_numeric_jacobians_agree_at_interiors() {
    let mut cases: Vec<(Params, ClassifiedEquilibrium)> = Vec::new();
    let p2 = params("fig2_full");
    cases.push((p2, find(&equilibria_virus_free(&p2), "mite-bee-interior").clone()));
    let p3 = params("fig3_full");
    for tag in ["virus-endemic-lower", "virus-endemic-upper"] {
        cases.push((p3, find(&equilibria_mite_free(&p3), tag).clone()));
    }

    for (p, eq) in cases {
        let a = jacobian(eq.sys, &eq.location, &p, JacobianMode::Analytic).unwrap();
        let n = jacobian(eq.sys, &eq.location, &p, JacobianMode::Numeric).unwrap();
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(n.iter()) {
            assert!(
                (x - y).abs() <= 1e-5 * scale,
                "{} / {}: {x} vs {y}",
                eq.sys,
                eq.existence_condition
            );
        }
    }
}

#[test]
fn hopf_crossing_sits_where_equilibrium_meets_the_fold() {
    // Sweeping mite mortality moves H* = d_m/(c alpha) through sqrt(k_hat);
    // the crossing is the oscillation boundary of the bee-mite interior.
    let p = params("fig1");
    let rep = hopf_scan(&p, "d_m", (0.05, 0.2), 0.005).unwrap();
    assert_eq!(rep.crossings.len(), 1, "crossings: {:?}", rep.crossings);

    let c = &rep.crossings[0];
    let expected = p.c * p.alpha * p.k_hat.sqrt();
    assert!(
        (c.param_value - expected).abs() <= 1e-6 * expected,
        "crossing at {} vs {expected}",
        c.param_value
    );
    assert!(c.gap_below < 0.0 && c.gap_above > 0.0);
    let (tb, ta) = (c.trace_below.unwrap(), c.trace_above.unwrap());
    assert!(tb > 0.0 && ta < 0.0, "trace {tb} -> {ta}");
}
