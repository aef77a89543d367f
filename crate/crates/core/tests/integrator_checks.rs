//! Integration behavior: threshold-separated fates, event emission, error
//! reporting, bitwise determinism, and step-size convergence order.

use apis_core::scenarios::preset;
use apis_core::{
    classify_outcome, integrate, thresholds, Error, EventKind, IntegrationConfig, OutcomeKind,
    SysVec, SystemId, Trajectory,
};

#[test]
fn bee_only_below_the_viability_floor_dies() {
    let p = preset("fig2_full").unwrap().params;
    // Start below the lower balance point (~101): decay is monotone.
    let traj = integrate(SystemId::BeeOnly, &[50.0], &p, &IntegrationConfig::to(2000.0)).unwrap();
    assert!(traj.last_state()[0] <= traj.cfg.extinction_eps);
    // With a single compartment, extinction of the last compartment is
    // total extinction; only the stronger event fires and the run stops.
    assert!(traj.events.iter().any(|e| e.kind == EventKind::TotalExtinct));
    assert!(traj.last_time() < 2000.0);

    let label = classify_outcome(&traj, &thresholds(&p)).unwrap();
    assert_eq!(label.kind, OutcomeKind::AllExtinct);
}

#[test]
fn bee_only_above_the_floor_settles_at_carrying() {
    let p = preset("fig2_full").unwrap().params;
    let traj = integrate(SystemId::BeeOnly, &[4001.0], &p, &IntegrationConfig::to(2000.0)).unwrap();
    let end = traj.last_state()[0];
    let want = 9898.97948557;
    assert!(
        (end - want).abs() <= 1e-3 * want,
        "settled at {end}, want {want}"
    );
    let label = classify_outcome(&traj, &thresholds(&p)).unwrap();
    assert_eq!(label.kind, OutcomeKind::DiseaseFreePersistence);
}

// Fixed-step emulation (step cap + tolerances loose enough to accept every
// step): halving the step must shrink the end-state error by at least 2^4
// on a smooth segment.
#[test]
fn step_halving_shows_high_order_convergence() {
    let p = preset("fig2_full").unwrap().params;
    let x0 = [4001.0, 5.0];

    let run = |h: f64, rel: f64, abs: f64| -> SysVec {
        let mut cfg = IntegrationConfig::to(20.0);
        cfg.rel_tol = rel;
        cfg.abs_tol = abs;
        cfg.max_step = h;
        cfg.record_stride = 20.0;
        let traj = integrate(SystemId::VirusFree, &x0, &p, &cfg).unwrap();
        assert!(traj.events.is_empty());
        *traj.last_state()
    };

    let reference = run(0.01, 1e-12, 1e-12);
    let err = |h: f64| -> f64 {
        let end = run(h, 0.5, 1.0);
        end.iter()
            .zip(reference.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };

    let coarse = err(0.5);
    let fine = err(0.25);
    assert!(fine > 0.0, "fine error vanished; step too small to compare");
    let order = (coarse / fine).log2();
    assert!(
        order >= 4.0,
        "observed order {order:.2} (errors {coarse:.3e} -> {fine:.3e})"
    );
}

#[test]
fn step_budget_failure_is_explicit() {
    let pre = preset("fig2_full").unwrap();
    let mut cfg = pre.config();
    cfg.max_steps = 10;
    let err = integrate(pre.sys, &pre.x0, &pre.params, &cfg).unwrap_err();
    assert!(matches!(err, Error::TooManySteps { .. }), "{err}");
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let pre = preset("fig2_full").unwrap();
    let cfg = pre.config();
    let a = integrate(pre.sys, &pre.x0, &pre.params, &cfg).unwrap();
    let b = integrate(pre.sys, &pre.x0, &pre.params, &cfg).unwrap();
    assert_eq!(a.n_steps, b.n_steps);
    assert_eq!(a.n_rejected, b.n_rejected);
    assert_eq!(a.times.len(), b.times.len());
    for (x, y) in a.times.iter().zip(&b.times) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    for (xs, ys) in a.states.iter().zip(&b.states) {
        for (x, y) in xs.iter().zip(ys.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    assert_eq!(a.events.len(), b.events.len());
}

// Trajectory construction classifies eagerly, so a sample set too short to
// carry an analysis window is rejected at the door.
#[test]
fn classification_needs_at_least_two_samples() {
    let pre = preset("fig2_full").unwrap();
    let err = Trajectory::from_samples(
        pre.sys,
        pre.params,
        pre.config(),
        vec![0.0],
        vec![SysVec::from_slice(&pre.x0)],
    )
    .unwrap_err();
    assert!(matches!(err, Error::WindowTooShort(_)), "{err}");
}

#[test]
fn sample_times_must_increase_strictly() {
    let pre = preset("fig2_full").unwrap();
    let x = SysVec::from_slice(&pre.x0);
    let bad = Trajectory::from_samples(
        pre.sys,
        pre.params,
        pre.config(),
        vec![0.0, 1.0, 1.0],
        vec![x, x, x],
    );
    assert!(bad.is_err());
}

// The collapse regime drives compartments hard against zero; the recorded
// trajectory must never show a negative value, and the run must stop early
// once everything is extinct instead of grinding to the horizon.
#[test]
fn collapse_keeps_states_nonnegative_and_stops_early() {
    let pre = preset("fig3_full").unwrap();
    let traj = integrate(pre.sys, &pre.x0, &pre.params, &pre.config()).unwrap();
    for (t, y) in traj.times.iter().zip(&traj.states) {
        for v in y.iter() {
            assert!(*v >= 0.0, "negative value {v} at t={t}");
        }
    }
    assert!(traj.events.iter().any(|e| e.kind == EventKind::TotalExtinct));
    assert!(
        traj.last_time() < pre.horizon,
        "expected early stop, ran to {}",
        traj.last_time()
    );
}

#[test]
fn extinction_cascade_is_reported_per_compartment() {
    let pre = preset("fig1").unwrap();
    let traj = integrate(pre.sys, &pre.x0, &pre.params, &pre.config()).unwrap();
    let compartment_events = traj
        .events
        .iter()
        .filter(|e| e.kind == EventKind::CompartmentExtinct)
        .count();
    let total_events = traj
        .events
        .iter()
        .filter(|e| e.kind == EventKind::TotalExtinct)
        .count();
    assert!(compartment_events >= 1);
    assert_eq!(total_events, 1);
    // Event times are ordered and within the horizon.
    let times: Vec<f64> = traj.events.iter().map(|e| e.t).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    assert!(times.iter().all(|t| *t <= pre.horizon));
}
