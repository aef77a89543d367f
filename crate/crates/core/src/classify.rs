use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::state::Compartment;
use crate::thresholds::Thresholds;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Qualitative fate of a finite-horizon run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OutcomeKind {
    /// Everything decayed to numerical extinction.
    AllExtinct,
    /// Bees persist, mites and virus do not.
    DiseaseFreePersistence,
    /// Bees and virus persist with no mites.
    MiteFreePersistence,
    /// Bees and mites both persist (with or without circulating virus).
    Coexistence,
    /// Extinction reached through oscillations of growing amplitude.
    CatastrophicCollapse,
    /// Mixed or still-transient behavior the rules cannot call.
    Undetermined,
}

impl OutcomeKind {
    pub fn label(self) -> &'static str {
        match self {
            OutcomeKind::AllExtinct => "all-extinct",
            OutcomeKind::DiseaseFreePersistence => "disease-free-persistence",
            OutcomeKind::MiteFreePersistence => "mite-free-persistence",
            OutcomeKind::Coexistence => "coexistence",
            OutcomeKind::CatastrophicCollapse => "catastrophic-collapse",
            OutcomeKind::Undetermined => "undetermined",
        }
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for OutcomeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all-extinct" => OutcomeKind::AllExtinct,
            "disease-free-persistence" => OutcomeKind::DiseaseFreePersistence,
            "mite-free-persistence" => OutcomeKind::MiteFreePersistence,
            "coexistence" => OutcomeKind::Coexistence,
            "catastrophic-collapse" => OutcomeKind::CatastrophicCollapse,
            "undetermined" => OutcomeKind::Undetermined,
            other => return Err(Error::UnknownPreset(format!("outcome label {other:?}"))),
        })
    }
}

/// Finite-horizon persistence verdict for one compartment.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CompartmentStatus {
    pub compartment: Compartment,
    /// Minimum over the analysis window stayed above 10x extinction_eps.
    pub persistent: bool,
    /// Final value at or below 10x extinction_eps.
    pub extinct_at_end: bool,
    /// Minimum over the analysis window: a lim-inf proxy.
    pub floor: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeLabel {
    pub kind: OutcomeKind,
    pub compartments: Vec<CompartmentStatus>,
    /// Longest run of consecutive bee-population peaks each at least 2%
    /// above its predecessor (0 = no peaks at all).
    pub expanding_peak_run: usize,
    /// First sample time with fewer than one bee, if any.
    pub collapse_time: Option<f64>,
}

impl OutcomeLabel {
    /// Placeholder used while a trajectory is under construction.
    pub fn undetermined() -> Self {
        Self {
            kind: OutcomeKind::Undetermined,
            compartments: Vec::new(),
            expanding_peak_run: 0,
            collapse_time: None,
        }
    }

    pub fn status(&self, comp: Compartment) -> Option<&CompartmentStatus> {
        self.compartments.iter().find(|s| s.compartment == comp)
    }

    fn group_persistent(&self, comps: &[Compartment]) -> bool {
        self.compartments
            .iter()
            .any(|s| comps.contains(&s.compartment) && s.persistent)
    }

    /// Bees persistent: S_h or I_h above the floor through the window.
    pub fn bees_persist(&self) -> bool {
        self.group_persistent(&[Compartment::Sh, Compartment::Ih])
    }

    pub fn mites_persist(&self) -> bool {
        self.group_persistent(&[Compartment::Sm, Compartment::Im])
    }

    /// Virus circulating: infected bees or infected mites persist.
    pub fn virus_persists(&self) -> bool {
        self.group_persistent(&[Compartment::Ih, Compartment::Im])
    }
}

/// Ratio a bee-population peak must exceed over its predecessor to count as
/// amplitude growth.
pub const PEAK_GROWTH_RATIO: f64 = 1.02;

/// Label a trajectory by the persistence pattern over its analysis window
/// (the final 20% of the recorded span, widened to at least the last five
/// samples). Deterministic given trajectory and config.
///
/// `CatastrophicCollapse` = the final state is extinct in every compartment
/// and the bee total showed at least two successive peaks of growing
/// amplitude on the way down; plain monotone decay is `AllExtinct`.
///
/// The thresholds argument anchors the label to the same parameter context
/// the simulation used; the current rules need only the trajectory itself.
pub fn classify_outcome(traj: &Trajectory, _th: &Thresholds) -> Result<OutcomeLabel> {
    let len = traj.len();
    if len < 2 {
        return Err(Error::WindowTooShort(
            "need at least two recorded samples to classify",
        ));
    }
    let start = analysis_window_start(&traj.times);

    let eps10 = traj.cfg.extinction_eps * 10.0;
    let comps = traj.sys.compartments();
    let mut statuses = Vec::with_capacity(comps.len());
    for (i, comp) in comps.iter().enumerate() {
        let mut floor = f64::INFINITY;
        for y in &traj.states[start..] {
            floor = floor.min(y[i]);
        }
        let end = traj.last_state()[i];
        statuses.push(CompartmentStatus {
            compartment: *comp,
            persistent: floor > eps10,
            extinct_at_end: end <= eps10,
            floor,
        });
    }

    let n_h: Vec<f64> = traj.n_h_series();
    let peaks = local_maxima(&n_h, eps10);
    let expanding_peak_run = longest_expanding_run(&peaks, PEAK_GROWTH_RATIO);
    let collapse_time = traj
        .times
        .iter()
        .zip(&n_h)
        .find(|(_, v)| **v < 1.0)
        .map(|(t, _)| *t);

    let all_end_extinct = statuses.iter().all(|s| s.extinct_at_end);
    let mut label = OutcomeLabel {
        kind: OutcomeKind::Undetermined,
        compartments: statuses,
        expanding_peak_run,
        collapse_time,
    };
    label.kind = if all_end_extinct {
        if expanding_peak_run >= 2 {
            OutcomeKind::CatastrophicCollapse
        } else {
            OutcomeKind::AllExtinct
        }
    } else if !label.bees_persist() {
        OutcomeKind::Undetermined
    } else if label.mites_persist() {
        OutcomeKind::Coexistence
    } else if label.virus_persists() {
        OutcomeKind::MiteFreePersistence
    } else {
        OutcomeKind::DiseaseFreePersistence
    };
    Ok(label)
}

/// Start index of the analysis window: the final 20% of the recorded span,
/// widened to at least the last five samples. Shared by outcome labeling
/// and theorem cross-validation so both read the same window.
pub(crate) fn analysis_window_start(times: &[f64]) -> usize {
    let len = times.len();
    let t0 = times[0];
    let t_last = times[len - 1];
    let window_start_time = t_last - 0.2 * (t_last - t0);
    let mut start = times.partition_point(|t| *t < window_start_time);
    if len - start < 5 {
        start = len.saturating_sub(5);
    }
    start
}

/// Interior local maxima of a sampled series, ignoring values at or below
/// `floor` (post-extinction round-off wiggles are not peaks).
fn local_maxima(v: &[f64], floor: f64) -> Vec<f64> {
    let mut peaks = Vec::new();
    for k in 1..v.len().saturating_sub(1) {
        if v[k] > v[k - 1] && v[k] >= v[k + 1] && v[k] > floor {
            peaks.push(v[k]);
        }
    }
    peaks
}

fn longest_expanding_run(peaks: &[f64], ratio: f64) -> usize {
    if peaks.is_empty() {
        return 0;
    }
    let mut best = 1usize;
    let mut run = 1usize;
    for j in 1..peaks.len() {
        if peaks[j] > ratio * peaks[j - 1] {
            run += 1;
        } else {
            run = 1;
        }
        best = best.max(run);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{IntegrationConfig, Trajectory};
    use crate::params::{derive_params, ParamsRaw};
    use crate::state::{SysVec, SystemId};

    fn params() -> crate::params::Params {
        derive_params(&ParamsRaw {
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
        })
        .unwrap()
    }

    fn synthetic(sys: SystemId, rows: Vec<Vec<f64>>) -> Trajectory {
        let times = (0..rows.len()).map(|i| i as f64).collect();
        let states = rows.iter().map(|r| SysVec::from_slice(r)).collect();
        let cfg = IntegrationConfig::to((rows.len() - 1) as f64);
        Trajectory::from_samples(sys, params(), cfg, times, states).unwrap()
    }

    #[test]
    fn constant_bee_only_equilibrium_is_disease_free_persistence() {
        let rows = vec![vec![9898.98]; 50];
        let traj = synthetic(SystemId::BeeOnly, rows);
        assert_eq!(traj.outcome.kind, OutcomeKind::DiseaseFreePersistence);
        let floor = traj.outcome.status(Compartment::Sh).unwrap().floor;
        assert!((floor - 9898.98).abs() < 1e-9);
    }

    #[test]
    fn growing_oscillation_into_extinction_is_catastrophic() {
        // Triangle waves with peaks 100, 110, 125, then dead flat zero.
        let mut vals = Vec::new();
        for peak in [100.0, 110.0, 125.0] {
            vals.extend([10.0, peak, 10.0]);
        }
        vals.extend([0.0; 10]);
        let rows = vals.iter().map(|v| vec![*v]).collect();
        let traj = synthetic(SystemId::BeeOnly, rows);
        assert_eq!(traj.outcome.kind, OutcomeKind::CatastrophicCollapse);
        assert!(traj.outcome.expanding_peak_run >= 2);
        assert_eq!(traj.outcome.collapse_time, Some(9.0));
    }

    #[test]
    fn monotone_decay_is_plain_extinction() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![100.0 * (-0.5 * i as f64).exp()])
            .collect();
        let traj = synthetic(SystemId::BeeOnly, rows);
        assert_eq!(traj.outcome.kind, OutcomeKind::AllExtinct);
        assert_eq!(traj.outcome.expanding_peak_run, 0);
    }

    #[test]
    fn bees_and_infected_mites_only_is_still_coexistence() {
        let rows = vec![vec![2781.9, 1618.1, 0.0, 27.2]; 40];
        let traj = synthetic(SystemId::Full, rows);
        assert_eq!(traj.outcome.kind, OutcomeKind::Coexistence);
        assert!(traj.outcome.status(Compartment::Sm).unwrap().extinct_at_end);
        assert!(traj.outcome.virus_persists());
    }

    #[test]
    fn bees_with_infected_bees_but_no_mites_is_mite_free_persistence() {
        let rows = vec![vec![7343.5, 1468.7]; 40];
        let traj = synthetic(SystemId::MiteFree, rows);
        assert_eq!(traj.outcome.kind, OutcomeKind::MiteFreePersistence);
    }
}
