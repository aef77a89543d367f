//! Simulation and analysis toolkit for a honeybee colony infested by
//! parasitic mites that vector a bee virus.
//!
//! The model tracks healthy and virus-infected bees (`S_h`, `I_h`) and
//! healthy and virus-carrying mites (`S_m`, `I_m`). Colony recruitment has a
//! sigmoidal brood-survival term, so small colonies sit below a rescue
//! threshold and die out on their own; mites parasitize bees and transmit the
//! virus both on contact and while riding infected hosts.
//!
//! The crate provides:
//! - right-hand sides for the full 4-D system and its four invariant-set
//!   subsystems ([`rhs`]),
//! - every closed-form threshold of the survival/persistence theory
//!   ([`thresholds`]),
//! - an adaptive embedded Runge-Kutta integrator with extinction and bound
//!   events ([`integrate`]),
//! - equilibrium location (closed-form and numeric), Jacobians, stability
//!   classification, and a Hopf-boundary scanner ([`equilibria`]),
//! - mechanical evaluation of the persistence/extinction theorems and
//!   cross-validation against simulated trajectories ([`theorems`]),
//! - curated scenario presets and parameter sweeps ([`scenarios`]).

pub mod classify;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod params;
pub mod report;
pub mod rhs;
pub mod scenarios;
pub mod state;
pub mod theorems;
pub mod thresholds;

pub use classify::{classify_outcome, CompartmentStatus, OutcomeKind, OutcomeLabel};
pub use error::{Error, Result};
pub use integrate::{integrate, Event, EventKind, IntegrationConfig, Trajectory};
pub use params::{derive_params, Params, ParamsRaw};
pub use report::{
    write_campaign_csv, write_events_csv, write_json, write_reproduce, write_sweep,
    write_trajectory_csv,
};
pub use rhs::{rhs, EPS_DENOM};
pub use scenarios::{
    preset, reproduce, sweep, ReproduceReport, ScenarioPreset, SweepAxis, SweepCell, SweepReport,
    SweepSpec, X0Rule, PRESET_IDS,
};
pub use state::{Compartment, State, SysVec, SystemId};
pub use thresholds::{thresholds, Thresholds};
