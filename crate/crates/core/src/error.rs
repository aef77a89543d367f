use crate::state::SystemId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("parameter file: {0}")]
    ParamFile(String),

    #[error("state dimension mismatch for {sys}: expected {expected}, got {got}")]
    DimensionMismatch {
        sys: SystemId,
        expected: usize,
        got: usize,
    },

    #[error("invalid integration config: {0}")]
    InvalidConfig(&'static str),

    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),

    #[error("step size underflow at t={t} (h={h}): problem too stiff or state blowing up")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t={t}")]
    NonFiniteState { t: f64 },

    #[error("integration exceeded {steps} steps at t={t}: horizon/tolerance combination too expensive")]
    TooManySteps { t: f64, steps: u64 },

    #[error("trajectory too short to classify: {0}")]
    WindowTooShort(&'static str),

    #[error("analytic Jacobian for {sys}: {reason}")]
    AnalyticJacobian { sys: SystemId, reason: String },

    #[error("jacobian for {sys} at a singular point: {reason}")]
    SingularPoint { sys: SystemId, reason: String },

    #[error("unknown system id {0:?}")]
    UnknownSystem(String),

    #[error("unknown preset id {0:?}")]
    UnknownPreset(String),

    #[error("unknown parameter key {0:?}")]
    UnknownParamKey(String),

    #[error("sweep spec: {0}")]
    SweepSpec(String),

    #[error("hopf scan: {0}")]
    HopfScan(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
