use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

/// Which model is being simulated or analyzed. Each id fixes the state
/// dimension and the compartments present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemId {
    /// Bees and mites, healthy and infected: 4-D (S_h, I_h, S_m, I_m).
    Full,
    /// No virus anywhere: 2-D (S_h, S_m).
    VirusFree,
    /// No mites: 2-D (S_h, I_h).
    MiteFree,
    /// Healthy mites gone, infected mites remain: 3-D (S_h, I_h, I_m).
    HealthyMiteFree,
    /// Healthy bees alone: 1-D (S_h).
    BeeOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Compartment {
    Sh,
    Ih,
    Sm,
    Im,
}

impl Compartment {
    pub fn label(self) -> &'static str {
        match self {
            Compartment::Sh => "S_h",
            Compartment::Ih => "I_h",
            Compartment::Sm => "S_m",
            Compartment::Im => "I_m",
        }
    }

    /// Slot in the full 4-vector (S_h, I_h, S_m, I_m).
    pub fn full_index(self) -> usize {
        match self {
            Compartment::Sh => 0,
            Compartment::Ih => 1,
            Compartment::Sm => 2,
            Compartment::Im => 3,
        }
    }
}

impl fmt::Display for Compartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl SystemId {
    pub fn dim(self) -> usize {
        self.compartments().len()
    }

    /// Compartment layout of this system's state vector, in order.
    pub fn compartments(self) -> &'static [Compartment] {
        use Compartment::*;
        match self {
            SystemId::Full => &[Sh, Ih, Sm, Im],
            SystemId::VirusFree => &[Sh, Sm],
            SystemId::MiteFree => &[Sh, Ih],
            SystemId::HealthyMiteFree => &[Sh, Ih, Im],
            SystemId::BeeOnly => &[Sh],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SystemId::Full => "full",
            SystemId::VirusFree => "virus-free",
            SystemId::MiteFree => "mite-free",
            SystemId::HealthyMiteFree => "healthy-mite-free",
            SystemId::BeeOnly => "bee-only",
        }
    }

    pub fn all() -> [SystemId; 5] {
        [
            SystemId::Full,
            SystemId::VirusFree,
            SystemId::MiteFree,
            SystemId::HealthyMiteFree,
            SystemId::BeeOnly,
        ]
    }

    /// Restrict a full state to this system's compartments.
    pub fn project(self, state: &State) -> SysVec {
        let mut v = SysVec::zeros(self.dim());
        for (slot, comp) in self.compartments().iter().enumerate() {
            v[slot] = state.get(*comp);
        }
        v
    }

    /// Lift a state vector in this system's layout to a full state, absent
    /// compartments pinned to zero.
    pub fn embed(self, x: &[f64]) -> Result<State> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                sys: self,
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut s = State::zero();
        for (slot, comp) in self.compartments().iter().enumerate() {
            s.set(*comp, x[slot]);
        }
        Ok(s)
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SystemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "full" => Ok(SystemId::Full),
            "virus-free" | "virusfree" | "hm" => Ok(SystemId::VirusFree),
            "mite-free" | "mitefree" | "hv" => Ok(SystemId::MiteFree),
            "healthy-mite-free" | "healthymitefree" | "hvmi" => Ok(SystemId::HealthyMiteFree),
            "bee-only" | "beeonly" | "h" => Ok(SystemId::BeeOnly),
            _ => Err(Error::UnknownSystem(s.to_string())),
        }
    }
}

/// Full population state: healthy/infected bees, healthy/infected mites.
/// Components are individuals and must be nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub s_h: f64,
    pub i_h: f64,
    pub s_m: f64,
    pub i_m: f64,
}

impl State {
    pub fn new(s_h: f64, i_h: f64, s_m: f64, i_m: f64) -> Self {
        State { s_h, i_h, s_m, i_m }
    }

    pub fn zero() -> Self {
        State::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn get(&self, c: Compartment) -> f64 {
        match c {
            Compartment::Sh => self.s_h,
            Compartment::Ih => self.i_h,
            Compartment::Sm => self.s_m,
            Compartment::Im => self.i_m,
        }
    }

    pub fn set(&mut self, c: Compartment, v: f64) {
        match c {
            Compartment::Sh => self.s_h = v,
            Compartment::Ih => self.i_h = v,
            Compartment::Sm => self.s_m = v,
            Compartment::Im => self.i_m = v,
        }
    }

    /// Total bees.
    pub fn n_h(&self) -> f64 {
        self.s_h + self.i_h
    }

    /// Total mites.
    pub fn n_m(&self) -> f64 {
        self.s_m + self.i_m
    }

    /// Mite-unit total N = c*N_h + N_m used by the attractor bound.
    pub fn weighted_total(&self, c: f64) -> f64 {
        c * self.n_h() + self.n_m()
    }

    /// Composite infection load I = c*I_h + I_m.
    pub fn disease_load(&self, c: f64) -> f64 {
        c * self.i_h + self.i_m
    }

    pub fn is_finite(&self) -> bool {
        self.s_h.is_finite() && self.i_h.is_finite() && self.s_m.is_finite() && self.i_m.is_finite()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.s_h >= 0.0 && self.i_h >= 0.0 && self.s_m >= 0.0 && self.i_m >= 0.0
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s_h, self.i_h, self.s_m, self.i_m]
    }
}

/// Small inline vector holding a state (or derivative) in some system's
/// layout. Avoids heap traffic in the integrator's hot loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SysVec {
    data: [f64; 4],
    len: usize,
}

impl SysVec {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= 4);
        SysVec {
            data: [0.0; 4],
            len,
        }
    }

    pub fn from_slice(x: &[f64]) -> Self {
        assert!(x.len() <= 4);
        let mut v = SysVec::zeros(x.len());
        v.data[..x.len()].copy_from_slice(x);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl Deref for SysVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.data[..self.len]
    }
}

impl DerefMut for SysVec {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.data[..self.len]
    }
}

impl Serialize for SysVec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(self.iter())
    }
}
