use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Largest chain handled by the pure-state engine (2^16 amplitudes).
pub const PURE_SITE_CAP: usize = 16;
/// Largest chain handled by the dense density-matrix engine (4^7 entries).
pub const DISSIPATIVE_SITE_CAP: usize = 7;

/// Which terms enter each half of the drive cycle.
///
/// * `Original` — stage 1 carries drive, detuning and interaction; stage 2
///   keeps detuning and interaction (drive off).
/// * `Improved` — stage 1 as in `Original`; stage 2 keeps only the
///   interaction.
/// * `Simplified` — stage 1 drops the interaction (drive and detuning only);
///   stage 2 as in `Original`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveVariant {
    Original,
    Improved,
    Simplified,
}

impl DriveVariant {
    /// Interaction present during the driven stage?
    pub fn stage_one_has_interaction(self) -> bool {
        !matches!(self, DriveVariant::Simplified)
    }

    /// Detuning present during the dark stage?
    pub fn stage_two_has_detuning(self) -> bool {
        !matches!(self, DriveVariant::Improved)
    }
}

impl std::fmt::Display for DriveVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DriveVariant::Original => write!(f, "original"),
            DriveVariant::Improved => write!(f, "improved"),
            DriveVariant::Simplified => write!(f, "simplified"),
        }
    }
}

impl std::str::FromStr for DriveVariant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(DriveVariant::Original),
            "improved" => Ok(DriveVariant::Improved),
            "simplified" => Ok(DriveVariant::Simplified),
            other => Err(format!("unknown drive variant `{other}`")),
        }
    }
}

/// Chain topology: a closed ring or an open chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Ring,
    Open,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Ring => write!(f, "ring"),
            Boundary::Open => write!(f, "open"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ring" => Ok(Boundary::Ring),
            "open" => Ok(Boundary::Open),
            other => Err(format!("unknown boundary `{other}` (expected ring or open)")),
        }
    }
}

/// The two halves of one drive cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    One,
    Two,
}

/// Physical parameters of one simulation run.
///
/// All frequencies are angular, in rad/µs; times are in µs. The Rabi
/// frequency is not stored directly: it is slaved to the stage-one duration
/// so that an unperturbed pulse is exactly a π/2 rotation, and `epsilon`
/// measures the deviation from that point (see [`ModelParams::omega`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub variant: DriveVariant,
    /// Number of two-level atoms.
    pub sites: usize,
    /// Drive-strength perturbation ε, rad/µs.
    pub epsilon: f64,
    /// Laser detuning Δ, rad/µs.
    pub delta: f64,
    /// Nearest-neighbour interaction V, rad/µs.
    pub v: f64,
    /// Duration of the driven stage, µs.
    pub t1: f64,
    /// Duration of the dark stage, µs.
    pub t2: f64,
    pub boundary: Boundary,
    /// Single-atom decay rate Γ, rad/µs. `None` selects pure-state dynamics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl ModelParams {
    /// Parameters at the unperturbed operating point: ε = Δ = V = 0,
    /// T₁ = 1 µs, T₂ = 10 µs, ring topology, no decay.
    pub fn new(variant: DriveVariant, sites: usize) -> Self {
        ModelParams {
            variant,
            sites,
            epsilon: 0.0,
            delta: 0.0,
            v: 0.0,
            t1: 1.0,
            t2: 10.0,
            boundary: Boundary::Ring,
            gamma: None,
        }
    }

    /// Rabi frequency Ω = π/(2 T₁) + ε.
    pub fn omega(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.t1) + self.epsilon
    }

    /// Hilbert-space dimension 2^L.
    pub fn dim(&self) -> usize {
        1usize << self.sites
    }

    /// Check ranges and size caps. Call before building any operator.
    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(CoreError::InvalidParams("sites must be at least 1".into()));
        }
        let cap = if self.gamma.is_some() { DISSIPATIVE_SITE_CAP } else { PURE_SITE_CAP };
        let context = if self.gamma.is_some() { "density-matrix evolution" } else { "pure-state evolution" };
        if self.sites > cap {
            return Err(CoreError::SizeCap { l: self.sites, cap, context });
        }
        if !(self.t1 > 0.0) || !self.t1.is_finite() {
            return Err(CoreError::InvalidParams(format!("t1 must be positive and finite, got {}", self.t1)));
        }
        if self.t2 < 0.0 || !self.t2.is_finite() {
            return Err(CoreError::InvalidParams(format!("t2 must be non-negative and finite, got {}", self.t2)));
        }
        for (name, value) in [("epsilon", self.epsilon), ("delta", self.delta), ("v", self.v)] {
            if !value.is_finite() {
                return Err(CoreError::InvalidParams(format!("{name} must be finite, got {value}")));
            }
        }
        if let Some(g) = self.gamma {
            if g < 0.0 || !g.is_finite() {
                return Err(CoreError::InvalidParams(format!("gamma must be non-negative and finite, got {g}")));
            }
        }
        Ok(())
    }
}

/// Van der Waals coupling V = C₆ / R⁶ for interatomic distance `r_um` (µm)
/// and coefficient `c6` (rad·µm⁶/µs). The distance must be strictly positive.
pub fn vdw_coupling(c6: f64, r_um: f64) -> Result<f64> {
    if !(r_um > 0.0) || !r_um.is_finite() {
        return Err(CoreError::InvalidParams(format!(
            "interatomic distance must be positive and finite, got {r_um}"
        )));
    }
    Ok(c6 / r_um.powi(6))
}
