//! Coupling parameters of the two-spin model and named interaction scenarios.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bilinear coupling strengths of the two-spin Hamiltonian, in energy units.
///
/// The model couples the spins through `gamma_x x.x + gamma_y y.y + gamma_z z.z
/// + gamma_xy x.y + gamma_yx y.x`, where `a.b` is the tensor product of the
/// `a` component of the first spin with the `b` component of the second.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingParams {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub gamma_xy: f64,
    pub gamma_yx: f64,
}

impl CouplingParams {
    pub fn new(gamma_x: f64, gamma_y: f64, gamma_z: f64, gamma_xy: f64, gamma_yx: f64) -> Self {
        Self {
            gamma_x,
            gamma_y,
            gamma_z,
            gamma_xy,
            gamma_yx,
        }
    }

    /// All couplings zero.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Exchange combination `gamma_x - gamma_y` (transverse x coupling of the
    /// even block / first fictitious qubit).
    pub fn gamma_plus(&self) -> f64 {
        self.gamma_x - self.gamma_y
    }

    /// Exchange combination `gamma_x + gamma_y` (transverse x coupling of the
    /// odd block / second fictitious qubit).
    pub fn gamma_minus(&self) -> f64 {
        self.gamma_x + self.gamma_y
    }

    /// Cross combination `gamma_xy + gamma_yx` (transverse y coupling of the
    /// even block / first fictitious qubit).
    pub fn gamma_cross_plus(&self) -> f64 {
        self.gamma_xy + self.gamma_yx
    }

    /// Cross combination `gamma_yx - gamma_xy` (transverse y coupling of the
    /// odd block / second fictitious qubit).
    pub fn gamma_cross_minus(&self) -> f64 {
        self.gamma_yx - self.gamma_xy
    }

    /// Transverse coupling magnitude of the even block.
    pub fn m_plus(&self) -> f64 {
        self.gamma_plus().hypot(self.gamma_cross_plus())
    }

    /// Transverse coupling magnitude of the odd block.
    pub fn m_minus(&self) -> f64 {
        self.gamma_minus().hypot(self.gamma_cross_minus())
    }

    /// True when every coupling is finite.
    pub fn is_finite(&self) -> bool {
        [
            self.gamma_x,
            self.gamma_y,
            self.gamma_z,
            self.gamma_xy,
            self.gamma_yx,
        ]
        .iter()
        .all(|g| g.is_finite())
    }
}

/// Named interaction scenarios, each characterized by one exchange strength
/// `gamma` and one cross-coupling strength `cross`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Isotropic exchange with both symmetric and antisymmetric cross terms.
    IsoExchangeDdDm,
    /// Isotropic exchange with a symmetric (dipole-like) cross term.
    IsoExchangeDd,
    /// Isotropic exchange with an antisymmetric cross term.
    IsoExchangeDm,
    /// Fully anisotropic exchange with a symmetric cross term.
    AnisoExchangeDd,
    /// Fully anisotropic exchange with an antisymmetric cross term.
    AnisoExchangeDm,
    /// Exchange interaction alone.
    ExchangeOnly,
}

impl ScenarioKind {
    /// All scenario kinds, in a stable order.
    pub fn all() -> [ScenarioKind; 6] {
        [
            ScenarioKind::IsoExchangeDdDm,
            ScenarioKind::IsoExchangeDd,
            ScenarioKind::IsoExchangeDm,
            ScenarioKind::AnisoExchangeDd,
            ScenarioKind::AnisoExchangeDm,
            ScenarioKind::ExchangeOnly,
        ]
    }

    /// Kebab-case name used by the command line and config files.
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::IsoExchangeDdDm => "iso-exchange-dd-dm",
            ScenarioKind::IsoExchangeDd => "iso-exchange-dd",
            ScenarioKind::IsoExchangeDm => "iso-exchange-dm",
            ScenarioKind::AnisoExchangeDd => "aniso-exchange-dd",
            ScenarioKind::AnisoExchangeDm => "aniso-exchange-dm",
            ScenarioKind::ExchangeOnly => "exchange-only",
        }
    }

    /// Concrete qubit-pair couplings realizing this scenario.
    ///
    /// `gamma` is the exchange strength and `cross` the cross-coupling
    /// strength. `ExchangeOnly` rejects a nonzero `cross`.
    pub fn qubit_params(&self, gamma: f64, cross: f64) -> Result<CouplingParams> {
        let p = match self {
            ScenarioKind::IsoExchangeDdDm => {
                CouplingParams::new(gamma / 2.0, gamma / 2.0, 0.0, cross, 0.0)
            }
            ScenarioKind::IsoExchangeDd => {
                CouplingParams::new(gamma / 2.0, gamma / 2.0, 0.0, cross / 2.0, cross / 2.0)
            }
            ScenarioKind::IsoExchangeDm => {
                CouplingParams::new(gamma / 2.0, gamma / 2.0, 0.0, cross / 2.0, -cross / 2.0)
            }
            ScenarioKind::AnisoExchangeDd => {
                CouplingParams::new(gamma, 0.0, 0.0, cross / 2.0, cross / 2.0)
            }
            ScenarioKind::AnisoExchangeDm => {
                CouplingParams::new(gamma, 0.0, 0.0, cross / 2.0, -cross / 2.0)
            }
            ScenarioKind::ExchangeOnly => {
                if cross != 0.0 {
                    return Err(Error::UnsupportedScenario {
                        name: self.name().to_string(),
                        reason: format!("has no cross coupling, got {cross}"),
                    });
                }
                CouplingParams::new(gamma, 0.0, 0.0, 0.0, 0.0)
            }
        };
        Ok(p)
    }

    /// Concrete qutrit-pair couplings realizing this scenario.
    ///
    /// The qutrit pair is modeled with isotropic exchange, so the anisotropic
    /// scenarios are rejected. The antisymmetric cross case keeps the first
    /// fictitious qubit uncoupled.
    pub fn qutrit_params(&self, gamma: f64, cross: f64) -> Result<CouplingParams> {
        let half = gamma / 2.0;
        let p = match self {
            ScenarioKind::ExchangeOnly => {
                if cross != 0.0 {
                    return Err(Error::UnsupportedScenario {
                        name: self.name().to_string(),
                        reason: format!("has no cross coupling, got {cross}"),
                    });
                }
                CouplingParams::new(half, half, 0.0, 0.0, 0.0)
            }
            ScenarioKind::IsoExchangeDm => {
                CouplingParams::new(half, half, 0.0, cross / 2.0, -cross / 2.0)
            }
            ScenarioKind::IsoExchangeDd => {
                CouplingParams::new(half, half, 0.0, cross / 2.0, cross / 2.0)
            }
            ScenarioKind::IsoExchangeDdDm => CouplingParams::new(half, half, 0.0, cross, 0.0),
            ScenarioKind::AnisoExchangeDd | ScenarioKind::AnisoExchangeDm => {
                return Err(Error::UnsupportedScenario {
                    name: self.name().to_string(),
                    reason: "the qutrit pair model uses isotropic exchange".to_string(),
                })
            }
        };
        Ok(p)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        ScenarioKind::all()
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::UnsupportedScenario {
                name: s.to_string(),
                reason: "unknown scenario name".to_string(),
            })
    }
}
