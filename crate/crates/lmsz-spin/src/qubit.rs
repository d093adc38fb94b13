//! Two-qubit sweep analysis: parity-block decomposition, closed-form
//! transition probabilities, entanglement conditions, and scenario
//! classification from observed probabilities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{CMat, C_I};
use crate::params::{CouplingParams, ScenarioKind};

/// Default probability tolerance for [`classify_interactions`].
pub const DEFAULT_CLASSIFY_TOLERANCE: f64 = 1e-3;

/// Parity label of a two-qubit block under `sigma_z (x) sigma_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockTag {
    /// Even block, spanned by (++, --).
    Plus,
    /// Odd block, spanned by (+-, -+).
    Minus,
}

impl BlockTag {
    pub fn name(&self) -> &'static str {
        match self {
            BlockTag::Plus => "plus",
            BlockTag::Minus => "minus",
        }
    }
}

/// One 2x2 parity block of the two-qubit Hamiltonian.
///
/// In its own basis the block reads
/// `omega sigma_z + gamma sigma_x + gamma_cross sigma_y + offset 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveBlock {
    pub tag: BlockTag,
    /// Field combination on the block's `sigma_z` (sum of the spin fields for
    /// the even block, difference for the odd one).
    pub omega: f64,
    /// Transverse x coupling.
    pub gamma: f64,
    /// Transverse y coupling.
    pub gamma_cross: f64,
    /// Identity shift from the longitudinal coupling.
    pub offset: f64,
    /// Pair-basis labels spanning the block.
    pub basis: [&'static str; 2],
    /// Indices of those labels in the 4-dim pair basis.
    pub indices: [usize; 2],
}

impl EffectiveBlock {
    /// Transverse coupling magnitude.
    pub fn m(&self) -> f64 {
        self.gamma.hypot(self.gamma_cross)
    }

    /// Rotation angle about z that turns the transverse coupling into a pure
    /// `+m sigma_x` term. Zero when the block is uncoupled.
    pub fn rotation_angle(&self) -> f64 {
        if self.m() == 0.0 {
            0.0
        } else {
            (-self.gamma_cross).atan2(self.gamma)
        }
    }

    /// Block matrix with its stored field value.
    pub fn matrix(&self) -> CMat {
        self.matrix_with_field(self.omega)
    }

    /// Block matrix with the field replaced by `omega` (for sweeps).
    pub fn matrix_with_field(&self, omega: f64) -> CMat {
        let d = Complex64::new(omega + self.offset, 0.0);
        let dm = Complex64::new(-omega + self.offset, 0.0);
        let off = Complex64::new(self.gamma, 0.0) - C_I * Complex64::new(self.gamma_cross, 0.0);
        CMat::from_row_slice(2, 2, &[d, off, off.conj(), dm])
    }
}

/// Splits the two-qubit Hamiltonian into its even and odd parity blocks.
pub fn decompose_qubit_blocks(p: &CouplingParams, omega1: f64, omega2: f64) -> [EffectiveBlock; 2] {
    [
        EffectiveBlock {
            tag: BlockTag::Plus,
            omega: omega1 + omega2,
            gamma: p.gamma_plus(),
            gamma_cross: p.gamma_cross_plus(),
            offset: p.gamma_z,
            basis: ["++", "--"],
            indices: [0, 3],
        },
        EffectiveBlock {
            tag: BlockTag::Minus,
            omega: omega1 - omega2,
            gamma: p.gamma_minus(),
            gamma_cross: p.gamma_cross_minus(),
            offset: -p.gamma_z,
            basis: ["+-", "-+"],
            indices: [1, 2],
        },
    ]
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidSweepRate { alpha });
    }
    Ok(())
}

/// Dimensionless sweep exponent `2 pi m^2 / alpha`.
pub fn lambda_exponent(m: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 * std::f64::consts::PI * m * m / alpha)
}

/// Asymptotic two-level transition probability `1 - exp(-2 pi m^2 / alpha)`
/// for a full sweep through one avoided crossing.
pub fn lmsz_probability(m: f64, alpha: f64) -> Result<f64> {
    Ok(1.0 - (-lambda_exponent(m, alpha)?).exp())
}

/// Transition probability as a function of the sweep exponent directly.
pub fn probability_from_lambda(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::NegativeExponent { value: lambda });
    }
    Ok(1.0 - (-lambda).exp())
}

/// Asymptotic transition probabilities `(P_plus, P_minus)` of the two parity
/// blocks for couplings `p` at sweep rate `alpha`.
pub fn asymptotic_pair(p: &CouplingParams, alpha: f64) -> Result<(f64, f64)> {
    Ok((
        lmsz_probability(p.m_plus(), alpha)?,
        lmsz_probability(p.m_minus(), alpha)?,
    ))
}

/// Asymptotic probabilities of a named scenario with exchange strength
/// `gamma` and cross strength `cross`.
pub fn scenario_pair(kind: ScenarioKind, gamma: f64, cross: f64, alpha: f64) -> Result<(f64, f64)> {
    let p = kind.qubit_params(gamma, cross)?;
    asymptotic_pair(&p, alpha)
}

/// Transition probability for a sweep that starts exactly on the crossing,
/// `(1 - exp(-lambda / 2)) / 2`. Saturates at 1/2 instead of 1.
pub fn half_crossing_probability(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::NegativeExponent { value: lambda });
    }
    Ok(0.5 * (1.0 - (-lambda / 2.0).exp()))
}

/// Concurrence reached asymptotically by a block that started in one diabatic
/// state and ends with transition probability `p`: `2 sqrt(p (1 - p))`.
pub fn asymptotic_concurrence(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    Ok(2.0 * (p * (1.0 - p)).sqrt())
}

/// Sweep rate at which a block with transverse couplings `(gamma, cross)`
/// reaches transition probability 1/2, and with it maximal concurrence:
/// `alpha* = 2 pi (gamma^2 + cross^2) / ln 2`.
pub fn max_entanglement_slope(gamma: f64, cross: f64) -> Result<f64> {
    let m2 = gamma * gamma + cross * cross;
    if m2 == 0.0 {
        return Err(Error::ZeroTransverseMagnitude);
    }
    Ok(2.0 * std::f64::consts::PI * m2 / std::f64::consts::LN_2)
}

/// One scenario consistent with an observed probability pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatch {
    pub kind: ScenarioKind,
    /// Inferred coupling magnitudes, by name.
    pub inferred: Vec<(String, f64)>,
    /// True when the observation pins only a combination of couplings, not
    /// each one individually.
    pub degenerate: bool,
}

impl ScenarioMatch {
    /// Look up one inferred value by name.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.inferred
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

fn invert_probability(p: f64, alpha: f64) -> f64 {
    // m^2 realizing transition probability p at rate alpha; the `+ 0.0`
    // keeps p = 0 from producing a negative zero
    -alpha * (1.0 - p).ln() / (2.0 * std::f64::consts::PI) + 0.0
}

/// Determines which scenarios are consistent with an observed probability
/// pair `(p_plus, p_minus)` at sweep rate `alpha`, inferring coupling
/// magnitudes for each. `tolerance` is compared on probabilities.
pub fn classify_interactions(
    observed: (f64, f64),
    alpha: f64,
    tolerance: f64,
) -> Result<Vec<ScenarioMatch>> {
    check_alpha(alpha)?;
    let (pp, pm) = observed;
    for p in [pp, pm] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange { value: p });
        }
    }
    if !(tolerance >= 0.0) || !tolerance.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be non-negative and finite, got {tolerance}"
        )));
    }
    let m2p = invert_probability(pp, alpha);
    let m2m = invert_probability(pm, alpha);
    let mut out = Vec::new();
    let push = |out: &mut Vec<ScenarioMatch>,
                kind: ScenarioKind,
                inferred: Vec<(&str, f64)>,
                degenerate: bool| {
        if inferred.iter().all(|(_, v)| v.is_finite()) {
            out.push(ScenarioMatch {
                kind,
                inferred: inferred
                    .into_iter()
                    .map(|(n, v)| (n.to_string(), v))
                    .collect(),
                degenerate,
            });
        }
    };

    // exchange only: both block couplings free
    push(
        &mut out,
        ScenarioKind::ExchangeOnly,
        vec![("gamma_plus", m2p.sqrt()), ("gamma_minus", m2m.sqrt())],
        false,
    );
    // isotropic + antisymmetric cross: even block fully decoupled
    if pp <= tolerance {
        push(
            &mut out,
            ScenarioKind::IsoExchangeDm,
            vec![("m_minus", m2m.sqrt())],
            true,
        );
    }
    // isotropic + symmetric cross: even block sees only the cross term
    push(
        &mut out,
        ScenarioKind::IsoExchangeDd,
        vec![("cross", m2p.sqrt()), ("gamma", m2m.sqrt())],
        false,
    );
    // isotropic + both cross terms: odd block sees the joint magnitude
    if pm >= pp - tolerance {
        push(
            &mut out,
            ScenarioKind::IsoExchangeDdDm,
            vec![
                ("cross", m2p.sqrt()),
                ("gamma", (m2m - m2p).max(0.0).sqrt()),
            ],
            false,
        );
    }
    // anisotropic + symmetric cross: even block sees the joint magnitude
    if pp >= pm - tolerance {
        push(
            &mut out,
            ScenarioKind::AnisoExchangeDd,
            vec![
                ("gamma", m2m.sqrt()),
                ("cross", (m2p - m2m).max(0.0).sqrt()),
            ],
            false,
        );
    }
    // anisotropic + antisymmetric cross: odd block sees the joint magnitude
    if pm >= pp - tolerance {
        push(
            &mut out,
            ScenarioKind::AnisoExchangeDm,
            vec![
                ("gamma", m2p.sqrt()),
                ("cross", (m2m - m2p).max(0.0).sqrt()),
            ],
            false,
        );
    }
    Ok(out)
}
