//! Sweep protocol: rate normalization, crossing window, and timing.
//!
//! The rate parameter `alpha` is defined so that each avoided crossing in the
//! problem is an ideal two-level sweep with transition probability
//! `1 - exp(-2 pi m^2 / alpha)`, where `m` is the transverse coupling
//! magnitude of that crossing. Equivalently, `alpha` is the growth rate of
//! the diabatic energy separation of each two-level block.
//!
//! That normalization fixes the realized field ramp:
//!
//! * qubit pair — the blocks see the first-spin field directly on `sigma_z`,
//!   so their separation grows at twice the field coefficient; the field
//!   coefficient ramps as `(alpha / 2) t`.
//! * qutrit pair — the fictitious two-level systems see half the field (and
//!   spin-1 matrix elements halve the transverse couplings, which the
//!   probability calibration absorbs as well); the field coefficient ramps as
//!   `(alpha / 4) t`. The same rate applies to the isolated three-level
//!   sweep, whose outer levels see the field at full strength but cross
//!   pairwise through the middle level.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default adiabaticity margin used when sizing crossing windows.
pub const DEFAULT_WINDOW_FACTOR: f64 = 50.0;

/// Which physical pair model a sweep drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    QubitPair,
    QutritPair,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::QubitPair => "qubits",
            SystemKind::QutritPair => "qutrits",
        }
    }

    /// Hilbert-space dimension of the pair.
    pub fn dim(&self) -> usize {
        match self {
            SystemKind::QubitPair => 4,
            SystemKind::QutritPair => 9,
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qubits" | "qubit" => Ok(SystemKind::QubitPair),
            "qutrits" | "qutrit" => Ok(SystemKind::QutritPair),
            other => Err(Error::InvalidConfig(format!("unknown system {other:?}"))),
        }
    }
}

/// Whether the field crosses zero inside the window or starts on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossingMode {
    /// Sweep over `[-T, T]`, passing through the crossing.
    Full,
    /// Sweep over `[0, T]`, starting exactly at the crossing.
    Half,
}

impl CrossingMode {
    pub fn name(&self) -> &'static str {
        match self {
            CrossingMode::Full => "full",
            CrossingMode::Half => "half",
        }
    }
}

impl fmt::Display for CrossingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CrossingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(CrossingMode::Full),
            "half" => Ok(CrossingMode::Half),
            other => Err(Error::InvalidConfig(format!(
                "unknown crossing mode {other:?}"
            ))),
        }
    }
}

/// A linear field sweep through the avoided crossings of a pair model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepProtocol {
    /// Normalized sweep rate (diabatic separation growth rate of each block).
    pub alpha: f64,
    /// Full or half crossing.
    pub mode: CrossingMode,
    /// Window half-width `T`.
    pub half_width: f64,
    /// The second spin's field is held at zero during the sweep.
    pub second_field_off: bool,
}

impl SweepProtocol {
    /// Builds a protocol with an explicit window half-width.
    pub fn new(alpha: f64, mode: CrossingMode, half_width: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidSweepRate { alpha });
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "window half-width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Self {
            alpha,
            mode,
            half_width,
            second_field_off: true,
        })
    }

    /// Builds a protocol whose window is sized from an adiabaticity margin.
    ///
    /// The half-width is chosen so the block detuning at the window edge
    /// exceeds the largest transverse coupling `m_max` by `window_factor`,
    /// with a floor of `window_factor` natural crossing times for small
    /// couplings: `T = max(W m_max / s, W / sqrt(s))` with `s` the block
    /// separation slope of `kind`.
    pub fn with_window_factor(
        alpha: f64,
        mode: CrossingMode,
        window_factor: f64,
        m_max: f64,
        kind: SystemKind,
    ) -> Result<Self> {
        if !(window_factor > 0.0) || !window_factor.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "window factor must be positive and finite, got {window_factor}"
            )));
        }
        if !(m_max >= 0.0) || !m_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "coupling magnitude must be non-negative and finite, got {m_max}"
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidSweepRate { alpha });
        }
        let slope = block_separation_slope(alpha, kind);
        let t = f64::max(window_factor * m_max / slope, window_factor / slope.sqrt());
        Self::new(alpha, mode, t)
    }

    /// Realized ramp rate of the first-spin field coefficient for `kind`.
    pub fn ramp_rate(&self, kind: SystemKind) -> f64 {
        match kind {
            SystemKind::QubitPair => self.alpha / 2.0,
            SystemKind::QutritPair => self.alpha / 4.0,
        }
    }

    /// Start and end times of the sweep window.
    pub fn time_range(&self) -> (f64, f64) {
        match self.mode {
            CrossingMode::Full => (-self.half_width, self.half_width),
            CrossingMode::Half => (0.0, self.half_width),
        }
    }

    /// Dimensionless sweep exponent `2 pi m^2 / alpha` of a block with
    /// transverse magnitude `m`.
    pub fn lambda(&self, m: f64) -> f64 {
        2.0 * std::f64::consts::PI * m * m / self.alpha
    }
}

/// Growth rate of the diabatic energy separation of each two-level block.
pub fn block_separation_slope(alpha: f64, kind: SystemKind) -> f64 {
    match kind {
        SystemKind::QubitPair => alpha,
        SystemKind::QutritPair => alpha / 4.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ramp_rates_follow_the_calibration() {
        let s = SweepProtocol::new(2.0, CrossingMode::Full, 10.0).unwrap();
        assert_abs_diff_eq!(s.ramp_rate(SystemKind::QubitPair), 1.0);
        assert_abs_diff_eq!(s.ramp_rate(SystemKind::QutritPair), 0.5);
        // qubit blocks: separation slope is twice the ramp rate
        assert_abs_diff_eq!(block_separation_slope(2.0, SystemKind::QubitPair), 2.0);
        // qutrit fictitious blocks: separation slope equals the ramp rate
        assert_abs_diff_eq!(block_separation_slope(2.0, SystemKind::QutritPair), 0.5);
    }

    #[test]
    fn lambda_is_the_two_level_exponent() {
        let s = SweepProtocol::new(1.0, CrossingMode::Full, 10.0).unwrap();
        assert_abs_diff_eq!(s.lambda(1.0), 2.0 * std::f64::consts::PI, epsilon = 1e-14);
        assert_abs_diff_eq!(s.lambda(0.0), 0.0);
    }

    #[test]
    fn window_grows_with_margin_and_coupling() {
        let a = SweepProtocol::with_window_factor(
            1.0,
            CrossingMode::Full,
            50.0,
            1.0,
            SystemKind::QubitPair,
        )
        .unwrap();
        let b = SweepProtocol::with_window_factor(
            1.0,
            CrossingMode::Full,
            100.0,
            1.0,
            SystemKind::QubitPair,
        )
        .unwrap();
        assert!(b.half_width > a.half_width);
        assert_abs_diff_eq!(a.half_width, 50.0);
        // small couplings fall back to the crossing-time floor
        let c = SweepProtocol::with_window_factor(
            4.0,
            CrossingMode::Full,
            50.0,
            0.0,
            SystemKind::QubitPair,
        )
        .unwrap();
        assert_abs_diff_eq!(c.half_width, 25.0);
    }

    #[test]
    fn invalid_rates_and_windows_are_rejected() {
        assert!(SweepProtocol::new(0.0, CrossingMode::Full, 1.0).is_err());
        assert!(SweepProtocol::new(-1.0, CrossingMode::Full, 1.0).is_err());
        assert!(SweepProtocol::new(1.0, CrossingMode::Full, 0.0).is_err());
        assert!(SweepProtocol::new(f64::NAN, CrossingMode::Full, 1.0).is_err());
    }

    #[test]
    fn half_crossing_window_starts_at_zero() {
        let s = SweepProtocol::new(1.0, CrossingMode::Half, 7.0).unwrap();
        assert_eq!(s.time_range(), (0.0, 7.0));
        let f = SweepProtocol::new(1.0, CrossingMode::Full, 7.0).unwrap();
        assert_eq!(f.time_range(), (-7.0, 7.0));
    }

    #[test]
    fn names_parse_round_trip() {
        assert_eq!(
            "qubits".parse::<SystemKind>().unwrap(),
            SystemKind::QubitPair
        );
        assert_eq!(
            "QUTRIT".parse::<SystemKind>().unwrap(),
            SystemKind::QutritPair
        );
        assert_eq!("half".parse::<CrossingMode>().unwrap(), CrossingMode::Half);
        assert!("diagonal".parse::<CrossingMode>().is_err());
    }
}
