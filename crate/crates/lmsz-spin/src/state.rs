//! State vectors over a labeled basis.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `| ||psi|| - 1 |` accepted by state constructors.
pub const NORM_TOL: f64 = 1e-10;

/// A normalized pure state with basis labels attached.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    labels: Vec<String>,
    amplitudes: DVector<Complex64>,
}

impl QuantumState {
    /// Builds a state from amplitudes, requiring normalization within [`NORM_TOL`].
    pub fn new<S: Into<String>>(labels: Vec<S>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                left: labels.len(),
                right: amplitudes.len(),
            });
        }
        let v = DVector::from_vec(amplitudes);
        let dev = (v.norm() - 1.0).abs();
        if dev > NORM_TOL {
            return Err(Error::UnnormalizedState { deviation: dev });
        }
        Ok(Self {
            labels,
            amplitudes: v,
        })
    }

    /// Basis state selected by label.
    pub fn from_label<S: Into<String>>(labels: Vec<S>, which: &str) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let idx = labels
            .iter()
            .position(|l| l == which)
            .ok_or_else(|| Error::UnknownLabel {
                label: which.to_string(),
            })?;
        let mut amps = vec![Complex64::new(0.0, 0.0); labels.len()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self {
            labels,
            amplitudes: DVector::from_vec(amps),
        })
    }

    /// Internal constructor bypassing the norm check, for propagated states
    /// whose norm drift is reported rather than enforced.
    pub(crate) fn from_raw_parts(labels: Vec<String>, amplitudes: DVector<Complex64>) -> Self {
        Self { labels, amplitudes }
    }

    /// Dimension of the state space.
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Ordered basis labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Amplitude vector.
    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Index of a basis label.
    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_string(),
            })
    }

    /// Population of one basis state.
    pub fn population(&self, label: &str) -> Result<f64> {
        Ok(self.amplitudes[self.index_of(label)?].norm_sqr())
    }

    /// All basis populations, in label order.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Euclidean norm of the amplitude vector.
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Squared overlap `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm_sqr())
    }
}
