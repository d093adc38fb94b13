//! Unitary time evolution through the sweep: an exponential-midpoint stepper
//! with Richardson step control, dense uniform sampling, and asymptotic
//! estimation from the sample tail.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    qubit_coupling_matrix, qubit_ramp_matrix, qutrit_coupling_matrix, qutrit_ramp_matrix,
};
use crate::operators::{
    hermiticity_deviation, label_z_weight, pauli_operators, qubit_pair_labels, qutrit_pair_labels,
    spin1_operators, CMat,
};
use crate::params::CouplingParams;
use crate::qubit::{decompose_qubit_blocks, EffectiveBlock};
use crate::qutrit::{ThreeLevelReduction, FIVE_DIM_INDICES, FOUR_DIM_INDICES, FOUR_DIM_LABELS};
use crate::state::QuantumState;
use crate::sweep::{SweepProtocol, SystemKind};

type CVec = DVector<Complex64>;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;
pub const DEFAULT_SAMPLE_COUNT: usize = 1001;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;
pub const DEFAULT_DRIFT_THRESHOLD: f64 = 0.01;

/// Relative tolerance of the per-evaluation Hermiticity check.
const RUNTIME_HERMITICITY_TOL: f64 = 1e-9;

/// A linearly swept Hamiltonian `H(t) = constant + rate * t * ramp` with
/// basis labels attached.
#[derive(Debug, Clone)]
pub struct SweepHamiltonian {
    labels: Vec<String>,
    constant: CMat,
    ramp: CMat,
    rate: f64,
}

impl SweepHamiltonian {
    /// Builds a sweep generator from its constant and ramp parts, validating
    /// shapes and Hermiticity of both.
    pub fn new<S: Into<String>>(
        labels: Vec<S>,
        constant: CMat,
        ramp: CMat,
        rate: f64,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if constant.nrows() != n || constant.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: constant.nrows(),
                right: n,
            });
        }
        if ramp.nrows() != n || ramp.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: ramp.nrows(),
                right: n,
            });
        }
        for part in [&constant, &ramp] {
            let dev = hermiticity_deviation(part);
            if dev > 1e-12 {
                return Err(Error::NonHermitian { max_dev: dev });
            }
        }
        if !rate.is_finite() {
            return Err(Error::InvalidSweepRate { alpha: rate });
        }
        Ok(Self {
            labels,
            constant,
            ramp,
            rate,
        })
    }

    /// Test hook: build without validation, so runtime detection of a
    /// non-Hermitian generator can be exercised.
    #[doc(hidden)]
    pub fn new_unchecked<S: Into<String>>(
        labels: Vec<S>,
        constant: CMat,
        ramp: CMat,
        rate: f64,
    ) -> Self {
        Self {
            labels: labels.into_iter().map(Into::into).collect(),
            constant,
            ramp,
            rate,
        }
    }

    /// Full two-qubit sweep generator for couplings `p` under `sweep`.
    pub fn qubit_pair(p: &CouplingParams, sweep: &SweepProtocol) -> Result<Self> {
        Self::new(
            qubit_pair_labels(),
            qubit_coupling_matrix(p),
            qubit_ramp_matrix(),
            sweep.ramp_rate(SystemKind::QubitPair),
        )
    }

    /// Full two-qutrit sweep generator for couplings `p` under `sweep`.
    pub fn qutrit_pair(p: &CouplingParams, sweep: &SweepProtocol) -> Result<Self> {
        Self::new(
            qutrit_pair_labels(),
            qutrit_coupling_matrix(p)?,
            qutrit_ramp_matrix(),
            sweep.ramp_rate(SystemKind::QutritPair),
        )
    }

    /// 2x2 sweep generator of one qubit parity block (second field off).
    pub fn qubit_block(block: &EffectiveBlock, sweep: &SweepProtocol) -> Result<Self> {
        let s = pauli_operators();
        let constant = block.matrix_with_field(0.0);
        Self::new(
            block.basis.to_vec(),
            constant,
            s.z.data().clone(),
            sweep.ramp_rate(SystemKind::QubitPair),
        )
    }

    /// Isolated three-level sweep generator defined by a reduction's named
    /// parameters.
    pub fn three_level(r: &ThreeLevelReduction, sweep: &SweepProtocol) -> Result<Self> {
        let s = spin1_operators();
        Self::new(
            r.ladder.to_vec(),
            r.matrix(0.0),
            s.z.data().clone(),
            sweep.ramp_rate(SystemKind::QutritPair),
        )
    }

    /// Generator matrix at time `t`.
    pub fn at(&self, t: f64) -> CMat {
        &self.constant + &self.ramp * Complex64::new(self.rate * t, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Numerical controls for [`propagate`] and [`propagate_blockwise`].
#[derive(Debug, Clone)]
pub struct PropagationConfig {
    /// Local error tolerance of the adaptive stepper.
    pub tolerance: f64,
    /// First trial step; a fraction of the window when unset.
    pub initial_step: Option<f64>,
    /// Step budget before the integration aborts.
    pub max_steps: usize,
    /// Number of uniformly spaced samples recorded, endpoints included.
    pub sample_count: usize,
    /// Fraction of trailing samples used for asymptotic estimates.
    pub tail_fraction: f64,
    /// Segment-drift threshold above which an estimate is flagged as not
    /// converged.
    pub drift_threshold: f64,
    /// Run with this fixed step and no error control (convergence studies).
    pub fixed_step: Option<f64>,
    /// Integration window; [`propagate`] requires it, blockwise derives it
    /// from the sweep when unset.
    pub window: Option<(f64, f64)>,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            initial_step: None,
            max_steps: DEFAULT_MAX_STEPS,
            sample_count: DEFAULT_SAMPLE_COUNT,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            drift_threshold: DEFAULT_DRIFT_THRESHOLD,
            fixed_step: None,
            window: None,
        }
    }
}

impl PropagationConfig {
    /// Default controls over the window of `sweep`.
    pub fn for_sweep(sweep: &SweepProtocol) -> Self {
        Self {
            window: Some(sweep.time_range()),
            ..Self::default()
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_window(mut self, t0: f64, t1: f64) -> Self {
        self.window = Some((t0, t1));
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if self.sample_count < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 samples, got {}",
                self.sample_count
            )));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 0.5) {
            return Err(Error::InvalidConfig(format!(
                "tail fraction must lie in (0, 1/2], got {}",
                self.tail_fraction
            )));
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "fixed step must be positive and finite, got {h}"
                )));
            }
        }
        if let Some((t0, t1)) = self.window {
            if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "window must be finite with t1 > t0, got ({t0}, {t1})"
                )));
            }
        }
        Ok(())
    }
}

/// Tail-averaged asymptotic value of one sampled observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticEstimate {
    /// Mean over the trailing samples.
    pub value: f64,
    /// Half the peak-to-peak excursion over the trailing samples.
    pub uncertainty: f64,
    /// Absolute difference between the means of the two halves of the tail.
    pub drift: f64,
    /// False when the drift exceeds the configured threshold.
    pub converged: bool,
}

/// Estimates the asymptote of `series` by averaging its trailing
/// `tail_fraction` (in (0, 1/2]), using the default drift threshold.
pub fn asymptotic_estimate(series: &[f64], tail_fraction: f64) -> Result<AsymptoticEstimate> {
    asymptotic_estimate_with_threshold(series, tail_fraction, DEFAULT_DRIFT_THRESHOLD)
}

/// [`asymptotic_estimate`] with an explicit non-convergence threshold.
pub fn asymptotic_estimate_with_threshold(
    series: &[f64],
    tail_fraction: f64,
    drift_threshold: f64,
) -> Result<AsymptoticEstimate> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::InvalidConfig(format!(
            "tail fraction must lie in (0, 1/2], got {tail_fraction}"
        )));
    }
    let n = series.len();
    let k = ((n as f64 * tail_fraction).round() as usize)
        .clamp(1, n)
        .max(4.min(n));
    let tail = &series[n - k..];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let value = mean(tail);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let drift = if tail.len() >= 2 {
        let half = tail.len() / 2;
        (mean(&tail[half..]) - mean(&tail[..half])).abs()
    } else {
        0.0
    };
    Ok(AsymptoticEstimate {
        value,
        uncertainty: (hi - lo) / 2.0,
        drift,
        converged: drift <= drift_threshold,
    })
}

/// Sampled trajectory of one sweep, with derived observables.
#[derive(Debug, Clone)]
pub struct TimeSeriesResult {
    /// Basis labels of the propagated space.
    pub labels: Vec<String>,
    /// Uniform sample times covering the window.
    pub times: Vec<f64>,
    /// Basis populations per sample, `populations[k][i]`.
    pub populations: Vec<Vec<f64>>,
    /// Total z expectation per sample.
    pub magnetization: Vec<f64>,
    /// Entanglement per sample (concurrence for the qubit pair, negativity
    /// for qutrit spaces); `None` when the basis has no bipartition here.
    pub entanglement: Option<Vec<f64>>,
    /// State norm per sample.
    pub norms: Vec<f64>,
    /// State at the end of the window.
    pub final_state: QuantumState,
    /// Tail-averaged asymptotic population estimates, one per basis state.
    pub estimates: Vec<AsymptoticEstimate>,
    /// Largest deviation of the norm from its initial value.
    pub max_norm_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl TimeSeriesResult {
    /// Sampled total-z expectation values.
    pub fn magnetization_series(&self) -> &[f64] {
        &self.magnetization
    }

    /// Population series of one labeled basis state.
    pub fn population_series(&self, label: &str) -> Result<Vec<f64>> {
        let idx =
            self.labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::UnknownLabel {
                    label: label.to_string(),
                })?;
        Ok(self.populations.iter().map(|p| p[idx]).collect())
    }

    /// Tail-averaged estimate of the entanglement series, when present.
    pub fn entanglement_estimate(&self, tail_fraction: f64) -> Option<Result<AsymptoticEstimate>> {
        self.entanglement
            .as_ref()
            .map(|e| asymptotic_estimate(e, tail_fraction))
    }

    /// Tail-averaged estimate of the magnetization series.
    pub fn magnetization_estimate(&self, tail_fraction: f64) -> Result<AsymptoticEstimate> {
        asymptotic_estimate(&self.magnetization, tail_fraction)
    }
}

// ---------------------------------------------------------------------------
// stepping core

fn expm_apply_2x2(h: &CMat, dt: f64, psi: &CVec) -> CVec {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    let mu = 0.5 * (a + d);
    let bz = 0.5 * (a - d);
    let bn = (b.norm_sqr() + bz * bz).sqrt();
    let phase = Complex64::new(0.0, -mu * dt).exp();
    if bn == 0.0 {
        return psi * phase;
    }
    let c = (bn * dt).cos();
    let s = (bn * dt).sin() / bn;
    let i = Complex64::new(0.0, 1.0);
    let u00 = Complex64::new(c, 0.0) - i * Complex64::new(s * bz, 0.0);
    let u01 = -i * b * s;
    let u10 = -i * b.conj() * s;
    let u11 = Complex64::new(c, 0.0) + i * Complex64::new(s * bz, 0.0);
    CVec::from_vec(vec![
        phase * (u00 * psi[0] + u01 * psi[1]),
        phase * (u10 * psi[0] + u11 * psi[1]),
    ])
}

fn expm_apply_general(h: &CMat, dt: f64, psi: &CVec) -> CVec {
    let eig = h.clone().symmetric_eigen();
    let coeffs = eig.eigenvectors.adjoint() * psi;
    let rotated = CVec::from_iterator(
        coeffs.len(),
        coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, &l)| c * Complex64::new(0.0, -l * dt).exp()),
    );
    &eig.eigenvectors * rotated
}

fn check_runtime_hermitian(h: &CMat) -> Result<()> {
    let dev = hermiticity_deviation(h);
    let scale = h.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    if dev > RUNTIME_HERMITICITY_TOL * scale {
        return Err(Error::NonHermitian { max_dev: dev });
    }
    Ok(())
}

/// One exponential-midpoint step `psi(t + dt) = exp(-i H(t + dt/2) dt) psi(t)`.
fn midpoint_step(ham: &SweepHamiltonian, t: f64, dt: f64, psi: &CVec) -> Result<CVec> {
    let hm = ham.at(t + 0.5 * dt);
    check_runtime_hermitian(&hm)?;
    if hm.nrows() == 2 {
        Ok(expm_apply_2x2(&hm, dt, psi))
    } else {
        Ok(expm_apply_general(&hm, dt, psi))
    }
}

struct RawSeries {
    times: Vec<f64>,
    states: Vec<CVec>,
    final_state: CVec,
    accepted: usize,
    rejected: usize,
}

/// Integrates over the window, recording states on a uniform sample grid.
/// The sample at an accepted step's interior is produced by one extra
/// midpoint substep from the step's start point.
fn integrate(
    ham: &SweepHamiltonian,
    psi0: &CVec,
    (t0, t1): (f64, f64),
    cfg: &PropagationConfig,
) -> Result<RawSeries> {
    let n_samples = cfg.sample_count;
    let span = t1 - t0;
    let sample_dt = span / (n_samples - 1) as f64;
    let times: Vec<f64> = (0..n_samples).map(|k| t0 + k as f64 * sample_dt).collect();
    let eps = 1e-12 * span.max(1.0);

    let mut states: Vec<CVec> = Vec::with_capacity(n_samples);
    states.push(psi0.clone());
    let mut next_sample = 1usize;

    let mut t = t0;
    let mut psi = psi0.clone();
    let mut h = cfg
        .fixed_step
        .or(cfg.initial_step)
        .unwrap_or(span / 1024.0)
        .min(span);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut total = 0usize;

    let step_limit =
        |accepted: usize, rejected: usize, t: f64, psi: &CVec, times: &[f64], states: Vec<CVec>| {
            let partial = assemble(
                ham,
                &times[..states.len()],
                states,
                psi.clone(),
                accepted,
                rejected,
                cfg,
            );
            Error::StepLimitExceeded {
                max_steps: cfg.max_steps,
                reached: t,
                target: t1,
                partial: Box::new(partial),
            }
        };

    while t < t1 - eps {
        total += 1;
        if total > cfg.max_steps {
            return Err(step_limit(accepted, rejected, t, &psi, &times, states));
        }
        let dt = h.min(t1 - t);

        let next = if cfg.fixed_step.is_some() {
            // fixed-step mode: plain midpoint steps, no error control
            midpoint_step(ham, t, dt, &psi)?
        } else {
            let coarse = midpoint_step(ham, t, dt, &psi)?;
            let mid = midpoint_step(ham, t, 0.5 * dt, &psi)?;
            let fine = midpoint_step(ham, t + 0.5 * dt, 0.5 * dt, &mid)?;
            let err = (&fine - &coarse).norm();
            if err > cfg.tolerance {
                rejected += 1;
                let shrink = 0.9 * (cfg.tolerance / err).powf(1.0 / 3.0);
                h = dt * shrink.clamp(0.2, 0.9);
                continue;
            }
            let grow = if err > 0.0 {
                0.9 * (cfg.tolerance / err).powf(1.0 / 3.0)
            } else {
                5.0
            };
            h = dt * grow.clamp(0.5, 5.0);
            fine
        };

        // record samples inside (t, t + dt]
        while next_sample < n_samples && times[next_sample] <= t + dt + eps {
            let tau = times[next_sample];
            if (tau - (t + dt)).abs() <= eps {
                states.push(next.clone());
            } else {
                states.push(midpoint_step(ham, t, tau - t, &psi)?);
            }
            next_sample += 1;
        }

        psi = next;
        t += dt;
        accepted += 1;
    }

    while next_sample < n_samples {
        states.push(psi.clone());
        next_sample += 1;
    }

    Ok(RawSeries {
        times,
        states,
        final_state: psi,
        accepted,
        rejected,
    })
}

// ---------------------------------------------------------------------------
// observables

enum Measure {
    None,
    Concurrence,
    BlockNegativity,
    PairNegativity,
}

fn detect_measure(labels: &[String]) -> Measure {
    let qubit = qubit_pair_labels();
    if labels == qubit.as_slice() {
        return Measure::Concurrence;
    }
    if labels.len() == 4 && labels.iter().zip(FOUR_DIM_LABELS).all(|(a, b)| a == b) {
        return Measure::BlockNegativity;
    }
    let qutrit = qutrit_pair_labels();
    if labels == qutrit.as_slice() {
        return Measure::PairNegativity;
    }
    Measure::None
}

fn measure_value(measure: &Measure, psi: &CVec) -> Option<f64> {
    let n2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if n2 == 0.0 {
        return None;
    }
    match measure {
        Measure::None => None,
        Measure::Concurrence => Some(2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm() / n2),
        Measure::BlockNegativity => {
            let x = (psi[0].norm_sqr() + psi[3].norm_sqr()) / n2;
            Some((x * (1.0 - x)).max(0.0).sqrt())
        }
        Measure::PairNegativity => {
            let m = CMat::from_fn(3, 3, |i, j| psi[i * 3 + j] / Complex64::new(n2.sqrt(), 0.0));
            let sv = m.svd(false, false).singular_values;
            let s: f64 = sv.iter().sum();
            Some(((s * s - 1.0) / 2.0).max(0.0))
        }
    }
}

fn assemble(
    ham: &SweepHamiltonian,
    times: &[f64],
    states: Vec<CVec>,
    final_state: CVec,
    accepted: usize,
    rejected: usize,
    cfg: &PropagationConfig,
) -> TimeSeriesResult {
    let labels = ham.labels().to_vec();
    let weights: Vec<f64> = labels
        .iter()
        .map(|l| label_z_weight(l).unwrap_or(0.0))
        .collect();
    let measure = detect_measure(&labels);

    let mut populations = Vec::with_capacity(states.len());
    let mut magnetization = Vec::with_capacity(states.len());
    let mut norms = Vec::with_capacity(states.len());
    let mut entanglement: Vec<f64> = Vec::new();
    let has_measure = !matches!(measure, Measure::None);

    for s in &states {
        let pops: Vec<f64> = s.iter().map(|z| z.norm_sqr()).collect();
        magnetization.push(pops.iter().zip(&weights).map(|(p, w)| p * w).sum());
        norms.push(pops.iter().sum::<f64>().sqrt());
        if has_measure {
            entanglement.push(measure_value(&measure, s).unwrap_or(0.0));
        }
        populations.push(pops);
    }

    let norm0 = norms.first().copied().unwrap_or(1.0);
    let max_norm_drift = norms.iter().map(|n| (n - norm0).abs()).fold(0.0, f64::max);

    let estimates = (0..labels.len())
        .map(|i| {
            let series: Vec<f64> = populations.iter().map(|p| p[i]).collect();
            asymptotic_estimate_with_threshold(&series, cfg.tail_fraction, cfg.drift_threshold)
                .expect("non-empty series")
        })
        .collect();

    let final_q = QuantumState::from_raw_parts(labels.clone(), final_state);

    TimeSeriesResult {
        labels,
        times: times.to_vec(),
        populations,
        magnetization,
        entanglement: if has_measure {
            Some(entanglement)
        } else {
            None
        },
        norms,
        final_state: final_q,
        estimates,
        max_norm_drift,
        accepted_steps: accepted,
        rejected_steps: rejected,
    }
}

// ---------------------------------------------------------------------------
// public drivers

/// Propagates `psi0` under `ham` across the configured window.
pub fn propagate(
    ham: &SweepHamiltonian,
    psi0: &QuantumState,
    cfg: &PropagationConfig,
) -> Result<TimeSeriesResult> {
    cfg.validate()?;
    let window = cfg.window.ok_or_else(|| {
        Error::InvalidConfig("propagate requires an explicit time window".to_string())
    })?;
    if psi0.dim() != ham.dim() {
        return Err(Error::DimensionMismatch {
            left: psi0.dim(),
            right: ham.dim(),
        });
    }
    let raw = integrate(ham, psi0.amplitudes(), window, cfg)?;
    Ok(assemble(
        ham,
        &raw.times,
        raw.states,
        raw.final_state,
        raw.accepted,
        raw.rejected,
        cfg,
    ))
}

/// Propagates the pair dynamics block by block and recombines the samples.
///
/// The system kind is inferred from the state dimension (4: qubit pair,
/// 9: qutrit pair). Identity shifts of the blocks are kept, so relative
/// phases between blocks are coherent in the recombined state.
pub fn propagate_blockwise(
    p: &CouplingParams,
    sweep: &SweepProtocol,
    psi0: &QuantumState,
    cfg: &PropagationConfig,
) -> Result<TimeSeriesResult> {
    cfg.validate()?;
    let window = cfg.window.unwrap_or_else(|| sweep.time_range());
    let sub_cfg = PropagationConfig {
        window: Some(window),
        ..cfg.clone()
    };

    let (full, partitions): (SweepHamiltonian, Vec<Vec<usize>>) = match psi0.dim() {
        4 => {
            let blocks = decompose_qubit_blocks(p, 0.0, 0.0);
            (
                SweepHamiltonian::qubit_pair(p, sweep)?,
                blocks.iter().map(|b| b.indices.to_vec()).collect(),
            )
        }
        9 => (
            SweepHamiltonian::qutrit_pair(p, sweep)?,
            vec![FOUR_DIM_INDICES.to_vec(), FIVE_DIM_INDICES.to_vec()],
        ),
        d => {
            return Err(Error::DimensionMismatch { left: d, right: 4 });
        }
    };
    if psi0.labels() != full.labels() {
        return Err(Error::InvalidConfig(
            "initial state labels do not match the pair basis".to_string(),
        ));
    }

    let dim = full.dim();
    let n_samples = sub_cfg.sample_count;
    let mut combined: Vec<CVec> = vec![CVec::zeros(dim); n_samples];
    let mut final_state = CVec::zeros(dim);
    let mut times: Option<Vec<f64>> = None;
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    for indices in &partitions {
        let sub_psi =
            CVec::from_iterator(indices.len(), indices.iter().map(|&i| psi0.amplitudes()[i]));
        if sub_psi.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        let sub_labels: Vec<String> = indices.iter().map(|&i| full.labels()[i].clone()).collect();
        let sub_const = CMat::from_fn(indices.len(), indices.len(), |i, j| {
            full.constant[(indices[i], indices[j])]
        });
        let sub_ramp = CMat::from_fn(indices.len(), indices.len(), |i, j| {
            full.ramp[(indices[i], indices[j])]
        });
        let sub_ham = SweepHamiltonian::new(sub_labels, sub_const, sub_ramp, full.rate)?;
        let raw = integrate(&sub_ham, &sub_psi, window, &sub_cfg)?;
        for (k, s) in raw.states.iter().enumerate() {
            for (b, &i) in indices.iter().enumerate() {
                combined[k][i] += s[b];
            }
        }
        for (b, &i) in indices.iter().enumerate() {
            final_state[i] += raw.final_state[b];
        }
        times.get_or_insert(raw.times);
        accepted += raw.accepted;
        rejected += raw.rejected;
    }

    let times = times.unwrap_or_else(|| {
        let span = window.1 - window.0;
        (0..n_samples)
            .map(|k| window.0 + k as f64 * span / (n_samples - 1) as f64)
            .collect()
    });
    if combined
        .iter()
        .all(|s| s.iter().all(|z| z.norm_sqr() == 0.0))
    {
        // nothing propagated (zero initial state cannot happen for a valid
        // QuantumState, but keep the invariant: carry the initial state)
        for (k, s) in combined.iter_mut().enumerate() {
            let _ = k;
            *s = psi0.amplitudes().clone();
        }
        final_state = psi0.amplitudes().clone();
    }

    Ok(assemble(
        &full,
        &times,
        combined,
        final_state,
        accepted,
        rejected,
        &sub_cfg,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::CrossingMode;
    use approx::assert_abs_diff_eq;

    fn block_sweep(alpha: f64, m: f64, w: f64) -> (SweepHamiltonian, SweepProtocol) {
        let sweep = SweepProtocol::with_window_factor(
            alpha,
            CrossingMode::Full,
            w,
            m,
            SystemKind::QubitPair,
        )
        .unwrap();
        let p = CouplingParams::new(m, 0.0, 0.0, 0.0, 0.0);
        let blocks = decompose_qubit_blocks(&p, 0.0, 0.0);
        let ham = SweepHamiltonian::qubit_block(&blocks[0], &sweep).unwrap();
        (ham, sweep)
    }

    #[test]
    fn free_evolution_keeps_populations() {
        let labels = vec!["a", "b"];
        let ham = SweepHamiltonian::new(
            labels.clone(),
            CMat::zeros(2, 2),
            pauli_operators().z.data().clone(),
            1.0,
        )
        .unwrap();
        let psi0 = QuantumState::from_label(labels, "a").unwrap();
        let cfg = PropagationConfig::default().with_window(-5.0, 5.0);
        let r = propagate(&ham, &psi0, &cfg).unwrap();
        for p in &r.populations {
            assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        }
        assert!(r.max_norm_drift < 1e-12);
    }

    #[test]
    fn single_block_reaches_the_closed_form() {
        // lambda = ln 2: transition probability one half
        let alpha = 1.0;
        let m = (std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI)).sqrt();
        let (ham, sweep) = block_sweep(alpha, m, 50.0);
        let psi0 = QuantumState::from_label(ham.labels().to_vec(), "--").unwrap();
        let cfg = PropagationConfig {
            tolerance: 1e-10,
            window: Some(sweep.time_range()),
            ..Default::default()
        };
        let r = propagate(&ham, &psi0, &cfg).unwrap();
        let est = &r.estimates[0]; // population of "++"
        assert!(est.converged, "drift {}", est.drift);
        assert_abs_diff_eq!(est.value, 0.5, epsilon = 0.02);
        assert!(r.max_norm_drift < 1e-10);
    }

    #[test]
    fn non_hermitian_generator_is_detected() {
        let mut bad = CMat::zeros(2, 2);
        bad[(0, 1)] = Complex64::new(1.0, 0.0);
        let ham = SweepHamiltonian::new_unchecked(vec!["a", "b"], bad, CMat::identity(2, 2), 1.0);
        let psi0 = QuantumState::from_label(vec!["a", "b"], "a").unwrap();
        let cfg = PropagationConfig::default().with_window(0.0, 1.0);
        assert!(matches!(
            propagate(&ham, &psi0, &cfg),
            Err(Error::NonHermitian { .. })
        ));
        // and the validating constructor refuses it outright
        let mut bad = CMat::zeros(2, 2);
        bad[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(SweepHamiltonian::new(vec!["a", "b"], bad, CMat::identity(2, 2), 1.0).is_err());
    }

    #[test]
    fn step_budget_exhaustion_carries_the_partial_series() {
        let (ham, sweep) = block_sweep(1.0, 0.5, 50.0);
        let psi0 = QuantumState::from_label(ham.labels().to_vec(), "--").unwrap();
        let cfg = PropagationConfig {
            max_steps: 10,
            window: Some(sweep.time_range()),
            ..Default::default()
        };
        match propagate(&ham, &psi0, &cfg) {
            Err(Error::StepLimitExceeded { partial, .. }) => {
                assert!(!partial.times.is_empty());
                assert!(partial.times.len() <= DEFAULT_SAMPLE_COUNT);
            }
            other => panic!("expected step limit error, got {other:?}"),
        }
    }

    #[test]
    fn fixed_step_errors_shrink_at_second_order() {
        let (ham, _) = block_sweep(1.0, 0.4, 10.0);
        let psi0 = QuantumState::from_label(ham.labels().to_vec(), "--").unwrap();
        let window = (-8.0, 8.0);
        let run = |h: f64| {
            let cfg = PropagationConfig {
                fixed_step: Some(h),
                sample_count: 2,
                window: Some(window),
                ..Default::default()
            };
            propagate(&ham, &psi0, &cfg).unwrap().final_state
        };
        let reference = run(0.002);
        let err = |h: f64| {
            let s = run(h);
            (s.amplitudes() - reference.amplitudes()).norm()
        };
        let e1 = err(0.08);
        let e2 = err(0.04);
        let ratio = e1 / e2;
        assert!(
            (3.0..=5.0).contains(&ratio),
            "error ratio {ratio} not consistent with a second-order stepper"
        );
    }

    #[test]
    fn estimates_flag_short_windows() {
        let alpha = 1.0;
        let m = (std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI)).sqrt();
        let (ham, sweep) = block_sweep(alpha, m, 2.0);
        let psi0 = QuantumState::from_label(ham.labels().to_vec(), "--").unwrap();
        let cfg = PropagationConfig {
            window: Some(sweep.time_range()),
            ..Default::default()
        };
        let r = propagate(&ham, &psi0, &cfg).unwrap();
        assert!(
            !r.estimates[0].converged,
            "window factor 2 should not converge (drift {})",
            r.estimates[0].drift
        );
    }

    #[test]
    fn magnetization_starts_and_stays_without_coupling() {
        let p = CouplingParams::zero();
        let sweep = SweepProtocol::new(1.0, CrossingMode::Full, 10.0).unwrap();
        let psi0 = QuantumState::from_label(qubit_pair_labels(), "--").unwrap();
        let cfg = PropagationConfig::for_sweep(&sweep);
        let r = propagate_blockwise(&p, &sweep, &psi0, &cfg).unwrap();
        for m in r.magnetization_series() {
            assert_abs_diff_eq!(*m, -2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn asymptotic_estimate_handles_edge_cases() {
        assert!(matches!(
            asymptotic_estimate(&[], 0.1),
            Err(Error::EmptySeries)
        ));
        assert!(asymptotic_estimate(&[1.0], 0.7).is_err());
        let flat = [2.0; 100];
        let e = asymptotic_estimate(&flat, 0.1).unwrap();
        assert_abs_diff_eq!(e.value, 2.0);
        assert_abs_diff_eq!(e.uncertainty, 0.0);
        assert!(e.converged);
    }

    #[test]
    fn blockwise_matches_full_propagation() {
        let p = CouplingParams::new(0.45, -0.2, 0.15, 0.3, 0.1);
        let sweep = SweepProtocol::new(1.0, CrossingMode::Full, 12.0).unwrap();
        let amps = {
            let raw = [
                Complex64::new(0.5, 0.1),
                Complex64::new(-0.3, 0.2),
                Complex64::new(0.1, -0.4),
                Complex64::new(0.6, 0.0),
            ];
            let n = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            raw.iter().map(|z| z / n).collect::<Vec<_>>()
        };
        let psi0 = QuantumState::new(qubit_pair_labels(), amps).unwrap();
        let cfg = PropagationConfig {
            tolerance: 1e-11,
            sample_count: 101,
            window: Some(sweep.time_range()),
            ..Default::default()
        };
        let full_ham = SweepHamiltonian::qubit_pair(&p, &sweep).unwrap();
        let full = propagate(&full_ham, &psi0, &cfg).unwrap();
        let blocks = propagate_blockwise(&p, &sweep, &psi0, &cfg).unwrap();
        let f = full.final_state.fidelity(&blocks.final_state).unwrap();
        assert!(f > 1.0 - 1e-8, "fidelity {f}");
    }
}
