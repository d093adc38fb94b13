//! Parameter scans: data-parallel evaluation over grids, local-maximum
//! refinement, and the coupling family whose entanglement curve carries two
//! separated peaks.

use crate::error::{Error, Result};
use crate::params::CouplingParams;
use crate::propagate::{propagate, PropagationConfig, SweepHamiltonian};
use crate::qubit::{asymptotic_concurrence, probability_from_lambda};
use crate::qutrit::{
    asymptotic_negativity, fictitious_probabilities, three_level_probs, three_level_reduction,
};
use crate::state::QuantumState;
use crate::sweep::{CrossingMode, SweepProtocol, SystemKind};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` sequentially, preserving index order.
pub fn run_indexed_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps `f` over `0..n` on the rayon thread pool, preserving index order.
#[cfg(feature = "parallel")]
pub fn run_indexed_parallel<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled
/// and sequentially otherwise. Results keep index order either way.
pub fn run_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        run_indexed_parallel(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_indexed_sequential(n, f)
    }
}

/// Uniformly spaced grid over `[lo, hi]` including both endpoints.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    check_grid(lo, hi, n)?;
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|k| lo + k as f64 * step).collect())
}

/// Logarithmically spaced grid over `[lo, hi]` (requires `lo > 0`).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    check_grid(lo, hi, n)?;
    if lo <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "log grid needs a positive lower bound, got {lo}"
        )));
    }
    let (la, lb) = (lo.ln(), hi.ln());
    let step = (lb - la) / (n - 1) as f64;
    Ok((0..n).map(|k| (la + k as f64 * step).exp()).collect())
}

fn check_grid(lo: f64, hi: f64, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "a grid needs at least 2 points, got {n}"
        )));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "grid bounds must be finite with hi > lo, got ({lo}, {hi})"
        )));
    }
    Ok(())
}

/// Evaluates `f` at every grid point (parallel when enabled).
pub fn scan_values<F>(xs: &[f64], f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    run_indexed(xs.len(), |i| f(xs[i]))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section refinement of a maximum of `f` inside `[a, b]`.
///
/// Assumes `f` is unimodal on the bracket; returns the refined abscissa and
/// value once the bracket is narrower than `xtol`.
pub fn refine_maximum<F>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let y = f(x);
    (x, y)
}

/// Finds the interior local maxima of `f` sampled on `grid` and refines each
/// by golden section to within `xtol`.
///
/// Grid endpoints are not reported as maxima; size the grid with margins
/// around the peaks of interest. NaN samples never qualify.
pub fn local_maxima_refined<F>(f: F, grid: &[f64], xtol: f64) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    if grid.len() < 3 {
        return Vec::new();
    }
    let ys = scan_values(grid, &f);
    let mut peaks = Vec::new();
    for i in 1..grid.len() - 1 {
        if ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] {
            peaks.push(refine_maximum(&f, grid[i - 1], grid[i + 1], xtol));
        }
    }
    peaks
}

/// Exchange-only couplings whose two fictitious-qubit exponents sit in ratio
/// two, parameterized by `lambda = m^2 / alpha` of the stronger one.
///
/// The transverse magnitudes come out as `m_strong = sqrt(lambda alpha)` on
/// the second fictitious qubit and `m_strong / sqrt 2` on the first, which
/// puts the couplings at `gamma_y / gamma_x = 3 - 2 sqrt 2`.
pub fn ratio_two_family(lambda: f64, alpha: f64) -> Result<CouplingParams> {
    if !(lambda >= 0.0) {
        return Err(Error::NegativeExponent { value: lambda });
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidSweepRate { alpha });
    }
    let m_strong = (lambda * alpha).sqrt();
    let m_weak = m_strong / std::f64::consts::SQRT_2;
    Ok(CouplingParams::new(
        0.5 * (m_strong + m_weak),
        0.5 * (m_strong - m_weak),
        0.0,
        0.0,
        0.0,
    ))
}

/// Final negativity of the ratio-two family at normalized exponent `lambda`.
///
/// Scale-invariant in the sweep rate; the curve has local maxima of exactly
/// 1/2 at `lambda = ln 2 / 2 pi` and `lambda = ln 2 / pi`.
pub fn family_negativity(lambda: f64) -> Result<f64> {
    let p = ratio_two_family(lambda, 1.0)?;
    let (p1, p2) = fictitious_probabilities(&p, 1.0)?;
    asymptotic_negativity(p1, p2)
}

/// Negativity of the ratio-two family over a whole grid (parallel).
pub fn family_negativity_curve(lambdas: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::NegativeExponent { value: *bad });
    }
    Ok(scan_values(lambdas, |l| {
        family_negativity(l).unwrap_or(f64::NAN)
    }))
}

/// Locates the negativity maxima of the ratio-two family on a log grid over
/// `[lo, hi]`, refined to `xtol`.
pub fn family_negativity_maxima(lo: f64, hi: f64, n: usize, xtol: f64) -> Result<Vec<(f64, f64)>> {
    let grid = log_grid(lo, hi, n)?;
    Ok(local_maxima_refined(
        |l| family_negativity(l).unwrap_or(f64::NAN),
        &grid,
        xtol,
    ))
}

/// Numeric arbitration between the two candidate transition exponents of the
/// reduced three-level crossing.
///
/// Two closed forms compete for the per-crossing probability of the ladder
/// driven by transverse coupling `gamma_tilde`: `1 - exp(-2 pi g^2 / alpha)`
/// (the single exponent) and `1 - exp(-4 pi g^2 / alpha)` (the doubled one).
/// This propagates the isolated three-level generator numerically and
/// compares the tail-estimated ladder populations with both predictions.
#[derive(Debug, Clone)]
pub struct ExponentArbitration {
    /// Normalized single exponent `2 pi gamma_tilde^2 / alpha` probed.
    pub lambda: f64,
    /// Numeric population estimates in ladder order (top, middle, bottom).
    pub numeric: [f64; 3],
    /// Worst absolute deviation from the single-exponent prediction.
    pub residual_single: f64,
    /// Worst absolute deviation from the doubled-exponent prediction.
    pub residual_doubled: f64,
    pub matches_single: bool,
    pub matches_doubled: bool,
    pub rejects_single: bool,
    pub rejects_doubled: bool,
}

/// Residual below which a candidate counts as matched.
pub const ARBITRATION_MATCH_TOL: f64 = 0.02;
/// Residual above which a candidate counts as rejected (together with being
/// at least five times the competing residual).
pub const ARBITRATION_REJECT_MARGIN: f64 = 0.1;

impl ExponentArbitration {
    /// Human-readable verdict for reports.
    pub fn verdict(&self) -> &'static str {
        if self.matches_single && self.rejects_doubled {
            "single exponent (2 pi g^2 / alpha)"
        } else if self.matches_doubled && self.rejects_single {
            "doubled exponent (4 pi g^2 / alpha)"
        } else {
            "inconclusive"
        }
    }

    /// True when exactly one candidate is matched and the other rejected.
    pub fn decisive(&self) -> bool {
        (self.matches_single && self.rejects_doubled)
            != (self.matches_doubled && self.rejects_single)
    }
}

/// Runs the numeric three-level crossing for `gamma_tilde` at sweep rate
/// `alpha` and arbitrates the two candidate exponents.
pub fn arbitrate_three_level_exponent(
    gamma_tilde: f64,
    alpha: f64,
    window_factor: f64,
) -> Result<ExponentArbitration> {
    let p = CouplingParams::new(gamma_tilde / 2.0, gamma_tilde / 2.0, 0.0, 0.0, 0.0);
    let reduction = three_level_reduction(&p)?;
    let sweep = SweepProtocol::with_window_factor(
        alpha,
        CrossingMode::Full,
        window_factor,
        gamma_tilde.abs(),
        SystemKind::QutritPair,
    )?;
    let ham = SweepHamiltonian::three_level(&reduction, &sweep)?;
    let bottom = reduction.ladder[2];
    let psi0 = QuantumState::from_label(ham.labels().to_vec(), bottom)?;
    let cfg = PropagationConfig::for_sweep(&sweep);
    let run = propagate(&ham, &psi0, &cfg)?;
    let numeric = [
        run.estimates[0].value,
        run.estimates[1].value,
        run.estimates[2].value,
    ];

    let lambda = 2.0 * std::f64::consts::PI * gamma_tilde * gamma_tilde / alpha;
    let single = three_level_probs(1.0 - (-lambda).exp())?;
    let doubled = three_level_probs(1.0 - (-2.0 * lambda).exp())?;
    let worst = |pred: [f64; 3]| {
        numeric
            .iter()
            .zip(pred)
            .map(|(n, p)| (n - p).abs())
            .fold(0.0f64, f64::max)
    };
    let residual_single = worst(single);
    let residual_doubled = worst(doubled);

    Ok(ExponentArbitration {
        lambda,
        numeric,
        residual_single,
        residual_doubled,
        matches_single: residual_single < ARBITRATION_MATCH_TOL,
        matches_doubled: residual_doubled < ARBITRATION_MATCH_TOL,
        rejects_single: residual_single > ARBITRATION_REJECT_MARGIN
            && residual_single > 5.0 * residual_doubled,
        rejects_doubled: residual_doubled > ARBITRATION_REJECT_MARGIN
            && residual_doubled > 5.0 * residual_single,
    })
}

/// Closed-form block concurrence over a grid of sweep exponents (parallel).
///
/// Each entry is `2 sqrt(P (1 - P))` with `P = 1 - exp(-lambda)`; the curve
/// peaks at `lambda = ln 2`.
pub fn concurrence_curve(lambdas: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::NegativeExponent { value: *bad });
    }
    Ok(scan_values(lambdas, |l| {
        probability_from_lambda(l)
            .and_then(asymptotic_concurrence)
            .unwrap_or(f64::NAN)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn grids_have_exact_endpoints() {
        let g = linear_grid(-1.0, 3.0, 5).unwrap();
        assert_eq!(g, vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
        let l = log_grid(0.1, 10.0, 3).unwrap();
        assert_abs_diff_eq!(l[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(l[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[2], 10.0, epsilon = 1e-12);
        assert!(log_grid(0.0, 1.0, 3).is_err());
        assert!(linear_grid(1.0, 1.0, 3).is_err());
        assert!(linear_grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn indexed_runs_preserve_order() {
        let seq = run_indexed_sequential(100, |i| i * i);
        let auto = run_indexed(100, |i| i * i);
        assert_eq!(seq, auto);
        #[cfg(feature = "parallel")]
        {
            let par = run_indexed_parallel(100, |i| i * i);
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn golden_section_pins_a_parabola_peak() {
        let (x, y) = refine_maximum(|x| 1.0 - (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn concurrence_peaks_at_ln_two() {
        let grid = linear_grid(0.05, 5.0, 400).unwrap();
        let peaks = local_maxima_refined(
            |l| {
                probability_from_lambda(l)
                    .and_then(asymptotic_concurrence)
                    .unwrap()
            },
            &grid,
            1e-8,
        );
        assert_eq!(peaks.len(), 1);
        assert_abs_diff_eq!(peaks[0].0, LN_2, epsilon = 1e-6);
        assert_abs_diff_eq!(peaks[0].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn family_exponents_sit_in_ratio_two() {
        let p = ratio_two_family(0.2, 1.7).unwrap();
        let strong = p.gamma_minus();
        let weak = p.gamma_plus();
        assert_abs_diff_eq!(strong * strong, 2.0 * weak * weak, epsilon = 1e-12);
        assert_abs_diff_eq!(strong * strong / 1.7, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(
            p.gamma_y / p.gamma_x,
            3.0 - 2.0 * std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn family_negativity_maxima_land_on_the_log_two_points() {
        let peaks = family_negativity_maxima(0.01, 1.0, 400, 1e-10).unwrap();
        assert_eq!(peaks.len(), 2, "peaks: {peaks:?}");
        assert_abs_diff_eq!(peaks[0].0, LN_2 / (2.0 * PI), epsilon = 1e-6);
        assert_abs_diff_eq!(peaks[1].0, LN_2 / PI, epsilon = 1e-6);
        assert_abs_diff_eq!(peaks[0].1, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(peaks[1].1, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn family_curve_matches_pointwise_values() {
        let grid = log_grid(0.02, 0.5, 20).unwrap();
        let curve = family_negativity_curve(&grid).unwrap();
        for (x, y) in grid.iter().zip(&curve) {
            assert_abs_diff_eq!(*y, family_negativity(*x).unwrap(), epsilon = 1e-15);
        }
        assert!(family_negativity_curve(&[-0.1]).is_err());
    }
}
