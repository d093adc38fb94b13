//! Entanglement measures: concurrence for two-qubit pure states and
//! negativity for bipartite density matrices.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{hermiticity_deviation, qutrit_pair_labels, CMat};
use crate::qutrit::FOUR_DIM_INDICES;
use crate::state::QuantumState;

/// Structural tolerance on density-matrix preconditions.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalues above this magnitude count as genuinely negative.
pub const NEGATIVE_EIG_TOL: f64 = 1e-12;

/// Concurrence of a pure two-qubit state, `2 |c1 c4 - c2 c3|`.
pub fn pure_state_concurrence(state: &QuantumState) -> Result<f64> {
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: 4,
        });
    }
    let a = state.amplitudes();
    Ok(2.0 * (a[0] * a[3] - a[1] * a[2]).norm())
}

/// Partial transpose of `rho` over the second factor of a
/// `dims.0 x dims.1` bipartition.
fn partial_transpose_second(rho: &CMat, dims: (usize, usize)) -> CMat {
    let (da, db) = dims;
    let n = da * db;
    CMat::from_fn(n, n, |r, c| {
        let (a, i) = (r / db, r % db);
        let (b, j) = (c / db, c % db);
        rho[(a * db + j, b * db + i)]
    })
}

fn partial_transpose_first(rho: &CMat, dims: (usize, usize)) -> CMat {
    let (da, db) = dims;
    let n = da * db;
    CMat::from_fn(n, n, |r, c| {
        let (a, i) = (r / db, r % db);
        let (b, j) = (c / db, c % db);
        rho[(b * db + i, a * db + j)]
    })
}

fn validate_density(rho: &CMat, dims: (usize, usize)) -> Result<()> {
    let n = dims.0 * dims.1;
    if rho.nrows() != rho.ncols() || rho.nrows() != n {
        return Err(Error::DimensionMismatch {
            left: rho.nrows(),
            right: n,
        });
    }
    let herm = hermiticity_deviation(rho);
    if herm > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix {
            reason: "not Hermitian",
            deviation: herm,
        });
    }
    let trace_dev = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    if trace_dev > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix {
            reason: "trace differs from one",
            deviation: trace_dev,
        });
    }
    let eigs = rho.clone().symmetric_eigen().eigenvalues;
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix {
            reason: "not positive semidefinite",
            deviation: -min,
        });
    }
    Ok(())
}

fn negativity_of(rho_pt: CMat) -> f64 {
    let eigs = rho_pt.symmetric_eigen().eigenvalues;
    eigs.iter()
        .filter(|&&l| l < -NEGATIVE_EIG_TOL)
        .map(|l| -l)
        .sum()
}

/// Negativity of a bipartite density matrix: the absolute sum of the
/// negative eigenvalues of its partial transpose.
///
/// `rho` must be Hermitian, unit-trace, and positive semidefinite within
/// [`DENSITY_TOL`]. The result does not depend on which side is transposed.
pub fn negativity_general(rho: &CMat, dims: (usize, usize)) -> Result<f64> {
    validate_density(rho, dims)?;
    Ok(negativity_of(partial_transpose_second(rho, dims)))
}

/// Same as [`negativity_general`] but transposing the first factor; exposed
/// for the side-invariance check.
pub fn negativity_general_first_side(rho: &CMat, dims: (usize, usize)) -> Result<f64> {
    validate_density(rho, dims)?;
    Ok(negativity_of(partial_transpose_first(rho, dims)))
}

/// Negativity of a pure state on a `dims.0 x dims.1` bipartition, computed
/// from its Schmidt coefficients (singular values of the reshaped amplitude
/// vector): `((sum_k s_k)^2 - 1) / 2`.
pub fn pure_negativity(state: &QuantumState, dims: (usize, usize)) -> Result<f64> {
    let (da, db) = dims;
    if state.dim() != da * db {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: da * db,
        });
    }
    let a = state.amplitudes();
    let m = CMat::from_fn(da, db, |i, j| a[i * db + j]);
    let sv = m.svd(false, false).singular_values;
    let s: f64 = sv.iter().sum();
    Ok(((s * s - 1.0) / 2.0).max(0.0))
}

/// Negativity of the pure 4-dim block state with amplitudes `c` on the
/// (10, 01, 0-1, -10) basis: `sqrt(x (1 - x))` with `x = |c1|^2 + |c4|^2`.
pub fn negativity_pure_4d(c: &[Complex64; 4]) -> Result<f64> {
    let norm2: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let dev = (norm2.sqrt() - 1.0).abs();
    if dev > DENSITY_TOL {
        return Err(Error::UnnormalizedState { deviation: dev });
    }
    let x = c[0].norm_sqr() + c[3].norm_sqr();
    Ok((x * (1.0 - x)).max(0.0).sqrt())
}

/// Embeds 4-dim block amplitudes into the full 9-dim qutrit pair basis.
pub fn embed_four_dim(c: &[Complex64; 4]) -> Result<QuantumState> {
    let mut amps = vec![Complex64::new(0.0, 0.0); 9];
    for (k, &idx) in FOUR_DIM_INDICES.iter().enumerate() {
        amps[idx] = c[k];
    }
    QuantumState::new(qutrit_pair_labels(), amps)
}

/// Density matrix `|psi><psi|` of a pure state.
pub fn pure_density(state: &QuantumState) -> CMat {
    let a = state.amplitudes();
    let n = a.len();
    let col = DVector::from_iterator(n, a.iter().cloned());
    &col * col.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::qubit_pair_labels;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bell_state_negativity_is_one_half() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let bell = QuantumState::new(qubit_pair_labels(), amps).unwrap();
        let rho = pure_density(&bell);
        assert_abs_diff_eq!(
            negativity_general(&rho, (2, 2)).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pure_negativity(&bell, (2, 2)).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn product_state_has_zero_negativity() {
        let s = QuantumState::from_label(qubit_pair_labels(), "+-").unwrap();
        let rho = pure_density(&s);
        assert_abs_diff_eq!(
            negativity_general(&rho, (2, 2)).unwrap(),
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn transposed_side_does_not_matter() {
        let amps = [c(0.6, 0.0), c(0.3, 0.4), c(0.0, 0.2), c(0.35, -0.25)];
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = amps.iter().map(|z| z / norm).collect();
        let st = embed_four_dim(&[amps[0], amps[1], amps[2], amps[3]]).unwrap();
        let rho = pure_density(&st);
        let a = negativity_general(&rho, (3, 3)).unwrap();
        let b = negativity_general_first_side(&rho, (3, 3)).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn pure_4d_closed_form_matches_the_general_measure() {
        // frozen cross-check: x and the eigenvalue-based negativity
        let raw = [c(0.6, 0.0), c(0.3, 0.4), c(0.0, 0.2), c(0.35, -0.25)];
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();
        let arr = [amps[0], amps[1], amps[2], amps[3]];
        let closed = negativity_pure_4d(&arr).unwrap();
        assert_abs_diff_eq!(closed, 0.476113805554113, epsilon = 1e-12);
        let rho = pure_density(&embed_four_dim(&arr).unwrap());
        let general = negativity_general(&rho, (3, 3)).unwrap();
        assert_abs_diff_eq!(closed, general, epsilon = 1e-10);
    }

    #[test]
    fn balanced_outer_weight_maximizes_negativity() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // half the weight on the outer pair: x = 1/2, the peak of sqrt(x(1-x))
        let arr = [c(h, 0.0), c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_abs_diff_eq!(negativity_pure_4d(&arr).unwrap(), 0.5, epsilon = 1e-14);
        // all the weight on the outer pair: a product state
        let arr = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        assert_abs_diff_eq!(negativity_pure_4d(&arr).unwrap(), 0.0, epsilon = 1e-14);
        // x = 0.2 gives sqrt(0.16) = 0.4
        let a = (0.2f64).sqrt();
        let b = (0.8f64).sqrt();
        let arr = [c(a, 0.0), c(b, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_abs_diff_eq!(negativity_pure_4d(&arr).unwrap(), 0.4, epsilon = 1e-14);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let arr = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(
            negativity_pure_4d(&arr),
            Err(Error::UnnormalizedState { .. })
        ));
    }

    #[test]
    fn bad_density_matrices_are_rejected() {
        // non-Hermitian
        let mut rho = pure_density(&QuantumState::from_label(qubit_pair_labels(), "++").unwrap());
        rho[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(
            negativity_general(&rho, (2, 2)),
            Err(Error::InvalidDensityMatrix { .. })
        ));
        // wrong trace
        let rho = CMat::identity(4, 4);
        assert!(matches!(
            negativity_general(&rho, (2, 2)),
            Err(Error::InvalidDensityMatrix { .. })
        ));
        // not PSD: trace one but one eigenvalue negative
        let mut rho = CMat::zeros(4, 4);
        rho[(0, 0)] = c(1.5, 0.0);
        rho[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(
            negativity_general(&rho, (2, 2)),
            Err(Error::InvalidDensityMatrix { .. })
        ));
        // wrong dimension
        let rho = CMat::identity(3, 3);
        assert!(negativity_general(&rho, (2, 2)).is_err());
    }

    #[test]
    fn concurrence_of_bell_and_product_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumState::new(
            qubit_pair_labels(),
            vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
        )
        .unwrap();
        assert_abs_diff_eq!(pure_state_concurrence(&bell).unwrap(), 1.0, epsilon = 1e-14);
        let prod = QuantumState::from_label(qubit_pair_labels(), "-+").unwrap();
        assert_abs_diff_eq!(pure_state_concurrence(&prod).unwrap(), 0.0, epsilon = 1e-14);
    }
}
