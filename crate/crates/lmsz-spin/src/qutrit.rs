//! Two-qutrit sweep analysis: parity-block decomposition into fictitious
//! qubits, closed-form transition probabilities, and the constrained
//! three-level reduction of the even block.

use crate::error::{Error, Result};
use crate::hamiltonian::build_qutrit_hamiltonian;
use crate::operators::{spin1_operators, CMat};
use crate::params::{CouplingParams, ScenarioKind};
use crate::qubit::lmsz_probability;
use num_complex::Complex64;

/// Tolerance on the coupling constraints of [`three_level_reduction`].
pub const REDUCTION_CONSTRAINT_TOL: f64 = 1e-12;

/// Basis labels of the odd-parity (4-dim) block, in order.
pub const FOUR_DIM_LABELS: [&str; 4] = ["10", "01", "0-1", "-10"];
/// Indices of the 4-dim block labels in the 9-dim pair basis.
pub const FOUR_DIM_INDICES: [usize; 4] = [1, 3, 5, 7];
/// Fictitious two-qubit labels the 4-dim block maps onto, in order.
pub const FOUR_DIM_FICTITIOUS: [&str; 4] = ["++", "+-", "-+", "--"];
/// Basis labels of the even-parity (5-dim) block, in order.
pub const FIVE_DIM_LABELS: [&str; 5] = ["11", "1-1", "00", "-11", "-1-1"];
/// Indices of the 5-dim block labels in the 9-dim pair basis.
pub const FIVE_DIM_INDICES: [usize; 5] = [0, 2, 4, 6, 8];

/// Parity-block decomposition of the two-qutrit Hamiltonian.
///
/// The odd block is equivalent to two uncoupled fictitious qubits whose
/// transverse parameters are the coupling combinations stored here. In the
/// realized block matrices every transverse parameter appears at half
/// strength — spin-1 matrix elements carry a factor 1/2 relative to the
/// named combinations — which the sweep-rate calibration absorbs.
#[derive(Debug, Clone, PartialEq)]
pub struct QutritBlockDecomposition {
    /// Couplings the decomposition was built from.
    pub params: CouplingParams,
    /// Transverse (x, y) parameters of the first fictitious qubit:
    /// `(gamma_x - gamma_y, gamma_xy + gamma_yx)`.
    pub h1_transverse: (f64, f64),
    /// Transverse (x, y) parameters of the second fictitious qubit:
    /// `(gamma_x + gamma_y, gamma_yx - gamma_xy)`.
    pub h2_transverse: (f64, f64),
}

impl QutritBlockDecomposition {
    /// Realized 4-dim block of the pair Hamiltonian at field `omega1`.
    pub fn four_dim_block(&self, omega1: f64) -> CMat {
        extract_block(&self.full_matrix(omega1), &FOUR_DIM_INDICES)
    }

    /// Realized 5-dim block of the pair Hamiltonian at field `omega1`.
    pub fn five_dim_block(&self, omega1: f64) -> CMat {
        extract_block(&self.full_matrix(omega1), &FIVE_DIM_INDICES)
    }

    /// The two realized fictitious-qubit matrices at field `omega1`; their
    /// Kronecker sum equals the 4-dim block exactly.
    pub fn fictitious_block_matrices(&self, omega1: f64) -> (CMat, CMat) {
        (
            fictitious_matrix(omega1, self.h1_transverse),
            fictitious_matrix(omega1, self.h2_transverse),
        )
    }

    /// Largest off-block entry of the pair Hamiltonian (a structural check;
    /// zero up to rounding for every valid coupling set).
    pub fn off_block_leakage(&self, omega1: f64) -> f64 {
        let h = self.full_matrix(omega1);
        let mut worst = 0.0f64;
        for &i in &FOUR_DIM_INDICES {
            for &j in &FIVE_DIM_INDICES {
                worst = worst.max(h[(i, j)].norm()).max(h[(j, i)].norm());
            }
        }
        worst
    }

    fn full_matrix(&self, omega1: f64) -> CMat {
        build_qutrit_hamiltonian(&self.params, omega1)
            .expect("params validated at decomposition")
            .into_data()
    }
}

fn extract_block(h: &CMat, indices: &[usize]) -> CMat {
    let n = indices.len();
    CMat::from_fn(n, n, |i, j| h[(indices[i], indices[j])])
}

fn fictitious_matrix(omega1: f64, (x, y): (f64, f64)) -> CMat {
    // half the field and half the named transverse parameters
    let w = Complex64::new(omega1 / 2.0, 0.0);
    let off = Complex64::new(x / 2.0, -y / 2.0);
    CMat::from_row_slice(2, 2, &[w, off, off.conj(), -w])
}

/// Decomposes the two-qutrit couplings into parity blocks and fictitious
/// qubits. Rejects a nonzero `gamma_z`.
pub fn decompose_qutrit_blocks(p: &CouplingParams) -> Result<QutritBlockDecomposition> {
    if p.gamma_z != 0.0 {
        return Err(Error::UnsupportedGammaZ { value: p.gamma_z });
    }
    Ok(QutritBlockDecomposition {
        params: *p,
        h1_transverse: (p.gamma_plus(), p.gamma_cross_plus()),
        h2_transverse: (p.gamma_minus(), p.gamma_cross_minus()),
    })
}

/// Asymptotic transition probabilities `(P1, P2)` of the two fictitious
/// qubits at sweep rate `alpha`.
pub fn fictitious_probabilities(p: &CouplingParams, alpha: f64) -> Result<(f64, f64)> {
    let d = decompose_qutrit_blocks(p)?;
    let m1 = d.h1_transverse.0.hypot(d.h1_transverse.1);
    let m2 = d.h2_transverse.0.hypot(d.h2_transverse.1);
    Ok((lmsz_probability(m1, alpha)?, lmsz_probability(m2, alpha)?))
}

fn check_probability(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    Ok(p)
}

/// Final 4-dim block populations for a sweep started in the lowest diabatic
/// state, ordered as [`FOUR_DIM_LABELS`]:
/// `(P1 P2, P1 (1 - P2), (1 - P1) P2, (1 - P1)(1 - P2))`.
pub fn four_dim_transition_probs(p1: f64, p2: f64) -> Result<[f64; 4]> {
    let p1 = check_probability(p1)?;
    let p2 = check_probability(p2)?;
    Ok([
        p1 * p2,
        p1 * (1.0 - p2),
        (1.0 - p1) * p2,
        (1.0 - p1) * (1.0 - p2),
    ])
}

/// The constrained three-level reduction of the even block.
///
/// Exists when `gamma_x = gamma_y`, `gamma_xy = -gamma_yx`, and `gamma_z = 0`
/// (all within [`REDUCTION_CONSTRAINT_TOL`]). The named parameters are
/// `gamma_tilde = 2 gamma_x` and `cross_tilde = 2 gamma_xy`; the associated
/// three-level sweep couples through `gamma_tilde` on x and `-cross_tilde`
/// on y at full field strength.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelReduction {
    pub gamma_tilde: f64,
    pub cross_tilde: f64,
    /// Pair-basis labels of the reduced three-level ladder, ordered by the
    /// fictitious z projection (1, 0, -1).
    pub ladder: [&'static str; 3],
    /// The two pair-basis states left invariant (one-dimensional subspaces).
    pub frozen: [&'static str; 2],
}

impl ThreeLevelReduction {
    /// Transverse (x, y) parameters of the named three-level Hamiltonian.
    pub fn transverse(&self) -> (f64, f64) {
        (self.gamma_tilde, -self.cross_tilde)
    }

    /// The named three-level sweep matrix at field `omega1`:
    /// `omega1 Sigma_z + gamma_tilde Sigma_x - cross_tilde Sigma_y`.
    pub fn matrix(&self, omega1: f64) -> CMat {
        let s = spin1_operators();
        s.z.data() * Complex64::new(omega1, 0.0)
            + s.x.data() * Complex64::new(self.gamma_tilde, 0.0)
            + s.y.data() * Complex64::new(-self.cross_tilde, 0.0)
    }

    /// Transverse (x, y) couplings of the middle block actually embedded in
    /// the 9-dim pair Hamiltonian. They are the named parameters scaled by
    /// `1/sqrt(2)`, while the embedded field acts at full strength; the
    /// embedded crossing therefore differs from the isolated three-level
    /// sweep, which is defined by the named parameters.
    pub fn embedded_block_transverse(&self) -> (f64, f64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (self.gamma_tilde * s, -self.cross_tilde * s)
    }

    /// Closed-form two-level base probability of the isolated three-level
    /// sweep at rate `alpha`:
    /// `1 - exp(-2 pi (gamma_tilde^2 + cross_tilde^2) / alpha)`.
    pub fn base_probability(&self, alpha: f64) -> Result<f64> {
        lmsz_probability(self.gamma_tilde.hypot(self.cross_tilde), alpha)
    }
}

/// Builds the three-level reduction, verifying its coupling constraints.
pub fn three_level_reduction(p: &CouplingParams) -> Result<ThreeLevelReduction> {
    let checks: [(&'static str, f64); 3] = [
        ("gamma_x = gamma_y", p.gamma_x - p.gamma_y),
        ("gamma_xy = -gamma_yx", p.gamma_xy + p.gamma_yx),
        ("gamma_z = 0", p.gamma_z),
    ];
    for (constraint, deviation) in checks {
        if deviation.abs() > REDUCTION_CONSTRAINT_TOL {
            return Err(Error::ConstraintViolated {
                constraint,
                deviation: deviation.abs(),
            });
        }
    }
    Ok(ThreeLevelReduction {
        gamma_tilde: p.gamma_x + p.gamma_y,
        cross_tilde: p.gamma_xy - p.gamma_yx,
        ladder: ["1-1", "00", "-11"],
        frozen: ["11", "-1-1"],
    })
}

/// Final ladder populations of the isolated three-level sweep started at the
/// bottom of the ladder, given its base probability `p3`:
/// `(p3^2, 2 p3 (1 - p3), (1 - p3)^2)` on the (top, middle, bottom) states.
pub fn three_level_probs(p3: f64) -> Result<[f64; 3]> {
    let p = check_probability(p3)?;
    Ok([p * p, 2.0 * p * (1.0 - p), (1.0 - p) * (1.0 - p)])
}

/// Asymptotic weight `x = P1 P2 + (1 - P1)(1 - P2)` of the outer pair of the
/// 4-dim block, which controls the final negativity `sqrt(x (1 - x))`.
pub fn asymptotic_x(p1: f64, p2: f64) -> Result<f64> {
    let p1 = check_probability(p1)?;
    let p2 = check_probability(p2)?;
    Ok(p1 * p2 + (1.0 - p1) * (1.0 - p2))
}

/// Asymptotic negativity of the 4-dim block state, `sqrt(x (1 - x))`.
pub fn asymptotic_negativity(p1: f64, p2: f64) -> Result<f64> {
    let x = asymptotic_x(p1, p2)?;
    Ok((x * (1.0 - x)).sqrt())
}

/// Fictitious probabilities of a named scenario realized on the qutrit pair.
pub fn qutrit_scenario_pair(
    kind: ScenarioKind,
    gamma: f64,
    cross: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    let p = kind.qutrit_params(gamma, cross)?;
    fictitious_probabilities(&p, alpha)
}

/// The symmetric reading of the antisymmetric-cross scenario
/// (`gamma_xy = gamma_yx = cross / 2`), kept as an explicit variant: it
/// couples the first fictitious qubit through the cross term instead of
/// leaving it dark, and so behaves like the symmetric-cross scenario.
pub fn qutrit_scenario_pair_symmetric_cross_variant(
    gamma: f64,
    cross: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    let p = CouplingParams::new(gamma / 2.0, gamma / 2.0, 0.0, cross / 2.0, cross / 2.0);
    fictitious_probabilities(&p, alpha)
}

/// Indices of the middle three-level ladder within the 9-dim pair basis.
pub fn five_dim_middle_indices() -> [usize; 3] {
    [2, 4, 6]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn decomposition_matches_hand_computation() {
        let p = CouplingParams::new(1.0, 0.4, 0.0, 0.2, -0.2);
        let d = decompose_qutrit_blocks(&p).unwrap();
        assert_abs_diff_eq!(d.h1_transverse.0, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(d.h1_transverse.1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.h2_transverse.0, 1.4, epsilon = 1e-15);
        assert_abs_diff_eq!(d.h2_transverse.1, -0.4, epsilon = 1e-15);
    }

    #[test]
    fn gamma_z_is_rejected() {
        let p = CouplingParams::new(0.5, 0.5, 0.2, 0.0, 0.0);
        assert!(matches!(
            decompose_qutrit_blocks(&p),
            Err(Error::UnsupportedGammaZ { .. })
        ));
    }

    #[test]
    fn blocks_do_not_leak_into_each_other() {
        let p = CouplingParams::new(0.45, 0.15, 0.0, 0.2, -0.05);
        let d = decompose_qutrit_blocks(&p).unwrap();
        assert!(d.off_block_leakage(0.8) < 1e-12);
    }

    #[test]
    fn four_dim_block_is_the_kronecker_sum_of_the_fictitious_qubits() {
        let p = CouplingParams::new(0.45, 0.15, 0.0, 0.2, -0.05);
        let d = decompose_qutrit_blocks(&p).unwrap();
        let w1 = 0.9;
        let block = d.four_dim_block(w1);
        let (h1, h2) = d.fictitious_block_matrices(w1);
        let id = CMat::identity(2, 2);
        let sum = h1.kronecker(&id) + id.kronecker(&h2);
        assert_abs_diff_eq!((block - sum).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn fictitious_probabilities_reduce_to_plain_exchange() {
        // equal exchange, no cross terms: first fictitious qubit dark
        let p = CouplingParams::new(0.5, 0.5, 0.0, 0.0, 0.0);
        let (p1, p2) = fictitious_probabilities(&p, 1.0).unwrap();
        assert_abs_diff_eq!(p1, 0.0, epsilon = 1e-15);
        let expect = 1.0 - (-2.0 * std::f64::consts::PI).exp();
        assert_abs_diff_eq!(p2, expect, epsilon = 1e-14);
    }

    #[test]
    fn transition_products_close() {
        let probs = four_dim_transition_probs(0.3, 0.8).unwrap();
        assert_abs_diff_eq!(probs[0], 0.24, epsilon = 1e-15);
        assert_abs_diff_eq!(probs[1], 0.06, epsilon = 1e-15);
        assert_abs_diff_eq!(probs[2], 0.56, epsilon = 1e-15);
        assert_abs_diff_eq!(probs[3], 0.14, epsilon = 1e-15);
        assert_abs_diff_eq!(probs.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(four_dim_transition_probs(1.2, 0.5).is_err());
    }

    #[test]
    fn reduction_requires_its_constraints() {
        let good = CouplingParams::new(0.5, 0.5, 0.0, 0.25, -0.25);
        let r = three_level_reduction(&good).unwrap();
        assert_abs_diff_eq!(r.gamma_tilde, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.cross_tilde, 0.5, epsilon = 1e-15);
        assert_eq!(r.ladder, ["1-1", "00", "-11"]);
        assert_eq!(r.frozen, ["11", "-1-1"]);

        let aniso = CouplingParams::new(0.6, 0.5, 0.0, 0.25, -0.25);
        match three_level_reduction(&aniso) {
            Err(Error::ConstraintViolated { constraint, .. }) => {
                assert_eq!(constraint, "gamma_x = gamma_y")
            }
            other => panic!("expected constraint violation, got {other:?}"),
        }
        let sym = CouplingParams::new(0.5, 0.5, 0.0, 0.25, 0.25);
        match three_level_reduction(&sym) {
            Err(Error::ConstraintViolated { constraint, .. }) => {
                assert_eq!(constraint, "gamma_xy = -gamma_yx")
            }
            other => panic!("expected constraint violation, got {other:?}"),
        }
    }

    #[test]
    fn five_dim_block_splits_and_middle_matches_the_scaled_reduction() {
        let p = CouplingParams::new(0.5, 0.5, 0.0, 0.25, -0.25);
        let r = three_level_reduction(&p).unwrap();
        let w1 = 1.1;
        let h = build_qutrit_hamiltonian(&p, w1).unwrap().into_data();
        // the frozen corner states decouple from everything else
        for frozen in [0usize, 8] {
            for j in 0..9 {
                if j != frozen {
                    assert!(h[(frozen, j)].norm() < 1e-12, "leak at ({frozen},{j})");
                }
            }
        }
        // the middle 3x3 block carries the named couplings scaled by 1/sqrt(2)
        let mid = extract_block(&h, &five_dim_middle_indices());
        let (ex, ey) = r.embedded_block_transverse();
        let s = spin1_operators();
        let target = s.z.data() * Complex64::new(w1, 0.0)
            + s.x.data() * Complex64::new(ex, 0.0)
            + s.y.data() * Complex64::new(ey, 0.0);
        assert_abs_diff_eq!((mid - target).norm(), 0.0, epsilon = 1e-13);
        // while the named matrix itself uses the unscaled parameters
        let named = r.matrix(w1);
        assert_abs_diff_eq!(
            named[(0, 1)].re,
            r.gamma_tilde * std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn ladder_products_close() {
        let probs = three_level_probs(0.6).unwrap();
        assert_abs_diff_eq!(probs[0], 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(probs[1], 0.48, epsilon = 1e-15);
        assert_abs_diff_eq!(probs[2], 0.16, epsilon = 1e-15);
        assert_abs_diff_eq!(probs.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(three_level_probs(-0.1).is_err());
    }

    #[test]
    fn scenario_pairs_follow_the_fictitious_magnitudes() {
        let alpha = 1.2;
        let (g, c) = (0.7, 0.4);
        let f = |m2: f64| 1.0 - (-2.0 * std::f64::consts::PI * m2 / alpha).exp();
        // antisymmetric cross: first fictitious qubit dark, second joint
        let (p1, p2) = qutrit_scenario_pair(ScenarioKind::IsoExchangeDm, g, c, alpha).unwrap();
        assert_abs_diff_eq!(p1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p2, f(g * g + c * c), epsilon = 1e-14);
        // symmetric cross: split between the two
        let (p1, p2) = qutrit_scenario_pair(ScenarioKind::IsoExchangeDd, g, c, alpha).unwrap();
        assert_abs_diff_eq!(p1, f(c * c), epsilon = 1e-14);
        assert_abs_diff_eq!(p2, f(g * g), epsilon = 1e-14);
        // both cross terms
        let (p1, p2) = qutrit_scenario_pair(ScenarioKind::IsoExchangeDdDm, g, c, alpha).unwrap();
        assert_abs_diff_eq!(p1, f(c * c), epsilon = 1e-14);
        assert_abs_diff_eq!(p2, f(g * g + c * c), epsilon = 1e-14);
        // exchange only collapses every cross-free case
        let (p1, p2) = qutrit_scenario_pair(ScenarioKind::ExchangeOnly, g, 0.0, alpha).unwrap();
        assert_abs_diff_eq!(p1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p2, f(g * g), epsilon = 1e-14);
        // the preserved symmetric reading behaves like the symmetric case
        let (v1, v2) = qutrit_scenario_pair_symmetric_cross_variant(g, c, alpha).unwrap();
        assert_abs_diff_eq!(v1, f(c * c), epsilon = 1e-14);
        assert_abs_diff_eq!(v2, f(g * g), epsilon = 1e-14);
    }

    #[test]
    fn x_weight_and_negativity() {
        assert_abs_diff_eq!(asymptotic_x(1.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(asymptotic_x(0.5, 0.9).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            asymptotic_negativity(0.5, 0.9).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(asymptotic_negativity(1.0, 1.0).unwrap(), 0.0);
        assert!(asymptotic_x(1.5, 0.5).is_err());
    }
}
