//! Static pair Hamiltonians for two qubits and two qutrits, plus the discrete
//! symmetry operators that protect their block structure.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{
    pauli_operators, qubit_pair_labels, qutrit_pair_labels, spin1_operators, tensor_product, CMat,
    OperatorMatrix, C_ONE,
};
use crate::params::CouplingParams;

fn scaled(m: &CMat, g: f64) -> CMat {
    m * Complex64::new(g, 0.0)
}

/// Coupling part of the two-qubit Hamiltonian (everything except the fields).
pub(crate) fn qubit_coupling_matrix(p: &CouplingParams) -> CMat {
    let s = pauli_operators();
    let xx = s.x.data().kronecker(s.x.data());
    let yy = s.y.data().kronecker(s.y.data());
    let zz = s.z.data().kronecker(s.z.data());
    let xy = s.x.data().kronecker(s.y.data());
    let yx = s.y.data().kronecker(s.x.data());
    scaled(&xx, p.gamma_x)
        + scaled(&yy, p.gamma_y)
        + scaled(&zz, p.gamma_z)
        + scaled(&xy, p.gamma_xy)
        + scaled(&yx, p.gamma_yx)
}

/// Field matrix of the first qubit, `sigma_z (x) 1`.
pub(crate) fn qubit_ramp_matrix() -> CMat {
    let s = pauli_operators();
    let id = CMat::identity(2, 2);
    s.z.data().kronecker(&id)
}

/// Coupling part of the two-qutrit Hamiltonian; rejects nonzero `gamma_z`.
pub(crate) fn qutrit_coupling_matrix(p: &CouplingParams) -> Result<CMat> {
    if p.gamma_z != 0.0 {
        return Err(Error::UnsupportedGammaZ { value: p.gamma_z });
    }
    let s = spin1_operators();
    let xx = s.x.data().kronecker(s.x.data());
    let yy = s.y.data().kronecker(s.y.data());
    let xy = s.x.data().kronecker(s.y.data());
    let yx = s.y.data().kronecker(s.x.data());
    Ok(scaled(&xx, p.gamma_x)
        + scaled(&yy, p.gamma_y)
        + scaled(&xy, p.gamma_xy)
        + scaled(&yx, p.gamma_yx))
}

/// Field matrix of the first qutrit, `Sigma_z (x) 1`.
pub(crate) fn qutrit_ramp_matrix() -> CMat {
    let s = spin1_operators();
    let id = CMat::identity(3, 3);
    s.z.data().kronecker(&id)
}

/// Two-qubit Hamiltonian with static fields `omega1`, `omega2` on the two
/// spins and the five bilinear couplings.
pub fn build_qubit_hamiltonian(
    p: &CouplingParams,
    omega1: f64,
    omega2: f64,
) -> Result<OperatorMatrix> {
    let s = pauli_operators();
    let id = CMat::identity(2, 2);
    let h = scaled(&qubit_ramp_matrix(), omega1)
        + scaled(&id.kronecker(s.z.data()), omega2)
        + qubit_coupling_matrix(p);
    OperatorMatrix::hermitian(qubit_pair_labels(), h)
}

/// Two-qutrit Hamiltonian with a static field `omega1` on the first spin.
///
/// A nonzero `gamma_z` is rejected: it breaks the parity block structure the
/// qutrit analysis relies on.
pub fn build_qutrit_hamiltonian(p: &CouplingParams, omega1: f64) -> Result<OperatorMatrix> {
    let h = scaled(&qutrit_ramp_matrix(), omega1) + qutrit_coupling_matrix(p)?;
    OperatorMatrix::hermitian(qutrit_pair_labels(), h)
}

/// Parity of the two-qubit pair, `sigma_z (x) sigma_z`.
///
/// Conjugation by this operator implements a pi rotation of both spins about
/// z (up to a global phase), and the pair Hamiltonian commutes with it for
/// every coupling choice.
pub fn qubit_parity_operator() -> OperatorMatrix {
    let s = pauli_operators();
    tensor_product(&s.z, &s.z).expect("parity")
}

/// Diagonal parity of the two-qutrit pair: +1 on basis states with even total
/// z projection, -1 on odd ones.
pub fn k_operator() -> OperatorMatrix {
    let labels = qutrit_pair_labels();
    let diag: Vec<Complex64> = labels
        .iter()
        .map(|l| {
            let z = crate::operators::label_z_weight(l).expect("label") as i64;
            if z.rem_euclid(2) == 0 {
                C_ONE
            } else {
                -C_ONE
            }
        })
        .collect();
    let m = CMat::from_diagonal(&DVector::from_vec(diag));
    OperatorMatrix::hermitian(labels, m).expect("k operator")
}

/// Total z projection of the qutrit pair, `Sigma_z (x) 1 + 1 (x) Sigma_z`.
pub fn total_z_qutrit() -> OperatorMatrix {
    let s = spin1_operators();
    let id = CMat::identity(3, 3);
    let m = s.z.data().kronecker(&id) + id.kronecker(s.z.data());
    OperatorMatrix::hermitian(qutrit_pair_labels(), m).expect("total z")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{commutator_norm, commutator_norm_raw};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn zero_couplings_give_pure_field_terms() {
        let h = build_qubit_hamiltonian(&CouplingParams::zero(), 1.5, 0.25).unwrap();
        assert_eq!(h.entry("++", "++").unwrap(), Complex64::new(1.75, 0.0));
        assert_eq!(h.entry("+-", "+-").unwrap(), Complex64::new(1.25, 0.0));
        assert_eq!(h.entry("-+", "-+").unwrap(), Complex64::new(-1.25, 0.0));
        assert_eq!(h.entry("--", "--").unwrap(), Complex64::new(-1.75, 0.0));
        assert_eq!(h.entry("++", "--").unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exchange_x_connects_aligned_pairs() {
        let p = CouplingParams::new(1.0, 0.0, 0.0, 0.0, 0.0);
        let h = build_qubit_hamiltonian(&p, 0.0, 0.0).unwrap();
        assert_eq!(h.entry("++", "--").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(h.entry("+-", "-+").unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn qubit_hamiltonian_commutes_with_parity() {
        let p = CouplingParams::new(0.7, -0.2, 0.4, 0.15, -0.35);
        let h = build_qubit_hamiltonian(&p, 0.9, 0.0).unwrap();
        let parity = qubit_parity_operator();
        assert!(commutator_norm(&h, &parity).unwrap() < 1e-12);
        // conjugation by the parity operator leaves the Hamiltonian unchanged
        let r = parity.data();
        let conj = r * h.data() * r;
        assert_abs_diff_eq!((conj - h.data()).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn qutrit_builder_rejects_longitudinal_coupling() {
        let p = CouplingParams::new(0.5, 0.5, 0.1, 0.0, 0.0);
        assert!(matches!(
            build_qutrit_hamiltonian(&p, 1.0),
            Err(Error::UnsupportedGammaZ { .. })
        ));
    }

    #[test]
    fn qutrit_exchange_entry_carries_spin1_weights() {
        let p = CouplingParams::new(1.0, 0.0, 0.0, 0.0, 0.0);
        let h = build_qutrit_hamiltonian(&p, 0.0).unwrap();
        assert_abs_diff_eq!(h.entry("10", "01").unwrap().re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h.entry("11", "00").unwrap().re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h.entry("10", "01").unwrap().im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn qutrit_hamiltonian_commutes_with_k() {
        let p = CouplingParams::new(0.45, 0.15, 0.0, 0.2, -0.05);
        let h = build_qutrit_hamiltonian(&p, 1.3).unwrap();
        let k = k_operator();
        assert!(commutator_norm(&h, &k).unwrap() < 1e-12);
    }

    #[test]
    fn k_operator_signs_follow_total_z_parity() {
        let k = k_operator();
        for (label, sign) in [
            ("11", 1.0),
            ("10", -1.0),
            ("1-1", 1.0),
            ("01", -1.0),
            ("00", 1.0),
            ("0-1", -1.0),
            ("-11", 1.0),
            ("-10", -1.0),
            ("-1-1", 1.0),
        ] {
            assert_eq!(k.entry(label, label).unwrap(), Complex64::new(sign, 0.0));
        }
    }

    #[test]
    fn isotropic_antisymmetric_cross_case_conserves_total_z() {
        use crate::params::ScenarioKind;
        let p = ScenarioKind::IsoExchangeDm.qutrit_params(0.8, 0.3).unwrap();
        let h = build_qutrit_hamiltonian(&p, 0.7).unwrap();
        let st = total_z_qutrit();
        assert!(commutator_norm(&h, &st).unwrap() < 1e-12);
        // a symmetric cross term does not conserve it
        let p2 = ScenarioKind::IsoExchangeDd.qutrit_params(0.8, 0.3).unwrap();
        let h2 = build_qutrit_hamiltonian(&p2, 0.7).unwrap();
        assert!(commutator_norm_raw(h2.data(), st.data()) > 1e-3);
    }
}
