//! Labeled spin operators: Pauli and spin-1 matrices, tensor products, and
//! the small amount of basis bookkeeping the rest of the crate relies on.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;

pub(crate) const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance used when validating Hermiticity of constructed operators.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A Hermitian operator together with the ordered basis labels it acts on.
///
/// All public constructors validate that the matrix is square, that the label
/// list matches the dimension and contains no duplicates, and that the matrix
/// is Hermitian within [`HERMITICITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    labels: Vec<String>,
    data: CMat,
}

impl OperatorMatrix {
    /// Builds a labeled Hermitian operator, validating shape and Hermiticity.
    pub fn hermitian<S: Into<String>>(labels: Vec<S>, data: CMat) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch {
                left: data.nrows(),
                right: data.ncols(),
            });
        }
        if labels.len() != data.nrows() {
            return Err(Error::DimensionMismatch {
                left: labels.len(),
                right: data.nrows(),
            });
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidConfig(format!("duplicate basis label {a:?}")));
            }
        }
        let dev = hermiticity_deviation(&data);
        if dev > HERMITICITY_TOL {
            return Err(Error::NonHermitian { max_dev: dev });
        }
        Ok(Self { labels, data })
    }

    /// Identity operator on the given basis.
    pub fn identity<S: Into<String>>(labels: Vec<S>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        Self {
            labels,
            data: CMat::identity(n, n),
        }
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Ordered basis labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Borrow the raw matrix.
    pub fn data(&self) -> &CMat {
        &self.data
    }

    /// Consume the wrapper and return the raw matrix.
    pub fn into_data(self) -> CMat {
        self.data
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

    /// Matrix element addressed by basis labels.
    pub fn entry(&self, row: &str, col: &str) -> Result<Complex64> {
        let i = self.index_of(row)?;
        let j = self.index_of(col)?;
        Ok(self.data[(i, j)])
    }
}

/// Largest entrywise deviation from Hermiticity, `max |A - A^dag|`.
pub fn hermiticity_deviation(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// The x, y, z operator triple for a single spin, on a labeled basis.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub z: OperatorMatrix,
}

/// Single-qubit basis labels, ordered (+, -).
pub fn qubit_labels() -> Vec<&'static str> {
    vec!["+", "-"]
}

/// Single-qutrit basis labels, ordered (1, 0, -1) by the z projection.
pub fn qutrit_labels() -> Vec<&'static str> {
    vec!["1", "0", "-1"]
}

/// Pair basis labels for two qubits: (++, +-, -+, --).
pub fn qubit_pair_labels() -> Vec<String> {
    concat_labels(&qubit_labels(), &qubit_labels())
}

/// Pair basis labels for two qutrits: (11, 10, 1-1, 01, 00, 0-1, -11, -10, -1-1).
pub fn qutrit_pair_labels() -> Vec<String> {
    concat_labels(&qutrit_labels(), &qutrit_labels())
}

fn concat_labels(a: &[&str], b: &[&str]) -> Vec<String> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for la in a {
        for lb in b {
            out.push(format!("{la}{lb}"));
        }
    }
    out
}

/// Pauli matrices on the (+, -) basis, with `z` diagonal (+1, -1).
pub fn pauli_operators() -> SpinOperators {
    let l = qubit_labels();
    let x = CMat::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO]);
    let y = CMat::from_row_slice(2, 2, &[C_ZERO, -C_I, C_I, C_ZERO]);
    let z = CMat::from_row_slice(2, 2, &[C_ONE, C_ZERO, C_ZERO, -C_ONE]);
    SpinOperators {
        x: OperatorMatrix::hermitian(l.clone(), x).expect("pauli x"),
        y: OperatorMatrix::hermitian(l.clone(), y).expect("pauli y"),
        z: OperatorMatrix::hermitian(l, z).expect("pauli z"),
    }
}

/// Spin-1 matrices on the (1, 0, -1) basis, normalized so that
/// `[x, y] = i z` and `z = diag(1, 0, -1)`.
pub fn spin1_operators() -> SpinOperators {
    let l = qutrit_labels();
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let si = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let x = CMat::from_row_slice(3, 3, &[C_ZERO, s, C_ZERO, s, C_ZERO, s, C_ZERO, s, C_ZERO]);
    let y = CMat::from_row_slice(
        3,
        3,
        &[C_ZERO, -si, C_ZERO, si, C_ZERO, -si, C_ZERO, si, C_ZERO],
    );
    let z = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C_ONE, C_ZERO, -C_ONE]));
    SpinOperators {
        x: OperatorMatrix::hermitian(l.clone(), x).expect("spin1 x"),
        y: OperatorMatrix::hermitian(l.clone(), y).expect("spin1 y"),
        z: OperatorMatrix::hermitian(l, z).expect("spin1 z"),
    }
}

/// Kronecker product of two labeled operators; the first factor is the slow
/// index and basis labels concatenate as (first label, second label).
pub fn tensor_product(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let la: Vec<&str> = a.labels().iter().map(String::as_str).collect();
    let lb: Vec<&str> = b.labels().iter().map(String::as_str).collect();
    let labels = concat_labels(&la, &lb);
    OperatorMatrix::hermitian(labels, a.data().kronecker(b.data()))
}

/// Max-entry absolute norm of the commutator `AB - BA`.
///
/// Returns an error if the operators act on different dimensions.
pub fn commutator_norm(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(commutator_norm_raw(a.data(), b.data()))
}

pub(crate) fn commutator_norm_raw(a: &CMat, b: &CMat) -> f64 {
    let c = a * b - b * a;
    c.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Total z projection encoded in a basis label, e.g. `"+-"` -> 0, `"1-1"` -> 0,
/// `"-1-1"` -> -2. Used for magnetization weights.
pub fn label_z_weight(label: &str) -> Result<f64> {
    let err = || Error::UnknownLabel {
        label: label.to_string(),
    };
    if label.is_empty() {
        return Err(err());
    }
    let mut total = 0.0;
    if label.chars().all(|c| c == '+' || c == '-') {
        for c in label.chars() {
            total += if c == '+' { 1.0 } else { -1.0 };
        }
        return Ok(total);
    }
    let chars: Vec<char> = label.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '1' => {
                total += 1.0;
                i += 1;
            }
            '0' => {
                i += 1;
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '1' {
                    total -= 1.0;
                    i += 2;
                } else {
                    return Err(err());
                }
            }
            _ => return Err(err()),
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_z_is_diagonal_plus_minus_one() {
        let p = pauli_operators();
        assert_eq!(p.z.entry("+", "+").unwrap(), C_ONE);
        assert_eq!(p.z.entry("-", "-").unwrap(), -C_ONE);
        assert_eq!(p.z.entry("+", "-").unwrap(), C_ZERO);
    }

    #[test]
    fn pauli_algebra() {
        let p = pauli_operators();
        // x^2 = y^2 = z^2 = identity
        for m in [&p.x, &p.y, &p.z] {
            let sq = m.data() * m.data();
            assert_abs_diff_eq!((sq - CMat::identity(2, 2)).norm(), 0.0, epsilon = 1e-15);
        }
        // [x, y] = 2 i z
        let comm = p.x.data() * p.y.data() - p.y.data() * p.x.data();
        let expect = p.z.data() * Complex64::new(0.0, 2.0);
        assert_abs_diff_eq!((comm - expect).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(commutator_norm(&p.x, &p.y).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn spin1_algebra_and_matrix_elements() {
        let s = spin1_operators();
        // z = diag(1, 0, -1)
        assert_eq!(s.z.entry("1", "1").unwrap(), C_ONE);
        assert_eq!(s.z.entry("0", "0").unwrap(), C_ZERO);
        assert_eq!(s.z.entry("-1", "-1").unwrap(), -C_ONE);
        // [x, y] = i z
        let comm = s.x.data() * s.y.data() - s.y.data() * s.x.data();
        let expect = s.z.data() * C_I;
        assert_abs_diff_eq!((comm - expect).norm(), 0.0, epsilon = 1e-15);
        // x applied to the middle state mixes the outer states with weight 1/sqrt(2)
        let amp = s.x.entry("1", "0").unwrap();
        assert_abs_diff_eq!(amp.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(amp.im, 0.0, epsilon = 1e-15);
        assert_eq!(s.x.entry("1", "0").unwrap(), s.x.entry("-1", "0").unwrap());
    }

    #[test]
    fn tensor_product_labels_and_entries() {
        let p = pauli_operators();
        let id = OperatorMatrix::identity(qubit_labels());
        let zz = tensor_product(&p.z, &id).unwrap();
        assert_eq!(
            zz.labels(),
            &["++".to_string(), "+-".into(), "-+".into(), "--".into()]
        );
        assert_eq!(zz.entry("+-", "+-").unwrap(), C_ONE);
        assert_eq!(zz.entry("-+", "-+").unwrap(), -C_ONE);
        let xx = tensor_product(&p.x, &p.x).unwrap();
        assert_eq!(xx.entry("++", "--").unwrap(), C_ONE);
        assert_eq!(xx.entry("++", "++").unwrap(), C_ZERO);
    }

    #[test]
    fn qutrit_pair_label_order() {
        let labels = qutrit_pair_labels();
        assert_eq!(
            labels,
            vec!["11", "10", "1-1", "01", "00", "0-1", "-11", "-10", "-1-1"]
        );
    }

    #[test]
    fn commutator_norm_rejects_mismatched_dims() {
        let p = pauli_operators();
        let s = spin1_operators();
        assert!(matches!(
            commutator_norm(&p.x, &s.x),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn commuting_pair_has_zero_norm() {
        let p = pauli_operators();
        let a = tensor_product(&p.z, &OperatorMatrix::identity(qubit_labels())).unwrap();
        let b = tensor_product(&OperatorMatrix::identity(qubit_labels()), &p.x).unwrap();
        assert_abs_diff_eq!(commutator_norm(&a, &b).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn z_weights_parse_both_label_schemes() {
        assert_eq!(label_z_weight("++").unwrap(), 2.0);
        assert_eq!(label_z_weight("+-").unwrap(), 0.0);
        assert_eq!(label_z_weight("--").unwrap(), -2.0);
        assert_eq!(label_z_weight("1-1").unwrap(), 0.0);
        assert_eq!(label_z_weight("-11").unwrap(), 0.0);
        assert_eq!(label_z_weight("-1-1").unwrap(), -2.0);
        assert_eq!(label_z_weight("0-1").unwrap(), -1.0);
        assert_eq!(label_z_weight("-").unwrap(), -1.0);
        assert!(label_z_weight("q").is_err());
    }

    #[test]
    fn hermitian_constructor_rejects_bad_input() {
        let m = CMat::from_row_slice(2, 2, &[C_ZERO, C_ONE, -C_ONE, C_ZERO]);
        assert!(matches!(
            OperatorMatrix::hermitian(vec!["a", "b"], m),
            Err(Error::NonHermitian { .. })
        ));
        let id = CMat::identity(2, 2);
        assert!(OperatorMatrix::hermitian(vec!["a"], id.clone()).is_err());
        assert!(OperatorMatrix::hermitian(vec!["a", "a"], id).is_err());
    }
}
