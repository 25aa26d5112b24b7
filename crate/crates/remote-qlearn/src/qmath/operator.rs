use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::state::QState;

/// Unitarity tolerance enforced at construction: max |U†U − 𝟙| ≤ UNITARY_TOL.
pub const UNITARY_TOL: f64 = 1e-10;
/// Hermiticity tolerance enforced at construction: max |A − A†| ≤ HERMITIAN_TOL.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Which validation an [`Operator`] passed when it was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    Unitary,
    Hermitian,
}

/// A dense complex square matrix, validated at construction as either unitary
/// (gates) or Hermitian (observables, generators).
#[derive(Debug, Clone)]
pub struct Operator {
    class: OperatorClass,
    m: DMatrix<Complex64>,
}

impl Operator {
    /// Validates `m` as unitary (max |U†U − 𝟙| ≤ 1e-10) and wraps it.
    pub fn unitary(m: DMatrix<Complex64>) -> Result<Self> {
        let n = square_dim(&m)?;
        let gram = m.adjoint() * &m;
        let deviation = max_deviation_from_identity(&gram, n);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self {
            class: OperatorClass::Unitary,
            m,
        })
    }

    /// Validates `m` as Hermitian (max |A − A†| ≤ 1e-12) and wraps it.
    pub fn hermitian(m: DMatrix<Complex64>) -> Result<Self> {
        square_dim(&m)?;
        let deviation = (&m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            class: OperatorClass::Hermitian,
            m,
        })
    }

    /// The identity gate in the given dimension.
    pub fn identity(dim: usize) -> Self {
        Self {
            class: OperatorClass::Unitary,
            m: DMatrix::identity(dim, dim),
        }
    }

    /// The single-qubit Hadamard gate.
    pub fn hadamard() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            class: OperatorClass::Unitary,
            m: DMatrix::from_row_slice(2, 2, &[s, s, s, -s]),
        }
    }

    /// The single-qubit bit-flip gate σ_x.
    pub fn sigma_x() -> Self {
        Self {
            class: OperatorClass::Unitary,
            m: DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::ZERO,
                    Complex64::ONE,
                    Complex64::ONE,
                    Complex64::ZERO,
                ],
            ),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn class(&self) -> OperatorClass {
        self.class
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Applies the operator to a state of matching dimension.
    pub fn apply(&self, psi: &QState) -> Result<QState> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        let out = &self.m * psi.amplitudes();
        if self.class == OperatorClass::Unitary {
            Ok(QState::from_normalized(out))
        } else {
            // A Hermitian operator does not preserve norm in general; callers
            // applying one to a state must renormalize explicitly, so route
            // the result through the validating constructor.
            QState::new(out.iter().copied().collect())
        }
    }

    /// Kronecker product; both operands must share a class, which the result
    /// inherits (the product preserves both unitarity and hermiticity).
    pub fn tensor(&self, other: &Operator) -> Operator {
        assert_eq!(self.class, other.class, "tensor of mixed operator classes");
        Operator {
            class: self.class,
            m: self.m.kronecker(&other.m),
        }
    }

    /// Matrix product `self · other` of two unitaries.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        assert_eq!(
            self.class,
            OperatorClass::Unitary,
            "compose expects unitaries"
        );
        assert_eq!(
            other.class,
            OperatorClass::Unitary,
            "compose expects unitaries"
        );
        Ok(Operator {
            class: OperatorClass::Unitary,
            m: &self.m * &other.m,
        })
    }

    /// The conjugate transpose, keeping the validation class.
    pub fn adjoint(&self) -> Operator {
        Operator {
            class: self.class,
            m: self.m.adjoint(),
        }
    }

    /// exp(−i A) for Hermitian A, computed by eigendecomposition so the result
    /// is unitary to floating-point accuracy: A = VΛV† ⇒ exp(−iA) = V e^{−iΛ} V†.
    pub fn exp_neg_i(&self) -> Result<Operator> {
        if self.class != OperatorClass::Hermitian {
            return Err(Error::NotHermitian {
                deviation: f64::NAN,
            });
        }
        let eig = nalgebra::linalg::SymmetricEigen::new(self.m.clone());
        let phases =
            DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l)));
        let u = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        Operator::unitary(u)
    }
}

/// Mean density matrix Σ|ψᵢ⟩⟨ψᵢ| / N of an ensemble of equal-dimension states.
pub fn average_density(states: &[QState]) -> Result<DMatrix<Complex64>> {
    let first = states
        .first()
        .ok_or(Error::Protocol("empty state ensemble".into()))?;
    let d = first.dim();
    let mut rho = DMatrix::from_element(d, d, Complex64::ZERO);
    for s in states {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.dim(),
            });
        }
        let v = s.amplitudes();
        rho += v * v.adjoint();
    }
    Ok(rho / Complex64::new(states.len() as f64, 0.0))
}

/// Trace distance ½‖ρ − 𝟙/d‖₁ between a density matrix and the maximally
/// mixed state, via the eigenvalues of the Hermitian difference.
pub fn trace_distance_from_maximally_mixed(rho: &DMatrix<Complex64>) -> Result<f64> {
    let d = square_dim(rho)?;
    let diff = rho - DMatrix::<Complex64>::identity(d, d) / Complex64::new(d as f64, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::new(diff);
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

fn square_dim(m: &DMatrix<Complex64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.nrows() < 2 {
        return Err(Error::InvalidDimension { got: m.nrows() });
    }
    Ok(m.nrows())
}

fn max_deviation_from_identity(gram: &DMatrix<Complex64>, n: usize) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            dev = dev.max((gram[(i, j)] - target).norm());
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::state::QState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_constructor_rejects_non_unitary_matrices() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::ONE,
                Complex64::ONE,
                Complex64::ZERO,
                Complex64::ONE,
            ],
        );
        assert!(matches!(
            Operator::unitary(m),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetric_matrices() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::ZERO,
                Complex64::ONE,
                Complex64::ZERO,
                Complex64::ZERO,
            ],
        );
        assert!(matches!(
            Operator::hermitian(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn hadamard_squares_to_identity() {
        let h = Operator::hadamard();
        let hh = h.compose(&h).unwrap();
        let id = Operator::identity(2);
        let dev = (hh.matrix() - id.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-15);
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i4 = Operator::identity(2).tensor(&Operator::identity(2));
        assert_eq!(i4.dim(), 4);
        let dev = (i4.matrix() - Operator::identity(4).matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev == 0.0);
    }

    #[test]
    fn unitary_application_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = Operator::hadamard();
        for _ in 0..100 {
            let psi = QState::haar_random(2, &mut rng).unwrap();
            let out = h.apply(&psi).unwrap();
            let norm_sq: f64 = out.amplitudes().iter().map(|z| z.norm_sqr()).sum();
            assert!((norm_sq - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn exp_neg_i_of_pauli_x_at_pi_is_minus_identity() {
        let sx = Operator::hermitian(Operator::sigma_x().matrix().clone()).unwrap();
        let scaled =
            Operator::hermitian(sx.matrix() * Complex64::new(std::f64::consts::PI, 0.0)).unwrap();
        let u = scaled.exp_neg_i().unwrap();
        let dev = (u.matrix() + Operator::identity(2).matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "deviation from -identity: {dev}");
    }

    #[test]
    fn average_density_of_antipodal_states_is_maximally_mixed() {
        let rho = average_density(&[QState::qubit(0), QState::qubit(1)]).unwrap();
        assert!(trace_distance_from_maximally_mixed(&rho).unwrap() < 1e-15);
    }

    #[test]
    fn trace_distance_of_pure_state_from_mixed_is_half_for_qubits() {
        let rho = average_density(&[QState::qubit(0)]).unwrap();
        let td = trace_distance_from_maximally_mixed(&rho).unwrap();
        assert!((td - 0.5).abs() < 1e-12);
    }
}
