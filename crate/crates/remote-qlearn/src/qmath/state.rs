use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Normalization tolerance enforced on construction: |Σ|amp|² − 1| ≤ NORM_TOL.
pub const NORM_TOL: f64 = 1e-10;

/// A pure quantum state: a unit-norm complex amplitude vector.
///
/// Dimensions are arbitrary (≥ 2); composite systems are represented by the
/// Kronecker product of their factors, with the first factor owning the
/// slowest-varying index. The reference qubit of a comparator composite is
/// always the first factor.
#[derive(Debug, Clone)]
pub struct QState {
    amps: DVector<Complex64>,
}

impl QState {
    /// Builds a state from raw amplitudes, validating dimension and norm.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidDimension { got: amps.len() });
        }
        let v = DVector::from_vec(amps);
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amps: v })
    }

    /// Internal constructor for amplitudes already known to be normalized
    /// (e.g. the output of a validated unitary, or a renormalized collapse).
    pub(crate) fn from_normalized(amps: DVector<Complex64>) -> Self {
        debug_assert!(
            (amps.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() <= NORM_TOL,
            "internal state drifted off the unit sphere"
        );
        Self { amps }
    }

    /// The computational basis state |k⟩ in the given dimension.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(
            dim >= 2 && k < dim,
            "basis index {k} out of range for dim {dim}"
        );
        let mut v = DVector::from_element(dim, Complex64::ZERO);
        v[k] = Complex64::ONE;
        Self { amps: v }
    }

    /// The qubit state |c⟩ for c ∈ {0, 1}.
    pub fn qubit(c: u8) -> Self {
        Self::basis(2, c as usize)
    }

    /// The qubit state |+⟩ = (|0⟩ + |1⟩)/√2.
    pub fn qubit_plus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            amps: DVector::from_vec(vec![h, h]),
        }
    }

    /// The qubit state |−⟩ = (|0⟩ − |1⟩)/√2.
    pub fn qubit_minus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            amps: DVector::from_vec(vec![h, -h]),
        }
    }

    /// A Haar-distributed random pure state: a vector of i.i.d. standard
    /// complex Gaussians, normalized. Deterministic given the RNG state.
    pub fn haar_random(dim: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { got: dim });
        }
        loop {
            let v = DVector::from_fn(dim, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let norm = v.norm();
            if norm > 1e-6 {
                return Ok(Self {
                    amps: v / Complex64::new(norm, 0.0),
                });
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    /// The inner product ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn inner(&self, other: &QState) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// The fidelity |⟨self|other⟩|² between two pure states.
    pub fn fidelity(&self, other: &QState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Kronecker product of two states; dimensions multiply.
    pub fn tensor(&self, other: &QState) -> QState {
        QState {
            amps: self.amps.kronecker(&other.amps),
        }
    }

    /// Projectively measures the first qubit factor in the computational
    /// basis. Returns the sampled outcome and the renormalized collapsed
    /// state. The outcome is drawn from the squared norms of the two index
    /// blocks; a zero-norm block can never be selected.
    pub fn measure_first_qubit(&self, rng: &mut ChaCha8Rng) -> Result<(u8, QState)> {
        let dim = self.dim();
        if !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: dim + dim % 2,
                got: dim,
            });
        }
        let half = dim / 2;
        let p0: f64 = self.amps.rows(0, half).iter().map(|z| z.norm_sqr()).sum();
        let outcome = u8::from(rng.random::<f64>() >= p0);
        let block = self.amps.rows(half * outcome as usize, half).into_owned();
        let norm = block.norm();
        let collapsed = QState::from_normalized(block / Complex64::new(norm, 0.0));
        Ok((outcome, collapsed))
    }

    /// Applies a Hadamard to the first qubit factor without materializing the
    /// full H ⊗ 𝟙 matrix: amplitude pairs (aᵢ, aᵢ₊ₕ) become
    /// ((aᵢ+aᵢ₊ₕ)/√2, (aᵢ−aᵢ₊ₕ)/√2). Used to realize a ± -basis measurement
    /// as a rotation followed by a computational-basis measurement.
    pub fn hadamard_first_qubit(&self) -> Result<QState> {
        let dim = self.dim();
        if !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: dim + dim % 2,
                got: dim,
            });
        }
        let half = dim / 2;
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut out = DVector::from_element(dim, Complex64::ZERO);
        for i in 0..half {
            let a = self.amps[i];
            let b = self.amps[half + i];
            out[i] = (a + b) * s;
            out[half + i] = (a - b) * s;
        }
        Ok(QState::from_normalized(out))
    }

    /// Applies σ_x to the first qubit factor (swaps the two index blocks).
    pub fn flip_first_qubit(&self) -> Result<QState> {
        let dim = self.dim();
        if !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: dim + dim % 2,
                got: dim,
            });
        }
        let half = dim / 2;
        let mut out = DVector::from_element(dim, Complex64::ZERO);
        for i in 0..half {
            out[i] = self.amps[half + i];
            out[half + i] = self.amps[i];
        }
        Ok(QState::from_normalized(out))
    }

    /// The population of the first-qubit |0⟩ block minus the |1⟩ block
    /// (⟨Z⟩ of the first qubit for a bare qubit state).
    pub fn first_qubit_z_expectation(&self) -> f64 {
        let half = self.dim() / 2;
        let p0: f64 = self.amps.rows(0, half).iter().map(|z| z.norm_sqr()).sum();
        2.0 * p0 - 1.0
    }

    /// The 2×2 reduced density matrix of the first qubit factor, obtained by
    /// tracing out everything else: ρ_jk = Σ_m Ψ[j·h+m] Ψ*[k·h+m].
    pub fn reduced_first_qubit(&self) -> Result<nalgebra::DMatrix<Complex64>> {
        let dim = self.dim();
        if !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: dim + dim % 2,
                got: dim,
            });
        }
        let half = dim / 2;
        let mut rho = nalgebra::DMatrix::from_element(2, 2, Complex64::ZERO);
        for j in 0..2 {
            for k in 0..2 {
                rho[(j, k)] = (0..half)
                    .map(|m| self.amps[j * half + m] * self.amps[k * half + m].conj())
                    .sum();
            }
        }
        Ok(rho)
    }

    fn check_dim(&self, other: &QState) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn constructor_rejects_short_and_unnormalized_vectors() {
        assert!(matches!(
            QState::new(vec![Complex64::ONE]),
            Err(Error::InvalidDimension { got: 1 })
        ));
        assert!(matches!(
            QState::new(vec![Complex64::ONE, Complex64::ONE]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn basis_states_are_orthonormal() {
        let e0 = QState::basis(3, 0);
        let e2 = QState::basis(3, 2);
        assert_eq!(e0.fidelity(&e0).unwrap(), 1.0);
        assert_eq!(e0.fidelity(&e2).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_of_zero_with_plus_is_half() {
        let f = QState::qubit(0).fidelity(&QState::qubit_plus()).unwrap();
        assert!((f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_rejects_dimension_mismatch() {
        let err = QState::qubit(0).fidelity(&QState::basis(3, 0)).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                got: 3
            }
        ));
    }

    #[test]
    fn tensor_of_basis_states() {
        let t = QState::qubit(0).tensor(&QState::qubit(0));
        assert_eq!(t.dim(), 4);
        assert_eq!(t.amplitudes()[0], Complex64::ONE);
        let ht = QState::qubit_plus().tensor(&QState::qubit(1));
        let expect = [
            0.0,
            std::f64::consts::FRAC_1_SQRT_2,
            0.0,
            std::f64::consts::FRAC_1_SQRT_2,
        ];
        for (amp, want) in ht.amplitudes().iter().zip(expect) {
            assert!((amp - Complex64::new(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn measurement_of_product_state_is_deterministic() {
        let mut r = rng(7);
        let psi = QState::haar_random(2, &mut r).unwrap();
        let comp = QState::qubit(0).tensor(&psi);
        for _ in 0..100 {
            let (k, collapsed) = comp.measure_first_qubit(&mut r).unwrap();
            assert_eq!(k, 0);
            assert!((collapsed.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_frequencies_match_block_norms() {
        let mut r = rng(11);
        let comp = QState::qubit_plus().tensor(&QState::haar_random(2, &mut r).unwrap());
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| comp.measure_first_qubit(&mut r).unwrap().0 == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        // 3σ binomial bound around p = 0.5 at n = 1e5.
        assert!(
            (freq - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt(),
            "freq = {freq}"
        );
    }

    #[test]
    fn haar_states_are_unit_norm_and_spread() {
        let mut r = rng(3);
        let a = QState::haar_random(4, &mut r).unwrap();
        let b = QState::haar_random(4, &mut r).unwrap();
        let norm_sq: f64 = a.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        assert!((norm_sq - 1.0).abs() < 1e-10);
        assert!(a.fidelity(&b).unwrap() < 1.0 - 1e-6);
    }

    #[test]
    fn haar_mean_overlap_with_basis_state_is_one_over_d() {
        let mut r = rng(5);
        let e0 = QState::qubit(0);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| {
                QState::haar_random(2, &mut r)
                    .unwrap()
                    .fidelity(&e0)
                    .unwrap()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean = {mean}");
    }

    #[test]
    fn hadamard_first_qubit_rotates_plus_to_zero() {
        let psi = QState::haar_random(3, &mut rng(9)).unwrap();
        let comp = QState::qubit_plus()
            .tensor(&psi)
            .hadamard_first_qubit()
            .unwrap();
        let expect = QState::qubit(0).tensor(&psi);
        let overlap = comp.inner(&expect).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_first_qubit_of_product_state_is_the_qubit_projector() {
        let psi = QState::haar_random(3, &mut rng(17)).unwrap();
        let rho = QState::qubit_minus()
            .tensor(&psi)
            .reduced_first_qubit()
            .unwrap();
        let minus = QState::qubit_minus();
        let expect = minus.amplitudes() * minus.amplitudes().adjoint();
        let dev = (rho - expect).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-14);
    }

    #[test]
    fn reduced_first_qubit_of_maximally_entangled_pair_is_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QState::new(vec![
            Complex64::new(s, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(s, 0.0),
        ])
        .unwrap();
        let rho = bell.reduced_first_qubit().unwrap();
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!(rho[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn flip_first_qubit_swaps_blocks() {
        let psi = QState::haar_random(2, &mut rng(13)).unwrap();
        let flipped = QState::qubit(0).tensor(&psi).flip_first_qubit().unwrap();
        let expect = QState::qubit(1).tensor(&psi);
        assert!((flipped.inner(&expect).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}
