use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::operator::Operator;

/// The d²−1 Hermitian, traceless, trace-orthogonal generators of SU(d),
/// normalized so that tr(G_j G_k) = 2δ_jk.
///
/// Construction, for 0-based basis indices j < k and levels l = 1..d−1:
///   u_jk = |j⟩⟨k| + |k⟩⟨j|
///   v_jk = −i(|j⟩⟨k| − |k⟩⟨j|)
///   w_l  = √(2/(l(l+1))) (Σ_{i<l} |i⟩⟨i| + |l−1⟩⟨l−1| − l|l⟩⟨l|)   [diagonal]
///
/// The ordering is frozen so parameter vectors are reproducible: all u_jk in
/// lexicographic (j,k) order, then all v_jk in the same order, then w_1..w_{d−1}.
/// For d = 2 this yields exactly (σ_x, σ_y, σ_z).
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    d: usize,
    gens: Vec<Operator>,
}

impl GeneratorSet {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of generators, d²−1 — the length of every parameter vector.
    pub fn param_len(&self) -> usize {
        self.d * self.d - 1
    }

    pub fn generators(&self) -> &[Operator] {
        &self.gens
    }

    /// The Hermitian combination a·G = Σ_j a_j G_j for real weights a.
    pub fn weighted_sum(&self, a: &[f64]) -> Result<Operator> {
        if a.len() != self.param_len() {
            return Err(Error::ParamLength {
                expected: self.param_len(),
                got: a.len(),
            });
        }
        let mut m = DMatrix::from_element(self.d, self.d, Complex64::ZERO);
        for (coeff, g) in a.iter().zip(&self.gens) {
            m += g.matrix() * Complex64::new(*coeff, 0.0);
        }
        Operator::hermitian(m)
    }
}

/// Builds the generator set for dimension d ≥ 2.
pub fn build_generators(d: usize) -> Result<GeneratorSet> {
    if d < 2 {
        return Err(Error::InvalidDimension { got: d });
    }
    let mut gens = Vec::with_capacity(d * d - 1);
    // Symmetric off-diagonal family.
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = DMatrix::from_element(d, d, Complex64::ZERO);
            m[(j, k)] = Complex64::ONE;
            m[(k, j)] = Complex64::ONE;
            gens.push(Operator::hermitian(m).expect("u_jk is Hermitian by construction"));
        }
    }
    // Antisymmetric off-diagonal family.
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = DMatrix::from_element(d, d, Complex64::ZERO);
            m[(j, k)] = Complex64::new(0.0, -1.0);
            m[(k, j)] = Complex64::new(0.0, 1.0);
            gens.push(Operator::hermitian(m).expect("v_jk is Hermitian by construction"));
        }
    }
    // Diagonal family.
    for l in 1..d {
        let coeff = (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt();
        let mut m = DMatrix::from_element(d, d, Complex64::ZERO);
        for i in 0..l {
            m[(i, i)] = Complex64::new(coeff, 0.0);
        }
        m[(l, l)] = Complex64::new(-coeff * l as f64, 0.0);
        gens.push(Operator::hermitian(m).expect("w_l is Hermitian by construction"));
    }
    Ok(GeneratorSet { d, gens })
}

/// The parameterized unitary Û(a) = exp(−i a·G), computed by Hermitian
/// eigendecomposition so the result is unitary to floating-point accuracy.
pub fn unitary_from_params(a: &[f64], gens: &GeneratorSet) -> Result<Operator> {
    gens.weighted_sum(a)?.exp_neg_i()
}

/// Reduces an angle into the canonical parameter interval [−π, π).
pub fn wrap_angle(x: f64) -> f64 {
    (x + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI
}
