//! The provider-side comparator: a Hadamard / controlled-SWAP / Hadamard
//! network acting on (reference qubit) ⊗ (delivered output) ⊗ (hidden target),
//! an optional hardened front gate Ŵ = |0⟩⟨0|⊗𝟙 + |1⟩⟨1|⊗T̂, and the exact
//! closed-form reference-outcome statistics used as the Monte Carlo fast path.
//!
//! Composite index convention: mode ordering is (reference, output, target);
//! basis state |k⟩|x⟩|y⟩ lives at index k·d² + x·d + y. The controlled swap
//! exchanges the output and target factors on the |1⟩ reference branch.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::{Operator, QState};

/// The controlled-SWAP gate on the 2d²-dimensional composite:
/// |0⟩⟨0| ⊗ 𝟙_{d²} + |1⟩⟨1| ⊗ Ŝ with Ŝ|x⟩|y⟩ = |y⟩|x⟩, built by explicit
/// basis permutation.
pub fn cswap_operator(d: usize) -> Result<Operator> {
    if d < 2 {
        return Err(Error::InvalidDimension { got: d });
    }
    let dd = d * d;
    let mut m = DMatrix::from_element(2 * dd, 2 * dd, Complex64::ZERO);
    for x in 0..d {
        for y in 0..d {
            // Reference |0⟩ branch: identity.
            let i = x * d + y;
            m[(i, i)] = Complex64::ONE;
            // Reference |1⟩ branch: |x⟩|y⟩ → |y⟩|x⟩.
            let src = dd + x * d + y;
            let dst = dd + y * d + x;
            m[(dst, src)] = Complex64::ONE;
        }
    }
    Operator::unitary(m)
}

/// Probability of reading k ∈ {0,1} from the returned reference after the
/// learner's bit-flip correction, as a function of the output–target fidelity:
/// (1 + (−1)^k f)/2.
pub fn outcome_prob(f: f64, k: u8) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange {
            what: "fidelity",
            value: f,
        });
    }
    if k > 1 {
        return Err(Error::OutOfRange {
            what: "outcome index",
            value: k as f64,
        });
    }
    Ok((1.0 + if k == 0 { f } else { -f }) / 2.0)
}

/// Probability that the returned reference reads 0 in the computational basis
/// *before* any bit-flip correction, for an arriving reference qubit with
/// Z-expectation `z` and output–target fidelity `f`: (1 + z·f)/2.
///
/// This generalizes [`outcome_prob`] to tampered references (an honest
/// learning round has z = ±1) and is exact for the plain comparator: the
/// network maps the |0⟩/|1⟩ reference populations (1±z)/2 through the swap
/// test, whose interference term contributes z·f.
pub fn pre_flip_zero_prob(z: f64, f: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::OutOfRange {
            what: "reference Z-expectation",
            value: z,
        });
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange {
            what: "fidelity",
            value: f,
        });
    }
    Ok((1.0 + z * f) / 2.0)
}

/// Probability that an honest ± decoy raises a mismatch when the hardened
/// front gate is mounted: ½(1 − Re⟨χ̃|T̂|χ̃⟩), identical for both decoy signs.
///
/// The plain comparator returns ± references unchanged, but Ŵ acts with T̂ on
/// the |1⟩ component of a ± reference, so perfect decoy transparency and a
/// nontrivial T̂ are mutually exclusive. Hardened sessions therefore either
/// run without ± decoys or accept this deterministic false-alarm rate; the
/// session layer takes the first option and relies on canaries instead.
pub fn hardened_decoy_violation_prob(blinded: &QState, task_unitary: &Operator) -> Result<f64> {
    let t_chi = task_unitary.apply(blinded)?;
    Ok(0.5 * (1.0 - blinded.inner(&t_chi)?.re))
}

/// A unitary mapping `from` to `to`: a rotation in the plane span{from, to}
/// (identity on its orthogonal complement), falling back to a global phase
/// when the two states are parallel.
pub fn unitary_mapping(from: &QState, to: &QState) -> Result<Operator> {
    if from.dim() != to.dim() {
        return Err(Error::DimensionMismatch {
            expected: from.dim(),
            got: to.dim(),
        });
    }
    let d = from.dim();
    let c = from.inner(to)?; // ⟨from|to⟩
    let u1 = from.amplitudes();
    let residual = to.amplitudes() - u1 * c;
    let s = residual.norm();
    if s < 1e-9 {
        // Parallel case: a phase suffices (|c| = 1 up to numerical noise).
        let phase = c / Complex64::new(c.norm(), 0.0);
        return Operator::unitary(DMatrix::identity(d, d) * phase);
    }
    let u2 = residual / Complex64::new(s, 0.0);
    let s = Complex64::new(s, 0.0);
    // Identity off the plane; the block [[c, −s̄],[s, c̄]] on the orthonormal
    // pair (u1, u2) sends u1 → c·u1 + s·u2 = to.
    let m = DMatrix::identity(d, d) - u1 * u1.adjoint() - &u2 * u2.adjoint()
        + (u1 * c + &u2 * s) * u1.adjoint()
        + (u1 * (-s.conj()) + &u2 * c.conj()) * u2.adjoint();
    Operator::unitary(m)
}

/// The provider's comparator device: dimension, hidden target, and the
/// precomputed 2d²-dimensional network matrix (with Ŵ folded in front when
/// hardened).
#[derive(Debug, Clone)]
pub struct BobModule {
    d: usize,
    hardened: bool,
    target: QState,
    task_unitary: Option<Operator>,
    network: Operator,
}

impl BobModule {
    /// Builds the module. `task_unitary` is required iff `hardened`; the
    /// session layer additionally checks T̂|χ_A⟩ = |τ_B⟩ where the fiducial
    /// state is known.
    pub fn new(
        d: usize,
        target: QState,
        hardened: bool,
        task_unitary: Option<Operator>,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension { got: d });
        }
        if target.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: target.dim(),
            });
        }
        if hardened && task_unitary.is_none() {
            return Err(Error::Protocol(
                "hardened module requires a task unitary".into(),
            ));
        }
        if let Some(t) = &task_unitary {
            if t.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: t.dim(),
                });
            }
        }
        let dd = d * d;
        let h_ref = Operator::hadamard().tensor(&Operator::identity(dd));
        let network = h_ref.compose(&cswap_operator(d)?)?.compose(&h_ref)?;
        let network = if hardened {
            let t = task_unitary.as_ref().expect("checked above");
            // Ŵ acts on reference ⊗ output, then extends by identity on the
            // target factor; it is applied before the first Hadamard.
            let mut w = DMatrix::from_element(2 * d, 2 * d, Complex64::ZERO);
            for i in 0..d {
                w[(i, i)] = Complex64::ONE;
                for j in 0..d {
                    w[(d + i, d + j)] = t.matrix()[(i, j)];
                }
            }
            let w_full = Operator::unitary(w)?.tensor(&Operator::identity(d));
            network.compose(&w_full)?
        } else {
            network
        };
        Ok(Self {
            d,
            hardened,
            target,
            task_unitary,
            network,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn hardened(&self) -> bool {
        self.hardened
    }

    pub fn target(&self) -> &QState {
        &self.target
    }

    pub fn task_unitary(&self) -> Option<&Operator> {
        self.task_unitary.as_ref()
    }

    /// Runs the network on an arriving reference ⊗ output pair. The returned
    /// 2d²-dimensional composite is retained by the harness; its first factor
    /// is the reference qubit that travels back to the learner (entangled
    /// with the discarded output and target modes).
    pub fn apply(&self, reference: &QState, output: &QState) -> Result<QState> {
        if reference.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: reference.dim(),
            });
        }
        if output.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: output.dim(),
            });
        }
        let composite = reference.tensor(output).tensor(&self.target);
        self.network.apply(&composite)
    }
}
