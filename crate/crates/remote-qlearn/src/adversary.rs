//! Pluggable channel attackers and the traffic-mixing diagnostic.
//!
//! An [`Adversary`] interposes on the three one-way channels of a session:
//! the forward reference channel (a bare qubit), the forward output channel
//! (a d-dimensional state), and the return reference channel. On the return
//! path the reference is in general entangled with the provider's discarded
//! modes, so no bare state can be handed out; the hook instead declares an
//! action (pass or computational-basis measurement) that the session realizes
//! exactly on either simulation path.
//!
//! All hooks receive the trial kind. This encodes the strongest-adversary
//! premise used throughout: an eavesdropper who can already distinguish
//! learning traffic from decoy traffic. Detection guarantees proven against
//! her hold a fortiori against weaker attackers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gate::BobModule;
use crate::qmath::{average_density, trace_distance_from_maximally_mixed, QState};
use crate::session::{ChannelMessage, SessionConfig, TrialKind};

/// Action an adversary may take on the returning reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnTap {
    /// Forward untouched.
    Pass,
    /// Measure the reference qubit in the computational basis and forward
    /// the collapsed state.
    MeasureZ,
}

/// A channel attacker. Default implementations pass everything through, so
/// implementors override only the channels they attack.
pub trait Adversary: Send {
    /// Forward reference channel (learner → provider): may replace the qubit.
    fn on_ref_forward(
        &mut self,
        msg: ChannelMessage,
        _kind: TrialKind,
        _rng: &mut ChaCha8Rng,
    ) -> ChannelMessage {
        msg
    }

    /// Forward output channel (learner → provider): may replace the state.
    fn on_output_forward(
        &mut self,
        msg: ChannelMessage,
        _kind: TrialKind,
        _rng: &mut ChaCha8Rng,
    ) -> ChannelMessage {
        msg
    }

    /// Return reference channel (provider → learner).
    fn on_ref_return(&mut self, _kind: TrialKind, _rng: &mut ChaCha8Rng) -> ReturnTap {
        ReturnTap::Pass
    }

    /// Hardened-mode canary interception: returning `Some(reference)` answers
    /// the canary in the provider's place (impersonation); the session hands
    /// that qubit straight to the learner's check. `None` forwards the canary
    /// honestly.
    fn intercept_canary(&mut self, _output: &QState, _rng: &mut ChaCha8Rng) -> Option<QState> {
        None
    }
}

/// Intercept-and-resend attacker on the forward output channel.
///
/// With probability `p_int` per learning trial she captures the estimation
/// state and forwards an imperfect copy ψ′ = cosθ·ψ + sinθ·ψ⊥ instead, where
/// cos²θ = `clone_overlap_sq` and ψ⊥ is a Haar-random state orthogonal to ψ.
/// Decoy outputs pass untouched (she can sort them out — see the module
/// docs on the strongest-adversary premise).
#[derive(Debug, Clone)]
pub struct InterceptEve {
    pub p_int: f64,
    pub clone_overlap_sq: f64,
    /// Number of states actually replaced (diagnostic).
    pub interceptions: u64,
}

impl InterceptEve {
    pub fn new(p_int: f64, clone_overlap_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_int) {
            return Err(Error::OutOfRange {
                what: "interception probability",
                value: p_int,
            });
        }
        if !(0.0..=1.0).contains(&clone_overlap_sq) {
            return Err(Error::OutOfRange {
                what: "clone overlap",
                value: clone_overlap_sq,
            });
        }
        Ok(Self {
            p_int,
            clone_overlap_sq,
            interceptions: 0,
        })
    }

    /// Replaces ψ by cosθ·ψ + sinθ·ψ⊥ with |⟨ψ′|ψ⟩|² = cos²θ.
    fn imperfect_clone(&self, psi: &QState, rng: &mut ChaCha8Rng) -> QState {
        let d = psi.dim();
        // Haar direction orthogonalized against ψ (Gram-Schmidt), retried in
        // the measure-zero event of a parallel draw.
        let perp = loop {
            let raw = QState::haar_random(d, rng).expect("d >= 2");
            let overlap = psi.inner(&raw).expect("same dimension");
            let residual = raw.amplitudes() - psi.amplitudes() * overlap;
            let norm = residual.norm();
            if norm > 1e-9 {
                break residual / num_complex::Complex64::new(norm, 0.0);
            }
        };
        let cos = self.clone_overlap_sq.sqrt();
        let sin = (1.0 - self.clone_overlap_sq).sqrt();
        let amps = psi.amplitudes() * num_complex::Complex64::new(cos, 0.0)
            + perp * num_complex::Complex64::new(sin, 0.0);
        QState::new(amps.iter().copied().collect()).expect("unit norm by construction")
    }
}

impl Adversary for InterceptEve {
    fn on_output_forward(
        &mut self,
        mut msg: ChannelMessage,
        kind: TrialKind,
        rng: &mut ChaCha8Rng,
    ) -> ChannelMessage {
        if matches!(kind, TrialKind::Learning { .. }) && rng.random::<f64>() < self.p_int {
            msg.state = self.imperfect_clone(&msg.state, rng);
            self.interceptions += 1;
        }
        msg
    }
}

/// Which reference channel a [`RefTamperer`] attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TamperChannel {
    /// Learner → provider (the reference is a bare qubit in flight).
    Forward,
    /// Provider → learner (the reference is entangled; the tamperer's
    /// measurement acts on the composite).
    Return,
}

/// A naive eavesdropper who measures every reference qubit in the
/// computational basis and forwards the collapsed state. Z-basis references
/// (learning trials) survive unchanged; ± decoys collapse and trip the
/// learner's sign check half the time.
#[derive(Debug, Clone)]
pub struct RefTamperer {
    pub channel: TamperChannel,
}

impl RefTamperer {
    pub fn new(channel: TamperChannel) -> Self {
        Self { channel }
    }
}

impl Adversary for RefTamperer {
    fn on_ref_forward(
        &mut self,
        mut msg: ChannelMessage,
        _kind: TrialKind,
        rng: &mut ChaCha8Rng,
    ) -> ChannelMessage {
        if self.channel == TamperChannel::Forward {
            let (outcome, _) = msg
                .state
                .measure_first_qubit(rng)
                .expect("reference is a qubit");
            msg.state = QState::qubit(outcome);
        }
        msg
    }

    fn on_ref_return(&mut self, _kind: TrialKind, _rng: &mut ChaCha8Rng) -> ReturnTap {
        if self.channel == TamperChannel::Return {
            ReturnTap::MeasureZ
        } else {
            ReturnTap::Pass
        }
    }
}

/// Man-in-the-middle attacker defeated by the hardened protocol.
///
/// She transparently forwards all regular traffic (the worst case for
/// detection) but must answer canaries herself: impersonating the provider,
/// she runs a plain comparator against her own target guess τ_E without the
/// task gate. Swap-test algebra then flips the |1⟩ canary reference to |0⟩
/// with probability (1 − |⟨output|τ_E⟩|²)/2, which is exactly what the
/// learner's canary check alarms on.
#[derive(Debug, Clone)]
pub struct MitmEve {
    /// Eve's own fiducial state (unused by the modeled strategy; carried so
    /// a full impersonation configuration is expressible).
    pub eve_fiducial: QState,
    /// Eve's guess at the target state, used to answer canaries.
    pub eve_target: QState,
    /// Canaries answered (diagnostic).
    pub canaries_answered: u64,
}

impl MitmEve {
    pub fn new(eve_fiducial: QState, eve_target: QState) -> Result<Self> {
        if eve_fiducial.dim() != eve_target.dim() {
            return Err(Error::DimensionMismatch {
                expected: eve_fiducial.dim(),
                got: eve_target.dim(),
            });
        }
        Ok(Self {
            eve_fiducial,
            eve_target,
            canaries_answered: 0,
        })
    }

    /// Per-canary alarm probability for a given canary payload:
    /// (1 − |⟨payload|τ_E⟩|²)/2.
    pub fn canary_alarm_prob(&self, payload: &QState) -> Result<f64> {
        Ok((1.0 - payload.fidelity(&self.eve_target)?) / 2.0)
    }
}

impl Adversary for MitmEve {
    fn intercept_canary(&mut self, output: &QState, rng: &mut ChaCha8Rng) -> Option<QState> {
        self.canaries_answered += 1;
        let p_flip = self.canary_alarm_prob(output).expect("dimensions match");
        // Her comparator returns the reference collapsed to |0⟩ (alarm) with
        // probability p_flip, else |1⟩. Sampling here and handing back the
        // collapsed basis state is statistically identical to the learner
        // measuring Eve's returned reference.
        Some(QState::qubit(u8::from(rng.random::<f64>() >= p_flip)))
    }
}

/// Collects the first `n_int` states crossing the forward output channel
/// (estimation states interleaved with blinded decoys) of honest sessions,
/// then reports the trace distance of their average density matrix from the
/// maximally mixed state 𝟙/d. A session that halts before the window fills
/// is followed by the next consecutively seeded one, matching an
/// eavesdropper who taps the channel across protocol restarts.
///
/// This is the harness-side mixing diagnostic: it quantifies how little an
/// eavesdropper sampling the channel learns about any single in-flight state.
/// The average is far from every pure state, but it does *not* converge to
/// 𝟙/d: parameters and hiding vectors are drawn from the cube [−π,π)^{d²−1},
/// and a cube-random rotation of a fixed fiducial retains part of its
/// polarization on average (for d = 2 the blinded ensemble alone sits at
/// trace distance ≈ 0.24). The distance decreases with the window size toward
/// that structural floor.
pub fn output_stream_mixing(config: &SessionConfig, n_int: usize) -> Result<f64> {
    if n_int == 0 {
        return Err(Error::Protocol(
            "mixing diagnostic needs at least one state".into(),
        ));
    }
    let mut collected: Vec<QState> = Vec::with_capacity(n_int);
    let mut session_offset = 0u64;
    while collected.len() < n_int {
        let mut cfg = config.clone();
        cfg.seed = config.seed.wrapping_add(session_offset);
        cfg.collect_output_stream = Some(n_int - collected.len());
        let result = crate::session::run_session(&cfg, None)?;
        let stream = result
            .output_stream
            .ok_or_else(|| Error::Protocol("session did not collect an output stream".into()))?;
        if stream.is_empty() {
            return Err(Error::Protocol(
                "session produced no output-channel traffic".into(),
            ));
        }
        collected.extend(stream);
        session_offset += 1;
    }
    trace_distance_from_maximally_mixed(&average_density(&collected)?)
}

/// Full-network cross-check oracle for the man-in-the-middle canary formula:
/// runs a plain comparator with target τ_E on (|1⟩, payload) and returns the
/// probability that the reference comes back as |0⟩.
pub fn mitm_canary_network_prob(payload: &QState, eve_target: &QState) -> Result<f64> {
    let module = BobModule::new(payload.dim(), eve_target.clone(), false, None)?;
    let composite = module.apply(&QState::qubit(1), payload)?;
    let half = composite.dim() / 2;
    Ok(composite
        .amplitudes()
        .rows(0, half)
        .iter()
        .map(|z| z.norm_sqr())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn intercept_eve_validates_probabilities() {
        assert!(InterceptEve::new(1.5, 0.5).is_err());
        assert!(InterceptEve::new(0.5, -0.1).is_err());
        assert!(InterceptEve::new(0.1, 2.0 / 3.0).is_ok());
    }

    #[test]
    fn imperfect_clone_has_exactly_the_configured_overlap() {
        let mut r = rng(31);
        let eve = InterceptEve::new(1.0, 2.0 / 3.0).unwrap();
        for d in [2usize, 3] {
            for _ in 0..20 {
                let psi = QState::haar_random(d, &mut r).unwrap();
                let clone = eve.imperfect_clone(&psi, &mut r);
                let overlap = psi.fidelity(&clone).unwrap();
                assert!((overlap - 2.0 / 3.0).abs() < 1e-12, "overlap {overlap}");
            }
        }
    }

    #[test]
    fn perfect_clone_overlap_keeps_fidelity_one() {
        let mut r = rng(32);
        let eve = InterceptEve::new(1.0, 1.0).unwrap();
        let psi = QState::haar_random(2, &mut r).unwrap();
        let clone = eve.imperfect_clone(&psi, &mut r);
        assert!((psi.fidelity(&clone).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mitm_alarm_probability_matches_the_full_network() {
        let mut r = rng(33);
        for d in [2usize, 3] {
            for _ in 0..10 {
                let payload = QState::haar_random(d, &mut r).unwrap();
                let tau_e = QState::haar_random(d, &mut r).unwrap();
                let eve = MitmEve::new(QState::basis(d, 0), tau_e.clone()).unwrap();
                let closed = eve.canary_alarm_prob(&payload).unwrap();
                let network = mitm_canary_network_prob(&payload, &tau_e).unwrap();
                assert!((closed - network).abs() < 1e-12, "{closed} vs {network}");
            }
        }
    }

    #[test]
    fn mitm_with_perfect_guess_never_alarms() {
        let chi = QState::qubit(0);
        let eve = MitmEve::new(chi.clone(), chi.clone()).unwrap();
        assert_eq!(eve.canary_alarm_prob(&chi).unwrap(), 0.0);
    }

    #[test]
    fn mitm_with_orthogonal_guess_alarms_half_the_time() {
        let eve = MitmEve::new(QState::qubit(0), QState::qubit(1)).unwrap();
        assert_eq!(eve.canary_alarm_prob(&QState::qubit(0)).unwrap(), 0.5);
    }

    #[test]
    fn forward_reference_tamperer_trips_about_half_the_decoys() {
        use crate::session::{run_session, SessionConfig, SimPath};
        for path in [SimPath::Fast, SimPath::Full] {
            let mut decoys = 0u64;
            let mut violations = 0u64;
            for seed in 0..30 {
                let mut cfg = SessionConfig::new(2, 10);
                cfg.seed = 500 + seed;
                cfg.sim_path = path;
                let mut eve = RefTamperer::new(TamperChannel::Forward);
                let result = run_session(&cfg, Some(&mut eve)).unwrap();
                decoys += result.total_trials - result.n_effective;
                violations += result.alarms.m_pm_violations;
                assert_eq!(result.alarms.canary_violations, 0);
            }
            let rate = violations as f64 / decoys as f64;
            assert!(
                (rate - 0.5).abs() < 0.08,
                "{path:?}: Z-collapsed ± decoys should fail the sign check half the time, got {rate}"
            );
        }
    }

    #[test]
    fn return_reference_tamperer_trips_decoys_without_biasing_learning() {
        use crate::session::{run_session, SessionConfig, SimPath};
        let mean_n = |tamper: bool| -> (f64, f64) {
            let runs = 60;
            let (mut total_n, mut decoys, mut violations) = (0u64, 0u64, 0u64);
            for seed in 0..runs {
                let mut cfg = SessionConfig::new(2, 10);
                cfg.seed = 900 + seed;
                cfg.sim_path = SimPath::Fast;
                let result = if tamper {
                    let mut eve = RefTamperer::new(TamperChannel::Return);
                    run_session(&cfg, Some(&mut eve)).unwrap()
                } else {
                    run_session(&cfg, None).unwrap()
                };
                total_n += result.n_effective;
                decoys += result.total_trials - result.n_effective;
                violations += result.alarms.m_pm_violations;
            }
            (
                total_n as f64 / runs as f64,
                violations as f64 / decoys.max(1) as f64,
            )
        };
        let (n_honest, rate_honest) = mean_n(false);
        let (n_tampered, rate_tampered) = mean_n(true);
        assert_eq!(rate_honest, 0.0);
        assert!(
            (rate_tampered - 0.5).abs() < 0.08,
            "violation rate {rate_tampered}"
        );
        // A computational-basis tap commutes with the learning check, so the
        // halting-time distribution is unchanged; allow generous sampling
        // slack around equality.
        let ratio = n_tampered / n_honest;
        assert!(
            (0.6..1.7).contains(&ratio),
            "halting times diverged: {n_honest} vs {n_tampered}"
        );
    }

    #[test]
    fn intercept_eve_slows_learning_but_raises_no_alarms() {
        use crate::session::{run_session, SessionConfig};
        // With every estimation state replaced by an overlap-2/3 clone, the
        // pass probability is capped near 5/6, so an all-pass window of 20
        // costs ~(6/5)^20 ≈ 38 window lengths instead of ~1.
        let mean_n = |eve_cfg: Option<(f64, f64)>| -> f64 {
            let runs = 25;
            let mut total = 0u64;
            for seed in 0..runs {
                let mut cfg = SessionConfig::new(2, 20);
                cfg.seed = 2000 + seed;
                cfg.max_iterations = 2_000_000;
                let result = match eve_cfg {
                    Some((p, q)) => {
                        let mut eve = InterceptEve::new(p, q).unwrap();
                        let r = run_session(&cfg, Some(&mut eve)).unwrap();
                        assert!(eve.interceptions > 0);
                        r
                    }
                    None => run_session(&cfg, None).unwrap(),
                };
                assert_eq!(
                    result.alarms.total(),
                    0,
                    "interception must be invisible to checks"
                );
                assert!(result.halted);
                total += result.n_effective;
            }
            total as f64 / runs as f64
        };
        let honest = mean_n(None);
        let attacked = mean_n(Some((1.0, 2.0 / 3.0)));
        assert!(
            attacked > 2.0 * honest,
            "full interception with overlap 2/3 should slow halting a lot: {honest} vs {attacked}"
        );
    }

    #[test]
    fn mitm_eve_sets_off_canaries_in_hardened_sessions() {
        use crate::session::{run_session, SessionConfig};
        let mut r = rng(77);
        let mut cfg = SessionConfig::new_hardened(2, 20);
        cfg.seed = 4242;
        let mut eve = MitmEve::new(
            QState::haar_random(2, &mut r).unwrap(),
            QState::haar_random(2, &mut r).unwrap(),
        )
        .unwrap();
        let result = run_session(&cfg, Some(&mut eve)).unwrap();
        assert!(eve.canaries_answered > 10);
        assert!(
            result.alarms.canary_violations >= 1,
            "answered {} canaries without tripping one",
            eve.canaries_answered
        );
        assert_eq!(result.alarms.m_pm_violations, 0);
    }

    #[test]
    fn mitm_eve_is_invisible_to_the_plain_protocol() {
        // Without canaries, a forwarding MITM triggers nothing: the gap the
        // hardened mode exists to close.
        use crate::session::{run_session, SessionConfig};
        let mut r = rng(78);
        let mut cfg = SessionConfig::new(2, 10);
        cfg.seed = 777;
        let mut eve = MitmEve::new(
            QState::haar_random(2, &mut r).unwrap(),
            QState::haar_random(2, &mut r).unwrap(),
        )
        .unwrap();
        let result = run_session(&cfg, Some(&mut eve)).unwrap();
        assert_eq!(result.alarms.total(), 0);
        assert_eq!(eve.canaries_answered, 0, "plain sessions send no canaries");
    }

    #[test]
    fn output_stream_mixing_sits_between_floor_and_ceiling() {
        use crate::session::SessionConfig;
        let mut cfg = SessionConfig::new(2, 60);
        cfg.seed = 31;
        let td = output_stream_mixing(&cfg, 200).unwrap();
        assert!((0.05..0.6).contains(&td), "mixing trace distance {td}");
    }

    #[test]
    fn mitm_haar_guess_alarm_rate_averages_one_quarter_for_qubits() {
        // E[(1 − F)/2] with F Haar-averaged to 1/2 gives 1/4.
        let mut r = rng(34);
        let chi = QState::qubit(0);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| {
                let eve =
                    MitmEve::new(chi.clone(), QState::haar_random(2, &mut r).unwrap()).unwrap();
                eve.canary_alarm_prob(&chi).unwrap()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.25).abs() < 0.02, "mean alarm rate {mean}");
    }
}
