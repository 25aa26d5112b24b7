//! One full protocol session: the learner and provider as communicating
//! state machines, three interposable channels, decoy scheduling, security
//! checks, and effective-iteration accounting.
//!
//! # Information firewall
//!
//! [`AliceMachine`] holds no field that could store the provider's target:
//! her decisions depend only on her own random draws and the single bit that
//! comes back per trial. The session harness reads the target solely to
//! report the oracle error ε_L in [`SessionResult`].
//!
//! # Simulation paths
//!
//! [`SimPath::Full`] propagates every trial through the comparator network on
//! the 2d²-dimensional composite space. [`SimPath::Fast`] samples outcomes
//! from the network's verified closed forms instead and materializes blinded
//! decoy states only when something can observe them (an adversary, stream
//! collection, or the hardened task gate). Both paths draw from the same
//! generator but consume it differently, so they agree in distribution, not
//! per-seed.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversary::{Adversary, ReturnTap};
use crate::error::{Error, Result};
use crate::gate::{pre_flip_zero_prob, BobModule};
use crate::learner::{LearnerState, Outcome};
use crate::qmath::{build_generators, unitary_from_params, GeneratorSet, QState};

/// Reference-qubit preparations the learner can send.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReferenceKind {
    /// |0⟩ — learning trial, no correction flip.
    C0,
    /// |1⟩ — learning trial with correction flip (canary in hardened mode).
    C1,
    /// |+⟩ — decoy.
    Plus,
    /// |−⟩ — decoy.
    Minus,
}

impl ReferenceKind {
    pub fn state(self) -> QState {
        match self {
            ReferenceKind::C0 => QState::qubit(0),
            ReferenceKind::C1 => QState::qubit(1),
            ReferenceKind::Plus => QState::qubit_plus(),
            ReferenceKind::Minus => QState::qubit_minus(),
        }
    }

    pub fn is_decoy(self) -> bool {
        matches!(self, ReferenceKind::Plus | ReferenceKind::Minus)
    }
}

/// What a trial is for, fixing which payload travels and which check the
/// learner runs on the returned reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialKind {
    /// Estimation state travels; returned reference is measured in the
    /// computational basis after a σx correction for c = 1.
    Learning { c: u8 },
    /// Blinded state travels; returned reference is checked in the ± basis
    /// against the sent sign.
    Decoy { reference: ReferenceKind },
    /// Hardened mode only: |1⟩ reference with the bare fiducial as payload;
    /// an honest provider returns the reference as |1⟩ exactly, so any |0⟩
    /// is an alarm.
    Canary,
}

impl TrialKind {
    pub fn reference(self) -> ReferenceKind {
        match self {
            TrialKind::Learning { c: 0 } => ReferenceKind::C0,
            TrialKind::Learning { .. } => ReferenceKind::C1,
            TrialKind::Decoy { reference } => reference,
            TrialKind::Canary => ReferenceKind::C1,
        }
    }

    fn label(self) -> &'static str {
        match self {
            TrialKind::Learning { c: 0 } => "learning0",
            TrialKind::Learning { .. } => "learning1",
            TrialKind::Decoy {
                reference: ReferenceKind::Plus,
            } => "decoy+",
            TrialKind::Decoy { .. } => "decoy-",
            TrialKind::Canary => "canary",
        }
    }
}

/// Which forward channel a message travels on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// Reference channel: a bare qubit.
    Ref,
    /// Output channel: a d-dimensional payload.
    Output,
}

/// One state in flight on a forward channel, as seen by an interposer.
#[derive(Debug, Clone)]
pub struct ChannelMessage {
    pub mode: ChannelMode,
    pub trial_id: u64,
    pub state: QState,
}

/// How the provider's target is chosen at session start.
#[derive(Debug, Clone)]
pub enum TargetSpec {
    /// Haar-random d-dimensional state drawn from the session generator.
    Haar,
    /// A fixed state (for controlled experiments and tests).
    Fixed(QState),
}

/// Outcome-sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimPath {
    /// Sample each trial from the network's closed-form outcome laws.
    Fast,
    /// Propagate each trial through the full comparator network.
    Full,
}

/// Everything needed to run one session deterministically.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    /// Hilbert-space dimension d ≥ 2.
    pub d: usize,
    /// Learner memory capacity N_L ≥ 1.
    pub memory_capacity: usize,
    /// The learner's fiducial input state χ (defaults to |0⟩ in dimension d).
    pub fiducial: QState,
    /// The provider's hidden target.
    pub target: TargetSpec,
    /// Probability that a trial is a decoy.
    pub decoy_probability: f64,
    /// Hardened mode: provider applies the task gate, C1 trials become
    /// canaries.
    pub hardened: bool,
    /// Weight of canaries among non-decoy trials in hardened mode.
    pub canary_probability: f64,
    /// Half-width δ of the uniform parameter kicks.
    pub step_halfwidth: f64,
    /// Wrap parameters into [−π, π) after each update.
    pub wrap_params: bool,
    /// Fixed initial parameters (length d²−1); drawn uniformly from
    /// [−π, π)^{d²−1} when absent.
    pub initial_params: Option<Vec<f64>>,
    /// Cap on effective (learning) iterations; the session stops unhalted
    /// when it is reached.
    pub max_iterations: u64,
    pub sim_path: SimPath,
    pub seed: u64,
    /// Keep one record per trial in the result.
    pub record_trace: bool,
    /// Collect the first n states sent on the forward output channel
    /// (learning and decoy payloads) for the mixing diagnostic.
    pub collect_output_stream: Option<usize>,
}

impl SessionConfig {
    /// Honest-protocol defaults for dimension `d` and memory capacity `n_l`.
    pub fn new(d: usize, memory_capacity: usize) -> Self {
        Self {
            d,
            memory_capacity,
            fiducial: QState::basis(d, 0),
            target: TargetSpec::Haar,
            decoy_probability: 0.5,
            hardened: false,
            canary_probability: 0.5,
            step_halfwidth: std::f64::consts::PI,
            wrap_params: true,
            initial_params: None,
            max_iterations: Self::default_max_iterations(memory_capacity),
            sim_path: SimPath::Fast,
            seed: 0,
            record_trace: false,
            collect_output_stream: None,
        }
    }

    /// Hardened-protocol defaults: task gate mounted, C1 trials replaced by
    /// canaries, and no ± decoys. The task gate acts on the |1⟩ component of
    /// a ± reference, so ± decoys would false-alarm at a rate fixed by the
    /// gate; hardened sessions rely on canaries for tamper evidence instead.
    /// Setting `decoy_probability` back above zero is allowed and faithfully
    /// reproduces that false-alarm behavior.
    pub fn new_hardened(d: usize, memory_capacity: usize) -> Self {
        let mut cfg = Self::new(d, memory_capacity);
        cfg.hardened = true;
        cfg.decoy_probability = 0.0;
        cfg
    }

    /// Default iteration cap, 100·N_L^{3/2}: two orders of magnitude above
    /// the typical halting time so cap-outs flag pathologies rather than
    /// truncate the tail.
    pub fn default_max_iterations(memory_capacity: usize) -> u64 {
        (100.0 * (memory_capacity as f64).powf(1.5)).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidDimension { got: self.d });
        }
        if self.memory_capacity == 0 {
            return Err(Error::Protocol("memory capacity must be at least 1".into()));
        }
        if self.fiducial.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: self.fiducial.dim(),
            });
        }
        if let TargetSpec::Fixed(tau) = &self.target {
            if tau.dim() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: tau.dim(),
                });
            }
        }
        if !(0.0..1.0).contains(&self.decoy_probability) {
            return Err(Error::OutOfRange {
                what: "decoy probability",
                value: self.decoy_probability,
            });
        }
        if !(0.0..=1.0).contains(&self.canary_probability) {
            return Err(Error::OutOfRange {
                what: "canary probability",
                value: self.canary_probability,
            });
        }
        if !self.step_halfwidth.is_finite() || self.step_halfwidth <= 0.0 {
            return Err(Error::OutOfRange {
                what: "step half-width",
                value: self.step_halfwidth,
            });
        }
        if let Some(a0) = &self.initial_params {
            let expected = self.d * self.d - 1;
            if a0.len() != expected {
                return Err(Error::ParamLength {
                    expected,
                    got: a0.len(),
                });
            }
        }
        if self.max_iterations < self.memory_capacity as u64 {
            return Err(Error::Protocol(format!(
                "iteration cap {} cannot cover one memory window of {}",
                self.max_iterations, self.memory_capacity
            )));
        }
        Ok(())
    }
}

/// Security counters accumulated by the learner.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SecurityAlarms {
    /// Decoys whose returned reference failed the ± sign check.
    pub m_pm_violations: u64,
    /// Canaries whose returned reference measured |0⟩.
    pub canary_violations: u64,
}

impl SecurityAlarms {
    pub fn total(&self) -> u64 {
        self.m_pm_violations + self.canary_violations
    }
}

/// One line of the per-trial trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub trial_id: u64,
    /// "learning0", "learning1", "decoy+", "decoy-", or "canary".
    pub kind: &'static str,
    /// Measured bit in the trial's check basis.
    pub outcome: u8,
    /// Security violation flagged by this trial.
    pub violation: bool,
    /// Fail count in the learner's window after this trial.
    pub fails: usize,
    /// Step coefficient applied this trial (0 when no update happened).
    pub coefficient: f64,
    /// Harness-side oracle: |⟨τ|U(a)χ⟩|² after this trial.
    pub fidelity: f64,
}

/// Everything a finished session reports.
#[derive(Debug, Clone)]
pub struct SessionResult {
    /// Whether the learner reached an all-pass window (vs hitting the cap).
    pub halted: bool,
    /// Effective iterations: learning trials only.
    pub n_effective: u64,
    /// All trials, including decoys and canaries.
    pub total_trials: u64,
    /// Harness-side oracle error 1 − |⟨τ|U(a)χ⟩|² at the final parameters.
    pub epsilon_l: f64,
    pub alarms: SecurityAlarms,
    pub final_params: Vec<f64>,
    pub trace: Option<Vec<TraceRecord>>,
    /// States collected on the forward output channel, when requested.
    pub output_stream: Option<Vec<QState>>,
}

/// What one trial reported back to the caller.
#[derive(Debug, Clone, Copy)]
pub struct TrialOutcome {
    pub kind: TrialKind,
    /// Measured bit in the trial's check basis.
    pub measured: u8,
    /// Whether this trial raised a security alarm.
    pub violation: bool,
}

/// The learner's half of the protocol. Contains, by construction, nothing
/// derived from the provider's target; its only external input per trial is
/// one returned bit.
pub struct AliceMachine {
    fiducial: QState,
    generators: GeneratorSet,
    learner: LearnerState,
    /// Cached estimation state U(a)|χ⟩ for the current parameters.
    estimation: QState,
    alarms: SecurityAlarms,
}

impl fmt::Debug for AliceMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AliceMachine")
            .field("fiducial", &self.fiducial)
            .field("learner", &self.learner)
            .field("estimation", &self.estimation)
            .field("alarms", &self.alarms)
            .finish()
    }
}

impl AliceMachine {
    pub fn new(
        d: usize,
        fiducial: QState,
        memory_capacity: usize,
        step_halfwidth: f64,
        wrap_params: bool,
        initial_params: Option<Vec<f64>>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let generators = build_generators(d)?;
        let params = match initial_params {
            Some(a0) => {
                if a0.len() != generators.param_len() {
                    return Err(Error::ParamLength {
                        expected: generators.param_len(),
                        got: a0.len(),
                    });
                }
                a0
            }
            None => (0..generators.param_len())
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect(),
        };
        let learner =
            LearnerState::with_params(params, memory_capacity, step_halfwidth, wrap_params)?;
        let estimation = unitary_from_params(learner.params(), &generators)?.apply(&fiducial)?;
        Ok(Self {
            fiducial,
            generators,
            learner,
            estimation,
            alarms: SecurityAlarms::default(),
        })
    }

    /// Current estimation state U(a)|χ⟩.
    pub fn estimation(&self) -> &QState {
        &self.estimation
    }

    pub fn learner(&self) -> &LearnerState {
        &self.learner
    }

    pub fn alarms(&self) -> SecurityAlarms {
        self.alarms
    }

    pub fn halted(&self) -> bool {
        self.learner.halted()
    }

    /// Draws a hiding vector and prepares the blinded decoy payload U(r_h)|χ⟩.
    pub fn blinded_decoy(&self, rng: &mut ChaCha8Rng) -> Result<QState> {
        let r_h: Vec<f64> = (0..self.generators.param_len())
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        unitary_from_params(&r_h, &self.generators)?.apply(&self.fiducial)
    }

    /// Feeds one learning outcome bit (after the σx^c correction) into the
    /// memory and update rule; returns the applied step coefficient.
    pub fn record_learning_bit(&mut self, corrected_bit: u8, rng: &mut ChaCha8Rng) -> Result<f64> {
        let outcome = if corrected_bit == 1 {
            Outcome::Fail
        } else {
            Outcome::NotFail
        };
        let coefficient = self.learner.record_and_update(outcome, rng);
        if let Some(c) = coefficient {
            if c != 0.0 {
                self.estimation = unitary_from_params(self.learner.params(), &self.generators)?
                    .apply(&self.fiducial)?;
            }
        }
        Ok(coefficient.unwrap_or(0.0))
    }

    pub fn note_decoy_check(&mut self, violation: bool) {
        if violation {
            self.alarms.m_pm_violations += 1;
        }
    }

    pub fn note_canary_check(&mut self, violation: bool) {
        if violation {
            self.alarms.canary_violations += 1;
        }
    }
}

/// The provider's half of the protocol: the comparator module around the
/// hidden target. Never sees the learner's parameters or hiding vectors.
#[derive(Debug)]
pub struct BobMachine {
    module: BobModule,
}

impl BobMachine {
    pub fn new(d: usize, target: QState, hardened: bool, fiducial: &QState) -> Result<Self> {
        let task_unitary = if hardened {
            Some(crate::gate::unitary_mapping(fiducial, &target)?)
        } else {
            None
        };
        Ok(Self {
            module: BobModule::new(d, target, hardened, task_unitary)?,
        })
    }

    pub fn module(&self) -> &BobModule {
        &self.module
    }

    /// Harness-side oracle access to the hidden target (never routed to the
    /// learner).
    pub fn target(&self) -> &QState {
        self.module.target()
    }
}

/// A running session.
pub struct Session {
    cfg: SessionConfig,
    rng: ChaCha8Rng,
    alice: AliceMachine,
    bob: BobMachine,
    trial_id: u64,
    n_effective: u64,
    trace: Option<Vec<TraceRecord>>,
    stream: Option<Vec<QState>>,
}

impl Session {
    pub fn new(cfg: SessionConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        // Frozen draw order: target first, then initial parameters.
        let target = match &cfg.target {
            TargetSpec::Haar => QState::haar_random(cfg.d, &mut rng)?,
            TargetSpec::Fixed(tau) => tau.clone(),
        };
        let bob = BobMachine::new(cfg.d, target, cfg.hardened, &cfg.fiducial)?;
        let alice = AliceMachine::new(
            cfg.d,
            cfg.fiducial.clone(),
            cfg.memory_capacity,
            cfg.step_halfwidth,
            cfg.wrap_params,
            cfg.initial_params.clone(),
            &mut rng,
        )?;
        let trace = cfg.record_trace.then(Vec::new);
        let stream = cfg.collect_output_stream.map(Vec::with_capacity);
        Ok(Self {
            cfg,
            rng,
            alice,
            bob,
            trial_id: 0,
            n_effective: 0,
            trace,
            stream,
        })
    }

    pub fn alice(&self) -> &AliceMachine {
        &self.alice
    }

    pub fn bob(&self) -> &BobMachine {
        &self.bob
    }

    pub fn n_effective(&self) -> u64 {
        self.n_effective
    }

    pub fn total_trials(&self) -> u64 {
        self.trial_id
    }

    fn sample_kind(&mut self) -> TrialKind {
        // Frozen draw order: decoy gate, then sign / canary / correction bit.
        if self.rng.random::<f64>() < self.cfg.decoy_probability {
            let reference = if self.rng.random_bool(0.5) {
                ReferenceKind::Plus
            } else {
                ReferenceKind::Minus
            };
            TrialKind::Decoy { reference }
        } else if self.cfg.hardened {
            if self.rng.random::<f64>() < self.cfg.canary_probability {
                TrialKind::Canary
            } else {
                TrialKind::Learning { c: 0 }
            }
        } else {
            TrialKind::Learning {
                c: self.rng.random_range(0..2u8),
            }
        }
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    /// Runs one trial end to end, driving any interposed adversary.
    pub fn run_trial(&mut self, mut adversary: Option<&mut dyn Adversary>) -> Result<TrialOutcome> {
        if self.alice.halted() {
            return Err(Error::Protocol("session already halted".into()));
        }
        let trial_id = self.trial_id;
        self.trial_id += 1;
        let kind = self.sample_kind();

        // Per-trial network evaluation is required on the full path and for
        // hardened decoys, whose outcome law involves the task gate.
        let use_network = self.cfg.sim_path == SimPath::Full
            || (self.cfg.hardened && matches!(kind, TrialKind::Decoy { .. }));
        let collecting = self
            .stream
            .as_ref()
            .is_some_and(|s| s.len() < self.cfg.collect_output_stream.unwrap_or(0));
        let materialize_decoy = use_network || adversary.is_some() || collecting;

        // The learner prepares both messages.
        let mut reference = kind.reference().state();
        let mut output = match kind {
            TrialKind::Learning { .. } => self.alice.estimation().clone(),
            TrialKind::Canary => self.cfg.fiducial.clone(),
            TrialKind::Decoy { .. } => {
                if materialize_decoy {
                    self.alice.blinded_decoy(&mut self.rng)?
                } else {
                    // Honest fast path: nothing can observe the payload, so
                    // skip building it. The trial outcome laws below do not
                    // depend on it.
                    self.cfg.fiducial.clone()
                }
            }
        };

        // Mixing diagnostic sees the channel as the learner uses it.
        if collecting && !matches!(kind, TrialKind::Canary) {
            if let Some(s) = self.stream.as_mut() {
                s.push(output.clone());
            }
        }

        // Forward channels, with interposition.
        if let Some(adv) = adversary.as_deref_mut() {
            let msg = adv.on_ref_forward(
                ChannelMessage {
                    mode: ChannelMode::Ref,
                    trial_id,
                    state: reference,
                },
                kind,
                &mut self.rng,
            );
            if msg.state.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: msg.state.dim(),
                });
            }
            reference = msg.state;

            if matches!(kind, TrialKind::Canary) {
                if let Some(response) = adv.intercept_canary(&output, &mut self.rng) {
                    return self.finish_canary_from_response(trial_id, response);
                }
            }

            let msg = adv.on_output_forward(
                ChannelMessage {
                    mode: ChannelMode::Output,
                    trial_id,
                    state: output,
                },
                kind,
                &mut self.rng,
            );
            if msg.state.dim() != self.cfg.d {
                return Err(Error::DimensionMismatch {
                    expected: self.cfg.d,
                    got: msg.state.dim(),
                });
            }
            output = msg.state;
        }

        let return_tap = match adversary {
            Some(adv) => adv.on_ref_return(kind, &mut self.rng),
            None => ReturnTap::Pass,
        };

        // Provider turn plus the learner's check on the returned reference.
        let (measured, violation) = if use_network {
            self.network_trial(kind, &reference, &output, return_tap)?
        } else {
            self.closed_form_trial(kind, &reference, &output, return_tap)?
        };

        self.finish_trial(trial_id, kind, measured, violation)
    }

    /// Exact outcome sampling from the verified comparator laws (plain
    /// network only; hardened decoys go through the network).
    fn closed_form_trial(
        &mut self,
        kind: TrialKind,
        reference: &QState,
        output: &QState,
        return_tap: ReturnTap,
    ) -> Result<(u8, bool)> {
        Ok(match kind {
            TrialKind::Learning { c } => {
                // Pr(reference returns 0) = (1 + z·f)/2 with z the arriving
                // reference's Z-expectation and f the fidelity between the
                // target and the *arriving* output (an interceptor may have
                // replaced the learner's state in flight). A return Z-tap
                // commutes with the learner's Z-check, so it leaves these
                // statistics unchanged.
                let z = reference.first_qubit_z_expectation().clamp(-1.0, 1.0);
                let f = self.bob.target().fidelity(output)?.clamp(0.0, 1.0);
                let pre = u8::from(!self.bernoulli(pre_flip_zero_prob(z, f)?));
                ((pre + c) % 2, false)
            }
            TrialKind::Decoy { reference: sent } => {
                let violation = match return_tap {
                    // A Z-collapse on the return path leaves the reference in
                    // a Z eigenstate, which fails the ± check half the time
                    // whatever arrived before it.
                    ReturnTap::MeasureZ => self.bernoulli(0.5),
                    ReturnTap::Pass => {
                        // The plain network preserves the reference's ±
                        // populations, so the violation probability is the
                        // arriving wrong-sign population.
                        let expected = sent.state();
                        let p_wrong = (1.0 - expected.fidelity(reference)?).clamp(0.0, 1.0);
                        // Honest decoys are exactly transparent; skip the
                        // draw so tampering-free sessions stay cheap.
                        p_wrong > 1e-12 && self.bernoulli(p_wrong)
                    }
                };
                (u8::from(violation), violation)
            }
            TrialKind::Canary => {
                // Honest hardened provider returns the canary reference as
                // |1⟩ exactly; a Z-tap on a Z eigenstate changes nothing.
                (1, false)
            }
        })
    }

    /// Full propagation through the comparator network on the composite
    /// space, including the return-path tap.
    fn network_trial(
        &mut self,
        kind: TrialKind,
        reference: &QState,
        output: &QState,
        return_tap: ReturnTap,
    ) -> Result<(u8, bool)> {
        let mut composite = self.bob.module().apply(reference, output)?;
        if return_tap == ReturnTap::MeasureZ {
            let (bit, rest) = composite.measure_first_qubit(&mut self.rng)?;
            composite = QState::qubit(bit).tensor(&rest);
        }
        Ok(match kind {
            TrialKind::Learning { c } => {
                let corrected = if c == 1 {
                    composite.flip_first_qubit()?
                } else {
                    composite
                };
                let (bit, _) = corrected.measure_first_qubit(&mut self.rng)?;
                (bit, false)
            }
            TrialKind::Decoy { reference: sent } => {
                let in_pm = composite.hadamard_first_qubit()?;
                let (bit, _) = in_pm.measure_first_qubit(&mut self.rng)?;
                // H maps |+⟩ → |0⟩, so the expected ± outcome is 0 for a
                // plus decoy and 1 for a minus decoy.
                let expected = u8::from(sent == ReferenceKind::Minus);
                (bit, bit != expected)
            }
            TrialKind::Canary => {
                let (bit, _) = composite.measure_first_qubit(&mut self.rng)?;
                (bit, bit == 0)
            }
        })
    }

    /// Canary answered by an impersonator: the learner measures the returned
    /// qubit directly.
    fn finish_canary_from_response(
        &mut self,
        trial_id: u64,
        response: QState,
    ) -> Result<TrialOutcome> {
        if response.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: response.dim(),
            });
        }
        let (bit, _) = response.measure_first_qubit(&mut self.rng)?;
        self.finish_trial(trial_id, TrialKind::Canary, bit, bit == 0)
    }

    fn finish_trial(
        &mut self,
        trial_id: u64,
        kind: TrialKind,
        measured: u8,
        violation: bool,
    ) -> Result<TrialOutcome> {
        let mut coefficient = 0.0;
        match kind {
            TrialKind::Learning { .. } => {
                self.n_effective += 1;
                coefficient = self.alice.record_learning_bit(measured, &mut self.rng)?;
            }
            TrialKind::Decoy { .. } => self.alice.note_decoy_check(violation),
            TrialKind::Canary => self.alice.note_canary_check(violation),
        }
        if let Some(trace) = self.trace.as_mut() {
            let fidelity = self
                .bob
                .target()
                .fidelity(self.alice.estimation())
                .expect("validated dimensions");
            trace.push(TraceRecord {
                trial_id,
                kind: kind.label(),
                outcome: measured,
                violation,
                fails: self.alice.learner().memory().fails(),
                coefficient,
                fidelity,
            });
        }
        Ok(TrialOutcome {
            kind,
            measured,
            violation,
        })
    }

    fn finished(&self) -> bool {
        self.alice.halted() || self.n_effective >= self.cfg.max_iterations
    }

    /// Runs trials until the learner halts or the effective-iteration cap is
    /// reached, then reports.
    pub fn run(mut self, adversary: Option<&mut dyn Adversary>) -> Result<SessionResult> {
        match adversary {
            None => {
                while !self.finished() {
                    self.run_trial(None)?;
                }
            }
            Some(adv) => {
                while !self.finished() {
                    self.run_trial(Some(&mut *adv))?;
                }
            }
        }
        let epsilon_l = 1.0
            - self
                .bob
                .target()
                .fidelity(self.alice.estimation())
                .expect("validated dimensions");
        Ok(SessionResult {
            halted: self.alice.halted(),
            n_effective: self.n_effective,
            total_trials: self.trial_id,
            epsilon_l,
            alarms: self.alice.alarms(),
            final_params: self.alice.learner().params().to_vec(),
            trace: self.trace,
            output_stream: self.stream,
        })
    }
}

/// Convenience wrapper: build a session from `cfg` and run it to completion.
pub fn run_session(
    cfg: &SessionConfig,
    adversary: Option<&mut dyn Adversary>,
) -> Result<SessionResult> {
    Session::new(cfg.clone())?.run(adversary)
}
