//! The learner's feedback system: a bounded FIFO memory of Fail/NotFail
//! measurement records, the randomized parameter update
//! a ← a + (N_F/N)·r_l applied on Fail outcomes, and the halting condition
//! (memory full with zero Fail entries).
//!
//! The Fail fraction N_F/N acts as a self-annealing step size: early failures
//! drive full-scale random kicks, while a memory filling up with NotFail
//! results shrinks the steps until the window is clean and learning halts.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qmath::wrap_angle;

/// One swap-test feedback bit: Fail means the returned reference read |1⟩
/// after the learner's correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Fail,
    NotFail,
}

/// Bounded first-in-first-out memory of the last `capacity` outcomes, with an
/// incrementally maintained Fail count.
#[derive(Debug, Clone)]
pub struct FifoMemory {
    capacity: usize,
    entries: VecDeque<Outcome>,
    fails: usize,
}

impl FifoMemory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("memory capacity must be at least 1".into()));
        }
        Ok(Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
            fails: 0,
        })
    }

    /// Records an outcome, evicting the oldest entry when full.
    pub fn push(&mut self, outcome: Outcome) {
        if self.entries.len() == self.capacity && self.entries.pop_front() == Some(Outcome::Fail) {
            self.fails -= 1;
        }
        if outcome == Outcome::Fail {
            self.fails += 1;
        }
        self.entries.push_back(outcome);
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Number of Fail entries currently in the window.
    pub fn fails(&self) -> usize {
        self.fails
    }

    pub fn entries(&self) -> impl Iterator<Item = Outcome> + '_ {
        self.entries.iter().copied()
    }
}

/// The learner's trainable state: parameter vector, feedback memory, and the
/// update-step configuration.
#[derive(Debug, Clone)]
pub struct LearnerState {
    params: Vec<f64>,
    memory: FifoMemory,
    iteration_count: u64,
    step_halfwidth: f64,
    wrap_params: bool,
}

impl LearnerState {
    /// Creates a learner with parameters drawn uniformly from [−π, π).
    pub fn new(
        param_len: usize,
        capacity: usize,
        step_halfwidth: f64,
        wrap_params: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let params = (0..param_len)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        Self::with_params(params, capacity, step_halfwidth, wrap_params)
    }

    /// Creates a learner with explicit initial parameters (replays, tests).
    pub fn with_params(
        params: Vec<f64>,
        capacity: usize,
        step_halfwidth: f64,
        wrap_params: bool,
    ) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::ParamLength {
                expected: 1,
                got: 0,
            });
        }
        if step_halfwidth <= 0.0 {
            return Err(Error::OutOfRange {
                what: "step halfwidth",
                value: step_halfwidth,
            });
        }
        Ok(Self {
            params,
            memory: FifoMemory::new(capacity)?,
            iteration_count: 0,
            step_halfwidth,
            wrap_params,
        })
    }

    /// Records one measurement outcome and applies the update rule.
    ///
    /// The outcome is pushed first (with FIFO eviction), so the window size
    /// N = N_F + N_nF and the Fail count N_F both include the new record; the
    /// very first measurement therefore updates with N = 1. On Fail, every
    /// parameter component receives (N_F/N)·r, with r drawn i.i.d. uniform
    /// from [−δ, δ]; on NotFail the parameters are untouched (bitwise).
    ///
    /// Returns the update coefficient N_F/N when an update happened.
    pub fn record_and_update(&mut self, outcome: Outcome, rng: &mut ChaCha8Rng) -> Option<f64> {
        self.memory.push(outcome);
        self.iteration_count += 1;
        if outcome == Outcome::NotFail {
            return None;
        }
        let coefficient = self.memory.fails() as f64 / self.memory.len() as f64;
        let delta = self.step_halfwidth;
        for p in &mut self.params {
            let step = coefficient * rng.random_range(-delta..delta);
            *p += step;
            if self.wrap_params {
                *p = wrap_angle(*p);
            }
        }
        Some(coefficient)
    }

    /// The halting condition: the memory window is full and contains no Fail
    /// entries. The earliest possible halt is therefore at iteration
    /// `capacity`.
    pub fn halted(&self) -> bool {
        self.memory.is_full() && self.memory.fails() == 0
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Total number of outcomes ever recorded.
    pub fn iteration_count(&self) -> u64 {
        self.iteration_count
    }

    pub fn memory(&self) -> &FifoMemory {
        &self.memory
    }

    pub fn step_halfwidth(&self) -> f64 {
        self.step_halfwidth
    }

    pub fn wrap_params(&self) -> bool {
        self.wrap_params
    }
}
