//! Desk-scale simulator of a remote quantum learning protocol.
//!
//! A learner (Alice) owns a trainable SU(d) unitary Û(a) and a fiducial state
//! |χ_A⟩; a provider (Bob) holds a hidden target state |τ_B⟩ and a comparator
//! module built from a Hadamard / controlled-SWAP / Hadamard network. Each
//! round, Alice ships a reference qubit and her current estimation state
//! Û(a)|χ_A⟩ over simulated channels; the comparator entangles them with the
//! target and the returned reference qubit carries one bit of swap-test
//! feedback, which drives a FIFO-windowed random-search update of `a`.
//! Interleaved ± decoys (blinded outputs) and, in hardened mode, canary
//! rounds make tampering on the channels observable.
//!
//! The crate provides:
//! - [`qmath`]: states, validated operators, SU(d) generators, Û(a).
//! - [`gate`]: the comparator network, its hardened variant, and the
//!   closed-form outcome statistics used as a fast simulation path.
//! - [`learner`]: the FIFO feedback memory, the parameter update rule, and
//!   the halting condition.
//! - [`session`]: the full protocol round/session state machines with
//!   interposable channels.
//! - [`adversary`]: pluggable channel attackers (intercept-resend, reference
//!   tampering, man-in-the-middle) and the stream-mixing diagnostic.
//! - [`experiments`]: seeded Monte Carlo ensembles, survival curves,
//!   exponential and power-law fits, and pre-protocol calibration.
//! - [`config`] / [`cli`]: TOML-driven experiment front end with
//!   deterministic file outputs.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability (honest sessions, learning curves, scaling sweeps, each
//! attack, and calibration-based monitoring).

pub mod adversary;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gate;
pub mod learner;
pub mod qmath;
pub mod session;

pub use error::{Error, Result};
