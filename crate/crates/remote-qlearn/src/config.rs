//! Experiment configuration files: a strict TOML schema covering the session
//! parameters, adversary selection, ensemble size, and sweep lists. Unknown
//! keys are rejected so a typo cannot silently fall back to a default.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, InterceptEve, MitmEve, RefTamperer, TamperChannel};
use crate::error::{Error, Result};
use crate::qmath::QState;
use crate::session::{SessionConfig, SimPath, TargetSpec};

fn default_decoy_probability() -> f64 {
    0.5
}
fn default_canary_probability() -> f64 {
    0.5
}
fn default_step_halfwidth() -> f64 {
    std::f64::consts::PI
}
fn default_true() -> bool {
    true
}
fn default_runs() -> usize {
    1000
}
fn default_state() -> String {
    "basis:0".into()
}
fn default_target() -> String {
    "haar".into()
}

/// Simulation-path selector in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimPathChoice {
    #[default]
    Fast,
    Full,
}

impl From<SimPathChoice> for SimPath {
    fn from(c: SimPathChoice) -> Self {
        match c {
            SimPathChoice::Fast => SimPath::Fast,
            SimPathChoice::Full => SimPath::Full,
        }
    }
}

/// Which attacker to mount on the channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    #[default]
    None,
    /// Intercept-and-resend on the forward output channel.
    Intercept,
    /// Computational-basis measurement of reference qubits in flight.
    RefTamper,
    /// Forwarding man-in-the-middle who must answer canaries herself.
    Mitm,
}

/// Adversary section of a config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    #[serde(default)]
    pub kind: AdversaryKind,
    /// Interception probability per learning trial (`intercept`).
    #[serde(default)]
    pub p_int: Option<f64>,
    /// Squared overlap of the resent clone (`intercept`); default 2/3.
    #[serde(default)]
    pub clone_overlap_sq: Option<f64>,
    /// "forward" or "return" (`ref_tamper`); default "forward".
    #[serde(default)]
    pub channel: Option<String>,
    /// "haar" or "orthogonal" (`mitm`): Eve's target guess; default "haar".
    #[serde(default)]
    pub eve_target: Option<String>,
}

/// Sweep lists for the sweep subcommand.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Memory capacities for a window-size scaling sweep.
    #[serde(default)]
    pub memory_capacities: Vec<usize>,
    /// Interception probabilities for an attack-strength sweep.
    #[serde(default)]
    pub p_ints: Vec<f64>,
}

impl SweepConfig {
    pub fn is_empty(&self) -> bool {
        self.memory_capacities.is_empty() && self.p_ints.is_empty()
    }
}

/// Full experiment description as read from a TOML file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Hilbert-space dimension.
    pub d: usize,
    /// Learner memory window size.
    pub memory_capacity: usize,
    #[serde(default = "default_decoy_probability")]
    pub decoy_probability: f64,
    #[serde(default)]
    pub hardened: bool,
    #[serde(default = "default_canary_probability")]
    pub canary_probability: f64,
    #[serde(default = "default_step_halfwidth")]
    pub step_halfwidth: f64,
    #[serde(default = "default_true")]
    pub wrap_params: bool,
    /// Effective-iteration cap; derived from the window size when absent.
    #[serde(default)]
    pub max_iterations: Option<u64>,
    #[serde(default)]
    pub sim_path: SimPathChoice,
    #[serde(default)]
    pub seed: u64,
    /// Ensemble size for ensemble-level commands.
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Learner fiducial state: "basis:<k>".
    #[serde(default = "default_state")]
    pub fiducial: String,
    /// Provider target: "haar" or "basis:<k>".
    #[serde(default = "default_target")]
    pub target: String,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn parse_basis(text: &str, d: usize, what: &str) -> Result<QState> {
    let index = text
        .strip_prefix("basis:")
        .and_then(|k| k.parse::<usize>().ok())
        .ok_or_else(|| Error::Config(format!("{what} must be \"basis:<k>\", got \"{text}\"")))?;
    if index >= d {
        return Err(Error::Config(format!(
            "{what} index {index} out of range for d = {d}"
        )));
    }
    Ok(QState::basis(d, index))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.session_config().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        self.adversary_check()?;
        for &n_l in &self.sweep.memory_capacities {
            if n_l == 0 {
                return Err(Error::Config(
                    "sweep memory capacities must be positive".into(),
                ));
            }
        }
        for &p in &self.sweep.p_ints {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("sweep p_int {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn adversary_check(&self) -> Result<()> {
        let a = &self.adversary;
        match a.kind {
            AdversaryKind::None | AdversaryKind::Mitm => {}
            AdversaryKind::Intercept => {
                let p = a.p_int.unwrap_or(0.0);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("p_int {p} outside [0, 1]")));
                }
                let q = a.clone_overlap_sq.unwrap_or(2.0 / 3.0);
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::Config(format!(
                        "clone_overlap_sq {q} outside [0, 1]"
                    )));
                }
            }
            AdversaryKind::RefTamper => {
                if let Some(c) = a.channel.as_deref() {
                    if c != "forward" && c != "return" {
                        return Err(Error::Config(format!(
                            "channel must be \"forward\" or \"return\", got \"{c}\""
                        )));
                    }
                }
            }
        }
        if a.kind == AdversaryKind::Mitm {
            if let Some(t) = a.eve_target.as_deref() {
                if t != "haar" && t != "orthogonal" {
                    return Err(Error::Config(format!(
                        "eve_target must be \"haar\" or \"orthogonal\", got \"{t}\""
                    )));
                }
            }
        }
        Ok(())
    }

    /// Builds the session template this experiment runs.
    pub fn session_config(&self) -> Result<SessionConfig> {
        if self.d < 2 {
            return Err(Error::Config(format!(
                "d must be at least 2, got {}",
                self.d
            )));
        }
        let fiducial = parse_basis(&self.fiducial, self.d, "fiducial")?;
        let target = if self.target == "haar" {
            TargetSpec::Haar
        } else {
            TargetSpec::Fixed(parse_basis(&self.target, self.d, "target")?)
        };
        let cfg = SessionConfig {
            d: self.d,
            memory_capacity: self.memory_capacity,
            fiducial,
            target,
            decoy_probability: self.decoy_probability,
            hardened: self.hardened,
            canary_probability: self.canary_probability,
            step_halfwidth: self.step_halfwidth,
            wrap_params: self.wrap_params,
            initial_params: None,
            max_iterations: self
                .max_iterations
                .unwrap_or_else(|| SessionConfig::default_max_iterations(self.memory_capacity)),
            sim_path: self.sim_path.into(),
            seed: self.seed,
            record_trace: false,
            collect_output_stream: None,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Per-run adversary factory for ensemble commands. Attacker-internal
    /// randomness (Eve's target guess) comes from a stream derived from the
    /// config seed but distinct from every session stream.
    pub fn adversary_factory(
        &self,
    ) -> impl Fn(usize) -> Option<Box<dyn Adversary>> + Sync + 'static {
        let kind = self.adversary.kind;
        let p_int = self.adversary.p_int.unwrap_or(0.0);
        let overlap = self.adversary.clone_overlap_sq.unwrap_or(2.0 / 3.0);
        let channel = match self.adversary.channel.as_deref() {
            Some("return") => TamperChannel::Return,
            _ => TamperChannel::Forward,
        };
        let eve_target = self
            .adversary
            .eve_target
            .clone()
            .unwrap_or_else(|| "haar".into());
        let d = self.d;
        let seed = self.seed;
        let fiducial = self.fiducial.clone();
        move |run_index: usize| -> Option<Box<dyn Adversary>> {
            match kind {
                AdversaryKind::None => None,
                AdversaryKind::Intercept => Some(Box::new(
                    InterceptEve::new(p_int, overlap).expect("validated"),
                )),
                AdversaryKind::RefTamper => Some(Box::new(RefTamperer::new(channel))),
                AdversaryKind::Mitm => {
                    let chi = parse_basis(&fiducial, d, "fiducial").expect("validated");
                    let tau_e = if eve_target == "orthogonal" {
                        // Any state orthogonal to the canary payload gives
                        // the worst (maximal) per-canary alarm rate of 1/2.
                        let k = (0..d)
                            .find(|&k| chi.amplitudes()[k].norm() > 0.5)
                            .unwrap_or(0);
                        QState::basis(d, (k + 1) % d)
                    } else {
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            seed ^ 0xE5E5_E5E5_E5E5_E5E5 ^ (run_index as u64).wrapping_mul(0x9E37),
                        );
                        QState::haar_random(d, &mut rng).expect("d >= 2")
                    };
                    Some(Box::new(MitmEve::new(chi, tau_e).expect("validated")))
                }
            }
        }
    }
}
