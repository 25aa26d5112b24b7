//! Monte Carlo harness: parallel session ensembles, survival statistics,
//! scaling fits, and the learning-time baseline used for attack monitoring.

pub mod fit;
pub mod stats;

pub use fit::{
    fit_power_law, fit_survival_exponential, ExpDecayFit, PowerLawFit, SurvivalCurve,
    MIN_HALTED_FOR_FIT,
};
pub use stats::{
    ks_two_sample, linear_least_squares, nearest_rank_percentile, sample_exponential_halting,
    KsResult,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::Adversary;
use crate::error::{Error, Result};
use crate::session::{run_session, SecurityAlarms, SessionConfig};

/// Compact summary of one session inside an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRun {
    pub run_index: usize,
    pub seed: u64,
    pub halted: bool,
    pub n_effective: u64,
    pub total_trials: u64,
    pub epsilon_l: f64,
    pub alarms: SecurityAlarms,
}

/// An ensemble of independently seeded sessions over one configuration.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub memory_capacity: usize,
    /// Per-run summaries in run-index order.
    pub runs: Vec<EnsembleRun>,
}

impl Ensemble {
    pub fn halted_count(&self) -> usize {
        self.runs.iter().filter(|r| r.halted).count()
    }

    /// Runs stopped by the iteration cap instead of halting; excluded from
    /// all averages and fits, reported separately.
    pub fn capped_count(&self) -> usize {
        self.runs.len() - self.halted_count()
    }

    /// Sorted halting times of the halted runs.
    pub fn halting_times(&self) -> Vec<u64> {
        let mut times: Vec<u64> = self
            .runs
            .iter()
            .filter(|r| r.halted)
            .map(|r| r.n_effective)
            .collect();
        times.sort_unstable();
        times
    }

    /// Mean effective halting time over halted runs.
    pub fn mean_halting_time(&self) -> Result<f64> {
        let times = self.halting_times();
        if times.is_empty() {
            return Err(Error::FitUnavailable("no halted runs to average".into()));
        }
        Ok(times.iter().sum::<u64>() as f64 / times.len() as f64)
    }

    /// Mean final error over halted runs.
    pub fn mean_epsilon(&self) -> Result<f64> {
        let halted: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.halted)
            .map(|r| r.epsilon_l)
            .collect();
        if halted.is_empty() {
            return Err(Error::FitUnavailable("no halted runs to average".into()));
        }
        Ok(halted.iter().sum::<f64>() / halted.len() as f64)
    }

    pub fn survival_curve(&self) -> Result<SurvivalCurve> {
        SurvivalCurve::new(self.memory_capacity, self.runs.len(), self.halting_times())
    }

    /// Sum of security counters across all runs.
    pub fn total_alarms(&self) -> SecurityAlarms {
        let mut total = SecurityAlarms::default();
        for r in &self.runs {
            total.m_pm_violations += r.alarms.m_pm_violations;
            total.canary_violations += r.alarms.canary_violations;
        }
        total
    }

    /// Fraction of all runs whose effective iteration count exceeds
    /// `threshold` (capped runs spent at least the cap, so they count by
    /// their recorded n).
    pub fn exceedance_fraction(&self, threshold: f64) -> f64 {
        let over = self
            .runs
            .iter()
            .filter(|r| r.n_effective as f64 > threshold)
            .count();
        over as f64 / self.runs.len() as f64
    }
}

/// Runs `runs` sessions of `template` with per-run seeds
/// `template.seed + run_index`, one fresh adversary per run from `factory`.
/// Runs execute in parallel; results come back in run-index order, so output
/// is independent of scheduling.
pub fn run_ensemble_with<F>(template: &SessionConfig, runs: usize, factory: F) -> Result<Ensemble>
where
    F: Fn(usize) -> Option<Box<dyn Adversary>> + Sync,
{
    if runs == 0 {
        return Err(Error::Protocol("ensemble needs at least one run".into()));
    }
    template.validate()?;
    let collected: Result<Vec<EnsembleRun>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut cfg = template.clone();
            cfg.seed = template.seed.wrapping_add(i as u64);
            let mut adversary = factory(i);
            let result = match &mut adversary {
                Some(adv) => run_session(&cfg, Some(&mut **adv))?,
                None => run_session(&cfg, None)?,
            };
            Ok(EnsembleRun {
                run_index: i,
                seed: cfg.seed,
                halted: result.halted,
                n_effective: result.n_effective,
                total_trials: result.total_trials,
                epsilon_l: result.epsilon_l,
                alarms: result.alarms,
            })
        })
        .collect();
    Ok(Ensemble {
        memory_capacity: template.memory_capacity,
        runs: collected?,
    })
}

/// Honest ensemble: no adversary on any run.
pub fn run_ensemble(template: &SessionConfig, runs: usize) -> Result<Ensemble> {
    run_ensemble_with(template, runs, |_| None)
}

/// Baseline statistics the learner gathers on her own hardware before
/// trusting a remote provider: halting-time scale, error level, and a
/// late-learning alarm threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub memory_capacity: usize,
    pub runs: usize,
    pub halted_runs: usize,
    pub capped_runs: usize,
    /// Characteristic decay length from the survival-tail fit.
    pub n_c: f64,
    /// Mean halting time implied by the fit (n_c + N_L).
    pub n_bar_fit: f64,
    /// Counted mean halting time.
    pub n_bar_sim: f64,
    pub epsilon_mean: f64,
    pub fit_r_squared: f64,
    /// 99th-percentile baseline halting time: sessions running longer than
    /// this are flagged as suspiciously slow (≈1% false-alarm rate).
    pub alarm_threshold: f64,
    pub total_alarms: SecurityAlarms,
}

/// Runs an honest ensemble and summarizes it into a monitoring baseline.
pub fn calibrate_baseline(template: &SessionConfig, runs: usize) -> Result<CalibrationReport> {
    let ensemble = run_ensemble(template, runs)?;
    let curve = ensemble.survival_curve()?;
    let fit = fit_survival_exponential(&curve)?;
    let times: Vec<f64> = ensemble.halting_times().iter().map(|&n| n as f64).collect();
    let alarm_threshold = nearest_rank_percentile(&times, 99.0)?;
    Ok(CalibrationReport {
        memory_capacity: template.memory_capacity,
        runs,
        halted_runs: ensemble.halted_count(),
        capped_runs: ensemble.capped_count(),
        n_c: fit.n_c,
        n_bar_fit: fit.n_bar,
        n_bar_sim: ensemble.mean_halting_time()?,
        epsilon_mean: ensemble.mean_epsilon()?,
        fit_r_squared: fit.r_squared,
        alarm_threshold,
        total_alarms: ensemble.total_alarms(),
    })
}
