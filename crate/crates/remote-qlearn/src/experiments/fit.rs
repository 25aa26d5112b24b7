//! Survival curves over halting times and the two regression models used to
//! summarize them: exponential tail decay and power-law scaling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::stats::linear_least_squares;

/// Empirical distribution of effective halting times for one ensemble.
#[derive(Debug, Clone)]
pub struct SurvivalCurve {
    memory_capacity: usize,
    /// Ensemble size the curve came from, including any capped-out runs;
    /// governs the fit-window depth rule.
    runs: usize,
    /// Sorted halting times of the runs that halted.
    n_values: Vec<u64>,
}

impl SurvivalCurve {
    pub fn new(memory_capacity: usize, runs: usize, mut halting_times: Vec<u64>) -> Result<Self> {
        if halting_times.is_empty() {
            return Err(Error::FitUnavailable("no halted runs".into()));
        }
        if halting_times.len() > runs {
            return Err(Error::FitUnavailable(format!(
                "{} halting times from {} runs",
                halting_times.len(),
                runs
            )));
        }
        halting_times.sort_unstable();
        if halting_times[0] < memory_capacity as u64 {
            return Err(Error::Protocol(format!(
                "halting time {} below the window size {}",
                halting_times[0], memory_capacity
            )));
        }
        Ok(Self {
            memory_capacity,
            runs,
            n_values: halting_times,
        })
    }

    pub fn memory_capacity(&self) -> usize {
        self.memory_capacity
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    /// Number of halted runs behind the curve.
    pub fn sample_count(&self) -> usize {
        self.n_values.len()
    }

    pub fn halting_times(&self) -> &[u64] {
        &self.n_values
    }

    /// Fraction of halted runs with halting time ≤ n.
    pub fn p_l(&self, n: u64) -> f64 {
        let le = self.n_values.partition_point(|&v| v <= n);
        le as f64 / self.n_values.len() as f64
    }

    /// Fraction of halted runs still running strictly after n: 1 − P_L(n).
    pub fn p_s(&self, n: u64) -> f64 {
        1.0 - self.p_l(n)
    }

    /// One (n, P_L, P_S) row per distinct halting time, ascending in n.
    pub fn points(&self) -> Vec<(u64, f64, f64)> {
        let total = self.n_values.len() as f64;
        let mut rows = Vec::new();
        let mut i = 0;
        while i < self.n_values.len() {
            let n = self.n_values[i];
            let mut j = i;
            while j < self.n_values.len() && self.n_values[j] == n {
                j += 1;
            }
            let p_l = j as f64 / total;
            rows.push((n, p_l, 1.0 - p_l));
            i = j;
        }
        rows
    }
}

/// Exponential-decay tail fit P_S(n) ≈ e^{−(n+1−N_L)/n_c}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpDecayFit {
    /// Characteristic decay length of the survival tail.
    pub n_c: f64,
    /// Mean halting time implied by the fit: n_c + N_L.
    pub n_bar: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Distinct curve points inside the fit window.
    pub window_points: usize,
}

/// Minimum halted runs before an exponential fit is attempted.
pub const MIN_HALTED_FOR_FIT: usize = 50;

/// Fits ln P_S against (n + 1 − N_L) over the window where P_S stays above
/// max(0.02, 10/runs), excluding the noisy deep tail.
pub fn fit_survival_exponential(curve: &SurvivalCurve) -> Result<ExpDecayFit> {
    if curve.sample_count() < MIN_HALTED_FOR_FIT {
        return Err(Error::FitUnavailable(format!(
            "need at least {MIN_HALTED_FOR_FIT} halted runs, got {}",
            curve.sample_count()
        )));
    }
    let threshold = 0.02_f64.max(10.0 / curve.runs() as f64);
    let n_l = curve.memory_capacity() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, _, p_s) in curve.points() {
        if p_s >= threshold {
            xs.push(n as f64 + 1.0 - n_l);
            ys.push(p_s.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::FitUnavailable(
            "degenerate fit window: survival mass concentrated at the window size".into(),
        ));
    }
    let (slope, intercept, r_squared) = linear_least_squares(&xs, &ys)?;
    if slope >= 0.0 {
        return Err(Error::FitUnavailable(format!(
            "non-decaying survival tail, slope {slope}"
        )));
    }
    let n_c = -1.0 / slope;
    Ok(ExpDecayFit {
        n_c,
        n_bar: n_c + n_l,
        slope,
        intercept,
        r_squared,
        window_points: xs.len(),
    })
}

/// Power-law fit y ≈ coefficient · x^exponent.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerLawFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares on log-log transformed data. All inputs must be positive.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::FitUnavailable(format!(
            "power-law fit needs at least 3 paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    for &v in xs.iter().chain(ys.iter()) {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::OutOfRange {
                what: "power-law sample",
                value: v,
            });
        }
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (slope, intercept, r_squared) = linear_least_squares(&lx, &ly)?;
    Ok(PowerLawFit {
        coefficient: intercept.exp(),
        exponent: slope,
        r_squared,
        points: xs.len(),
    })
}
