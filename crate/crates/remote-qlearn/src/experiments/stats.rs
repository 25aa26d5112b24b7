//! Small statistical helpers shared by the fitting and calibration code:
//! plain least squares, nearest-rank percentiles, a two-sample
//! Kolmogorov–Smirnov test, and a synthetic halting-time sampler.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ordinary least squares y ≈ slope·x + intercept, with the coefficient of
/// determination R².
pub fn linear_least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::FitUnavailable(format!(
            "mismatched sample lengths {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::FitUnavailable(format!(
            "need at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitUnavailable("all x values identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    // A perfectly flat response is fit exactly by the constant line.
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r_squared))
}

/// Nearest-rank percentile: the smallest sample value such that at least
/// `percentile`% of the sample is ≤ it. `percentile` must lie in (0, 100].
pub fn nearest_rank_percentile(sorted: &[f64], percentile: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::FitUnavailable("empty sample".into()));
    }
    if !(0.0..=100.0).contains(&percentile) || percentile == 0.0 {
        return Err(Error::OutOfRange {
            what: "percentile",
            value: percentile,
        });
    }
    debug_assert!(
        sorted.windows(2).all(|w| w[0] <= w[1]),
        "input must be sorted"
    );
    let rank = ((percentile / 100.0) * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Result of a two-sample Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    /// Supremum distance between the two empirical distribution functions.
    pub statistic: f64,
    /// Asymptotic two-sided p-value.
    pub p_value: f64,
}

/// Two-sample KS test with the standard asymptotic p-value
/// Q_KS((√n_e + 0.12 + 0.11/√n_e)·D), n_e = n₁n₂/(n₁+n₂).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::FitUnavailable(
            "KS test needs nonempty samples".into(),
        ));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.total_cmp(y));
    sb.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (sa.len(), sb.len());
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while ia < na && ib < nb {
        let xa = sa[ia];
        let xb = sb[ib];
        let x = xa.min(xb);
        while ia < na && sa[ia] <= x {
            ia += 1;
        }
        while ib < nb && sb[ib] <= x {
            ib += 1;
        }
        d = d.max((ia as f64 / na as f64 - ib as f64 / nb as f64).abs());
    }
    let n_e = (na as f64 * nb as f64) / (na + nb) as f64;
    let lambda = (n_e.sqrt() + 0.12 + 0.11 / n_e.sqrt()) * d;
    Ok(KsResult {
        statistic: d,
        p_value: ks_survival(lambda),
    })
}

/// Kolmogorov distribution tail Q_KS(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}.
fn ks_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Samples integer halting times whose survival function is exactly
/// e^{−(n+1−N_L)/n_c} at every integer n ≥ N_L − 1: n = N_L − 1 + ⌈t⌉ with t
/// exponential of mean n_c.
pub fn sample_exponential_halting(
    memory_capacity: usize,
    n_c: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u64>> {
    if !n_c.is_finite() || n_c <= 0.0 {
        return Err(Error::OutOfRange {
            what: "characteristic time",
            value: n_c,
        });
    }
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let t = -n_c * u.ln();
            memory_capacity as u64 - 1 + (t.ceil() as u64).max(1)
        })
        .collect())
}
