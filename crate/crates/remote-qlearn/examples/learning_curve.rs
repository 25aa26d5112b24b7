//! Ensemble halting-time statistics and the exponential survival tail.
//!
//! Runs many independently seeded honest sessions at one window size,
//! prints the empirical survival curve P_S(n), and fits its tail to
//! exp(−(n+1−N_L)/n_c), the form the halting times settle into once the
//! memory window dominates the dynamics.

use remote_qlearn::experiments::{fit_survival_exponential, run_ensemble};
use remote_qlearn::session::SessionConfig;

fn main() -> remote_qlearn::Result<()> {
    let n_l = 100;
    let runs = 400;
    let mut cfg = SessionConfig::new(2, n_l);
    cfg.seed = 2025;

    println!("running {runs} honest sessions at d = 2, N_L = {n_l} ...");
    let ensemble = run_ensemble(&cfg, runs)?;
    let curve = ensemble.survival_curve()?;
    let fit = fit_survival_exponential(&curve)?;

    println!();
    println!("survival curve (every 12th distinct halting time):");
    println!("{:>8}  {:>8}  {:>8}", "n", "P_L(n)", "P_S(n)");
    for (i, (n, p_l, p_s)) in curve.points().iter().enumerate() {
        if i % 12 == 0 {
            println!("{n:>8}  {p_l:>8.4}  {p_s:>8.4}");
        }
    }

    println!();
    println!(
        "halted runs        : {} / {}",
        ensemble.halted_count(),
        runs
    );
    println!("counted mean  n    : {:.1}", ensemble.mean_halting_time()?);
    println!("fit n_c            : {:.1}", fit.n_c);
    println!("fit mean (n_c+N_L) : {:.1}", fit.n_bar);
    println!(
        "fit R^2            : {:.4} over {} points",
        fit.r_squared, fit.window_points
    );
    println!("mean error eps_L   : {:.4}", ensemble.mean_epsilon()?);

    assert!(fit.r_squared > 0.9, "survival tail should be exponential");
    assert!((fit.n_bar / ensemble.mean_halting_time()? - 1.0).abs() < 0.3);
    Ok(())
}
