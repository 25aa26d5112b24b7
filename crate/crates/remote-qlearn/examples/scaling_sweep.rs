//! How halting time and final error scale with the memory window.
//!
//! Sweeps the window size N_L, then fits the two power laws that summarize
//! the protocol's cost/accuracy trade-off: mean halting time n̄ ∝ N_L^α
//! grows while mean error ε̄_L ∝ N_L^−β falls, so accuracy is bought with
//! learning time at a fixed exchange rate ε̄_L ∝ n̄^(−β/α).

use remote_qlearn::experiments::{fit_power_law, run_ensemble};
use remote_qlearn::session::SessionConfig;

fn main() -> remote_qlearn::Result<()> {
    let windows = [25usize, 50, 100, 200];
    let runs = 200;

    println!(
        "{:>6}  {:>10}  {:>10}  {:>8}",
        "N_L", "mean n", "mean eps", "capped"
    );
    let mut n_means = Vec::new();
    let mut eps_means = Vec::new();
    for &n_l in &windows {
        let mut cfg = SessionConfig::new(2, n_l);
        cfg.seed = 9000;
        let ensemble = run_ensemble(&cfg, runs)?;
        let n_bar = ensemble.mean_halting_time()?;
        let eps = ensemble.mean_epsilon()?;
        println!(
            "{:>6}  {:>10.1}  {:>10.5}  {:>8}",
            n_l,
            n_bar,
            eps,
            ensemble.capped_count()
        );
        n_means.push(n_bar);
        eps_means.push(eps);
    }

    let xs: Vec<f64> = windows.iter().map(|&n| n as f64).collect();
    let growth = fit_power_law(&xs, &n_means)?;
    let decay = fit_power_law(&xs, &eps_means)?;
    let tradeoff = fit_power_law(&n_means, &eps_means)?;

    println!();
    println!(
        "halting time : n ~ {:.3} * N_L^{:.3}   (R^2 = {:.4})",
        growth.coefficient, growth.exponent, growth.r_squared
    );
    println!(
        "final error  : eps ~ {:.3} * N_L^{:.3}  (R^2 = {:.4})",
        decay.coefficient, decay.exponent, decay.r_squared
    );
    println!(
        "trade-off    : eps ~ {:.3} * n^{:.3}    (R^2 = {:.4})",
        tradeoff.coefficient, tradeoff.exponent, tradeoff.r_squared
    );

    assert!(
        growth.exponent > 1.0,
        "halting time grows superlinearly in the window"
    );
    assert!(decay.exponent < -0.3, "error falls with the window");
    assert!(tradeoff.exponent < 0.0);
    Ok(())
}
