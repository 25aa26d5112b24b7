//! Calibrating the learning-time monitor a learner runs before going remote.
//!
//! Some attacks trip no in-protocol check, so the last line of defense is
//! statistical: measure the honest halting-time distribution on trusted
//! hardware, freeze its 99th percentile as a lateness threshold, and flag
//! sessions that run past it. Halting times keep an exponential tail even
//! under attack, so a slowed ensemble still finishes many sessions early;
//! the decisive signal is the *rate* of late sessions, which jumps from the
//! calibrated ~1% to a large multiple of it. This example builds the
//! baseline, verifies its false-alarm rate, and applies the monitor to an
//! intercepted ensemble.

use remote_qlearn::adversary::InterceptEve;
use remote_qlearn::experiments::{
    calibrate_baseline, ks_two_sample, run_ensemble, run_ensemble_with,
};
use remote_qlearn::session::SessionConfig;

fn main() -> remote_qlearn::Result<()> {
    let mut cfg = SessionConfig::new(2, 50);
    cfg.seed = 300;
    let runs = 250;

    let report = calibrate_baseline(&cfg, runs)?;
    println!(
        "baseline calibration at d = 2, N_L = {} ({runs} runs):",
        cfg.memory_capacity
    );
    println!("  n_c (fit)        : {:.1}", report.n_c);
    println!("  mean n (fit)     : {:.1}", report.n_bar_fit);
    println!("  mean n (counted) : {:.1}", report.n_bar_sim);
    println!("  mean eps_L       : {:.4}", report.epsilon_mean);
    println!("  fit R^2          : {:.4}", report.fit_r_squared);
    println!(
        "  alarm threshold  : {:.0} (99th percentile)",
        report.alarm_threshold
    );

    // Fresh honest sessions: about 1 in 100 runs past the threshold.
    let mut honest_cfg = cfg.clone();
    honest_cfg.seed = 999_000;
    let honest = run_ensemble(&honest_cfg, runs)?;
    let false_rate = honest.exceedance_fraction(report.alarm_threshold);
    println!();
    println!(
        "fresh honest ensemble : {:.1}% flagged late",
        100.0 * false_rate
    );
    assert!(false_rate < 0.05);

    let base_times: Vec<f64> = honest.halting_times().iter().map(|&n| n as f64).collect();
    let cal_ensemble = run_ensemble(&cfg, runs)?;
    let cal_times: Vec<f64> = cal_ensemble
        .halting_times()
        .iter()
        .map(|&n| n as f64)
        .collect();
    let ks = ks_two_sample(&base_times, &cal_times)?;
    println!(
        "KS vs calibration set : D = {:.3}, p = {:.3}",
        ks.statistic, ks.p_value
    );
    assert!(ks.p_value > 0.01);

    // A slowed ensemble lands far outside the baseline distribution. Each
    // attacked run that finishes early is tail luck; the late-session rate
    // and the distribution shift give the attack away.
    let mut attacked_cfg = cfg.clone();
    attacked_cfg.max_iterations = 5_000_000;
    let attacked = run_ensemble_with(&attacked_cfg, runs, |_| {
        Some(Box::new(
            InterceptEve::new(0.2, 2.0 / 3.0).expect("valid parameters"),
        ))
    })?;
    let caught = attacked.exceedance_fraction(report.alarm_threshold);
    let slowdown = attacked.mean_halting_time().unwrap_or(f64::INFINITY) / report.n_bar_sim;
    let att_times: Vec<f64> = attacked.halting_times().iter().map(|&n| n as f64).collect();
    let ks_attacked = ks_two_sample(&base_times, &att_times)?;
    println!();
    println!(
        "attacked (p_int=0.2)  : {:.1}% flagged late",
        100.0 * caught
    );
    println!("  mean slowdown       : {slowdown:.2}x");
    println!(
        "  KS vs honest        : D = {:.3}, p = {:.1e}",
        ks_attacked.statistic, ks_attacked.p_value
    );
    assert!(
        caught > 5.0 * 0.01,
        "late-session rate should dwarf the 1% design rate"
    );
    assert!(slowdown > 1.5, "interception should slow the mean visibly");
    assert!(
        ks_attacked.p_value < 1e-6,
        "the halting-time distribution should shift decisively"
    );
    println!();
    println!(
        "verdict: late-session rate {:.0}x the calibrated 1% -> attack flagged",
        100.0 * caught
    );
    Ok(())
}
