//! Intercept-and-resend attack and the learning-time monitor that senses it.
//!
//! The attacker captures the learner's output state on some fraction of
//! learning trials and forwards an imperfect clone. No decoy or canary ever
//! fires — the attack is invisible to the in-protocol checks — but every
//! replaced state caps the swap-test pass probability, so halting slows
//! down. Comparing against a pre-calibrated honest baseline exposes her.

use remote_qlearn::adversary::InterceptEve;
use remote_qlearn::experiments::{calibrate_baseline, run_ensemble_with};
use remote_qlearn::session::SessionConfig;

fn main() -> remote_qlearn::Result<()> {
    let n_l = 40;
    let runs = 150;
    let mut cfg = SessionConfig::new(2, n_l);
    cfg.seed = 1234;
    cfg.max_iterations = 5_000_000;

    println!("calibrating honest baseline ({runs} runs at N_L = {n_l}) ...");
    let baseline = calibrate_baseline(&cfg, runs)?;
    println!(
        "baseline: mean n = {:.1}, n_c = {:.1}, 99th-percentile threshold = {:.0}",
        baseline.n_bar_sim, baseline.n_c, baseline.alarm_threshold
    );

    println!();
    println!(
        "{:>7}  {:>10}  {:>9}  {:>8}  {:>11}",
        "p_int", "mean n", "slowdown", "alarms", "flagged runs"
    );
    let mut previous = 0.0;
    for &p_int in &[0.0, 0.1, 0.2] {
        let ensemble = run_ensemble_with(&cfg, runs, |_| {
            Some(Box::new(
                InterceptEve::new(p_int, 2.0 / 3.0).expect("valid parameters"),
            ))
        })?;
        let mean_n = ensemble.mean_halting_time()?;
        let exceed = ensemble.exceedance_fraction(baseline.alarm_threshold);
        println!(
            "{:>7.2}  {:>10.1}  {:>8.2}x  {:>8}  {:>10.1}%",
            p_int,
            mean_n,
            mean_n / baseline.n_bar_sim,
            ensemble.total_alarms().total(),
            100.0 * exceed
        );
        assert!(
            ensemble.total_alarms().total() == 0,
            "interception trips no in-protocol check"
        );
        assert!(
            mean_n > previous,
            "halting time must grow with interception strength"
        );
        previous = mean_n;
    }
    println!();
    println!("the in-protocol checks stay silent; the learning-time monitor does not.");
    Ok(())
}
