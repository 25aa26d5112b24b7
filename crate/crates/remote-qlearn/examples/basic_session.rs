//! One honest learning session, traced trial by trial.
//!
//! The learner trains a parameterized SU(2) rotation against the provider's
//! hidden target using only the single bit returned per trial, interleaving
//! blinded decoys that an honest provider passes through untouched.

use remote_qlearn::session::{run_session, SessionConfig, TargetSpec};

fn main() -> remote_qlearn::Result<()> {
    let mut cfg = SessionConfig::new(2, 25);
    cfg.seed = 7;
    cfg.target = TargetSpec::Haar;
    cfg.record_trace = true;

    let result = run_session(&cfg, None)?;
    let trace = result.trace.as_deref().unwrap_or(&[]);

    println!(
        "honest session: d = {}, window N_L = {}, seed = {}",
        cfg.d, cfg.memory_capacity, cfg.seed
    );
    println!();
    println!(
        "{:>8}  {:>9}  {:>7}  {:>5}  {:>11}  {:>8}",
        "trial", "kind", "outcome", "fails", "coefficient", "fidelity"
    );
    for record in trace.iter().take(12) {
        println!(
            "{:>8}  {:>9}  {:>7}  {:>5}  {:>11.4}  {:>8.4}",
            record.trial_id,
            record.kind,
            record.outcome,
            record.fails,
            record.coefficient,
            record.fidelity
        );
    }
    println!("{:>8}  ...", "");
    for record in trace
        .iter()
        .rev()
        .take(3)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
    {
        println!(
            "{:>8}  {:>9}  {:>7}  {:>5}  {:>11.4}  {:>8.4}",
            record.trial_id,
            record.kind,
            record.outcome,
            record.fails,
            record.coefficient,
            record.fidelity
        );
    }

    println!();
    println!("halted            : {}", result.halted);
    println!("effective trials  : {} (learning only)", result.n_effective);
    println!(
        "total trials      : {} (including decoys)",
        result.total_trials
    );
    println!("final error eps_L : {:.6}", result.epsilon_l);
    println!("decoy alarms      : {}", result.alarms.m_pm_violations);
    assert!(result.halted && result.alarms.total() == 0);
    Ok(())
}
