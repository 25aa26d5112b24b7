//! Decoy states catching a reference-measuring eavesdropper.
//!
//! A naive attacker reads every reference qubit in the computational basis.
//! Learning references are Z eigenstates, so she learns the trial labels for
//! free — but the interleaved ± decoys collapse under her measurement and
//! fail the learner's sign check half the time. A handful of decoys make
//! escape overwhelmingly unlikely.

use remote_qlearn::adversary::{RefTamperer, TamperChannel};
use remote_qlearn::session::{Session, SessionConfig};

fn main() -> remote_qlearn::Result<()> {
    let sessions = 400u64;
    let trial_budget = 50;

    for channel in [TamperChannel::Forward, TamperChannel::Return] {
        let mut alarmed = 0u64;
        let mut first_alarm_sum = 0u64;
        let mut decoys = 0u64;
        let mut violations = 0u64;
        for seed in 0..sessions {
            let mut cfg = SessionConfig::new(2, 100);
            cfg.seed = 10_000 + seed;
            let mut session = Session::new(cfg)?;
            let mut eve = RefTamperer::new(channel);
            let mut first_alarm = None;
            for trial in 0..trial_budget {
                let outcome = session.run_trial(Some(&mut eve))?;
                if outcome.violation && first_alarm.is_none() {
                    first_alarm = Some(trial + 1);
                }
            }
            let alarms = session.alice().alarms();
            decoys += session.total_trials() - session.n_effective();
            violations += alarms.m_pm_violations;
            if let Some(t) = first_alarm {
                alarmed += 1;
                first_alarm_sum += t;
            }
        }
        println!("tamper channel {channel:?}:");
        println!(
            "  sessions alarmed within {trial_budget} trials: {alarmed}/{sessions} ({:.2}%)",
            100.0 * alarmed as f64 / sessions as f64
        );
        println!(
            "  mean first-alarm trial: {:.1}",
            first_alarm_sum as f64 / alarmed.max(1) as f64
        );
        println!(
            "  per-decoy violation rate: {:.3} (expected 0.5)",
            violations as f64 / decoys as f64
        );
        assert!(
            alarmed == sessions,
            "every tampered session should alarm quickly"
        );
        println!();
    }
    Ok(())
}
