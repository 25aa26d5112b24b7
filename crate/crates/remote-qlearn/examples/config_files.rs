//! Driving experiments from TOML config files.
//!
//! The same schema feeds the `remote-qlearn` binary's subcommands (run,
//! sweep, attack, calibrate, fit); this example exercises it through the
//! library: parse, validate, resolve into a session template plus adversary
//! factory, and run a small attacked ensemble. Unknown keys are rejected
//! outright, so configs cannot rot silently.

use remote_qlearn::config::ExperimentConfig;
use remote_qlearn::experiments::run_ensemble_with;

const EXPERIMENT: &str = r#"
d = 2
memory_capacity = 30
seed = 17
runs = 80
decoy_probability = 0.5

[adversary]
kind = "intercept"
p_int = 0.15

[sweep]
memory_capacities = [50, 100, 150]
p_ints = [0.0, 0.1, 0.2]
"#;

fn main() -> remote_qlearn::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(EXPERIMENT)?;
    println!("parsed experiment:");
    println!(
        "  d = {}, N_L = {}, seed = {}, runs = {}",
        cfg.d, cfg.memory_capacity, cfg.seed, cfg.runs
    );
    println!(
        "  adversary: {:?}, p_int = {:?}",
        cfg.adversary.kind, cfg.adversary.p_int
    );
    println!("  window sweep points: {:?}", cfg.sweep.memory_capacities);
    println!("  interception sweep points: {:?}", cfg.sweep.p_ints);

    let session_template = cfg.session_config()?;
    println!(
        "  derived iteration cap: {}",
        session_template.max_iterations
    );

    let ensemble = run_ensemble_with(&session_template, cfg.runs, cfg.adversary_factory())?;
    println!();
    println!(
        "attacked ensemble: {} runs, mean n = {:.1}, mean eps = {:.4}, alarms = {}",
        cfg.runs,
        ensemble.mean_halting_time()?,
        ensemble.mean_epsilon()?,
        ensemble.total_alarms().total()
    );

    // A typo anywhere in the file is a hard error, not a silent default.
    let typo = EXPERIMENT.replace("decoy_probability", "decoy_probabilty");
    match ExperimentConfig::from_toml_str(&typo) {
        Err(e) => println!("\ntypo'd config rejected as expected:\n  {e}"),
        Ok(_) => panic!("unknown keys must be rejected"),
    }
    Ok(())
}
