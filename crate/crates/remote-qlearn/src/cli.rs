//! Command-line front end: subcommands over TOML experiment configs with
//! deterministic file outputs. Every output file embeds the resolved
//! configuration, so a result is always traceable to exactly one experiment
//! description and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{AdversaryKind, ExperimentConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    calibrate_baseline, fit_survival_exponential, ks_two_sample, run_ensemble, run_ensemble_with,
    CalibrationReport, Ensemble, ExpDecayFit, SurvivalCurve,
};
use crate::session::{run_session, SecurityAlarms, SessionConfig};

/// Desk-scale simulator of a remote quantum-learning protocol with
/// interposable channels and security monitoring.
#[derive(Debug, Parser)]
#[command(name = "remote-qlearn", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one session; write a per-trial trace and a summary.
    Run(CommonArgs),
    /// Run ensembles over the configured sweep lists; write scaling tables.
    Sweep(CommonArgs),
    /// Run the configured adversary against a freshly calibrated baseline.
    Attack(CommonArgs),
    /// Measure an honest baseline and its late-learning alarm threshold.
    Calibrate(CommonArgs),
    /// Re-fit a survival-curve CSV written by sweep, attack, or calibrate.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Bound ensemble parallelism (default: machine core count).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the ensemble size in the config file.
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Survival-curve CSV to re-fit.
    #[arg(long)]
    input: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Parses arguments, dispatches, and maps errors to exit codes:
/// 0 success, 2 configuration error, 3 runtime error.
pub fn run_main() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e @ Error::Config(_)) => {
            eprintln!("config error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Attack(args) => cmd_attack(&args),
        Command::Calibrate(args) => cmd_calibrate(&args),
        Command::Fit(args) => cmd_fit(&args),
    }
}

/// Loads the config, applies command-line overrides, and prepares the output
/// directory and thread pool.
fn load(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = args.runs {
        if runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        cfg.runs = runs;
    }
    if let Some(threads) = args.threads {
        // Best effort: the global pool can only be sized once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    std::fs::create_dir_all(&args.out)?;
    Ok(cfg)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Protocol(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_file(path, &text)
}

/// Renders the resolved config as '#'-prefixed TOML so CSV files are
/// self-describing without breaking CSV parsers.
fn config_header(cfg: &ExperimentConfig) -> Result<String> {
    let toml_text = toml::to_string(cfg)
        .map_err(|e| Error::Protocol(format!("config serialization failed: {e}")))?;
    let mut out = String::new();
    for line in toml_text.lines() {
        let _ = writeln!(out, "# {line}");
    }
    Ok(out)
}

fn write_survival_csv(path: &Path, cfg: &ExperimentConfig, curve: &SurvivalCurve) -> Result<()> {
    let mut text = config_header(cfg)?;
    let _ = writeln!(text, "#meta memory_capacity = {}", curve.memory_capacity());
    let _ = writeln!(text, "#meta runs = {}", curve.runs());
    let _ = writeln!(text, "#meta halted = {}", curve.sample_count());
    text.push_str("n,p_l,p_s\n");
    for (n, p_l, p_s) in curve.points() {
        let _ = writeln!(text, "{n},{p_l},{p_s}");
    }
    write_file(path, &text)
}

#[derive(Debug, Serialize)]
struct RunSummary {
    config: ExperimentConfig,
    halted: bool,
    n_effective: u64,
    total_trials: u64,
    epsilon_l: f64,
    alarms: SecurityAlarms,
    final_params: Vec<f64>,
}

fn cmd_run(args: &CommonArgs) -> Result<()> {
    let cfg = load(args)?;
    let mut session_cfg = cfg.session_config()?;
    session_cfg.seed = cfg.seed;
    session_cfg.record_trace = true;
    let factory = cfg.adversary_factory();
    let mut adversary = factory(0);
    let result = match &mut adversary {
        Some(adv) => run_session(&session_cfg, Some(&mut **adv))?,
        None => run_session(&session_cfg, None)?,
    };

    let mut trace_text = String::new();
    for record in result.trace.as_deref().unwrap_or(&[]) {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::Protocol(format!("serialization failed: {e}")))?;
        trace_text.push_str(&line);
        trace_text.push('\n');
    }
    write_file(&args.out.join("session_trace.jsonl"), &trace_text)?;

    let summary = RunSummary {
        config: cfg,
        halted: result.halted,
        n_effective: result.n_effective,
        total_trials: result.total_trials,
        epsilon_l: result.epsilon_l,
        alarms: result.alarms,
        final_params: result.final_params,
    };
    write_json(&args.out.join("run_summary.json"), &summary)?;
    println!(
        "halted={} n_effective={} epsilon_l={:.6}",
        summary.halted, summary.n_effective, summary.epsilon_l
    );
    Ok(())
}

/// Runs one ensemble for a sweep point, resolving the point's session config
/// from the base experiment.
fn sweep_point(
    base: &ExperimentConfig,
    adjust: impl FnOnce(&mut ExperimentConfig),
) -> Result<(ExperimentConfig, Ensemble, ExpDecayFit)> {
    let mut point = base.clone();
    adjust(&mut point);
    point.validate()?;
    let session_cfg: SessionConfig = point.session_config()?;
    let factory = point.adversary_factory();
    let ensemble = run_ensemble_with(&session_cfg, point.runs, factory)?;
    let fit = fit_survival_exponential(&ensemble.survival_curve()?)?;
    Ok((point, ensemble, fit))
}

fn cmd_sweep(args: &CommonArgs) -> Result<()> {
    let cfg = load(args)?;
    if cfg.sweep.is_empty() {
        return Err(Error::Config(
            "sweep requires a nonempty sweep section".into(),
        ));
    }
    if !cfg.sweep.p_ints.is_empty()
        && !matches!(
            cfg.adversary.kind,
            AdversaryKind::None | AdversaryKind::Intercept
        )
    {
        return Err(Error::Config(
            "an interception sweep needs adversary kind \"intercept\" or \"none\"".into(),
        ));
    }

    if !cfg.sweep.memory_capacities.is_empty() {
        let mut table = config_header(&cfg)?;
        table.push_str("N_L,n_c,n_bar,n_bar_sim,eps_mean\n");
        for &n_l in &cfg.sweep.memory_capacities {
            let (point, ensemble, fit) = sweep_point(&cfg, |c| c.memory_capacity = n_l)?;
            let _ = writeln!(
                table,
                "{n_l},{},{},{},{}",
                fit.n_c,
                fit.n_bar,
                ensemble.mean_halting_time()?,
                ensemble.mean_epsilon()?
            );
            write_survival_csv(
                &args.out.join(format!("survival_window_{n_l}.csv")),
                &point,
                &ensemble.survival_curve()?,
            )?;
        }
        write_file(&args.out.join("sweep_window.csv"), &table)?;
    }

    if !cfg.sweep.p_ints.is_empty() {
        let mut table = config_header(&cfg)?;
        table.push_str("p_int,n_bar,n_bar_sim,eps_mean\n");
        for &p in &cfg.sweep.p_ints {
            let (point, ensemble, fit) = sweep_point(&cfg, |c| {
                c.adversary.kind = AdversaryKind::Intercept;
                c.adversary.p_int = Some(p);
            })?;
            let _ = writeln!(
                table,
                "{p},{},{},{}",
                fit.n_bar,
                ensemble.mean_halting_time()?,
                ensemble.mean_epsilon()?
            );
            write_survival_csv(
                &args.out.join(format!("survival_pint_{p:.3}.csv")),
                &point,
                &ensemble.survival_curve()?,
            )?;
        }
        write_file(&args.out.join("sweep_intercept.csv"), &table)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AttackedSummary {
    runs: usize,
    halted_runs: usize,
    capped_runs: usize,
    n_bar_sim: Option<f64>,
    eps_mean: Option<f64>,
    total_alarms: SecurityAlarms,
    /// Fraction of attacked runs whose effective iteration count exceeds the
    /// baseline's 99th-percentile threshold.
    exceedance_fraction: f64,
    /// Exponential tail fit of the attacked survival curve, when enough runs
    /// halted.
    exp_fit: Option<ExpDecayFit>,
    ks_statistic_vs_baseline: Option<f64>,
    ks_p_value_vs_baseline: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AttackReport {
    config: ExperimentConfig,
    baseline: CalibrationReport,
    attacked: AttackedSummary,
    /// True when the monitoring evidence points at an attack: alarms fired
    /// or the late-learning exceedance is well above the 1% baseline rate.
    attack_flagged: bool,
}

fn cmd_attack(args: &CommonArgs) -> Result<()> {
    let cfg = load(args)?;
    let session_cfg = cfg.session_config()?;

    // The learner calibrates on her own hardware first: same protocol
    // parameters, no adversary.
    let baseline = calibrate_baseline(&session_cfg, cfg.runs)?;

    let factory = cfg.adversary_factory();
    let attacked = run_ensemble_with(&session_cfg, cfg.runs, factory)?;
    let attacked_curve = attacked.survival_curve().ok();
    let exp_fit = attacked_curve
        .as_ref()
        .and_then(|c| fit_survival_exponential(c).ok());
    let ks = {
        let base = run_ensemble(&session_cfg, cfg.runs)?;
        let base_times: Vec<f64> = base.halting_times().iter().map(|&n| n as f64).collect();
        let attack_times: Vec<f64> = attacked.halting_times().iter().map(|&n| n as f64).collect();
        if attack_times.is_empty() {
            None
        } else {
            Some(ks_two_sample(&base_times, &attack_times)?)
        }
    };

    let exceedance = attacked.exceedance_fraction(baseline.alarm_threshold);
    let total_alarms = attacked.total_alarms();
    let attacked_summary = AttackedSummary {
        runs: cfg.runs,
        halted_runs: attacked.halted_count(),
        capped_runs: attacked.capped_count(),
        n_bar_sim: attacked.mean_halting_time().ok(),
        eps_mean: attacked.mean_epsilon().ok(),
        total_alarms,
        exceedance_fraction: exceedance,
        exp_fit,
        ks_statistic_vs_baseline: ks.map(|k| k.statistic),
        ks_p_value_vs_baseline: ks.map(|k| k.p_value),
    };
    let report = AttackReport {
        attack_flagged: total_alarms.total() > 0 || exceedance > 0.05,
        config: cfg,
        baseline,
        attacked: attacked_summary,
    };
    if let Some(curve) = attacked_curve {
        write_survival_csv(
            &args.out.join("attack_survival.csv"),
            &report.config,
            &curve,
        )?;
    }
    write_json(&args.out.join("attack_report.json"), &report)?;
    println!(
        "attack_flagged={} alarms={} exceedance={:.4}",
        report.attack_flagged,
        report.attacked.total_alarms.total(),
        report.attacked.exceedance_fraction
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct CalibrationFile {
    config: ExperimentConfig,
    report: CalibrationReport,
}

fn cmd_calibrate(args: &CommonArgs) -> Result<()> {
    let cfg = load(args)?;
    let session_cfg = cfg.session_config()?;
    let report = calibrate_baseline(&session_cfg, cfg.runs)?;
    let ensemble = run_ensemble(&session_cfg, cfg.runs)?;
    write_survival_csv(
        &args.out.join("calibration_survival.csv"),
        &cfg,
        &ensemble.survival_curve()?,
    )?;
    write_json(
        &args.out.join("calibration.json"),
        &CalibrationFile {
            config: cfg,
            report,
        },
    )?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FitReport {
    input: String,
    model: &'static str,
    memory_capacity: usize,
    runs: usize,
    halted: usize,
    fit: ExpDecayFit,
}

/// Reads back a survival CSV (metadata lines plus n,p_l,p_s rows) into the
/// exact halting-time multiset it was written from.
fn read_survival_csv(path: &Path) -> Result<SurvivalCurve> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut memory_capacity = None;
    let mut runs = None;
    let mut halted = None;
    let mut times = Vec::new();
    let mut prev_count = 0u64;
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix("#meta ") {
            let mut parts = meta.splitn(2, " = ");
            let key = parts.next().unwrap_or_default();
            let value = parts.next().unwrap_or_default().trim();
            match key {
                "memory_capacity" => memory_capacity = value.parse::<usize>().ok(),
                "runs" => runs = value.parse::<usize>().ok(),
                "halted" => halted = value.parse::<usize>().ok(),
                _ => {}
            }
            continue;
        }
        if line.starts_with('#') || line.starts_with('n') || line.trim().is_empty() {
            continue;
        }
        let halted_total = halted
            .ok_or_else(|| Error::Config("survival CSV missing '#meta halted' line".into()))?
            as f64;
        let mut cols = line.split(',');
        let n: u64 = cols
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad survival row: {line}")))?;
        let p_l: f64 = cols
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad survival row: {line}")))?;
        let cum = (p_l * halted_total).round() as u64;
        for _ in prev_count..cum {
            times.push(n);
        }
        prev_count = cum;
    }
    let memory_capacity =
        memory_capacity.ok_or_else(|| Error::Config("missing '#meta memory_capacity'".into()))?;
    let runs = runs.ok_or_else(|| Error::Config("missing '#meta runs'".into()))?;
    SurvivalCurve::new(memory_capacity, runs, times)
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let curve = read_survival_csv(&args.input)?;
    let fit = fit_survival_exponential(&curve)?;
    let report = FitReport {
        input: args.input.display().to_string(),
        model: "exp_decay",
        memory_capacity: curve.memory_capacity(),
        runs: curve.runs(),
        halted: curve.sample_count(),
        fit,
    };
    write_json(&args.out.join("fit_report.json"), &report)?;
    println!(
        "n_c={:.3} n_bar={:.3} r_squared={:.4}",
        fit.n_c, fit.n_bar, fit.r_squared
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::run_ensemble;

    fn args_for(dir: &Path, config: &Path) -> CommonArgs {
        CommonArgs {
            config: config.to_path_buf(),
            seed: None,
            out: dir.to_path_buf(),
            threads: None,
            runs: None,
        }
    }

    #[test]
    fn survival_csv_roundtrips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let cfg =
            ExperimentConfig::from_toml_str("d = 2\nmemory_capacity = 15\nruns = 120\n").unwrap();
        let ensemble = run_ensemble(&cfg.session_config().unwrap(), 120).unwrap();
        let curve = ensemble.survival_curve().unwrap();
        let path = dir.path().join("survival.csv");
        write_survival_csv(&path, &cfg, &curve).unwrap();
        let back = read_survival_csv(&path).unwrap();
        assert_eq!(back.memory_capacity(), curve.memory_capacity());
        assert_eq!(back.runs(), curve.runs());
        assert_eq!(back.halting_times(), curve.halting_times());
    }

    #[test]
    fn run_command_writes_trace_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("exp.toml");
        std::fs::write(&config_path, "d = 2\nmemory_capacity = 10\nseed = 3\n").unwrap();
        cmd_run(&args_for(dir.path(), &config_path)).unwrap();
        let summary = std::fs::read_to_string(dir.path().join("run_summary.json")).unwrap();
        assert!(summary.contains("\"halted\": true"));
        assert!(summary.contains("\"memory_capacity\": 10"));
        let trace = std::fs::read_to_string(dir.path().join("session_trace.jsonl")).unwrap();
        assert!(trace.lines().count() >= 10);
        assert!(trace.lines().all(|l| l.contains("\"trial_id\"")));
    }

    #[test]
    fn sweep_without_lists_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("exp.toml");
        std::fs::write(&config_path, "d = 2\nmemory_capacity = 10\n").unwrap();
        let err = cmd_sweep(&args_for(dir.path(), &config_path)).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn fit_command_reproduces_the_sweep_fit() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("exp.toml");
        std::fs::write(
            &config_path,
            "d = 2\nmemory_capacity = 20\nruns = 150\nseed = 5\n[sweep]\nmemory_capacities = [20]\n",
        )
        .unwrap();
        cmd_sweep(&args_for(dir.path(), &config_path)).unwrap();
        let fit_args = FitArgs {
            input: dir.path().join("survival_window_20.csv"),
            out: dir.path().to_path_buf(),
        };
        cmd_fit(&fit_args).unwrap();
        let report = std::fs::read_to_string(dir.path().join("fit_report.json")).unwrap();
        assert!(report.contains("\"model\": \"exp_decay\""));
        let table = std::fs::read_to_string(dir.path().join("sweep_window.csv")).unwrap();
        // The sweep table and the re-fit agree on n_c for the same curve.
        let sweep_n_c: f64 = table
            .lines()
            .find(|l| l.starts_with("20,"))
            .and_then(|l| l.split(',').nth(1))
            .and_then(|v| v.parse().ok())
            .unwrap();
        let report_json: serde_json::Value = serde_json::from_str(&report).unwrap();
        let refit_n_c = report_json["fit"]["n_c"].as_f64().unwrap();
        assert!(
            (sweep_n_c - refit_n_c).abs() < 1e-9,
            "sweep n_c {sweep_n_c} vs re-fit n_c {refit_n_c}"
        );
    }
}
