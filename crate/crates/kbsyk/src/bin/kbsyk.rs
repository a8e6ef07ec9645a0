//! Command-line front end for the dissipative-SYK Kadanoff-Baym solver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kbsyk::runner::{self, RunConfig, Scenario};
use kbsyk::snapshot;

#[derive(Parser)]
#[command(
    name = "kbsyk",
    about = "Quench dynamics of dissipative SYK models: equilibrium state preparation, \
             two-time Kadanoff-Baym evolution, effective-temperature traces and \
             Mpemba-crossing analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonFlags {
    /// Flat TOML configuration file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    lambda_t: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Paper-scale lattice (lambda_t = 50, dt = 0.1, 1000x1000).
    #[arg(long)]
    paper_scale: bool,
    /// Fixed-point stopping threshold.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    trace_stride: Option<usize>,
    #[arg(long)]
    n_omega: Option<usize>,
    #[arg(long)]
    omega_max: Option<f64>,
    /// Additional key=value overrides for any config key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Artifact directory.
    #[arg(long, default_value = "kbsyk-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a thermal state; writes spectral CSV and a lattice snapshot.
    Equilibrium {
        #[command(flatten)]
        common: CommonFlags,
        /// Inverse temperature (0 = infinite temperature).
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Couple the system to one or two SYK baths at t = 0 and evolve.
    Quench {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        beta_init: Option<f64>,
        /// Bath spec "beta=0.5,v=0.525,n=3"; repeat for a second bath.
        #[arg(long)]
        bath: Vec<String>,
    },
    /// Evolve under the Lindbladian with linear jump operators.
    Lindblad {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        beta_init: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Dissipator bookkeeping: "real" (default) or "imaginary".
        #[arg(long)]
        convention: Option<String>,
    },
    /// Bisect the smallest coupling with Mpemba crossings.
    ThresholdScan {
        #[command(flatten)]
        common: CommonFlags,
        /// First initial inverse temperature.
        #[arg(long)]
        beta_init: Option<f64>,
        /// Second initial inverse temperature.
        #[arg(long)]
        beta_b: Option<f64>,
        /// Bath spec (v is the scan variable; its value here is ignored).
        #[arg(long)]
        bath: Vec<String>,
        /// Two-bath sugar: mean bath temperature (constructs two baths).
        #[arg(long)]
        mean_bath_temp: Option<f64>,
        /// Two-bath sugar: temperature bias T1 - T2.
        #[arg(long)]
        bath_bias: Option<f64>,
        /// n of the constructed two-bath pair.
        #[arg(long, default_value_t = 3)]
        bath_n: u32,
        #[arg(long)]
        v_min: Option<f64>,
        #[arg(long)]
        v_max: Option<f64>,
        #[arg(long)]
        bisect_tol: Option<f64>,
    },
    /// Pairwise crossing report over finished run directories.
    MpcCompare {
        /// Two or more run directories (same parameters except beta_init).
        dirs: Vec<PathBuf>,
        /// Detection window "start,end" (default: the reliable zone).
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        deadband: Option<f64>,
        /// Where to write mpc_compare.json (defaults to the first run dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump a binary snapshot as (t1, t2, re, im) CSV.
    SnapshotDump {
        snapshot: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute a manifest.
    Rerun {
        manifest: PathBuf,
        #[arg(long, default_value = "kbsyk-rerun")]
        out: PathBuf,
    },
}

fn load_base(common: &CommonFlags, scenario: Scenario) -> Result<RunConfig, kbsyk::KbError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            // the scenario key may be omitted when a subcommand names it
            let patched = if text.contains("scenario") {
                text
            } else {
                format!("scenario = \"{}\"\n{}", scenario.as_str(), text)
            };
            RunConfig::from_toml_str(&patched)?
        }
        None => {
            let mut c = RunConfig::default();
            c.scenario = scenario;
            c
        }
    };
    if cfg.scenario != scenario {
        return Err(kbsyk::KbError::Config(vec![format!(
            "config file names scenario '{}' but the subcommand is '{}'",
            cfg.scenario.as_str(),
            scenario.as_str()
        )]));
    }
    if common.paper_scale {
        cfg.lambda_t = 50.0;
        cfg.dt = 0.1;
    }
    macro_rules! apply {
        ($field:ident, $key:literal) => {
            if let Some(v) = common.$field {
                cfg.set($key, &v.to_string())?;
            }
        };
    }
    apply!(j, "j");
    apply!(q, "q");
    apply!(lambda_t, "lambda_t");
    apply!(dt, "dt");
    apply!(tol, "fp_tol");
    apply!(max_sweeps, "max_sweeps");
    apply!(eta, "eta");
    apply!(trace_stride, "trace_stride");
    apply!(n_omega, "n_omega");
    apply!(omega_max, "omega_max");
    for kv in &common.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| {
            kbsyk::KbError::Config(vec![format!("--set needs KEY=VALUE, got '{kv}'")])
        })?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), kbsyk::KbError> {
    match cli.command {
        Command::Equilibrium { common, beta } => {
            let mut cfg = load_base(&common, Scenario::Equilibrium)?;
            if let Some(b) = beta {
                cfg.set("beta_init", &b.to_string())?;
            }
            let summary = runner::run(&cfg, &common.out)?;
            report(&summary);
            Ok(())
        }
        Command::Quench {
            common,
            beta_init,
            bath,
        } => {
            let mut cfg = load_base(&common, Scenario::Quench)?;
            if let Some(b) = beta_init {
                cfg.set("beta_init", &b.to_string())?;
            }
            if !bath.is_empty() {
                cfg.set("bath", "")?;
                for spec in &bath {
                    cfg.set("bath", spec)?;
                }
            }
            let summary = runner::run(&cfg, &common.out)?;
            report(&summary);
            Ok(())
        }
        Command::Lindblad {
            common,
            beta_init,
            mu,
            convention,
        } => {
            let mut cfg = load_base(&common, Scenario::Lindblad)?;
            if let Some(b) = beta_init {
                cfg.set("beta_init", &b.to_string())?;
            }
            if let Some(m) = mu {
                cfg.set("mu", &m.to_string())?;
            }
            if let Some(c) = convention {
                cfg.set("convention", &c)?;
            }
            let summary = runner::run(&cfg, &common.out)?;
            report(&summary);
            Ok(())
        }
        Command::ThresholdScan {
            common,
            beta_init,
            beta_b,
            bath,
            mean_bath_temp,
            bath_bias,
            bath_n,
            v_min,
            v_max,
            bisect_tol,
        } => {
            let mut cfg = load_base(&common, Scenario::ThresholdScan)?;
            if let Some(b) = beta_init {
                cfg.set("beta_init", &b.to_string())?;
            }
            if let Some(b) = beta_b {
                cfg.set("scan_beta_b", &b.to_string())?;
            }
            if !bath.is_empty() {
                cfg.set("bath", "")?;
                for spec in &bath {
                    cfg.set("bath", spec)?;
                }
            }
            if let (Some(mean), Some(bias)) = (mean_bath_temp, bath_bias) {
                let t1 = mean + 0.5 * bias;
                let t2 = mean - 0.5 * bias;
                if t1 <= 0.0 || t2 <= 0.0 {
                    return Err(kbsyk::KbError::Config(vec![
                        "bath temperatures from mean/bias must be positive".into(),
                    ]));
                }
                cfg.set("bath", "")?;
                cfg.set("bath", &format!("beta={},v=0,n={}", 1.0 / t1, bath_n))?;
                cfg.set("bath", &format!("beta={},v=0,n={}", 1.0 / t2, bath_n))?;
            }
            if let Some(v) = v_min {
                cfg.set("v_min", &v.to_string())?;
            }
            if let Some(v) = v_max {
                cfg.set("v_max", &v.to_string())?;
            }
            if let Some(v) = bisect_tol {
                cfg.set("bisect_tol", &v.to_string())?;
            }
            let summary = runner::run(&cfg, &common.out)?;
            report(&summary);
            if let Some(v) = summary.manifest.diagnostics.get("v_threshold") {
                println!("v_threshold = {v}");
            }
            Ok(())
        }
        Command::MpcCompare {
            dirs,
            window,
            deadband,
            out,
        } => {
            let window = match window {
                Some(s) => {
                    let (a, b) = s.split_once(',').ok_or_else(|| {
                        kbsyk::KbError::Config(vec!["--window needs 'start,end'".into()])
                    })?;
                    Some((
                        a.parse::<f64>()
                            .map_err(|e| kbsyk::KbError::Config(vec![e.to_string()]))?,
                        b.parse::<f64>()
                            .map_err(|e| kbsyk::KbError::Config(vec![e.to_string()]))?,
                    ))
                }
                None => None,
            };
            let results = runner::mpc_compare(&dirs, window, deadband)?;
            println!("{:<28} {:<28} crossings parity min_sep", "run A", "run B");
            for (a, b, rep) in &results {
                println!(
                    "{:<28} {:<28} {:>9} {:>6} {:>8.4}",
                    a,
                    b,
                    rep.crossing_times.len(),
                    rep.parity,
                    rep.min_separation
                );
            }
            let json = serde_json::json!({
                "pairs": results
                    .iter()
                    .map(|(a, b, rep)| serde_json::json!({
                        "run_a": a,
                        "run_b": b,
                        "crossings": rep.crossing_times,
                        "parity": rep.parity,
                        "min_separation": rep.min_separation,
                    }))
                    .collect::<Vec<_>>(),
            });
            let out_path = out
                .or_else(|| dirs.first().cloned())
                .unwrap_or_else(|| PathBuf::from("."))
                .join("mpc_compare.json");
            std::fs::write(&out_path, serde_json::to_string_pretty(&json).unwrap())?;
            println!("report written to {}", out_path.display());
            Ok(())
        }
        Command::SnapshotDump { snapshot: path, out } => {
            let green = snapshot::read_snapshot(&path)?;
            let out = out.unwrap_or_else(|| path.with_extension("csv"));
            snapshot::write_grid_csv(&out, &green)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Rerun { manifest, out } => {
            let summary = runner::rerun(&manifest, &out)?;
            report(&summary);
            Ok(())
        }
    }
}

fn report(summary: &runner::RunSummary) {
    println!(
        "{} finished; artifacts in {}",
        summary.manifest.scenario,
        summary.out_dir.display()
    );
    for (k, v) in &summary.manifest.timings {
        println!("  {k}: {v:.2}");
    }
    for (k, v) in &summary.manifest.diagnostics {
        println!("  {k}: {v:.6e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
