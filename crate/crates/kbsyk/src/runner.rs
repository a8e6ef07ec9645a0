//! Scenario orchestration: configuration parsing with strict key checking,
//! deterministic artifact output, and run manifests that reproduce a run
//! byte-for-byte on the same build.
//!
//! Configuration is a flat TOML table (documented in the README); every key
//! can be overridden with `key=value` pairs from the command line. The
//! resolved configuration is embedded in `manifest.json`, which `rerun`
//! accepts as an input.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{lay_initial_condition, solve_equilibrium, EquilibriumParams};
use crate::error::KbError;
use crate::grid::{ContourGreen, TimeLattice};
use crate::lindblad::{
    evolve_lindblad_detailed, unmap_to_contour, ContourSign, DissipatorConvention, LindbladConfig,
};
use crate::observables::{
    auto_deadband, beta_trace, detect_crossings, threshold_scan_detailed, BetaTrace,
    CrossingReport, FitConfig,
};
use crate::quench::{evolve_from_initial, BathSpec, QuenchConfig};
use crate::snapshot::{fmt_f64, write_snapshot};
use crate::Result;

pub const FORMAT_VERSION: &str = "KBSYK1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Equilibrium,
    Quench,
    Lindblad,
    ThresholdScan,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Equilibrium => "equilibrium",
            Scenario::Quench => "quench",
            Scenario::Lindblad => "lindblad",
            Scenario::ThresholdScan => "threshold_scan",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "equilibrium" => Ok(Scenario::Equilibrium),
            "quench" => Ok(Scenario::Quench),
            "lindblad" => Ok(Scenario::Lindblad),
            "threshold_scan" | "threshold-scan" => Ok(Scenario::ThresholdScan),
            other => Err(KbError::Config(vec![format!("unknown scenario '{other}'")])),
        }
    }
}

/// One bath in the `beta=..,v=..,n=..` notation used by flags and config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParam {
    pub beta: f64,
    pub v: f64,
    pub n: u32,
}

impl BathParam {
    pub fn parse(s: &str) -> Result<Self> {
        let mut beta = None;
        let mut v = None;
        let mut n = None;
        for part in s.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| KbError::Config(vec![format!("bad bath component '{part}'")]))?;
            let value = value.trim();
            let bad = || KbError::Config(vec![format!("'{value}' is not a number")]);
            match key.trim() {
                "beta" => beta = Some(value.parse::<f64>().map_err(|_| bad())?),
                "v" => v = Some(value.parse::<f64>().map_err(|_| bad())?),
                "n" => n = Some(value.parse::<u32>().map_err(|_| bad())?),
                other => {
                    return Err(KbError::Config(vec![format!("unknown bath key '{other}'")]))
                }
            }
        }
        match (beta, v, n) {
            (Some(beta), Some(v), Some(n)) => Ok(BathParam { beta, v, n }),
            _ => Err(KbError::Config(vec![format!(
                "bath spec '{s}' needs beta=, v= and n="
            )])),
        }
    }

    pub fn to_spec_string(self) -> String {
        format!("beta={},v={},n={}", self.beta, self.v, self.n)
    }
}

/// Fully resolved run configuration; every field is written to the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub j: f64,
    pub q: u32,
    pub beta_init: f64,
    pub lambda_t: f64,
    pub dt: f64,
    pub bath: Vec<BathParam>,
    pub mu: f64,
    /// "real" or "imaginary" dissipator bookkeeping for lindblad runs.
    pub convention: String,
    pub fp_tol: f64,
    pub max_sweeps: usize,
    pub eta: f64,
    pub mixing: f64,
    pub eq_tol: f64,
    pub eq_max_iters: usize,
    pub n_omega: usize,
    /// 0 means "16 J".
    pub omega_max: f64,
    pub trace_stride: usize,
    /// Second initial temperature of a threshold scan.
    pub scan_beta_b: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub bisect_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Equilibrium,
            j: 0.5,
            q: 4,
            beta_init: f64::NAN,
            lambda_t: 25.0,
            dt: 0.1,
            bath: Vec::new(),
            mu: 0.0,
            convention: "real".into(),
            fp_tol: 1e-8,
            max_sweeps: 4000,
            eta: 0.5,
            mixing: 0.3,
            eq_tol: 1e-10,
            eq_max_iters: 4000,
            n_omega: 4096,
            omega_max: 0.0,
            trace_stride: 5,
            scan_beta_b: f64::NAN,
            v_min: f64::NAN,
            v_max: f64::NAN,
            bisect_tol: 0.025,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "j",
    "q",
    "beta_init",
    "lambda_t",
    "dt",
    "bath",
    "mu",
    "convention",
    "fp_tol",
    "max_sweeps",
    "eta",
    "mixing",
    "eq_tol",
    "eq_max_iters",
    "n_omega",
    "omega_max",
    "trace_stride",
    "scan_beta_b",
    "v_min",
    "v_max",
    "bisect_tol",
];

impl RunConfig {
    /// Parse a flat TOML table; unknown keys are collected into one error.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| KbError::Config(vec![format!("TOML parse error: {e}")]))?;
        let mut cfg = RunConfig::default();
        let mut errs = Vec::new();
        let mut saw_scenario = false;
        for (key, value) in table.iter() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                errs.push(format!("unknown key '{key}'"));
                continue;
            }
            if key == "scenario" {
                saw_scenario = true;
            }
            if let Err(KbError::Config(mut e)) = cfg.set(key, &toml_to_string(value)) {
                errs.append(&mut e);
            }
        }
        if !saw_scenario {
            errs.push(
                "missing required key 'scenario' (equilibrium | quench | lindblad | threshold_scan)"
                    .into(),
            );
        }
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(KbError::Config(errs))
        }
    }

    /// Apply a `key=value` override (`bath` appends; `bath=` clears).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let fe = |e: std::num::ParseFloatError| KbError::Config(vec![format!(
            "key '{key}': {e}"
        )]);
        let ie = |e: std::num::ParseIntError| KbError::Config(vec![format!("key '{key}': {e}")]);
        match key {
            "scenario" => self.scenario = Scenario::parse(value)?,
            "j" => self.j = value.parse().map_err(fe)?,
            "q" => self.q = value.parse().map_err(ie)?,
            "beta_init" => self.beta_init = value.parse().map_err(fe)?,
            "lambda_t" => self.lambda_t = value.parse().map_err(fe)?,
            "dt" => self.dt = value.parse().map_err(fe)?,
            "bath" => {
                if value.is_empty() {
                    self.bath.clear();
                } else {
                    // accept either one spec or a ;-separated list
                    for spec in value.split(';').filter(|s| !s.is_empty()) {
                        self.bath.push(BathParam::parse(spec)?);
                    }
                }
            }
            "mu" => self.mu = value.parse().map_err(fe)?,
            "convention" => self.convention = value.to_string(),
            "fp_tol" => self.fp_tol = value.parse().map_err(fe)?,
            "max_sweeps" => self.max_sweeps = value.parse().map_err(ie)?,
            "eta" => self.eta = value.parse().map_err(fe)?,
            "mixing" => self.mixing = value.parse().map_err(fe)?,
            "eq_tol" => self.eq_tol = value.parse().map_err(fe)?,
            "eq_max_iters" => self.eq_max_iters = value.parse().map_err(ie)?,
            "n_omega" => self.n_omega = value.parse().map_err(ie)?,
            "omega_max" => self.omega_max = value.parse().map_err(fe)?,
            "trace_stride" => self.trace_stride = value.parse().map_err(ie)?,
            "scan_beta_b" => self.scan_beta_b = value.parse().map_err(fe)?,
            "v_min" => self.v_min = value.parse().map_err(fe)?,
            "v_max" => self.v_max = value.parse().map_err(fe)?,
            "bisect_tol" => self.bisect_tol = value.parse().map_err(fe)?,
            other => {
                return Err(KbError::Config(vec![format!("unknown key '{other}'")]));
            }
        }
        Ok(())
    }

    /// Post-merge validation; lists every missing or inconsistent key.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.beta_init.is_nan() {
            errs.push("missing required key 'beta_init'".into());
        }
        match self.scenario {
            Scenario::Quench => {
                if self.bath.len() > 2 {
                    errs.push(format!("at most two baths, got {}", self.bath.len()));
                }
            }
            Scenario::Lindblad => {
                if self.mu < 0.0 {
                    errs.push("mu must be >= 0".into());
                }
                if self.convention != "real" && self.convention != "imaginary" {
                    errs.push(format!(
                        "convention must be 'real' or 'imaginary', got '{}'",
                        self.convention
                    ));
                }
            }
            Scenario::ThresholdScan => {
                if self.bath.is_empty() || self.bath.len() > 2 {
                    errs.push("threshold_scan needs one or two 'bath' entries".into());
                }
                if self.scan_beta_b.is_nan() {
                    errs.push("missing required key 'scan_beta_b'".into());
                }
                if self.v_min.is_nan() || self.v_max.is_nan() {
                    errs.push("missing required keys 'v_min'/'v_max'".into());
                }
            }
            Scenario::Equilibrium => {}
        }
        if self.dt <= 0.0 || self.lambda_t <= 0.0 {
            errs.push("dt and lambda_t must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(KbError::Config(errs))
        }
    }

    pub fn resolved_omega_max(&self) -> f64 {
        if self.omega_max > 0.0 {
            self.omega_max
        } else if self.j > 0.0 {
            16.0 * self.j
        } else {
            8.0
        }
    }

    fn equilibrium_params(&self, beta: f64) -> EquilibriumParams {
        EquilibriumParams {
            beta,
            coupling_j: self.j,
            q_body: self.q,
            omega_max: self.resolved_omega_max(),
            n_omega: self.n_omega,
            mixing: self.mixing,
            tol: self.eq_tol,
            max_iters: self.eq_max_iters,
            dt_sample: self.dt,
            t_span: 2.0 * self.lambda_t + 1.0,
        }
    }

    fn lattice(&self) -> Result<TimeLattice> {
        TimeLattice::new(self.dt, self.lambda_t)
    }
}

fn toml_to_string(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Array(items) => items
            .iter()
            .map(toml_to_string)
            .collect::<Vec<_>>()
            .join(";"),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Versions {
    pub solver: String,
    pub format: String,
}

/// Everything needed to reproduce a run, plus wall-clock accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config: RunConfig,
    pub seedless: bool,
    pub versions: Versions,
    pub timings: BTreeMap<String, f64>,
    /// Convergence metadata of the iterative solves.
    pub diagnostics: BTreeMap<String, f64>,
}

impl RunManifest {
    fn new(config: &RunConfig) -> Self {
        RunManifest {
            scenario: config.scenario.as_str().to_string(),
            config: config.clone(),
            seedless: true,
            versions: Versions {
                solver: env!("CARGO_PKG_VERSION").to_string(),
                format: FORMAT_VERSION.to_string(),
            },
            timings: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| KbError::Format(format!("manifest: {e}")))
    }
}

pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

/// Execute a resolved configuration, writing every artifact under `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let total = Instant::now();
    let mut manifest = RunManifest::new(config);
    match config.scenario {
        Scenario::Equilibrium => run_equilibrium(config, out_dir, &mut manifest)?,
        Scenario::Quench => run_quench(config, out_dir, &mut manifest)?,
        Scenario::Lindblad => run_lindblad(config, out_dir, &mut manifest)?,
        Scenario::ThresholdScan => run_threshold_scan(config, out_dir, &mut manifest)?,
    }
    manifest
        .timings
        .insert("total_s".into(), total.elapsed().as_secs_f64());
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| KbError::Format(e.to_string()))?;
    fs::write(out_dir.join("manifest.json"), text)?;
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        manifest,
    })
}

fn run_equilibrium(config: &RunConfig, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let t0 = Instant::now();
    let params = config.equilibrium_params(config.beta_init);
    let state = solve_equilibrium(&params)?;
    manifest
        .timings
        .insert("equilibrium_s".into(), t0.elapsed().as_secs_f64());
    manifest
        .diagnostics
        .insert("eq_iterations".into(), state.iterations as f64);
    manifest
        .diagnostics
        .insert("eq_residual".into(), state.final_residual);
    manifest
        .diagnostics
        .insert("sum_rule".into(), state.sum_rule());
    manifest
        .diagnostics
        .insert("kms_residual".into(), state.kms_residual());

    let mut w = fs::File::create(out.join("equilibrium.csv"))?;
    writeln!(w, "omega,re_g_r,im_g_r,a")?;
    for (k, &omega) in state.omega.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(omega),
            fmt_f64(state.g_retarded_omega[k].re),
            fmt_f64(state.g_retarded_omega[k].im),
            fmt_f64(state.spectral[k])
        )?;
    }
    let lattice = config.lattice()?;
    let green = lay_initial_condition(&state, &lattice)?;
    write_snapshot(&out.join("greater.snap"), &green)?;
    Ok(())
}

fn write_trace_csv(path: &Path, trace: &BetaTrace) -> Result<()> {
    let mut w = fs::File::create(path)?;
    writeln!(w, "t,beta_fdt,beta_corner,energy,fit_quality,reliable")?;
    for i in 0..trace.len() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(trace.times[i]),
            fmt_f64(trace.beta_fdt[i]),
            fmt_f64(trace.beta_corner[i]),
            fmt_f64(trace.energy[i]),
            fmt_f64(trace.fit_quality[i]),
            u8::from(trace.reliable[i])
        )?;
    }
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<BetaTrace> {
    let text = fs::read_to_string(path)?;
    let mut trace = BetaTrace {
        times: Vec::new(),
        beta_fdt: Vec::new(),
        beta_corner: Vec::new(),
        energy: Vec::new(),
        fit_quality: Vec::new(),
        reliable: Vec::new(),
    };
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(KbError::Format(format!(
                "trace line {} has {} columns",
                ln + 1,
                cols.len()
            )));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|e| KbError::Format(e.to_string()));
        trace.times.push(f(cols[0])?);
        trace.beta_fdt.push(f(cols[1])?);
        trace.beta_corner.push(f(cols[2])?);
        trace.energy.push(f(cols[3])?);
        trace.fit_quality.push(f(cols[4])?);
        trace.reliable.push(cols[5].trim() == "1");
    }
    Ok(trace)
}

fn run_quench(config: &RunConfig, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let lattice = config.lattice()?;
    let t0 = Instant::now();
    let sys_eq = solve_equilibrium(&config.equilibrium_params(config.beta_init))?;
    let mut baths = Vec::new();
    for bp in &config.bath {
        let eq = solve_equilibrium(&config.equilibrium_params(bp.beta))?;
        baths.push(BathSpec::from_equilibrium(&eq, bp.v, bp.n, &lattice)?);
    }
    manifest
        .timings
        .insert("equilibrium_s".into(), t0.elapsed().as_secs_f64());

    let mut qcfg = QuenchConfig::new(config.equilibrium_params(config.beta_init), baths, lattice.clone());
    qcfg.fp_tol = config.fp_tol;
    qcfg.fp_max_sweeps = config.max_sweeps;
    qcfg.eta = config.eta;

    let t0 = Instant::now();
    let g0 = lay_initial_condition(&sys_eq, &lattice)?;
    let run = evolve_from_initial(&qcfg, g0)?;
    manifest
        .timings
        .insert("evolve_s".into(), t0.elapsed().as_secs_f64());
    manifest
        .diagnostics
        .insert("sweeps".into(), run.sweeps as f64);
    manifest
        .diagnostics
        .insert("final_update".into(), run.final_update);
    manifest
        .diagnostics
        .insert("eta_used".into(), run.eta_used);
    manifest
        .diagnostics
        .insert("diagonal_drift".into(), run.diagonal_drift);

    let t0 = Instant::now();
    let trace = beta_trace(&run.green, config.j, config.trace_stride, &FitConfig::default());
    manifest
        .timings
        .insert("observables_s".into(), t0.elapsed().as_secs_f64());
    write_trace_csv(&out.join("trace.csv"), &trace)?;
    write_snapshot(&out.join("greater.snap"), &run.green)?;
    Ok(())
}

fn run_lindblad(config: &RunConfig, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let lattice = config.lattice()?;
    let mut lcfg = LindbladConfig::new(
        config.equilibrium_params(config.beta_init),
        config.mu,
        lattice.clone(),
    );
    lcfg.fp_tol = config.fp_tol;
    lcfg.fp_max_sweeps = config.max_sweeps;
    lcfg.eta = config.eta;
    lcfg.convention = match config.convention.as_str() {
        "imaginary" => DissipatorConvention::ImaginaryKernel,
        _ => DissipatorConvention::RealKernel,
    };

    let t0 = Instant::now();
    let run = evolve_lindblad_detailed(&lcfg)?;
    manifest
        .timings
        .insert("evolve_s".into(), t0.elapsed().as_secs_f64());
    manifest
        .diagnostics
        .insert("sweeps".into(), run.sweeps as f64);
    manifest
        .diagnostics
        .insert("final_update".into(), run.final_update);
    manifest
        .diagnostics
        .insert("eta_used".into(), run.eta_used);

    let t0 = Instant::now();
    let unmapped = unmap_to_contour(&run.green)?;
    let trace = beta_trace(&unmapped, config.j, config.trace_stride, &FitConfig::default());
    manifest
        .timings
        .insert("observables_s".into(), t0.elapsed().as_secs_f64());
    write_trace_csv(&out.join("trace.csv"), &trace)?;
    for (alpha, beta, name) in [
        (ContourSign::Plus, ContourSign::Plus, "component_pp.snap"),
        (ContourSign::Plus, ContourSign::Minus, "component_pm.snap"),
        (ContourSign::Minus, ContourSign::Plus, "component_mp.snap"),
        (ContourSign::Minus, ContourSign::Minus, "component_mm.snap"),
    ] {
        let grid = run.green.component(alpha, beta).clone();
        let green = ContourGreen::new(lattice.clone(), grid)?;
        write_snapshot(&out.join(name), &green)?;
    }
    Ok(())
}

fn run_threshold_scan(config: &RunConfig, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let lattice = config.lattice()?;
    let t0 = Instant::now();
    let mut baths = Vec::new();
    for bp in &config.bath {
        let eq = solve_equilibrium(&config.equilibrium_params(bp.beta))?;
        baths.push(BathSpec::from_equilibrium(&eq, bp.v, bp.n, &lattice)?);
    }
    let mut qcfg = QuenchConfig::new(config.equilibrium_params(config.beta_init), baths, lattice);
    qcfg.fp_tol = config.fp_tol;
    qcfg.fp_max_sweeps = config.max_sweeps;
    qcfg.eta = config.eta;

    let outcome = threshold_scan_detailed(
        &qcfg,
        (config.beta_init, config.scan_beta_b),
        (config.v_min, config.v_max),
        config.bisect_tol,
        config.trace_stride,
    )?;
    manifest
        .timings
        .insert("scan_s".into(), t0.elapsed().as_secs_f64());
    manifest
        .diagnostics
        .insert("v_threshold".into(), outcome.v_threshold);
    let text =
        serde_json::to_string_pretty(&outcome).map_err(|e| KbError::Format(e.to_string()))?;
    fs::write(out.join("scan.json"), text)?;
    Ok(())
}

/// Pairwise crossing comparison of finished runs. Lattice and scenario
/// parameters must agree except for the initial temperature.
pub fn mpc_compare(
    dirs: &[PathBuf],
    window: Option<(f64, f64)>,
    deadband: Option<f64>,
) -> Result<Vec<(String, String, CrossingReport)>> {
    if dirs.len() < 2 {
        return Err(KbError::Domain("mpc-compare needs at least two run directories".into()));
    }
    let mut loaded = Vec::new();
    for dir in dirs {
        let manifest = RunManifest::load(&dir.join("manifest.json"))?;
        let trace = read_trace_csv(&dir.join("trace.csv"))?;
        loaded.push((dir.clone(), manifest, trace));
    }
    let reference = &loaded[0].1.config;
    for (dir, manifest, _) in &loaded[1..] {
        let c = &manifest.config;
        let compatible = (c.lambda_t - reference.lambda_t).abs() < 1e-12
            && (c.dt - reference.dt).abs() < 1e-12
            && c.scenario == reference.scenario
            && (c.j - reference.j).abs() < 1e-12
            && c.bath == reference.bath
            && (c.mu - reference.mu).abs() < 1e-12;
        if !compatible {
            return Err(KbError::Domain(format!(
                "{} differs from {} in more than the initial temperature",
                dir.display(),
                loaded[0].0.display()
            )));
        }
    }
    let lambda = reference.lambda_t;
    let window = window.unwrap_or((0.0, lambda - lambda / 5.0));
    let mut results = Vec::new();
    for a in 0..loaded.len() {
        for b in a + 1..loaded.len() {
            let (dir_a, _, tr_a) = &loaded[a];
            let (dir_b, _, tr_b) = &loaded[b];
            let db = deadband.unwrap_or_else(|| auto_deadband(tr_a, tr_b, window));
            let report = detect_crossings(tr_a, tr_b, window, db)?;
            results.push((
                dir_a.display().to_string(),
                dir_b.display().to_string(),
                report,
            ));
        }
    }
    Ok(results)
}

/// Re-execute a manifest; artifacts land in `out_dir`.
pub fn rerun(manifest_path: &Path, out_dir: &Path) -> Result<RunSummary> {
    let manifest = RunManifest::load(manifest_path)?;
    run(&manifest.config, out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_unknown_keys() {
        let text = r#"
scenario = "quench"
beta_init = 2.4
j = 0.5
bath = ["beta=0.5,v=0.525,n=3"]
lambda_t = 5.0
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.scenario, Scenario::Quench);
        assert_eq!(cfg.bath.len(), 1);
        assert_eq!(cfg.bath[0].n, 3);
        assert!((cfg.lambda_t - 5.0).abs() < 1e-12);
        cfg.validate().unwrap();

        let bad = RunConfig::from_toml_str("scenario = \"quench\"\nbananas = 3\nbeta_x = 1");
        match bad {
            Err(KbError::Config(errs)) => {
                assert!(errs.iter().any(|e| e.contains("bananas")));
                assert!(errs.iter().any(|e| e.contains("beta_x")));
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_enumerates_required_keys() {
        let err = RunConfig::from_toml_str("").unwrap_err();
        match err {
            KbError::Config(errs) => {
                assert!(errs.iter().any(|e| e.contains("scenario")));
            }
            other => panic!("unexpected {other:?}"),
        }
        // scenario alone still misses beta_init at validation time
        let cfg = RunConfig::from_toml_str("scenario = \"quench\"").unwrap();
        let err = cfg.validate().unwrap_err();
        match err {
            KbError::Config(errs) => {
                assert!(errs.iter().any(|e| e.contains("beta_init")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bath_spec_parsing() {
        let b = BathParam::parse("beta=0.5,v=0.525,n=3").unwrap();
        assert_eq!(b.n, 3);
        assert!((b.v - 0.525).abs() < 1e-12);
        assert!(BathParam::parse("beta=0.5").is_err());
        assert!(BathParam::parse("beta=0.5,v=1,n=3,zap=1").is_err());
    }
}
