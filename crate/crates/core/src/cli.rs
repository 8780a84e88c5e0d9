//! Command-line front end.
//!
//! Exit status: 0 on success, 2 on usage errors (bad flags, malformed
//! instance files), 1 on runtime failures. Data goes to files or standard
//! output; diagnostics go to standard error.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::adiabatic::{runtime_bound, spectrum_trace, trotter_evolve, DEFAULT_GRID_POINTS};
use crate::detect::{
    default_level, detect_cml, detect_mmse, detect_qml_detailed, run_ber, DetectorKind,
    TrialConfig, DEFAULT_SHOTS,
};
use crate::encoding::{encode_mimo, ChannelInstance, Form};
use crate::optimize::{minimize_fp, OptimizerConfig};
use crate::qaoa::{gate_count, landscape, memory_estimate, uniform_axis};

#[derive(Debug, Parser)]
#[command(
    name = "mimo-qaoa",
    version,
    about = "Ising encoding, adiabatic spectra and simulated QAOA for BPSK MIMO ML detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the full and simplified Ising models of an instance as JSON.
    Encode(EncodeArgs),
    /// Eigenvalues of (1 - tau) H_B + tau H_f on a tau grid, as CSV.
    Spectrum(SpectrumArgs),
    /// Trotterised adiabatic evolution and its ground-state overlap.
    Trotter(TrotterArgs),
    /// Level-1 expectation landscape F1(gamma, beta), as CSV.
    Landscape(LandscapeArgs),
    /// Minimise F_p over the QAOA angles.
    Optimize(OptimizeArgs),
    /// Detect the transmitted symbols of an instance.
    Detect(DetectArgs),
    /// Monte-Carlo bit-error-rate campaign.
    Ber(BerArgs),
    /// Gate counts and memory footprint of the simulation.
    Complexity(ComplexityArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Channel instance JSON file (fields: channel, received, noise_variance, optional true_symbols).
    pub instance: PathBuf,
    /// Write the result here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub io: InstanceArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub io: InstanceArgs,
    /// Number of uniformly spaced tau points in [0, 1] (at least 2).
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    /// Also report the runtime scale xi / g^2 for this xi.
    #[arg(long)]
    pub xi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrotterArgs {
    #[command(flatten)]
    pub io: InstanceArgs,
    /// Total evolution time T.
    #[arg(long)]
    pub time: f64,
    /// Number of piecewise-constant slices p.
    #[arg(long)]
    pub slices: usize,
    /// Trotter steps r within each slice.
    #[arg(long, default_value_t = 1)]
    pub substeps: usize,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub io: InstanceArgs,
    /// Points per axis.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Upper end of the gamma axis (default pi).
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Upper end of the beta axis (default pi).
    #[arg(long)]
    pub beta_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OptimizerFlags {
    /// QAOA level p (default: 1 for up to 2 antennas, 3 otherwise).
    #[arg(long)]
    pub level: Option<usize>,
    /// Number of multistart local searches (default: 9 for p = 1, 25 otherwise).
    #[arg(long)]
    pub starts: Option<usize>,
    /// Function evaluations allowed per local search (default 200 p).
    #[arg(long)]
    pub max_evals: Option<usize>,
    /// Seed for all randomness of the command.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OptimizerFlags {
    fn level_for(&self, n: usize) -> usize {
        self.level.unwrap_or_else(|| default_level(n))
    }

    fn config(&self, level: usize) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::for_level(level);
        if let Some(s) = self.starts {
            cfg.multistarts = s;
        }
        if let Some(m) = self.max_evals {
            cfg.max_evals_per_start = m;
        }
        cfg.seed = self.seed;
        cfg
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub io: InstanceArgs,
    #[command(flatten)]
    pub opt: OptimizerFlags,
    /// Include the per-iteration best values in the output.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub io: InstanceArgs,
    /// Detector: cml, mmse or qml.
    #[arg(long)]
    pub detector: String,
    #[command(flatten)]
    pub opt: OptimizerFlags,
    /// Measurement shots for the qml detector.
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: usize,
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Antennas per side, N = M_t = M_r.
    #[arg(long)]
    pub n: usize,
    /// SNR sweep in dB as start:stop:step (both ends included when step divides) or a single value.
    #[arg(long)]
    pub snr: String,
    /// Monte-Carlo trials per SNR point.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Master seed; every trial seed is derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated detectors among cml, mmse, qml.
    #[arg(long, default_value = "cml,mmse,qml")]
    pub detectors: String,
    /// QAOA level p (default: 1 for N <= 2, 3 otherwise).
    #[arg(long)]
    pub level: Option<usize>,
    /// Multistart local searches per QAOA optimisation.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Function evaluations allowed per local search.
    #[arg(long)]
    pub max_evals: Option<usize>,
    /// Measurement shots per QAOA detection.
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: usize,
    /// BER CSV path (standard output when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Metadata JSON path (default: the CSV path with a .json extension).
    #[arg(long)]
    pub metadata: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    /// Number of qubits N.
    #[arg(long)]
    pub n: usize,
    /// QAOA level p.
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Encode(a) => encode(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Trotter(a) => trotter(a),
        Command::Landscape(a) => landscape_cmd(a),
        Command::Optimize(a) => optimize(a),
        Command::Detect(a) => detect(a),
        Command::Ber(a) => ber(a),
        Command::Complexity(a) => complexity(a),
    }
}

fn load_instance(path: &Path) -> CliResult<ChannelInstance> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read instance {}: {e}", path.display())))?;
    ChannelInstance::from_json(&text)
        .map_err(|e| CliError::Usage(format!("malformed instance {}: {e}", path.display())))
}

fn emit(output: Option<&Path>, data: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, data)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(data.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}"))),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serialises");
    s.push('\n');
    s
}

fn encode(a: EncodeArgs) -> CliResult<()> {
    let inst = load_instance(&a.io.instance)?;
    let value = json!({
        "num_spins": inst.num_tx(),
        "full": encode_mimo(&inst, Form::Full),
        "simplified": encode_mimo(&inst, Form::Simplified),
    });
    emit(a.io.output.as_deref(), &pretty(&value))
}

fn spectrum(a: SpectrumArgs) -> CliResult<()> {
    let inst = load_instance(&a.io.instance)?;
    if a.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let trace = spectrum_trace(&encode_mimo(&inst, Form::Full), a.grid)?;
    let mut summary = format!("min_gap={:.12} gap_location={:.12}", trace.min_gap, trace.gap_location);
    if let Some(xi) = a.xi {
        summary.push_str(&format!(" runtime_bound={:.12}", runtime_bound(&trace, xi)?));
    }
    emit(a.io.output.as_deref(), &trace.to_csv())?;
    if a.io.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn trotter(a: TrotterArgs) -> CliResult<()> {
    let inst = load_instance(&a.io.instance)?;
    let r = trotter_evolve(&encode_mimo(&inst, Form::Full), a.time, a.slices, a.substeps)?;
    let value = json!({
        "total_time": r.total_time,
        "slices": r.slices,
        "trotter_substeps": r.trotter_substeps,
        "ground_index": r.ground_index,
        "ground_overlap": r.ground_overlap,
        "final_probabilities": r.final_state.probabilities(),
    });
    emit(a.io.output.as_deref(), &pretty(&value))
}

fn landscape_cmd(a: LandscapeArgs) -> CliResult<()> {
    let inst = load_instance(&a.io.instance)?;
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let gammas = uniform_axis(a.grid, 0.0, a.gamma_max.unwrap_or(PI));
    let betas = uniform_axis(a.grid, 0.0, a.beta_max.unwrap_or(PI));
    let grid = landscape(&encode_mimo(&inst, Form::Simplified), &gammas, &betas)?;
    emit(a.io.output.as_deref(), &grid.to_csv())
}

fn optimize(a: OptimizeArgs) -> CliResult<()> {
    let inst = load_instance(&a.io.instance)?;
    let level = a.opt.level_for(inst.num_tx());
    let mut cfg = a.opt.config(level);
    cfg.record_trace = a.trace;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let result = minimize_fp(&encode_mimo(&inst, Form::Simplified), level, &cfg)?;
    let value = json!({ "level": level, "config": cfg, "result": result });
    emit(a.io.output.as_deref(), &pretty(&value))
}

fn detect(a: DetectArgs) -> CliResult<()> {
    let kind: DetectorKind = a.detector.parse().map_err(|e: crate::Error| CliError::Usage(e.to_string()))?;
    let inst = load_instance(&a.io.instance)?;
    let value = match kind {
        DetectorKind::Cml => json!({ "detector": kind, "symbols": detect_cml(&inst)? }),
        DetectorKind::Mmse => json!({ "detector": kind, "symbols": detect_mmse(&inst)? }),
        DetectorKind::Qml => {
            let level = a.opt.level_for(inst.num_tx());
            let cfg = a.opt.config(level);
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let out = detect_qml_detailed(&inst, level, &cfg, a.shots, a.opt.seed)?;
            json!({
                "detector": kind,
                "symbols": out.symbols,
                "level": level,
                "best_value": out.optimization.best_value,
                "best_params": out.optimization.best_params,
                "shots": a.shots,
                "distinct_samples": out.samples.len(),
            })
        }
    };
    emit(a.io.output.as_deref(), &pretty(&value))
}

/// Parses `start:stop:step` (inclusive) or a single value.
pub fn parse_snr_sweep(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("invalid number {s:?} in --snr"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 {
                return Err("--snr step must be positive".into());
            }
            if stop < start {
                return Err("--snr stop must not be below start".into());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| start + step * i as f64).collect())
        }
        _ => Err(format!("--snr must be start:stop:step or a single value, got {spec:?}")),
    }
}

fn ber(a: BerArgs) -> CliResult<()> {
    let snrs = parse_snr_sweep(&a.snr).map_err(CliError::Usage)?;
    let detectors = a
        .detectors
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<DetectorKind>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut cfg = TrialConfig::new(a.n, snrs, a.trials, a.seed);
    if let Some(level) = a.level {
        cfg.qaoa_level = level;
        cfg.optimizer = OptimizerConfig::for_level(level);
    }
    if let Some(s) = a.starts {
        cfg.optimizer.multistarts = s;
    }
    if let Some(m) = a.max_evals {
        cfg.optimizer.max_evals_per_start = m;
    }
    cfg.optimizer.seed = a.seed;
    cfg.shots = a.shots;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if detectors.is_empty() {
        return Err(CliError::Usage("--detectors must name at least one detector".into()));
    }

    let report = run_ber(&cfg, &detectors)?;
    emit(a.output.as_deref(), &report.to_csv())?;
    let meta_path = a
        .metadata
        .clone()
        .or_else(|| a.output.as_ref().map(|p| p.with_extension("json")));
    let mut meta = report.metadata_json();
    meta.push('\n');
    match meta_path {
        Some(p) => emit(Some(&p), &meta),
        None => {
            eprint!("{meta}");
            Ok(())
        }
    }
}

fn complexity(a: ComplexityArgs) -> CliResult<()> {
    let gates = gate_count(a.n, a.level).map_err(|e| CliError::Usage(e.to_string()))?;
    let memory = memory_estimate(a.n).map_err(|e| CliError::Usage(e.to_string()))?;
    let value = json!({
        "qubits": a.n,
        "level": a.level,
        "gates_per_level": gates.per_level,
        "hadamards": gates.hadamards,
        "total_gates": gates.total,
        "state_bytes": memory.state_bytes as u64,
        "dense_unitary_bytes": memory.dense_unitary_bytes.to_string(),
    });
    emit(a.output.as_deref(), &pretty(&value))
}
