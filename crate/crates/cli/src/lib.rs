//! Command-line front end for `tensim`.
//!
//! Exit codes: 0 on success, 1 for unreadable or unparsable input and I/O
//! failures, 2 for invalid flags or configurations (including noise requested
//! with the wave-function representation).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tensim::bench::{self, FidelityPoint, TimingPoint};
use tensim::config::NoiseConfig;
use tensim::engines::{self, EngineKind, Representation, RunConfig, RunResult};
use tensim::{derive_seed, Circuit, MeasurementRecord, NoiseKind, State};

pub const DEFAULT_BENCH_QUBITS: usize = 10;
pub const DEFAULT_BENCH_DEPTHS: [usize; 6] = [5, 10, 15, 20, 25, 30];
pub const DEFAULT_BENCH_REPS: usize = 3;
pub const DEFAULT_SWEEP_QUBITS: usize = 5;
pub const DEFAULT_SWEEP_DEPTH: usize = 15;
pub const DEFAULT_EPSILONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: tensim::ParseError },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Input(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

impl From<tensim::Error> for CliError {
    fn from(e: tensim::Error) -> Self {
        use tensim::Error as E;
        match e {
            E::InvalidConfig(_)
            | E::NoiseRequiresDensity
            | E::Unsupported(_)
            | E::InvalidNoise(_)
            | E::NoiseArity { .. } => CliError::Config(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tensim", version, about = "Tensor-contraction quantum circuit simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an OpenQASM 2.0 (or circuit JSON) file and report the result.
    Run(RunArgs),
    /// Write a random benchmark circuit as OpenQASM.
    Random(RandomArgs),
    /// Time engines on random circuits of increasing depth (CSV).
    Bench(BenchArgs),
    /// Fidelity of noisy against noiseless output as noise strength grows (CSV).
    NoiseSweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Circuit file; `.json` is read as circuit JSON, anything else as OpenQASM.
    pub path: PathBuf,
    #[arg(long, default_value = "simple")]
    pub engine: String,
    #[arg(long, default_value = "wave")]
    pub repr: String,
    /// JSON noise sidecar (global channel plus per-instruction overrides).
    #[arg(long)]
    pub noise_config: Option<PathBuf>,
    /// Repeat the run this many times and report classical outcome counts.
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Depth engine only: stop after this many layers.
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    #[arg(long)]
    pub qubits: usize,
    #[arg(long)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Engine to time; all engines when omitted.
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BENCH_QUBITS)]
    pub qubits: usize,
    /// Comma-separated depths.
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_BENCH_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Noise kind; all named kinds when omitted.
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SWEEP_QUBITS)]
    pub qubits: usize,
    #[arg(long, default_value_t = DEFAULT_SWEEP_DEPTH)]
    pub depth: usize,
    /// Comma-separated noise strengths in [0, 1].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and executes the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> CliResult<()> {
    let text = match command {
        Command::Run(a) => cmd_run(a)?,
        Command::Random(a) => cmd_random(a)?,
        Command::Bench(a) => cmd_bench(a)?,
        Command::NoiseSweep(a) => cmd_noise_sweep(a)?,
    };
    let out = match command {
        Command::Run(a) => a.out.as_deref(),
        Command::Random(a) => a.out.as_deref(),
        Command::Bench(a) => a.out.as_deref(),
        Command::NoiseSweep(a) => a.out.as_deref(),
    };
    emit(out, &text, stdout)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write output: {e}"))),
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Reads a circuit from OpenQASM, or from circuit JSON when the extension is `.json`.
pub fn load_circuit(path: &Path) -> CliResult<Circuit> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        Circuit::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    } else {
        tensim::parse_qasm(&text)
            .map_err(|source| CliError::Parse { path: path.display().to_string(), source })
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum StateReport {
    Wave { amplitudes: Vec<[f64; 2]> },
    Density { matrix: Vec<Vec<[f64; 2]>> },
}

impl From<&State> for StateReport {
    fn from(state: &State) -> Self {
        match state {
            State::Pure(p) => StateReport::Wave {
                amplitudes: p.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            },
            State::Density(d) => {
                let m = d.matrix();
                StateReport::Density {
                    matrix: (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                        .collect(),
                }
            }
        }
    }
}

#[derive(Serialize)]
struct RegisterValue {
    name: String,
    bits: Vec<u8>,
}

#[derive(Serialize)]
struct RunReport {
    engine: &'static str,
    representation: &'static str,
    seed: u64,
    num_qubits: usize,
    state: StateReport,
    classical_bits: Vec<u8>,
    classical_registers: Vec<RegisterValue>,
    measurements: Vec<MeasurementRecord>,
    layers_executed: usize,
    gates_applied: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_bond: Option<usize>,
}

#[derive(Serialize)]
struct ShotsReport {
    engine: &'static str,
    representation: &'static str,
    seed: u64,
    shots: usize,
    /// Classical register contents, classical bit 0 rightmost.
    counts: BTreeMap<String, usize>,
}

/// Classical bits as a string with bit 0 rightmost.
pub fn bit_string(bits: &[u8]) -> String {
    bits.iter().rev().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

fn run_config(a: &RunArgs, seed: u64) -> CliResult<RunConfig> {
    let engine: EngineKind = a.engine.parse().map_err(config_err)?;
    let representation: Representation = a.repr.parse().map_err(config_err)?;
    let mut config = RunConfig::new(engine, representation).with_seed(seed);
    config.max_depth = a.max_depth;
    Ok(config)
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn cmd_run(a: &RunArgs) -> CliResult<String> {
    let mut circuit = load_circuit(&a.path)?;
    if let Some(path) = &a.noise_config {
        let noise = NoiseConfig::load(path).map_err(|e| match e {
            tensim::Error::Io(_) => CliError::Input(format!("{}: {e}", path.display())),
            _ => CliError::Config(format!("{}: {e}", path.display())),
        })?;
        circuit = noise.apply(&circuit).map_err(config_err)?;
    }
    let config = run_config(a, a.seed)?;
    match a.shots {
        None => {
            let result = engines::run(&circuit, &config)?;
            json(&run_report(&circuit, &config, &result))
        }
        Some(0) => Err(CliError::Config("--shots must be at least 1".into())),
        Some(shots) => {
            if !circuit.instructions().iter().any(|i| i.is_measure()) {
                return Err(CliError::Config("--shots needs a circuit with measurements".into()));
            }
            let mut counts = BTreeMap::new();
            for shot in 0..shots {
                let cfg = run_config(a, derive_seed(a.seed, shot as u64))?;
                let result = engines::run(&circuit, &cfg)?;
                *counts.entry(bit_string(&result.classical_bits)).or_insert(0) += 1;
            }
            json(&ShotsReport {
                engine: config.engine.name(),
                representation: config.representation.name(),
                seed: a.seed,
                shots,
                counts,
            })
        }
    }
}

fn run_report(circuit: &Circuit, config: &RunConfig, result: &RunResult) -> RunReport {
    RunReport {
        engine: config.engine.name(),
        representation: config.representation.name(),
        seed: config.seed,
        num_qubits: circuit.num_qubits(),
        state: StateReport::from(&result.final_state),
        classical_bits: result.classical_bits.clone(),
        classical_registers: circuit
            .cregs()
            .iter()
            .map(|r| RegisterValue {
                name: r.name.clone(),
                bits: result.classical_bits[r.offset..r.offset + r.size].to_vec(),
            })
            .collect(),
        measurements: result.measurements.clone(),
        layers_executed: result.layers_executed,
        gates_applied: result.gates_applied,
        max_bond: result.max_bond,
    }
}

pub fn cmd_random(a: &RandomArgs) -> CliResult<String> {
    let circuit = tensim::random_circuit(a.qubits, a.depth, a.seed).map_err(config_err)?;
    Ok(tensim::emit_qasm(&circuit))
}

fn engines_for(name: Option<&str>) -> CliResult<Vec<EngineKind>> {
    match name {
        None => Ok(EngineKind::ALL.to_vec()),
        Some(n) => Ok(vec![n.parse().map_err(config_err)?]),
    }
}

pub fn bench_points(a: &BenchArgs) -> CliResult<Vec<TimingPoint>> {
    let depths = a.depths.clone().unwrap_or_else(|| DEFAULT_BENCH_DEPTHS.to_vec());
    let mut points = Vec::new();
    for engine in engines_for(a.engine.as_deref())? {
        points.extend(bench::bench_depth_sweep(a.qubits, &depths, engine, a.reps, a.seed).map_err(config_err)?);
    }
    Ok(points)
}

pub fn cmd_bench(a: &BenchArgs) -> CliResult<String> {
    let points = bench_points(a)?;
    let mut buf = Vec::new();
    bench::write_timing_csv(&mut buf, &points)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

pub fn sweep_points(a: &SweepArgs) -> CliResult<Vec<FidelityPoint>> {
    let kinds = match &a.noise {
        None => NoiseKind::NAMED.to_vec(),
        Some(n) => {
            let kind: NoiseKind = n.parse().map_err(config_err)?;
            if kind == NoiseKind::Custom {
                return Err(CliError::Config("noise-sweep needs a named noise kind".into()));
            }
            vec![kind]
        }
    };
    let epsilons = a.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
    let mut points = Vec::new();
    for kind in kinds {
        points.extend(
            bench::fidelity_sweep(a.qubits, a.depth, kind, &epsilons, a.seed).map_err(config_err)?,
        );
    }
    Ok(points)
}

pub fn cmd_noise_sweep(a: &SweepArgs) -> CliResult<String> {
    let points = sweep_points(a)?;
    let mut buf = Vec::new();
    bench::write_fidelity_csv(&mut buf, &points)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invoke(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("tensim").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bit_strings_put_bit_zero_last() {
        assert_eq!(bit_string(&[1, 0, 0]), "001");
        assert_eq!(bit_string(&[]), "");
    }

    #[test]
    fn unknown_engine_is_a_config_error() {
        let (code, _, err) = invoke(&["bench", "--engine", "gpu", "--depths", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown engine"));
    }

    #[test]
    fn missing_subcommand_is_usage_error() {
        assert_eq!(invoke(&[]).0, 2);
    }

    #[test]
    fn random_then_bench_small() {
        let (code, out, _) = invoke(&["random", "--qubits", "2", "--depth", "2", "--seed", "4"]);
        assert_eq!(code, 0);
        assert_eq!(out.matches("cx ").count(), 1);
        let (code, out, _) = invoke(&["bench", "--qubits", "3", "--depths", "2,4", "--reps", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 1 + 2 * 3);
    }

    #[test]
    fn negative_epsilon_rejected() {
        let (code, _, _) = invoke(&["noise-sweep", "--epsilons", "-0.1", "--qubits", "2", "--depth", "2"]);
        assert_eq!(code, 2);
    }
}
