use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use pathsim::engine::{
    estimate_amplitude, estimate_expectation, exact_expectation, imax, interference_exact, interference_state_exact,
    mana, EstimateOptions,
};
use pathsim::sampler::sample_count;
use pathsim::{EpsOperator, EstimateReport, NormPair};
use serde::Serialize;

use crate::build::{build_circuit, build_ket, build_op, norm_pair};
use crate::schema::{OpSpec, StateSpec};
use crate::{load_circuit, CliError};

#[derive(Debug, Parser)]
#[command(name = "pathsim", version, about = "Path-sampling estimates of circuit expectation values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// `Tr(M U ρ U†)` through the doubled chain.
    Markov,
    /// `⟨bra|U|ket⟩` through a single chain.
    Amplitude,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of a circuit file.
    Estimate {
        file: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = Method::Markov)]
        method: Method,
        /// Report wall-clock time; without it `elapsed_s` is null so reports stay reproducible.
        #[arg(long)]
        timing: bool,
    },
    /// Dense expectation and interference values.
    Exact { file: PathBuf },
    /// Constructed cost bound, exact `Imax` and mana for each operator.
    Imax {
        #[arg(required_unless_present = "op", conflicts_with = "op")]
        file: Option<PathBuf>,
        /// Inline JSON operator spec.
        #[arg(long)]
        op: Option<String>,
        /// `p` for `--op`; a number or `inf`.
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Number of paths the Chernoff bound asks for.
    Samples {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        b: f64,
    },
}

#[derive(Debug, Serialize)]
pub struct EstimateJson {
    pub estimate_re: f64,
    pub estimate_im: f64,
    #[serde(rename = "K")]
    pub k: u64,
    pub b: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub workers: usize,
    pub elapsed_s: Option<f64>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_sq_bound: Option<f64>,
}

impl EstimateJson {
    fn new(r: &EstimateReport, method: Method, timing: bool) -> Self {
        Self {
            estimate_re: r.estimate.re,
            estimate_im: r.estimate.im,
            k: r.sample_count,
            b: r.b,
            epsilon: r.epsilon,
            delta: r.delta,
            seed: r.seed,
            workers: r.workers,
            elapsed_s: timing.then(|| secs(r.elapsed)),
            method,
            abs_sq: None,
            abs_sq_bound: None,
        }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

#[derive(Debug, Serialize)]
pub struct ExactJson {
    pub expectation: [f64; 2],
    pub interference: f64,
    pub interference_state: f64,
}

#[derive(Debug, Serialize)]
pub struct ImaxEntry {
    /// Position in `ops`, or `"measurement"`.
    pub position: String,
    pub kind: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub b_constructed: f64,
    /// Null when the operator is too large for the dense fallback.
    pub imax_exact: Option<f64>,
    pub mana: Option<f64>,
}

fn parent(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}

fn imax_entry(position: String, spec: &OpSpec, op: &dyn EpsOperator) -> ImaxEntry {
    ImaxEntry {
        position,
        kind: spec.kind(),
        rows: op.rows(),
        cols: op.cols(),
        b_constructed: op.bound(),
        imax_exact: imax(op).ok(),
        mana: op.to_dense().ok().map(|a| mana(&a)),
    }
}

fn parse_p(text: &str) -> Result<NormPair, CliError> {
    let p = match text {
        "inf" => f64::INFINITY,
        _ => text.parse().map_err(|_| CliError::Schema(format!("p must be a number or \"inf\", got {text:?}")))?,
    };
    Ok(NormPair::new(p)?)
}

/// Runs one command and returns what goes to stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Estimate { file: path, epsilon, delta, seed, workers, method, timing } => {
            let file = load_circuit(&path)?;
            let circuit = build_circuit(&file, parent(&path))?;
            let opts = EstimateOptions::new(seed, workers);
            let json = match method {
                Method::Markov => {
                    EstimateJson::new(&estimate_expectation(&circuit, epsilon, delta, opts)?, method, timing)
                }
                Method::Amplitude => {
                    let (ket, bra) = match &file.state {
                        StateSpec::Dyad { ket, bra } => (ket.clone(), bra.clone()),
                        other => {
                            let ket = other.as_ket().ok_or_else(|| {
                                CliError::Schema("the amplitude method needs a pure or dyad state".into())
                            })?;
                            (ket.clone(), ket)
                        }
                    };
                    let dim = file.dim();
                    let a = estimate_amplitude(
                        build_ket(&bra, dim)?,
                        build_ket(&ket, dim)?,
                        circuit.unitaries(),
                        norm_pair(&file)?,
                        epsilon,
                        delta,
                        opts,
                    )?;
                    EstimateJson {
                        abs_sq: Some(a.abs_sq),
                        abs_sq_bound: Some(a.abs_sq_bound),
                        ..EstimateJson::new(&a.report, method, timing)
                    }
                }
            };
            Ok(to_json(&json))
        }
        Command::Exact { file: path } => {
            let file = load_circuit(&path)?;
            let circuit = build_circuit(&file, parent(&path))?;
            let e = exact_expectation(&circuit)?;
            Ok(to_json(&ExactJson {
                expectation: [e.re, e.im],
                interference: interference_exact(&circuit)?,
                interference_state: interference_state_exact(circuit.unitaries(), circuit.initial().as_ref())?,
            }))
        }
        Command::Imax { file: Some(path), .. } => {
            let file = load_circuit(&path)?;
            let circuit = build_circuit(&file, parent(&path))?;
            let mut entries: Vec<ImaxEntry> = file
                .ops
                .iter()
                .zip(circuit.unitaries())
                .enumerate()
                .map(|(i, (spec, op))| imax_entry(i.to_string(), spec, op.as_ref()))
                .collect();
            entries.push(imax_entry("measurement".into(), &file.measurement, circuit.measurement().as_ref()));
            Ok(to_json(&entries))
        }
        Command::Imax { file: None, op, p } => {
            let text = op.expect("clap requires a file or --op");
            let spec: OpSpec = serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
            let built = build_op(&spec, parse_p(&p)?)?;
            Ok(to_json(&vec![imax_entry("op".into(), &spec, built.as_ref())]))
        }
        Command::Samples { epsilon, delta, b } => Ok(sample_count(epsilon, delta, b)?.to_string()),
    }
}
