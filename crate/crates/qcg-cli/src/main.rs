//! `qcg`: experiment harness for the quantum coarse-graining toolkit.
//!
//! Exit codes: 0 on success, 2 when an optimization program correctly
//! reports infeasibility as the answer, 1 on any error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcg_cli::config::{ExperimentConfig, GeneratorSpec, Grid, OutputFormat};
use qcg_cli::experiments::{
    run_commutativity, run_cross_generator_matrix, run_sdp_tables, run_time_sweep,
    run_werner_sweep, sdp_tables_to_csv, sdp_tables_to_json, BenchOutput,
};
use qcg_cli::records::{to_csv, to_json};
use qcg_core::bayes::petz_emergent;
use qcg_core::channels::{kraus_to_choi, ConditionalState, KrausChannel};
use qcg_core::scenarios::Scenario;
use qcg_core::sdp::programs::diamond_norm;
use qcg_core::StateForm;

#[derive(Parser)]
#[command(
    name = "qcg",
    about = "Coarse-grained quantum dynamics: commutativity benchmarks, sweeps and SDP tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo commutativity benchmark of the Petz emergent channel.
    Bench {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scenario: u8,
        /// Generator state: ME, MM, RAND or WERNER:<lambda>.
        #[arg(long, default_value = "MM")]
        generator: GeneratorSpec,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Evolution time of the microscopic unitary, in seconds.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// 4x4 generator-vs-evaluation-state residual matrix.
    Matrix {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scenario: u8,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Residual of the best benchmark state across a time grid.
    Timesweep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scenario: u8,
        #[arg(long, default_value = "MM")]
        generator: GeneratorSpec,
        #[arg(long, default_value_t = 1_000)]
        samples: usize,
        /// Reference time used to select the best state.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Grid start:end:count over which the dynamics is rebuilt.
        #[arg(long = "t-grid", default_value = "0:6.2831853:50", allow_hyphen_values = true)]
        t_grid: Grid,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Residual of the best WERNER:1/3 state as the generator parameter
    /// sweeps over a lambda grid.
    Wernersweep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scenario: u8,
        /// Grid start:end:count with lambda in [-1/3, 1).
        #[arg(
            long = "lambda-grid",
            default_value = "-0.333:0.99:40",
            allow_hyphen_values = true
        )]
        lambda_grid: Grid,
        #[arg(long, default_value_t = 1_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Reproduce the optimization tables: feasibility, closest
    /// state-independent distances, robustness, thresholds.
    SdpTables {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to one scenario; its feasibility verdict then drives the
        /// exit code (2 when infeasible).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scenario: Option<u8>,
        /// Bisection tolerance of the threshold search.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Dump the Petz emergent channel for a scenario and generator as JSON.
    Petz {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scenario: u8,
        #[arg(long, default_value = "MM")]
        generator: GeneratorSpec,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diamond distance between two serialized channels (Kraus or Choi
    /// JSON documents).
    Diamond {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

fn write_output(path: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn emit_bench(out: &BenchOutput, path: &Option<PathBuf>, format: OutputFormat) -> std::io::Result<()> {
    let content = match format {
        OutputFormat::Csv => to_csv(&out.records),
        OutputFormat::Json => to_json(&out.records, out.notes.clone()),
    };
    write_output(path, &content)?;
    // summary goes to stderr so it never perturbs the data stream
    eprintln!(
        "summary: min {:.3e}, p01 {:.3e}, median {:.3e} over {} records",
        out.summary.min,
        out.summary.p01,
        out.summary.median,
        out.records.len()
    );
    Ok(())
}

/// Parse a serialized channel: a bare Kraus document, a bare conditional
/// state, or a `petz` dump wrapping either under "kraus"/"choi".
fn load_channel(path: &PathBuf) -> Result<ConditionalState, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Ok(ch) = serde_json::from_str::<KrausChannel>(&text) {
        return Ok(kraus_to_choi(&ch));
    }
    if let Ok(cs) = serde_json::from_str::<ConditionalState>(&text) {
        return Ok(cs.to_choi());
    }
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| format!("{}: not a channel document ({e})", path.display()))?;
    if let Some(kraus) = value.get("kraus") {
        if let Ok(ch) = serde_json::from_value::<KrausChannel>(kraus.clone()) {
            return Ok(kraus_to_choi(&ch));
        }
    }
    if let Some(choi) = value.get("choi") {
        if let Ok(cs) = serde_json::from_value::<ConditionalState>(choi.clone()) {
            return Ok(cs.to_choi());
        }
    }
    Err(format!("{}: not a channel document", path.display()))
}

fn run() -> Result<ExitCode, String> {
    // exit code 2 is reserved for infeasible-as-answer, so usage errors must
    // not fall through to clap's default exit code
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            e.print().expect("stdout");
            return Ok(ExitCode::SUCCESS);
        }
        Err(e) => {
            e.print().expect("stderr");
            return Ok(ExitCode::FAILURE);
        }
    };
    match cli.command {
        Command::Bench { scenario, generator, samples, t, seed, out, format } => {
            let cfg = ExperimentConfig {
                scenario_id: scenario,
                generator,
                samples,
                t,
                seed,
                output_path: out.clone(),
                format,
            };
            let result = run_commutativity(&cfg).map_err(|e| e.to_string())?;
            emit_bench(&result, &out, format).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Matrix { scenario, t, seed, out, format } => {
            let result = run_cross_generator_matrix(scenario, t, seed).map_err(|e| e.to_string())?;
            emit_bench(&result, &out, format).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Timesweep { scenario, generator, samples, t, t_grid, seed, out, format } => {
            let cfg = ExperimentConfig {
                scenario_id: scenario,
                generator,
                samples,
                t,
                seed,
                output_path: out.clone(),
                format,
            };
            let result = run_time_sweep(&cfg, &t_grid).map_err(|e| e.to_string())?;
            emit_bench(&result, &out, format).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Wernersweep { scenario, lambda_grid, samples, seed, t, out, format } => {
            let result = run_werner_sweep(scenario, &lambda_grid, samples, seed, t)
                .map_err(|e| e.to_string())?;
            emit_bench(&result, &out, format).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SdpTables { t, seed, scenario, tol, out, format } => {
            let tables = run_sdp_tables(t, seed, scenario, tol).map_err(|e| e.to_string())?;
            let content = match format {
                OutputFormat::Csv => sdp_tables_to_csv(&tables),
                OutputFormat::Json => sdp_tables_to_json(&tables),
            };
            write_output(&out, &content).map_err(|e| e.to_string())?;
            for line in &tables.discrepancies {
                eprintln!("discrepancy: {line}");
            }
            if tables.headline_infeasible {
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Petz { scenario, generator, t, seed, out } => {
            let sc = Scenario::new(scenario).map_err(|e| e.to_string())?;
            let gen = generator.build(seed).map_err(|e| e.to_string())?;
            let emergent =
                petz_emergent(&sc.unitary(t), &sc.cg(), &gen).map_err(|e| e.to_string())?;
            let choi = kraus_to_choi(&emergent);
            let doc = serde_json::json!({
                "scenario": scenario,
                "generator": gen.label(),
                "t": t,
                "kraus": emergent,
                "choi": choi,
            });
            let content = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            write_output(&out, &content).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Diamond { a, b } => {
            let ca = load_channel(&a)?;
            let cb = load_channel(&b)?;
            if ca.dims() != cb.dims() {
                return Err(format!(
                    "channel dimensions differ: {:?} vs {:?}",
                    ca.dims(),
                    cb.dims()
                ));
            }
            let delta = ConditionalState::new(
                ca.dims(),
                StateForm::Choi,
                ca.matrix().sub(cb.matrix()),
            )
            .map_err(|e| e.to_string())?;
            let d = diamond_norm(&delta).map_err(|e| e.to_string())?;
            println!("{d}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
