//! `conirep` command line: analytical and numerical evaluation of state
//! matrices, spike encoding, convergence tables and batch sweeps.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use conirep::io::{format_matrix_csv, read_matrix_csv};
use conirep::report::{convergence_csv, EvaluationReport, SCHEMA_VERSION};
use conirep::{
    bin_spikes, convergence_study, evaluate, ir_num, Error, EvalConfig, Method, SlotConfig,
    SpikeTrain,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FALLBACK: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "conirep",
    version,
    about = "Evaluate input-state representations for nonnegative readouts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact representation error of a matrix file.
    Evaluate(EvaluateArgs),
    /// Midpoint-rule estimate with an NNLS fit per sample.
    Numeric(NumericArgs),
    /// Convergence of the numerical estimate towards the exact value.
    Compare(CompareArgs),
    /// Bin a spike file into a matrix CSV.
    Encode(EncodeArgs),
    /// Evaluate many matrix files and tabulate the results.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (results do not depend on this).
    #[arg(long, env = "CONIREP_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Force single-threaded execution.
    #[arg(long)]
    pub deterministic: bool,
    /// Maximum number of quadrature samples.
    #[arg(long, default_value_t = 10_000_000)]
    pub budget_samples: u128,
    /// Geometric incidence tolerance.
    #[arg(long)]
    pub tol_geom: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Exit with status 2 when the numerical fallback was needed.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct NumericArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Samples per axis.
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated per-axis resolutions.
    #[arg(long, value_delimiter = ',', default_values_t = vec![8usize, 16, 32, 64])]
    pub ns: Vec<usize>,
    /// Also write the table to this file for plotting.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Spike file (`neuronId<TAB>time` records).
    #[arg(long)]
    pub input: PathBuf,
    /// Slot length in seconds.
    #[arg(long)]
    pub slot_length: f64,
    /// Number of states (slots).
    #[arg(long)]
    pub states: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Matrix files or directories of `.csv` files.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn load_matrix(path: &Path) -> Result<conirep::StateMatrix, Failure> {
    read_matrix_csv(path).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn config(common: &Common) -> EvalConfig {
    let mut cfg = EvalConfig {
        sample_budget: common.budget_samples,
        ..EvalConfig::default()
    };
    if let Some(t) = common.tol_geom {
        cfg.tol.geom = t;
    }
    cfg
}

fn threads(common: &Common) -> usize {
    if common.deterministic {
        1
    } else {
        common.threads.max(1)
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn render(report: &EvaluationReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    }
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<i32, Failure> {
    let c = load_matrix(&args.input)?;
    let result = evaluate(&c, &config(&args.common))?;
    let report = EvaluationReport::from(&result);
    emit(
        args.common.output.as_deref(),
        &render(&report, args.common.format),
    )?;
    if args.strict && result.method == Method::NumericalFallback {
        eprintln!("conirep: cone is not full-dimensional; result is a numerical estimate");
        return Ok(EXIT_FALLBACK);
    }
    Ok(EXIT_OK)
}

fn cmd_numeric(args: &NumericArgs) -> Result<i32, Failure> {
    let c = load_matrix(&args.input)?;
    let q = ir_num(&c, args.n, args.common.budget_samples)?;
    let text = match args.common.format {
        Format::Json => {
            let value = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "ir_num": q.ir_num,
                "irn_num": q.irn_num,
                "n": q.n,
                "total_samples": q.total_samples as u64,
            });
            let mut s = serde_json::to_string_pretty(&value).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => format!(
            "N,ir_num,irn_num,total_samples\n{},{},{},{}\n",
            q.n, q.ir_num, q.irn_num, q.total_samples
        ),
        Format::Text => format!(
            "Ir_num  : {:.10}\nIrN_num : {:.10}\nN       : {} ({} samples)\n",
            q.ir_num, q.irn_num, q.n, q.total_samples
        ),
    };
    emit(args.common.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_compare(args: &CompareArgs) -> Result<i32, Failure> {
    let c = load_matrix(&args.input)?;
    let result = evaluate(&c, &config(&args.common))?;
    if result.method == Method::NumericalFallback {
        return Err(Failure {
            code: EXIT_FALLBACK,
            message: "matrix has no analytical value to compare against".into(),
        });
    }
    let rows = convergence_study(&c, &args.ns, result.ir, args.common.budget_samples)?;
    let text = match args.common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "ir": result.ir,
                "rows": rows,
            }))
            .expect("json");
            s.push('\n');
            s
        }
        Format::Csv | Format::Text => convergence_csv(&rows),
    };
    emit(args.common.output.as_deref(), &text)?;
    if let Some(p) = &args.plot_data {
        fs::write(p, convergence_csv(&rows))?;
    }
    Ok(EXIT_OK)
}

fn cmd_encode(args: &EncodeArgs) -> Result<i32, Failure> {
    let train = fs::read_to_string(&args.input)
        .map_err(Error::from)
        .and_then(|text| SpikeTrain::parse(&text))
        .map_err(|e| {
            let mut f = Failure::from(e);
            f.message = format!("{}: {}", args.input.display(), f.message);
            f
        })?;
    let encoded = bin_spikes(&train, &SlotConfig::new(args.slot_length, args.states)?)?;
    if encoded.ignored_events > 0 {
        eprintln!(
            "conirep: {} spike(s) after the last slot were ignored",
            encoded.ignored_events
        );
    }
    let text = format!(
        "# states={} neurons={} slot_length={}\n{}",
        args.states,
        train.neuron_count(),
        args.slot_length,
        format_matrix_csv(&encoded.matrix)
    );
    emit(args.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32, Failure> {
    let cfg = config(&args.common);
    let mut reports = Vec::new();
    for file in expand_inputs(&args.input)? {
        let c = load_matrix(&file)?;
        let result = evaluate(&c, &cfg)?;
        reports.push((file, EvaluationReport::from(&result)));
    }
    let text = match args.common.format {
        Format::Json => {
            let rows: Vec<serde_json::Value> = reports
                .iter()
                .map(|(f, r)| {
                    serde_json::json!({
                        "file": f.display().to_string(),
                        "report": r,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).expect("json");
            s.push('\n');
            s
        }
        Format::Csv | Format::Text => {
            let mut s = String::from("file,states,neurons,ir,irn,output_volume,method\n");
            for (f, r) in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    f.display(),
                    r.states,
                    r.neurons,
                    r.ir,
                    r.irn,
                    r.output_volume,
                    r.method.as_str()
                ));
            }
            s
        }
    };
    emit(args.common.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Numeric(a) => cmd_numeric(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn worker_threads(cli: &Cli) -> usize {
    match &cli.command {
        Command::Evaluate(a) => threads(&a.common),
        Command::Numeric(a) => threads(&a.common),
        Command::Compare(a) => threads(&a.common),
        Command::Sweep(a) => threads(&a.common),
        Command::Encode(_) => 1,
    }
}

/// Run the CLI and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads(&cli))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("conirep: {e}");
            return EXIT_INPUT;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("conirep: {}", f.message);
            f.code
        }
    }
}
