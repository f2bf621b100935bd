//! `mcaw`: ingest, analyze and serve categorical registry data.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcaw_core::dataset::MissingPolicy;
use mcaw_core::inference::{EllipseKind, DEFAULT_LEVEL, DEFAULT_P_THRESHOLD};
use mcaw_core::mca::Correction;
use mcaw_core::pipeline::FilterClause;
use mcaw_core::ErrorClass;

#[derive(Parser, Debug)]
#[command(name = "mcaw", version, about = "Multiple correspondence analysis for categorical registries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a CSV against its dictionary; print the dataset summary.
    Ingest(IngestArgs),
    /// Fit MCA and write every report into a directory.
    Analyze(AnalyzeArgs),
    /// Rate table for one variable.
    Rates(RatesArgs),
    /// Describe one axis by its associated variables and categories.
    Dimdesc(DimdescArgs),
    /// Confidence ellipses of the individuals grouped by a variable.
    Ellipses(EllipsesArgs),
    /// Generate a synthetic registry from a spec file.
    Synth(SynthArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Input CSV file.
    #[arg(long = "csv", alias = "csv-file", value_name = "PATH")]
    csv: PathBuf,
    /// Data dictionary (TOML).
    #[arg(long, value_name = "PATH")]
    dict: PathBuf,
    /// Active variables, comma-separated. Defaults to every categorical and integer column.
    #[arg(long, value_delimiter = ',')]
    active: Option<Vec<String>>,
    /// Breaks for integer columns, comma-separated.
    #[arg(long, value_name = "B0,B1,..")]
    age_breaks: Option<String>,
    /// Keep rows whose VAR is one of the labels; repeatable.
    #[arg(long = "filter", value_name = "VAR=L1|L2")]
    filters: Vec<String>,
    #[arg(long, value_enum, default_value_t = Policy::DropRow)]
    missing_policy: Policy,
    /// Axes kept for coordinates (default: all nontrivial).
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long, value_enum, default_value_t = CorrectionArg::None)]
    correction: CorrectionArg,
}

#[derive(Args, Debug, Clone, Copy)]
struct FormatArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Shorthand for --format json.
    #[arg(long, conflicts_with = "format")]
    json: bool,
}

impl FormatArgs {
    fn resolve(self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Policy {
    DropRow,
    MissingLevel,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CorrectionArg {
    None,
    Benzecri,
    Greenacre,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum KindArg {
    Mean,
    Observation,
}

impl From<KindArg> for EllipseKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Mean => EllipseKind::Mean,
            KindArg::Observation => EllipseKind::Observation,
        }
    }
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    format: FormatArgs,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Grouping variable for ellipses (default: first active variable).
    #[arg(long)]
    group: Option<String>,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Mean)]
    kind: KindArg,
    /// p-value cutoff for dimension descriptions.
    #[arg(long, default_value_t = DEFAULT_P_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = 2)]
    decimals: u32,
    /// Also write SVG factor maps.
    #[arg(long)]
    svg: bool,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    format: FormatArgs,
    #[arg(long)]
    var: String,
    #[arg(long, default_value_t = 2)]
    decimals: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DimdescArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    format: FormatArgs,
    #[arg(long, default_value_t = 1)]
    axis: usize,
    #[arg(long, default_value_t = DEFAULT_P_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EllipsesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    format: FormatArgs,
    #[arg(long)]
    group: String,
    /// Two axes, comma-separated.
    #[arg(long, default_value = "1,2")]
    axes: String,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Mean)]
    kind: KindArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Synthetic registry spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Override the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
    /// Also write the matching dictionary.
    #[arg(long)]
    dict_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Port (overrides MCAW_PORT).
    #[arg(long)]
    port: Option<u16>,
}

/// Error with its exit code: 1 usage, 2 data, 3 degenerate analysis.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    class: &'static str,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            class: "usage",
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            class: "data",
            message: message.into(),
        }
    }
}

impl From<mcaw_core::Error> for Failure {
    fn from(e: mcaw_core::Error) -> Self {
        let (code, class) = match e.class() {
            ErrorClass::Usage => (1, "usage"),
            ErrorClass::Data => (2, "data"),
            ErrorClass::Degenerate => (3, "degenerate"),
        };
        Self {
            code,
            class,
            message: e.to_string(),
        }
    }
}

impl InputArgs {
    fn options(&self) -> Result<mcaw_core::pipeline::AnalysisOptions, Failure> {
        Ok(mcaw_core::pipeline::AnalysisOptions {
            active: self.active.clone(),
            age_breaks: self
                .age_breaks
                .as_deref()
                .map(mcaw_core::pipeline::parse_breaks)
                .transpose()?,
            missing_policy: match self.missing_policy {
                Policy::DropRow => MissingPolicy::DropRow,
                Policy::MissingLevel => MissingPolicy::MissingLevel,
            },
            filters: self
                .filters
                .iter()
                .map(|f| f.parse::<FilterClause>())
                .collect::<Result<_, _>>()?,
            n_dims: self.dims,
            correction: match self.correction {
                CorrectionArg::None => Correction::None,
                CorrectionArg::Benzecri => Correction::Benzecri,
                CorrectionArg::Greenacre => Correction::Greenacre,
            },
            rank_tol: None,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Rates(a) => commands::rates(a),
        Command::Dimdesc(a) => commands::dimdesc(a),
        Command::Ellipses(a) => commands::ellipses(a),
        Command::Synth(a) => commands::synth(a),
        Command::Serve(a) => commands::serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let body = serde_json::json!({"error": f.message, "class": f.class});
            eprintln!("{body}");
            ExitCode::from(f.code)
        }
    }
}
