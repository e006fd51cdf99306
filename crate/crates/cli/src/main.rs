use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coselect::pipeline::{self, AnalyzeConfig, ComponentSelection, PipelineError};
use coselect::synth::{generate, PlannerConfig};
use coselect::{CorrelationKind, NullModelKind, SeededRng};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Co-selection network analysis of production-campaign records.
#[derive(Debug, Parser)]
#[command(name = "coselect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the co-selection graph and write graph exports and histograms.
    Mine(MineArgs),
    /// Run the full stage, community and null-model analysis.
    Analyze(AnalyzeArgs),
    /// Generate synthetic records from a planner config.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Input CSV with a header row.
    input: PathBuf,
    /// JSON preset; command-line flags override its values.
    #[arg(long)]
    preset: Option<PathBuf>,
    /// Column holding the item label [default: grade].
    #[arg(long)]
    item_column: Option<String>,
    /// Comma-separated numeric attribute columns (default: canonical columns present).
    #[arg(long, value_delimiter = ',')]
    attributes: Option<Vec<String>>,
    /// Minimum item and pair support [default: 0].
    #[arg(long)]
    min_support: Option<f64>,
    /// Minimum lift for an edge [default: 1].
    #[arg(long)]
    min_lift: Option<f64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MineArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of observation windows, which is also the stage count [default: 10].
    #[arg(long)]
    windows: Option<usize>,
    /// Replicates per null-model ensemble [default: 1000].
    #[arg(long)]
    ensemble: Option<usize>,
    /// Comma-separated null models: er, degseq, grg.
    #[arg(long, value_delimiter = ',', value_parser = parse_model)]
    models: Option<Vec<NullModelKind>>,
    /// pearson, spearman or kendall.
    #[arg(long, value_parser = parse_corr)]
    corr: Option<CorrelationKind>,
    /// Base seed for every null-model ensemble [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Slab-frequency floor for pruning minor communities.
    #[arg(long)]
    prune_floor: Option<f64>,
    /// Successful swaps per edge for degree-preserving randomization.
    #[arg(long)]
    swap_multiplier: Option<f64>,
    /// largest, lowest:ATTR or highest:ATTR.
    #[arg(long)]
    component: Option<ComponentSelection>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Planner config (JSON).
    config: PathBuf,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Header name of the item column.
    #[arg(long, default_value = coselect::ingest::DEFAULT_ITEM_COLUMN)]
    item_column: String,
}

fn parse_model(s: &str) -> Result<NullModelKind, String> {
    s.parse()
        .map_err(|e: coselect::null_models::NullModelError| e.to_string())
}

fn parse_corr(s: &str) -> Result<CorrelationKind, String> {
    s.parse().map_err(|e: coselect::stats::StatsError| e.to_string())
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::new(e.exit_code() as u8, e.to_string())
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_DATA, format!("cannot read {}: {e}", path.display())))
}

fn write_artifacts(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::new(EXIT_INTERNAL, format!("cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for (name, content) in files {
        fs::write(dir.join(name), content).map_err(io)?;
    }
    Ok(())
}

fn base_config(common: &CommonArgs) -> Result<AnalyzeConfig, Failure> {
    let mut config = match &common.preset {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read preset {}: {e}", path.display())))?;
            AnalyzeConfig::from_json(&text)?
        }
        None => AnalyzeConfig::default(),
    };
    if let Some(c) = &common.item_column {
        config.item_column = c.clone();
    }
    if let Some(a) = &common.attributes {
        config.attribute_columns = Some(a.clone());
    }
    if let Some(s) = common.min_support {
        config.thresholds.min_support = s;
    }
    if let Some(l) = common.min_lift {
        config.thresholds.min_lift = l;
    }
    Ok(config)
}

fn run_mine(args: MineArgs) -> Result<String, Failure> {
    let config = base_config(&args.common)?;
    config.thresholds.validate().map_err(PipelineError::from)?;
    let text = read_input(&args.common.input)?;
    let out = pipeline::mine(
        &text,
        &config.item_column,
        config.attribute_columns.as_deref(),
        config.thresholds,
    )?;
    write_artifacts(&args.common.out, &out.artifacts()?)?;
    Ok(format!(
        "{} nodes, {} edges, {} components written to {}",
        out.network.graph.node_count(),
        out.network.graph.edge_count(),
        out.components.len(),
        args.common.out.display()
    ))
}

fn run_analyze(args: AnalyzeArgs) -> Result<String, Failure> {
    let mut config = base_config(&args.common)?;
    if let Some(w) = args.windows {
        config.windows = w;
    }
    if let Some(n) = args.ensemble {
        config.ensemble = n;
    }
    if let Some(m) = args.models {
        config.models = m;
    }
    if let Some(c) = args.corr {
        config.correlation = c;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(f) = args.prune_floor {
        config.prune_floor = f;
    }
    if let Some(q) = args.swap_multiplier {
        config.swap_multiplier = q;
    }
    if let Some(c) = args.component {
        config.component = c;
    }
    config.validate()?;
    let text = read_input(&args.common.input)?;
    let out = pipeline::analyze(&text, &config)?;
    write_artifacts(&args.common.out, &out.artifacts()?)?;
    let ok = out
        .report
        .zscores
        .iter()
        .filter(|c| c.status == pipeline::CellStatus::Ok)
        .count();
    Ok(format!(
        "{} stages, {} of {} z-score cells defined, written to {}",
        out.report.stage_count,
        ok,
        out.report.zscores.len(),
        args.common.out.display()
    ))
}

fn run_synth(args: SynthArgs) -> Result<String, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read config {}: {e}", args.config.display())))?;
    let config = PlannerConfig::from_json(&text).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let mut rng = SeededRng::new(args.seed).replicate(0);
    let records = generate(&config, &mut rng).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let csv = coselect::ingest::write_records_csv(&records, &args.item_column)
        .map_err(|e| Failure::new(EXIT_INTERNAL, e.to_string()))?;
    match &args.out {
        Some(path) => {
            fs::write(path, csv)
                .map_err(|e| Failure::new(EXIT_INTERNAL, format!("cannot write {}: {e}", path.display())))?;
            Ok(format!("{} records written to {}", records.len(), path.display()))
        }
        None => {
            print!("{csv}");
            Ok(format!("{} records written", records.len()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Mine(args) => run_mine(args),
        Command::Analyze(args) => run_analyze(args),
        Command::Synth(args) => run_synth(args),
    };
    match result {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
