//! Command-line interface: simulation, scoring, Monte Carlo experiments,
//! affine-relation reports and figure rendering behind one executable.
//!
//! Exit codes: 0 on success, 1 on I/O failure, 2 on usage or validation
//! errors.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::experiment::{
    outcome, replication_series, run_experiment, summarize, Contamination, ExperimentConfig,
    ModelLabel, ReplicationOutcome, ReplicationResult, DEFAULT_SEED,
};
use crate::export;
use crate::linearity::{affine_relation, empirical_affine_residual};
use crate::model::ProcessModel;
use crate::scoring::{classify, cumulative_delta};

#[derive(Debug, Parser)]
#[command(
    name = "preqscore",
    version,
    about = "Prequential comparison of Gaussian AR(1) forecasters under the log-score and the Hyvarinen score"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a stationary Gaussian AR(1) series into a text file
    Simulate(SimulateArgs),
    /// Score a series file under two models and report both decisions
    Score(ScoreArgs),
    /// Run a seeded Monte Carlo comparison and export CSV/JSON/SVG results
    Experiment(ExperimentArgs),
    /// Report the affine relation between the two per-step delta scores
    Linearity(LinearityArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Process mean
    #[arg(long, default_value_t = 0.0)]
    pub mean: f64,
    /// AR(1) coefficient (|phi| < 1)
    #[arg(long)]
    pub phi: f64,
    /// Innovation variance (> 0)
    #[arg(long = "var")]
    pub innovation_variance: f64,
    /// Series length (>= 2)
    #[arg(long)]
    pub n: usize,
    /// RNG seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output series file (one value per line)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Series file to score (text format, one value per line)
    #[arg(long)]
    pub series: PathBuf,
    #[command(flatten)]
    pub models: ModelPairArgs,
    /// Decision cutoff on the cumulative deltas
    #[arg(long, default_value_t = 0.0)]
    pub cutoff: f64,
}

/// Flags describing the two competing models.
#[derive(Debug, Args)]
pub struct ModelPairArgs {
    /// Mean of model P
    #[arg(long = "p-mean", default_value_t = 0.0)]
    pub p_mean: f64,
    /// AR coefficient of model P
    #[arg(long = "p-phi")]
    pub p_phi: f64,
    /// Innovation variance of model P
    #[arg(long = "p-var")]
    pub p_var: f64,
    /// Mean of model Q
    #[arg(long = "q-mean", default_value_t = 0.0)]
    pub q_mean: f64,
    /// AR coefficient of model Q
    #[arg(long = "q-phi")]
    pub q_phi: f64,
    /// Innovation variance of model Q
    #[arg(long = "q-var")]
    pub q_var: f64,
}

impl ModelPairArgs {
    fn model_p(&self) -> Result<ProcessModel, CliError> {
        ProcessModel::new(self.p_mean, self.p_phi, self.p_var)
            .map_err(|e| CliError::Usage(format!("model P: {e}")))
    }

    fn model_q(&self) -> Result<ProcessModel, CliError> {
        ProcessModel::new(self.q_mean, self.q_phi, self.q_var)
            .map_err(|e| CliError::Usage(format!("model Q: {e}")))
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config file (TOML); wins over individual flags
    #[arg(long, conflicts_with = "paper_defaults", required_unless_present = "paper_defaults")]
    pub config: Option<PathBuf>,
    /// Use the built-in reference configuration
    #[arg(long)]
    pub paper_defaults: bool,
    /// Contaminate one observation: INDEX:SHIFT with 1-based index and an
    /// explicitly signed shift, e.g. 50:+7
    #[arg(long, value_parser = parse_contaminate)]
    pub contaminate: Option<Contamination>,
    /// RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the replication loop (default: rayon's choice)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory for results.csv, summary.json and the SVG figures
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct LinearityArgs {
    #[command(flatten)]
    pub models: ModelPairArgs,
    /// Also measure the max affine residual over simulated replications
    #[arg(long)]
    pub empirical: bool,
    /// Replications for the empirical check
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Series length for the empirical check
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    /// RNG seed for the empirical check
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

fn parse_contaminate(s: &str) -> Result<Contamination, String> {
    let (index, shift) = s
        .split_once(':')
        .ok_or_else(|| format!("expected INDEX:SHIFT (e.g. 50:+7), got {s:?}"))?;
    let index: usize = index
        .parse()
        .map_err(|e| format!("bad contamination index {index:?}: {e}"))?;
    if !shift.starts_with('+') && !shift.starts_with('-') {
        return Err(format!(
            "contamination shift needs an explicit sign (e.g. 50:+7), got {shift:?}"
        ));
    }
    let shift: f64 = shift
        .parse()
        .map_err(|e| format!("bad contamination shift {shift:?}: {e}"))?;
    Ok(Contamination { index, shift })
}

/// CLI failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Usage or validation problem; exit code 2.
    Usage(String),
    /// Filesystem or stream failure; exit code 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Entry point used by the binary.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Score(args) => cmd_score(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Linearity(args) => cmd_linearity(&args),
    }
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}

fn finish_file(mut w: BufWriter<fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush()
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let model = ProcessModel::new(args.mean, args.phi, args.innovation_variance)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let marginal = model
        .stationary_distribution()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut rng = crate::experiment::seeded_rng(args.seed);
    let series = model
        .simulate_series(args.n, &mut rng)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut out = create_file(&args.out)?;
    export::write_series(&series, &mut out)?;
    finish_file(out, &args.out)?;
    println!("stationary variance = {}", marginal.variance);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_score(args: &ScoreArgs) -> Result<(), CliError> {
    let model_p = args.models.model_p()?;
    let model_q = args.models.model_q()?;
    let file = fs::File::open(&args.series)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", args.series.display())))?;
    let series = export::read_series(BufReader::new(file))?;
    let path = cumulative_delta(&series, &model_p, &model_q)?;
    println!("delta_log = {}", path.cumulative_log);
    println!("delta_hyv = {}", path.cumulative_hyv);
    println!(
        "decision_log = {}",
        classify(path.cumulative_log, args.cutoff)
    );
    println!(
        "decision_hyv = {}",
        classify(path.cumulative_hyv, args.cutoff)
    );
    Ok(())
}

fn load_experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    if let Some(path) = &args.config {
        if args.seed.is_some() || args.contaminate.is_some() {
            eprintln!("warning: --config wins over --seed/--contaminate; ignoring those flags");
        }
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        return Ok(export::parse_config(&text)?);
    }
    let mut config = ExperimentConfig::paper_defaults();
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(contamination) = args.contaminate {
        config.contamination = Some(contamination);
    }
    Ok(config)
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let config = load_experiment_config(args)?;
    config.validate()?;
    let results = match args.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Usage(format!("bad --threads value: {e}")))?;
            pool.install(|| run_experiment(&config))?
        }
        None => run_experiment(&config)?,
    };
    let truth = config.generator;
    let summary = summarize(&results, truth)?;

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out_dir.display())))?;

    let csv_path = args.out_dir.join("results.csv");
    let mut csv = create_file(&csv_path)?;
    export::write_results_csv(&results, &mut csv)?;
    finish_file(csv, &csv_path)?;
    println!("wrote {}", csv_path.display());

    let json_path = args.out_dir.join("summary.json");
    let mut json = create_file(&json_path)?;
    export::write_summary_json(&summary, &config, &mut json)?;
    finish_file(json, &json_path)?;
    println!("wrote {}", json_path.display());

    let svg_path = args.out_dir.join("scatter.svg");
    let mut svg = create_file(&svg_path)?;
    export::render_scatter_svg(&results, truth, &mut svg)?;
    finish_file(svg, &svg_path)?;
    println!("wrote {}", svg_path.display());

    if config.contamination.is_some() {
        render_sample_series(&config, &results, truth, &args.out_dir)?;
    }

    println!("both_correct   = {}", summary.both_correct);
    println!("both_wrong     = {}", summary.both_wrong);
    println!("only_hyv_wrong = {}", summary.only_hyv_wrong);
    println!("only_log_wrong = {}", summary.only_log_wrong);
    println!("any_tie        = {}", summary.any_tie);
    Ok(())
}

/// One sample contaminated series per decision pattern, when present:
/// misclassified by both rules, by the Hyvarinen rule only, and by
/// neither.
fn render_sample_series(
    config: &ExperimentConfig,
    results: &[ReplicationResult],
    truth: ModelLabel,
    out_dir: &Path,
) -> Result<(), CliError> {
    let samples = [
        (ReplicationOutcome::BothWrong, "sample_series_both_wrong.svg"),
        (
            ReplicationOutcome::OnlyHyvWrong,
            "sample_series_hyv_only_wrong.svg",
        ),
        (
            ReplicationOutcome::BothCorrect,
            "sample_series_both_correct.svg",
        ),
    ];
    let index = config.contamination.map(|c| c.index);
    for (wanted, name) in samples {
        if let Some(r) = results.iter().find(|r| outcome(r, truth) == wanted) {
            let series = replication_series(config, r.rep_id)?;
            let path = out_dir.join(name);
            let mut svg = create_file(&path)?;
            export::render_series_svg(&series, index, &mut svg)?;
            finish_file(svg, &path)?;
            println!("wrote {} (replication {})", path.display(), r.rep_id);
        }
    }
    Ok(())
}

fn cmd_linearity(args: &LinearityArgs) -> Result<(), CliError> {
    let model_p = args.models.model_p()?;
    let model_q = args.models.model_q()?;
    match affine_relation(&model_p, &model_q) {
        Some(rel) => println!("a={} b={} case={}", rel.intercept, rel.slope, rel.case),
        None => println!("none"),
    }
    if args.empirical {
        if args.reps < 3 {
            return Err(CliError::Usage(format!(
                "--reps must be at least 3 for the empirical check, got {}",
                args.reps
            )));
        }
        let config = ExperimentConfig {
            replications: args.reps,
            series_length: args.n,
            model_p,
            model_q,
            generator: ModelLabel::P,
            contamination: None,
            seed: args.seed,
            cutoff: 0.0,
        };
        let results = run_experiment(&config)?;
        let pairs: Vec<(f64, f64)> = results
            .iter()
            .map(|r| (r.cumulative_log, r.cumulative_hyv))
            .collect();
        let residual = empirical_affine_residual(&pairs)?;
        println!("empirical residual = {residual}");
    }
    Ok(())
}
