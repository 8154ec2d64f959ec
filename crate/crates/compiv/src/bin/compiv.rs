//! Command-line front end: simulation, fitting, evaluation, benchmarking,
//! diversity analysis, and real counts ingestion over the library pipeline.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 3 numerical
//! failure (including non-convergence, whose diagnostics are still written).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use compiv::datagen::{preset, SimulationSpec};
use compiv::error::{Error, Result};
use compiv::io::{
    ingest_counts_csv, read_compositions_csv, read_dataset_csv, read_json, write_compositions_csv,
    write_dataset_csv, write_json, ExperimentConfig, IngestOptions,
};
use compiv::iv::{
    fit_diversity_iv, fit_method, CausalFit, FitConfig, IvDataset, Method, ScalarMethod,
};
use compiv::metrics::{benchmark, evaluate};
use compiv::simplex::Diversity;

#[derive(Parser)]
#[command(
    name = "compiv",
    version,
    about = "Causal effect estimation for compositional treatments with instrumental variables"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset: data CSV, interventional-sample CSV,
    /// and ground-truth JSON.
    Simulate(SimulateArgs),
    /// Fit an estimator to a dataset CSV and write the fit as JSON.
    Fit(FitArgs),
    /// Score a fit JSON against a ground-truth JSON on interventional
    /// samples.
    Evaluate(EvaluateArgs),
    /// Run scenarios x methods x seeds and write summary tables.
    Benchmark(BenchmarkArgs),
    /// Estimate the effect of a scalar diversity summary of the treatment.
    DiversityIv(DiversityArgs),
    /// Convert a real counts table into the dataset CSV format.
    Ingest(IngestArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario preset name (e.g. A-p3, B-p30, B-diversity).
    #[arg(long, conflicts_with_all = ["params", "setting"])]
    preset: Option<String>,
    /// JSON file holding a full simulation spec.
    #[arg(long, conflicts_with = "setting")]
    params: Option<PathBuf>,
    /// Scenario family (a or b); resolves the preset <SETTING>-p<P>.
    #[arg(long, requires = "p")]
    setting: Option<String>,
    /// Number of treatment components; with --setting selects the preset.
    #[arg(long)]
    p: Option<usize>,
    /// Expected number of instruments; checked against the resolved spec.
    #[arg(long)]
    q: Option<usize>,
    /// Override the sample size of the resolved spec.
    #[arg(long)]
    n: Option<usize>,
    /// Override the number of interventional samples.
    #[arg(long)]
    m_interventions: Option<usize>,
    /// RNG seed; defaults to COMPIV_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix: writes <OUT>.csv, <OUT>.interventions.csv,
    /// <OUT>.truth.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// One of: 2sls, 2sls-ilr, ilr-lc, alr-lc, dir-lc, kiv-ilr, only-lc.
    #[arg(long)]
    method: String,
    /// Dataset CSV with columns z_1..z_q, x_1..x_p, y.
    #[arg(long)]
    data: PathBuf,
    /// Added to every treatment component before closure (use for counts).
    #[arg(long, default_value_t = 0.0)]
    pseudo_count: f64,
    /// Stability-selection threshold; 0.65 is a sensible choice for noisy
    /// real data.
    #[arg(long, default_value_t = 0.7)]
    threshold: f64,
    /// Second-stage loss: squared, huber[:delta], squared-hinge,
    /// huberized-hinge[:delta].
    #[arg(long, default_value = "squared")]
    loss: String,
    /// Seed for resampling and splits; defaults to COMPIV_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Fit JSON output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Fit JSON produced by `fit` or `diversity-iv`.
    #[arg(long)]
    fit: PathBuf,
    /// Ground-truth JSON produced by `simulate`.
    #[arg(long)]
    truth: PathBuf,
    /// Interventional-sample CSV produced by `simulate`.
    #[arg(long)]
    interventions: PathBuf,
    /// Metrics JSON output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Experiment configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for seed-level parallelism; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Summary CSV path (overrides the config's output.csv).
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Aligned-text table path (overrides the config's output.text).
    #[arg(long)]
    out_text: Option<PathBuf>,
    /// Per-seed JSON-lines path (overrides the config's output.jsonl).
    #[arg(long)]
    out_jsonl: Option<PathBuf>,
}

#[derive(Args)]
struct DiversityArgs {
    /// Dataset CSV with columns z_1..z_q, x_1..x_p, y.
    #[arg(long)]
    data: PathBuf,
    /// richness, shannon, or simpson.
    #[arg(long, default_value = "shannon")]
    measure: String,
    /// 2sls or kiv.
    #[arg(long, default_value = "2sls")]
    method: String,
    /// Added to every treatment component before closure.
    #[arg(long, default_value_t = 0.0)]
    pseudo_count: f64,
    /// Seed for the kernel split; defaults to COMPIV_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Fit JSON output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// CSV with one row per sample: taxa counts plus instrument and outcome
    /// columns. Aggregate taxa beforehand; no aggregation happens here.
    #[arg(long)]
    counts_csv: PathBuf,
    /// Name of the instrument column (binary 0/1 accepted).
    #[arg(long)]
    instrument_col: String,
    /// Name of the outcome column.
    #[arg(long)]
    outcome_col: String,
    /// Threshold the outcome at its mean into -1/+1 labels.
    #[arg(long)]
    binary: bool,
    /// Added to every count before closure.
    #[arg(long, default_value_t = 0.5)]
    pseudo_count: f64,
    /// Dataset CSV output path.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_numerical() { 3 } else { 2 });
        }
    }
}

fn run(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Fit(args) => cmd_fit(args),
        Cmd::Evaluate(args) => cmd_evaluate(args),
        Cmd::Benchmark(args) => cmd_benchmark(args),
        Cmd::DiversityIv(args) => cmd_diversity_iv(args),
        Cmd::Ingest(args) => cmd_ingest(args),
    }
}

/// --seed, else COMPIV_SEED, else 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("COMPIV_SEED") {
        Ok(raw) => raw
            .parse::<u64>()
            .map_err(|_| Error::invalid(format!("COMPIV_SEED={raw:?} is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn create_parent_dirs(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let mut spec: SimulationSpec = match (&args.preset, &args.params, &args.setting) {
        (Some(name), None, None) => preset(name)?,
        (None, Some(path), None) => read_json(path)?,
        (None, None, Some(setting)) => {
            let p = args.p.expect("clap enforces --p with --setting");
            preset(&format!("{}-p{}", setting.to_uppercase(), p))?
        }
        (None, None, None) => {
            return Err(Error::invalid(
                "pass one of --preset, --params, or --setting with --p",
            ))
        }
        _ => unreachable!("clap conflict rules"),
    };
    if let Some(q) = args.q {
        let actual = spec.q();
        if q != actual {
            return Err(Error::invalid(format!(
                "requested q = {q} but the scenario has q = {actual}"
            )));
        }
    }
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(m) = args.m_interventions {
        spec.m_interventions = m;
    }
    let seed = resolve_seed(args.seed)?;

    let scenario = spec.materialize(seed)?;
    let data = scenario.generate(spec.n)?;
    if data.pseudo_counted {
        eprintln!("note: zero counts present; pseudo-count 0.5 applied before closure");
    }
    let ds = IvDataset::from(data);
    let xs = scenario.interventional_sample(spec.m_interventions)?;
    let truth = scenario.ground_truth()?;

    create_parent_dirs(&args.out)?;
    let data_path = with_suffix(&args.out, ".csv");
    let interventions_path = with_suffix(&args.out, ".interventions.csv");
    let truth_path = with_suffix(&args.out, ".truth.json");
    write_dataset_csv(&data_path, &ds)?;
    write_compositions_csv(&interventions_path, &xs)?;
    write_json(&truth_path, &truth)?;
    println!(
        "wrote {} ({} rows), {} ({} rows), {}",
        data_path.display(),
        ds.n(),
        interventions_path.display(),
        xs.len(),
        truth_path.display()
    );
    Ok(0)
}

fn fit_config(threshold: f64, loss: &str, seed: u64) -> Result<FitConfig> {
    let mut cfg = FitConfig::default();
    cfg.lc.loss = FromStr::from_str(loss)?;
    cfg.lc.stability.threshold = threshold;
    cfg.lc.stability.seed = seed;
    cfg.kernel.seed = seed;
    Ok(cfg)
}

fn cmd_fit(args: FitArgs) -> Result<i32> {
    let method = Method::from_str(&args.method)?;
    if matches!(method, Method::DiversityTwoSls | Method::DiversityKiv) {
        return Err(Error::invalid(format!(
            "{} is served by the diversity-iv subcommand",
            args.method
        )));
    }
    let ds = read_dataset_csv(&args.data, args.pseudo_count)?;
    let cfg = fit_config(args.threshold, &args.loss, resolve_seed(args.seed)?)?;

    match fit_method(&ds, method, &cfg) {
        Ok(fit) => {
            write_json(&args.out, &fit)?;
            println!("wrote {}", args.out.display());
            if fit.diagnostics.converged {
                Ok(0)
            } else {
                eprintln!("error: fit did not converge; diagnostics written");
                Ok(3)
            }
        }
        // A non-convergence report still carries diagnostics worth keeping.
        Err(Error::NonConvergence(report)) => {
            write_json(
                &args.out,
                &serde_json::json!({
                    "error": "non-convergence",
                    "diagnostics": &report,
                }),
            )?;
            eprintln!("error: {}; diagnostics written", Error::NonConvergence(report));
            Ok(3)
        }
        Err(e) => Err(e),
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<i32> {
    let fit: CausalFit = read_json(&args.fit)?;
    let truth = read_json(&args.truth)?;
    let xs = read_compositions_csv(&args.interventions)?;
    let report = evaluate(&fit, &truth, &xs)?;
    match &args.out {
        Some(path) => {
            write_json(path, &report)?;
            println!("wrote {}", path.display());
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(0)
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<i32> {
    let config: ExperimentConfig = read_json(&args.config)?;
    let scenarios = config
        .scenarios
        .iter()
        .map(|s| s.resolve())
        .collect::<Result<Vec<_>>>()?;
    let cfg = fit_config(config.threshold, "squared", config.base_seed)?;

    let table = match args.jobs {
        Some(jobs) => {
            if jobs == 0 {
                return Err(Error::invalid("--jobs must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            pool.install(|| {
                benchmark(&scenarios, &config.methods, config.n_seeds, config.base_seed, &cfg)
            })?
        }
        None => benchmark(&scenarios, &config.methods, config.n_seeds, config.base_seed, &cfg)?,
    };

    print!("{}", table.to_aligned_text());
    let csv_path = args.out_csv.or(config.output.csv);
    let text_path = args.out_text.or(config.output.text);
    let jsonl_path = args.out_jsonl.or(config.output.jsonl);
    if let Some(path) = csv_path {
        create_parent_dirs(&path)?;
        std::fs::write(&path, table.to_csv())?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = text_path {
        create_parent_dirs(&path)?;
        std::fs::write(&path, table.to_aligned_text())?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = jsonl_path {
        create_parent_dirs(&path)?;
        std::fs::write(&path, table.records_jsonl())?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn cmd_diversity_iv(args: DiversityArgs) -> Result<i32> {
    let measure = Diversity::from_str(&args.measure)?;
    let ds = read_dataset_csv(&args.data, args.pseudo_count)?;
    let seed = resolve_seed(args.seed)?;
    let scalar = match args.method.as_str() {
        "2sls" => ScalarMethod::TwoSls,
        "kiv" => {
            let mut cfg = compiv::iv::KernelConfig::default();
            cfg.seed = seed;
            ScalarMethod::Kiv(cfg)
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown diversity method {other:?}; use 2sls or kiv"
            )))
        }
    };
    let fit = fit_diversity_iv(&ds, measure, &scalar)?;
    write_json(&args.out, &fit)?;
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn cmd_ingest(args: IngestArgs) -> Result<i32> {
    let opts = IngestOptions {
        instrument_col: args.instrument_col,
        outcome_col: args.outcome_col,
        binary_outcome: args.binary,
        pseudo_count: args.pseudo_count,
    };
    let ds = ingest_counts_csv(&args.counts_csv, &opts)?;
    create_parent_dirs(&args.out)?;
    write_dataset_csv(&args.out, &ds)?;
    println!(
        "wrote {} ({} samples, {} taxa, 1 instrument)",
        args.out.display(),
        ds.n(),
        ds.p()
    );
    Ok(0)
}
