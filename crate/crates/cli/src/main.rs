//! Command-line driver: dataset inspection, coverage dumps, one-shot
//! resampling, the experiment grids and report regeneration.
//!
//! Every command that writes files echoes its resolved parameters to
//! `runconfig.json` in the output directory, so a run can be reproduced
//! from its outputs alone. Input files are never modified.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fair_onb::dataset::{self, Dataset, SchemaConfig};
use fair_onb::experiments::{self, ExperimentReport, GridOptions};
use fair_onb::fawos::{self, FawosConfig};
use fair_onb::groups::{self, AssessmentSource, Strategy};
use fair_onb::metrics::Di;
use fair_onb::undersample::{self, ThresholdConfig};
use fair_onb::{coverage, tree, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fair-onb",
    version,
    about = "Fairness-aware resampling driven by open-ball coverage geometry",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV (header row; one class column; features as declared in
    /// the schema)
    #[arg(long)]
    data: PathBuf,
    /// Schema JSON declaring class, positive value, protected, binary and
    /// numeric features
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// Output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
    /// RNG seed
    #[arg(long, default_value_t = 30)]
    seed: u64,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Comma-separated percentile levels swept per threshold axis
    #[arg(long, default_value = "0,5,10,15,20", value_parser = parse_levels)]
    levels: std::vec::Vec<u8>,
    /// Restrict the sweep to one strategy (default: both)
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    /// Where outcome rates come from when assessing bias
    #[arg(long, default_value = "dataset", value_parser = parse_source)]
    assess: AssessmentSource,
    /// Cap on worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a dataset: size, groups, per-feature bias
    Inspect {
        #[command(flatten)]
        data: DataArgs,
        /// Optional output directory for inspect.json
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "dataset", value_parser = parse_source)]
        assess: AssessmentSource,
        #[arg(long, default_value_t = 30)]
        seed: u64,
    },
    /// Build the pure-group ball coverage and dump it as CSV
    Coverage {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Undersample once with fixed percentile thresholds
    Preprocess {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        /// Radius, count and density percentiles, e.g. 5,15,10
        #[arg(long, value_parser = parse_pct)]
        pct: PctTriple,
        #[arg(long, default_value = "union", value_parser = parse_strategy)]
        strategy: Strategy,
        #[arg(long, default_value = "dataset", value_parser = parse_source)]
        assess: AssessmentSource,
        #[arg(long, default_value_t = 30)]
        seed: u64,
    },
    /// Oversample disadvantaged groups once with fixed weights
    Fawos {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        /// Safe, borderline and rare seed weights, e.g. 0,0.5,0.5
        #[arg(long, default_value = "0,0.5,0.5", value_parser = parse_weights)]
        fawos_weights: WeightTriple,
        /// Multiplier on the group-size deficit
        #[arg(long, default_value_t = 1.0)]
        fawos_factor: f64,
        #[arg(long, default_value = "dataset", value_parser = parse_source)]
        assess: AssessmentSource,
        #[arg(long, default_value_t = 30)]
        seed: u64,
    },
    /// Sweep the percentile-threshold grid over cross-validation folds
    Grid {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run both the threshold grid and the oversampling grid, then compare
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Regenerate summary outputs from a run directory's reports.json
    Report {
        /// Directory holding reports.json from a previous grid run
        #[arg(long)]
        out: PathBuf,
    },
}

// Comma-triple wrappers keep clap's value parsing simple.
#[derive(Debug, Clone, Copy)]
struct PctTriple(u8, u8, u8);
#[derive(Debug, Clone, Copy)]
struct WeightTriple(f64, f64, f64);

fn parse_pct(s: &str) -> Result<PctTriple, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated percentiles, e.g. 5,15,10".into());
    }
    let mut vals = [0u8; 3];
    for (i, p) in parts.iter().enumerate() {
        vals[i] = p
            .trim()
            .parse()
            .map_err(|_| format!("'{p}' is not a percentile in 0..=100"))?;
        if vals[i] > 100 {
            return Err(format!("percentile {} exceeds 100", vals[i]));
        }
    }
    Ok(PctTriple(vals[0], vals[1], vals[2]))
}

fn parse_levels(s: &str) -> Result<Vec<u8>, String> {
    let mut levels = Vec::new();
    for p in s.split(',') {
        let v: u8 = p
            .trim()
            .parse()
            .map_err(|_| format!("'{p}' is not a percentile in 0..=100"))?;
        if v > 100 {
            return Err(format!("percentile {v} exceeds 100"));
        }
        levels.push(v);
    }
    if levels.is_empty() {
        return Err("expected at least one percentile level".into());
    }
    Ok(levels)
}

fn parse_weights(s: &str) -> Result<WeightTriple, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated weights, e.g. 0,0.5,0.5".into());
    }
    let mut vals = [0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        vals[i] = p
            .trim()
            .parse()
            .map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(WeightTriple(vals[0], vals[1], vals[2]))
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_source(s: &str) -> Result<AssessmentSource, String> {
    match s {
        "dataset" => Ok(AssessmentSource::Dataset),
        "model" => Ok(AssessmentSource::Model),
        other => Err(format!("'{other}' is not one of: dataset, model")),
    }
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

type CmdResult<T> = Result<T, Failure>;

fn data_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_DATA,
        message: message.into(),
    }
}

/// Errors during command execution: bad data/config exits 2, everything
/// else 3.
fn run_failure(e: Error) -> Failure {
    Failure {
        code: if e.is_data_error() { EXIT_DATA } else { EXIT_RUNTIME },
        message: e.to_string(),
    }
}

fn io_failure(e: std::io::Error, path: &Path) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CmdResult<()> {
    match command {
        Command::Inspect { data, out, assess, seed } => cmd_inspect(&data, out.as_deref(), assess, seed),
        Command::Coverage { data, out } => cmd_coverage(&data, &out),
        Command::Preprocess { data, out, pct, strategy, assess, seed } => {
            cmd_preprocess(&data, &out, pct, strategy, assess, seed)
        }
        Command::Fawos { data, out, fawos_weights, fawos_factor, assess, seed } => {
            cmd_fawos(&data, &out, fawos_weights, fawos_factor, assess, seed)
        }
        Command::Grid { data, grid } => cmd_grid(&data, &grid),
        Command::Compare { data, grid } => cmd_compare(&data, &grid),
        Command::Report { out } => cmd_report(&out),
    }
}

/// Load the schema and dataset; every failure here is a data/schema
/// problem (exit 2).
fn load_inputs(args: &DataArgs) -> CmdResult<Dataset> {
    if !args.schema.exists() {
        return Err(data_failure(format!(
            "schema file not found: {}",
            args.schema.display()
        )));
    }
    if !args.data.exists() {
        return Err(data_failure(format!(
            "data file not found: {}",
            args.data.display()
        )));
    }
    let cfg = SchemaConfig::from_path(&args.schema)
        .map_err(|e| data_failure(format!("{}: {e}", args.schema.display())))?;
    dataset::load_csv(&args.data, &cfg)
        .map_err(|e| data_failure(format!("{}: {e}", args.data.display())))
}

fn ensure_out(out: &Path) -> CmdResult<()> {
    std::fs::create_dir_all(out).map_err(|e| io_failure(e, out))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> CmdResult<()> {
    let path = out.join(name);
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| run_failure(e.into()))?;
    std::fs::write(&path, text + "\n").map_err(|e| io_failure(e, &path))
}

/// Parameter echo written next to every command's outputs.
#[derive(Serialize)]
struct RunConfig {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schema: Option<PathBuf>,
    out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pct: Option<(u8, u8, u8)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fawos_weights: Option<(f64, f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fawos_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assess: Option<AssessmentSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jobs: Option<usize>,
}

impl RunConfig {
    fn new(command: &str, out: &Path) -> Self {
        RunConfig {
            command: command.into(),
            data: None,
            schema: None,
            out: out.to_path_buf(),
            seed: None,
            folds: None,
            pct: None,
            strategy: None,
            levels: None,
            fawos_weights: None,
            fawos_factor: None,
            assess: None,
            jobs: None,
        }
    }

    fn with_data(mut self, args: &DataArgs) -> Self {
        self.data = Some(args.data.clone());
        self.schema = Some(args.schema.clone());
        self
    }
}

fn di_text(di: &Di) -> String {
    match di {
        Di::Finite(v) => format!("{v:.4}"),
        Di::Infinite => "inf".into(),
        Di::Undefined => "undefined".into(),
    }
}

fn cmd_inspect(
    args: &DataArgs,
    out: Option<&Path>,
    assess: AssessmentSource,
    seed: u64,
) -> CmdResult<()> {
    let ds = load_inputs(args)?;
    let table = groups::enumerate_groups(&ds).map_err(run_failure)?;
    let group_of = groups::assign_groups(&ds, &table);
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &g in &group_of {
        *sizes.entry(g).or_insert(0) += 1;
    }
    let outcomes = match assess {
        AssessmentSource::Dataset => ds.labels().to_vec(),
        AssessmentSource::Model => tree::fit(&ds, seed)
            .and_then(|m| m.predict(&ds))
            .map_err(run_failure)?,
    };
    let assessment = groups::assess_bias(&ds, &outcomes, assess).map_err(run_failure)?;

    let positives = ds.labels().iter().filter(|&&l| l == 1).count();
    println!("rows: {}", ds.n_rows());
    println!("features: {}", ds.n_features());
    println!(
        "protected: {}",
        ds.schema().protected_features.join(", ")
    );
    println!(
        "class: {} (positive rate {:.3})",
        ds.schema().class_name,
        positives as f64 / ds.n_rows() as f64
    );
    println!("groups:");
    for (values, class, id) in table.entries() {
        let size = sizes.get(&id).copied().unwrap_or(0);
        let desc: Vec<String> = table
            .protected_order
            .iter()
            .zip(&values)
            .map(|(name, v)| format!("{name}={v}"))
            .collect();
        println!("  {id}: {} class={class} size={size}", desc.join(" "));
    }
    println!("bias ({}):", if assess == AssessmentSource::Dataset { "dataset labels" } else { "model predictions" });
    for f in &assessment.per_feature {
        let favored = match f.favored_value {
            Some(v) => format!("favored value {v}"),
            None => "no favored value".into(),
        };
        println!("  {}: di={} ({favored})", f.feature, di_text(&f.di));
    }

    if let Some(out) = out {
        ensure_out(out)?;
        #[derive(Serialize)]
        struct GroupInfo {
            id: usize,
            values: Vec<u8>,
            class: u8,
            size: usize,
        }
        #[derive(Serialize)]
        struct Inspect<'a> {
            n_rows: usize,
            n_features: usize,
            protected: &'a [String],
            class_name: &'a str,
            positive_rate: f64,
            groups: Vec<GroupInfo>,
            assessment: &'a groups::BiasAssessment,
        }
        let info = Inspect {
            n_rows: ds.n_rows(),
            n_features: ds.n_features(),
            protected: &ds.schema().protected_features,
            class_name: &ds.schema().class_name,
            positive_rate: positives as f64 / ds.n_rows() as f64,
            groups: table
                .entries()
                .into_iter()
                .map(|(values, class, id)| GroupInfo {
                    id,
                    values,
                    class,
                    size: sizes.get(&id).copied().unwrap_or(0),
                })
                .collect(),
            assessment: &assessment,
        };
        write_json(out, "inspect.json", &info)?;
        let mut rc = RunConfig::new("inspect", out).with_data(args);
        rc.assess = Some(assess);
        rc.seed = Some(seed);
        write_json(out, "runconfig.json", &rc)?;
    }
    Ok(())
}

fn cmd_coverage(args: &DataArgs, out: &Path) -> CmdResult<()> {
    let ds = load_inputs(args)?;
    let table = groups::enumerate_groups(&ds).map_err(run_failure)?;
    let group_of = groups::assign_groups(&ds, &table);
    let observed = group_of.iter().copied().collect();
    let cov = coverage::build_coverage(&ds, &group_of, &observed).map_err(run_failure)?;
    ensure_out(out)?;
    cov.write_csv(&out.join("coverage.csv")).map_err(run_failure)?;

    #[derive(Serialize)]
    struct CoverageInfo {
        n_balls: usize,
        n_degenerate: usize,
        balls_per_group: BTreeMap<usize, usize>,
    }
    let mut balls_per_group = BTreeMap::new();
    for b in &cov.balls {
        *balls_per_group.entry(b.group_id).or_insert(0) += 1;
    }
    write_json(
        out,
        "coverage.json",
        &CoverageInfo {
            n_balls: cov.balls.len(),
            n_degenerate: cov.balls.iter().filter(|b| b.is_degenerate()).count(),
            balls_per_group,
        },
    )?;
    write_json(out, "runconfig.json", &RunConfig::new("coverage", out).with_data(args))?;
    println!(
        "{} balls over {} groups -> {}",
        cov.balls.len(),
        cov.group_ids.len(),
        out.join("coverage.csv").display()
    );
    Ok(())
}

fn cmd_preprocess(
    args: &DataArgs,
    out: &Path,
    pct: PctTriple,
    strategy: Strategy,
    assess: AssessmentSource,
    seed: u64,
) -> CmdResult<()> {
    let ds = load_inputs(args)?;
    let cfg = ThresholdConfig {
        pct_radius: pct.0,
        pct_count: pct.1,
        pct_density: pct.2,
        strategy,
    };
    let outcome = undersample::preprocess(&ds, &cfg, assess, seed).map_err(run_failure)?;
    ensure_out(out)?;
    let reduced = out.join("reduced.csv");
    outcome.dataset.write_csv(&reduced).map_err(run_failure)?;

    #[derive(Serialize)]
    struct PreprocessInfo<'a> {
        assessment: &'a groups::BiasAssessment,
        targets: Vec<usize>,
        resolved: undersample::ResolvedThresholds,
        resolved_per_group: &'a BTreeMap<groups::GroupId, undersample::ResolvedThresholds>,
        rows_before: usize,
        rows_after: usize,
        removed_rows: Vec<usize>,
        removed_balls: usize,
        warnings: &'a [String],
    }
    write_json(
        out,
        "preprocess.json",
        &PreprocessInfo {
            assessment: &outcome.assessment,
            targets: outcome.targets.iter().copied().collect(),
            resolved: outcome.result.resolved,
            resolved_per_group: &outcome.result.resolved_per_group,
            rows_before: ds.n_rows(),
            rows_after: outcome.dataset.n_rows(),
            removed_rows: outcome.result.removed_rows.iter().copied().collect(),
            removed_balls: outcome.result.removed_balls.len(),
            warnings: &outcome.result.warnings,
        },
    )?;
    let mut rc = RunConfig::new("preprocess", out).with_data(args);
    rc.pct = Some((pct.0, pct.1, pct.2));
    rc.strategy = Some(strategy.as_str().into());
    rc.assess = Some(assess);
    rc.seed = Some(seed);
    write_json(out, "runconfig.json", &rc)?;
    for w in &outcome.result.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "kept {} of {} rows -> {}",
        outcome.dataset.n_rows(),
        ds.n_rows(),
        reduced.display()
    );
    Ok(())
}

fn cmd_fawos(
    args: &DataArgs,
    out: &Path,
    weights: WeightTriple,
    factor: f64,
    assess: AssessmentSource,
    seed: u64,
) -> CmdResult<()> {
    let ds = load_inputs(args)?;
    let cfg = FawosConfig {
        weights: (weights.0, weights.1, weights.2),
        factor,
    };
    cfg.validate().map_err(run_failure)?;
    let outcomes = match assess {
        AssessmentSource::Dataset => ds.labels().to_vec(),
        AssessmentSource::Model => tree::fit(&ds, seed)
            .and_then(|m| m.predict(&ds))
            .map_err(run_failure)?,
    };
    let assessment = groups::assess_bias(&ds, &outcomes, assess).map_err(run_failure)?;
    ensure_out(out)?;
    let augmented = out.join("augmented.csv");

    let (result_ds, added_per_group, warnings) = if assessment.is_unbiased() {
        (ds.clone(), BTreeMap::new(), vec![
            "dataset shows no favored value; nothing to oversample".to_string(),
        ])
    } else {
        let table = groups::enumerate_groups(&ds).map_err(run_failure)?;
        let group_of = groups::assign_groups(&ds, &table);
        let observed: std::collections::BTreeSet<usize> = group_of.iter().copied().collect();
        let targets: std::collections::BTreeSet<usize> =
            groups::disadvantaged_groups(&table, &assessment)
                .map_err(run_failure)?
                .intersection(&observed)
                .copied()
                .collect();
        if targets.is_empty() {
            (ds.clone(), BTreeMap::new(), vec![
                "no disadvantaged group present in the data; nothing to oversample".to_string(),
            ])
        } else {
            let o = fawos::oversample(&ds, &targets, &cfg, seed).map_err(run_failure)?;
            (o.dataset, o.added_per_group, o.warnings)
        }
    };
    result_ds.write_csv(&augmented).map_err(run_failure)?;

    #[derive(Serialize)]
    struct FawosInfo<'a> {
        assessment: &'a groups::BiasAssessment,
        added_per_group: &'a BTreeMap<usize, usize>,
        rows_before: usize,
        rows_after: usize,
        warnings: &'a [String],
    }
    write_json(
        out,
        "fawos.json",
        &FawosInfo {
            assessment: &assessment,
            added_per_group: &added_per_group,
            rows_before: ds.n_rows(),
            rows_after: result_ds.n_rows(),
            warnings: &warnings,
        },
    )?;
    let mut rc = RunConfig::new("fawos", out).with_data(args);
    rc.fawos_weights = Some(cfg.weights);
    rc.fawos_factor = Some(cfg.factor);
    rc.assess = Some(assess);
    rc.seed = Some(seed);
    write_json(out, "runconfig.json", &rc)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "added {} rows -> {}",
        result_ds.n_rows() - ds.n_rows(),
        augmented.display()
    );
    Ok(())
}

fn grid_options(grid: &GridArgs) -> GridOptions {
    GridOptions {
        folds: grid.folds,
        seed: grid.seed,
        levels: grid.levels.clone(),
        strategies: match grid.strategy {
            Some(s) => vec![s],
            None => vec![Strategy::Union, Strategy::Intersection],
        },
        source: grid.assess,
    }
}

fn apply_jobs(jobs: Option<usize>) -> CmdResult<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(data_failure("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                code: EXIT_RUNTIME,
                message: format!("thread pool: {e}"),
            })?;
    }
    Ok(())
}

fn grid_runconfig(command: &str, args: &DataArgs, grid: &GridArgs) -> RunConfig {
    let mut rc = RunConfig::new(command, &grid.out).with_data(args);
    rc.seed = Some(grid.seed);
    rc.folds = Some(grid.folds);
    rc.levels = Some(grid.levels.clone());
    rc.strategy = grid.strategy.map(|s| s.as_str().to_string());
    rc.assess = Some(grid.assess);
    rc.jobs = grid.jobs;
    rc
}

/// Write report.csv / summary.csv / plotdata / best.json / reports.json
/// for one report set. Returns the selection for printing.
fn emit_grid_outputs(
    out: &Path,
    prefix: &str,
    reports: &[ExperimentReport],
    features: &[String],
) -> CmdResult<experiments::BestSelection> {
    let best = experiments::select_best(reports).map_err(run_failure)?;
    let name = |base: &str| {
        if prefix.is_empty() {
            base.to_string()
        } else {
            format!("{prefix}_{base}")
        }
    };
    experiments::write_report_csv(reports, &out.join(name("report.csv"))).map_err(run_failure)?;
    experiments::write_summary_csv(reports, Some(&best), &out.join(name("summary.csv")))
        .map_err(run_failure)?;
    let has_thresholds = reports
        .iter()
        .any(|r| matches!(r.kind, experiments::ConfigKind::Threshold(_)));
    if has_thresholds {
        for feature in features {
            let path = out.join(name(&format!("plotdata_{feature}.csv")));
            match experiments::write_plotdata_csv(reports, feature, &path) {
                Ok(()) => {}
                // No resolved thresholds anywhere (e.g. unbiased data): the
                // plot axis does not exist, which should not sink the run.
                Err(e) => eprintln!("warning: skipping {}: {e}", path.display()),
            }
        }
    }
    write_json(out, &name("best.json"), &best)?;
    write_json(out, &name("reports.json"), &reports)?;
    Ok(best)
}

fn cmd_grid(args: &DataArgs, grid: &GridArgs) -> CmdResult<()> {
    apply_jobs(grid.jobs)?;
    let ds = load_inputs(args)?;
    let opts = grid_options(grid);
    let reports = experiments::run_grid(&ds, &opts).map_err(run_failure)?;
    ensure_out(&grid.out)?;
    let best = emit_grid_outputs(&grid.out, "", &reports, &ds.schema().protected_features)?;
    write_json(&grid.out, "runconfig.json", &grid_runconfig("grid", args, grid))?;
    println!("{} configurations over {} folds", reports.len(), opts.folds);
    println!("best global: {}", best.best_global);
    for (feature, id) in &best.best_per_feature {
        println!("best for {feature}: {id}");
    }
    println!("best auc: {}", best.best_auc);
    Ok(())
}

fn cmd_compare(args: &DataArgs, grid: &GridArgs) -> CmdResult<()> {
    apply_jobs(grid.jobs)?;
    let ds = load_inputs(args)?;
    let opts = grid_options(grid);
    let onb = experiments::run_grid(&ds, &opts).map_err(run_failure)?;
    let fw = experiments::run_fawos_grid(&ds, &opts, &experiments::canonical_fawos_configs())
        .map_err(run_failure)?;
    ensure_out(&grid.out)?;
    emit_grid_outputs(&grid.out, "onb", &onb, &ds.schema().protected_features)?;
    emit_grid_outputs(&grid.out, "fawos", &fw, &ds.schema().protected_features)?;
    let rows = experiments::build_comparison(&onb, &fw).map_err(run_failure)?;

    let cmp_path = grid.out.join("compare.csv");
    let mut text = String::from(
        "method,config_id,feature,mean_adi,total_adi_distance,mean_auc,mean_accuracy\n",
    );
    for row in &rows {
        for (feature, adi) in &row.per_feature_adi {
            text.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.method,
                row.config_id,
                feature,
                adi,
                row.total_adi_distance,
                row.mean_auc,
                row.mean_accuracy
            ));
        }
    }
    std::fs::write(&cmp_path, &text).map_err(|e| io_failure(e, &cmp_path))?;
    write_json(&grid.out, "compare.json", &rows)?;
    write_json(&grid.out, "runconfig.json", &grid_runconfig("compare", args, grid))?;

    println!("method        config                      total ADI dist   AUC      accuracy");
    for row in &rows {
        println!(
            "{:<13} {:<27} {:<16.4} {:<8.4} {:.4}",
            row.method, row.config_id, row.total_adi_distance, row.mean_auc, row.mean_accuracy
        );
    }
    Ok(())
}

fn cmd_report(out: &Path) -> CmdResult<()> {
    let mut regenerated = 0;
    for prefix in ["", "onb", "fawos"] {
        let name = |base: &str| {
            if prefix.is_empty() {
                base.to_string()
            } else {
                format!("{prefix}_{base}")
            }
        };
        let path = out.join(name("reports.json"));
        if !path.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(|e| io_failure(e, &path))?;
        let reports: Vec<ExperimentReport> = serde_json::from_str(&text)
            .map_err(|e| data_failure(format!("{}: {e}", path.display())))?;
        let features: Vec<String> = reports
            .iter()
            .find_map(|r| {
                r.aggregated
                    .as_ref()
                    .map(|a| a.per_feature.iter().map(|f| f.feature.clone()).collect())
            })
            .unwrap_or_default();
        emit_grid_outputs(out, prefix, &reports, &features)?;
        regenerated += 1;
    }
    if regenerated == 0 {
        return Err(data_failure(format!(
            "no reports.json found under {}",
            out.display()
        )));
    }
    println!("regenerated {regenerated} report set(s) under {}", out.display());
    Ok(())
}
