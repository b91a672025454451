//! Grid experiments over stratified folds: the percentile-threshold sweep,
//! the oversampling baseline sweep, best-configuration selection and the
//! CSV report writers.
//!
//! Per fold, the training split is rescaled to its own feature ranges (the
//! test split follows those ranges, clamped), bias is assessed on the
//! training split, and one coverage is built and shared by every
//! configuration of that fold. Test rows are never resampled.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{self, Coverage};
use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::fawos::{self, FawosConfig};
use crate::groups::{self, AssessmentSource, BiasAssessment, GroupId, GroupTable, Strategy};
use crate::metrics::{self, FairnessReport, FeatureFairness, GroupOutcomeCounts};
use crate::tree;
use crate::undersample::{self, ResolvedThresholds, ThresholdConfig};

/// Shared experiment settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridOptions {
    pub folds: usize,
    pub seed: u64,
    /// Percentile levels swept on each threshold axis.
    pub levels: Vec<u8>,
    pub strategies: Vec<Strategy>,
    pub source: AssessmentSource,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            folds: 5,
            seed: 30,
            levels: vec![0, 5, 10, 15, 20],
            strategies: vec![Strategy::Union, Strategy::Intersection],
            source: AssessmentSource::Dataset,
        }
    }
}

/// What a report row was produced by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConfigKind {
    Baseline,
    Threshold(ThresholdConfig),
    Fawos(FawosConfig),
}

/// Metrics of one successful fold evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub per_feature: Vec<FeatureFairness>,
    pub auc: f64,
    pub accuracy: f64,
    pub removed: usize,
    pub added: usize,
    pub resolved: Option<ResolvedThresholds>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FoldOutcome {
    Metrics(FoldMetrics),
    Failed(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub outcome: FoldOutcome,
}

/// Across-fold means for one protected feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureAggregate {
    pub feature: String,
    pub mean_di: f64,
    pub mean_adi: f64,
    pub mean_spd: f64,
    pub mean_eod: Option<f64>,
    /// False when any fold hit a DI sentinel; such configs are kept in the
    /// reports but never win DI-based selection.
    pub di_all_finite: bool,
}

/// Arithmetic means over the folds of one configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregated {
    pub per_feature: Vec<FeatureAggregate>,
    pub mean_auc: f64,
    pub mean_accuracy: f64,
    pub mean_removed: f64,
    pub mean_added: f64,
    pub mean_radius_thr: Option<f64>,
    /// Σ over features of |mean DI − 1|; `None` when any fold DI was a
    /// sentinel.
    pub total_di_distance: Option<f64>,
    /// Σ over features of |mean ADI − 1|; always defined.
    pub total_adi_distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_id: String,
    pub kind: ConfigKind,
    pub folds: Vec<FoldRecord>,
    /// `None` when any fold failed outright.
    pub aggregated: Option<Aggregated>,
}

impl ExperimentReport {
    pub fn is_baseline(&self) -> bool {
        matches!(self.kind, ConfigKind::Baseline)
    }
}

/// Everything the per-config evaluations of one fold share.
struct FoldContext {
    train: Dataset,
    test: Dataset,
    table: GroupTable,
    observed: BTreeSet<GroupId>,
    assessment: BiasAssessment,
    coverage: Coverage,
}

fn prepare_fold(
    ds: &Dataset,
    plan: &dataset::FoldPlan,
    fold: usize,
    source: AssessmentSource,
    seed: u64,
) -> Result<FoldContext> {
    let train_raw = ds.select_positions(&plan.train_positions(fold));
    let ranges = train_raw.numeric_ranges();
    let train = train_raw.renormalize(&ranges, false);
    let test = ds.select_positions(&plan.test_positions(fold)).renormalize(&ranges, true);

    let outcomes = match source {
        AssessmentSource::Dataset => train.labels().to_vec(),
        AssessmentSource::Model => tree::fit(&train, seed)?.predict(&train)?,
    };
    let assessment = groups::assess_bias(&train, &outcomes, source)?;
    let table = groups::enumerate_groups(&train)?;
    let group_of = groups::assign_groups(&train, &table);
    let observed: BTreeSet<GroupId> = group_of.iter().copied().collect();
    let coverage = coverage::build_coverage(&train, &group_of, &observed)?;
    Ok(FoldContext {
        train,
        test,
        table,
        observed,
        assessment,
        coverage,
    })
}

/// Train on the (possibly resampled) split, evaluate on the untouched test
/// split.
fn evaluate_split(
    train: &Dataset,
    test: &Dataset,
    seed: u64,
    removed: usize,
    added: usize,
    resolved: Option<ResolvedThresholds>,
) -> Result<FoldMetrics> {
    let model = tree::fit(train, seed)?;
    let preds = model.predict(test)?;
    let scores = model.scores(test)?;
    let accuracy = metrics::accuracy(&preds, test.labels())?;
    let auc = metrics::auc(&scores, test.labels())?;
    let mut counts = Vec::new();
    for feature in &test.schema().protected_features {
        let protected = test.protected_values(feature)?;
        counts.push((
            feature.clone(),
            GroupOutcomeCounts::from_predictions(&protected, &preds, test.labels())?,
        ));
    }
    let fairness = FairnessReport::from_counts(&counts)?;
    Ok(FoldMetrics {
        per_feature: fairness.per_feature,
        auc,
        accuracy,
        removed,
        added,
        resolved,
    })
}

fn eval_threshold_config(
    ctx: &FoldContext,
    cfg: Option<&ThresholdConfig>,
    seed: u64,
) -> Result<FoldMetrics> {
    let Some(cfg) = cfg else {
        return evaluate_split(&ctx.train, &ctx.test, seed, 0, 0, None);
    };
    let targets: BTreeSet<GroupId> = if ctx.assessment.is_unbiased() {
        BTreeSet::new()
    } else {
        groups::select_target_groups(&ctx.table, &ctx.assessment, cfg.strategy)?
            .intersection(&ctx.observed)
            .copied()
            .collect()
    };
    let res = undersample::undersample(&ctx.train, &ctx.coverage, &targets, cfg)?;
    let reduced = ctx.train.filter_ids(&res.kept_rows);
    evaluate_split(
        &reduced,
        &ctx.test,
        seed,
        res.removed_rows.len(),
        0,
        Some(res.resolved),
    )
}

fn eval_fawos_config(
    ctx: &FoldContext,
    cfg: &FawosConfig,
    seed: u64,
) -> Result<FoldMetrics> {
    if ctx.assessment.is_unbiased() {
        return evaluate_split(&ctx.train, &ctx.test, seed, 0, 0, None);
    }
    let targets: BTreeSet<GroupId> = groups::disadvantaged_groups(&ctx.table, &ctx.assessment)?
        .intersection(&ctx.observed)
        .copied()
        .collect();
    if targets.is_empty() {
        return evaluate_split(&ctx.train, &ctx.test, seed, 0, 0, None);
    }
    let out = fawos::oversample(&ctx.train, &targets, cfg, seed)?;
    let added: usize = out.added_per_group.values().sum();
    evaluate_split(&out.dataset, &ctx.test, seed, 0, added, None)
}

/// Distinct RNG stream per (config, fold) so parallel evaluation order
/// cannot influence results.
fn derived_seed(seed: u64, config_index: usize, fold: usize) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add(config_index as u64 * 131)
        .wrapping_add(fold as u64)
}

fn threshold_config_id(cfg: &ThresholdConfig) -> String {
    format!(
        "{}-r{:03}-c{:03}-d{:03}",
        cfg.strategy.as_str(),
        cfg.pct_radius,
        cfg.pct_count,
        cfg.pct_density
    )
}

fn fawos_config_id(cfg: &FawosConfig) -> String {
    format!(
        "fawos-s{:.2}-b{:.2}-r{:.2}-f{:.2}",
        cfg.weights.0, cfg.weights.1, cfg.weights.2, cfg.factor
    )
}

/// The canonical 12 oversampling configurations: 4 weight rows × 3 factors.
pub fn canonical_fawos_configs() -> Vec<FawosConfig> {
    let mut cfgs = Vec::new();
    for &weights in &fawos::WEIGHT_ROWS {
        for &factor in &fawos::FACTORS {
            cfgs.push(FawosConfig { weights, factor });
        }
    }
    cfgs
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n as f64
}

fn aggregate(folds: &[FoldRecord], features: &[String]) -> Option<Aggregated> {
    let metrics: Vec<&FoldMetrics> = folds
        .iter()
        .map(|f| match &f.outcome {
            FoldOutcome::Metrics(m) => Some(m),
            FoldOutcome::Failed(_) => None,
        })
        .collect::<Option<Vec<_>>>()?;

    let mut per_feature = Vec::new();
    for (fi, feature) in features.iter().enumerate() {
        let di_all_finite = metrics.iter().all(|m| m.per_feature[fi].di.is_finite());
        let eods: Vec<f64> = metrics
            .iter()
            .filter_map(|m| m.per_feature[fi].eod)
            .collect();
        per_feature.push(FeatureAggregate {
            feature: feature.clone(),
            mean_di: mean(metrics.iter().map(|m| m.per_feature[fi].di.report_value())),
            mean_adi: mean(metrics.iter().map(|m| m.per_feature[fi].adi)),
            mean_spd: mean(metrics.iter().map(|m| m.per_feature[fi].spd)),
            mean_eod: if eods.len() == metrics.len() {
                Some(mean(eods.iter().copied()))
            } else {
                None
            },
            di_all_finite,
        });
    }
    let total_di_distance = per_feature
        .iter()
        .map(|f| f.di_all_finite.then_some((f.mean_di - 1.0).abs()))
        .sum::<Option<f64>>();
    let total_adi_distance = per_feature.iter().map(|f| (f.mean_adi - 1.0).abs()).sum();
    let resolved: Vec<f64> = metrics
        .iter()
        .filter_map(|m| m.resolved.map(|r| r.radius_thr))
        .collect();
    Some(Aggregated {
        mean_auc: mean(metrics.iter().map(|m| m.auc)),
        mean_accuracy: mean(metrics.iter().map(|m| m.accuracy)),
        mean_removed: mean(metrics.iter().map(|m| m.removed as f64)),
        mean_added: mean(metrics.iter().map(|m| m.added as f64)),
        mean_radius_thr: if resolved.len() == metrics.len() {
            Some(mean(resolved.iter().copied()))
        } else {
            None
        },
        per_feature,
        total_di_distance,
        total_adi_distance,
    })
}

enum GridConfig {
    Threshold(Option<ThresholdConfig>),
    Fawos(FawosConfig),
}

fn run_configs(
    ds: &Dataset,
    opts: &GridOptions,
    configs: Vec<(String, GridConfig)>,
) -> Result<Vec<ExperimentReport>> {
    let plan = dataset::stratified_folds(ds, opts.folds, opts.seed)?;
    let features = ds.schema().protected_features.clone();
    let mut fold_records: Vec<Vec<FoldRecord>> = (0..configs.len()).map(|_| Vec::new()).collect();
    for fold in 0..opts.folds {
        let ctx = prepare_fold(ds, &plan, fold, opts.source, opts.seed)?;
        // The test split is carved out before any sampling and never
        // reenters; its row ids come straight from the plan.
        debug_assert_eq!(
            ctx.test.row_ids(),
            plan.test_positions(fold)
                .iter()
                .map(|&p| ds.row_ids()[p])
                .collect::<Vec<_>>()
                .as_slice()
        );
        let records: Vec<FoldRecord> = configs
            .par_iter()
            .enumerate()
            .map(|(ci, (_, cfg))| {
                let seed = derived_seed(opts.seed, ci, fold);
                let result = match cfg {
                    GridConfig::Threshold(t) => eval_threshold_config(&ctx, t.as_ref(), seed),
                    GridConfig::Fawos(f) => eval_fawos_config(&ctx, f, seed),
                };
                FoldRecord {
                    fold,
                    outcome: match result {
                        Ok(m) => FoldOutcome::Metrics(m),
                        Err(e) => FoldOutcome::Failed(e.to_string()),
                    },
                }
            })
            .collect();
        for (ci, r) in records.into_iter().enumerate() {
            fold_records[ci].push(r);
        }
    }
    let mut reports: Vec<ExperimentReport> = configs
        .into_iter()
        .zip(fold_records)
        .map(|((config_id, cfg), folds)| {
            let aggregated = aggregate(&folds, &features);
            ExperimentReport {
                config_id,
                kind: match cfg {
                    GridConfig::Threshold(None) => ConfigKind::Baseline,
                    GridConfig::Threshold(Some(t)) => ConfigKind::Threshold(t),
                    GridConfig::Fawos(f) => ConfigKind::Fawos(f),
                },
                folds,
                aggregated,
            }
        })
        .collect();
    reports.sort_by(|a, b| a.config_id.cmp(&b.config_id));
    Ok(reports)
}

/// The percentile-threshold sweep: every level³ × strategy combination plus
/// the untouched baseline. With a single protected feature the strategies
/// coincide, so only the union labeling is run.
pub fn run_grid(ds: &Dataset, opts: &GridOptions) -> Result<Vec<ExperimentReport>> {
    if opts.levels.is_empty() {
        return Err(Error::Config("no percentile levels given".into()));
    }
    let mut levels = opts.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    if let Some(&bad) = levels.iter().find(|&&l| l > 100) {
        return Err(Error::Config(format!("percentile level {bad} exceeds 100")));
    }
    let strategies: Vec<Strategy> = if ds.schema().protected_features.len() == 1 {
        vec![Strategy::Union]
    } else {
        let mut s = opts.strategies.clone();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(Error::Config("no strategies given".into()));
        }
        s
    };
    let mut configs: Vec<(String, GridConfig)> =
        vec![("baseline".into(), GridConfig::Threshold(None))];
    for &strategy in &strategies {
        for &pct_radius in &levels {
            for &pct_count in &levels {
                for &pct_density in &levels {
                    let cfg = ThresholdConfig {
                        pct_radius,
                        pct_count,
                        pct_density,
                        strategy,
                    };
                    configs.push((threshold_config_id(&cfg), GridConfig::Threshold(Some(cfg))));
                }
            }
        }
    }
    run_configs(ds, opts, configs)
}

/// The oversampling baseline sweep (default: the canonical 12 configs) plus
/// the same untouched baseline.
pub fn run_fawos_grid(
    ds: &Dataset,
    opts: &GridOptions,
    cfgs: &[FawosConfig],
) -> Result<Vec<ExperimentReport>> {
    if cfgs.is_empty() {
        return Err(Error::Config("no oversampling configurations given".into()));
    }
    let mut configs: Vec<(String, GridConfig)> =
        vec![("baseline".into(), GridConfig::Threshold(None))];
    for cfg in cfgs {
        cfg.validate()?;
        configs.push((fawos_config_id(cfg), GridConfig::Fawos(*cfg)));
    }
    run_configs(ds, opts, configs)
}

/// The winning configurations of a report set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestSelection {
    /// Minimal total DI distance, ties to higher AUC.
    pub best_global: String,
    /// Per protected feature: mean DI closest to 1.
    pub best_per_feature: BTreeMap<String, String>,
    pub best_auc: String,
    pub best_accuracy: String,
}

fn pick_best<'a, K: PartialOrd>(
    reports: impl Iterator<Item = &'a ExperimentReport>,
    key: impl Fn(&Aggregated) -> Option<K>,
) -> Option<&'a ExperimentReport> {
    let mut best: Option<(&ExperimentReport, K, f64)> = None;
    for r in reports {
        let Some(agg) = &r.aggregated else { continue };
        let Some(k) = key(agg) else { continue };
        let replace = match &best {
            None => true,
            Some((br, bk, bauc)) => {
                k < *bk
                    || (k == *bk && agg.mean_auc > *bauc)
                    || (k == *bk && agg.mean_auc == *bauc && r.config_id < br.config_id)
            }
        };
        if replace {
            best = Some((r, k, agg.mean_auc));
        }
    }
    best.map(|(r, _, _)| r)
}

/// Select the best configurations. Configs with failed folds or sentinel
/// DIs never win DI-based categories.
pub fn select_best(reports: &[ExperimentReport]) -> Result<BestSelection> {
    let features: Vec<String> = reports
        .iter()
        .find_map(|r| {
            r.aggregated
                .as_ref()
                .map(|a| a.per_feature.iter().map(|f| f.feature.clone()).collect())
        })
        .ok_or_else(|| Error::Infeasible("every configuration failed".into()))?;

    let best_global = pick_best(reports.iter(), |a| a.total_di_distance)
        .ok_or_else(|| Error::Infeasible("no configuration has finite DI on all folds".into()))?
        .config_id
        .clone();
    let mut best_per_feature = BTreeMap::new();
    for (fi, feature) in features.iter().enumerate() {
        let winner = pick_best(reports.iter(), |a| {
            let f = &a.per_feature[fi];
            f.di_all_finite.then_some((f.mean_di - 1.0).abs())
        })
        .ok_or_else(|| Error::Infeasible("no configuration has finite DI on all folds".into()))?;
        best_per_feature.insert(feature.clone(), winner.config_id.clone());
    }
    // Negated AUC/accuracy reuse the minimizing comparator.
    let best_auc = pick_best(reports.iter(), |a| Some(-a.mean_auc))
        .expect("at least one aggregated report exists")
        .config_id
        .clone();
    let best_accuracy = pick_best(reports.iter(), |a| Some(-a.mean_accuracy))
        .expect("at least one aggregated report exists")
        .config_id
        .clone();
    Ok(BestSelection {
        best_global,
        best_per_feature,
        best_auc,
        best_accuracy,
    })
}

/// One row of the method-comparison table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub config_id: String,
    /// (feature, mean ADI) pairs.
    pub per_feature_adi: Vec<(String, f64)>,
    pub total_adi_distance: f64,
    pub mean_auc: f64,
    pub mean_accuracy: f64,
}

fn comparison_row(method: &str, report: &ExperimentReport) -> ComparisonRow {
    let agg = report.aggregated.as_ref().expect("winner has aggregates");
    ComparisonRow {
        method: method.into(),
        config_id: report.config_id.clone(),
        per_feature_adi: agg
            .per_feature
            .iter()
            .map(|f| (f.feature.clone(), f.mean_adi))
            .collect(),
        total_adi_distance: agg.total_adi_distance,
        mean_auc: agg.mean_auc,
        mean_accuracy: agg.mean_accuracy,
    }
}

/// Side-by-side comparison of the two method grids by mean ADI: baseline,
/// best undersampling config, best oversampling config. Winners minimize
/// total ADI distance (ties to higher AUC).
pub fn build_comparison(
    onb_reports: &[ExperimentReport],
    fawos_reports: &[ExperimentReport],
) -> Result<Vec<ComparisonRow>> {
    let baseline = onb_reports
        .iter()
        .find(|r| r.is_baseline())
        .filter(|r| r.aggregated.is_some())
        .ok_or_else(|| Error::Infeasible("baseline evaluation failed".into()))?;
    let best_onb = pick_best(
        onb_reports.iter().filter(|r| !r.is_baseline()),
        |a| Some(a.total_adi_distance),
    )
    .ok_or_else(|| Error::Infeasible("every undersampling configuration failed".into()))?;
    let best_fawos = pick_best(
        fawos_reports.iter().filter(|r| !r.is_baseline()),
        |a| Some(a.total_adi_distance),
    )
    .ok_or_else(|| Error::Infeasible("every oversampling configuration failed".into()))?;
    Ok(vec![
        comparison_row("baseline", baseline),
        comparison_row("undersampling", best_onb),
        comparison_row("oversampling", best_fawos),
    ])
}

fn config_columns(kind: &ConfigKind) -> (String, String, String, String) {
    match kind {
        ConfigKind::Baseline | ConfigKind::Fawos(_) => {
            ("-".into(), "-".into(), "-".into(), "-".into())
        }
        ConfigKind::Threshold(t) => (
            t.strategy.as_str().into(),
            t.pct_radius.to_string(),
            t.pct_count.to_string(),
            t.pct_density.to_string(),
        ),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-fold, per-feature report rows. Failed folds keep their config and
/// fold columns with empty metric cells.
pub fn write_report_csv(reports: &[ExperimentReport], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "config_id,strategy,pct_radius,pct_count,pct_density,fold,feature,di,adi,spd,eod,auc,accuracy,removed,added"
    )?;
    for report in reports {
        let (strategy, pr, pc, pd) = config_columns(&report.kind);
        for fr in &report.folds {
            match &fr.outcome {
                FoldOutcome::Metrics(m) => {
                    for f in &m.per_feature {
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                            report.config_id,
                            strategy,
                            pr,
                            pc,
                            pd,
                            fr.fold,
                            f.feature,
                            f.di.report_value(),
                            f.adi,
                            f.spd,
                            fmt_opt(f.eod),
                            m.auc,
                            m.accuracy,
                            m.removed,
                            m.added
                        )?;
                    }
                }
                FoldOutcome::Failed(_) => {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},,,,,,,,,",
                        report.config_id, strategy, pr, pc, pd, fr.fold
                    )?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Aggregated rows, one per (config, feature), with best-selection flags.
pub fn write_summary_csv(
    reports: &[ExperimentReport],
    best: Option<&BestSelection>,
    path: &Path,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "config_id,strategy,pct_radius,pct_count,pct_density,feature,mean_di,mean_adi,mean_spd,mean_eod,mean_auc,mean_accuracy,mean_removed,mean_added,total_di_distance,total_adi_distance,best_global,best_feature,best_auc,best_accuracy"
    )?;
    for report in reports {
        let (strategy, pr, pc, pd) = config_columns(&report.kind);
        let Some(agg) = &report.aggregated else {
            writeln!(
                out,
                "{},{},{},{},{},,,,,,,,,,,,,,,",
                report.config_id, strategy, pr, pc, pd
            )?;
            continue;
        };
        let flag = |winner: Option<&String>| {
            if winner == Some(&report.config_id) { "1" } else { "" }
        };
        for f in &agg.per_feature {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                report.config_id,
                strategy,
                pr,
                pc,
                pd,
                f.feature,
                f.mean_di,
                f.mean_adi,
                f.mean_spd,
                fmt_opt(f.mean_eod),
                agg.mean_auc,
                agg.mean_accuracy,
                agg.mean_removed,
                agg.mean_added,
                fmt_opt(agg.total_di_distance),
                agg.total_adi_distance,
                flag(best.map(|b| &b.best_global)),
                flag(best.and_then(|b| b.best_per_feature.get(&f.feature))),
                flag(best.map(|b| &b.best_auc)),
                flag(best.map(|b| &b.best_accuracy)),
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Aggregated metrics of one protected feature keyed by the mean resolved
/// radius threshold, the x-axis of the threshold-effect plots.
pub fn write_plotdata_csv(
    reports: &[ExperimentReport],
    feature: &str,
    path: &Path,
) -> Result<()> {
    let mut rows: Vec<(f64, &ExperimentReport, &FeatureAggregate)> = Vec::new();
    for report in reports {
        if let (ConfigKind::Threshold(_), Some(agg)) = (&report.kind, &report.aggregated) {
            if let (Some(thr), Some(f)) = (
                agg.mean_radius_thr,
                agg.per_feature.iter().find(|f| f.feature == feature),
            ) {
                rows.push((thr, report, f));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Infeasible(format!(
            "no aggregated rows for feature '{feature}'"
        )));
    }
    rows.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| a.1.config_id.cmp(&b.1.config_id))
    });
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "radius_thr,config_id,strategy,pct_radius,pct_count,pct_density,mean_di,mean_adi,mean_spd,mean_auc,mean_accuracy,mean_removed"
    )?;
    for (thr, report, f) in rows {
        let (strategy, pr, pc, pd) = config_columns(&report.kind);
        let agg = report.aggregated.as_ref().unwrap();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            thr,
            report.config_id,
            strategy,
            pr,
            pc,
            pd,
            f.mean_di,
            f.mean_adi,
            f.mean_spd,
            agg.mean_auc,
            agg.mean_accuracy,
            agg.mean_removed
        )?;
    }
    out.flush()?;
    Ok(())
}
