//! Ball elimination: remove target-group balls whose radius, covered count,
//! or density falls strictly below percentile thresholds, along with every
//! instance assigned to them.
//!
//! Thresholds are resolved within each target group over that group's own
//! balls. This keeps thresholds meaningful when groups differ in scale, and
//! it makes two sweep properties hold by construction: union removals
//! always contain intersection removals (shared groups resolve identical
//! thresholds), and raising a percentile never shrinks the removed set.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::coverage::{self, BallAttributes, Coverage};
use crate::dataset::{Dataset, RowId};
use crate::error::{Error, Result};
use crate::groups::{self, AssessmentSource, BiasAssessment, GroupId, Strategy};
use crate::tree;

/// Percentile levels for the three ball attributes plus the group-selection
/// strategy. The canonical sweep uses levels {0, 5, 10, 15, 20}; any level
/// up to 100 is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub pct_radius: u8,
    pub pct_count: u8,
    pub pct_density: u8,
    pub strategy: Strategy,
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("radius", self.pct_radius),
            ("count", self.pct_count),
            ("density", self.pct_density),
        ] {
            if p > 100 {
                return Err(Error::Config(format!(
                    "{name} percentile {p} exceeds 100"
                )));
            }
        }
        Ok(())
    }

    /// The no-removal configuration for a strategy.
    pub fn baseline(strategy: Strategy) -> Self {
        ThresholdConfig {
            pct_radius: 0,
            pct_count: 0,
            pct_density: 0,
            strategy,
        }
    }

    pub fn is_baseline(&self) -> bool {
        self.pct_radius == 0 && self.pct_count == 0 && self.pct_density == 0
    }
}

/// Attribute values at the requested percentiles over one ball population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedThresholds {
    pub radius_thr: f64,
    pub count_thr: f64,
    pub density_thr: f64,
}

/// Bookkeeping of one undersampling pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UndersampleResult {
    pub kept_rows: BTreeSet<RowId>,
    pub removed_rows: BTreeSet<RowId>,
    pub removed_balls: Vec<usize>,
    pub per_group_removed: BTreeMap<GroupId, usize>,
    /// Thresholds applied within each target group.
    pub resolved_per_group: BTreeMap<GroupId, ResolvedThresholds>,
    /// Mean of the per-group thresholds; the single group's thresholds when
    /// only one group is targeted.
    pub resolved: ResolvedThresholds,
    pub warnings: Vec<String>,
}

/// Nearest-rank-lower percentile: the value at index floor(p/100 · (n−1))
/// of the ascending sort. Percentile 0 is the minimum.
fn percentile(sorted: &[f64], p: u8) -> f64 {
    debug_assert!(!sorted.is_empty());
    let idx = (p as usize * (sorted.len() - 1)) / 100;
    sorted[idx]
}

/// Resolve the percentile triple over a ball attribute list.
pub fn resolve_thresholds(
    attrs: &[BallAttributes],
    cfg: &ThresholdConfig,
) -> Result<ResolvedThresholds> {
    cfg.validate()?;
    if attrs.is_empty() {
        return Err(Error::Infeasible(
            "cannot resolve thresholds over an empty coverage".into(),
        ));
    }
    let sorted = |key: fn(&BallAttributes) -> f64| {
        let mut v: Vec<f64> = attrs.iter().map(key).collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("attributes are finite"));
        v
    };
    Ok(ResolvedThresholds {
        radius_thr: percentile(&sorted(|a| a.radius), cfg.pct_radius),
        count_thr: percentile(&sorted(|a| a.covered_count as f64), cfg.pct_count),
        density_thr: percentile(&sorted(|a| a.density), cfg.pct_density),
    })
}

/// Remove target-group balls strictly below any resolved threshold, and the
/// rows assigned to them. Non-target groups are never touched; thresholds
/// are computed over target-group balls only.
pub fn undersample(
    ds: &Dataset,
    cov: &Coverage,
    targets: &BTreeSet<GroupId>,
    cfg: &ThresholdConfig,
) -> Result<UndersampleResult> {
    cfg.validate()?;
    let all_rows: BTreeSet<RowId> = ds.row_ids().iter().copied().collect();
    let mut warnings = Vec::new();
    if targets.is_empty() {
        warnings.push("no target groups selected; nothing removed".into());
        return Ok(UndersampleResult {
            kept_rows: all_rows,
            removed_rows: BTreeSet::new(),
            removed_balls: Vec::new(),
            per_group_removed: BTreeMap::new(),
            resolved_per_group: BTreeMap::new(),
            resolved: ResolvedThresholds {
                radius_thr: 0.0,
                count_thr: 0.0,
                density_thr: 0.0,
            },
            warnings,
        });
    }
    if let Some(g) = targets.iter().find(|&&g| !cov.group_ids.contains(&g)) {
        return Err(Error::Validation(format!(
            "target group {g} is not covered"
        )));
    }
    let attrs = coverage::ball_attributes(cov);
    let mut removed_balls = Vec::new();
    let mut removed_rows = BTreeSet::new();
    let mut per_group_removed: BTreeMap<GroupId, usize> = BTreeMap::new();
    let mut resolved_per_group: BTreeMap<GroupId, ResolvedThresholds> = BTreeMap::new();
    for &g in targets {
        let group_attrs: Vec<BallAttributes> = attrs
            .iter()
            .filter(|a| cov.balls[a.ball_index].group_id == g)
            .copied()
            .collect();
        let resolved = resolve_thresholds(&group_attrs, cfg)?;
        resolved_per_group.insert(g, resolved);
        for attr in &group_attrs {
            let below = attr.radius < resolved.radius_thr
                || (attr.covered_count as f64) < resolved.count_thr
                || attr.density < resolved.density_thr;
            if !below {
                continue;
            }
            let ball = &cov.balls[attr.ball_index];
            removed_balls.push(attr.ball_index);
            removed_rows.extend(ball.assigned_rows.iter().copied());
            *per_group_removed.entry(ball.group_id).or_insert(0) += ball.covered_count();
        }
    }
    removed_balls.sort_unstable();
    let k = resolved_per_group.len() as f64;
    let resolved = ResolvedThresholds {
        radius_thr: resolved_per_group.values().map(|r| r.radius_thr).sum::<f64>() / k,
        count_thr: resolved_per_group.values().map(|r| r.count_thr).sum::<f64>() / k,
        density_thr: resolved_per_group.values().map(|r| r.density_thr).sum::<f64>() / k,
    };
    for &g in targets {
        let group_size: usize = cov
            .balls
            .iter()
            .filter(|b| b.group_id == g)
            .map(|b| b.covered_count())
            .sum();
        if group_size > 0 && per_group_removed.get(&g) == Some(&group_size) {
            warnings.push(format!("group {g} was removed entirely"));
        }
    }
    let kept_rows: BTreeSet<RowId> = all_rows.difference(&removed_rows).copied().collect();
    Ok(UndersampleResult {
        kept_rows,
        removed_rows,
        removed_balls,
        per_group_removed,
        resolved_per_group,
        resolved,
        warnings,
    })
}

/// Full preprocessing outcome: the reduced dataset plus every intermediate
/// the caller might need to report.
#[derive(Debug, Clone)]
pub struct PreprocessOutcome {
    pub dataset: Dataset,
    pub assessment: BiasAssessment,
    pub targets: BTreeSet<GroupId>,
    pub result: UndersampleResult,
}

/// assess bias → select target groups → cover all groups → eliminate balls
/// → restrict the dataset to the kept rows. When no protected feature shows
/// bias the input passes through untouched.
pub fn preprocess(
    ds: &Dataset,
    cfg: &ThresholdConfig,
    source: AssessmentSource,
    seed: u64,
) -> Result<PreprocessOutcome> {
    cfg.validate()?;
    let outcomes = match source {
        AssessmentSource::Dataset => ds.labels().to_vec(),
        AssessmentSource::Model => tree::fit(ds, seed)?.predict(ds)?,
    };
    let assessment = groups::assess_bias(ds, &outcomes, source)?;
    let table = groups::enumerate_groups(ds)?;
    let group_of = groups::assign_groups(ds, &table);
    let observed: BTreeSet<GroupId> = group_of.iter().copied().collect();
    if assessment.is_unbiased() {
        let all: BTreeSet<RowId> = ds.row_ids().iter().copied().collect();
        return Ok(PreprocessOutcome {
            dataset: ds.clone(),
            assessment,
            targets: BTreeSet::new(),
            result: UndersampleResult {
                kept_rows: all,
                removed_rows: BTreeSet::new(),
                removed_balls: Vec::new(),
                per_group_removed: BTreeMap::new(),
                resolved_per_group: BTreeMap::new(),
                resolved: ResolvedThresholds {
                    radius_thr: 0.0,
                    count_thr: 0.0,
                    density_thr: 0.0,
                },
                warnings: vec!["dataset shows no favored value; nothing to remove".into()],
            },
        });
    }
    let selected = groups::select_target_groups(&table, &assessment, cfg.strategy)?;
    // Groups absent from the data produce no balls and nothing to remove.
    let targets: BTreeSet<GroupId> = selected.intersection(&observed).copied().collect();
    let cov = coverage::build_coverage(ds, &group_of, &observed)?;
    let result = undersample(ds, &cov, &targets, cfg)?;
    let dataset = ds.filter_ids(&result.kept_rows);
    Ok(PreprocessOutcome {
        dataset,
        assessment,
        targets,
        result,
    })
}
