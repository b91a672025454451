//! Neighborhood-weighted SMOTE oversampling, the comparison baseline.
//!
//! Rows are tagged by how many of their 5 nearest neighbors share their
//! class; the tags weight the choice of interpolation seeds. Synthetic rows
//! are convex combinations of a seed and one of its same-group neighbors,
//! with binary coordinates copied from the seed.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::euclidean;
use crate::dataset::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::groups::{self, GroupId};

/// 5NN same-class tag. Safe: 4-5 neighbors share the class, borderline:
/// 2-3, rare: 1, outlier: 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborhoodLabel {
    Safe,
    Borderline,
    Rare,
    Outlier,
}

impl NeighborhoodLabel {
    fn from_count(same_class: usize) -> Self {
        match same_class {
            4..=5 => NeighborhoodLabel::Safe,
            2..=3 => NeighborhoodLabel::Borderline,
            1 => NeighborhoodLabel::Rare,
            _ => NeighborhoodLabel::Outlier,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            NeighborhoodLabel::Safe => "safe",
            NeighborhoodLabel::Borderline => "borderline",
            NeighborhoodLabel::Rare => "rare",
            NeighborhoodLabel::Outlier => "outlier",
        }
    }
}

/// The canonical weight rows (safe, borderline, rare); outliers always
/// weigh zero.
pub const WEIGHT_ROWS: [(f64, f64, f64); 4] = [
    (0.0, 0.4, 0.6),
    (0.0, 0.5, 0.5),
    (0.0, 0.6, 0.4),
    (0.33, 0.33, 0.33),
];

/// The canonical oversampling factors.
pub const FACTORS: [f64; 3] = [0.8, 1.0, 1.2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FawosConfig {
    /// (w_safe, w_borderline, w_rare); outlier weight is fixed at 0.
    pub weights: (f64, f64, f64),
    pub factor: f64,
}

impl FawosConfig {
    pub fn validate(&self) -> Result<()> {
        let (s, b, r) = self.weights;
        if s < 0.0 || b < 0.0 || r < 0.0 {
            return Err(Error::Config("label weights must be nonnegative".into()));
        }
        if !(s > 0.0 || b > 0.0 || r > 0.0) {
            return Err(Error::Config("at least one label weight must be positive".into()));
        }
        if self.factor < 0.0 {
            return Err(Error::Config("oversampling factor must be nonnegative".into()));
        }
        Ok(())
    }

    fn weight_of(&self, label: NeighborhoodLabel) -> f64 {
        match label {
            NeighborhoodLabel::Safe => self.weights.0,
            NeighborhoodLabel::Borderline => self.weights.1,
            NeighborhoodLabel::Rare => self.weights.2,
            NeighborhoodLabel::Outlier => 0.0,
        }
    }
}

/// Tag every row by its 5NN same-class count. Distance ties resolve to the
/// smaller row id so the labeling is deterministic.
pub fn label_neighborhoods(ds: &Dataset) -> Result<Vec<NeighborhoodLabel>> {
    if ds.n_rows() < 6 {
        return Err(Error::Infeasible(format!(
            "neighborhood labeling needs at least 6 rows, got {}",
            ds.n_rows()
        )));
    }
    Ok((0..ds.n_rows())
        .map(|i| {
            let mut others: Vec<(f64, usize, usize)> = (0..ds.n_rows())
                .filter(|&j| j != i)
                .map(|j| (euclidean(ds.row(i), ds.row(j)), ds.row_ids()[j], j))
                .collect();
            others.sort_by(|a, b| {
                (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite distances")
            });
            let same = others
                .iter()
                .take(5)
                .filter(|&&(_, _, j)| ds.labels()[j] == ds.labels()[i])
                .count();
            NeighborhoodLabel::from_count(same)
        })
        .collect())
}

/// Oversampling outcome: the widened dataset plus bookkeeping.
#[derive(Debug, Clone)]
pub struct FawosOutcome {
    pub dataset: Dataset,
    pub labels: Vec<NeighborhoodLabel>,
    pub added_per_group: BTreeMap<GroupId, usize>,
    pub warnings: Vec<String>,
}

/// Append round(factor × deficit) synthetic rows to each target group,
/// where deficit is the gap to the largest class×protected group. Seeds are
/// drawn with probability proportional to their neighborhood-label weight;
/// an all-outlier group falls back to uniform seeds with a warning.
pub fn oversample(
    ds: &Dataset,
    targets: &BTreeSet<GroupId>,
    cfg: &FawosConfig,
    seed: u64,
) -> Result<FawosOutcome> {
    cfg.validate()?;
    if targets.is_empty() {
        return Err(Error::Config("no target groups to oversample".into()));
    }
    let table = groups::enumerate_groups(ds)?;
    let group_of = groups::assign_groups(ds, &table);
    let labels = label_neighborhoods(ds)?;

    let mut sizes: BTreeMap<GroupId, usize> = BTreeMap::new();
    for &g in &group_of {
        *sizes.entry(g).or_insert(0) += 1;
    }
    let largest = *sizes.values().max().expect("dataset is nonempty");

    for &g in targets {
        match sizes.get(&g) {
            None => {
                return Err(Error::Validation(format!(
                    "target group {g} has no instances"
                )))
            }
            Some(&sz) if sz < 2 => {
                return Err(Error::Infeasible(format!(
                    "target group {g} has {sz} instance(s); interpolation needs 2"
                )))
            }
            _ => {}
        }
    }

    let binary_cols: Vec<bool> = ds
        .schema()
        .feature_kinds
        .iter()
        .map(|k| *k == FeatureKind::Binary)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let mut added_per_group = BTreeMap::new();
    let mut new_rows: Vec<Vec<f64>> = Vec::new();
    let mut new_labels: Vec<u8> = Vec::new();

    for &g in targets {
        let members: Vec<usize> = (0..ds.n_rows()).filter(|&p| group_of[p] == g).collect();
        let deficit = largest - sizes[&g];
        let n_syn = (cfg.factor * deficit as f64).round() as usize;
        added_per_group.insert(g, n_syn);
        if n_syn == 0 {
            continue;
        }

        // Same-group 5NN lists, ties by row id.
        let neighbors: Vec<Vec<usize>> = members
            .iter()
            .map(|&p| {
                let mut others: Vec<(f64, usize, usize)> = members
                    .iter()
                    .filter(|&&q| q != p)
                    .map(|&q| (euclidean(ds.row(p), ds.row(q)), ds.row_ids()[q], q))
                    .collect();
                others.sort_by(|a, b| {
                    (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite distances")
                });
                others.into_iter().take(5).map(|(_, _, q)| q).collect()
            })
            .collect();

        let weights: Vec<f64> = members
            .iter()
            .map(|&p| cfg.weight_of(labels[p]))
            .collect();
        let picker = if weights.iter().sum::<f64>() > 0.0 {
            Some(WeightedIndex::new(&weights).expect("positive weight sum"))
        } else {
            warnings.push(format!(
                "group {g} contains only outliers; falling back to uniform seeds"
            ));
            None
        };

        for _ in 0..n_syn {
            let mi = match &picker {
                Some(w) => w.sample(&mut rng),
                None => rng.random_range(0..members.len()),
            };
            let seed_pos = members[mi];
            let nb_pos = neighbors[mi][rng.random_range(0..neighbors[mi].len())];
            let u: f64 = rng.random();
            let seed_row = ds.row(seed_pos);
            let nb_row = ds.row(nb_pos);
            let values: Vec<f64> = (0..ds.n_features())
                .map(|c| {
                    if binary_cols[c] {
                        seed_row[c]
                    } else {
                        seed_row[c] + u * (nb_row[c] - seed_row[c])
                    }
                })
                .collect();
            new_rows.push(values);
            new_labels.push(ds.labels()[seed_pos]);
        }
    }

    let dataset = ds.with_appended(new_rows, new_labels)?;
    Ok(FawosOutcome {
        dataset,
        labels,
        added_per_group,
        warnings,
    })
}
