//! Group enumeration over class × protected-feature combinations, favored
//! value detection via disparate impact, and target-group selection.
//!
//! Groups follow the canonical table ordering: protected values in
//! declaration order, class as the fastest-varying coordinate. For
//! protected features (race, gender) and a binary class this yields
//! (0,0,0)→0, (0,0,1)→1, (0,1,0)→2, ..., (1,1,1)→7.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{self, Di, GroupOutcomeCounts};

/// Identifier of one (protected values, class) combination.
pub type GroupId = usize;

/// Bijection between (protected value tuple, class value) and group ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    /// Protected feature names in declaration order.
    pub protected_order: Vec<String>,
}

impl GroupTable {
    /// Number of protected features.
    pub fn n_protected(&self) -> usize {
        self.protected_order.len()
    }

    /// Total number of groups, 2^(p+1).
    pub fn n_groups(&self) -> usize {
        1 << (self.n_protected() + 1)
    }

    /// Group id of a (protected values, class) combination.
    pub fn group_id(&self, protected_values: &[u8], class: u8) -> GroupId {
        debug_assert_eq!(protected_values.len(), self.n_protected());
        let mut id = class as usize;
        for (j, &v) in protected_values.iter().enumerate() {
            id += (v as usize) << (self.n_protected() - j);
        }
        id
    }

    /// Protected values and class of a group id.
    pub fn decode(&self, id: GroupId) -> (Vec<u8>, u8) {
        let class = (id & 1) as u8;
        let values = (0..self.n_protected())
            .map(|j| ((id >> (self.n_protected() - j)) & 1) as u8)
            .collect();
        (values, class)
    }

    /// All (protected values, class, group id) entries in table order.
    pub fn entries(&self) -> Vec<(Vec<u8>, u8, GroupId)> {
        (0..self.n_groups())
            .map(|id| {
                let (values, class) = self.decode(id);
                (values, class, id)
            })
            .collect()
    }
}

/// Enumerate all groups for a dataset's protected features.
pub fn enumerate_groups(ds: &Dataset) -> Result<GroupTable> {
    let protected = &ds.schema().protected_features;
    if protected.is_empty() {
        return Err(Error::Config(
            "at least one protected feature is required".into(),
        ));
    }
    Ok(GroupTable {
        protected_order: protected.clone(),
    })
}

/// Group id of every row, aligned with row positions.
pub fn assign_groups(ds: &Dataset, table: &GroupTable) -> Vec<GroupId> {
    let indices: Vec<usize> = table
        .protected_order
        .iter()
        .map(|n| ds.schema().feature_index(n).expect("protected feature exists"))
        .collect();
    (0..ds.n_rows())
        .map(|row| {
            let values: Vec<u8> = indices.iter().map(|&c| ds.value(row, c) as u8).collect();
            table.group_id(&values, ds.labels()[row])
        })
        .collect()
}

/// Where the positive-rate vector used for bias assessment came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssessmentSource {
    /// The dataset's own labels.
    Dataset,
    /// Predictions of a trained model.
    Model,
}

/// DI and favored value for one protected feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBias {
    pub feature: String,
    pub di: Di,
    /// 0 when DI > 1, 1 when DI < 1, `None` when DI = 1 (or undefined).
    pub favored_value: Option<u8>,
}

/// Per-feature bias assessment over one outcome vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasAssessment {
    pub source: AssessmentSource,
    pub per_feature: Vec<FeatureBias>,
}

impl BiasAssessment {
    /// True when no feature shows a favored value, making undersampling a
    /// declared no-op.
    pub fn is_unbiased(&self) -> bool {
        self.per_feature.iter().all(|f| f.favored_value.is_none())
    }
}

/// Compute DI per protected feature from an outcome vector (dataset labels
/// or model predictions) and derive favored values: DI > 1 favors value 0,
/// DI < 1 favors value 1.
pub fn assess_bias(
    ds: &Dataset,
    outcomes: &[u8],
    source: AssessmentSource,
) -> Result<BiasAssessment> {
    if outcomes.len() != ds.n_rows() {
        return Err(Error::Validation(
            "outcome vector not aligned with dataset rows".into(),
        ));
    }
    let mut per_feature = Vec::new();
    for feature in &ds.schema().protected_features {
        let protected = ds.protected_values(feature)?;
        let counts = GroupOutcomeCounts::from_predictions(&protected, outcomes, outcomes)?;
        let di = metrics::di(&counts)?;
        let favored_value = match di {
            Di::Finite(v) if v > 1.0 => Some(0),
            Di::Finite(v) if v < 1.0 => Some(1),
            Di::Finite(_) => None,
            // Positive rate 0 for P=1 and nonzero for P=0: value 0 favored.
            Di::Infinite => Some(0),
            Di::Undefined => None,
        };
        per_feature.push(FeatureBias {
            feature: feature.clone(),
            di,
            favored_value,
        });
    }
    Ok(BiasAssessment { source, per_feature })
}

/// How target groups are combined across protected features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Positive-class groups matching the favored value of ANY biased feature.
    Union,
    /// Positive-class groups matching the favored values of ALL biased features.
    Intersection,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Union => "union",
            Strategy::Intersection => "intersection",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(Strategy::Union),
            "intersection" => Ok(Strategy::Intersection),
            other => Err(Error::Config(format!(
                "unknown strategy '{other}' (expected union or intersection)"
            ))),
        }
    }
}

/// Select the positive-class groups to undersample. Features without a
/// favored value impose no constraint.
pub fn select_target_groups(
    table: &GroupTable,
    assessment: &BiasAssessment,
    strategy: Strategy,
) -> Result<BTreeSet<GroupId>> {
    if assessment.per_feature.len() != table.n_protected() {
        return Err(Error::Config(
            "bias assessment does not match the group table's protected features".into(),
        ));
    }
    if assessment.is_unbiased() {
        return Err(Error::Config(
            "no protected feature has a favored value; nothing to select".into(),
        ));
    }
    let favored: Vec<Option<u8>> = assessment
        .per_feature
        .iter()
        .map(|f| f.favored_value)
        .collect();
    let mut selected = BTreeSet::new();
    for (values, class, id) in table.entries() {
        if class != 1 {
            continue;
        }
        let mut matches_any = false;
        let mut matches_all = true;
        for (j, fav) in favored.iter().enumerate() {
            if let Some(fv) = fav {
                if values[j] == *fv {
                    matches_any = true;
                } else {
                    matches_all = false;
                }
            }
        }
        let take = match strategy {
            Strategy::Union => matches_any,
            Strategy::Intersection => matches_all,
        };
        if take {
            selected.insert(id);
        }
    }
    Ok(selected)
}

/// The disadvantaged positive-class groups: positive groups matching no
/// favored value of any biased feature (the complement of the union
/// selection). These are the oversampling targets of the FAWOS baseline.
pub fn disadvantaged_groups(
    table: &GroupTable,
    assessment: &BiasAssessment,
) -> Result<BTreeSet<GroupId>> {
    let union = select_target_groups(table, assessment, Strategy::Union)?;
    Ok((0..table.n_groups())
        .filter(|id| id % 2 == 1 && !union.contains(id))
        .collect())
}
