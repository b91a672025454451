//! Fairness metrics (SPD, DI, ADI, EPD, EOD) and predictive-performance
//! metrics (AUC, accuracy).
//!
//! All fairness metrics compare the two values of one binary protected
//! feature. The probability terms are estimated from [`GroupOutcomeCounts`],
//! which can be filled from dataset labels or from model predictions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome counts for one protected feature, split by protected value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub n_total: usize,
    pub n_pred_pos: usize,
    pub n_actual_pos: usize,
    pub n_true_pos: usize,
    pub n_false_pos: usize,
}

/// Counts for protected value 0 and protected value 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroupOutcomeCounts {
    pub v0: OutcomeCounts,
    pub v1: OutcomeCounts,
}

impl GroupOutcomeCounts {
    /// Tally counts from aligned prediction/label/protected-value vectors.
    ///
    /// `preds` may be dataset labels when assessing a priori bias.
    pub fn from_predictions(protected: &[u8], preds: &[u8], labels: &[u8]) -> Result<Self> {
        if protected.len() != preds.len() || preds.len() != labels.len() {
            return Err(Error::Validation(
                "protected/prediction/label vectors must be aligned".into(),
            ));
        }
        let mut counts = GroupOutcomeCounts::default();
        for i in 0..preds.len() {
            let side = if protected[i] == 0 {
                &mut counts.v0
            } else {
                &mut counts.v1
            };
            side.n_total += 1;
            if preds[i] == 1 {
                side.n_pred_pos += 1;
            }
            if labels[i] == 1 {
                side.n_actual_pos += 1;
                if preds[i] == 1 {
                    side.n_true_pos += 1;
                }
            } else if preds[i] == 1 {
                side.n_false_pos += 1;
            }
        }
        Ok(counts)
    }

    fn rates(&self) -> Result<(f64, f64)> {
        if self.v0.n_total == 0 || self.v1.n_total == 0 {
            return Err(Error::UndefinedMetric(
                "a protected value has zero instances".into(),
            ));
        }
        Ok((
            self.v0.n_pred_pos as f64 / self.v0.n_total as f64,
            self.v1.n_pred_pos as f64 / self.v1.n_total as f64,
        ))
    }
}

/// Disparate impact: the ratio Pr(Ŷ=1|P=0) / Pr(Ŷ=1|P=1).
///
/// `Infinite` marks a zero denominator with a nonzero numerator;
/// `Undefined` marks the 0/0 case, reported as 1.0 but flagged so grid
/// selection can exclude it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Di {
    Finite(f64),
    Infinite,
    Undefined,
}

impl Di {
    pub fn is_finite(&self) -> bool {
        matches!(self, Di::Finite(_))
    }

    /// Finite value if available.
    pub fn finite(&self) -> Option<f64> {
        match self {
            Di::Finite(v) => Some(*v),
            _ => None,
        }
    }

    /// Numeric rendering for reports: Undefined follows the convention of
    /// reporting 1.0, Infinite becomes +inf.
    pub fn report_value(&self) -> f64 {
        match self {
            Di::Finite(v) => *v,
            Di::Infinite => f64::INFINITY,
            Di::Undefined => 1.0,
        }
    }
}

/// Statistical parity difference: Pr(Ŷ=1|P=0) − Pr(Ŷ=1|P=1). Optimum 0.
pub fn spd(counts: &GroupOutcomeCounts) -> Result<f64> {
    let (r0, r1) = counts.rates()?;
    Ok(r0 - r1)
}

/// Disparate impact: Pr(Ŷ=1|P=0) / Pr(Ŷ=1|P=1). Optimum 1.
pub fn di(counts: &GroupOutcomeCounts) -> Result<Di> {
    let (r0, r1) = counts.rates()?;
    Ok(if r1 > 0.0 {
        Di::Finite(r0 / r1)
    } else if r0 > 0.0 {
        Di::Infinite
    } else {
        Di::Undefined
    })
}

/// Adapted disparate impact: DI folded into (0,1] by taking the reciprocal
/// of values above 1. Sentinel DI maps to 0.0.
pub fn adi(di_value: Di) -> f64 {
    match di_value {
        Di::Finite(v) if v > 1.0 => 1.0 / v,
        Di::Finite(v) => v,
        Di::Infinite | Di::Undefined => 0.0,
    }
}

/// Equal probability difference: the pair of conditional-rate differences
/// (TPR(P=0) − TPR(P=1), FPR(P=0) − FPR(P=1)).
pub fn epd(counts: &GroupOutcomeCounts) -> Result<(f64, f64)> {
    let tpr_diff = eod(counts)?;
    let neg0 = counts.v0.n_total - counts.v0.n_actual_pos;
    let neg1 = counts.v1.n_total - counts.v1.n_actual_pos;
    if neg0 == 0 || neg1 == 0 {
        return Err(Error::UndefinedMetric(
            "a protected value has no actual negatives".into(),
        ));
    }
    let fpr0 = counts.v0.n_false_pos as f64 / neg0 as f64;
    let fpr1 = counts.v1.n_false_pos as f64 / neg1 as f64;
    Ok((tpr_diff, fpr0 - fpr1))
}

/// Equal opportunity difference: TPR(P=0) − TPR(P=1).
pub fn eod(counts: &GroupOutcomeCounts) -> Result<f64> {
    if counts.v0.n_actual_pos == 0 || counts.v1.n_actual_pos == 0 {
        return Err(Error::UndefinedMetric(
            "a protected value has no actual positives".into(),
        ));
    }
    let tpr0 = counts.v0.n_true_pos as f64 / counts.v0.n_actual_pos as f64;
    let tpr1 = counts.v1.n_true_pos as f64 / counts.v1.n_actual_pos as f64;
    Ok(tpr0 - tpr1)
}

/// AUC via the Mann–Whitney statistic with midranks, so ties count 1/2.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Validation("scores/labels must be aligned".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC requires both classes in the labels".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Average rank of positions i..j (1-based ranks).
        let midrank = ((i + 1 + j) as f64) / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Fraction of predictions equal to labels.
pub fn accuracy(preds: &[u8], labels: &[u8]) -> Result<f64> {
    if preds.len() != labels.len() {
        return Err(Error::Validation("preds/labels must be aligned".into()));
    }
    if preds.is_empty() {
        return Err(Error::UndefinedMetric("accuracy of empty vectors".into()));
    }
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Per-feature fairness numbers for one evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureFairness {
    pub feature: String,
    pub spd: f64,
    pub di: Di,
    pub adi: f64,
    /// (TPR difference, FPR difference); undefined on degenerate strata.
    pub epd: Option<(f64, f64)>,
    pub eod: Option<f64>,
}

/// Fairness metrics for every protected feature plus the aggregate
/// distance of the DIs to their optimum of 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FairnessReport {
    pub per_feature: Vec<FeatureFairness>,
    /// Σ over features of |DI − 1|; `None` when any DI is non-finite.
    pub total_di_distance: Option<f64>,
}

impl FairnessReport {
    /// Evaluate all metrics from per-feature outcome counts.
    pub fn from_counts(counts: &[(String, GroupOutcomeCounts)]) -> Result<Self> {
        let mut per_feature = Vec::with_capacity(counts.len());
        for (feature, c) in counts {
            let di_value = di(c)?;
            per_feature.push(FeatureFairness {
                feature: feature.clone(),
                spd: spd(c)?,
                di: di_value,
                adi: adi(di_value),
                epd: epd(c).ok(),
                eod: eod(c).ok(),
            });
        }
        let total_di_distance = total_di_distance_of(per_feature.iter().map(|f| f.di));
        Ok(FairnessReport {
            per_feature,
            total_di_distance,
        })
    }
}

/// Σ over protected features of |DI − 1|; `None` if any DI is non-finite.
pub fn total_di_distance_of(dis: impl IntoIterator<Item = Di>) -> Option<f64> {
    let mut total = 0.0;
    for d in dis {
        total += (d.finite()? - 1.0).abs();
    }
    Some(total)
}

/// Σ over protected features of |DI − 1| over finite values, erroring on
/// sentinels (the caller decides how to handle those).
pub fn total_di_distance(report: &FairnessReport) -> Result<f64> {
    report
        .total_di_distance
        .ok_or_else(|| Error::UndefinedMetric("total DI distance over sentinel DI".into()))
}
