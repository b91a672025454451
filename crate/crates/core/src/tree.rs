//! CART-style decision tree with deterministic tie-breaking.
//!
//! Splits minimize weighted Gini impurity over midpoint thresholds. Nodes
//! grow until pure or unsplittable; zero-gain splits are taken when no
//! impurity-reducing split exists, so consistent training data is always
//! fit exactly. Equal-impurity candidates resolve to the lowest feature
//! index, then the lowest threshold, which makes the seed a reproducibility
//! formality rather than a source of variation.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        n_pos: usize,
        n_neg: usize,
    },
}

impl TreeNode {
    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub n_features: usize,
    /// Recorded for provenance; the split search is fully deterministic.
    pub seed: u64,
}

/// Split candidates are compared by the purity mass
/// (posL²+negL²)/szL + (posR²+negR²)/szR, the part of weighted Gini that
/// varies between candidates (larger mass = lower impurity). Comparisons
/// cross-multiply in u128 so ties are exact, never floating-point luck.
#[derive(Debug, Clone, Copy)]
struct SplitScore {
    num: u128,
    den: u128,
}

impl SplitScore {
    fn new(pos_l: usize, neg_l: usize, pos_r: usize, neg_r: usize) -> Self {
        let (pl, nl, pr, nr) = (pos_l as u128, neg_l as u128, pos_r as u128, neg_r as u128);
        let sz_l = pl + nl;
        let sz_r = pr + nr;
        SplitScore {
            num: (pl * pl + nl * nl) * sz_r + (pr * pr + nr * nr) * sz_l,
            den: sz_l * sz_r,
        }
    }

    fn beats(&self, other: &SplitScore) -> bool {
        self.num * other.den > other.num * self.den
    }

    fn equals(&self, other: &SplitScore) -> bool {
        self.num * other.den == other.num * self.den
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: SplitScore,
}

pub fn fit(train: &Dataset, seed: u64) -> Result<DecisionTree> {
    if train.n_rows() == 0 {
        return Err(Error::Validation("cannot fit a tree on zero rows".into()));
    }
    let rows: Vec<usize> = (0..train.n_rows()).collect();
    let root = fit_node(train, &rows);
    Ok(DecisionTree {
        root,
        n_features: train.n_features(),
        seed,
    })
}

fn fit_node(ds: &Dataset, rows: &[usize]) -> TreeNode {
    let n_pos = rows.iter().filter(|&&r| ds.labels()[r] == 1).count();
    let n_neg = rows.len() - n_pos;
    if n_pos == 0 || n_neg == 0 || rows.len() < 2 {
        return TreeNode::Leaf { n_pos, n_neg };
    }
    let best = best_split(ds, rows);
    let Some(best) = best else {
        // Only contradictory duplicates reach here: identical feature
        // vectors with mixed labels admit no threshold.
        return TreeNode::Leaf { n_pos, n_neg };
    };
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for &r in rows {
        if ds.value(r, best.feature) <= best.threshold {
            left.push(r);
        } else {
            right.push(r);
        }
    }
    debug_assert!(!left.is_empty() && !right.is_empty());
    TreeNode::Split {
        feature: best.feature,
        threshold: best.threshold,
        left: Box::new(fit_node(ds, &left)),
        right: Box::new(fit_node(ds, &right)),
    }
}

fn best_split(ds: &Dataset, rows: &[usize]) -> Option<Candidate> {
    let total_pos = rows.iter().filter(|&&r| ds.labels()[r] == 1).count();
    let mut best: Option<Candidate> = None;
    for feature in 0..ds.n_features() {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| {
            ds.value(a, feature)
                .partial_cmp(&ds.value(b, feature))
                .expect("feature values are finite")
        });
        let mut pos_l = 0usize;
        let mut sz_l = 0usize;
        for w in 0..order.len() - 1 {
            pos_l += usize::from(ds.labels()[order[w]] == 1);
            sz_l += 1;
            let v = ds.value(order[w], feature);
            let next = ds.value(order[w + 1], feature);
            if v == next {
                continue;
            }
            let threshold = (v + next) / 2.0;
            let score = SplitScore::new(
                pos_l,
                sz_l - pos_l,
                total_pos - pos_l,
                rows.len() - sz_l - (total_pos - pos_l),
            );
            let replace = match &best {
                None => true,
                Some(b) => {
                    score.beats(&b.score)
                        || (score.equals(&b.score)
                            && (feature < b.feature
                                || (feature == b.feature && threshold < b.threshold)))
                }
            };
            if replace {
                best = Some(Candidate {
                    feature,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

impl DecisionTree {
    fn leaf_for(&self, row: &[f64]) -> (usize, usize) {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { n_pos, n_neg } => return (*n_pos, *n_neg),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    fn check_arity(&self, ds: &Dataset) -> Result<()> {
        if ds.n_features() != self.n_features {
            return Err(Error::Validation(format!(
                "tree expects {} features, dataset has {}",
                self.n_features,
                ds.n_features()
            )));
        }
        Ok(())
    }

    /// Majority label at the reached leaf; exact ties predict positive.
    pub fn predict(&self, ds: &Dataset) -> Result<Vec<u8>> {
        self.check_arity(ds)?;
        Ok((0..ds.n_rows())
            .map(|r| {
                let (pos, neg) = self.leaf_for(ds.row(r));
                u8::from(pos >= neg)
            })
            .collect())
    }

    /// Positive-class fraction at the reached leaf.
    pub fn scores(&self, ds: &Dataset) -> Result<Vec<f64>> {
        self.check_arity(ds)?;
        Ok((0..ds.n_rows())
            .map(|r| {
                let (pos, neg) = self.leaf_for(ds.row(r));
                pos as f64 / (pos + neg) as f64
            })
            .collect())
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn n_leaves(&self) -> usize {
        self.root.n_leaves()
    }

    /// Indented text rendering, one node per line.
    pub fn dump(&self, feature_names: Option<&[String]>) -> String {
        let mut out = String::new();
        dump_node(&self.root, feature_names, 0, &mut out);
        out
    }
}

fn dump_node(node: &TreeNode, names: Option<&[String]>, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match node {
        TreeNode::Leaf { n_pos, n_neg } => {
            out.push_str(&format!("{pad}leaf pos={n_pos} neg={n_neg}\n"));
        }
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let name = match names {
                Some(ns) => ns[*feature].clone(),
                None => format!("f{feature}"),
            };
            out.push_str(&format!("{pad}{name} <= {threshold}\n"));
            dump_node(left, names, indent + 1, out);
            dump_node(right, names, indent + 1, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureKind, Schema};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dataset(features: Vec<&str>, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Dataset {
        let schema = Schema {
            feature_kinds: vec![FeatureKind::Numeric; features.len()],
            feature_names: features.into_iter().map(String::from).collect(),
            protected_features: vec![],
            class_name: "y".into(),
            positive_class_value: "1".into(),
        };
        Dataset::new(schema, rows, labels).unwrap()
    }

    #[test]
    fn separable_data_needs_one_split() {
        let ds = dataset(
            vec!["x"],
            vec![0.1, 0.2, 0.3, 0.7, 0.8, 0.9].into_iter().map(|x| vec![x]).collect(),
            vec![0, 0, 0, 1, 1, 1],
        );
        let tree = fit(&ds, 30).unwrap();
        assert_eq!(tree.depth(), 1);
        match &tree.root {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                // Normalization maps the gap [0.3, 0.7] to [0.25, 0.75].
                assert!((threshold - 0.5).abs() < 1e-12);
            }
            TreeNode::Leaf { .. } => panic!("expected a split at the root"),
        }
        assert_eq!(tree.predict(&ds).unwrap(), ds.labels());
    }

    #[test]
    fn single_class_data_is_one_leaf() {
        let ds = dataset(
            vec!["x"],
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![1, 1, 1],
        );
        let tree = fit(&ds, 30).unwrap();
        assert_eq!(tree.root, TreeNode::Leaf { n_pos: 3, n_neg: 0 });
        assert_eq!(tree.predict(&ds).unwrap(), vec![1, 1, 1]);
        assert_eq!(tree.scores(&ds).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn xor_pattern_is_fit_exactly() {
        let ds = dataset(
            vec!["a", "b"],
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            vec![0, 1, 1, 0],
        );
        let tree = fit(&ds, 30).unwrap();
        assert!(tree.depth() >= 2, "no single split separates XOR");
        assert_eq!(tree.predict(&ds).unwrap(), ds.labels());
    }

    #[test]
    fn fitting_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random(), rng.random(), rng.random()])
            .collect();
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] + r[1] > 1.0)).collect();
        let ds = dataset(vec!["a", "b", "c"], rows, labels);
        let t1 = fit(&ds, 30).unwrap();
        let t2 = fit(&ds, 30).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn consistent_data_reaches_training_accuracy_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|_| vec![rng.random(), rng.random()])
            .collect();
        // Noisy checkerboard labels: consistent (all rows distinct) but far
        // from linearly separable.
        let labels: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(((r[0] * 3.0) as u8 + (r[1] * 3.0) as u8) % 2 == 0))
            .collect();
        let ds = dataset(vec!["a", "b"], rows, labels);
        let tree = fit(&ds, 30).unwrap();
        assert_eq!(tree.predict(&ds).unwrap(), ds.labels());
    }

    #[test]
    fn contradictory_duplicates_become_majority_leaf() {
        let ds = dataset(
            vec!["x"],
            vec![vec![0.5], vec![0.5], vec![0.5]],
            vec![1, 0, 1],
        );
        let tree = fit(&ds, 30).unwrap();
        assert_eq!(tree.root, TreeNode::Leaf { n_pos: 2, n_neg: 1 });
        assert_eq!(tree.predict(&ds).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn leaf_scores_and_tie_handling() {
        let tree = DecisionTree {
            root: TreeNode::Leaf { n_pos: 3, n_neg: 1 },
            n_features: 1,
            seed: 30,
        };
        let ds = dataset(vec!["x"], vec![vec![0.0]], vec![1]);
        assert_eq!(tree.scores(&ds).unwrap(), vec![0.75]);
        assert_eq!(tree.predict(&ds).unwrap(), vec![1]);

        let tied = DecisionTree {
            root: TreeNode::Leaf { n_pos: 2, n_neg: 2 },
            n_features: 1,
            seed: 30,
        };
        assert_eq!(tied.scores(&ds).unwrap(), vec![0.5]);
        assert_eq!(tied.predict(&ds).unwrap(), vec![1], "exact tie predicts positive");
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let ds1 = dataset(vec!["x"], vec![vec![0.0], vec![1.0]], vec![0, 1]);
        let ds2 = dataset(
            vec!["x", "z"],
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            vec![0, 1],
        );
        let tree = fit(&ds1, 30).unwrap();
        assert!(tree.predict(&ds2).is_err());
    }

    #[test]
    fn splits_never_increase_weighted_gini() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|_| vec![rng.random(), rng.random()])
            .collect();
        let labels: Vec<u8> = (0..80).map(|_| rng.random_range(0..2) as u8).collect();
        let ds = dataset(vec!["a", "b"], rows, labels);
        let tree = fit(&ds, 30).unwrap();

        fn gini(pos: usize, neg: usize) -> f64 {
            let n = (pos + neg) as f64;
            1.0 - (pos as f64 / n).powi(2) - (neg as f64 / n).powi(2)
        }
        fn counts(node: &TreeNode) -> (usize, usize) {
            match node {
                TreeNode::Leaf { n_pos, n_neg } => (*n_pos, *n_neg),
                TreeNode::Split { left, right, .. } => {
                    let (lp, ln) = counts(left);
                    let (rp, rn) = counts(right);
                    (lp + rp, ln + rn)
                }
            }
        }
        fn check(node: &TreeNode) {
            if let TreeNode::Split { left, right, .. } = node {
                let (lp, ln) = counts(left);
                let (rp, rn) = counts(right);
                let n = (lp + ln + rp + rn) as f64;
                let parent = gini(lp + rp, ln + rn);
                let weighted = (lp + ln) as f64 / n * gini(lp, ln)
                    + (rp + rn) as f64 / n * gini(rp, rn);
                assert!(weighted <= parent + 1e-12);
                check(left);
                check(right);
            }
        }
        check(&tree.root);
    }
}
