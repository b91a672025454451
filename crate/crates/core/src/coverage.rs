//! Pure-group open-ball coverage: each group of rows is covered by greedily
//! selected balls that contain no row of any other group.
//!
//! A candidate ball sits on an uncovered row and extends to the distance of
//! the nearest enemy row (exclusive). Selection repeatedly takes the ball
//! covering the most still-uncovered own-group rows; ties go to the larger
//! radius, then the smaller center row id, so construction is deterministic.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, RowId};
use crate::error::{Error, Result};
use crate::groups::GroupId;

/// Euclidean distance over normalized feature rows.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// One selected ball. `assigned_rows` holds the rows newly covered when the
/// ball was selected; rows covered earlier by another ball stay with that
/// ball even when they also fall inside this one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center_row: RowId,
    pub group_id: GroupId,
    pub radius: f64,
    pub assigned_rows: Vec<RowId>,
    pub density: f64,
}

impl Ball {
    pub fn covered_count(&self) -> usize {
        self.assigned_rows.len()
    }

    /// Radius-0 balls arise from coincident enemy rows; their open ball is
    /// empty and they cover exactly their center.
    pub fn is_degenerate(&self) -> bool {
        self.radius == 0.0
    }
}

/// The full coverage: balls in selection order (groups ascending, selection
/// order within each group) plus the row-to-ball assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub balls: Vec<Ball>,
    /// Row id → index into `balls`.
    pub assignment: BTreeMap<RowId, usize>,
    pub group_ids: BTreeSet<GroupId>,
}

impl Coverage {
    /// Indices of this group's balls in selection order.
    pub fn group_balls(&self, group: GroupId) -> Vec<usize> {
        (0..self.balls.len())
            .filter(|&i| self.balls[i].group_id == group)
            .collect()
    }

    /// Dump as CSV: one line per ball, selection order within its group.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            out,
            "group_id,selection_order,center_row,radius,covered_count,density"
        )?;
        let mut order: BTreeMap<GroupId, usize> = BTreeMap::new();
        for ball in &self.balls {
            let rank = order.entry(ball.group_id).or_insert(0);
            writeln!(
                out,
                "{},{},{},{},{},{}",
                ball.group_id,
                rank,
                ball.center_row,
                ball.radius,
                ball.covered_count(),
                ball.density
            )?;
            *rank += 1;
        }
        out.flush()?;
        Ok(())
    }
}

/// Radius of the largest pure open ball centered on `center_pos`: the
/// distance to the nearest row of any other group. With no enemy rows the
/// radius is the distance to the farthest own-group row plus one, which
/// covers the whole group.
pub fn max_pure_radius(ds: &Dataset, group_of: &[GroupId], center_pos: usize) -> f64 {
    let center = ds.row(center_pos);
    let own_group = group_of[center_pos];
    let mut nearest_enemy = f64::INFINITY;
    let mut farthest_own = 0.0f64;
    for pos in 0..ds.n_rows() {
        let d = euclidean(center, ds.row(pos));
        if group_of[pos] == own_group {
            farthest_own = farthest_own.max(d);
        } else {
            nearest_enemy = nearest_enemy.min(d);
        }
    }
    if nearest_enemy.is_finite() {
        nearest_enemy
    } else {
        farthest_own + 1.0
    }
}

/// Per-ball attribute row, the raw material for percentile thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallAttributes {
    pub ball_index: usize,
    pub radius: f64,
    pub covered_count: usize,
    pub density: f64,
    pub degenerate: bool,
}

/// Attribute view of a coverage, aligned with ball indices.
pub fn ball_attributes(cov: &Coverage) -> Vec<BallAttributes> {
    cov.balls
        .iter()
        .enumerate()
        .map(|(i, b)| BallAttributes {
            ball_index: i,
            radius: b.radius,
            covered_count: b.covered_count(),
            density: b.density,
            degenerate: b.is_degenerate(),
        })
        .collect()
}

/// Build the coverage for every group in `groups`. Groups are processed in
/// ascending id order; each group's selection is independent of the others.
pub fn build_coverage(
    ds: &Dataset,
    group_of: &[GroupId],
    groups: &BTreeSet<GroupId>,
) -> Result<Coverage> {
    if group_of.len() != ds.n_rows() {
        return Err(Error::Validation(
            "group assignment not aligned with dataset rows".into(),
        ));
    }
    if groups.is_empty() {
        return Err(Error::Validation("no groups to cover".into()));
    }
    let mut balls = Vec::new();
    let mut assignment = BTreeMap::new();
    for &group in groups {
        cover_group(ds, group_of, group, &mut balls, &mut assignment)?;
    }
    Ok(Coverage {
        balls,
        assignment,
        group_ids: groups.clone(),
    })
}

fn cover_group(
    ds: &Dataset,
    group_of: &[GroupId],
    group: GroupId,
    balls: &mut Vec<Ball>,
    assignment: &mut BTreeMap<RowId, usize>,
) -> Result<()> {
    let members: Vec<usize> = (0..ds.n_rows()).filter(|&p| group_of[p] == group).collect();
    if members.is_empty() {
        return Err(Error::Validation(format!("group {group} has no instances")));
    }
    let m = members.len();

    let radii: Vec<f64> = members
        .iter()
        .map(|&p| max_pure_radius(ds, group_of, p))
        .collect();

    // membership[i]: member indices inside candidate i's open ball. A
    // radius-0 ball covers exactly its center.
    let membership: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            if radii[i] == 0.0 {
                return vec![i as u32];
            }
            let center = ds.row(members[i]);
            (0..m)
                .filter(|&j| euclidean(center, ds.row(members[j])) < radii[i])
                .map(|j| j as u32)
                .collect()
        })
        .collect();

    // Lazy greedy: heap keys are (count, radius, smallest row id) with
    // possibly stale counts. Counts only shrink as rows get covered, so the
    // first entry that verifies as current is the true maximum.
    let mut heap: BinaryHeap<(usize, u64, Reverse<RowId>, usize)> = (0..m)
        .map(|i| {
            (
                membership[i].len(),
                radii[i].to_bits(),
                Reverse(ds.row_ids()[members[i]]),
                i,
            )
        })
        .collect();

    let mut covered = vec![false; m];
    let mut n_covered = 0;
    while n_covered < m {
        let (stored, rbits, rid, i) = heap.pop().expect("uncovered rows imply candidates");
        if covered[i] {
            // Centers must be newly covered by their own ball; a covered row
            // no longer proposes one.
            continue;
        }
        let current = membership[i].iter().filter(|&&j| !covered[j as usize]).count();
        if current < stored {
            heap.push((current, rbits, rid, i));
            continue;
        }
        let assigned: Vec<RowId> = membership[i]
            .iter()
            .filter(|&&j| !covered[j as usize])
            .map(|&j| ds.row_ids()[members[j as usize]])
            .collect();
        for &j in &membership[i] {
            if !covered[j as usize] {
                covered[j as usize] = true;
                n_covered += 1;
            }
        }
        let radius = radii[i];
        let density = if radius > 0.0 {
            assigned.len() as f64 / radius
        } else {
            0.0
        };
        let index = balls.len();
        for &row in &assigned {
            assignment.insert(row, index);
        }
        balls.push(Ball {
            center_row: ds.row_ids()[members[i]],
            group_id: group,
            radius,
            assigned_rows: assigned,
            density,
        });
    }
    Ok(())
}
