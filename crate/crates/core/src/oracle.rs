//! Exhaustive solvers for tiny instances, used as ground truth in tests.

use crate::error::{Error, Result};
use crate::fairness::{FairnessParams, GroupModel};
use crate::geometry::{distance_matrix, DistanceMatrix, PointSet};

pub const MAX_FACILITIES: usize = 12;
pub const MAX_FAIR_POINTS: usize = 10;
pub const MAX_FAIR_K: usize = 3;

/// Slack for the integer-vs-real comparisons `count <= alpha·size`.
const RATIO_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `f64::INFINITY` when infeasible.
    pub optimal_radius: f64,
    /// Facility indices of an optimal center set.
    pub optimal_centers: Vec<usize>,
    /// Center position for every client.
    pub optimal_assignment: Vec<usize>,
    pub feasible: bool,
}

impl OracleResult {
    fn infeasible() -> Self {
        Self {
            optimal_radius: f64::INFINITY,
            optimal_centers: Vec::new(),
            optimal_assignment: Vec::new(),
            feasible: false,
        }
    }
}

/// Calls `f` with every k-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn check_k(k: usize, facilities: &PointSet) -> Result<()> {
    if k == 0 || k > facilities.len() {
        return Err(Error::InvalidK {
            k,
            available: facilities.len(),
        });
    }
    if facilities.len() > MAX_FACILITIES {
        return Err(Error::InstanceTooLarge(format!(
            "{} facilities (limit {MAX_FACILITIES})",
            facilities.len()
        )));
    }
    Ok(())
}

/// Minimum over all k-subsets of facilities of the nearest-center radius.
pub fn exact_classical(
    clients: &PointSet,
    facilities: Option<&PointSet>,
    k: usize,
) -> Result<OracleResult> {
    let facilities = facilities.unwrap_or(clients);
    check_k(k, facilities)?;
    let full = distance_matrix(clients, facilities)?;
    let mut best = OracleResult::infeasible();
    for_each_subset(facilities.len(), k, |subset| {
        let mut radius = 0.0f64;
        let mut labels = Vec::with_capacity(clients.len());
        for i in 0..clients.len() {
            let (pos, d) = subset
                .iter()
                .enumerate()
                .map(|(pos, &f)| (pos, full.get(i, f)))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            labels.push(pos);
            radius = radius.max(d);
        }
        if radius < best.optimal_radius {
            best = OracleResult {
                optimal_radius: radius,
                optimal_centers: subset.to_vec(),
                optimal_assignment: labels,
                feasible: true,
            };
        }
    });
    Ok(best)
}

struct FairSearch<'a> {
    full: &'a DistanceMatrix,
    subset: &'a [usize],
    model: &'a GroupModel,
    params: &'a FairnessParams,
    n: usize,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    counts: Vec<Vec<usize>>,
    best_radius: f64,
    best_labels: Option<Vec<usize>>,
}

impl FairSearch<'_> {
    fn dominance_hopeless(&self, center: usize, remaining: usize) -> bool {
        let cap = (self.sizes[center] + remaining) as f64;
        self.params
            .alpha()
            .iter()
            .zip(&self.counts[center])
            .any(|(&a, &c)| c as f64 > a * cap + RATIO_SLACK)
    }

    fn fair(&self) -> bool {
        (0..self.subset.len()).all(|c| {
            let size = self.sizes[c] as f64;
            self.counts[c].iter().enumerate().all(|(g, &cnt)| {
                let cnt = cnt as f64;
                cnt <= self.params.alpha()[g] * size + RATIO_SLACK
                    && cnt + RATIO_SLACK >= self.params.beta()[g] * size
            })
        })
    }

    fn descend(&mut self, point: usize, radius: f64) {
        if point == self.n {
            if radius < self.best_radius && self.fair() {
                self.best_radius = radius;
                self.best_labels = Some(self.labels.clone());
            }
            return;
        }
        let groups = self.model.signature_of(point).groups().to_vec();
        for pos in 0..self.subset.len() {
            let d = self.full.get(point, self.subset[pos]);
            if d >= self.best_radius {
                continue;
            }
            self.labels[point] = pos;
            self.sizes[pos] += 1;
            for &g in &groups {
                self.counts[pos][g] += 1;
            }
            if !self.dominance_hopeless(pos, self.n - point - 1) {
                self.descend(point + 1, radius.max(d));
            }
            self.sizes[pos] -= 1;
            for &g in &groups {
                self.counts[pos][g] -= 1;
            }
        }
    }
}

/// Minimum radius over all center subsets and all assignments satisfying the
/// dominance and protection bounds exactly.
pub fn exact_fair(
    clients: &PointSet,
    facilities: Option<&PointSet>,
    k: usize,
    params: &FairnessParams,
    model: &GroupModel,
) -> Result<OracleResult> {
    let facilities = facilities.unwrap_or(clients);
    check_k(k, facilities)?;
    if clients.len() > MAX_FAIR_POINTS || k > MAX_FAIR_K {
        return Err(Error::InstanceTooLarge(format!(
            "N={} k={k} (limits N<={MAX_FAIR_POINTS}, k<={MAX_FAIR_K})",
            clients.len()
        )));
    }
    params.check_groups(model)?;
    if model.num_points() != clients.len() {
        return Err(Error::InvalidGroupModel("model size differs from client count".into()));
    }
    let full = distance_matrix(clients, facilities)?;
    let n = clients.len();
    let l = model.num_groups();
    let mut best = OracleResult::infeasible();
    for_each_subset(facilities.len(), k, |subset| {
        let mut search = FairSearch {
            full: &full,
            subset,
            model,
            params,
            n,
            labels: vec![0; n],
            sizes: vec![0; k],
            counts: vec![vec![0; l]; k],
            best_radius: best.optimal_radius,
            best_labels: None,
        };
        search.descend(0, 0.0);
        if let Some(labels) = search.best_labels {
            best = OracleResult {
                optimal_radius: search.best_radius,
                optimal_centers: subset.to_vec(),
                optimal_assignment: labels,
                feasible: true,
            };
        }
    });
    Ok(best)
}
