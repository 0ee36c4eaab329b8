//! Radius search over frequency-distributor LPs and randomized rounding of the
//! final fractional solution.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{audit, Assignment, FairnessParams, GroupModel, ViolationReport};
use crate::fdlp::{build_lp, FrequencyDistributorLp};
use crate::geometry::{distance_matrix, DistanceMatrix, PointSet};
use crate::greedy::{greedy_k_center, CenterSet};
use crate::joiner::{build_frequency_table, first_unreachable, FrequencyTable, MAX_CENTERS};
use crate::simplex::{check_feasible, TOLERANCE};

/// One halving step of the radius search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub low: f64,
    pub high: f64,
    pub lambda: f64,
    pub reachable: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchTrace {
    /// Initial upper end of the interval, `2·max(d)`.
    pub initial_high: f64,
    pub steps: Vec<SearchStep>,
    pub final_lambda: f64,
}

impl SearchTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Stop once the bracketing interval is at most this wide.
    pub epsilon: f64,
    pub deadline: Option<Instant>,
}

impl SearchOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            deadline: None,
        }
    }
}

/// State at the smallest feasible radius found by the search.
#[derive(Debug, Clone)]
pub struct FairSearch {
    pub centers: CenterSet,
    pub dmat: DistanceMatrix,
    pub table: FrequencyTable,
    pub lp: FrequencyDistributorLp,
    pub solution: Vec<f64>,
    pub lambda: f64,
    pub trace: SearchTrace,
}

/// A fair clustering produced by rounding one LP solution.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub centers: Vec<usize>,
    pub assignment: Assignment,
    /// Radius returned by the search.
    pub lambda: f64,
    /// Largest distance between a point and its assigned center.
    pub radius: f64,
    pub lp_solution: Vec<f64>,
    pub seed: u64,
    pub violation: ViolationReport,
}

/// Result of probing one radius.
enum Probe {
    Unreachable,
    Infeasible,
    Feasible(FrequencyTable, FrequencyDistributorLp, Vec<f64>),
}

fn probe(
    model: &GroupModel,
    params: &FairnessParams,
    dmat: &DistanceMatrix,
    lambda: f64,
) -> Result<Probe> {
    if first_unreachable(dmat, lambda).is_some() {
        return Ok(Probe::Unreachable);
    }
    let table = build_frequency_table(model, dmat, lambda)?;
    let lp = build_lp(&table, params, model)?;
    let result = check_feasible(lp.program())?;
    Ok(match result.solution {
        Some(x) => Probe::Feasible(table, lp, x),
        None => Probe::Infeasible,
    })
}

/// Greedy seeding followed by binary search on the radius.
///
/// The interval starts at `[0, 2·max(d)]`; a guess is infeasible when some
/// point reaches no center or the LP has no solution. The upper end is
/// checked first so that unsatisfiable fairness bounds fail with
/// [`Error::InfeasibleFairness`] instead of searching forever.
pub fn search_radius(
    clients: &PointSet,
    facilities: Option<&PointSet>,
    k: usize,
    params: &FairnessParams,
    model: &GroupModel,
    options: SearchOptions,
) -> Result<FairSearch> {
    if !(options.epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "search epsilon must be positive, got {}",
            options.epsilon
        )));
    }
    if k > MAX_CENTERS {
        return Err(Error::TooManyCenters { k });
    }
    params.check_groups(model)?;
    if model.num_points() != clients.len() {
        return Err(Error::InvalidGroupModel(format!(
            "model has {} points but there are {} clients",
            model.num_points(),
            clients.len()
        )));
    }

    let centers = greedy_k_center(clients, facilities, k)?;
    let dmat = distance_matrix(clients, centers.coords())?;

    let mut low = 0.0;
    let mut high = 2.0 * dmat.max();
    let mut trace = SearchTrace {
        initial_high: high,
        ..Default::default()
    };
    let (mut table, mut lp, mut solution) = match probe(model, params, &dmat, high)? {
        Probe::Feasible(t, l, x) => (t, l, x),
        _ => return Err(Error::InfeasibleFairness),
    };

    while high - low > options.epsilon {
        if options.deadline.is_some_and(|d| Instant::now() >= d) {
            trace.final_lambda = high;
            return Err(Error::TimeLimit {
                trace: Box::new(trace),
            });
        }
        let lambda = 0.5 * (low + high);
        let mut step = SearchStep {
            low,
            high,
            lambda,
            reachable: true,
            feasible: false,
        };
        match probe(model, params, &dmat, lambda)? {
            Probe::Unreachable => {
                step.reachable = false;
                low = lambda;
            }
            Probe::Infeasible => low = lambda,
            Probe::Feasible(t, l, x) => {
                step.feasible = true;
                high = lambda;
                table = t;
                lp = l;
                solution = x;
            }
        }
        trace.steps.push(step);
        // Midpoint equal to an end means the interval cannot shrink further.
        if lambda == low && lambda == high {
            break;
        }
    }
    trace.final_lambda = high;

    Ok(FairSearch {
        centers,
        dmat,
        table,
        lp,
        solution,
        lambda: high,
        trace,
    })
}

impl FairSearch {
    /// Rounds the cached LP solution into a concrete assignment.
    pub fn round(
        &self,
        model: &GroupModel,
        params: &FairnessParams,
        seed: u64,
    ) -> Result<Clustering> {
        let assignment = randomized_assign(&self.lp, &self.solution, &self.table, model.num_points(), seed)?;
        let radius = assignment
            .labels()
            .iter()
            .enumerate()
            .map(|(p, &c)| self.dmat.get(p, c))
            .fold(0.0, f64::max);
        let violation = audit(&assignment, model, params)?;
        Ok(Clustering {
            centers: self.centers.indices().to_vec(),
            assignment,
            lambda: self.lambda,
            radius,
            lp_solution: self.solution.clone(),
            seed,
            violation,
        })
    }
}

/// Runs the full pipeline: greedy seeding, radius search, and one rounding.
#[allow(clippy::too_many_arguments)]
pub fn fair_k_cluster(
    clients: &PointSet,
    facilities: Option<&PointSet>,
    k: usize,
    params: &FairnessParams,
    model: &GroupModel,
    epsilon: f64,
    seed: u64,
) -> Result<(Clustering, SearchTrace)> {
    let search = search_radius(clients, facilities, k, params, model, SearchOptions::new(epsilon))?;
    let clustering = search.round(model, params, seed)?;
    Ok((clustering, search.trace))
}

/// Per-point random stream: the same `(seed, point)` pair always draws the
/// same value, independent of iteration order.
fn point_rng(seed: u64, point: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point as u64);
    rng
}

/// Sends every point of `L(c, S', λ)` independently to center `j ∈ S'` with
/// probability `x[c,S',j] / |L(c,S',λ)|`.
pub fn randomized_assign(
    lp: &FrequencyDistributorLp,
    solution: &[f64],
    table: &FrequencyTable,
    num_points: usize,
    seed: u64,
) -> Result<Assignment> {
    if solution.len() != lp.variables().len() {
        return Err(Error::InconsistentProbabilities(format!(
            "solution has {} values for {} variables",
            solution.len(),
            lp.variables().len()
        )));
    }
    let mut labels = vec![usize::MAX; num_points];
    let mut centers = Vec::new();
    let mut cumulative = Vec::new();
    for (e, entry) in table.entries().iter().enumerate() {
        let n = entry.count() as f64;
        centers.clear();
        cumulative.clear();
        let mut acc = 0.0;
        for v in lp.entry_variables(e) {
            let x = solution[v];
            if x < -TOLERANCE {
                return Err(Error::InconsistentProbabilities(format!(
                    "variable {v} has negative value {x}"
                )));
            }
            acc += x.max(0.0) / n;
            centers.push(lp.variables()[v].center);
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > 1e-6 {
            return Err(Error::InconsistentProbabilities(format!(
                "entry {e} probabilities sum to {acc}"
            )));
        }
        for &p in &entry.members {
            if p >= num_points {
                return Err(Error::InvalidAssignment(format!(
                    "table member {p} out of range"
                )));
            }
            let u: f64 = point_rng(seed, p).gen::<f64>() * acc;
            let pick = cumulative.iter().position(|&c| u < c).unwrap_or(centers.len() - 1);
            labels[p] = centers[pick];
        }
    }
    if let Some(p) = labels.iter().position(|&l| l == usize::MAX) {
        return Err(Error::InvalidAssignment(format!(
            "point {p} is not covered by the frequency table"
        )));
    }
    Assignment::new(labels, table.num_centers())
}
