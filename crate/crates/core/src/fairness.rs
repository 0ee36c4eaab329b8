//! Protected groups, signatures, fairness bounds and the violation audit.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted, duplicate-free list of the groups a point belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signature(Vec<usize>);

impl Signature {
    pub fn new(mut groups: Vec<usize>) -> Self {
        groups.sort_unstable();
        groups.dedup();
        Self(groups)
    }

    pub fn groups(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, group: usize) -> bool {
        self.0.binary_search(&group).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Group membership of every point.
///
/// Distinct signatures are interned in lexicographic order, so comparing
/// signature ids is the same as comparing signatures.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    num_groups: usize,
    signatures: Vec<Signature>,
    point_signature: Vec<u32>,
    group_sizes: Vec<usize>,
    max_groups_per_point: usize,
}

impl GroupModel {
    pub fn new(memberships: Vec<Vec<usize>>, num_groups: usize) -> Result<Self> {
        if memberships.is_empty() {
            return Err(Error::EmptyInput);
        }
        let sigs: Vec<Signature> = memberships.into_iter().map(Signature::new).collect();
        for (i, s) in sigs.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidGroupModel(format!(
                    "point {i} belongs to no group"
                )));
            }
            if let Some(&g) = s.groups().last() {
                if g >= num_groups {
                    return Err(Error::InvalidGroupModel(format!(
                        "point {i} references group {g} but only {num_groups} groups exist"
                    )));
                }
            }
        }
        let distinct: Vec<Signature> = sigs.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let mut group_sizes = vec![0usize; num_groups];
        let mut max_groups_per_point = 0;
        let point_signature = sigs
            .iter()
            .map(|s| {
                for &g in s.groups() {
                    group_sizes[g] += 1;
                }
                max_groups_per_point = max_groups_per_point.max(s.len());
                distinct.binary_search(s).expect("interned") as u32
            })
            .collect();
        Ok(Self {
            num_groups,
            signatures: distinct,
            point_signature,
            group_sizes,
            max_groups_per_point,
        })
    }

    /// One group per point, given as a label in `0..num_groups`.
    pub fn from_labels(labels: &[usize], num_groups: usize) -> Result<Self> {
        Self::new(labels.iter().map(|&g| vec![g]).collect(), num_groups)
    }

    pub fn num_points(&self) -> usize {
        self.point_signature.len()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// Δ: the largest number of groups any single point belongs to.
    pub fn max_groups_per_point(&self) -> usize {
        self.max_groups_per_point
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    /// `|C_i| / N` for every group.
    pub fn ratios(&self) -> Vec<f64> {
        let n = self.num_points() as f64;
        self.group_sizes.iter().map(|&s| s as f64 / n).collect()
    }

    /// All distinct signatures, sorted.
    pub fn signatures(&self) -> &[Signature] {
        &self.signatures
    }

    pub fn signature_id(&self, point: usize) -> u32 {
        self.point_signature[point]
    }

    pub fn signature_of(&self, point: usize) -> &Signature {
        &self.signatures[self.point_signature[point] as usize]
    }

    pub fn in_group(&self, point: usize, group: usize) -> bool {
        self.signature_of(point).contains(group)
    }
}

/// Per-group upper (`alpha`) and lower (`beta`) bounds on cluster composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessParams {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl FairnessParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::InvalidParams(format!(
                "alpha has {} entries but beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        for (i, (&a, &b)) in alpha.iter().zip(&beta).enumerate() {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidParams(format!(
                    "group {i}: alpha={a}, beta={b} must lie in [0, 1]"
                )));
            }
            if b > a {
                return Err(Error::InvalidParams(format!(
                    "group {i}: beta={b} exceeds alpha={a}"
                )));
            }
        }
        Ok(Self { alpha, beta })
    }

    /// Same bounds for every one of `num_groups` groups.
    pub fn uniform(num_groups: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(vec![alpha; num_groups], vec![beta; num_groups])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn num_groups(&self) -> usize {
        self.alpha.len()
    }

    pub(crate) fn check_groups(&self, model: &GroupModel) -> Result<()> {
        if self.num_groups() != model.num_groups() {
            return Err(Error::InvalidParams(format!(
                "parameters cover {} groups but the model has {}",
                self.num_groups(),
                model.num_groups()
            )));
        }
        Ok(())
    }
}

/// `beta_i = r_i (1 - delta)` and `alpha_i = min(1, r_i / (1 - delta))`.
pub fn params_from_delta(model: &GroupModel, delta: f64) -> Result<FairnessParams> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidDelta(delta));
    }
    let ratios = model.ratios();
    let alpha = ratios.iter().map(|r| (r / (1.0 - delta)).min(1.0)).collect();
    let beta = ratios.iter().map(|r| r * (1.0 - delta)).collect();
    FairnessParams::new(alpha, beta)
}

/// Cluster label (center position) for every point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    num_centers: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, num_centers: usize) -> Result<Self> {
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_centers) {
            return Err(Error::InvalidAssignment(format!(
                "point {i} assigned to center {l}, but only {num_centers} centers are open"
            )));
        }
        Ok(Self {
            labels,
            num_centers,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_centers(&self) -> usize {
        self.num_centers
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_centers];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Fairness excess per (center, group) and the overall additive violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub cluster_sizes: Vec<usize>,
    /// `group_counts[center][group]`
    pub group_counts: Vec<Vec<usize>>,
    /// `max(0, |C_i ∩ cluster| - alpha_i |cluster|)`
    pub dominance_excess: Vec<Vec<f64>>,
    /// `max(0, beta_i |cluster| - |C_i ∩ cluster|)`
    pub protection_excess: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl ViolationReport {
    pub fn is_fair(&self) -> bool {
        self.epsilon == 0.0
    }
}

pub fn audit(
    assignment: &Assignment,
    model: &GroupModel,
    params: &FairnessParams,
) -> Result<ViolationReport> {
    params.check_groups(model)?;
    if assignment.len() != model.num_points() {
        return Err(Error::InvalidAssignment(format!(
            "{} of {} points are assigned",
            assignment.len(),
            model.num_points()
        )));
    }
    let k = assignment.num_centers();
    let l = model.num_groups();
    let cluster_sizes = assignment.cluster_sizes();
    let mut group_counts = vec![vec![0usize; l]; k];
    for (p, &c) in assignment.labels().iter().enumerate() {
        for &g in model.signature_of(p).groups() {
            group_counts[c][g] += 1;
        }
    }
    let mut dominance_excess = vec![vec![0.0; l]; k];
    let mut protection_excess = vec![vec![0.0; l]; k];
    let mut epsilon = 0.0f64;
    for c in 0..k {
        let size = cluster_sizes[c] as f64;
        for g in 0..l {
            let count = group_counts[c][g] as f64;
            let rd = (count - params.alpha()[g] * size).max(0.0);
            let mp = (params.beta()[g] * size - count).max(0.0);
            dominance_excess[c][g] = rd;
            protection_excess[c][g] = mp;
            epsilon = epsilon.max(rd).max(mp);
        }
    }
    Ok(ViolationReport {
        cluster_sizes,
        group_counts,
        dominance_excess,
        protection_excess,
        epsilon,
    })
}
