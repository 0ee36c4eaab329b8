//! Dataset ingestion, experiment runs and report/plot emission.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{audit, params_from_delta, Assignment, FairnessParams, GroupModel};
use crate::geometry::{distance_matrix, PointSet};
use crate::greedy::{assign_nearest, greedy_k_center};
use crate::pipeline::{search_radius, FairSearch, SearchOptions, SearchTrace};

pub const SCHEMA_VERSION: u32 = 1;

/// Default wall-clock budget per run, in seconds.
pub const DEFAULT_TLE_SECONDS: f64 = 1800.0;

/// Which CSV columns carry features and protected groups.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnSpec {
    /// Protected-group columns. A column holding only `0`/`1` is one
    /// indicator group; any other column is categorical and becomes one
    /// group per distinct value.
    pub group_cols: Vec<String>,
    /// Feature columns; `None` means every non-group column.
    pub feature_cols: Option<Vec<String>>,
    /// Min-max scale each feature to `[0, 1]`.
    pub normalize: bool,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: PointSet,
    pub model: GroupModel,
    pub feature_names: Vec<String>,
    pub group_names: Vec<String>,
}

pub fn load_dataset(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Load(format!("{}: {e}", path.as_ref().display())))?;
    load_dataset_from_reader(file, spec)
}

pub fn load_dataset_from_reader<R: Read>(reader: R, spec: &ColumnSpec) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Load(format!("header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Load(format!("no column named {name:?}")))
    };

    if spec.group_cols.is_empty() {
        return Err(Error::Load("at least one group column is required".into()));
    }
    let group_idx = spec
        .group_cols
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>>>()?;
    let feature_idx: Vec<usize> = match &spec.feature_cols {
        Some(cols) => cols.iter().map(|c| column(c)).collect::<Result<_>>()?,
        None => (0..header.len()).filter(|i| !group_idx.contains(i)).collect(),
    };
    if feature_idx.is_empty() {
        return Err(Error::Load("no feature columns".into()));
    }

    let mut coords = Vec::new();
    let mut raw_groups: Vec<Vec<String>> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Load(format!("row {}: {e}", row + 1)))?;
        for &i in &feature_idx {
            let v: f64 = rec[i].parse().map_err(|_| {
                Error::Load(format!(
                    "row {}: feature {:?} is not numeric: {:?}",
                    row + 1,
                    header[i],
                    &rec[i]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Load(format!("row {}: non-finite feature", row + 1)));
            }
            coords.push(v);
        }
        raw_groups.push(group_idx.iter().map(|&i| rec[i].to_string()).collect());
    }
    if raw_groups.is_empty() {
        return Err(Error::Load("no data rows".into()));
    }

    // Column-by-column group expansion.
    let mut group_names = Vec::new();
    let mut memberships = vec![Vec::new(); raw_groups.len()];
    for (c, name) in spec.group_cols.iter().enumerate() {
        let values: BTreeSet<&str> = raw_groups.iter().map(|r| r[c].as_str()).collect();
        let indicator = values.iter().all(|v| *v == "0" || *v == "1");
        if indicator {
            let g = group_names.len();
            group_names.push(name.clone());
            for (p, r) in raw_groups.iter().enumerate() {
                if r[c] == "1" {
                    memberships[p].push(g);
                }
            }
        } else {
            let base = group_names.len();
            let values: Vec<&str> = values.into_iter().collect();
            group_names.extend(values.iter().map(|v| format!("{name}={v}")));
            for (p, r) in raw_groups.iter().enumerate() {
                let off = values.binary_search(&r[c].as_str()).expect("value collected above");
                memberships[p].push(base + off);
            }
        }
    }
    if let Some(p) = memberships.iter().position(Vec::is_empty) {
        return Err(Error::Load(format!("row {} belongs to no group", p + 1)));
    }

    let dim = feature_idx.len();
    if spec.normalize {
        min_max_scale(&mut coords, dim);
    }
    let points = PointSet::from_flat(coords, dim)?;
    let model = GroupModel::new(memberships, group_names.len())?;
    Ok(Dataset {
        points,
        model,
        feature_names: feature_idx.iter().map(|&i| header[i].clone()).collect(),
        group_names,
    })
}

fn min_max_scale(coords: &mut [f64], dim: usize) {
    for f in 0..dim {
        let col = coords.iter().skip(f).step_by(dim);
        let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        for v in coords.iter_mut().skip(f).step_by(dim) {
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fair,
    Greedy,
}

/// Fairness bounds as given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bounds {
    /// Per-group lists; a single value applies to every group.
    Explicit { alpha: Vec<f64>, beta: Vec<f64> },
    Delta(f64),
}

impl Bounds {
    pub fn resolve(&self, model: &GroupModel) -> Result<FairnessParams> {
        match self {
            Bounds::Delta(d) => params_from_delta(model, *d),
            Bounds::Explicit { alpha, beta } => {
                let l = model.num_groups();
                let expand = |v: &Vec<f64>, name: &str| match v.len() {
                    1 => Ok(vec![v[0]; l]),
                    n if n == l => Ok(v.clone()),
                    n => Err(Error::InvalidConfig(format!(
                        "{name} has {n} values but the dataset has {l} groups"
                    ))),
                };
                FairnessParams::new(expand(alpha, "alpha")?, expand(beta, "beta")?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub columns: ColumnSpec,
    pub k: usize,
    pub epsilon: f64,
    pub bounds: Bounds,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub repeats: usize,
    pub trace: bool,
    pub tle_seconds: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        if !(self.tle_seconds > 0.0) {
            return Err(Error::InvalidConfig("time limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    #[serde(rename = "ok")]
    Ok,
    /// No fair solution exists for the given bounds.
    #[serde(rename = "N/A")]
    NotAvailable,
    #[serde(rename = "TLE")]
    TimeLimitExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationSummary {
    pub median: f64,
    pub max: f64,
    pub median_ceil: f64,
    pub max_ceil: f64,
    pub per_repeat: Vec<f64>,
}

impl ViolationSummary {
    pub fn from_values(values: Vec<f64>) -> Self {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let max = sorted[n - 1];
        Self {
            median,
            max,
            median_ceil: median.ceil(),
            max_ceil: max.ceil(),
            per_repeat: values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterComposition {
    pub center: usize,
    pub size: usize,
    pub group_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSummary {
    pub variables: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub status: RunStatus,
    pub algorithm: Algorithm,
    pub dataset: String,
    pub n: usize,
    pub groups: usize,
    pub max_groups_per_point: usize,
    pub k: usize,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub seed: u64,
    pub repeats: usize,
    /// Radius found by the search (fair) or the greedy radius.
    pub cost: Option<f64>,
    /// Mean over repeats of the largest point-to-center distance.
    pub assigned_radius: Option<f64>,
    pub violation: Option<ViolationSummary>,
    pub runtime_seconds: f64,
    pub centers: Vec<usize>,
    /// Cluster composition of the first repeat.
    pub clusters: Vec<ClusterComposition>,
    pub lp: Option<LpSummary>,
    pub trace: Option<SearchTrace>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let data = load_dataset(&config.input, &config.columns)?;
    run_dataset(&data, config)
}

/// Everything the fair algorithm leaves behind, for debugging dumps.
pub struct RunArtifacts {
    pub report: RunReport,
    pub search: Option<FairSearch>,
}

pub fn run_dataset(data: &Dataset, config: &RunConfig) -> Result<RunReport> {
    Ok(run_dataset_with_artifacts(data, config)?.report)
}

pub fn run_dataset_with_artifacts(data: &Dataset, config: &RunConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let params = config.bounds.resolve(&data.model)?;
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        status: RunStatus::Ok,
        algorithm: config.algorithm,
        dataset: config.input.display().to_string(),
        n: data.points.len(),
        groups: data.model.num_groups(),
        max_groups_per_point: data.model.max_groups_per_point(),
        k: config.k,
        epsilon: config.epsilon,
        delta: match config.bounds {
            Bounds::Delta(d) => Some(d),
            Bounds::Explicit { .. } => None,
        },
        alpha: params.alpha().to_vec(),
        beta: params.beta().to_vec(),
        seed: config.seed,
        repeats: config.repeats,
        cost: None,
        assigned_radius: None,
        violation: None,
        runtime_seconds: 0.0,
        centers: Vec::new(),
        clusters: Vec::new(),
        lp: None,
        trace: None,
    };

    let start = Instant::now();
    let mut assignments: Vec<(Assignment, f64)> = Vec::with_capacity(config.repeats);
    let mut search_state = None;
    match config.algorithm {
        Algorithm::Greedy => {
            let centers = greedy_k_center(&data.points, None, config.k)?;
            let dmat = distance_matrix(&data.points, centers.coords())?;
            let labels = assign_nearest(&dmat)?;
            let asg = Assignment::new(labels, centers.len())?;
            for _ in 0..config.repeats {
                assignments.push((asg.clone(), centers.radius()));
            }
            report.cost = Some(centers.radius());
            report.centers = centers.indices().to_vec();
        }
        Algorithm::Fair => {
            let options = SearchOptions {
                epsilon: config.epsilon,
                deadline: Some(start + Duration::from_secs_f64(config.tle_seconds)),
            };
            let search = match search_radius(&data.points, None, config.k, &params, &data.model, options) {
                Ok(s) => s,
                Err(Error::InfeasibleFairness) => {
                    report.status = RunStatus::NotAvailable;
                    report.runtime_seconds = start.elapsed().as_secs_f64();
                    return Ok(RunArtifacts { report, search: None });
                }
                Err(Error::TimeLimit { trace }) => {
                    report.status = RunStatus::TimeLimitExceeded;
                    report.trace = Some(*trace);
                    report.runtime_seconds = start.elapsed().as_secs_f64();
                    return Ok(RunArtifacts { report, search: None });
                }
                Err(e) => return Err(e),
            };
            for rep in 0..config.repeats {
                let c = search.round(&data.model, &params, config.seed.wrapping_add(rep as u64))?;
                assignments.push((c.assignment, c.radius));
            }
            report.cost = Some(search.lambda);
            report.centers = search.centers.indices().to_vec();
            report.lp = Some(LpSummary {
                variables: search.lp.variables().len(),
                rows: search.lp.program().rows.len(),
            });
            if config.trace {
                report.trace = Some(search.trace.clone());
            }
            search_state = Some(search);
        }
    }

    let mut epsilons = Vec::with_capacity(assignments.len());
    let mut radius_sum = 0.0;
    for (i, (asg, radius)) in assignments.iter().enumerate() {
        let v = audit(asg, &data.model, &params)?;
        epsilons.push(v.epsilon);
        radius_sum += radius;
        if i == 0 {
            report.clusters = report
                .centers
                .iter()
                .enumerate()
                .map(|(c, &center)| ClusterComposition {
                    center,
                    size: v.cluster_sizes[c],
                    group_counts: v.group_counts[c].clone(),
                })
                .collect();
        }
    }
    report.assigned_radius = Some(radius_sum / assignments.len() as f64);
    report.violation = Some(ViolationSummary::from_values(epsilons));
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(RunArtifacts {
        report,
        search: search_state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    K,
    Delta,
    Alpha,
    Groups,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::K => "k",
            SweepAxis::Delta => "delta",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Groups => "groups",
        }
    }

    fn value(self, r: &RunReport) -> Result<f64> {
        match self {
            SweepAxis::K => Ok(r.k as f64),
            SweepAxis::Groups => Ok(r.groups as f64),
            SweepAxis::Delta => r
                .delta
                .ok_or_else(|| Error::InvalidConfig("delta sweep over reports without delta".into())),
            SweepAxis::Alpha => r
                .alpha
                .first()
                .copied()
                .ok_or_else(|| Error::InvalidConfig("report has no alpha".into())),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(SweepAxis::K),
            "delta" => Ok(SweepAxis::Delta),
            "alpha" => Ok(SweepAxis::Alpha),
            "groups" => Ok(SweepAxis::Groups),
            other => Err(Error::InvalidConfig(format!("unknown sweep axis {other:?}"))),
        }
    }
}

/// Tidy CSV with one `(sweep value, metric, value)` row per report and
/// metric. Metrics are `cost`, `runtime_seconds` and `epsilon_median`;
/// a metric a report lacks (N/A or TLE runs) is written as an empty value.
pub fn emit_plot_data(reports: &[RunReport], axis: SweepAxis) -> Result<String> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidConfig("no reports to plot".into()))?;
    if let Some(r) = reports.iter().find(|r| r.dataset != first.dataset) {
        return Err(Error::InvalidConfig(format!(
            "sweep mixes datasets {:?} and {:?}",
            first.dataset, r.dataset
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([axis.name(), "metric", "value"])?;
    let fmt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in reports {
        let x = axis.value(r)?.to_string();
        w.write_record([x.as_str(), "cost", &fmt(r.cost)])?;
        w.write_record([x.as_str(), "runtime_seconds", &r.runtime_seconds.to_string()])?;
        w.write_record([
            x.as_str(),
            "epsilon_median",
            &fmt(r.violation.as_ref().map(|v| v.median)),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
