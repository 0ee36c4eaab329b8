//! Fair k-center clustering.
//!
//! Centers are seeded with the farthest-first greedy heuristic. A binary
//! search over the radius `λ` then asks, for each guess, whether a small
//! linear program can distribute every (signature, joiner) class of points
//! among the centers it can reach without breaking the per-group dominance
//! (`alpha`) and protection (`beta`) bounds. The fractional solution at the
//! smallest feasible radius is rounded by independent per-point sampling.
//!
//! The approximation guarantee is 3 when centers are drawn from the clients
//! and 5 otherwise; fairness holds in expectation.

pub mod error;
pub mod fairness;
pub mod fdlp;
pub mod geometry;
pub mod greedy;
pub mod io;
pub mod joiner;
pub mod oracle;
pub mod pipeline;
pub mod simplex;
pub mod synth;

pub use error::{Error, Result};
pub use fairness::{
    audit, params_from_delta, Assignment, FairnessParams, GroupModel, Signature, ViolationReport,
};
pub use fdlp::{build_lp, lp_stats, FrequencyDistributorLp, LinearProgram, LpStats, Relation};
pub use geometry::{distance, distance_matrix, DistanceMatrix, PointSet};
pub use greedy::{assign_nearest, greedy_k_center, CenterSet};
pub use joiner::{build_frequency_table, joiner_of, FrequencyTable, JoinerKey};
pub use oracle::{exact_classical, exact_fair, OracleResult};
pub use pipeline::{
    fair_k_cluster, randomized_assign, search_radius, Clustering, FairSearch, SearchOptions,
    SearchTrace,
};
pub use simplex::{check_feasible, FeasibilityResult, Status};
