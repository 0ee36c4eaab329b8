//! Gaussian-blob instances with configurable group structure.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::GroupModel;
use crate::geometry::PointSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub dim: usize,
    pub blobs: usize,
    pub groups: usize,
    /// Standard deviation of each blob.
    pub spread: f64,
    /// Blob centers are uniform in `[0, extent]^dim`.
    pub extent: f64,
    /// Probability that a point's primary group is drawn uniformly instead of
    /// following its blob.
    pub mixing: f64,
    /// Probability that a point also joins a second, different group.
    pub overlap: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n: 200,
            dim: 2,
            blobs: 5,
            groups: 2,
            spread: 1.0,
            extent: 20.0,
            mixing: 0.5,
            overlap: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub points: PointSet,
    pub memberships: Vec<Vec<usize>>,
    pub model: GroupModel,
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    if cfg.n == 0 || cfg.dim == 0 || cfg.blobs == 0 || cfg.groups == 0 {
        return Err(Error::InvalidConfig(
            "n, dim, blobs and groups must all be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.mixing) || !(0.0..=1.0).contains(&cfg.overlap) {
        return Err(Error::InvalidConfig("mixing and overlap are probabilities".into()));
    }
    let noise = Normal::new(0.0, cfg.spread)
        .map_err(|e| Error::InvalidConfig(format!("spread: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centers: Vec<Vec<f64>> = (0..cfg.blobs)
        .map(|_| (0..cfg.dim).map(|_| rng.gen_range(0.0..cfg.extent)).collect())
        .collect();

    let mut coords = Vec::with_capacity(cfg.n * cfg.dim);
    let mut memberships = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let blob = rng.gen_range(0..cfg.blobs);
        coords.extend(centers[blob].iter().map(|&c| c + noise.sample(&mut rng)));
        let primary = if rng.gen_bool(cfg.mixing) {
            rng.gen_range(0..cfg.groups)
        } else {
            blob % cfg.groups
        };
        let mut groups = vec![primary];
        if cfg.groups > 1 && rng.gen_bool(cfg.overlap) {
            let other = (primary + rng.gen_range(1..cfg.groups)) % cfg.groups;
            groups.push(other);
            groups.sort_unstable();
        }
        memberships.push(groups);
    }
    let points = PointSet::from_flat(coords, cfg.dim)?;
    let model = GroupModel::new(memberships.clone(), cfg.groups)?;
    Ok(SyntheticData {
        points,
        memberships,
        model,
    })
}

/// Writes features `f0..` and 0/1 group indicator columns `g0..`.
pub fn write_csv<W: Write>(data: &SyntheticData, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = data.points.dim();
    let l = data.model.num_groups();
    let header: Vec<String> = (0..dim)
        .map(|i| format!("f{i}"))
        .chain((0..l).map(|g| format!("g{g}")))
        .collect();
    w.write_record(&header)?;
    for (p, groups) in data.points.iter().zip(&data.memberships) {
        let record: Vec<String> = p
            .iter()
            .map(|v| v.to_string())
            .chain((0..l).map(|g| if groups.contains(&g) { "1" } else { "0" }.to_string()))
            .collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
