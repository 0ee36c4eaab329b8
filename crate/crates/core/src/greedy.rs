//! Farthest-first (Gonzalez) greedy k-center.

use crate::error::{Error, Result};
use crate::geometry::{distance_matrix, euclidean, DistanceMatrix, PointSet};

/// Chosen centers, as indices into the facility set.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    indices: Vec<usize>,
    coords: PointSet,
    radius: f64,
}

impl CenterSet {
    /// Resolves `indices` against `facilities` and computes the induced radius
    /// over `clients`.
    pub fn from_indices(
        clients: &PointSet,
        facilities: &PointSet,
        indices: Vec<usize>,
    ) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidK {
                k: 0,
                available: facilities.len(),
            });
        }
        let mut seen = indices.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != indices.len() || seen.last().is_some_and(|&i| i >= facilities.len()) {
            return Err(Error::InvalidK {
                k: indices.len(),
                available: facilities.len(),
            });
        }
        let coords = facilities.select(&indices)?;
        let radius = distance_matrix(clients, &coords)?.max_row_min();
        Ok(Self {
            indices,
            coords,
            radius,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn coords(&self) -> &PointSet {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `max_i min_j d(client i, center j)` at construction time.
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Greedy k-center over `clients`, opening centers from `facilities`.
///
/// `facilities == None` means the centers are drawn from the clients
/// themselves. Otherwise each farthest client `u` opens its nearest facility
/// `σ(u)`; if that facility is already open, the nearest unopened facility to
/// `u` is used instead so that exactly `k` distinct centers come back. The
/// first client is always index 0 and farthest-point ties go to the lowest
/// index.
pub fn greedy_k_center(
    clients: &PointSet,
    facilities: Option<&PointSet>,
    k: usize,
) -> Result<CenterSet> {
    let facility_set = facilities.unwrap_or(clients);
    if k == 0 || k > facility_set.len() {
        return Err(Error::InvalidK {
            k,
            available: facility_set.len(),
        });
    }
    if clients.dim() != facility_set.dim() {
        return Err(Error::DimensionMismatch {
            expected: clients.dim(),
            got: facility_set.dim(),
        });
    }

    let n = clients.len();
    let mut open = vec![false; facility_set.len()];
    let mut indices = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; n];
    let mut next_client = 0usize;

    for _ in 0..k {
        let u = clients.point(next_client);
        let center = match facilities {
            None if !open[next_client] => next_client,
            _ => nearest_facility(u, facility_set, &open, facilities.is_some()),
        };
        open[center] = true;
        indices.push(center);

        let c = facility_set.point(center);
        let mut far = 0usize;
        let mut far_dist = -1.0f64;
        for (i, p) in clients.iter().enumerate() {
            let d = euclidean(p, c);
            if d < nearest[i] {
                nearest[i] = d;
            }
            if nearest[i] > far_dist {
                far_dist = nearest[i];
                far = i;
            }
        }
        next_client = far;
    }

    let radius = nearest.iter().copied().fold(0.0, f64::max);
    let coords = facility_set.select(&indices)?;
    Ok(CenterSet {
        indices,
        coords,
        radius,
    })
}

/// Nearest facility to `u`, lowest index on ties. With `prefer_any` the
/// globally nearest facility is tried first and kept if still closed; the
/// fallback is always the nearest closed one.
fn nearest_facility(u: &[f64], facilities: &PointSet, open: &[bool], prefer_any: bool) -> usize {
    let best = |skip_open: bool| {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (j, f) in facilities.iter().enumerate() {
            if skip_open && open[j] {
                continue;
            }
            let d = euclidean(u, f);
            if d < best_d {
                best_d = d;
                best = Some(j);
            }
        }
        best
    };
    if prefer_any {
        if let Some(j) = best(false) {
            if !open[j] {
                return j;
            }
        }
    }
    best(true).expect("k <= |facilities| leaves a closed facility")
}

/// Maps each client to its nearest center position (lowest position on ties).
pub fn assign_nearest(dmat: &DistanceMatrix) -> Result<Vec<usize>> {
    if dmat.cols() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok((0..dmat.rows())
        .map(|i| {
            let row = dmat.row(i);
            let mut best = 0;
            for (j, &d) in row.iter().enumerate().skip(1) {
                if d < row[best] {
                    best = j;
                }
            }
            best
        })
        .collect())
}
