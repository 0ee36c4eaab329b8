//! Point storage and Euclidean distances.

use crate::error::{Error, Result};

/// A set of points in `dim`-dimensional Euclidean space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    dim: usize,
}

impl PointSet {
    /// Builds a point set from coordinate vectors. All vectors must share one
    /// nonzero length and there must be at least one point.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { coords, dim })
    }

    pub fn from_flat(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        Ok(Self { coords, dim })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Copies the selected points into a new set.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self::from_flat(coords, self.dim)
    }
}

/// Euclidean distance between two coordinate vectors.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(euclidean(a, b))
}

#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    // Summation order is fixed so d(a, b) and d(b, a) agree bit for bit.
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Dense client-by-center distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    max: f64,
}

impl DistanceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Largest entry, cached at construction.
    pub fn max(&self) -> f64 {
        self.max
    }

    /// Distance from each row to its nearest column.
    pub fn row_min(&self, row: usize) -> f64 {
        self.row(row).iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_i min_j d(i, j)`: the cost of nearest-center assignment.
    pub fn max_row_min(&self) -> f64 {
        (0..self.rows).map(|i| self.row_min(i)).fold(0.0, f64::max)
    }
}

pub fn distance_matrix(clients: &PointSet, centers: &PointSet) -> Result<DistanceMatrix> {
    if clients.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: clients.dim(),
            got: centers.dim(),
        });
    }
    let rows = clients.len();
    let cols = centers.len();
    let mut data = Vec::with_capacity(rows * cols);
    let mut max = 0.0f64;
    for c in clients.iter() {
        for f in centers.iter() {
            let d = euclidean(c, f);
            max = max.max(d);
            data.push(d);
        }
    }
    Ok(DistanceMatrix {
        data,
        rows,
        cols,
        max,
    })
}
