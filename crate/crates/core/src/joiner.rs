//! λ-Venn decomposition: which centers each point can reach, and the
//! (signature, joiner) frequency table built from it.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fairness::GroupModel;
use crate::geometry::DistanceMatrix;

pub const MAX_CENTERS: usize = 64;

/// Nonempty set of center positions, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JoinerKey(u64);

impl JoinerKey {
    pub fn from_mask(mask: u64) -> Option<Self> {
        (mask != 0).then_some(Self(mask))
    }

    pub fn from_centers(centers: &[usize]) -> Option<Self> {
        Self::from_mask(centers.iter().fold(0u64, |m, &c| m | (1u64 << c)))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, center: usize) -> bool {
        center < MAX_CENTERS && self.0 & (1u64 << center) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: JoinerKey) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member center positions in increasing order.
    pub fn centers(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let c = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(c)
        })
    }
}

impl std::fmt::Display for JoinerKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.centers().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Centers within closed distance `lambda` of `point`, or `None` if there are
/// none.
pub fn joiner_of(point: usize, dmat: &DistanceMatrix, lambda: f64) -> Option<JoinerKey> {
    debug_assert!(dmat.cols() <= MAX_CENTERS);
    let mask = dmat
        .row(point)
        .iter()
        .enumerate()
        .filter(|(_, &d)| d <= lambda)
        .fold(0u64, |m, (j, _)| m | (1u64 << j));
    JoinerKey::from_mask(mask)
}

/// First point that no center reaches at `lambda`.
pub fn first_unreachable(dmat: &DistanceMatrix, lambda: f64) -> Option<usize> {
    (0..dmat.rows()).find(|&i| dmat.row(i).iter().all(|&d| d > lambda))
}

/// Points sharing one signature and one joiner.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub signature: u32,
    pub joiner: JoinerKey,
    pub members: Vec<usize>,
}

impl TableEntry {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

/// `L(c, S', λ)` for every nonempty (signature, joiner) pair, sorted by
/// signature then joiner mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    lambda: f64,
    num_centers: usize,
    entries: Vec<TableEntry>,
}

impl FrequencyTable {
    /// Builds a table directly from counts; members are numbered
    /// consecutively in entry order. Duplicate keys are merged.
    pub fn from_counts(
        lambda: f64,
        num_centers: usize,
        counts: impl IntoIterator<Item = (u32, JoinerKey, usize)>,
    ) -> Result<Self> {
        if num_centers > MAX_CENTERS {
            return Err(Error::TooManyCenters { k: num_centers });
        }
        let mut map: BTreeMap<(u32, JoinerKey), usize> = BTreeMap::new();
        for (sig, key, count) in counts {
            if num_centers < MAX_CENTERS && key.mask() >> num_centers != 0 {
                return Err(Error::InvalidK {
                    k: key.centers().last().unwrap_or(0) + 1,
                    available: num_centers,
                });
            }
            *map.entry((sig, key)).or_default() += count;
        }
        let mut next = 0;
        let entries = map
            .into_iter()
            .filter(|&(_, c)| c > 0)
            .map(|((signature, joiner), count)| {
                let members = (next..next + count).collect();
                next += count;
                TableEntry {
                    signature,
                    joiner,
                    members,
                }
            })
            .collect();
        Ok(Self {
            lambda,
            num_centers,
            entries,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn num_centers(&self) -> usize {
        self.num_centers
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_count(&self) -> usize {
        self.entries.iter().map(TableEntry::count).sum()
    }

    pub fn count(&self, signature: u32, joiner: JoinerKey) -> usize {
        self.entries
            .binary_search_by(|e| (e.signature, e.joiner).cmp(&(signature, joiner)))
            .map(|i| self.entries[i].count())
            .unwrap_or(0)
    }

    /// Number of distinct nonempty joiners (ignoring signatures).
    pub fn nonempty_joiners(&self) -> usize {
        let mut masks: Vec<u64> = self.entries.iter().map(|e| e.joiner.mask()).collect();
        masks.sort_unstable();
        masks.dedup();
        masks.len()
    }

    /// Debug dump with columns `mask,signature,count`. Center positions and
    /// group ids are 0-based and `;`-separated.
    pub fn write_csv<W: Write>(&self, model: &GroupModel, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["mask", "signature", "count"])?;
        for e in &self.entries {
            w.write_record([
                e.joiner.to_string(),
                model.signatures()[e.signature as usize].to_string(),
                e.count().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Groups every point by (signature, joiner) at radius `lambda` using the
/// closed-ball rule `d <= lambda`.
pub fn build_frequency_table(
    model: &GroupModel,
    dmat: &DistanceMatrix,
    lambda: f64,
) -> Result<FrequencyTable> {
    let k = dmat.cols();
    if k > MAX_CENTERS {
        return Err(Error::TooManyCenters { k });
    }
    if model.num_points() != dmat.rows() {
        return Err(Error::InvalidGroupModel(format!(
            "model has {} points but the distance matrix has {} rows",
            model.num_points(),
            dmat.rows()
        )));
    }
    let mut map: BTreeMap<(u32, JoinerKey), Vec<usize>> = BTreeMap::new();
    for p in 0..dmat.rows() {
        let key = joiner_of(p, dmat, lambda).ok_or(Error::Unreachable { point: p, lambda })?;
        map.entry((model.signature_id(p), key)).or_default().push(p);
    }
    let entries = map
        .into_iter()
        .map(|((signature, joiner), members)| TableEntry {
            signature,
            joiner,
            members,
        })
        .collect();
    Ok(FrequencyTable {
        lambda,
        num_centers: k,
        entries,
    })
}
