//! The frequency-distributor linear program.
//!
//! One variable `x[c, S', j]` per nonempty table entry `(c, S')` and center
//! `j ∈ S'`: the (fractional) number of that entry's points sent to `j`.
//!
//! * Fairness rows, for every group `a` and center `j`:
//!   `Σ_{a ∈ c} x[c,S',j] - α_a Σ x[c,S',j] <= 0` (dominance) and
//!   `β_a Σ x[c,S',j] - Σ_{a ∈ c} x[c,S',j] <= 0` (protection). The protection
//!   row is dropped when `β_a == 0`; it is implied by `x >= 0`.
//! * Assignment rows, one per entry: `Σ_{j ∈ S'} x[c,S',j] = |L(c,S',λ)|`.
//! * `x >= 0` is carried as the implicit variable bound of [`LinearProgram`].

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fairness::{FairnessParams, GroupModel};
use crate::joiner::{FrequencyTable, JoinerKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// Sparse linear constraint `Σ coeff·x  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.evaluate(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Feasibility problem over nonnegative variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub rows: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bound = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        self.rows
            .iter()
            .map(|r| r.violation(x))
            .fold(bound, f64::max)
    }

    /// Plain-text dump: a `vars N` header, then one `row` line per constraint
    /// with its relation, right-hand side and `index:coefficient` pairs.
    /// Floats use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "vars {}", self.num_vars);
        let _ = writeln!(s, "rows {}", self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(s, "row {} {} {:?}", i, r.relation.symbol(), r.rhs);
            for &(j, a) in &r.coeffs {
                let _ = write!(s, " {}:{:?}", j, a);
            }
            s.push('\n');
        }
        s
    }
}

/// What a variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpVariable {
    /// Index of the table entry the variable distributes.
    pub entry: usize,
    pub signature: u32,
    pub joiner: JoinerKey,
    pub center: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Dominance { group: usize, center: usize },
    Protection { group: usize, center: usize },
    Assignment { entry: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpStats {
    pub variables: usize,
    /// Rows actually emitted.
    pub rows: usize,
    pub dominance_rows: usize,
    pub protection_rows: usize,
    pub assignment_rows: usize,
    /// Fairness constraints counted as one double inequality per
    /// (group, center), whether or not the protection half was emitted.
    pub fairness_constraints: usize,
}

impl LpStats {
    /// Constraint count in the two-sided convention: fairness pairs,
    /// assignment equalities and one nonnegativity bound per variable.
    pub fn constraint_count(&self) -> usize {
        self.fairness_constraints + self.assignment_rows + self.variables
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDistributorLp {
    lp: LinearProgram,
    variables: Vec<LpVariable>,
    row_kinds: Vec<RowKind>,
    num_groups: usize,
    num_centers: usize,
}

impl FrequencyDistributorLp {
    pub fn program(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn variables(&self) -> &[LpVariable] {
        &self.variables
    }

    pub fn row_kinds(&self) -> &[RowKind] {
        &self.row_kinds
    }

    pub fn num_centers(&self) -> usize {
        self.num_centers
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// Variable indices of table entry `entry`, in increasing center order.
    pub fn entry_variables(&self, entry: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.variables.partition_point(|v| v.entry < entry);
        self.variables[start..]
            .iter()
            .take_while(move |v| v.entry == entry)
            .enumerate()
            .map(move |(i, _)| start + i)
    }

    /// Text dump of the program preceded by one `var` label line per
    /// variable (`var index signature-id joiner center`).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.variables.iter().enumerate() {
            let _ = writeln!(s, "var {} {} {} {}", i, v.signature, v.joiner, v.center);
        }
        s.push_str(&self.lp.to_text());
        s
    }
}

pub fn build_lp(
    table: &FrequencyTable,
    params: &FairnessParams,
    model: &GroupModel,
) -> Result<FrequencyDistributorLp> {
    params.check_groups(model)?;
    let k = table.num_centers();
    let l = model.num_groups();
    if table
        .entries()
        .iter()
        .any(|e| e.signature as usize >= model.signatures().len())
    {
        return Err(Error::InvalidGroupModel(
            "table references a signature outside the model".into(),
        ));
    }

    // Entries are sorted by (signature, mask), so this enumerates variables
    // in (signature, mask, center) order.
    let mut variables = Vec::new();
    for (entry, e) in table.entries().iter().enumerate() {
        for center in e.joiner.centers() {
            variables.push(LpVariable {
                entry,
                signature: e.signature,
                joiner: e.joiner,
                center,
            });
        }
    }

    let mut by_center: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, v) in variables.iter().enumerate() {
        by_center[v.center].push(i);
    }

    let mut lp = LinearProgram::new(variables.len());
    let mut row_kinds = Vec::new();
    for (center, vars) in by_center.iter().enumerate() {
        for group in 0..l {
            let alpha = params.alpha()[group];
            let beta = params.beta()[group];
            let member = |i: usize| {
                model.signatures()[variables[i].signature as usize].contains(group)
            };
            let dominance = vars
                .iter()
                .map(|&i| (i, if member(i) { 1.0 - alpha } else { -alpha }))
                .filter(|&(_, a)| a != 0.0)
                .collect();
            lp.push(dominance, Relation::Le, 0.0);
            row_kinds.push(RowKind::Dominance { group, center });
            if beta > 0.0 {
                let protection = vars
                    .iter()
                    .map(|&i| (i, if member(i) { beta - 1.0 } else { beta }))
                    .filter(|&(_, a)| a != 0.0)
                    .collect();
                lp.push(protection, Relation::Le, 0.0);
                row_kinds.push(RowKind::Protection { group, center });
            }
        }
    }

    let mut next = 0;
    for (entry, e) in table.entries().iter().enumerate() {
        let n = e.joiner.len();
        lp.push(
            (next..next + n).map(|i| (i, 1.0)).collect(),
            Relation::Eq,
            e.count() as f64,
        );
        row_kinds.push(RowKind::Assignment { entry });
        next += n;
    }

    Ok(FrequencyDistributorLp {
        lp,
        variables,
        row_kinds,
        num_groups: l,
        num_centers: k,
    })
}

pub fn lp_stats(lp: &FrequencyDistributorLp) -> LpStats {
    let mut stats = LpStats {
        variables: lp.variables.len(),
        rows: lp.lp.rows.len(),
        dominance_rows: 0,
        protection_rows: 0,
        assignment_rows: 0,
        fairness_constraints: lp.num_groups * lp.num_centers,
    };
    for kind in &lp.row_kinds {
        match kind {
            RowKind::Dominance { .. } => stats.dominance_rows += 1,
            RowKind::Protection { .. } => stats.protection_rows += 1,
            RowKind::Assignment { .. } => stats.assignment_rows += 1,
        }
    }
    stats
}

/// `min(2^(k-1)·k·|I|, N·k)`.
pub fn variable_bound(k: usize, signatures: usize, n: usize) -> u128 {
    let pow = 1u128 << (k - 1).min(126);
    (pow * k as u128 * signatures as u128).min(n as u128 * k as u128)
}

/// `k·l + min(2^k·|I|, N·k) + min(2^(k-1)·k·|I|, N·k)`.
pub fn constraint_bound(k: usize, groups: usize, signatures: usize, n: usize) -> u128 {
    let pow = 1u128 << k.min(126);
    (k * groups) as u128
        + (pow * signatures as u128).min(n as u128 * k as u128)
        + variable_bound(k, signatures, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(c: &[usize]) -> JoinerKey {
        JoinerKey::from_centers(c).unwrap()
    }

    #[test]
    fn empty_table_has_no_variables() {
        let model = GroupModel::from_labels(&[0], 1).unwrap();
        let params = FairnessParams::uniform(1, 1.0, 0.0).unwrap();
        let t = FrequencyTable::from_counts(1.0, 2, []).unwrap();
        let lp = build_lp(&t, &params, &model).unwrap();
        let s = lp_stats(&lp);
        assert_eq!(s.variables, 0);
        assert_eq!(s.assignment_rows, 0);
    }

    #[test]
    fn variable_layout_and_rows() {
        let model = GroupModel::from_labels(&[0, 1, 1], 2).unwrap();
        let params = FairnessParams::new(vec![0.6, 0.7], vec![0.2, 0.0]).unwrap();
        let t = FrequencyTable::from_counts(1.0, 2, [(0, key(&[0, 1]), 1), (1, key(&[1]), 2)]).unwrap();
        let lp = build_lp(&t, &params, &model).unwrap();
        let centers: Vec<_> = lp.variables().iter().map(|v| (v.signature, v.center)).collect();
        assert_eq!(centers, vec![(0, 0), (0, 1), (1, 1)]);
        let s = lp_stats(&lp);
        assert_eq!(s.dominance_rows, 4);
        assert_eq!(s.protection_rows, 2);
        assert_eq!(s.assignment_rows, 2);
        assert_eq!(s.rows, 8);
        assert_eq!(lp.entry_variables(0).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(lp.entry_variables(1).collect::<Vec<_>>(), vec![2]);

        // Dominance row for group 0 at center 1: 0.4·x1 - 0.6·x2 <= 0
        let row = &lp.program().rows[lp
            .row_kinds()
            .iter()
            .position(|k| *k == RowKind::Dominance { group: 0, center: 1 })
            .unwrap()];
        assert_eq!(row.coeffs, vec![(1, 1.0 - 0.6), (2, -0.6)]);
        assert_eq!(row.relation, Relation::Le);
    }

    #[test]
    fn vacuous_fairness_rows_are_empty() {
        let model = GroupModel::from_labels(&[0, 0], 1).unwrap();
        let params = FairnessParams::uniform(1, 1.0, 0.0).unwrap();
        let t = FrequencyTable::from_counts(1.0, 2, [(0, key(&[0, 1]), 2)]).unwrap();
        let lp = build_lp(&t, &params, &model).unwrap();
        for (r, kind) in lp.program().rows.iter().zip(lp.row_kinds()) {
            if matches!(kind, RowKind::Dominance { .. }) {
                assert!(r.coeffs.is_empty());
            }
        }
    }

    #[test]
    fn interchangeable_members() {
        use crate::geometry::{distance_matrix, PointSet};
        use crate::joiner::build_frequency_table;
        // Same geometry, group labels permuted within identical locations.
        let pts = PointSet::new(vec![vec![0.0], vec![0.0], vec![5.0], vec![5.0], vec![10.0]]).unwrap();
        let centers = pts.select(&[0, 4]).unwrap();
        let d = distance_matrix(&pts, &centers).unwrap();
        let a = GroupModel::from_labels(&[0, 1, 0, 1, 0], 2).unwrap();
        let b = GroupModel::from_labels(&[1, 0, 1, 0, 0], 2).unwrap();
        let params = FairnessParams::uniform(2, 0.7, 0.1).unwrap();
        let la = build_lp(&build_frequency_table(&a, &d, 6.0).unwrap(), &params, &a).unwrap();
        let lb = build_lp(&build_frequency_table(&b, &d, 6.0).unwrap(), &params, &b).unwrap();
        assert_eq!(la.to_text(), lb.to_text());
    }

    #[test]
    fn bounds_formulae() {
        assert_eq!(variable_bound(3, 3, 16), 36);
        assert_eq!(variable_bound(3, 3, 5), 15);
        assert_eq!(constraint_bound(3, 3, 3, 16), 9 + 24 + 36);
    }

    #[test]
    fn text_dump() {
        let mut lp = LinearProgram::new(2);
        lp.push(vec![(0, 1.0), (1, -0.5)], Relation::Le, 0.0);
        lp.push(vec![(1, 1.0)], Relation::Eq, 2.0);
        assert_eq!(
            lp.to_text(),
            "vars 2\nrows 2\nrow 0 <= 0.0 0:1.0 1:-0.5\nrow 1 = 2.0 1:1.0\n"
        );
    }
}
