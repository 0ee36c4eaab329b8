//! Phase-1 simplex feasibility check on a dense tableau.
//!
//! Entering columns follow the largest reduced cost, falling back to Bland's
//! lowest-index rule while pivots stay degenerate. Among tied ratios the
//! largest pivot element leaves, which keeps long pivot sequences stable.
//!
//! Equality rows are first given a structural basic column where one exists
//! that no other such row uses ("crash" basis), which for frequency-distributor
//! programs removes almost every artificial variable. Rows still lacking a
//! feasible basic column get an artificial, and the sum of artificials is
//! minimized.

use crate::error::{Error, Result};
use crate::fdlp::{LinearProgram, Relation};

/// Feasibility and pivot tolerance.
pub const TOLERANCE: f64 = 1e-7;

/// Entries smaller than this are flushed to zero after each pivot.
const DROP: f64 = 1e-11;

/// Consecutive degenerate pivots after which entering columns are chosen by
/// lowest index until progress resumes.
const DEGENERATE_SWITCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub status: Status,
    /// Variable values, present iff feasible.
    pub solution: Option<Vec<f64>>,
    /// Sum of artificial variables at the phase-1 optimum.
    pub artificial_objective: f64,
    pub iterations: usize,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }
}

const NONE: usize = usize::MAX;

struct Tableau {
    cols: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.a[r * self.cols..(r + 1) * self.cols]
    }

    fn negate_row(&mut self, r: usize) {
        for v in &mut self.a[r * self.cols..(r + 1) * self.cols] {
            *v = -*v;
        }
        self.rhs[r] = -self.rhs[r];
    }

    /// Pivots column `c` into the basis of row `r`, also updating the reduced
    /// costs `obj`.
    fn pivot(&mut self, r: usize, c: usize, obj: Option<&mut [f64]>) {
        let cols = self.cols;
        let inv = 1.0 / self.at(r, c);
        let mut nz = Vec::new();
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP {
                        *v = 0.0;
                    } else {
                        nz.push(j);
                    }
                }
            }
            row[c] = 1.0;
        }
        self.rhs[r] *= inv;
        let theta = self.rhs[r];

        let (before, rest) = self.a.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        let prow: &[f64] = prow;
        let update = |row: &mut [f64], rhs: &mut f64| {
            let f = row[c];
            if f == 0.0 {
                return;
            }
            for &j in &nz {
                let v = row[j] - f * prow[j];
                row[j] = if v.abs() < DROP { 0.0 } else { v };
            }
            row[c] = 0.0;
            *rhs -= f * theta;
            if rhs.abs() < DROP {
                *rhs = 0.0;
            }
        };
        for (i, row) in before.chunks_exact_mut(cols).enumerate() {
            update(row, &mut self.rhs[i]);
        }
        for (i, row) in after.chunks_exact_mut(cols).enumerate() {
            update(row, &mut self.rhs[r + 1 + i]);
        }

        if let Some(obj) = obj {
            let f = obj[c];
            if f != 0.0 {
                for &j in &nz {
                    let v = obj[j] - f * prow[j];
                    obj[j] = if v.abs() < DROP { 0.0 } else { v };
                }
                obj[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }
}

/// Decides whether `lp` (all variables nonnegative) has a feasible point.
///
/// Equality rows with a single nonzero fix their variable, which is then
/// substituted out before the tableau is built. Returns
/// [`Error::IterationLimit`] rather than a verdict if the pivot count exceeds
/// `50 × (rows + columns)` of the reduced program.
pub fn check_feasible(lp: &LinearProgram) -> Result<FeasibilityResult> {
    let (reduced, fixed, keep) = match presolve(lp) {
        Ok(p) => p,
        Err(violation) => {
            return Ok(FeasibilityResult {
                status: Status::Infeasible,
                solution: None,
                artificial_objective: violation,
                iterations: 0,
            })
        }
    };
    let mut result = solve_tableau(&reduced)?;
    if let Some(y) = result.solution.take() {
        let mut x: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (i, &orig) in keep.iter().enumerate() {
            x[orig] = y[i];
        }
        debug_assert!(
            lp.max_violation(&x) <= 1e-6 * (1.0 + max_abs_rhs(lp)),
            "simplex returned a point violating the program by {}",
            lp.max_violation(&x)
        );
        result.solution = Some(x);
    }
    Ok(result)
}

type Presolved = (LinearProgram, Vec<Option<f64>>, Vec<usize>);

/// Removes variables fixed by single-entry equality rows, repeating until
/// none remain. `Err` carries the violation of a row shown unsatisfiable.
fn presolve(lp: &LinearProgram) -> std::result::Result<Presolved, f64> {
    let n = lp.num_vars;
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    let mut live = vec![true; lp.rows.len()];
    loop {
        let mut changed = false;
        for (i, row) in lp.rows.iter().enumerate() {
            if !live[i] || row.relation != Relation::Eq {
                continue;
            }
            let mut free = row.coeffs.iter().filter(|&&(j, a)| a != 0.0 && fixed[j].is_none());
            let (Some(&(j, a)), None) = (free.next(), free.next()) else {
                continue;
            };
            let rest: f64 = row
                .coeffs
                .iter()
                .filter_map(|&(q, c)| fixed[q].map(|v| c * v))
                .sum();
            let v = (row.rhs - rest) / a;
            if v < -TOLERANCE {
                return Err(-v * a.abs());
            }
            fixed[j] = Some(v.max(0.0));
            live[i] = false;
            changed = true;
        }
        if !changed {
            break;
        }
    }

    let keep: Vec<usize> = (0..n).filter(|&j| fixed[j].is_none()).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &j) in keep.iter().enumerate() {
        index[j] = i;
    }
    let mut reduced = LinearProgram::new(keep.len());
    for (i, row) in lp.rows.iter().enumerate() {
        let mut rhs = row.rhs;
        let mut coeffs = Vec::with_capacity(row.coeffs.len());
        for &(j, a) in &row.coeffs {
            match fixed[j] {
                Some(v) => rhs -= a * v,
                None if a != 0.0 => coeffs.push((index[j], a)),
                None => {}
            }
        }
        if !coeffs.is_empty() {
            reduced.push(coeffs, row.relation, rhs);
            continue;
        }
        // Fully fixed rows, including the ones that did the fixing.
        let violation = match row.relation {
            Relation::Le => -rhs,
            Relation::Ge => rhs,
            Relation::Eq if live[i] => rhs.abs(),
            Relation::Eq => 0.0,
        };
        if violation > TOLERANCE * (1.0 + row.rhs.abs()) {
            return Err(violation);
        }
    }
    Ok((reduced, fixed, keep))
}

fn solve_tableau(lp: &LinearProgram) -> Result<FeasibilityResult> {
    let n = lp.num_vars;
    let m = lp.rows.len();

    // Normalize to rhs >= 0 and lay out structural + slack columns.
    let mut relations = Vec::with_capacity(m);
    let mut slack_of = vec![NONE; m];
    let mut cols = n;
    for (i, row) in lp.rows.iter().enumerate() {
        let flip = row.rhs < 0.0;
        let rel = match (row.relation, flip) {
            (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
            (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
            (Relation::Eq, _) => Relation::Eq,
        };
        if rel != Relation::Eq {
            slack_of[i] = cols;
            cols += 1;
        }
        relations.push((rel, flip));
    }

    let mut t = Tableau {
        cols,
        a: vec![0.0; m * cols],
        rhs: vec![0.0; m],
        basis: vec![NONE; m],
    };
    for (i, row) in lp.rows.iter().enumerate() {
        let (rel, flip) = relations[i];
        let sign = if flip { -1.0 } else { 1.0 };
        for &(j, a) in &row.coeffs {
            t.a[i * cols + j] += sign * a;
        }
        t.rhs[i] = sign * row.rhs;
        match rel {
            Relation::Le => {
                t.a[i * cols + slack_of[i]] = 1.0;
                t.basis[i] = slack_of[i];
            }
            Relation::Ge => t.a[i * cols + slack_of[i]] = -1.0,
            Relation::Eq => {}
        }
    }

    // Crash: give equality rows a structural basic column. The column must be
    // zero in every row already holding a structural basic variable, so those
    // values stay nonnegative.
    // Rows crashed this way never change again, so a column flag suffices.
    let mut touched = vec![false; n];
    for r in 0..m {
        if relations[r].0 != Relation::Eq {
            continue;
        }
        if t.rhs[r] < 0.0 {
            t.negate_row(r);
        }
        let pick = (0..n).find(|&j| t.at(r, j) > TOLERANCE && !touched[j]);
        if let Some(j) = pick {
            t.pivot(r, j, None);
            for (flag, &v) in touched.iter_mut().zip(&t.row(r)[..n]) {
                *flag |= v != 0.0;
            }
        }
    }

    // Rows whose basic value went negative, or that have no basic column, get
    // an artificial.
    let mut needs_artificial = Vec::new();
    for r in 0..m {
        if t.basis[r] == NONE {
            if t.rhs[r] < 0.0 {
                t.negate_row(r);
            }
            needs_artificial.push(r);
        } else if t.basis[r] >= n && t.rhs[r] < 0.0 {
            t.negate_row(r);
            needs_artificial.push(r);
        }
    }

    let first_artificial = cols;
    let total_cols = cols + needs_artificial.len();
    let mut wide = vec![0.0; m * total_cols];
    for r in 0..m {
        wide[r * total_cols..r * total_cols + cols].copy_from_slice(t.row(r));
    }
    for (k, &r) in needs_artificial.iter().enumerate() {
        wide[r * total_cols + first_artificial + k] = 1.0;
        t.basis[r] = first_artificial + k;
    }
    t.a = wide;
    t.cols = total_cols;

    // Phase-1 objective: minimize the sum of artificials.
    let mut obj = vec![0.0; total_cols];
    for &r in &needs_artificial {
        for j in 0..first_artificial {
            obj[j] -= t.at(r, j);
        }
    }

    let limit = 50 * (m + total_cols);
    let mut iterations = 0;
    let mut blocked = vec![false; first_artificial];
    let mut degenerate_run = 0;
    let is_artificial = |b: usize| b >= first_artificial && b != NONE;
    loop {
        let w: f64 = (0..m)
            .filter(|&r| is_artificial(t.basis[r]))
            .map(|r| t.rhs[r])
            .sum();
        if w <= TOLERANCE {
            break;
        }
        // Largest reduced cost normally; Bland's rule during long degenerate
        // stretches, which rules out cycling.
        let bland = degenerate_run > DEGENERATE_SWITCH;
        let candidates = (0..first_artificial).filter(|&j| obj[j] < -TOLERANCE && !blocked[j]);
        let enter = if bland {
            candidates.min()
        } else {
            candidates.min_by(|&a, &b| obj[a].total_cmp(&obj[b]).then(a.cmp(&b)))
        };
        let Some(enter) = enter else {
            break;
        };

        let mut best = f64::INFINITY;
        for r in 0..m {
            let a = t.at(r, enter);
            if a > TOLERANCE {
                best = best.min(t.rhs[r] / a);
            }
        }
        if best == f64::INFINITY {
            // Numerically unbounded direction; the phase-1 objective is
            // bounded below, so this column is noise.
            blocked[enter] = true;
            continue;
        }
        let tie = 1e-9 * (1.0 + best.abs());
        let mut leave = NONE;
        let mut leave_a = 0.0;
        for r in 0..m {
            let a = t.at(r, enter);
            if a <= TOLERANCE || t.rhs[r] / a > best + tie {
                continue;
            }
            let better = if leave == NONE {
                true
            } else if bland {
                t.basis[r] < t.basis[leave]
            } else {
                a > leave_a || (a == leave_a && t.basis[r] < t.basis[leave])
            };
            if better {
                leave = r;
                leave_a = a;
            }
        }

        iterations += 1;
        if iterations > limit {
            return Err(Error::IterationLimit { limit });
        }
        if t.rhs[leave] / leave_a > tie {
            degenerate_run = 0;
        } else {
            degenerate_run += 1;
        }
        t.pivot(leave, enter, Some(&mut obj));
    }

    // Recompute from the basis rather than trusting the running total.
    let artificial_objective: f64 = (0..m)
        .filter(|&r| t.basis[r] >= first_artificial)
        .map(|r| t.rhs[r].max(0.0))
        .sum();

    if artificial_objective > TOLERANCE {
        return Ok(FeasibilityResult {
            status: Status::Infeasible,
            solution: None,
            artificial_objective,
            iterations,
        });
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        let b = t.basis[r];
        if b < n {
            x[b] = t.rhs[r].max(0.0);
        }
    }
    Ok(FeasibilityResult {
        status: Status::Feasible,
        solution: Some(x),
        artificial_objective,
        iterations,
    })
}

pub(crate) fn max_abs_rhs(lp: &LinearProgram) -> f64 {
    lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max)
}
