#![allow(dead_code)]

use fair_kcenter::joiner::JoinerKey;
use fair_kcenter::{CenterSet, FrequencyTable, GroupModel, PointSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, extent: f64) -> PointSet {
    let pts = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..extent)).collect())
        .collect();
    PointSet::new(pts).unwrap()
}

/// Every point joins between 1 and `max_per_point` distinct groups out of `l`.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize, l: usize, max_per_point: usize) -> GroupModel {
    let memberships = (0..n)
        .map(|_| {
            let want = rng.gen_range(1..=max_per_point.min(l));
            let mut g: Vec<usize> = Vec::with_capacity(want);
            while g.len() < want {
                let c = rng.gen_range(0..l);
                if !g.contains(&c) {
                    g.push(c);
                }
            }
            g
        })
        .collect();
    GroupModel::new(memberships, l).unwrap()
}

pub fn disjoint_model(rng: &mut ChaCha8Rng, n: usize, l: usize) -> GroupModel {
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..l)).collect();
    GroupModel::from_labels(&labels, l).unwrap()
}

// ---------------------------------------------------------------------------
// Worked three-center example: colors R=0, G=1, B=2.

pub const RED: usize = 0;
pub const GREEN: usize = 1;
pub const BLUE: usize = 2;

/// `(signature, joiner centers, count)` rows of the worked example's table.
pub const EXAMPLE_TABLE: [(usize, &[usize], usize); 13] = [
    (RED, &[0], 1),
    (GREEN, &[0], 2),
    (BLUE, &[0], 1),
    (RED, &[1], 2),
    (GREEN, &[1], 1),
    (BLUE, &[1], 1),
    (RED, &[2], 1),
    (GREEN, &[2], 2),
    (BLUE, &[2], 1),
    (BLUE, &[0, 2], 1),
    (RED, &[1, 2], 1),
    (BLUE, &[1, 2], 1),
    (RED, &[0, 1, 2], 1),
];

pub fn example_table(lambda: f64) -> FrequencyTable {
    FrequencyTable::from_counts(
        lambda,
        3,
        EXAMPLE_TABLE
            .iter()
            .map(|&(c, centers, n)| (c as u32, JoinerKey::from_centers(centers).unwrap(), n)),
    )
    .unwrap()
}

/// Group model whose point numbering matches `example_table`'s members.
pub fn example_table_model(table: &FrequencyTable) -> GroupModel {
    let mut labels = vec![0; table.total_count()];
    for e in table.entries() {
        for &p in &e.members {
            labels[p] = e.signature as usize;
        }
    }
    GroupModel::from_labels(&labels, 3).unwrap()
}

pub const EXAMPLE_LAMBDA: f64 = 6.0;

/// Sixteen concrete points realizing the example with centers at points
/// 3, 7 and 13 (1-based), which sit on an equilateral triangle of side 10.
pub struct GeometricExample {
    pub points: PointSet,
    pub model: GroupModel,
    pub centers: CenterSet,
}

pub fn geometric_example() -> GeometricExample {
    let h = 8.660254037844386;
    // (x, y, color) in 1-based label order.
    let pts: [(f64, f64, usize); 16] = [
        (-1.0, 0.0, RED),          // 1  J{1}
        (0.0, -1.0, GREEN),        // 2  J{1}
        (0.0, 0.0, GREEN),         // 3  center 1
        (-1.0, -1.0, BLUE),        // 4  J{1}
        (11.0, 0.0, RED),          // 5  J{2}
        (10.0, -1.0, GREEN),       // 6  J{2}
        (10.0, 0.0, RED),          // 7  center 2
        (11.0, -1.0, BLUE),        // 8  J{2}
        (4.0, h + 1.0, RED),       // 9  J{3}
        (6.0, h + 1.0, GREEN),     // 10 J{3}
        (5.0, h / 3.0, RED),       // 11 J{1,2,3}
        (2.5, h / 2.0, BLUE),      // 12 J{1,3}
        (5.0, h, GREEN),           // 13 center 3
        (5.0, h + 1.0, BLUE),      // 14 J{3}
        (7.5, h / 2.0, RED),       // 15 J{2,3}
        (7.4, h / 2.0 + 0.1, BLUE), // 16 J{2,3}
    ];
    let points = PointSet::new(pts.iter().map(|&(x, y, _)| vec![x, y]).collect()).unwrap();
    let labels: Vec<usize> = pts.iter().map(|p| p.2).collect();
    let model = GroupModel::from_labels(&labels, 3).unwrap();
    let centers = CenterSet::from_indices(&points, &points, vec![2, 6, 12]).unwrap();
    GeometricExample {
        points,
        model,
        centers,
    }
}

// ---------------------------------------------------------------------------
// Exact rational feasibility by vertex enumeration.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct RatRow {
    pub coeffs: Vec<BigRational>,
    pub rel: Rel,
    pub rhs: BigRational,
}

#[derive(Debug, Clone)]
pub struct RatLp {
    pub num_vars: usize,
    pub rows: Vec<RatRow>,
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite coefficient")
}

/// Parses the plain-text program export into exact rationals.
pub fn parse_lp_text(text: &str) -> RatLp {
    let mut num_vars = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("vars") => num_vars = Some(tok.next().unwrap().parse::<usize>().unwrap()),
            Some("row") => {
                let n = num_vars.expect("vars header first");
                tok.next();
                let rel = match tok.next().unwrap() {
                    "<=" => Rel::Le,
                    ">=" => Rel::Ge,
                    "=" => Rel::Eq,
                    other => panic!("unknown relation {other}"),
                };
                let rhs = rat(tok.next().unwrap().parse().unwrap());
                let mut coeffs = vec![BigRational::zero(); n];
                for pair in tok {
                    let (j, a) = pair.split_once(':').unwrap();
                    let j: usize = j.parse().unwrap();
                    coeffs[j] += rat(a.parse().unwrap());
                }
                rows.push(RatRow { coeffs, rel, rhs });
            }
            _ => {}
        }
    }
    RatLp {
        num_vars: num_vars.expect("vars header"),
        rows,
    }
}

fn satisfies(lp: &RatLp, x: &[BigRational]) -> bool {
    if x.iter().any(|v| v.is_negative()) {
        return false;
    }
    lp.rows.iter().all(|r| {
        let lhs: BigRational = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match r.rel {
            Rel::Le => lhs <= r.rhs,
            Rel::Ge => lhs >= r.rhs,
            Rel::Eq => lhs == r.rhs,
        }
    })
}

/// Unique solution of the square system, if nonsingular.
fn solve_square(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = BigRational::one() / a[col][col].clone();
        for c in col..n {
            a[col][c] = &a[col][c] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    let v = &a[col][c] * &f;
                    a[r][c] -= v;
                }
                let v = &b[col] * &f;
                b[r] -= v;
            }
        }
    }
    Some(b)
}

/// `{x >= 0 : rows}` is pointed, so it is nonempty iff some basic solution
/// formed by `n` tight, linearly independent constraints is feasible.
pub fn rational_feasible(lp: &RatLp) -> bool {
    let n = lp.num_vars;
    if n == 0 {
        return satisfies(lp, &[]);
    }
    let zero_row = |r: &RatRow| r.coeffs.iter().all(Zero::is_zero);
    let mut forced: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    let mut optional: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    for r in &lp.rows {
        if zero_row(r) {
            continue;
        }
        let h = (r.coeffs.clone(), r.rhs.clone());
        if r.rel == Rel::Eq {
            forced.push(h);
        } else {
            optional.push(h);
        }
    }
    for j in 0..n {
        let mut e = vec![BigRational::zero(); n];
        e[j] = BigRational::one();
        optional.push((e, BigRational::zero()));
    }

    // Redundant equalities would make every square system singular; keep a
    // maximal independent subset (a dependent one is either implied or
    // inconsistent, which `satisfies` catches).
    let forced = independent_subset(forced, n);
    if forced.len() > n {
        return false;
    }
    let need = n - forced.len();
    let mut idx: Vec<usize> = (0..need).collect();
    if need > optional.len() {
        return false;
    }
    loop {
        let mut a: Vec<Vec<BigRational>> = forced.iter().map(|h| h.0.clone()).collect();
        let mut b: Vec<BigRational> = forced.iter().map(|h| h.1.clone()).collect();
        for &i in &idx {
            a.push(optional[i].0.clone());
            b.push(optional[i].1.clone());
        }
        if let Some(x) = solve_square(a, b) {
            if satisfies(lp, &x) {
                return true;
            }
        }
        let Some(i) = (0..need).rev().find(|&i| idx[i] != i + optional.len() - need) else {
            return false;
        };
        idx[i] += 1;
        for j in i + 1..need {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn independent_subset(
    rows: Vec<(Vec<BigRational>, BigRational)>,
    n: usize,
) -> Vec<(Vec<BigRational>, BigRational)> {
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut kept = Vec::new();
    for (coeffs, rhs) in rows {
        let mut v = coeffs.clone();
        for (b, &p) in basis.iter().zip(&pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone() / b[p].clone();
                for c in 0..n {
                    let d = &b[c] * &f;
                    v[c] -= d;
                }
            }
        }
        if let Some(p) = (0..n).find(|&c| !v[c].is_zero()) {
            basis.push(v);
            pivots.push(p);
            kept.push((coeffs, rhs));
        }
    }
    kept
}

/// Small-integer LP over `n` variables for the solver cross-check.
pub fn random_small_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> fair_kcenter::LinearProgram {
    use fair_kcenter::Relation;
    let mut lp = fair_kcenter::LinearProgram::new(n);
    for _ in 0..m {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, rng.gen_range(-4i32..=4) as f64));
            }
        }
        let rel = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        lp.push(coeffs, rel, rng.gen_range(-6i32..=6) as f64);
    }
    lp
}

pub fn big(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}
