//! Dense two-phase tableau simplex for small linear programs over free
//! variables.
//!
//! Every variable is split as `x = x⁺ − x⁻`. Pivoting follows Bland's rule
//! (lowest-index entering column, lowest-index leaving basic variable on ties),
//! which rules out cycling on the highly degenerate systems produced by core
//! and anticore constraints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot and feasibility tolerance.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub bound: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, bound: f64) -> Self {
        Constraint { coeffs, relation, bound }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Violation of the constraint at `x` (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => (lhs - self.bound).max(0.0),
            Relation::Ge => (self.bound - lhs).max(0.0),
            Relation::Eq => (lhs - self.bound).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LpResult {
    Optimal { x: Vec<f64>, value: f64 },
    /// A feasible ray along which the objective improves without bound.
    Unbounded { direction: Vec<f64> },
    /// Constraint rows carrying nonzero Farkas multipliers.
    Infeasible { rows: Vec<usize> },
}

impl LpResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpResult::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, sense: Sense) -> Self {
        LpProblem { objective, sense, constraints: Vec::new() }
    }

    pub fn constrain(mut self, coeffs: Vec<f64>, relation: Relation, bound: f64) -> Self {
        self.constraints.push(Constraint::new(coeffs, relation, bound));
        self
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::MalformedProblem("no variables".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedProblem("non-finite objective coefficient".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::MalformedProblem(format!("row {i} has {} coefficients, expected {n}", c.coeffs.len())));
            }
            if c.coeffs.iter().any(|a| !a.is_finite()) || !c.bound.is_finite() {
                return Err(Error::MalformedProblem(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Column {
    Plus(usize),
    Minus(usize),
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// reduced-cost row, last entry is the objective value
    obj: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<Column>,
    /// per constraint row, the column that formed the initial identity
    identity: Vec<usize>,
    blocked: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn width(&self) -> usize {
        self.kinds.len()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for j in 0..=w {
                    r[j] -= f * pivot_row[j];
                }
                r[col] = 0.0;
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (o, p) in self.obj.iter_mut().zip(&pivot_row) {
                *o -= f * p;
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn run(&mut self) -> Step {
        let w = self.width();
        loop {
            let Some(col) = (0..w).find(|&j| !self.blocked[j] && self.obj[j] < -PIVOT_TOL) else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                if r[col] > PIVOT_TOL {
                    let ratio = r[w] / r[col];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - PIVOT_TOL || (ratio <= br + PIVOT_TOL && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return Step::Unbounded(col),
            }
        }
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let w = self.width();
        let mut x = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            match self.kinds[b] {
                Column::Plus(k) => x[k] += self.rows[i][w],
                Column::Minus(k) => x[k] -= self.rows[i][w],
                _ => {}
            }
        }
        x
    }
}

pub fn solve(problem: &LpProblem) -> Result<LpResult> {
    problem.validate()?;
    let n = problem.variables();
    let m = problem.constraints.len();

    let mut kinds: Vec<Column> = (0..n).flat_map(|k| [Column::Plus(k), Column::Minus(k)]).collect();
    // normalized rows: b ≥ 0
    let normalized: Vec<(Vec<f64>, Relation, f64)> = problem
        .constraints
        .iter()
        .map(|c| {
            if c.bound < 0.0 {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|a| -a).collect(), flipped, -c.bound)
            } else {
                (c.coeffs.clone(), c.relation, c.bound)
            }
        })
        .collect();
    let mut slack_col = vec![None; m];
    let mut art_col = vec![None; m];
    for (i, (_, rel, _)) in normalized.iter().enumerate() {
        if *rel != Relation::Eq {
            slack_col[i] = Some(kinds.len());
            kinds.push(Column::Slack);
        }
    }
    for (i, (_, rel, _)) in normalized.iter().enumerate() {
        if *rel != Relation::Le {
            art_col[i] = Some(kinds.len());
            kinds.push(Column::Artificial);
        }
    }
    let w = kinds.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut identity = Vec::with_capacity(m);
    for (i, (coeffs, rel, b)) in normalized.iter().enumerate() {
        let mut r = vec![0.0; w + 1];
        for (k, a) in coeffs.iter().enumerate() {
            r[2 * k] = *a;
            r[2 * k + 1] = -a;
        }
        if let Some(s) = slack_col[i] {
            r[s] = if *rel == Relation::Le { 1.0 } else { -1.0 };
        }
        if let Some(a) = art_col[i] {
            r[a] = 1.0;
        }
        r[w] = *b;
        let basic = art_col[i].or(slack_col[i]).expect("every row has a basic column");
        basis.push(basic);
        identity.push(basic);
        rows.push(r);
    }
    let mut t = Tableau { rows, obj: vec![0.0; w + 1], basis, kinds, identity, blocked: vec![false; w] };

    // Phase I: maximize −Σ artificials
    let has_artificials = art_col.iter().any(Option::is_some);
    if has_artificials {
        for j in 0..w {
            if t.kinds[j] == Column::Artificial {
                t.obj[j] = 1.0;
            }
        }
        for i in 0..m {
            if t.kinds[t.basis[i]] == Column::Artificial {
                for j in 0..=w {
                    t.obj[j] -= t.rows[i][j];
                }
            }
        }
        // phase I is bounded above by 0
        let _ = t.run();
        let infeasibility = -t.obj[w];
        if infeasibility > PIVOT_TOL * (1.0 + normalized.iter().map(|r| r.2).fold(0.0, f64::max)) {
            let rows = (0..m)
                .filter(|&i| {
                    let col = t.identity[i];
                    let y = if t.kinds[col] == Column::Artificial { t.obj[col] - 1.0 } else { t.obj[col] };
                    y.abs() > PIVOT_TOL
                })
                .collect();
            return Ok(LpResult::Infeasible { rows });
        }
        // drive zero-level artificials out of the basis
        for i in 0..m {
            if t.kinds[t.basis[i]] == Column::Artificial {
                if let Some(j) = (0..w).find(|&j| t.kinds[j] != Column::Artificial && t.rows[i][j].abs() > PIVOT_TOL) {
                    t.pivot(i, j);
                }
            }
        }
        for j in 0..w {
            if t.kinds[j] == Column::Artificial {
                t.blocked[j] = true;
            }
        }
    }

    // Phase II
    let sign = match problem.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let cost = |kind: Column| match kind {
        Column::Plus(k) => sign * problem.objective[k],
        Column::Minus(k) => -sign * problem.objective[k],
        _ => 0.0,
    };
    t.obj = vec![0.0; w + 1];
    for j in 0..w {
        t.obj[j] = -cost(t.kinds[j]);
    }
    for i in 0..m {
        let cb = cost(t.kinds[t.basis[i]]);
        if cb != 0.0 {
            for j in 0..=w {
                t.obj[j] += cb * t.rows[i][j];
            }
        }
    }
    match t.run() {
        Step::Optimal => {
            let x = t.primal(n);
            let value: f64 = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            for (i, c) in problem.constraints.iter().enumerate() {
                let scale = 1.0 + c.bound.abs() + c.coeffs.iter().zip(&x).map(|(a, v)| (a * v).abs()).sum::<f64>();
                assert!(
                    c.violation(&x) <= PIVOT_TOL * scale,
                    "simplex returned a point violating row {i} by {}",
                    c.violation(&x)
                );
            }
            Ok(LpResult::Optimal { x, value })
        }
        Step::Unbounded(col) => {
            let mut direction = vec![0.0; n];
            let mut add = |kind: Column, amount: f64| match kind {
                Column::Plus(k) => direction[k] += amount,
                Column::Minus(k) => direction[k] -= amount,
                _ => {}
            };
            add(t.kinds[col], 1.0);
            for i in 0..m {
                add(t.kinds[t.basis[i]], -t.rows[i][col]);
            }
            Ok(LpResult::Unbounded { direction })
        }
    }
}
