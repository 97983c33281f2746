//! The simplex solver against brute-force vertex enumeration.

use proptest::prelude::*;
use refmeasure::lp::{solve, Constraint, LpProblem, LpResult, Relation, Sense};

/// Solves the square system `a x = b` by Gaussian elimination.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k - 1..m).flat_map(|last| combinations(last, k - 1).into_iter().map(move |mut c| { c.push(last); c })).collect()
}

/// Best objective over all feasible basic points, for problems whose
/// feasible region is bounded.
fn vertex_optimum(problem: &LpProblem) -> Option<f64> {
    let n = problem.variables();
    let mut best: Option<f64> = None;
    for rows in combinations(problem.constraints.len(), n) {
        let a = rows.iter().map(|&r| problem.constraints[r].coeffs.clone()).collect();
        let b = rows.iter().map(|&r| problem.constraints[r].bound).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if problem.constraints.iter().any(|c| c.violation(&x) > 1e-7) {
            continue;
        }
        let val: f64 = problem.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
        best = Some(match (best, problem.sense) {
            (None, _) => val,
            (Some(b), Sense::Maximize) => b.max(val),
            (Some(b), Sense::Minimize) => b.min(val),
        });
    }
    best
}

/// A random problem inside the box `[-5, 5]^n`, so it is bounded.
fn boxed_problem() -> impl Strategy<Value = LpProblem> {
    (1usize..=3).prop_flat_map(|n| {
        let row = (prop::collection::vec(-3.0..3.0f64, n), prop::sample::select(vec![Relation::Le, Relation::Ge]), -4.0..4.0f64);
        (prop::collection::vec(-2.0..2.0f64, n), any::<bool>(), prop::collection::vec(row, 0..=(12 - 2 * n))).prop_map(move |(obj, max, rows)| {
            let sense = if max { Sense::Maximize } else { Sense::Minimize };
            let mut p = LpProblem::new(obj, sense);
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                p = p.constrain(e.clone(), Relation::Le, 5.0).constrain(e, Relation::Ge, -5.0);
            }
            for (c, rel, b) in rows {
                p = p.constrain(c, rel, b);
            }
            p
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn agrees_with_vertex_enumeration(problem in boxed_problem()) {
        let result = solve(&problem).unwrap();
        match (vertex_optimum(&problem), &result) {
            (Some(best), LpResult::Optimal { x, value }) => {
                prop_assert!((best - value).abs() <= 1e-8 * (1.0 + best.abs()), "{best} vs {value}");
                for c in &problem.constraints {
                    prop_assert!(c.violation(x) <= 1e-9);
                }
            }
            (None, LpResult::Infeasible { .. }) => {}
            (expected, got) => prop_assert!(false, "vertex enumeration {expected:?}, solver {got:?}"),
        }
    }

    #[test]
    fn max_and_min_bracket_feasible_points(problem in boxed_problem(), probe in prop::collection::vec(-5.0..5.0f64, 3)) {
        let n = problem.variables();
        let point = &probe[..n];
        prop_assume!(problem.constraints.iter().all(|c| c.violation(point) == 0.0));
        let mut hi = problem.clone();
        hi.sense = Sense::Maximize;
        let mut lo = problem.clone();
        lo.sense = Sense::Minimize;
        let val: f64 = problem.objective.iter().zip(point).map(|(c, x)| c * x).sum();
        let top = solve(&hi).unwrap().value().unwrap();
        let bottom = solve(&lo).unwrap().value().unwrap();
        prop_assert!(bottom <= val + 1e-9 && val <= top + 1e-9);
    }
}

#[test]
fn unbounded_direction_improves_and_stays_feasible() {
    let p = LpProblem::new(vec![1.0, 1.0], Sense::Maximize).constrain(vec![1.0, -1.0], Relation::Le, 1.0).constrain(vec![0.0, 1.0], Relation::Ge, 0.0);
    let LpResult::Unbounded { direction } = solve(&p).unwrap() else { panic!("expected unbounded") };
    assert!(direction[0] + direction[1] > 0.0);
    let homogeneous = |c: &Constraint| Constraint::new(c.coeffs.clone(), c.relation, 0.0).violation(&direction);
    assert!(p.constraints.iter().all(|c| homogeneous(c) <= 1e-9));
}
