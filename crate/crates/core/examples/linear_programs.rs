// The dense simplex solver on a small production problem.

use refmeasure::lp::{solve, LpProblem, LpResult, Relation, Sense};

fn main() {
    let problem = LpProblem::new(vec![3.0, 5.0], Sense::Maximize)
        .constrain(vec![1.0, 0.0], Relation::Le, 4.0)
        .constrain(vec![0.0, 2.0], Relation::Le, 12.0)
        .constrain(vec![3.0, 2.0], Relation::Le, 18.0)
        .constrain(vec![1.0, 0.0], Relation::Ge, 0.0)
        .constrain(vec![0.0, 1.0], Relation::Ge, 0.0);
    match solve(&problem).unwrap() {
        LpResult::Optimal { x, value } => println!("optimum {value} at {x:?}"),
        other => println!("{other:?}"),
    }

    let empty = LpProblem::new(vec![1.0], Sense::Minimize)
        .constrain(vec![1.0], Relation::Ge, 2.0)
        .constrain(vec![1.0], Relation::Le, 1.0);
    println!("{:?}", solve(&empty).unwrap());
}
