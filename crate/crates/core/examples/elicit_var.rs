// Value-at-Risk capacities: the recursion recovers the probability exactly
// and the level up to a grid bracket.

use refmeasure::elicit::elicit_var;
use refmeasure::games::{build_family, Family};
use refmeasure::space::format_rational;
use refmeasure::{FiniteSpace, Rational};

fn main() {
    for (gamma, n, depth) in [(Rational::new(1, 2), 8, 3), (Rational::new(3, 4), 16, 4)] {
        let space = FiniteSpace::uniform(n).unwrap();
        let capacity = build_family(&Family::Var { gamma }, space.probability()).unwrap();
        let report = elicit_var(&capacity, &space, depth).unwrap();
        println!(
            "gamma {} on {n} atoms: {:?} branch, estimate {:?}, refined ({}, {}]",
            format_rational(&gamma),
            report.branch,
            report.gamma_estimate,
            format_rational(&report.refined_bracket.lo),
            format_rational(&report.refined_bracket.hi)
        );
    }
}
