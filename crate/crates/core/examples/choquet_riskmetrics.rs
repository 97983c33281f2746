// Choquet integrals against the Expected Shortfall game agree with the
// quantile formula; the entropic functional is not comonotonic additive.

use refmeasure::choquet::{choquet_integral, comonotonic_additivity_test, evaluate_riskmetric, FunctionalOracle, RiskMetric};
use refmeasure::games::{build_family, Family};
use refmeasure::{FiniteSpace, SimpleRandomVariable};

fn main() {
    let space = FiniteSpace::uniform(4).unwrap();
    let p = space.probability();
    let x = SimpleRandomVariable::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let v = build_family(&Family::Es { beta: 0.5 }, p).unwrap();
    let via_game = choquet_integral(&v, &x).unwrap();
    let via_quantiles = evaluate_riskmetric(&RiskMetric::Es { beta: 0.5 }, p, &x).unwrap();
    println!("ES_0.5(X): Choquet {via_game}, quantile integral {via_quantiles}");

    let space8 = FiniteSpace::uniform(8).unwrap();
    let entropic = FunctionalOracle::riskmetric(&RiskMetric::Entropic { alpha: 1.0 }, space8.probability()).unwrap();
    let report = comonotonic_additivity_test(&entropic, &space8, 100, 42).unwrap();
    println!("entropic comonotonic additive: {} (witness found: {})", report.passes, report.witness.is_some());
}
