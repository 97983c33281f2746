// Extrema of loose and strict (anti)cores, dictionary supporting sets and
// sandwich constants.

use refmeasure::choquet::{Dictionary, DictionaryStrategy, FunctionalOracle, RiskMetric};
use refmeasure::games::{build_distortion, build_family, Family};
use refmeasure::supports::{dictionary_extremum, loose_extremum, sandwich_constants, strict_extremum, DictionarySide, GameSide, Normalization};
use refmeasure::{DistortionFunction, ProbabilityCharge};

fn main() {
    let p = ProbabilityCharge::uniform(8).unwrap();
    let es = build_family(&Family::Es { beta: 0.75 }, &p).unwrap();
    let loose = loose_extremum(&es, GameSide::AnticoreSup);
    println!("loose anticore sup: {:?}", loose.extremum.unwrap().values());
    let core = strict_extremum(&es, GameSide::CoreInf).unwrap();
    println!("core inf: {:?} ({} rows in the infeasibility certificate)", core.status, core.infeasible_rows.len());

    let phi = FunctionalOracle::riskmetric(&RiskMetric::Es { beta: 0.75 }, &p).unwrap();
    let d = Dictionary::generate(&DictionaryStrategy::Indicators, 8).unwrap();
    let upper = dictionary_extremum(&phi, &d, DictionarySide::UpperInf, &Normalization::None).unwrap();
    println!("upper supporting set inf: {:?}", upper.extremum.unwrap().values());

    let p4 = ProbabilityCharge::uniform(4).unwrap();
    let square = build_distortion(&DistortionFunction::power(2.0), &p4).unwrap();
    println!("sandwich constants of P^2: {:?}", sandwich_constants(&square, &p4).unwrap());
}
