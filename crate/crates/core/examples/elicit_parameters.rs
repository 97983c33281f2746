// Eliciting the reference probability and the parameter of a distortion
// family from its loose core.

use refmeasure::elicit::{candidate_from_extremum, recover_parameter, ParameterFamily};
use refmeasure::games::{build_family, Family};
use refmeasure::supports::{loose_extremum, GameSide};
use refmeasure::ProbabilityCharge;

fn main() {
    let p = ProbabilityCharge::uniform(8).unwrap();
    for (family, which) in [(Family::Es { beta: 0.75 }, ParameterFamily::Es), (Family::Entropic { alpha: 1.0 }, ParameterFamily::Entropic)] {
        let v = build_family(&family, &p).unwrap();
        let candidate = candidate_from_extremum(&loose_extremum(&v, GameSide::CoreInf)).unwrap();
        let scale = candidate.scale.unwrap();
        let estimate = recover_parameter(which, scale).unwrap();
        println!("{family:?}: candidate uniform {}, scale {scale:.6}, parameter {estimate:.6}", candidate.candidate.as_ref() == Some(&p));
    }
}
