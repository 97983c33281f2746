// Distortion games and their structural properties.

use refmeasure::games::{build_family, check_invariance, classify_properties, conjugate_game, Family};
use refmeasure::space::{Event, ProbabilityCharge};

fn main() {
    let p = ProbabilityCharge::uniform(6).unwrap();
    for family in [Family::Entropic { alpha: 1.0 }, Family::Es { beta: 0.5 }] {
        let v = build_family(&family, &p).unwrap();
        let props = classify_properties(&v).unwrap();
        println!(
            "{family:?}: v(2 atoms) = {:.4}, monotone {}, submodular {}, superadditive {}",
            v.value(Event::full(2)),
            props.monotone.holds,
            props.submodular.holds,
            props.superadditive.holds
        );
        assert!(check_invariance(&v, &p).unwrap().invariant);
        let dual = conjugate_game(&v);
        println!("  conjugate at 2 atoms: {:.4}", dual.value(Event::full(2)));
    }
}
