// Exact probability spaces, events and refinement.

use refmeasure::space::{format_rational, parse_rational, Event, FiniteSpace};

fn main() {
    let weights = ["1/2", "1/4", "1/8", "1/8"].map(|w| parse_rational(w).expect("valid rational"));
    let space = FiniteSpace::weighted(&weights).expect("weights sum to one");
    let a = Event::from_atoms([1, 3]);
    let p = space.event_probability(a).expect("event fits the space");
    println!("P({a:?}) = {}", format_rational(&p));

    // splitting every atom in two keeps event probabilities
    let (fine, lift) = space.refine(2).expect("refinement within the atom cap");
    let lifted = lift.lift(a);
    println!("refined to {} atoms, P({lifted:?}) = {}", fine.atoms(), format_rational(&fine.event_probability(lifted).unwrap()));
    assert_eq!(fine.event_probability(lifted).unwrap(), p);
}
