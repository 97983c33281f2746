// Lattice operations on signed charges and the rearrangement functional.

use refmeasure::charge_lattice::{join, meet, rearrangement_stats, rho, total_variation};
use refmeasure::{ProbabilityCharge, SignedCharge, SimpleRandomVariable};

fn main() {
    let mu = SignedCharge::new(vec![0.4, -0.2, 0.1, 0.3]).unwrap();
    let nu = SignedCharge::new(vec![0.1, 0.3, -0.1, 0.2]).unwrap();
    println!("mu v nu = {:?}", join(&mu, &nu).unwrap().values());
    println!("mu ^ nu = {:?}", meet(&mu, &nu).unwrap().values());
    println!("|mu|(Omega) = {}", total_variation(&mu));

    let p = ProbabilityCharge::uniform(4).unwrap();
    let stats = rearrangement_stats(&mu, &p).unwrap();
    for class in &stats.classes {
        println!("P(A) = {}: s = {:.3}, iota = {:.3}", class.probability, class.sup, class.inf);
    }
    let x = SimpleRandomVariable::new(vec![3.0, 0.0, 1.0, 2.0]).unwrap();
    println!("rho_mu(X) = {}", rho(&mu, &p, &x).unwrap());
}
