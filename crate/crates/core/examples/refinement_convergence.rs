// Loose extremum totals under refinement: entropic totals converge to
// `e − 1`, a floored distortion diverges.

use refmeasure::elicit::{convergence_study, ConvergenceFamily, Statistic};

fn main() {
    let ns: Vec<usize> = (2..=12).map(|k| 1 << k).collect();
    let series = convergence_study(&ConvergenceFamily::Entropic { alpha: 1.0 }, &ns, Statistic::Total).unwrap();
    for row in &series.rows {
        println!("n = {:5}: total {:.7}, error {:.2e}", row.n, row.statistic, row.abs_error.unwrap());
    }
    let floor: Vec<usize> = (10..=200).step_by(10).collect();
    let series = convergence_study(&ConvergenceFamily::Floor { level: 0.1 }, &floor, Statistic::Total).unwrap();
    println!("floor distortion diverging: {}", series.diverging);
}
