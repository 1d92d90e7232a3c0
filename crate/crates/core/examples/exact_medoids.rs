//! Enumerate every medoid set and compare with the relaxation.
//! Points on a line tie easily, which shows off the multiple-optima output.

use medoid_lp::kmedoids::{brute_force_kmed, solve_linkmed};
use medoid_lp::model::{DissimilarityMatrix, Metric};

fn main() -> medoid_lp::Result<()> {
    let xs = [0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0];
    let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let w = DissimilarityMatrix::from_points(&pts, Metric::Euclidean)?;

    for k in 1..=3 {
        let ex = brute_force_kmed(&w, k)?;
        let rr = solve_linkmed(&w, k)?;
        println!(
            "k={k}: best {:.3}, optimal sets {:?}{}; relaxation {:.3} ({})",
            ex.best_objective,
            ex.optimal_medoid_sets,
            if ex.unique { "" } else { " (tied)" },
            rr.objective,
            if rr.integral { "integral" } else { "fractional" },
        );
    }
    Ok(())
}
