//! Two noisy balls, one LP solve, and a look at what came back.
//!
//!     cargo run --example solve_relaxation -- 3.2 7

use medoid_lp::kmedoids::{classify_recovery, solve_linkmed};
use medoid_lp::model::{dissimilarities, BallsSpec, Metric, PointSet, RadialLaw};

fn main() -> medoid_lp::Result<()> {
    let mut args = std::env::args().skip(1);
    let r: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(3.2);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let spec = BallsSpec::new(2, 15, 2, r, RadialLaw::QuadraticCdf);
    let ps = PointSet::separated_balls(&spec, seed, 0)?;
    let w = dissimilarities(&ps, Metric::SquaredEuclidean)?;

    let rr = solve_linkmed(&w, 2)?;
    println!("N = {}, R = {r}, seed = {seed}", ps.len());
    println!(
        "objective {:.6} after {} pivots, {} coupling rows",
        rr.objective, rr.iterations, rr.coupling_rows
    );

    match &rr.clustering {
        Some(c) => {
            println!("integral; medoids {:?}", c.medoids());
            for j in c.medoids() {
                println!("  medoid {j}: {} points", c.cluster(*j).len());
            }
        }
        None => {
            let frac = (0..ps.len())
                .filter(|&j| rr.z(j, j) > 1e-6 && rr.z(j, j) < 1.0 - 1e-6)
                .count();
            println!("fractional; {frac} columns with 0 < z_jj < 1");
        }
    }
    let out = classify_recovery(&rr, &ps.ball_of)?;
    println!("recovery: {:?}", out.label);
    Ok(())
}
