//! Run every optimality certificate on the ground-truth clustering of a
//! sampled instance and print margins and the tightest constraints.

use medoid_lp::certificates::check_all;
use medoid_lp::kmedoids::Clustering;
use medoid_lp::model::{dissimilarities, BallsSpec, Metric, PointSet, RadialLaw};

fn main() -> medoid_lp::Result<()> {
    let r: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3.9);
    let spec = BallsSpec::new(2, 20, 2, r, RadialLaw::QuadraticCdf);
    let ps = PointSet::separated_balls(&spec, 3, 0)?;
    let w = dissimilarities(&ps, Metric::SquaredEuclidean)?;
    let truth = Clustering::from_labels(&w, &ps.ball_of)?;
    println!(
        "R = {r}, medoids {:?}, nearest assignment: {}",
        truth.medoids(),
        truth.is_nearest(&w)
    );

    for rep in check_all(&w, &truth)? {
        print!("{:<10} {:<5} margin {:>12.6}", rep.kind.name(), rep.holds, rep.margin);
        if let Some(wit) = &rep.witness {
            print!("  u = {:.4}", wit.u);
        }
        println!();
        for b in rep.diagnostics.iter().take(2) {
            println!("    tight: {} i={:?} j={:?} l={:?}", b.constraint, b.i, b.j, b.l);
        }
    }
    Ok(())
}
