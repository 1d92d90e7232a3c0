//! Draw points from k unit balls and write them as CSV on stdout.
//!
//!     cargo run --example sample_balls -- 3 4 > pts.csv

use std::io;

use medoid_lp::model::{dissimilarities, BallsSpec, Metric, PointSet, RadialLaw};

fn main() -> medoid_lp::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let d: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2);

    // Case 1 radii are uniform in volume; case 2 has P(|x| <= r) = r^2.
    let spec = BallsSpec::new(k, 6, d, 2.5, RadialLaw::UniformBall);
    let ps = PointSet::separated_balls(&spec, 42, 0)?;
    ps.write_csv(io::stdout().lock())?;

    let w = dissimilarities(&ps, Metric::SquaredEuclidean)?;
    let far = w.as_slice().iter().cloned().fold(0.0, f64::max);
    eprintln!("{} points, largest squared distance {far:.3}", ps.len());
    Ok(())
}
