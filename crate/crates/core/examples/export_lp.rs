//! Write the relaxation in LP text format, read it back and re-solve.

use medoid_lp::kmedoids::build_linkmed;
use medoid_lp::lp::{export_lp_text, parse_lp_text, residuals, solve_lp};
use medoid_lp::model::{DissimilarityMatrix, Metric};

fn main() -> medoid_lp::Result<()> {
    let pts = vec![vec![0.0, 0.0], vec![0.2, 0.1], vec![3.0, 3.0], vec![3.1, 2.8]];
    let w = DissimilarityMatrix::from_points(&pts, Metric::SquaredEuclidean)?;
    let lp = build_linkmed(&w, 2)?;
    let text = export_lp_text(&lp)?;
    print!("{text}");

    let back = parse_lp_text(&text)?;
    let sol = solve_lp(&back)?;
    let res = residuals(&back, &sol.x, Some((&sol.duals, &sol.reduced_costs)));
    eprintln!(
        "{:?}: objective {:.6}, primal residual {:.1e}",
        sol.status, sol.objective_value, res.primal
    );
    Ok(())
}
