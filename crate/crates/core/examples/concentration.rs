//! Monte Carlo check of the concentration bounds for the sample medoid.

use medoid_lp::theory::{lemma5_bounds, validate_lemma5_empirically, Lemma5Config};

fn main() -> medoid_lp::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2_000);
    let b = lemma5_bounds(n, 2, (2.0 * (n as f64).ln()).sqrt())?;
    println!(
        "n={n}: |medoid| <= {:.4}, min |x| <= {:.4} with prob >= {:.4}",
        b.medoid_norm_bound, b.min_norm_bound, b.prob_floor
    );

    let s = validate_lemma5_empirically(&Lemma5Config::new(n, 2, 40, 1))?;
    println!(
        "40 reps: pairwise {} / min norm {} / medoid norm {} failures (allowance {:.2e} per rep)",
        s.pairwise_failures, s.min_norm_failures, s.medoid_norm_failures, s.failure_floor
    );
    Ok(())
}
