//! Which (R, n, k, d) combinations does the recovery guarantee cover?

use medoid_lp::cli::guarantee_table;
use medoid_lp::theory::{check_guarantee, GuaranteeQuery};

fn main() -> medoid_lp::Result<()> {
    for q in guarantee_table() {
        let rep = check_guarantee(q)?;
        println!("R={:.4} n={:e} k={} -> {}", q.r, q.n as f64, q.k, rep.satisfied);
    }

    // Smallest R on a 0.01 grid that passes for n = 1e5, k = 2.
    let n = 100_000;
    let r = (200..800).map(|i| i as f64 / 100.0).find(|&r| {
        check_guarantee(GuaranteeQuery::new(r, n, 2, 2))
            .map(|t| t.satisfied)
            .unwrap_or(false)
    });
    println!("n={n}: first passing R {:?}", r);

    let rep = check_guarantee(GuaranteeQuery::new(3.75, 10_000, 2, 2))?;
    println!("R=3.75 n=1e4 k=2:");
    for c in &rep.conditions {
        println!(
            "  {:<14} slack {:>12.4} {}",
            c.name,
            c.slack,
            if c.holds { "ok" } else { "fails" }
        );
    }
    Ok(())
}
