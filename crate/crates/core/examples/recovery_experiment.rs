//! A small Monte Carlo grid with CSV, JSON and SVG reports.
//! MEDOID_LP_THREADS caps the worker pool.

use medoid_lp::experiment::{run_experiment, ExperimentConfig};
use medoid_lp::report::{emit_report, ReportFormat};

fn main() -> medoid_lp::Result<()> {
    let cfg = ExperimentConfig::parse(
        "n = 5, 10\n\
         k = 2\n\
         R = 2, 2.5, 3, 3.5\n\
         case = 1, 2\n\
         trials = 20\n\
         seed = 1\n",
    )?;
    let cells = run_experiment(&cfg)?;
    println!("case  n    R  ball/trials  prop1");
    for c in &cells {
        println!(
            "{:>4} {:>2} {:>4.1}  {:>4}/{:<6} {:>5}",
            c.cell.case, c.cell.n, c.cell.r, c.ball, c.trials, c.prop1_holds
        );
    }

    let dir = std::env::temp_dir().join("medoid-lp-grid");
    emit_report(
        &cells,
        &[ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg],
        &dir,
    )?;
    println!("reports in {}", dir.display());
    Ok(())
}
