//! k-medoids clustering through its linear-programming relaxation.
//!
//! The crate covers the full path from data to verdict:
//!
//! * [`model`] draws separated-balls instances and builds dissimilarity matrices,
//! * [`lp`] is a deterministic dense revised simplex solver with LP-file export,
//! * [`kmedoids`] builds the integer program and its relaxation, solves the
//!   relaxation to a vertex and enumerates exact optima,
//! * [`certificates`] checks the dual certificates that witness exact recovery,
//! * [`theory`] evaluates the separated-balls guarantee inequalities and the
//!   concentration bounds behind them,
//! * [`experiment`] and [`report`] run Monte Carlo recovery grids and render
//!   CSV/JSON/SVG summaries; [`cli`] wraps everything behind one binary.
#![allow(clippy::needless_range_loop)]

pub mod certificates;
pub mod cli;
mod error;
pub mod experiment;
pub mod kmedoids;
pub mod lp;
pub mod model;
pub mod report;
pub mod theory;

pub use certificates::{
    check_democratic_certificate, check_dual_certificate, check_max_u_certificate, check_threshold_certificate,
    CertificateKind, CertificateReport,
};
pub use error::{Error, Result};
pub use experiment::{run_experiment, CellResult, ExperimentConfig};
pub use kmedoids::{
    brute_force_kmed, build_linkmed, classify_recovery, solve_linkmed, Clustering, ExactResult, RecoveryLabel,
    RecoveryOutcome, RelaxationResult,
};
pub use lp::{export_lp_text, solve_lp, LinearProgram, LpSolution, Relation, Sense, Status};
pub use model::{
    dissimilarities, place_ball_centers, sample_ball, CenterLayout, DissimilarityMatrix, Metric, PointSet, RadialLaw,
};
pub use report::{emit_report, ReportFormat};
pub use theory::{check_guarantee, validate_lemma5_empirically, GuaranteeQuery, Lemma5Config, TheoremReport};
