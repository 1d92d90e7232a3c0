//! Command-line front end. [`run`] takes argv and returns the exit code:
//! 0 on success, 1 on usage or input errors, 2 on numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::certificates::check_all;
use crate::experiment::{run_experiment, with_workers, ExperimentConfig};
use crate::kmedoids::{
    brute_force_kmed, build_linkmed, classify_recovery, solve_linkmed_with, Clustering, RelaxationResult, Strategy,
};
use crate::lp::{export_lp_text, read_solution_csv};
use crate::model::{dissimilarities, BallsSpec, CenterLayout, DissimilarityMatrix, Metric, PointSet, RadialLaw};
use crate::report::{emit_report, write_csv, ReportFormat};
use crate::theory::{check_guarantee, validate_lemma5_empirically, GuaranteeQuery, Lemma5Config, Statements};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "medoid-lp",
    version,
    about = "k-medoids via its LP relaxation: solve, certify, simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the LP relaxation; prints JSON.
    Solve(SolveArgs),
    /// Enumerate all medoid sets; prints JSON.
    Exact(InstanceArgs),
    /// Run every recovery certificate on a clustering; prints JSON.
    Certify(CertifyArgs),
    /// Draw a separated-balls point set as CSV.
    Sample(SampleArgs),
    /// Monte Carlo recovery grid.
    Experiment(ExperimentArgs),
    /// Evaluate the recovery guarantee (or the concentration lemma).
    TheoremCheck(TheoremArgs),
    /// Write the relaxation in LP file format.
    ExportLp(InstanceArgs),
}

#[derive(Args, Debug)]
struct Input {
    /// Point CSV (`x0,...,ball`; the ball column is optional).
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    points: Option<PathBuf>,
    /// Dissimilarity matrix CSV, N rows of N values, no header.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Dissimilarity applied to points.
    #[arg(long, default_value = "sq")]
    metric: Metric,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    k: usize,
    /// Output file (default standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Solve with every coupling row instead of generating them lazily.
    #[arg(long)]
    full: bool,
    /// Also write the z matrix as CSV.
    #[arg(long)]
    z_out: Option<PathBuf>,
    /// Externally computed solution (`name,value` CSV) to compare against.
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    input: Input,
    /// Cluster labels, one per line (default: the ball column of --points).
    #[arg(long, conflicts_with = "medoids")]
    labels: Option<PathBuf>,
    /// Medoid indices; points go to the nearest one.
    #[arg(long, value_delimiter = ',')]
    medoids: Vec<usize>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long = "R")]
    r: f64,
    #[arg(long, default_value_t = 1)]
    case: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// simplex or line (default: simplex when it fits).
    #[arg(long)]
    layout: Option<CenterLayout>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scaled-down version of the original study's grid.
    #[arg(long, conflicts_with_all = ["config", "grid_full_paper"])]
    grid_default_paper: bool,
    /// The original 1000-trial grid (hours of compute).
    #[arg(long, conflicts_with = "config")]
    grid_full_paper: bool,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long = "R", value_delimiter = ',')]
    r: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    case: Vec<u8>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    layout: Option<CenterLayout>,
    /// Skip the certificate checks on the true clustering.
    #[arg(long)]
    no_certificates: bool,
    /// Report directory (default: CSV on standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Formats written to --out.
    #[arg(long, value_delimiter = ',', default_values = ["csv", "json", "svg"])]
    format: Vec<ReportFormat>,
}

#[derive(Args, Debug)]
struct TheoremArgs {
    #[arg(long = "R", value_delimiter = ',', conflicts_with = "epsilon")]
    r: Vec<f64>,
    /// Separation given as 3.75 + epsilon.
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2])]
    d: Vec<usize>,
    /// Check the table of valid combinations instead.
    #[arg(long, conflicts_with_all = ["r", "epsilon", "n", "k", "lemma5"])]
    table: bool,
    /// Monte Carlo check of the concentration lemma (uses --n, --d).
    #[arg(long)]
    lemma5: bool,
    #[arg(long, default_value_t = 50, requires = "lemma5")]
    reps: usize,
    #[arg(long, default_value_t = 0, requires = "lemma5")]
    seed: u64,
    #[arg(long, default_value_t = 2, requires = "lemma5")]
    case: u8,
    #[arg(long, requires = "lemma5")]
    alpha: Option<f64>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::SolverStatus(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Solve(a) => solve(a, out),
        Command::Exact(a) => {
            let (w, _) = load(&a.input)?;
            let exact = brute_force_kmed(&w, a.k)?;
            emit_json(&exact, a.out.as_deref(), out)
        }
        Command::Certify(a) => certify(a, out),
        Command::Sample(a) => sample(a, out),
        Command::Experiment(a) => experiment(a, out, err),
        Command::TheoremCheck(a) => theorem(a, out),
        Command::ExportLp(a) => {
            let (w, _) = load(&a.input)?;
            let text = export_lp_text(&build_linkmed(&w, a.k)?)?;
            emit_text(&text, a.out.as_deref(), out)
        }
    }
}

/// Matrix plus ground-truth labels when the point file carries them.
fn load(input: &Input) -> Result<(DissimilarityMatrix, Option<Vec<usize>>)> {
    if let Some(p) = &input.points {
        let text = fs::read_to_string(p)?;
        let has_ball = text
            .lines()
            .next()
            .and_then(|h| h.split(',').next_back())
            .is_some_and(|c| c.trim().eq_ignore_ascii_case("ball"));
        let ps = PointSet::read_csv(text.as_bytes())?;
        let w = dissimilarities(&ps, input.metric)?;
        Ok((w, has_ball.then_some(ps.ball_of)))
    } else {
        let p = input.matrix.as_ref().expect("clap requires --points or --matrix");
        Ok((DissimilarityMatrix::read_csv(fs::File::open(p)?)?, None))
    }
}

fn emit_text(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(&text, path, out)
}

#[derive(Serialize)]
struct Comparison {
    objective: f64,
    integral: bool,
    medoids: Option<Vec<usize>>,
    objective_gap: f64,
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<()> {
    let (w, truth) = load(&a.inst.input)?;
    let strategy = if a.full { Strategy::Full } else { Strategy::Lazy };
    let rr = solve_linkmed_with(&w, a.inst.k, strategy)?;
    if let Some(p) = &a.z_out {
        rr.write_z_csv(fs::File::create(p)?)?;
    }
    let recovery = truth.map(|t| classify_recovery(&rr, &t)).transpose()?;
    let comparison = match &a.compare {
        Some(p) => {
            let lp = build_linkmed(&w, a.inst.k)?;
            let z = read_solution_csv(&lp, fs::File::open(p)?)?;
            let ext = RelaxationResult::from_z(&w, a.inst.k, z)?;
            Some(Comparison {
                objective: ext.objective,
                integral: ext.integral,
                medoids: ext.clustering.as_ref().map(|c| c.medoids().to_vec()),
                objective_gap: ext.objective - rr.objective,
            })
        }
        None => None,
    };
    #[derive(Serialize)]
    struct SolveOutput<'a> {
        result: &'a RelaxationResult,
        #[serde(skip_serializing_if = "Option::is_none")]
        recovery: Option<crate::kmedoids::RecoveryOutcome>,
        #[serde(skip_serializing_if = "Option::is_none")]
        external: Option<Comparison>,
    }
    emit_json(
        &SolveOutput {
            result: &rr,
            recovery,
            external: comparison,
        },
        a.inst.out.as_deref(),
        out,
    )
}

fn certify(a: CertifyArgs, out: &mut dyn Write) -> Result<()> {
    let (w, truth) = load(&a.input)?;
    let c = if let Some(p) = &a.labels {
        let labels = fs::read_to_string(p)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.parse::<usize>().map_err(|_| Error::Parse(format!("bad label {l:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if labels.len() != w.n() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} points",
                labels.len(),
                w.n()
            )));
        }
        Clustering::from_labels(&w, &labels)?
    } else if !a.medoids.is_empty() {
        Clustering::nearest(&w, a.medoids.iter().copied())?
    } else if let Some(t) = truth {
        Clustering::from_labels(&w, &t)?
    } else {
        return Err(Error::InvalidInput(
            "give --labels, --medoids, or points with a ball column".into(),
        ));
    };
    emit_json(&check_all(&w, &c)?, None, out)
}

fn sample(a: SampleArgs, out: &mut dyn Write) -> Result<()> {
    let mut spec = BallsSpec::new(a.k, a.n, a.d, a.r, RadialLaw::from_case(a.case)?);
    if let Some(l) = a.layout {
        spec.layout = l;
    }
    let ps = PointSet::separated_balls(&spec, a.seed, a.trial)?;
    let mut buf = Vec::new();
    ps.write_csv(&mut buf)?;
    emit_text(&String::from_utf8_lossy(&buf), a.out.as_deref(), out)
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut cfg = if let Some(p) = &a.config {
        ExperimentConfig::parse(&fs::read_to_string(p)?)?
    } else if a.grid_full_paper {
        ExperimentConfig::full_reference_grid()
    } else if a.grid_default_paper {
        ExperimentConfig::scaled_reference_grid()
    } else {
        ExperimentConfig::default()
    };
    for (dst, src) in [(&mut cfg.n, a.n), (&mut cfg.k, a.k), (&mut cfg.d, a.d)] {
        if !src.is_empty() {
            *dst = src;
        }
    }
    if !a.r.is_empty() {
        cfg.r = a.r;
    }
    if !a.case.is_empty() {
        cfg.cases = a.case;
    }
    cfg.trials = a.trials.unwrap_or(cfg.trials);
    cfg.base_seed = a.seed.unwrap_or(cfg.base_seed);
    cfg.metric = a.metric.unwrap_or(cfg.metric);
    cfg.layout = a.layout.or(cfg.layout);
    cfg.certificates &= !a.no_certificates;
    cfg.output_dir = a.out.or(cfg.output_dir);

    let start = Instant::now();
    let results = run_experiment(&cfg)?;
    let _ = writeln!(
        err,
        "{} cells x {} trials in {:.1} s",
        results.len(),
        cfg.trials,
        start.elapsed().as_secs_f64()
    );
    match &cfg.output_dir {
        Some(dir) => {
            for p in emit_report(&results, &a.format, dir)? {
                let _ = writeln!(err, "wrote {}", p.display());
            }
            Ok(())
        }
        None => write_csv(&results, out),
    }
}

/// Rows of the table of valid combinations, with `d = 2`.
pub fn guarantee_table() -> [GuaranteeQuery; 4] {
    [
        GuaranteeQuery::from_epsilon(0.0, 1_000_000, 2, 2),
        GuaranteeQuery::from_epsilon(0.05, 10_000_000, 3, 2),
        GuaranteeQuery::from_epsilon(0.15, 10_000, 2, 2),
        GuaranteeQuery::from_epsilon(0.15, 10_000_000, 10, 2),
    ]
}

fn theorem(a: TheoremArgs, out: &mut dyn Write) -> Result<()> {
    if a.lemma5 {
        let (&[n], &[d]) = (a.n.as_slice(), a.d.as_slice()) else {
            return Err(Error::InvalidInput("--lemma5 takes exactly one --n and one --d".into()));
        };
        let mut cfg = Lemma5Config::new(n, d, a.reps, a.seed);
        cfg.law = RadialLaw::from_case(a.case)?;
        cfg.alpha = a.alpha;
        cfg.statements = Statements::ALL;
        let summary = with_workers(|| validate_lemma5_empirically(&cfg))??;
        return emit_json(&summary, None, out);
    }
    let queries: Vec<GuaranteeQuery> = if a.table {
        guarantee_table().to_vec()
    } else {
        let seps: Vec<f64> = if a.epsilon.is_empty() {
            a.r
        } else {
            a.epsilon.iter().map(|e| 3.75 + e).collect()
        };
        if seps.is_empty() || a.n.is_empty() || a.k.is_empty() {
            return Err(Error::InvalidInput(
                "give --R (or --epsilon), --n and --k, or --table".into(),
            ));
        }
        let mut qs = Vec::new();
        for &r in &seps {
            for &n in &a.n {
                for &k in &a.k {
                    for &d in &a.d {
                        qs.push(GuaranteeQuery::new(r, n, k, d));
                    }
                }
            }
        }
        qs
    };
    let reports = queries.into_iter().map(check_guarantee).collect::<Result<Vec<_>>>()?;
    if reports.len() == 1 {
        emit_json(&reports[0], None, out)
    } else {
        emit_json(&reports, None, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("medoid-lp").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, out, err) = call(&["solve", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("Usage"));
    }

    #[test]
    fn theorem_row_one() {
        let (code, out, _) = call(&["theorem-check", "--R", "3.75", "--n", "1000000", "--k", "2", "--d", "2"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["satisfied"], true);
    }

    #[test]
    fn table_mode_all_satisfied() {
        let (code, out, _) = call(&["theorem-check", "--table"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 4);
        assert!(v.as_array().unwrap().iter().all(|r| r["satisfied"] == true));
    }

    #[test]
    fn sample_then_solve_then_certify() {
        let dir = tempfile::tempdir().unwrap();
        let pts = dir.path().join("pts.csv");
        let pts_s = pts.to_str().unwrap();
        let (code, _, _) = call(&[
            "sample", "--k", "2", "--n", "6", "--R", "5", "--seed", "4", "--out", pts_s,
        ]);
        assert_eq!(code, EXIT_OK);
        let (code, out, _) = call(&["solve", "--points", pts_s, "--k", "2", "--metric", "sq"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["integral"], true);
        assert_eq!(v["recovery"]["label"], "ball-recovery");
        let (code, out, _) = call(&["certify", "--points", pts_s]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["kind"], "prop1");
        assert_eq!(v[0]["holds"], true);
    }

    #[test]
    fn export_and_compare_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("w.csv");
        fs::write(&m, "0,1,9\n1,0,4\n9,4,0\n").unwrap();
        let m_s = m.to_str().unwrap();
        let (code, out, _) = call(&["export-lp", "--matrix", m_s, "--k", "1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("z_0_0"));
        let sol = dir.path().join("sol.csv");
        let names: Vec<String> = (0..3).flat_map(|i| (0..3).map(move |j| format!("z_{i}_{j}"))).collect();
        let rows: String = std::iter::once("name,value\n".to_string())
            .chain(
                names
                    .iter()
                    .map(|n| format!("{n},{}\n", if n.ends_with("_1") { 1 } else { 0 })),
            )
            .collect();
        fs::write(&sol, rows).unwrap();
        let (code, out, _) = call(&["solve", "--matrix", m_s, "--k", "1", "--compare", sol.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{out}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["external"]["objective_gap"].as_f64().unwrap().abs() < 1e-9);
    }

    #[test]
    fn experiment_to_stdout() {
        let (code, out, _) = call(&["experiment", "--n", "4", "--R", "4", "--trials", "2", "--seed", "7"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 2);
    }

    #[test]
    fn bad_input_maps_to_usage_code() {
        let (code, _, err) = call(&["exact", "--matrix", "/nonexistent/w.csv", "--k", "2"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.starts_with("error:"));
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_NUMERICAL);
    }
}
