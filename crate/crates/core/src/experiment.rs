//! Monte Carlo recovery experiments over grids of separated-balls instances.
//!
//! Trial `t` of every cell draws ball `b` from `stream_seed(base_seed, t, b)`,
//! so cells that differ only in `R`, `k` or the radial law reuse the same
//! underlying uniforms.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{check_dual_certificate, check_max_u_certificate, check_threshold_certificate};
use crate::kmedoids::{classify_recovery, solve_linkmed, Clustering, RecoveryLabel};
use crate::model::{dissimilarities, BallsSpec, CenterLayout, Metric, PointSet, RadialLaw};
use crate::{Error, Result};

/// Largest instance (`n k` points) a cell may ask for.
pub const MAX_POINTS: usize = 90;

/// Environment variable bounding the number of worker threads.
pub const THREADS_ENV: &str = "MEDOID_LP_THREADS";

/// Worker count: `MEDOID_LP_THREADS` when set to a positive integer, else
/// the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` on a pool of [`worker_count`] threads.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub r: Vec<f64>,
    pub d: Vec<usize>,
    pub cases: Vec<u8>,
    pub trials: usize,
    pub base_seed: u64,
    pub metric: Metric,
    /// `None` picks simplex centers when `k <= d + 1` and a line otherwise.
    pub layout: Option<CenterLayout>,
    /// Evaluate cor3, cor4 and prop1 on the ground-truth clustering.
    pub certificates: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: vec![20],
            k: vec![2],
            r: vec![3.0],
            d: vec![2],
            cases: vec![1],
            trials: 100,
            base_seed: 0,
            metric: Metric::SquaredEuclidean,
            layout: None,
            certificates: true,
            output_dir: None,
        }
    }
}

fn reference_separations() -> Vec<f64> {
    (0..16).map(|i| (20 + 2 * i) as f64 / 10.0).collect()
}

impl ExperimentConfig {
    /// The grid of the original study: 6 x 2 x 16 x 4 x 2 cells, 1000 trials.
    pub fn full_reference_grid() -> Self {
        ExperimentConfig {
            n: vec![5, 10, 15, 20, 25, 30],
            k: vec![2, 3],
            r: reference_separations(),
            d: vec![2, 3, 4, 10],
            cases: vec![1, 2],
            trials: 1000,
            ..Default::default()
        }
    }

    /// A desk-sized version of the same grid (at most 60 points per instance).
    pub fn scaled_reference_grid() -> Self {
        ExperimentConfig {
            n: vec![5, 10, 20],
            k: vec![2, 3],
            r: vec![2.0, 3.0, 4.0, 5.0],
            d: vec![2, 4],
            cases: vec![1, 2],
            trials: 20,
            ..Default::default()
        }
    }

    /// Flat `key = value` text. Repeating a key (or separating values with
    /// commas) builds a list; the first occurrence of a list key replaces the
    /// default. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            let first = !seen.contains(&key);
            if first {
                seen.push(key.clone());
            }
            let at = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
            match key.as_str() {
                "n" => extend(&mut cfg.n, value, first).map_err(at)?,
                "k" => extend(&mut cfg.k, value, first).map_err(at)?,
                "r" | "separation" => extend(&mut cfg.r, value, first).map_err(at)?,
                "d" => extend(&mut cfg.d, value, first).map_err(at)?,
                "case" | "cases" => extend(&mut cfg.cases, value, first).map_err(at)?,
                "trials" => cfg.trials = scalar(value).map_err(at)?,
                "seed" | "base_seed" => cfg.base_seed = scalar(value).map_err(at)?,
                "metric" => cfg.metric = value.parse().map_err(at)?,
                "layout" => {
                    cfg.layout = match value.to_ascii_lowercase().as_str() {
                        "auto" => None,
                        v => Some(v.parse().map_err(at)?),
                    }
                }
                "certificates" => cfg.certificates = parse_bool(value).map_err(at)?,
                "output" | "out" | "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                _ => return Err(Error::Parse(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n.is_empty() || self.k.is_empty() || self.r.is_empty() || self.d.is_empty() || self.cases.is_empty() {
            return bad("every grid axis needs at least one value".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.n.contains(&0) || self.k.contains(&0) {
            return bad("n and k must be positive".into());
        }
        if self.n.iter().min().unwrap() * self.k.iter().min().unwrap() < 2 {
            return bad("every cell needs at least two points".into());
        }
        if let Some(r) = self.r.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return bad(format!("separation must be positive, got {r}"));
        }
        if let Some(d) = self.d.iter().find(|&&d| d < 2) {
            return bad(format!("dimension must be >= 2, got {d}"));
        }
        if let Some(c) = self.cases.iter().find(|&&c| c != 1 && c != 2) {
            return bad(format!("case must be 1 or 2, got {c}"));
        }
        let biggest = self.n.iter().max().unwrap() * self.k.iter().max().unwrap();
        if biggest > MAX_POINTS {
            return bad(format!("cells with {biggest} points exceed the limit of {MAX_POINTS}"));
        }
        Ok(())
    }

    /// Cells in report order: case, d, k, n, then R.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &case in &self.cases {
            for &d in &self.d {
                for &k in &self.k {
                    for &n in &self.n {
                        for &r in &self.r {
                            out.push(Cell { case, d, k, n, r });
                        }
                    }
                }
            }
        }
        out
    }
}

fn extend<T: FromStr>(list: &mut Vec<T>, value: &str, replace: bool) -> Result<()> {
    if replace {
        list.clear();
    }
    for v in value.split(',').map(str::trim).filter(|v| !v.is_empty()) {
        list.push(scalar(v)?);
    }
    Ok(())
}

fn scalar<T: FromStr>(v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Parse(format!("bad value {v:?}")))
}

fn parse_bool(v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Parse(format!("bad boolean {v:?}"))),
    }
}

/// Grid coordinates of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub case: u8,
    pub d: usize,
    pub k: usize,
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
}

/// Per-trial record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    /// `None` when the solver failed on this trial.
    pub label: Option<RecoveryLabel>,
    pub error: Option<String>,
    pub prop1: Option<bool>,
    pub cor3: Option<bool>,
    pub cor4: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    #[serde(flatten)]
    pub cell: Cell,
    pub trials: usize,
    pub fractional: usize,
    /// Integral vertex whose partition is not the ball partition.
    pub cluster_only: usize,
    pub ball: usize,
    pub solver_failures: usize,
    /// Trials on which the certificates were evaluated.
    pub certified: usize,
    pub prop1_holds: usize,
    pub cor3_holds: usize,
    pub cor4_holds: usize,
    /// Ball recoveries for which prop1 failed on the true clustering.
    pub prop1_misses: usize,
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

impl CellResult {
    pub fn failed_ball_recoveries(&self) -> usize {
        self.trials - self.ball
    }

    /// Trials whose vertex was not integral (solver failures included).
    pub fn failed_cluster_recoveries(&self) -> usize {
        self.fractional + self.solver_failures
    }

    fn reduce(cell: Cell, outcomes: Vec<TrialOutcome>, wall_time: Duration) -> Self {
        let count = |f: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
        CellResult {
            cell,
            trials: outcomes.len(),
            fractional: count(&|o| o.label == Some(RecoveryLabel::Fractional)),
            cluster_only: count(&|o| o.label == Some(RecoveryLabel::ClusterRecovery)),
            ball: count(&|o| o.label == Some(RecoveryLabel::BallRecovery)),
            solver_failures: count(&|o| o.label.is_none()),
            certified: count(&|o| o.prop1.is_some()),
            prop1_holds: count(&|o| o.prop1 == Some(true)),
            cor3_holds: count(&|o| o.cor3 == Some(true)),
            cor4_holds: count(&|o| o.cor4 == Some(true)),
            prop1_misses: count(&|o| o.label == Some(RecoveryLabel::BallRecovery) && o.prop1 == Some(false)),
            wall_time,
            outcomes,
        }
    }
}

fn run_trial(cfg: &ExperimentConfig, cell: Cell, trial: usize) -> Result<TrialOutcome> {
    let law = RadialLaw::from_case(cell.case)?;
    let mut spec = BallsSpec::new(cell.k, cell.n, cell.d, cell.r, law);
    if let Some(layout) = cfg.layout {
        spec.layout = layout;
    }
    let ps = PointSet::separated_balls(&spec, cfg.base_seed, trial as u64)?;
    let w = dissimilarities(&ps, cfg.metric)?;
    let mut out = TrialOutcome {
        trial,
        label: None,
        error: None,
        prop1: None,
        cor3: None,
        cor4: None,
    };
    match solve_linkmed(&w, cell.k).and_then(|rr| classify_recovery(&rr, &ps.ball_of)) {
        Ok(o) => out.label = Some(o.label),
        Err(e @ (Error::Numerical(_) | Error::SolverStatus(_))) => out.error = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    if cfg.certificates {
        let truth = Clustering::from_labels(&w, &ps.ball_of)?;
        out.cor3 = Some(check_threshold_certificate(&w, &truth)?.holds);
        if cell.k >= 2 {
            out.cor4 = Some(check_max_u_certificate(&w, &truth)?.holds);
        }
        match check_dual_certificate(&w, &truth) {
            Ok(rep) => out.prop1 = Some(rep.holds),
            Err(Error::Numerical(_) | Error::SolverStatus(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Runs every trial of every cell on the worker pool and reduces in cell
/// order. Solver failures are recorded per trial; anything else aborts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let cells = cfg.cells();
    if let Some(c) = cells
        .iter()
        .find(|c| cfg.layout == Some(CenterLayout::Simplex) && c.k > c.d + 1)
    {
        return Err(Error::InfeasibleLayout { k: c.k, d: c.d });
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let timed = with_workers(|| {
        jobs.par_iter()
            .map(|&(c, t)| {
                let start = Instant::now();
                run_trial(cfg, cells[c], t).map(|o| (o, start.elapsed()))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut it = timed.into_iter();
    Ok(cells
        .into_iter()
        .map(|cell| {
            let (outcomes, times): (Vec<_>, Vec<_>) = it.by_ref().take(cfg.trials).unzip();
            CellResult::reduce(cell, outcomes, times.into_iter().sum())
        })
        .collect())
}
