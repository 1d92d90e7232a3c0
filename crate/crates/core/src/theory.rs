//! The separated-balls recovery guarantee, evaluated numerically, and a
//! Monte Carlo check of the concentration lemma behind it.
//!
//! Logarithms are natural throughout.

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{sample_ball, stream_seed, RadialLaw};
use crate::{Error, Result};

/// Largest `n` for which the empirical validator computes exact medoids.
pub const MEDOID_CAP: usize = 20_000;
/// Points `l` checked per repetition for the pairwise inequality.
pub const LEMMA_PROBES: usize = 20;

/// `3 sqrt(2 ln n / (n - 2))`: bound on a medoid's distance to its ball
/// center.
pub fn rho(n: f64) -> f64 {
    3.0 * (2.0 * n.ln() / (n - 2.0)).sqrt()
}

/// `sqrt(2 ln n)`.
pub fn default_alpha(n: f64) -> f64 {
    (2.0 * n.ln()).sqrt()
}

/// `(3/2) sqrt((n - 2) / (2 d))`.
pub fn alpha_max(n: f64, d: f64) -> f64 {
    1.5 * ((n - 2.0) / (2.0 * d)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuaranteeQuery {
    /// Center separation in units of the ball radius.
    pub r: f64,
    /// Points per ball.
    pub n: usize,
    /// Number of balls.
    pub k: usize,
    pub d: usize,
}

impl GuaranteeQuery {
    pub fn new(r: f64, n: usize, k: usize, d: usize) -> Self {
        GuaranteeQuery { r, n, k, d }
    }

    /// Separation `3.75 + eps`.
    pub fn from_epsilon(eps: f64, n: usize, k: usize, d: usize) -> Self {
        GuaranteeQuery { r: 3.75 + eps, n, k, d }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 || self.k < 2 || self.d < 2 || !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "need n >= 3, k >= 2, d >= 2 and R > 0, got n={} k={} d={} R={}",
                self.n, self.k, self.d, self.r
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub strict: bool,
    /// Right side minus left side (positive when comfortably satisfied).
    pub slack: f64,
    pub holds: bool,
}

impl Condition {
    fn new(name: &'static str, strict: bool, slack: f64) -> Self {
        let holds = if strict { slack > 0.0 } else { slack >= 0.0 };
        Condition {
            name,
            strict,
            slack,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub query: GuaranteeQuery,
    pub rho: f64,
    pub alpha: f64,
    pub u_bound: f64,
    /// Dimension limit, separation, medoid margin, concentration (in order).
    pub conditions: [Condition; 4],
    /// `1 - 4k/n`.
    pub probability_floor: f64,
    pub satisfied: bool,
}

/// Evaluates the four sufficient conditions of the guarantee as printed.
pub fn check_guarantee(q: GuaranteeQuery) -> Result<TheoremReport> {
    q.validate()?;
    let n = q.n as f64;
    let k = q.k as f64;
    let d = q.d as f64;
    let r = q.r;
    let ln = n.ln();
    let rho = rho(n);
    let s = (1.0 + rho).sqrt();

    let dimension = 9.0 / 8.0 * (n - 2.0) / ln - d;
    let separation = r - (1.0 + rho + 2.0 * s);
    let a = r - 1.0 - 2.0 * s;
    let medoid_margin = a - rho / 3.0;

    let m = a.min(1.0);
    let outer = n * (1.0 - a * a).max(0.0) + (n / 2.0 * ln).sqrt();
    let spread = (1.0 + rho).powi(2) - (r - 2.0).powi(2) + 4.0 - (1.0 - rho).powi(2);
    let lhs = outer * (k - 1.0) * spread;
    let q2 = ((n - 2.0) / n).sqrt();
    let rhs = (n - 2.0) * m * m - 2.0 * (2.0 * (n - 2.0) * ln).sqrt() * m - 2.0 * q2 * (2.0 + q2) * ln;

    let conditions = [
        Condition::new("dimension", false, dimension),
        Condition::new("separation", true, separation),
        Condition::new("medoid-margin", true, medoid_margin),
        Condition::new("concentration", false, rhs - lhs),
    ];
    Ok(TheoremReport {
        query: q,
        rho,
        alpha: default_alpha(n),
        u_bound: n * (4.0 - (1.0 - rho).powi(2)),
        satisfied: conditions.iter().all(|c| c.holds),
        conditions,
        probability_floor: 1.0 - 4.0 * k / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma5Bounds {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub alpha_max: f64,
    /// Bound on the smallest norm among the samples.
    pub min_norm_bound: f64,
    /// Bound on the medoid's norm.
    pub medoid_norm_bound: f64,
    /// `1 - n exp(-alpha^2)`.
    pub prob_floor: f64,
}

pub fn lemma5_bounds(n: usize, d: usize, alpha: f64) -> Result<Lemma5Bounds> {
    if n < 3 || d < 2 {
        return Err(Error::InvalidInput(format!("need n >= 3 and d >= 2, got n={n} d={d}")));
    }
    let nf = n as f64;
    let max = alpha_max(nf, d as f64);
    if !(alpha > 0.0 && alpha <= max) {
        return Err(Error::AlphaOutOfRange { alpha, max });
    }
    Ok(Lemma5Bounds {
        n,
        d,
        alpha,
        alpha_max: max,
        min_norm_bound: alpha / nf.sqrt(),
        medoid_norm_bound: 3.0 * alpha / (nf - 2.0).sqrt(),
        prob_floor: 1.0 - nf * (-alpha * alpha).exp(),
    })
}

/// Which of the three statements to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Statements {
    pub pairwise: bool,
    pub min_norm: bool,
    pub medoid_norm: bool,
}

impl Statements {
    pub const ALL: Statements = Statements {
        pairwise: true,
        min_norm: true,
        medoid_norm: true,
    };
    pub const MIN_NORM: Statements = Statements {
        pairwise: false,
        min_norm: true,
        medoid_norm: false,
    };

    fn needs_medoid(self) -> bool {
        self.pairwise || self.medoid_norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma5Config {
    pub n: usize,
    pub d: usize,
    pub law: RadialLaw,
    pub reps: usize,
    pub seed: u64,
    /// Defaults to `sqrt(2 ln n)`.
    pub alpha: Option<f64>,
    pub statements: Statements,
}

impl Lemma5Config {
    pub fn new(n: usize, d: usize, reps: usize, seed: u64) -> Self {
        Lemma5Config {
            n,
            d,
            law: RadialLaw::QuadraticCdf,
            reps,
            seed,
            alpha: None,
            statements: Statements::ALL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma5Summary {
    pub config: Lemma5Config,
    pub bounds: Lemma5Bounds,
    /// Repetitions in which the pairwise inequality failed for a probed `l`.
    pub pairwise_failures: usize,
    pub min_norm_failures: usize,
    pub medoid_norm_failures: usize,
    /// Repetitions with at least one tested statement failing.
    pub any_failures: usize,
    /// `n exp(-alpha^2)`, the per-repetition failure allowance.
    pub failure_floor: f64,
}

#[derive(Default, Clone, Copy)]
struct RepOutcome {
    pairwise: bool,
    min_norm: bool,
    medoid_norm: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Index minimizing the summed squared distance to all points, by direct
/// O(n^2) evaluation (lowest index on ties).
pub fn brute_force_medoid(points: &[Vec<f64>]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (l, p) in points.iter().enumerate() {
        let s: f64 = points.iter().map(|q| sq_dist(p, q)).sum();
        if s < best.0 {
            best = (s, l);
        }
    }
    best.1
}

fn one_rep(cfg: &Lemma5Config, b: &Lemma5Bounds, rep: usize) -> Result<RepOutcome> {
    let origin = vec![0.0; cfg.d];
    let pts = sample_ball(&origin, cfg.n, cfg.law, stream_seed(cfg.seed, rep as u64, 0))?;
    let norms: Vec<f64> = pts.iter().map(|p| norm(p)).collect();
    let imin = (0..cfg.n)
        .min_by(|&a, &c| norms[a].total_cmp(&norms[c]))
        .expect("n >= 3");
    let mut out = RepOutcome::default();
    let st = cfg.statements;
    if st.min_norm {
        out.min_norm = norms[imin] > b.min_norm_bound;
    }
    if !st.needs_medoid() {
        return Ok(out);
    }
    let star = brute_force_medoid(&pts);
    if st.medoid_norm {
        out.medoid_norm = norms[star] > b.medoid_norm_bound;
    }
    if st.pairwise {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, rep as u64, 1));
        let probes = sample_indices(&mut rng, cfg.n, LEMMA_PROBES.min(cfg.n));
        let cost = |c: usize| -> f64 { pts.iter().map(|q| sq_dist(q, &pts[c])).sum() };
        let (c_star, c_min) = (cost(star), cost(imin));
        let nf = cfg.n as f64;
        for l in probes {
            let c_l = cost(l);
            let first = c_l - c_star;
            let second = c_l - c_min;
            let third = (nf - 2.0) * (norms[l].powi(2) - norms[imin].powi(2))
                - 2.0 * b.alpha * (nf - 2.0).sqrt() * (norms[l] + norms[imin]);
            let tol = 1e-9 * c_l.abs().max(1.0);
            if first < second - tol || second < third - tol {
                out.pairwise = true;
            }
        }
    }
    Ok(out)
}

/// Samples `reps` independent sets of `n` points and counts how often each
/// statement fails.
pub fn validate_lemma5_empirically(cfg: &Lemma5Config) -> Result<Lemma5Summary> {
    let alpha = cfg.alpha.unwrap_or_else(|| default_alpha(cfg.n as f64));
    let bounds = lemma5_bounds(cfg.n, cfg.d, alpha)?;
    if cfg.statements.needs_medoid() && cfg.n > MEDOID_CAP {
        return Err(Error::InvalidInput(format!(
            "exact medoids are limited to n <= {MEDOID_CAP}, got {}",
            cfg.n
        )));
    }
    let outcomes: Vec<RepOutcome> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| one_rep(cfg, &bounds, rep))
        .collect::<Result<Vec<_>>>()?;
    let count = |f: fn(&RepOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
    Ok(Lemma5Summary {
        config: cfg.clone(),
        bounds,
        pairwise_failures: count(|o| o.pairwise),
        min_norm_failures: count(|o| o.min_norm),
        medoid_norm_failures: count(|o| o.medoid_norm),
        any_failures: count(|o| o.pairwise || o.min_norm || o.medoid_norm),
        failure_floor: cfg.n as f64 * (-alpha * alpha).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1.0)
    }

    #[test]
    fn rho_at_a_million() {
        assert!(close(rho(1e6), 0.01576958107885976, 1e-14));
    }

    #[test]
    fn u_bound_limit() {
        let r = check_guarantee(GuaranteeQuery::new(3.75, 1_000_000_000, 2, 2)).unwrap();
        assert!((r.u_bound / 1e9 - 3.0).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(check_guarantee(GuaranteeQuery::new(3.75, 2, 2, 2)).is_err());
        assert!(check_guarantee(GuaranteeQuery::new(3.75, 100, 1, 2)).is_err());
        assert!(check_guarantee(GuaranteeQuery::new(3.75, 100, 2, 1)).is_err());
        assert!(check_guarantee(GuaranteeQuery::new(0.0, 100, 2, 2)).is_err());
    }

    #[test]
    fn probability_floor_is_theorem_level() {
        let r = check_guarantee(GuaranteeQuery::from_epsilon(0.0, 1_000_000, 2, 2)).unwrap();
        assert_eq!(r.probability_floor, 1.0 - 8.0 / 1e6);
    }

    #[test]
    fn lemma_bounds() {
        let n = 10_000;
        let a = default_alpha(n as f64);
        let b = lemma5_bounds(n, 2, a).unwrap();
        assert!(close(b.prob_floor, 1.0 - 1e-4, 1e-12));
        assert!(close(b.min_norm_bound, a / 100.0, 1e-15));
        assert!(matches!(lemma5_bounds(n, 2, 1e3), Err(Error::AlphaOutOfRange { .. })));
        assert!(lemma5_bounds(n, 2, 0.0).is_err());
        let small = lemma5_bounds(3, 2, 0.5).unwrap();
        assert!(small.medoid_norm_bound > 1.0);
    }

    #[test]
    fn medoid_of_a_line() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 0.0]];
        assert_eq!(brute_force_medoid(&pts), 1);
    }

    #[test]
    fn medoid_cap() {
        let cfg = Lemma5Config::new(MEDOID_CAP + 1, 2, 1, 0);
        assert!(validate_lemma5_empirically(&cfg).is_err());
        let only_min = Lemma5Config {
            statements: Statements::MIN_NORM,
            reps: 2,
            ..cfg
        };
        assert!(validate_lemma5_empirically(&only_min).is_ok());
    }

    #[test]
    fn smallest_sets_run() {
        let cfg = Lemma5Config {
            alpha: Some(0.5),
            ..Lemma5Config::new(3, 2, 20, 1)
        };
        let s = validate_lemma5_empirically(&cfg).unwrap();
        assert!(s.any_failures <= 20);
        assert!(close(s.failure_floor, 3.0 * (-0.25f64).exp(), 1e-15));
    }
}
