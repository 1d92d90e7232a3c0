//! Dual certificates for exact recovery of a candidate clustering.
//!
//! Every check reports a margin, the smallest slack among the strict
//! inequalities of its condition, maximized over the certificate's free
//! parameters. A certificate holds when the margin exceeds [`STRICT_TOL`].
//!
//! Throughout, `p_ij = w_ij - w_{i,M(i)}` and `gap_i = w_{i,M(i,2)} - w_{i,M(i)}`
//! (infinite when there is a single medoid).

use serde::{Serialize, Serializer};

use crate::kmedoids::{Clustering, Strategy};
use crate::lp::{self, LinearProgram, Relation, Sense, Status};
use crate::model::DissimilarityMatrix;
use crate::{Error, Result};

/// Strict inequalities must hold with at least this slack.
pub const STRICT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    /// Exact dual system; holds iff the clustering is the unique relaxed optimum.
    Prop1,
    /// Democratic multipliers `lambda_i = u / N_i`.
    Cor2,
    /// Size-weighted distance threshold.
    Cor3,
    /// Democratic multipliers at the smallest admissible `u`.
    Cor4,
}

impl CertificateKind {
    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::Prop1 => "prop1",
            CertificateKind::Cor2 => "cor2",
            CertificateKind::Cor3 => "cor3",
            CertificateKind::Cor4 => "cor4",
        }
    }
}

/// Multipliers `(u, lambda)` that satisfy the certificate's system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub u: f64,
    pub lambda: Vec<f64>,
}

/// One inequality that attains the reported margin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    /// `column` (non-medoid column sum), `gap` (second-medoid bound),
    /// `in-cluster` or `cross-cluster` (threshold pairs).
    pub constraint: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
}

impl Binding {
    fn new(constraint: &'static str, i: Option<usize>, j: Option<usize>, l: Option<usize>) -> Self {
        Binding { constraint, i, j, l }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub holds: bool,
    #[serde(serialize_with = "serialize_extended")]
    pub margin: f64,
    pub witness: Option<Witness>,
    pub diagnostics: Vec<Binding>,
}

/// Finite values as numbers, infinities as the strings `"inf"` / `"-inf"`.
pub fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn report(
    kind: CertificateKind,
    margin: f64,
    witness: Option<Witness>,
    diagnostics: Vec<Binding>,
) -> CertificateReport {
    let holds = margin > STRICT_TOL;
    CertificateReport {
        kind,
        holds,
        margin,
        witness: witness.filter(|_| holds),
        diagnostics,
    }
}

/// Quantities shared by all checks.
struct Frame<'a> {
    w: &'a DissimilarityMatrix,
    c: &'a Clustering,
    n: usize,
    sizes: Vec<f64>,
    gap: Vec<f64>,
    second: Vec<Option<usize>>,
    non_medoids: Vec<usize>,
}

impl<'a> Frame<'a> {
    fn new(w: &'a DissimilarityMatrix, c: &'a Clustering) -> Result<Self> {
        let n = w.n();
        if c.n() != n {
            return Err(Error::InvalidClustering(format!(
                "clustering has {} points, weights {n}",
                c.n()
            )));
        }
        let second: Vec<Option<usize>> = (0..n).map(|i| c.second_medoid(w, i)).collect();
        let gap = (0..n)
            .map(|i| second[i].map_or(f64::INFINITY, |m| w.get(i, m) - w.get(i, c.medoid_of(i))))
            .collect();
        Ok(Frame {
            w,
            c,
            n,
            sizes: c.sizes().into_iter().map(|s| s as f64).collect(),
            gap,
            second,
            non_medoids: (0..n).filter(|&j| !c.is_medoid(j)).collect(),
        })
    }

    #[inline]
    fn p(&self, i: usize, j: usize) -> f64 {
        self.w.get(i, j) - self.w.get(i, self.c.medoid_of(i))
    }

    fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.c.medoid_of(i) == self.c.medoid_of(j)
    }

    /// `u - sum_i (lambda_i - p_ij)_+` for non-medoid `j`.
    fn column_slack(&self, u: f64, lambda: &[f64], j: usize) -> f64 {
        u - (0..self.n).map(|i| (lambda[i] - self.p(i, j)).max(0.0)).sum::<f64>()
    }

    /// Minimum slack of the exact system at `(u, lambda)`, with the
    /// inequalities attaining it. Equality rows must already hold.
    fn exact_margin(&self, u: f64, lambda: &[f64]) -> (f64, Vec<Binding>) {
        let mut slacks: Vec<(f64, Binding)> = Vec::new();
        for &j in &self.non_medoids {
            slacks.push((
                self.column_slack(u, lambda, j),
                Binding::new("column", None, Some(j), None),
            ));
        }
        for i in 0..self.n {
            if self.gap[i].is_finite() {
                slacks.push((
                    self.gap[i] - lambda[i],
                    Binding::new("gap", Some(i), None, self.second[i]),
                ));
            }
        }
        binding_set(slacks)
    }
}

/// Smallest slack and (up to eight) inequalities within rounding of it.
fn binding_set(slacks: Vec<(f64, Binding)>) -> (f64, Vec<Binding>) {
    let margin = slacks.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    if !margin.is_finite() {
        return (margin, Vec::new());
    }
    let tol = 1e-12 * margin.abs().max(1.0);
    let binding = slacks
        .into_iter()
        .filter(|s| s.0 <= margin + tol)
        .map(|s| s.1)
        .take(8)
        .collect();
    (margin, binding)
}

/// Exact check: maximizes the common slack `gamma` of the strict dual
/// system over `(u, lambda)` by linear programming.
pub fn check_dual_certificate(w: &DissimilarityMatrix, c: &Clustering) -> Result<CertificateReport> {
    check_dual_certificate_with(w, c, Strategy::Lazy)
}

pub fn check_dual_certificate_with(
    w: &DissimilarityMatrix,
    c: &Clustering,
    strategy: Strategy,
) -> Result<CertificateReport> {
    let f = Frame::new(w, c)?;
    let n = f.n;
    let mut active = vec![false; n * n];
    match strategy {
        Strategy::Full => {
            for i in 0..n {
                for &j in &f.non_medoids {
                    active[i * n + j] = true;
                }
            }
        }
        Strategy::Lazy => {
            // Pairs where the democratic multipliers would be positive.
            let u0 = democratic(&f).1;
            for i in 0..n {
                for &j in &f.non_medoids {
                    if c.k() == 1 || i == j || u0 / f.sizes[i] - f.p(i, j) > -1e-9 * u0.abs().max(1.0) {
                        active[i * n + j] = true;
                    }
                }
            }
        }
    }
    loop {
        let (lp, idx) = dual_program(&f, &active);
        let sol = lp::solve_lp(&lp)?;
        match sol.status {
            Status::Optimal => {}
            Status::Unbounded => {
                // Only when no inequality constrains gamma (a single point).
                let witness = Witness {
                    u: 0.0,
                    lambda: vec![0.0; n],
                };
                return Ok(report(CertificateKind::Prop1, f64::INFINITY, Some(witness), Vec::new()));
            }
            Status::Infeasible => return Err(Error::SolverStatus(Status::Infeasible)),
        }
        let u = sol.x[idx.u];
        let lambda: Vec<f64> = (0..n).map(|i| sol.x[idx.lambda + i].max(0.0)).collect();
        let mut added = false;
        for i in 0..n {
            for &j in &f.non_medoids {
                if !active[i * n + j] && lambda[i] - f.p(i, j) > 0.0 {
                    active[i * n + j] = true;
                    added = true;
                }
            }
        }
        if added {
            continue;
        }
        let (margin, diagnostics) = f.exact_margin(u, &lambda);
        return Ok(report(
            CertificateKind::Prop1,
            margin,
            Some(Witness { u, lambda }),
            diagnostics,
        ));
    }
}

struct DualIndex {
    u: usize,
    lambda: usize,
}

fn dual_program(f: &Frame<'_>, active: &[bool]) -> (LinearProgram, DualIndex) {
    let n = f.n;
    let mut lp = LinearProgram::new(Sense::Maximize);
    let u = lp.add_var("u", 0.0, f64::NEG_INFINITY, f64::INFINITY);
    let gamma = lp.add_var("gamma", 1.0, f64::NEG_INFINITY, f64::INFINITY);
    let lambda = lp.num_vars();
    for i in 0..n {
        lp.add_var(format!("lambda_{i}"), 0.0, 0.0, f64::INFINITY);
    }
    let mut column_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in &f.non_medoids {
            if active[i * n + j] {
                let t = lp.add_var(format!("t_{i}_{j}"), 0.0, 0.0, f64::INFINITY);
                lp.add_constraint(
                    format!("excess_{i}_{j}"),
                    [(t, 1.0), (lambda + i, -1.0)],
                    Relation::Ge,
                    -f.p(i, j),
                );
                column_terms[j].push((t, 1.0));
            }
        }
    }
    for &j in &f.non_medoids {
        let mut terms = std::mem::take(&mut column_terms[j]);
        terms.push((u, -1.0));
        terms.push((gamma, 1.0));
        lp.add_constraint(format!("column_{j}"), terms, Relation::Le, 0.0);
    }
    for &m in f.c.medoids() {
        let mut terms: Vec<(usize, f64)> = f.c.cluster(m).into_iter().map(|i| (lambda + i, 1.0)).collect();
        terms.push((u, -1.0));
        lp.add_constraint(format!("votes_{m}"), terms, Relation::Eq, 0.0);
    }
    for i in 0..n {
        if f.gap[i].is_finite() {
            lp.add_constraint(
                format!("gap_{i}"),
                [(lambda + i, 1.0), (gamma, 1.0)],
                Relation::Le,
                f.gap[i],
            );
        }
    }
    (lp, DualIndex { u, lambda })
}

/// `min(U_max - u, min_j (u - f_j(u)))`, the democratic margin at `u`.
fn democratic_margin_at(f: &Frame<'_>, u_max: f64, u: f64) -> f64 {
    let lambda: Vec<f64> = f.sizes.iter().map(|s| u / s).collect();
    let mut h = u_max - u;
    for &j in &f.non_medoids {
        h = h.min(f.column_slack(u, &lambda, j));
    }
    h
}

/// Maximizes the democratic margin over `u >= 0`; returns `(margin, u*)`
/// with the smallest maximizer.
fn democratic(f: &Frame<'_>) -> (f64, f64) {
    let u_max = (0..f.n).map(|l| f.sizes[l] * f.gap[l]).fold(f64::INFINITY, f64::min);
    if f.non_medoids.is_empty() {
        return (u_max, 0.0);
    }
    let hi = u_max.max(0.0);
    let mut cand: Vec<f64> = vec![0.0];
    for i in 0..f.n {
        for &j in &f.non_medoids {
            let b = f.sizes[i] * f.p(i, j);
            if b > 0.0 && b < hi {
                cand.push(b);
            }
        }
    }
    if hi.is_finite() {
        cand.push(hi);
    }
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let values: Vec<f64> = cand.iter().map(|&u| democratic_margin_at(f, u_max, u)).collect();
    let mut best = 0;
    for (idx, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = idx;
        }
    }
    let (mut best_h, mut best_u) = (values[best], cand[best]);
    // The concave maximum lies between the neighbours of the best breakpoint,
    // where every term is affine; look for crossings there.
    for (a, b) in [
        (best.checked_sub(1), Some(best)),
        (Some(best), (best + 1 < cand.len()).then_some(best + 1)),
    ] {
        let (Some(a), Some(b)) = (a, b) else { continue };
        let (lo_u, hi_u) = (cand[a], cand[b]);
        if hi_u <= lo_u {
            continue;
        }
        let mid = 0.5 * (lo_u + hi_u);
        let mut lines: Vec<(f64, f64)> = Vec::with_capacity(f.non_medoids.len() + 1);
        if u_max.is_finite() {
            lines.push((-1.0, u_max));
        }
        for &j in &f.non_medoids {
            let (mut slope, mut icpt) = (1.0, 0.0);
            for i in 0..f.n {
                if mid / f.sizes[i] - f.p(i, j) > 0.0 {
                    slope -= 1.0 / f.sizes[i];
                    icpt += f.p(i, j);
                }
            }
            lines.push((slope, icpt));
        }
        let lower_env = |u: f64| lines.iter().map(|&(s, c)| s * u + c).fold(f64::INFINITY, f64::min);
        let mut best_line = (f64::NEG_INFINITY, lo_u);
        for x in 0..lines.len() {
            for y in x + 1..lines.len() {
                let (s1, c1) = lines[x];
                let (s2, c2) = lines[y];
                if s1 == s2 {
                    continue;
                }
                let u = (c2 - c1) / (s1 - s2);
                if u > lo_u && u < hi_u {
                    let v = lower_env(u);
                    if v > best_line.0 || (v == best_line.0 && u < best_line.1) {
                        best_line = (v, u);
                    }
                }
            }
        }
        if best_line.0.is_finite() {
            let u = best_line.1;
            let v = democratic_margin_at(f, u_max, u);
            if v > best_h || (v == best_h && u < best_u) {
                best_h = v;
                best_u = u;
            }
        }
    }
    (best_h, best_u)
}

/// Democratic multipliers `lambda_i = u / N_i`, with `u` chosen to maximize
/// the margin exactly.
pub fn check_democratic_certificate(w: &DissimilarityMatrix, c: &Clustering) -> Result<CertificateReport> {
    let f = Frame::new(w, c)?;
    let (_, u) = democratic(&f);
    let lambda: Vec<f64> = f.sizes.iter().map(|s| u / s).collect();
    let (margin, diagnostics) = f.exact_margin(u, &lambda);
    Ok(report(
        CertificateKind::Cor2,
        margin,
        Some(Witness { u, lambda }),
        diagnostics,
    ))
}

/// Size-weighted threshold: every in-cluster `N_i p_ij` below every
/// cross-cluster one.
pub fn check_threshold_certificate(w: &DissimilarityMatrix, c: &Clustering) -> Result<CertificateReport> {
    let f = Frame::new(w, c)?;
    let mut max_in = (f64::NEG_INFINITY, 0, 0);
    let mut min_out = (f64::INFINITY, 0, 0);
    for i in 0..f.n {
        for j in 0..f.n {
            let v = f.sizes[i] * f.p(i, j);
            if f.same_cluster(i, j) {
                if v > max_in.0 {
                    max_in = (v, i, j);
                }
            } else if v < min_out.0 {
                min_out = (v, i, j);
            }
        }
    }
    let margin = min_out.0 - max_in.0;
    let mut diagnostics = vec![Binding::new("in-cluster", Some(max_in.1), Some(max_in.2), None)];
    if min_out.0.is_finite() {
        diagnostics.push(Binding::new("cross-cluster", Some(min_out.1), Some(min_out.2), None));
    }
    Ok(report(CertificateKind::Cor3, margin, None, diagnostics))
}

/// Democratic multipliers at `u = max` in-cluster `N_i p_ij`; needs two or
/// more medoids.
pub fn check_max_u_certificate(w: &DissimilarityMatrix, c: &Clustering) -> Result<CertificateReport> {
    if c.k() < 2 {
        return Err(Error::InvalidInput(
            "this certificate needs at least two medoids".into(),
        ));
    }
    let f = Frame::new(w, c)?;
    let mut u = 0.0f64;
    for i in 0..f.n {
        for j in c.cluster(c.medoid_of(i)) {
            u = u.max(f.sizes[i] * f.p(i, j));
        }
    }
    let lambda: Vec<f64> = f.sizes.iter().map(|s| u / s).collect();
    let mut slacks: Vec<(f64, Binding)> = Vec::new();
    for i in 0..f.n {
        slacks.push((
            f.sizes[i] * f.gap[i] - u,
            Binding::new("gap", Some(i), None, f.second[i]),
        ));
    }
    for &j in &f.non_medoids {
        let mut inside = 0.0;
        let mut outside = 0.0;
        for i in 0..f.n {
            if f.same_cluster(i, j) {
                inside += f.p(i, j);
            } else {
                outside += (lambda[i] - f.p(i, j)).max(0.0);
            }
        }
        slacks.push((inside - outside, Binding::new("column", None, Some(j), None)));
    }
    let (margin, diagnostics) = binding_set(slacks);
    Ok(report(
        CertificateKind::Cor4,
        margin,
        Some(Witness { u, lambda }),
        diagnostics,
    ))
}

/// Every applicable check, in the order prop1, cor2, cor3, cor4 (the last
/// one only for two or more medoids).
pub fn check_all(w: &DissimilarityMatrix, c: &Clustering) -> Result<Vec<CertificateReport>> {
    let mut out = vec![
        check_dual_certificate(w, c)?,
        check_democratic_certificate(w, c)?,
        check_threshold_certificate(w, c)?,
    ];
    if c.k() >= 2 {
        out.push(check_max_u_certificate(w, c)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmedoids::solve_linkmed;
    use crate::model::Metric;

    fn line(xs: &[f64]) -> DissimilarityMatrix {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        DissimilarityMatrix::from_points(&pts, Metric::SquaredEuclidean).unwrap()
    }

    #[test]
    fn true_clustering_certified_and_recovered() {
        let w = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let c = Clustering::nearest(&w, [1, 4]).unwrap();
        let r = check_dual_certificate(&w, &c).unwrap();
        assert!(r.holds, "{r:?}");
        let wit = r.witness.unwrap();
        assert!((wit.lambda[0] + wit.lambda[1] + wit.lambda[2] - wit.u).abs() < 1e-9);
        let rr = solve_linkmed(&w, 2).unwrap();
        assert_eq!(rr.clustering.unwrap(), c);
        for s in [Strategy::Full, Strategy::Lazy] {
            let full = check_dual_certificate_with(&w, &c, s).unwrap();
            assert!((full.margin - r.margin).abs() < 1e-9);
        }
    }

    #[test]
    fn wrong_clustering_fails() {
        let w = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let c = Clustering::from_labels(&w, &[0, 0, 1, 0, 1, 1]).unwrap();
        for r in check_all(&w, &c).unwrap() {
            assert!(!r.holds, "{r:?}");
            assert!(r.witness.is_none());
        }
    }

    #[test]
    fn two_points_two_medoids() {
        let w = line(&[0.0, 1.5]);
        let c = Clustering::nearest(&w, [0, 1]).unwrap();
        let r = check_dual_certificate(&w, &c).unwrap();
        assert!(r.holds);
        assert_eq!(r.witness.as_ref().unwrap().u, 0.0);
        assert!((r.margin - 2.25).abs() < 1e-12);
    }

    #[test]
    fn single_point() {
        let w = DissimilarityMatrix::from_rows(&[vec![0.0]]).unwrap();
        let c = Clustering::nearest(&w, [0]).unwrap();
        let r = check_dual_certificate(&w, &c).unwrap();
        assert!(r.holds);
        assert_eq!(r.margin, f64::INFINITY);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"margin\":\"inf\""), "{json}");
    }

    #[test]
    fn tight_clusters_are_democratic() {
        // Five points per group, intra weights <= 0.1, inter weights >= 25.
        let mut rows = vec![vec![0.0; 10]; 10];
        for i in 0..10 {
            for j in 0..10 {
                if i != j {
                    rows[i][j] = if (i < 5) == (j < 5) {
                        0.05 + 0.01 * ((i + j) % 5) as f64
                    } else {
                        25.0 + (i + j) as f64
                    };
                }
            }
        }
        let w = DissimilarityMatrix::from_rows(&rows).unwrap();
        let c = Clustering::from_labels(&w, &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]).unwrap();
        let r = check_democratic_certificate(&w, &c).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(check_threshold_certificate(&w, &c).unwrap().holds);
        assert!(check_max_u_certificate(&w, &c).unwrap().holds);
    }

    #[test]
    fn single_cluster_has_no_gap_bound() {
        let w = line(&[0.0, 1.0, 2.5]);
        let c = Clustering::nearest(&w, [1]).unwrap();
        let r = check_democratic_certificate(&w, &c).unwrap();
        assert!(r.diagnostics.iter().all(|b| b.constraint == "column"));
        let p = check_dual_certificate(&w, &c).unwrap();
        assert!(p.holds && r.holds);
        assert!(p.margin >= r.margin - 1e-9);
        assert_eq!(check_threshold_certificate(&w, &c).unwrap().margin, f64::INFINITY);
        assert!(check_max_u_certificate(&w, &c).is_err());
    }

    #[test]
    fn threshold_reports_the_violating_pair() {
        // Cross pair (2, 3) is closer than in-cluster pair (0, 2).
        let w = line(&[0.0, 1.0, 2.0, 2.5, 3.5, 4.5]);
        let c = Clustering::from_labels(&w, &[0, 0, 0, 1, 1, 1]).unwrap();
        let r = check_threshold_certificate(&w, &c).unwrap();
        assert!(!r.holds);
        assert_eq!(r.diagnostics[1], Binding::new("cross-cluster", Some(2), Some(3), None));
    }
}
