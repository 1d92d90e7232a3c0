//! The k-medoids integer program, its linear relaxation, an enumeration
//! oracle and recovery classification.
//!
//! Variables are `z[i][j]` ("point `i` is served by medoid `j`"), stored
//! row-major at index `i * N + j`.

use std::collections::BTreeSet;
use std::io::Write;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::lp::{self, LinearProgram, Relation, Sense, Status};
use crate::model::DissimilarityMatrix;
use crate::{Error, Result};

/// Entrywise distance to {0, 1} below which a relaxed solution is integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// A coupling row `z_ij <= z_jj` counts as violated beyond this slack.
pub const COUPLING_TOL: f64 = 1e-9;
/// Objective ties in the enumeration oracle.
pub const TIE_TOL: f64 = 1e-9;
/// Largest number of medoid subsets the enumeration oracle will visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Medoid set plus an assignment of every point to one of the medoids.
///
/// Construction checks structure only (medoids serve themselves, every
/// point is assigned to a medoid). Whether each point sits with its nearest
/// medoid is a property of the weights; see [`Clustering::is_nearest`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    medoids: Vec<usize>,
    assign: Vec<usize>,
}

impl Clustering {
    pub fn new(n: usize, medoids: impl IntoIterator<Item = usize>, assign: Vec<usize>) -> Result<Self> {
        let medoids: Vec<usize> = medoids.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if medoids.is_empty() {
            return Err(Error::InvalidClustering("no medoids".into()));
        }
        if assign.len() != n {
            return Err(Error::InvalidClustering(format!(
                "{} assignments for {n} points",
                assign.len()
            )));
        }
        if let Some(&m) = medoids.iter().find(|&&m| m >= n) {
            return Err(Error::InvalidClustering(format!(
                "medoid {m} out of range for {n} points"
            )));
        }
        for (i, &a) in assign.iter().enumerate() {
            if medoids.binary_search(&a).is_err() {
                return Err(Error::InvalidClustering(format!(
                    "point {i} assigned to non-medoid {a}"
                )));
            }
        }
        if let Some(&m) = medoids.iter().find(|&&m| assign[m] != m) {
            return Err(Error::InvalidClustering(format!(
                "medoid {m} is assigned to {}",
                assign[m]
            )));
        }
        Ok(Clustering { medoids, assign })
    }

    /// Every point goes to its nearest medoid, lowest index on ties.
    pub fn nearest(w: &DissimilarityMatrix, medoids: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = w.n();
        let medoids: Vec<usize> = medoids.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if medoids.is_empty() || medoids.iter().any(|&m| m >= n) {
            return Err(Error::InvalidClustering(format!(
                "bad medoid set {medoids:?} for {n} points"
            )));
        }
        let assign = (0..n)
            .map(|i| {
                if medoids.binary_search(&i).is_ok() {
                    i
                } else {
                    nearest_of(w, i, &medoids)
                }
            })
            .collect();
        Clustering::new(n, medoids, assign)
    }

    /// Groups by label; each group's medoid is its in-group cost minimizer
    /// (lowest index on ties).
    pub fn from_labels(w: &DissimilarityMatrix, labels: &[usize]) -> Result<Self> {
        let n = w.n();
        if labels.len() != n {
            return Err(Error::InvalidClustering(format!(
                "{} labels for {n} points",
                labels.len()
            )));
        }
        let groups = labels.iter().copied().collect::<BTreeSet<_>>();
        let mut assign = vec![0; n];
        let mut medoids = Vec::new();
        for g in groups {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == g).collect();
            let m = *members
                .iter()
                .min_by(|&&a, &&b| {
                    let ca: f64 = members.iter().map(|&i| w.get(i, a)).sum();
                    let cb: f64 = members.iter().map(|&i| w.get(i, b)).sum();
                    ca.total_cmp(&cb).then(a.cmp(&b))
                })
                .expect("nonempty group");
            for &i in &members {
                assign[i] = m;
            }
            medoids.push(m);
        }
        Clustering::new(n, medoids, assign)
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn k(&self) -> usize {
        self.medoids.len()
    }

    /// Sorted medoid indices.
    pub fn medoids(&self) -> &[usize] {
        &self.medoids
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    pub fn is_medoid(&self, i: usize) -> bool {
        self.medoids.binary_search(&i).is_ok()
    }

    /// `M(i)`.
    pub fn medoid_of(&self, i: usize) -> usize {
        self.assign[i]
    }

    /// Members of the cluster whose medoid is `j`, ascending.
    pub fn cluster(&self, j: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.assign[i] == j).collect()
    }

    /// Cluster size of every point (`N_i`).
    pub fn sizes(&self) -> Vec<usize> {
        let mut count = vec![0usize; self.n()];
        for &a in &self.assign {
            count[a] += 1;
        }
        self.assign.iter().map(|&a| count[a]).collect()
    }

    /// `M(i, 2)`: nearest medoid other than `M(i)`, `None` when `k = 1`.
    pub fn second_medoid(&self, w: &DissimilarityMatrix, i: usize) -> Option<usize> {
        self.medoids
            .iter()
            .copied()
            .filter(|&m| m != self.assign[i])
            .min_by(|&a, &b| w.get(i, a).total_cmp(&w.get(i, b)).then(a.cmp(&b)))
    }

    /// `w_{i, M(i, 2)}`, with `+inf` when there is no second medoid.
    pub fn second_cost(&self, w: &DissimilarityMatrix, i: usize) -> f64 {
        self.second_medoid(w, i).map_or(f64::INFINITY, |m| w.get(i, m))
    }

    pub fn cost(&self, w: &DissimilarityMatrix) -> f64 {
        self.assign.iter().enumerate().map(|(i, &m)| w.get(i, m)).sum()
    }

    /// True when every point sits with a medoid at minimal dissimilarity.
    pub fn is_nearest(&self, w: &DissimilarityMatrix) -> bool {
        (0..self.n()).all(|i| self.medoids.iter().all(|&m| w.get(i, self.assign[i]) <= w.get(i, m)))
    }

    /// The partition as sorted blocks, ordered by smallest member.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        canonical_partition(&self.assign)
    }

    /// The 0/1 matrix `z` of this clustering, row-major.
    pub fn indicator(&self) -> Vec<f64> {
        let n = self.n();
        let mut z = vec![0.0; n * n];
        for (i, &m) in self.assign.iter().enumerate() {
            z[i * n + m] = 1.0;
        }
        z
    }
}

fn nearest_of(w: &DissimilarityMatrix, i: usize, medoids: &[usize]) -> usize {
    let mut best = medoids[0];
    for &m in &medoids[1..] {
        if w.get(i, m) < w.get(i, best) {
            best = m;
        }
    }
    best
}

fn assignment_cost(w: &DissimilarityMatrix, medoids: &[usize]) -> f64 {
    (0..w.n())
        .map(|i| medoids.iter().map(|&m| w.get(i, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Blocks of equal labels, each sorted, ordered by first element.
pub fn canonical_partition(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match blocks.iter_mut().find(|(lab, _)| *lab == l) {
            Some((_, b)) => b.push(i),
            None => blocks.push((l, vec![i])),
        }
    }
    blocks.into_iter().map(|(_, b)| b).collect()
}

fn var(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

/// Variables, assignment rows and the budget row, without coupling rows.
fn linkmed_skeleton(w: &DissimilarityMatrix, k: usize) -> LinearProgram {
    let n = w.n();
    let mut lp = LinearProgram::new(Sense::Minimize);
    for i in 0..n {
        for j in 0..n {
            lp.add_var(format!("z_{i}_{j}"), w.get(i, j), 0.0, f64::INFINITY);
        }
    }
    for i in 0..n {
        lp.add_constraint(
            format!("assign_{i}"),
            (0..n).map(|j| (var(n, i, j), 1.0)),
            Relation::Eq,
            1.0,
        );
    }
    lp.add_constraint("budget", (0..n).map(|j| (var(n, j, j), 1.0)), Relation::Le, k as f64);
    lp
}

fn add_coupling(lp: &mut LinearProgram, n: usize, i: usize, j: usize) {
    lp.add_constraint(
        format!("link_{i}_{j}"),
        [(var(n, i, j), 1.0), (var(n, j, j), -1.0)],
        Relation::Le,
        0.0,
    );
}

/// The full relaxation: `N^2` variables, `N` assignment rows, one budget
/// row and `N(N-1)` coupling rows `z_ij <= z_jj`.
pub fn build_linkmed(w: &DissimilarityMatrix, k: usize) -> Result<LinearProgram> {
    let n = w.n();
    check_k(n, k)?;
    let mut lp = linkmed_skeleton(w, k);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                add_coupling(&mut lp, n, i, j);
            }
        }
    }
    Ok(lp)
}

/// How [`solve_linkmed_with`] handles the `N(N-1)` coupling rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Solve the complete program in one go.
    Full,
    /// Start from the rows a heuristic clustering needs and add violated rows
    /// until none remain; the final vertex is a vertex of the full program.
    Lazy,
}

/// Relaxed optimum `z` with its integrality verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationResult {
    pub n: usize,
    pub k: usize,
    /// Row-major `N x N`.
    pub z: Vec<f64>,
    pub objective: f64,
    pub integral: bool,
    pub clustering: Option<Clustering>,
    pub iterations: usize,
    /// Coupling rows present in the final solve.
    pub coupling_rows: usize,
}

impl RelaxationResult {
    pub fn z(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.n + j]
    }

    /// Wraps an arbitrary feasible `z` (used for externally computed
    /// solutions and for tests).
    pub fn from_z(w: &DissimilarityMatrix, k: usize, z: Vec<f64>) -> Result<Self> {
        let n = w.n();
        if z.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "z has {} entries, expected {}",
                z.len(),
                n * n
            )));
        }
        let objective = z.iter().zip(w.as_slice()).map(|(a, b)| a * b).sum();
        finish(w, k, z, objective, 0, 0)
    }

    /// Writes `z` as `N` comma-separated rows.
    pub fn write_z_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for i in 0..self.n {
            w.write_record(self.z[i * self.n..(i + 1) * self.n].iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct RelaxationJson<'a> {
    n: usize,
    k: usize,
    objective: f64,
    integral: bool,
    medoids: Option<&'a [usize]>,
    assignment: Option<&'a [usize]>,
    iterations: usize,
}

impl Serialize for RelaxationResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RelaxationJson {
            n: self.n,
            k: self.k,
            objective: self.objective,
            integral: self.integral,
            medoids: self.clustering.as_ref().map(|c| c.medoids()),
            assignment: self.clustering.as_ref().map(|c| c.assignment()),
            iterations: self.iterations,
        }
        .serialize(s)
    }
}

fn finish(
    w: &DissimilarityMatrix,
    k: usize,
    z: Vec<f64>,
    objective: f64,
    iterations: usize,
    rows: usize,
) -> Result<RelaxationResult> {
    let n = w.n();
    let integral = z
        .iter()
        .all(|&v| v.abs() <= INTEGRALITY_TOL || (v - 1.0).abs() <= INTEGRALITY_TOL);
    let clustering = if integral {
        let medoids: Vec<usize> = (0..n).filter(|&j| z[var(n, j, j)] > 0.5).collect();
        let c = Clustering::nearest(w, medoids)?;
        let cost = c.cost(w);
        if (cost - objective).abs() > 1e-7 * objective.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "integral relaxation objective {objective} disagrees with its clustering cost {cost}"
            )));
        }
        Some(c)
    } else {
        None
    };
    Ok(RelaxationResult {
        n,
        k,
        z,
        objective,
        integral,
        clustering,
        iterations,
        coupling_rows: rows,
    })
}

/// Solves the relaxation to an optimal vertex.
pub fn solve_linkmed(w: &DissimilarityMatrix, k: usize) -> Result<RelaxationResult> {
    solve_linkmed_with(w, k, Strategy::Lazy)
}

pub fn solve_linkmed_with(w: &DissimilarityMatrix, k: usize, strategy: Strategy) -> Result<RelaxationResult> {
    let n = w.n();
    check_k(n, k)?;
    match strategy {
        Strategy::Full => {
            let lp = build_linkmed(w, k)?;
            let sol = solve_checked(&lp, &lp::SolverOptions::default())?;
            finish(w, k, sol.x, sol.objective_value, sol.iterations, n * (n - 1))
        }
        Strategy::Lazy => {
            // Seed with the rows a good clustering needs: every `j` within the
            // cluster's mean cost beyond the point's own medoid cost.
            let mut active = vec![false; n * n];
            let medoids = heuristic_medoids(w, k);
            let start = Clustering::nearest(w, medoids.iter().copied())?;
            for &m in start.medoids() {
                let members = start.cluster(m);
                let margin = members.iter().map(|&i| w.get(i, m)).sum::<f64>() / members.len() as f64;
                for &i in &members {
                    let bound = w.get(i, m) + margin;
                    for j in 0..n {
                        if j != i && w.get(i, j) <= bound {
                            active[var(n, i, j)] = true;
                        }
                    }
                }
            }
            let opts = lp::SolverOptions::default();
            let mut iterations = 0;
            loop {
                let mut lp = linkmed_skeleton(w, k);
                let mut rows = 0;
                for i in 0..n {
                    for j in 0..n {
                        if active[var(n, i, j)] {
                            add_coupling(&mut lp, n, i, j);
                            rows += 1;
                        }
                    }
                }
                let sol = solve_checked(&lp, &opts)?;
                iterations += sol.iterations;
                let x = &sol.x;
                let mut added = false;
                for i in 0..n {
                    // Rows of `i` up to its farthest violated one.
                    let reach = (0..n)
                        .filter(|&j| i != j && x[var(n, i, j)] > x[var(n, j, j)] + COUPLING_TOL)
                        .map(|j| w.get(i, j))
                        .fold(f64::NEG_INFINITY, f64::max);
                    for j in 0..n {
                        if i != j && !active[var(n, i, j)] && w.get(i, j) <= reach {
                            active[var(n, i, j)] = true;
                            added = true;
                        }
                    }
                }
                if !added {
                    return finish(w, k, sol.x, sol.objective_value, iterations, rows);
                }
            }
        }
    }
}

fn solve_checked(lp: &LinearProgram, opts: &lp::SolverOptions) -> Result<lp::LpSolution> {
    let sol = lp::solve_lp_with(lp, opts)?;
    match sol.status {
        Status::Optimal => Ok(sol),
        other => Err(Error::SolverStatus(other)),
    }
}

/// Greedy build followed by first-improvement swaps; deterministic.
pub fn heuristic_medoids(w: &DissimilarityMatrix, k: usize) -> Vec<usize> {
    let n = w.n();
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let next = (0..n)
            .filter(|j| !medoids.contains(j))
            .min_by(|&a, &b| {
                let mut ma = medoids.clone();
                ma.push(a);
                let mut mb = medoids.clone();
                mb.push(b);
                assignment_cost(w, &ma)
                    .total_cmp(&assignment_cost(w, &mb))
                    .then(a.cmp(&b))
            })
            .expect("k <= n");
        medoids.push(next);
    }
    let mut cost = assignment_cost(w, &medoids);
    for _pass in 0..4 * k.max(1) {
        let mut improved = false;
        for slot in 0..k {
            for cand in 0..n {
                if medoids.contains(&cand) {
                    continue;
                }
                let old = medoids[slot];
                medoids[slot] = cand;
                let c = assignment_cost(w, &medoids);
                if c < cost - 1e-12 * cost.abs().max(1.0) {
                    cost = c;
                    improved = true;
                } else {
                    medoids[slot] = old;
                }
            }
        }
        if !improved {
            break;
        }
    }
    medoids.sort_unstable();
    medoids
}

/// All optimal medoid sets of the integer program.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    pub best_objective: f64,
    /// Sorted sets, in lexicographic order.
    pub optimal_medoid_sets: Vec<Vec<usize>>,
    pub unique: bool,
}

impl ExactResult {
    /// Clustering of the first optimal set.
    pub fn clustering(&self, w: &DissimilarityMatrix) -> Result<Clustering> {
        Clustering::nearest(w, self.optimal_medoid_sets[0].iter().copied())
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Enumerates every `k`-subset as a medoid set with nearest assignment.
pub fn brute_force_kmed(w: &DissimilarityMatrix, k: usize) -> Result<ExactResult> {
    let n = w.n();
    check_k(n, k)?;
    let count = binomial(n, k);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            n,
            k,
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut best = f64::INFINITY;
    let mut sets: Vec<(f64, Vec<usize>)> = Vec::new();
    for combo in (0..n).combinations(k) {
        let c = assignment_cost(w, &combo);
        let tol = TIE_TOL * best.abs().max(1.0);
        if c < best - tol {
            best = c;
            let tol = TIE_TOL * best.abs().max(1.0);
            sets.retain(|(v, _)| *v <= best + tol);
            sets.push((c, combo));
        } else if c <= best + tol {
            best = best.min(c);
            sets.push((c, combo));
        }
    }
    let tol = TIE_TOL * best.abs().max(1.0);
    let optimal: Vec<Vec<usize>> = sets
        .into_iter()
        .filter(|(v, _)| *v <= best + tol)
        .map(|(_, s)| s)
        .collect();
    Ok(ExactResult {
        best_objective: best,
        unique: optimal.len() == 1,
        optimal_medoid_sets: optimal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryLabel {
    Fractional,
    ClusterRecovery,
    BallRecovery,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecoveryOutcome {
    pub label: RecoveryLabel,
    /// Points outside the majority ball of their cluster (cluster recovery
    /// without ball recovery only).
    pub mismatched: Vec<usize>,
}

/// Fractional, cluster recovery (integral vertex) or ball recovery
/// (integral and the partition equals the ground truth).
pub fn classify_recovery(rr: &RelaxationResult, truth: &[usize]) -> Result<RecoveryOutcome> {
    if truth.len() != rr.n {
        return Err(Error::InvalidInput(format!(
            "{} truth labels for {} points",
            truth.len(),
            rr.n
        )));
    }
    let Some(c) = rr.clustering.as_ref().filter(|_| rr.integral) else {
        return Ok(RecoveryOutcome {
            label: RecoveryLabel::Fractional,
            mismatched: Vec::new(),
        });
    };
    if c.partition() == canonical_partition(truth) {
        return Ok(RecoveryOutcome {
            label: RecoveryLabel::BallRecovery,
            mismatched: Vec::new(),
        });
    }
    Ok(RecoveryOutcome {
        label: RecoveryLabel::ClusterRecovery,
        mismatched: mismatched_points(c, truth),
    })
}

fn mismatched_points(c: &Clustering, truth: &[usize]) -> Vec<usize> {
    let majority = |members: &[usize]| -> (usize, usize) {
        let balls: BTreeSet<usize> = members.iter().map(|&i| truth[i]).collect();
        balls
            .into_iter()
            .map(|b| (b, members.iter().filter(|&&i| truth[i] == b).count()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty cluster")
    };
    let clusters: Vec<(Vec<usize>, usize, usize)> = c
        .medoids()
        .iter()
        .map(|&m| {
            let members = c.cluster(m);
            let (ball, votes) = majority(&members);
            (members, ball, votes)
        })
        .collect();
    let mut out: BTreeSet<usize> = BTreeSet::new();
    for (idx, (members, ball, votes)) in clusters.iter().enumerate() {
        // A ball claimed by a bigger cluster makes this whole cluster misplaced.
        let outvoted = clusters
            .iter()
            .enumerate()
            .any(|(o, (_, b, v))| o != idx && b == ball && (v > votes || (v == votes && o < idx)));
        for &i in members {
            if outvoted || truth[i] != *ball {
                out.insert(i);
            }
        }
    }
    // A ball split without strays: report the points not in the ball's largest cluster.
    if out.is_empty() {
        let truth_blocks = canonical_partition(truth);
        for block in truth_blocks {
            let owner = c.medoid_of(block[0]);
            out.extend(block.iter().copied().filter(|&i| c.medoid_of(i) != owner));
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], squared: bool) -> DissimilarityMatrix {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let m = if squared {
            crate::model::Metric::SquaredEuclidean
        } else {
            crate::model::Metric::Euclidean
        };
        DissimilarityMatrix::from_points(&pts, m).unwrap()
    }

    #[test]
    fn program_shape() {
        let w = line(&[0.0, 1.0, 3.0], true);
        let lp = build_linkmed(&w, 1).unwrap();
        assert_eq!(lp.num_vars(), 9);
        assert_eq!(lp.num_constraints(), 3 + 1 + 6);
        assert!(build_linkmed(&w, 0).is_err());
        assert!(build_linkmed(&w, 4).is_err());
    }

    #[test]
    fn every_point_its_own_medoid() {
        let w = line(&[0.0, 2.0], true);
        let rr = solve_linkmed(&w, 2).unwrap();
        assert_eq!(rr.objective, 0.0);
        assert_eq!(rr.z, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn three_points_one_medoid() {
        let w = line(&[0.0, 1.0, 3.0], true);
        for s in [Strategy::Full, Strategy::Lazy] {
            let rr = solve_linkmed_with(&w, 1, s).unwrap();
            assert!((rr.objective - 5.0).abs() < 1e-9);
            assert_eq!(rr.clustering.unwrap().medoids(), &[1]);
        }
        let ex = brute_force_kmed(&w, 1).unwrap();
        assert_eq!(ex.best_objective, 5.0);
        assert_eq!(ex.optimal_medoid_sets, vec![vec![1]]);
        assert!(ex.unique);
    }

    #[test]
    fn two_groups_on_a_line() {
        let w = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0], true);
        let rr = solve_linkmed(&w, 2).unwrap();
        assert!(rr.integral);
        assert!((rr.objective - 4.0).abs() < 1e-9);
        assert_eq!(rr.clustering.as_ref().unwrap().medoids(), &[1, 4]);
        let ex = brute_force_kmed(&w, 2).unwrap();
        assert_eq!(ex.optimal_medoid_sets, vec![vec![1, 4]]);
    }

    #[test]
    fn symmetric_pair_is_not_unique() {
        let w = line(&[0.0, 1.5], false);
        let ex = brute_force_kmed(&w, 1).unwrap();
        assert_eq!(ex.optimal_medoid_sets, vec![vec![0], vec![1]]);
        assert!(!ex.unique);
        let rr = solve_linkmed(&w, 1).unwrap();
        assert!((rr.objective - 1.5).abs() < 1e-12);
        assert!(rr.integral);
    }

    #[test]
    fn all_points_as_medoids() {
        let w = line(&[0.0, 1.0, 4.0, 9.0], true);
        let ex = brute_force_kmed(&w, 4).unwrap();
        assert_eq!(ex.best_objective, 0.0);
        assert_eq!(ex.optimal_medoid_sets, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn enumeration_guard() {
        let pts: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64]).collect();
        let w = DissimilarityMatrix::from_points(&pts, crate::model::Metric::Euclidean).unwrap();
        assert!(matches!(brute_force_kmed(&w, 10), Err(Error::EnumerationGuard { .. })));
    }

    #[test]
    fn clustering_accessors() {
        let w = line(&[0.0, 1.0, 2.0, 10.0, 11.0], true);
        let c = Clustering::nearest(&w, [1, 3]).unwrap();
        assert_eq!(c.assignment(), &[1, 1, 1, 3, 3]);
        assert_eq!(c.sizes(), vec![3, 3, 3, 2, 2]);
        assert_eq!(c.second_medoid(&w, 0), Some(3));
        assert_eq!(c.second_cost(&w, 4), 100.0);
        assert_eq!(c.cluster(3), vec![3, 4]);
        assert_eq!(c.cost(&w), 1.0 + 1.0 + 1.0);
        let single = Clustering::nearest(&w, [2]).unwrap();
        assert_eq!(single.second_cost(&w, 0), f64::INFINITY);

        let from = Clustering::from_labels(&w, &[5, 5, 5, 7, 7]).unwrap();
        assert_eq!(from.medoids(), &[1, 3]);

        assert!(Clustering::new(3, [0], vec![0, 0, 1]).is_err());
        assert!(Clustering::new(3, [0, 1], vec![1, 1, 0]).is_err());
        let wrong = Clustering::new(5, [1, 3], vec![1, 1, 3, 3, 3]).unwrap();
        assert!(!wrong.is_nearest(&w));
    }

    #[test]
    fn recovery_labels() {
        let w = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0], true);
        let rr = solve_linkmed(&w, 2).unwrap();
        let ok = classify_recovery(&rr, &[0, 0, 0, 1, 1, 1]).unwrap();
        assert_eq!(ok.label, RecoveryLabel::BallRecovery);

        let off = classify_recovery(&rr, &[0, 0, 1, 1, 1, 1]).unwrap();
        assert_eq!(off.label, RecoveryLabel::ClusterRecovery);
        assert_eq!(off.mismatched, vec![2]);

        let mut z = rr.z.clone();
        z[0] = 0.5;
        z[1] = 0.5;
        let half = RelaxationResult {
            integral: false,
            clustering: None,
            z,
            ..rr.clone()
        };
        assert_eq!(
            classify_recovery(&half, &[0; 6]).unwrap().label,
            RecoveryLabel::Fractional
        );
        assert!(RecoveryLabel::BallRecovery > RecoveryLabel::ClusterRecovery);
    }

    #[test]
    fn fractional_from_z() {
        let w = line(&[0.0, 1.0, 3.0], true);
        let z = vec![0.5, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.5, 0.5];
        let rr = RelaxationResult::from_z(&w, 2, z).unwrap();
        assert!(!rr.integral);
        assert!(rr.clustering.is_none());
    }

    #[test]
    fn json_and_csv_output() {
        let w = line(&[0.0, 1.0, 3.0], true);
        let rr = solve_linkmed(&w, 1).unwrap();
        let v = serde_json::to_value(&rr).unwrap();
        assert_eq!(v["medoids"], serde_json::json!([1]));
        assert_eq!(v["assignment"], serde_json::json!([1, 1, 1]));
        assert_eq!(v["integral"], serde_json::json!(true));
        let mut buf = Vec::new();
        rr.write_z_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0,1,0\n0,1,0\n0,1,0\n");
    }
}
