use super::{
    residuals, LinearProgram, LpSolution, Relation, Sense, Status, COMPLEMENTARITY_TOL, FEASIBILITY_TOL, PIVOT_TOL,
};
use crate::{Error, Result};

/// Knobs for the simplex driver. The defaults are what every caller in the
/// crate uses.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Consecutive degenerate pivots tolerated under Dantzig pricing before
    /// switching to Bland's rule until the objective moves again.
    pub bland_after: usize,
    /// Pivots between fresh factorizations of the basis inverse.
    pub refactor_every: usize,
    /// Hard cap on pivots; `None` derives one from the problem size.
    pub max_iterations: Option<usize>,
    /// Relax every finite bound by a tiny deterministic amount while
    /// pivoting, which keeps degenerate programs from stalling. The bounds are
    /// restored before the solution is reported.
    pub perturb: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            bland_after: 50,
            refactor_every: 256,
            max_iterations: None,
            perturb: true,
        }
    }
}

/// Solves `lp` to a basic optimal solution.
///
/// Infeasible and unbounded programs are reported through
/// [`LpSolution::status`]; `Err` is reserved for malformed programs and for
/// numerical breakdown (residuals above tolerance after refactorization).
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, &SolverOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
    lp.validate()?;
    let mut s = Simplex::new(lp, opts);
    let mut status = s.run()?;
    if s.perturbed && !s.unperturb(status)? {
        // The perturbed optimal basis is not feasible for the exact bounds.
        let exact = SolverOptions {
            perturb: false,
            ..opts.clone()
        };
        let iterations = s.iterations;
        s = Simplex::new(lp, &exact);
        s.iterations = iterations;
        status = s.run()?;
    }
    let solution = s.extract(lp, status);
    if solution.status == Status::Optimal {
        let r = residuals(lp, &solution.x, Some((&solution.duals, &solution.reduced_costs)));
        if r.primal > FEASIBILITY_TOL || r.bounds > FEASIBILITY_TOL {
            return Err(Error::Numerical(format!(
                "primal residual {:.3e} / bound residual {:.3e} after refactorization",
                r.primal, r.bounds
            )));
        }
        if r.complementarity > COMPLEMENTARITY_TOL {
            return Err(Error::Numerical(format!(
                "complementary slackness residual {:.3e}",
                r.complementarity
            )));
        }
    }
    Ok(solution)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    Zero,
}

struct Simplex {
    m: usize,
    n_struct: usize,
    first_artificial: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Row-major m x m explicit basis inverse.
    binv: Vec<f64>,
    since_refactor: usize,
    /// Duals for the current cost, updated in place across pivots.
    y: Option<Vec<f64>>,
    iterations: usize,
    max_iterations: usize,
    bland_after: usize,
    refactor_every: usize,
    perturbed: bool,
    exact_lo: Vec<f64>,
    exact_hi: Vec<f64>,
}

enum Step {
    Optimal,
    Unbounded,
    Moved { improving: bool },
}

/// Deterministic relaxation amount for the bound of column `j`.
fn perturbation(j: usize, bound: f64) -> f64 {
    let mut z = (j as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let u = (z >> 11) as f64 / (1u64 << 53) as f64;
    1e-9 * (1.0 + u) * bound.abs().max(1.0)
}

fn power_of_two_scale(max_abs: f64) -> f64 {
    // Exact scaling keeps the scaled program bit-reproducible.
    (-(max_abs.log2().round())).exp2()
}

impl Simplex {
    fn new(lp: &LinearProgram, opts: &SolverOptions) -> Self {
        let m = lp.num_constraints();
        let n = lp.num_vars();
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };

        let row_scale: Vec<f64> = lp.constraints.iter().map(|c| power_of_two_scale(c.scale())).collect();
        let b: Vec<f64> = lp.constraints.iter().zip(&row_scale).map(|(c, s)| c.rhs * s).collect();

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, c) in lp.constraints.iter().enumerate() {
            for &(j, a) in &c.terms {
                cols[j].push((i, a * row_scale[i]));
            }
        }
        let mut cost: Vec<f64> = lp.objective.iter().map(|c| c * sign).collect();
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        let perturbed = opts.perturb;
        let widen = |j: usize, lo: &mut f64, hi: &mut f64| {
            if perturbed && lo != hi {
                if lo.is_finite() {
                    *lo -= perturbation(2 * j, *lo);
                }
                if hi.is_finite() {
                    *hi += perturbation(2 * j + 1, *hi);
                }
            }
        };
        for j in 0..n {
            let (mut l, mut h) = (lo[j], hi[j]);
            widen(j, &mut l, &mut h);
            lo[j] = l;
            hi[j] = h;
        }
        let mut x = Vec::with_capacity(n + 2 * m);
        let mut state = Vec::with_capacity(n + 2 * m);
        for j in 0..n {
            if lo[j].is_finite() {
                x.push(lo[j]);
                state.push(VarState::AtLower);
            } else if hi[j].is_finite() {
                x.push(hi[j]);
                state.push(VarState::AtUpper);
            } else {
                x.push(0.0);
                state.push(VarState::Zero);
            }
        }

        let mut resid = b.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for &(i, a) in &cols[j] {
                    resid[i] -= a * x[j];
                }
            }
        }

        let mut basis = vec![usize::MAX; m];
        let mut needs_artificial = Vec::new();
        for (i, c) in lp.constraints.iter().enumerate() {
            let coef = match c.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => {
                    needs_artificial.push(i);
                    continue;
                }
            };
            let j = cols.len();
            cols.push(vec![(i, coef)]);
            cost.push(0.0);
            let (mut l, mut h) = (0.0, f64::INFINITY);
            widen(j, &mut l, &mut h);
            lo.push(l);
            hi.push(h);
            let value = resid[i] * coef;
            if value >= 0.0 {
                x.push(value);
                state.push(VarState::Basic(i));
                basis[i] = j;
            } else {
                x.push(l);
                state.push(VarState::AtLower);
                resid[i] -= coef * l;
                needs_artificial.push(i);
            }
        }
        needs_artificial.sort_unstable();
        let first_artificial = cols.len();
        for &i in &needs_artificial {
            let coef = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
            let j = cols.len();
            cols.push(vec![(i, coef)]);
            cost.push(0.0);
            lo.push(0.0);
            hi.push(f64::INFINITY);
            x.push(resid[i].abs());
            state.push(VarState::Basic(i));
            basis[i] = j;
        }

        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            // Initial basis columns are +-1 unit vectors.
            let coef = cols[basis[i]][0].1;
            binv[i * m + i] = 1.0 / coef;
        }

        let total = cols.len();
        let mut exact_lo = lp.lower.clone();
        let mut exact_hi = lp.upper.clone();
        exact_lo.resize(total, 0.0);
        exact_hi.resize(total, f64::INFINITY);
        Simplex {
            m,
            n_struct: n,
            first_artificial,
            cols,
            cost,
            lo,
            hi,
            b,
            row_scale,
            x,
            state,
            basis,
            binv,
            since_refactor: 0,
            y: None,
            iterations: 0,
            max_iterations: opts.max_iterations.unwrap_or(10_000 + 50 * (m + total)),
            bland_after: opts.bland_after,
            refactor_every: opts.refactor_every.max(1),
            perturbed,
            exact_lo,
            exact_hi,
        }
    }

    fn run(&mut self) -> Result<Status> {
        if self.first_artificial < self.cols.len() {
            let phase1: Vec<f64> = (0..self.cols.len())
                .map(|j| if j >= self.first_artificial { 1.0 } else { 0.0 })
                .collect();
            match self.optimize(&phase1, true)? {
                Status::Optimal => {}
                _ => return Err(Error::Numerical("phase one reported an unbounded ray".into())),
            }
            let infeasibility: f64 = (self.first_artificial..self.cols.len())
                .map(|j| self.x[j].max(0.0))
                .sum();
            let bmax = self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if infeasibility > FEASIBILITY_TOL * (1.0 + bmax) {
                return Ok(Status::Infeasible);
            }
            for j in self.first_artificial..self.cols.len() {
                self.hi[j] = 0.0;
                if !matches!(self.state[j], VarState::Basic(_)) {
                    self.x[j] = 0.0;
                    self.state[j] = VarState::AtLower;
                }
            }
            self.drive_out_artificials()?;
        }
        let cost = self.cost.clone();
        self.optimize(&cost, false)
    }

    /// Restores the exact bounds, moves nonbasic columns onto them and
    /// recomputes the basic values. Returns false when an optimal basis turns
    /// out to violate the exact bounds by more than the feasibility tolerance;
    /// small violations are clamped.
    fn unperturb(&mut self, status: Status) -> Result<bool> {
        for j in 0..self.first_artificial {
            self.lo[j] = self.exact_lo[j];
            self.hi[j] = self.exact_hi[j];
            self.x[j] = match self.state[j] {
                VarState::AtLower => self.lo[j],
                VarState::AtUpper => self.hi[j],
                VarState::Zero => 0.0,
                VarState::Basic(_) => self.x[j],
            };
        }
        self.perturbed = false;
        if status != Status::Optimal {
            return Ok(true);
        }
        self.refactor()?;
        for &j in &self.basis {
            let v = self.x[j];
            if v < self.lo[j] - FEASIBILITY_TOL || v > self.hi[j] + FEASIBILITY_TOL {
                return Ok(false);
            }
        }
        for i in 0..self.m {
            let j = self.basis[i];
            self.x[j] = self.x[j].clamp(self.lo[j], self.hi[j]);
        }
        Ok(true)
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_artificial
    }

    fn optimize(&mut self, cost: &[f64], phase1: bool) -> Result<Status> {
        let cost_scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let dj_tol = 1e-9 * cost_scale;
        let mut bland = false;
        let mut degenerate_run = 0usize;
        self.y = None;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::Numerical(format!(
                    "iteration limit {} reached",
                    self.max_iterations
                )));
            }
            if self.since_refactor >= self.refactor_every {
                self.refactor()?;
            }
            match self.step(cost, dj_tol, bland, phase1)? {
                Step::Optimal => {
                    if self.since_refactor == 0 {
                        return Ok(Status::Optimal);
                    }
                    // Confirm optimality against a fresh factorization.
                    self.refactor()?;
                }
                Step::Unbounded => return Ok(Status::Unbounded),
                Step::Moved { improving } => {
                    self.iterations += 1;
                    if improving {
                        degenerate_run = 0;
                        bland = false;
                    } else {
                        degenerate_run += 1;
                        if degenerate_run > self.bland_after {
                            bland = true;
                        }
                    }
                }
            }
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yr, br) in y.iter_mut().zip(row) {
                    *yr += cb * br;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(r, a)| y[r] * a).sum::<f64>()
    }

    fn column_image(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(r, a) in &self.cols[j] {
            for i in 0..m {
                alpha[i] += self.binv[i * m + r] * a;
            }
        }
        alpha
    }

    /// Picks the entering variable and its direction of motion.
    fn price(&self, cost: &[f64], y: &[f64], dj_tol: f64, bland: bool, phase1: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols.len() {
            if !phase1 && self.is_artificial(j) {
                continue;
            }
            let dir = match self.state[j] {
                VarState::Basic(_) => continue,
                _ if self.lo[j] == self.hi[j] => continue,
                VarState::AtLower => {
                    let d = self.reduced_cost(cost, y, j);
                    if d < -dj_tol {
                        (1.0, -d)
                    } else {
                        continue;
                    }
                }
                VarState::AtUpper => {
                    let d = self.reduced_cost(cost, y, j);
                    if d > dj_tol {
                        (-1.0, d)
                    } else {
                        continue;
                    }
                }
                VarState::Zero => {
                    let d = self.reduced_cost(cost, y, j);
                    if d.abs() > dj_tol {
                        (-d.signum(), d.abs())
                    } else {
                        continue;
                    }
                }
            };
            if bland {
                return Some((j, dir.0));
            }
            if dir.1 > best_score {
                best_score = dir.1;
                best = Some((j, dir.0));
            }
        }
        best
    }

    fn step(&mut self, cost: &[f64], dj_tol: f64, bland: bool, phase1: bool) -> Result<Step> {
        let y = match self.y.take() {
            Some(y) => y,
            None => self.duals(cost),
        };
        let Some((q, dir)) = self.price(cost, &y, dj_tol, bland, phase1) else {
            self.y = Some(y);
            return Ok(Step::Optimal);
        };
        let dq = self.reduced_cost(cost, &y, q);
        let alpha = self.column_image(q);

        // Ratio test over basic variables.
        let mut theta = f64::INFINITY;
        let mut limits = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * a;
            let bv = self.basis[i];
            let limit = if rate < 0.0 {
                if self.lo[bv].is_finite() {
                    (self.x[bv] - self.lo[bv]) / -rate
                } else {
                    continue;
                }
            } else if self.hi[bv].is_finite() {
                (self.hi[bv] - self.x[bv]) / rate
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            theta = theta.min(limit);
            limits.push((i, limit));
        }

        let flip = self.hi[q] - self.lo[q];
        if flip.is_finite() && flip <= theta {
            // Bound flip: the entering variable reaches its opposite bound first.
            self.x[q] += dir * flip;
            for (i, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let bv = self.basis[i];
                    self.x[bv] -= dir * a * flip;
                }
            }
            self.state[q] = if dir > 0.0 {
                VarState::AtUpper
            } else {
                VarState::AtLower
            };
            self.y = Some(y);
            return Ok(Step::Moved {
                improving: flip * dq.abs() > 1e-12,
            });
        }
        if theta == f64::INFINITY {
            return Ok(Step::Unbounded);
        }

        let tie = 1e-12 * theta.max(1.0);
        let mut leave: Option<usize> = None;
        for &(i, limit) in &limits {
            if limit > theta + tie {
                continue;
            }
            leave = match leave {
                None => Some(i),
                Some(r) => {
                    let better = if bland {
                        self.basis[i] < self.basis[r]
                    } else {
                        let (ai, ar) = (alpha[i].abs(), alpha[r].abs());
                        ai > ar || (ai == ar && self.basis[i] < self.basis[r])
                    };
                    if better {
                        Some(i)
                    } else {
                        Some(r)
                    }
                }
            };
        }
        let r = leave.expect("finite ratio implies a blocking row");
        let limit_r = limits.iter().find(|&&(i, _)| i == r).map(|&(_, l)| l).unwrap_or(theta);
        let step = limit_r;

        self.x[q] += dir * step;
        for (i, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let bv = self.basis[i];
                self.x[bv] -= dir * a * step;
            }
        }
        let leaving = self.basis[r];
        let rate = -dir * alpha[r];
        if rate < 0.0 {
            self.x[leaving] = self.lo[leaving];
            self.state[leaving] = VarState::AtLower;
        } else {
            self.x[leaving] = self.hi[leaving];
            self.state[leaving] = VarState::AtUpper;
        }
        self.pivot(r, q, &alpha);
        let mut y = y;
        let m = self.m;
        for (yk, b) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
            if *b != 0.0 {
                *yk += dq * b;
            }
        }
        self.y = Some(y);
        Ok(Step::Moved {
            improving: step * dq.abs() > 1e-12,
        })
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let pivot = alpha[r];
        {
            let row = &mut self.binv[r * m..(r + 1) * m];
            for v in row.iter_mut() {
                *v /= pivot;
            }
        }
        let pivot_row: Vec<(usize, f64)> = self.binv[r * m..(r + 1) * m]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, &v)| (k, v))
            .collect();
        for (i, &a) in alpha.iter().enumerate() {
            if i == r || a == 0.0 {
                continue;
            }
            let row = &mut self.binv[i * m..(i + 1) * m];
            for &(k, p) in &pivot_row {
                row[k] -= a * p;
            }
        }
        self.basis[r] = q;
        self.state[q] = VarState::Basic(r);
        self.since_refactor += 1;
        self.y = None;
    }

    /// Recomputes the basis inverse from scratch (Gauss-Jordan with partial
    /// pivoting) and the basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<()> {
        self.y = None;
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (i, &j) in self.basis.iter().enumerate() {
            for &(r, v) in &self.cols[j] {
                a[r * m + i] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut p = c;
            let mut best = a[c * m + c].abs();
            for r in c + 1..m {
                let v = a[r * m + c].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < 1e-12 {
                return Err(Error::Numerical("basis matrix became singular".into()));
            }
            if p != c {
                for k in 0..m {
                    a.swap(c * m + k, p * m + k);
                    inv.swap(c * m + k, p * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            let nz = |row: &[f64]| -> Vec<(usize, f64)> {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(k, &v)| (k, v))
                    .collect()
            };
            let prow_a = nz(&a[c * m..(c + 1) * m]);
            let prow_i = nz(&inv[c * m..(c + 1) * m]);
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for &(k, v) in &prow_a {
                    a[r * m + k] -= f * v;
                }
                for &(k, v) in &prow_i {
                    inv[r * m + k] -= f * v;
                }
            }
        }
        self.binv = inv;

        let mut rhs = self.b.clone();
        for j in 0..self.cols.len() {
            if matches!(self.state[j], VarState::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            for &(r, v) in &self.cols[j] {
                rhs[r] -= v * self.x[j];
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(p, q)| p * q).sum();
            self.x[self.basis[i]] = v;
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Pivots basic artificials (now fixed at zero) out of the basis where a
    /// structural or slack column can replace them; rows where none can are
    /// linearly dependent and keep their artificial.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        let mut changed = false;
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.first_artificial {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                let v: f64 = self.cols[j].iter().map(|&(i, a)| row[i] * a).sum();
                if v.abs() > 1e-7 && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((q, _)) = best {
                let alpha = self.column_image(q);
                let leaving = self.basis[r];
                self.x[leaving] = 0.0;
                self.state[leaving] = VarState::AtLower;
                self.pivot(r, q, &alpha);
                changed = true;
            }
        }
        if changed {
            self.refactor()?;
        }
        Ok(())
    }

    fn extract(&self, lp: &LinearProgram, status: Status) -> LpSolution {
        let n = self.n_struct;
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut x: Vec<f64> = self.x[..n].to_vec();
        // Nonbasic values sit exactly on their bounds.
        for j in 0..n {
            match self.state[j] {
                VarState::AtLower => x[j] = lp.lower[j],
                VarState::AtUpper => x[j] = lp.upper[j],
                VarState::Zero => x[j] = 0.0,
                VarState::Basic(_) => {}
            }
        }
        let (duals, reduced_costs) = if status == Status::Optimal {
            let y = self.duals(&self.cost);
            let duals: Vec<f64> = y.iter().zip(&self.row_scale).map(|(v, s)| sign * v * s).collect();
            let rc: Vec<f64> = (0..n)
                .map(|j| {
                    if matches!(self.state[j], VarState::Basic(_)) {
                        0.0
                    } else {
                        sign * self.reduced_cost(&self.cost, &y, j)
                    }
                })
                .collect();
            (duals, rc)
        } else {
            (vec![0.0; self.m], vec![0.0; n])
        };
        let objective_value = match status {
            Status::Optimal => lp.objective_value(&x),
            Status::Infeasible => f64::NAN,
            Status::Unbounded => match lp.sense {
                Sense::Minimize => f64::NEG_INFINITY,
                Sense::Maximize => f64::INFINITY,
            },
        };
        LpSolution {
            status,
            x,
            objective_value,
            duals,
            reduced_costs,
            vertex: status == Status::Optimal,
            iterations: self.iterations,
        }
    }
}
