//! Dense linear programming.
//!
//! [`LinearProgram`] is a plain description of `min/max c'x` subject to
//! linear rows and per-variable bounds. [`solve_lp`] runs a bounded-variable
//! revised simplex method and always returns a basic (vertex) solution, which
//! is then re-verified by an independent residual computation.

mod simplex;
mod text;
mod verify;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use simplex::{solve_lp, solve_lp_with, SolverOptions};
pub use text::{export_lp_text, parse_lp_text};
pub use verify::{read_solution_csv, residuals, write_solution_csv, Residuals};

/// Absolute primal feasibility tolerance on unit-scaled rows.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Smallest pivot element accepted by the ratio test.
pub const PIVOT_TOL: f64 = 1e-9;
/// Complementary-slackness residual accepted after a solve.
pub const COMPLEMENTARITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// One linear row `sum(coef * x[var]) <relation> rhs`.
///
/// Terms are kept sorted by variable index with no duplicates and no zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    /// The row as a dense coefficient vector of length `num_vars`.
    pub fn dense(&self, num_vars: usize) -> Vec<f64> {
        let mut row = vec![0.0; num_vars];
        for &(j, a) in &self.terms {
            row[j] = a;
        }
        row
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest absolute coefficient, or 1 for an empty row.
    pub fn scale(&self) -> f64 {
        let s = self.terms.iter().fold(0.0f64, |m, &(_, a)| m.max(a.abs()));
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub names: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            names: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Adds a variable with bounds `[lower, upper]` (use infinities for
    /// missing bounds) and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(name.into());
        self.objective.len() - 1
    }

    /// Adds a row; duplicate variable entries are summed and zeros dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let mut terms: Vec<(usize, f64)> = terms.into_iter().collect();
        terms.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merged,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::InvalidProgram("program has no variables".into()));
        }
        if self.lower.len() != n || self.upper.len() != n || self.names.len() != n {
            return Err(Error::InvalidProgram(
                "bound/name arrays do not match variable count".into(),
            ));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(Error::InvalidProgram(format!(
                    "objective coefficient of {} is not finite",
                    self.names[j]
                )));
            }
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return Err(Error::InvalidProgram(format!(
                    "bad bounds [{l}, {u}] on {}",
                    self.names[j]
                )));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(Error::InvalidProgram(format!("row {} has non-finite rhs", c.name)));
            }
            for &(j, a) in &c.terms {
                if j >= n {
                    return Err(Error::InvalidProgram(format!(
                        "row {} references variable {j} >= {n}",
                        c.name
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidProgram(format!(
                        "row {} has a non-finite coefficient",
                        c.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`].
///
/// `duals` follow the usual sign convention for the stated sense: for a
/// minimization, `<=` rows carry nonpositive and `>=` rows nonnegative
/// multipliers, and `reduced_costs = c - A'y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub vertex: bool,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Lagrangian dual bound `b'y + sum(bound contributions)`.
    ///
    /// For a minimization this never exceeds the primal optimum when the
    /// multipliers are dual feasible; returns `-inf` (or `+inf` for a
    /// maximization) when a reduced cost pushes against an infinite bound.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut value: f64 = lp
            .constraints
            .iter()
            .zip(&self.duals)
            .map(|(c, y)| c.rhs * y * sign)
            .sum();
        for j in 0..lp.num_vars() {
            let d = self.reduced_costs[j] * sign;
            if d > verify::DUAL_ZERO {
                if lp.lower[j].is_finite() {
                    value += d * lp.lower[j];
                } else {
                    return f64::NEG_INFINITY * sign;
                }
            } else if d < -verify::DUAL_ZERO {
                if lp.upper[j].is_finite() {
                    value += d * lp.upper[j];
                } else {
                    return f64::NEG_INFINITY * sign;
                }
            }
        }
        value * sign
    }
}
