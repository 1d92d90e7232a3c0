use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Serialize;

use super::{LinearProgram, Relation, Sense};
use crate::{Error, Result};

/// Reduced costs below this magnitude count as zero.
pub(crate) const DUAL_ZERO: f64 = 1e-9;

/// Independent residuals of a candidate solution, all on unit-scaled rows
/// (each row divided by its largest absolute coefficient).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    /// Largest row violation.
    pub primal: f64,
    /// Largest bound violation.
    pub bounds: f64,
    /// Largest |multiplier * slack| product, rows and bounds alike.
    pub complementarity: f64,
    /// Largest sign violation of the multipliers.
    pub dual_sign: f64,
}

/// Recomputes feasibility (and, when multipliers are supplied,
/// complementary slackness and dual sign conditions) from scratch.
pub fn residuals(lp: &LinearProgram, x: &[f64], duals: Option<(&[f64], &[f64])>) -> Residuals {
    let mut r = Residuals::default();
    for (i, c) in lp.constraints.iter().enumerate() {
        let scale = c.scale();
        let act = c.activity(x);
        let v = match c.relation {
            Relation::Le => (act - c.rhs).max(0.0),
            Relation::Ge => (c.rhs - act).max(0.0),
            Relation::Eq => (act - c.rhs).abs(),
        } / scale;
        r.primal = r.primal.max(v);
        if let Some((y, _)) = duals {
            if c.relation != Relation::Eq {
                r.complementarity = r.complementarity.max((y[i] * (act - c.rhs)).abs());
            }
            // Minimization convention; flipped for maximization.
            let y_min = match lp.sense {
                Sense::Minimize => y[i],
                Sense::Maximize => -y[i],
            };
            let sign_violation = match c.relation {
                Relation::Le => y_min.max(0.0),
                Relation::Ge => (-y_min).max(0.0),
                Relation::Eq => 0.0,
            };
            r.dual_sign = r.dual_sign.max(sign_violation);
        }
    }
    for j in 0..lp.num_vars() {
        let v = (lp.lower[j] - x[j]).max(x[j] - lp.upper[j]).max(0.0);
        r.bounds = r.bounds.max(v);
        if let Some((_, d)) = duals {
            let d_min = match lp.sense {
                Sense::Minimize => d[j],
                Sense::Maximize => -d[j],
            };
            let to_lower = (x[j] - lp.lower[j]).abs();
            let to_upper = (lp.upper[j] - x[j]).abs();
            let dist = match (to_lower.is_finite(), to_upper.is_finite()) {
                (true, true) => to_lower.min(to_upper),
                (true, false) => to_lower,
                (false, true) => to_upper,
                (false, false) => 1.0,
            };
            r.complementarity = r.complementarity.max(d[j].abs() * dist);
            // A positive reduced cost is only legitimate at a finite lower
            // bound, a negative one at a finite upper bound.
            let sign_violation = if d_min > DUAL_ZERO && to_lower > 1e-9 {
                d_min
            } else if d_min < -DUAL_ZERO && to_upper > 1e-9 {
                -d_min
            } else {
                0.0
            };
            r.dual_sign = r.dual_sign.max(sign_violation);
        }
    }
    r
}

/// Writes `name,value` rows for every variable.
pub fn write_solution_csv<W: Write>(lp: &LinearProgram, x: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "value"])?;
    for (name, v) in lp.names.iter().zip(x) {
        w.write_record([name.as_str(), &format!("{v}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an externally computed solution (`name,value` with header) and
/// orders it like the program's variables. Missing variables are an error.
pub fn read_solution_csv<R: Read>(lp: &LinearProgram, input: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut values: HashMap<String, f64> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Parse(format!("solution row has {} fields", rec.len())));
        }
        let v: f64 = rec[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad value {:?} for {}", &rec[1], &rec[0])))?;
        values.insert(rec[0].to_string(), v);
    }
    lp.names
        .iter()
        .map(|n| {
            values
                .get(n)
                .copied()
                .ok_or_else(|| Error::Parse(format!("solution is missing variable {n}")))
        })
        .collect()
}
