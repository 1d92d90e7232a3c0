//! CPLEX-style LP file format (`Minimize` / `Subject To` / `Bounds` / `End`).
//!
//! The writer emits every variable in the objective section, in index
//! order, so that re-reading restores the original variable ordering even
//! for variables with zero cost. Coefficients use Rust's shortest
//! round-trip float formatting, so export followed by parse is exact.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{LinearProgram, Relation, Sense};
use crate::{Error, Result};

const TERMS_PER_LINE: usize = 8;

/// Shortest round-trip rendering; exponent form for very large or small values.
fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

fn push_expr(out: &mut String, terms: &[(usize, f64)], names: &[String], indent: &str) {
    for (t, &(j, a)) in terms.iter().enumerate() {
        if t > 0 && t % TERMS_PER_LINE == 0 {
            out.push('\n');
            out.push_str(indent);
        }
        let sign = if a.is_sign_negative() { "-" } else { "+" };
        if t == 0 {
            if sign == "-" {
                let _ = write!(out, "- {} {}", num(a.abs()), names[j]);
            } else {
                let _ = write!(out, "{} {}", num(a), names[j]);
            }
        } else {
            let _ = write!(out, " {} {} {}", sign, num(a.abs()), names[j]);
        }
    }
}

/// Renders `lp` as LP-format text.
///
/// Fails if variable or row names are empty, duplicated, or contain
/// characters the format cannot carry.
pub fn export_lp_text(lp: &LinearProgram) -> Result<String> {
    lp.validate()?;
    let mut seen = HashMap::new();
    for name in &lp.names {
        check_name(name)?;
        if seen.insert(name.as_str(), ()).is_some() {
            return Err(Error::InvalidProgram(format!("duplicate variable name {name}")));
        }
    }
    for c in &lp.constraints {
        check_name(&c.name)?;
    }

    let mut out = String::new();
    out.push_str("\\ exported by medoid-lp\n");
    out.push_str(match lp.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let all: Vec<(usize, f64)> = lp.objective.iter().copied().enumerate().collect();
    out.push_str(" obj: ");
    push_expr(&mut out, &all, &lp.names, "      ");
    out.push('\n');

    out.push_str("Subject To\n");
    for c in &lp.constraints {
        let _ = write!(out, " {}: ", c.name);
        if c.terms.is_empty() {
            let _ = write!(out, "0 {}", lp.names[0]);
        } else {
            push_expr(&mut out, &c.terms, &lp.names, "   ");
        }
        let _ = writeln!(out, " {} {}", c.relation.symbol(), num(c.rhs));
    }

    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let (l, u, name) = (lp.lower[j], lp.upper[j], &lp.names[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, false) if l == 0.0 => {}
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", num(l));
            }
            (true, true) if l == u => {
                let _ = writeln!(out, " {name} = {}", num(l));
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", num(l), num(u));
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", num(u));
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    out.push_str("End\n");
    Ok(out)
}

fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit() || c == '.')
        && name.chars().all(is_name_char)
        && !matches!(name.to_ascii_lowercase().as_str(), "inf" | "infinity" | "free");
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidProgram(format!(
            "name {name:?} cannot be written in LP format"
        )))
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_.[]{}!#$%&()/,;?@'`|~\"".contains(c)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Colon,
    Rel(Relation),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut toks = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' {
            toks.push(Tok::Plus);
            i += 1;
        } else if c == '-' {
            toks.push(Tok::Minus);
            i += 1;
        } else if c == ':' {
            toks.push(Tok::Colon);
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            while j < chars.len() && "<>=".contains(chars[j]) {
                j += 1;
            }
            let op: String = chars[i..j].iter().collect();
            let rel = match op.as_str() {
                "<" | "<=" | "=<" => Relation::Le,
                ">" | ">=" | "=>" => Relation::Ge,
                "=" => Relation::Eq,
                _ => return Err(Error::Parse(format!("unknown operator {op}"))),
            };
            toks.push(Tok::Rel(rel));
            i = j;
        } else if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len() {
                let d = chars[j];
                let exp_sign = (d == '+' || d == '-') && j > i && matches!(chars[j - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    j += 1;
                } else {
                    break;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let v: f64 = text.parse().map_err(|_| Error::Parse(format!("bad number {text:?}")))?;
            toks.push(Tok::Num(v));
            i = j;
        } else if is_name_char(c) {
            let mut j = i;
            while j < chars.len() && is_name_char(chars[j]) {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            match word.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => toks.push(Tok::Num(f64::INFINITY)),
                _ => toks.push(Tok::Ident(word)),
            }
            i = j;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(toks)
}

struct Vars {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl Vars {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }
}

/// Parses a linear expression starting at `pos`; stops at a relation or the
/// start of the next labelled row.
fn parse_expr(toks: &[Tok], pos: &mut usize, vars: &mut Vars) -> Result<Vec<(usize, f64)>> {
    let mut terms = Vec::new();
    loop {
        let start = *pos;
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = toks.get(*pos) {
            if *t == Tok::Minus {
                sign = -sign;
            }
            saw_sign = true;
            *pos += 1;
        }
        let mut coef = 1.0;
        let mut saw_num = false;
        if let Some(Tok::Num(v)) = toks.get(*pos) {
            coef = *v;
            saw_num = true;
            *pos += 1;
        }
        match toks.get(*pos) {
            Some(Tok::Ident(name)) if !matches!(toks.get(*pos + 1), Some(Tok::Colon)) => {
                let j = vars.get(name);
                terms.push((j, sign * coef));
                *pos += 1;
            }
            _ => {
                if saw_num || saw_sign {
                    // A bare constant belongs to the caller (rhs); rewind.
                    *pos = start;
                }
                return Ok(terms);
            }
        }
    }
}

fn parse_signed_number(toks: &[Tok], pos: &mut usize) -> Result<f64> {
    let mut sign = 1.0;
    while let Some(t @ (Tok::Plus | Tok::Minus)) = toks.get(*pos) {
        if *t == Tok::Minus {
            sign = -sign;
        }
        *pos += 1;
    }
    match toks.get(*pos) {
        Some(Tok::Num(v)) => {
            *pos += 1;
            Ok(sign * v)
        }
        other => Err(Error::Parse(format!("expected a number, found {other:?}"))),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    End,
}

fn section_keyword(line: &str) -> Option<(Section, Option<Sense>)> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "minimize" | "minimum" | "min" => Some((Section::Objective, Some(Sense::Minimize))),
        "maximize" | "maximum" | "max" => Some((Section::Objective, Some(Sense::Maximize))),
        "subject to" | "such that" | "st" | "s.t." => Some((Section::Constraints, None)),
        "bounds" | "bound" => Some((Section::Bounds, None)),
        "end" => Some((Section::End, None)),
        _ => None,
    }
}

/// Parses LP-format text into a [`LinearProgram`].
///
/// Covers the subset written by [`export_lp_text`] plus the common
/// variations (implicit unit coefficients, `<`/`=<` spellings, `x <= u`
/// and `x >= l` bound forms, `free`). Integer sections are rejected.
pub fn parse_lp_text(text: &str) -> Result<LinearProgram> {
    let mut sense = None;
    let mut section = Section::Preamble;
    let mut objective_text = String::new();
    let mut constraint_text = String::new();
    let mut bound_lines = Vec::new();
    for raw in text.lines() {
        let line = match raw.find('\\') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        if let Some((s, sn)) = section_keyword(line) {
            section = s;
            if sn.is_some() {
                sense = sn;
            }
            continue;
        }
        let lower = line.trim().to_ascii_lowercase();
        if [
            "general",
            "generals",
            "gen",
            "binary",
            "binaries",
            "bin",
            "semi-continuous",
        ]
        .contains(&lower.as_str())
        {
            return Err(Error::Parse("integer sections are not supported".into()));
        }
        match section {
            Section::Preamble => return Err(Error::Parse(format!("text before objective: {line:?}"))),
            Section::Objective => {
                objective_text.push_str(line);
                objective_text.push('\n');
            }
            Section::Constraints => {
                constraint_text.push_str(line);
                constraint_text.push('\n');
            }
            Section::Bounds => bound_lines.push(line.to_string()),
            Section::End => {}
        }
    }
    let sense = sense.ok_or_else(|| Error::Parse("missing Minimize/Maximize section".into()))?;
    let mut vars = Vars {
        index: HashMap::new(),
        names: Vec::new(),
    };

    let toks = tokenize(&objective_text)?;
    let mut pos = 0;
    if let (Some(Tok::Ident(_)), Some(Tok::Colon)) = (toks.first(), toks.get(1)) {
        pos = 2;
    }
    let obj_terms = parse_expr(&toks, &mut pos, &mut vars)?;
    if pos != toks.len() {
        return Err(Error::Parse("trailing tokens in objective".into()));
    }

    let toks = tokenize(&constraint_text)?;
    let mut pos = 0;
    let mut rows = Vec::new();
    while pos < toks.len() {
        let name = match (toks.get(pos), toks.get(pos + 1)) {
            (Some(Tok::Ident(n)), Some(Tok::Colon)) => {
                pos += 2;
                n.clone()
            }
            _ => format!("R{}", rows.len() + 1),
        };
        let terms = parse_expr(&toks, &mut pos, &mut vars)?;
        let rel = match toks.get(pos) {
            Some(Tok::Rel(r)) => *r,
            other => return Err(Error::Parse(format!("row {name}: expected relation, found {other:?}"))),
        };
        pos += 1;
        let rhs = parse_signed_number(&toks, &mut pos)?;
        rows.push((name, terms, rel, rhs));
    }

    let mut bounds: Vec<(usize, Option<f64>, Option<f64>)> = Vec::new();
    for line in &bound_lines {
        let toks = tokenize(line)?;
        let parsed =
            parse_bound(&toks, &mut vars).ok_or_else(|| Error::Parse(format!("unrecognized bound line {line:?}")))?;
        bounds.push(parsed);
    }

    let mut lp = LinearProgram::new(sense);
    let n = vars.names.len();
    let mut objective = vec![0.0; n];
    for (j, a) in obj_terms {
        objective[j] += a;
    }
    for (j, name) in vars.names.iter().enumerate() {
        lp.add_var(name.clone(), objective[j], 0.0, f64::INFINITY);
    }
    for (j, lo, up) in bounds {
        if let Some(l) = lo {
            lp.lower[j] = l;
        }
        if let Some(u) = up {
            lp.upper[j] = u;
        }
    }
    for (name, terms, rel, rhs) in rows {
        lp.add_constraint(name, terms, rel, rhs);
    }
    lp.validate()?;
    Ok(lp)
}

fn parse_bound(toks: &[Tok], vars: &mut Vars) -> Option<(usize, Option<f64>, Option<f64>)> {
    let mut pos = 0;
    // "x free"
    if let [Tok::Ident(x), Tok::Ident(kw)] = toks {
        if kw.eq_ignore_ascii_case("free") {
            return Some((vars.get(x), Some(f64::NEG_INFINITY), Some(f64::INFINITY)));
        }
    }
    // "x <rel> v"
    if let Some(Tok::Ident(x)) = toks.first() {
        let j = vars.get(x);
        pos += 1;
        let rel = match toks.get(pos) {
            Some(Tok::Rel(r)) => *r,
            _ => return None,
        };
        pos += 1;
        let v = parse_signed_number(toks, &mut pos).ok()?;
        if pos != toks.len() {
            return None;
        }
        return Some(match rel {
            Relation::Le => (j, None, Some(v)),
            Relation::Ge => (j, Some(v), None),
            Relation::Eq => (j, Some(v), Some(v)),
        });
    }
    // "l <= x" or "l <= x <= u"
    let l = parse_signed_number(toks, &mut pos).ok()?;
    if !matches!(toks.get(pos), Some(Tok::Rel(Relation::Le))) {
        return None;
    }
    pos += 1;
    let j = match toks.get(pos) {
        Some(Tok::Ident(x)) => vars.get(x),
        _ => return None,
    };
    pos += 1;
    if pos == toks.len() {
        return Some((j, Some(l), None));
    }
    if !matches!(toks.get(pos), Some(Tok::Rel(Relation::Le))) {
        return None;
    }
    pos += 1;
    let u = parse_signed_number(toks, &mut pos).ok()?;
    (pos == toks.len()).then_some((j, Some(l), Some(u)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable_program() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", 1.0, 0.0, f64::INFINITY);
        lp.add_constraint("c1", [(x, 1.0)], Relation::Ge, 3.0);
        let text = export_lp_text(&lp).unwrap();
        assert!(text.contains(" obj: 1 x\n"), "{text}");
        assert!(text.contains(" c1: 1 x >= 3\n"), "{text}");
        assert_eq!(parse_lp_text(&text).unwrap(), lp);
    }

    #[test]
    fn bounds_and_signs_round_trip() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let a = lp.add_var("a", -0.1, -2.5, 4.0);
        let b = lp.add_var("b", 0.0, f64::NEG_INFINITY, f64::INFINITY);
        let c = lp.add_var("c", 1e-17, 1.0, f64::INFINITY);
        let d = lp.add_var("d", 3.0, f64::NEG_INFINITY, 7.0);
        let e = lp.add_var("e", 2.0, 0.0, 0.0);
        lp.add_constraint("r1", [(a, -1.0), (b, 1.0 / 3.0)], Relation::Eq, -4.25);
        lp.add_constraint("r2", [(c, 2.0), (d, -1e300), (e, 1.0)], Relation::Le, 0.0);
        lp.add_constraint("r3", (0..5).map(|j| (j, j as f64 + 0.5)), Relation::Ge, 1e-9);
        let back = parse_lp_text(&export_lp_text(&lp).unwrap()).unwrap();
        assert_eq!(back, lp);
    }

    #[test]
    fn reads_hand_written_variants() {
        let text = "\\ comment\nMaximize\n obj: x + 2 y - z\nSubject To\n c1: x + y + z <= 10\n -x + y >= -2\n c3: x - 3 y = 0\nBounds\n y <= 4\n z free\n -inf <= x <= 9\nEnd\n";
        let lp = parse_lp_text(text).unwrap();
        assert_eq!(lp.names, vec!["x", "y", "z"]);
        assert_eq!(lp.objective, vec![1.0, 2.0, -1.0]);
        assert_eq!(lp.constraints[1].name, "R2");
        assert_eq!(lp.constraints[1].terms, vec![(0, -1.0), (1, 1.0)]);
        assert_eq!(lp.constraints[1].rhs, -2.0);
        assert_eq!(lp.upper[1], 4.0);
        assert_eq!(lp.lower[2], f64::NEG_INFINITY);
        assert_eq!((lp.lower[0], lp.upper[0]), (f64::NEG_INFINITY, 9.0));
    }

    #[test]
    fn rejects_unwritable_names_and_integer_sections() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var("bad name", 1.0, 0.0, 1.0);
        assert!(export_lp_text(&lp).is_err());
        assert!(parse_lp_text("Minimize\n obj: x\nGenerals\n x\nEnd\n").is_err());
    }
}
