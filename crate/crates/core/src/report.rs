//! CSV, JSON and SVG renderings of experiment results. Wall times are left
//! out so identical results give identical bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::experiment::CellResult;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg" => Ok(ReportFormat::Svg),
            _ => Err(Error::Parse(format!("unknown report format {s:?} (csv, json, svg)"))),
        }
    }
}

const CSV_HEADER: [&str; 15] = [
    "case",
    "d",
    "k",
    "n",
    "R",
    "trials",
    "fractional",
    "cluster_only",
    "ball",
    "solver_failures",
    "failed_ball_recoveries",
    "certified",
    "prop1_holds",
    "cor3_holds",
    "cor4_holds",
];

fn nonempty(results: &[CellResult]) -> Result<()> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no results to report".into()));
    }
    Ok(())
}

/// One row per cell.
pub fn write_csv<W: Write>(results: &[CellResult], out: W) -> Result<()> {
    nonempty(results)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in results {
        let c = &r.cell;
        w.write_record([
            c.case.to_string(),
            c.d.to_string(),
            c.k.to_string(),
            c.n.to_string(),
            c.r.to_string(),
            r.trials.to_string(),
            r.fractional.to_string(),
            r.cluster_only.to_string(),
            r.ball.to_string(),
            r.solver_failures.to_string(),
            r.failed_ball_recoveries().to_string(),
            r.certified.to_string(),
            r.prop1_holds.to_string(),
            r.cor3_holds.to_string(),
            r.cor4_holds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(results: &[CellResult], mut out: W) -> Result<()> {
    nonempty(results)?;
    serde_json::to_writer_pretty(&mut out, results)?;
    out.write_all(b"\n")?;
    Ok(())
}

const PALETTE: [&str; 8] = [
    "#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#66409e", "#00798c", "#8c564b", "#444444",
];

fn panels(results: &[CellResult]) -> Vec<(u8, usize, usize)> {
    let set: BTreeSet<(u8, usize, usize)> = results.iter().map(|r| (r.cell.case, r.cell.d, r.cell.k)).collect();
    set.into_iter().collect()
}

/// File name of the panel for `(case, d, k)`.
pub fn svg_name(case: u8, d: usize, k: usize) -> String {
    format!("failed_ball_case{case}_d{d}_k{k}.svg")
}

/// Failed ball recoveries against `R` for one `(case, d, k)`, one polyline
/// per `n`.
pub fn render_svg(results: &[CellResult], case: u8, d: usize, k: usize) -> Result<String> {
    let cells: Vec<&CellResult> = results
        .iter()
        .filter(|r| (r.cell.case, r.cell.d, r.cell.k) == (case, d, k))
        .collect();
    if cells.is_empty() {
        return Err(Error::InvalidInput(format!("no cells for case {case}, d={d}, k={k}")));
    }
    let (width, height) = (480.0, 320.0);
    let (left, right, top, bottom) = (56.0, 96.0, 36.0, 44.0);
    let pw = width - left - right;
    let ph = height - top - bottom;

    let r_lo = cells.iter().map(|c| c.cell.r).fold(f64::INFINITY, f64::min);
    let r_hi = cells.iter().map(|c| c.cell.r).fold(f64::NEG_INFINITY, f64::max);
    let r_span = if r_hi > r_lo { r_hi - r_lo } else { 1.0 };
    let y_hi = cells.iter().map(|c| c.trials).max().unwrap_or(1).max(1) as f64;
    let x = |r: f64| left + (r - r_lo) / r_span * pw;
    let y = |v: f64| top + ph - v / y_hi * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">Case {case}, d = {d}, k = {k}</text>"#,
        left + pw / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{left:.1},{top:.1} V{:.1} H{:.1}" fill="none" stroke="black"/>"#,
        top + ph,
        left + pw
    );
    for i in 0..=4 {
        let v = y_hi * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y(v) + 4.0,
            v.round()
        );
    }
    let rs: BTreeSet<u64> = cells.iter().map(|c| c.cell.r.to_bits()).collect();
    let mut rs: Vec<f64> = rs.into_iter().map(f64::from_bits).collect();
    rs.sort_by(f64::total_cmp);
    for r in &rs {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{r}</text>"#,
            x(*r),
            top + ph + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">R</text>"#,
        left + pw / 2.0,
        height - 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">failed ball recoveries</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    let ns: BTreeSet<usize> = cells.iter().map(|c| c.cell.n).collect();
    for (idx, n) in ns.iter().enumerate() {
        let colour = PALETTE[idx % PALETTE.len()];
        let mut pts: Vec<(f64, usize)> = cells
            .iter()
            .filter(|c| c.cell.n == *n)
            .map(|c| (c.cell.r, c.failed_ball_recoveries()))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let coords: Vec<String> = pts
            .iter()
            .map(|&(r, f)| format!("{:.1},{:.1}", x(r), y(f as f64)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
        for &(r, f) in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="2" fill="{colour}"/>"#,
                x(r),
                y(f as f64)
            );
        }
        let ly = top + 12.0 + 16.0 * idx as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="1.5"/>"#,
            lx + 18.0
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">n = {n}</text>"#, lx + 24.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes the requested formats into `dir` (created if missing): `cells.csv`,
/// `cells.json` and one SVG per `(case, d, k)`. Returns the paths written.
pub fn emit_report(results: &[CellResult], formats: &[ReportFormat], dir: &Path) -> Result<Vec<PathBuf>> {
    nonempty(results)?;
    fs::create_dir_all(dir)?;
    let formats: BTreeSet<ReportFormat> = formats.iter().copied().collect();
    let mut written = Vec::new();
    for f in formats {
        match f {
            ReportFormat::Csv => {
                let p = dir.join("cells.csv");
                write_csv(results, fs::File::create(&p)?)?;
                written.push(p);
            }
            ReportFormat::Json => {
                let p = dir.join("cells.json");
                write_json(results, fs::File::create(&p)?)?;
                written.push(p);
            }
            ReportFormat::Svg => {
                for (case, d, k) in panels(results) {
                    let p = dir.join(svg_name(case, d, k));
                    fs::write(&p, render_svg(results, case, d, k)?)?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}
