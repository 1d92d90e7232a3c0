//! Separated-balls instances and dissimilarity matrices.
//!
//! Points are drawn as `center + r * direction`, where the direction is a
//! normalized standard-Gaussian vector (exactly isotropic in any dimension)
//! and the radius comes from inverting the radial CDF of the chosen
//! [`RadialLaw`].

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How point pairs are turned into weights `w_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    SquaredEuclidean,
    Euclidean,
    /// `d_ij^p` for an exponent `p > 0`.
    Power(f64),
}

impl Metric {
    /// Weight for a pair at squared Euclidean distance `sq`.
    pub fn from_squared_distance(self, sq: f64) -> f64 {
        match self {
            Metric::SquaredEuclidean => sq,
            Metric::Euclidean => sq.sqrt(),
            Metric::Power(p) => sq.powf(p / 2.0),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::SquaredEuclidean => f.write_str("squared-euclidean"),
            Metric::Euclidean => f.write_str("euclidean"),
            Metric::Power(p) => write!(f, "power:{p}"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "sq" | "squared" | "squared-euclidean" | "sqeuclidean" => Ok(Metric::SquaredEuclidean),
            "euclidean" | "euclid" | "l2" => Ok(Metric::Euclidean),
            other => {
                let p = other
                    .strip_prefix("power:")
                    .or_else(|| other.strip_prefix("pow:"))
                    .or_else(|| other.strip_prefix("p="))
                    .ok_or_else(|| Error::Parse(format!("unknown metric {s:?} (sq, euclidean, power:<p>)")))?;
                let p: f64 = p.parse().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
                if p > 0.0 && p.is_finite() {
                    Ok(Metric::Power(p))
                } else {
                    Err(Error::InvalidInput(format!("power metric needs p > 0, got {p}")))
                }
            }
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Symmetric nonnegative weights with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    w: Vec<f64>,
    metric: Option<Metric>,
}

impl DissimilarityMatrix {
    /// Validates symmetry (up to 1e-9 relative), a zero diagonal and finite
    /// nonnegative entries.
    pub fn new(n: usize, w: Vec<f64>, metric: Option<Metric>) -> Result<Self> {
        if n == 0 || w.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {n}x{n} weights, got {} entries",
                w.len()
            )));
        }
        for i in 0..n {
            if w[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "w[{i}][{i}] = {} is not zero",
                    w[i * n + i]
                )));
            }
            for j in 0..n {
                let a = w[i * n + j];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "w[{i}][{j}] = {a} is not finite and nonnegative"
                    )));
                }
                let b = w[j * n + i];
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidInput(format!("w is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DissimilarityMatrix { n, w, metric })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "dissimilarity rows must form a square matrix".into(),
            ));
        }
        DissimilarityMatrix::new(n, rows.concat(), None)
    }

    /// Weights between raw coordinate vectors.
    pub fn from_points(points: &[Vec<f64>], metric: Metric) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidInput("need at least two points".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidInput("points have mixed dimensions".into()));
        }
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let sq: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                let v = metric.from_squared_distance(sq);
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
        Ok(DissimilarityMatrix {
            n,
            w,
            metric: Some(metric),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn metric(&self) -> Option<Metric> {
        self.metric
    }

    /// Every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        DissimilarityMatrix {
            n: self.n,
            w: self.w.iter().map(|v| v * c).collect(),
            metric: self.metric,
        }
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut w = Vec::with_capacity(m * m);
        for &i in idx {
            for &j in idx {
                w.push(self.get(i, j));
            }
        }
        DissimilarityMatrix {
            n: m,
            w,
            metric: self.metric,
        }
    }

    /// N rows of N comma-separated values, no header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for i in 0..self.n {
            w.write_record(self.row(i).iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| Error::Parse(format!("bad weight {f:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        DissimilarityMatrix::from_rows(&rows)
    }
}

/// Radial law of a point drawn inside a unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialLaw {
    /// Case 1: uniform in the ball, radius CDF `r^d`.
    UniformBall,
    /// Case 2: radius CDF `r^2` in every dimension.
    QuadraticCdf,
}

impl RadialLaw {
    /// `case` is 1 or 2.
    pub fn from_case(case: u8) -> Result<Self> {
        match case {
            1 => Ok(RadialLaw::UniformBall),
            2 => Ok(RadialLaw::QuadraticCdf),
            _ => Err(Error::InvalidInput(format!("case must be 1 or 2, got {case}"))),
        }
    }

    pub fn case_number(self) -> u8 {
        match self {
            RadialLaw::UniformBall => 1,
            RadialLaw::QuadraticCdf => 2,
        }
    }

    /// Inverse CDF applied to `u` in [0, 1].
    pub fn radius_from_uniform(self, u: f64, d: usize) -> f64 {
        match self {
            RadialLaw::UniformBall => u.powf(1.0 / d as f64),
            RadialLaw::QuadraticCdf => u.sqrt(),
        }
    }

    pub fn cdf(self, r: f64, d: usize) -> f64 {
        let r = r.clamp(0.0, 1.0);
        match self {
            RadialLaw::UniformBall => r.powi(d as i32),
            RadialLaw::QuadraticCdf => r * r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterLayout {
    /// Regular simplex: every pair exactly `R` apart (needs `k <= d + 1`).
    Simplex,
    /// Collinear centers `0, R, 2R, ...` on the first axis.
    Line,
}

impl FromStr for CenterLayout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simplex" => Ok(CenterLayout::Simplex),
            "line" => Ok(CenterLayout::Line),
            _ => Err(Error::Parse(format!("unknown layout {s:?} (simplex, line)"))),
        }
    }
}

/// Places `k` ball centers in dimension `d` with separation `separation`.
pub fn place_ball_centers(k: usize, d: usize, separation: f64, layout: CenterLayout) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one ball".into()));
    }
    if d < 2 {
        return Err(Error::InvalidInput(format!("dimension must be >= 2, got {d}")));
    }
    if !(separation.is_finite() && separation > 0.0) {
        return Err(Error::InvalidInput(format!(
            "separation must be positive, got {separation}"
        )));
    }
    match layout {
        CenterLayout::Line => Ok((0..k)
            .map(|i| {
                let mut c = vec![0.0; d];
                c[0] = i as f64 * separation;
                c
            })
            .collect()),
        CenterLayout::Simplex => {
            if k > d + 1 {
                return Err(Error::InfeasibleLayout { k, d });
            }
            // Vertex m sits above the centroid of vertices 0..m along axis m-1,
            // at the height that makes its distance to each of them `separation`.
            let mut centers: Vec<Vec<f64>> = vec![vec![0.0; d]];
            for m in 1..k {
                let mut c = vec![0.0; d];
                for prev in &centers {
                    for (a, b) in c.iter_mut().zip(prev) {
                        *a += b / m as f64;
                    }
                }
                let circumradius_sq = separation * separation * (m - 1) as f64 / (2.0 * m as f64);
                c[m - 1] = (separation * separation - circumradius_sq).sqrt();
                centers.push(c);
            }
            Ok(centers)
        }
    }
}

/// A uniformly distributed unit vector.
pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Draws `n` points from the ball of radius one around `center`.
pub fn sample_ball(center: &[f64], n: usize, law: RadialLaw, seed: u64) -> Result<Vec<Vec<f64>>> {
    let d = center.len();
    if d < 2 {
        return Err(Error::InvalidInput(format!("dimension must be >= 2, got {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| sample_point(&mut rng, center, law)).collect())
}

fn sample_point<R: Rng + ?Sized>(rng: &mut R, center: &[f64], law: RadialLaw) -> Vec<f64> {
    let d = center.len();
    let dir = unit_direction(rng, d);
    let r = law.radius_from_uniform(rng.random::<f64>(), d);
    center.iter().zip(dir).map(|(c, u)| c + r * u).collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the independent stream for one ball of one trial.
pub fn stream_seed(base_seed: u64, trial: u64, ball: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ trial) ^ ball)
}

/// Points with ground-truth ball membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub ball_of: Vec<usize>,
    /// Ball centers when known (generated sets); empty for sets read from CSV.
    pub centers: Vec<Vec<f64>>,
}

/// Parameters of one separated-balls draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallsSpec {
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub separation: f64,
    pub law: RadialLaw,
    pub layout: CenterLayout,
}

impl BallsSpec {
    /// `k` balls in `d` dimensions with simplex centers where they fit and a
    /// line otherwise.
    pub fn new(k: usize, n: usize, d: usize, separation: f64, law: RadialLaw) -> Self {
        let layout = if k <= d + 1 {
            CenterLayout::Simplex
        } else {
            CenterLayout::Line
        };
        BallsSpec {
            k,
            n,
            d,
            separation,
            law,
            layout,
        }
    }
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, ball_of: Vec<usize>) -> Result<Self> {
        if points.len() != ball_of.len() {
            return Err(Error::InvalidInput("one ball label per point required".into()));
        }
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput(format!("every point must have dimension {dim}")));
        }
        Ok(PointSet {
            dim,
            points,
            ball_of,
            centers: Vec::new(),
        })
    }

    /// One trial of the separated-balls model; ball `b` of trial `t` uses the
    /// stream `stream_seed(base_seed, t, b)`.
    pub fn separated_balls(spec: &BallsSpec, base_seed: u64, trial: u64) -> Result<Self> {
        let centers = place_ball_centers(spec.k, spec.d, spec.separation, spec.layout)?;
        let mut points = Vec::with_capacity(spec.k * spec.n);
        let mut ball_of = Vec::with_capacity(spec.k * spec.n);
        for (b, c) in centers.iter().enumerate() {
            let pts = sample_ball(c, spec.n, spec.law, stream_seed(base_seed, trial, b as u64))?;
            ball_of.extend(std::iter::repeat_n(b, pts.len()));
            points.extend(pts);
        }
        Ok(PointSet {
            dim: spec.d,
            points,
            ball_of,
            centers,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Header `x0,...,x{d-1},ball`, one row per point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.dim).map(|c| format!("x{c}")).collect();
        header.push("ball".into());
        w.write_record(&header)?;
        for (p, b) in self.points.iter().zip(&self.ball_of) {
            let mut rec: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            rec.push(b.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers()?.clone();
        let has_ball = header
            .iter()
            .next_back()
            .is_some_and(|h| h.eq_ignore_ascii_case("ball"));
        let dim = if has_ball { header.len() - 1 } else { header.len() };
        if dim == 0 {
            return Err(Error::Parse("point CSV has no coordinate columns".into()));
        }
        let mut points = Vec::new();
        let mut ball_of = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::Parse(format!(
                    "row with {} fields, header has {}",
                    rec.len(),
                    header.len()
                )));
            }
            let p = rec
                .iter()
                .take(dim)
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad coordinate {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let b = if has_ball {
                rec[dim]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad ball index {:?}", &rec[dim])))?
            } else {
                0
            };
            points.push(p);
            ball_of.push(b);
        }
        PointSet::new(dim, points, ball_of)
    }
}

/// Dissimilarity matrix of a point set.
pub fn dissimilarities(ps: &PointSet, metric: Metric) -> Result<DissimilarityMatrix> {
    DissimilarityMatrix::from_points(&ps.points, metric)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    #[test]
    fn single_center_at_origin() {
        assert_eq!(
            place_ball_centers(1, 2, 5.0, CenterLayout::Line).unwrap(),
            vec![vec![0.0, 0.0]]
        );
    }

    #[test]
    fn two_simplex_centers() {
        let c = place_ball_centers(2, 2, 3.0, CenterLayout::Simplex).unwrap();
        assert_eq!(c, vec![vec![0.0, 0.0], vec![3.0, 0.0]]);
    }

    #[test]
    fn simplex_pairwise_distances_are_exact() {
        for (k, d, r) in [(3, 2, 2.0), (4, 3, 3.7), (5, 10, 2.2), (11, 10, 4.4)] {
            let c = place_ball_centers(k, d, r, CenterLayout::Simplex).unwrap();
            for i in 0..k {
                for j in i + 1..k {
                    assert!((dist(&c[i], &c[j]) - r).abs() < 1e-12, "k={k} d={d} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn line_layout_min_distance() {
        let c = place_ball_centers(4, 2, 2.5, CenterLayout::Line).unwrap();
        assert_eq!(c[3], vec![7.5, 0.0]);
        assert!(matches!(
            place_ball_centers(4, 2, 2.5, CenterLayout::Simplex),
            Err(Error::InfeasibleLayout { k: 4, d: 2 })
        ));
    }

    #[test]
    fn inverse_cdf_values() {
        assert_eq!(RadialLaw::QuadraticCdf.radius_from_uniform(0.25, 7), 0.5);
        assert_eq!(RadialLaw::UniformBall.radius_from_uniform(0.25, 2), 0.5);
        assert!((RadialLaw::UniformBall.radius_from_uniform(0.125, 3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distances_and_powers() {
        let pts = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        let sq = DissimilarityMatrix::from_points(&pts, Metric::SquaredEuclidean).unwrap();
        assert_eq!(sq.get(0, 1), 25.0);
        let eu = DissimilarityMatrix::from_points(&pts, Metric::Euclidean).unwrap();
        assert_eq!(eu.get(1, 0), 5.0);
    }

    #[test]
    fn power_metric_is_elementwise_power_of_distance() {
        let pts = vec![vec![0.3, -1.2], vec![2.5, 0.7], vec![-0.4, 0.1]];
        let w = DissimilarityMatrix::from_points(&pts, Metric::Power(3.0)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = dist(&pts[i], &pts[j]).powi(3);
                assert!((w.get(i, j) - expect).abs() <= 1e-12 * expect.max(1.0));
            }
        }
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("sq".parse::<Metric>().unwrap(), Metric::SquaredEuclidean);
        assert_eq!("euclidean".parse::<Metric>().unwrap(), Metric::Euclidean);
        assert_eq!("power:1.5".parse::<Metric>().unwrap(), Metric::Power(1.5));
        assert!("power:-1".parse::<Metric>().is_err());
        assert!("cosine".parse::<Metric>().is_err());
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let spec = BallsSpec::new(2, 4, 3, 3.0, RadialLaw::UniformBall);
        let ps = PointSet::separated_balls(&spec, 9, 0).unwrap();
        let mut buf = Vec::new();
        ps.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,x2,ball\n"));
        let back = PointSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.points, ps.points);
        assert_eq!(back.ball_of, ps.ball_of);

        let w = dissimilarities(&ps, Metric::SquaredEuclidean).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let back = DissimilarityMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.as_slice(), w.as_slice());
    }
}
