//! Points, profiles, norms and lotteries.
//!
//! Everything here is immutable after construction. Constructors validate
//! (finite coordinates, matching dimensions); the arithmetic helpers on
//! [`Point`] assume their operands were validated and only debug-assert
//! dimensions.

mod lottery;
mod norm;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lottery::{Atom, Lottery};
pub use norm::{strict_convexity_witness, Norm};

/// A location in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(Point(coords))
    }

    pub fn zeros(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    /// Builds a point from arithmetic results that are known to be finite.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Point {
        Point(self.0.iter().map(|a| a * c).collect())
    }

    /// `self + t * (other - self)`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    /// Total lexicographic order on coordinates.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

/// Literal points. Panics on non-finite or empty input.
impl<const N: usize> From<[f64; N]> for Point {
    fn from(coords: [f64; N]) -> Self {
        Point::new(coords.to_vec()).expect("literal point must be finite and non-empty")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A 1-based agent number, as used in mechanism strings and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Agent(pub usize);

impl Agent {
    /// Builds an agent from a 0-based position.
    pub fn from_index(index: usize) -> Self {
        Agent(index + 1)
    }

    /// 0-based position in the profile.
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn check(self, n: usize) -> Result<()> {
        if self.0 == 0 || self.0 > n {
            Err(Error::AgentOutOfRange { agent: self.0, n })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered list of reported agent locations sharing one dimension.
///
/// Profiles with a single agent are accepted so that the objectives and
/// the coordinate-median mechanism can be evaluated on them; mechanisms that
/// reference a second or third agent reject short profiles at application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileFile", into = "ProfileFile")]
pub struct Profile {
    points: Vec<Point>,
}

/// On-disk profile encoding: `{"d": 2, "points": [[0, 0], [2, 0]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileFile {
    pub d: usize,
    pub points: Vec<Vec<f64>>,
}

impl TryFrom<ProfileFile> for Profile {
    type Error = Error;

    fn try_from(file: ProfileFile) -> Result<Self> {
        let mut points = Vec::with_capacity(file.points.len());
        for (k, coords) in file.points.into_iter().enumerate() {
            if coords.len() != file.d {
                return Err(Error::parse(
                    format!("points[{k}]"),
                    format!("expected {} coordinates, got {}", file.d, coords.len()),
                ));
            }
            let p = Point::new(coords)
                .map_err(|e| Error::parse(format!("points[{k}]"), e.to_string()))?;
            points.push(p);
        }
        Profile::new(points)
    }
}

impl From<Profile> for ProfileFile {
    fn from(p: Profile) -> Self {
        ProfileFile {
            d: p.dim(),
            points: p.points.into_iter().map(Point::into_coords).collect(),
        }
    }
}

impl Profile {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points
            .first()
            .ok_or(Error::TooFewAgents { needed: 1, got: 0 })?;
        let d = first.dim();
        for p in &points {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
        }
        Ok(Profile { points })
    }

    pub fn from_coords<const D: usize>(coords: &[[f64; D]]) -> Result<Self> {
        let points = coords
            .iter()
            .map(|c| Point::new(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(points)
    }

    /// `n` copies of `z`.
    pub fn unanimous(z: &Point, n: usize) -> Result<Self> {
        Profile::new(vec![z.clone(); n])
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn agent(&self, agent: Agent) -> &Point {
        &self.points[agent.index()]
    }

    pub fn require_agents(&self, needed: usize) -> Result<()> {
        if self.n() < needed {
            Err(Error::TooFewAgents {
                needed,
                got: self.n(),
            })
        } else {
            Ok(())
        }
    }

    /// Copy with agent `agent` reporting `report` instead.
    pub fn with_report(&self, agent: Agent, report: Point) -> Profile {
        let mut points = self.points.clone();
        points[agent.index()] = report;
        Profile { points }
    }

    /// Copy with each coalition member replaced by its misreport.
    pub fn with_reports(&self, coalition: &[Agent], reports: &[Point]) -> Profile {
        debug_assert_eq!(coalition.len(), reports.len());
        let mut points = self.points.clone();
        for (a, r) in coalition.iter().zip(reports) {
            points[a.index()] = r.clone();
        }
        Profile { points }
    }

    pub fn translate(&self, shift: &Point) -> Profile {
        Profile {
            points: self.points.iter().map(|p| p.add(shift)).collect(),
        }
    }

    /// Coordinate-wise mean, computed relative to the first point so that a
    /// unanimous profile maps back to its common point exactly.
    pub fn mean(&self) -> Point {
        let base = &self.points[0];
        let n = self.n() as f64;
        let mut acc = vec![0.0; self.dim()];
        for p in &self.points[1..] {
            for (a, (c, b)) in acc.iter_mut().zip(p.coords().iter().zip(base.coords())) {
                *a += c - b;
            }
        }
        Point::from_raw(
            base.coords()
                .iter()
                .zip(acc)
                .map(|(b, a)| b + a / n)
                .collect(),
        )
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in &self.points {
            for k in 0..d {
                lo[k] = lo[k].min(p.coords()[k]);
                hi[k] = hi[k].max(p.coords()[k]);
            }
        }
        (lo, hi)
    }

    /// Largest pairwise distance and the pair attaining it (0-based).
    pub fn diameter(&self, norm: &Norm) -> (f64, usize, usize) {
        let mut best = (0.0, 0, 0);
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let dist = norm.dist(&self.points[i], &self.points[j]);
                if dist > best.0 {
                    best = (dist, i, j);
                }
            }
        }
        best
    }

    pub fn check_norm(&self, norm: &Norm) -> Result<()> {
        norm.check_dim(self.dim())
    }
}

/// `‖v‖` under `norm`.
pub fn norm_eval(norm: &Norm, v: &Point) -> Result<f64> {
    norm.check_dim(v.dim())?;
    Ok(norm.eval(v.coords()))
}

/// Expected distance `Σ w_j ‖x − y_j‖` from `x` to the lottery's atoms.
pub fn expected_distance(x: &Point, lot: &Lottery, norm: &Norm) -> Result<f64> {
    lot.check_dim(x.dim())?;
    norm.check_dim(x.dim())?;
    Ok(lot.expected_distance(x, norm))
}

/// Expectation point of a lottery.
pub fn centroid(lot: &Lottery) -> Point {
    lot.centroid()
}

/// Expected distance from the lottery to its own centroid.
pub fn radius(lot: &Lottery, norm: &Norm) -> Result<f64> {
    norm.check_dim(lot.dim())?;
    Ok(lot.radius(norm))
}

/// The point `a + t (b − a)` at norm-distance `dist` from `a` along `ab`.
pub fn point_on_segment_at_distance(a: &Point, b: &Point, dist: f64, norm: &Norm) -> Result<Point> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    norm.check_dim(a.dim())?;
    if !dist.is_finite() || dist < 0.0 {
        return Err(Error::Precondition(format!(
            "segment distance must be finite and nonnegative, got {dist}"
        )));
    }
    if dist == 0.0 {
        return Ok(a.clone());
    }
    let len = norm.dist(a, b);
    if len == 0.0 || dist > len * (1.0 + crate::tol::WEIGHT) {
        return Err(Error::SegmentTooShort { dist, len });
    }
    let t = (dist / len).min(1.0);
    if t == 1.0 {
        return Ok(b.clone());
    }
    Ok(a.lerp(b, t))
}
