//! Mechanisms: deterministic maps from a reported profile to a lottery.
//!
//! The lottery returned by a mechanism *is* its randomness; applying a
//! mechanism never draws random numbers. Every mechanism takes the active
//! norm for a uniform interface, though only the separated 2-dictator
//! mechanism uses it (to measure distances along its segments).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_on_segment_at_distance, Agent, Lottery, Norm, Point, Profile};

/// Anything that maps a profile to a lottery.
///
/// Implemented by [`MechanismSpec`]; tests and experiments can implement it
/// for ad-hoc mechanisms and run the same checkers and searches on them.
pub trait Mechanism: Sync {
    fn apply(&self, profile: &Profile, norm: &Norm) -> Result<Lottery>;

    /// Smallest profile size the mechanism accepts.
    fn min_agents(&self) -> usize {
        1
    }

    fn label(&self) -> String;
}

/// The implemented mechanisms.
///
/// String syntax: `dictator:1`, `rand_med`, `rand_center`, `sep2d:a=0.0`,
/// `coord_median`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MechanismSpec {
    /// Always returns the report of the given (1-based) agent.
    Dictator(Agent),
    /// `x1` and `x2` with probability 1/4 each, their midpoint with 1/2.
    RandMed,
    /// The mean with probability 1/2, each report with `1/(2n)`.
    RandCenter,
    /// Separated 2-dictator mechanism with threshold `a` on the first
    /// coordinate of agent 1.
    Separate2Dictator { a: f64 },
    /// Coordinate-wise (lower) median; deterministic.
    CoordinateMedian,
}

impl Mechanism for MechanismSpec {
    fn apply(&self, profile: &Profile, norm: &Norm) -> Result<Lottery> {
        profile.check_norm(norm)?;
        profile.require_agents(self.min_agents())?;
        match *self {
            MechanismSpec::Dictator(agent) => {
                agent.check(profile.n())?;
                Ok(Lottery::degenerate(profile.agent(agent).clone()))
            }
            MechanismSpec::RandMed => Ok(apply_rand_med(profile)),
            MechanismSpec::RandCenter => Ok(apply_rand_center(profile)),
            MechanismSpec::Separate2Dictator { a } => apply_separate_2dictator(profile, norm, a),
            MechanismSpec::CoordinateMedian => Ok(apply_coordinate_median(profile)),
        }
    }

    fn min_agents(&self) -> usize {
        match self {
            MechanismSpec::Dictator(a) => a.0.max(1),
            MechanismSpec::RandMed | MechanismSpec::RandCenter => 2,
            MechanismSpec::Separate2Dictator { .. } => 3,
            MechanismSpec::CoordinateMedian => 1,
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl MechanismSpec {
    /// Group-strategyproof in every normed space where the mechanism's own
    /// analysis applies.
    pub fn claimed_group_strategyproof(&self) -> bool {
        matches!(
            self,
            MechanismSpec::Dictator(_)
                | MechanismSpec::RandMed
                | MechanismSpec::Separate2Dictator { .. }
        )
    }
}

/// Requires `n ≥ 2`; agents beyond the second are ignored.
pub fn apply_rand_med(profile: &Profile) -> Lottery {
    let x1 = &profile.points()[0];
    let x2 = &profile.points()[1];
    Lottery::canonical(vec![
        (0.25, x1.clone()),
        (0.25, x2.clone()),
        (0.5, x1.midpoint(x2)),
    ])
}

pub fn apply_rand_center(profile: &Profile) -> Lottery {
    let n = profile.n() as f64;
    let each = 1.0 / (2.0 * n);
    let mut atoms = Vec::with_capacity(profile.n() + 1);
    atoms.push((0.5, profile.mean()));
    atoms.extend(profile.points().iter().map(|p| (each, p.clone())));
    Lottery::canonical(atoms)
}

/// Let `r` be the first raw coordinate of `x1`. If `r ≥ a`, the facility is
/// `x1` with probability 2/3 and, with 1/3, the point `y` on `x1x2` at
/// distance `min(r − a, ‖x1 − x2‖)` from `x1`; otherwise the same with `x3`
/// and `a − r`.
pub fn apply_separate_2dictator(profile: &Profile, norm: &Norm, a: f64) -> Result<Lottery> {
    profile.require_agents(3)?;
    let x1 = &profile.points()[0];
    let r = x1.coords()[0];
    let other = if r >= a {
        &profile.points()[1]
    } else {
        &profile.points()[2]
    };
    let target = (r - a).abs().min(norm.dist(x1, other));
    let y = point_on_segment_at_distance(x1, other, target, norm)?;
    Ok(Lottery::canonical(vec![
        (2.0 / 3.0, x1.clone()),
        (1.0 / 3.0, y),
    ]))
}

/// Lower median per coordinate: index `(n − 1) / 2` of the sorted values.
pub fn apply_coordinate_median(profile: &Profile) -> Lottery {
    let mid = (profile.n() - 1) / 2;
    let coords = (0..profile.dim())
        .map(|k| {
            let mut col: Vec<f64> = profile.points().iter().map(|p| p.coords()[k]).collect();
            col.sort_by(f64::total_cmp);
            col[mid]
        })
        .collect();
    Lottery::degenerate(Point::from_raw(coords))
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismSpec::Dictator(a) => write!(f, "dictator:{a}"),
            MechanismSpec::RandMed => write!(f, "rand_med"),
            MechanismSpec::RandCenter => write!(f, "rand_center"),
            MechanismSpec::Separate2Dictator { a } => write!(f, "sep2d:a={a:?}"),
            MechanismSpec::CoordinateMedian => write!(f, "coord_median"),
        }
    }
}

impl FromStr for MechanismSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: String| Error::parse("mechanism", msg);
        match s {
            "rand_med" => return Ok(MechanismSpec::RandMed),
            "rand_center" => return Ok(MechanismSpec::RandCenter),
            "coord_median" => return Ok(MechanismSpec::CoordinateMedian),
            _ => {}
        }
        if let Some(i) = s.strip_prefix("dictator:") {
            let i: usize = i
                .parse()
                .map_err(|e| bad(format!("dictator index `{i}`: {e}")))?;
            if i == 0 {
                return Err(bad("dictator index is 1-based".into()));
            }
            return Ok(MechanismSpec::Dictator(Agent(i)));
        }
        if let Some(rest) = s.strip_prefix("sep2d") {
            let a = match rest {
                "" => 0.0,
                _ => {
                    let v = rest
                        .strip_prefix(":a=")
                        .ok_or_else(|| bad(format!("expected `sep2d:a=<real>`, got `{s}`")))?;
                    v.parse::<f64>()
                        .map_err(|e| bad(format!("sep2d threshold `{v}`: {e}")))?
                }
            };
            if !a.is_finite() {
                return Err(bad("sep2d threshold must be finite".into()));
            }
            return Ok(MechanismSpec::Separate2Dictator { a });
        }
        Err(bad(format!(
            "unknown mechanism `{s}` (expected dictator:<i>, rand_med, rand_center, sep2d:a=<a>, coord_median)"
        )))
    }
}

impl TryFrom<String> for MechanismSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MechanismSpec> for String {
    fn from(m: MechanismSpec) -> Self {
        m.to_string()
    }
}
