//! Expected maximum cost, expected social cost, and certified optima.
//!
//! Optimal benchmarks always carry a `certified_gap`: an upper bound on
//! `value − true optimum` backed by a convexity argument (subgradient lower
//! bounds, or half the profile diameter for the maximum cost). Ratios are
//! reported as intervals derived from that gap.

mod bnb;
mod weiszfeld;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Lottery, Norm, Point, Profile};
use crate::mechanisms::Mechanism;
use crate::tol;

pub use bnb::Aggregate;

/// Evaluation budget used when callers do not pass one.
pub const DEFAULT_OPT_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `E[max_i ‖x_i − y‖]`
    MaxCost,
    /// `E[Σ_i ‖x_i − y‖]`
    SocialCost,
}

impl Objective {
    pub fn short(self) -> &'static str {
        match self {
            Objective::MaxCost => "mc",
            Objective::SocialCost => "sc",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mc" | "max_cost" => Ok(Objective::MaxCost),
            "sc" | "social_cost" => Ok(Objective::SocialCost),
            other => Err(Error::parse(
                "objective",
                format!("expected mc or sc, got `{other}`"),
            )),
        }
    }
}

/// How an [`OptResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptMethod {
    /// Closed-form certificate: coincident profile, an optimal data point,
    /// or the midpoint of a diameter pair.
    Exact,
    Weiszfeld,
    /// Subgradient branch-and-bound over the padded bounding box.
    Grid,
}

/// Solver selection for [`opt_social_cost_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Weiszfeld for plain Euclidean norms, branch-and-bound otherwise.
    Auto,
    /// Euclidean only.
    Weiszfeld,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub point: Point,
    pub value: f64,
    /// Upper bound on `value − optimum`.
    pub certified_gap: f64,
    pub method: OptMethod,
    pub evaluations: usize,
}

impl OptResult {
    /// Lower end of the certified optimum interval.
    pub fn lower_bound(&self) -> f64 {
        (self.value - self.certified_gap).max(0.0)
    }

    pub fn meets_target(&self) -> bool {
        self.certified_gap <= tol::OPT_GAP * (1.0 + self.value)
    }
}

fn check_dims(lot: &Lottery, profile: &Profile, norm: &Norm) -> Result<()> {
    profile.check_norm(norm)?;
    lot.check_dim(profile.dim())
}

/// `Σ_j w_j max_i ‖x_i − y_j‖`: the expectation of the per-realization
/// maximum, not the maximum of expected distances.
pub fn cost_mc(lot: &Lottery, profile: &Profile, norm: &Norm) -> Result<f64> {
    check_dims(lot, profile, norm)?;
    Ok(lot
        .atoms()
        .iter()
        .map(|a| a.weight * mc_at(&a.point, profile, norm))
        .sum())
}

/// `Σ_j w_j Σ_i ‖x_i − y_j‖`.
pub fn cost_sc(lot: &Lottery, profile: &Profile, norm: &Norm) -> Result<f64> {
    check_dims(lot, profile, norm)?;
    Ok(lot
        .atoms()
        .iter()
        .map(|a| a.weight * sc_at(&a.point, profile, norm))
        .sum())
}

pub fn cost(lot: &Lottery, profile: &Profile, norm: &Norm, obj: Objective) -> Result<f64> {
    match obj {
        Objective::MaxCost => cost_mc(lot, profile, norm),
        Objective::SocialCost => cost_sc(lot, profile, norm),
    }
}

pub(crate) fn mc_at(y: &Point, profile: &Profile, norm: &Norm) -> f64 {
    profile
        .points()
        .iter()
        .map(|x| norm.dist(x, y))
        .fold(0.0, f64::max)
}

pub(crate) fn sc_at(y: &Point, profile: &Profile, norm: &Norm) -> f64 {
    profile.points().iter().map(|x| norm.dist(x, y)).sum()
}

fn coincident(profile: &Profile) -> bool {
    let first = &profile.points()[0];
    profile.points().iter().all(|p| p == first)
}

fn exact(point: Point, value: f64, gap: f64, evaluations: usize) -> OptResult {
    OptResult {
        point,
        value,
        certified_gap: gap.max(0.0),
        method: OptMethod::Exact,
        evaluations,
    }
}

/// Geometric median under `norm`.
pub fn opt_social_cost(profile: &Profile, norm: &Norm, budget: usize) -> Result<OptResult> {
    opt_social_cost_with(profile, norm, budget, Solver::Auto)
}

pub fn opt_social_cost_with(
    profile: &Profile,
    norm: &Norm,
    budget: usize,
    solver: Solver,
) -> Result<OptResult> {
    profile.check_norm(norm)?;
    if coincident(profile) {
        return Ok(exact(profile.points()[0].clone(), 0.0, 0.0, 0));
    }
    match solver {
        Solver::Weiszfeld if !norm.is_euclidean() => Err(Error::Precondition(
            "Weiszfeld iteration requires the plain Euclidean norm".into(),
        )),
        Solver::Weiszfeld => Ok(weiszfeld::geometric_median(profile, budget)),
        Solver::Auto if norm.is_euclidean() => Ok(weiszfeld::geometric_median(profile, budget)),
        Solver::Auto | Solver::Grid => {
            Ok(bnb::minimize(profile, norm, Aggregate::Sum, budget, 0.0))
        }
    }
}

/// Minimax center under `norm`.
///
/// Half the profile diameter is always a lower bound; when the midpoint of
/// a diameter pair attains it the result is exact. Otherwise branch-and-bound
/// runs with that bound folded into its certificate.
pub fn opt_max_cost(profile: &Profile, norm: &Norm, budget: usize) -> Result<OptResult> {
    profile.check_norm(norm)?;
    if coincident(profile) {
        return Ok(exact(profile.points()[0].clone(), 0.0, 0.0, 0));
    }
    let (diam, i, j) = profile.diameter(norm);
    let half = diam / 2.0;
    let mid = profile.points()[i].midpoint(&profile.points()[j]);
    let at_mid = mc_at(&mid, profile, norm);
    if at_mid - half <= tol::WEIGHT * (1.0 + half) {
        return Ok(exact(mid, at_mid, at_mid - half, 1));
    }
    let mut res = bnb::minimize(profile, norm, Aggregate::Max, budget, half);
    if at_mid < res.value {
        res.value = at_mid;
        res.point = mid;
    }
    res.certified_gap = res.certified_gap.min(res.value - half).max(0.0);
    Ok(res)
}

pub fn opt(profile: &Profile, norm: &Norm, obj: Objective, budget: usize) -> Result<OptResult> {
    match obj {
        Objective::MaxCost => opt_max_cost(profile, norm, budget),
        Objective::SocialCost => opt_social_cost(profile, norm, budget),
    }
}

/// Mechanism cost over a certified optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxRatio {
    pub objective: Objective,
    pub cost: f64,
    pub opt: OptResult,
    /// `cost / opt.value`.
    pub ratio: f64,
    /// `cost / value`. The value is attained at `opt.point`, so the true
    /// optimum lies in `[value − gap, value]` and the true ratio in `[lo, hi]`.
    pub lo: f64,
    /// `cost / max(value − gap, ε)`.
    pub hi: f64,
}

/// Smallest denominator used for the upper end of a ratio interval.
pub const RATIO_EPS: f64 = 1e-12;

pub fn approx_ratio<M: Mechanism + ?Sized>(
    spec: &M,
    profile: &Profile,
    norm: &Norm,
    obj: Objective,
) -> Result<ApproxRatio> {
    approx_ratio_with_budget(spec, profile, norm, obj, DEFAULT_OPT_BUDGET)
}

pub fn approx_ratio_with_budget<M: Mechanism + ?Sized>(
    spec: &M,
    profile: &Profile,
    norm: &Norm,
    obj: Objective,
    budget: usize,
) -> Result<ApproxRatio> {
    let lot = spec.apply(profile, norm)?;
    let c = cost(&lot, profile, norm, obj)?;
    let o = opt(profile, norm, obj, budget)?;
    ratio_from(obj, c, o)
}

pub(crate) fn ratio_from(objective: Objective, cost: f64, opt: OptResult) -> Result<ApproxRatio> {
    if opt.value == 0.0 {
        if cost <= tol::GEOM {
            return Ok(ApproxRatio {
                objective,
                cost,
                opt,
                ratio: 1.0,
                lo: 1.0,
                hi: 1.0,
            });
        }
        return Err(Error::UnboundedRatio { cost });
    }
    let ratio = cost / opt.value;
    let lo = ratio;
    let hi = cost / (opt.value - opt.certified_gap).max(RATIO_EPS);
    Ok(ApproxRatio {
        objective,
        cost,
        opt,
        ratio,
        lo,
        hi,
    })
}
