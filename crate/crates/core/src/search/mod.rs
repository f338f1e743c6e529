//! Seeded adversarial search for manipulations and bad approximation ratios.
//!
//! Every search is a set of independent restarts. Restart `r` starts from
//! the `r`-th structured profile while those last, then from random
//! profiles drawn from its own RNG stream, so results do not depend on how
//! many threads ran them. Restarts are merged deterministically: the most
//! negative margin wins for manipulations (ties broken by the JSON encoding
//! of the witness), the largest ratio wins for ratio searches (ties, up to
//! rounding, broken by restart index).
//!
//! Search only proposes. Every reported manipulation is re-validated through
//! the checkers in [`crate::properties`] before it is returned.

pub mod families;

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Agent, Lottery, Norm, Point, Profile};
use crate::mechanisms::Mechanism;
use crate::objectives::{self, ApproxRatio, Objective};
use crate::properties::{self, Witness};
use crate::rng::task_rng;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    CommonPoint,
    SegmentPoints,
    GaussianJitter,
    GridNearSupport,
    AxisSteps,
}

impl CandidateKind {
    pub const ALL: [CandidateKind; 5] = [
        CandidateKind::CommonPoint,
        CandidateKind::SegmentPoints,
        CandidateKind::GaussianJitter,
        CandidateKind::GridNearSupport,
        CandidateKind::AxisSteps,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub rng_seed: u64,
    pub restarts: usize,
    /// Objective evaluations allowed per restart during local refinement.
    pub local_steps: usize,
    /// Largest coalition tried; clamped to `n`.
    pub coalition_max_size: usize,
    pub candidate_kinds: BTreeSet<CandidateKind>,
    /// Misreports stay within this many profile diameters of the
    /// profile's bounding box.
    pub bounding_scale: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            rng_seed: 0,
            restarts: 32,
            local_steps: 200,
            coalition_max_size: 3,
            candidate_kinds: CandidateKind::ALL.into_iter().collect(),
            bounding_scale: 2.0,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Precondition("restarts must be at least 1".into()));
        }
        if !(self.bounding_scale.is_finite() && self.bounding_scale > 0.0) {
            return Err(Error::Precondition(
                "bounding_scale must be positive".into(),
            ));
        }
        Ok(())
    }

    fn uses(&self, kind: CandidateKind) -> bool {
        self.candidate_kinds.contains(&kind)
    }
}

/// Restart `r`'s starting profile.
fn start_profile(
    structured: &[Profile],
    rng: &mut ChaCha8Rng,
    r: usize,
    n: usize,
    d: usize,
) -> Profile {
    match structured.get(r) {
        Some(p) => p.clone(),
        None => families::random(rng, n, d),
    }
}

/// Box that misreports are clipped to.
struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
    scale: f64,
}

impl Bounds {
    fn new(profile: &Profile, bounding_scale: f64) -> Self {
        let (mut lo, mut hi) = profile.bounding_box();
        let span = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        let scale = if span > 0.0 { span } else { 1.0 };
        for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
            *l -= bounding_scale * scale;
            *h += bounding_scale * scale;
        }
        Bounds { lo, hi, scale }
    }

    fn clip(&self, v: Vec<f64>) -> Point {
        Point::from_raw(
            v.into_iter()
                .zip(self.lo.iter().zip(&self.hi))
                .map(|(x, (l, h))| x.clamp(*l, *h))
                .collect(),
        )
    }
}

fn gauss(rng: &mut ChaCha8Rng, d: usize, sigma: f64) -> Vec<f64> {
    (0..d)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn coordwise(points: &[&Point], f: impl Fn(&mut Vec<f64>) -> f64) -> Point {
    let d = points[0].dim();
    Point::from_raw(
        (0..d)
            .map(|k| {
                let mut col: Vec<f64> = points.iter().map(|p| p.coords()[k]).collect();
                f(&mut col)
            })
            .collect(),
    )
}

fn mean_of(points: &[&Point]) -> Point {
    coordwise(points, |c| c.iter().sum::<f64>() / c.len() as f64)
}

/// Directions `±e_k`, plus every sign pattern when `d ≤ 3`.
fn directions(d: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for k in 0..d {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[k] = s;
            dirs.push(v);
        }
    }
    if (2..=3).contains(&d) {
        let c = 1.0 / (d as f64).sqrt();
        for mask in 0..(1u32 << d) {
            dirs.push(
                (0..d)
                    .map(|k| if mask & (1 << k) != 0 { -c } else { c })
                    .collect(),
            );
        }
    }
    dirs
}

/// Joint misreport proposals for `coalition` at `profile`.
fn candidates(
    cfg: &SearchConfig,
    profile: &Profile,
    output: &Lottery,
    coalition: &[Agent],
    norm: &Norm,
    bounds: &Bounds,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<Point>> {
    let d = profile.dim();
    let m = coalition.len();
    let members: Vec<&Point> = coalition.iter().map(|a| profile.agent(*a)).collect();
    let all: Vec<&Point> = profile.points().iter().collect();
    let h = bounds.scale;
    let mut out: Vec<Vec<Point>> = Vec::new();
    let push_common =
        |out: &mut Vec<Vec<Point>>, y: Point| out.push(vec![bounds.clip(y.into_coords()); m]);

    if cfg.uses(CandidateKind::CommonPoint) {
        push_common(&mut out, mean_of(&members));
        push_common(&mut out, profile.mean());
        push_common(&mut out, output.centroid());
        for atom in output.points() {
            push_common(&mut out, atom.clone());
        }
        push_common(
            &mut out,
            coordwise(&members, |c| {
                c.iter().copied().fold(f64::INFINITY, f64::min)
            }),
        );
        push_common(
            &mut out,
            coordwise(&members, |c| {
                c.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }),
        );
        push_common(
            &mut out,
            coordwise(&members, |c| {
                c.sort_by(f64::total_cmp);
                c[(c.len() - 1) / 2]
            }),
        );
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                push_common(&mut out, a.midpoint(b));
            }
        }
        for p in &all {
            push_common(&mut out, (*p).clone());
        }
        if m >= 2 {
            let sub =
                Profile::new(members.iter().map(|p| (*p).clone()).collect()).expect("nonempty");
            if let Ok(o) = objectives::opt_social_cost(&sub, norm, 500) {
                push_common(&mut out, o.point);
            }
        }
    }
    if cfg.uses(CandidateKind::SegmentPoints) {
        // every member slides toward (t > 0) or away from (t < 0) the same
        // anchor: another report, or the output centroid
        let mut anchors: Vec<Point> = all.iter().map(|p| (*p).clone()).collect();
        anchors.push(output.centroid());
        for anchor in &anchors {
            for t in [-1.0, -0.5, -0.1, 0.25, 0.5, 0.75, 1.0, 1.5] {
                out.push(
                    members
                        .iter()
                        .map(|x| bounds.clip(x.lerp(anchor, t).into_coords()))
                        .collect(),
                );
            }
        }
    }
    if cfg.uses(CandidateKind::GaussianJitter) {
        for sigma in [0.05 * h, 0.3 * h, h] {
            for _ in 0..4 {
                let shared = gauss(rng, d, sigma);
                out.push(
                    members
                        .iter()
                        .map(|x| {
                            let own = gauss(rng, d, 0.25 * sigma);
                            let v = x
                                .coords()
                                .iter()
                                .zip(&shared)
                                .zip(own)
                                .map(|((a, b), c)| a + b + c);
                            bounds.clip(v.collect())
                        })
                        .collect(),
                );
            }
        }
    }
    if cfg.uses(CandidateKind::GridNearSupport) {
        for atom in output.points() {
            for dir in directions(d) {
                for s in [0.125 * h, 0.5 * h] {
                    let y: Vec<f64> = atom
                        .coords()
                        .iter()
                        .zip(&dir)
                        .map(|(a, u)| a + s * u)
                        .collect();
                    out.push(vec![bounds.clip(y); m]);
                }
            }
        }
    }
    if cfg.uses(CandidateKind::AxisSteps) {
        for dir in directions(d) {
            for s in [0.25 * h, h] {
                out.push(
                    members
                        .iter()
                        .map(|x| {
                            bounds.clip(
                                x.coords()
                                    .iter()
                                    .zip(&dir)
                                    .map(|(a, u)| a + s * u)
                                    .collect(),
                            )
                        })
                        .collect(),
                );
            }
        }
    }
    out
}

/// Costs of the coalition members under the output at `reports`.
struct Game<'a, M: ?Sized> {
    mech: &'a M,
    norm: &'a Norm,
    profile: &'a Profile,
    coalition: &'a [Agent],
    truthful: Vec<f64>,
    evals: usize,
}

impl<'a, M: Mechanism + ?Sized> Game<'a, M> {
    fn new(
        mech: &'a M,
        norm: &'a Norm,
        profile: &'a Profile,
        coalition: &'a [Agent],
        out: &Lottery,
    ) -> Self {
        let truthful = coalition
            .iter()
            .map(|a| out.expected_distance(profile.agent(*a), norm))
            .collect();
        Game {
            mech,
            norm,
            profile,
            coalition,
            truthful,
            evals: 0,
        }
    }

    /// Largest member delta (cost after − cost before), scaled so the
    /// strict margin is one unit; negative means everyone gains.
    fn worst_delta(&mut self, reports: &[Point]) -> f64 {
        self.evals += 1;
        let Ok(out) = self.mech.apply(
            &self.profile.with_reports(self.coalition, reports),
            self.norm,
        ) else {
            return f64::INFINITY;
        };
        self.coalition
            .iter()
            .zip(&self.truthful)
            .map(|(a, before)| {
                let after = out.expected_distance(self.profile.agent(*a), self.norm);
                (after - before) / tol::scaled(tol::STRICT, *before)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Compass search over the joint misreport, halving the step on failure.
fn refine<M: Mechanism + ?Sized>(
    game: &mut Game<'_, M>,
    start: Vec<Point>,
    start_val: f64,
    bounds: &Bounds,
    budget: usize,
) -> (Vec<Point>, f64) {
    let d = game.profile.dim();
    let dirs = directions(d);
    let mut best = (start, start_val);
    let mut step = bounds.scale / 4.0;
    let stop = game.evals + budget;
    while step > 1e-7 * bounds.scale && game.evals < stop {
        let mut improved = false;
        'outer: for member in 0..best.0.len() {
            for dir in &dirs {
                if game.evals >= stop {
                    break 'outer;
                }
                let mut trial = best.0.clone();
                let moved = trial[member]
                    .coords()
                    .iter()
                    .zip(dir)
                    .map(|(a, u)| a + step * u)
                    .collect();
                trial[member] = bounds.clip(moved);
                let v = game.worst_delta(&trial);
                if v < best.1 {
                    best = (trial, v);
                    improved = true;
                }
            }
            // shift the whole coalition together
            for dir in &dirs {
                if game.evals >= stop || best.0.len() < 2 {
                    break;
                }
                let trial: Vec<Point> = best
                    .0
                    .iter()
                    .map(|p| {
                        bounds.clip(
                            p.coords()
                                .iter()
                                .zip(dir)
                                .map(|(a, u)| a + step * u)
                                .collect(),
                        )
                    })
                    .collect();
                let v = game.worst_delta(&trial);
                if v < best.1 {
                    best = (trial, v);
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best
}

/// The best joint misreport for one coalition at one profile, if it is a
/// validated violation.
#[allow(clippy::too_many_arguments)]
fn attack<M: Mechanism + ?Sized>(
    mech: &M,
    norm: &Norm,
    profile: &Profile,
    output: &Lottery,
    coalition: &[Agent],
    cfg: &SearchConfig,
    bounds: &Bounds,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(f64, Witness)>> {
    let mut game = Game::new(mech, norm, profile, coalition, output);
    let cands = candidates(cfg, profile, output, coalition, norm, bounds, rng);
    let mut scored: Vec<(f64, Vec<Point>)> = cands
        .into_iter()
        .map(|c| (game.worst_delta(&c), c))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, Vec<Point>)> = None;
    // refine the few most promising proposals
    let per = cfg.local_steps / 3;
    for (v, c) in scored.into_iter().take(3) {
        if !v.is_finite() {
            continue;
        }
        let (c, v) = if per > 0 {
            refine(&mut game, c, v, bounds, per)
        } else {
            (c, v)
        };
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, c));
        }
    }
    let Some((v, reports)) = best else {
        return Ok(None);
    };
    if v >= -1.0 {
        return Ok(None);
    }
    let verdict = if coalition.len() == 1 {
        properties::check_strategyproof_at(mech, profile, coalition[0], &reports[0], norm)?
    } else {
        properties::check_group_strategyproof_at(mech, profile, coalition, &reports, norm)?
    };
    match verdict.witness {
        Some(w @ Witness::Manipulation(_)) if verdict.failed() => {
            let Witness::Manipulation(ref m) = w else {
                unreachable!()
            };
            if m.validate(mech, norm)? {
                Ok(Some((m.margin(), w)))
            } else {
                Ok(None)
            }
        }
        _ => Ok(None),
    }
}

fn coalitions(n: usize, min: usize, max: usize) -> Vec<Vec<Agent>> {
    let max = max.min(n);
    let mut out = Vec::new();
    for size in min..=max {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&k| Agent::from_index(k)).collect());
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

fn merge_witnesses(found: Vec<Option<(f64, Witness)>>) -> Option<Witness> {
    found
        .into_iter()
        .flatten()
        .map(|(m, w)| {
            let key = serde_json::to_string(&w).unwrap_or_default();
            (m, key, w)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .map(|(_, _, w)| w)
}

fn manipulation_search<M: Mechanism + ?Sized>(
    mech: &M,
    norm: &Norm,
    n: usize,
    d: usize,
    cfg: &SearchConfig,
    sizes: (usize, usize),
) -> Result<Option<Witness>> {
    cfg.validate()?;
    norm.check_dim(d)?;
    if n < mech.min_agents() {
        return Err(Error::TooFewAgents {
            needed: mech.min_agents(),
            got: n,
        });
    }
    let structured = families::structured(n, d);
    let groups = coalitions(n, sizes.0, sizes.1);
    let found: Vec<Option<(f64, Witness)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| -> Result<Option<(f64, Witness)>> {
            let mut rng = task_rng(cfg.rng_seed, r as u64);
            let profile = start_profile(&structured, &mut rng, r, n, d);
            let output = mech.apply(&profile, norm)?;
            let bounds = Bounds::new(&profile, cfg.bounding_scale);
            let mut best: Option<(f64, Witness)> = None;
            for coalition in &groups {
                if let Some((m, w)) = attack(
                    mech, norm, &profile, &output, coalition, cfg, &bounds, &mut rng,
                )? {
                    if best.as_ref().is_none_or(|b| m < b.0) {
                        best = Some((m, w));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(merge_witnesses(found))
}

/// Searches for a single agent that strictly gains by misreporting.
pub fn search_sp_violation<M: Mechanism + ?Sized>(
    mech: &M,
    norm: &Norm,
    n: usize,
    d: usize,
    config: &SearchConfig,
) -> Result<Option<Witness>> {
    manipulation_search(mech, norm, n, d, config, (1, 1))
}

/// Searches for a coalition (of at most `coalition_max_size` agents) whose
/// joint misreport strictly helps every member.
pub fn search_gsp_violation<M: Mechanism + ?Sized>(
    mech: &M,
    norm: &Norm,
    n: usize,
    d: usize,
    config: &SearchConfig,
) -> Result<Option<Witness>> {
    manipulation_search(
        mech,
        norm,
        n,
        d,
        config,
        (1, config.coalition_max_size.max(1)),
    )
}

/// Budget for the optimum inside the hill-climb; the winner is re-certified
/// with [`objectives::DEFAULT_OPT_BUDGET`].
const CLIMB_OPT_BUDGET: usize = 3_000;

fn ratio_at<M: Mechanism + ?Sized>(
    mech: &M,
    profile: &Profile,
    norm: &Norm,
    obj: Objective,
    budget: usize,
) -> Option<ApproxRatio> {
    objectives::approx_ratio_with_budget(mech, profile, norm, obj, budget).ok()
}

/// Hill-climbs the approximation ratio over agent locations and returns the
/// worst profile found with its certified ratio.
///
/// The reported `ratio` is `cost / value` where `value` is attained by the
/// returned optimum point, so it never exceeds the true ratio of that
/// profile; `hi` bounds the true ratio from above.
pub fn search_worst_ratio<M: Mechanism + ?Sized>(
    mech: &M,
    norm: &Norm,
    obj: Objective,
    n: usize,
    d: usize,
    config: &SearchConfig,
) -> Result<(Profile, ApproxRatio)> {
    config.validate()?;
    norm.check_dim(d)?;
    if n < mech.min_agents() {
        return Err(Error::TooFewAgents {
            needed: mech.min_agents(),
            got: n,
        });
    }
    let structured = families::structured(n, d);
    let dirs = directions(d);
    let results: Vec<Option<(Profile, f64)>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_rng(config.rng_seed, r as u64);
            let mut profile = start_profile(&structured, &mut rng, r, n, d);
            let mut value = ratio_at(mech, &profile, norm, obj, CLIMB_OPT_BUDGET)?.ratio;
            let mut evals = 1;
            let mut step = profile.diameter(norm).0.max(1e-3) / 4.0;
            while step >= 1e-7 && evals < config.local_steps {
                let mut improved = false;
                'sweep: for i in 0..n {
                    for dir in &dirs {
                        if evals >= config.local_steps {
                            break 'sweep;
                        }
                        let x = profile.points()[i].coords();
                        let moved =
                            Point::from_raw(x.iter().zip(dir).map(|(a, u)| a + step * u).collect());
                        let trial = profile.with_report(Agent::from_index(i), moved);
                        evals += 1;
                        if let Some(q) = ratio_at(mech, &trial, norm, obj, CLIMB_OPT_BUDGET) {
                            // ignore rounding-level gains so plateaus keep their first profile
                            if q.ratio > value + 1e-12 * (1.0 + value) {
                                profile = trial;
                                value = q.ratio;
                                improved = true;
                            }
                        }
                    }
                }
                if !improved {
                    step /= 2.0;
                }
            }
            Some((profile, value))
        })
        .collect();
    let mut best: Option<(Profile, f64)> = None;
    for (p, v) in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| v > b.1 + 1e-12 * (1.0 + b.1)) {
            best = Some((p, v));
        }
    }
    let (profile, _) = best.ok_or_else(|| {
        Error::Precondition("every sampled profile had a zero optimum and nonzero cost".into())
    })?;
    let ratio = objectives::approx_ratio(mech, &profile, norm, obj)?;
    Ok((profile, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::MechanismSpec;
    use crate::properties::Manipulation;

    /// Degenerate at the average report: the textbook manipulable rule.
    struct Mean;

    impl Mechanism for Mean {
        fn apply(&self, profile: &Profile, _norm: &Norm) -> Result<Lottery> {
            Ok(Lottery::degenerate(profile.mean()))
        }
        fn min_agents(&self) -> usize {
            2
        }
        fn label(&self) -> String {
            "mean".into()
        }
    }

    fn cfg(restarts: usize) -> SearchConfig {
        SearchConfig::default().with_restarts(restarts).with_seed(7)
    }

    #[test]
    fn mean_rule_is_manipulable() {
        let w = search_sp_violation(&Mean, &Norm::euclidean(), 2, 2, &cfg(4)).unwrap();
        let Some(Witness::Manipulation(m)) = w else {
            panic!("expected a witness")
        };
        assert!(m.validate(&Mean, &Norm::euclidean()).unwrap());
        assert!(m.margin() < 0.0);
    }

    #[test]
    fn mean_rule_exaggeration_by_hand() {
        let p = Profile::from_coords(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let v = properties::check_strategyproof_at(
            &Mean,
            &p,
            Agent(1),
            &Point::from([-1.0, 0.0]),
            &Norm::euclidean(),
        )
        .unwrap();
        assert!(v.failed());
        let Some(Witness::Manipulation(m)) = v.witness else {
            panic!()
        };
        assert_eq!(m.per_agent_delta[0].cost_before, 0.5);
        assert_eq!(m.per_agent_delta[0].cost_after, 0.0);
    }

    #[test]
    fn dictator_and_rand_center_resist_single_agents() {
        let l2 = Norm::euclidean();
        assert!(
            search_sp_violation(&MechanismSpec::Dictator(Agent(1)), &l2, 3, 2, &cfg(16))
                .unwrap()
                .is_none()
        );
        assert!(
            search_sp_violation(&MechanismSpec::RandCenter, &l2, 3, 2, &cfg(24))
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn coordinate_median_coalition_found() {
        let mut c = cfg(12);
        c.coalition_max_size = 3;
        let w = search_gsp_violation(&MechanismSpec::CoordinateMedian, &Norm::l1(), 5, 3, &c)
            .unwrap()
            .expect("coalition witness");
        let Witness::Manipulation(m) = w else {
            panic!()
        };
        assert!(m
            .validate(&MechanismSpec::CoordinateMedian, &Norm::l1())
            .unwrap());
    }

    /// Brute force over one common misreport for agents {2, 3} on a grid,
    /// independent of the search's candidate generators.
    fn common_point_oracle(profile: &Profile, norm: &Norm) -> Option<Manipulation> {
        let mech = MechanismSpec::RandCenter;
        let before = mech.apply(profile, norm).unwrap();
        let x = profile.agent(Agent(2)).clone();
        let c0 = before.expected_distance(&x, norm);
        for i in -40..=40 {
            for j in -40..=40 {
                let y = Point::from([i as f64 * 0.25, j as f64 * 0.25]);
                let after = mech
                    .apply(
                        &profile.with_reports(&[Agent(2), Agent(3)], &[y.clone(), y.clone()]),
                        norm,
                    )
                    .unwrap();
                let c1 = after.expected_distance(&x, norm);
                if c1 < c0 - 1e-6 {
                    return Some(Manipulation {
                        profile: profile.clone(),
                        coalition: vec![Agent(2), Agent(3)],
                        misreports: vec![y.clone(), y],
                        per_agent_delta: vec![],
                    });
                }
            }
        }
        None
    }

    #[test]
    fn rand_center_colocated_pair_matches_oracle() {
        // two agents sharing a location: moving their common report by v
        // costs them ‖v‖/n on their own atoms and gains at most the same on
        // the mean, so no common misreport strictly helps
        let p = Profile::from_coords(&[[0.0, 0.0], [6.0, 0.0], [6.0, 0.0]]).unwrap();
        let l2 = Norm::euclidean();
        assert!(common_point_oracle(&p, &l2).is_none());
        let out = MechanismSpec::RandCenter.apply(&p, &l2).unwrap();
        let bounds = Bounds::new(&p, 2.0);
        let mut rng = task_rng(1, 0);
        let found = attack(
            &MechanismSpec::RandCenter,
            &l2,
            &p,
            &out,
            &[Agent(2), Agent(3)],
            &SearchConfig::default(),
            &bounds,
            &mut rng,
        )
        .unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn rand_center_separated_pair_can_collude() {
        // x1, x2 pull the far third agent's weight in the mean toward them by
        // both reporting below the segment between them
        let p = Profile::from_coords(&[[-1.0, 0.0], [1.0, 0.0], [0.0, 10.0]]).unwrap();
        let l2 = Norm::euclidean();
        let y = Point::from([0.0, -0.5]);
        let v = properties::check_group_strategyproof_at(
            &MechanismSpec::RandCenter,
            &p,
            &[Agent(1), Agent(2)],
            &[y.clone(), y],
            &l2,
        )
        .unwrap();
        assert!(v.failed(), "{v:?}");
        let w = search_gsp_violation(&MechanismSpec::RandCenter, &l2, 3, 2, &cfg(16)).unwrap();
        assert!(w.is_some());
    }

    #[test]
    fn searches_are_deterministic() {
        let l2 = Norm::euclidean();
        let a = search_gsp_violation(&MechanismSpec::RandCenter, &l2, 3, 2, &cfg(8)).unwrap();
        let b = search_gsp_violation(&MechanismSpec::RandCenter, &l2, 3, 2, &cfg(8)).unwrap();
        assert_eq!(a, b);
        let mut c = cfg(6);
        c.local_steps = 60;
        let r1 = search_worst_ratio(
            &MechanismSpec::RandMed,
            &l2,
            Objective::SocialCost,
            3,
            2,
            &c,
        )
        .unwrap();
        let r2 = search_worst_ratio(
            &MechanismSpec::RandMed,
            &l2,
            Objective::SocialCost,
            3,
            2,
            &c,
        )
        .unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn worst_ratio_hits_known_extremes() {
        let l2 = Norm::euclidean();
        let mut c = cfg(8);
        c.local_steps = 50;
        let (_, r) = search_worst_ratio(
            &MechanismSpec::RandMed,
            &l2,
            Objective::SocialCost,
            4,
            2,
            &c,
        )
        .unwrap();
        assert!((r.ratio - 2.0).abs() < 1e-9, "{r:?}");
        let (_, r) = search_worst_ratio(
            &MechanismSpec::RandCenter,
            &l2,
            Objective::MaxCost,
            3,
            2,
            &c,
        )
        .unwrap();
        assert!((r.ratio - 5.0 / 3.0).abs() < 1e-9, "{r:?}");
        let (_, r) = search_worst_ratio(
            &MechanismSpec::Dictator(Agent(1)),
            &l2,
            Objective::MaxCost,
            2,
            2,
            &c,
        )
        .unwrap();
        assert!((r.ratio - 2.0).abs() < 1e-9, "{r:?}");
        assert!(r.ratio <= r.hi);
    }

    #[test]
    fn coalition_enumeration() {
        assert_eq!(coalitions(4, 1, 2).len(), 4 + 6);
        assert_eq!(coalitions(5, 3, 3).len(), 10);
        assert_eq!(coalitions(2, 1, 5).len(), 3);
    }
}
