//! Property checkers returning pass / fail-with-witness verdicts.
//!
//! Margins are "worst slack observed"; negative means the property was
//! violated. A verdict passes when the margin is at least `-1e-9`, fails
//! when it is below `-1e-6`, and is inconclusive in between. Both
//! thresholds scale with `1 + magnitude` of the compared quantities so the
//! band means the same thing for profiles of any size.
//!
//! Checkers never assume the property they test; they only evaluate the
//! mechanism on the inputs they are handed, so a verdict is reproducible
//! from those inputs alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Agent, Lottery, Norm, Point, Profile};
use crate::mechanisms::Mechanism;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn classify(margin: f64, magnitude: f64) -> Status {
        if margin >= -tol::scaled(tol::GEOM, magnitude) {
            Status::Pass
        } else if margin < -tol::scaled(tol::STRICT, magnitude) {
            Status::Fail
        } else {
            Status::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: String,
    pub status: Status,
    /// Worst slack observed; negative means violated.
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyVerdict {
    fn new(property: &str, margin: f64, magnitude: f64, witness: impl FnOnce() -> Witness) -> Self {
        let status = Status::classify(margin, magnitude);
        PropertyVerdict {
            property: property.to_string(),
            status,
            // normalizes -0.0
            margin: margin + 0.0,
            witness: (status == Status::Fail).then(witness),
            note: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Verdict for a property that was not evaluated on these inputs.
    pub fn skipped(property: &str, why: &str) -> Self {
        PropertyVerdict {
            property: property.to_string(),
            status: Status::Pass,
            margin: 0.0,
            witness: None,
            note: Some(format!("skipped: {why}")),
        }
    }
}

/// One coalition member's expected distance before and after misreporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentDelta {
    pub agent: Agent,
    pub cost_before: f64,
    pub cost_after: f64,
}

/// A recorded misreport by a coalition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manipulation {
    /// Truthful profile.
    pub profile: Profile,
    pub coalition: Vec<Agent>,
    /// One per coalition member, in coalition order.
    pub misreports: Vec<Point>,
    pub per_agent_delta: Vec<AgentDelta>,
}

impl Manipulation {
    /// Recomputes every member's cost from scratch. `Ok(true)` iff every
    /// member strictly improves by more than the strict margin.
    pub fn validate<M: Mechanism + ?Sized>(&self, mech: &M, norm: &Norm) -> Result<bool> {
        if self.coalition.is_empty() || self.coalition.len() != self.misreports.len() {
            return Ok(false);
        }
        let before = mech.apply(&self.profile, norm)?;
        let after = mech.apply(
            &self.profile.with_reports(&self.coalition, &self.misreports),
            norm,
        )?;
        for a in &self.coalition {
            let x = self.profile.agent(*a);
            let b = crate::geometry::expected_distance(x, &before, norm)?;
            let c = crate::geometry::expected_distance(x, &after, norm)?;
            if c >= b - tol::scaled(tol::STRICT, b) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Worst (largest) `cost_after − cost_before` across members.
    pub fn margin(&self) -> f64 {
        self.per_agent_delta
            .iter()
            .map(|d| d.cost_after - d.cost_before)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Manipulation(Manipulation),
    /// `apply(profile + shift)` differs from `apply(profile) + shift`.
    Translation {
        profile: Profile,
        shift: Point,
        expected: Lottery,
        actual: Lottery,
    },
    /// An output that breaks a structural property.
    Output {
        profile: Profile,
        output: Lottery,
        detail: String,
    },
    /// An agent's cost jumps by more than the distance it moved.
    Perturbation {
        profile: Profile,
        agent: Agent,
        report: Point,
        mu_before: f64,
        mu_after: f64,
        moved: f64,
    },
}

fn member_costs<M: Mechanism + ?Sized>(
    mech: &M,
    profile: &Profile,
    coalition: &[Agent],
    misreports: &[Point],
    norm: &Norm,
) -> Result<Vec<AgentDelta>> {
    let before = mech.apply(profile, norm)?;
    let after = mech.apply(&profile.with_reports(coalition, misreports), norm)?;
    Ok(coalition
        .iter()
        .map(|a| {
            let x = profile.agent(*a);
            AgentDelta {
                agent: *a,
                cost_before: before.expected_distance(x, norm),
                cost_after: after.expected_distance(x, norm),
            }
        })
        .collect())
}

fn check_coalition(profile: &Profile, coalition: &[Agent], misreports: &[Point]) -> Result<()> {
    if coalition.is_empty() {
        return Err(Error::Precondition("coalition must be nonempty".into()));
    }
    if coalition.len() != misreports.len() {
        return Err(Error::Precondition(format!(
            "{} misreports for a coalition of {}",
            misreports.len(),
            coalition.len()
        )));
    }
    for (k, a) in coalition.iter().enumerate() {
        a.check(profile.n())?;
        if coalition[..k].contains(a) {
            return Err(Error::Precondition(format!("agent {a} listed twice")));
        }
        if misreports[k].dim() != profile.dim() {
            return Err(Error::DimensionMismatch {
                expected: profile.dim(),
                got: misreports[k].dim(),
            });
        }
    }
    Ok(())
}

/// Agent `agent` reporting `misreport` instead of the truth.
/// Margin: cost when misreporting minus cost when truthful.
pub fn check_strategyproof_at<M: Mechanism + ?Sized>(
    mech: &M,
    profile: &Profile,
    agent: Agent,
    misreport: &Point,
    norm: &Norm,
) -> Result<PropertyVerdict> {
    let coalition = [agent];
    let reports = [misreport.clone()];
    check_coalition(profile, &coalition, &reports)?;
    let deltas = member_costs(mech, profile, &coalition, &reports, norm)?;
    let d = &deltas[0];
    let margin = d.cost_after - d.cost_before;
    Ok(PropertyVerdict::new(
        "strategyproofness",
        margin,
        d.cost_before,
        || {
            Witness::Manipulation(Manipulation {
                profile: profile.clone(),
                coalition: coalition.to_vec(),
                misreports: reports.to_vec(),
                per_agent_delta: deltas.clone(),
            })
        },
    ))
}

/// Coalition `coalition` jointly reporting `misreports`. Fails only when
/// every member strictly gains; the margin is the smallest gain's negation.
pub fn check_group_strategyproof_at<M: Mechanism + ?Sized>(
    mech: &M,
    profile: &Profile,
    coalition: &[Agent],
    misreports: &[Point],
    norm: &Norm,
) -> Result<PropertyVerdict> {
    check_coalition(profile, coalition, misreports)?;
    let deltas = member_costs(mech, profile, coalition, misreports, norm)?;
    let manip = Manipulation {
        profile: profile.clone(),
        coalition: coalition.to_vec(),
        misreports: misreports.to_vec(),
        per_agent_delta: deltas,
    };
    let margin = manip.margin();
    let magnitude = manip
        .per_agent_delta
        .iter()
        .map(|d| d.cost_before)
        .fold(0.0, f64::max);
    Ok(PropertyVerdict::new(
        "group_strategyproofness",
        margin,
        magnitude,
        || Witness::Manipulation(manip.clone()),
    ))
}

/// `n` agents all reporting `z` must yield the degenerate lottery at `z`.
pub fn check_unanimity<M: Mechanism + ?Sized>(
    mech: &M,
    norm: &Norm,
    samples: &[Point],
    n: usize,
) -> Result<PropertyVerdict> {
    let mut worst = (0.0_f64, None::<(Profile, Lottery)>);
    let mut magnitude = 0.0_f64;
    for z in samples {
        let profile = Profile::unanimous(z, n)?;
        let out = mech.apply(&profile, norm)?;
        let dev = out.discrepancy(&Lottery::degenerate(z.clone()));
        magnitude = magnitude.max(z.max_abs());
        if dev > worst.0 || worst.1.is_none() {
            worst = (dev.max(worst.0), Some((profile, out)));
        }
    }
    let margin = -worst.0;
    Ok(PropertyVerdict::new("unanimity", margin, magnitude, || {
        let (profile, output) = worst.1.clone().expect("at least one sample");
        Witness::Output {
            profile,
            output,
            detail: "unanimous profile did not yield its common point".into(),
        }
    }))
}

/// Every profile shifted by every shift.
pub fn check_translation_invariance<M: Mechanism + ?Sized>(
    mech: &M,
    norm: &Norm,
    profiles: &[Profile],
    shifts: &[Point],
) -> Result<PropertyVerdict> {
    let mut worst = 0.0_f64;
    let mut witness = None;
    let mut magnitude = 0.0_f64;
    for profile in profiles {
        let base = mech.apply(profile, norm)?;
        for shift in shifts {
            let shifted = profile.translate(shift);
            let expected = base.translate(shift);
            let actual = mech.apply(&shifted, norm)?;
            let gap = expected.discrepancy(&actual);
            magnitude = magnitude.max(shift.max_abs()).max(
                profile
                    .points()
                    .iter()
                    .map(Point::max_abs)
                    .fold(0.0, f64::max),
            );
            if gap > worst {
                worst = gap;
                witness = Some(Witness::Translation {
                    profile: profile.clone(),
                    shift: shift.clone(),
                    expected,
                    actual,
                });
            }
        }
    }
    Ok(PropertyVerdict::new(
        "translation_invariance",
        -worst,
        magnitude,
        || witness.expect("failure implies a recorded witness"),
    ))
}

/// If the output is deterministic at `y`, moving any set of agents onto `y`
/// must keep it at `y`. Profiles with up to 12 agents enumerate every
/// subset; larger ones use singletons and prefixes.
pub fn check_uncompromising<M: Mechanism + ?Sized>(
    mech: &M,
    profile: &Profile,
    norm: &Norm,
) -> Result<PropertyVerdict> {
    let out = mech.apply(profile, norm)?;
    if !out.is_degenerate() {
        return Ok(PropertyVerdict::skipped(
            "uncompromising",
            "output is not deterministic",
        ));
    }
    let y = out.atoms()[0].point.clone();
    let n = profile.n();
    let subsets: Vec<Vec<Agent>> = if n <= 12 {
        (1u32..(1 << n))
            .map(|mask| {
                (0..n)
                    .filter(|k| mask & (1 << k) != 0)
                    .map(Agent::from_index)
                    .collect()
            })
            .collect()
    } else {
        let mut v: Vec<Vec<Agent>> = (0..n).map(|k| vec![Agent::from_index(k)]).collect();
        v.extend((2..=n).map(|m| (0..m).map(Agent::from_index).collect()));
        v
    };
    let target = Lottery::degenerate(y.clone());
    let mut worst = 0.0_f64;
    let mut witness = None;
    for subset in subsets {
        let moved = profile.with_reports(&subset, &vec![y.clone(); subset.len()]);
        let after = mech.apply(&moved, norm)?;
        let gap = after.discrepancy(&target);
        if gap > worst {
            worst = gap;
            witness = Some(Witness::Output {
                profile: moved,
                output: after,
                detail: format!("agents moved onto the output {y} changed it"),
            });
        }
    }
    Ok(PropertyVerdict::new(
        "uncompromising",
        -worst,
        y.max_abs(),
        || witness.expect("failure implies a recorded witness"),
    ))
}

/// `|μ(x_i) − μ(x_i')| ≤ ‖x_i − x_i'‖` where `μ(x)` is the expected distance
/// from `x` to the output when agent `agent` reports `x` (others fixed).
pub fn check_cost_continuity<M: Mechanism + ?Sized>(
    mech: &M,
    profile: &Profile,
    agent: Agent,
    perturbations: &[Point],
    norm: &Norm,
) -> Result<PropertyVerdict> {
    agent.check(profile.n())?;
    let x = profile.agent(agent).clone();
    let mu = |p: &Point| -> Result<f64> {
        let out = mech.apply(&profile.with_report(agent, p.clone()), norm)?;
        Ok(out.expected_distance(p, norm))
    };
    let base = mu(&x)?;
    let mut margin = f64::INFINITY;
    let mut magnitude = base;
    let mut witness = None;
    for p in perturbations {
        let other = mu(p)?;
        let moved = norm.dist(&x, p);
        let slack = moved - (base - other).abs();
        magnitude = magnitude.max(other);
        if slack < margin {
            margin = slack;
            witness = Some(Witness::Perturbation {
                profile: profile.clone(),
                agent,
                report: p.clone(),
                mu_before: base,
                mu_after: other,
                moved,
            });
        }
    }
    if perturbations.is_empty() {
        margin = 0.0;
    }
    Ok(PropertyVerdict::new(
        "cost_continuity",
        margin,
        magnitude,
        || witness.expect("failure implies a recorded witness"),
    ))
}

/// How far `p` is from lying on segment `ab`.
///
/// For strictly convex norms this is the betweenness excess
/// `‖a−p‖ + ‖p−b‖ − ‖a−b‖` under `norm`; otherwise betweenness does not
/// characterize the segment and the Euclidean excess is used instead.
pub fn segment_excess(a: &Point, b: &Point, p: &Point, norm: &Norm) -> f64 {
    let euclid;
    let n = if norm.is_strictly_convex() {
        norm
    } else {
        euclid = Norm::euclidean();
        &euclid
    };
    (n.dist(a, p) + n.dist(p, b) - n.dist(a, b)).max(0.0)
}

/// For every agent pair `(i, j)`, `i < j`: the worst segment excess of the
/// lottery's atoms on `x_i x_j`.
pub fn pair_excesses(lot: &Lottery, profile: &Profile, norm: &Norm) -> Vec<((Agent, Agent), f64)> {
    let pts = profile.points();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let worst = lot
                .points()
                .map(|p| segment_excess(&pts[i], &pts[j], p, norm))
                .fold(0.0, f64::max);
            out.push(((Agent::from_index(i), Agent::from_index(j)), worst));
        }
    }
    out
}

fn profile_magnitude(profile: &Profile, norm: &Norm) -> f64 {
    profile.diameter(norm).0
}

fn convexity_note(norm: &Norm) -> Option<String> {
    (!norm.is_strictly_convex()).then(|| {
        format!(
            "{norm} is not strictly convex; segment membership tested by Euclidean collinearity"
        )
    })
}

/// Deterministic output, or every atom on one segment `x_i x_j`.
pub fn check_support_segment<M: Mechanism + ?Sized>(
    mech: &M,
    profile: &Profile,
    norm: &Norm,
) -> Result<PropertyVerdict> {
    let out = mech.apply(profile, norm)?;
    if out.is_degenerate() {
        return Ok(PropertyVerdict {
            property: "support_segment".into(),
            status: Status::Pass,
            margin: 0.0,
            witness: None,
            note: Some("deterministic output".into()),
        });
    }
    let pairs = pair_excesses(&out, profile, norm);
    let (pair, best) = pairs
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or(((Agent(1), Agent(1)), f64::INFINITY));
    let margin = if best.is_finite() { -best } else { -1.0 };
    let mut v = PropertyVerdict::new(
        "support_segment",
        margin,
        profile_magnitude(profile, norm),
        || {
            Witness::Output {
            profile: profile.clone(),
            output: out.clone(),
            detail: format!(
                "support lies on no segment between two reports (closest pair ({}, {}) misses by {best:e})",
                pair.0, pair.1
            ),
        }
        },
    );
    let mut note = format!("closest pair ({}, {})", pair.0, pair.1);
    if let Some(c) = convexity_note(norm) {
        note.push_str("; ");
        note.push_str(&c);
    }
    v.note = Some(note);
    Ok(v)
}

/// One fixed pair `(i, j)` whose segment carries the support on every
/// sampled profile (deterministic outputs included).
pub fn check_2dictatorship<M: Mechanism + ?Sized>(
    mech: &M,
    profiles: &[Profile],
    norm: &Norm,
) -> Result<PropertyVerdict> {
    if profiles.len() < 2 {
        return Err(Error::Precondition(
            "2-dictatorship needs at least two profiles".into(),
        ));
    }
    let mut worst_by_pair: Vec<((Agent, Agent), f64, usize)> = Vec::new();
    let mut outputs = Vec::with_capacity(profiles.len());
    let mut magnitude = 0.0_f64;
    for (k, profile) in profiles.iter().enumerate() {
        let out = mech.apply(profile, norm)?;
        magnitude = magnitude.max(profile_magnitude(profile, norm));
        let ex = pair_excesses(&out, profile, norm);
        if worst_by_pair.is_empty() {
            worst_by_pair = ex.iter().map(|(p, e)| (*p, *e, k)).collect();
        } else {
            for (slot, (_, e)) in worst_by_pair.iter_mut().zip(&ex) {
                if *e > slot.1 {
                    slot.1 = *e;
                    slot.2 = k;
                }
            }
        }
        outputs.push(out);
    }
    let (pair, excess, at) = worst_by_pair
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or(((Agent(1), Agent(1)), 1.0, 0));
    let v = PropertyVerdict::new("two_dictatorship", -excess, magnitude, || Witness::Output {
        profile: profiles[at].clone(),
        output: outputs[at].clone(),
        detail: format!(
            "no fixed pair carries every output; best pair ({}, {}) misses here by {excess:e}",
            pair.0, pair.1
        ),
    });
    let note = format!("pair ({}, {})", pair.0, pair.1);
    Ok(v.with_note(match convexity_note(norm) {
        Some(c) => format!("{note}; {c}"),
        None => note,
    }))
}

/// Two-agent bound: with `δ = E‖f(x1, x2) − x1‖` and
/// `‖x2' − x2‖ < ‖x2 − x1‖`, `E‖f(x1, x2') − x1‖ ≤ δ / (1 − ‖x2' − x2‖/‖x2 − x1‖)`.
pub fn check_delta_bound<M: Mechanism + ?Sized>(
    mech: &M,
    x1: &Point,
    x2: &Point,
    x2_moved: &Point,
    norm: &Norm,
) -> Result<PropertyVerdict> {
    let profile = Profile::new(vec![x1.clone(), x2.clone()])?;
    profile.check_norm(norm)?;
    if x2_moved.dim() != x1.dim() {
        return Err(Error::DimensionMismatch {
            expected: x1.dim(),
            got: x2_moved.dim(),
        });
    }
    let r = norm.dist(x2, x1);
    let d = norm.dist(x2_moved, x2);
    if d.partial_cmp(&r) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Precondition(format!(
            "need ‖x2' − x2‖ < ‖x2 − x1‖, got {d} ≥ {r}"
        )));
    }
    let delta = mech.apply(&profile, norm)?.expected_distance(x1, norm);
    let bound = delta / (1.0 - d / r);
    let moved = Profile::new(vec![x1.clone(), x2_moved.clone()])?;
    let out = mech.apply(&moved, norm)?;
    let measured = out.expected_distance(x1, norm);
    let v = PropertyVerdict::new("delta_bound", bound - measured, bound, || Witness::Output {
        profile: moved.clone(),
        output: out.clone(),
        detail: format!("measured {measured} exceeds bound {bound} (delta {delta})"),
    });
    Ok(v.with_note(format!("delta {delta}, bound {bound}, measured {measured}")))
}
