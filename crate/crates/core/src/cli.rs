//! Command implementations behind the `facloc` binary.
//!
//! Each `cmd_*` function is a pure computation returning an [`Outcome`]:
//! the report, the text to print and the exit code. [`run`] adds argument
//! parsing and file I/O on top.
//!
//! Exit codes: 0 consistent, 1 a property contradicts what the mechanism's
//! analysis asserts, 2 usage or parse error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{Agent, Norm, Point, Profile};
use crate::mechanisms::{Mechanism, MechanismSpec};
use crate::objectives::{self, Objective, DEFAULT_OPT_BUDGET};
use crate::properties::{self, PropertyVerdict, Status};
use crate::report::{Expectation, ExperimentReport};
use crate::rng::{stream, task_rng};
use crate::scenarios;
use crate::search::{self, families, SearchConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub text: String,
    pub exit_code: i32,
    /// CSV companion output, for commands that produce a table.
    pub csv: Option<String>,
}

impl Outcome {
    pub(crate) fn new(report: ExperimentReport, text: String, exit_code: i32) -> Self {
        Outcome {
            report,
            text,
            exit_code,
            csv: None,
        }
    }
}

fn fmt_profile(p: &Profile) -> String {
    p.points()
        .iter()
        .map(Point::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Output, centroid, radius, both costs and both ratios against certified
/// optima.
pub fn cmd_evaluate(
    profile: &Profile,
    spec: &MechanismSpec,
    norm: &Norm,
    budget: usize,
) -> Result<Outcome> {
    let lot = spec.apply(profile, norm)?;
    let centroid = lot.centroid();
    let radius = lot.radius(norm);
    let mut r = ExperimentReport::new("evaluate", norm.to_string(), 0);
    r.spec = Some(spec.to_string());
    let mut text = String::new();
    let _ = writeln!(text, "profile  {}", fmt_profile(profile));
    let _ = writeln!(text, "output   {lot}");
    let _ = writeln!(text, "centroid {centroid}");
    let _ = writeln!(text, "radius   {radius}");
    r.objective_values.insert("radius".into(), radius);
    for obj in [Objective::MaxCost, Objective::SocialCost] {
        let c = objectives::cost(&lot, profile, norm, obj)?;
        let o = objectives::opt(profile, norm, obj, budget)?;
        let k = obj.short();
        r.objective_values.insert(k.into(), c);
        r.objective_values.insert(format!("opt_{k}"), o.value);
        r.objective_values
            .insert(format!("opt_{k}_gap"), o.certified_gap);
        let _ = write!(
            text,
            "{k}       {c}   opt {} at {} (gap {:e})",
            o.value, o.point, o.certified_gap
        );
        match objectives::ratio_from(obj, c, o) {
            Ok(q) => {
                r.objective_values.insert(format!("ratio_{k}"), q.ratio);
                let _ = writeln!(text, "   ratio {} in [{}, {}]", q.ratio, q.lo, q.hi);
            }
            Err(e) => {
                let _ = writeln!(text, "   ratio undefined: {e}");
            }
        }
    }
    r.notes.push(format!("centroid {centroid}"));
    r.profile = Some(profile.clone());
    r.output = Some(lot);
    Ok(Outcome::new(r, text, EXIT_OK))
}

/// What the analysis of `spec` asserts about each property, for `n` agents
/// under `norm`.
///
/// Claims whose proofs need `|v_0| ≤ ‖v‖` (the threshold mechanism) or
/// monotonicity (the coordinate median) are only asserted for the norms
/// where those hold.
pub fn expectations(
    spec: &MechanismSpec,
    norm: &Norm,
    n: usize,
    d: usize,
) -> BTreeMap<String, Expectation> {
    use Expectation::*;
    let plain_lp = norm.is_plain();
    let l1 = plain_lp && norm.p() == 1.0;
    let mut m = BTreeMap::new();
    let mut set = |k: &str, e: Expectation| {
        m.insert(k.to_string(), e);
    };
    match spec {
        MechanismSpec::Dictator(_) => {
            for k in [
                "unanimity",
                "translation_invariance",
                "strategyproofness",
                "group_strategyproofness",
                "support_segment",
                "two_dictatorship",
                "cost_continuity",
                "uncompromising",
            ] {
                set(k, Holds);
            }
        }
        MechanismSpec::RandMed => {
            for k in [
                "unanimity",
                "translation_invariance",
                "strategyproofness",
                "group_strategyproofness",
                "support_segment",
                "two_dictatorship",
                "cost_continuity",
            ] {
                set(k, Holds);
            }
            set("uncompromising", Unasserted);
        }
        MechanismSpec::RandCenter => {
            for k in [
                "unanimity",
                "translation_invariance",
                "strategyproofness",
                "cost_continuity",
            ] {
                set(k, Holds);
            }
            set(
                "group_strategyproofness",
                if n == 2 { Holds } else { Unasserted },
            );
            let off_segment = if n >= 3 { Fails } else { Unasserted };
            set("support_segment", off_segment);
            set("two_dictatorship", off_segment);
            set("uncompromising", Unasserted);
        }
        MechanismSpec::Separate2Dictator { .. } => {
            set("unanimity", Holds);
            set("translation_invariance", Fails);
            let claim = if plain_lp { Holds } else { Unasserted };
            set("strategyproofness", claim);
            set("group_strategyproofness", claim);
            set("cost_continuity", claim);
            set("support_segment", Holds);
            set("two_dictatorship", Unasserted);
            set("uncompromising", Unasserted);
        }
        MechanismSpec::CoordinateMedian => {
            set("unanimity", Holds);
            set("translation_invariance", Holds);
            set("support_segment", Holds);
            set("uncompromising", Holds);
            set("two_dictatorship", Unasserted);
            // each output coordinate is the agent's own coordinate clamped to
            // a range the others fix, so truth-telling is optimal coordinate
            // by coordinate under any monotone norm
            let claim = if norm.is_monotone() {
                Holds
            } else {
                Unasserted
            };
            set("strategyproofness", claim);
            set("cost_continuity", claim);
            let gsp = if l1 && d >= 3 && (5..=6).contains(&n) {
                Fails
            } else {
                Unasserted
            };
            set("group_strategyproofness", gsp);
        }
    }
    m
}

/// Keeps the verdict with the smallest margin; failures carry witnesses.
fn worst(acc: Option<PropertyVerdict>, v: PropertyVerdict) -> Option<PropertyVerdict> {
    match acc {
        None => Some(v),
        Some(a) if v.margin < a.margin => Some(v),
        keep => keep,
    }
}

fn gauss_point<R: Rng>(rng: &mut R, d: usize, sigma: f64) -> Point {
    Point::new(
        (0..d)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
    .expect("finite")
}

/// Search configuration for a total budget of mechanism evaluations.
pub fn search_config(seed: u64, budget: usize, local_steps: usize) -> SearchConfig {
    let local_steps = local_steps.max(1);
    SearchConfig {
        rng_seed: seed,
        restarts: (budget / local_steps).max(1),
        local_steps,
        ..SearchConfig::default()
    }
}

/// Runs every property checker on `spec` and compares against
/// [`expectations`].
pub fn cmd_check(
    spec: &MechanismSpec,
    norm: &Norm,
    n: usize,
    d: usize,
    seed: u64,
    budget: usize,
    config: Option<SearchConfig>,
) -> Result<Outcome> {
    norm.check_dim(d)?;
    if n < spec.min_agents() {
        return Err(Error::TooFewAgents {
            needed: spec.min_agents(),
            got: n,
        });
    }
    let mut rng = task_rng(stream(seed, 1), 0);
    let mut profiles = families::structured(n, d);
    let extra = (budget / 1000).clamp(4, 40);
    for _ in 0..extra {
        profiles.push(families::random(&mut rng, n, d));
    }

    let mut verdicts = Vec::new();
    let zs: Vec<Point> = std::iter::once(Point::zeros(d))
        .chain((0..99).map(|_| gauss_point(&mut rng, d, 3.0)))
        .collect();
    verdicts.push(properties::check_unanimity(spec, norm, &zs, n)?);

    let mut shifts = Vec::new();
    for k in 0..d {
        for s in [3.0, -3.0] {
            let mut v = vec![0.0; d];
            v[k] = s;
            shifts.push(Point::new(v)?);
        }
    }
    shifts.push(gauss_point(&mut rng, d, 2.0));
    verdicts.push(properties::check_translation_invariance(
        spec, norm, &profiles, &shifts,
    )?);

    let cfg = config.unwrap_or_else(|| {
        let mut c = search_config(seed, budget, 200);
        c.restarts = c.restarts.clamp(4, 64);
        c
    });
    let sp = search::search_sp_violation(spec, norm, n, d, &cfg)?;
    verdicts.push(search_verdict("strategyproofness", sp, cfg.restarts));
    let gsp = search::search_gsp_violation(spec, norm, n, d, &cfg)?;
    verdicts.push(search_verdict("group_strategyproofness", gsp, cfg.restarts));

    let mut seg = None;
    let mut cont = None;
    let mut unc = None;
    for p in &profiles {
        seg = worst(seg, properties::check_support_segment(spec, p, norm)?);
        let scale = p.diameter(norm).0.max(1e-3);
        for i in 0..n {
            let agent = Agent::from_index(i);
            let x = p.agent(agent);
            let perturb: Vec<Point> = (0..8)
                .map(|k| x.add(&gauss_point(&mut rng, d, scale * [0.01, 0.3][k % 2])))
                .collect();
            cont = worst(
                cont,
                properties::check_cost_continuity(spec, p, agent, &perturb, norm)?,
            );
        }
        let u = properties::check_uncompromising(spec, p, norm)?;
        if u.note.as_deref().is_none_or(|s| !s.starts_with("skipped")) {
            unc = worst(unc, u);
        }
    }
    verdicts.extend(seg);
    verdicts.push(properties::check_2dictatorship(spec, &profiles, norm)?);
    verdicts.extend(cont);
    verdicts.push(unc.unwrap_or_else(|| {
        PropertyVerdict::skipped(
            "uncompromising",
            "no sampled profile had a deterministic output",
        )
    }));

    let mut r = ExperimentReport::new("check", norm.to_string(), seed);
    r.spec = Some(spec.to_string());
    r.expectations = expectations(spec, norm, n, d);
    for v in &verdicts {
        if let Some(w) = &v.witness {
            r.witnesses.push(w.clone());
        }
    }
    r.verdicts = verdicts;
    r.notes.push(format!(
        "n={n} d={d}; {} profiles; search restarts {} x {} steps",
        profiles.len(),
        cfg.restarts,
        cfg.local_steps
    ));
    let exit = if r.contradictions().is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    let text = r.summary();
    Ok(Outcome::new(r, text, exit))
}

fn search_verdict(
    property: &str,
    found: Option<properties::Witness>,
    restarts: usize,
) -> PropertyVerdict {
    match found {
        Some(w) => {
            let margin = match &w {
                properties::Witness::Manipulation(m) => m.margin(),
                _ => f64::NEG_INFINITY,
            };
            PropertyVerdict {
                property: property.into(),
                status: Status::Fail,
                margin,
                witness: Some(w),
                note: Some("validated witness".into()),
            }
        }
        None => PropertyVerdict {
            property: property.into(),
            status: Status::Pass,
            margin: 0.0,
            witness: None,
            note: Some(format!("no witness in {restarts} restarts")),
        },
    }
}

/// Worst-case bound for `spec` from its analysis, when one is known.
pub fn theoretical_bound(spec: &MechanismSpec, obj: Objective, n: usize) -> Option<f64> {
    let n_f = n as f64;
    match (spec, obj) {
        (MechanismSpec::Dictator(_), Objective::MaxCost) => Some(2.0),
        (MechanismSpec::Dictator(_), Objective::SocialCost) => Some(n_f - 1.0),
        (MechanismSpec::RandMed, Objective::MaxCost) => Some(if n == 2 { 1.5 } else { 2.0 }),
        (MechanismSpec::RandMed, Objective::SocialCost) => Some(n_f / 2.0),
        (MechanismSpec::RandCenter, Objective::MaxCost) => Some(2.0 - 1.0 / n_f),
        _ => None,
    }
}

/// Worst approximation ratio found by search, with the certified interval
/// and the known bound.
#[allow(clippy::too_many_arguments)]
pub fn cmd_ratio(
    spec: &MechanismSpec,
    norm: &Norm,
    obj: Objective,
    n: usize,
    d: usize,
    seed: u64,
    budget: usize,
    config: Option<SearchConfig>,
) -> Result<Outcome> {
    let cfg = config.unwrap_or_else(|| {
        let mut c = search_config(seed, budget, 250);
        c.restarts = c.restarts.max(families::structured(n, d).len());
        c
    });
    let (profile, q) = search::search_worst_ratio(spec, norm, obj, n, d, &cfg)?;
    let mut r = ExperimentReport::new("ratio", norm.to_string(), seed);
    r.spec = Some(spec.to_string());
    r.objective_values.insert(obj.short().into(), q.cost);
    r.objective_values
        .insert(format!("opt_{}", obj.short()), q.opt.value);
    r.objective_values.insert("ratio".into(), q.ratio);
    r.ratio_interval = Some([q.lo, q.hi]);
    r.theoretical_bound = theoretical_bound(spec, obj, n);
    r.output = Some(spec.apply(&profile, norm)?);
    r.profile = Some(profile.clone());
    r.notes.push(format!(
        "n={n} d={d}; {} restarts x {} steps",
        cfg.restarts, cfg.local_steps
    ));
    let mut exit = EXIT_OK;
    if let Some(b) = r.theoretical_bound {
        if q.lo > b + crate::tol::STRICT {
            exit = EXIT_VIOLATION;
            r.notes
                .push(format!("measured ratio {} exceeds the bound {b}", q.lo));
        }
    }
    let mut text = r.summary();
    let _ = writeln!(text, "  extremal profile {}", fmt_profile(&profile));
    Ok(Outcome::new(r, text, exit))
}

/// Canned experiments; see [`scenarios`].
pub fn cmd_repro(scenario: &str, seed: u64) -> Result<Outcome> {
    scenarios::run(scenario, seed)
}

#[derive(Debug, Parser)]
#[command(
    name = "facloc",
    version,
    about = "Facility location mechanisms in normed spaces"
)]
pub struct Cli {
    /// Record wall-clock time in the report (makes reports non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a mechanism to a profile file and print its costs.
    Evaluate {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        mech: String,
        #[arg(long, default_value = "lp:2")]
        norm: String,
        #[arg(long, default_value_t = DEFAULT_OPT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite against a mechanism.
    Check {
        #[arg(long)]
        mech: String,
        #[arg(long, default_value = "lp:2")]
        norm: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        /// Search configuration (JSON); overrides the budget-derived one.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for the worst approximation ratio.
    Ratio {
        #[arg(long)]
        mech: String,
        #[arg(long, default_value = "lp:2")]
        norm: String,
        #[arg(long, default_value = "mc")]
        obj: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a canned scenario.
    Repro {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(scenarios::NAMES))]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-read a JSON report and print its summary.
    Summary { report: PathBuf },
}

fn parse_field<T: std::str::FromStr>(field: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| Error::Parse {
        field: field.to_string(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_profile(path: &Path) -> Result<Profile> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| json_error(path, e))
}

fn json_error(path: &Path, e: serde_json::Error) -> Error {
    let field = if e.line() == 0 {
        path.display().to_string()
    } else {
        format!("{} line {} column {}", path.display(), e.line(), e.column())
    };
    Error::Parse {
        field,
        message: e.to_string(),
    }
}

fn read_config(path: &Option<PathBuf>) -> Result<Option<SearchConfig>> {
    let Some(path) = path else { return Ok(None) };
    let text = read(path)?;
    let cfg: SearchConfig = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    cfg.validate()?;
    Ok(Some(cfg))
}

fn dispatch(cli: &Cli) -> Result<(Outcome, Option<PathBuf>, Option<PathBuf>)> {
    let started = Instant::now();
    let (mut outcome, out, csv) = match &cli.command {
        Command::Evaluate {
            profile,
            mech,
            norm,
            budget,
            out,
        } => {
            let spec: MechanismSpec = parse_field("--mech", mech)?;
            let norm: Norm = parse_field("--norm", norm)?;
            let profile = read_profile(profile)?;
            (
                cmd_evaluate(&profile, &spec, &norm, *budget)?,
                out.clone(),
                None,
            )
        }
        Command::Check {
            mech,
            norm,
            n,
            d,
            seed,
            budget,
            config,
            out,
        } => {
            let spec: MechanismSpec = parse_field("--mech", mech)?;
            let norm: Norm = parse_field("--norm", norm)?;
            let cfg = read_config(config)?;
            (
                cmd_check(&spec, &norm, *n, *d, *seed, *budget, cfg)?,
                out.clone(),
                None,
            )
        }
        Command::Ratio {
            mech,
            norm,
            obj,
            n,
            d,
            seed,
            budget,
            config,
            out,
        } => {
            let spec: MechanismSpec = parse_field("--mech", mech)?;
            let norm: Norm = parse_field("--norm", norm)?;
            let obj: Objective = parse_field("--obj", obj)?;
            let cfg = read_config(config)?;
            (
                cmd_ratio(&spec, &norm, obj, *n, *d, *seed, *budget, cfg)?,
                out.clone(),
                None,
            )
        }
        Command::Repro {
            scenario,
            seed,
            out,
            csv,
        } => (cmd_repro(scenario, *seed)?, out.clone(), csv.clone()),
        Command::Summary { report } => {
            let r = ExperimentReport::from_json(&read(report)?)?;
            let text = r.summary();
            let exit = if r.contradictions().is_empty() {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            };
            return Ok((Outcome::new(r, text, exit), None, None));
        }
    };
    if cli.timing {
        outcome.report.runtime_ms = Some(started.elapsed().as_millis() as u64);
    }
    Ok((outcome, out, csv))
}

/// Parses `args`, runs the command, writes requested files and prints to
/// `stdout` / `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = dispatch(&cli).and_then(|(outcome, out, csv)| {
        if let Some(path) = out {
            write(&path, &outcome.report.to_json()?)?;
        }
        if let (Some(path), Some(table)) = (csv, &outcome.csv) {
            write(&path, table)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            let _ = stdout.write_all(outcome.text.as_bytes());
            outcome.exit_code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
