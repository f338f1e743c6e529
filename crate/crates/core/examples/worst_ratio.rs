//! Hill-climbing for the worst approximation ratio over profiles.

use facloc::{search_worst_ratio, MechanismSpec, Norm, Objective, SearchConfig};

fn main() -> facloc::Result<()> {
    let norm = Norm::euclidean();
    let cfg = SearchConfig::default().with_seed(1).with_restarts(24);
    let runs = [
        (MechanismSpec::RandMed, Objective::MaxCost, 2),
        (MechanismSpec::RandMed, Objective::SocialCost, 4),
        (MechanismSpec::RandCenter, Objective::MaxCost, 3),
    ];
    for (mech, obj, n) in runs {
        let (profile, q) = search_worst_ratio(&mech, &norm, obj, n, 2, &cfg)?;
        let pts: Vec<String> = profile.points().iter().map(ToString::to_string).collect();
        println!(
            "{mech} {obj} n={n}: ratio in [{:.6}, {:.6}] at {}",
            q.lo,
            q.hi,
            pts.join(" ")
        );
    }
    Ok(())
}
