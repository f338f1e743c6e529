//! Every mechanism on one three-agent profile: the lottery it returns, its
//! expected costs and how far those are from the optimum.

use facloc::{approx_ratio, Agent, Mechanism, MechanismSpec, Norm, Objective, Profile};

fn main() -> facloc::Result<()> {
    let profile = Profile::from_coords(&[[0.0, 0.0], [4.0, 0.0], [1.0, 3.0]])?;
    let norm = Norm::euclidean();
    let mechs = [
        MechanismSpec::Dictator(Agent(1)),
        MechanismSpec::RandMed,
        MechanismSpec::RandCenter,
        MechanismSpec::Separate2Dictator { a: 0.0 },
        MechanismSpec::CoordinateMedian,
    ];
    for mech in &mechs {
        let out = mech.apply(&profile, &norm)?;
        let mc = approx_ratio(mech, &profile, &norm, Objective::MaxCost)?;
        let sc = approx_ratio(mech, &profile, &norm, Objective::SocialCost)?;
        println!("{mech}");
        println!("  output {out}");
        println!(
            "  mc {:.4} (ratio {:.4})   sc {:.4} (ratio {:.4})",
            mc.cost, mc.ratio, sc.cost, sc.ratio
        );
    }
    Ok(())
}
