//! Seeded adversarial search for profitable misreports.

use facloc::{
    search_gsp_violation, search_sp_violation, MechanismSpec, Norm, SearchConfig, Witness,
};

fn main() -> facloc::Result<()> {
    let cfg = SearchConfig::default().with_seed(3).with_restarts(48);

    let l1 = Norm::l1();
    match search_gsp_violation(&MechanismSpec::CoordinateMedian, &l1, 5, 3, &cfg)? {
        Some(Witness::Manipulation(m)) => {
            println!(
                "coord_median under lp:1, coalition {:?}",
                m.coalition
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
            );
            for d in &m.per_agent_delta {
                println!(
                    "  agent {}: {:.4} -> {:.4}",
                    d.agent, d.cost_before, d.cost_after
                );
            }
            println!(
                "  re-validated: {}",
                m.validate(&MechanismSpec::CoordinateMedian, &l1)?
            );
        }
        other => println!("coord_median: {other:?}"),
    }

    let found = search_sp_violation(&MechanismSpec::RandMed, &Norm::euclidean(), 3, 2, &cfg)?;
    println!(
        "rand_med single-agent witness: {}",
        if found.is_some() { "found" } else { "none" }
    );
    Ok(())
}
