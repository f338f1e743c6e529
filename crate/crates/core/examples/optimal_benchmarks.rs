//! Certified optimal facility locations for both objectives.

use facloc::{opt_max_cost, opt_social_cost, Norm, Profile};

fn main() -> facloc::Result<()> {
    let profile = Profile::from_coords(&[[0.0, 0.0], [6.0, 0.0], [1.0, 5.0], [2.0, 1.0]])?;
    for spec in ["lp:2", "lp:1", "lp:inf", "lp:1.5", "lp:2;w=1,3"] {
        let norm: Norm = spec.parse()?;
        let sc = opt_social_cost(&profile, &norm, 20_000)?;
        let mc = opt_max_cost(&profile, &norm, 20_000)?;
        println!("{norm}");
        println!(
            "  sc* {:.6} at {} ({:?}, gap {:.1e})",
            sc.value, sc.point, sc.method, sc.certified_gap
        );
        println!(
            "  mc* {:.6} at {} ({:?}, gap {:.1e})",
            mc.value, mc.point, mc.method, mc.certified_gap
        );
    }
    Ok(())
}
