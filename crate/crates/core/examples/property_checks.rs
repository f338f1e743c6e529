//! Property checks at fixed inputs: a single misreport, a colluding pair,
//! translation and the segment-support property.

use facloc::properties::{
    check_group_strategyproof_at, check_strategyproof_at, check_support_segment,
    check_translation_invariance,
};
use facloc::{Agent, MechanismSpec, Norm, Point, Profile};

fn main() -> facloc::Result<()> {
    let norm = Norm::euclidean();

    let two = Profile::from_coords(&[[0.0, 0.0], [2.0, 0.0]])?;
    let v = check_strategyproof_at(
        &MechanismSpec::RandMed,
        &two,
        Agent(1),
        &Point::new(vec![-3.0, 0.0])?,
        &norm,
    )?;
    println!(
        "rand_med, agent 1 exaggerates: {:?} margin {}",
        v.status, v.margin
    );

    let three = Profile::from_coords(&[[-1.0, 0.0], [1.0, 0.0], [0.0, 10.0]])?;
    let lie = Point::new(vec![0.0, -0.5])?;
    let v = check_group_strategyproof_at(
        &MechanismSpec::RandCenter,
        &three,
        &[Agent(1), Agent(2)],
        &[lie.clone(), lie],
        &norm,
    )?;
    println!(
        "rand_center, agents 1 and 2 collude: {:?} margin {}",
        v.status, v.margin
    );

    let sep = MechanismSpec::Separate2Dictator { a: 0.0 };
    let p = Profile::from_coords(&[[2.0, 0.0], [5.0, 0.0], [0.0, 4.0]])?;
    let v = check_translation_invariance(
        &sep,
        &norm,
        std::slice::from_ref(&p),
        &[Point::new(vec![-3.0, 0.0])?],
    )?;
    println!("sep2d translated: {:?} margin {}", v.status, v.margin);
    let v = check_support_segment(&sep, &p, &norm)?;
    println!("sep2d support on a segment: {:?}", v.status);

    let v = check_support_segment(
        &MechanismSpec::RandCenter,
        &Profile::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])?,
        &norm,
    )?;
    println!(
        "rand_center support on a segment: {:?} margin {}",
        v.status, v.margin
    );
    Ok(())
}
