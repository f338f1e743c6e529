//! Strict convexity witnesses and distance-parametrised segment points
//! under a few norms.

use facloc::{point_on_segment_at_distance, strict_convexity_witness, Norm, Point};

fn main() -> facloc::Result<()> {
    let norms: Vec<Norm> = [
        "lp:1",
        "lp:inf",
        "lp:2",
        "lp:3",
        "lp:1;w=1,2",
        "lp:2;A=2,1,0,1",
    ]
    .iter()
    .map(|s| s.parse())
    .collect::<facloc::Result<_>>()?;
    for norm in &norms {
        match strict_convexity_witness(norm, 2, 2_000, 7) {
            Some((x, y)) => println!(
                "{:<16} not strictly convex: |{x}| = |{y}| = 1, |x + y| = {}",
                norm.to_string(),
                norm.dist(&x, &y.scale(-1.0))
            ),
            None => println!("{:<16} no flat segment found", norm.to_string()),
        }
    }

    let a = Point::new(vec![0.0, 0.0])?;
    let b = Point::new(vec![3.0, 4.0])?;
    for norm in &norms[..4] {
        let len = norm.dist(&a, &b);
        let y = point_on_segment_at_distance(&a, &b, len / 3.0, norm)?;
        println!(
            "{:<8} |ab| = {len:.4}, point at a third: {y}",
            norm.to_string()
        );
    }
    Ok(())
}
