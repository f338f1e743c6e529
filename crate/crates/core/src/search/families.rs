//! Structured profile families tried before any random profile.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{Point, Profile};

fn unit(d: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k % d] = 1.0;
    v
}

fn profile(points: Vec<Vec<f64>>) -> Profile {
    Profile::new(points.into_iter().map(Point::from_raw).collect()).expect("finite, same dimension")
}

/// Deterministic extremal candidates for `n` agents in `d` dimensions.
///
/// Order matters: the cheapest, most informative families come first so a
/// small restart budget still covers them.
pub fn structured(n: usize, d: usize) -> Vec<Profile> {
    let mut out = Vec::new();
    if n == 0 || d == 0 {
        return out;
    }
    let zero = vec![0.0; d];
    let e0 = unit(d, 0);

    // one agent isolated from a cluster, for each choice of isolated agent
    for iso in 0..n {
        out.push(profile(
            (0..n)
                .map(|i| if i == iso { zero.clone() } else { e0.clone() })
                .collect(),
        ));
    }
    // two-cluster splits: the first k agents at the origin
    for k in 2..n {
        out.push(profile(
            (0..n)
                .map(|i| if i < k { zero.clone() } else { e0.clone() })
                .collect(),
        ));
    }
    // evenly spaced on a line
    if n >= 2 {
        out.push(profile(
            (0..n)
                .map(|i| {
                    let mut v = zero.clone();
                    v[0] = i as f64 / (n - 1) as f64;
                    v
                })
                .collect(),
        ));
    }
    // simplex vertices (origin and unit vectors), cycled
    out.push(profile(
        (0..n)
            .map(|i| {
                if i % (d + 1) == 0 {
                    zero.clone()
                } else {
                    unit(d, i % (d + 1) - 1)
                }
            })
            .collect(),
    ));
    // unit vectors with the remaining agents stacked at their sum: the
    // classic coordinate-median coalition profile
    if d >= 3 && n >= 5 {
        let mut ones = zero.clone();
        ones[..3].iter_mut().for_each(|v| *v = 1.0);
        out.push(profile(
            (0..n)
                .map(|i| if i < 3 { unit(d, i) } else { ones.clone() })
                .collect(),
        ));
    }
    // straddling the origin on the first axis, where threshold mechanisms
    // switch branches
    if n >= 3 {
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = zero.clone();
            v[0] = match i {
                0 => 0.5,
                1 => 2.0,
                2 => -2.0,
                _ => -0.5 + 0.25 * i as f64,
            };
            if d > 1 && i == 2 {
                v[1] = 1.0;
            }
            pts.push(v);
        }
        out.push(profile(pts));
        let mut flipped = out.last().unwrap().points().to_vec();
        flipped[0] = Point::from_raw({
            let mut v = zero.clone();
            v[0] = -0.5;
            v
        });
        out.push(Profile::new(flipped).expect("same dimension"));
    }
    out
}

/// A random profile: mostly Gaussian clouds, sometimes a few tight
/// clusters, sometimes a wide uniform box.
pub fn random<R: Rng>(rng: &mut R, n: usize, d: usize) -> Profile {
    let gauss = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };
    let kind: u8 = rng.random_range(0..3);
    let points = match kind {
        0 => (0..n)
            .map(|_| (0..d).map(|_| gauss(rng)).collect())
            .collect(),
        1 => {
            let k = rng.random_range(1..=n.clamp(1, 3));
            let centers: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| 2.0 * gauss(rng)).collect())
                .collect();
            (0..n)
                .map(|_| {
                    let c = &centers[rng.random_range(0..k)];
                    c.iter().map(|x| x + 0.05 * gauss(rng)).collect()
                })
                .collect()
        }
        _ => (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect(),
    };
    profile(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_have_the_requested_shape() {
        for n in 1..=6 {
            for d in 1..=3 {
                for p in structured(n, d) {
                    assert_eq!((p.n(), p.dim()), (n, d));
                }
            }
        }
    }

    #[test]
    fn coalition_profile_present_in_three_dimensions() {
        let fam = structured(5, 3);
        let want = Profile::from_coords(&[
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [1.0, 1.0, 1.0],
        ])
        .unwrap();
        assert!(fam.contains(&want));
    }
}
