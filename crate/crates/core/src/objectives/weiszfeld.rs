//! Euclidean geometric median by Weiszfeld iteration.
//!
//! Data points are screened first: a distinct point `x_i` of multiplicity
//! `m_i` is optimal iff `‖Σ_{j: x_j ≠ x_i} (x_j − x_i)/‖x_j − x_i‖‖ ≤ m_i`.
//! If an iterate lands on a non-optimal data point, it takes the escape
//! step along that resultant instead of dividing by zero.
//!
//! The certificate is `‖∇f(y)‖ · max_i ‖x_i − y‖`: the optimum lies in the
//! convex hull, which sits inside the ball of that radius around `y`.

use super::{OptMethod, OptResult};
use crate::geometry::{Point, Profile};
use crate::tol;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

struct Site {
    at: Vec<f64>,
    mult: f64,
}

/// Sum of unit vectors from `y` toward every site not at `y`, with the
/// multiplicity of sites sitting on `y`, and `Σ m_j/‖x_j − y‖` over the rest.
fn resultant(sites: &[Site], y: &[f64]) -> (Vec<f64>, f64, f64) {
    let mut r = vec![0.0; y.len()];
    let mut on = 0.0;
    let mut inv = 0.0;
    for s in sites {
        let dd = dist(&s.at, y);
        if dd == 0.0 {
            on += s.mult;
            continue;
        }
        inv += s.mult / dd;
        for (rk, (xk, yk)) in r.iter_mut().zip(s.at.iter().zip(y)) {
            *rk += s.mult * (xk - yk) / dd;
        }
    }
    (r, on, inv)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn geometric_median(profile: &Profile, budget: usize) -> OptResult {
    let mut sites: Vec<Site> = Vec::new();
    for p in profile.points() {
        match sites.iter_mut().find(|s| s.at == p.coords()) {
            Some(s) => s.mult += 1.0,
            None => sites.push(Site {
                at: p.coords().to_vec(),
                mult: 1.0,
            }),
        }
    }
    let value_at = |y: &[f64]| -> f64 { sites.iter().map(|s| s.mult * dist(&s.at, y)).sum() };
    let spread = |y: &[f64]| -> f64 { sites.iter().map(|s| dist(&s.at, y)).fold(0.0, f64::max) };
    let mut evals = 0;

    for s in &sites {
        let (r, on, _) = resultant(&sites, &s.at);
        evals += 1;
        let excess = norm2(&r) - on;
        if excess <= 0.0 {
            let value = value_at(&s.at);
            return OptResult {
                point: Point::from_raw(s.at.clone()),
                value,
                certified_gap: 0.0,
                method: OptMethod::Exact,
                evaluations: evals,
            };
        }
    }

    let mut y = profile.mean().into_coords();
    // incumbent and the best lower bound seen at any iterate
    let mut best = (y.clone(), f64::INFINITY);
    let mut lower = 0.0_f64;
    let scale = spread(&y).max(1e-300);
    for _ in 0..budget.max(1) {
        let (r, on, inv) = resultant(&sites, &y);
        evals += 1;
        let value = value_at(&y);
        // norm of the minimal-norm subgradient at y
        let grad = (norm2(&r) - on).max(0.0);
        lower = lower.max(value - grad * spread(&y));
        if value < best.1 {
            best = (y.clone(), value);
        }
        if best.1 - lower <= tol::OPT_GAP * (1.0 + best.1) {
            break;
        }
        let next: Vec<f64> = if on > 0.0 {
            // escape step from a non-optimal data point
            let rn = norm2(&r);
            let t = (rn - on) / inv;
            y.iter().zip(&r).map(|(yk, rk)| yk + t * rk / rn).collect()
        } else {
            let mut num = vec![0.0; y.len()];
            for s in &sites {
                let w = s.mult / dist(&s.at, &y);
                for (nk, xk) in num.iter_mut().zip(&s.at) {
                    *nk += w * xk;
                }
            }
            num.into_iter().map(|v| v / inv).collect()
        };
        let snapped = sites
            .iter()
            .find(|s| dist(&s.at, &next) <= tol::GEOM * scale)
            .map(|s| s.at.clone());
        let next = snapped.unwrap_or(next);
        if next == y {
            break;
        }
        y = next;
    }
    OptResult {
        point: Point::from_raw(best.0),
        value: best.1,
        certified_gap: (best.1 - lower).max(0.0),
        method: OptMethod::Weiszfeld,
        evaluations: evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_point_with_multiplicity_is_exact() {
        let p = Profile::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]).unwrap();
        let r = geometric_median(&p, 100);
        assert_eq!(r.method, OptMethod::Exact);
        assert_eq!(r.point, Point::from([1.0, 0.0]));
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn triangle_fermat_point() {
        // all angles < 120°, so the Fermat point is interior; for an
        // equilateral triangle it is the centroid
        let h = 3f64.sqrt();
        let p = Profile::from_coords(&[[0.0, 0.0], [2.0, 0.0], [1.0, h]]).unwrap();
        let r = geometric_median(&p, 10_000);
        assert!((r.value - 3.0 * 2.0 / h).abs() < 1e-6, "{r:?}");
        assert!(r.certified_gap <= 1e-6 * (1.0 + r.value));
    }

    #[test]
    fn obtuse_triangle_optimum_at_vertex() {
        let p = Profile::from_coords(&[[0.0, 0.0], [10.0, 0.0], [5.0, 0.5]]).unwrap();
        let r = geometric_median(&p, 10_000);
        assert_eq!(r.point, Point::from([5.0, 0.5]));
    }
}
