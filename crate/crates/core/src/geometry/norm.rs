use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};
use crate::rng::stream;

/// A norm with declared structure: `‖v‖ = ‖w ∘ (A v)‖_p`.
///
/// `w` (per-coordinate positive weights) and `A` (an invertible matrix) are
/// optional. Weights scale coordinates after the transform, so a weighted
/// `L∞` norm is `max_k w_k |(A v)_k|`. Both preserve strict convexity, which
/// therefore depends on `p` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Norm {
    p: f64,
    weights: Option<Vec<f64>>,
    transform: Option<Transform>,
}

#[derive(Debug, Clone, PartialEq)]
struct Transform {
    d: usize,
    /// Row-major `d × d`.
    matrix: Vec<f64>,
    inverse: Vec<f64>,
}

impl Transform {
    fn new(matrix: Vec<f64>) -> Result<Self> {
        let d = (matrix.len() as f64).sqrt().round() as usize;
        if d == 0 || d * d != matrix.len() {
            return Err(Error::InvalidNorm(format!(
                "transform must be a square row-major matrix, got {} entries",
                matrix.len()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("transform"));
        }
        let m = DMatrix::from_row_slice(d, d, &matrix);
        let inv = m
            .try_inverse()
            .filter(|inv| inv.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::InvalidNorm("transform is not invertible".into()))?;
        let inverse = inv.transpose().as_slice().to_vec();
        Ok(Transform { d, matrix, inverse })
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[r * self.d..(r + 1) * self.d];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_inverse(&self, v: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|r| {
                self.inverse[r * self.d..(r + 1) * self.d]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

impl Norm {
    pub fn lp(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidNorm(format!(
                "exponent must lie in [1, inf], got {p}"
            )));
        }
        Ok(Norm {
            p,
            weights: None,
            transform: None,
        })
    }

    pub fn euclidean() -> Self {
        Norm::lp(2.0).unwrap()
    }

    pub fn l1() -> Self {
        Norm::lp(1.0).unwrap()
    }

    pub fn linf() -> Self {
        Norm::lp(f64::INFINITY).unwrap()
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidNorm(
                "weights must be positive and finite".into(),
            ));
        }
        if let Some(t) = &self.transform {
            if t.d != weights.len() {
                return Err(Error::DimensionMismatch {
                    expected: t.d,
                    got: weights.len(),
                });
            }
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// Adds a row-major square transform applied before the `p`-norm.
    pub fn with_transform(mut self, matrix: Vec<f64>) -> Result<Self> {
        let t = Transform::new(matrix)?;
        if let Some(w) = &self.weights {
            if w.len() != t.d {
                return Err(Error::DimensionMismatch {
                    expected: w.len(),
                    got: t.d,
                });
            }
        }
        self.transform = Some(t);
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn transform(&self) -> Option<&[f64]> {
        self.transform.as_ref().map(|t| t.matrix.as_slice())
    }

    /// True iff `p ∈ (1, ∞)`.
    pub fn is_strictly_convex(&self) -> bool {
        self.p > 1.0 && self.p.is_finite()
    }

    /// Plain `L_p` without weights or transform.
    pub fn is_plain(&self) -> bool {
        self.weights.is_none() && self.transform.is_none()
    }

    pub fn is_euclidean(&self) -> bool {
        self.is_plain() && self.p == 2.0
    }

    /// True when `|v_k| ≤ |u_k|` for all `k` implies `‖v‖ ≤ ‖u‖`, i.e. no transform.
    pub fn is_monotone(&self) -> bool {
        self.transform.is_none()
    }

    /// Dimension fixed by weights or transform, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        self.transform
            .as_ref()
            .map(|t| t.d)
            .or_else(|| self.weights.as_ref().map(|w| w.len()))
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self.fixed_dim() {
            Some(expected) if expected != d => Err(Error::DimensionMismatch { expected, got: d }),
            _ => Ok(()),
        }
    }

    /// Weighted, transformed coordinates `w ∘ (A v)`.
    fn image(&self, v: &[f64]) -> Vec<f64> {
        let mut u = match &self.transform {
            Some(t) => {
                let mut out = vec![0.0; v.len()];
                t.apply(v, &mut out);
                out
            }
            None => v.to_vec(),
        };
        if let Some(w) = &self.weights {
            for (x, wk) in u.iter_mut().zip(w) {
                *x *= wk;
            }
        }
        u
    }

    fn lp_of(&self, u: &[f64]) -> f64 {
        let m = u.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if m == 0.0 || self.p.is_infinite() {
            return m;
        }
        if self.p == 1.0 {
            return u.iter().map(|x| x.abs()).sum();
        }
        if self.p == 2.0 {
            let s: f64 = u.iter().map(|x| (x / m) * (x / m)).sum();
            return m * s.sqrt();
        }
        let s: f64 = u.iter().map(|x| (x.abs() / m).powf(self.p)).sum();
        m * s.powf(1.0 / self.p)
    }

    /// `‖v‖`. Dimensions must already be validated.
    pub fn eval(&self, v: &[f64]) -> f64 {
        if self.is_plain() {
            return self.lp_of(v);
        }
        self.lp_of(&self.image(v))
    }

    /// `‖a − b‖`.
    pub fn dist(&self, a: &Point, b: &Point) -> f64 {
        debug_assert_eq!(a.dim(), b.dim());
        let diff: Vec<f64> = a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| x - y)
            .collect();
        self.eval(&diff)
    }

    /// Adds `scale · g` to `out`, where `g` is a subgradient of `‖·‖` at `v`.
    /// At the origin the zero subgradient is used; at kinks of `L1`/`L∞` the
    /// choice is the one with zeros on tied coordinates.
    pub(crate) fn add_subgradient(&self, v: &[f64], scale: f64, out: &mut [f64]) {
        let u = self.image(v);
        let norm = self.lp_of(&u);
        if norm == 0.0 {
            return;
        }
        let mut s = vec![0.0; u.len()];
        if self.p.is_infinite() {
            let (k, _) = u.iter().enumerate().fold((0, -1.0), |best, (k, x)| {
                if x.abs() > best.1 {
                    (k, x.abs())
                } else {
                    best
                }
            });
            s[k] = u[k].signum();
        } else if self.p == 1.0 {
            for (sk, uk) in s.iter_mut().zip(&u) {
                if *uk != 0.0 {
                    *sk = uk.signum();
                }
            }
        } else {
            for (sk, uk) in s.iter_mut().zip(&u) {
                *sk = uk.signum() * (uk.abs() / norm).powf(self.p - 1.0);
            }
        }
        if let Some(w) = &self.weights {
            for (sk, wk) in s.iter_mut().zip(w) {
                *sk *= wk;
            }
        }
        match &self.transform {
            Some(t) => {
                for (c, o) in out.iter_mut().enumerate() {
                    let col: f64 = (0..t.d).map(|r| t.matrix[r * t.d + c] * s[r]).sum();
                    *o += scale * col;
                }
            }
            None => {
                for (o, sk) in out.iter_mut().zip(&s) {
                    *o += scale * sk;
                }
            }
        }
    }

    /// Pulls a direction given in weighted/transformed coordinates back to the
    /// original space, so that `image(preimage(s))` is parallel to `s`.
    fn preimage(&self, s: &[f64]) -> Vec<f64> {
        let mut s = s.to_vec();
        if let Some(w) = &self.weights {
            for (x, wk) in s.iter_mut().zip(w) {
                *x /= wk;
            }
        }
        match &self.transform {
            Some(t) => t.apply_inverse(&s),
            None => s,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_infinite() {
            write!(f, "lp:inf")?;
        } else {
            write!(f, "lp:{}", self.p)?;
        }
        if let Some(w) = &self.weights {
            write!(f, ";w={}", join(w))?;
        }
        if let Some(t) = &self.transform {
            write!(f, ";A={}", join(&t.matrix))?;
        }
        Ok(())
    }
}

fn join(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list(field: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(field, format!("`{t}`: {e}")))
        })
        .collect()
}

/// Grammar: `lp:<p>` (`p` may be `inf`), then optional `;w=<w1,...>` and
/// `;A=<row-major matrix>`.
impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(';');
        let head = parts.next().unwrap_or_default();
        let p_str = head
            .strip_prefix("lp:")
            .ok_or_else(|| Error::parse("norm", format!("expected `lp:<p>`, got `{head}`")))?;
        let p = match p_str.trim() {
            "inf" | "Inf" | "infinity" => f64::INFINITY,
            t => t
                .parse::<f64>()
                .map_err(|e| Error::parse("norm.p", format!("`{t}`: {e}")))?,
        };
        let mut norm = Norm::lp(p).map_err(|e| Error::parse("norm.p", e.to_string()))?;
        let mut weights = None;
        let mut transform = None;
        for part in parts {
            let part = part.trim();
            if let Some(w) = part.strip_prefix("w=") {
                weights = Some(parse_list("norm.w", w)?);
            } else if let Some(a) = part.strip_prefix("A=") {
                transform = Some(parse_list("norm.A", a)?);
            } else if !part.is_empty() {
                return Err(Error::parse("norm", format!("unknown component `{part}`")));
            }
        }
        if let Some(a) = transform {
            norm = norm
                .with_transform(a)
                .map_err(|e| Error::parse("norm.A", e.to_string()))?;
        }
        if let Some(w) = weights {
            norm = norm
                .with_weights(w)
                .map_err(|e| Error::parse("norm.w", e.to_string()))?;
        }
        Ok(norm)
    }
}

impl TryFrom<String> for Norm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Norm> for String {
    fn from(n: Norm) -> Self {
        n.to_string()
    }
}

/// Searches for two distinct unit vectors `x ≠ y` with `‖x + y‖ = 2`.
///
/// Axis pairs and sign-pattern pairs (in the norm's weighted/transformed
/// coordinates) are tried first, so `L1` and `L∞` witnesses come out
/// deterministically; then `trials` random pairs drawn from `rng_seed`.
pub fn strict_convexity_witness(
    norm: &Norm,
    d: usize,
    trials: usize,
    rng_seed: u64,
) -> Option<(Point, Point)> {
    if d == 0 || norm.check_dim(d).is_err() {
        return None;
    }
    let unit = |v: Vec<f64>| -> Option<Point> {
        let n = norm.eval(&v);
        (n > 0.0 && n.is_finite()).then(|| Point::from_raw(v.iter().map(|x| x / n).collect()))
    };
    let test = |x: &Point, y: &Point| -> bool {
        norm.dist(x, y) > 1e-3 && norm.eval(x.add(y).coords()) >= 2.0 - crate::tol::GEOM
    };

    let mut axes = Vec::with_capacity(2 * d);
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut s = vec![0.0; d];
            s[k] = sign;
            axes.extend(unit(norm.preimage(&s)));
        }
    }
    let mut patterns = Vec::new();
    if d <= 8 {
        for mask in 0..(1u32 << d) {
            let s: Vec<f64> = (0..d)
                .map(|k| {
                    if mask & (1 << (d - 1 - k)) == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect();
            patterns.extend(unit(norm.preimage(&s)));
        }
    }
    let pair_sets: [(&[Point], &[Point]); 3] =
        [(&axes, &axes), (&patterns, &patterns), (&axes, &patterns)];
    for (left, right) in pair_sets {
        for (i, x) in left.iter().enumerate() {
            for (j, y) in right.iter().enumerate() {
                if std::ptr::eq(left, right) && j <= i {
                    continue;
                }
                if test(x, y) {
                    return Some((x.clone(), y.clone()));
                }
            }
        }
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(stream(rng_seed, 0));
    for _ in 0..trials {
        let mut draw = || -> Vec<f64> { (0..d).map(|_| StandardNormal.sample(&mut rng)).collect() };
        let (a, b) = (draw(), draw());
        if let (Some(x), Some(y)) = (unit(a), unit(b)) {
            if test(&x, &y) {
                return Some((x, y));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_round_trip() {
        for s in [
            "lp:2",
            "lp:inf",
            "lp:1.5;w=1,2",
            "lp:3;A=1,1,0,2",
            "lp:2;w=0.5,2;A=2,0,0,1",
        ] {
            let n: Norm = s.parse().unwrap();
            assert_eq!(n.to_string().parse::<Norm>().unwrap(), n, "{s}");
        }
        assert_eq!("lp:inf".parse::<Norm>().unwrap().to_string(), "lp:inf");
    }

    #[test]
    fn grammar_errors() {
        assert!("l2".parse::<Norm>().is_err());
        assert!("lp:0.5".parse::<Norm>().is_err());
        assert!("lp:2;w=1,-1".parse::<Norm>().is_err());
        assert!("lp:2;A=1,2,2,4".parse::<Norm>().is_err());
        assert!("lp:2;A=1,2,3".parse::<Norm>().is_err());
        assert!("lp:2;w=1,2,3;A=1,0,0,1".parse::<Norm>().is_err());
        assert!("lp:2;q=3".parse::<Norm>().is_err());
    }

    #[test]
    fn strict_convexity_flag() {
        assert!(Norm::euclidean().is_strictly_convex());
        assert!(Norm::lp(1.5).unwrap().is_strictly_convex());
        assert!(!Norm::l1().is_strictly_convex());
        assert!(!Norm::linf().is_strictly_convex());
        let t = "lp:3;A=1,1,0,2;w=1,3".parse::<Norm>().unwrap();
        assert!(t.is_strictly_convex());
    }

    #[test]
    fn weighted_and_transformed_eval() {
        let w = Norm::euclidean().with_weights(vec![3.0, 4.0]).unwrap();
        assert!((w.eval(&[1.0, 1.0]) - 5.0).abs() < 1e-12);
        let t = Norm::l1().with_transform(vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(t.eval(&[1.0, -2.0]), 3.0);
        assert!(t.check_dim(3).is_err());
    }

    #[test]
    fn large_and_tiny_coordinates_do_not_overflow() {
        let n = Norm::lp(3.0).unwrap();
        let v = n.eval(&[1e300, 1e300]);
        assert!(v.is_finite() && v > 1e300);
        assert!(n.eval(&[1e-300, 0.0]) > 0.0);
    }

    #[test]
    fn witness_examples() {
        let (x, y) = strict_convexity_witness(&Norm::l1(), 2, 100, 7).unwrap();
        assert_eq!((x, y), (Point::from([1.0, 0.0]), Point::from([0.0, 1.0])));

        assert!(strict_convexity_witness(&Norm::euclidean(), 2, 2000, 7).is_none());
        assert!(strict_convexity_witness(&Norm::lp(1.5).unwrap(), 3, 2000, 7).is_none());

        let (x, y) = strict_convexity_witness(&Norm::linf(), 2, 100, 7).unwrap();
        assert_eq!(
            (x.clone(), y.clone()),
            (Point::from([1.0, 1.0]), Point::from([1.0, -1.0]))
        );
        assert_eq!(Norm::linf().eval(x.add(&y).coords()), 2.0);
    }

    #[test]
    fn witness_through_transform() {
        let n = "lp:inf;A=2,1,0,1".parse::<Norm>().unwrap();
        let (x, y) = strict_convexity_witness(&n, 2, 0, 1).unwrap();
        assert!((n.eval(x.coords()) - 1.0).abs() < 1e-12);
        assert!((n.eval(y.coords()) - 1.0).abs() < 1e-12);
        assert!((n.eval(x.add(&y).coords()) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn subgradient_matches_finite_differences() {
        let norms = ["lp:2", "lp:1.5", "lp:3;w=1,2", "lp:2;A=1,0.5,-0.3,2"];
        let v = [0.7, -1.3];
        for s in norms {
            let n: Norm = s.parse().unwrap();
            let mut g = [0.0; 2];
            n.add_subgradient(&v, 1.0, &mut g);
            for k in 0..2 {
                let h = 1e-6;
                let mut vp = v;
                let mut vm = v;
                vp[k] += h;
                vm[k] -= h;
                let fd = (n.eval(&vp) - n.eval(&vm)) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-6, "{s}: {fd} vs {}", g[k]);
            }
        }
    }
}
