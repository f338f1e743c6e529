use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Norm, Point};
use crate::error::{Error, Result};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    pub point: Point,
}

/// A finite distribution over facility locations.
///
/// Always canonical: atoms sorted lexicographically by point, coincident
/// points merged, no zero weights, weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lottery {
    atoms: Vec<Atom>,
}

impl<'de> Deserialize<'de> for Lottery {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<Atom>,
        }
        let raw = Raw::deserialize(de)?;
        Lottery::new(raw.atoms.into_iter().map(|a| (a.weight, a.point)).collect())
            .map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Lottery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, a) in self.atoms.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", a.point, a.weight)?;
        }
        write!(f, "}}")
    }
}

impl Lottery {
    /// Canonicalizes `(weight, point)` pairs. Weights must be nonnegative
    /// and sum to one within `1e-9`; they are renormalized exactly.
    pub fn new(atoms: Vec<(f64, Point)>) -> Result<Self> {
        let d = atoms
            .first()
            .map(|(_, p)| p.dim())
            .ok_or_else(|| Error::InvalidLottery("no atoms".into()))?;
        let mut total = 0.0;
        for (w, p) in &atoms {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidLottery(format!("bad weight {w}")));
            }
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > tol::GEOM {
            return Err(Error::InvalidLottery(format!("weights sum to {total}")));
        }
        Ok(Self::canonical(atoms))
    }

    pub fn degenerate(point: Point) -> Self {
        Lottery {
            atoms: vec![Atom { weight: 1.0, point }],
        }
    }

    /// Sort, merge points equal up to `1e-12` relative, drop zero weights,
    /// renormalize.
    pub(crate) fn canonical(mut atoms: Vec<(f64, Point)>) -> Self {
        atoms.retain(|(w, _)| *w > 0.0);
        atoms.sort_by(|a, b| a.1.lex_cmp(&b.1));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for (w, p) in atoms {
            if let Some(last) = merged.last_mut() {
                let scale = last.point.max_abs().max(p.max_abs());
                if last.point.max_abs_diff(&p) <= tol::WEIGHT * (1.0 + scale) {
                    last.weight += w;
                    continue;
                }
            }
            merged.push(Atom {
                weight: w,
                point: p,
            });
        }
        let total: f64 = merged.iter().map(|a| a.weight).sum();
        if let [only] = merged.as_mut_slice() {
            only.weight = 1.0;
        } else if (total - 1.0).abs() > tol::WEIGHT {
            for a in &mut merged {
                a.weight /= total;
            }
        }
        Lottery { atoms: merged }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].point.dim()
    }

    pub fn is_degenerate(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.atoms.iter().map(|a| &a.point)
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: d,
            })
        } else {
            Ok(())
        }
    }

    pub fn expected_distance(&self, x: &Point, norm: &Norm) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * norm.dist(x, &a.point))
            .sum()
    }

    pub fn centroid(&self) -> Point {
        let mut c = vec![0.0; self.dim()];
        for a in &self.atoms {
            for (ck, pk) in c.iter_mut().zip(a.point.coords()) {
                *ck += a.weight * pk;
            }
        }
        Point::from_raw(c)
    }

    pub fn radius(&self, norm: &Norm) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        self.expected_distance(&self.centroid(), norm)
    }

    pub fn translate(&self, shift: &Point) -> Lottery {
        Lottery::canonical(
            self.atoms
                .iter()
                .map(|a| (a.weight, a.point.add(shift)))
                .collect(),
        )
    }

    /// Mismatch between two lotteries: the larger of the Hausdorff distance
    /// between supports (max-abs coordinates) and the weight difference of
    /// nearest-matched atoms. Zero iff equal.
    pub fn discrepancy(&self, other: &Lottery) -> f64 {
        fn one_way(a: &Lottery, b: &Lottery) -> f64 {
            let mut worst = 0.0_f64;
            for x in &a.atoms {
                let (dist, w) = b
                    .atoms
                    .iter()
                    .map(|y| (x.point.max_abs_diff(&y.point), y.weight))
                    .fold(
                        (f64::INFINITY, 0.0),
                        |best, c| if c.0 < best.0 { c } else { best },
                    );
                worst = worst.max(dist).max((x.weight - w).abs());
            }
            worst
        }
        one_way(self, other).max(one_way(other, self))
    }

    pub fn approx_eq(&self, other: &Lottery, tol: f64) -> bool {
        self.discrepancy(other) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization_merges_and_sorts() {
        let lot = Lottery::new(vec![
            (0.25, Point::from([2.0, 0.0])),
            (0.25, Point::from([0.0, 0.0])),
            (0.5, Point::from([2.0, 0.0])),
        ])
        .unwrap();
        assert_eq!(lot.len(), 2);
        assert_eq!(lot.atoms()[0].point, Point::from([0.0, 0.0]));
        assert_eq!(lot.atoms()[1].weight, 0.75);
    }

    #[test]
    fn zero_weights_dropped() {
        let lot = Lottery::new(vec![(0.0, Point::from([5.0])), (1.0, Point::from([1.0]))]).unwrap();
        assert!(lot.is_degenerate());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(Lottery::new(vec![(0.5, Point::from([0.0]))]).is_err());
        assert!(Lottery::new(vec![(-0.5, Point::from([0.0])), (1.5, Point::from([1.0]))]).is_err());
        assert!(Lottery::new(vec![]).is_err());
        assert!(Lottery::new(vec![
            (0.5, Point::from([0.0])),
            (0.5, Point::from([0.0, 1.0]))
        ])
        .is_err());
    }

    #[test]
    fn discrepancy_detects_support_and_weight_changes() {
        let a = Lottery::new(vec![(0.5, Point::from([0.0])), (0.5, Point::from([1.0]))]).unwrap();
        let b = Lottery::new(vec![(0.25, Point::from([0.0])), (0.75, Point::from([1.0]))]).unwrap();
        let c = Lottery::new(vec![(0.5, Point::from([0.0])), (0.5, Point::from([3.0]))]).unwrap();
        assert_eq!(a.discrepancy(&a), 0.0);
        assert_eq!(a.discrepancy(&b), 0.25);
        assert_eq!(a.discrepancy(&c), 2.0);
    }

    #[test]
    fn serde_round_trip_recanonicalizes() {
        let json = r#"{"atoms":[{"weight":0.5,"point":[1.0]},{"weight":0.5,"point":[0.0]}]}"#;
        let lot: Lottery = serde_json::from_str(json).unwrap();
        assert_eq!(lot.atoms()[0].point, Point::from([0.0]));
        let back: Lottery = serde_json::from_str(&serde_json::to_string(&lot).unwrap()).unwrap();
        assert_eq!(back, lot);
    }
}
