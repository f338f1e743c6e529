//! Certified minimization of `Σ_i ‖x_i − y‖` or `max_i ‖x_i − y‖` over a box.
//!
//! Best-first branch-and-bound: every cell carries a lower bound built from
//! subgradients at its center (each term is convex, so
//! `f_i(y) ≥ f_i(c) + g_i·(y − c) ≥ f_i(c) − Σ_k |g_ik| h_k` on a cell of
//! half-widths `h`). The cell with the smallest bound is split in half along
//! its widest axis until the best value found is within the target of the
//! smallest outstanding bound. A compass search polishes the incumbent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{OptMethod, OptResult};
use crate::geometry::{Norm, Point, Profile};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Sum,
    Max,
}

struct Problem<'a> {
    points: &'a [Point],
    norm: &'a Norm,
    agg: Aggregate,
}

impl Problem<'_> {
    fn value(&self, y: &[f64]) -> f64 {
        let mut diff = vec![0.0; y.len()];
        let terms = self.points.iter().map(|x| {
            for (d, (a, b)) in diff.iter_mut().zip(y.iter().zip(x.coords())) {
                *d = a - b;
            }
            self.norm.eval(&diff)
        });
        match self.agg {
            Aggregate::Sum => terms.sum(),
            Aggregate::Max => terms.fold(0.0, f64::max),
        }
    }

    /// `(f(c), lower bound of f on the cell)`.
    fn bound(&self, c: &[f64], half: &[f64]) -> (f64, f64) {
        let d = c.len();
        let mut diff = vec![0.0; d];
        let mut g = vec![0.0; d];
        let mut total_g = vec![0.0; d];
        let mut value = match self.agg {
            Aggregate::Sum => 0.0,
            Aggregate::Max => f64::NEG_INFINITY,
        };
        let mut lb_terms = 0.0_f64;
        let mut terms = Vec::new();
        for x in self.points {
            for (dk, (a, b)) in diff.iter_mut().zip(c.iter().zip(x.coords())) {
                *dk = a - b;
            }
            let fi = self.norm.eval(&diff);
            g.iter_mut().for_each(|v| *v = 0.0);
            self.norm.add_subgradient(&diff, 1.0, &mut g);
            let slack: f64 = g.iter().zip(half).map(|(gk, hk)| gk.abs() * hk).sum();
            let lbi = (fi - slack).max(0.0);
            match self.agg {
                Aggregate::Sum => {
                    value += fi;
                    lb_terms += lbi;
                    for (t, gk) in total_g.iter_mut().zip(&g) {
                        *t += gk;
                    }
                }
                Aggregate::Max => {
                    value = value.max(fi);
                    lb_terms = lb_terms.max(lbi);
                    terms.push((fi, g.clone()));
                }
            }
        }
        let lb = match self.agg {
            Aggregate::Sum => {
                let slack: f64 = total_g.iter().zip(half).map(|(gk, hk)| gk.abs() * hk).sum();
                lb_terms.max(value - slack)
            }
            Aggregate::Max => lb_terms.max(pair_bound(&terms, half)),
        };
        (value, lb.min(value))
    }
}

/// Lower bound on `min_δ max_i (a_i + g_i·δ)` over `|δ_k| ≤ h_k` from the
/// best convex mix of two terms: for `λ ∈ [0, 1]` the minimum is at least
/// `λ a_i + (1−λ) a_j − Σ_k |λ g_ik + (1−λ) g_jk| h_k`, a concave piecewise
/// linear function of `λ` maximized at an end or a kink.
fn pair_bound(terms: &[(f64, Vec<f64>)], half: &[f64]) -> f64 {
    let at = |i: usize, j: usize, t: f64| -> f64 {
        let (ai, gi) = &terms[i];
        let (aj, gj) = &terms[j];
        let slack: f64 = gi
            .iter()
            .zip(gj)
            .zip(half)
            .map(|((x, y), h)| (t * x + (1.0 - t) * y).abs() * h)
            .sum();
        t * ai + (1.0 - t) * aj - slack
    };
    // only terms that can be active somewhere in the cell
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let live: Vec<usize> = (0..terms.len())
        .filter(|&i| {
            let reach: f64 = terms[i].1.iter().zip(half).map(|(g, h)| g.abs() * h).sum();
            terms[i].0 + 2.0 * reach >= top
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    for (x, &i) in live.iter().enumerate() {
        for &j in &live[x + 1..] {
            best = best.max(at(i, j, 0.0)).max(at(i, j, 1.0));
            for (gi, gj) in terms[i].1.iter().zip(&terms[j].1) {
                let den = gj - gi;
                if den != 0.0 {
                    let t = gj / den;
                    if (0.0..=1.0).contains(&t) {
                        best = best.max(at(i, j, t));
                    }
                }
            }
        }
    }
    best
}

#[derive(Debug)]
struct Cell {
    center: Vec<f64>,
    half: Vec<f64>,
    lb: f64,
    seq: u64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed: BinaryHeap is a max-heap and we pop the smallest bound first.
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lb
            .total_cmp(&self.lb)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    problem: Problem<'a>,
    heap: BinaryHeap<Cell>,
    frozen_lb: f64,
    best: Vec<f64>,
    best_value: f64,
    evals: usize,
    seq: u64,
    min_half: f64,
}

impl<'a> Search<'a> {
    fn new(problem: Problem<'a>, lo: &[f64], hi: &[f64], scale: f64) -> Self {
        let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
        let (value, lb) = problem.bound(&center, &half);
        let mut heap = BinaryHeap::new();
        heap.push(Cell {
            center: center.clone(),
            half,
            lb,
            seq: 0,
        });
        Search {
            problem,
            heap,
            frozen_lb: f64::INFINITY,
            best: center,
            best_value: value,
            evals: 1,
            seq: 1,
            min_half: 1e-13 * scale,
        }
    }

    fn lower_bound(&self) -> f64 {
        self.heap
            .peek()
            .map_or(f64::INFINITY, |c| c.lb)
            .min(self.frozen_lb)
    }

    fn gap(&self) -> f64 {
        self.best_value - self.lower_bound()
    }

    fn target(&self) -> f64 {
        tol::OPT_GAP * (1.0 + self.best_value)
    }

    fn offer(&mut self, y: &[f64], value: f64) {
        if value < self.best_value {
            self.best_value = value;
            self.best.copy_from_slice(y);
        }
    }

    fn run(&mut self, budget: usize, floor: f64) {
        while self.evals + 2 <= budget {
            if self.best_value - self.lower_bound().max(floor) <= self.target() {
                return;
            }
            let Some(cell) = self.heap.pop() else { return };
            let (axis, &width) = cell
                .half
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .unwrap();
            if width <= self.min_half {
                self.frozen_lb = self.frozen_lb.min(cell.lb);
                continue;
            }
            let mut half = cell.half.clone();
            half[axis] = 0.5 * width;
            for sign in [-1.0, 1.0] {
                let mut center = cell.center.clone();
                center[axis] += sign * half[axis];
                let (value, lb) = self.problem.bound(&center, &half);
                self.evals += 1;
                self.offer(&center, value);
                self.heap.push(Cell {
                    center,
                    half: half.clone(),
                    lb: lb.max(cell.lb),
                    seq: self.seq,
                });
                self.seq += 1;
            }
        }
    }

    /// Compass search from the incumbent over axis and diagonal directions.
    fn polish(&mut self, budget: usize, initial_step: f64) {
        let d = self.best.len();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for k in 0..d {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; d];
                v[k] = s;
                dirs.push(v);
            }
        }
        if d <= 4 {
            for mask in 0..(1u32 << d) {
                dirs.push(
                    (0..d)
                        .map(|k| if mask & (1 << k) == 0 { 1.0 } else { -1.0 })
                        .collect(),
                );
            }
        }
        let mut step = initial_step;
        let mut y = self.best.clone();
        while step > self.min_half && self.evals < budget {
            let mut improved = false;
            for dir in &dirs {
                if self.evals >= budget {
                    break;
                }
                for (yk, (bk, dk)) in y.iter_mut().zip(self.best.iter().zip(dir)) {
                    *yk = bk + step * dk;
                }
                let v = self.problem.value(&y);
                self.evals += 1;
                if v < self.best_value {
                    self.best_value = v;
                    self.best.copy_from_slice(&y);
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
}

/// Minimizes the aggregate distance over the profile's padded bounding box.
///
/// `floor` is an externally known lower bound on the optimum (0 if none).
/// For norms without a transform the optimum lies in the bounding box (the
/// coordinate-wise projection onto the box shrinks every distance); for
/// transformed norms the box is enlarged while the incumbent touches its
/// boundary.
pub(crate) fn minimize(
    profile: &Profile,
    norm: &Norm,
    agg: Aggregate,
    budget: usize,
    floor: f64,
) -> OptResult {
    let (mut lo, mut hi) = profile.bounding_box();
    let span = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let scale = span.max(lo.iter().chain(&hi).map(|v| v.abs()).fold(0.0, f64::max));
    let pad = if span > 0.0 { span / 20.0 } else { 1.0 };
    for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
        *l -= pad;
        *h += pad;
    }

    let mut attempts = 0;
    loop {
        let problem = Problem {
            points: profile.points(),
            norm,
            agg,
        };
        let mut search = Search::new(problem, &lo, &hi, scale.max(1e-300));
        let polish_budget = budget / 10;
        search.run(budget - polish_budget, floor);
        if search.gap() > search.target() {
            let step = pad.min(span / 8.0).max(search.min_half * 2.0);
            let cap = search.evals + polish_budget;
            search.polish(cap, step);
            search.run(budget, floor);
        } else {
            let cap = search.evals + 64 * lo.len();
            search.polish(cap.min(budget.max(search.evals)), pad / 64.0);
        }
        let lower = search.lower_bound().max(floor);
        let touches = !norm.is_monotone()
            && search
                .best
                .iter()
                .zip(lo.iter().zip(&hi))
                .any(|(y, (l, h))| (y - l).abs() <= pad || (h - y).abs() <= pad);
        if touches && attempts < 2 {
            attempts += 1;
            for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                let c = 0.5 * (*l + *h);
                let w = *h - *l;
                *l = c - 1.5 * w;
                *h = c + 1.5 * w;
            }
            continue;
        }
        return OptResult {
            point: Point::from_raw(search.best.clone()),
            value: search.best_value,
            certified_gap: (search.best_value - lower).max(0.0),
            method: OptMethod::Grid,
            evaluations: search.evals,
        };
    }
}
