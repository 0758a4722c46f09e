//! Direction-based integral Fréchet distance.
//!
//! Both curves are reduced to their tangent angle as a function of normalized
//! arc length. A coupling is a monotone path in the unit square of parameter
//! space; its cost is the wrapped angular difference integrated with respect
//! to `ds + dt`. Since only directions enter, the distance is unchanged by
//! translation and uniform positive scaling of either curve.
//!
//! The angle of a polyline is piecewise constant, so the cost field is
//! constant on the rectangles of the breakpoint grid. Under the L1 length
//! element any monotone path through a rectangle can be pushed onto its
//! boundary without increasing the cost, hence the optimum is found by a DP
//! over grid lines where each edge costs the cheaper of its two neighbouring
//! rectangles. The breakpoints are the polyline vertices merged with `n`
//! uniform samples; the samples fix where partial matches may start and end.

use std::f64::consts::{PI, TAU};

use super::{wrap_angle, Polyline};

pub const DEFAULT_SAMPLES: usize = 64;

const TIE_TOL: f64 = 1e-12;

/// Piecewise-constant tangent angle over normalized arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionProfile {
    /// `(arc-length fraction where the piece starts, angle in [-π, π))`
    pub samples: Vec<(f64, f64)>,
}

impl DirectionProfile {
    pub fn new(line: &Polyline, n_samples: usize) -> Self {
        assert!(n_samples >= 2, "need at least two samples per curve");
        let segs: Vec<_> = line.segments().collect();
        let mut cum = Vec::with_capacity(segs.len() + 1);
        cum.push(0.0);
        for (a, b) in &segs {
            cum.push(cum.last().unwrap() + a.dist(*b));
        }
        let total = *cum.last().unwrap();
        let angles: Vec<f64> = segs
            .iter()
            .map(|(a, b)| wrap_angle((*b - *a).angle()))
            .collect();

        let mut cuts: Vec<f64> = (0..n_samples)
            .map(|i| i as f64 / n_samples as f64)
            .collect();
        cuts.extend(cum[1..segs.len()].iter().map(|c| c / total));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| *a - *b <= 1e-12);

        let mut samples = Vec::with_capacity(cuts.len());
        let mut k = 0;
        for (idx, &f) in cuts.iter().enumerate() {
            let next = cuts.get(idx + 1).copied().unwrap_or(1.0);
            let mid = 0.5 * (f + next) * total;
            while k + 1 < segs.len() && cum[k + 1] <= mid {
                k += 1;
            }
            samples.push((f, angles[k]));
        }
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn position(&self, node: usize) -> f64 {
        self.samples.get(node).map_or(1.0, |s| s.0)
    }

    fn piece_lengths(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.position(i + 1) - self.position(i))
            .collect()
    }
}

/// Absolute angular difference wrapped into [0, π].
pub fn wrapped_angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % TAU;
    if d > PI {
        TAU - d
    } else {
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub distance: f64,
    /// Monotone sequence of `(breakpoint on a, breakpoint on b)` grid nodes.
    pub correspondence: Vec<(usize, usize)>,
    /// Matched part of `b` as arc-length fractions.
    pub subcurve: (f64, f64),
}

#[derive(Clone, Copy)]
struct Cell {
    cost: f64,
    // start node on b; among equal costs the earliest start wins at the end
    start: u32,
}

impl Cell {
    const INF: Cell = Cell {
        cost: f64::INFINITY,
        start: u32::MAX,
    };

    fn better_than(self, o: Cell) -> bool {
        self.cost < o.cost - TIE_TOL || (self.cost <= o.cost + TIE_TOL && self.start < o.start)
    }
}

const FROM_START: u8 = 0;
const FROM_A: u8 = 1;
const FROM_B: u8 = 2;
const FROM_DIAG: u8 = 3;
// transitions out of the "not yet advanced along b" layer
const FROM_B_IDLE: u8 = 4;
const FROM_DIAG_IDLE: u8 = 5;

struct Dp {
    distance: f64,
    start_j: usize,
    end_j: usize,
    moves: Option<Vec<u8>>,
}

/// DP over grid nodes `(i, j)`, `i ∈ 0..=|a|`, `j ∈ 0..=|b|`.
///
/// Two layers: `idle` holds paths that have only moved along `a` from their
/// start node, `cur` holds paths that advanced along `b` at least once. Only
/// the latter may end, so a matched subcurve never has zero length.
fn run_dp(a: &DirectionProfile, b: &DirectionProfile, partial: bool, record: bool) -> Dp {
    let na = a.len();
    let nb = b.len();
    let la = a.piece_lengths();
    let lb = b.piece_lengths();
    let cols = nb + 1;
    let cell = |i: usize, j: usize| wrapped_angle_diff(a.samples[i].1, b.samples[j].1);
    let mut moves = record.then(|| vec![FROM_START; (na + 1) * cols]);
    let mut prev = vec![Cell::INF; cols];
    let mut cur = vec![Cell::INF; cols];
    let mut idle_prev = vec![f64::INFINITY; cols];
    let mut idle = vec![f64::INFINITY; cols];
    let mut row_lo = vec![0.0; nb];
    let mut row_hi: Vec<f64> = (0..nb).map(|j| cell(0, j)).collect();

    for i in 0..=na {
        if i > 0 {
            std::mem::swap(&mut row_lo, &mut row_hi);
            if i < na {
                for (j, c) in row_hi.iter_mut().enumerate() {
                    *c = cell(i, j);
                }
            }
        }
        // row_lo: rectangles below the line s = pos(i); row_hi: above it
        let below = |j: usize| if i > 0 { row_lo[j] } else { f64::INFINITY };
        let above = |j: usize| if i < na { row_hi[j] } else { f64::INFINITY };
        let along_a = |j: usize| {
            let lo = if j > 0 { row_lo[j - 1] } else { f64::INFINITY };
            let hi = if j < nb { row_lo[j] } else { f64::INFINITY };
            lo.min(hi) * la[i - 1]
        };
        for j in 0..=nb {
            idle[j] = if i == 0 {
                if j == 0 || partial {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                idle_prev[j] + along_a(j)
            };
            if j == 0 {
                cur[0] = Cell::INF;
                continue;
            }
            let mut best = Cell::INF;
            let mut mv = FROM_START;
            let diag_w = if i > 0 {
                row_lo[j - 1] * (la[i - 1] + lb[j - 1])
            } else {
                f64::INFINITY
            };
            let b_w = below(j - 1).min(above(j - 1)) * lb[j - 1];
            let start = j as u32 - 1;
            // diagonal first so that exact ties keep the diagonal coupling
            let options = [
                (
                    i > 0,
                    prev[j - 1].cost + diag_w,
                    prev[j - 1].start,
                    FROM_DIAG,
                ),
                (i > 0, idle_prev[j - 1] + diag_w, start, FROM_DIAG_IDLE),
                (
                    i > 0,
                    if i > 0 {
                        prev[j].cost + along_a(j)
                    } else {
                        f64::INFINITY
                    },
                    prev[j].start,
                    FROM_A,
                ),
                (true, cur[j - 1].cost + b_w, cur[j - 1].start, FROM_B),
                (true, idle[j - 1] + b_w, start, FROM_B_IDLE),
            ];
            for (ok, cost, st, m) in options {
                let cand = Cell { cost, start: st };
                if ok && cand.better_than(best) {
                    best = cand;
                    mv = m;
                }
            }
            cur[j] = best;
            if let Some(m) = moves.as_mut() {
                m[i * cols + j] = mv;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut idle_prev, &mut idle);
    }

    // `prev` holds the line s = 1
    let end_j = if partial {
        // widest subcurve among equal costs, then the earliest start
        let mut best_j = nb;
        for j in (1..=nb).rev() {
            let c = prev[j];
            let b = prev[best_j];
            let wider = (j as i64 - c.start as i64) >= (best_j as i64 - b.start as i64);
            if c.cost < b.cost - TIE_TOL || (c.cost <= b.cost + TIE_TOL && wider) {
                best_j = j;
            }
        }
        best_j
    } else {
        nb
    };
    Dp {
        distance: prev[end_j].cost,
        start_j: prev[end_j].start as usize,
        end_j,
        moves,
    }
}

fn backtrack(dp: &Dp, na: usize, nb: usize) -> Vec<(usize, usize)> {
    let moves = dp.moves.as_ref().expect("recorded moves");
    let cols = nb + 1;
    let (mut i, mut j) = (na, dp.end_j);
    let mut path = vec![(i, j)];
    let mut idle = false;
    loop {
        if idle {
            if i == 0 {
                break;
            }
            i -= 1;
            path.push((i, j));
            continue;
        }
        match moves[i * cols + j] {
            FROM_A => i -= 1,
            FROM_B => j -= 1,
            FROM_DIAG => {
                i -= 1;
                j -= 1
            }
            FROM_B_IDLE => {
                j -= 1;
                idle = true
            }
            FROM_DIAG_IDLE => {
                i -= 1;
                j -= 1;
                idle = true
            }
            _ => break,
        }
        path.push((i, j));
    }
    path.reverse();
    path
}

fn result(a: &DirectionProfile, b: &DirectionProfile, partial: bool) -> MatchResult {
    let dp = run_dp(a, b, partial, true);
    let correspondence = backtrack(&dp, a.len(), b.len());
    debug_assert_eq!(correspondence[0].1, dp.start_j);
    MatchResult {
        distance: dp.distance,
        correspondence,
        subcurve: (b.position(dp.start_j), b.position(dp.end_j)),
    }
}

impl DirectionProfile {
    /// Integral Fréchet distance between two profiles (full coupling).
    pub fn distance_to(&self, other: &DirectionProfile) -> f64 {
        run_dp(self, other, false, false).distance
    }

    /// Best coupling of all of `self` with a contiguous part of `other`.
    pub fn partial_distance_to(&self, other: &DirectionProfile) -> f64 {
        run_dp(self, other, true, false).distance
    }

    pub fn match_full(&self, other: &DirectionProfile) -> MatchResult {
        result(self, other, false)
    }

    pub fn match_partial(&self, other: &DirectionProfile) -> MatchResult {
        result(self, other, true)
    }
}

/// Direction-based integral Fréchet distance between `a` and `b`.
pub fn integral_frechet(a: &Polyline, b: &Polyline, n_samples: usize) -> MatchResult {
    DirectionProfile::new(a, n_samples).match_full(&DirectionProfile::new(b, n_samples))
}

/// Matches all of `w` against the best contiguous part of `p`.
pub fn partial_frechet(w: &Polyline, p: &Polyline, n_samples: usize) -> MatchResult {
    DirectionProfile::new(w, n_samples).match_partial(&DirectionProfile::new(p, n_samples))
}
