//! Greedy construction of critical balls and verifiers for their
//! coverage (C-1), separation (C-2), and feasibility properties.
//!
//! A critical ball set reduces the per-point fairness constraint to a
//! finite one: any center set that intersects every ball is O(alpha)-fair
//! for the whole point set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fair_radius::FairRadii;
use crate::geometry::PointSet;

/// Coverage multiplier used when marking points as covered during the
/// greedy construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoverMode {
    /// `6 * alpha`, the value under which the guarantees are proved.
    Theory,
    /// Fixed 3, the relaxation used for empirical runs.
    Experiment,
    /// Caller-chosen multiplier.
    Explicit(f64),
}

impl CoverMode {
    pub fn multiplier(&self, alpha: f64) -> f64 {
        match self {
            CoverMode::Theory => 6.0 * alpha,
            CoverMode::Experiment => 3.0,
            CoverMode::Explicit(v) => *v,
        }
    }
}

impl std::str::FromStr for CoverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            t if t.eq_ignore_ascii_case("theory") => Ok(CoverMode::Theory),
            t if t.eq_ignore_ascii_case("experiment") => Ok(CoverMode::Experiment),
            t => {
                let v: f64 = t.parse().map_err(|_| Error::InvalidCoverMult(f64::NAN))?;
                if !v.is_finite() || v < 1.0 {
                    return Err(Error::InvalidCoverMult(v));
                }
                Ok(CoverMode::Explicit(v))
            }
        }
    }
}

/// One ball in serialized form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallRecord {
    pub center: usize,
    pub radius: f64,
    pub r_k: f64,
}

/// Ordered critical balls: center indices in selection order (which is
/// non-decreasing fair-radius order) with radius `alpha * r_k(center)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalBallSet {
    pub alpha: f64,
    pub cover_mult: f64,
    pub balls: Vec<BallRecord>,
}

impl CriticalBallSet {
    /// Ball set with no balls; every center set is feasible for it.
    pub fn empty(alpha: f64, cover_mult: f64) -> Self {
        CriticalBallSet { alpha, cover_mult, balls: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn centers(&self) -> impl Iterator<Item = usize> + '_ {
        self.balls.iter().map(|b| b.center)
    }

    /// Whether point `x` lies in ball `i`.
    pub fn contains(&self, ps: &PointSet, i: usize, x: usize) -> bool {
        ps.distance(self.balls[i].center, x) <= self.balls[i].radius
    }

    /// Indices of the balls containing each point of the set. In theory
    /// mode the balls are disjoint so each list has at most one entry.
    pub(crate) fn membership(&self, ps: &PointSet) -> Vec<Vec<u32>> {
        let mut member = vec![Vec::new(); ps.len()];
        for (i, ball) in self.balls.iter().enumerate() {
            for (x, list) in member.iter_mut().enumerate() {
                if ps.distance(ball.center, x) <= ball.radius {
                    list.push(i as u32);
                }
            }
        }
        member
    }
}

/// Greedy ball construction: repeatedly take the uncovered point with the
/// smallest fair radius (ties by index) as a ball center, then mark every
/// still-uncovered `x` with `d(x, c) <= cover_mult * r_k(x)` as covered.
///
/// With `cover_mult = 6 * alpha` the result satisfies C-1 and C-2 and has
/// at most `ell` balls where `ell` is the radii divisor.
pub fn build_critical_balls(
    ps: &PointSet,
    radii: &FairRadii,
    alpha: f64,
    cover_mult: f64,
) -> Result<CriticalBallSet> {
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !cover_mult.is_finite() || cover_mult < 1.0 {
        return Err(Error::InvalidCoverMult(cover_mult));
    }
    let n = ps.len();
    assert_eq!(radii.len(), n, "radii computed on a different point set");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        radii.radius(a).total_cmp(&radii.radius(b)).then(a.cmp(&b))
    });

    let mut covered = vec![false; n];
    let mut balls = Vec::new();
    for &c in &order {
        if covered[c] {
            continue;
        }
        let r_k = radii.radius(c);
        balls.push(BallRecord { center: c, radius: alpha * r_k, r_k });
        for (x, cov) in covered.iter_mut().enumerate() {
            if !*cov && ps.distance(x, c) <= cover_mult * radii.radius(x) {
                *cov = true;
            }
        }
    }
    Ok(CriticalBallSet { alpha, cover_mult, balls })
}

/// Result of auditing a ball set against C-1 and C-2.
///
/// C-1 is checked against the set's own cover multiplier; C-2 is always
/// checked at `6 * alpha` separation, reported separately.
#[derive(Debug, Clone)]
pub struct CriticalReport {
    pub c1_ok: bool,
    /// Point maximizing `d(x, C*) / r_k(x)` and that ratio.
    pub c1_worst: Option<(usize, f64)>,
    pub c2_ok: bool,
    /// Ball pair minimizing `d(c_i, c_j) / (6 alpha max(r_i, r_j))` and
    /// that margin; margins must stay strictly above 1.
    pub c2_worst: Option<(usize, usize, f64)>,
    pub ball_count: usize,
}

fn zero_safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Exhaustively check the coverage and separation properties. Read only.
pub fn verify_critical(
    ps: &PointSet,
    radii: &FairRadii,
    balls: &CriticalBallSet,
    alpha: f64,
) -> CriticalReport {
    let centers: Vec<usize> = balls.centers().collect();
    let mut c1_ok = true;
    let mut c1_worst: Option<(usize, f64)> = None;
    for x in 0..ps.len() {
        let d = centers.iter().map(|&c| ps.distance(x, c)).fold(f64::INFINITY, f64::min);
        if d > balls.cover_mult * radii.radius(x) {
            c1_ok = false;
        }
        let ratio = zero_safe_ratio(d, radii.radius(x));
        if c1_worst.is_none_or(|(_, worst)| ratio > worst) {
            c1_worst = Some((x, ratio));
        }
    }

    let mut c2_ok = true;
    let mut c2_worst: Option<(usize, usize, f64)> = None;
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            let d = ps.distance(centers[i], centers[j]);
            let sep = 6.0 * alpha * radii.radius(centers[i]).max(radii.radius(centers[j]));
            if d <= sep {
                c2_ok = false;
            }
            let margin = zero_safe_ratio(d, sep);
            if c2_worst.is_none_or(|(_, _, worst)| margin < worst) {
                c2_worst = Some((i, j, margin));
            }
        }
    }

    CriticalReport { c1_ok, c1_worst, c2_ok, c2_worst, ball_count: balls.len() }
}

/// True iff every ball contains at least one of the given centers.
pub fn verify_feasible(balls: &CriticalBallSet, centers: &[usize], ps: &PointSet) -> bool {
    balls
        .balls
        .iter()
        .all(|b| centers.iter().any(|&s| ps.distance(b.center, s) <= b.radius))
}
