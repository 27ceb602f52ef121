//! Comparison algorithms: ball centers with an eta binary search, the
//! greedy initialization on its own, and an unconstrained local search.

use serde::{Deserialize, Serialize};

use crate::critical_balls::{build_critical_balls, CriticalBallSet};
use crate::error::Result;
use crate::fair_radius::FairRadii;
use crate::geometry::{CostSpec, PointSet};
use crate::local_search::{initialize, local_search, LsParams, Solution};

/// Outcome of the eta binary search.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EtaSearchResult {
    /// The multiplier whose greedy ball construction was used.
    pub eta: f64,
    /// Balls produced at that eta, before any padding.
    pub ball_count: usize,
    /// True when some probe hit exactly k balls.
    pub converged_to_k: bool,
    /// Number of eta probes.
    pub iterations: usize,
}

fn eta_balls(ps: &PointSet, radii: &FairRadii, eta: f64) -> Result<CriticalBallSet> {
    // Coverage rule d(x, c) <= eta * r_k(x): the greedy construction with
    // both the ball multiplier and the cover multiplier set to eta.
    build_critical_balls(ps, radii, eta.max(1.0), eta.max(1.0))
}

/// Center selection by ball construction alone: binary-search an
/// `eta in [1, 2]` whose greedy ball count is exactly `k` and use the
/// ball centers.
///
/// When no probe hits `k` exactly, the probe with the largest count still
/// at most `k` wins and the remaining centers are farthest-point padding;
/// if every probe overshoots `k`, the `eta = 2` construction is truncated
/// to its first `k` balls. Either way the result has exactly `k` centers
/// and `converged_to_k` is false.
pub fn fair_k_center_jung(
    ps: &PointSet,
    radii: &FairRadii,
    spec: &CostSpec,
    tol: f64,
    max_bsearch: usize,
) -> Result<(Solution, EtaSearchResult)> {
    spec.validate_k(ps.len())?;
    let k = spec.k;
    let mut probes: Vec<(f64, usize)> = Vec::new();
    let probe = |eta: f64, probes: &mut Vec<(f64, usize)>| -> Result<CriticalBallSet> {
        let balls = eta_balls(ps, radii, eta)?;
        probes.push((eta, balls.len()));
        Ok(balls)
    };

    let finish = |balls: CriticalBallSet,
                      eta: f64,
                      converged: bool,
                      probes: &[(f64, usize)]|
     -> Result<(Solution, EtaSearchResult)> {
        // The binary search assumes the count is non-increasing in eta;
        // surface any observed violation but keep going.
        let mut sorted = probes.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in sorted.windows(2) {
            if w[0].1 < w[1].1 {
                eprintln!(
                    "warning: ball count not monotone in eta: {} balls at eta {} vs {} at {}",
                    w[0].1, w[0].0, w[1].1, w[1].0
                );
            }
        }
        let ball_count = balls.len();
        let solution = initialize(ps, &balls, spec)?;
        Ok((
            solution,
            EtaSearchResult { eta, ball_count, converged_to_k: converged, iterations: probes.len() },
        ))
    };

    let low_balls = probe(1.0, &mut probes)?;
    if low_balls.len() == k {
        return finish(low_balls, 1.0, true, &probes);
    }
    if low_balls.len() < k {
        // Even the loosest construction yields too few balls; every eta
        // gives at most this count, so pad from here.
        return finish(low_balls, 1.0, false, &probes);
    }

    let high_balls = probe(2.0, &mut probes)?;
    if high_balls.len() == k {
        return finish(high_balls, 2.0, true, &probes);
    }
    if high_balls.len() > k {
        // Every count in [1, 2] exceeds k: keep the k tightest balls.
        let mut truncated = high_balls;
        truncated.balls.truncate(k);
        return finish(truncated, 2.0, false, &probes);
    }

    let mut lo = 1.0;
    let mut hi = 2.0;
    let mut best: (f64, CriticalBallSet) = (2.0, high_balls);
    while probes.len() < max_bsearch && hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let balls = probe(mid, &mut probes)?;
        let count = balls.len();
        if count == k {
            return finish(balls, mid, true, &probes);
        }
        if count > k {
            lo = mid;
        } else {
            if count > best.1.len() {
                best = (mid, balls.clone());
            }
            hi = mid;
        }
    }
    let (eta, balls) = best;
    finish(balls, eta, false, &probes)
}

/// The initialization step alone: critical balls plus farthest-point
/// padding, no search.
pub fn greedy_baseline(
    ps: &PointSet,
    radii: &FairRadii,
    spec: &CostSpec,
    alpha: f64,
    cover_mult: f64,
) -> Result<(Solution, CriticalBallSet)> {
    let balls = build_critical_balls(ps, radii, alpha, cover_mult)?;
    let solution = initialize(ps, &balls, spec)?;
    Ok((solution, balls))
}

/// Standard unconstrained swap local search: every swap is feasible.
pub fn vanilla_local_search(
    ps: &PointSet,
    spec: &CostSpec,
    params: &LsParams,
) -> Result<Solution> {
    let no_balls = CriticalBallSet::empty(1.0, 1.0);
    let init = initialize(ps, &no_balls, spec)?;
    local_search(ps, &no_balls, &init, spec, params)
}
