//! Brute-force ground truth for small instances and the fairness audit
//! used by every fairness claim in the test suites.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fair_radius::FairRadii;
use crate::geometry::{CostSpec, KahanSum, Norm, PointSet};

/// Default cap on the number of enumerated center sets.
pub const DEFAULT_ORACLE_CAP: u64 = 2_000_000;

/// Outcome of exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Minimum-cost center set, ties broken lexicographically.
    pub centers: Vec<usize>,
    pub cost: f64,
    /// Audited max ratio of the optimum; None for unconstrained runs
    /// (no radii supplied).
    pub fairness_ratio: Option<f64>,
    /// Candidate sets that satisfied the fairness constraint (all sets
    /// when unconstrained).
    pub feasible_count: u64,
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Cost of a candidate set, or None when some point violates its
/// fairness bound.
fn eval_candidate(ps: &PointSet, centers: &[usize], p: Norm, bounds: Option<&[f64]>) -> Option<f64> {
    let n = ps.len();
    match p {
        Norm::Infinity => {
            let mut worst: f64 = 0.0;
            for x in 0..n {
                let d = centers.iter().map(|&c| ps.distance(x, c)).fold(f64::INFINITY, f64::min);
                if let Some(b) = bounds {
                    if d > b[x] {
                        return None;
                    }
                }
                worst = worst.max(d);
            }
            Some(worst)
        }
        Norm::Finite(_) => {
            let mut sum = KahanSum::default();
            for x in 0..n {
                let d = centers.iter().map(|&c| ps.distance(x, c)).fold(f64::INFINITY, f64::min);
                if let Some(b) = bounds {
                    if d > b[x] {
                        return None;
                    }
                }
                sum.add(p.term(d));
            }
            Some(p.finish(sum.value()))
        }
    }
}

type Best = Option<(f64, Vec<usize>)>;

fn better(a: Best, b: Best) -> Best {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(x), Some(y)) => {
            if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Enumerate every k-subset of the point set and return the cheapest one,
/// optionally restricted to sets where every point `x` has a center
/// within `alpha * r_k(x)`.
///
/// Enumeration is lexicographic and partitioned across threads by the
/// first center; ties resolve to the lexicographically smallest set
/// independent of thread count. Refuses instances with more than `cap`
/// candidate sets (default 2e6).
pub fn brute_force_optimal(
    ps: &PointSet,
    spec: &CostSpec,
    fairness: Option<(f64, &FairRadii)>,
    cap: Option<u64>,
) -> Result<OracleResult> {
    let n = ps.len();
    spec.validate_k(n)?;
    let k = spec.k;
    let cap = cap.unwrap_or(DEFAULT_ORACLE_CAP);
    let candidates = binomial(n, k);
    if candidates.is_none_or(|c| c > cap as u128) {
        return Err(Error::OracleCapExceeded {
            candidates: candidates.unwrap_or(u128::MAX),
            cap,
        });
    }

    let bounds: Option<Vec<f64>> = fairness.map(|(alpha, radii)| {
        assert_eq!(radii.len(), n, "radii computed on a different point set");
        (0..n).map(|x| alpha * radii.radius(x)).collect()
    });

    let (best, feasible_count) = (0..=(n - k))
        .into_par_iter()
        .map(|first| {
            let mut local_best: Best = None;
            let mut local_count: u64 = 0;
            let mut centers = Vec::with_capacity(k);
            for rest in ((first + 1)..n).combinations(k - 1) {
                centers.clear();
                centers.push(first);
                centers.extend_from_slice(&rest);
                if let Some(c) = eval_candidate(ps, &centers, spec.p, bounds.as_deref()) {
                    local_count += 1;
                    local_best = better(local_best, Some((c, centers.clone())));
                }
            }
            (local_best, local_count)
        })
        .reduce(|| (None, 0), |a, b| (better(a.0, b.0), a.1 + b.1));

    match best {
        None => Err(Error::OracleInfeasible {
            alpha: fairness.map(|(a, _)| a).unwrap_or(f64::NAN),
        }),
        Some((cost, centers)) => {
            let fairness_ratio = fairness
                .map(|(_, radii)| fairness_ratio(ps, radii, &centers).map(|a| a.max_ratio))
                .transpose()?;
            Ok(OracleResult { centers, cost, fairness_ratio, feasible_count })
        }
    }
}

/// Per-point fairness ratios of a center set.
#[derive(Debug, Clone)]
pub struct FairnessAudit {
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub per_point: Vec<f64>,
}

/// Audit `d(x, S) / r_k(x)` for every point. A point with zero fair
/// radius scores 0 when it coincides with a center and infinity
/// otherwise; any infinity propagates into max and mean.
pub fn fairness_ratio(ps: &PointSet, radii: &FairRadii, centers: &[usize]) -> Result<FairnessAudit> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    for &c in centers {
        ps.check_index(c)?;
    }
    assert_eq!(radii.len(), ps.len(), "radii computed on a different point set");
    let per_point: Vec<f64> = (0..ps.len())
        .map(|x| {
            let d = centers.iter().map(|&c| ps.distance(x, c)).fold(f64::INFINITY, f64::min);
            let r = radii.radius(x);
            if r > 0.0 {
                d / r
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let max_ratio = per_point.iter().cloned().fold(0.0, f64::max);
    let mean_ratio = per_point.iter().sum::<f64>() / per_point.len() as f64;
    Ok(FairnessAudit { max_ratio, mean_ratio, per_point })
}
