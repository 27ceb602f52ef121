//! Per-point fair radii.
//!
//! The fair radius `r_ell(x)` is the smallest radius whose ball around `x`
//! contains at least `ceil(n/ell)` points of the set, counting `x` itself.
//! With `ell = k` it is the distance within which a point can expect a
//! center if `k` centers were spread proportionally.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// Fair radii of every point for a fixed divisor `ell`.
#[derive(Debug, Clone)]
pub struct FairRadii {
    ell: usize,
    quota: usize,
    radii: Vec<f64>,
}

impl FairRadii {
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Number of points a ball must capture: `ceil(n/ell)`.
    pub fn quota(&self) -> usize {
        self.quota
    }

    pub fn radius(&self, x: usize) -> f64 {
        self.radii[x]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

fn quota_for(n: usize, ell: usize) -> usize {
    n.div_ceil(ell)
}

/// Compute the fair radius of every point.
///
/// Each point's distance row is sorted and the quota-th smallest entry
/// taken (the point itself sits at distance zero). Rows are independent,
/// so the loop is data parallel.
pub fn fair_radii(ps: &PointSet, ell: usize) -> Result<FairRadii> {
    let n = ps.len();
    if ell < 1 || ell > n {
        return Err(Error::EllOutOfRange { ell, n });
    }
    let quota = quota_for(n, ell);
    let radii: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut dists: Vec<f64> = (0..n).map(|y| ps.distance(x, y)).collect();
            dists.sort_unstable_by(f64::total_cmp);
            dists[quota - 1]
        })
        .collect();
    Ok(FairRadii { ell, quota, radii })
}

/// Selection-based variant of [`fair_radii`] that avoids the full sort.
/// Same output bit for bit; kept as the faster path for large rows.
pub fn fair_radii_select(ps: &PointSet, ell: usize) -> Result<FairRadii> {
    let n = ps.len();
    if ell < 1 || ell > n {
        return Err(Error::EllOutOfRange { ell, n });
    }
    let quota = quota_for(n, ell);
    let radii: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut dists: Vec<f64> = (0..n).map(|y| ps.distance(x, y)).collect();
            let (_, nth, _) = dists.select_nth_unstable_by(quota - 1, f64::total_cmp);
            *nth
        })
        .collect();
    Ok(FairRadii { ell, quota, radii })
}

/// Independent test oracle: try every distance from `x` as a candidate
/// radius and return the smallest one whose ball meets the quota.
pub fn brute_force_fair_radius(ps: &PointSet, ell: usize, x: usize) -> Result<f64> {
    let n = ps.len();
    if ell < 1 || ell > n {
        return Err(Error::EllOutOfRange { ell, n });
    }
    ps.check_index(x)?;
    let quota = quota_for(n, ell);
    let dists: Vec<f64> = (0..n).map(|y| ps.distance(x, y)).collect();
    let mut best = f64::INFINITY;
    for &candidate in &dists {
        if candidate >= best {
            continue;
        }
        let count = dists.iter().filter(|&&d| d <= candidate).count();
        if count >= quota {
            best = candidate;
        }
    }
    Ok(best)
}
