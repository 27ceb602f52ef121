//! Feasible initialization and swap-based local search under the
//! critical-ball feasibility constraint, plus the end-to-end fair
//! clustering pipeline.
//!
//! The search starts from the ball centers padded with farthest-point
//! picks and repeatedly takes the first feasible swap of size at most `t`
//! (in a fixed canonical order) that improves the cost by a factor of at
//! least `1/(1 - epsilon)`. Termination leaves a `(t, epsilon)`-stable
//! center set; the accepted-swap count telescopes against the cost drop.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical_balls::{build_critical_balls, verify_feasible, CoverMode, CriticalBallSet};
use crate::error::{Error, Result};
use crate::fair_radius::{fair_radii, FairRadii};
use crate::geometry::{cost, CostSpec, KahanSum, Norm, PointSet};

/// Relative slack of the fast swap filter; shortlisted candidates are
/// re-verified with a from-scratch cost before acceptance.
const FILTER_SLACK: f64 = 1e-9;

/// Local search parameters.
#[derive(Debug, Clone, Copy)]
pub struct LsParams {
    /// Maximum swap size, 1..=4. Size 1 is the practical default; size 4
    /// is the variant the approximation guarantees are stated for.
    pub t: usize,
    /// Relative improvement a swap must achieve to be accepted.
    pub epsilon: f64,
    /// Safety cap on accepted swaps.
    pub max_iters: usize,
    /// Reserved; the core search is deterministic and does not draw
    /// randomness.
    pub seed: u64,
    /// Covering-analysis constant, also drives the default epsilon.
    pub gamma: f64,
    /// Mapping-analysis constant.
    pub delta: f64,
}

impl LsParams {
    /// Defaults for an instance: `t = 1`,
    /// `epsilon = 1 / (2 gamma k max(p, 1))` with `gamma = 6`, and an
    /// iteration cap of `ceil(10 ln(n + 1) / epsilon)`.
    pub fn for_instance(n: usize, spec: &CostSpec) -> Self {
        let gamma = 6.0;
        let delta = 3.0;
        let epsilon = 1.0 / (2.0 * gamma * spec.k as f64 * spec.p.effective_p());
        let max_iters = (10.0 * ((n as f64) + 1.0).ln() / epsilon).ceil() as usize;
        LsParams { t: 1, epsilon, max_iters, seed: 0, gamma, delta }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.t < 1 || self.t > 4 {
            return Err(Error::InvalidSwapSize(self.t));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        Ok(())
    }
}

/// A center set with its induced assignment and cached distances.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Center point indices, sorted ascending.
    pub centers: Vec<usize>,
    /// Nearest center of each point, ties broken by smallest index.
    pub assignment: Vec<usize>,
    pub nearest_dist: Vec<f64>,
    /// Distance to the second-nearest center; infinity when `k = 1`.
    pub second_dist: Vec<f64>,
    /// Cost under the spec this solution was built with.
    pub cost_value: f64,
    /// Accepted swaps performed to reach this solution.
    pub iterations: usize,
    /// False when the search stopped at the iteration cap.
    pub converged: bool,
}

impl Solution {
    /// Build the assignment, distance caches, and cost for a center set.
    pub fn build(ps: &PointSet, mut centers: Vec<usize>, spec: &CostSpec) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptyCenters);
        }
        for &c in &centers {
            ps.check_index(c)?;
        }
        centers.sort_unstable();
        centers.dedup();
        let n = ps.len();
        let mut assignment = vec![0usize; n];
        let mut nearest_dist = vec![0.0; n];
        let mut second_dist = vec![0.0; n];
        for x in 0..n {
            let mut best = (usize::MAX, f64::INFINITY);
            let mut second = f64::INFINITY;
            for &c in &centers {
                let d = ps.distance(x, c);
                if d < best.1 {
                    second = best.1;
                    best = (c, d);
                } else if d < second {
                    second = d;
                }
            }
            assignment[x] = best.0;
            nearest_dist[x] = best.1;
            second_dist[x] = second;
        }
        let cost_value = cost(ps, &centers, spec)?;
        Ok(Solution {
            centers,
            assignment,
            nearest_dist,
            second_dist,
            cost_value,
            iterations: 0,
            converged: true,
        })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// Serializable view including the objective parameters.
    pub fn record(&self, spec: &CostSpec) -> SolutionRecord {
        SolutionRecord {
            k: self.centers.len(),
            p: spec.p,
            centers: self.centers.clone(),
            assignment: self.assignment.clone(),
            cost: self.cost_value,
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// JSON form of a solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub k: usize,
    pub p: Norm,
    pub centers: Vec<usize>,
    pub assignment: Vec<usize>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Part I of the search: start from the ball centers and add `k - ell`
/// farthest points (ties by smallest index).
pub fn initialize(ps: &PointSet, balls: &CriticalBallSet, spec: &CostSpec) -> Result<Solution> {
    let n = ps.len();
    spec.validate_k(n)?;
    let ell = balls.len();
    if spec.k < ell {
        return Err(Error::KBelowBallCount { k: spec.k, ell });
    }
    let mut chosen: Vec<usize> = balls.centers().collect();
    let mut is_center = vec![false; n];
    for &c in &chosen {
        ps.check_index(c)?;
        is_center[c] = true;
    }
    // dist_to_set[x] = d(x, S); infinity while S is empty so the first
    // pick falls back to the smallest index.
    let mut dist_to_set = vec![f64::INFINITY; n];
    let absorb = |center: usize, dist_to_set: &mut [f64]| {
        for (x, d) in dist_to_set.iter_mut().enumerate() {
            *d = d.min(ps.distance(x, center));
        }
    };
    for &c in &chosen {
        absorb(c, &mut dist_to_set);
    }
    while chosen.len() < spec.k {
        let mut pick = None;
        let mut best = f64::NEG_INFINITY;
        for x in 0..n {
            if !is_center[x] && dist_to_set[x] > best {
                best = dist_to_set[x];
                pick = Some(x);
            }
        }
        let z = pick.expect("k <= n leaves a non-center to pick");
        chosen.push(z);
        is_center[z] = true;
        absorb(z, &mut dist_to_set);
    }
    Solution::build(ps, chosen, spec)
}

fn check_swap_sets(sol: &Solution, out_set: &[usize], in_set: &[usize]) -> Result<()> {
    if out_set.is_empty() || out_set.len() != in_set.len() {
        return Err(Error::InvalidSwap(format!(
            "swap sizes must match and be nonzero (out {}, in {})",
            out_set.len(),
            in_set.len()
        )));
    }
    for (i, &o) in out_set.iter().enumerate() {
        if !sol.centers.contains(&o) {
            return Err(Error::InvalidSwap(format!("{o} is not a current center")));
        }
        if out_set[..i].contains(&o) {
            return Err(Error::InvalidSwap(format!("duplicate outgoing center {o}")));
        }
    }
    for (i, &w) in in_set.iter().enumerate() {
        if sol.centers.contains(&w) {
            return Err(Error::InvalidSwap(format!("{w} is already a center")));
        }
        if in_set[..i].contains(&w) {
            return Err(Error::InvalidSwap(format!("duplicate incoming point {w}")));
        }
    }
    Ok(())
}

fn one_swap_cost(ps: &PointSet, sol: &Solution, p: Norm, out: usize, incoming: usize) -> f64 {
    p.aggregate((0..ps.len()).map(|x| {
        let dxw = ps.distance(incoming, x);
        if sol.assignment[x] == out {
            sol.second_dist[x].min(dxw)
        } else {
            sol.nearest_dist[x].min(dxw)
        }
    }))
}

fn multi_swap_cost(
    ps: &PointSet,
    sol: &Solution,
    p: Norm,
    out_set: &[usize],
    in_set: &[usize],
    survivors: &[usize],
) -> f64 {
    p.aggregate((0..ps.len()).map(|x| {
        let d_in = in_set.iter().map(|&w| ps.distance(w, x)).fold(f64::INFINITY, f64::min);
        if out_set.contains(&sol.assignment[x]) {
            survivors
                .iter()
                .map(|&c| ps.distance(x, c))
                .fold(d_in, f64::min)
        } else {
            sol.nearest_dist[x].min(d_in)
        }
    }))
}

/// Cost of `(centers u in_set) \ out_set` without mutating the solution.
/// Single swaps run in `O(n)` off the cached distances; larger swaps
/// rescan the points whose center is removed.
pub fn evaluate_swap(
    ps: &PointSet,
    sol: &Solution,
    spec: &CostSpec,
    out_set: &[usize],
    in_set: &[usize],
) -> Result<f64> {
    check_swap_sets(sol, out_set, in_set)?;
    for &w in in_set {
        ps.check_index(w)?;
    }
    if out_set.len() == 1 {
        return Ok(one_swap_cost(ps, sol, spec.p, out_set[0], in_set[0]));
    }
    let survivors: Vec<usize> =
        sol.centers.iter().copied().filter(|c| !out_set.contains(c)).collect();
    Ok(multi_swap_cost(ps, sol, spec.p, out_set, in_set, &survivors))
}

/// Search state shared across scans: which balls contain each point and
/// how many current centers each ball holds.
struct FeasibilityIndex {
    membership: Vec<Vec<u32>>,
    counts: Vec<u32>,
}

impl FeasibilityIndex {
    fn new(ps: &PointSet, balls: &CriticalBallSet, centers: &[usize]) -> Self {
        let membership = balls.membership(ps);
        let mut index = FeasibilityIndex { membership, counts: vec![0; balls.len()] };
        index.reset_counts(centers);
        index
    }

    fn reset_counts(&mut self, centers: &[usize]) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        for &c in centers {
            for &b in &self.membership[c] {
                self.counts[b as usize] += 1;
            }
        }
    }

    /// Feasibility after swapping `out_set` for `in_set`: every ball that
    /// loses centers must keep or regain at least one.
    fn swap_is_feasible(&self, out_set: &[usize], in_set: &[usize]) -> bool {
        for &o in out_set {
            for &b in &self.membership[o] {
                let lost = out_set
                    .iter()
                    .filter(|&&o2| self.membership[o2].contains(&b))
                    .count() as i64;
                let gained = in_set
                    .iter()
                    .filter(|&&w| self.membership[w].contains(&b))
                    .count() as i64;
                if self.counts[b as usize] as i64 - lost + gained < 1 {
                    return false;
                }
            }
        }
        true
    }
}

/// Canonical-first improving single swap, or None. Candidates are
/// shortlisted with a decomposed `O(n)`-per-incoming-point pass and the
/// winner re-verified against the from-scratch cost.
fn scan_single_swaps(
    ps: &PointSet,
    sol: &Solution,
    spec: &CostSpec,
    feas: &FeasibilityIndex,
    threshold: f64,
) -> Option<(usize, usize)> {
    let n = ps.len();
    let centers = &sol.centers;
    let k = centers.len();
    let mut center_pos = vec![usize::MAX; n];
    for (j, &c) in centers.iter().enumerate() {
        center_pos[c] = j;
    }
    let non_centers: Vec<usize> = (0..n).filter(|&x| center_pos[x] == usize::MAX).collect();
    let filter = threshold * (1.0 + FILTER_SLACK);

    let mut shortlist: Vec<(usize, usize)> = match spec.p {
        Norm::Infinity => non_centers
            .par_iter()
            .flat_map_iter(|&w| {
                let mut hits = Vec::new();
                for &o in centers.iter() {
                    if !feas.swap_is_feasible(&[o], &[w]) {
                        continue;
                    }
                    if one_swap_cost(ps, sol, Norm::Infinity, o, w) <= filter {
                        hits.push((o, w));
                    }
                }
                hits
            })
            .collect(),
        Norm::Finite(_) => non_centers
            .par_iter()
            .flat_map_iter(|&w| {
                let mut base = KahanSum::default();
                let mut corr = vec![0.0f64; k];
                for x in 0..n {
                    let dxw = ps.distance(w, x);
                    let near_term = spec.p.term(sol.nearest_dist[x].min(dxw));
                    base.add(near_term);
                    let j = center_pos[sol.assignment[x]];
                    corr[j] += spec.p.term(sol.second_dist[x].min(dxw)) - near_term;
                }
                let mut hits = Vec::new();
                for (j, &o) in centers.iter().enumerate() {
                    if !feas.swap_is_feasible(&[o], &[w]) {
                        continue;
                    }
                    let cand = spec.p.finish((base.value() + corr[j]).max(0.0));
                    if cand <= filter {
                        hits.push((o, w));
                    }
                }
                hits
            })
            .collect(),
    };

    shortlist.sort_unstable();
    for (o, w) in shortlist {
        let mut candidate: Vec<usize> = centers.iter().copied().filter(|&c| c != o).collect();
        candidate.push(w);
        let verified = cost(ps, &candidate, spec).expect("candidate centers are valid");
        if verified <= threshold {
            return Some((o, w));
        }
    }
    None
}

/// Canonical-first improving swap of exactly `size >= 2` centers.
fn scan_multi_swaps(
    ps: &PointSet,
    sol: &Solution,
    spec: &CostSpec,
    feas: &FeasibilityIndex,
    threshold: f64,
    size: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    use itertools::Itertools;
    let n = ps.len();
    let centers = &sol.centers;
    let is_center: Vec<bool> = {
        let mut v = vec![false; n];
        for &c in centers {
            v[c] = true;
        }
        v
    };
    let non_centers: Vec<usize> = (0..n).filter(|&x| !is_center[x]).collect();
    if size > centers.len() || size > non_centers.len() {
        return None;
    }
    let filter = threshold * (1.0 + FILTER_SLACK);
    for out_set in centers.iter().copied().combinations(size) {
        let survivors: Vec<usize> =
            centers.iter().copied().filter(|c| !out_set.contains(c)).collect();
        for in_set in non_centers.iter().copied().combinations(size) {
            if !feas.swap_is_feasible(&out_set, &in_set) {
                continue;
            }
            let cand = multi_swap_cost(ps, sol, spec.p, &out_set, &in_set, &survivors);
            if cand <= filter {
                let mut candidate = survivors.clone();
                candidate.extend_from_slice(&in_set);
                let verified = cost(ps, &candidate, spec).expect("candidate centers are valid");
                if verified <= threshold {
                    return Some((out_set, in_set));
                }
            }
        }
    }
    None
}

/// Part II of the search. Returns a solution no feasible swap of size at
/// most `t` improves by a factor of `1/(1 - epsilon)`; a solution that
/// hits the iteration cap is returned with `converged = false`.
pub fn local_search(
    ps: &PointSet,
    balls: &CriticalBallSet,
    init: &Solution,
    spec: &CostSpec,
    params: &LsParams,
) -> Result<Solution> {
    params.validate()?;
    spec.validate_k(ps.len())?;
    if init.centers.len() != spec.k {
        return Err(Error::InvalidK { k: init.centers.len(), n: ps.len() });
    }
    if !verify_feasible(balls, &init.centers, ps) {
        return Err(Error::InfeasibleInitial);
    }

    let mut current = init.clone();
    current.iterations = 0;
    current.converged = true;
    let mut feas = FeasibilityIndex::new(ps, balls, &current.centers);

    loop {
        // A zero-cost solution cannot be strictly improved; the accept
        // test would otherwise cycle on equal-cost swaps.
        if current.cost_value == 0.0 {
            current.converged = true;
            return Ok(current);
        }
        if current.iterations >= params.max_iters {
            current.converged = false;
            return Ok(current);
        }
        let threshold = (1.0 - params.epsilon) * current.cost_value;
        let max_size = params.t.min(current.centers.len()).min(ps.len() - current.centers.len());

        let mut accepted: Option<(Vec<usize>, Vec<usize>)> = None;
        if max_size >= 1 {
            if let Some((o, w)) = scan_single_swaps(ps, &current, spec, &feas, threshold) {
                accepted = Some((vec![o], vec![w]));
            }
        }
        if accepted.is_none() {
            for size in 2..=max_size {
                if let Some(found) = scan_multi_swaps(ps, &current, spec, &feas, threshold, size) {
                    accepted = Some(found);
                    break;
                }
            }
        }

        match accepted {
            None => {
                current.converged = true;
                return Ok(current);
            }
            Some((out_set, in_set)) => {
                let mut next: Vec<usize> =
                    current.centers.iter().copied().filter(|c| !out_set.contains(c)).collect();
                next.extend_from_slice(&in_set);
                let iterations = current.iterations + 1;
                current = Solution::build(ps, next, spec)?;
                current.iterations = iterations;
                feas.reset_counts(&current.centers);
                debug_assert!(verify_feasible(balls, &current.centers, ps));
            }
        }
    }
}

/// Everything the pipeline produces.
#[derive(Debug, Clone)]
pub struct FairClustering {
    pub solution: Solution,
    pub balls: CriticalBallSet,
    pub radii: FairRadii,
}

/// End-to-end pipeline: fair radii at `ell = k`, critical balls, greedy
/// initialization, local search. In theory mode the returned solution
/// satisfies `d(x, S) <= 7 alpha r_k(x)` for every point.
pub fn fair_k_clustering(
    ps: &PointSet,
    alpha: f64,
    spec: &CostSpec,
    params: &LsParams,
    cover: CoverMode,
) -> Result<FairClustering> {
    spec.validate_k(ps.len())?;
    let radii = fair_radii(ps, spec.k)?;
    let balls = build_critical_balls(ps, &radii, alpha, cover.multiplier(alpha))?;
    if balls.len() > spec.k {
        return Err(Error::KBelowBallCount { k: spec.k, ell: balls.len() });
    }
    let init = initialize(ps, &balls, spec)?;
    let solution = local_search(ps, &balls, &init, spec, params)?;
    Ok(FairClustering { solution, balls, radii })
}
