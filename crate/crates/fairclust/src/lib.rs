//! Individually fair k-clustering.
//!
//! For a point set `P` of size `n` and a budget of `k` centers, the fair
//! radius `r_k(x)` of a point is the smallest radius whose ball around `x`
//! contains at least `ceil(n/k)` points of `P`. A center set `S` is
//! `alpha`-fair when every point has a center within `alpha * r_k(x)`.
//!
//! This crate computes fair radii, builds a set of disjoint *critical
//! balls* whose coverage and separation properties reduce the fairness
//! constraint to a ball-intersection constraint, and runs a swap-based
//! local search over center sets that stay feasible with respect to those
//! balls. The result simultaneously approximates the optimal `alpha`-fair
//! clustering cost (any `l_p` norm objective) and the fairness condition.
//!
//! Also included: baseline algorithms for comparison (ball-centers-only
//! with an eta binary search, greedy initialization alone, unconstrained
//! local search), a brute-force oracle for small instances, instance
//! generators (CSV ingestion, Gaussian mixtures, and an adversarial
//! construction on which cost-optimal clusterings are arbitrarily unfair),
//! and an evaluation harness that emits CSV/JSON comparison reports.

pub mod baselines;
pub mod critical_balls;
mod error;
pub mod evaluation;
pub mod fair_radius;
pub mod geometry;
pub mod instances;
pub mod local_search;
pub mod oracle;

pub use crate::critical_balls::{CoverMode, CriticalBallSet, CriticalReport};
pub use crate::error::{Error, Result};
pub use crate::fair_radius::FairRadii;
pub use crate::geometry::{CostSpec, Norm, PointSet};
pub use crate::local_search::{LsParams, Solution};
