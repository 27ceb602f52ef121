//! Point storage, Euclidean metric, and `l_p` clustering cost.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Point sets up to this size precompute the full distance matrix.
pub const DEFAULT_CACHE_LIMIT: usize = 4096;

/// Immutable dense point set (`n` points in `R^d`).
///
/// Coordinates are validated to be finite at construction. When `n` is at
/// most the cache limit, the full pairwise distance matrix is precomputed
/// so distance lookups during search are constant time.
#[derive(Debug, Clone)]
pub struct PointSet {
    coords: Vec<f64>,
    n: usize,
    dim: usize,
    dist_cache: Option<Vec<f64>>,
}

impl PointSet {
    /// Build a point set from row vectors, caching distances when
    /// `n <= DEFAULT_CACHE_LIMIT`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows_with_cache_limit(rows, DEFAULT_CACHE_LIMIT)
    }

    /// Same as [`PointSet::from_rows`] with an explicit cache threshold.
    pub fn from_rows_with_cache_limit(rows: Vec<Vec<f64>>, cache_limit: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::RaggedRow { row: i, expected: dim, got: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteCoord { point: i, col: c });
                }
                coords.push(v);
            }
        }
        let n = rows.len();
        let mut ps = PointSet { coords, n, dim, dist_cache: None };
        if n <= cache_limit {
            ps.build_cache();
        }
        Ok(ps)
    }

    /// Build from a flat row-major coordinate buffer of length `n * dim`.
    pub fn from_flat(n: usize, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPointSet);
        }
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        assert_eq!(coords.len(), n * dim, "coordinate buffer length mismatch");
        for (idx, &v) in coords.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteCoord { point: idx / dim, col: idx % dim });
            }
        }
        let mut ps = PointSet { coords, n, dim, dist_cache: None };
        if n <= DEFAULT_CACHE_LIMIT {
            ps.build_cache();
        }
        Ok(ps)
    }

    fn build_cache(&mut self) {
        let n = self.n;
        let mut cache = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.compute_distance(i, j);
                cache[i * n + j] = d;
                cache[j * n + i] = d;
            }
        }
        self.dist_cache = Some(cache);
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn compute_distance(&self, i: usize, j: usize) -> f64 {
        let a = self.point(i);
        let b = self.point(j);
        let mut sq = 0.0;
        for (x, y) in a.iter().zip(b) {
            let diff = x - y;
            sq += diff * diff;
        }
        sq.sqrt()
    }

    /// Euclidean distance between points `i` and `j`.
    ///
    /// Panics when an index is out of range.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "point index out of range ({i}, {j}) for n = {}", self.n);
        match &self.dist_cache {
            Some(cache) => cache[i * self.n + j],
            None => self.compute_distance(i, j),
        }
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        }
    }
}

/// Exponent of the `l_p` clustering objective.
///
/// `Finite(1)` is k-median, `Finite(2)` the normed form of k-means, and
/// `Infinity` the k-center max-distance objective. `Finite(log2 n)`
/// approximates k-center within a factor of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    Finite(f64),
    Infinity,
}

impl Norm {
    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidNorm(p));
        }
        Ok(Norm::Finite(p))
    }

    /// Exponent used when scaling epsilon and cost bounds; 1 for the
    /// max objective.
    pub fn effective_p(&self) -> f64 {
        match self {
            Norm::Finite(p) => p.max(1.0),
            Norm::Infinity => 1.0,
        }
    }

    /// `d^p` term of the objective (finite exponents only).
    pub(crate) fn term(&self, d: f64) -> f64 {
        match self {
            Norm::Finite(p) if *p == 1.0 => d,
            Norm::Finite(p) if *p == 2.0 => d * d,
            Norm::Finite(p) => d.powf(*p),
            Norm::Infinity => unreachable!("no power term for the max objective"),
        }
    }

    /// Maps an accumulated sum of `d^p` terms back to the norm.
    pub(crate) fn finish(&self, total: f64) -> f64 {
        match self {
            Norm::Finite(p) if *p == 1.0 => total,
            Norm::Finite(p) if *p == 2.0 => total.sqrt(),
            Norm::Finite(p) => total.powf(1.0 / *p),
            Norm::Infinity => unreachable!("no power term for the max objective"),
        }
    }

    /// Aggregate per-point distances into the objective value.
    pub fn aggregate<I: IntoIterator<Item = f64>>(&self, dists: I) -> f64 {
        match self {
            Norm::Infinity => dists.into_iter().fold(0.0, f64::max),
            _ => {
                let mut sum = KahanSum::default();
                for d in dists {
                    sum.add(self.term(d));
                }
                self.finish(sum.value())
            }
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::Finite(p) => write!(f, "{p}"),
            Norm::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Norm::Infinity);
        }
        let p: f64 = t.parse().map_err(|_| Error::InvalidNorm(f64::NAN))?;
        Norm::finite(p)
    }
}

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Objective specification: exponent `p` and center budget `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSpec {
    pub p: Norm,
    pub k: usize,
}

impl CostSpec {
    pub fn new(p: Norm, k: usize) -> Self {
        CostSpec { p, k }
    }

    pub fn median(k: usize) -> Self {
        CostSpec { p: Norm::Finite(1.0), k }
    }

    pub fn means(k: usize) -> Self {
        CostSpec { p: Norm::Finite(2.0), k }
    }

    pub(crate) fn validate_k(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidK { k: self.k, n });
        }
        Ok(())
    }
}

/// Neumaier-compensated summation. Swap acceptance compares nearly equal
/// sums, so the `d^p` accumulation must not lose low-order bits.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Distance from `x` to the closest point of `centers`.
pub fn dist_to_set(ps: &PointSet, centers: &[usize], x: usize) -> f64 {
    centers.iter().map(|&c| ps.distance(x, c)).fold(f64::INFINITY, f64::min)
}

/// `l_p` clustering cost of assigning every point to its closest center:
/// `(sum_x d(x, centers)^p)^(1/p)`, or the max distance for the infinity
/// norm.
pub fn cost(ps: &PointSet, centers: &[usize], spec: &CostSpec) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    for &c in centers {
        ps.check_index(c)?;
    }
    Ok(spec.p.aggregate((0..ps.len()).map(|x| dist_to_set(ps, centers, x))))
}

/// Closest and second-closest center of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestTwo {
    pub nearest: usize,
    pub nearest_dist: f64,
    pub second: Option<usize>,
    /// `f64::INFINITY` when there is a single center.
    pub second_dist: f64,
}

/// Nearest and second-nearest center of `x`, ties broken by smallest
/// center index.
pub fn nearest_two(ps: &PointSet, centers: &[usize], x: usize) -> Result<NearestTwo> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    ps.check_index(x)?;
    let mut best: Option<(usize, f64)> = None;
    let mut second: Option<(usize, f64)> = None;
    for &c in centers {
        ps.check_index(c)?;
        let d = ps.distance(x, c);
        let beats = |cur: Option<(usize, f64)>| match cur {
            None => true,
            Some((ci, cd)) => d < cd || (d == cd && c < ci),
        };
        if beats(best) {
            second = best;
            best = Some((c, d));
        } else if beats(second) {
            second = Some((c, d));
        }
    }
    let (nearest, nearest_dist) = best.expect("centers nonempty");
    Ok(NearestTwo {
        nearest,
        nearest_dist,
        second: second.map(|(c, _)| c),
        second_dist: second.map_or(f64::INFINITY, |(_, d)| d),
    })
}
