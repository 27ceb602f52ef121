//! Instance generation and ingestion: seeded CSV subsampling, Gaussian
//! mixture generators, and the two-block adversarial construction on
//! which cost-optimal clusterings are arbitrarily unfair.

use std::io::Write;
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// Parameters of the adversarial two-block instance.
///
/// The left block is a simplex of `k - 1` points at pairwise distance `M`.
/// The right block has `k - 1` "nodes" at pairwise distance `2R`, each
/// carrying one point on the node and a clump of points at distance `r`
/// from it. Both blocks sit `D = M = separation * 2n(R + r)` apart, so a
/// cost-optimal clustering spends its budget on the left block and leaves
/// some right-side clump a distance of order `R` from any center, while
/// their fair radii are of order `r`.
#[derive(Debug, Clone, Copy)]
pub struct AdversarialSpec {
    pub k: usize,
    /// Upper bound on the instance size; the exact count is
    /// `(k-1) * (1 + floor((n-k+1)/(k-1)))`.
    pub n: usize,
    /// Clump radius around each node.
    pub r: f64,
    /// Half the node spacing; `R >> r`.
    pub big_r: f64,
    /// Factor `c` in `M = D = c * 2n(R + r)`.
    pub separation: f64,
}

impl AdversarialSpec {
    pub fn new(k: usize, n: usize, r: f64, big_r: f64) -> Self {
        AdversarialSpec { k, n, r, big_r, separation: 10.0 }
    }

    pub fn block_distance(&self) -> f64 {
        self.separation * 2.0 * self.n as f64 * (self.big_r + self.r)
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::BadGeneratorParams(format!("k must be >= 2, got {}", self.k)));
        }
        if self.n < self.k * self.k {
            return Err(Error::BadGeneratorParams(format!(
                "need n >= k^2 ({} >= {})",
                self.n,
                self.k * self.k
            )));
        }
        if !(self.r > 0.0 && self.big_r > self.r) {
            return Err(Error::BadGeneratorParams(format!(
                "need R > r > 0, got R = {}, r = {}",
                self.big_r, self.r
            )));
        }
        if self.separation < 10.0 {
            return Err(Error::BadGeneratorParams(format!(
                "separation factor must be >= 10, got {}",
                self.separation
            )));
        }
        Ok(())
    }
}

/// Build the adversarial instance in `2(k-1) + 1` dimensions.
///
/// Layout: the `k - 1` left points first, then for each node its on-node
/// point followed by its clump, all clump points co-located at distance
/// exactly `r` along the node's own axis. Left simplex coordinates use
/// the first `k - 1` axes, node simplex coordinates the next `k - 1`,
/// and the final axis carries the block offset `D`, which makes every
/// cross-block distance at least `D`.
pub fn adversarial_instance(spec: &AdversarialSpec) -> Result<PointSet> {
    spec.validate()?;
    let blocks = spec.k - 1;
    let dim = 2 * blocks + 1;
    let m = spec.block_distance();
    let per_node = (spec.n - blocks) / blocks; // on-node point + clump
    let left_coord = m / f64::sqrt(2.0);
    let node_coord = f64::sqrt(2.0) * spec.big_r;

    let mut rows = Vec::with_capacity(blocks + blocks * per_node);
    for i in 0..blocks {
        let mut row = vec![0.0; dim];
        row[i] = left_coord;
        rows.push(row);
    }
    for j in 0..blocks {
        let mut node = vec![0.0; dim];
        node[blocks + j] = node_coord;
        node[dim - 1] = m;
        rows.push(node.clone());
        let mut clump = node;
        clump[blocks + j] = node_coord + spec.r;
        for _ in 1..per_node {
            rows.push(clump.clone());
        }
    }
    PointSet::from_rows(rows)
}

/// Column selection for CSV ingestion.
#[derive(Debug, Clone)]
pub enum ColumnSelect {
    All,
    Indices(Vec<usize>),
    Names(Vec<String>),
}

/// Subsample size for CSV ingestion.
#[derive(Debug, Clone, Copy)]
pub enum SampleSize {
    All,
    Count(usize),
}

/// CSV ingestion parameters. The header row is auto-detected: a first
/// row with any non-numeric cell is treated as a header.
#[derive(Debug, Clone)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub columns: ColumnSelect,
    pub subsample: SampleSize,
    pub seed: u64,
}

impl IngestSpec {
    /// Defaults: all columns, subsample of 1000 rows, seed 0.
    pub fn new(path: impl Into<PathBuf>) -> Self {
        IngestSpec {
            path: path.into(),
            columns: ColumnSelect::All,
            subsample: SampleSize::Count(1000),
            seed: 0,
        }
    }
}

fn parse_cell(raw: &str, row: usize, col: usize) -> Result<f64> {
    let trimmed = raw.trim();
    let value: f64 = trimmed.parse().map_err(|_| Error::NonNumericCell {
        row,
        col,
        value: trimmed.to_string(),
    })?;
    if !value.is_finite() {
        return Err(Error::NonNumericCell { row, col, value: trimmed.to_string() });
    }
    Ok(value)
}

/// Read a CSV file, select columns, and uniformly subsample rows without
/// replacement. Deterministic for a fixed file and spec; sampled rows
/// keep their original file order.
pub fn load_csv(spec: &IngestSpec) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(&spec.path)?;
    let mut records: Vec<csv::StringRecord> = Vec::new();
    for record in reader.records() {
        records.push(record?);
    }
    if records.is_empty() {
        return Err(Error::TooFewRows { rows: 0, need: 1 });
    }

    let has_header = records[0].iter().any(|cell| {
        let t = cell.trim();
        t.parse::<f64>().map(|v| !v.is_finite()).unwrap_or(true)
    });
    let header: Option<&csv::StringRecord> = if has_header { Some(&records[0]) } else { None };
    let width = records[0].len();

    let selected: Vec<usize> = match &spec.columns {
        ColumnSelect::All => (0..width).collect(),
        ColumnSelect::Indices(idx) => {
            for &i in idx {
                if i >= width {
                    return Err(Error::ColumnOutOfRange { index: i, cols: width });
                }
            }
            idx.clone()
        }
        ColumnSelect::Names(names) => {
            let header = header.ok_or(Error::HeaderRequired)?;
            names
                .iter()
                .map(|name| {
                    header
                        .iter()
                        .position(|h| h.trim() == name)
                        .ok_or_else(|| Error::UnknownColumn(name.clone()))
                })
                .collect::<Result<Vec<usize>>>()?
        }
    };

    let data = &records[if has_header { 1 } else { 0 }..];
    let rows = data.len();
    let want = match spec.subsample {
        SampleSize::All => rows,
        SampleSize::Count(c) => c,
    };
    if rows < want.max(1) {
        return Err(Error::TooFewRows { rows, need: want.max(1) });
    }

    let mut picked: Vec<usize> = if want == rows {
        (0..rows).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rand::seq::index::sample(&mut rng, rows, want).into_vec()
    };
    picked.sort_unstable();

    let mut out = Vec::with_capacity(want);
    for &ri in &picked {
        let record = &data[ri];
        let mut row = Vec::with_capacity(selected.len());
        for &ci in &selected {
            let raw = record.get(ci).ok_or(Error::ColumnOutOfRange {
                index: ci,
                cols: record.len(),
            })?;
            row.push(parse_cell(raw, ri, ci)?);
        }
        out.push(row);
    }
    PointSet::from_rows(out)
}

/// Seeded Gaussian mixture: `k` cluster centers uniform in `[0,1]^d`,
/// point `i` drawn around center `i mod k` with the given standard
/// deviation.
pub fn random_instance(n: usize, d: usize, k: usize, spread: f64, seed: u64) -> Result<PointSet> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(Error::BadGeneratorParams(format!("spread must be >= 0, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> =
        (0..k).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    let mut rows = Vec::with_capacity(n);
    if spread == 0.0 {
        for i in 0..n {
            rows.push(centers[i % k].clone());
        }
    } else {
        let noise = Normal::new(0.0, spread).expect("validated spread");
        for i in 0..n {
            rows.push(centers[i % k].iter().map(|&c| c + noise.sample(&mut rng)).collect());
        }
    }
    PointSet::from_rows(rows)
}

/// Min-max scale every column into `[0, 1]`; constant columns map to 0.
pub fn normalize_min_max(ps: &PointSet) -> PointSet {
    let n = ps.len();
    let d = ps.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..n {
        for (c, &v) in ps.point(i).iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    let rows = (0..n)
        .map(|i| {
            ps.point(i)
                .iter()
                .enumerate()
                .map(|(c, &v)| if hi[c] > lo[c] { (v - lo[c]) / (hi[c] - lo[c]) } else { 0.0 })
                .collect()
        })
        .collect();
    PointSet::from_rows(rows).expect("normalization preserves validity")
}

/// Ratio of the maximum to the minimum nonzero pairwise distance; None
/// when all points coincide.
pub fn aspect_ratio(ps: &PointSet) -> Option<f64> {
    let n = ps.len();
    let mut max = 0.0f64;
    let mut min_nonzero = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = ps.distance(i, j);
            max = max.max(d);
            if d > 0.0 {
                min_nonzero = min_nonzero.min(d);
            }
        }
    }
    if min_nonzero.is_finite() {
        Some(max / min_nonzero)
    } else {
        None
    }
}

/// Write points as CSV with an `x0..x{d-1}` header. Coordinates print in
/// shortest round-trip form, so reading the file back reproduces the
/// point set exactly.
pub fn write_points_csv<W: Write>(ps: &PointSet, out: &mut W) -> Result<()> {
    let header: Vec<String> = (0..ps.dim()).map(|c| format!("x{c}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..ps.len() {
        let row: Vec<String> = ps.point(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fair_radius::fair_radii;
    use crate::geometry::{cost, CostSpec};
    use crate::oracle::{brute_force_optimal, fairness_ratio};

    #[test]
    fn adversarial_geometry_checks_out() {
        let spec = AdversarialSpec::new(3, 12, 1.0, 100.0);
        let ps = adversarial_instance(&spec).unwrap();
        assert_eq!(ps.dim(), 5);
        assert_eq!(ps.len(), 12); // 2 left + 2 nodes * (1 + 4)
        let m = spec.block_distance();
        // Left pairwise distances all equal M.
        let d01 = ps.distance(0, 1);
        assert!((d01 - m).abs() <= 1e-9 * m);
        // Cross-block distances at least D, within-right at most 2R + 2r.
        for i in 0..2 {
            for j in 2..12 {
                assert!(ps.distance(i, j) >= m);
            }
        }
        for i in 2..12 {
            for j in (i + 1)..12 {
                assert!(ps.distance(i, j) <= 2.0 * spec.big_r + 2.0 * spec.r + 1e-9);
            }
        }
        // Clump points sit at distance exactly r from their node.
        assert!((ps.distance(2, 3) - spec.r).abs() <= 1e-9 * spec.r);
    }

    #[test]
    fn adversarial_k2_edge_case() {
        let spec = AdversarialSpec::new(2, 4, 0.5, 10.0);
        let ps = adversarial_instance(&spec).unwrap();
        assert_eq!(ps.dim(), 3);
        assert_eq!(ps.len(), 1 + 3); // one left point, node plus clump of 2
    }

    #[test]
    fn adversarial_rejects_bad_params() {
        assert!(adversarial_instance(&AdversarialSpec::new(1, 10, 1.0, 10.0)).is_err());
        assert!(adversarial_instance(&AdversarialSpec::new(3, 8, 1.0, 10.0)).is_err());
        assert!(adversarial_instance(&AdversarialSpec::new(3, 12, 10.0, 1.0)).is_err());
        let mut spec = AdversarialSpec::new(3, 12, 1.0, 10.0);
        spec.separation = 2.0;
        assert!(adversarial_instance(&spec).is_err());
    }

    #[test]
    fn adversarial_witness_set_is_one_fair() {
        // n chosen so each clump stays below the quota on its own: the
        // clump points then have fair radius exactly r.
        let spec = AdversarialSpec::new(3, 10, 1.0, 100.0);
        let ps = adversarial_instance(&spec).unwrap();
        assert_eq!(ps.len(), 10);
        let radii = fair_radii(&ps, 3).unwrap();
        // Nodes sit at indices 2 and 6; left points at 0 and 1.
        let witness = vec![0usize, 2, 6];
        let audit = fairness_ratio(&ps, &radii, &witness).unwrap();
        assert!(audit.max_ratio <= 1.0 + 1e-9, "witness ratio {}", audit.max_ratio);
    }

    #[test]
    fn adversarial_optimum_is_unfair() {
        let spec = AdversarialSpec::new(3, 10, 1.0, 10.0);
        let ps = adversarial_instance(&spec).unwrap();
        let radii = fair_radii(&ps, 3).unwrap();
        let opt = brute_force_optimal(&ps, &CostSpec::median(3), None, None).unwrap();
        // The optimum spends two centers on the left simplex.
        assert!(opt.centers.contains(&0) && opt.centers.contains(&1));
        let audit = fairness_ratio(&ps, &radii, &opt.centers).unwrap();
        assert!(
            audit.max_ratio > spec.big_r / spec.r - 1.0,
            "ratio {} not above {}",
            audit.max_ratio,
            spec.big_r / spec.r - 1.0
        );
    }

    #[test]
    fn csv_round_trip_with_header_detection() {
        let ps = random_instance(20, 3, 2, 0.2, 9).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&ps, &mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        std::fs::write(&path, &buf).unwrap();

        let mut spec = IngestSpec::new(&path);
        spec.subsample = SampleSize::All;
        let back = load_csv(&spec).unwrap();
        assert_eq!(back.len(), 20);
        for i in 0..20 {
            assert_eq!(back.point(i), ps.point(i));
        }
    }

    #[test]
    fn csv_named_columns_and_subsample_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("named.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "age,time_in_hospital,label").unwrap();
        for i in 0..50 {
            writeln!(f, "{},{},junk{i}", 20 + i, i % 14).unwrap();
        }
        drop(f);

        let spec = IngestSpec {
            path: path.clone(),
            columns: ColumnSelect::Names(vec!["age".into(), "time_in_hospital".into()]),
            subsample: SampleSize::Count(10),
            seed: 42,
        };
        let a = load_csv(&spec).unwrap();
        let b = load_csv(&spec).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a.dim(), 2);
        for i in 0..10 {
            assert_eq!(a.point(i), b.point(i));
        }
    }

    #[test]
    fn csv_errors_are_specific() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1.0,2.0\n3.0,oops\n").unwrap();
        let mut spec = IngestSpec::new(&path);
        spec.subsample = SampleSize::All;
        match load_csv(&spec) {
            Err(Error::NonNumericCell { row, col, .. }) => {
                assert_eq!((row, col), (1, 1));
            }
            other => panic!("expected NonNumericCell, got {other:?}"),
        }

        let small = dir.path().join("small.csv");
        std::fs::write(&small, "1.0\n2.0\n").unwrap();
        let spec = IngestSpec { subsample: SampleSize::Count(10), ..IngestSpec::new(&small) };
        assert!(matches!(load_csv(&spec), Err(Error::TooFewRows { rows: 2, need: 10 })));

        assert!(load_csv(&IngestSpec::new(dir.path().join("missing.csv"))).is_err());
    }

    #[test]
    fn random_instance_spread_zero_duplicates() {
        let ps = random_instance(12, 2, 3, 0.0, 7).unwrap();
        let mut distinct: Vec<Vec<u64>> = (0..12)
            .map(|i| ps.point(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 3);
        // Deterministic for the seed.
        let again = random_instance(12, 2, 3, 0.0, 7).unwrap();
        assert_eq!(ps.point(5), again.point(5));
    }

    #[test]
    fn aspect_ratio_finite_on_random_data() {
        let ps = random_instance(30, 3, 3, 0.2, 21).unwrap();
        let ratio = aspect_ratio(&ps).unwrap();
        assert!(ratio.is_finite() && ratio >= 1.0);
        assert_eq!(aspect_ratio(&PointSet::from_rows(vec![vec![1.0]; 4]).unwrap()), None);
    }

    #[test]
    fn normalization_maps_to_unit_box() {
        let ps = random_instance(25, 3, 2, 0.6, 4).unwrap();
        let norm = normalize_min_max(&ps);
        for i in 0..25 {
            for (c, &v) in norm.point(i).iter().enumerate() {
                assert!((0.0..=1.0).contains(&v), "column {c} escaped: {v}");
            }
        }
        let flat = normalize_min_max(&PointSet::from_rows(vec![vec![3.0], vec![3.0]]).unwrap());
        assert_eq!(flat.point(0), &[0.0]);
        // Normalizing twice is idempotent on already-normalized data.
        let twice = normalize_min_max(&norm);
        let spec = CostSpec::median(1);
        assert_eq!(
            cost(&norm, &[0], &spec).unwrap(),
            cost(&twice, &[0], &spec).unwrap()
        );
    }
}
