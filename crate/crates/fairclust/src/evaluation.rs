//! Comparison harness: run algorithm-by-k grids, audit cost and
//! fairness, and emit plot-ready CSV or JSON reports.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{fair_k_center_jung, greedy_baseline, vanilla_local_search};
use crate::critical_balls::{build_critical_balls, CoverMode};
use crate::error::{Error, Result};
use crate::fair_radius::fair_radii;
use crate::geometry::{CostSpec, Norm, PointSet};
use crate::local_search::{initialize, local_search, LsParams, Solution};
use crate::oracle::fairness_ratio;

/// Algorithms the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    FairLocalSearch,
    FairKCenter,
    Greedy,
    VanillaLocalSearch,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::FairLocalSearch,
        Algorithm::FairKCenter,
        Algorithm::Greedy,
        Algorithm::VanillaLocalSearch,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::FairLocalSearch => "fair_local_search",
            Algorithm::FairKCenter => "fair_k_center",
            Algorithm::Greedy => "greedy",
            Algorithm::VanillaLocalSearch => "vanilla_local_search",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fair_local_search" | "fair" => Ok(Algorithm::FairLocalSearch),
            "fair_k_center" => Ok(Algorithm::FairKCenter),
            "greedy" => Ok(Algorithm::Greedy),
            "vanilla_local_search" | "vanilla" => Ok(Algorithm::VanillaLocalSearch),
            other => Err(Error::InvalidSwap(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// One (dataset, algorithm, k) measurement. Optional fields stay empty
/// in CSV output; `sum_sq` (the conventional k-means objective, the
/// square of the p = 2 cost) and `error` appear in JSON only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub dataset: String,
    pub algorithm: String,
    pub k: usize,
    pub p: Norm,
    pub cost: Option<f64>,
    /// Cost relative to the fair_k_center row of the same (dataset, k).
    pub cost_rel: Option<f64>,
    pub fair_max: Option<f64>,
    pub fair_mean: Option<f64>,
    /// Max fairness ratio relative to the fair_k_center row.
    pub fair_rel: Option<f64>,
    pub eta: Option<f64>,
    pub iterations: Option<u64>,
    pub wall_time_ms: Option<f64>,
    pub seed: u64,
    pub sum_sq: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// Clear wall-clock measurements so emitted bytes are reproducible.
    pub fn zero_timings(&mut self) {
        for row in &mut self.rows {
            if row.wall_time_ms.is_some() {
                row.wall_time_ms = Some(0.0);
            }
        }
    }
}

/// Grid configuration for [`compare`].
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub dataset: String,
    pub k_values: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub p: Norm,
    pub t: usize,
    /// None picks the per-k default `1 / (2 gamma k max(p, 1))`.
    pub epsilon: Option<f64>,
    pub cover: CoverMode,
    pub seed: u64,
}

impl CompareConfig {
    /// The standard grid: k from 5 to 30 in steps of 5, all algorithms,
    /// k-median, theory-mode cover.
    pub fn standard(dataset: impl Into<String>, seed: u64) -> Self {
        CompareConfig {
            dataset: dataset.into(),
            k_values: (1..=6).map(|i| 5 * i).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            p: Norm::Finite(1.0),
            t: 1,
            epsilon: None,
            cover: CoverMode::Theory,
            seed,
        }
    }
}

struct AlgoOutcome {
    solution: Solution,
    eta: Option<f64>,
    iterations: u64,
}

/// Run every configured algorithm for every k. Fair radii are computed
/// once per k and shared; wall time covers each algorithm call only.
/// The fair algorithms take their alpha from the eta found by the
/// fair_k_center search on the same radii. A failing run produces a row
/// carrying an error marker instead of aborting the grid.
pub fn compare(ps: &PointSet, cfg: &CompareConfig) -> Result<EvalReport> {
    let mut rows = Vec::new();
    for &k in &cfg.k_values {
        let spec = CostSpec::new(cfg.p, k);
        if spec.validate_k(ps.len()).is_err() {
            for algo in &cfg.algorithms {
                rows.push(error_row(cfg, *algo, k, format!("k = {k} invalid for n = {}", ps.len())));
            }
            continue;
        }
        let radii = fair_radii(ps, k)?;
        let mut params = LsParams::for_instance(ps.len(), &spec).with_t(cfg.t);
        if let Some(eps) = cfg.epsilon {
            params = params.with_epsilon(eps);
        }

        let needs_eta = cfg.algorithms.iter().any(|a| {
            matches!(
                a,
                Algorithm::FairKCenter | Algorithm::FairLocalSearch | Algorithm::Greedy
            )
        });
        let eta_run = if needs_eta {
            let start = Instant::now();
            let outcome = fair_k_center_jung(ps, &radii, &spec, 1e-6, 40);
            Some((outcome, start.elapsed().as_secs_f64() * 1e3))
        } else {
            None
        };
        let alpha = match &eta_run {
            Some((Ok((_, eta_res)), _)) => eta_res.eta.max(1.0),
            _ => 1.0,
        };

        for algo in &cfg.algorithms {
            let start = Instant::now();
            let outcome: Result<AlgoOutcome> = match algo {
                Algorithm::FairKCenter => match &eta_run {
                    Some((Ok((sol, eta_res)), _)) => Ok(AlgoOutcome {
                        solution: sol.clone(),
                        eta: Some(eta_res.eta),
                        iterations: eta_res.iterations as u64,
                    }),
                    Some((Err(e), _)) => Err(Error::InvalidSwap(e.to_string())),
                    None => unreachable!("eta search runs when fair_k_center is requested"),
                },
                Algorithm::FairLocalSearch => {
                    build_critical_balls(ps, &radii, alpha, cfg.cover.multiplier(alpha))
                        .and_then(|balls| {
                            if balls.len() > k {
                                return Err(Error::KBelowBallCount { k, ell: balls.len() });
                            }
                            let init = initialize(ps, &balls, &spec)?;
                            local_search(ps, &balls, &init, &spec, &params)
                        })
                        .map(|solution| AlgoOutcome {
                            iterations: solution.iterations as u64,
                            solution,
                            eta: None,
                        })
                }
                Algorithm::Greedy => greedy_baseline(ps, &radii, &spec, alpha, cfg.cover.multiplier(alpha))
                    .map(|(solution, _)| AlgoOutcome { solution, eta: None, iterations: 0 }),
                Algorithm::VanillaLocalSearch => {
                    vanilla_local_search(ps, &spec, &params).map(|solution| AlgoOutcome {
                        iterations: solution.iterations as u64,
                        solution,
                        eta: None,
                    })
                }
            };
            let wall_ms = match (algo, &eta_run) {
                (Algorithm::FairKCenter, Some((_, ms))) => *ms,
                _ => start.elapsed().as_secs_f64() * 1e3,
            };

            match outcome {
                Ok(out) => {
                    let audit = fairness_ratio(ps, &radii, &out.solution.centers)?;
                    let cost = out.solution.cost_value;
                    rows.push(EvalRow {
                        dataset: cfg.dataset.clone(),
                        algorithm: algo.name().to_string(),
                        k,
                        p: cfg.p,
                        cost: Some(cost),
                        cost_rel: None,
                        fair_max: Some(audit.max_ratio),
                        fair_mean: Some(audit.mean_ratio),
                        fair_rel: None,
                        eta: out.eta,
                        iterations: Some(out.iterations),
                        wall_time_ms: Some(wall_ms),
                        seed: cfg.seed,
                        sum_sq: (cfg.p == Norm::Finite(2.0)).then_some(cost * cost),
                        error: None,
                    });
                }
                Err(e) => {
                    eprintln!("warning: {} failed at k = {k}: {e}", algo.name());
                    rows.push(error_row(cfg, *algo, k, e.to_string()));
                }
            }
        }
    }

    // Relative columns against the fair_k_center row of the same k.
    let baseline: Vec<(usize, f64, f64)> = rows
        .iter()
        .filter(|r| r.algorithm == Algorithm::FairKCenter.name())
        .filter_map(|r| Some((r.k, r.cost?, r.fair_max?)))
        .collect();
    for row in &mut rows {
        if let Some(&(_, base_cost, base_fair)) = baseline.iter().find(|(k, _, _)| *k == row.k) {
            row.cost_rel = row.cost.and_then(|c| (base_cost > 0.0).then(|| c / base_cost));
            row.fair_rel = row.fair_max.and_then(|f| (base_fair > 0.0).then(|| f / base_fair));
        }
    }

    rows.sort_by(|a, b| {
        (&a.dataset, a.k, &a.algorithm).cmp(&(&b.dataset, b.k, &b.algorithm))
    });
    Ok(EvalReport { rows })
}

fn error_row(cfg: &CompareConfig, algo: Algorithm, k: usize, message: String) -> EvalRow {
    EvalRow {
        dataset: cfg.dataset.clone(),
        algorithm: algo.name().to_string(),
        k,
        p: cfg.p,
        cost: None,
        cost_rel: None,
        fair_max: None,
        fair_mean: None,
        fair_rel: None,
        eta: None,
        iterations: None,
        wall_time_ms: None,
        seed: cfg.seed,
        sum_sq: None,
        error: Some(message),
    }
}

/// Warnings for cost increasing with k where it is expected to shrink
/// (fair and vanilla local search). Heuristic non-nesting can violate
/// this; callers log the warnings rather than fail.
pub fn cost_monotonicity_warnings(report: &EvalReport) -> Vec<String> {
    let mut warnings = Vec::new();
    for algo in [Algorithm::FairLocalSearch, Algorithm::VanillaLocalSearch] {
        let mut series: Vec<(&str, usize, f64)> = report
            .rows
            .iter()
            .filter(|r| r.algorithm == algo.name())
            .filter_map(|r| Some((r.dataset.as_str(), r.k, r.cost?)))
            .collect();
        series.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for w in series.windows(2) {
            if w[0].0 == w[1].0 && w[1].2 > w[0].2 {
                warnings.push(format!(
                    "{}: {} cost rose from {} (k = {}) to {} (k = {})",
                    w[0].0,
                    algo.name(),
                    w[0].2,
                    w[0].1,
                    w[1].2,
                    w[1].1
                ));
            }
        }
    }
    warnings
}

/// Output format for [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            t if t.eq_ignore_ascii_case("csv") => Ok(EmitFormat::Csv),
            t if t.eq_ignore_ascii_case("json") => Ok(EmitFormat::Json),
            other => Err(Error::InvalidSwap(format!("unknown format {other:?}"))),
        }
    }
}

pub const CSV_COLUMNS: &str =
    "dataset,algorithm,k,p,cost,cost_rel,fair_max,fair_mean,fair_rel,eta,iterations,wall_time_ms,seed";

/// Format with six significant digits, positional where reasonable,
/// scientific otherwise. Pure decimal string manipulation, so identical
/// inputs always produce identical bytes.
pub fn fmt_sig(v: f64) -> String {
    const SIG: usize = 6;
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    let sci = format!("{:.*e}", SIG - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("e-format always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < -4 || exp >= SIG as i32 {
        let trimmed = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{trimmed}e{exp}")
    } else {
        let decimals = (SIG as i32 - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

/// Write the report. Column order is fixed, floats carry six significant
/// digits, and a timing-free report emits identical bytes on every run.
pub fn emit<W: Write>(report: &EvalReport, format: EmitFormat, out: &mut W) -> Result<()> {
    match format {
        EmitFormat::Csv => {
            writeln!(out, "{CSV_COLUMNS}")?;
            for r in &report.rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.dataset,
                    r.algorithm,
                    r.k,
                    r.p,
                    opt(r.cost),
                    opt(r.cost_rel),
                    opt(r.fair_max),
                    opt(r.fair_mean),
                    opt(r.fair_rel),
                    opt(r.eta),
                    r.iterations.map(|i| i.to_string()).unwrap_or_default(),
                    opt(r.wall_time_ms),
                    r.seed,
                )?;
            }
        }
        EmitFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// [`emit`] straight to a file path.
pub fn emit_to_path(report: &EvalReport, format: EmitFormat, path: &std::path::Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    emit(report, format, &mut file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::random_instance;

    fn small_config() -> CompareConfig {
        CompareConfig {
            dataset: "unit".into(),
            k_values: vec![2, 3],
            algorithms: Algorithm::ALL.to_vec(),
            p: Norm::Finite(1.0),
            t: 1,
            epsilon: None,
            cover: CoverMode::Theory,
            seed: 5,
        }
    }

    #[test]
    fn grid_produces_expected_row_count() {
        let ps = random_instance(40, 2, 3, 0.3, 5).unwrap();
        let report = compare(&ps, &small_config()).unwrap();
        assert_eq!(report.rows.len(), 2 * 4);
        for row in &report.rows {
            assert!(row.error.is_none(), "row failed: {:?}", row.error);
            assert!(row.cost.is_some());
            assert!(row.cost_rel.is_some(), "relative column missing");
        }
    }

    #[test]
    fn search_cost_at_most_greedy_cost() {
        let ps = random_instance(50, 3, 4, 0.3, 11).unwrap();
        let report = compare(&ps, &small_config()).unwrap();
        for k in [2usize, 3] {
            let get = |name: &str| {
                report
                    .rows
                    .iter()
                    .find(|r| r.k == k && r.algorithm == name)
                    .and_then(|r| r.cost)
                    .unwrap()
            };
            assert!(get("fair_local_search") <= get("greedy") + 1e-12);
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = EvalReport::default();
        let mut buf = Vec::new();
        emit(&report, EmitFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_COLUMNS}\n"));
    }

    #[test]
    fn json_round_trip_preserves_report() {
        let ps = random_instance(30, 2, 3, 0.3, 7).unwrap();
        let mut report = compare(&ps, &small_config()).unwrap();
        report.zero_timings();
        let mut buf = Vec::new();
        emit(&report, EmitFormat::Json, &mut buf).unwrap();
        let back: EvalReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn formatting_is_six_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(123456.7), "123457");
        assert_eq!(fmt_sig(1234567.0), "1.23457e6");
        assert_eq!(fmt_sig(0.000123456789), "0.000123457");
        assert_eq!(fmt_sig(0.00001234), "1.234e-5");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
    }

    #[test]
    fn monotonicity_warnings_detect_rises() {
        let ps = random_instance(30, 2, 3, 0.3, 3).unwrap();
        let mut report = compare(&ps, &small_config()).unwrap();
        for w in cost_monotonicity_warnings(&report) {
            eprintln!("warning: {w}");
        }
        // Force a violation and check it is caught.
        if let Some(row) = report
            .rows
            .iter_mut()
            .find(|r| r.algorithm == "fair_local_search" && r.k == 3)
        {
            row.cost = Some(f64::MAX);
        }
        assert!(!cost_monotonicity_warnings(&report).is_empty());
    }

    #[test]
    fn golden_csv_for_seeded_run() {
        let ps = random_instance(36, 2, 3, 0.25, 2024).unwrap();
        let cfg = CompareConfig {
            dataset: "golden".into(),
            k_values: vec![2, 3, 4],
            algorithms: Algorithm::ALL.to_vec(),
            p: Norm::Finite(1.0),
            t: 1,
            epsilon: None,
            cover: CoverMode::Theory,
            seed: 2024,
        };
        let mut report = compare(&ps, &cfg).unwrap();
        report.zero_timings();
        let mut buf = Vec::new();
        emit(&report, EmitFormat::Csv, &mut buf).unwrap();
        let got = String::from_utf8(buf).unwrap();

        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_report.csv");
        if std::env::var("FAIRCLUST_BLESS").is_ok() {
            std::fs::create_dir_all(std::path::Path::new(path).parent().unwrap()).unwrap();
            std::fs::write(path, &got).unwrap();
        }
        let want = std::fs::read_to_string(path).expect(
            "golden fixture missing; run with FAIRCLUST_BLESS=1 to regenerate",
        );
        assert_eq!(got, want, "seeded run diverged from frozen fixture");
    }
}
