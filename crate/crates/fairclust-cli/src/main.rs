//! Command-line surface for the fairclust library.
//!
//! Subcommands: `radii` (per-point fair radii as CSV), `cluster` (one
//! algorithm, solution JSON with a fairness audit), `compare` (the
//! algorithm-by-k evaluation grid), and `gen` (instance CSV generators).
//! Data goes to `--out` or standard output; log lines go to standard
//! error. Exit codes: 0 ok, 2 input error, 3 non-convergence, 4 internal
//! assertion failure.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fairclust::baselines::{fair_k_center_jung, greedy_baseline, vanilla_local_search};
use fairclust::critical_balls::verify_feasible;
use fairclust::evaluation::{
    compare, cost_monotonicity_warnings, emit, Algorithm, CompareConfig, EmitFormat,
};
use fairclust::fair_radius::fair_radii;
use fairclust::instances::{
    adversarial_instance, load_csv, normalize_min_max, random_instance, write_points_csv,
    AdversarialSpec, ColumnSelect, IngestSpec, SampleSize,
};
use fairclust::local_search::fair_k_clustering;
use fairclust::oracle::fairness_ratio;
use fairclust::{CostSpec, CoverMode, LsParams, Norm, PointSet, Solution};

#[derive(Parser)]
#[command(name = "fairclust", version, about = "Individually fair k-clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit per-point fair radii r_k as CSV.
    Radii(RadiiArgs),
    /// Run one clustering algorithm and write the solution as JSON.
    Cluster(ClusterArgs),
    /// Run the algorithm-by-k comparison grid and emit a report.
    Compare(CompareArgs),
    /// Generate an instance and write it as CSV.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Generator {
    Adversarial,
    Random,
}

/// Options shared by every command that consumes a point set. Exactly
/// one of `--input` and `--gen` must be given.
#[derive(Args)]
struct InputArgs {
    /// CSV file of points (optional header auto-detected).
    #[arg(long)]
    input: Option<PathBuf>,

    /// Generate the instance instead of reading a file.
    #[arg(long, value_enum)]
    gen: Option<Generator>,

    /// Columns to read: comma-separated names or zero-based indices.
    #[arg(long)]
    columns: Option<String>,

    /// Rows to subsample from the input file ("all" for every row).
    #[arg(long, default_value = "1000")]
    sample: String,

    /// Points for generated instances.
    #[arg(long, default_value_t = 1000)]
    n: usize,

    /// Dimension for random instances.
    #[arg(long, default_value_t = 2)]
    d: usize,

    /// Generator parameter: clump count for random instances, block
    /// parameter for adversarial ones. Defaults to --k when present.
    #[arg(long)]
    gen_k: Option<usize>,

    /// Gaussian spread for random instances.
    #[arg(long, default_value_t = 0.1)]
    spread: f64,

    /// Clump radius r of the adversarial construction.
    #[arg(long, default_value_t = 1.0)]
    small_r: f64,

    /// Node half-spacing R of the adversarial construction.
    #[arg(long, default_value_t = 100.0)]
    big_r: f64,

    /// Separation factor c of the adversarial construction.
    #[arg(long, default_value_t = 10.0)]
    sep: f64,

    /// Min-max scale every column into [0, 1] after loading.
    #[arg(long)]
    normalize: bool,
}

fn parse_columns(raw: &str) -> ColumnSelect {
    let parts: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if parts.iter().all(|p| p.parse::<usize>().is_ok()) {
        ColumnSelect::Indices(parts.iter().map(|p| p.parse().unwrap()).collect())
    } else {
        ColumnSelect::Names(parts.iter().map(|p| p.to_string()).collect())
    }
}

impl InputArgs {
    fn resolve(&self, seed: u64, fallback_k: Option<usize>) -> Result<(PointSet, String)> {
        let (ps, name) = match (&self.input, self.gen) {
            (Some(_), Some(_)) => bail!("--input and --gen are mutually exclusive"),
            (None, None) => bail!("one of --input or --gen is required"),
            (Some(path), None) => {
                let spec = IngestSpec {
                    path: path.clone(),
                    columns: self.columns.as_deref().map_or(ColumnSelect::All, parse_columns),
                    subsample: if self.sample.eq_ignore_ascii_case("all") {
                        SampleSize::All
                    } else {
                        SampleSize::Count(
                            self.sample.parse().context("--sample expects a count or 'all'")?,
                        )
                    },
                    seed,
                };
                let ps = load_csv(&spec)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "input".to_string());
                (ps, name)
            }
            (None, Some(Generator::Random)) => {
                let clumps = self.gen_k.or(fallback_k).unwrap_or(4);
                let ps = random_instance(self.n, self.d, clumps, self.spread, seed)?;
                (ps, "random".to_string())
            }
            (None, Some(Generator::Adversarial)) => {
                let k = self.gen_k.or(fallback_k).unwrap_or(3);
                let mut spec = AdversarialSpec::new(k, self.n, self.small_r, self.big_r);
                spec.separation = self.sep;
                let ps = adversarial_instance(&spec)?;
                (ps, "adversarial".to_string())
            }
        };
        Ok(if self.normalize { (normalize_min_max(&ps), name) } else { (ps, name) })
    }
}

#[derive(Args)]
struct RadiiArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Radii divisor; with the center budget k this is the fairness
    /// radius r_k.
    #[arg(long)]
    k: usize,

    #[arg(long)]
    seed: Option<u64>,

    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long)]
    k: usize,

    /// Fairness parameter.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,

    /// Cost exponent: 1, 2, any real >= 1, or "inf".
    #[arg(long, default_value = "1")]
    p: String,

    /// Maximum swap size (1..=4).
    #[arg(long, default_value_t = 1)]
    t: usize,

    /// Improvement threshold override.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Ball coverage rule: "theory" (6 alpha), "experiment" (3), or an
    /// explicit multiplier.
    #[arg(long, default_value = "theory")]
    cover: String,

    /// Algorithm: fair_local_search (default), fair_k_center, greedy,
    /// vanilla_local_search.
    #[arg(long, default_value = "fair_local_search")]
    algo: String,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,

    /// k grid, "start:end:step" or a comma-separated list.
    #[arg(long, default_value = "5:30:5")]
    k_grid: String,

    /// Comma-separated algorithm names; all four by default.
    #[arg(long)]
    algos: Option<String>,

    #[arg(long, default_value = "1")]
    p: String,

    #[arg(long, default_value_t = 1)]
    t: usize,

    #[arg(long)]
    epsilon: Option<f64>,

    #[arg(long, default_value = "theory")]
    cover: String,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value = "csv")]
    format: String,

    /// Keep real wall-clock times in the report (off by default so
    /// reruns are byte-identical).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Clustering budget; doubles as the generator default.
    #[arg(long)]
    k: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn parse_k_grid(raw: &str) -> Result<Vec<usize>> {
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            bail!("--k-grid expects start:end:step or a comma list");
        }
        let (start, end, step): (usize, usize, usize) =
            (parts[0].parse()?, parts[1].parse()?, parts[2].parse()?);
        if step == 0 || start == 0 || end < start {
            bail!("--k-grid bounds are invalid");
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Ok(s.parse::<usize>()?))
            .collect()
    }
}

fn cmd_radii(args: RadiiArgs) -> Result<i32> {
    let seed = args.seed.unwrap_or(0);
    let (ps, _) = args.input.resolve(seed, Some(args.k))?;
    let radii = fair_radii(&ps, args.k)?;
    let mut out = open_output(&args.out)?;
    writeln!(out, "point_index,r_k")?;
    for x in 0..ps.len() {
        writeln!(out, "{x},{}", radii.radius(x))?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_cluster(args: ClusterArgs) -> Result<i32> {
    let seed = args.seed.unwrap_or(0);
    let (ps, _) = args.input.resolve(seed, Some(args.k))?;
    let p: Norm = args.p.parse()?;
    let spec = CostSpec::new(p, args.k);
    let cover: CoverMode = args.cover.parse()?;
    let mut params = LsParams::for_instance(ps.len(), &spec).with_t(args.t);
    params.seed = seed;
    if let Some(eps) = args.epsilon {
        params = params.with_epsilon(eps);
    }
    let algo: Algorithm = args.algo.parse()?;

    let radii = fair_radii(&ps, args.k)?;
    let mut eta = None;
    let mut feasible = None;
    let solution: Solution = match algo {
        Algorithm::FairLocalSearch => {
            let fc = fair_k_clustering(&ps, args.alpha, &spec, &params, cover)?;
            feasible = Some(verify_feasible(&fc.balls, &fc.solution.centers, &ps));
            fc.solution
        }
        Algorithm::FairKCenter => {
            let (sol, eta_res) = fair_k_center_jung(&ps, &radii, &spec, 1e-6, 40)?;
            eta = Some(eta_res.eta);
            sol
        }
        Algorithm::Greedy => {
            let (sol, balls) =
                greedy_baseline(&ps, &radii, &spec, args.alpha, cover.multiplier(args.alpha))?;
            feasible = Some(verify_feasible(&balls, &sol.centers, &ps));
            sol
        }
        Algorithm::VanillaLocalSearch => vanilla_local_search(&ps, &spec, &params)?,
    };

    let audit = fairness_ratio(&ps, &radii, &solution.centers)?;
    let mut doc = serde_json::to_value(solution.record(&spec))?;
    let obj = doc.as_object_mut().expect("solution record is an object");
    obj.insert("algorithm".into(), serde_json::json!(algo.name()));
    obj.insert("alpha".into(), serde_json::json!(args.alpha));
    if let Some(eta) = eta {
        obj.insert("eta".into(), serde_json::json!(eta));
    }
    if let Some(feasible) = feasible {
        obj.insert("feasible".into(), serde_json::json!(feasible));
    }
    obj.insert(
        "audit".into(),
        serde_json::json!({
            "max_fairness_ratio": audit.max_ratio,
            "mean_fairness_ratio": audit.mean_ratio,
            "cost": solution.cost_value,
        }),
    );

    let mut out = open_output(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    out.flush()?;

    if !solution.converged {
        eprintln!("warning: local search hit the iteration cap before stabilizing");
        return Ok(3);
    }
    Ok(0)
}

fn cmd_compare(args: CompareArgs) -> Result<i32> {
    let (ps, dataset) = args.input.resolve(args.seed, None)?;
    let algorithms = match &args.algos {
        None => Algorithm::ALL.to_vec(),
        Some(raw) => raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Ok(s.parse::<Algorithm>()?))
            .collect::<Result<Vec<_>>>()?,
    };
    let cfg = CompareConfig {
        dataset,
        k_values: parse_k_grid(&args.k_grid)?,
        algorithms,
        p: args.p.parse()?,
        t: args.t,
        epsilon: args.epsilon,
        cover: args.cover.parse()?,
        seed: args.seed,
    };
    let mut report = compare(&ps, &cfg)?;
    for warning in cost_monotonicity_warnings(&report) {
        eprintln!("warning: {warning}");
    }
    if !args.timing {
        report.zero_timings();
    }
    let format: EmitFormat = args.format.parse()?;
    let mut out = open_output(&args.out)?;
    emit(&report, format, &mut out)?;
    out.flush()?;
    if report.rows.iter().any(|r| r.error.is_some()) {
        return Ok(3);
    }
    Ok(0)
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    if args.input.gen.is_none() {
        bail!("gen requires --gen {{adversarial,random}}");
    }
    if args.input.input.is_some() {
        bail!("gen does not accept --input");
    }
    let (ps, _) = args.input.resolve(args.seed, args.k)?;
    let mut out = open_output(&args.out)?;
    write_points_csv(&ps, &mut out)?;
    out.flush()?;
    Ok(0)
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<fairclust::Error>() {
        Some(fairclust::Error::InvalidSwap(_)) | Some(fairclust::Error::InfeasibleInitial) => 4,
        _ => 2,
    }
}

fn main() {
    if let Ok(threads) = std::env::var("FAIRCLUST_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Radii(args) => cmd_radii(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code_for(&err));
        }
    }
}
