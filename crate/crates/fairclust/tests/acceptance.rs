//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//! Criterion 9 (byte-identical CLI reruns) lives in the CLI crate's
//! acceptance test.

use std::time::Instant;

use fairclust::baselines::fair_k_center_jung;
use fairclust::critical_balls::{build_critical_balls, verify_critical, verify_feasible, CoverMode};
use fairclust::evaluation::{compare, Algorithm, CompareConfig};
use fairclust::fair_radius::{brute_force_fair_radius, fair_radii};
use fairclust::geometry::cost;
use fairclust::instances::{adversarial_instance, random_instance, AdversarialSpec};
use fairclust::local_search::{fair_k_clustering, initialize, local_search};
use fairclust::oracle::{brute_force_optimal, fairness_ratio, OracleResult};
use fairclust::{CostSpec, Error, FairRadii, LsParams, Norm, PointSet, Solution};

/// The 100 instances shared by criteria 1 and 2: n = 200 with every
/// combination of d in {2,3,5}, k in {3,5,8}, alpha in {1,2}.
fn guarantee_instances() -> impl Iterator<Item = (PointSet, usize, f64, u64)> {
    (0..100u64).map(|i| {
        let d = [2, 3, 5][(i % 3) as usize];
        let k = [3, 5, 8][((i / 3) % 3) as usize];
        let alpha = [1.0, 2.0][((i / 9) % 2) as usize];
        let seed = 1000 + i;
        let ps = random_instance(200, d, k, 0.1, seed).expect("generator parameters are valid");
        (ps, k, alpha, seed)
    })
}

fn telescoping_bound(init_cost: f64, final_cost: f64, epsilon: f64) -> f64 {
    (init_cost / final_cost).ln() / (1.0 / (1.0 - epsilon)).ln() + 1.0
}

/// Iteration-count identity from the acceptance rule; exact, applies to
/// every run with positive costs.
fn assert_telescoping(init: &Solution, out: &Solution, epsilon: f64, label: &str) {
    if out.cost_value > 0.0 && init.cost_value > 0.0 {
        let bound = telescoping_bound(init.cost_value, out.cost_value, epsilon);
        assert!(
            (out.iterations as f64) <= bound,
            "{label}: {} accepted swaps exceed the telescoping bound {bound}",
            out.iterations
        );
    }
}

#[test]
fn criterion_1_fairness_guarantee() {
    let start = Instant::now();
    for (ps, k, alpha, seed) in guarantee_instances() {
        let spec = CostSpec::median(k);
        let params = LsParams::for_instance(ps.len(), &spec);
        let radii = fair_radii(&ps, k).unwrap();
        let balls = build_critical_balls(&ps, &radii, alpha, 6.0 * alpha).unwrap();
        let init = initialize(&ps, &balls, &spec).unwrap();
        let sol = local_search(&ps, &balls, &init, &spec, &params).unwrap();
        assert!(sol.converged, "seed {seed}: search hit the iteration cap");
        assert!(verify_feasible(&balls, &sol.centers, &ps), "seed {seed}: infeasible output");
        let audit = fairness_ratio(&ps, &radii, &sol.centers).unwrap();
        assert!(
            audit.max_ratio <= 7.0 * alpha,
            "seed {seed} (k {k}, alpha {alpha}): max ratio {} above {}",
            audit.max_ratio,
            7.0 * alpha
        );
        assert_telescoping(&init, &sol, params.epsilon, &format!("seed {seed}"));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 1 took {elapsed:?}, budget is 1 min");
    println!("ACCEPTANCE 1 (7-alpha fairness on 100 instances, {elapsed:?}): PASS");
}

#[test]
fn criterion_2_critical_ball_invariants() {
    let start = Instant::now();
    for (ps, k, alpha, seed) in guarantee_instances() {
        let radii = fair_radii(&ps, k).unwrap();
        let balls = build_critical_balls(&ps, &radii, alpha, 6.0 * alpha).unwrap();
        let report = verify_critical(&ps, &radii, &balls, alpha);
        assert!(report.c1_ok, "seed {seed}: C-1 failed: {:?}", report.c1_worst);
        assert!(report.c2_ok, "seed {seed}: C-2 failed: {:?}", report.c2_worst);
        assert!(report.ball_count <= k, "seed {seed}: {} balls for k = {k}", report.ball_count);
        // Pairwise disjoint as subsets of the point set.
        let b: Vec<(usize, f64)> = balls.balls.iter().map(|b| (b.center, b.radius)).collect();
        for i in 0..b.len() {
            for j in (i + 1)..b.len() {
                for x in 0..ps.len() {
                    let in_both =
                        ps.distance(x, b[i].0) <= b[i].1 && ps.distance(x, b[j].0) <= b[j].1;
                    assert!(!in_both, "seed {seed}: point {x} in balls {i} and {j}");
                }
            }
        }
    }
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 2 (critical-ball invariants on 100 instances, {elapsed:?}): PASS");
}

#[test]
fn criterion_3_fair_radius_oracle_equivalence() {
    let start = Instant::now();
    for i in 0..200u64 {
        let n = 5 + (i as usize * 13) % 46; // 5..=50
        let d = 1 + (i as usize) % 4;
        let clumps = 1 + (i as usize) % 5.min(n);
        let ps = random_instance(n, d, clumps.min(n), 0.2, 7000 + i).unwrap();
        let ell = 1 + (i as usize * 7) % n;
        let fr = fair_radii(&ps, ell).unwrap();
        for x in 0..n {
            let oracle = brute_force_fair_radius(&ps, ell, x).unwrap();
            assert_eq!(
                fr.radius(x).to_bits(),
                oracle.to_bits(),
                "instance {i}: radius of point {x} diverged from the oracle"
            );
        }
    }
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 3 (fair radii match the oracle bit for bit, {elapsed:?}): PASS");
}

/// Smallest alpha from {1, 2, 4, 8, 16} admitting a feasible center set.
fn oracle_at_feasible_alpha(
    ps: &PointSet,
    radii: &FairRadii,
    spec: &CostSpec,
) -> (f64, OracleResult) {
    for alpha in [1.0, 2.0, 4.0, 8.0, 16.0] {
        match brute_force_optimal(ps, spec, Some((alpha, radii)), None) {
            Ok(res) => return (alpha, res),
            Err(Error::OracleInfeasible { .. }) => continue,
            Err(e) => panic!("oracle failed: {e}"),
        }
    }
    panic!("no feasible alpha found; instance has co-located points with unmet demands");
}

fn bicriteria_suite(p: Norm, epsilon: f64, cost_factor: f64, label: &str) -> (f64, std::time::Duration) {
    let start = Instant::now();
    let mut worst_ratio: f64 = 0.0;
    for seed in 0..30u64 {
        let ps = random_instance(12, 2, 2, 0.15, 4000 + seed).unwrap();
        let spec = CostSpec::new(p, 2);
        let radii = fair_radii(&ps, 2).unwrap();
        let (alpha, opt) = oracle_at_feasible_alpha(&ps, &radii, &spec);

        let params = LsParams::for_instance(12, &spec).with_t(4).with_epsilon(epsilon);
        let balls = build_critical_balls(&ps, &radii, alpha, 6.0 * alpha).unwrap();
        let init = initialize(&ps, &balls, &spec).unwrap();
        let sol = local_search(&ps, &balls, &init, &spec, &params).unwrap();
        assert!(sol.converged);
        assert_telescoping(&init, &sol, epsilon, &format!("{label} seed {seed}"));

        if opt.cost > 0.0 {
            let ratio = sol.cost_value / opt.cost;
            worst_ratio = worst_ratio.max(ratio);
            assert!(
                sol.cost_value <= cost_factor * opt.cost,
                "{label} seed {seed}: cost {} above {cost_factor} x OPT_alpha = {}",
                sol.cost_value,
                cost_factor * opt.cost
            );
        } else {
            assert!(
                sol.cost_value == 0.0,
                "{label} seed {seed}: optimum is free but the pipeline paid {}",
                sol.cost_value
            );
        }
    }
    (worst_ratio, start.elapsed())
}

#[test]
fn criterion_4_bicriteria_cost_bound_k_median() {
    // t = 4, epsilon = 1/(12 k) with k = 2.
    let (worst, elapsed) = bicriteria_suite(Norm::Finite(1.0), 1.0 / 24.0, 84.0, "criterion 4");
    assert!(elapsed.as_secs_f64() < 120.0, "criterion 4 took {elapsed:?}, budget is 2 min");
    println!(
        "ACCEPTANCE 4 (84x k-median bound, worst observed {worst:.3}x, {elapsed:?}): PASS"
    );
}

#[test]
fn criterion_5_bicriteria_cost_bound_general_p() {
    // p = 2, epsilon = 1/(24 k) = 1/(2 gamma k p): bound 16 gamma delta p.
    let (worst, elapsed) = bicriteria_suite(Norm::Finite(2.0), 1.0 / 48.0, 576.0, "criterion 5");
    println!(
        "ACCEPTANCE 5 (576x l_2 bound, worst observed {worst:.3}x, {elapsed:?}): PASS"
    );
}

#[test]
fn criterion_6_cost_optimal_clustering_is_arbitrarily_unfair() {
    let start = Instant::now();
    // R/r = 100; n keeps each clump below the quota so clump points have
    // fair radius exactly r.
    let gen = AdversarialSpec::new(3, 10, 1.0, 100.0);
    let ps = adversarial_instance(&gen).unwrap();
    let spec = CostSpec::median(3);
    let radii = fair_radii(&ps, 3).unwrap();

    let opt = brute_force_optimal(&ps, &spec, None, None).unwrap();
    let opt_audit = fairness_ratio(&ps, &radii, &opt.centers).unwrap();
    assert!(
        opt_audit.max_ratio > 99.0,
        "unconstrained optimum ratio {} not above R/r - 1 = 99",
        opt_audit.max_ratio
    );

    let params = LsParams::for_instance(ps.len(), &spec);
    let fc = fair_k_clustering(&ps, 1.0, &spec, &params, CoverMode::Theory).unwrap();
    let fair_audit = fairness_ratio(&ps, &fc.radii, &fc.solution.centers).unwrap();
    assert!(
        fair_audit.max_ratio <= 7.0,
        "pipeline ratio {} above 7 alpha with alpha = 1",
        fair_audit.max_ratio
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "criterion 6 took {elapsed:?}, budget is 10 s");
    println!(
        "ACCEPTANCE 6 (optimum ratio {:.1} vs pipeline {:.2}, {elapsed:?}): PASS",
        opt_audit.max_ratio, fair_audit.max_ratio
    );
}

#[test]
fn criterion_7_termination_identity() {
    // The telescoping identity is also asserted inside criteria 1, 4,
    // and 5; this run exercises it across k and p on fresh instances.
    let start = Instant::now();
    for seed in 0..12u64 {
        let n = 80;
        let k = 2 + (seed as usize) % 6;
        let p = [Norm::Finite(1.0), Norm::Finite(2.0)][(seed % 2) as usize];
        let ps = random_instance(n, 2, k, 0.25, 6000 + seed).unwrap();
        let spec = CostSpec::new(p, k);
        let params = LsParams::for_instance(n, &spec);
        let radii = fair_radii(&ps, k).unwrap();
        let balls = build_critical_balls(&ps, &radii, 1.0, 6.0).unwrap();
        let init = initialize(&ps, &balls, &spec).unwrap();
        let sol = local_search(&ps, &balls, &init, &spec, &params).unwrap();
        assert_telescoping(&init, &sol, params.epsilon, &format!("termination seed {seed}"));
        // Cost shrinks by at least the acceptance factor on every
        // accepted swap, so the chain is strictly decreasing.
        assert!(sol.cost_value <= init.cost_value);
    }
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 7 (accepted swaps within the telescoping identity, {elapsed:?}): PASS");
}

#[test]
fn criterion_8_experiment_protocol() {
    let start = Instant::now();
    // Synthetic stand-ins shaped like the three reference datasets
    // (dimension 2, 3, 5; 1000 points each).
    let shapes = [
        ("diabetes_like", 2usize, 8usize, 0.05f64, 11u64),
        ("bank_like", 3, 10, 0.03, 22),
        ("census_like", 5, 12, 0.05, 33),
    ];
    for (name, d, clumps, spread, seed) in shapes {
        let ps = random_instance(1000, d, clumps, spread, seed).unwrap();
        let cfg = CompareConfig {
            dataset: name.into(),
            k_values: vec![5, 10, 15, 20, 25, 30],
            algorithms: vec![Algorithm::FairLocalSearch, Algorithm::FairKCenter],
            p: Norm::Finite(1.0),
            t: 1,
            epsilon: None,
            cover: CoverMode::Theory,
            seed,
        };
        let report = compare(&ps, &cfg).unwrap();
        for k in cfg.k_values {
            let row = |algo: &str| {
                report
                    .rows
                    .iter()
                    .find(|r| r.k == k && r.algorithm == algo)
                    .unwrap_or_else(|| panic!("{name}: missing {algo} row for k = {k}"))
            };
            let ls = row("fair_local_search");
            let fkc = row("fair_k_center");
            assert!(ls.error.is_none() && fkc.error.is_none(), "{name} k {k}: a run failed");
            let (ls_cost, fkc_cost) = (ls.cost.unwrap(), fkc.cost.unwrap());
            assert!(
                ls_cost <= fkc_cost,
                "{name} k {k}: local search cost {ls_cost} above fair_k_center {fkc_cost}"
            );
            let eta = fkc.eta.unwrap();
            assert!(
                ls.fair_max.unwrap() <= 7.0 * eta,
                "{name} k {k}: fairness {} above 7 eta = {}",
                ls.fair_max.unwrap(),
                7.0 * eta
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "criterion 8 took {elapsed:?}, budget is 10 min");
    println!("ACCEPTANCE 8 (local search beats fair_k_center on cost across the grid, {elapsed:?}): PASS");
}

/// Cross-checks backing the grid comparison: the harness relies on the
/// eta search behaving the same way on any dataset supplied locally.
#[test]
fn criterion_8_direction_checks_on_eta_search() {
    // eta stays in [1, 2] and padding always restores |centers| = k.
    for seed in 0..10u64 {
        let ps = random_instance(120, 2, 5, 0.3, 900 + seed).unwrap();
        for k in [3usize, 7, 12] {
            let spec = CostSpec::median(k);
            let radii = fair_radii(&ps, k).unwrap();
            let (sol, eta) = fair_k_center_jung(&ps, &radii, &spec, 1e-6, 40).unwrap();
            assert_eq!(sol.centers.len(), k);
            assert!((1.0..=2.0).contains(&eta.eta));
            assert_eq!(
                cost(&ps, &sol.centers, &spec).unwrap().to_bits(),
                sol.cost_value.to_bits()
            );
        }
    }
    println!("ACCEPTANCE 8b (eta search invariants): PASS");
}
