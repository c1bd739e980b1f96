//! Acceptance suite: every release-gating criterion, one test each,
//! printing one pass/fail line per criterion.
//!
//! Criteria 1-4 share a single run of the full benchmark protocol
//! (6 scenarios x 2 approaches x 20 common-random-number replications,
//! default seed).

use std::process::Command;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mobile_am_sim::analysis::{self, compare_approaches, expected_max_uniform_const};
use mobile_am_sim::plant::{count_products, run_replication, ApproachKind};
use mobile_am_sim::report::{self, ReplicationRow};
use mobile_am_sim::scenario::{builtin_scenarios, ExperimentConfig, Scenario};
use mobile_am_sim::simkernel::{EventCalendar, SimTime, UniformDist};

fn criterion(number: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "[{}] criterion {number} — {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {number} ({name}) failed: {detail}");
}

struct Benchmark {
    rows: Vec<ReplicationRow>,
}

impl Benchmark {
    fn products(&self, scenario: u32, approach: ApproachKind) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.scenario == scenario && r.approach == approach)
            .map(|r| r.products as f64)
            .collect()
    }

    fn mean_products(&self, scenario: u32, approach: ApproachKind) -> f64 {
        let v = self.products(scenario, approach);
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn benchmark() -> &'static Benchmark {
    static DATA: OnceLock<Benchmark> = OnceLock::new();
    DATA.get_or_init(|| {
        let scenarios = builtin_scenarios();
        let config = ExperimentConfig::default();
        let output =
            report::run_matrix(&scenarios, &config, false).expect("default config is valid");
        for result in &output.results {
            assert!(result.audit.clean(), "benchmark run violated conservation");
        }
        Benchmark { rows: output.rows }
    })
}

#[test]
fn criterion_1_dominance() {
    let data = benchmark();
    let mut ok = true;
    let mut detail = String::new();
    for id in 1..=6 {
        let existing = data.products(id, ApproachKind::Existing);
        let proposed = data.products(id, ApproachKind::Proposed);
        let cmp = compare_approaches(id, &existing, &proposed).unwrap();
        let holds = cmp.mean_proposed > cmp.mean_existing
            && cmp.mean_difference - cmp.difference_ci_half_width > 0.0;
        ok &= holds;
        detail.push_str(&format!(
            "S{id} diff {:.2}±{:.2}; ",
            cmp.mean_difference, cmp.difference_ci_half_width
        ));
    }
    criterion(
        1,
        "proposed dominates existing with CI excluding 0",
        ok,
        &detail,
    );
}

#[test]
fn criterion_2_scenario_2_to_4_consistency() {
    let data = benchmark();
    let means: Vec<f64> = [2, 3, 4]
        .iter()
        .map(|&id| data.mean_products(id, ApproachKind::Proposed))
        .collect();
    let max = means.iter().cloned().fold(f64::MIN, f64::max);
    let min = means.iter().cloned().fold(f64::MAX, f64::min);
    let ok = max <= 1.10 * min;
    criterion(
        2,
        "proposed throughput consistent across scenarios 2-4",
        ok,
        &format!("means {means:?}, spread {:.2}%", (max / min - 1.0) * 100.0),
    );
}

#[test]
fn criterion_3_oracle_agreement() {
    let data = benchmark();
    let config = ExperimentConfig::default();
    let mut ok = true;
    let mut detail = String::new();
    for scenario in builtin_scenarios() {
        let oracle = analysis::oracle_proposed_throughput(&scenario, &config);
        let mean = data.mean_products(scenario.id, ApproachKind::Proposed);
        let rel = (mean - oracle).abs() / oracle;
        ok &= rel <= 0.10;
        detail.push_str(&format!(
            "S{} {:.2} vs {:.2} ({:+.1}%); ",
            scenario.id,
            mean,
            oracle,
            rel * 100.0
        ));
    }
    criterion(
        3,
        "proposed mean within 10% of the analytic oracle",
        ok,
        &detail,
    );
}

#[test]
fn criterion_4_decreasing_trend() {
    let data = benchmark();
    let mut ok = true;
    let mut detail = String::new();
    for approach in [ApproachKind::Existing, ApproachKind::Proposed] {
        for chain in [[1u32, 3, 5], [2, 4, 6]] {
            let means: Vec<f64> = chain
                .iter()
                .map(|&id| data.mean_products(id, approach))
                .collect();
            let holds = means[0] >= means[1] && means[1] >= means[2];
            ok &= holds;
            detail.push_str(&format!("{approach} {chain:?}: {means:?}; "));
        }
    }
    criterion(4, "throughput falls as distance grows", ok, &detail);
}

#[test]
fn criterion_5_hand_traced_determinism() {
    let scenario = Scenario {
        id: 1,
        distance: 5.0,
        print_time_1: UniformDist::new(20.0, 20.0).unwrap(),
        print_time_2: UniformDist::new(20.0, 20.0).unwrap(),
        assembly_time: UniformDist::new(0.0, 0.0).unwrap(),
    };
    let config = ExperimentConfig {
        horizon: SimTime::new(100.0),
        warmup: SimTime::new(0.0),
        ..ExperimentConfig::default()
    };
    let result = run_replication(&scenario, ApproachKind::Proposed, &config, 0).unwrap();
    let ok = result.delivery_times == [25.0, 45.0, 65.0, 85.0] && result.products_in_window == 4;
    criterion(
        5,
        "degenerate config reproduces the hand-traced schedule",
        ok,
        &format!("deliveries {:?}", result.delivery_times),
    );
}

#[test]
fn criterion_6_byte_level_reproducibility() {
    let bin = env!("CARGO_BIN_EXE_mobile-am-sim");
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for format in ["csv", "json"] {
        let run = |tag: &str| {
            let path = dir.path().join(format!("{tag}.{format}"));
            let output = Command::new(bin)
                .args(["experiment", "--seed", "7", "--format", format, "--out"])
                .arg(&path)
                .output()
                .expect("binary runs");
            assert!(output.status.success(), "experiment failed: {output:?}");
            (std::fs::read(&path).unwrap(), output.stdout)
        };
        let (file_a, stdout_a) = run("a");
        let (file_b, stdout_b) = run("b");
        let same = file_a == file_b && stdout_a == stdout_b;
        ok &= same;
        detail.push_str(&format!(
            "{format}: {} bytes, identical={same}; ",
            file_a.len()
        ));
    }
    criterion(
        6,
        "repeated experiment runs are byte-identical",
        ok,
        &detail,
    );
}

#[test]
fn criterion_7_conservation_suite() {
    let scenarios = builtin_scenarios();
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let cases: Vec<(u64, usize)> = (0..500)
        .map(|_| (rng.gen::<u64>(), rng.gen_range(0..scenarios.len())))
        .collect();
    let violations: u64 = cases
        .par_iter()
        .map(|&(seed, idx)| {
            let config = ExperimentConfig {
                horizon: SimTime::new(200.0),
                warmup: SimTime::new(0.0),
                master_seed: seed,
                replications: 1,
                ..ExperimentConfig::default()
            };
            let mut bad = 0;
            for approach in [ApproachKind::Existing, ApproachKind::Proposed] {
                let result = run_replication(&scenarios[idx], approach, &config, 0).unwrap();
                if !result.audit.clean() {
                    bad += 1;
                }
            }
            bad
        })
        .sum();
    criterion(
        7,
        "part/product conservation holds after every event",
        violations == 0,
        &format!("{violations} violations across 1000 mini-replications"),
    );
}

#[test]
fn criterion_8_kernel_properties() {
    // randomized schedule/pop interleavings
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut order_ok = true;
    for _ in 0..200 {
        let mut cal = EventCalendar::new();
        let mut scheduled = 0u64;
        let mut popped: Vec<(SimTime, u64)> = Vec::new();
        for _ in 0..500 {
            if rng.gen_bool(0.55) || cal.is_empty() {
                let at = cal.now() + rng.gen::<f64>() * 100.0;
                cal.schedule(at, scheduled);
                scheduled += 1;
            } else if let Some(ev) = cal.pop_next() {
                popped.push((ev.time, ev.seq));
            }
        }
        while let Some(ev) = cal.pop_next() {
            popped.push((ev.time, ev.seq));
        }
        order_ok &= popped.len() as u64 == scheduled;
        for pair in popped.windows(2) {
            order_ok &= pair[0].0 < pair[1].0 || (pair[0].0 == pair[1].0 && pair[0].1 < pair[1].1);
        }
    }

    // uniform sampler: 1e5 draws, mean within three standard errors
    let dist = UniformDist::new(20.0, 40.0).unwrap();
    let mut sampler = ChaCha8Rng::seed_from_u64(99);
    let n = 100_000;
    let mut sum = 0.0;
    let mut in_range = true;
    for _ in 0..n {
        let v = dist.sample(&mut sampler);
        in_range &= (20.0..40.0).contains(&v);
        sum += v;
    }
    let mean = sum / n as f64;
    let se = (20.0 / 12f64.sqrt()) / (n as f64).sqrt();
    let sampler_ok = in_range && (mean - 30.0).abs() <= 3.0 * se;

    criterion(
        8,
        "event ordering is FIFO-stable and the sampler is unbiased",
        order_ok && sampler_ok,
        &format!("sampler mean {mean:.4} (target 30 ± {:.4})", 3.0 * se),
    );
}

#[test]
fn criterion_9_closed_form_vs_monte_carlo() {
    let exact = expected_max_uniform_const(30.0, 70.0, 30.0).unwrap() == 50.0
        && expected_max_uniform_const(30.0, 70.0, 60.0).unwrap() == 61.25
        && expected_max_uniform_const(40.0, 80.0, 60.0).unwrap() == 65.0
        && expected_max_uniform_const(40.0, 80.0, 90.0).unwrap() == 90.0;

    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let triples: Vec<(f64, f64, f64, u64)> = (0..100)
        .map(|_| {
            let a = rng.gen::<f64>() * 80.0;
            let b = a + rng.gen::<f64>() * 60.0 + 0.01;
            let c = a - 15.0 + rng.gen::<f64>() * (b - a + 30.0);
            (a, b, c.max(0.0), rng.gen::<u64>())
        })
        .collect();
    let failures: usize = triples
        .par_iter()
        .map(|&(a, b, c, seed)| {
            let dist = UniformDist::new(a, b).unwrap();
            let mut mc = ChaCha8Rng::seed_from_u64(seed);
            let n = 1_000_000u64;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let v = dist.sample(&mut mc).max(c);
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / n as f64;
            let var = ((sum_sq - sum * sum / n as f64) / (n as f64 - 1.0)).max(0.0);
            let se = (var / n as f64).sqrt();
            let closed = expected_max_uniform_const(a, b, c).unwrap();
            let tol = (3.0 * se).max(1e-9 * closed.abs().max(1.0));
            usize::from((closed - mean).abs() > tol)
        })
        .sum();

    criterion(
        9,
        "closed-form expected max matches Monte Carlo",
        exact && failures == 0,
        &format!(
            "{failures}/100 triples outside three standard errors; worked cases exact={exact}"
        ),
    );
}

#[test]
fn window_counting_matches_run_results() {
    // cross-check: the windowed count reported by a replication equals
    // recounting its delivery times by hand
    let scenario = &builtin_scenarios()[1];
    let config = ExperimentConfig::default();
    for approach in [ApproachKind::Existing, ApproachKind::Proposed] {
        let result = run_replication(scenario, approach, &config, 5).unwrap();
        let recount = count_products(&result.delivery_times, config.warmup, config.horizon);
        assert_eq!(result.products_in_window, recount);
    }
}
