//! Analytic bottleneck oracles and replication statistics.
//!
//! The oracles approximate each configuration's steady-state product cycle
//! as the renewal interval of its slowest resource: `E[max(PT2, travel)]`.
//! They ignore assembly synchronization and product-carry contention, so
//! agreement with the simulation is expected to within roughly 10%, not
//! exactly.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::scenario::{ExperimentConfig, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    /// Interval bounds out of order (`a > b`).
    InvalidInterval {
        a: f64,
        b: f64,
    },
    TooFewSamples {
        got: usize,
        need: usize,
    },
    LengthMismatch {
        left: usize,
        right: usize,
    },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::InvalidInterval { a, b } => {
                write!(f, "invalid interval: a {a} > b {b}")
            }
            AnalysisError::TooFewSamples { got, need } => {
                write!(f, "need at least {need} samples, got {got}")
            }
            AnalysisError::LengthMismatch { left, right } => {
                write!(f, "paired vectors differ in length: {left} vs {right}")
            }
        }
    }
}

impl std::error::Error for AnalysisError {}

/// Closed form for `E[max(U(a,b), c)]`:
/// the uniform mean when `c <= a`, `c` when `c >= b`, and otherwise
/// `c(c-a)/(b-a) + ((b+c)/2)((b-c)/(b-a))`.
pub fn expected_max_uniform_const(a: f64, b: f64, c: f64) -> Result<f64, AnalysisError> {
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(AnalysisError::InvalidInterval { a, b });
    }
    if c <= a {
        Ok((a + b) / 2.0)
    } else if c >= b {
        Ok(c)
    } else {
        Ok(c * (c - a) / (b - a) + (b + c) / 2.0 * (b - c) / (b - a))
    }
}

/// Expected per-product cycle of the mobile configuration: the bottleneck
/// machine-2 print time raced against the mandatory assembly-to-I/O round
/// trip.
pub fn oracle_proposed_cycle(scenario: &Scenario, amr_speed: f64) -> f64 {
    let round_trip = 2.0 * scenario.distance / amr_speed;
    expected_max_uniform_const(
        scenario.print_time_2.low(),
        scenario.print_time_2.high(),
        round_trip,
    )
    .expect("scenario distributions are validated at construction")
}

/// Expected products delivered per measurement window under the mobile
/// configuration: `(horizon - warmup) / E[max(PT2, 2d/speed)]`.
pub fn oracle_proposed_throughput(scenario: &Scenario, config: &ExperimentConfig) -> f64 {
    config.window() / oracle_proposed_cycle(scenario, config.amr_speed)
}

/// Monte-Carlo estimate of the benchmark configuration's bottleneck cycle,
/// `E[max(PT2, 3d/speed + AT)]`: the courier AMR's full round trip (drop
/// leg, delivery leg, return leg) plus the assembly wait, raced against
/// the machine-2 print time. A sanity band, not an exact prediction.
pub fn oracle_existing_cycle_mc(
    scenario: &Scenario,
    amr_speed: f64,
    samples: u64,
    seed: u64,
) -> Result<f64, AnalysisError> {
    if samples < 10_000 {
        return Err(AnalysisError::TooFewSamples {
            got: samples as usize,
            need: 10_000,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let travel = 3.0 * scenario.distance / amr_speed;
    let mut sum = 0.0;
    for _ in 0..samples {
        let print_time = scenario.print_time_2.sample(&mut rng);
        let courier = travel + scenario.assembly_time.sample(&mut rng);
        sum += print_time.max(courier);
    }
    Ok(sum / samples as f64)
}

/// Mean, sample standard deviation, and 95% confidence half-width over a
/// set of replication outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub ci_half_width: f64,
}

/// Requires at least two values (a one-point confidence interval is
/// meaningless). Standard deviation uses the n-1 denominator.
pub fn summarize(values: &[f64]) -> Result<SummaryStats, AnalysisError> {
    let n = values.len();
    if n < 2 {
        return Err(AnalysisError::TooFewSamples { got: n, need: 2 });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std_dev = var.sqrt();
    let ci_half_width = t_critical_95(n - 1) * std_dev / (n as f64).sqrt();
    Ok(SummaryStats {
        n,
        mean,
        std_dev,
        ci_half_width,
    })
}

/// Paired comparison of the two approaches over common-random-number
/// replications of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub scenario: u32,
    pub mean_existing: f64,
    pub mean_proposed: f64,
    /// Mean of the per-replication differences (proposed - existing).
    pub mean_difference: f64,
    pub difference_ci_half_width: f64,
}

pub fn compare_approaches(
    scenario: u32,
    existing: &[f64],
    proposed: &[f64],
) -> Result<ComparisonResult, AnalysisError> {
    if existing.len() != proposed.len() {
        return Err(AnalysisError::LengthMismatch {
            left: existing.len(),
            right: proposed.len(),
        });
    }
    let diffs: Vec<f64> = proposed.iter().zip(existing).map(|(p, e)| p - e).collect();
    let diff_stats = summarize(&diffs)?;
    let mean_existing = existing.iter().sum::<f64>() / existing.len() as f64;
    let mean_proposed = proposed.iter().sum::<f64>() / proposed.len() as f64;
    Ok(ComparisonResult {
        scenario,
        mean_existing,
        mean_proposed,
        mean_difference: diff_stats.mean,
        difference_ci_half_width: diff_stats.ci_half_width,
    })
}

/// Two-sided 95% Student-t critical values for 1..=40 degrees of freedom,
/// from the standard table. Larger df clamp to the df=40 entry, which is
/// slightly conservative (wider intervals).
const T_CRITICAL_95: [f64; 40] = [
    12.70620, 4.30265, 3.18245, 2.77645, 2.57058, //
    2.44691, 2.36462, 2.30600, 2.26216, 2.22814, //
    2.20099, 2.17881, 2.16037, 2.14479, 2.13145, //
    2.11991, 2.10982, 2.10092, 2.09302, 2.08596, //
    2.07961, 2.07387, 2.06866, 2.06390, 2.05954, //
    2.05553, 2.05183, 2.04841, 2.04523, 2.04227, //
    2.03951, 2.03693, 2.03452, 2.03224, 2.03011, //
    2.02809, 2.02619, 2.02439, 2.02269, 2.02108,
];

pub fn t_critical_95(df: usize) -> f64 {
    assert!(df >= 1, "degrees of freedom must be at least 1");
    T_CRITICAL_95[df.min(T_CRITICAL_95.len()) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin_scenarios;
    use crate::simkernel::UniformDist;
    use rand::Rng;

    #[test]
    fn expected_max_worked_cases_are_exact() {
        assert_eq!(expected_max_uniform_const(30.0, 70.0, 30.0).unwrap(), 50.0);
        assert_eq!(expected_max_uniform_const(40.0, 80.0, 90.0).unwrap(), 90.0);
        assert_eq!(expected_max_uniform_const(30.0, 70.0, 60.0).unwrap(), 61.25);
        assert_eq!(expected_max_uniform_const(40.0, 80.0, 60.0).unwrap(), 65.0);
    }

    #[test]
    fn expected_max_rejects_inverted_interval() {
        assert!(expected_max_uniform_const(70.0, 30.0, 50.0).is_err());
    }

    #[test]
    fn expected_max_is_monotone_and_bounded_below() {
        let (a, b) = (30.0, 70.0);
        let mut prev = f64::NEG_INFINITY;
        let mut c = 20.0;
        while c <= 90.0 {
            let v = expected_max_uniform_const(a, b, c).unwrap();
            assert!(v >= prev, "not monotone at c={c}");
            assert!(v >= (a + b) / 2.0 - 1e-12);
            assert!(v >= c - 1e-12);
            prev = v;
            c += 0.5;
        }
    }

    #[test]
    fn expected_max_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = rng.gen::<f64>() * 50.0;
            let b = a + rng.gen::<f64>() * 50.0 + 0.1;
            let c = a - 10.0 + rng.gen::<f64>() * (b - a + 20.0);
            let dist = UniformDist::new(a, b).unwrap();
            let n = 100_000;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let v = dist.sample(&mut rng).max(c);
                sum += v;
                sum_sq += v * v;
            }
            let mc_mean = sum / n as f64;
            let var = (sum_sq - sum * sum / n as f64) / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt();
            let closed = expected_max_uniform_const(a, b, c).unwrap();
            let tol = (3.0 * se).max(1e-9 * closed.abs().max(1.0));
            assert!(
                (closed - mc_mean).abs() <= tol,
                "closed {closed} vs MC {mc_mean} for ({a}, {b}, {c})"
            );
        }
    }

    #[test]
    fn proposed_oracle_values_for_builtin_scenarios() {
        let scenarios = builtin_scenarios();
        let config = ExperimentConfig::default();
        let expect_cycle = [50.0, 60.0, 61.25, 65.0, 90.0, 90.0];
        let expect_daily = [
            25.2,
            21.0,
            20.571428571428573,
            19.384615384615383,
            14.0,
            14.0,
        ];
        for (s, (cycle, daily)) in scenarios.iter().zip(expect_cycle.iter().zip(expect_daily)) {
            assert_eq!(oracle_proposed_cycle(s, config.amr_speed), *cycle);
            let got = oracle_proposed_throughput(s, &config);
            assert!((got - daily).abs() < 1e-9, "scenario {}: {got}", s.id);
        }
    }

    #[test]
    fn existing_cycle_estimate_for_scenario_1() {
        // closed form: E[max(U(30,70), 45 + U(10,20))] = 60 + 3250/2400
        let scenarios = builtin_scenarios();
        let got = oracle_existing_cycle_mc(&scenarios[0], 1.0, 1_000_000, 5).unwrap();
        assert!((got - 61.354166666666664).abs() < 0.05, "got {got}");
    }

    #[test]
    fn existing_cycle_is_travel_bound_at_distance_45() {
        let scenarios = builtin_scenarios();
        let got = oracle_existing_cycle_mc(&scenarios[4], 1.0, 1_000_000, 5).unwrap();
        assert!((got - 150.0).abs() < 0.05, "got {got}");
    }

    #[test]
    fn existing_cycle_degenerate_travel_dominates() {
        // AT = 0 and 3d beyond the print-time upper bound: the cycle is 3d.
        let scenario = Scenario {
            id: 1,
            distance: 30.0,
            print_time_1: UniformDist::new(20.0, 40.0).unwrap(),
            print_time_2: UniformDist::new(30.0, 70.0).unwrap(),
            assembly_time: UniformDist::new(0.0, 0.0).unwrap(),
        };
        let got = oracle_existing_cycle_mc(&scenario, 1.0, 10_000, 5).unwrap();
        assert!((got - 90.0).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn existing_cycle_rejects_too_few_samples() {
        let scenarios = builtin_scenarios();
        assert!(oracle_existing_cycle_mc(&scenarios[0], 1.0, 100, 5).is_err());
    }

    #[test]
    fn summarize_small_cases() {
        let stats = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(stats.mean, 2.0);
        assert_eq!(stats.std_dev, 1.0);
        assert!((stats.ci_half_width - 4.30265 / 3f64.sqrt()).abs() < 1e-9);

        let flat = summarize(&[5.0, 5.0, 5.0, 5.0]).unwrap();
        assert_eq!(flat.mean, 5.0);
        assert_eq!(flat.std_dev, 0.0);
        assert_eq!(flat.ci_half_width, 0.0);

        assert!(summarize(&[1.0]).is_err());
    }

    #[test]
    fn summarize_is_permutation_invariant() {
        // equal up to summation-order round-off
        let a = summarize(&[3.0, 1.0, 4.0, 1.0, 5.0]).unwrap();
        let b = summarize(&[5.0, 1.0, 1.0, 4.0, 3.0]).unwrap();
        assert_eq!(a.n, b.n);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.std_dev - b.std_dev).abs() < 1e-12);
        assert!((a.ci_half_width - b.ci_half_width).abs() < 1e-12);
    }

    #[test]
    fn compare_elementwise_shift() {
        let existing = [10.0, 12.0, 11.0];
        let proposed = [11.0, 13.0, 12.0];
        let cmp = compare_approaches(1, &existing, &proposed).unwrap();
        assert_eq!(cmp.mean_difference, 1.0);
        assert_eq!(cmp.difference_ci_half_width, 0.0);

        let same = compare_approaches(1, &existing, &existing).unwrap();
        assert_eq!(same.mean_difference, 0.0);

        assert!(compare_approaches(1, &existing, &proposed[..2]).is_err());
    }

    #[test]
    fn t_table_spot_values_and_shape() {
        assert_eq!(t_critical_95(1), 12.70620);
        assert_eq!(t_critical_95(2), 4.30265);
        assert_eq!(t_critical_95(19), 2.09302);
        assert_eq!(t_critical_95(40), 2.02108);
        assert_eq!(t_critical_95(200), 2.02108);
        for df in 1..40 {
            assert!(t_critical_95(df) > t_critical_95(df + 1));
        }
        assert!(t_critical_95(40) > 1.96);
    }
}
