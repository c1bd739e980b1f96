//! Experiment fan-out and result emission.
//!
//! Replications run in parallel, but rows are always ordered scenario
//! ascending, then approach (existing before proposed), then replication
//! ascending, so output files are a pure function of the inputs.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{self, ComparisonResult, SummaryStats};
use crate::plant::{self, ApproachKind, ReplicationResult};
use crate::scenario::{ConfigError, ExperimentConfig, Scenario};

/// One output row: a single replication of one (scenario, approach) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRow {
    pub scenario: u32,
    pub approach: ApproachKind,
    pub replication: u32,
    pub seed: u64,
    pub products: u64,
    pub throughput_per_hour: f64,
}

/// Aggregate over the replications of one (scenario, approach) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproachSummary {
    pub scenario: u32,
    pub approach: ApproachKind,
    pub n: usize,
    pub mean_products: f64,
    /// Mean/std/CI of throughput per hour; absent with fewer than two
    /// replications.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub throughput: Option<SummaryStats>,
}

#[derive(Debug)]
pub struct RunMatrixOutput {
    pub rows: Vec<ReplicationRow>,
    /// One result per row, same order.
    pub results: Vec<ReplicationResult>,
    /// Concatenated event traces, when requested.
    pub trace: Option<String>,
}

/// Runs every (scenario, approach, replication) combination. Scenarios run
/// in the order given; approaches are normalized to existing-then-proposed.
pub fn run_matrix(
    scenarios: &[Scenario],
    config: &ExperimentConfig,
    with_trace: bool,
) -> Result<RunMatrixOutput, ConfigError> {
    config.validate()?;
    for scenario in scenarios {
        scenario.validate()?;
    }
    let mut approaches = config.approaches.clone();
    approaches.sort();
    approaches.dedup();

    let mut cells: Vec<(Scenario, ApproachKind, u32)> = Vec::new();
    for scenario in scenarios {
        for &approach in &approaches {
            for rep in 0..config.replications {
                cells.push((*scenario, approach, rep));
            }
        }
    }

    let outcomes: Vec<(ReplicationResult, Option<String>)> = cells
        .par_iter()
        .map(|&(scenario, approach, rep)| {
            if with_trace {
                let mut header = format!(
                    "# scenario={} approach={} replication={}\n",
                    scenario.id, approach, rep
                );
                let result = plant::run_replication_with_trace(
                    &scenario,
                    approach,
                    config,
                    rep,
                    &mut header,
                )
                .expect("validated before fan-out");
                (result, Some(header))
            } else {
                let result = plant::run_replication(&scenario, approach, config, rep)
                    .expect("validated before fan-out");
                (result, None)
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    let mut results = Vec::with_capacity(cells.len());
    let mut trace = with_trace.then(String::new);
    for ((scenario, approach, rep), (result, rep_trace)) in cells.into_iter().zip(outcomes) {
        rows.push(ReplicationRow {
            scenario: scenario.id,
            approach,
            replication: rep,
            seed: config.master_seed,
            products: result.products_in_window,
            throughput_per_hour: result.throughput_per_hour,
        });
        results.push(result);
        if let (Some(all), Some(one)) = (trace.as_mut(), rep_trace) {
            all.push_str(&one);
        }
    }
    Ok(RunMatrixOutput {
        rows,
        results,
        trace,
    })
}

/// One summary entry per (scenario, approach) cell, in row order.
pub fn summarize_rows(rows: &[ReplicationRow]) -> Vec<ApproachSummary> {
    let mut out: Vec<ApproachSummary> = Vec::new();
    for row in rows {
        if out
            .iter()
            .any(|s| s.scenario == row.scenario && s.approach == row.approach)
        {
            continue;
        }
        let cell: Vec<&ReplicationRow> = rows
            .iter()
            .filter(|r| r.scenario == row.scenario && r.approach == row.approach)
            .collect();
        let throughputs: Vec<f64> = cell.iter().map(|r| r.throughput_per_hour).collect();
        let mean_products = cell.iter().map(|r| r.products as f64).sum::<f64>() / cell.len() as f64;
        out.push(ApproachSummary {
            scenario: row.scenario,
            approach: row.approach,
            n: cell.len(),
            mean_products,
            throughput: analysis::summarize(&throughputs).ok(),
        });
    }
    out
}

/// Paired comparisons for every scenario that ran both approaches with at
/// least two replications. Meaningful under common random numbers.
pub fn compare_rows(rows: &[ReplicationRow]) -> Vec<ComparisonResult> {
    let mut scenario_ids: Vec<u32> = rows.iter().map(|r| r.scenario).collect();
    scenario_ids.dedup();
    let mut out = Vec::new();
    for id in scenario_ids {
        let pick = |approach: ApproachKind| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.scenario == id && r.approach == approach)
                .map(|r| r.throughput_per_hour)
                .collect()
        };
        let existing = pick(ApproachKind::Existing);
        let proposed = pick(ApproachKind::Proposed);
        if existing.len() == proposed.len() && existing.len() >= 2 {
            if let Ok(cmp) = analysis::compare_approaches(id, &existing, &proposed) {
                out.push(cmp);
            }
        }
    }
    out
}

pub const CSV_HEADER: &str = "scenario,approach,replication,seed,products,throughput_per_hour";

/// Renders rows as CSV with a fixed header and 6-decimal throughput.
pub fn render_csv(rows: &[ReplicationRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.6}",
            row.scenario,
            row.approach,
            row.replication,
            row.seed,
            row.products,
            row.throughput_per_hour
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    rows: &'a [ReplicationRow],
    summary: JsonSummary<'a>,
}

#[derive(Serialize)]
struct JsonSummary<'a> {
    per_cell: &'a [ApproachSummary],
    comparisons: &'a [ComparisonResult],
}

/// Renders rows plus their summary as a JSON document.
pub fn render_json(
    rows: &[ReplicationRow],
    summaries: &[ApproachSummary],
    comparisons: &[ComparisonResult],
) -> String {
    let doc = JsonDocument {
        rows,
        summary: JsonSummary {
            per_cell: summaries,
            comparisons,
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("rows serialize");
    text.push('\n');
    text
}

/// Aligned per-cell summary table for the console.
pub fn render_summary_table(summaries: &[ApproachSummary]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<9} {:<9} {:>3} {:>14} {:>10} {:>9} {:>9}",
        "scenario", "approach", "n", "mean_products", "mean_tph", "std_tph", "ci95_tph"
    )
    .unwrap();
    for s in summaries {
        let (mean, std, ci) = match &s.throughput {
            Some(t) => (
                format!("{:.4}", t.mean),
                format!("{:.4}", t.std_dev),
                format!("{:.4}", t.ci_half_width),
            ),
            None => ("-".to_string(), "-".to_string(), "-".to_string()),
        };
        writeln!(
            out,
            "{:<9} {:<9} {:>3} {:>14.4} {:>10} {:>9} {:>9}",
            s.scenario, s.approach, s.n, s.mean_products, mean, std, ci
        )
        .unwrap();
    }
    out
}

/// Paired-difference table (proposed minus existing), one line per scenario.
pub fn render_comparison_table(comparisons: &[ComparisonResult]) -> String {
    if comparisons.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    writeln!(
        out,
        "{:<9} {:>13} {:>13} {:>11} {:>9}",
        "scenario", "mean_existing", "mean_proposed", "diff(p-e)", "ci95"
    )
    .unwrap();
    for c in comparisons {
        writeln!(
            out,
            "{:<9} {:>13.4} {:>13.4} {:>11.4} {:>9.4}",
            c.scenario,
            c.mean_existing,
            c.mean_proposed,
            c.mean_difference,
            c.difference_ci_half_width
        )
        .unwrap();
    }
    out
}

/// Analytic estimates per scenario: expected mobile cycle and daily
/// throughput, plus the Monte-Carlo benchmark cycle.
pub fn render_oracle_table(
    scenarios: &[Scenario],
    config: &ExperimentConfig,
    samples: u64,
) -> Result<String, analysis::AnalysisError> {
    let mut out = String::new();
    writeln!(
        out,
        "{:<9} {:>15} {:>15} {:>18}",
        "scenario", "proposed_cycle", "proposed_daily", "existing_cycle_mc"
    )
    .unwrap();
    for scenario in scenarios {
        let cycle = analysis::oracle_proposed_cycle(scenario, config.amr_speed);
        let daily = analysis::oracle_proposed_throughput(scenario, config);
        let existing = analysis::oracle_existing_cycle_mc(
            scenario,
            config.amr_speed,
            samples,
            config.master_seed,
        )?;
        writeln!(
            out,
            "{:<9} {:>15.3} {:>15.3} {:>18.3}",
            scenario.id, cycle, daily, existing
        )
        .unwrap();
    }
    Ok(out)
}
