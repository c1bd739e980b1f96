//! Driving one replication from t = 0 to the horizon and reporting what
//! it delivered.

use std::fmt::Write as _;

use super::{ApproachKind, Engine};
use crate::scenario::{ConfigError, ExperimentConfig, Scenario};
use crate::simkernel::SimTime;

/// Per-event conservation audit for one replication. `violations` should
/// always be zero; anything else is a bug in the event logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditReport {
    pub events_processed: u64,
    pub conservation_violations: u64,
    pub products_well_formed: bool,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.conservation_violations == 0 && self.products_well_formed
    }
}

/// Outcome of one simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub replication: u32,
    pub master_seed: u64,
    /// All delivery times within `[0, horizon]`, in delivery order.
    pub delivery_times: Vec<f64>,
    /// Deliveries inside the measurement window `(warmup, horizon]`.
    pub products_in_window: u64,
    /// Total assemblies completed, as a secondary statistic.
    pub products_assembled: u64,
    pub throughput_per_hour: f64,
    pub audit: AuditReport,
}

/// Counts deliveries strictly after the warm-up and up to (and including)
/// the horizon.
pub fn count_products(delivery_times: &[f64], warmup: SimTime, horizon: SimTime) -> u64 {
    delivery_times
        .iter()
        .filter(|&&t| t > warmup.value() && t <= horizon.value())
        .count() as u64
}

/// Runs one replication. Deterministic in
/// (seed, replication, scenario, approach, config).
pub fn run_replication(
    scenario: &Scenario,
    approach: ApproachKind,
    config: &ExperimentConfig,
    replication: u32,
) -> Result<ReplicationResult, ConfigError> {
    run_inner(scenario, approach, config, replication, None)
}

/// Same as [`run_replication`], additionally appending one line per popped
/// event (`t=<time> seq=<seq> <description>`) to `trace`.
pub fn run_replication_with_trace(
    scenario: &Scenario,
    approach: ApproachKind,
    config: &ExperimentConfig,
    replication: u32,
    trace: &mut String,
) -> Result<ReplicationResult, ConfigError> {
    run_inner(scenario, approach, config, replication, Some(trace))
}

fn run_inner(
    scenario: &Scenario,
    approach: ApproachKind,
    config: &ExperimentConfig,
    replication: u32,
    mut trace: Option<&mut String>,
) -> Result<ReplicationResult, ConfigError> {
    config.validate()?;
    scenario.validate()?;

    let mut engine = Engine::new(scenario, approach, config, replication);
    let mut events_processed = 0u64;
    let mut conservation_violations = 0u64;

    while let Some(next) = engine.calendar.peek_next_time() {
        if next > config.horizon {
            break;
        }
        let event = engine.calendar.pop_next().expect("peeked");
        if let Some(out) = trace.as_deref_mut() {
            writeln!(out, "t={} seq={} {}", event.time, event.seq, event.payload)
                .expect("writing to a String cannot fail");
        }
        engine.dispatch(&event);
        events_processed += 1;
        if !(engine.state.part_conservation_holds() && engine.state.product_conservation_holds()) {
            conservation_violations += 1;
        }
    }

    let delivery_times: Vec<f64> = engine
        .state
        .delivered
        .iter()
        .map(|p| {
            p.delivered_at
                .expect("delivered products are stamped")
                .value()
        })
        .collect();
    let products_in_window = count_products(&delivery_times, config.warmup, config.horizon);
    let window = config.window();
    let throughput_per_hour = if window > 0.0 {
        products_in_window as f64 / (window / 60.0)
    } else {
        0.0
    };

    Ok(ReplicationResult {
        replication,
        master_seed: config.master_seed,
        delivery_times,
        products_in_window,
        products_assembled: engine.state.counters.products_assembled,
        throughput_per_hour,
        audit: AuditReport {
            events_processed,
            conservation_violations,
            products_well_formed: engine.state.products_well_formed(),
        },
    })
}
