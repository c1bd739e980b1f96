//! Domain model and event logic for the two manufacturing-cell
//! configurations.
//!
//! * `Existing` — the benchmark: two stationary printers in the machining
//!   area, each with a dedicated shuttle AMR. The AMR whose part drop
//!   completes an assembly pair stays as courier, waits out the assembly,
//!   and delivers the product via the I/O station (a 3d round trip plus
//!   the assembly wait); other drops return directly (2d).
//! * `Proposed` — a printer rides on each AMR. Printing overlaps the
//!   mandatory assembly-to-I/O supply round trip, and finished products
//!   ride along opportunistically (one per trip), so the per-part cycle is
//!   `max(print time, 2d/speed)`.
//!
//! All buffers are unbounded and material supply is unlimited, so machines
//! never block. Ties between simultaneous events resolve by insertion
//! order, which the handlers arrange as ascending AMR id.

mod engine;
mod replication;

pub use engine::{Engine, EventPayload};
pub use replication::{
    count_products, run_replication, run_replication_with_trace, AuditReport, ReplicationResult,
};

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::scenario::Scenario;
use crate::simkernel::{SimTime, UniformDist};

/// Which material-flow configuration drives the AMRs and machines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproachKind {
    Existing,
    Proposed,
}

impl ApproachKind {
    pub fn name(self) -> &'static str {
        match self {
            ApproachKind::Existing => "existing",
            ApproachKind::Proposed => "proposed",
        }
    }
}

impl fmt::Display for ApproachKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The three sites on the shop floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Machining,
    Assembly,
    IoStation,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Machining => f.write_str("machining"),
            Site::Assembly => f.write_str("assembly"),
            Site::IoStation => f.write_str("io-station"),
        }
    }
}

/// Site geometry: all three pairwise distances are equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub distance: f64,
    pub amr_speed: f64,
}

impl Layout {
    /// Travel time between sites: zero for the same site, `d / speed`
    /// otherwise.
    pub fn travel_time(&self, from: Site, to: Site) -> f64 {
        if from == to {
            0.0
        } else {
            self.distance / self.amr_speed
        }
    }
}

/// The two part varieties; machine i is dedicated to part i.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartType {
    Part1,
    Part2,
}

impl PartType {
    pub fn index(self) -> usize {
        match self {
            PartType::Part1 => 0,
            PartType::Part2 => 1,
        }
    }

    pub fn from_index(index: usize) -> PartType {
        match index {
            0 => PartType::Part1,
            1 => PartType::Part2,
            other => panic!("no part type for index {other}"),
        }
    }
}

/// A finished printed part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Part {
    pub id: u64,
    pub part_type: PartType,
    pub printed_at: SimTime,
}

/// A product assembled from one part of each type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Product {
    pub id: u64,
    pub part1_id: u64,
    pub part2_id: u64,
    pub assembled_at: SimTime,
    pub delivered_at: Option<SimTime>,
}

/// Where a printer lives: bolted to the machining area or riding an AMR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mounting {
    Stationary,
    OnAmr(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Machine {
    pub produces: PartType,
    pub print_time: UniformDist,
    pub mounting: Mounting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmrLocation {
    AtSite(Site),
    InTransit {
        from: Site,
        to: Site,
        arrives: SimTime,
    },
}

/// A mobile robot. Cargo capacity is one part plus one product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amr {
    pub location: AmrLocation,
    pub cargo_part: Option<Part>,
    pub cargo_product: Option<Product>,
    pub mounted_machine: Option<usize>,
    /// Benchmark: parked at machining until the paired machine delivers.
    pub awaiting_part: bool,
    /// Mobile: parked at assembly until the onboard print finishes.
    pub awaiting_print: bool,
    /// Mobile: completion time of the in-flight print, if one is running.
    pub print_finishes_at: Option<SimTime>,
}

impl Amr {
    fn idle_at(site: Site, mounted_machine: Option<usize>) -> Amr {
        Amr {
            location: AmrLocation::AtSite(site),
            cargo_part: None,
            cargo_product: None,
            mounted_machine,
            awaiting_part: false,
            awaiting_print: false,
            print_finishes_at: None,
        }
    }
}

/// Single-server assembly station with unbounded FIFO buffers. An
/// assembly starts only when both input buffers are non-empty and removes
/// exactly one part of each type.
#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyStation {
    pub input: [VecDeque<Part>; 2],
    pub output: VecDeque<Product>,
    pub in_progress: Option<(Part, Part)>,
    pub busy_until: Option<SimTime>,
    pub assembly_time: UniformDist,
    /// Benchmark couriers parked here, oldest first, waiting for the next
    /// finished product.
    pub waiting_couriers: VecDeque<usize>,
}

impl AssemblyStation {
    fn new(assembly_time: UniformDist) -> Self {
        AssemblyStation {
            input: [VecDeque::new(), VecDeque::new()],
            output: VecDeque::new(),
            in_progress: None,
            busy_until: None,
            assembly_time,
            waiting_couriers: VecDeque::new(),
        }
    }

    pub fn pair_available(&self) -> bool {
        !self.input[0].is_empty() && !self.input[1].is_empty()
    }
}

/// Running totals used by the conservation audit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AuditCounters {
    pub parts_produced: u64,
    /// Incremented by two each time an assembly starts.
    pub parts_consumed: u64,
    pub products_assembled: u64,
    pub products_delivered: u64,
}

/// Full system state for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub layout: Layout,
    pub approach: ApproachKind,
    pub machines: [Machine; 2],
    pub amrs: [Amr; 2],
    pub assembly: AssemblyStation,
    /// Per-machine finished-part buffers in the machining area (benchmark
    /// configuration only; stays empty in the mobile configuration).
    pub machining_buffers: [VecDeque<Part>; 2],
    pub delivered: Vec<Product>,
    pub counters: AuditCounters,
    next_part_id: u64,
    next_product_id: u64,
}

/// Builds the initial state for a scenario. In the benchmark configuration
/// both machines sit in the machining area with their shuttle AMRs parked
/// beside them; in the mobile configuration machine i rides AMR i and both
/// AMRs start at the assembly area. First prints start at t = 0 either
/// way (the replication engine schedules them).
pub fn build_system(scenario: &Scenario, approach: ApproachKind, amr_speed: f64) -> PlantState {
    let layout = Layout {
        distance: scenario.distance,
        amr_speed,
    };
    let print_times = [scenario.print_time_1, scenario.print_time_2];
    let (mountings, amr_site) = match approach {
        ApproachKind::Existing => (
            [Mounting::Stationary, Mounting::Stationary],
            Site::Machining,
        ),
        ApproachKind::Proposed => ([Mounting::OnAmr(0), Mounting::OnAmr(1)], Site::Assembly),
    };
    let machines = [
        Machine {
            produces: PartType::Part1,
            print_time: print_times[0],
            mounting: mountings[0],
        },
        Machine {
            produces: PartType::Part2,
            print_time: print_times[1],
            mounting: mountings[1],
        },
    ];
    let mounted = |i| match approach {
        ApproachKind::Existing => None,
        ApproachKind::Proposed => Some(i),
    };
    PlantState {
        layout,
        approach,
        machines,
        amrs: [
            Amr::idle_at(amr_site, mounted(0)),
            Amr::idle_at(amr_site, mounted(1)),
        ],
        assembly: AssemblyStation::new(scenario.assembly_time),
        machining_buffers: [VecDeque::new(), VecDeque::new()],
        delivered: Vec::new(),
        counters: AuditCounters::default(),
        next_part_id: 0,
        next_product_id: 0,
    }
}

impl PlantState {
    fn new_part(&mut self, part_type: PartType, printed_at: SimTime) -> Part {
        let id = self.next_part_id;
        self.next_part_id += 1;
        self.counters.parts_produced += 1;
        Part {
            id,
            part_type,
            printed_at,
        }
    }

    fn new_product(&mut self, first: Part, second: Part, assembled_at: SimTime) -> Product {
        debug_assert_eq!(first.part_type, PartType::Part1);
        debug_assert_eq!(second.part_type, PartType::Part2);
        let id = self.next_product_id;
        self.next_product_id += 1;
        self.counters.products_assembled += 1;
        Product {
            id,
            part1_id: first.id,
            part2_id: second.id,
            assembled_at,
            delivered_at: None,
        }
    }

    fn parts_in_buffers(&self) -> u64 {
        (self.machining_buffers[0].len()
            + self.machining_buffers[1].len()
            + self.assembly.input[0].len()
            + self.assembly.input[1].len()) as u64
    }

    fn parts_in_cargo(&self) -> u64 {
        self.amrs.iter().filter(|a| a.cargo_part.is_some()).count() as u64
    }

    fn products_in_cargo(&self) -> u64 {
        self.amrs
            .iter()
            .filter(|a| a.cargo_product.is_some())
            .count() as u64
    }

    /// Every part ever produced is in a buffer, in AMR cargo, inside the
    /// assembly server, or bound into a product.
    pub fn part_conservation_holds(&self) -> bool {
        let in_server = if self.assembly.in_progress.is_some() {
            2
        } else {
            0
        };
        let consumed_consistent =
            self.counters.parts_consumed == 2 * self.counters.products_assembled + in_server;
        let balance =
            self.parts_in_buffers() + self.parts_in_cargo() + self.counters.parts_consumed;
        consumed_consistent && self.counters.parts_produced == balance
    }

    /// Every product ever assembled is in the output buffer, in AMR cargo,
    /// or delivered.
    pub fn product_conservation_holds(&self) -> bool {
        let accounted = self.assembly.output.len() as u64
            + self.products_in_cargo()
            + self.delivered.len() as u64;
        self.counters.products_assembled == accounted
            && self.counters.products_delivered == self.delivered.len() as u64
    }

    /// All products currently in existence, wherever they live.
    pub fn all_products(&self) -> impl Iterator<Item = &Product> {
        self.delivered
            .iter()
            .chain(self.assembly.output.iter())
            .chain(self.amrs.iter().filter_map(|a| a.cargo_product.as_ref()))
    }

    /// Each product holds one part of each type and no part id is bound
    /// into two products.
    pub fn products_well_formed(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for product in self.all_products() {
            if product.part1_id == product.part2_id {
                return false;
            }
            if !seen.insert(product.part1_id) || !seen.insert(product.part2_id) {
                return false;
            }
            if let Some(delivered) = product.delivered_at {
                if delivered < product.assembled_at {
                    return false;
                }
            }
        }
        true
    }
}
