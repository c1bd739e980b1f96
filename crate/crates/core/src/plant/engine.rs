//! Event handlers driving one replication of either configuration.

use std::fmt;

use super::{AmrLocation, ApproachKind, PlantState, Site};
use crate::plant::build_system;
use crate::scenario::{ExperimentConfig, Scenario};
use crate::simkernel::{EventCalendar, EventRecord, RngStreams, SimTime};

/// Everything that can happen in the plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventPayload {
    /// A stationary machine finished a print (benchmark configuration).
    MachineFinishedPart {
        machine: usize,
    },
    /// An onboard printer finished a print (mobile configuration).
    OnboardPrintFinished {
        amr: usize,
    },
    AmrReachedAssembly {
        amr: usize,
    },
    AmrReachedIoStation {
        amr: usize,
    },
    AmrReachedMachining {
        amr: usize,
    },
    /// Post-drop departure step (mobile configuration); runs after any
    /// zero-delay assembly completion at the same instant, so a product
    /// finished "now" still rides along.
    AmrLeavesAssembly {
        amr: usize,
    },
    AssemblyFinished,
}

impl fmt::Display for EventPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventPayload::MachineFinishedPart { machine } => {
                write!(f, "machine {} finished a part", machine + 1)
            }
            EventPayload::OnboardPrintFinished { amr } => {
                write!(f, "amr {} finished printing", amr + 1)
            }
            EventPayload::AmrReachedAssembly { amr } => {
                write!(f, "amr {} arrived at assembly", amr + 1)
            }
            EventPayload::AmrReachedIoStation { amr } => {
                write!(f, "amr {} arrived at io-station", amr + 1)
            }
            EventPayload::AmrReachedMachining { amr } => {
                write!(f, "amr {} arrived at machining", amr + 1)
            }
            EventPayload::AmrLeavesAssembly { amr } => {
                write!(f, "amr {} departs assembly", amr + 1)
            }
            EventPayload::AssemblyFinished => f.write_str("assembly completed"),
        }
    }
}

/// One replication's state, calendar, and random streams, wired together.
pub struct Engine {
    pub state: PlantState,
    pub calendar: EventCalendar<EventPayload>,
    streams: RngStreams,
}

impl Engine {
    /// Builds the system and schedules its first events: both first prints
    /// start at t = 0, and in the mobile configuration both AMRs also
    /// depart immediately on the supply round trip.
    pub fn new(
        scenario: &Scenario,
        approach: ApproachKind,
        config: &ExperimentConfig,
        replication: u32,
    ) -> Engine {
        let streams = if config.crn {
            RngStreams::new(config.master_seed, replication as u64)
        } else {
            RngStreams::with_label(config.master_seed, replication as u64, approach.name())
        };
        let mut engine = Engine {
            state: build_system(scenario, approach, config.amr_speed),
            calendar: EventCalendar::new(),
            streams,
        };
        match approach {
            ApproachKind::Existing => {
                for m in 0..2 {
                    let print_time = engine.sample_print_time(m);
                    engine.calendar.schedule(
                        SimTime::ZERO + print_time,
                        EventPayload::MachineFinishedPart { machine: m },
                    );
                }
                for amr in engine.state.amrs.iter_mut() {
                    amr.awaiting_part = true;
                }
            }
            ApproachKind::Proposed => {
                for amr in 0..2 {
                    engine.start_onboard_print(amr, SimTime::ZERO);
                }
                for amr in 0..2 {
                    engine
                        .calendar
                        .schedule(SimTime::ZERO, EventPayload::AmrLeavesAssembly { amr });
                }
            }
        }
        engine
    }

    fn sample_print_time(&mut self, machine: usize) -> f64 {
        self.state.machines[machine]
            .print_time
            .sample(self.streams.print_stream(machine))
    }

    /// Applies one popped event to the state.
    pub fn dispatch(&mut self, event: &EventRecord<EventPayload>) {
        let t = event.time;
        match event.payload {
            EventPayload::MachineFinishedPart { machine } => self.machine_finished(machine, t),
            EventPayload::OnboardPrintFinished { amr } => self.onboard_print_finished(amr, t),
            EventPayload::AmrReachedAssembly { amr } => match self.state.approach {
                ApproachKind::Existing => self.shuttle_reached_assembly(amr, t),
                ApproachKind::Proposed => self.mobile_reached_assembly(amr, t),
            },
            EventPayload::AmrReachedIoStation { amr } => self.amr_reached_io(amr, t),
            EventPayload::AmrReachedMachining { amr } => self.shuttle_reached_machining(amr, t),
            EventPayload::AmrLeavesAssembly { amr } => self.mobile_leaves_assembly(amr, t),
            EventPayload::AssemblyFinished => self.assembly_finished(t),
        }
    }

    fn arrive(&mut self, amr: usize, site: Site, t: SimTime) {
        if let AmrLocation::InTransit { to, arrives, .. } = self.state.amrs[amr].location {
            debug_assert_eq!(to, site);
            debug_assert_eq!(arrives, t);
        }
        self.state.amrs[amr].location = AmrLocation::AtSite(site);
    }

    fn depart(&mut self, amr: usize, from: Site, to: Site, t: SimTime) {
        debug_assert_eq!(self.state.amrs[amr].location, AmrLocation::AtSite(from));
        let arrives = t + self.state.layout.travel_time(from, to);
        self.state.amrs[amr].location = AmrLocation::InTransit { from, to, arrives };
        let payload = match to {
            Site::Assembly => EventPayload::AmrReachedAssembly { amr },
            Site::IoStation => EventPayload::AmrReachedIoStation { amr },
            Site::Machining => EventPayload::AmrReachedMachining { amr },
        };
        self.calendar.schedule(arrives, payload);
    }

    /// Starts an assembly if the server is idle and a pair is waiting.
    fn try_start_assembly(&mut self, t: SimTime) {
        if self.state.assembly.in_progress.is_some() || !self.state.assembly.pair_available() {
            return;
        }
        let first = self.state.assembly.input[0]
            .pop_front()
            .expect("pair checked");
        let second = self.state.assembly.input[1]
            .pop_front()
            .expect("pair checked");
        self.state.counters.parts_consumed += 2;
        let duration = self
            .state
            .assembly
            .assembly_time
            .sample(self.streams.assembly_stream());
        let done = t + duration;
        self.state.assembly.in_progress = Some((first, second));
        self.state.assembly.busy_until = Some(done);
        self.calendar.schedule(done, EventPayload::AssemblyFinished);
    }

    fn assembly_finished(&mut self, t: SimTime) {
        let (first, second) = self
            .state
            .assembly
            .in_progress
            .take()
            .expect("completion event implies a running assembly");
        self.state.assembly.busy_until = None;
        let product = self.state.new_product(first, second, t);
        self.state.assembly.output.push_back(product);
        // Hand finished products to parked couriers, oldest product first
        // (benchmark only; the courier queue stays empty otherwise).
        while !self.state.assembly.waiting_couriers.is_empty()
            && !self.state.assembly.output.is_empty()
        {
            let amr = self
                .state
                .assembly
                .waiting_couriers
                .pop_front()
                .expect("checked");
            let product = self.state.assembly.output.pop_front().expect("checked");
            self.state.amrs[amr].cargo_product = Some(product);
            self.depart(amr, Site::Assembly, Site::IoStation, t);
        }
        self.try_start_assembly(t);
    }

    fn amr_reached_io(&mut self, amr: usize, t: SimTime) {
        self.arrive(amr, Site::IoStation, t);
        if let Some(mut product) = self.state.amrs[amr].cargo_product.take() {
            product.delivered_at = Some(t);
            self.state.counters.products_delivered += 1;
            self.state.delivered.push(product);
        }
        match self.state.approach {
            ApproachKind::Existing => self.depart(amr, Site::IoStation, Site::Machining, t),
            ApproachKind::Proposed => self.depart(amr, Site::IoStation, Site::Assembly, t),
        }
    }

    // --- benchmark configuration -----------------------------------------

    fn machine_finished(&mut self, machine: usize, t: SimTime) {
        // Deposit and immediately start the next print; the buffer is
        // unbounded and material supply unlimited, so no blocking.
        let part_type = self.state.machines[machine].produces;
        let part = self.state.new_part(part_type, t);
        self.state.machining_buffers[machine].push_back(part);
        let next = self.sample_print_time(machine);
        self.calendar
            .schedule(t + next, EventPayload::MachineFinishedPart { machine });
        // The paired AMR may be parked waiting for exactly this part.
        if self.state.amrs[machine].awaiting_part {
            self.shuttle_load_and_depart(machine, t);
        }
    }

    fn shuttle_load_and_depart(&mut self, amr: usize, t: SimTime) {
        let part = self.state.machining_buffers[amr]
            .pop_front()
            .expect("caller checked the paired buffer");
        self.state.amrs[amr].awaiting_part = false;
        self.state.amrs[amr].cargo_part = Some(part);
        self.depart(amr, Site::Machining, Site::Assembly, t);
    }

    fn shuttle_reached_assembly(&mut self, amr: usize, t: SimTime) {
        self.arrive(amr, Site::Assembly, t);
        let part = self.state.amrs[amr]
            .cargo_part
            .take()
            .expect("shuttle carries a part to assembly");
        let pair_before = self.state.assembly.pair_available();
        self.state.assembly.input[part.part_type.index()].push_back(part);
        let completed_pair = !pair_before && self.state.assembly.pair_available();
        self.try_start_assembly(t);
        if completed_pair {
            // Courier duty: deliver the oldest finished product, waiting
            // for one if none is ready yet.
            if let Some(product) = self.state.assembly.output.pop_front() {
                self.state.amrs[amr].cargo_product = Some(product);
                self.depart(amr, Site::Assembly, Site::IoStation, t);
            } else {
                self.state.assembly.waiting_couriers.push_back(amr);
            }
        } else {
            self.depart(amr, Site::Assembly, Site::Machining, t);
        }
    }

    fn shuttle_reached_machining(&mut self, amr: usize, t: SimTime) {
        self.arrive(amr, Site::Machining, t);
        if self.state.machining_buffers[amr].is_empty() {
            self.state.amrs[amr].awaiting_part = true;
        } else {
            self.shuttle_load_and_depart(amr, t);
        }
    }

    // --- mobile configuration --------------------------------------------

    fn start_onboard_print(&mut self, amr: usize, t: SimTime) {
        let machine = self.state.amrs[amr]
            .mounted_machine
            .expect("mobile AMRs carry a machine");
        let print_time = self.sample_print_time(machine);
        let finishes = t + print_time;
        self.state.amrs[amr].print_finishes_at = Some(finishes);
        self.calendar
            .schedule(finishes, EventPayload::OnboardPrintFinished { amr });
    }

    fn onboard_print_finished(&mut self, amr: usize, t: SimTime) {
        let machine = self.state.amrs[amr]
            .mounted_machine
            .expect("mobile AMRs carry a machine");
        let part_type = self.state.machines[machine].produces;
        debug_assert!(self.state.amrs[amr].cargo_part.is_none());
        let part = self.state.new_part(part_type, t);
        self.state.amrs[amr].cargo_part = Some(part);
        self.state.amrs[amr].print_finishes_at = None;
        if self.state.amrs[amr].awaiting_print {
            self.state.amrs[amr].awaiting_print = false;
            self.mobile_drop(amr, t);
        }
    }

    fn mobile_reached_assembly(&mut self, amr: usize, t: SimTime) {
        self.arrive(amr, Site::Assembly, t);
        if self.state.amrs[amr].cargo_part.is_some() {
            self.mobile_drop(amr, t);
        } else {
            self.state.amrs[amr].awaiting_print = true;
        }
    }

    /// Drop the finished part, kick the assembly server, start the next
    /// print, and schedule the departure step for the same instant.
    fn mobile_drop(&mut self, amr: usize, t: SimTime) {
        let part = self.state.amrs[amr]
            .cargo_part
            .take()
            .expect("caller checked");
        self.state.assembly.input[part.part_type.index()].push_back(part);
        self.try_start_assembly(t);
        self.start_onboard_print(amr, t);
        self.calendar
            .schedule(t, EventPayload::AmrLeavesAssembly { amr });
    }

    fn mobile_leaves_assembly(&mut self, amr: usize, t: SimTime) {
        if let Some(product) = self.state.assembly.output.pop_front() {
            self.state.amrs[amr].cargo_product = Some(product);
        }
        self.depart(amr, Site::Assembly, Site::IoStation, t);
    }
}
