//! Charging arcs: station sequences, their optimal schedules and charge
//! maps, Pareto enumeration per task pair, and the per-depot multigraphs.

mod graph;
mod maps;
mod pareto;
mod schedule;

pub use graph::{build_network, DepotGraph, GraphArc, Network, NetworkStats};
pub use maps::{general_table, linear_params, ChargeMaps, LinearParams, PiecewiseMap};
pub use pareto::{arc_dominates, enumerate_nondominated, state_dominates, SequenceLimits};
pub use schedule::{
    arrival_state, lost_time, min_entry_level, optimal_schedule, Schedule, StationSequence, Stop,
};

use crate::model::Element;

/// A station sequence together with its charge maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeArc {
    pub seq: StationSequence,
    pub maps: ChargeMaps,
}

impl ChargeArc {
    #[inline]
    pub fn tail(&self) -> Element {
        self.seq.tail
    }

    #[inline]
    pub fn head(&self) -> Element {
        self.seq.head
    }

    #[inline]
    pub fn cost(&self) -> f64 {
        self.seq.cost
    }

    #[inline]
    pub fn is_charging(&self) -> bool {
        !self.seq.stations.is_empty()
    }

    #[inline]
    pub fn fc(&self, level: f64) -> f64 {
        self.maps.fc(level)
    }

    #[inline]
    pub fn bc(&self, level: f64) -> f64 {
        self.maps.bc(level)
    }
}
