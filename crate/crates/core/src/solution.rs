//! On-disk solution format.

use crate::charge_arcs::{optimal_schedule, ChargeArc};
use crate::model::{Battery, FEAS_EPS};
use crate::pricing::Route;
use crate::search::Solution;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub station: usize,
    pub arrival: f64,
    pub departure: f64,
    pub level_in: f64,
    pub level_out: f64,
}

/// One arc of a route. Arc `i` joins the `i`-th and `(i+1)`-th element of
/// `depot, services..., depot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub stations: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stops: Vec<StopRecord>,
    /// Battery level at the end of the head.
    pub level_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub depot: usize,
    pub services: Vec<usize>,
    pub cost: f64,
    pub arcs: Vec<ArcRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub instance: String,
    pub mode: String,
    pub status: String,
    pub cost: f64,
    pub vehicles: usize,
    pub driving_cost: f64,
    #[serde(default)]
    pub bound: Option<f64>,
    #[serde(default)]
    pub gap: Option<f64>,
    pub routes: Vec<RouteRecord>,
}

/// Relative gap between an upper and a lower bound.
pub fn gap(upper: f64, lower: f64) -> Option<f64> {
    (upper.is_finite() && lower.is_finite() && upper.abs() > 0.0)
        .then(|| ((upper - lower) / upper.abs()).max(0.0))
}

/// Schedule a route arc by arc from a full battery.
pub fn record_route(battery: &Battery, store: &[ChargeArc], route: &Route) -> RouteRecord {
    let mut level = battery.capacity();
    let mut arcs = Vec::with_capacity(route.arcs.len());
    for &id in &route.arcs {
        let a = &store[id as usize];
        let sched = optimal_schedule(battery, &a.seq, level);
        let stops = sched
            .stops
            .iter()
            .map(|s| StopRecord {
                station: s.station,
                arrival: s.arrival,
                departure: s.departure,
                level_in: s.level_in,
                level_out: s.level_out,
            })
            .collect();
        level = sched.level_out.max(0.0);
        debug_assert!(sched.level_out >= -FEAS_EPS, "route arc infeasible");
        arcs.push(ArcRecord {
            stations: a.seq.stations.clone(),
            stops,
            level_out: level,
        });
    }
    RouteRecord {
        depot: route.depot,
        services: route.services.clone(),
        cost: route.cost,
        arcs,
    }
}

impl SolutionFile {
    pub fn new(
        instance: &str,
        mode: &str,
        status: &str,
        battery: &Battery,
        store: &[ChargeArc],
        fixed_cost: f64,
        solution: Option<&Solution>,
        bound: Option<f64>,
    ) -> Self {
        let (cost, vehicles, driving_cost, routes) = match solution {
            Some(s) => (
                s.cost,
                s.vehicles(),
                s.driving_cost(fixed_cost),
                s.routes
                    .iter()
                    .map(|r| record_route(battery, store, r))
                    .collect(),
            ),
            None => (f64::INFINITY, 0, 0.0, Vec::new()),
        };
        SolutionFile {
            instance: instance.to_string(),
            mode: mode.to_string(),
            status: status.to_string(),
            cost: if cost.is_finite() { cost } else { 0.0 },
            vehicles,
            driving_cost,
            bound: bound.filter(|b| b.is_finite()),
            gap: bound.and_then(|b| gap(cost, b)),
            routes,
        }
    }
}
