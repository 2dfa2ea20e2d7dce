use crate::model::{pos, Battery, FEAS_EPS};

/// Legs of a station sequence in plain form: leg `j` joins `s_j` to
/// `s_{j+1}`, `s_0` is the tail and `s_{k+1}` the head.
#[derive(Debug, Clone, PartialEq)]
pub struct Legs {
    pub depart: f64,
    pub deadline: f64,
    pub travel: Vec<f64>,
    pub energy: Vec<f64>,
    pub head_energy: f64,
}

/// Battery trace of one simulated schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// `(arrival, departure, level at arrival, level at departure)` per station.
    pub stations: Vec<(f64, f64, f64, f64)>,
    /// Level at the end of the head.
    pub level_out: f64,
    /// Some station departs before it is reached.
    pub time_infeasible: bool,
}

/// Literal battery-level recursion for a given schedule.
///
/// `dwell` holds the time spent at stations `1..k-1`; the dwell at the last
/// station is whatever remains so that the head is reached exactly at its
/// start time. A remainder below `-FEAS_EPS` marks the schedule time-infeasible and
/// the final level `-inf`.
pub fn simulate_schedule(battery: &Battery, legs: &Legs, dwell: &[f64], level_in: f64) -> Trace {
    let k = legs.travel.len() - 1;
    assert_eq!(
        dwell.len(),
        k.saturating_sub(1),
        "one dwell per station but the last"
    );
    let mut stations = Vec::with_capacity(k);
    let mut end_level = level_in;
    let mut clock = legs.depart;
    let mut time_infeasible = false;
    for i in 1..=k {
        let arrival = clock + legs.travel[i - 1];
        let departure = if i < k {
            arrival + dwell[i - 1]
        } else {
            legs.deadline - legs.travel[k]
        };
        let level_at_arrival = pos(end_level - legs.energy[i - 1]);
        let level_at_departure = if departure < arrival - FEAS_EPS {
            time_infeasible = true;
            f64::NEG_INFINITY
        } else if level_at_arrival == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            battery
                .phi(level_at_arrival, (departure - arrival).max(0.0))
                .unwrap_or(f64::NEG_INFINITY)
        };
        stations.push((arrival, departure, level_at_arrival, level_at_departure));
        end_level = level_at_departure;
        clock = departure;
    }
    let arrive_head = pos(end_level - legs.energy[k]);
    let level_out = if time_infeasible {
        f64::NEG_INFINITY
    } else {
        pos(arrive_head - legs.head_energy)
    };
    Trace {
        stations,
        level_out,
        time_infeasible,
    }
}

/// Dwell times at stations `1..k-1` that charge just enough for the next
/// leg; `None` when some leg cannot be reached.
pub fn just_enough_dwell(battery: &Battery, legs: &Legs, level_in: f64) -> Option<Vec<f64>> {
    let k = legs.travel.len() - 1;
    let mut level = level_in - legs.energy[0];
    let mut dwell = Vec::new();
    for i in 1..k {
        if level < -FEAS_EPS {
            return None;
        }
        let now = level.max(0.0);
        let e = legs.energy[i];
        let d = if now >= e {
            0.0
        } else {
            battery.tau_ch(now, e).ok()?
        };
        if !d.is_finite() {
            return None;
        }
        dwell.push(d);
        level = now.max(e) - e;
    }
    Some(dwell)
}

/// Best level over a sampled set of dwell splits: the reference for the
/// optimal-schedule tests.
pub fn best_sampled_level(
    battery: &Battery,
    legs: &Legs,
    splits: &[Vec<f64>],
    level_in: f64,
) -> f64 {
    splits
        .iter()
        .map(|d| simulate_schedule(battery, legs, d, level_in).level_out)
        .fold(f64::NEG_INFINITY, f64::max)
}
