//! Station sequences and their optimal charging schedules.

use crate::error::ArcError;
use crate::model::{pos, Battery, Element, Instance, FEAS_EPS};
use serde::{Deserialize, Serialize};

/// An ordered list of stations visited between a tail and a head, with the
/// leg data copied out of the instance so that schedules can be evaluated
/// without it.
///
/// Legs are indexed `0..=k`: leg `j` goes from `s_j` to `s_{j+1}` where
/// `s_0` is the tail and `s_{k+1}` the head.
#[derive(Debug, Clone, PartialEq)]
pub struct StationSequence {
    pub tail: Element,
    pub head: Element,
    pub stations: Vec<usize>,
    /// End time of the tail.
    pub depart: f64,
    /// Start time of the head.
    pub deadline: f64,
    pub travel: Vec<f64>,
    pub energy: Vec<f64>,
    /// Energy consumed by the head itself.
    pub head_energy: f64,
    /// Travel cost of all legs plus the head's own cost.
    pub cost: f64,
}

impl StationSequence {
    /// Build and check a sequence against the time window and the per-leg
    /// energy limits.
    pub fn new(
        inst: &Instance,
        capacity: f64,
        tail: Element,
        head: Element,
        stations: &[usize],
    ) -> Result<Self, ArcError> {
        let seq = Self::unchecked(inst, tail, head, stations);
        seq.check(capacity)?;
        Ok(seq)
    }

    pub fn unchecked(inst: &Instance, tail: Element, head: Element, stations: &[usize]) -> Self {
        let k = stations.len();
        let mut travel = Vec::with_capacity(k + 1);
        let mut energy = Vec::with_capacity(k + 1);
        let mut cost = inst.cost(head);
        let mut prev = tail;
        for next in stations
            .iter()
            .map(|&s| Element::Station(s))
            .chain(std::iter::once(head))
        {
            travel.push(inst.time(prev, next));
            energy.push(inst.energy_between(prev, next));
            cost += inst.travel(prev, next);
            prev = next;
        }
        StationSequence {
            tail,
            head,
            stations: stations.to_vec(),
            depart: inst.t_end(tail),
            deadline: inst.t_begin(head),
            travel,
            energy,
            head_energy: inst.energy(head),
            cost,
        }
    }

    /// Time window and per-leg energy checks.
    pub fn check(&self, capacity: f64) -> Result<(), ArcError> {
        let excess = self.window_excess();
        if excess > FEAS_EPS {
            return Err(ArcError::TimeWindow { excess });
        }
        let k = self.k();
        for (j, &e) in self.energy.iter().enumerate() {
            let need = if j == k { e + self.head_energy } else { e };
            if need > capacity + FEAS_EPS {
                return Err(ArcError::LegEnergy {
                    leg: j,
                    energy: need,
                    capacity,
                });
            }
        }
        Ok(())
    }

    /// Travel time beyond the window between tail and head (negative when
    /// there is slack).
    pub fn window_excess(&self) -> f64 {
        self.depart + self.travel.iter().sum::<f64>() - self.deadline
    }

    /// Number of stations.
    #[inline]
    pub fn k(&self) -> usize {
        self.stations.len()
    }

    /// Earliest possible arrival at station `i` (1-based): no charging before.
    pub fn earliest_arrival(&self, i: usize) -> f64 {
        self.depart + self.travel[..i].iter().sum::<f64>()
    }

    /// Energy needed to reach station `i` (1-based) from the tail.
    pub fn energy_to(&self, i: usize) -> f64 {
        self.energy[..i].iter().sum()
    }

    /// Fixed departure from the last station.
    pub fn last_departure(&self) -> f64 {
        self.deadline - self.travel[self.k()]
    }
}

/// One station visit of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub station: usize,
    pub arrival: f64,
    pub departure: f64,
    pub level_in: f64,
    pub level_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub stops: Vec<Stop>,
    /// Level at the end of the head, `-inf` when infeasible.
    pub level_out: f64,
}

/// Arrival state `(level, time)` at station `i = energy.len()` of a prefix
/// when every earlier station charges just enough for its next leg.
///
/// `travel` and `energy` hold the legs up to that station.
pub fn arrival_state(
    battery: &Battery,
    depart: f64,
    travel: &[f64],
    energy: &[f64],
    level_in: f64,
) -> (f64, f64) {
    let mut t = depart + travel[0];
    let mut x = pos(level_in - energy[0]);
    for j in 1..energy.len() {
        if x == f64::NEG_INFINITY {
            break;
        }
        let e = energy[j];
        if x < e {
            let d = battery.charge_time(x, e);
            if !d.is_finite() {
                x = f64::NEG_INFINITY;
                break;
            }
            t += d;
            x = e;
        }
        x = pos(x - e);
        t += travel[j];
    }
    (x, t)
}

/// The schedule that charges just enough at every station but the last and
/// charges as long as possible at the last one. Optimal for any entry level.
pub fn optimal_schedule(battery: &Battery, seq: &StationSequence, level_in: f64) -> Schedule {
    let k = seq.k();
    let infeasible = |stops| Schedule {
        stops,
        level_out: f64::NEG_INFINITY,
    };
    if level_in == f64::NEG_INFINITY || level_in.is_nan() {
        return infeasible(Vec::new());
    }
    if k == 0 {
        let arrive = pos(level_in - seq.energy[0]);
        return Schedule {
            stops: Vec::new(),
            level_out: pos(arrive - seq.head_energy),
        };
    }
    let mut stops = Vec::with_capacity(k);
    let mut t = seq.depart + seq.travel[0];
    let mut x = pos(level_in - seq.energy[0]);
    for i in 1..=k {
        if x == f64::NEG_INFINITY {
            return infeasible(stops);
        }
        let (departure, level) = if i < k {
            let e = seq.energy[i];
            if x >= e {
                (t, x)
            } else {
                let d = battery.charge_time(x, e);
                if !d.is_finite() {
                    return infeasible(stops);
                }
                (t + d, e)
            }
        } else {
            let te = seq.last_departure();
            if t > te + FEAS_EPS {
                return infeasible(stops);
            }
            (te.max(t), battery.flow(x, (te - t).max(0.0)))
        };
        stops.push(Stop {
            station: seq.stations[i - 1],
            arrival: t,
            departure,
            level_in: x,
            level_out: level,
        });
        x = pos(level - seq.energy[i]);
        t = departure + seq.travel[i];
    }
    Schedule {
        stops,
        level_out: pos(x - seq.head_energy),
    }
}

/// Minimal level at the end of the tail that reaches the end of the head
/// with at least `level_out`, built by walking the latest feasible schedule
/// backwards from the head. `+inf` when no entry level suffices.
pub fn min_entry_level(battery: &Battery, seq: &StationSequence, level_out: f64) -> f64 {
    let m = battery.capacity();
    let k = seq.k();
    if !(level_out <= m) {
        return f64::INFINITY;
    }
    let level_out = level_out.max(0.0);
    if k == 0 {
        let lin = level_out + seq.energy[0] + seq.head_energy;
        return if lin > m + FEAS_EPS {
            f64::INFINITY
        } else {
            lin.min(m)
        };
    }
    let mut need = level_out + seq.energy[k] + seq.head_energy;
    if need > m + FEAS_EPS {
        return f64::INFINITY;
    }
    need = need.min(m);
    let mut leave = seq.last_departure();
    for i in (1..=k).rev() {
        let earliest = seq.earliest_arrival(i);
        let latest_empty = leave - battery.charge_time(0.0, need);
        if latest_empty > earliest {
            leave = latest_empty - seq.travel[i - 1];
            need = seq.energy[i - 1];
            continue;
        }
        // No charging before station i: arrive as early as possible with
        // just enough charge for the remaining dwell to reach `need`.
        let dwell = leave - earliest;
        if dwell < -FEAS_EPS {
            return f64::INFINITY;
        }
        let arrive = if need > battery.saturation_level() {
            need
        } else {
            let start = battery.time_from_empty(need) - dwell.max(0.0);
            battery.level_after(start.max(0.0))
        };
        let lin = arrive + seq.energy_to(i);
        return if lin > m + FEAS_EPS {
            f64::INFINITY
        } else {
            lin.min(m)
        };
    }
    // arrive empty at the first station
    seq.energy[0]
}

/// Idle time at the last station after the battery is full, when the
/// sequence starts with just enough charge to reach its first station.
pub fn lost_time(battery: &Battery, seq: &StationSequence) -> Result<f64, ArcError> {
    if seq.k() == 0 {
        return Err(ArcError::NoStation);
    }
    let sched = optimal_schedule(battery, seq, seq.energy[0]);
    if sched.level_out == f64::NEG_INFINITY || sched.stops.len() < seq.k() {
        return Ok(0.0);
    }
    let last = sched.stops[seq.k() - 1];
    let full = battery.saturation_level().max(last.level_in);
    let to_full = battery.charge_time(last.level_in, full);
    Ok((last.departure - last.arrival - to_full).max(0.0))
}
