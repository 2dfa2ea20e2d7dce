//! Non-dominated station sequences between a tail and a head.
//!
//! Prefixes `u, s_1, ..., s_i` are grown breadth-first by length. A prefix
//! is dropped when another prefix to the same station, no longer than it, is
//! no more expensive and arrives no later with a state at least as good for
//! every entry level. Every surviving prefix is closed into a candidate arc,
//! and the candidates are filtered by arc dominance (cost, `fc`).

use super::maps::ChargeMaps;
use super::schedule::{arrival_state, StationSequence};
use super::ChargeArc;
use crate::model::{Battery, Element, Instance, FEAS_EPS};

/// Limits of the station-sequence search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceLimits {
    pub max_stations: usize,
}

impl Default for SequenceLimits {
    fn default() -> Self {
        SequenceLimits { max_stations: 3 }
    }
}

#[derive(Debug, Clone)]
struct Prefix {
    stations: Vec<usize>,
    cost: f64,
    travel: Vec<f64>,
    energy: Vec<f64>,
    travel_sum: f64,
    energy_sum: f64,
}

impl Prefix {
    fn last(&self) -> usize {
        *self.stations.last().expect("prefix has a station")
    }

    fn state(&self, battery: &Battery, depart: f64, lin: f64) -> (f64, f64) {
        arrival_state(battery, depart, &self.travel, &self.energy, lin)
    }

    fn breakpoints(&self, battery: &Battery) -> Vec<f64> {
        let kinks = battery.kink_levels();
        let mut acc = 0.0;
        let mut out = Vec::new();
        for &e in &self.energy {
            acc += e;
            out.extend(kinks.iter().map(|q| acc + q));
        }
        out
    }
}

/// `a` is at least as good a state as `b` for every continuation: it
/// arrives no later and either holds more charge or could charge up to `b`'s
/// level by `b`'s arrival time.
pub fn state_dominates(battery: &Battery, a: (f64, f64), b: (f64, f64)) -> bool {
    let ((xa, ta), (xb, tb)) = (a, b);
    if xb == f64::NEG_INFINITY {
        return true;
    }
    if xa == f64::NEG_INFINITY || ta > tb + FEAS_EPS {
        return false;
    }
    xa >= xb - FEAS_EPS || ta + battery.charge_time(xa, xb) <= tb + FEAS_EPS
}

fn prefix_dominates(battery: &Battery, depart: f64, a: &Prefix, b: &Prefix) -> bool {
    if a.cost > b.cost + FEAS_EPS || a.energy[0] > b.energy[0] + FEAS_EPS {
        return false;
    }
    if let Some(alpha) = battery.linear_rate() {
        // potential and earliest arrival both no worse
        return a.travel_sum <= b.travel_sum + FEAS_EPS
            && a.energy_sum + alpha * a.travel_sum
                <= b.energy_sum + alpha * b.travel_sum + FEAS_EPS * alpha.max(1.0);
    }
    let m = battery.capacity();
    let lo = b.energy[0];
    let mut xs: Vec<f64> = a.breakpoints(battery);
    xs.extend(b.breakpoints(battery));
    xs.push(lo);
    xs.push(m);
    xs.into_iter().filter(|&x| x >= lo && x <= m).all(|x| {
        state_dominates(
            battery,
            a.state(battery, depart, x),
            b.state(battery, depart, x),
        )
    })
}

/// All mutually non-dominated arcs from `tail` to `head`: the direct arc
/// when feasible, plus non-dominated charging arcs.
pub fn enumerate_nondominated(
    inst: &Instance,
    battery: &Battery,
    tail: Element,
    head: Element,
    limits: SequenceLimits,
) -> Vec<ChargeArc> {
    let m = battery.capacity();
    let depart = inst.t_end(tail);
    let deadline = inst.t_begin(head);
    let budget = deadline - depart;
    let entry_cap = m - inst.energy(tail);
    let mut out = Vec::new();

    let close = |stations: &[usize]| -> Option<ChargeArc> {
        let seq = StationSequence::new(inst, m, tail, head, stations).ok()?;
        let maps = ChargeMaps::build(battery, &seq)?;
        (maps.min_in() <= entry_cap + FEAS_EPS).then_some(ChargeArc { seq, maps })
    };

    if inst.time(tail, head) <= budget + FEAS_EPS {
        if let Some(direct) = close(&[]) {
            out.push(direct);
        }
    }
    if limits.max_stations == 0 || budget < -FEAS_EPS {
        return out;
    }

    let n_st = inst.n_stations();
    let reach_head: Vec<f64> = (0..n_st)
        .map(|s| inst.time(Element::Station(s), head))
        .collect();
    // kept prefixes per last station, in order of discovery (so by length)
    let mut kept: Vec<Vec<Prefix>> = vec![Vec::new(); n_st];
    let mut frontier: Vec<Prefix> = Vec::new();
    for s in 0..n_st {
        let st = Element::Station(s);
        let (dt, de) = (inst.time(tail, st), inst.energy_between(tail, st));
        if dt + reach_head[s] > budget + FEAS_EPS || de > entry_cap + FEAS_EPS {
            continue;
        }
        frontier.push(Prefix {
            stations: vec![s],
            cost: inst.travel(tail, st),
            travel: vec![dt],
            energy: vec![de],
            travel_sum: dt,
            energy_sum: de,
        });
    }

    let mut candidates: Vec<ChargeArc> = Vec::new();
    for len in 1..=limits.max_stations {
        let mut survivors = Vec::new();
        // frontier is in lexicographic order of station lists
        for p in frontier {
            let s = p.last();
            if kept[s]
                .iter()
                .any(|q| prefix_dominates(battery, depart, q, &p))
            {
                continue;
            }
            kept[s].retain(|q| q.stations.len() < len || !prefix_dominates(battery, depart, &p, q));
            kept[s].push(p.clone());
            survivors.push(p);
        }
        // drop survivors later beaten by a same-length prefix
        survivors.retain(|p| kept[p.last()].iter().any(|q| q.stations == p.stations));
        for p in &survivors {
            if let Some(arc) = close(&p.stations) {
                candidates.push(arc);
            }
        }
        if len == limits.max_stations {
            break;
        }
        let mut next = Vec::new();
        for p in &survivors {
            let from = Element::Station(p.last());
            for s in 0..n_st {
                if s == p.last() {
                    continue;
                }
                let st = Element::Station(s);
                let (dt, de) = (inst.time(from, st), inst.energy_between(from, st));
                if p.travel_sum + dt + reach_head[s] > budget + FEAS_EPS || de > m + FEAS_EPS {
                    continue;
                }
                let mut q = p.clone();
                q.stations.push(s);
                q.cost += inst.travel(from, st);
                q.travel.push(dt);
                q.energy.push(de);
                q.travel_sum += dt;
                q.energy_sum += de;
                next.push(q);
            }
        }
        next.sort_by(|a, b| a.stations.cmp(&b.stations));
        frontier = next;
    }

    // arc-level filter
    candidates.sort_by(|a, b| {
        a.seq
            .cost
            .total_cmp(&b.seq.cost)
            .then_with(|| a.seq.stations.cmp(&b.seq.stations))
    });
    let mut chosen: Vec<ChargeArc> = Vec::new();
    for c in candidates {
        let beaten = out
            .iter()
            .chain(chosen.iter())
            .any(|a| arc_dominates(a, &c, m));
        if beaten {
            continue;
        }
        chosen.retain(|a| !arc_dominates(&c, a, m));
        chosen.push(c);
    }
    chosen.sort_by(|a, b| a.seq.stations.cmp(&b.seq.stations));
    out.extend(chosen);
    out
}

/// Arc dominance: no more expensive and `fc` at least as large everywhere.
pub fn arc_dominates(a: &ChargeArc, b: &ChargeArc, capacity: f64) -> bool {
    a.seq.cost <= b.seq.cost + FEAS_EPS && a.maps.dominates(&b.maps, capacity)
}
