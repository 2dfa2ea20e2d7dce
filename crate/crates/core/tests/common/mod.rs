#![allow(dead_code)]

use evsp::charge_arcs::StationSequence;
use evsp::oracle::Legs;
use evsp::{Battery, ChargeCurve, ChargeModel, Element};
use rand::Rng;

pub const CAPACITY: f64 = 100.0;

pub fn random_linear_battery(rng: &mut impl Rng) -> Battery {
    Battery::linear(CAPACITY, rng.gen_range(0.5..3.0))
}

/// Concave profile from empty, reaching capacity or saturating below it.
pub fn random_curve_battery(rng: &mut impl Rng) -> Battery {
    let pieces = rng.gen_range(1..=4);
    let mut slopes: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.3..4.0)).collect();
    slopes.sort_by(|a, b| b.total_cmp(a));
    let top = if rng.gen_bool(0.2) {
        rng.gen_range(70.0..100.0)
    } else {
        CAPACITY
    };
    let mut pts = vec![(0.0, 0.0)];
    let (mut t, mut l) = (0.0, 0.0);
    for (j, s) in slopes.iter().enumerate() {
        let gain = if j + 1 == pieces {
            top - l
        } else {
            rng.gen_range(0.1..0.6) * (top - l)
        };
        t += gain / s;
        l += gain;
        pts.push((t, l));
    }
    let curve = ChargeCurve::new(pts).expect("concave by construction");
    Battery::new(CAPACITY, &ChargeModel::General { profile: curve }).unwrap()
}

/// Random station sequence with up to `max_k` stations that passes the
/// window and leg-energy checks.
pub fn random_sequence(rng: &mut impl Rng, max_k: usize) -> StationSequence {
    let k = rng.gen_range(0..=max_k);
    let travel: Vec<f64> = (0..=k).map(|_| rng.gen_range(1.0..30.0)).collect();
    let energy: Vec<f64> = (0..=k).map(|_| rng.gen_range(0.0..55.0)).collect();
    let head_energy = rng.gen_range(0.0..(CAPACITY - energy[k]).min(40.0));
    let depart = rng.gen_range(0.0..100.0);
    let slack = if rng.gen_bool(0.1) {
        0.0
    } else {
        rng.gen_range(0.0..150.0)
    };
    let deadline = depart + travel.iter().sum::<f64>() + slack;
    let cost = travel.iter().sum::<f64>() * 1.3;
    StationSequence {
        tail: Element::Service(0),
        head: Element::Service(1),
        stations: (0..k).collect(),
        depart,
        deadline,
        travel,
        energy,
        head_energy,
        cost,
    }
}

pub fn legs_of(seq: &StationSequence) -> Legs {
    Legs {
        depart: seq.depart,
        deadline: seq.deadline,
        travel: seq.travel.clone(),
        energy: seq.energy.clone(),
        head_energy: seq.head_energy,
    }
}

/// Smallest entry level with `f(level) >= target`, by bisection over
/// `[0, capacity]`; `+inf` when even the capacity falls short.
pub fn bisect_min_level(f: impl Fn(f64) -> f64, target: f64, capacity: f64) -> f64 {
    if !(f(capacity) >= target) {
        return f64::INFINITY;
    }
    if f(0.0) >= target {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, capacity);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    hi
}
