mod common;

use common::*;
use evsp::charge_arcs::{
    general_table, linear_params, lost_time, min_entry_level, optimal_schedule, ChargeMaps,
    StationSequence,
};
use evsp::oracle::{just_enough_dwell, simulate_schedule};
use evsp::{Battery, Element};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn one_station_example() -> (Battery, StationSequence) {
    let battery = Battery::linear(100.0, 1.0);
    let seq = StationSequence {
        tail: Element::Service(0),
        head: Element::Service(1),
        stations: vec![0],
        depart: 0.0,
        deadline: 60.0,
        travel: vec![10.0, 10.0],
        energy: vec![30.0, 20.0],
        head_energy: 0.0,
        cost: 20.0,
    };
    (battery, seq)
}

#[test]
fn one_station_linear_example() {
    let (battery, seq) = one_station_example();
    let sched = optimal_schedule(&battery, &seq, 30.0);
    assert_eq!(sched.stops[0].departure - sched.stops[0].arrival, 40.0);
    assert!((sched.level_out - 20.0).abs() < 1e-12);

    let p = linear_params(&battery, &seq).unwrap().unwrap();
    assert!((p.l_min_in - 30.0).abs() < 1e-12);
    assert!((p.l_max_out - 80.0).abs() < 1e-12);
    assert!((p.delta + 10.0).abs() < 1e-12);
    assert!((p.fc(30.0) - 20.0).abs() < 1e-12);
    assert_eq!(p.bc(0.0), 30.0);
    assert_eq!(p.bc(80.5), f64::INFINITY);
}

#[test]
fn non_charging_shift() {
    let battery = Battery::linear(100.0, 1.0);
    let seq = StationSequence {
        tail: Element::Service(0),
        head: Element::Service(1),
        stations: vec![],
        depart: 0.0,
        deadline: 30.0,
        travel: vec![5.0],
        energy: vec![20.0],
        head_energy: 10.0,
        cost: 5.0,
    };
    assert_eq!(optimal_schedule(&battery, &seq, 50.0).level_out, 20.0);
    let maps = ChargeMaps::build(&battery, &seq).unwrap();
    assert_eq!(maps.fc(50.0), 20.0);
    assert_eq!(maps.fc(f64::NEG_INFINITY), f64::NEG_INFINITY);
    assert_eq!(maps.bc(0.0), 30.0);
    assert_eq!(maps.bc(20.0), 50.0);
}

#[test]
fn short_entry_level_is_infeasible() {
    let (battery, seq) = one_station_example();
    assert_eq!(
        optimal_schedule(&battery, &seq, 29.0).level_out,
        f64::NEG_INFINITY
    );
    let p = linear_params(&battery, &seq).unwrap().unwrap();
    assert_eq!(p.fc(29.0), f64::NEG_INFINITY);
}

#[test]
fn window_violation_is_rejected() {
    let (battery, mut seq) = one_station_example();
    seq.deadline = 15.0;
    assert!(linear_params(&battery, &seq).is_err());
}

#[test]
fn linear_closed_forms_match_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3000 {
        let battery = random_linear_battery(&mut rng);
        let seq = random_sequence(&mut rng, 3);
        let legs = legs_of(&seq);
        let p = linear_params(&battery, &seq).unwrap();
        let sim = |lin: f64| match just_enough_dwell(&battery, &legs, lin) {
            Some(d) => simulate_schedule(&battery, &legs, &d, lin).level_out,
            None => f64::NEG_INFINITY,
        };
        let Some(p) = p else {
            assert_eq!(sim(100.0), f64::NEG_INFINITY, "{seq:?}");
            continue;
        };
        for _ in 0..20 {
            let lin: f64 = rng.gen_range(0.0..100.0);
            let (a, b) = (p.fc(lin), sim(lin));
            let close = (a == b) || (a - b).abs() <= 1e-9;
            // within the feasibility tolerance of the entry threshold either side may snap
            let near_edge = (lin - p.l_min_in).abs() < 1e-5;
            assert!(
                close || near_edge,
                "fc {a} vs sim {b} at {lin} for {seq:?} {p:?}"
            );
        }
    }
}

#[test]
fn general_table_matches_schedule_and_backward_walk() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for _ in 0..3000 {
        let battery = random_curve_battery(&mut rng);
        let mut seq = random_sequence(&mut rng, 3);
        if seq.k() == 0 {
            seq = random_sequence(&mut rng, 3);
            if seq.k() == 0 {
                continue;
            }
        }
        let Some(table) = general_table(&battery, &seq) else {
            assert_eq!(
                optimal_schedule(&battery, &seq, 100.0).level_out,
                f64::NEG_INFINITY
            );
            continue;
        };
        checked += 1;
        let fc = |l: f64| optimal_schedule(&battery, &seq, l).level_out;
        for _ in 0..30 {
            let lin: f64 = rng.gen_range(table.min_in()..=100.0);
            let (a, b) = (table.fc(lin), fc(lin));
            assert!(
                (a - b).abs() <= 1e-9,
                "table {a} vs schedule {b} at {lin}: {seq:?} {:?} {battery:?}",
                table.points()
            );
        }
        for _ in 0..10 {
            let target: f64 = rng.gen_range(0.0..=table.max_out());
            let walk = min_entry_level(&battery, &seq, target);
            let via_table = table.bc(target);
            let bisect = bisect_min_level(fc, target, 100.0);
            // entry levels within FEAS_EPS of a leg energy snap to feasible
            assert!(
                (walk - bisect).abs() <= 2.0 * evsp::FEAS_EPS,
                "walk {walk} vs bisection {bisect} at {target}: {seq:?}"
            );
            assert!(
                (via_table - bisect).abs() <= 2.0 * evsp::FEAS_EPS,
                "table {via_table} vs bisection {bisect}"
            );
        }
        assert_eq!(table.bc(table.max_out() + 1.0), f64::INFINITY);
    }
    assert!(checked > 1000);
}

#[test]
fn lost_time_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..2000 {
        let battery = if rng.gen_bool(0.5) {
            random_linear_battery(&mut rng)
        } else {
            random_curve_battery(&mut rng)
        };
        let seq = random_sequence(&mut rng, 3);
        if seq.k() == 0 {
            assert!(lost_time(&battery, &seq).is_err());
            continue;
        }
        let l = lost_time(&battery, &seq).unwrap();
        assert!(l >= 0.0 && l <= -seq.window_excess() + 1e-9);
    }
    // huge window, tiny battery: everything but travel and one full charge is lost
    let battery = Battery::linear(10.0, 1.0);
    let seq = StationSequence {
        tail: Element::Service(0),
        head: Element::Service(1),
        stations: vec![0],
        depart: 0.0,
        deadline: 1000.0,
        travel: vec![5.0, 5.0],
        energy: vec![4.0, 3.0],
        head_energy: 0.0,
        cost: 0.0,
    };
    assert!((lost_time(&battery, &seq).unwrap() - (1000.0 - 10.0 - 10.0)).abs() < 1e-9);
    // tight window: nothing lost
    let seq = StationSequence {
        deadline: 10.0,
        ..seq
    };
    assert_eq!(lost_time(&battery, &seq).unwrap(), 0.0);
}
