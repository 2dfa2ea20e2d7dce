use evsp::charge_arcs::{build_network, SequenceLimits};
use evsp::io::{parse_solution, solution_to_json};
use evsp::model::Instance;
use evsp::oracle::{generate, validate, GeneratorConfig, ViolationKind};
use evsp::search::{branch_and_price, BpConfig};
use evsp::solution::SolutionFile;

/// A solved instance with at least one multi-service route and one arc
/// through a station.
fn solved() -> (Instance, SolutionFile) {
    for seed in 0..40 {
        let mut cfg = GeneratorConfig::small(8, seed);
        cfg.horizon = 400.0;
        let inst = generate(&cfg);
        let net = build_network(&inst, SequenceLimits::default()).unwrap();
        let bp = branch_and_price(&inst, &net, &BpConfig::default()).unwrap();
        let s = bp.best.unwrap();
        let file = SolutionFile::new(
            "t",
            "bp",
            "optimal",
            &net.battery,
            &net.store,
            inst.vehicle.fixed_cost,
            Some(&s),
            Some(bp.bound),
        );
        let charges = file
            .routes
            .iter()
            .any(|r| r.arcs.iter().any(|a| !a.stations.is_empty()));
        if charges && file.routes.iter().any(|r| r.services.len() > 1) {
            return (inst, file);
        }
    }
    panic!("no instance with charging found");
}

fn kind(inst: &Instance, sol: &SolutionFile) -> Option<ViolationKind> {
    let rep = validate(inst, sol);
    assert_eq!(rep.feasible, rep.violation.is_none());
    rep.violation.map(|v| v.kind)
}

#[test]
fn untouched_solution_passes_and_round_trips() {
    let (inst, sol) = solved();
    let rep = validate(&inst, &sol);
    assert!(rep.feasible, "{:?}", rep.violation);
    assert!((rep.recomputed_cost - sol.cost).abs() <= 1e-6);
    assert_eq!(rep.traces.len(), sol.routes.len());
    let back = parse_solution(&solution_to_json(&sol)).unwrap();
    assert_eq!(back, sol);
}

#[test]
fn tampered_solutions_are_rejected() {
    let (inst, sol) = solved();
    let multi = sol
        .routes
        .iter()
        .position(|r| r.services.len() > 1)
        .unwrap();
    let (ri, ai) = sol
        .routes
        .iter()
        .enumerate()
        .find_map(|(ri, r)| {
            r.arcs
                .iter()
                .position(|a| !a.stations.is_empty())
                .map(|ai| (ri, ai))
        })
        .unwrap();

    let mut t = sol.clone();
    t.cost += 1.0;
    assert_eq!(kind(&inst, &t), Some(ViolationKind::Cost));

    let mut t = sol.clone();
    t.routes[0].cost -= 0.5;
    t.cost -= 0.5;
    assert_eq!(kind(&inst, &t), Some(ViolationKind::Cost));

    let mut t = sol.clone();
    let r = t.routes.remove(multi);
    t.cost -= r.cost;
    t.vehicles -= 1;
    assert_eq!(kind(&inst, &t), Some(ViolationKind::Coverage));

    let mut t = sol.clone();
    let r = t.routes[multi].clone();
    t.cost += r.cost;
    t.vehicles += 1;
    t.routes.push(r);
    assert_eq!(kind(&inst, &t), Some(ViolationKind::Coverage));

    let mut t = sol.clone();
    t.routes[0].depot = 99;
    assert_eq!(kind(&inst, &t), Some(ViolationKind::Structure));

    let mut t = sol.clone();
    t.routes[ri].arcs[ai].stations[0] = 99;
    assert_eq!(kind(&inst, &t), Some(ViolationKind::Structure));

    let mut t = sol.clone();
    t.routes[multi].arcs.pop();
    assert_eq!(kind(&inst, &t), Some(ViolationKind::Structure));

    let mut t = sol.clone();
    t.vehicles += 1;
    assert_eq!(kind(&inst, &t), Some(ViolationKind::Structure));

    // serving a route backwards breaks its time windows
    let mut t = sol.clone();
    t.routes[multi].services.reverse();
    assert_eq!(kind(&inst, &t), Some(ViolationKind::TimeWindow));

    // dropping every station from a route that charges: either the battery
    // runs out or the costs no longer match
    let mut t = sol.clone();
    for a in &mut t.routes[ri].arcs {
        a.stations.clear();
    }
    let k = kind(&inst, &t);
    assert!(
        matches!(k, Some(ViolationKind::Battery | ViolationKind::Cost)),
        "{k:?}"
    );
}

#[test]
fn battery_shortfall_is_caught() {
    let (mut inst, sol) = solved();
    inst.vehicle.capacity = 1.0;
    assert_eq!(kind(&inst, &sol), Some(ViolationKind::Battery));
}
