use evsp::charge_arcs::{build_network, Network, SequenceLimits};
use evsp::master::{CgConfig, CgStatus, Master, Restrictions};
use evsp::model::{Instance, FEAS_EPS};
use evsp::oracle::{enumerate_routes, exact_small_solve, generate, validate, GeneratorConfig};
use evsp::pricing::{compute_bounds, price, reduced_costs, Duals, PricingConfig};
use evsp::search::{branch_and_price, dive, BpConfig, DiveConfig, DiveStatus};
use evsp::solution::SolutionFile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(n: usize, seed: u64, nonlinear: bool) -> (Instance, Network) {
    let mut cfg = GeneratorConfig::small(n, seed);
    cfg.nonlinear = nonlinear;
    let inst = generate(&cfg);
    let net = build_network(&inst, SequenceLimits::default()).unwrap();
    (inst, net)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn pricing_finds_the_cheapest_reduced_cost_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..12 {
        let (inst, net) = small(6, seed, seed % 2 == 1);
        let cap = net.battery.capacity();
        let fixed = inst.vehicle.fixed_cost;
        for g in &net.graphs {
            let all = enumerate_routes(g, cap, fixed, 6, 1_000_000).unwrap();
            for _ in 0..4 {
                let duals: Vec<f64> = (0..inst.n_services())
                    .map(|_| rng.gen_range(0.0..2.0 * fixed))
                    .collect();
                let dd = rng.gen_range(-fixed..0.0);
                let d = Duals {
                    services: &duals,
                    depot: dd,
                };
                let rc = reduced_costs(g, fixed, d);
                let bounds = compute_bounds(g, &rc, cap);
                // the bound at the origin never exceeds any completion
                let brute = all
                    .iter()
                    .map(|r| r.local_arcs.iter().map(|&i| rc[i as usize]).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                if let Some((c, _)) = bounds[g.origin()] {
                    assert!(c <= brute + 1e-6, "bound {c} above best {brute}");
                } else {
                    assert!(all.is_empty());
                }
                let cfg = PricingConfig {
                    max_columns: usize::MAX,
                    threshold: 0.0,
                    ..Default::default()
                };
                let out = price(g, &rc, &bounds, cap, fixed, &cfg);
                let negative = all
                    .iter()
                    .filter(|r| r.local_arcs.iter().map(|&i| rc[i as usize]).sum::<f64>() < 0.0)
                    .count();
                assert!(out.routes.len() <= negative);
                if brute < -1e-6 {
                    let got = out.routes[0].reduced_cost;
                    assert!(
                        close(got, brute),
                        "seed {seed}: priced {got}, brute force {brute}"
                    );
                } else {
                    assert!(out.routes.iter().all(|r| r.reduced_cost > -1e-6));
                }
                for p in &out.routes {
                    assert!(close(
                        p.reduced_cost,
                        p.route.cost - p.route.services.iter().map(|&s| duals[s]).sum::<f64>() - dd
                    ));
                }
            }
        }
    }
}

#[test]
fn stabilization_does_not_change_the_root_value() {
    for seed in 0..6 {
        let (inst, net) = small(9, seed, seed % 3 == 0);
        let mut values = Vec::new();
        for stab in [false, true] {
            let cfg = CgConfig {
                stabilization: stab,
                ..Default::default()
            };
            let mut m = Master::new(&inst, &net, Restrictions::default());
            let out = m.column_generation(&cfg, None).unwrap();
            assert_eq!(out.status, CgStatus::Converged);
            values.push(out.value);
        }
        assert!(close(values[0], values[1]), "seed {seed}: {values:?}");
    }
}

#[test]
fn branch_and_price_matches_exact_cover() {
    for seed in 0..10 {
        let (inst, net) = small(7, seed, seed % 2 == 0);
        let exact = exact_small_solve(&inst, &net).unwrap();
        let bp = branch_and_price(&inst, &net, &BpConfig::default()).unwrap();
        assert!(bp.proven);
        match (exact, &bp.best) {
            (Some((v, _)), Some(s)) => {
                assert!(close(v, s.cost), "seed {seed}: exact {v}, b&p {}", s.cost);
                assert!(s.is_partition(inst.n_services()));
                assert!(bp.root_value <= s.cost + 1e-6);
                let file = SolutionFile::new(
                    "t",
                    "bp",
                    "optimal",
                    &net.battery,
                    &net.store,
                    inst.vehicle.fixed_cost,
                    Some(s),
                    Some(bp.bound),
                );
                let rep = validate(&inst, &file);
                assert!(rep.feasible, "seed {seed}: {:?}", rep.violation);
                assert!(close(rep.recomputed_cost, s.cost));
            }
            (None, None) => {}
            (e, b) => panic!("seed {seed}: exact {e:?} vs b&p {b:?}"),
        }
    }
}

#[test]
fn dive_returns_validated_solutions_above_the_bound() {
    for seed in 0..8 {
        let (inst, net) = small(12, seed, seed % 2 == 1);
        let cfg = DiveConfig {
            seed,
            ..Default::default()
        };
        let out = dive(&inst, &net, &cfg).unwrap();
        assert_eq!(out.status, DiveStatus::Feasible, "seed {seed}");
        let s = out.solution.unwrap();
        assert!(s.is_partition(inst.n_services()));
        assert!(s.cost >= out.root_value - 1e-6);
        let file = SolutionFile::new(
            "t",
            "dive",
            "feasible",
            &net.battery,
            &net.store,
            inst.vehicle.fixed_cost,
            Some(&s),
            None,
        );
        let rep = validate(&inst, &file);
        assert!(rep.feasible, "seed {seed}: {:?}", rep.violation);
        for trace in &rep.traces {
            assert!(trace
                .iter()
                .all(|&l| l >= -FEAS_EPS && l <= net.battery.capacity() + FEAS_EPS));
        }
        // same seed, same answer
        let again = dive(&inst, &net, &cfg).unwrap().solution.unwrap();
        assert_eq!(again, s);
    }
}
