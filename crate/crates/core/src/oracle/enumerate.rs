use crate::charge_arcs::{DepotGraph, Network};
use crate::error::SolveError;
use crate::model::Instance;

/// A route found by exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedRoute {
    pub depot: usize,
    /// Local arc indices in the depot graph.
    pub local_arcs: Vec<u32>,
    /// Shared store indices.
    pub arcs: Vec<u32>,
    pub services: Vec<usize>,
    pub cost: f64,
    /// Battery level after every arc.
    pub levels: Vec<f64>,
}

/// Every origin-destination path of `graph` with at most `max_services`
/// services whose charge-map chain from a full battery stays feasible.
/// Fails once more than `limit` routes are found.
pub fn enumerate_routes(
    graph: &DepotGraph,
    capacity: f64,
    fixed_cost: f64,
    max_services: usize,
    limit: usize,
) -> Result<Vec<EnumeratedRoute>, SolveError> {
    struct Walk<'a> {
        graph: &'a DepotGraph,
        fixed_cost: f64,
        max_services: usize,
        limit: usize,
        path: Vec<u32>,
        levels: Vec<f64>,
        out: Vec<EnumeratedRoute>,
    }

    impl Walk<'_> {
        fn visit(&mut self, v: usize, level: f64) -> Result<(), SolveError> {
            let g = self.graph;
            for &i in g.out_arcs(v) {
                let a = g.arc(i as usize);
                let w = a.head as usize;
                if w != g.dest() && self.path.len() >= self.max_services {
                    continue;
                }
                let next = g.charge(i as usize).fc(level);
                if next == f64::NEG_INFINITY {
                    continue;
                }
                self.path.push(i);
                self.levels.push(next);
                if w == g.dest() {
                    if self.out.len() >= self.limit {
                        return Err(SolveError::SizeGuard(format!(
                            "more than {} routes",
                            self.limit
                        )));
                    }
                    let arcs: Vec<u32> = self.path.iter().map(|&j| g.arc(j as usize).id).collect();
                    let services = self.path[..self.path.len() - 1]
                        .iter()
                        .map(|&j| g.arc(j as usize).head as usize)
                        .collect();
                    let cost = self.fixed_cost
                        + self
                            .path
                            .iter()
                            .map(|&j| g.charge(j as usize).cost())
                            .sum::<f64>();
                    self.out.push(EnumeratedRoute {
                        depot: g.depot,
                        local_arcs: self.path.clone(),
                        arcs,
                        services,
                        cost,
                        levels: self.levels.clone(),
                    });
                } else {
                    self.visit(w, next)?;
                }
                self.path.pop();
                self.levels.pop();
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        graph,
        fixed_cost,
        max_services,
        limit,
        path: Vec::new(),
        levels: Vec::new(),
        out: Vec::new(),
    };
    walk.visit(graph.origin(), capacity)?;
    Ok(walk.out)
}

/// Minimum-cost exact cover of the services by enumerated routes of all
/// depots. `Ok(None)` when no cover exists.
pub fn exact_small_solve(
    inst: &Instance,
    net: &Network,
) -> Result<Option<(f64, Vec<EnumeratedRoute>)>, SolveError> {
    let n = inst.n_services();
    if n > 20 {
        return Err(SolveError::SizeGuard(format!(
            "{n} services is too many for exact cover"
        )));
    }
    let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    // cheapest route per service set
    let mut best: std::collections::HashMap<u32, EnumeratedRoute> =
        std::collections::HashMap::new();
    for g in &net.graphs {
        for r in enumerate_routes(
            g,
            net.battery.capacity(),
            inst.vehicle.fixed_cost,
            n,
            5_000_000,
        )? {
            let mask = r.services.iter().fold(0u32, |m, &s| m | (1 << s));
            match best.get(&mask) {
                Some(b) if b.cost <= r.cost => {}
                _ => {
                    best.insert(mask, r);
                }
            }
        }
    }
    // routes grouped by their lowest service
    let mut by_low: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut masks: Vec<&u32> = best.keys().collect();
    masks.sort();
    for &m in masks {
        by_low[m.trailing_zeros() as usize].push((m, best[&m].cost));
    }
    // dp[mask] = cheapest cover of the services outside `mask`
    let size = 1usize << n;
    let mut dp = vec![f64::INFINITY; size];
    let mut choice = vec![0u32; size];
    dp[full as usize] = 0.0;
    for mask in (0..full).rev() {
        let low = (!mask).trailing_zeros() as usize;
        for &(r, c) in &by_low[low] {
            if r & mask != 0 {
                continue;
            }
            let v = c + dp[(mask | r) as usize];
            if v < dp[mask as usize] {
                dp[mask as usize] = v;
                choice[mask as usize] = r;
            }
        }
    }
    if !dp[0].is_finite() {
        return Ok(None);
    }
    let mut routes = Vec::new();
    let mut mask = 0u32;
    while mask != full {
        let r = choice[mask as usize];
        routes.push(best[&r].clone());
        mask |= r;
    }
    Ok(Some((dp[0], routes)))
}
