//! Restricted master problem and the column generation loop.

mod lp;

pub use lp::{DenseSimplex, LpBackend, LpSolution, Row, Sense, ARTIFICIAL_COST};

use crate::charge_arcs::{DepotGraph, Network};
use crate::error::{LpError, SolveError};
use crate::model::{Element, Instance, FEAS_EPS};
use crate::pricing::{price_graph, Duals, PricingConfig, Route};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::time::{Duration, Instant};

/// Constraints of a search node on top of the partition rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Restrictions {
    /// `(depot, sense, rhs)`: bound on the number of vehicles of a depot.
    pub depot_counts: Vec<(usize, Sense, f64)>,
    /// Service pairs that may not be consecutive.
    pub forbidden_pairs: Vec<(usize, usize)>,
    /// Service pairs that must be consecutive.
    pub forced_pairs: Vec<(usize, usize)>,
    /// `(depot, service)`: routes of the depot may not start with the service.
    pub forbidden_starts: Vec<(usize, usize)>,
    /// `(depot, service)`: the service starts a route of that depot.
    pub forced_starts: Vec<(usize, usize)>,
    /// Services already served by fixed routes; they leave the problem.
    pub covered: Vec<usize>,
}

impl Restrictions {
    /// Whether an arc from `tail` to `head` may be used in a route of `depot`.
    pub fn allows(&self, depot: usize, tail: Element, head: Element) -> bool {
        let service = |e: Element| match e {
            Element::Service(s) => Some(s),
            _ => None,
        };
        let (u, v) = (service(tail), service(head));
        if u.is_some_and(|s| self.covered.contains(&s))
            || v.is_some_and(|s| self.covered.contains(&s))
        {
            return false;
        }
        if let (Some(u), Some(v)) = (u, v) {
            if self.forbidden_pairs.contains(&(u, v)) {
                return false;
            }
        }
        for &(a, b) in &self.forced_pairs {
            if u == Some(a) && v != Some(b) {
                return false;
            }
            if v == Some(b) && u != Some(a) {
                return false;
            }
        }
        if let Some(v) = v {
            if u.is_none() && self.forbidden_starts.contains(&(depot, v)) {
                return false;
            }
            for &(d, s) in &self.forced_starts {
                if s == v && (d != depot || u.is_some()) {
                    return false;
                }
            }
        }
        true
    }

    /// Depot graph restricted to the allowed arcs.
    pub fn apply(&self, graph: &DepotGraph) -> DepotGraph {
        let store = graph.store().clone();
        graph.restrict(|_, a| {
            let c = &store[a.id as usize];
            self.allows(graph.depot, c.tail(), c.head())
        })
    }

    pub fn apply_network(&self, net: &Network) -> Network {
        Network {
            battery: net.battery.clone(),
            store: net.store.clone(),
            graphs: net.graphs.iter().map(|g| self.apply(g)).collect(),
        }
    }

    pub fn allows_route(&self, net: &Network, route: &Route) -> bool {
        route.arcs.iter().all(|&id| {
            let a = &net.store[id as usize];
            self.allows(route.depot, a.tail(), a.head())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgConfig {
    pub columns_per_depot: usize,
    pub stabilization: bool,
    pub max_iterations: usize,
    /// Price depots concurrently on the current rayon pool.
    pub parallel: bool,
    pub label_limit: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            columns_per_depot: 200,
            stabilization: true,
            max_iterations: 10_000,
            parallel: false,
            label_limit: 20_000_000,
        }
    }
}

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    /// Search node the master belongs to, in solve order.
    #[serde(default)]
    pub node: usize,
    pub iteration: usize,
    pub lp_value: f64,
    pub columns_added: usize,
    pub alpha: f64,
    pub pricing_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CgStatus {
    /// No negative reduced cost column remains.
    Converged,
    /// Converged, but artificial columns are still needed: the node is infeasible.
    Infeasible,
    /// Iteration or time limit hit; the value is not a bound.
    Limit,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub status: CgStatus,
    pub value: f64,
    /// Primal values, one per pool column.
    pub x: Vec<f64>,
    /// Partition duals indexed by service (zero for covered services).
    pub service_duals: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub iterations: usize,
}

/// Convex combination used by dual smoothing.
pub fn smoothed_duals(alpha: f64, previous: &[f64], current: &[f64]) -> Vec<f64> {
    previous
        .iter()
        .zip(current)
        .map(|(p, c)| alpha * p + (1.0 - alpha) * c)
        .collect()
}

/// Restricted master problem of one node, with its column pool.
pub struct Master<'a> {
    inst: &'a Instance,
    net: Network,
    restrictions: Restrictions,
    lp: DenseSimplex,
    service_row: Vec<Option<usize>>,
    depot_rows: Vec<(usize, usize)>,
    pool: Vec<Route>,
    seen: HashSet<(usize, Vec<u32>)>,
    pub log: Vec<IterationLog>,
}

impl<'a> Master<'a> {
    /// Master over the arcs of `net` allowed by `restrictions`.
    pub fn new(inst: &'a Instance, net: &Network, restrictions: Restrictions) -> Self {
        let net = restrictions.apply_network(net);
        let mut rows = Vec::new();
        let mut service_row = vec![None; inst.n_services()];
        for (s, slot) in service_row.iter_mut().enumerate() {
            if !restrictions.covered.contains(&s) {
                *slot = Some(rows.len());
                rows.push(Row {
                    sense: Sense::Eq,
                    rhs: 1.0,
                });
            }
        }
        let mut depot_rows = Vec::new();
        for &(d, sense, rhs) in &restrictions.depot_counts {
            depot_rows.push((d, rows.len()));
            rows.push(Row { sense, rhs });
        }
        Master {
            inst,
            net,
            restrictions,
            lp: DenseSimplex::new(rows),
            service_row,
            depot_rows,
            pool: Vec::new(),
            seen: HashSet::new(),
            log: Vec::new(),
        }
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn restrictions(&self) -> &Restrictions {
        &self.restrictions
    }

    pub fn pool(&self) -> &[Route] {
        &self.pool
    }

    /// Add a column unless it is already pooled or not allowed at this node.
    pub fn add_route(&mut self, route: Route) -> bool {
        if !self.restrictions.allows_route(&self.net, &route) {
            return false;
        }
        if !self.seen.insert((route.depot, route.arcs.clone())) {
            return false;
        }
        let mut entries: Vec<(usize, f64)> = route
            .services
            .iter()
            .map(|&s| {
                (
                    self.service_row[s].expect("allowed routes avoid covered services"),
                    1.0,
                )
            })
            .collect();
        for &(d, r) in &self.depot_rows {
            if d == route.depot {
                entries.push((r, 1.0));
            }
        }
        self.lp.add_column(route.cost, &entries);
        self.pool.push(route);
        true
    }

    pub fn solve_lp(&mut self) -> Result<LpSolution, LpError> {
        self.lp.solve()
    }

    fn split_duals(&self, row_duals: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let services = self
            .service_row
            .iter()
            .map(|r| r.map_or(0.0, |r| row_duals[r]))
            .collect();
        let mut depot = vec![0.0; self.inst.n_depots()];
        for &(d, r) in &self.depot_rows {
            depot[d] += row_duals[r];
        }
        (services, depot)
    }

    /// Price every depot graph at the given duals; returns new routes in
    /// depot order.
    fn price_all(&self, services: &[f64], depot: &[f64], cfg: &CgConfig) -> Vec<Route> {
        let capacity = self.net.battery.capacity();
        let fixed = self.inst.vehicle.fixed_cost;
        let pcfg = PricingConfig {
            max_columns: cfg.columns_per_depot,
            threshold: -FEAS_EPS,
            label_limit: cfg.label_limit,
        };
        let run = |g: &DepotGraph| {
            let duals = Duals {
                services,
                depot: depot[g.depot],
            };
            price_graph(g, capacity, fixed, duals, &pcfg).routes
        };
        let per_depot: Vec<_> = if cfg.parallel {
            self.net.graphs.par_iter().map(run).collect()
        } else {
            self.net.graphs.iter().map(run).collect()
        };
        per_depot.into_iter().flatten().map(|p| p.route).collect()
    }

    /// Column generation to convergence.
    pub fn column_generation(
        &mut self,
        cfg: &CgConfig,
        deadline: Option<Instant>,
    ) -> Result<CgOutcome, SolveError> {
        let mut alpha_tenths: u32 = if cfg.stabilization { 9 } else { 0 };
        let mut center: Vec<f64> = vec![0.0; self.lp.n_rows()];
        let mut iteration = 0;
        loop {
            let sol = self.solve_lp()?;
            let lp_value = sol.objective;
            if iteration >= cfg.max_iterations || deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(self.outcome(CgStatus::Limit, sol, iteration));
            }
            let mut added = 0;
            let started = Instant::now();
            loop {
                let alpha = alpha_tenths as f64 / 10.0;
                let duals = smoothed_duals(alpha, &center, &sol.duals);
                let (services, depot) = self.split_duals(&duals);
                for r in self.price_all(&services, &depot, cfg) {
                    if self.add_route(r) {
                        added += 1;
                    }
                }
                if added > 0 {
                    center = duals;
                    break;
                }
                if alpha_tenths == 0 {
                    break;
                }
                alpha_tenths -= 1;
            }
            self.log.push(IterationLog {
                node: 0,
                iteration,
                lp_value,
                columns_added: added,
                alpha: alpha_tenths as f64 / 10.0,
                pricing_seconds: started.elapsed().as_secs_f64(),
            });
            iteration += 1;
            if added == 0 {
                let status = if sol.infeasibility > 1e-6 {
                    CgStatus::Infeasible
                } else {
                    CgStatus::Converged
                };
                return Ok(self.outcome(status, sol, iteration));
            }
        }
    }

    fn outcome(&self, status: CgStatus, sol: LpSolution, iterations: usize) -> CgOutcome {
        let (service_duals, _) = self.split_duals(&sol.duals);
        CgOutcome {
            status,
            value: sol.objective,
            x: sol.x,
            service_duals,
            row_duals: sol.duals,
            iterations,
        }
    }
}

/// Cheapest feasible single-service route for every service that has one,
/// over all depots.
pub fn singleton_routes(inst: &Instance, net: &Network) -> Vec<Route> {
    let capacity = net.battery.capacity();
    let fixed = inst.vehicle.fixed_cost;
    let mut out = Vec::new();
    for v in 0..inst.n_services() {
        let mut best: Option<Route> = None;
        for g in &net.graphs {
            for &i in g.in_arcs(v) {
                let a = g.arc(i as usize);
                if a.tail as usize != g.origin() {
                    continue;
                }
                let level = g.charge(i as usize).fc(capacity);
                for &j in g.out_arcs(v) {
                    let b = g.arc(j as usize);
                    if b.head as usize != g.dest()
                        || g.charge(j as usize).fc(level) == f64::NEG_INFINITY
                    {
                        continue;
                    }
                    let cost = fixed + g.charge(i as usize).cost() + g.charge(j as usize).cost();
                    if best.as_ref().is_none_or(|r| cost < r.cost) {
                        best = Some(Route {
                            depot: g.depot,
                            arcs: vec![a.id, b.id],
                            services: vec![v],
                            cost,
                        });
                    }
                }
            }
        }
        out.extend(best);
    }
    out
}

/// Budget helper for the search drivers.
pub fn deadline_after(limit: Option<Duration>) -> Option<Instant> {
    limit.map(|d| Instant::now() + d)
}
