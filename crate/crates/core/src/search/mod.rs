//! Branch-and-price and the diving heuristic.

mod branching;
mod dive;

pub use branching::{
    depot_counts, integral_chains, select_branch, start_flows, traversal_flows, Branch,
};
pub use dive::{dive, DiveConfig, DiveOutcome, DiveStatus};

use crate::charge_arcs::Network;
use crate::error::SolveError;
use crate::master::{deadline_after, CgConfig, CgStatus, IterationLog, Master, Restrictions};
use crate::model::Instance;
use crate::pricing::Route;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

const INT_TOL: f64 = 1e-6;

/// An integer solution: one route per vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub cost: f64,
}

impl Solution {
    pub fn new(mut routes: Vec<Route>) -> Self {
        routes.sort_by(|a, b| {
            a.depot
                .cmp(&b.depot)
                .then_with(|| a.services.cmp(&b.services))
        });
        let cost = routes.iter().map(|r| r.cost).sum();
        Solution { routes, cost }
    }

    pub fn vehicles(&self) -> usize {
        self.routes.len()
    }

    /// Cost without the fixed vehicle costs.
    pub fn driving_cost(&self, fixed_cost: f64) -> f64 {
        self.cost - fixed_cost * self.routes.len() as f64
    }

    /// Every service appears in exactly one route.
    pub fn is_partition(&self, n_services: usize) -> bool {
        let mut seen = vec![false; n_services];
        for r in &self.routes {
            for &s in &r.services {
                if s >= n_services || seen[s] {
                    return false;
                }
                seen[s] = true;
            }
        }
        seen.into_iter().all(|b| b)
    }
}

/// Routes with value one in an integral master solution, or `None`.
pub fn integral_routes(pool: &[Route], x: &[f64]) -> Option<Vec<Route>> {
    let mut out = Vec::new();
    for (r, &v) in pool.iter().zip(x) {
        if v > INT_TOL && v < 1.0 - INT_TOL {
            return None;
        }
        if v >= 1.0 - INT_TOL {
            out.push(r.clone());
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpConfig {
    pub cg: CgConfig,
    pub node_limit: Option<usize>,
    #[serde(with = "opt_secs")]
    pub time_limit: Option<Duration>,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            cg: CgConfig::default(),
            node_limit: None,
            time_limit: None,
        }
    }
}

pub(crate) mod opt_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        let v = Option::<f64>::deserialize(d)?;
        match v {
            Some(x) if !(x >= 0.0 && x.is_finite()) => Err(serde::de::Error::custom(
                "time limit must be a non-negative number of seconds",
            )),
            Some(x) => Ok(Some(Duration::from_secs_f64(x))),
            None => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpOutcome {
    pub best: Option<Solution>,
    /// Lower bound on the optimum over the arcs of the network given.
    pub bound: f64,
    pub root_value: f64,
    /// The tree was exhausted: `best` is optimal (or the problem infeasible).
    pub proven: bool,
    pub nodes: usize,
    /// Column generation log of every node solved.
    pub log: Vec<IterationLog>,
}

struct Node {
    bound: f64,
    id: usize,
    restrictions: Restrictions,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on bound, older nodes first
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.id.cmp(&self.id))
    }
}

fn prunes(bound: f64, incumbent: Option<&Solution>) -> bool {
    incumbent.is_some_and(|s| bound >= s.cost - 1e-6 * s.cost.abs().max(1.0))
}

/// Best-bound branch-and-price over the arcs of `net`.
pub fn branch_and_price(
    inst: &Instance,
    net: &Network,
    cfg: &BpConfig,
) -> Result<BpOutcome, SolveError> {
    let deadline = deadline_after(cfg.time_limit);
    let mut pool: Vec<Route> = Vec::new();
    let mut pooled: HashSet<(usize, Vec<u32>)> = HashSet::new();
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: 0,
        restrictions: Restrictions::default(),
    });
    let mut next_id = 1;
    let mut best: Option<Solution> = None;
    let mut nodes = 0;
    let mut root_value = f64::NAN;
    let mut limit_hit = false;
    let mut open_bound = f64::INFINITY;
    let mut log = Vec::new();

    while let Some(node) = heap.pop() {
        if prunes(node.bound, best.as_ref()) {
            continue;
        }
        if cfg.node_limit.is_some_and(|l| nodes >= l)
            || deadline.is_some_and(|d| Instant::now() >= d)
        {
            open_bound = open_bound.min(node.bound);
            limit_hit = true;
            break;
        }
        nodes += 1;
        let mut master = Master::new(inst, net, node.restrictions.clone());
        for r in &pool {
            master.add_route(r.clone());
        }
        let cg = master.column_generation(&cfg.cg, deadline)?;
        log.extend(master.log.iter().map(|l| IterationLog {
            node: nodes - 1,
            ..l.clone()
        }));
        for r in master.pool() {
            if pooled.insert((r.depot, r.arcs.clone())) {
                pool.push(r.clone());
            }
        }
        if node.id == 0 {
            root_value = cg.value;
        }
        match cg.status {
            CgStatus::Infeasible => continue,
            CgStatus::Limit => {
                open_bound = open_bound.min(node.bound);
                limit_hit = true;
                break;
            }
            CgStatus::Converged => {}
        }
        // bounds never decrease down the tree
        let bound = cg.value.max(node.bound);
        if prunes(bound, best.as_ref()) {
            continue;
        }
        let npool = master.pool();
        if let Some(routes) = integral_routes(npool, &cg.x) {
            best = Some(Solution::new(routes));
            continue;
        }
        match select_branch(npool, &cg.x, inst.n_depots()) {
            Ok(branch) => {
                for r in branch.children(&node.restrictions) {
                    heap.push(Node {
                        bound,
                        id: next_id,
                        restrictions: r,
                    });
                    next_id += 1;
                }
            }
            Err(SolveError::IntegralSolution) => {
                let sol = Solution::new(integral_chains(npool, &cg.x));
                if best.as_ref().is_none_or(|b| sol.cost < b.cost) {
                    best = Some(sol);
                }
            }
            Err(e) => return Err(e),
        }
    }
    for n in heap.iter() {
        if !prunes(n.bound, best.as_ref()) {
            open_bound = open_bound.min(n.bound);
        }
    }
    let proven = !limit_hit;
    let bound = match (&best, proven) {
        (Some(s), true) => s.cost,
        (None, true) => f64::INFINITY,
        (Some(s), false) => open_bound.min(s.cost),
        (None, false) => open_bound,
    };
    Ok(BpOutcome {
        best,
        bound,
        root_value,
        proven,
        nodes,
        log,
    })
}

/// Root LP value over the arcs of `net`.
pub fn root_lp(
    inst: &Instance,
    net: &Network,
    cfg: &CgConfig,
    time_limit: Option<Duration>,
) -> Result<(f64, CgStatus, Vec<IterationLog>), SolveError> {
    let mut master = Master::new(inst, net, Restrictions::default());
    let out = master.column_generation(cfg, deadline_after(time_limit))?;
    Ok((out.value, out.status, master.log.clone()))
}
