//! Pricing: minimum reduced-cost routes of one depot graph.
//!
//! Backward bounds are computed once per dual vector by a dynamic program
//! over the meet semilattice of (reduced cost, minimal level) pairs. Forward
//! labels are then enumerated best-first by their bound-completed key, with
//! dominance on (reduced cost, level) at each vertex.

use crate::charge_arcs::DepotGraph;
use crate::model::FEAS_EPS;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// A vehicle route: an origin-destination path in one depot graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub depot: usize,
    /// Arcs in order, as indices of the shared arc store.
    pub arcs: Vec<u32>,
    /// Services in visiting order.
    pub services: Vec<usize>,
    /// Fixed vehicle cost plus arc costs.
    pub cost: f64,
}

/// Duals seen by the pricing problem of one depot.
#[derive(Debug, Clone, Copy)]
pub struct Duals<'a> {
    /// One value per service (partition rows).
    pub services: &'a [f64],
    /// Sum of the duals of depot-count rows of this depot.
    pub depot: f64,
}

/// Reduced cost of every local arc of `graph`.
pub fn reduced_costs(graph: &DepotGraph, fixed_cost: f64, duals: Duals<'_>) -> Vec<f64> {
    let (o, d) = (graph.origin(), graph.dest());
    graph
        .arcs()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let c = graph.charge(i).cost();
            let (u, v) = (a.tail as usize, a.head as usize);
            if u == o {
                fixed_cost + c - duals.services[v] - duals.depot
            } else if v == d {
                c
            } else {
                c - duals.services[v]
            }
        })
        .collect()
}

/// Backward resource: lower bounds on the reduced cost and on the entry
/// level of every path from a vertex to the destination. `None` when no
/// such path is feasible.
pub type Bound = Option<(f64, f64)>;

/// Meet of two backward resources.
#[inline]
pub fn meet(a: Bound, b: Bound) -> Bound {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some((c1, m1)), Some((c2, m2))) => Some((c1.min(c2), m1.min(m2))),
    }
}

/// Backward extension along local arc `i`.
#[inline]
pub fn extend_backward(graph: &DepotGraph, rc: &[f64], capacity: f64, i: usize, b: Bound) -> Bound {
    let (c, m) = b?;
    let need = graph.charge(i).bc(m);
    (need <= capacity + FEAS_EPS).then_some((c + rc[i], need.min(capacity)))
}

/// Solve the bound equation along a reverse topological order.
pub fn compute_bounds(graph: &DepotGraph, rc: &[f64], capacity: f64) -> Vec<Bound> {
    let mut b: Vec<Bound> = vec![None; graph.n_vertices()];
    b[graph.dest()] = Some((0.0, 0.0));
    for &v in graph.topo_order().iter().rev() {
        let v = v as usize;
        if v == graph.dest() {
            continue;
        }
        let mut acc = None;
        for &i in graph.out_arcs(v) {
            let w = graph.arc(i as usize).head as usize;
            acc = meet(acc, extend_backward(graph, rc, capacity, i as usize, b[w]));
        }
        b[v] = acc;
    }
    b
}

/// Bidirectional bound: cost of a prefix completed by a bound, `+inf` when
/// the prefix level is below the bound's minimal level.
#[inline]
pub fn fbc(cost: f64, level: f64, b: Bound) -> f64 {
    match b {
        Some((c, m)) if level >= m - FEAS_EPS => cost + c,
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingConfig {
    /// Routes returned per call at most.
    pub max_columns: usize,
    /// Only routes with reduced cost strictly below this value are returned.
    pub threshold: f64,
    /// Stop after creating this many labels; the result is then not proven.
    pub label_limit: usize,
}

impl Default for PricingConfig {
    fn default() -> Self {
        PricingConfig {
            max_columns: 200,
            threshold: -FEAS_EPS,
            label_limit: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedRoute {
    pub route: Route,
    pub reduced_cost: f64,
}

#[derive(Debug, Clone, Default)]
pub struct PricingOutcome {
    /// Routes sorted by reduced cost, then arcs.
    pub routes: Vec<PricedRoute>,
    pub labels: usize,
    /// The label limit was hit.
    pub truncated: bool,
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Label {
    vertex: u32,
    parent: u32,
    arc: u32,
    cost: f64,
    level: f64,
    alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    key: f64,
    seq: u64,
    label: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on key, then insertion order
        other
            .key
            .total_cmp(&self.key)
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Best-first enumeration of routes below the threshold.
///
/// With `max_columns = k`, labels are pruned against the smaller of the
/// threshold and the k-th best completed route, so the k best routes are
/// returned exactly (up to ties).
pub fn price(
    graph: &DepotGraph,
    rc: &[f64],
    bounds: &[Bound],
    capacity: f64,
    fixed_cost: f64,
    cfg: &PricingConfig,
) -> PricingOutcome {
    let (o, d) = (graph.origin(), graph.dest());
    let mut out = PricingOutcome::default();
    if cfg.max_columns == 0 {
        return out;
    }
    let mut arena: Vec<Label> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut nondom: Vec<Vec<u32>> = vec![Vec::new(); graph.n_vertices()];
    // completed routes as (reduced cost, last label, arc), kept sorted
    let mut done: Vec<(f64, u32, u32)> = Vec::new();

    let prune_at = |done: &Vec<(f64, u32, u32)>| -> f64 {
        if done.len() >= cfg.max_columns {
            cfg.threshold.min(done[cfg.max_columns - 1].0)
        } else {
            cfg.threshold
        }
    };

    let key0 = fbc(0.0, capacity, bounds[o]);
    if key0 >= cfg.threshold {
        return out;
    }
    arena.push(Label {
        vertex: o as u32,
        parent: NONE,
        arc: NONE,
        cost: 0.0,
        level: capacity,
        alive: true,
    });
    heap.push(Entry {
        key: key0,
        seq,
        label: 0,
    });
    seq += 1;

    while let Some(Entry { key, label, .. }) = heap.pop() {
        let bound = prune_at(&done);
        if key >= bound {
            break;
        }
        let p = arena[label as usize];
        if !p.alive {
            continue;
        }
        for &i in graph.out_arcs(p.vertex as usize) {
            let i = i as usize;
            let w = graph.arc(i).head as usize;
            let level = graph.charge(i).fc(p.level);
            if level == f64::NEG_INFINITY {
                continue;
            }
            let cost = p.cost + rc[i];
            let k = fbc(cost, level, bounds[w]);
            let bound = prune_at(&done);
            if !(k < bound) {
                continue;
            }
            if w == d {
                let pos = done.partition_point(|e| e.0 <= cost);
                done.insert(pos, (cost, label, i as u32));
                done.truncate(cfg.max_columns);
                continue;
            }
            let list = &nondom[w];
            if list.iter().any(|&q| {
                let q = &arena[q as usize];
                q.cost <= cost && q.level >= level
            }) {
                continue;
            }
            let id = arena.len() as u32;
            let list = &mut nondom[w];
            list.retain(|&q| {
                let ql = &mut arena[q as usize];
                let beaten = cost <= ql.cost && level >= ql.level;
                if beaten {
                    ql.alive = false;
                }
                !beaten
            });
            let at = list.partition_point(|&q| arena[q as usize].cost <= cost);
            list.insert(at, id);
            arena.push(Label {
                vertex: w as u32,
                parent: label,
                arc: i as u32,
                cost,
                level,
                alive: true,
            });
            heap.push(Entry {
                key: k,
                seq,
                label: id,
            });
            seq += 1;
            if arena.len() >= cfg.label_limit {
                out.truncated = true;
                break;
            }
        }
        if out.truncated {
            break;
        }
    }
    out.labels = arena.len();

    for (rcost, last, arc) in done {
        let mut local = vec![arc];
        let mut cur = last;
        while arena[cur as usize].parent != NONE {
            local.push(arena[cur as usize].arc);
            cur = arena[cur as usize].parent;
        }
        local.reverse();
        let route = route_from_local(graph, &local, fixed_cost);
        out.routes.push(PricedRoute {
            route,
            reduced_cost: rcost,
        });
    }
    out
}

/// Route built from local arc indices of `graph`.
pub fn route_from_local(graph: &DepotGraph, local: &[u32], fixed_cost: f64) -> Route {
    let mut cost = fixed_cost;
    let mut services = Vec::new();
    let mut arcs = Vec::with_capacity(local.len());
    for &i in local {
        let a = graph.arc(i as usize);
        cost += graph.charge(i as usize).cost();
        arcs.push(a.id);
        if let Some(s) = graph.service(a.head as usize) {
            services.push(s);
        }
    }
    Route {
        depot: graph.depot,
        arcs,
        services,
        cost,
    }
}

/// Price one depot graph from scratch: reduced costs, bounds, enumeration.
pub fn price_graph(
    graph: &DepotGraph,
    capacity: f64,
    fixed_cost: f64,
    duals: Duals<'_>,
    cfg: &PricingConfig,
) -> PricingOutcome {
    let rc = reduced_costs(graph, fixed_cost, duals);
    let bounds = compute_bounds(graph, &rc, capacity);
    price(graph, &rc, &bounds, capacity, fixed_cost, cfg)
}
