use super::pareto::{enumerate_nondominated, SequenceLimits};
use super::ChargeArc;
use crate::error::ModelError;
use crate::model::{Battery, Element, Instance, FEAS_EPS};
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

/// An arc of a depot graph, pointing into the shared arc store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphArc {
    /// Index in the shared store.
    pub id: u32,
    pub tail: u32,
    pub head: u32,
}

/// Acyclic multigraph of one depot. Vertices `0..n` are the services, `n`
/// is the origin and `n + 1` the destination.
#[derive(Debug, Clone)]
pub struct DepotGraph {
    pub depot: usize,
    n_services: usize,
    store: Arc<Vec<ChargeArc>>,
    arcs: Vec<GraphArc>,
    out: Vec<Vec<u32>>,
    inn: Vec<Vec<u32>>,
    topo: Arc<Vec<u32>>,
}

impl DepotGraph {
    fn assemble(
        depot: usize,
        n_services: usize,
        store: Arc<Vec<ChargeArc>>,
        arcs: Vec<GraphArc>,
        topo: Arc<Vec<u32>>,
    ) -> Self {
        let nv = n_services + 2;
        let mut out = vec![Vec::new(); nv];
        let mut inn = vec![Vec::new(); nv];
        for (i, a) in arcs.iter().enumerate() {
            out[a.tail as usize].push(i as u32);
            inn[a.head as usize].push(i as u32);
        }
        DepotGraph {
            depot,
            n_services,
            store,
            arcs,
            out,
            inn,
            topo,
        }
    }

    #[inline]
    pub fn origin(&self) -> usize {
        self.n_services
    }

    #[inline]
    pub fn dest(&self) -> usize {
        self.n_services + 1
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.n_services + 2
    }

    #[inline]
    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    #[inline]
    pub fn arcs(&self) -> &[GraphArc] {
        &self.arcs
    }

    #[inline]
    pub fn arc(&self, i: usize) -> GraphArc {
        self.arcs[i]
    }

    /// Charge data of local arc `i`.
    #[inline]
    pub fn charge(&self, i: usize) -> &ChargeArc {
        &self.store[self.arcs[i].id as usize]
    }

    #[inline]
    pub fn out_arcs(&self, v: usize) -> &[u32] {
        &self.out[v]
    }

    #[inline]
    pub fn in_arcs(&self, v: usize) -> &[u32] {
        &self.inn[v]
    }

    /// Vertices in topological order, origin first and destination last.
    pub fn topo_order(&self) -> &[u32] {
        &self.topo
    }

    /// Service of a vertex, `None` for origin and destination.
    pub fn service(&self, v: usize) -> Option<usize> {
        (v < self.n_services).then_some(v)
    }

    pub fn store(&self) -> &Arc<Vec<ChargeArc>> {
        &self.store
    }

    /// Subgraph keeping the arcs accepted by `keep` (called with the local
    /// index and the arc).
    pub fn restrict(&self, mut keep: impl FnMut(usize, &GraphArc) -> bool) -> DepotGraph {
        let arcs = self
            .arcs
            .iter()
            .enumerate()
            .filter(|(i, a)| keep(*i, a))
            .map(|(_, a)| *a)
            .collect();
        DepotGraph::assemble(
            self.depot,
            self.n_services,
            self.store.clone(),
            arcs,
            self.topo.clone(),
        )
    }

    /// Line-oriented dump: tail, head, stations, cost and the charge map
    /// summary (minimal entry level, exit level from full, gain at minimum).
    pub fn dump(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "# depot {} vertices {} arcs {}",
            self.depot,
            self.n_vertices(),
            self.n_arcs()
        )?;
        for (i, a) in self.arcs.iter().enumerate() {
            let c = self.charge(i);
            let stations: Vec<String> = c.seq.stations.iter().map(|s| s.to_string()).collect();
            let min_in = c.maps.min_in();
            let gain = c.fc(min_in) - min_in;
            writeln!(
                w,
                "{} {} [{}] {:.6} {:.6} {:.6} {:.6}",
                self.vertex_name(a.tail as usize),
                self.vertex_name(a.head as usize),
                stations.join(","),
                c.cost(),
                min_in,
                c.maps.max_out(),
                gain
            )?;
        }
        Ok(())
    }

    fn vertex_name(&self, v: usize) -> String {
        if v == self.origin() {
            "o".into()
        } else if v == self.dest() {
            "d".into()
        } else {
            v.to_string()
        }
    }
}

/// All depot graphs of an instance over one shared arc store.
#[derive(Debug, Clone)]
pub struct Network {
    pub battery: Battery,
    pub store: Arc<Vec<ChargeArc>>,
    pub graphs: Vec<DepotGraph>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct NetworkStats {
    pub arcs: usize,
    pub charging_arcs: usize,
    /// Service pairs joined by at least one arc.
    pub connected_pairs: usize,
    /// Charging arcs per connected service pair.
    pub sequences_per_pair: f64,
}

impl Network {
    pub fn total_arcs(&self) -> usize {
        self.graphs.iter().map(DepotGraph::n_arcs).sum()
    }

    /// Store arcs used by at least one depot graph. Service-to-service arcs
    /// shared by several depots count once.
    pub fn distinct_arcs(&self) -> usize {
        let mut used = vec![false; self.store.len()];
        for g in &self.graphs {
            for a in g.arcs() {
                used[a.id as usize] = true;
            }
        }
        used.into_iter().filter(|&u| u).count()
    }

    pub fn stats(&self) -> NetworkStats {
        let mut s = NetworkStats {
            arcs: self.total_arcs(),
            ..Default::default()
        };
        let mut pair_arcs = 0usize;
        let mut last = None;
        for a in self.store.iter() {
            if a.is_charging() {
                s.charging_arcs += 1;
            }
            if let (Element::Service(u), Element::Service(v)) = (a.tail(), a.head()) {
                if last != Some((u, v)) {
                    s.connected_pairs += 1;
                    last = Some((u, v));
                }
                if a.is_charging() {
                    pair_arcs += 1;
                }
            }
        }
        if s.connected_pairs > 0 {
            s.sequences_per_pair = pair_arcs as f64 / s.connected_pairs as f64;
        }
        s
    }
}

/// Ordering key that makes service-to-service arcs acyclic even with
/// zero-length services and zero travel times.
fn order_key(inst: &Instance, i: usize) -> (f64, f64, usize) {
    let s = &inst.services[i];
    (s.t_begin, s.t_end, i)
}

fn precedes(inst: &Instance, u: usize, v: usize) -> bool {
    let (a, b) = (order_key(inst, u), order_key(inst, v));
    let before = a.0 < b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 < b.2)));
    before && inst.services[u].t_end <= inst.services[v].t_begin + FEAS_EPS
}

/// Enumerate every non-dominated arc and assemble one graph per depot.
/// Work is spread over the current rayon pool; the result does not depend
/// on the number of threads.
pub fn build_network(inst: &Instance, limits: SequenceLimits) -> Result<Network, ModelError> {
    inst.validate()?;
    let battery = inst.battery()?;
    let n = inst.n_services();

    let service_arcs: Vec<Vec<ChargeArc>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut out = Vec::new();
            for v in 0..n {
                if u != v && precedes(inst, u, v) {
                    out.extend(enumerate_nondominated(
                        inst,
                        &battery,
                        Element::Service(u),
                        Element::Service(v),
                        limits,
                    ));
                }
            }
            out
        })
        .collect();
    let depot_arcs: Vec<(Vec<ChargeArc>, Vec<ChargeArc>)> = (0..inst.n_depots())
        .into_par_iter()
        .map(|d| {
            let dep = Element::Depot(d);
            let pull: Vec<ChargeArc> = (0..n)
                .flat_map(|v| {
                    enumerate_nondominated(inst, &battery, dep, Element::Service(v), limits)
                })
                .collect();
            let push: Vec<ChargeArc> = (0..n)
                .flat_map(|v| {
                    enumerate_nondominated(inst, &battery, Element::Service(v), dep, limits)
                })
                .collect();
            (pull, push)
        })
        .collect();

    let mut store: Vec<ChargeArc> = service_arcs.into_iter().flatten().collect();
    let shared = store.len();
    let mut depot_ranges = Vec::new();
    for (pull, push) in depot_arcs {
        let start = store.len();
        store.extend(pull);
        store.extend(push);
        depot_ranges.push(start..store.len());
    }
    let store = Arc::new(store);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (order_key(inst, a), order_key(inst, b));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.cmp(&kb.2))
    });
    let mut topo = vec![n as u32];
    topo.extend(order.iter().map(|&v| v as u32));
    topo.push(n as u32 + 1);
    let topo = Arc::new(topo);

    let vertex = |e: Element| -> u32 {
        match e {
            Element::Service(i) => i as u32,
            _ => unreachable!("station or depot endpoint handled by caller"),
        }
    };
    let graphs = depot_ranges
        .into_iter()
        .enumerate()
        .map(|(d, range)| {
            let mut arcs: Vec<GraphArc> = (0..shared)
                .map(|id| GraphArc {
                    id: id as u32,
                    tail: vertex(store[id].tail()),
                    head: vertex(store[id].head()),
                })
                .collect();
            for id in range {
                let a = &store[id];
                let (tail, head) = match (a.tail(), a.head()) {
                    (Element::Depot(_), h) => (n as u32, vertex(h)),
                    (t, Element::Depot(_)) => (vertex(t), n as u32 + 1),
                    _ => unreachable!("depot range holds depot arcs only"),
                };
                arcs.push(GraphArc {
                    id: id as u32,
                    tail,
                    head,
                });
            }
            DepotGraph::assemble(d, n, store.clone(), arcs, topo.clone())
        })
        .collect();
    Ok(Network {
        battery,
        store,
        graphs,
    })
}
