//! Graph sparsification: keep, per arc class, the few best arcs leaving and
//! entering each vertex.

use crate::charge_arcs::{lost_time, DepotGraph, Network};
use crate::model::{Battery, Element, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which time gap enters the goodness of service-to-service arcs without
/// a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlackTerm {
    /// Idle gap `t_begin(head) - t_end(tail)`, as for charging arcs.
    #[default]
    Gap,
    /// `t_end(head) - t_begin(tail)`.
    Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparsifyConfig {
    /// Arcs kept per vertex and direction for the classes: depot arcs
    /// without station, depot arcs with stations, service arcs without
    /// station, service arcs with stations.
    pub keep: [usize; 4],
    pub slack_weight: f64,
    pub lost_time_weight: f64,
    pub slack_term: SlackTerm,
    pub seed: u64,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        SparsifyConfig {
            keep: [2, 2, 15, 2],
            slack_weight: 0.1,
            lost_time_weight: 0.1,
            slack_term: SlackTerm::Gap,
            seed: 0,
        }
    }
}

/// Arc class index in `0..4`.
pub fn arc_class(tail: Element, head: Element, charging: bool) -> usize {
    let depot = matches!(tail, Element::Depot(_)) || matches!(head, Element::Depot(_));
    match (depot, charging) {
        (true, false) => 0,
        (true, true) => 1,
        (false, false) => 2,
        (false, true) => 3,
    }
}

/// Goodness score of local arc `i` (smaller is better).
pub fn goodness(
    inst: &Instance,
    battery: &Battery,
    graph: &DepotGraph,
    i: usize,
    cfg: &SparsifyConfig,
) -> f64 {
    let a = graph.charge(i);
    let class = arc_class(a.tail(), a.head(), a.is_charging());
    let gap = a.seq.deadline - a.seq.depart;
    match class {
        0 | 1 => a.cost(),
        2 => {
            let slack = match cfg.slack_term {
                SlackTerm::Gap => gap,
                SlackTerm::Span => inst.t_end(a.head()) - inst.t_begin(a.tail()),
            };
            a.cost() + cfg.slack_weight * slack
        }
        _ => {
            let lost = lost_time(battery, &a.seq).unwrap_or(0.0);
            a.cost() + cfg.slack_weight * gap + cfg.lost_time_weight * lost
        }
    }
}

/// Keep arc `a` of class `i` iff it is among the `keep[i]` best arcs of
/// that class leaving its tail, or among the `keep[i]` best entering its
/// head. Ties are ordered by a seeded random key per shared arc.
pub fn sparsify(
    inst: &Instance,
    battery: &Battery,
    graph: &DepotGraph,
    cfg: &SparsifyConfig,
) -> DepotGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tie: Vec<u64> = (0..graph.store().len()).map(|_| rng.gen()).collect();

    let n = graph.n_arcs();
    let mut class = Vec::with_capacity(n);
    let mut score = Vec::with_capacity(n);
    for i in 0..n {
        let a = graph.charge(i);
        class.push(arc_class(a.tail(), a.head(), a.is_charging()));
        score.push(goodness(inst, battery, graph, i, cfg));
    }
    let better = |x: u32, y: u32| {
        let (x, y) = (x as usize, y as usize);
        score[x]
            .total_cmp(&score[y])
            .then(tie[graph.arc(x).id as usize].cmp(&tie[graph.arc(y).id as usize]))
    };

    let mut keep = vec![false; n];
    for v in 0..graph.n_vertices() {
        for list in [graph.out_arcs(v), graph.in_arcs(v)] {
            for c in 0..4 {
                let mut members: Vec<u32> = list
                    .iter()
                    .copied()
                    .filter(|&i| class[i as usize] == c)
                    .collect();
                members.sort_by(|&x, &y| better(x, y));
                for &i in members.iter().take(cfg.keep[c]) {
                    keep[i as usize] = true;
                }
            }
        }
    }
    graph.restrict(|i, _| keep[i])
}

/// Sparsify every depot graph of a network.
pub fn sparsify_network(inst: &Instance, net: &Network, cfg: &SparsifyConfig) -> Network {
    let graphs = net
        .graphs
        .par_iter()
        .map(|g| sparsify(inst, &net.battery, g, cfg))
        .collect();
    Network {
        battery: net.battery.clone(),
        store: net.store.clone(),
        graphs,
    }
}
