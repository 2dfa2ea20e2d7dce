//! Diving heuristic: repeatedly solve the master by column generation and
//! fix routes with large values, evaluating a few candidates by their
//! resulting LP value during the first steps.

use super::{Solution, INT_TOL};
use crate::charge_arcs::Network;
use crate::error::SolveError;
use crate::master::{
    deadline_after, singleton_routes, CgConfig, CgOutcome, CgStatus, IterationLog, Master,
    Restrictions,
};
use crate::model::Instance;
use crate::pricing::Route;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiveConfig {
    /// Number of strong diving steps.
    pub strong_depth: usize,
    /// Candidates evaluated per strong step.
    pub strong_candidates: usize,
    /// Routes fixed per regular step.
    pub max_routes: usize,
    /// Seed every master with one single-service route per service.
    pub singletons: bool,
    pub seed: u64,
    pub cg: CgConfig,
    #[serde(with = "super::opt_secs")]
    pub time_limit: Option<Duration>,
}

impl Default for DiveConfig {
    fn default() -> Self {
        DiveConfig {
            strong_depth: 2,
            strong_candidates: 2,
            max_routes: 1,
            singletons: true,
            seed: 0,
            cg: CgConfig::default(),
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiveStatus {
    Feasible,
    /// Column generation found no feasible master after some fixing.
    Infeasible,
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiveOutcome {
    pub status: DiveStatus,
    pub solution: Option<Solution>,
    /// Root LP value over the arcs of the network given.
    pub root_value: f64,
    /// Search nodes, i.e. masters solved (strong candidates included).
    pub nodes: usize,
    /// Column generation log of every master solved.
    pub log: Vec<IterationLog>,
}

struct Diver<'a> {
    inst: &'a Instance,
    net: &'a Network,
    cfg: &'a DiveConfig,
    pool: Vec<Route>,
    pooled: HashSet<(usize, Vec<u32>)>,
    deadline: Option<Instant>,
    nodes: usize,
    log: Vec<IterationLog>,
}

impl Diver<'_> {
    /// Build a fresh master without the covered services and solve it.
    fn solve(&mut self, covered: &[usize]) -> Result<(CgOutcome, Vec<Route>), SolveError> {
        self.nodes += 1;
        let restrictions = Restrictions {
            covered: covered.to_vec(),
            ..Default::default()
        };
        let mut master = Master::new(self.inst, self.net, restrictions);
        if self.cfg.singletons {
            for r in singleton_routes(self.inst, master.network()) {
                master.add_route(r);
            }
        }
        for r in &self.pool {
            master.add_route(r.clone());
        }
        let out = master.column_generation(&self.cfg.cg, self.deadline)?;
        self.log.extend(master.log.iter().map(|l| IterationLog {
            node: self.nodes - 1,
            ..l.clone()
        }));
        for r in master.pool() {
            if self.pooled.insert((r.depot, r.arcs.clone())) {
                self.pool.push(r.clone());
            }
        }
        Ok((out, master.pool().to_vec()))
    }
}

/// Pool columns in decreasing order of value, ties in seeded random order.
fn ranked(pool: &[Route], x: &[f64], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool.len()).filter(|&i| x[i] > INT_TOL).collect();
    idx.shuffle(rng);
    idx.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    idx
}

fn extend_covered(covered: &mut Vec<usize>, r: &Route) {
    covered.extend(&r.services);
    covered.sort_unstable();
}

/// Dive from the root over the arcs of `net`.
pub fn dive(inst: &Instance, net: &Network, cfg: &DiveConfig) -> Result<DiveOutcome, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut d = Diver {
        inst,
        net,
        cfg,
        pool: Vec::new(),
        pooled: HashSet::new(),
        deadline: deadline_after(cfg.time_limit),
        nodes: 0,
        log: Vec::new(),
    };
    let n = inst.n_services();
    let mut fixed: Vec<Route> = Vec::new();
    let mut covered: Vec<usize> = Vec::new();
    let mut root_value = f64::NAN;
    let mut step = 0usize;
    let finish = |status, fixed: Vec<Route>, root_value, d: &mut Diver| {
        let solution = (status == DiveStatus::Feasible).then(|| Solution::new(fixed));
        Ok(DiveOutcome {
            status,
            solution,
            root_value,
            nodes: d.nodes,
            log: std::mem::take(&mut d.log),
        })
    };

    let (mut cg, mut pool) = d.solve(&covered)?;
    loop {
        match cg.status {
            CgStatus::Infeasible => {
                return finish(DiveStatus::Infeasible, fixed, root_value, &mut d)
            }
            CgStatus::Limit => return finish(DiveStatus::Limit, fixed, root_value, &mut d),
            CgStatus::Converged => {}
        }
        if step == 0 {
            root_value = cg.value;
        }
        step += 1;

        // columns at one are fixed for free
        let mut progressed = false;
        for (r, &v) in pool.iter().zip(&cg.x) {
            if v >= 1.0 - INT_TOL {
                extend_covered(&mut covered, r);
                fixed.push(r.clone());
                progressed = true;
            }
        }
        if covered.len() == n {
            return finish(DiveStatus::Feasible, fixed, root_value, &mut d);
        }
        let order: Vec<usize> = ranked(&pool, &cg.x, &mut rng)
            .into_iter()
            .filter(|&i| cg.x[i] < 1.0 - INT_TOL)
            .collect();
        if order.is_empty() {
            if progressed {
                (cg, pool) = d.solve(&covered)?;
                continue;
            }
            return finish(DiveStatus::Infeasible, fixed, root_value, &mut d);
        }

        if step <= cfg.strong_depth && cfg.strong_candidates > 0 {
            let mut best: Option<(f64, usize, CgOutcome, Vec<Route>)> = None;
            for &i in order.iter().take(cfg.strong_candidates) {
                let mut trial = covered.clone();
                extend_covered(&mut trial, &pool[i]);
                let (out, tpool) = d.solve(&trial)?;
                if out.status == CgStatus::Limit {
                    return finish(DiveStatus::Limit, fixed, root_value, &mut d);
                }
                if out.status != CgStatus::Converged {
                    continue;
                }
                let value = pool[i].cost + out.value;
                if best.as_ref().is_none_or(|b| value < b.0) {
                    best = Some((value, i, out, tpool));
                }
            }
            if let Some((_, i, out, tpool)) = best {
                extend_covered(&mut covered, &pool[i]);
                fixed.push(pool[i].clone());
                if covered.len() == n {
                    return finish(DiveStatus::Feasible, fixed, root_value, &mut d);
                }
                (cg, pool) = (out, tpool);
                continue;
            }
        }

        let mut taken = 0;
        for &i in &order {
            if taken >= cfg.max_routes.max(1) {
                break;
            }
            if pool[i]
                .services
                .iter()
                .any(|s| covered.binary_search(s).is_ok())
            {
                continue;
            }
            extend_covered(&mut covered, &pool[i]);
            fixed.push(pool[i].clone());
            taken += 1;
        }
        if covered.len() == n {
            return finish(DiveStatus::Feasible, fixed, root_value, &mut d);
        }
        (cg, pool) = d.solve(&covered)?;
    }
}
