use crate::error::SolveError;
use crate::master::{Restrictions, Sense};
use crate::pricing::Route;
use std::collections::BTreeMap;

const INT_TOL: f64 = 1e-6;

/// Branching decision on a fractional master solution.
#[derive(Debug, Clone, PartialEq)]
pub enum Branch {
    /// Vehicles of a depot: at most `floor` / at least `floor + 1`.
    DepotCount { depot: usize, value: f64 },
    /// Aggregated flow from service `u` to service `v` over all depots and arcs.
    Traversal { u: usize, v: usize, value: f64 },
    /// Flow of routes of `depot` starting with `service`.
    Start {
        depot: usize,
        service: usize,
        value: f64,
    },
}

fn fractionality(v: f64) -> Option<f64> {
    let f = v - v.floor();
    (f > INT_TOL && f < 1.0 - INT_TOL).then(|| (f - 0.5).abs())
}

/// Most fractional candidate: fractional part closest to 0.5, first key on ties.
fn most_fractional<K: Copy>(values: impl IntoIterator<Item = (K, f64)>) -> Option<(K, f64)> {
    let mut best: Option<(K, f64, f64)> = None;
    for (k, v) in values {
        if let Some(d) = fractionality(v) {
            if best.as_ref().is_none_or(|b| d < b.2) {
                best = Some((k, v, d));
            }
        }
    }
    best.map(|(k, v, _)| (k, v))
}

/// Vehicles used per depot.
pub fn depot_counts(pool: &[Route], x: &[f64], n_depots: usize) -> Vec<f64> {
    let mut c = vec![0.0; n_depots];
    for (r, &v) in pool.iter().zip(x) {
        c[r.depot] += v;
    }
    c
}

/// Flow on every consecutive service pair, summed over all routes.
pub fn traversal_flows(pool: &[Route], x: &[f64]) -> BTreeMap<(usize, usize), f64> {
    let mut m = BTreeMap::new();
    for (r, &v) in pool.iter().zip(x) {
        if v <= 0.0 {
            continue;
        }
        for w in r.services.windows(2) {
            *m.entry((w[0], w[1])).or_insert(0.0) += v;
        }
    }
    m
}

pub fn start_flows(pool: &[Route], x: &[f64]) -> BTreeMap<(usize, usize), f64> {
    let mut m = BTreeMap::new();
    for (r, &v) in pool.iter().zip(x) {
        if v > 0.0 {
            if let Some(&s) = r.services.first() {
                *m.entry((r.depot, s)).or_insert(0.0) += v;
            }
        }
    }
    m
}

/// Pick a branching decision: depot vehicle counts first, then service
/// traversals, then route starts. Fails when all three are integral.
pub fn select_branch(pool: &[Route], x: &[f64], n_depots: usize) -> Result<Branch, SolveError> {
    let counts = depot_counts(pool, x, n_depots);
    if let Some((depot, value)) = most_fractional(counts.into_iter().enumerate()) {
        return Ok(Branch::DepotCount { depot, value });
    }
    if let Some(((u, v), value)) = most_fractional(traversal_flows(pool, x)) {
        return Ok(Branch::Traversal { u, v, value });
    }
    if let Some(((depot, service), value)) = most_fractional(start_flows(pool, x)) {
        return Ok(Branch::Start {
            depot,
            service,
            value,
        });
    }
    Err(SolveError::IntegralSolution)
}

impl Branch {
    /// Restrictions of the two children: rounding down first, then up.
    pub fn children(&self, parent: &Restrictions) -> [Restrictions; 2] {
        let (mut down, mut up) = (parent.clone(), parent.clone());
        match *self {
            Branch::DepotCount { depot, value } => {
                down.depot_counts.push((depot, Sense::Le, value.floor()));
                up.depot_counts
                    .push((depot, Sense::Ge, value.floor() + 1.0));
            }
            Branch::Traversal { u, v, .. } => {
                down.forbidden_pairs.push((u, v));
                up.forced_pairs.push((u, v));
            }
            Branch::Start { depot, service, .. } => {
                down.forbidden_starts.push((depot, service));
                up.forced_starts.push((depot, service));
            }
        }
        [down, up]
    }
}

/// With integral depot counts, traversals and starts, every positive column
/// of a group sharing depot and service sequence is interchangeable. Pick
/// the cheapest column of each group.
pub fn integral_chains(pool: &[Route], x: &[f64]) -> Vec<Route> {
    let mut groups: BTreeMap<(usize, Vec<usize>), (f64, Route)> = BTreeMap::new();
    for (r, &v) in pool.iter().zip(x) {
        if v <= INT_TOL {
            continue;
        }
        let e = groups
            .entry((r.depot, r.services.clone()))
            .or_insert_with(|| (0.0, r.clone()));
        e.0 += v;
        if r.cost < e.1.cost {
            e.1 = r.clone();
        }
    }
    groups
        .into_values()
        .filter(|(v, _)| *v > 0.5)
        .map(|(_, r)| r)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn route(depot: usize, services: &[usize], cost: f64) -> Route {
        Route {
            depot,
            arcs: vec![],
            services: services.to_vec(),
            cost,
        }
    }

    #[test]
    fn integral_solution_has_no_branch() {
        let pool = vec![route(0, &[0, 1], 1.0), route(1, &[2], 1.0)];
        assert!(matches!(
            select_branch(&pool, &[1.0, 1.0], 2),
            Err(SolveError::IntegralSolution)
        ));
    }

    #[test]
    fn depot_count_children() {
        let pool = vec![
            route(0, &[0], 1.0),
            route(0, &[1], 1.0),
            route(0, &[0, 1], 1.0),
            route(0, &[2], 1.0),
            route(0, &[3], 1.0),
        ];
        // depot 0 at 2.5 vehicles
        let b = select_branch(&pool, &[0.5, 0.5, 0.5, 1.0, 0.0], 1).unwrap();
        assert_eq!(
            b,
            Branch::DepotCount {
                depot: 0,
                value: 2.5
            }
        );
        let [down, up] = b.children(&Restrictions::default());
        assert_eq!(down.depot_counts, vec![(0, Sense::Le, 2.0)]);
        assert_eq!(up.depot_counts, vec![(0, Sense::Ge, 3.0)]);
    }

    #[test]
    fn shared_traversal_is_chosen() {
        // two depots, one vehicle each, services 0..3 split two ways
        let pool = vec![
            route(0, &[0, 1], 1.0),
            route(1, &[2, 3], 1.0),
            route(0, &[0, 3], 1.0),
            route(1, &[2, 1], 1.0),
        ];
        let b = select_branch(&pool, &[0.5, 0.5, 0.5, 0.5], 2).unwrap();
        assert_eq!(
            b,
            Branch::Traversal {
                u: 0,
                v: 1,
                value: 0.5
            }
        );
    }

    #[test]
    fn start_rule_when_chains_are_integral() {
        let pool = vec![
            route(0, &[0], 1.0),
            route(1, &[0], 1.0),
            route(0, &[1], 1.0),
            route(1, &[1], 1.0),
        ];
        let b = select_branch(&pool, &[0.5, 0.5, 0.5, 0.5], 2).unwrap();
        assert_eq!(
            b,
            Branch::Start {
                depot: 0,
                service: 0,
                value: 0.5
            }
        );
    }
}
