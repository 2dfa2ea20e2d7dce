use super::simulate::{just_enough_dwell, simulate_schedule, Legs};
use crate::model::{Battery, Element, Instance};
use crate::solution::{RouteRecord, SolutionFile};
use serde::{Deserialize, Serialize};

const COST_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Bad index or arc count.
    Structure,
    /// A service is missing or served twice.
    Coverage,
    TimeWindow,
    Battery,
    Cost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub route: Option<usize>,
    /// Arc index within the route.
    pub arc: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub recomputed_cost: f64,
    pub claimed_cost: f64,
    pub violation: Option<Violation>,
    /// Battery level at the end of every route element after the depot.
    pub traces: Vec<Vec<f64>>,
}

struct Checker<'a> {
    inst: &'a Instance,
    battery: Battery,
    violation: Option<Violation>,
}

impl Checker<'_> {
    fn fail(
        &mut self,
        kind: ViolationKind,
        route: Option<usize>,
        arc: Option<usize>,
        detail: String,
    ) {
        if self.violation.is_none() {
            self.violation = Some(Violation {
                kind,
                route,
                arc,
                detail,
            });
        }
    }

    /// Battery trace and recomputed cost of one route; `None` on violation.
    fn route(
        &mut self,
        ri: usize,
        depot: usize,
        services: &[usize],
        stations: &[Vec<usize>],
        capacity: f64,
    ) -> Option<(f64, Vec<f64>)> {
        let inst = self.inst;
        if depot >= inst.n_depots() {
            self.fail(
                ViolationKind::Structure,
                Some(ri),
                None,
                format!("unknown depot {depot}"),
            );
            return None;
        }
        if services.is_empty() || stations.len() != services.len() + 1 {
            self.fail(
                ViolationKind::Structure,
                Some(ri),
                None,
                format!(
                    "{} services need {} arcs, got {}",
                    services.len(),
                    services.len() + 1,
                    stations.len()
                ),
            );
            return None;
        }
        if let Some(&s) = services.iter().find(|&&s| s >= inst.n_services()) {
            self.fail(
                ViolationKind::Structure,
                Some(ri),
                None,
                format!("unknown service {s}"),
            );
            return None;
        }
        let mut chain = vec![Element::Depot(depot)];
        chain.extend(services.iter().map(|&s| Element::Service(s)));
        chain.push(Element::Depot(depot));

        let mut cost = inst.vehicle.fixed_cost;
        let mut level = capacity;
        let mut trace = Vec::new();
        for (ai, st) in stations.iter().enumerate() {
            if let Some(&s) = st.iter().find(|&&s| s >= inst.n_stations()) {
                self.fail(
                    ViolationKind::Structure,
                    Some(ri),
                    Some(ai),
                    format!("unknown station {s}"),
                );
                return None;
            }
            let (tail, head) = (chain[ai], chain[ai + 1]);
            let mut points = vec![tail];
            points.extend(st.iter().map(|&s| Element::Station(s)));
            points.push(head);
            let travel: Vec<f64> = points.windows(2).map(|w| inst.time(w[0], w[1])).collect();
            let energy: Vec<f64> = points
                .windows(2)
                .map(|w| inst.energy_between(w[0], w[1]))
                .collect();
            cost += points
                .windows(2)
                .map(|w| inst.travel(w[0], w[1]))
                .sum::<f64>();
            if let Element::Service(s) = head {
                cost += inst.services[s].cost;
            }
            let depart = match tail {
                Element::Service(s) => inst.services[s].t_end,
                _ => 0.0,
            };
            let deadline = match head {
                Element::Service(s) => inst.services[s].t_begin,
                _ => inst.horizon_end,
            };
            let need: f64 = travel.iter().sum();
            if depart + need > deadline + 1e-6 {
                self.fail(
                    ViolationKind::TimeWindow,
                    Some(ri),
                    Some(ai),
                    format!("needs {need} minutes between {depart} and {deadline}"),
                );
                return None;
            }
            let legs = Legs {
                depart,
                deadline,
                travel,
                energy,
                head_energy: match head {
                    Element::Service(s) => inst.services[s].energy,
                    _ => 0.0,
                },
            };
            let out = just_enough_dwell(&self.battery, &legs, level)
                .map(|d| simulate_schedule(&self.battery, &legs, &d, level).level_out)
                .unwrap_or(f64::NEG_INFINITY);
            if out == f64::NEG_INFINITY {
                self.fail(
                    ViolationKind::Battery,
                    Some(ri),
                    Some(ai),
                    format!("battery runs out entering with {level}"),
                );
                return None;
            }
            level = out;
            trace.push(level);
        }
        Some((cost, trace))
    }
}

/// Check one route on its own: structure, time windows and battery.
/// Returns the recomputed cost and the battery trace.
pub fn validate_route(inst: &Instance, route: &RouteRecord) -> Result<(f64, Vec<f64>), Violation> {
    let battery = inst.battery().map_err(|e| Violation {
        kind: ViolationKind::Structure,
        route: None,
        arc: None,
        detail: e.to_string(),
    })?;
    let capacity = battery.capacity();
    let mut ck = Checker {
        inst,
        battery,
        violation: None,
    };
    let stations: Vec<Vec<usize>> = route.arcs.iter().map(|a| a.stations.clone()).collect();
    match ck.route(0, route.depot, &route.services, &stations, capacity) {
        Some(out) => Ok(out),
        None => Err(ck.violation.expect("failed routes record a violation")),
    }
}

/// Check a solution file against an instance: structure, coverage, time
/// windows, battery feasibility under the best schedule, and costs.
pub fn validate(inst: &Instance, sol: &SolutionFile) -> ValidationReport {
    let (battery, error) = match inst.battery() {
        Ok(b) => (b, None),
        Err(e) => (Battery::linear(1.0, 1.0), Some(e.to_string())),
    };
    let capacity = battery.capacity();
    let mut ck = Checker {
        inst,
        battery,
        violation: None,
    };
    if let Some(e) = error {
        ck.fail(ViolationKind::Structure, None, None, e);
    }
    let mut total = 0.0;
    let mut traces = Vec::new();
    let mut served = vec![0usize; inst.n_services()];
    if ck.violation.is_none() {
        for (ri, r) in sol.routes.iter().enumerate() {
            let stations: Vec<Vec<usize>> = r.arcs.iter().map(|a| a.stations.clone()).collect();
            let Some((cost, trace)) = ck.route(ri, r.depot, &r.services, &stations, capacity)
            else {
                break;
            };
            if (cost - r.cost).abs() > COST_TOL {
                ck.fail(
                    ViolationKind::Cost,
                    Some(ri),
                    None,
                    format!("claimed {} but route costs {cost}", r.cost),
                );
            }
            for &s in &r.services {
                served[s] += 1;
            }
            total += cost;
            traces.push(trace);
        }
    }
    if ck.violation.is_none() {
        if let Some((s, &n)) = served.iter().enumerate().find(|(_, &n)| n != 1) {
            ck.fail(
                ViolationKind::Coverage,
                None,
                None,
                format!("service {s} served {n} times"),
            );
        }
    }
    if ck.violation.is_none() && (total - sol.cost).abs() > COST_TOL {
        ck.fail(
            ViolationKind::Cost,
            None,
            None,
            format!("claimed total {} but routes cost {total}", sol.cost),
        );
    }
    if ck.violation.is_none() && sol.vehicles != sol.routes.len() {
        ck.fail(
            ViolationKind::Structure,
            None,
            None,
            format!(
                "claims {} vehicles for {} routes",
                sol.vehicles,
                sol.routes.len()
            ),
        );
    }
    ValidationReport {
        feasible: ck.violation.is_none(),
        recomputed_cost: total,
        claimed_cost: sol.cost,
        violation: ck.violation,
        traces,
    }
}
