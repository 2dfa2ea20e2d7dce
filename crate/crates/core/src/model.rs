//! Instance data and battery physics.
//!
//! Elements are indexed in one flat range: services first, then depots, then
//! stations. The three travel matrices use that order.

use crate::error::ModelError;
use serde::{Deserialize, Serialize};

/// Absolute tolerance used by every feasibility comparison on time and energy.
pub const FEAS_EPS: f64 = 1e-6;

/// `pos(l)`: keep non-negative levels, map negative ones to `-inf`.
///
/// Levels within [`FEAS_EPS`] below zero are snapped to zero.
#[inline]
pub fn pos(level: f64) -> f64 {
    if level >= 0.0 {
        level
    } else if level >= -FEAS_EPS {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Service {
    pub id: u32,
    pub t_begin: f64,
    pub t_end: f64,
    pub energy: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Depot {
    pub id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Station {
    pub id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub capacity: f64,
    pub fixed_cost: f64,
}

/// Piecewise-linear concave charge profile: level reached after charging
/// `t` minutes from an empty battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct ChargeCurve {
    points: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for ChargeCurve {
    type Error = ModelError;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        ChargeCurve::new(points)
    }
}

impl From<ChargeCurve> for Vec<(f64, f64)> {
    fn from(c: ChargeCurve) -> Self {
        c.points
    }
}

impl ChargeCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidCurve(m.to_string()));
        if points.len() < 2 {
            return bad("need at least two breakpoints");
        }
        if points[0] != (0.0, 0.0) {
            return bad("first breakpoint must be (0, 0)");
        }
        if points
            .iter()
            .any(|&(t, l)| !t.is_finite() || !l.is_finite())
        {
            return bad("breakpoints must be finite");
        }
        let mut prev_slope = f64::INFINITY;
        for w in points.windows(2) {
            let (t0, l0) = w[0];
            let (t1, l1) = w[1];
            if t1 <= t0 {
                return bad("times must be strictly increasing");
            }
            if l1 < l0 {
                return bad("levels must be non-decreasing");
            }
            let slope = (l1 - l0) / (t1 - t0);
            if slope > prev_slope * (1.0 + 1e-12) + 1e-12 {
                return bad("profile must be concave (slopes non-increasing)");
            }
            prev_slope = slope;
        }
        if points[1].1 <= 0.0 {
            return bad("first segment must charge");
        }
        Ok(ChargeCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Truncate the profile at `capacity`, appending the exact crossing point.
    fn clamped(&self, capacity: f64) -> ChargeCurve {
        let mut out = vec![(0.0, 0.0)];
        for w in self.points.windows(2) {
            let (t0, l0) = w[0];
            let (t1, l1) = w[1];
            if l1 >= capacity {
                if l0 < capacity {
                    let t = t0 + (capacity - l0) * (t1 - t0) / (l1 - l0);
                    out.push((t, capacity));
                }
                break;
            }
            out.push((t1, l1));
        }
        // drop trailing flat segments: after saturation the level stays put anyway
        while out.len() > 2 && out[out.len() - 1].1 <= out[out.len() - 2].1 {
            out.pop();
        }
        ChargeCurve { points: out }
    }

    fn level_at(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= 0.0 {
            return 0.0;
        }
        match pts.iter().position(|&(tt, _)| tt >= t) {
            None => pts[pts.len() - 1].1,
            Some(i) => {
                let (t0, l0) = pts[i - 1];
                let (t1, l1) = pts[i];
                l0 + (l1 - l0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Minimal time to reach `level` from empty; `level` must not exceed the
    /// saturation level.
    fn time_to(&self, level: f64) -> f64 {
        let pts = &self.points;
        if level <= 0.0 {
            return 0.0;
        }
        for w in pts.windows(2) {
            let (t0, l0) = w[0];
            let (t1, l1) = w[1];
            if level <= l1 && l1 > l0 {
                return t0 + (level - l0) * (t1 - t0) / (l1 - l0);
            }
        }
        f64::INFINITY
    }

    fn saturation(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }
}

/// Charge model shared by every station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChargeModel {
    /// Constant charge rate, energy per minute.
    Linear { rate: f64 },
    /// Concave piecewise-linear profile from an empty battery.
    General { profile: ChargeCurve },
}

/// Battery of capacity `M` together with its charge model. This is what
/// every arc computation needs; built once per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Battery {
    capacity: f64,
    kind: BatteryKind,
}

#[derive(Debug, Clone, PartialEq)]
enum BatteryKind {
    Linear { rate: f64 },
    General { curve: ChargeCurve },
}

impl Battery {
    pub fn new(capacity: f64, model: &ChargeModel) -> Result<Self, ModelError> {
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(ModelError::InvalidInstance {
                field: "vehicle.capacity".into(),
                reason: format!("must be positive and finite, got {capacity}"),
            });
        }
        let kind = match model {
            ChargeModel::Linear { rate } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(ModelError::InvalidInstance {
                        field: "charge_model.rate".into(),
                        reason: format!("must be positive, got {rate}"),
                    });
                }
                BatteryKind::Linear { rate: *rate }
            }
            ChargeModel::General { profile } => BatteryKind::General {
                curve: profile.clamped(capacity),
            },
        };
        Ok(Battery { capacity, kind })
    }

    pub fn linear(capacity: f64, rate: f64) -> Self {
        Battery::new(capacity, &ChargeModel::Linear { rate }).expect("valid linear battery")
    }

    #[inline]
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Charge rate when the model is linear.
    #[inline]
    pub fn linear_rate(&self) -> Option<f64> {
        match self.kind {
            BatteryKind::Linear { rate } => Some(rate),
            BatteryKind::General { .. } => None,
        }
    }

    /// Highest level reachable by charging. Equals the capacity unless a
    /// general profile flattens out below it.
    pub fn saturation_level(&self) -> f64 {
        match &self.kind {
            BatteryKind::Linear { .. } => self.capacity,
            BatteryKind::General { curve } => curve.saturation(),
        }
    }

    /// Level after charging `t` minutes from empty.
    pub fn level_after(&self, t: f64) -> f64 {
        match &self.kind {
            BatteryKind::Linear { rate } => (rate * t).clamp(0.0, self.capacity),
            BatteryKind::General { curve } => curve.level_at(t),
        }
    }

    /// Minimal time to charge from empty to `level`; `+inf` beyond saturation.
    pub fn time_from_empty(&self, level: f64) -> f64 {
        match &self.kind {
            BatteryKind::Linear { rate } => level.max(0.0) / rate,
            BatteryKind::General { curve } => {
                if level > curve.saturation() {
                    f64::INFINITY
                } else {
                    curve.time_to(level)
                }
            }
        }
    }

    /// Levels at which the charge profile bends (plus 0 and saturation).
    pub fn kink_levels(&self) -> Vec<f64> {
        match &self.kind {
            BatteryKind::Linear { .. } => vec![0.0, self.capacity],
            BatteryKind::General { curve } => curve.points.iter().map(|p| p.1).collect(),
        }
    }

    /// Charging durations from empty at which the profile bends.
    pub fn kink_times(&self) -> Vec<f64> {
        match &self.kind {
            BatteryKind::Linear { rate } => vec![0.0, self.capacity / rate],
            BatteryKind::General { curve } => curve.points.iter().map(|p| p.0).collect(),
        }
    }

    /// The flow `phi(level, duration)` without domain checks.
    #[inline]
    pub fn flow(&self, level: f64, duration: f64) -> f64 {
        match &self.kind {
            BatteryKind::Linear { rate } => (level + rate * duration).min(self.capacity).max(0.0),
            BatteryKind::General { curve } => {
                if level >= curve.saturation() {
                    level
                } else {
                    curve.level_at(curve.time_to(level) + duration).max(level)
                }
            }
        }
    }

    /// Signed charge time between two levels without domain checks. May be
    /// `+inf` (target above saturation) or `-inf` (the mirrored case).
    #[inline]
    pub fn charge_time(&self, from: f64, to: f64) -> f64 {
        if from > to {
            return -self.charge_time(to, from);
        }
        if from == to {
            return 0.0;
        }
        match &self.kind {
            BatteryKind::Linear { rate } => (to - from) / rate,
            BatteryKind::General { curve } => {
                if to > curve.saturation() {
                    f64::INFINITY
                } else {
                    curve.time_to(to) - curve.time_to(from)
                }
            }
        }
    }

    fn check_level(&self, level: f64) -> Result<(), ModelError> {
        if level.is_nan() || level < 0.0 || level > self.capacity {
            Err(ModelError::LevelOutOfRange {
                level,
                capacity: self.capacity,
            })
        } else {
            Ok(())
        }
    }

    /// Level after charging `duration` minutes from `level`.
    pub fn phi(&self, level: f64, duration: f64) -> Result<f64, ModelError> {
        self.check_level(level)?;
        if duration.is_nan() || duration < 0.0 {
            return Err(ModelError::NegativeDuration(duration));
        }
        Ok(self.flow(level, duration))
    }

    /// Signed minimal charge time from `from` to `to`. Returns `+inf` when the
    /// target lies above the saturation level of a general profile.
    pub fn tau_ch(&self, from: f64, to: f64) -> Result<f64, ModelError> {
        self.check_level(from)?;
        self.check_level(to)?;
        Ok(self.charge_time(from, to))
    }

    /// Preorder on (level, time) pairs: `(l, t) <= (l2, t2)` iff charging from
    /// `l` at `t` cannot beat `l2` at `t2`. `-inf` levels are the bottom.
    pub fn state_le(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let (l, t) = a;
        let (l2, t2) = b;
        if l == f64::NEG_INFINITY {
            return true;
        }
        if l2 == f64::NEG_INFINITY {
            return false;
        }
        t + self.charge_time(l, l2) >= t2 - FEAS_EPS
    }
}

/// Square matrix over all elements, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(format!("row {i} has {} entries, expected {n}", r.len()));
            }
            data.extend(r);
        }
        Ok(Matrix { n, data })
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Matrix {
            n,
            data: vec![value; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(|c| c.to_vec())
            .take(self.n)
            .collect()
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// A location in the flat element range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Service(usize),
    Depot(usize),
    Station(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    #[serde(default)]
    pub name: String,
    pub horizon_end: f64,
    pub vehicle: VehicleSpec,
    pub charge_model: ChargeModel,
    /// Reserve level kept in the battery at all times; the usable capacity
    /// is `capacity - reserve_level`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub reserve_level: f64,
    pub services: Vec<Service>,
    pub depots: Vec<Depot>,
    pub stations: Vec<Station>,
    pub travel_time: Matrix,
    pub travel_cost: Matrix,
    pub travel_energy: Matrix,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Instance {
    pub fn n_services(&self) -> usize {
        self.services.len()
    }

    pub fn n_depots(&self) -> usize {
        self.depots.len()
    }

    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn n_elements(&self) -> usize {
        self.services.len() + self.depots.len() + self.stations.len()
    }

    #[inline]
    pub fn index(&self, e: Element) -> usize {
        match e {
            Element::Service(i) => i,
            Element::Depot(d) => self.services.len() + d,
            Element::Station(s) => self.services.len() + self.depots.len() + s,
        }
    }

    pub fn element(&self, idx: usize) -> Element {
        let t = self.services.len();
        let d = self.depots.len();
        if idx < t {
            Element::Service(idx)
        } else if idx < t + d {
            Element::Depot(idx - t)
        } else {
            Element::Station(idx - t - d)
        }
    }

    /// Start time; depots use the end of the horizon.
    pub fn t_begin(&self, e: Element) -> f64 {
        match e {
            Element::Service(i) => self.services[i].t_begin,
            Element::Depot(_) => self.horizon_end,
            Element::Station(_) => 0.0,
        }
    }

    /// End time; depots use time zero.
    pub fn t_end(&self, e: Element) -> f64 {
        match e {
            Element::Service(i) => self.services[i].t_end,
            Element::Depot(_) | Element::Station(_) => 0.0,
        }
    }

    pub fn energy(&self, e: Element) -> f64 {
        match e {
            Element::Service(i) => self.services[i].energy,
            _ => 0.0,
        }
    }

    pub fn cost(&self, e: Element) -> f64 {
        match e {
            Element::Service(i) => self.services[i].cost,
            _ => 0.0,
        }
    }

    #[inline]
    pub fn time(&self, a: Element, b: Element) -> f64 {
        self.travel_time.get(self.index(a), self.index(b))
    }

    #[inline]
    pub fn travel(&self, a: Element, b: Element) -> f64 {
        self.travel_cost.get(self.index(a), self.index(b))
    }

    #[inline]
    pub fn energy_between(&self, a: Element, b: Element) -> f64 {
        self.travel_energy.get(self.index(a), self.index(b))
    }

    /// Usable capacity after the reserve level.
    pub fn usable_capacity(&self) -> f64 {
        self.vehicle.capacity - self.reserve_level
    }

    pub fn battery(&self) -> Result<Battery, ModelError> {
        Battery::new(self.usable_capacity(), &self.charge_model)
    }

    /// Check every structural invariant of the instance.
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &str, reason: String| {
            Err(ModelError::InvalidInstance {
                field: field.to_string(),
                reason,
            })
        };
        if !(self.horizon_end.is_finite() && self.horizon_end >= 0.0) {
            return bad(
                "horizon_end",
                format!("must be finite and >= 0, got {}", self.horizon_end),
            );
        }
        if !(self.vehicle.fixed_cost.is_finite() && self.vehicle.fixed_cost >= 0.0) {
            return bad("vehicle.fixed_cost", "must be finite and >= 0".into());
        }
        if !(self.reserve_level >= 0.0 && self.reserve_level < self.vehicle.capacity) {
            return bad("reserve_level", "must lie in [0, capacity)".into());
        }
        let battery = self.battery()?;
        let cap = battery.capacity();
        if self.depots.is_empty() {
            return bad("depots", "at least one depot is required".into());
        }
        for (i, s) in self.services.iter().enumerate() {
            let field = format!("services[{i}]");
            if !(s.t_begin.is_finite() && s.t_end.is_finite()) {
                return bad(&field, "times must be finite".into());
            }
            if !(0.0 <= s.t_begin && s.t_begin <= s.t_end && s.t_end <= self.horizon_end) {
                return bad(
                    &field,
                    format!(
                        "need 0 <= t_begin <= t_end <= horizon_end, got [{}, {}]",
                        s.t_begin, s.t_end
                    ),
                );
            }
            if !(s.energy >= 0.0 && s.energy <= cap) {
                return bad(&field, format!("energy {} outside [0, {cap}]", s.energy));
            }
            if !(s.cost.is_finite() && s.cost >= 0.0) {
                return bad(&field, "cost must be finite and >= 0".into());
            }
        }
        let n = self.n_elements();
        for (name, m) in [
            ("travel_time", &self.travel_time),
            ("travel_cost", &self.travel_cost),
            ("travel_energy", &self.travel_energy),
        ] {
            if m.dim() != n {
                return bad(
                    name,
                    format!("matrix is {0}x{0}, expected {n}x{n}", m.dim()),
                );
            }
            if let Some(k) = m.data.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
                return bad(
                    name,
                    format!("entry ({}, {}) is negative or not finite", k / n, k % n),
                );
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_battery() -> Battery {
        // fast up to 60, slower up to 90, slow up to 100
        let curve =
            ChargeCurve::new(vec![(0.0, 0.0), (30.0, 60.0), (60.0, 90.0), (110.0, 100.0)]).unwrap();
        Battery::new(100.0, &ChargeModel::General { profile: curve }).unwrap()
    }

    #[test]
    fn linear_phi_examples() {
        let b = Battery::linear(100.0, 2.0);
        assert_eq!(b.phi(50.0, 10.0).unwrap(), 70.0);
        assert_eq!(b.phi(95.0, 10.0).unwrap(), 100.0);
        assert_eq!(b.phi(37.0, 0.0).unwrap(), 37.0);
    }

    #[test]
    fn tau_ch_examples() {
        let b = Battery::linear(100.0, 2.0);
        assert_eq!(b.tau_ch(10.0, 30.0).unwrap(), 10.0);
        assert_eq!(b.tau_ch(30.0, 10.0).unwrap(), -10.0);
        assert_eq!(b.tau_ch(42.0, 42.0).unwrap(), 0.0);
        let g = curve_battery();
        assert_eq!(g.tau_ch(55.0, 55.0).unwrap(), 0.0);
        assert!((g.tau_ch(0.0, 90.0).unwrap() - 60.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let b = Battery::linear(100.0, 2.0);
        assert!(matches!(
            b.phi(-1.0, 1.0),
            Err(ModelError::LevelOutOfRange { .. })
        ));
        assert!(matches!(
            b.phi(101.0, 1.0),
            Err(ModelError::LevelOutOfRange { .. })
        ));
        assert!(matches!(
            b.phi(1.0, -1.0),
            Err(ModelError::NegativeDuration(_))
        ));
        assert!(b.tau_ch(0.0, 100.5).is_err());
    }

    #[test]
    fn saturating_profile_gives_infinite_charge_time() {
        let curve = ChargeCurve::new(vec![(0.0, 0.0), (10.0, 50.0), (20.0, 80.0)]).unwrap();
        let b = Battery::new(100.0, &ChargeModel::General { profile: curve }).unwrap();
        assert_eq!(b.saturation_level(), 80.0);
        assert_eq!(b.tau_ch(10.0, 90.0).unwrap(), f64::INFINITY);
        assert_eq!(b.tau_ch(90.0, 10.0).unwrap(), f64::NEG_INFINITY);
        // above saturation charging has no effect
        assert_eq!(b.phi(85.0, 100.0).unwrap(), 85.0);
        assert_eq!(b.phi(70.0, 100.0).unwrap(), 80.0);
    }

    #[test]
    fn curve_is_clamped_to_capacity() {
        let curve = ChargeCurve::new(vec![(0.0, 0.0), (50.0, 100.0), (100.0, 150.0)]).unwrap();
        let b = Battery::new(120.0, &ChargeModel::General { profile: curve }).unwrap();
        assert_eq!(b.saturation_level(), 120.0);
        assert!((b.time_from_empty(120.0) - 70.0).abs() < 1e-12);
        assert_eq!(b.phi(0.0, 1000.0).unwrap(), 120.0);
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(ChargeCurve::new(vec![(0.0, 0.0)]).is_err());
        assert!(ChargeCurve::new(vec![(1.0, 0.0), (2.0, 3.0)]).is_err());
        // convex
        assert!(ChargeCurve::new(vec![(0.0, 0.0), (10.0, 10.0), (20.0, 40.0)]).is_err());
        assert!(ChargeCurve::new(vec![(0.0, 0.0), (10.0, 10.0), (10.0, 20.0)]).is_err());
    }

    #[test]
    fn preorder_compares_potential() {
        let b = Battery::linear(100.0, 1.0);
        // 20 at t=10 is as good as 30 at t=20 (charge for 10 minutes)
        assert!(b.state_le((20.0, 10.0), (30.0, 20.0)));
        assert!(b.state_le((30.0, 20.0), (20.0, 10.0)));
        assert!(b.state_le((20.0, 10.0), (30.0, 15.0)));
        assert!(!b.state_le((30.0, 15.0), (20.0, 10.0)));
        assert!(b.state_le((f64::NEG_INFINITY, 0.0), (0.0, 1e9)));
        assert!(!b.state_le((0.0, 0.0), (f64::NEG_INFINITY, 0.0)));
    }

    #[test]
    fn matrix_rejects_ragged_rows() {
        assert!(Matrix::from_rows(vec![vec![0.0, 1.0], vec![0.0]]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn batteries() -> Vec<Battery> {
            vec![Battery::linear(100.0, 1.7), curve_battery()]
        }

        proptest! {
            #[test]
            fn semigroup(l in 0.0..100.0f64, t1 in 0.0..80.0f64, t2 in 0.0..80.0f64) {
                for b in batteries() {
                    let a = b.flow(b.flow(l, t1), t2);
                    let c = b.flow(l, t1 + t2);
                    prop_assert!((a - c).abs() <= 1e-9, "{a} vs {c}");
                }
            }

            #[test]
            fn monotone_and_marginal_decrease(l in 0.0..99.0f64, dl in 0.0..1.0f64, t in 0.0..80.0f64, dt in 0.0..5.0f64) {
                for b in batteries() {
                    prop_assert!(b.flow(l + dl, t) >= b.flow(l, t) - 1e-12);
                    prop_assert!(b.flow(l, t + dt) >= b.flow(l, t) - 1e-12);
                    prop_assert!(b.flow(l + dl, t) - (l + dl) <= b.flow(l, t) - l + 1e-9);
                }
            }

            #[test]
            fn concave_in_time(l in 0.0..100.0f64, t in 0.0..80.0f64, h in 0.01..10.0f64) {
                for b in batteries() {
                    let mid = b.flow(l, t + h);
                    let avg = 0.5 * (b.flow(l, t) + b.flow(l, t + 2.0 * h));
                    prop_assert!(mid >= avg - 1e-9);
                }
            }

            #[test]
            fn inverse(l in 0.0..100.0f64, l2 in 0.0..100.0f64) {
                for b in batteries() {
                    let (lo, hi) = if l <= l2 { (l, l2) } else { (l2, l) };
                    let tau = b.tau_ch(lo, hi).unwrap();
                    prop_assert!((b.flow(lo, tau) - hi).abs() <= 1e-9);
                }
            }

            #[test]
            fn composition(l1 in 0.0..100.0f64, l2 in 0.0..100.0f64, l3 in 0.0..100.0f64) {
                for b in batteries() {
                    let lhs = b.charge_time(l1, l3);
                    let rhs = b.charge_time(l1, l2) + b.charge_time(l2, l3);
                    prop_assert!((lhs - rhs).abs() <= 1e-9);
                }
            }

            #[test]
            fn shifted_charge_is_faster(e in 0.0..50.0f64, l in 0.0..50.0f64, dl in 0.0..50.0f64) {
                let b = curve_battery();
                let (l, l2) = (e + l, e + l + dl);
                prop_assume!(l2 <= 100.0);
                prop_assert!(b.charge_time(l - e, l2 - e) <= b.charge_time(l, l2) + 1e-9);
            }

            #[test]
            fn preorder_transitive(
                a in (0.0..100.0f64, 0.0..100.0f64),
                b in (0.0..100.0f64, 0.0..100.0f64),
                c in (0.0..100.0f64, 0.0..100.0f64),
            ) {
                let bat = curve_battery();
                prop_assert!(bat.state_le(a, a));
                if bat.state_le(a, b) && bat.state_le(b, c) {
                    // allow the two epsilons of the premises
                    let (l, t) = a;
                    let (l3, t3) = c;
                    prop_assert!(t + bat.charge_time(l, l3) >= t3 - 3.0 * FEAS_EPS);
                }
            }
        }
    }
}
