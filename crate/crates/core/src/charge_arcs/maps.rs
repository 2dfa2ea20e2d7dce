//! Forward and backward charge maps of an arc.
//!
//! `fc` maps the level at the end of the tail to the level at the end of the
//! head under the optimal schedule (`-inf` when infeasible); `bc` is its
//! generalized inverse, the least entry level reaching a target exit level.

use super::schedule::{arrival_state, min_entry_level, optimal_schedule, StationSequence};
use crate::error::ArcError;
use crate::model::{Battery, FEAS_EPS};
use serde::{Deserialize, Serialize};

/// Closed-form charge maps under linear recharge (and for arcs without a
/// station under any model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    /// Minimal feasible entry level.
    pub l_min_in: f64,
    /// Exit level when entering with a full battery.
    pub l_max_out: f64,
    /// `fc(l_min_in) - l_min_in`.
    pub delta: f64,
}

impl LinearParams {
    #[inline]
    pub fn fc(&self, level: f64) -> f64 {
        if !(level >= self.l_min_in - FEAS_EPS) {
            return f64::NEG_INFINITY;
        }
        (level + self.delta).min(self.l_max_out).max(0.0)
    }

    #[inline]
    pub fn bc(&self, level: f64) -> f64 {
        if !(level <= self.l_max_out + FEAS_EPS) {
            return f64::INFINITY;
        }
        self.l_min_in.max(level - self.delta)
    }
}

/// Closed forms of the linear maps. Arcs without a station get the plain
/// energy shift whatever the charge model.
///
/// Returns `None` when no entry level in `[0, M]` makes the sequence feasible.
pub fn linear_params(
    battery: &Battery,
    seq: &StationSequence,
) -> Result<Option<LinearParams>, ArcError> {
    let m = battery.capacity();
    let k = seq.k();
    let excess = seq.window_excess();
    if excess > FEAS_EPS {
        return Err(ArcError::TimeWindow { excess });
    }
    if k == 0 {
        let use_ = seq.energy[0] + seq.head_energy;
        if use_ > m + FEAS_EPS {
            return Ok(None);
        }
        return Ok(Some(LinearParams {
            l_min_in: use_,
            l_max_out: (m - use_).max(0.0),
            delta: -use_,
        }));
    }
    let alpha = battery.linear_rate().ok_or(ArcError::NotLinear)?;
    let slack_time = seq.deadline - seq.depart - seq.travel.iter().sum::<f64>();
    let available = alpha * slack_time.max(0.0);
    let used: f64 = seq.energy.iter().sum::<f64>() + seq.head_energy;
    let gain_unclamped = available - used;
    let before_last: f64 = seq.energy[..k].iter().sum();
    let l_min_in = seq.energy[0].max(-gain_unclamped);
    let l_max_out = m.min(m + available - before_last) - seq.energy[k] - seq.head_energy;
    if l_min_in > m + FEAS_EPS || l_max_out < -FEAS_EPS {
        return Ok(None);
    }
    let delta = gain_unclamped.min(l_max_out - l_min_in);
    Ok(Some(LinearParams {
        l_min_in: l_min_in.min(m),
        l_max_out: l_max_out.max(0.0),
        delta,
    }))
}

/// Piecewise-linear non-decreasing map given by breakpoints `(in, out)`,
/// defined on `[in_0, M]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseMap {
    points: Vec<(f64, f64)>,
}

impl PiecewiseMap {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn fc(&self, level: f64) -> f64 {
        let p = &self.points;
        if !(level >= p[0].0 - FEAS_EPS) {
            return f64::NEG_INFINITY;
        }
        if level <= p[0].0 {
            return p[0].1;
        }
        let j = p.partition_point(|q| q.0 < level);
        if j == p.len() {
            return p[p.len() - 1].1;
        }
        let (a, b) = (p[j - 1], p[j]);
        a.1 + (b.1 - a.1) * (level - a.0) / (b.0 - a.0)
    }

    pub fn bc(&self, level: f64) -> f64 {
        let p = &self.points;
        let last = p[p.len() - 1];
        if !(level <= last.1 + FEAS_EPS) {
            return f64::INFINITY;
        }
        if level <= p[0].1 {
            return p[0].0;
        }
        let j = p.partition_point(|q| q.1 < level);
        if j == p.len() {
            // within tolerance above the top
            return p.iter().find(|q| q.1 >= last.1).map_or(last.0, |q| q.0);
        }
        let (a, b) = (p[j - 1], p[j]);
        a.0 + (b.0 - a.0) * (level - a.1) / (b.1 - a.1)
    }

    pub fn min_in(&self) -> f64 {
        self.points[0].0
    }

    pub fn max_out(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }
}

/// Exact piecewise-linear table of `fc` for a sequence with at least one
/// station. `None` when the sequence is infeasible from every entry level.
pub fn general_table(battery: &Battery, seq: &StationSequence) -> Option<PiecewiseMap> {
    let m = battery.capacity();
    let k = seq.k();
    debug_assert!(k > 0);
    let lmin = min_entry_level(battery, seq, 0.0);
    if !(lmin <= m) {
        return None;
    }
    let kinks = battery.kink_levels();
    let mut xs = vec![lmin, m];
    for i in 1..=k {
        let base = seq.energy_to(i);
        xs.extend(kinks.iter().map(|q| base + q));
    }
    let mut xs = clean(xs, lmin, m);

    // Inside each segment the last-station charge time is affine in the
    // entry level; split where the final charge crosses a profile kink.
    let sat = battery.saturation_level();
    let te = seq.last_departure();
    let clock = |lin: f64| -> Option<f64> {
        let (x, t) = arrival_state(battery, seq.depart, &seq.travel[..k], &seq.energy[..k], lin);
        (x.is_finite() && x <= sat + 1e-9).then(|| te - t + battery.time_from_empty(x.min(sat)))
    };
    let kink_times = battery.kink_times();
    let mut extra = Vec::new();
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (Some(ha), Some(hb)) = (clock(a), clock(b)) else {
            continue;
        };
        if (hb - ha).abs() < 1e-15 {
            continue;
        }
        for &tq in &kink_times {
            if (ha < tq && tq < hb) || (hb < tq && tq < ha) {
                extra.push(a + (tq - ha) * (b - a) / (hb - ha));
            }
        }
    }
    xs.extend(extra);
    xs = clean(xs, lmin, m);

    let mut points: Vec<(f64, f64)> = xs
        .into_iter()
        .map(|lin| {
            let out = optimal_schedule(battery, seq, lin).level_out;
            (lin, if out.is_finite() { out } else { 0.0 })
        })
        .collect();
    // enforce monotonicity against rounding
    for j in 1..points.len() {
        if points[j].1 < points[j - 1].1 {
            points[j].1 = points[j - 1].1;
        }
    }
    Some(PiecewiseMap {
        points: drop_collinear(points),
    })
}

fn clean(mut xs: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    xs.retain(|&x| x >= lo && x <= hi);
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    xs
}

fn drop_collinear(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if points.len() <= 2 {
        return points;
    }
    let mut out: Vec<(f64, f64)> = vec![points[0]];
    for j in 1..points.len() - 1 {
        let a = *out.last().unwrap();
        let (b, c) = (points[j], points[j + 1]);
        let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        if cross.abs() > 1e-12 * (1.0 + (c.0 - a.0).abs() * (c.1 - a.1).abs()) {
            out.push(b);
        }
    }
    out.push(points[points.len() - 1]);
    out
}

/// The charge maps attached to an arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChargeMaps {
    Linear(LinearParams),
    Table(PiecewiseMap),
}

impl ChargeMaps {
    /// Build the maps of a sequence, `None` when it is never feasible.
    pub fn build(battery: &Battery, seq: &StationSequence) -> Option<ChargeMaps> {
        if seq.k() == 0 || battery.linear_rate().is_some() {
            linear_params(battery, seq)
                .ok()
                .flatten()
                .map(ChargeMaps::Linear)
        } else {
            general_table(battery, seq).map(ChargeMaps::Table)
        }
    }

    #[inline]
    pub fn fc(&self, level: f64) -> f64 {
        match self {
            ChargeMaps::Linear(p) => p.fc(level),
            ChargeMaps::Table(t) => t.fc(level),
        }
    }

    #[inline]
    pub fn bc(&self, level: f64) -> f64 {
        match self {
            ChargeMaps::Linear(p) => p.bc(level),
            ChargeMaps::Table(t) => t.bc(level),
        }
    }

    /// Least feasible entry level.
    pub fn min_in(&self) -> f64 {
        match self {
            ChargeMaps::Linear(p) => p.l_min_in,
            ChargeMaps::Table(t) => t.min_in(),
        }
    }

    /// Exit level from a full battery.
    pub fn max_out(&self) -> f64 {
        match self {
            ChargeMaps::Linear(p) => p.l_max_out,
            ChargeMaps::Table(t) => t.max_out(),
        }
    }

    /// Entry levels between which `fc` is affine.
    pub fn breakpoints(&self, capacity: f64) -> Vec<f64> {
        match self {
            ChargeMaps::Linear(p) => {
                let mut v = vec![p.l_min_in, capacity];
                let kink = p.l_max_out - p.delta;
                if kink > p.l_min_in && kink < capacity {
                    v.push(kink);
                }
                v
            }
            ChargeMaps::Table(t) => t.points.iter().map(|q| q.0).collect(),
        }
    }

    /// `fc_self >= fc_other` everywhere on `[0, capacity]`, within tolerance.
    pub fn dominates(&self, other: &ChargeMaps, capacity: f64) -> bool {
        if self.min_in() > other.min_in() + FEAS_EPS {
            return false;
        }
        let lo = other.min_in();
        self.breakpoints(capacity)
            .into_iter()
            .chain(other.breakpoints(capacity))
            .filter(|&x| x >= lo && x <= capacity)
            .chain(std::iter::once(lo))
            .all(|x| self.fc(x) >= other.fc(x) - FEAS_EPS)
    }
}
