//! Dense revised simplex for the restricted master problem.
//!
//! Rows are few (one per service plus branching rows) and columns many, so
//! the basis inverse is kept explicitly and updated by pivoting, with a
//! periodic refactorization. Every row gets an artificial column with a
//! large cost, which gives a starting basis and lets column generation
//! start from an empty pool.

use crate::error::LpError;
use serde::{Deserialize, Serialize};

/// Cost of an artificial column.
pub const ARTIFICIAL_COST: f64 = 1e7;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_SWITCH: usize = 50;
const PRICING_WINDOW: usize = 300;
/// Size of the right-hand side shift used against degeneracy.
const PERTURBATION: f64 = 1e-6;
const PRIMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Objective including artificial penalties.
    pub objective: f64,
    /// Values of the structural columns.
    pub x: Vec<f64>,
    /// One dual per row, for the rows as given.
    pub duals: Vec<f64>,
    /// Sum of artificial values; positive means the rows are not satisfied
    /// by the structural columns alone.
    pub infeasibility: f64,
    pub iterations: usize,
    /// The right-hand side was perturbed against degeneracy on the way.
    pub perturbed: bool,
}

/// Interface of an LP engine for the master problem. Columns are only ever
/// appended, which lets an engine keep its basis between solves.
pub trait LpBackend {
    /// Append a structural column; returns its index.
    fn add_column(&mut self, cost: f64, entries: &[(usize, f64)]) -> usize;
    fn n_columns(&self) -> usize;
    fn solve(&mut self) -> Result<LpSolution, LpError>;
}

#[derive(Debug, Clone)]
struct Column {
    cost: f64,
    entries: Vec<(usize, f64)>,
}

/// Revised simplex with a dense basis inverse.
#[derive(Debug, Clone)]
pub struct DenseSimplex {
    rows: Vec<Row>,
    /// +1 or -1: rows are stored with a non-negative right-hand side.
    flip: Vec<f64>,
    rhs: Vec<f64>,
    /// Slack and artificial columns first, then structural ones.
    cols: Vec<Column>,
    n_aux: usize,
    artificial: Vec<bool>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    /// Where the next partial pricing pass starts.
    cursor: usize,
    pub max_iterations: usize,
    /// Degenerate pivots in a row before perturbing, and again before
    /// switching to Bland's rule.
    pub degenerate_limit: usize,
}

impl DenseSimplex {
    pub fn new(rows: Vec<Row>) -> Self {
        let m = rows.len();
        let flip: Vec<f64> = rows
            .iter()
            .map(|r| if r.rhs < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let rhs: Vec<f64> = rows.iter().zip(&flip).map(|(r, f)| r.rhs * f).collect();
        let mut cols = Vec::new();
        let mut artificial = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            let s = match r.sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
                Sense::Eq => continue,
            };
            cols.push(Column {
                cost: 0.0,
                entries: vec![(i, s * flip[i])],
            });
            artificial.push(false);
        }
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            basis.push(cols.len());
            cols.push(Column {
                cost: ARTIFICIAL_COST,
                entries: vec![(i, 1.0)],
            });
            artificial.push(true);
        }
        let n_aux = cols.len();
        let mut in_basis = vec![false; n_aux];
        for &b in &basis {
            in_basis[b] = true;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        DenseSimplex {
            rows,
            flip,
            xb: rhs.clone(),
            rhs,
            cols,
            n_aux,
            artificial,
            basis,
            in_basis,
            binv,
            cursor: 0,
            max_iterations: 200_000,
            degenerate_limit: DEGENERATE_SWITCH,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn duals_internal(&self) -> Vec<f64> {
        let m = self.m();
        let mut y = vec![0.0; m];
        for (i, &b) in self.basis.iter().enumerate() {
            let c = self.cols[b].cost;
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yj, r) in y.iter_mut().zip(row) {
                    *yj += c * r;
                }
            }
        }
        y
    }

    /// Reduced cost of column `j` and the rounding scale it was computed at.
    fn reduced_cost(&self, j: usize, y: &[f64]) -> (f64, f64) {
        let c = &self.cols[j];
        let (mut d, mut scale) = (c.cost, c.cost.abs());
        for &(i, a) in &c.entries {
            d -= y[i] * a;
            scale += (y[i] * a).abs();
        }
        (d, scale)
    }

    fn improving(&self, j: usize, y: &[f64]) -> Option<f64> {
        if self.in_basis[j] {
            return None;
        }
        let (d, scale) = self.reduced_cost(j, y);
        (d < -COST_TOL * (1.0 + scale)).then_some(d)
    }

    /// Smallest-index improving column.
    fn first_improving(&self, y: &[f64]) -> Option<usize> {
        (0..self.cols.len()).find(|&j| self.improving(j, y).is_some())
    }

    /// Most negative reduced cost within a window of columns starting at
    /// the cursor; the window grows to a full pass when nothing improves.
    fn partial_pricing(&mut self, y: &[f64]) -> Option<usize> {
        let n = self.cols.len();
        let window = PRICING_WINDOW.max(n / 128);
        let mut best: Option<(usize, f64)> = None;
        for k in 0..n {
            let j = (self.cursor + k) % n;
            if let Some(d) = self.improving(j, y) {
                if best.is_none_or(|(_, b)| d < b) {
                    best = Some((j, d));
                }
            }
            if best.is_some() && k + 1 >= window {
                self.cursor = (j + 1) % n;
                break;
            }
        }
        best.map(|(j, _)| j)
    }

    fn column_in_basis(&self, j: usize) -> Vec<f64> {
        let m = self.m();
        let mut w = vec![0.0; m];
        for &(r, a) in &self.cols[j].entries {
            for (i, wi) in w.iter_mut().enumerate() {
                *wi += self.binv[i * m + r] * a;
            }
        }
        w
    }

    /// Rebuild the basis inverse from scratch by Gauss-Jordan elimination.
    fn refactor(&mut self, iteration: usize) -> Result<(), LpError> {
        let m = self.m();
        let mut a = vec![0.0; m * m];
        for (k, &b) in self.basis.iter().enumerate() {
            for &(r, v) in &self.cols[b].entries {
                a[r * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))
                .expect("non-empty range");
            if a[p * m + c].abs() < 1e-12 {
                return Err(LpError::SingularBasis { iteration });
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        // rows of `inv` now map row space to basis positions
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
            self.xb[i] = if v.abs() < 1e-12 { 0.0 } else { v };
        }
        Ok(())
    }

    fn limit(&self, iterations: usize) -> Result<(), LpError> {
        if iterations < self.max_iterations {
            return Ok(());
        }
        let objective = self
            .basis
            .iter()
            .zip(&self.xb)
            .map(|(&b, x)| self.cols[b].cost * x)
            .sum();
        Err(LpError::IterationLimit {
            iterations,
            objective,
        })
    }

    /// Shift the right-hand side so that every basic value grows by a small
    /// distinct amount; the current basis stays feasible. Returns the
    /// original right-hand side.
    fn perturb(&mut self) -> Vec<f64> {
        let original = self.rhs.clone();
        for (k, &b) in self.basis.iter().enumerate() {
            // golden-ratio sequence: distinct and deterministic
            let u = (k as f64 * 0.618_033_988_749_895).fract();
            let eps = PERTURBATION * (1.0 + u);
            self.xb[k] += eps;
            for &(r, a) in &self.cols[b].entries {
                self.rhs[r] += eps * a;
            }
        }
        original
    }

    /// Primal simplex from the current feasible basis. On long runs of
    /// degenerate pivots the right-hand side is perturbed once (when
    /// allowed), then Bland's rule takes over. Returns the original
    /// right-hand side if it was perturbed.
    fn primal(
        &mut self,
        iterations: &mut usize,
        may_perturb: bool,
    ) -> Result<Option<Vec<f64>>, LpError> {
        let m = self.m();
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut original = None;
        loop {
            if *iterations > 0 && *iterations % REFACTOR_EVERY == 0 {
                self.refactor(*iterations)?;
            }
            let y = self.duals_internal();
            let enter = if bland {
                self.first_improving(&y)
            } else {
                self.partial_pricing(&y)
            };
            let Some(j) = enter else {
                return Ok(original);
            };
            let w = self.column_in_basis(j);
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for i in 0..m {
                if w[i] > PIVOT_TOL {
                    let t = self.xb[i].max(0.0) / w[i];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if t < ratio - 1e-12 {
                                true
                            } else if t <= ratio + 1e-12 {
                                if bland {
                                    self.basis[i] < self.basis[l]
                                } else {
                                    w[i] > w[l]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some(i);
                        ratio = ratio.min(t);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(LpError::Numerical {
                    iteration: *iterations,
                    reason: format!("column {j} has no blocking row (unbounded direction)"),
                });
            };
            if ratio <= 1e-12 {
                degenerate += 1;
                if degenerate >= self.degenerate_limit {
                    if may_perturb && original.is_none() {
                        original = Some(self.perturb());
                        degenerate = 0;
                        continue;
                    }
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            self.pivot(r, j, &w);
            *iterations += 1;
            self.limit(*iterations)?;
        }
    }

    /// Dual simplex pivots until no basic value is negative. The basis is
    /// dual feasible on entry (it was optimal for a nearby right-hand side).
    fn dual_repair(&mut self, iterations: &mut usize) -> Result<(), LpError> {
        let m = self.m();
        loop {
            let worst = (0..m)
                .filter(|&i| self.xb[i] < -PRIMAL_TOL)
                .min_by(|&a, &b| self.xb[a].total_cmp(&self.xb[b]));
            let Some(r) = worst else {
                return Ok(());
            };
            let y = self.duals_internal();
            let row = &self.binv[r * m..(r + 1) * m];
            let mut enter: Option<(usize, f64, f64)> = None;
            for j in 0..self.cols.len() {
                if self.in_basis[j] {
                    continue;
                }
                let alpha: f64 = self.cols[j].entries.iter().map(|&(i, a)| row[i] * a).sum();
                if alpha >= -PIVOT_TOL {
                    continue;
                }
                let t = self.reduced_cost(j, &y).0.max(0.0) / -alpha;
                let better = match enter {
                    None => true,
                    Some((_, bt, ba)) => t < bt - 1e-12 || (t <= bt + 1e-12 && alpha < ba),
                };
                if better {
                    enter = Some((j, t, alpha));
                }
            }
            let Some((j, _, _)) = enter else {
                return Err(LpError::Numerical {
                    iteration: *iterations,
                    reason: format!("row {r} stays infeasible after removing the perturbation"),
                });
            };
            let w = self.column_in_basis(j);
            self.pivot(r, j, &w);
            *iterations += 1;
            if *iterations % REFACTOR_EVERY == 0 {
                self.refactor(*iterations)?;
            }
            self.limit(*iterations)?;
        }
    }

    fn pivot(&mut self, r: usize, j: usize, w: &[f64]) {
        let m = self.m();
        let wr = w[r];
        for k in 0..m {
            self.binv[r * m + k] /= wr;
        }
        self.xb[r] /= wr;
        let (xr, pivot_row) = (self.xb[r], self.binv[r * m..(r + 1) * m].to_vec());
        for i in 0..m {
            if i == r || w[i] == 0.0 {
                continue;
            }
            let f = w[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * pivot_row[k];
            }
            self.xb[i] -= f * xr;
            if self.xb[i].abs() < 1e-12 {
                self.xb[i] = 0.0;
            }
        }
        let old = self.basis[r];
        self.in_basis[old] = false;
        self.in_basis[j] = true;
        self.basis[r] = j;
    }
}

impl LpBackend for DenseSimplex {
    fn add_column(&mut self, cost: f64, entries: &[(usize, f64)]) -> usize {
        let entries = entries
            .iter()
            .map(|&(i, a)| (i, a * self.flip[i]))
            .filter(|e| e.1 != 0.0)
            .collect();
        self.cols.push(Column { cost, entries });
        self.artificial.push(false);
        self.in_basis.push(false);
        self.cols.len() - 1 - self.n_aux
    }

    fn n_columns(&self) -> usize {
        self.cols.len() - self.n_aux
    }

    fn solve(&mut self) -> Result<LpSolution, LpError> {
        let mut iterations = 0usize;
        let mut perturbed = false;
        if let Some(original) = self.primal(&mut iterations, true)? {
            perturbed = true;
            self.rhs = original;
            self.refactor(iterations)?;
            self.dual_repair(&mut iterations)?;
            self.primal(&mut iterations, false)?;
        }
        // one clean refactorization keeps values and duals accurate
        if iterations > 0 {
            self.refactor(iterations)?;
        }
        let y = self.duals_internal();
        let mut x = vec![0.0; self.n_columns()];
        let mut objective = 0.0;
        let mut infeasibility = 0.0;
        for (i, &b) in self.basis.iter().enumerate() {
            let v = self.xb[i].max(0.0);
            objective += self.cols[b].cost * v;
            if self.artificial[b] {
                infeasibility += v;
            } else if b >= self.n_aux {
                x[b - self.n_aux] = v;
            }
        }
        let duals = y.iter().zip(&self.flip).map(|(d, f)| d * f).collect();
        Ok(LpSolution {
            objective,
            x,
            duals,
            infeasibility,
            iterations,
            perturbed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq_rows(b: &[f64]) -> Vec<Row> {
        b.iter()
            .map(|&rhs| Row {
                sense: Sense::Eq,
                rhs,
            })
            .collect()
    }

    #[test]
    fn single_column_covering_all() {
        let mut lp = DenseSimplex::new(eq_rows(&[1.0, 1.0, 1.0]));
        lp.add_column(42.0, &[(0, 1.0), (1, 1.0), (2, 1.0)]);
        let s = lp.solve().unwrap();
        assert!((s.objective - 42.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.infeasibility, 0.0);
    }

    #[test]
    fn cheaper_duplicate_wins() {
        let mut lp = DenseSimplex::new(eq_rows(&[1.0, 1.0]));
        lp.add_column(10.0, &[(0, 1.0), (1, 1.0)]);
        lp.add_column(7.0, &[(0, 1.0), (1, 1.0)]);
        let s = lp.solve().unwrap();
        assert_eq!(s.x, vec![0.0, 1.0]);
        // warm start after adding columns
        lp.add_column(3.0, &[(0, 1.0)]);
        lp.add_column(3.0, &[(1, 1.0)]);
        let s = lp.solve().unwrap();
        assert!((s.objective - 6.0).abs() < 1e-9);
    }

    #[test]
    fn inequality_rows_and_duals() {
        // min x0 + 2 x1  s.t. x0 + x1 >= 2, x0 <= 1
        let mut lp = DenseSimplex::new(vec![
            Row {
                sense: Sense::Ge,
                rhs: 2.0,
            },
            Row {
                sense: Sense::Le,
                rhs: 1.0,
            },
        ]);
        lp.add_column(1.0, &[(0, 1.0), (1, 1.0)]);
        lp.add_column(2.0, &[(0, 1.0)]);
        let s = lp.solve().unwrap();
        assert!((s.objective - 3.0).abs() < 1e-9);
        assert!((s.duals[0] - 2.0).abs() < 1e-9);
        assert!((s.duals[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_rows_keep_artificials() {
        let mut lp = DenseSimplex::new(eq_rows(&[1.0, 1.0]));
        lp.add_column(1.0, &[(0, 1.0)]);
        let s = lp.solve().unwrap();
        assert!((s.infeasibility - 1.0).abs() < 1e-12);
    }
}
