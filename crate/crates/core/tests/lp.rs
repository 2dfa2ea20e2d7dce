use evsp::master::{DenseSimplex, LpBackend, Row, Sense};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Ratio<i128>;

struct Lp {
    rows: Vec<Row>,
    cols: Vec<(i64, Vec<i64>)>,
}

/// Solve `B x = b` exactly; `None` when `B` is singular.
fn solve_exact(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let m = b.len();
    for c in 0..m {
        let p = (c..m).find(|&r| a[r][c] != Q::from(0))?;
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..m {
            if r != c && a[r][c] != Q::from(0) {
                let f = a[r][c] / a[c][c];
                for k in 0..m {
                    let v = a[c][k];
                    a[r][k] -= f * v;
                }
                let v = b[c];
                b[r] -= f * v;
            }
        }
    }
    Some((0..m).map(|i| b[i] / a[i][i]).collect())
}

fn rank(mut a: Vec<Vec<Q>>) -> usize {
    let (m, n) = (a.len(), a.first().map_or(0, Vec::len));
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| a[i][c] != Q::from(0)) else {
            continue;
        };
        a.swap(r, p);
        for i in 0..m {
            if i != r && a[i][c] != Q::from(0) {
                let f = a[i][c] / a[r][c];
                for k in 0..n {
                    let v = a[r][k];
                    a[i][k] -= f * v;
                }
            }
        }
        r += 1;
    }
    r
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Optimal value by enumerating every basic solution of the standard form;
/// `Err(())` when the constraint matrix is rank deficient.
fn vertex_optimum(lp: &Lp) -> Result<Option<Q>, ()> {
    let m = lp.rows.len();
    // standard form columns: structural, then one slack per inequality row
    let mut cols: Vec<(Q, Vec<Q>)> = lp
        .cols
        .iter()
        .map(|(c, a)| {
            (
                Q::from(*c as i128),
                a.iter().map(|&v| Q::from(v as i128)).collect(),
            )
        })
        .collect();
    for (i, r) in lp.rows.iter().enumerate() {
        let s = match r.sense {
            Sense::Le => 1,
            Sense::Ge => -1,
            Sense::Eq => continue,
        };
        let mut a = vec![Q::from(0); m];
        a[i] = Q::from(s);
        cols.push((Q::from(0), a));
    }
    let full: Vec<Vec<Q>> = (0..m)
        .map(|i| cols.iter().map(|c| c.1[i]).collect())
        .collect();
    if rank(full) < m {
        return Err(());
    }
    let b: Vec<Q> = lp.rows.iter().map(|r| Q::from(r.rhs as i128)).collect();
    let mut best: Option<Q> = None;
    for basis in subsets(cols.len(), m) {
        let a: Vec<Vec<Q>> = (0..m)
            .map(|i| basis.iter().map(|&j| cols[j].1[i]).collect())
            .collect();
        let Some(x) = solve_exact(a, b.clone()) else {
            continue;
        };
        if x.iter().any(|v| *v < Q::from(0)) {
            continue;
        }
        let obj: Q = basis.iter().zip(&x).map(|(&j, v)| cols[j].0 * v).sum();
        if best.is_none_or(|b| obj < b) {
            best = Some(obj);
        }
    }
    Ok(best)
}

fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn random_lp(rng: &mut impl Rng) -> Lp {
    let m = rng.gen_range(1..=4);
    let n = rng.gen_range(1..=7);
    let rows = (0..m)
        .map(|_| Row {
            sense: [Sense::Eq, Sense::Eq, Sense::Le, Sense::Ge][rng.gen_range(0..4)],
            rhs: rng.gen_range(0..=3) as f64,
        })
        .collect();
    let cols = (0..n)
        .map(|_| {
            (
                rng.gen_range(1..=9),
                (0..m).map(|_| rng.gen_range(0..=2)).collect(),
            )
        })
        .collect();
    Lp { rows, cols }
}

fn entries(a: &[i64]) -> Vec<(usize, f64)> {
    a.iter().enumerate().map(|(i, &v)| (i, v as f64)).collect()
}

#[test]
fn simplex_matches_vertex_enumeration() {
    // the default, and limits low enough to force the perturbation, the
    // repair pivots and Bland's rule on most degenerate problems
    let mut perturbed = 0;
    for limit in [50, 1, 0] {
        perturbed += check_against_enumeration(limit);
    }
    assert!(perturbed > 300, "only {perturbed} perturbed solves");
}

fn check_against_enumeration(degenerate_limit: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut feasible, mut infeasible, mut perturbed) = (0, 0, 0);
    for case in 0..3000 {
        let lp = random_lp(&mut rng);
        let Ok(expected) = vertex_optimum(&lp) else {
            continue;
        };
        // solve in two rounds to exercise the warm start
        let split = lp.cols.len() / 2;
        let mut s = DenseSimplex::new(lp.rows.clone());
        s.degenerate_limit = degenerate_limit;
        for (c, a) in &lp.cols[..split] {
            s.add_column(*c as f64, &entries(a));
        }
        perturbed += s.solve().unwrap().perturbed as usize;
        for (c, a) in &lp.cols[split..] {
            s.add_column(*c as f64, &entries(a));
        }
        let sol = s.solve().unwrap();
        perturbed += sol.perturbed as usize;
        assert!(sol.x.iter().all(|&x| x >= 0.0));
        match expected {
            Some(v) => {
                feasible += 1;
                let v = to_f64(v);
                assert!(
                    sol.infeasibility < 1e-9,
                    "case {case}: artificial left at {}",
                    sol.infeasibility
                );
                assert!(
                    (sol.objective - v).abs() <= 1e-7 * (1.0 + v.abs()),
                    "case {case}: {} vs {v}",
                    sol.objective
                );
                // dual feasibility and strong duality
                for (c, a) in &lp.cols {
                    let ya: f64 = a.iter().zip(&sol.duals).map(|(&ai, y)| ai as f64 * y).sum();
                    assert!(
                        ya <= *c as f64 + 1e-7,
                        "case {case}: column priced out at {}",
                        *c as f64 - ya
                    );
                }
                for (r, y) in lp.rows.iter().zip(&sol.duals) {
                    match r.sense {
                        Sense::Le => assert!(*y <= 1e-7),
                        Sense::Ge => assert!(*y >= -1e-7),
                        Sense::Eq => {}
                    }
                }
                let by: f64 = lp.rows.iter().zip(&sol.duals).map(|(r, y)| r.rhs * y).sum();
                assert!(
                    (by - v).abs() <= 1e-6 * (1.0 + v.abs()),
                    "case {case}: dual value {by} vs {v}"
                );
                for (i, r) in lp.rows.iter().enumerate() {
                    let ax: f64 = lp
                        .cols
                        .iter()
                        .zip(&sol.x)
                        .map(|((_, a), x)| a[i] as f64 * x)
                        .sum();
                    let ok = match r.sense {
                        Sense::Le => ax <= r.rhs + 1e-7,
                        Sense::Ge => ax >= r.rhs - 1e-7,
                        Sense::Eq => (ax - r.rhs).abs() <= 1e-7,
                    };
                    assert!(
                        ok,
                        "case {case}: row {i} has activity {ax} against {}",
                        r.rhs
                    );
                }
                let x_obj: f64 = lp
                    .cols
                    .iter()
                    .zip(&sol.x)
                    .map(|((c, _), x)| *c as f64 * x)
                    .sum();
                assert!((x_obj - v).abs() <= 1e-7 * (1.0 + v.abs()));
            }
            None => {
                infeasible += 1;
                assert!(
                    sol.infeasibility > 1e-9,
                    "case {case}: infeasible LP solved"
                );
            }
        }
    }
    assert!(
        feasible > 500 && infeasible > 50,
        "{feasible} / {infeasible}"
    );
    perturbed
}
