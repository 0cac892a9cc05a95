//! Brute-force LP oracle: enumerate every basis of the inequality system and
//! keep the best feasible vertex. Independent of the simplex code path.

use num::{Signed, Zero};
use rewardsep::lp::{LinearProgram, Sense};
use rewardsep::numeric::{int, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum OracleStatus {
    Optimal(Rational),
    Infeasible,
    Unbounded,
}

/// Inequalities `g·x >= h`.
struct System {
    g: Vec<Vec<Rational>>,
    h: Vec<Rational>,
}

fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for k in col..n {
                    let t = &f * &a[col][k];
                    a[r][k] -= t;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn best_vertex(sys: &System, c: &[Rational]) -> Option<Rational> {
    let n = c.len();
    let mut best: Option<Rational> = None;
    for subset in combinations(sys.g.len(), n) {
        let a = subset.iter().map(|&i| sys.g[i].clone()).collect();
        let b = subset.iter().map(|&i| sys.h[i].clone()).collect();
        let Some(x) = gauss(a, b) else { continue };
        let feasible = sys
            .g
            .iter()
            .zip(&sys.h)
            .all(|(row, h)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<Rational>() >= *h);
        if feasible {
            let v: Rational = c.iter().zip(&x).map(|(p, q)| p * q).sum();
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    best
}

/// Requires every variable to have a finite lower bound, so the feasible
/// region (when nonempty) has a vertex and the recession cone lies in the
/// nonnegative orthant.
pub fn solve_by_vertices(lp: &LinearProgram) -> OracleStatus {
    let n = lp.num_vars();
    let mut sys = System { g: Vec::new(), h: Vec::new() };
    let mut cone = System { g: Vec::new(), h: Vec::new() };
    let push = |row: Vec<Rational>, rhs: Rational, sys: &mut System, cone: &mut System| {
        cone.g.push(row.clone());
        cone.h.push(Rational::zero());
        sys.g.push(row);
        sys.h.push(rhs);
    };
    for ((row, sense), b) in lp.matrix().iter().zip(lp.senses()).zip(lp.rhs()) {
        let neg: Vec<Rational> = row.iter().map(|v| -v).collect();
        match sense {
            Sense::Ge => push(row.clone(), b.clone(), &mut sys, &mut cone),
            Sense::Le => push(neg, -b, &mut sys, &mut cone),
            Sense::Eq => {
                push(row.clone(), b.clone(), &mut sys, &mut cone);
                push(neg, -b, &mut sys, &mut cone);
            }
        }
    }
    for (j, bound) in lp.bounds().iter().enumerate() {
        let lo = bound.lower.clone().expect("oracle needs finite lower bounds");
        let mut e = vec![Rational::zero(); n];
        e[j] = int(1);
        push(e.clone(), lo, &mut sys, &mut cone);
        if let Some(hi) = &bound.upper {
            let neg: Vec<Rational> = e.iter().map(|v| -v).collect();
            push(neg, -hi.clone(), &mut sys, &mut cone);
        }
    }
    let Some(best) = best_vertex(&sys, lp.objective()) else {
        return OracleStatus::Infeasible;
    };
    // Normalized recession cone {d : G d >= 0, Σd <= 1}; d >= 0 is already in G.
    cone.g.push(vec![int(-1); n]);
    cone.h.push(int(-1));
    let ray_best = best_vertex(&cone, lp.objective()).expect("cone contains the origin");
    if ray_best.is_negative() {
        OracleStatus::Unbounded
    } else {
        OracleStatus::Optimal(best)
    }
}
