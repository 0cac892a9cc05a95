//! Dense two-phase tableau simplex with Bland's rule.

use super::standard::{RawOutcome, StandardForm};
use super::Sense;
use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::numeric::{Rational, Scalar, Tol};

const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau<S> {
    /// `m` rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<S>>,
    /// Reduced costs, with `-objective` in the last entry.
    z: Vec<S>,
    basis: Vec<usize>,
    tol: Tol<S>,
    pivots: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

impl<S: Scalar> Tableau<S> {
    fn ncols(&self) -> usize {
        self.z.len() - 1
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row, &pivot_row, e);
            }
        }
        eliminate(&mut self.z, &pivot_row, e);
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Bland's rule: lowest-index improving column enters; the ratio test
    /// breaks ties by lowest basic variable index.
    fn optimize(&mut self, allowed: &[bool]) -> Result<PhaseEnd> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numerical(format!("simplex exceeded {MAX_PIVOTS} pivots")));
            }
            let Some(e) = (0..self.ncols()).find(|&j| allowed[j] && self.tol.is_neg(&self.z[j])) else {
                return Ok(PhaseEnd::Optimal);
            };
            let rhs = self.ncols();
            let mut leave: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !self.tol.is_pos(&row[e]) {
                    continue;
                }
                let ratio = row[rhs].clone() / row[e].clone();
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((best, best_ratio)) => {
                        let diff = ratio.clone() - best_ratio.clone();
                        if self.tol.is_neg(&diff) || (self.tol.is_zero(&diff) && self.basis[i] < self.basis[best]) {
                            Some((i, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, e),
                None => return Ok(PhaseEnd::Unbounded(e)),
            }
        }
    }

    fn set_costs(&mut self, cost: &[S]) {
        let rhs = self.ncols();
        self.z = cost.to_vec();
        self.z.push(S::zero());
        for i in 0..self.rows.len() {
            let cb = cost[self.basis[i]].clone();
            if cb == S::zero() {
                continue;
            }
            for j in 0..=rhs {
                let delta = cb.clone() * self.rows[i][j].clone();
                self.z[j] = self.z[j].clone() - delta;
            }
        }
    }
}

fn eliminate<S: Scalar>(row: &mut [S], pivot_row: &[S], e: usize) {
    let factor = row[e].clone();
    if factor == S::zero() {
        return;
    }
    for (v, p) in row.iter_mut().zip(pivot_row) {
        if *p != S::zero() {
            *v = v.clone() - factor.clone() * p.clone();
        }
    }
}

/// Solve `Bᵀ y = c_B` for the multipliers of the current basis, where `B`
/// holds the basis columns of `full` restricted to `rows`.
fn basis_multipliers<S: Scalar>(full: &[Vec<S>], rows: &[usize], basis: &[usize], cost: &[S], tol: &Tol<S>) -> Result<Vec<S>> {
    let k = rows.len();
    let bt: Vec<Vec<S>> = (0..k)
        .map(|a| rows.iter().map(|&r| full[r][basis[a]].clone()).collect())
        .collect();
    let cb: Vec<S> = basis.iter().map(|&b| cost[b].clone()).collect();
    solve_square(bt, cb, tol).ok_or_else(|| Error::Numerical("singular basis matrix".into()))
}

fn convert<S: Scalar>(v: &[S]) -> Result<Vec<Rational>> {
    v.iter()
        .map(|x| x.to_rational().ok_or_else(|| Error::Numerical("non-finite value in simplex".into())))
        .collect()
}

pub(super) fn run<S: Scalar>(sf: &StandardForm, eps: S) -> Result<RawOutcome> {
    let tol = Tol::new(eps);
    let m = sf.rows.len();
    let n = sf.n_struct;

    let mut kinds = vec![ColKind::Structural; n];
    let mut slack_of = vec![None; m];
    let mut art_of = vec![None; m];
    for (i, row) in sf.rows.iter().enumerate() {
        if row.sense != Sense::Eq {
            slack_of[i] = Some(kinds.len());
            kinds.push(ColKind::Slack);
        }
    }
    for (i, row) in sf.rows.iter().enumerate() {
        if row.sense != Sense::Le {
            art_of[i] = Some(kinds.len());
            kinds.push(ColKind::Artificial);
        }
    }
    let ncols = kinds.len();

    // Full constraint matrix [A | slacks | artificials], kept for dual recovery.
    let mut full: Vec<Vec<S>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, row) in sf.rows.iter().enumerate() {
        let mut r: Vec<S> = row.coeffs.iter().map(S::from_rational).collect();
        r.resize(ncols, S::zero());
        if let Some(s) = slack_of[i] {
            r[s] = if row.sense == Sense::Le { S::one() } else { -S::one() };
        }
        if let Some(a) = art_of[i] {
            r[a] = S::one();
        }
        basis.push(match row.sense {
            Sense::Le => slack_of[i].unwrap(),
            _ => art_of[i].unwrap(),
        });
        full.push(r);
    }

    let rows: Vec<Vec<S>> = full
        .iter()
        .zip(&sf.rows)
        .map(|(r, row)| {
            let mut t = r.clone();
            t.push(S::from_rational(&row.rhs));
            t
        })
        .collect();
    let mut tab = Tableau {
        rows,
        z: vec![S::zero(); ncols + 1],
        basis,
        tol: tol.clone(),
        pivots: 0,
    };

    // Phase 1: minimize the sum of artificials.
    let phase1_cost: Vec<S> = kinds
        .iter()
        .map(|k| if *k == ColKind::Artificial { S::one() } else { S::zero() })
        .collect();
    tab.set_costs(&phase1_cost);
    let all = vec![true; ncols];
    if let PhaseEnd::Unbounded(_) = tab.optimize(&all)? {
        return Err(Error::Numerical("phase 1 reported unbounded".into()));
    }
    let infeasibility = -tab.z[ncols].clone();
    if tol.is_pos(&infeasibility) {
        let all_rows: Vec<usize> = (0..m).collect();
        let y = basis_multipliers(&full, &all_rows, &tab.basis, &phase1_cost, &tol)?;
        return Ok(RawOutcome::Infeasible { farkas: convert(&y)? });
    }

    // Drive artificials out of the basis; rows where that is impossible are redundant.
    let mut kept: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        if kinds[tab.basis[i]] == ColKind::Artificial {
            let replacement = (0..ncols).find(|&j| kinds[j] != ColKind::Artificial && !tol.is_zero(&tab.rows[i][j]));
            match replacement {
                Some(j) => tab.pivot(i, j),
                None => continue,
            }
        }
        kept.push(i);
    }
    if kept.len() < m {
        let mut keep_mask = vec![false; m];
        for &i in &kept {
            keep_mask[i] = true;
        }
        let mut idx = 0;
        tab.rows.retain(|_| {
            idx += 1;
            keep_mask[idx - 1]
        });
        tab.basis = kept.iter().map(|&i| tab.basis[i]).collect();
    }

    // Phase 2 on the original costs, artificials barred from entering.
    let mut cost: Vec<S> = sf.cost.iter().map(S::from_rational).collect();
    cost.resize(ncols, S::zero());
    tab.set_costs(&cost);
    let allowed: Vec<bool> = kinds.iter().map(|k| *k != ColKind::Artificial).collect();
    match tab.optimize(&allowed)? {
        PhaseEnd::Unbounded(e) => {
            let mut ray = vec![S::zero(); ncols];
            ray[e] = S::one();
            for (i, row) in tab.rows.iter().enumerate() {
                ray[tab.basis[i]] = -row[e].clone();
            }
            ray.truncate(n);
            Ok(RawOutcome::Unbounded { ray: convert(&ray)? })
        }
        PhaseEnd::Optimal => {
            let mut x = vec![S::zero(); ncols];
            for (i, row) in tab.rows.iter().enumerate() {
                x[tab.basis[i]] = row[ncols].clone();
            }
            x.truncate(n);
            let y_kept = basis_multipliers(&full, &kept, &tab.basis, &cost, &tol)?;
            let mut duals = vec![S::zero(); m];
            for (&i, y) in kept.iter().zip(y_kept) {
                duals[i] = y;
            }
            log::trace!("simplex finished after {} pivots", tab.pivots);
            Ok(RawOutcome::Optimal {
                x: convert(&x)?,
                duals: convert(&duals)?,
            })
        }
    }
}
