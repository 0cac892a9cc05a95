//! Conversion between a general [`LinearProgram`] and the nonnegative
//! standard form the tableau works on.

use num::{Signed, Zero};

use super::{dot, Certificate, DualCertificate, FarkasCertificate, LinearProgram, LpSolution, LpStatus, Sense};
use crate::numeric::Rational;

/// How an original variable is expressed in standard-form columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// `x = offset + x'`
    Shift { col: usize, offset: Rational },
    /// `x = offset - x'`
    Flip { col: usize, offset: Rational },
    /// `x = x⁺ - x⁻`
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy)]
pub(super) enum RowOrigin {
    Constraint { index: usize, negated: bool },
    UpperBound,
}

#[derive(Debug, Clone)]
pub(super) struct StdRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub sense: Sense,
    pub origin: RowOrigin,
}

/// `min cost·x' s.t. rows, x' >= 0` with every right-hand side nonnegative.
#[derive(Debug, Clone)]
pub(super) struct StandardForm {
    pub n_struct: usize,
    pub cost: Vec<Rational>,
    pub rows: Vec<StdRow>,
    var_map: Vec<VarMap>,
}

/// Solver output in standard-form coordinates.
#[derive(Debug, Clone)]
pub(super) enum RawOutcome {
    Optimal { x: Vec<Rational>, duals: Vec<Rational> },
    Infeasible { farkas: Vec<Rational> },
    Unbounded { ray: Vec<Rational> },
}

impl StandardForm {
    pub fn new(lp: &LinearProgram) -> Self {
        let mut var_map = Vec::with_capacity(lp.num_vars());
        let mut n_struct = 0;
        let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
        for bound in lp.bounds() {
            let map = match (&bound.lower, &bound.upper) {
                (Some(lo), hi) => {
                    if let Some(hi) = hi {
                        bound_rows.push((n_struct, hi - lo));
                    }
                    VarMap::Shift {
                        col: n_struct,
                        offset: lo.clone(),
                    }
                }
                (None, Some(hi)) => VarMap::Flip {
                    col: n_struct,
                    offset: hi.clone(),
                },
                (None, None) => {
                    n_struct += 1;
                    VarMap::Split {
                        pos: n_struct - 1,
                        neg: n_struct,
                    }
                }
            };
            n_struct += 1;
            var_map.push(map);
        }

        let mut cost = vec![Rational::zero(); n_struct];
        for (c, map) in lp.objective().iter().zip(&var_map) {
            match map {
                VarMap::Shift { col, .. } => cost[*col] += c,
                VarMap::Flip { col, .. } => cost[*col] -= c,
                VarMap::Split { pos, neg } => {
                    cost[*pos] += c;
                    cost[*neg] -= c;
                }
            }
        }

        let mut rows = Vec::with_capacity(lp.num_rows() + bound_rows.len());
        for (index, ((a, sense), b)) in lp.matrix().iter().zip(lp.senses()).zip(lp.rhs()).enumerate() {
            let mut coeffs = vec![Rational::zero(); n_struct];
            let mut rhs = b.clone();
            for (aj, map) in a.iter().zip(&var_map) {
                if aj.is_zero() {
                    continue;
                }
                match map {
                    VarMap::Shift { col, offset } => {
                        coeffs[*col] += aj;
                        rhs -= aj * offset;
                    }
                    VarMap::Flip { col, offset } => {
                        coeffs[*col] -= aj;
                        rhs -= aj * offset;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs[*pos] += aj;
                        coeffs[*neg] -= aj;
                    }
                }
            }
            let negated = rhs.is_negative();
            let sense = if negated {
                for c in coeffs.iter_mut() {
                    *c = -c.clone();
                }
                rhs = -rhs;
                match sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                }
            } else {
                *sense
            };
            rows.push(StdRow {
                coeffs,
                rhs,
                sense,
                origin: RowOrigin::Constraint { index, negated },
            });
        }
        for (col, width) in bound_rows {
            let mut coeffs = vec![Rational::zero(); n_struct];
            coeffs[col] = Rational::from_integer(1.into());
            rows.push(StdRow {
                coeffs,
                rhs: width,
                sense: Sense::Le,
                origin: RowOrigin::UpperBound,
            });
        }

        StandardForm {
            n_struct,
            cost,
            rows,
            var_map,
        }
    }

    /// Map standard-form row multipliers back onto the original rows.
    fn original_multipliers(&self, lp: &LinearProgram, std_y: &[Rational]) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); lp.num_rows()];
        for (row, yk) in self.rows.iter().zip(std_y) {
            if let RowOrigin::Constraint { index, negated } = row.origin {
                y[index] = if negated { -yk.clone() } else { yk.clone() };
            }
        }
        y
    }

    fn original_point(&self, x_std: &[Rational], direction: bool) -> Vec<Rational> {
        self.var_map
            .iter()
            .map(|map| match map {
                VarMap::Shift { col, offset } => {
                    if direction {
                        x_std[*col].clone()
                    } else {
                        offset + &x_std[*col]
                    }
                }
                VarMap::Flip { col, offset } => {
                    if direction {
                        -x_std[*col].clone()
                    } else {
                        offset - &x_std[*col]
                    }
                }
                VarMap::Split { pos, neg } => &x_std[*pos] - &x_std[*neg],
            })
            .collect()
    }

    pub fn recover(&self, lp: &LinearProgram, raw: RawOutcome) -> LpSolution {
        match raw {
            RawOutcome::Optimal { x, duals } => {
                let primal = self.original_point(&x, false);
                let objective_value = dot(lp.objective(), &primal);
                let row_duals = self.original_multipliers(lp, &duals);
                let reduced_costs = (0..lp.num_vars())
                    .map(|j| {
                        let ay: Rational = lp.matrix().iter().zip(&row_duals).map(|(row, y)| &row[j] * y).sum();
                        &lp.objective()[j] - ay
                    })
                    .collect();
                LpSolution {
                    status: LpStatus::Optimal,
                    primal: Some(primal),
                    objective_value: Some(objective_value),
                    certificate: Certificate::Dual(DualCertificate {
                        row_duals,
                        reduced_costs,
                    }),
                }
            }
            RawOutcome::Infeasible { farkas } => LpSolution {
                status: LpStatus::Infeasible,
                primal: None,
                objective_value: None,
                certificate: Certificate::Farkas(FarkasCertificate {
                    multipliers: self.original_multipliers(lp, &farkas),
                }),
            },
            RawOutcome::Unbounded { ray } => LpSolution {
                status: LpStatus::Unbounded,
                primal: None,
                objective_value: None,
                certificate: Certificate::Ray(self.original_point(&ray, true)),
            },
        }
    }
}
