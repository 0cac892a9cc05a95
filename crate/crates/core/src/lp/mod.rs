//! Linear programming.
//!
//! A dense two-phase primal simplex with Bland's rule, generic over the
//! [`Scalar`](crate::numeric::Scalar) backend. Problems are stated with
//! general row senses and per-variable bounds; every result carries a
//! certificate (dual multipliers, a Farkas vector, or an improving ray) that
//! can be checked against the original problem without trusting the solver.

mod simplex;
mod standard;

use std::fmt;

use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{format_rational, to_f64, NumericMode, Rational};

/// Row sense of a constraint `a·x (sense) b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// Variable bounds; `None` means unbounded in that direction.
#[derive(Debug, Clone, PartialEq)]
pub struct VarBound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBound {
    pub fn nonnegative() -> Self {
        VarBound {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        VarBound {
            lower: None,
            upper: None,
        }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        VarBound {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

/// `minimize objective·x` subject to rows and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    matrix: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    senses: Vec<Sense>,
    bounds: Vec<VarBound>,
}

impl LinearProgram {
    /// `num_vars` nonnegative variables, zero objective, no rows.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); num_vars],
            matrix: Vec::new(),
            rhs: Vec::new(),
            senses: Vec::new(),
            bounds: vec![VarBound::nonnegative(); num_vars],
        }
    }

    pub fn from_parts(
        objective: Vec<Rational>,
        matrix: Vec<Vec<Rational>>,
        rhs: Vec<Rational>,
        senses: Vec<Sense>,
        bounds: Vec<VarBound>,
    ) -> Result<Self> {
        let lp = LinearProgram {
            objective,
            matrix,
            rhs,
            senses,
            bounds,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(Error::Malformed(format!(
                "{} variable bounds for {} objective coefficients",
                self.bounds.len(),
                n
            )));
        }
        let m = self.matrix.len();
        if self.rhs.len() != m || self.senses.len() != m {
            return Err(Error::Malformed(format!(
                "{m} constraint rows but {} right-hand sides and {} senses",
                self.rhs.len(),
                self.senses.len()
            )));
        }
        if let Some(i) = self.matrix.iter().position(|row| row.len() != n) {
            return Err(Error::Malformed(format!(
                "row {i} has {} coefficients, expected {n}",
                self.matrix[i].len()
            )));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(lo), Some(hi)) = (&b.lower, &b.upper) {
                if lo > hi {
                    return Err(Error::Malformed(format!(
                        "variable {j} has lower bound {} above upper bound {}",
                        format_rational(lo),
                        format_rational(hi)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn bounds(&self) -> &[VarBound] {
        &self.bounds
    }

    pub fn set_objective(&mut self, objective: Vec<Rational>) {
        assert_eq!(objective.len(), self.num_vars(), "objective length");
        self.objective = objective;
    }

    pub fn set_bounds(&mut self, var: usize, bound: VarBound) {
        self.bounds[var] = bound;
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, sense: Sense, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars(), "row length");
        self.matrix.push(coeffs);
        self.senses.push(sense);
        self.rhs.push(rhs);
    }

    /// Largest violation of any row or bound by `x` (zero when feasible).
    pub fn max_violation(&self, x: &[Rational]) -> Rational {
        let mut worst = Rational::zero();
        for ((row, sense), b) in self.matrix.iter().zip(&self.senses).zip(&self.rhs) {
            let lhs = dot(row, x);
            let v = match sense {
                Sense::Le => &lhs - b,
                Sense::Ge => b - &lhs,
                Sense::Eq => (&lhs - b).abs(),
            };
            if v > worst {
                worst = v;
            }
        }
        for (xj, bound) in x.iter().zip(&self.bounds) {
            if let Some(lo) = &bound.lower {
                worst = worst.max(lo - xj);
            }
            if let Some(hi) = &bound.upper {
                worst = worst.max(xj - hi);
            }
        }
        worst
    }

    pub fn is_feasible_point(&self, x: &[Rational], mode: NumericMode) -> bool {
        x.len() == self.num_vars()
            && match mode {
                NumericMode::ExactRational => self.max_violation(x).is_zero(),
                NumericMode::Float { tolerance } => to_f64(&self.max_violation(x)) <= tolerance,
            }
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn terms(coeffs: &[Rational]) -> String {
            let parts: Vec<String> = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| format!("{} x{}", format_rational(c), j))
                .collect();
            if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" + ")
            }
        }
        writeln!(f, "minimize")?;
        writeln!(f, "  {}", terms(&self.objective))?;
        writeln!(f, "subject to")?;
        for (i, ((row, sense), b)) in self.matrix.iter().zip(&self.senses).zip(&self.rhs).enumerate() {
            writeln!(f, "  r{i}: {} {sense} {}", terms(row), format_rational(b))?;
        }
        writeln!(f, "bounds")?;
        for (j, b) in self.bounds.iter().enumerate() {
            let lo = b.lower.as_ref().map_or("-inf".to_string(), format_rational);
            let hi = b.upper.as_ref().map_or("+inf".to_string(), format_rational);
            writeln!(f, "  {lo} <= x{j} <= {hi}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Row multipliers `y` of an optimal basis, with reduced costs `c - Aᵀy`.
///
/// Sign convention: `y_i >= 0` on `>=` rows, `y_i <= 0` on `<=` rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCertificate {
    #[serde(with = "crate::numeric::serde_rational::vec")]
    pub row_duals: Vec<Rational>,
    #[serde(with = "crate::numeric::serde_rational::vec")]
    pub reduced_costs: Vec<Rational>,
}

impl DualCertificate {
    /// `yᵀb + Σ_j min_{l_j <= x_j <= u_j} d_j x_j`, or `None` if the
    /// multipliers have the wrong signs or a reduced cost points at an
    /// infinite bound. Equals the optimal value for an optimal basis.
    pub fn dual_objective(&self, lp: &LinearProgram, mode: NumericMode) -> Option<Rational> {
        if !multiplier_signs_ok(lp, &self.row_duals, mode) {
            return None;
        }
        let mut value = dot(&self.row_duals, &lp.rhs);
        for (d, bound) in self.reduced_costs.iter().zip(&lp.bounds) {
            if is_pos(d, mode) {
                value += d * bound.lower.as_ref()?;
            } else if is_neg(d, mode) {
                value += d * bound.upper.as_ref()?;
            }
        }
        Some(value)
    }
}

/// Farkas infeasibility witness: row multipliers `y` such that every `x` in
/// the variable box satisfies `yᵀA x < yᵀb`, while every feasible `x` would
/// need `yᵀA x >= yᵀb`.
///
/// Sign convention matches [`DualCertificate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarkasCertificate {
    #[serde(with = "crate::numeric::serde_rational::vec")]
    pub multipliers: Vec<Rational>,
}

impl FarkasCertificate {
    /// Combined row `g = Aᵀy`.
    pub fn combined_row(&self, lp: &LinearProgram) -> Vec<Rational> {
        (0..lp.num_vars())
            .map(|j| {
                lp.matrix
                    .iter()
                    .zip(&self.multipliers)
                    .map(|(row, y)| &row[j] * y)
                    .sum()
            })
            .collect()
    }

    /// Supremum of `gᵀx` over the variable box, `None` if infinite.
    fn box_supremum(&self, lp: &LinearProgram, mode: NumericMode) -> Option<Rational> {
        let mut sup = Rational::zero();
        for (g, bound) in self.combined_row(lp).iter().zip(&lp.bounds) {
            if is_pos(g, mode) {
                sup += g * bound.upper.as_ref()?;
            } else if is_neg(g, mode) {
                sup += g * bound.lower.as_ref()?;
            }
        }
        Some(sup)
    }

    /// Check the certificate against `lp` without reference to the solver.
    pub fn certifies(&self, lp: &LinearProgram, mode: NumericMode) -> bool {
        if self.multipliers.len() != lp.num_rows() || !multiplier_signs_ok(lp, &self.multipliers, mode) {
            return false;
        }
        let Some(sup) = self.box_supremum(lp, mode) else {
            return false;
        };
        let target = dot(&self.multipliers, &lp.rhs);
        is_pos(&(target - sup), mode)
    }
}

/// Result certificate attached to every solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Dual(DualCertificate),
    Farkas(FarkasCertificate),
    /// Direction `d` with `A d` compatible with the senses, `d` compatible
    /// with the finite bounds, and `c·d < 0`.
    Ray(#[serde(with = "crate::numeric::serde_rational::vec")] Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Option<Vec<Rational>>,
    pub objective_value: Option<Rational>,
    pub certificate: Certificate,
}

impl LpSolution {
    pub fn farkas(&self) -> Option<&FarkasCertificate> {
        match &self.certificate {
            Certificate::Farkas(f) => Some(f),
            _ => None,
        }
    }

    pub fn duals(&self) -> Option<&DualCertificate> {
        match &self.certificate {
            Certificate::Dual(d) => Some(d),
            _ => None,
        }
    }
}

/// Check an unboundedness ray against `lp`.
pub fn ray_certifies(lp: &LinearProgram, ray: &[Rational], mode: NumericMode) -> bool {
    if ray.len() != lp.num_vars() {
        return false;
    }
    let rows_ok = lp.matrix.iter().zip(&lp.senses).all(|(row, sense)| {
        let v = dot(row, ray);
        match sense {
            Sense::Le => !is_pos(&v, mode),
            Sense::Ge => !is_neg(&v, mode),
            Sense::Eq => !is_pos(&v, mode) && !is_neg(&v, mode),
        }
    });
    let bounds_ok = ray.iter().zip(&lp.bounds).all(|(d, b)| {
        (b.lower.is_none() || !is_neg(d, mode)) && (b.upper.is_none() || !is_pos(d, mode))
    });
    rows_ok && bounds_ok && is_neg(&dot(&lp.objective, ray), mode)
}

/// Outcome of a pure feasibility query.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(FarkasCertificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Solve `lp` with the backend selected by `mode`.
pub fn solve(lp: &LinearProgram, mode: NumericMode) -> Result<LpSolution> {
    lp.validate()?;
    log::trace!("solving LP ({mode:?}):\n{lp}");
    let std_form = standard::StandardForm::new(lp);
    let raw = match mode {
        NumericMode::ExactRational => simplex::run::<Rational>(&std_form, Rational::zero())?,
        NumericMode::Float { tolerance } => simplex::run::<f64>(&std_form, tolerance)?,
    };
    Ok(std_form.recover(lp, raw))
}

/// Feasibility of `lp`'s constraints, ignoring its objective.
pub fn check_feasible(lp: &LinearProgram, mode: NumericMode) -> Result<Feasibility> {
    let mut zero_obj = lp.clone();
    zero_obj.objective = vec![Rational::zero(); lp.num_vars()];
    let sol = solve(&zero_obj, mode)?;
    match (sol.status, sol.certificate) {
        (LpStatus::Infeasible, Certificate::Farkas(f)) => Ok(Feasibility::Infeasible(f)),
        (LpStatus::Infeasible, _) => Err(Error::Numerical("infeasible LP without certificate".into())),
        (_, _) => sol
            .primal
            .map(Feasibility::Feasible)
            .ok_or_else(|| Error::Numerical("feasible LP without a primal point".into())),
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn is_pos(x: &Rational, mode: NumericMode) -> bool {
    match mode {
        NumericMode::ExactRational => x.is_positive(),
        NumericMode::Float { tolerance } => to_f64(x) > tolerance,
    }
}

fn is_neg(x: &Rational, mode: NumericMode) -> bool {
    is_pos(&-x, mode)
}

fn multiplier_signs_ok(lp: &LinearProgram, y: &[Rational], mode: NumericMode) -> bool {
    y.len() == lp.num_rows()
        && y.iter().zip(&lp.senses).all(|(yi, sense)| match sense {
            Sense::Ge => !is_neg(yi, mode),
            Sense::Le => !is_pos(yi, mode),
            Sense::Eq => true,
        })
}

/// Build a row from `(index, coefficient)` pairs.
pub fn sparse_row(n: usize, entries: &[(usize, Rational)]) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); n];
    for (j, c) in entries {
        row[*j] += c;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, ratio};

    fn r(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn single_variable_bound() {
        // min -x s.t. x <= 5, x >= 0
        let mut lp = LinearProgram::new(1);
        lp.set_objective(r(&[-1]));
        lp.add_row(r(&[1]), Sense::Le, int(5));
        for mode in [NumericMode::ExactRational, NumericMode::default()] {
            let sol = solve(&lp, mode).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!(mode.approx_eq(&sol.primal.as_ref().unwrap()[0], &int(5)));
            assert!(mode.approx_eq(sol.objective_value.as_ref().unwrap(), &int(-5)));
            let dual = sol.duals().unwrap().dual_objective(&lp, mode).unwrap();
            assert!(mode.approx_eq(&dual, &int(-5)));
        }
    }

    #[test]
    fn contradictory_rows_give_farkas() {
        // min 0 s.t. x >= 1, x <= 0
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, VarBound::free());
        lp.add_row(r(&[1]), Sense::Ge, int(1));
        lp.add_row(r(&[1]), Sense::Le, int(0));
        let sol = solve(&lp, NumericMode::ExactRational).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(sol.primal.is_none());
        assert!(sol.farkas().unwrap().certifies(&lp, NumericMode::ExactRational));
    }

    #[test]
    fn two_constraint_vertex() {
        // min x+y s.t. x+2y >= 2, 3x+y >= 3; optimum 7/5 at (4/5, 3/5)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(r(&[1, 1]));
        lp.add_row(r(&[1, 2]), Sense::Ge, int(2));
        lp.add_row(r(&[3, 1]), Sense::Ge, int(3));
        let sol = solve(&lp, NumericMode::ExactRational).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.primal.unwrap(), vec![ratio(4, 5), ratio(3, 5)]);
        assert_eq!(sol.objective_value.unwrap(), ratio(7, 5));
        let duals = sol.certificate;
        let Certificate::Dual(d) = duals else { panic!("expected duals") };
        assert_eq!(d.dual_objective(&lp, NumericMode::ExactRational).unwrap(), ratio(7, 5));
    }

    #[test]
    fn unbounded_gives_ray() {
        // min -x - y s.t. x - y <= 1
        let mut lp = LinearProgram::new(2);
        lp.set_objective(r(&[-1, -1]));
        lp.add_row(r(&[1, -1]), Sense::Le, int(1));
        let sol = solve(&lp, NumericMode::ExactRational).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
        let Certificate::Ray(ray) = &sol.certificate else { panic!("expected ray") };
        assert!(ray_certifies(&lp, ray, NumericMode::ExactRational));
    }

    #[test]
    fn feasibility_queries() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, VarBound::free());
        lp.add_row(r(&[1]), Sense::Ge, int(0));
        lp.add_row(r(&[1]), Sense::Le, int(1));
        match check_feasible(&lp, NumericMode::ExactRational).unwrap() {
            Feasibility::Feasible(x) => assert!(x[0] >= int(0) && x[0] <= int(1)),
            other => panic!("expected feasible, got {other:?}"),
        }

        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, VarBound::free());
        lp.add_row(r(&[1]), Sense::Eq, int(1));
        lp.add_row(r(&[1]), Sense::Eq, int(2));
        match check_feasible(&lp, NumericMode::ExactRational).unwrap() {
            Feasibility::Infeasible(f) => assert!(f.certifies(&lp, NumericMode::ExactRational)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn bounds_are_respected() {
        // min x - y with x in [-3, 2], y <= 4 (no lower bound)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(r(&[1, -1]));
        lp.set_bounds(0, VarBound::between(int(-3), int(2)));
        lp.set_bounds(1, VarBound { lower: None, upper: Some(int(4)) });
        let sol = solve(&lp, NumericMode::ExactRational).unwrap();
        assert_eq!(sol.primal.as_ref().unwrap(), &r(&[-3, 4]));
        assert_eq!(sol.objective_value.as_ref().unwrap(), &int(-7));
        let d = sol.duals().unwrap().dual_objective(&lp, NumericMode::ExactRational);
        assert_eq!(d, Some(int(-7)));
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 twice, plus 2x + 2y = 2; min x
        let mut lp = LinearProgram::new(2);
        lp.set_objective(r(&[1, 0]));
        lp.add_row(r(&[1, 1]), Sense::Eq, int(1));
        lp.add_row(r(&[1, 1]), Sense::Eq, int(1));
        lp.add_row(r(&[2, 2]), Sense::Eq, int(2));
        let sol = solve(&lp, NumericMode::ExactRational).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.primal.as_ref().unwrap(), &r(&[0, 1]));
        let d = sol.duals().unwrap().dual_objective(&lp, NumericMode::ExactRational);
        assert_eq!(d, Some(int(0)));
    }

    #[test]
    fn malformed_dimensions_rejected() {
        let err = LinearProgram::from_parts(r(&[1, 1]), vec![r(&[1])], r(&[0]), vec![Sense::Le], vec![VarBound::free(); 2]);
        assert!(matches!(err, Err(Error::Malformed(_))));
        let err = LinearProgram::from_parts(r(&[1]), vec![], vec![], vec![], vec![VarBound::between(int(1), int(0))]);
        assert!(matches!(err, Err(Error::Malformed(_))));
    }

    #[test]
    fn listing_mentions_every_row() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(r(&[1, 2]), Sense::Ge, int(2));
        let text = lp.to_string();
        assert!(text.contains("r0: 1 x0 + 2 x1 >= 2"), "{text}");
        assert!(text.contains("0 <= x1 <= +inf"), "{text}");
    }
}
