//! Multidimensional reward functions paired with lower bounds.

use num::Zero;

use crate::error::{Error, Result};
use crate::lp::dot;
use crate::mdp::{MarkovEnv, VisitationVector};
use crate::numeric::{NumericMode, Rational};

/// `d` reward rows over the canonical (state, action) order, plus one lower
/// bound per row. A policy is feasible when `R ρ >= c` componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSpec {
    matrix: Vec<Vec<Rational>>,
    lower_bounds: Vec<Rational>,
}

impl RewardSpec {
    pub fn new(matrix: Vec<Vec<Rational>>, lower_bounds: Vec<Rational>) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::Malformed("reward spec needs at least one dimension".into()));
        }
        if matrix.len() != lower_bounds.len() {
            return Err(Error::Malformed(format!(
                "{} reward rows but {} lower bounds",
                matrix.len(),
                lower_bounds.len()
            )));
        }
        let width = matrix[0].len();
        if matrix.iter().any(|row| row.len() != width) {
            return Err(Error::Malformed("reward rows differ in length".into()));
        }
        Ok(RewardSpec { matrix, lower_bounds })
    }

    /// All-zero rewards and bounds.
    pub fn zero(dimension: usize, width: usize) -> Self {
        RewardSpec {
            matrix: vec![vec![Rational::zero(); width]; dimension],
            lower_bounds: vec![Rational::zero(); dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.len()
    }

    pub fn width(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn lower_bounds(&self) -> &[Rational] {
        &self.lower_bounds
    }

    pub fn check_env(&self, env: &MarkovEnv) -> Result<()> {
        if self.width() != env.num_pairs() {
            return Err(Error::Malformed(format!(
                "reward rows have {} entries but the environment has {} state-action pairs",
                self.width(),
                env.num_pairs()
            )));
        }
        Ok(())
    }

    /// `R ρ`.
    pub fn values(&self, rho: &VisitationVector) -> Vec<Rational> {
        self.matrix.iter().map(|row| dot(row, rho.entries())).collect()
    }

    /// Indices `i` with `values[i] < c_i` under `mode`.
    pub fn violated(&self, values: &[Rational], mode: NumericMode) -> Vec<usize> {
        values
            .iter()
            .zip(&self.lower_bounds)
            .enumerate()
            .filter(|(_, (v, c))| !mode.approx_ge(v, c))
            .map(|(i, _)| i)
            .collect()
    }

    /// Scale row `i` and its bound by `factor`.
    pub fn scale_dimension(&mut self, i: usize, factor: &Rational) {
        for v in self.matrix[i].iter_mut() {
            *v *= factor;
        }
        self.lower_bounds[i] *= factor;
    }

    /// Append the rows of `other`.
    pub fn stack(mut self, other: RewardSpec) -> Self {
        self.matrix.extend(other.matrix);
        self.lower_bounds.extend(other.lower_bounds);
        self
    }
}
