//! SOAP instances (a set of acceptable and a set of unacceptable policies)
//! and the consistency check.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{compute_visitations, MarkovEnv, Policy, VisitationVector};
use crate::numeric::NumericMode;

/// Disjoint good and bad policy sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Soap {
    good: Vec<Policy>,
    bad: Vec<Policy>,
}

impl Soap {
    /// Rejects a policy that appears on both sides, by name or as the same
    /// action-probability function, and policies shaped for another
    /// environment. Probability sums are checked when visitations are computed.
    pub fn new(env: &MarkovEnv, good: Vec<Policy>, bad: Vec<Policy>) -> Result<Self> {
        let (ns, na) = (env.num_states(), env.num_actions());
        for p in good.iter().chain(&bad) {
            p.check_shape(env)?;
        }
        for side in [&good, &bad] {
            let mut names = HashSet::new();
            for p in side.iter() {
                if !names.insert(p.name.as_str()) {
                    return Err(Error::Malformed(format!("policy {:?} listed twice", p.name)));
                }
            }
        }
        for g in &good {
            for b in &bad {
                if g.name == b.name {
                    return Err(Error::Malformed(format!("policy {:?} is both good and bad", g.name)));
                }
                if g.same_function(b, ns, na) {
                    return Err(Error::Malformed(format!(
                        "good policy {:?} and bad policy {:?} are the same policy",
                        g.name, b.name
                    )));
                }
            }
        }
        Ok(Soap { good, bad })
    }

    pub fn good(&self) -> &[Policy] {
        &self.good
    }

    pub fn bad(&self) -> &[Policy] {
        &self.bad
    }

    /// Good and bad sets exchanged.
    pub fn swapped(&self) -> Soap {
        Soap {
            good: self.bad.clone(),
            bad: self.good.clone(),
        }
    }

    pub fn all_deterministic(&self) -> bool {
        self.good.iter().chain(&self.bad).all(Policy::is_deterministic)
    }

    /// Check every policy against `env` and compute its visitation.
    pub fn visitations(&self, env: &MarkovEnv, mode: NumericMode) -> Result<(Vec<VisitationVector>, Vec<VisitationVector>)> {
        Ok((
            compute_visitations(env, &self.good, mode)?,
            compute_visitations(env, &self.bad, mode)?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// `(good, bad)` pairs with equal visitations.
    pub witnesses: Vec<(String, String)>,
    /// Pairs on the same side with equal visitations; allowed, listed for information.
    pub same_side_duplicates: Vec<(String, String)>,
}

fn equal_pairs(a: &[(&Policy, &VisitationVector)], b: &[(&Policy, &VisitationVector)], mode: NumericMode, same_side: bool) -> Vec<(String, String)> {
    a.par_iter()
        .enumerate()
        .flat_map_iter(|(i, (pa, ra))| {
            b.iter()
                .enumerate()
                .filter(move |(j, _)| !same_side || *j > i)
                .filter(move |(_, (_, rb))| ra.approx_eq(rb, mode))
                .map(move |(_, (pb, _))| (pa.name.clone(), pb.name.clone()))
        })
        .collect()
}

/// A SOAP is consistent when no good policy has the same visitation vector
/// as a bad policy. Exact equality in exact mode; ∞-norm within the
/// tolerance in float mode.
pub fn check_consistency(env: &MarkovEnv, soap: &Soap, mode: NumericMode) -> Result<ConsistencyReport> {
    let (good_rho, bad_rho) = soap.visitations(env, mode)?;
    let good: Vec<_> = soap.good.iter().zip(&good_rho).collect();
    let bad: Vec<_> = soap.bad.iter().zip(&bad_rho).collect();
    let witnesses = equal_pairs(&good, &bad, mode, false);
    let mut same_side_duplicates = equal_pairs(&good, &good, mode, true);
    same_side_duplicates.extend(equal_pairs(&bad, &bad, mode, true));
    Ok(ConsistencyReport {
        consistent: witnesses.is_empty(),
        witnesses,
        same_side_duplicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::{entailment, steady_state};

    fn pi(i: usize, j: usize) -> Policy {
        Policy::deterministic(format!("pi{i}{j}"), vec![i - 1, j - 1])
    }

    #[test]
    fn steady_state_is_inconsistent() {
        let env = steady_state();
        let soap = Soap::new(&env, vec![pi(2, 1)], vec![pi(1, 1), pi(1, 2), pi(2, 2)]).unwrap();
        let report = check_consistency(&env, &soap, NumericMode::ExactRational).unwrap();
        assert!(!report.consistent);
        assert_eq!(report.witnesses, vec![("pi21".to_string(), "pi22".to_string())]);
        let report = check_consistency(&env, &soap, NumericMode::default()).unwrap();
        assert_eq!(report.witnesses, vec![("pi21".to_string(), "pi22".to_string())]);
    }

    #[test]
    fn entailment_xor_is_consistent() {
        let env = entailment();
        let soap = Soap::new(&env, vec![pi(1, 2), pi(2, 1)], vec![pi(1, 1), pi(2, 2)]).unwrap();
        let report = check_consistency(&env, &soap, NumericMode::ExactRational).unwrap();
        assert!(report.consistent);
        assert!(report.witnesses.is_empty());
    }

    #[test]
    fn empty_bad_set_is_vacuously_consistent() {
        let env = entailment();
        let soap = Soap::new(&env, vec![pi(1, 2)], vec![]).unwrap();
        assert!(check_consistency(&env, &soap, NumericMode::ExactRational).unwrap().consistent);
    }

    #[test]
    fn swapping_mirrors_witnesses() {
        let env = steady_state();
        let soap = Soap::new(&env, vec![pi(2, 1), pi(1, 1)], vec![pi(2, 2), pi(1, 2)]).unwrap();
        let a = check_consistency(&env, &soap, NumericMode::ExactRational).unwrap();
        let b = check_consistency(&env, &soap.swapped(), NumericMode::ExactRational).unwrap();
        let mut mirrored: Vec<_> = b.witnesses.into_iter().map(|(x, y)| (y, x)).collect();
        mirrored.sort();
        let mut original = a.witnesses;
        original.sort();
        assert_eq!(original, mirrored);
        assert_eq!(original, vec![("pi21".to_string(), "pi22".to_string())]);
    }

    #[test]
    fn same_side_duplicates_are_informational() {
        let env = steady_state();
        let soap = Soap::new(&env, vec![pi(2, 1), pi(2, 2)], vec![pi(1, 1)]).unwrap();
        let report = check_consistency(&env, &soap, NumericMode::ExactRational).unwrap();
        assert!(report.consistent);
        assert_eq!(report.same_side_duplicates, vec![("pi21".to_string(), "pi22".to_string())]);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let env = entailment();
        assert!(Soap::new(&env, vec![pi(1, 2)], vec![pi(1, 2)]).is_err());
        let alias = Policy::deterministic("alias", vec![0, 1]);
        assert!(Soap::new(&env, vec![pi(1, 2)], vec![alias]).is_err());
    }

    #[test]
    fn invalid_policy_named() {
        let env = entailment();
        match Soap::new(&env, vec![Policy::deterministic("broken", vec![0])], vec![pi(1, 1)]) {
            Err(Error::InvalidPolicy { name, .. }) => assert_eq!(name, "broken"),
            other => panic!("expected invalid policy, got {other:?}"),
        }
        let half = crate::numeric::ratio(1, 2);
        let unnormalized = Policy::stochastic("leaky", vec![vec![half.clone(), half.clone()], vec![half.clone(), half.clone() / crate::numeric::int(2)]]);
        let soap = Soap::new(&env, vec![unnormalized], vec![pi(1, 1)]).unwrap();
        match check_consistency(&env, &soap, NumericMode::ExactRational) {
            Err(Error::InvalidPolicy { name, .. }) => assert_eq!(name, "leaky"),
            other => panic!("expected invalid policy, got {other:?}"),
        }
    }
}
