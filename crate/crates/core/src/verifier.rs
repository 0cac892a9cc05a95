//! Checking a candidate `⟨R, c⟩` against a SOAP under feasibility semantics.

use rayon::prelude::*;

use crate::error::Result;
use crate::mdp::{compute_visitation, enumerate_deterministic_policies, MarkovEnv, Policy};
use crate::numeric::{to_f64, NumericMode, Rational};
use crate::reward::RewardSpec;
use crate::soap::Soap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Good,
    Bad,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Good => "good",
            Role::Bad => "bad",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyVerdict {
    pub name: String,
    pub role: Role,
    /// `V_i(s₀)` per reward dimension.
    pub values: Vec<Rational>,
    pub feasible: bool,
    /// Dimensions with `V_i < c_i`.
    pub violated: Vec<usize>,
    /// Dimensions where `V_i` sits on `c_i` (exactly, or within the float tolerance).
    pub boundary: Vec<usize>,
}

impl PolicyVerdict {
    /// Good policies must be feasible, bad ones infeasible.
    pub fn as_required(&self) -> bool {
        match self.role {
            Role::Good => self.feasible,
            Role::Bad => !self.feasible,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationReport {
    pub realized: bool,
    pub per_policy: Vec<PolicyVerdict>,
}

impl RealizationReport {
    pub fn verdict(&self, name: &str) -> Option<&PolicyVerdict> {
        self.per_policy.iter().find(|v| v.name == name)
    }

    /// Whether any verdict depends on a value within tolerance of its bound.
    pub fn has_boundary_cases(&self) -> bool {
        self.per_policy.iter().any(|v| !v.boundary.is_empty())
    }
}

fn evaluate(env: &MarkovEnv, policy: &Policy, role: Role, spec: &RewardSpec, mode: NumericMode) -> Result<PolicyVerdict> {
    let rho = compute_visitation(env, policy, mode)?;
    let values = spec.values(&rho);
    let violated = spec.violated(&values, mode);
    let boundary = values
        .iter()
        .zip(spec.lower_bounds())
        .enumerate()
        .filter(|(_, (v, c))| match mode {
            NumericMode::ExactRational => v == c,
            NumericMode::Float { tolerance } => (to_f64(v) - to_f64(c)).abs() <= tolerance,
        })
        .map(|(i, _)| i)
        .collect();
    Ok(PolicyVerdict {
        name: policy.name.clone(),
        role,
        values,
        feasible: violated.is_empty(),
        violated,
        boundary,
    })
}

/// Evaluate every SOAP policy under `spec`. The spec realizes the SOAP when
/// every good policy meets all `d` bounds (ties count as feasible) and every
/// bad policy misses at least one.
pub fn verify_realization(env: &MarkovEnv, soap: &Soap, spec: &RewardSpec, mode: NumericMode) -> Result<RealizationReport> {
    spec.check_env(env)?;
    let tagged: Vec<(&Policy, Role)> = soap
        .good()
        .iter()
        .map(|p| (p, Role::Good))
        .chain(soap.bad().iter().map(|p| (p, Role::Bad)))
        .collect();
    let per_policy = tagged
        .par_iter()
        .map(|(p, role)| evaluate(env, p, *role, spec, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(RealizationReport {
        realized: per_policy.iter().all(PolicyVerdict::as_required),
        per_policy,
    })
}

/// Every deterministic policy that is feasible under `spec`, in enumeration order.
pub fn brute_force_feasible_set(env: &MarkovEnv, spec: &RewardSpec, limit: u128, mode: NumericMode) -> Result<Vec<Policy>> {
    spec.check_env(env)?;
    let all = enumerate_deterministic_policies(env, limit)?;
    let verdicts = all
        .par_iter()
        .map(|p| evaluate(env, p, Role::Good, spec, mode).map(|v| v.feasible))
        .collect::<Result<Vec<bool>>>()?;
    Ok(all.into_iter().zip(verdicts).filter(|(_, ok)| *ok).map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::entailment;
    use crate::numeric::{int, ratio};

    fn pi(i: usize, j: usize) -> Policy {
        Policy::deterministic(format!("pi{i}{j}"), vec![i - 1, j - 1])
    }

    fn paper_spec() -> RewardSpec {
        RewardSpec::new(
            vec![vec![int(0), int(1), int(0), int(1)], vec![int(0), int(-1), int(0), int(-1)]],
            vec![int(2), int(-8)],
        )
        .unwrap()
    }

    #[test]
    fn paper_example_realizes_xor() {
        let env = entailment();
        let soap = Soap::new(&env, vec![pi(1, 2), pi(2, 1)], vec![pi(1, 1), pi(2, 2)]).unwrap();
        let report = verify_realization(&env, &soap, &paper_spec(), NumericMode::ExactRational).unwrap();
        assert!(report.realized);
        let v = |n: &str| report.verdict(n).unwrap();
        assert_eq!(v("pi11").values, vec![int(0), int(0)]);
        assert_eq!(v("pi11").violated, vec![0]);
        assert_eq!(v("pi22").values, vec![int(10), int(-10)]);
        assert_eq!(v("pi22").violated, vec![1]);
        assert_eq!(v("pi12").values, vec![ratio(90, 19), ratio(-90, 19)]);
        assert!(v("pi12").feasible);
        assert_eq!(v("pi21").values, vec![ratio(100, 19), ratio(-100, 19)]);
        assert!(v("pi21").feasible);
    }

    #[test]
    fn zero_reward_admits_everything() {
        let env = entailment();
        let zero = RewardSpec::zero(1, 4);
        let with_bad = Soap::new(&env, vec![pi(1, 2)], vec![pi(1, 1)]).unwrap();
        assert!(!verify_realization(&env, &with_bad, &zero, NumericMode::ExactRational).unwrap().realized);
        let no_bad = Soap::new(&env, vec![pi(1, 2), pi(2, 2)], vec![]).unwrap();
        let report = verify_realization(&env, &no_bad, &zero, NumericMode::ExactRational).unwrap();
        assert!(report.realized);
        assert!(report.has_boundary_cases());
    }

    #[test]
    fn unreachable_bound_admits_nothing() {
        let env = entailment();
        // max |r| = 1, so every value is at most 10 < 11.
        let spec = RewardSpec::new(vec![vec![int(1); 4]], vec![int(11)]).unwrap();
        let soap = Soap::new(&env, vec![], vec![pi(1, 1), pi(2, 2)]).unwrap();
        assert!(verify_realization(&env, &soap, &spec, NumericMode::ExactRational).unwrap().realized);
        let soap = Soap::new(&env, vec![pi(1, 2)], vec![pi(1, 1)]).unwrap();
        assert!(!verify_realization(&env, &soap, &spec, NumericMode::ExactRational).unwrap().realized);
        assert!(brute_force_feasible_set(&env, &spec, 4096, NumericMode::ExactRational).unwrap().is_empty());
    }

    #[test]
    fn brute_force_matches_paper_marking() {
        let env = entailment();
        let feasible = brute_force_feasible_set(&env, &paper_spec(), 4096, NumericMode::ExactRational).unwrap();
        let names: Vec<&str> = feasible.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["pi12", "pi21"]);
    }

    #[test]
    fn all_ones_reward_at_total_mass() {
        let env = entailment();
        let spec = RewardSpec::new(vec![vec![int(1); 4]], vec![env.horizon_mass()]).unwrap();
        assert_eq!(brute_force_feasible_set(&env, &spec, 4096, NumericMode::ExactRational).unwrap().len(), 4);
        let zero_pos = RewardSpec::new(vec![vec![int(0); 4]], vec![ratio(1, 1000)]).unwrap();
        assert!(brute_force_feasible_set(&env, &zero_pos, 4096, NumericMode::ExactRational).unwrap().is_empty());
    }

    #[test]
    fn float_boundary_flagged() {
        let env = entailment();
        // π12 has value 90/19 on dimension 0; put the bound a hair above it.
        let c = ratio(90, 19) + ratio(1, 10_000_000_000);
        let spec = RewardSpec::new(vec![vec![int(0), int(1), int(0), int(1)]], vec![c]).unwrap();
        let soap = Soap::new(&env, vec![pi(1, 2)], vec![]).unwrap();
        let float = verify_realization(&env, &soap, &spec, NumericMode::default()).unwrap();
        assert!(float.realized);
        assert_eq!(float.per_policy[0].boundary, vec![0]);
        let exact = verify_realization(&env, &soap, &spec, NumericMode::ExactRational).unwrap();
        assert!(!exact.realized);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let env = entailment();
        let soap = Soap::new(&env, vec![pi(1, 2)], vec![]).unwrap();
        let spec = RewardSpec::zero(1, 3);
        assert!(verify_realization(&env, &soap, &spec, NumericMode::ExactRational).is_err());
    }
}
