//! Reward-free Markov environments, stationary policies, and discounted
//! state-action visitations.
//!
//! All vectors over state-action pairs use the canonical row-major order:
//! index `s * |A| + a` for the declared state and action lists.

use std::collections::HashSet;
use std::fmt;

use num::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::numeric::{format_rational, to_f64, NumericMode, Rational, Scalar, Tol};
use crate::reward::RewardSpec;

/// `⟨S, A, T, γ, s₀⟩` without a reward function.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovEnv {
    states: Vec<String>,
    actions: Vec<String>,
    /// Row `s * |A| + a` is the next-state distribution of `(s, a)`.
    transition: Vec<Vec<Rational>>,
    gamma: Rational,
    start: String,
}

impl MarkovEnv {
    /// Checks shapes only; semantic problems are reported by [`validate_env`].
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        transition: Vec<Vec<Rational>>,
        gamma: Rational,
        start: impl Into<String>,
    ) -> Result<Self> {
        let expected = states.len() * actions.len();
        if transition.len() != expected {
            return Err(Error::Malformed(format!(
                "{} transition rows for {} state-action pairs",
                transition.len(),
                expected
            )));
        }
        if let Some(i) = transition.iter().position(|row| row.len() != states.len()) {
            return Err(Error::Malformed(format!(
                "transition row {i} has {} entries for {} states",
                transition[i].len(),
                states.len()
            )));
        }
        Ok(MarkovEnv {
            states,
            actions,
            transition,
            gamma,
            start: start.into(),
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.states.len() * self.actions.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn start_index(&self) -> Option<usize> {
        self.state_index(&self.start)
    }

    pub fn pair_index(&self, s: usize, a: usize) -> usize {
        s * self.actions.len() + a
    }

    /// `(state, action)` names of a canonical index.
    pub fn pair_names(&self, index: usize) -> (&str, &str) {
        let na = self.actions.len();
        (&self.states[index / na], &self.actions[index % na])
    }

    /// `T(s, a, ·)`.
    pub fn next_distribution(&self, s: usize, a: usize) -> &[Rational] {
        &self.transition[self.pair_index(s, a)]
    }

    /// `1 / (1 - γ)`, the total mass of every visitation vector.
    pub fn horizon_mass(&self) -> Rational {
        Rational::one() / (Rational::one() - &self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStates,
    NoActions,
    DuplicateState(String),
    DuplicateAction(String),
    GammaOutOfRange(Rational),
    UnknownStart(String),
    NegativeProbability { state: String, action: String, next: String },
    NotStochastic { state: String, action: String, sum: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "no states declared"),
            Violation::NoActions => write!(f, "no actions declared"),
            Violation::DuplicateState(s) => write!(f, "duplicate state {s:?}"),
            Violation::DuplicateAction(a) => write!(f, "duplicate action {a:?}"),
            Violation::GammaOutOfRange(g) => write!(f, "gamma out of range: {} not in [0, 1)", format_rational(g)),
            Violation::UnknownStart(s) => write!(f, "unknown start state {s:?}"),
            Violation::NegativeProbability { state, action, next } => {
                write!(f, "negative probability T({state}, {action}, {next})")
            }
            Violation::NotStochastic { state, action, sum } => {
                write!(f, "T({state}, {action}, ·) sums to {} instead of 1", format_rational(sum))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msgs: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
            Err(Error::InvalidEnv(msgs.join("; ")))
        }
    }
}

/// Report every structural problem with `env`. Row sums must equal one
/// exactly in exact mode and within the tolerance in float mode.
pub fn validate_env(env: &MarkovEnv, mode: NumericMode) -> ValidationReport {
    let mut violations = Vec::new();
    if env.states.is_empty() {
        violations.push(Violation::NoStates);
    }
    if env.actions.is_empty() {
        violations.push(Violation::NoActions);
    }
    let mut seen = HashSet::new();
    for s in &env.states {
        if !seen.insert(s) {
            violations.push(Violation::DuplicateState(s.clone()));
        }
    }
    let mut seen = HashSet::new();
    for a in &env.actions {
        if !seen.insert(a) {
            violations.push(Violation::DuplicateAction(a.clone()));
        }
    }
    if env.gamma.is_negative() || env.gamma >= Rational::one() {
        violations.push(Violation::GammaOutOfRange(env.gamma.clone()));
    }
    if env.start_index().is_none() {
        violations.push(Violation::UnknownStart(env.start.clone()));
    }
    for (s, state) in env.states.iter().enumerate() {
        for (a, action) in env.actions.iter().enumerate() {
            let row = env.next_distribution(s, a);
            for (next, p) in env.states.iter().zip(row) {
                if p.is_negative() {
                    violations.push(Violation::NegativeProbability {
                        state: state.clone(),
                        action: action.clone(),
                        next: next.clone(),
                    });
                }
            }
            let sum: Rational = row.iter().sum();
            if !mode.approx_eq(&sum, &Rational::one()) {
                violations.push(Violation::NotStochastic {
                    state: state.clone(),
                    action: action.clone(),
                    sum,
                });
            }
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// Action index per state.
    Deterministic(Vec<usize>),
    /// Row `s` is the action distribution at state `s`.
    Stochastic(Vec<Vec<Rational>>),
}

/// A named stationary policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub name: String,
    pub kind: PolicyKind,
}

impl Policy {
    pub fn deterministic(name: impl Into<String>, actions: Vec<usize>) -> Self {
        Policy {
            name: name.into(),
            kind: PolicyKind::Deterministic(actions),
        }
    }

    pub fn stochastic(name: impl Into<String>, probs: Vec<Vec<Rational>>) -> Self {
        Policy {
            name: name.into(),
            kind: PolicyKind::Stochastic(probs),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.kind, PolicyKind::Deterministic(_))
    }

    /// `π(a | s)`.
    pub fn prob(&self, s: usize, a: usize) -> Rational {
        match &self.kind {
            PolicyKind::Deterministic(choice) => {
                if choice[s] == a {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            PolicyKind::Stochastic(rows) => rows[s][a].clone(),
        }
    }

    /// `|S| x |A|` action-probability matrix.
    pub fn matrix(&self, num_states: usize, num_actions: usize) -> Vec<Vec<Rational>> {
        (0..num_states)
            .map(|s| (0..num_actions).map(|a| self.prob(s, a)).collect())
            .collect()
    }

    /// Whether both policies define the same action distributions,
    /// regardless of how they are stored.
    pub fn same_function(&self, other: &Policy, num_states: usize, num_actions: usize) -> bool {
        self.matrix(num_states, num_actions) == other.matrix(num_states, num_actions)
    }

    /// Dimension and action-index checks only.
    pub fn check_shape(&self, env: &MarkovEnv) -> Result<()> {
        let invalid = |reason: String| Error::InvalidPolicy {
            name: self.name.clone(),
            reason,
        };
        match &self.kind {
            PolicyKind::Deterministic(choice) => {
                if choice.len() != env.num_states() {
                    return Err(invalid(format!("{} actions for {} states", choice.len(), env.num_states())));
                }
                if let Some(s) = choice.iter().position(|&a| a >= env.num_actions()) {
                    return Err(invalid(format!("invalid action index at state {}", env.states[s])));
                }
            }
            PolicyKind::Stochastic(rows) => {
                if rows.len() != env.num_states() {
                    return Err(invalid(format!("{} rows for {} states", rows.len(), env.num_states())));
                }
                if let Some(s) = rows.iter().position(|row| row.len() != env.num_actions()) {
                    return Err(invalid(format!("state {} has {} action probabilities", env.states[s], rows[s].len())));
                }
            }
        }
        Ok(())
    }

    /// Shape checks plus nonnegative, normalized action distributions.
    pub fn check(&self, env: &MarkovEnv, mode: NumericMode) -> Result<()> {
        self.check_shape(env)?;
        let invalid = |reason: String| Error::InvalidPolicy {
            name: self.name.clone(),
            reason,
        };
        match &self.kind {
            PolicyKind::Deterministic(_) => {}
            PolicyKind::Stochastic(rows) => {
                for (s, row) in rows.iter().enumerate() {
                    if row.iter().any(Signed::is_negative) {
                        return Err(invalid(format!("negative probability at state {}", env.states[s])));
                    }
                    let sum: Rational = row.iter().sum();
                    if !mode.approx_eq(&sum, &Rational::one()) {
                        return Err(invalid(format!(
                            "distribution at state {} sums to {}",
                            env.states[s],
                            format_rational(&sum)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `ρ^π`: discounted expected state-action visitation from the start state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VisitationVector(Vec<Rational>);

impl VisitationVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        VisitationVector(entries)
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.0.iter().sum()
    }

    /// Equality under `mode` (∞-norm within the tolerance in float mode).
    pub fn approx_eq(&self, other: &VisitationVector, mode: NumericMode) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| mode.approx_eq(a, b))
    }
}

/// `V^π_i(s₀)` for each reward dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector(pub Vec<Rational>);

/// State-to-state kernel under `policy`: `P[s][s'] = Σ_a π(a|s) T(s,a,s')`.
fn policy_kernel(env: &MarkovEnv, policy: &Policy) -> Vec<Vec<Rational>> {
    let n = env.num_states();
    (0..n)
        .map(|s| {
            let mut row = vec![Rational::zero(); n];
            for a in 0..env.num_actions() {
                let p = policy.prob(s, a);
                if p.is_zero() {
                    continue;
                }
                for (acc, t) in row.iter_mut().zip(env.next_distribution(s, a)) {
                    *acc += &p * t;
                }
            }
            row
        })
        .collect()
}

fn solve_visitation<S: Scalar>(env: &MarkovEnv, policy: &Policy, start: usize, tol: Tol<S>) -> Result<Vec<Rational>> {
    let n = env.num_states();
    let kernel = policy_kernel(env, policy);
    let gamma = S::from_rational(&env.gamma);
    // (I - γ Pᵀ) d = e_start
    let a: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { S::one() } else { S::zero() };
                    id - gamma.clone() * S::from_rational(&kernel[j][i])
                })
                .collect()
        })
        .collect();
    let mut b = vec![S::zero(); n];
    b[start] = S::one();
    let d = solve_square(a, b, &tol).ok_or_else(|| Error::Numerical("visitation system is singular".into()))?;
    let mut rho = Vec::with_capacity(env.num_pairs());
    for (s, ds) in d.iter().enumerate() {
        for a in 0..env.num_actions() {
            let v = S::from_rational(&policy.prob(s, a)) * ds.clone();
            rho.push(
                v.to_rational()
                    .ok_or_else(|| Error::Numerical("non-finite visitation".into()))?,
            );
        }
    }
    Ok(rho)
}

/// Per-state residual of the flow equations
/// `Σ_a ρ(s,a) - 𝟙[s = s₀] - γ Σ_{s',a'} T(s',a',s) ρ(s',a')`.
pub fn bellman_flow_residual(env: &MarkovEnv, rho: &VisitationVector) -> Vec<Rational> {
    let start = env.start_index();
    let na = env.num_actions();
    (0..env.num_states())
        .map(|s| {
            let outflow: Rational = rho.0[s * na..(s + 1) * na].iter().sum();
            let mut inflow = if Some(s) == start { Rational::one() } else { Rational::zero() };
            for (idx, r) in rho.0.iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                let t = &env.transition[idx][s];
                if !t.is_zero() {
                    inflow += &env.gamma * t * r;
                }
            }
            outflow - inflow
        })
        .collect()
}

/// Check nonnegativity, normalization, and flow conservation of `rho`.
pub fn check_visitation(env: &MarkovEnv, rho: &VisitationVector, mode: NumericMode) -> Result<()> {
    let zero = Rational::zero();
    let scale = to_f64(&env.horizon_mass()).max(1.0);
    let small = |x: &Rational| match mode {
        NumericMode::ExactRational => x.is_zero(),
        NumericMode::Float { tolerance } => to_f64(x).abs() <= tolerance * scale,
    };
    if rho.len() != env.num_pairs() {
        return Err(Error::Malformed(format!(
            "visitation has {} entries for {} state-action pairs",
            rho.len(),
            env.num_pairs()
        )));
    }
    if rho.0.iter().any(|v| v < &zero && !small(v)) {
        return Err(Error::Numerical("negative visitation entry".into()));
    }
    if !small(&(rho.total() - env.horizon_mass())) {
        return Err(Error::Numerical(format!(
            "visitation mass {} differs from 1/(1-γ) = {}",
            format_rational(&rho.total()),
            format_rational(&env.horizon_mass())
        )));
    }
    if let Some((s, r)) = bellman_flow_residual(env, rho).iter().enumerate().find(|(_, r)| !small(r)) {
        return Err(Error::Numerical(format!(
            "flow conservation fails at state {} (residual {})",
            env.states[s],
            format_rational(r)
        )));
    }
    Ok(())
}

/// `ρ^π` by a direct linear solve of `d = e_{s₀} + γ P_πᵀ d`, then
/// `ρ(s,a) = π(a|s) d(s)`. The result is checked against the flow
/// invariants before it is returned.
pub fn compute_visitation(env: &MarkovEnv, policy: &Policy, mode: NumericMode) -> Result<VisitationVector> {
    validate_env(env, mode).into_result()?;
    policy.check(env, mode)?;
    let start = env.start_index().expect("validated");
    let rho = match mode {
        NumericMode::ExactRational => solve_visitation(env, policy, start, Tol::exact())?,
        NumericMode::Float { tolerance } => solve_visitation::<f64>(env, policy, start, Tol::new(tolerance * 1e-3))?,
    };
    let rho = VisitationVector(rho);
    check_visitation(env, &rho, mode)?;
    Ok(rho)
}

/// Visitations for many policies, evaluated in parallel, in input order.
pub fn compute_visitations(env: &MarkovEnv, policies: &[Policy], mode: NumericMode) -> Result<Vec<VisitationVector>> {
    policies
        .par_iter()
        .map(|p| compute_visitation(env, p, mode))
        .collect()
}

/// `V^π(s₀) = R ρ^π`.
pub fn policy_value(env: &MarkovEnv, policy: &Policy, reward: &RewardSpec, mode: NumericMode) -> Result<ValueVector> {
    reward.check_env(env)?;
    let rho = compute_visitation(env, policy, mode)?;
    Ok(ValueVector(reward.values(&rho)))
}

/// Name of the deterministic policy choosing `choice[s]` at each state:
/// `pi` followed by one-based action numbers (`pi12`), separated by
/// underscores when any action number has more than one digit.
pub fn deterministic_policy_name(choice: &[usize], num_actions: usize) -> String {
    let digits: Vec<String> = choice.iter().map(|a| (a + 1).to_string()).collect();
    if num_actions <= 9 {
        format!("pi{}", digits.concat())
    } else {
        format!("pi_{}", digits.join("_"))
    }
}

/// Number of deterministic policies, saturating at `u128::MAX`.
pub fn deterministic_policy_count(env: &MarkovEnv) -> u128 {
    (env.num_actions() as u128)
        .checked_pow(env.num_states() as u32)
        .unwrap_or(u128::MAX)
}

/// Every deterministic policy in lexicographic order of the action choices
/// (first state most significant). Refuses without enumerating when the
/// count exceeds `limit`.
pub fn enumerate_deterministic_policies(env: &MarkovEnv, limit: u128) -> Result<Vec<Policy>> {
    let count = deterministic_policy_count(env);
    if count > limit {
        return Err(Error::LimitExceeded { count, limit });
    }
    let (ns, na) = (env.num_states(), env.num_actions());
    if na == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut choice = vec![0usize; ns];
    loop {
        out.push(Policy::deterministic(deterministic_policy_name(&choice, na), choice.clone()));
        let mut pos = ns;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < na {
                break;
            }
            choice[pos] = 0;
        }
    }
}
