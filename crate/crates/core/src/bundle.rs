//! JSON problem files.
//!
//! Numbers are written as strings (`"0.9"`, `"100/19"`) so they parse to
//! exact rationals. A bundle holds an environment and optionally named
//! policies, a SOAP referencing those names, and a reward spec:
//!
//! ```json
//! {
//!   "states": ["s0", "s1"],
//!   "actions": ["a1", "a2"],
//!   "gamma": "0.9",
//!   "start": "s0",
//!   "transitions": [
//!     {"from": "s0", "action": "a1", "to": {"s1": "1"}},
//!     ...
//!   ],
//!   "policies": [
//!     {"name": "pi12", "actions": {"s0": "a1", "s1": "a2"}},
//!     {"name": "mix", "distribution": {"s0": {"a1": "0.5", "a2": "0.5"}, "s1": {"a1": "1"}}}
//!   ],
//!   "soap": {"good": ["pi12"], "bad": ["mix"]},
//!   "spec": {"reward_matrix": [["0", "1", "0", "1"]], "lower_bounds": ["2"]}
//! }
//! ```
//!
//! Every `(state, action)` pair needs exactly one transition entry. Reward
//! rows list one entry per pair in the order `s0a1, s0a2, s1a1, ...`.

use std::collections::HashSet;
use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use serde::de::{DeserializeOwned, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use num::Zero;

use crate::error::{Error, Result};
use crate::mdp::{validate_env, MarkovEnv, Policy, PolicyKind};
use crate::numeric::{format_rational, parse_rational, NumericMode, Rational};
use crate::reward::RewardSpec;
use crate::soap::Soap;

/// JSON object that keeps key order and rejects repeated keys.
#[derive(Debug, Clone, PartialEq)]
struct Entries<V>(Vec<(String, V)>);

impl<V: Serialize> Serialize for Entries<V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for Entries<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct EntriesVisitor<V>(PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for EntriesVisitor<V> {
            type Value = Entries<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object")
            }
            fn visit_map<M: MapAccess<'de>>(self, mut map: M) -> std::result::Result<Self::Value, M::Error> {
                let mut out: Vec<(String, V)> = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, V>()? {
                    if out.iter().any(|(seen, _)| *seen == k) {
                        return Err(serde::de::Error::custom(format!("duplicate key {k:?}")));
                    }
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(EntriesVisitor(PhantomData))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    from: String,
    action: String,
    to: Entries<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    actions: Option<Entries<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distribution: Option<Entries<Entries<String>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoap {
    good: Vec<String>,
    bad: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    reward_matrix: Vec<Vec<String>>,
    lower_bounds: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBundle {
    states: Vec<String>,
    actions: Vec<String>,
    gamma: String,
    start: String,
    transitions: Vec<RawTransition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    policies: Vec<RawPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    soap: Option<RawSoap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spec: Option<RawSpec>,
}

/// An environment with its named policies, SOAP, and reward spec.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemBundle {
    pub env: MarkovEnv,
    pub policies: Vec<Policy>,
    pub soap: Option<Soap>,
    pub spec: Option<RewardSpec>,
}

impl ProblemBundle {
    pub fn policy(&self, name: &str) -> Option<&Policy> {
        self.policies.iter().find(|p| p.name == name)
    }
}

fn input_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Input {
        path: path.into(),
        message: message.into(),
    }
}

fn number(path: &str, text: &str) -> Result<Rational> {
    parse_rational(text).map_err(|e| input_err(path, e.to_string()))
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        input_err(if path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
    })
}

fn lookup(names: &[String], name: &str, path: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| input_err(path, format!("unknown {what} {name:?}")))
}

fn build_env(raw: &RawBundle, mode: NumericMode) -> Result<MarkovEnv> {
    let (ns, na) = (raw.states.len(), raw.actions.len());
    let gamma = number("gamma", &raw.gamma)?;
    let mut rows: Vec<Option<Vec<Rational>>> = vec![None; ns * na];
    for (i, t) in raw.transitions.iter().enumerate() {
        let at = format!("transitions[{i}]");
        let s = lookup(&raw.states, &t.from, &format!("{at}.from"), "state")?;
        let a = lookup(&raw.actions, &t.action, &format!("{at}.action"), "action")?;
        let slot = &mut rows[s * na + a];
        if slot.is_some() {
            return Err(input_err(at, format!("second transition entry for ({}, {})", t.from, t.action)));
        }
        let mut row = vec![Rational::zero(); ns];
        for (next, p) in &t.to.0 {
            let path = format!("{at}.to.{next}");
            let j = lookup(&raw.states, next, &path, "state")?;
            row[j] = number(&path, p)?;
        }
        *slot = Some(row);
    }
    let mut transition = Vec::with_capacity(ns * na);
    for (idx, row) in rows.into_iter().enumerate() {
        let row = row.ok_or_else(|| {
            input_err(
                "transitions",
                format!("no entry for ({}, {})", raw.states[idx / na], raw.actions[idx % na]),
            )
        })?;
        transition.push(row);
    }
    let env = MarkovEnv::new(raw.states.clone(), raw.actions.clone(), transition, gamma, raw.start.clone())?;
    validate_env(&env, mode).into_result()?;
    Ok(env)
}

fn build_policy(env: &MarkovEnv, raw: &RawPolicy, at: &str, mode: NumericMode) -> Result<Policy> {
    let (ns, na) = (env.num_states(), env.num_actions());
    let policy = match (&raw.actions, &raw.distribution) {
        (Some(actions), None) => {
            let mut choice: Vec<Option<usize>> = vec![None; ns];
            for (state, action) in &actions.0 {
                let path = format!("{at}.actions.{state}");
                let s = lookup(env.states(), state, &path, "state")?;
                choice[s] = Some(lookup(env.actions(), action, &path, "action")?);
            }
            let choice = choice
                .into_iter()
                .enumerate()
                .map(|(s, c)| c.ok_or_else(|| input_err(format!("{at}.actions"), format!("no action for state {:?}", env.states()[s]))))
                .collect::<Result<Vec<_>>>()?;
            Policy::deterministic(raw.name.clone(), choice)
        }
        (None, Some(dist)) => {
            let mut probs: Vec<Option<Vec<Rational>>> = vec![None; ns];
            for (state, row) in &dist.0 {
                let path = format!("{at}.distribution.{state}");
                let s = lookup(env.states(), state, &path, "state")?;
                let mut p = vec![Rational::zero(); na];
                for (action, q) in &row.0 {
                    let path = format!("{path}.{action}");
                    let a = lookup(env.actions(), action, &path, "action")?;
                    p[a] = number(&path, q)?;
                }
                probs[s] = Some(p);
            }
            let probs = probs
                .into_iter()
                .enumerate()
                .map(|(s, p)| {
                    p.ok_or_else(|| input_err(format!("{at}.distribution"), format!("no distribution for state {:?}", env.states()[s])))
                })
                .collect::<Result<Vec<_>>>()?;
            Policy::stochastic(raw.name.clone(), probs)
        }
        _ => return Err(input_err(at, "a policy needs exactly one of \"actions\" or \"distribution\"")),
    };
    policy.check(env, mode)?;
    Ok(policy)
}

fn build_soap(env: &MarkovEnv, policies: &[Policy], raw: &RawSoap, at: &str) -> Result<Soap> {
    let resolve = |names: &[String], side: &str| {
        names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                policies
                    .iter()
                    .find(|p| p.name == *n)
                    .cloned()
                    .ok_or_else(|| input_err(format!("{at}.{side}[{i}]"), format!("unresolved policy name {n:?}")))
            })
            .collect::<Result<Vec<_>>>()
    };
    let good = resolve(&raw.good, "good")?;
    let bad = resolve(&raw.bad, "bad")?;
    Soap::new(env, good, bad).map_err(|e| input_err(at, e.to_string()))
}

fn build_spec(env: &MarkovEnv, raw: &RawSpec, at: &str) -> Result<RewardSpec> {
    let matrix = raw
        .reward_matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| number(&format!("{at}.reward_matrix[{i}][{j}]"), x))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let bounds = raw
        .lower_bounds
        .iter()
        .enumerate()
        .map(|(i, x)| number(&format!("{at}.lower_bounds[{i}]"), x))
        .collect::<Result<Vec<_>>>()?;
    let spec = RewardSpec::new(matrix, bounds).map_err(|e| input_err(at, e.to_string()))?;
    spec.check_env(env).map_err(|e| input_err(at, e.to_string()))?;
    Ok(spec)
}

/// Parse and validate a bundle. Probability sums are checked under `mode`.
pub fn parse_bundle(text: &str, mode: NumericMode) -> Result<ProblemBundle> {
    let raw: RawBundle = from_json(text)?;
    let env = build_env(&raw, mode)?;
    let mut seen = HashSet::new();
    let mut policies = Vec::with_capacity(raw.policies.len());
    for (i, p) in raw.policies.iter().enumerate() {
        let at = format!("policies[{i}]");
        if !seen.insert(p.name.as_str()) {
            return Err(input_err(at, format!("duplicate policy name {:?}", p.name)));
        }
        policies.push(build_policy(&env, p, &at, mode)?);
    }
    let soap = raw.soap.as_ref().map(|s| build_soap(&env, &policies, s, "soap")).transpose()?;
    let spec = raw.spec.as_ref().map(|s| build_spec(&env, s, "spec")).transpose()?;
    Ok(ProblemBundle { env, policies, soap, spec })
}

/// A standalone SOAP document `{"good": [...], "bad": [...]}` resolved
/// against the bundle's policies.
pub fn parse_soap(text: &str, bundle: &ProblemBundle) -> Result<Soap> {
    let raw: RawSoap = from_json(text)?;
    build_soap(&bundle.env, &bundle.policies, &raw, "$")
}

/// A standalone spec document `{"reward_matrix": [...], "lower_bounds": [...]}`.
pub fn parse_spec(text: &str, env: &MarkovEnv) -> Result<RewardSpec> {
    let raw: RawSpec = from_json(text)?;
    build_spec(env, &raw, "$")
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| input_err(path.display().to_string(), e.to_string()))
}

pub fn load_bundle(path: &Path, mode: NumericMode) -> Result<ProblemBundle> {
    parse_bundle(&read_file(path)?, mode).map_err(|e| match e {
        Error::Input { path: p, message } => input_err(format!("{}: {p}", path.display()), message),
        other => other,
    })
}

fn raw_policy(env: &MarkovEnv, p: &Policy) -> RawPolicy {
    match &p.kind {
        PolicyKind::Deterministic(choice) => RawPolicy {
            name: p.name.clone(),
            actions: Some(Entries(
                env.states()
                    .iter()
                    .zip(choice)
                    .map(|(s, &a)| (s.clone(), env.actions()[a].clone()))
                    .collect(),
            )),
            distribution: None,
        },
        PolicyKind::Stochastic(probs) => RawPolicy {
            name: p.name.clone(),
            actions: None,
            distribution: Some(Entries(
                env.states()
                    .iter()
                    .zip(probs)
                    .map(|(s, row)| {
                        let entries = env
                            .actions()
                            .iter()
                            .zip(row)
                            .filter(|(_, q)| !q.is_zero())
                            .map(|(a, q)| (a.clone(), format_rational(q)))
                            .collect();
                        (s.clone(), Entries(entries))
                    })
                    .collect(),
            )),
        },
    }
}

fn raw_soap(soap: &Soap) -> RawSoap {
    RawSoap {
        good: soap.good().iter().map(|p| p.name.clone()).collect(),
        bad: soap.bad().iter().map(|p| p.name.clone()).collect(),
    }
}

fn raw_spec(spec: &RewardSpec) -> RawSpec {
    RawSpec {
        reward_matrix: spec.rows().iter().map(|r| r.iter().map(format_rational).collect()).collect(),
        lower_bounds: spec.lower_bounds().iter().map(format_rational).collect(),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("bundle types serialize");
    out.push('\n');
    out
}

/// Canonical JSON: declared state/action order, zero probabilities omitted,
/// numbers in canonical rational form.
pub fn bundle_to_json(bundle: &ProblemBundle) -> String {
    let env = &bundle.env;
    let mut transitions = Vec::with_capacity(env.num_pairs());
    for (s, from) in env.states().iter().enumerate() {
        for (a, action) in env.actions().iter().enumerate() {
            let to = env
                .states()
                .iter()
                .zip(env.next_distribution(s, a))
                .filter(|(_, p)| !p.is_zero())
                .map(|(n, p)| (n.clone(), format_rational(p)))
                .collect();
            transitions.push(RawTransition {
                from: from.clone(),
                action: action.clone(),
                to: Entries(to),
            });
        }
    }
    let raw = RawBundle {
        states: env.states().to_vec(),
        actions: env.actions().to_vec(),
        gamma: format_rational(env.gamma()),
        start: env.start().to_string(),
        transitions,
        policies: bundle.policies.iter().map(|p| raw_policy(env, p)).collect(),
        soap: bundle.soap.as_ref().map(raw_soap),
        spec: bundle.spec.as_ref().map(raw_spec),
    };
    pretty(&raw)
}

pub fn soap_to_json(soap: &Soap) -> String {
    pretty(&raw_soap(soap))
}

pub fn spec_to_json(spec: &RewardSpec) -> String {
    pretty(&raw_spec(spec))
}
