//! Two-axis projections of visitation vectors for plotting.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::mdp::{compute_visitations, enumerate_deterministic_policies, MarkovEnv, Policy};
use crate::numeric::{format_for_mode, NumericMode, Rational};
use crate::reward::RewardSpec;
use crate::soap::Soap;

/// A `(state, action)` pair used as a plot axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axis {
    pub state: usize,
    pub action: usize,
}

impl Axis {
    /// Parse `"state:action"` against `env`.
    pub fn parse(env: &MarkovEnv, text: &str) -> Result<Self> {
        let (s, a) = text
            .split_once(':')
            .ok_or_else(|| Error::Malformed(format!("axis {text:?} should look like state:action")))?;
        let state = env
            .state_index(s)
            .ok_or_else(|| Error::Malformed(format!("axis {text:?}: unknown state {s:?}")))?;
        let action = env
            .action_index(a)
            .ok_or_else(|| Error::Malformed(format!("axis {text:?}: unknown action {a:?}")))?;
        Ok(Axis { state, action })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Good,
    Bad,
    Unlabeled,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Good => "good",
            Label::Bad => "bad",
            Label::Unlabeled => "unlabeled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub name: String,
    pub label: Label,
    pub x: Rational,
    pub y: Rational,
}

/// Row `i` of `R` restricted to the two axes, with its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotLine {
    pub dim: usize,
    pub rx: Rational,
    pub ry: Rational,
    pub c: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotExport {
    pub points: Vec<PlotPoint>,
    pub hyperplanes: Vec<PlotLine>,
}

/// Project `policies` (every deterministic policy when empty) onto the two
/// axes, labelled by SOAP membership.
pub fn export_plot(
    env: &MarkovEnv,
    policies: &[Policy],
    soap: Option<&Soap>,
    spec: Option<&RewardSpec>,
    axes: (Axis, Axis),
    mode: NumericMode,
    limit: u128,
) -> Result<PlotExport> {
    let enumerated;
    let policies = if policies.is_empty() {
        enumerated = enumerate_deterministic_policies(env, limit)?;
        &enumerated[..]
    } else {
        policies
    };
    let (x, y) = axes;
    let ix = env.pair_index(x.state, x.action);
    let iy = env.pair_index(y.state, y.action);
    let label = |p: &Policy| match soap {
        Some(s) if s.good().iter().any(|g| g.name == p.name) => Label::Good,
        Some(s) if s.bad().iter().any(|b| b.name == p.name) => Label::Bad,
        _ => Label::Unlabeled,
    };
    let rhos = compute_visitations(env, policies, mode)?;
    let points = policies
        .iter()
        .zip(&rhos)
        .map(|(p, rho)| PlotPoint {
            name: p.name.clone(),
            label: label(p),
            x: rho.entries()[ix].clone(),
            y: rho.entries()[iy].clone(),
        })
        .collect();
    let hyperplanes = match spec {
        Some(spec) => {
            spec.check_env(env)?;
            spec.rows()
                .iter()
                .zip(spec.lower_bounds())
                .enumerate()
                .map(|(dim, (row, c))| PlotLine {
                    dim,
                    rx: row[ix].clone(),
                    ry: row[iy].clone(),
                    c: c.clone(),
                })
                .collect()
        }
        None => Vec::new(),
    };
    Ok(PlotExport { points, hyperplanes })
}

impl PlotExport {
    /// Two CSV sections separated by a blank line: `name,label,x,y` and
    /// `dim,rx,ry,c` (dimensions numbered from 1). Exact mode writes rationals as `p/q`.
    pub fn to_csv(&self, mode: NumericMode) -> String {
        let f = |q: &Rational| format_for_mode(q, mode);
        let mut out = String::from("name,label,x,y\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.name, p.label.as_str(), f(&p.x), f(&p.y));
        }
        out.push_str("\ndim,rx,ry,c\n");
        for h in &self.hyperplanes {
            let _ = writeln!(out, "{},{},{},{}", h.dim + 1, f(&h.rx), f(&h.ry), f(&h.c));
        }
        out
    }
}
