//! Text and JSON renderings of command results. Numbers are strings in both:
//! canonical rationals in exact mode, shortest `f64` text in float mode.
//! Reward dimensions are numbered from 1.

use serde_json::{json, Value};

use rewardsep::mdp::{MarkovEnv, Policy, PolicyKind, VisitationVector};
use rewardsep::numeric::{format_for_mode, NumericMode, Rational};
use rewardsep::plot::PlotExport;
use rewardsep::reward::RewardSpec;
use rewardsep::separability::{CommonPoint, DesignOutcome, Obstruction};
use rewardsep::soap::ConsistencyReport;
use rewardsep::verifier::{RealizationReport, Role};

pub(crate) struct Report {
    text: String,
    json: Value,
}

impl Report {
    pub(crate) fn text(&self) -> String {
        self.text.clone()
    }

    pub(crate) fn json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.json).expect("reports serialize");
        out.push('\n');
        out
    }
}

fn mode_name(mode: NumericMode) -> &'static str {
    if mode.is_exact() {
        "exact"
    } else {
        "float"
    }
}

fn num(q: &Rational, mode: NumericMode) -> String {
    format_for_mode(q, mode)
}

fn nums(v: &[Rational], mode: NumericMode) -> Vec<String> {
    v.iter().map(|q| num(q, mode)).collect()
}

fn bracket(v: &[Rational], mode: NumericMode) -> String {
    format!("[{}]", nums(v, mode).join(", "))
}

fn pair_labels(env: &MarkovEnv) -> Vec<String> {
    (0..env.num_pairs())
        .map(|i| {
            let (s, a) = env.pair_names(i);
            format!("{s}:{a}")
        })
        .collect()
}

fn weights_text(weights: &[(String, Rational)], mode: NumericMode) -> String {
    weights
        .iter()
        .filter(|(_, w)| !num::Zero::is_zero(w))
        .map(|(n, w)| format!("{n} {}", num(w, mode)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn weights_json(weights: &[(String, Rational)], mode: NumericMode) -> Value {
    Value::Array(
        weights
            .iter()
            .map(|(n, w)| json!({"policy": n, "weight": num(w, mode)}))
            .collect(),
    )
}

fn spec_json(spec: &RewardSpec, mode: NumericMode) -> Value {
    json!({
        "dimension": spec.dimension(),
        "reward_matrix": spec.rows().iter().map(|r| nums(r, mode)).collect::<Vec<_>>(),
        "lower_bounds": nums(spec.lower_bounds(), mode),
    })
}

fn spec_text(env: &MarkovEnv, spec: &RewardSpec, mode: NumericMode) -> String {
    let mut out = format!("reward spec (entries ordered {}):\n", pair_labels(env).join(", "));
    for (i, (row, c)) in spec.rows().iter().zip(spec.lower_bounds()).enumerate() {
        out.push_str(&format!("  r{} = {}  c{} = {}\n", i + 1, bracket(row, mode), i + 1, num(c, mode)));
    }
    out
}

fn dims(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn dims_text(v: &[usize]) -> String {
    dims(v).iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn verification_json(report: &RealizationReport, mode: NumericMode) -> Value {
    json!({
        "realized": report.realized,
        "policies": report.per_policy.iter().map(|v| json!({
            "name": v.name,
            "role": v.role.as_str(),
            "values": nums(&v.values, mode),
            "feasible": v.feasible,
            "violated": dims(&v.violated),
            "boundary": dims(&v.boundary),
        })).collect::<Vec<_>>(),
    })
}

fn verification_lines(report: &RealizationReport, mode: NumericMode) -> String {
    let mut out = String::new();
    for v in &report.per_policy {
        let verdict = if v.feasible {
            "feasible".to_string()
        } else {
            format!("infeasible (fails dim {})", dims_text(&v.violated))
        };
        let ok = if v.as_required() { "ok" } else { "WRONG" };
        out.push_str(&format!("  {:<12} {:<4} V = {}  {verdict}  {ok}", v.name, v.role.as_str(), bracket(&v.values, mode)));
        if !v.boundary.is_empty() {
            out.push_str(&format!("  [on the bound in dim {}]", dims_text(&v.boundary)));
        }
        out.push('\n');
    }
    out
}

fn confirmation(report: &RealizationReport) -> String {
    let good = report.per_policy.iter().filter(|v| v.role == Role::Good).count();
    let bad = report.per_policy.len() - good;
    let boundary = if report.per_policy.iter().any(|v| !v.boundary.is_empty()) {
        " (some values sit on a bound)"
    } else {
        ""
    };
    if report.realized {
        format!("verified: all {good} good policies feasible, all {bad} bad policies infeasible{boundary}\n")
    } else {
        format!("not verified: some policy is misclassified{boundary}\n")
    }
}

pub(crate) fn visitation(env: &MarkovEnv, policies: &[Policy], rhos: &[VisitationVector], mode: NumericMode) -> Report {
    let labels = pair_labels(env);
    let mut text = format!("gamma = {}, start = {}\n", num(env.gamma(), mode), env.start());
    for (p, rho) in policies.iter().zip(rhos) {
        text.push_str(&format!("{}:\n", p.name));
        for (l, x) in labels.iter().zip(rho.entries()) {
            text.push_str(&format!("  rho({l}) = {}\n", num(x, mode)));
        }
        text.push_str(&format!("  total = {}\n", num(&rho.total(), mode)));
    }
    let json = json!({
        "command": "visitation",
        "mode": mode_name(mode),
        "pairs": labels,
        "policies": policies.iter().zip(rhos).map(|(p, rho)| json!({
            "name": p.name,
            "rho": nums(rho.entries(), mode),
            "total": num(&rho.total(), mode),
        })).collect::<Vec<_>>(),
    });
    Report { text, json }
}

fn pairs_json(pairs: &[(String, String)], left: &str, right: &str) -> Value {
    Value::Array(pairs.iter().map(|(a, b)| json!({left: a, right: b})).collect())
}

pub(crate) fn consistency(result: &ConsistencyReport, mode: NumericMode) -> Report {
    let mut text = if result.consistent {
        "consistent: no good policy shares a visitation vector with a bad policy\n".to_string()
    } else {
        "inconsistent: these good/bad pairs have identical visitation vectors\n".to_string()
    };
    for (g, b) in &result.witnesses {
        text.push_str(&format!("  {g} (good) = {b} (bad)\n"));
    }
    if !result.same_side_duplicates.is_empty() {
        text.push_str("note: same-side pairs with identical visitations:\n");
        for (a, b) in &result.same_side_duplicates {
            text.push_str(&format!("  {a} = {b}\n"));
        }
    }
    let json = json!({
        "command": "consistency",
        "mode": mode_name(mode),
        "consistent": result.consistent,
        "witnesses": pairs_json(&result.witnesses, "good", "bad"),
        "same_side_duplicates": pairs_json(&result.same_side_duplicates, "first", "second"),
    });
    Report { text, json }
}

pub(crate) fn inconsistent_refusal(command: &str, mode: NumericMode, witnesses: &[(String, String)]) -> Report {
    let mut text = format!("{command}: refused, the SOAP is inconsistent\n");
    for (g, b) in witnesses {
        text.push_str(&format!("  {g} (good) = {b} (bad)\n"));
    }
    let json = json!({
        "command": command,
        "mode": mode_name(mode),
        "realizable": false,
        "obstruction": {
            "kind": "inconsistent",
            "witnesses": pairs_json(witnesses, "good", "bad"),
        },
    });
    Report { text, json }
}

fn common_point(c: &CommonPoint, mode: NumericMode) -> (String, Value) {
    let text = format!(
        "not realizable: the hulls of the good and bad visitations share a point\n  point = {}\n  good weights: {}\n  bad weights: {}\n",
        bracket(c.point.entries(), mode),
        weights_text(&c.a_coefficients, mode),
        weights_text(&c.b_coefficients, mode),
    );
    let json = json!({
        "kind": "hulls_intersect",
        "point": nums(c.point.entries(), mode),
        "good_weights": weights_json(&c.a_coefficients, mode),
        "bad_weights": weights_json(&c.b_coefficients, mode),
    });
    (text, json)
}

fn obstruction(o: &Obstruction, mode: NumericMode) -> (String, Value) {
    match o {
        Obstruction::HullsIntersect(c) => common_point(c, mode),
        Obstruction::BadPointInGoodHull { bad, point, coefficients } => (
            format!(
                "not realizable: bad policy {bad} lies in the hull of the good visitations\n  point = {}\n  good weights: {}\n",
                bracket(point.entries(), mode),
                weights_text(coefficients, mode),
            ),
            json!({
                "kind": "bad_point_in_good_hull",
                "bad": bad,
                "point": nums(point.entries(), mode),
                "good_weights": weights_json(coefficients, mode),
            }),
        ),
        Obstruction::NoOptimalReward { certificate } => (
            format!(
                "not realizable: no scalar reward makes exactly the good policies optimal\n  Farkas multipliers (good rows, enumerated-policy rows, bad rows): {}\n",
                bracket(&certificate.multipliers, mode),
            ),
            json!({
                "kind": "no_optimal_reward",
                "farkas_multipliers": nums(&certificate.multipliers, mode),
            }),
        ),
    }
}

pub(crate) fn design(command: &str, env: &MarkovEnv, outcome: &DesignOutcome, mode: NumericMode, over_max_dim: Option<usize>) -> Report {
    match outcome {
        DesignOutcome::Realized { spec, report } => {
            let d = spec.dimension();
            let mut text = match over_max_dim {
                None => format!("{command}: realizable with d = {d}\n"),
                Some(m) => format!(
                    "{command}: not realizable within --max-dim {m}; the construction needed d = {d} (the reduction is greedy, so a smaller d may exist)\n"
                ),
            };
            text.push_str(&spec_text(env, spec, mode));
            text.push_str(&verification_lines(report, mode));
            text.push_str(&confirmation(report));
            let mut json = json!({
                "command": command,
                "mode": mode_name(mode),
                "realizable": over_max_dim.is_none(),
                "dimension": d,
                "spec": spec_json(spec, mode),
                "verification": verification_json(report, mode),
            });
            if let Some(m) = over_max_dim {
                json["obstruction"] = json!({"kind": "exceeds_max_dim", "max_dim": m, "achieved": d});
            }
            Report { text, json }
        }
        DesignOutcome::Obstructed(o) => {
            let (body, obs) = obstruction(o, mode);
            let text = format!("{command}: {body}");
            let json = json!({
                "command": command,
                "mode": mode_name(mode),
                "realizable": false,
                "obstruction": obs,
            });
            Report { text, json }
        }
    }
}

pub(crate) fn verification(spec: &RewardSpec, report: &RealizationReport, mode: NumericMode) -> Report {
    let mut text = format!(
        "verify: spec with d = {} {}\n",
        spec.dimension(),
        if report.realized { "realizes the SOAP" } else { "does not realize the SOAP" }
    );
    text.push_str(&verification_lines(report, mode));
    text.push_str(&confirmation(report));
    let mut json = verification_json(report, mode);
    json["command"] = json!("verify");
    json["mode"] = json!(mode_name(mode));
    Report { text, json }
}

fn actions_of(env: &MarkovEnv, p: &Policy) -> Vec<String> {
    match &p.kind {
        PolicyKind::Deterministic(choice) => choice.iter().map(|&a| env.actions()[a].clone()).collect(),
        PolicyKind::Stochastic(_) => Vec::new(),
    }
}

pub(crate) fn enumeration(env: &MarkovEnv, all: &[Policy], feasible: Option<&[Policy]>) -> Report {
    let is_feasible = |p: &Policy| feasible.map(|f| f.iter().any(|q| q.name == p.name));
    let mut text = format!("{} deterministic policies over states {}\n", all.len(), env.states().join(", "));
    for p in all {
        let acts = actions_of(env, p).join(" ");
        let mark = match is_feasible(p) {
            Some(true) => "  feasible",
            Some(false) => "  infeasible",
            None => "",
        };
        text.push_str(&format!("  {:<12} {acts}{mark}\n", p.name));
    }
    let json = json!({
        "command": "enumerate",
        "count": all.len(),
        "states": env.states(),
        "policies": all.iter().map(|p| {
            let mut v = json!({"name": p.name, "actions": actions_of(env, p)});
            if let Some(f) = is_feasible(p) {
                v["feasible"] = json!(f);
            }
            v
        }).collect::<Vec<_>>(),
    });
    Report { text, json }
}

pub(crate) fn plot(plot: &PlotExport, mode: NumericMode) -> Report {
    let json = json!({
        "command": "export-plot",
        "mode": mode_name(mode),
        "points": plot.points.iter().map(|p| json!({
            "name": p.name,
            "label": p.label.as_str(),
            "x": num(&p.x, mode),
            "y": num(&p.y, mode),
        })).collect::<Vec<_>>(),
        "hyperplanes": plot.hyperplanes.iter().map(|h| json!({
            "dim": h.dim + 1,
            "rx": num(&h.rx, mode),
            "ry": num(&h.ry, mode),
            "c": num(&h.c, mode),
        })).collect::<Vec<_>>(),
    });
    Report {
        text: plot.to_csv(mode),
        json,
    }
}
