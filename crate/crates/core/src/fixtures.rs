//! The two-state example environments and their SOAPs, shipped as JSON.
//!
//! `entailment`: both actions move to the other state. `steady_state`: at
//! `s0`, `a1` moves to `s1` and `a2` stays; `s1` is absorbing. Both use
//! `γ = 0.9`, start at `s0`, and name the four deterministic policies
//! `pi{i}{j}` (action `a_i` at `s0`, `a_j` at `s1`).

use crate::bundle::{parse_bundle, parse_soap, parse_spec, ProblemBundle};
use crate::numeric::NumericMode;
use crate::reward::RewardSpec;
use crate::soap::Soap;

pub const ENTAILMENT: &str = include_str!("../fixtures/entailment.json");
pub const STEADY_STATE: &str = include_str!("../fixtures/steady_state.json");
/// Good `{pi12, pi21}`, bad `{pi11, pi22}`.
pub const XOR_SOAP: &str = include_str!("../fixtures/xor_soap.json");
/// Good `{pi22}`, bad the other three.
pub const SINGLE_GOOD_SOAP: &str = include_str!("../fixtures/single_good_soap.json");
/// Good `{pi21}`, bad `{pi22}`; inconsistent in `steady_state`.
pub const DEGENERATE_SOAP: &str = include_str!("../fixtures/degenerate_soap.json");
/// Two rows rewarding `a2` with `+1` and `-1`, bounds `(2, -8)`.
pub const PAPER_SPEC: &str = include_str!("../fixtures/paper_spec.json");

/// Every fixture file name with its contents.
pub const ALL: [(&str, &str); 6] = [
    ("entailment.json", ENTAILMENT),
    ("steady_state.json", STEADY_STATE),
    ("xor_soap.json", XOR_SOAP),
    ("single_good_soap.json", SINGLE_GOOD_SOAP),
    ("degenerate_soap.json", DEGENERATE_SOAP),
    ("paper_spec.json", PAPER_SPEC),
];

pub fn entailment() -> ProblemBundle {
    parse_bundle(ENTAILMENT, NumericMode::ExactRational).expect("fixture parses")
}

pub fn steady_state() -> ProblemBundle {
    parse_bundle(STEADY_STATE, NumericMode::ExactRational).expect("fixture parses")
}

pub fn soap(bundle: &ProblemBundle, text: &str) -> Soap {
    parse_soap(text, bundle).expect("fixture SOAP resolves")
}

pub fn paper_spec(bundle: &ProblemBundle) -> RewardSpec {
    parse_spec(PAPER_SPEC, &bundle.env).expect("fixture spec parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{bundle_to_json, soap_to_json, spec_to_json};

    #[test]
    fn fixtures_are_canonical() {
        let e = entailment();
        assert_eq!(bundle_to_json(&e), ENTAILMENT);
        assert_eq!(bundle_to_json(&steady_state()), STEADY_STATE);
        assert_eq!(soap_to_json(&soap(&e, XOR_SOAP)), XOR_SOAP);
        assert_eq!(soap_to_json(&soap(&e, SINGLE_GOOD_SOAP)), SINGLE_GOOD_SOAP);
        assert_eq!(soap_to_json(&soap(&e, DEGENERATE_SOAP)), DEGENERATE_SOAP);
        assert_eq!(spec_to_json(&paper_spec(&e)), PAPER_SPEC);
    }

    #[test]
    fn fixture_shapes() {
        let e = entailment();
        assert_eq!((e.env.num_states(), e.env.num_actions(), e.policies.len()), (2, 2, 4));
        assert_eq!(e.env.gamma(), &crate::numeric::ratio(9, 10));
        let s = steady_state();
        let one = crate::numeric::int(1);
        assert_eq!(s.env.next_distribution(1, 0)[1], one);
        assert_eq!(s.env.next_distribution(1, 1)[1], one);
    }
}
