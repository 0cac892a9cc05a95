//! Seeded generators for randomized suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rewardsep::lp::{LinearProgram, Sense, VarBound};
use rewardsep::mdp::{enumerate_deterministic_policies, MarkovEnv, Policy};
use rewardsep::numeric::{int, ratio, NumericMode, Rational};
use rewardsep::soap::{check_consistency, Soap};

/// Random LP with `n <= 4` variables and `m <= 6` rows, small integer data,
/// finite lower bounds on every variable.
pub fn lp<R: Rng>(rng: &mut R) -> LinearProgram {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(0..=6);
    let mut lp = LinearProgram::new(n);
    lp.set_objective((0..n).map(|_| int(rng.gen_range(-5..=5))).collect());
    for j in 0..n {
        let lower = if rng.gen_bool(0.7) { 0 } else { rng.gen_range(-4..=-1) };
        let upper = if rng.gen_bool(0.3) { Some(int(lower + rng.gen_range(0..=6))) } else { None };
        lp.set_bounds(j, VarBound { lower: Some(int(lower)), upper });
    }
    for _ in 0..m {
        let row = (0..n).map(|_| int(rng.gen_range(-5..=5))).collect();
        let sense = *[Sense::Le, Sense::Ge, Sense::Eq, Sense::Le, Sense::Ge].choose(rng).unwrap();
        lp.add_row(row, sense, int(rng.gen_range(-6..=6)));
    }
    lp
}

/// Random probability vector over `k` outcomes with small-denominator
/// rational entries (weights 0..=4, at least one positive).
pub fn distribution<R: Rng>(rng: &mut R, k: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=4)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&x| ratio(x, total)).collect();
        }
    }
}

/// Random environment with `|S| <= 4`, `|A| <= 3`, rational transitions,
/// `γ ∈ {1/2, 9/10}`, starting in `s0`.
pub fn env<R: Rng>(rng: &mut R) -> MarkovEnv {
    let ns = rng.gen_range(1..=4);
    let na = rng.gen_range(1..=3);
    let transition = (0..ns * na).map(|_| distribution(rng, ns)).collect();
    let gamma = if rng.gen_bool(0.5) { ratio(1, 2) } else { ratio(9, 10) };
    MarkovEnv::new(
        (0..ns).map(|s| format!("s{s}")).collect(),
        (0..na).map(|a| format!("a{}", a + 1)).collect(),
        transition,
        gamma,
        "s0",
    )
    .unwrap()
}

/// Random stochastic policy for `env`.
pub fn stochastic_policy<R: Rng>(rng: &mut R, env: &MarkovEnv, name: &str) -> Policy {
    let probs = (0..env.num_states()).map(|_| distribution(rng, env.num_actions())).collect();
    Policy::stochastic(name, probs)
}

/// Random SOAP over the deterministic policies of `env`, with 1..=4 good and
/// 1..=5 bad policies, retried until consistent. `None` when no consistent
/// SOAP was found (for instance, when every policy has the same visitation).
pub fn consistent_deterministic_soap<R: Rng>(rng: &mut R, env: &MarkovEnv) -> Option<Soap> {
    let all = enumerate_deterministic_policies(env, 4096).unwrap();
    if all.len() < 2 {
        return None;
    }
    for _ in 0..20 {
        let mut pool = all.clone();
        pool.shuffle(rng);
        let n_good = rng.gen_range(1..=4.min(pool.len() - 1));
        let n_bad = rng.gen_range(1..=5.min(pool.len() - n_good));
        let bad = pool.split_off(n_good);
        let soap = Soap::new(env, pool, bad[..n_bad].to_vec()).unwrap();
        if check_consistency(env, &soap, NumericMode::ExactRational).unwrap().consistent {
            return Some(soap);
        }
    }
    None
}
