mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rewardsep::lp::{ray_certifies, solve, Certificate, LpStatus};
use rewardsep::numeric::{to_f64, NumericMode};
use support::lp_oracle::{solve_by_vertices, OracleStatus};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = support::random::lp(&mut rng);
        let mode = NumericMode::ExactRational;
        let sol = solve(&lp, mode).unwrap();
        match (solve_by_vertices(&lp), sol.status) {
            (OracleStatus::Optimal(v), LpStatus::Optimal) => {
                prop_assert_eq!(sol.objective_value.as_ref().unwrap(), &v);
                let x = sol.primal.as_ref().unwrap();
                prop_assert!(lp.is_feasible_point(x, mode));
                let dual = sol.duals().unwrap().dual_objective(&lp, mode);
                prop_assert_eq!(dual.as_ref(), Some(&v));
            }
            (OracleStatus::Infeasible, LpStatus::Infeasible) => {
                prop_assert!(sol.farkas().unwrap().certifies(&lp, mode));
            }
            (OracleStatus::Unbounded, LpStatus::Unbounded) => {
                let Certificate::Ray(ray) = &sol.certificate else { panic!("missing ray") };
                prop_assert!(ray_certifies(&lp, ray, mode));
            }
            (expected, got) => prop_assert!(false, "oracle {:?} vs simplex {:?}\n{}", expected, got, lp),
        }
    }

    #[test]
    fn float_backend_agrees_with_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = support::random::lp(&mut rng);
        let exact = solve(&lp, NumericMode::ExactRational).unwrap();
        let float = solve(&lp, NumericMode::default()).unwrap();
        prop_assert_eq!(exact.status, float.status);
        if let (Some(a), Some(b)) = (&exact.objective_value, &float.objective_value) {
            prop_assert!((to_f64(a) - to_f64(b)).abs() <= 1e-6);
        }
    }

    #[test]
    fn solve_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = support::random::lp(&mut rng);
        let a = solve(&lp, NumericMode::ExactRational).unwrap();
        let b = solve(&lp, NumericMode::ExactRational).unwrap();
        prop_assert_eq!(a, b);
    }
}
