//! Property tests for the commuting-projection inequality: the inequality
//! and its equality-case structure must hold for arbitrary families and
//! vectors, not just the seeded suites in the unit tests.

use entroflow_core::projection::{
    check_inequality, equality_case, equality_witness_check, project_out_common,
    random_family, WitnessVerdict,
};
use proptest::prelude::*;

/// An arbitrary admissible problem size: `m` projections in dimension `dim`
/// with all `2^m` joint eigenvalue patterns realizable.
fn sizes() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=6).prop_flat_map(|m| ((1usize << m)..=80).prop_map(move |dim| (m, dim)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inequality_holds_for_random_vectors(
        (m, dim) in sizes(),
        family_seed in any::<u64>(),
        raw in prop::collection::vec(-1e3f64..1e3, 6 * 80),
    ) {
        let family = random_family(dim, m, family_seed).unwrap();
        let xis: Vec<Vec<f64>> = (0..m)
            .map(|i| project_out_common(&family, &raw[i * dim..(i + 1) * dim]))
            .collect();
        let (lhs, rhs, holds) = check_inequality(&family, &xis).unwrap();
        prop_assert!(holds, "lhs={lhs} rhs={rhs}");
        prop_assert!(lhs <= rhs + 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn inequality_rejects_hypothesis_violations(
        (m, dim) in sizes(),
        family_seed in any::<u64>(),
    ) {
        let family = random_family(dim, m, family_seed).unwrap();
        // a constant vector has mass on the all-ones pattern, which the
        // joint-kernel hypothesis forbids
        let xis: Vec<Vec<f64>> = (0..m).map(|_| vec![1.0; dim]).collect();
        prop_assert!(check_inequality(&family, &xis).is_err());
    }

    #[test]
    fn equality_cases_attain_equality_and_pass_witness(
        (m, dim) in sizes(),
        family_seed in any::<u64>(),
        case_seed in any::<u64>(),
    ) {
        let family = random_family(dim, m, family_seed).unwrap();
        let xis = equality_case(&family, case_seed);
        let (lhs, rhs, holds) = check_inequality(&family, &xis).unwrap();
        prop_assert!(holds);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0), "lhs={lhs} rhs={rhs}");
        prop_assert_eq!(
            equality_witness_check(&family, &xis).unwrap(),
            WitnessVerdict::Pass
        );
    }

    #[test]
    fn projecting_out_the_common_range_is_idempotent(
        (m, dim) in sizes(),
        family_seed in any::<u64>(),
        raw in prop::collection::vec(-1e3f64..1e3, 80),
    ) {
        let family = random_family(dim, m, family_seed).unwrap();
        let once = project_out_common(&family, &raw[..dim]);
        let twice = project_out_common(&family, &once);
        prop_assert_eq!(once, twice);
    }
}
