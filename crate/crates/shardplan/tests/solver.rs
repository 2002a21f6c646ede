//! Optimizer invariants over randomly drawn structures: feasibility of the
//! construction seeds, optimality bounds, rate identities on extracted
//! maps, and determinism.

mod util;

use shardplan::access::AccessStructure;
use shardplan::ilp::vector_from_map;
use shardplan::ilp::{
    build_ip_avg, build_ip_ramp, build_ip_worst, solution_to_map, solution_to_ramp_map, solve,
    IpObjective, SolveConfig, SolveStatus,
};
use shardplan::maps::{
    cumulative_map, modified_cumulative_map, ramp_cumulative_map, rates, verify_perfect,
    verify_ramp, AssignmentMap, RampMode, Rate,
};
use util::{random_complete_structure, random_ramp_structure, rng};

/// Sorted holder sets of a map's primitives, for comparison up to a
/// permutation of the primitive indices.
fn holder_multiset(map: &AssignmentMap) -> Vec<u32> {
    let mut holders = vec![0u32; map.m()];
    for i in 0..map.n() {
        for &q in map.assign(i) {
            holders[q] |= 1 << i;
        }
    }
    holders.sort_unstable();
    holders
}

/// The cumulative point is feasible for both perfect programs, the solver
/// always reaches an optimum on complete consistent structures, and that
/// optimum never exceeds the cumulative or modified objective values.
#[test]
fn perfect_programs_accept_their_construction_seeds() {
    let mut rng = rng(0x11aa);
    for trial in 0..60 {
        let n = 2 + (trial % 4);
        let s = random_complete_structure(n, &mut rng);
        let cum = cumulative_map(&s);

        for objective in [IpObjective::Average, IpObjective::Worst] {
            let ip = match objective {
                IpObjective::Average => build_ip_avg(&s).unwrap(),
                IpObjective::Worst => build_ip_worst(&s).unwrap(),
            };
            let sol = solve(&ip, &SolveConfig::default());
            assert_eq!(sol.status(), SolveStatus::Optimal, "n={n} trial={trial}");

            // The cumulative map embeds into the program unless its only
            // maximal forbidden set is empty (its holder set would be the
            // whole universe, which the perfect programs exclude).
            if let Some(point) = vector_from_map(&ip, &cum) {
                assert!(ip.is_feasible_point(&point), "n={n} trial={trial} {objective:?}");
                assert!(
                    sol.objective() <= ip.evaluate_objective(&point),
                    "n={n} trial={trial} {objective:?}"
                );
            }
            if let Ok(modified) = modified_cumulative_map(&s) {
                if let Some(point) = vector_from_map(&ip, &modified) {
                    assert!(ip.is_feasible_point(&point), "n={n} trial={trial} modified");
                    assert!(sol.objective() <= ip.evaluate_objective(&point));
                }
            }
        }
    }
}

/// Maps extracted from optimal solutions pass the verifier, and their rate
/// reports match the objective values: `n * avg rate` equals the average
/// objective and the worst rate equals the worst objective.
#[test]
fn optimal_maps_verify_and_match_their_objectives() {
    let mut rng = rng(0x22bb);
    for trial in 0..60 {
        let n = 2 + (trial % 4);
        let s = random_complete_structure(n, &mut rng);

        let avg = solve(&build_ip_avg(&s).unwrap(), &SolveConfig::default());
        assert!(avg.is_optimal());
        let avg_map = solution_to_map(&s, &avg).unwrap();
        let report = verify_perfect(&avg_map, &s);
        assert!(report.passed(), "n={n} trial={trial}: {:?}", report.violations());
        assert_eq!(rates(&avg_map).average(), Rate::new(avg.objective(), n as i64));

        let worst = solve(&build_ip_worst(&s).unwrap(), &SolveConfig::default());
        assert!(worst.is_optimal());
        let worst_map = solution_to_map(&s, &worst).unwrap();
        assert!(verify_perfect(&worst_map, &s).passed());
        assert_eq!(rates(&worst_map).worst(), Rate::from_integer(worst.objective()));
    }
}

/// Forcing the threshold to equal the total share count recovers the
/// cumulative construction: `m = |A_0^+|` and the same holder sets up to a
/// permutation of the primitives.
#[test]
fn share_conserving_solutions_reproduce_the_cumulative_map() {
    let mut rng = rng(0x33cc);
    for trial in 0..40 {
        let n = 2 + (trial % 3);
        let s = random_complete_structure(n, &mut rng);
        let mut ip = build_ip_avg(&s).unwrap();
        ip.require_threshold_equals_share_count().unwrap();
        let sol = solve(&ip, &SolveConfig::default());
        let cum = cumulative_map(&s);
        if vector_from_map(&ip, &cum).is_none() {
            // Only maximal forbidden set is empty: the cumulative map is the
            // excluded everyone-atom, and no other point conserves shares.
            assert_eq!(sol.status(), SolveStatus::Infeasible, "n={n} trial={trial}");
            continue;
        }
        assert!(sol.is_optimal(), "n={n} trial={trial}: {:?}", sol.status());
        let map = solution_to_map(&s, &sol).unwrap();
        assert_eq!(map.m(), s.forbidden_max().len(), "n={n} trial={trial}");
        assert_eq!(
            holder_multiset(&map),
            holder_multiset(&cum),
            "n={n} trial={trial}: not the cumulative map up to permutation"
        );
    }
}

/// The ramp-cumulative point is feasible for the relaxed ramp programs,
/// which therefore always reach an optimum on monotone structures; the
/// extracted maps pass the relaxed verifier and match their objectives.
#[test]
fn relaxed_ramp_programs_accept_the_cumulative_seed() {
    let mut rng = rng(0x44dd);
    for trial in 0..40 {
        let n = 2 + (trial % 3);
        let l = 1 + (trial % 3);
        let r = random_ramp_structure(n, l, &mut rng);
        let cum = ramp_cumulative_map(&r).unwrap();

        for objective in [IpObjective::Average, IpObjective::Worst] {
            let ip = build_ip_ramp(&r, RampMode::Relaxed, objective).unwrap();
            let point =
                vector_from_map(&ip, &cum).expect("ramp programs keep every holder-set variable");
            assert!(ip.is_feasible_point(&point), "n={n} l={l} trial={trial} {objective:?}");

            let sol = solve(&ip, &SolveConfig::default());
            assert_eq!(sol.status(), SolveStatus::Optimal, "n={n} l={l} trial={trial}");
            assert!(sol.objective() <= ip.evaluate_objective(&point));

            let map = solution_to_ramp_map(&r, &sol).unwrap();
            let report = verify_ramp(&map, &r, RampMode::Relaxed).unwrap();
            assert!(report.passed(), "n={n} l={l} trial={trial}: {:?}", report.violations());
            let expected = match objective {
                IpObjective::Average => Rate::new(sol.objective(), (n * l) as i64),
                IpObjective::Worst => Rate::new(sol.objective(), l as i64),
            };
            let got = match objective {
                IpObjective::Average => rates(&map).average(),
                IpObjective::Worst => rates(&map).worst(),
            };
            assert_eq!(got, expected, "n={n} l={l} trial={trial} {objective:?}");
        }
    }
}

/// Exact ramp programs may be infeasible, but they never get stuck: the
/// status is always a definite answer under the default budget, and any
/// optimum passes the exact verifier.
#[test]
fn exact_ramp_programs_give_definite_answers() {
    let mut rng = rng(0x55ee);
    let mut optima = 0usize;
    for trial in 0..40 {
        let n = 2 + (trial % 3);
        let l = 1 + (trial % 3);
        let r = random_ramp_structure(n, l, &mut rng);
        let ip = build_ip_ramp(&r, RampMode::Exact, IpObjective::Average).unwrap();
        let sol = solve(&ip, &SolveConfig::default());
        match sol.status() {
            SolveStatus::Optimal => {
                optima += 1;
                let map = solution_to_ramp_map(&r, &sol).unwrap();
                assert!(verify_ramp(&map, &r, RampMode::Exact).unwrap().passed());
            }
            SolveStatus::Infeasible => {}
            SolveStatus::BudgetExceeded => {
                panic!("n={n} l={l} trial={trial}: default budget exhausted")
            }
        }
    }
    assert!(optima > 0, "no exact ramp program was ever feasible");
}

/// Identical inputs give identical solutions, with and without the
/// canonicalization pass.
#[test]
fn identical_runs_return_identical_solutions() {
    let mut rng = rng(0x66ff);
    for trial in 0..20 {
        let n = 2 + (trial % 4);
        let s = random_complete_structure(n, &mut rng);
        let ip = build_ip_avg(&s).unwrap();
        for canonical in [true, false] {
            let config = SolveConfig { canonical, ..SolveConfig::default() };
            let a = solve(&ip, &config);
            let b = solve(&ip, &config);
            assert_eq!(a, b, "n={n} trial={trial} canonical={canonical}");
        }
    }
}

/// Exhausting the node budget is reported as such, not as a wrong answer.
#[test]
fn tiny_budgets_are_reported_as_exhausted() {
    let s = AccessStructure::from_threshold(3, 6).unwrap();
    let ip = build_ip_avg(&s).unwrap();
    let config = SolveConfig { node_budget: 1, ..SolveConfig::default() };
    let sol = solve(&ip, &config);
    assert_eq!(sol.status(), SolveStatus::BudgetExceeded);
    assert!(!sol.is_optimal());
}
