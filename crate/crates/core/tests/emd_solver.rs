mod common;

use common::*;
use domsim::emd::{emd_value, solve_transport, validate_plan, TransportProblem};
use ndarray::Array2;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn problem(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> TransportProblem {
    let (m, n) = (supply.len(), demand.len());
    let c = Array2::from_shape_fn((m, n), |(i, j)| cost[i][j]);
    TransportProblem::new(supply.to_vec(), demand.to_vec(), c).unwrap()
}

fn random_costs(rng: &mut StdRng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect()).collect()
}

fn to_rows(flow: &Array2<f64>) -> Vec<Vec<f64>> {
    flow.rows().into_iter().map(|r| r.to_vec()).collect()
}

#[test]
fn matches_basis_enumeration_on_small_problems() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..300 {
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=4);
        let (s, d) = random_rational_marginals(&mut rng, m, n);
        let cost = random_costs(&mut rng, m, n);
        let expected = brute_force_optimum(&s, &d, &cost);
        let sf: Vec<f64> = s.iter().map(|&r| to_f64(r)).collect();
        let df: Vec<f64> = d.iter().map(|&r| to_f64(r)).collect();
        let p = problem(&sf, &df, &cost);
        let plan = solve_transport(&p).unwrap();
        assert!((plan.objective - expected).abs() <= 1e-9, "{} vs {expected}", plan.objective);
        assert!(validate_plan(&plan.flow, &p).unwrap().feasible);
    }
}

#[test]
fn integer_costs_with_many_ties() {
    // Small integer costs produce many equal reduced costs and degenerate
    // pivots.
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let m = rng.gen_range(2..=4);
        let n = rng.gen_range(2..=4);
        let (s, d) = random_rational_marginals(&mut rng, m, n);
        let cost: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0..3) as f64).collect())
            .collect();
        let expected = brute_force_optimum(&s, &d, &cost);
        let sf: Vec<f64> = s.iter().map(|&r| to_f64(r)).collect();
        let df: Vec<f64> = d.iter().map(|&r| to_f64(r)).collect();
        let plan = solve_transport(&problem(&sf, &df, &cost)).unwrap();
        assert!((plan.objective - expected).abs() <= 1e-9);
    }
}

#[test]
fn dominates_random_feasible_plans() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..50 {
        let m = rng.gen_range(1..=8);
        let n = rng.gen_range(1..=8);
        let s: Vec<f64> = {
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
            let t: f64 = raw.iter().sum();
            raw.iter().map(|x| x / t).collect()
        };
        let d: Vec<f64> = {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let t: f64 = raw.iter().sum();
            raw.iter().map(|x| x / t).collect()
        };
        let cost = random_costs(&mut rng, m, n);
        let p = problem(&s, &d, &cost);
        let plan = solve_transport(&p).unwrap();
        for _ in 0..100 {
            let other = random_feasible_plan(&mut rng, &s, &d);
            assert!(plan.objective <= plan_cost(&other, &cost) + 1e-9);
        }
        let nw = northwest_corner(&s, &d);
        let nw_flow = Array2::from_shape_fn((m, n), |(i, j)| nw[i][j]);
        assert!(validate_plan(&nw_flow, &p).unwrap().feasible);
        assert!(plan.objective <= plan_cost(&nw, &cost) + 1e-9);
    }
}

#[test]
fn agrees_with_successive_shortest_paths() {
    let mut rng = StdRng::seed_from_u64(99);
    for (m, n) in [(5, 7), (12, 9), (20, 20), (31, 17), (40, 3)] {
        let s: Vec<f64> = (0..m).map(|_| rng.gen_range(1..50) as f64).collect();
        let total: f64 = s.iter().sum();
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..10.0)).collect();
        let dt: f64 = d.iter().sum();
        d.iter_mut().for_each(|x| *x *= total / dt);
        let cost = random_costs(&mut rng, m, n);
        let p = problem(&s, &d, &cost);
        let plan = solve_transport(&p).unwrap();
        let oracle = successive_shortest_paths(&s, &d, &cost);
        assert!(
            (plan.objective - oracle).abs() <= 1e-9 * total.max(1.0),
            "{m}x{n}: {} vs {oracle}",
            plan.objective
        );
        let check = validate_plan(&plan.flow, &p).unwrap();
        assert!(check.feasible, "{check:?}");
    }
}

#[test]
fn larger_problem_is_feasible_and_beats_greedy() {
    let mut rng = StdRng::seed_from_u64(5);
    let (m, n) = (300, 200);
    let s = vec![1.0 / m as f64; m];
    let d: Vec<f64> = {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(1..100) as f64).collect();
        let t: f64 = raw.iter().sum();
        raw.iter().map(|x| x / t).collect()
    };
    let cost = random_costs(&mut rng, m, n);
    let p = problem(&s, &d, &cost);
    let plan = solve_transport(&p).unwrap();
    let check = validate_plan(&plan.flow, &p).unwrap();
    assert!(check.feasible, "{check:?}");
    assert!(check.min_flow >= 0.0);
    let basic = plan.flow.iter().filter(|&&f| f > 0.0).count();
    assert!(basic <= m + n - 1);
    for _ in 0..5 {
        let other = random_feasible_plan(&mut rng, &s, &d);
        assert!(plan.objective <= plan_cost(&other, &cost) + 1e-9);
    }
}

#[test]
fn solver_is_deterministic() {
    let mut rng = StdRng::seed_from_u64(8);
    let (m, n) = (40, 30);
    let s = vec![1.0 / m as f64; m];
    let d = vec![1.0 / n as f64; n];
    let cost: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..4) as f64).collect()).collect();
    let p = problem(&s, &d, &cost);
    let a = solve_transport(&p).unwrap();
    let b = solve_transport(&p).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scale_equivariance(
        seed in any::<u64>(),
        lambda in 0.01f64..100.0,
        m in 1usize..6,
        n in 1usize..6,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (s, d) = random_rational_marginals(&mut rng, m, n);
        let sf: Vec<f64> = s.iter().map(|&r| to_f64(r)).collect();
        let df: Vec<f64> = d.iter().map(|&r| to_f64(r)).collect();
        let cost = random_costs(&mut rng, m, n);
        let scaled: Vec<Vec<f64>> = cost.iter().map(|r| r.iter().map(|c| c * lambda).collect()).collect();
        let base = emd_value(&solve_transport(&problem(&sf, &df, &cost)).unwrap()).unwrap();
        let big = emd_value(&solve_transport(&problem(&sf, &df, &scaled)).unwrap()).unwrap();
        prop_assert!((big - lambda * base).abs() <= 1e-9 * lambda.max(1.0));
    }

    #[test]
    fn plans_are_feasible_and_sparse(seed in any::<u64>(), m in 1usize..10, n in 1usize..10) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (s, d) = random_rational_marginals(&mut rng, m.min(10), n.min(10));
        let sf: Vec<f64> = s.iter().map(|&r| to_f64(r)).collect();
        let df: Vec<f64> = d.iter().map(|&r| to_f64(r)).collect();
        let cost = random_costs(&mut rng, m, n);
        let p = problem(&sf, &df, &cost);
        let plan = solve_transport(&p).unwrap();
        prop_assert!(validate_plan(&plan.flow, &p).unwrap().feasible);
        prop_assert!(plan.flow.iter().all(|&f| f >= 0.0));
        prop_assert!(plan.flow.iter().filter(|&&f| f > 0.0).count() <= m + n - 1);
        prop_assert!((plan.normalized_cost - plan.objective).abs() <= 1e-12);
        let rows = to_rows(&plan.flow);
        prop_assert!((plan_cost(&rows, &cost) - plan.objective).abs() <= 1e-12);
    }
}
