mod common;

use common::{generic_matrix, random_pattern};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rap_core::model::{Assignment, Position};
use rap_core::montecarlo::{sample_matrix, sample_rng};
use rap_core::solver::{
    brute_force_k_assignment, enumerate_optimal_assignments, solve_k_assignment,
    symmetric_difference_paths, CostMatrix,
};
use rap_core::{RapInstance, RationalValue};

fn rational_matrix(m: usize, n: usize, cells: &[(i64, i64)]) -> CostMatrix<RationalValue> {
    let entries = cells
        .iter()
        .take(m * n)
        .map(|&(a, b)| RationalValue::new(a, b))
        .collect();
    CostMatrix::from_vec(m, n, entries).unwrap()
}

fn matrix_and_k() -> impl Strategy<Value = (CostMatrix<RationalValue>, usize)> {
    (1usize..=6, 1usize..=6)
        .prop_flat_map(|(m, n)| {
            (
                Just(m),
                Just(n),
                1..=m.min(n),
                prop::collection::vec((0i64..6, 1i64..4), m * n),
            )
        })
        .prop_map(|(m, n, k, cells)| (rational_matrix(m, n, &cells), k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn solver_matches_brute_force((matrix, k) in matrix_and_k()) {
        let fast = solve_k_assignment(&matrix, k).unwrap();
        let slow = brute_force_k_assignment(&matrix, k).unwrap();
        prop_assert_eq!(&fast.cost, &slow.cost);
        prop_assert_eq!(&fast.assignment, &slow.assignment);
        prop_assert_eq!(matrix.cost_of(fast.assignment.positions()), fast.cost);
        prop_assert_eq!(fast.assignment.len(), k);
    }

    #[test]
    fn decreasing_an_entry_never_increases_cost(
        (matrix, k) in matrix_and_k(),
        cell in any::<prop::sample::Index>(),
        factor in 0i64..4,
    ) {
        let (m, n) = (matrix.rows(), matrix.cols());
        let idx = cell.index(m * n);
        let (r, c) = (idx / n, idx % n);
        let mut lowered = matrix.clone();
        let scaled = matrix.get(r, c).clone() * RationalValue::new(factor, 4);
        lowered.set(r, c, scaled);
        let before = solve_k_assignment(&matrix, k).unwrap().cost;
        let after = solve_k_assignment(&lowered, k).unwrap().cost;
        prop_assert!(after <= before);
    }
}

fn path_shaped(mu: &Assignment, nu: &Assignment) -> bool {
    let paths = symmetric_difference_paths(mu, nu);
    match paths.as_slice() {
        [_] => true,
        [a, b] => a.len() % 2 == 1 && b.len() % 2 == 1,
        _ => false,
    }
}

#[test]
fn two_optima_are_linked_by_short_alternating_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut multi = 0;
    for _ in 0..600 {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=m.min(n));
        let z = random_pattern(&mut rng, m, n, 0.45);
        let matrix = generic_matrix(&mut rng, &z);
        let optima = enumerate_optimal_assignments(&matrix, k).unwrap();
        if optima.len() > 1 {
            multi += 1;
        }
        for mu in &optima {
            for nu in &optima {
                for &a in nu.positions().iter().filter(|a| !mu.contains(**a)) {
                    let found = optima
                        .iter()
                        .any(|alt| alt.contains(a) && path_shaped(mu, alt));
                    assert!(found, "{m}x{n} k={k} Z={:?} mu={mu:?} a={a:?}", z.zeros());
                }
            }
        }
    }
    assert!(multi > 50, "too few instances with several optima: {multi}");
}

#[test]
fn optima_of_sampled_problems_differ_only_at_zeros() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for index in 0..400 {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=m.min(n));
        let p = RapInstance::new(random_pattern(&mut rng, m, n, 0.4), k).unwrap();
        let sample = sample_matrix(&p, &mut sample_rng(17, index));
        let optima = enumerate_optimal_assignments(&sample.to_cost_matrix(), k).unwrap();
        let nonzero = |a: &Assignment| -> Vec<Position> {
            a.positions()
                .iter()
                .copied()
                .filter(|q| !p.pattern().is_zero(*q))
                .collect()
        };
        let first = nonzero(&optima[0]);
        assert!(optima.iter().all(|a| nonzero(a) == first), "{p}");
    }
}
