mod common;

use clbound::bernstein::assemble_b;
use clbound::geometry::make_triangle;
use clbound::morley::assemble_a;
use clbound::optimize::{solve_relaxed, solve_relaxed_cholesky};
use common::*;
use rand::SeedableRng;
use std::f64::consts::PI;

#[test]
fn single_element_matches_enumeration() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    for _ in 0..20 {
        let tri = random_triangle(&mut rng);
        let sp = space(&tri, 1);
        let (a, b) = (assemble_a(&sp), assemble_b(&sp).unwrap());
        let expected = brute_force_relaxed(&sp);
        for got in [solve_relaxed(&a, &b).unwrap().lambda_hb, solve_relaxed_cholesky(&a, &b).unwrap().lambda_hb] {
            assert!((got - expected).abs() <= 1e-10 * expected, "{got} vs {expected}");
        }
    }
}

#[test]
fn single_right_isosceles_element() {
    let tri = make_triangle(1.0, PI / 2.0, 1.0).unwrap();
    let sp = space(&tri, 1);
    let b = assemble_b(&sp).unwrap();
    assert_eq!((b.matrix().nrows(), b.matrix().ncols()), (6, 3));
    let x = [0.3, -1.2, 0.7];
    let direct = sp.element_bernstein(&x, 0);
    let bx = b.apply(&x);
    for k in 0..6 {
        assert!((bx[k] - direct[k]).abs() < 1e-14);
    }
    let sol = solve_relaxed(&assemble_a(&sp), &b).unwrap();
    assert!((sol.lambda_hb - brute_force_relaxed(&sp)).abs() <= 1e-10 * sol.lambda_hb);
}
