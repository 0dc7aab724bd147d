mod common;

use clbound::bernstein::assemble_b;
use clbound::certify::{n_coeffs, BernsteinPolyD};
use clbound::geometry::{integrate_bary_monomial, make_triangle, Barycentric, Point, Triangle};
use clbound::mesh::{uniform_mesh, Orientation};
use clbound::morley::{assemble_a, fm_interpolate, local_basis, local_h2_stiffness};
use clbound::optimize::{solve_relaxed, solve_relaxed_cholesky};
use clbound::sparse::EnvelopeCholesky;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn shape_strategy() -> impl Strategy<Value = (f64, f64)> {
    (0.3f64..1.0, 0.35f64..2.8)
}

#[test]
fn orthogonality_of_fm_interpolation() {
    let tri = make_triangle(1.0, PI / 2.0, 1.0).unwrap();
    assert!(orthogonality_defect(&space(&tri, 2), &cubic()) < 1e-10);
    for (alpha, theta, n) in [(0.7, 1.2, 3), (1.0, 2.5, 4), (0.5, PI / 3.0, 5)] {
        let tri = make_triangle(alpha, theta, 1.0).unwrap();
        for u in [cubic(), mixed_cubic(), quartic()] {
            let d = orthogonality_defect(&space(&tri, n), &u);
            assert!(d < 1e-10, "defect {d:e}");
        }
    }
}

#[test]
fn pythagoras_identity() {
    for (alpha, theta, n) in [(1.0, PI / 2.0, 2), (0.6, 1.9, 4), (0.9, 0.8, 6)] {
        let tri = make_triangle(alpha, theta, 1.0).unwrap();
        for u in [cubic(), mixed_cubic(), quartic()] {
            let d = pythagoras_defect(&space(&tri, n), &u);
            assert!(d < 1e-9, "defect {d:e}");
        }
    }
}

#[test]
fn stiffness_is_spd_on_small_meshes() {
    for (alpha, theta) in [(1.0, PI / 2.0), (1.0, 5.0 * PI / 6.0), (0.4, 1.1)] {
        let tri = make_triangle(alpha, theta, 1.0).unwrap();
        for n in 1..=8 {
            let a = assemble_a(&space(&tri, n));
            assert!(a.matrix().is_symmetric(1e-12));
            assert!(EnvelopeCholesky::factor(a.matrix()).is_ok());
            assert!(a.matrix().to_dense().cholesky().is_some());
        }
    }
}

#[test]
fn convex_hull_dominates_sampled_sup() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(21);
    for _ in 0..100 {
        let tri = random_triangle(&mut rng);
        let n = rng.gen_range(1..=4);
        assert!(convex_hull_ratio(&space(&tri, n), &mut rng) <= 1.0 + 1e-12);
    }
}

#[test]
fn local_stiffness_matches_quadrature() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..10 {
        let tri = random_triangle(&mut rng);
        let basis = local_basis(&tri).unwrap();
        let k = local_h2_stiffness(&tri, &basis);
        let grads = tri.barycentric_gradients();
        for i in 0..6 {
            for j in 0..6 {
                let (hi, hj) = (basis.hessian(i, &grads), basis.hessian(j, &grads));
                let q = integrate(&tri, 3, |_| hessian_dot(&hi, &hj));
                assert!((k[(i, j)] - q).abs() <= 1e-12 * (1.0 + q.abs()));
            }
        }
    }
}

#[test]
fn relaxation_is_below_any_normalized_interpolant() {
    let tri = make_triangle(1.0, PI / 2.0, 1.0).unwrap();
    let sp = space(&tri, 8);
    let a = assemble_a(&sp);
    let b = assemble_b(&sp).unwrap();
    let lambda = solve_relaxed(&a, &b).unwrap().lambda_hb;
    let funcs: [fn(&Point) -> (f64, nalgebra::Vector2<f64>); 2] = [
        |p| {
            let (x, y) = (p.x, p.y);
            (x * y * (1.0 - x - y), nalgebra::Vector2::new(y * (1.0 - 2.0 * x - y), x * (1.0 - x - 2.0 * y)))
        },
        |p| ((p.x * p.y).sin(), nalgebra::Vector2::new(p.y * (p.x * p.y).cos(), p.x * (p.x * p.y).cos())),
    ];
    for u in funcs {
        let x = fm_interpolate(&sp, u);
        let mut sup: f64 = 0.0;
        for e in 0..sp.mesh().elements().len() {
            for i in 0..=6 {
                for j in 0..=6 - i {
                    let bc = Barycentric::new(i as f64 / 6.0, j as f64 / 6.0, (6 - i - j) as f64 / 6.0);
                    sup = sup.max(sp.evaluate(&x, e, &bc).abs());
                }
            }
        }
        let energy = a.matrix().quadratic_form(&x) / (sup * sup);
        assert!(lambda <= energy);
    }
}

#[test]
fn refinement_increases_lambda_on_right_isosceles() {
    let tri = make_triangle(1.0, PI / 2.0, 1.0).unwrap();
    let lam = |n| {
        let sp = space(&tri, n);
        solve_relaxed_cholesky(&assemble_a(&sp), &assemble_b(&sp).unwrap()).unwrap().lambda_hb
    };
    assert!(lam(8) < lam(16));
}

fn monomial_case(tri: &Triangle, a: u32, b: u32, c: u32) -> (f64, f64) {
    let exact = integrate_bary_monomial(tri, a, b, c);
    let q = integrate(tri, 8, |p| {
        let bc = tri.barycentric(p);
        bc.u.powi(a as i32) * bc.v.powi(b as i32) * bc.w.powi(c as i32)
    });
    (exact, q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn monomial_integrals_match_quadrature(seed in any::<u64>(), a in 0u32..=10, b in 0u32..=10, c in 0u32..=10) {
        prop_assume!(a + b + c <= 10);
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let tri = random_triangle(&mut rng);
        let (exact, q) = monomial_case(&tri, a, b, c);
        prop_assert!((exact - q).abs() <= 1e-12 * exact.abs());
    }

    #[test]
    fn bernstein_seminorm_matches_quadrature(seed in any::<u64>(), d in 2usize..=10) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let tri = random_triangle(&mut rng);
        let f = BernsteinPolyD::new(d, (0..n_coeffs(d)).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let exact = f.seminorm_sq(&tri);
        let [xx, xy, yy] = f.second_derivatives(&tri);
        let g = |c: &[f64]| BernsteinPolyD::new(d - 2, c.to_vec()).unwrap();
        let (pxx, pxy, pyy) = (g(&xx), g(&xy), g(&yy));
        let q = integrate(&tri, 12, |p| {
            let b = tri.barycentric(p);
            let (a, m, c) = (pxx.evaluate(&b), pxy.evaluate(&b), pyy.evaluate(&b));
            a * a + 2.0 * m * m + c * c
        });
        prop_assert!((exact - q).abs() <= 1e-10 * q.abs());
        // Second derivatives against finite differences of the polynomial itself.
        let p0 = tri.centroid();
        let eps = 1e-4;
        let val = |dx: f64, dy: f64| f.evaluate(&tri.barycentric(&Point::new(p0.x + dx, p0.y + dy)));
        let fd_xx = (val(eps, 0.0) - 2.0 * val(0.0, 0.0) + val(-eps, 0.0)) / (eps * eps);
        let b0 = tri.barycentric(&p0);
        prop_assert!((fd_xx - pxx.evaluate(&b0)).abs() <= 1e-4 * (1.0 + fd_xx.abs()) * (d * d) as f64);
    }

    #[test]
    fn mesh_elements_are_similar_to_parent((alpha, theta) in shape_strategy(), n in 1usize..=8) {
        let tri = make_triangle(alpha, theta, 1.0).unwrap();
        let mesh = uniform_mesh(&tri, n).unwrap();
        let parent = tri.vertices();
        let area: f64 = (0..mesh.elements().len()).map(|e| mesh.element_triangle(e).area()).sum();
        prop_assert!((area - tri.area()).abs() <= 1e-12 * tri.area());
        for (e, el) in mesh.elements().iter().enumerate() {
            let v = el.vertices.map(|k| mesh.vertices()[k]);
            let s = match el.orientation { Orientation::Up => 1.0, Orientation::Down => -1.0 };
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let expected = (parent[b] - parent[a]) * (s / n as f64);
                prop_assert!(((v[b] - v[a]) - expected).norm() <= 1e-12, "element {}", e);
            }
        }
    }

    #[test]
    fn lambda_scales_with_h((alpha, theta) in shape_strategy(), h in 0.2f64..5.0) {
        let unit = make_triangle(alpha, theta, 1.0).unwrap();
        let scaled = make_triangle(alpha, theta, h).unwrap();
        let lam = |t: &Triangle| {
            let sp = space(t, 3);
            solve_relaxed(&assemble_a(&sp), &assemble_b(&sp).unwrap()).unwrap().lambda_hb
        };
        let (l1, lh) = (lam(&unit), lam(&scaled));
        prop_assert!((lh - l1 / (h * h)).abs() <= 1e-10 * lh);
    }

    #[test]
    fn scaled_triangle_matches_construction((alpha, theta) in shape_strategy(), h in 0.2f64..5.0) {
        let unit = make_triangle(alpha, theta, 1.0).unwrap().scaled(h).unwrap();
        let direct = make_triangle(alpha, theta, h).unwrap();
        for k in 0..3 {
            prop_assert!((unit.vertex(k) - direct.vertex(k)).norm() <= 1e-12 * h);
        }
    }

    #[test]
    fn barycentric_roundtrip(seed in any::<u64>(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let tri = random_triangle(&mut rng);
        let p = Point::new(x, y);
        let b = tri.barycentric(&p);
        prop_assert!(b.is_normalized() || (b.u + b.v + b.w - 1.0).abs() < 1e-11);
        prop_assert!((tri.point_at(&b) - p).norm() <= 1e-12 * (1.0 + p.coords.norm()));
    }
}
