//! Geometry, functional and counting invariants. None of these assemble a
//! layer operator.

mod common;

use std::f64::consts::{PI, TAU};

use common::*;
use np_spectrum::functionals::{
    angular_parts_exact, curvature_form, euler_characteristic, principal_symbol, signed_parts,
    weyl_coefficients_signed, AngularRule,
};
use np_spectrum::geometry::{build_grid, evaluate_frame, ParametricSurface, Similarity, Vec3};
use np_spectrum::spectrum::{counting_function, moduli, split_spectrum, weyl_fit, FitWindow};
use proptest::prelude::*;

#[test]
fn analytic_and_finite_difference_frames_agree() {
    let mut surfaces: Vec<(&str, ParametricSurface)> = catalog().into_iter().map(|e| (e.name, e.surface)).collect();
    surfaces.push(("inverted ellipsoid", inverted_ellipsoid()));
    for (name, s) in surfaces {
        let grid = build_grid(&s, 24, 48).unwrap();
        let defect = frame_consistency_defect(&grid);
        assert!(defect <= 1e-6, "{name}: relative form discrepancy {defect:e}");
    }
}

#[test]
fn curvature_identities_hold_at_every_node() {
    for e in catalog() {
        let grid = build_grid(&e.surface, 24, 48).unwrap();
        let defect = curvature_identity_defect(&grid);
        assert!(defect <= 1e-10, "{}: {defect:e}", e.name);
    }
    let grid = build_grid(&inverted_ellipsoid(), 24, 48).unwrap();
    assert!(curvature_identity_defect(&grid) <= 1e-10);
}

#[test]
fn curvatures_scale_inversely_and_ignore_rigid_motion() {
    let defect = scale_and_motion_defect();
    assert!(defect <= 1e-10, "{defect:e}");
}

#[test]
fn gauss_bonnet_recovers_the_topology() {
    for e in catalog() {
        let grid = build_grid(&e.surface, e.resolution.0, e.resolution.1).unwrap();
        let chi = euler_characteristic(&grid).unwrap();
        assert!((chi - e.euler_char).abs() <= 1e-6, "{}: chi = {chi}", e.name);
    }
}

#[test]
fn split_parts_add_up_to_the_square() {
    let mut grids: Vec<_> =
        catalog().iter().map(|e| build_grid(&e.surface, e.resolution.0, e.resolution.1).unwrap()).collect();
    grids.push(build_grid(&inverted_ellipsoid(), 24, 48).unwrap());
    for grid in &grids {
        let (pointwise, integrated) = split_identity_defects(grid);
        assert!(pointwise <= 1e-14, "{pointwise:e}");
        assert!(integrated <= 1e-10, "{integrated:e}");
    }
}

#[test]
fn angular_resolution_doubling_is_stable() {
    for (name, json, resolution) in catalog_json() {
        let change = angular_doubling_change(json, resolution);
        assert!(change < 1e-10, "{name}: {change:e}");
    }
}

#[test]
fn total_coefficient_is_similarity_invariant() {
    for s in [ParametricSurface::ellipsoid(2.0, 1.2, 1.0).unwrap(), ParametricSurface::torus(2.0, 1.0).unwrap()] {
        let map = Similarity::rotation(Vec3::new(0.3, 1.0, -0.7), 2.1)
            .then(Similarity::scaling(2.5))
            .then(Similarity::translation(Vec3::new(-1.0, 4.0, 2.0)));
        let moved = s.transformed(map).unwrap();
        let a = weyl_coefficients_signed(&build_grid(&s, 32, 64).unwrap(), AngularRule::Exact).unwrap();
        let b = weyl_coefficients_signed(&build_grid(&moved, 32, 64).unwrap(), AngularRule::Exact).unwrap();
        assert!((a.a_total - b.a_total).abs() <= 1e-8, "{} vs {}", a.a_total, b.a_total);
    }
}

#[test]
fn principal_symbol_is_positive_on_strictly_convex_surfaces() {
    for e in catalog()
        .into_iter()
        .filter(|e| matches!(e.name, "sphere" | "ellipsoid" | "oblate_spheroid" | "prolate_spheroid"))
    {
        let grid = build_grid(&e.surface, 16, 32).unwrap();
        for f in grid.frames() {
            for k in 0..8 {
                let t = k as f64 * PI / 8.0;
                let sigma = principal_symbol(f, (t.cos(), t.sin())).unwrap();
                assert!(sigma > 0.0, "{}: symbol {sigma} at ({}, {})", e.name, f.u, f.v);
            }
        }
    }
}

#[test]
fn counting_and_fit_on_synthetic_sequences() {
    let seq = synthetic_weyl_sequence(0.25, 2000, 0.01);
    let fit = weyl_fit(&seq, FitWindow::Auto).unwrap();
    assert_eq!(fit.window, (4, 250));
    assert!((fit.c_hat - 0.25).abs() <= 0.02 * 0.25, "{fit:?}");
    assert!((fit.counting_estimate - 0.0625).abs() <= 0.05 * 0.0625, "{fit:?}");
    let exact: Vec<f64> = (1..=800).map(|j| 0.25 / (j as f64).sqrt()).collect();
    assert_eq!(weyl_fit(&exact, FitWindow::Auto).unwrap().c_hat, 0.25);
    // n(λ) = #{j : C j^{-1/2} > λ} = ⌈(C/λ)²⌉ − 1
    for level in [0.1, 0.05, 0.02, 0.011] {
        let expected = ((0.25f64 / level).powi(2)).ceil() as usize - 1;
        assert_eq!(counting_function(&exact, level).unwrap(), expected, "level {level}");
    }
}

proptest! {
    #[test]
    fn ellipsoid_frames_match_finite_differences(
        a in 0.5f64..3.0, b in 0.5f64..3.0, c in 0.5f64..3.0,
        u in 0.05f64..3.09, v in 0.0f64..TAU,
    ) {
        let s = ParametricSurface::ellipsoid(a, b, c).unwrap();
        let f = evaluate_frame(&s, 0, u, v).unwrap();
        let fd = fd_forms(&s, 0, u, v, FD_STEP);
        let analytic = [f.e, f.f, f.g, f.l, f.m, f.n];
        for form in [0..3, 3..6] {
            let scale = analytic[form.clone()].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for i in form {
                prop_assert!((analytic[i] - fd[i]).abs() <= 1e-6 * scale, "entry {} {} vs {}", i, analytic[i], fd[i]);
            }
        }
    }

    #[test]
    fn torus_curvatures_match_closed_form(big in 1.5f64..4.0, ratio in 0.1f64..0.9, u in 0.0f64..TAU, v in 0.0f64..TAU) {
        // meridian curvature -1/r, parallel curvature -cos v/(R + r cos v)
        let r = ratio * big;
        let s = ParametricSurface::torus(big, r).unwrap();
        let c = np_spectrum::geometry::principal_curvatures(&evaluate_frame(&s, 0, u, v).unwrap());
        let (m, p) = (-1.0 / r, -v.cos() / (big + r * v.cos()));
        prop_assert!((c.k1 - m.max(p)).abs() <= 1e-10 && (c.k2 - m.min(p)).abs() <= 1e-10);
        prop_assert!((c.gauss - m * p).abs() <= 1e-10);
    }

    #[test]
    fn sphere_curvature_scales_with_radius(r in 0.1f64..10.0, u in 0.05f64..3.09, v in 0.0f64..TAU) {
        let s = ParametricSurface::sphere(r).unwrap();
        let c = np_spectrum::geometry::principal_curvatures(&evaluate_frame(&s, 0, u, v).unwrap());
        prop_assert!((c.k1 * r + 1.0).abs() <= 1e-12 && (c.k2 * r + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn signed_square_identity(k1 in -5.0f64..5.0, k2 in -5.0f64..5.0, theta in 0.0f64..TAU) {
        let x = curvature_form(k1, k2, theta);
        let (p, m) = signed_parts(x);
        prop_assert!((p * p + m * m - x * x).abs() <= 1e-14 * (x * x).max(1e-300));
        let (neg, pos) = angular_parts_exact(k1, k2);
        let full = angular_square_integral(k1, k2);
        prop_assert!((neg + pos - full).abs() <= 1e-12 * full.max(1.0));
    }

    #[test]
    fn counting_splits_by_sign(eigs in proptest::collection::vec(-0.5f64..0.5, 0..300), level in 1e-3f64..0.5) {
        let (plus, minus) = split_spectrum(&eigs, 1e-10);
        let all = moduli(&eigs, 1e-10);
        prop_assert_eq!(
            counting_function(&all, level).unwrap(),
            counting_function(&plus, level).unwrap() + counting_function(&minus, level).unwrap()
        );
    }

    #[test]
    fn fit_recovers_the_constant(c in 0.01f64..2.0, len in 200usize..3000, amp in 0.0f64..0.01) {
        let seq = synthetic_weyl_sequence(c, len, amp);
        let fit = weyl_fit(&seq, FitWindow::Auto).unwrap();
        prop_assert!((fit.c_hat - c).abs() <= 0.02 * c);
    }
}
