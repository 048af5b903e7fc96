use phaseplane::bspline::basis_function;
use phaseplane::smooth::{fit_xy, FitConfig, KnotPlacement, Lambda};
use phaseplane::{KnotVector, Spline};
use proptest::prelude::*;

/// Textbook recursive Cox–de Boor with half-open spans, used as an oracle.
fn naive(knots: &[f64], i: usize, p: usize, u: f64) -> f64 {
    if p == 0 {
        return if knots[i] <= u && u < knots[i + 1] {
            1.0
        } else {
            0.0
        };
    }
    let left = {
        let d = knots[i + p] - knots[i];
        if d == 0.0 {
            0.0
        } else {
            (u - knots[i]) / d * naive(knots, i, p - 1, u)
        }
    };
    let right = {
        let d = knots[i + p + 1] - knots[i + 1];
        if d == 0.0 {
            0.0
        } else {
            (knots[i + p + 1] - u) / d * naive(knots, i + 1, p - 1, u)
        }
    };
    left + right
}

prop_compose! {
    fn knot_vector()(
        degree in 1usize..=5,
        lo in -10.0f64..10.0,
        width in 0.5f64..20.0,
        raw in prop::collection::vec(0.02f64..0.98, 0..8),
    ) -> KnotVector {
        let mut fr = raw;
        fr.sort_by(f64::total_cmp);
        fr.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let interior: Vec<f64> = fr.iter().map(|f| lo + f * width).collect();
        KnotVector::with_interior(lo, lo + width, &interior, degree).unwrap()
    }
}

prop_compose! {
    fn cubic_spline()(
        lo in -5.0f64..5.0,
        width in 1.0f64..10.0,
        n_interior in 1usize..10,
        coeffs in prop::collection::vec(-3.0f64..3.0, 14),
    ) -> Spline {
        let kv = KnotVector::clamped(lo, lo + width, n_interior, 3).unwrap();
        let n = kv.basis_count();
        Spline::new(kv, coeffs[..n].to_vec()).unwrap()
    }
}

proptest! {
    #[test]
    fn partition_of_unity_and_nonnegativity(kv in knot_vector(), fr in prop::collection::vec(0.0f64..=1.0, 50)) {
        let (lo, hi) = kv.domain();
        for f in fr {
            let u = lo + f * (hi - lo);
            let b = kv.eval_basis(u).unwrap();
            let sum: f64 = b.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12, "sum {sum} at {u}");
            prop_assert!(b.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn local_support(kv in knot_vector(), f in 0.0f64..1.0) {
        let (lo, hi) = kv.domain();
        let u = lo + f * (hi - lo);
        let t = kv.knots();
        let p = kv.degree();
        for (i, v) in kv.eval_basis(u).unwrap().into_iter().enumerate() {
            if u < t[i] || u > t[i + p + 1] {
                prop_assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn agrees_with_recursive_definition(kv in knot_vector(), f in 0.0f64..1.0) {
        let (lo, hi) = kv.domain();
        // the oracle is half-open, so stay off the right end
        let u = lo + f * (hi - lo) * 0.999;
        let b = kv.eval_basis(u).unwrap();
        for (i, v) in b.iter().enumerate() {
            let want = naive(kv.knots(), i, kv.degree(), u);
            prop_assert!((v - want).abs() < 1e-12, "N{i} {v} vs {want}");
            prop_assert!((basis_function(kv.knots(), i, kv.degree(), u) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_central_differences(s in cubic_spline()) {
        let d = s.derivative().unwrap();
        let (lo, hi) = s.domain();
        let h = 1e-5;
        let pts: Vec<f64> = (1..200).map(|k| lo + (hi - lo) * k as f64 / 200.0).collect();
        let exact: Vec<f64> = pts.iter().map(|&u| d.eval(u).unwrap()).collect();
        let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        for (&u, &e) in pts.iter().zip(&exact) {
            let fd = (s.eval(u + h).unwrap() - s.eval(u - h).unwrap()) / (2.0 * h);
            prop_assert!((e - fd).abs() / e.abs().max(scale) < 1e-6, "at {u}: {e} vs {fd}");
        }
    }

    #[test]
    fn cubic_is_c2_at_interior_knots(s in cubic_spline()) {
        let d1 = s.derivative().unwrap();
        let d2 = d1.derivative().unwrap();
        for (j, &knot) in s.basis().interior().iter().enumerate() {
            let k = s.degree() + 1 + j;
            // the derivative splines drop one boundary knot per order
            let jump0 = (s.eval_piece(knot, k - 1) - s.eval_piece(knot, k)).abs();
            let jump1 = (d1.eval_piece(knot, k - 2) - d1.eval_piece(knot, k - 1)).abs();
            let jump2 = (d2.eval_piece(knot, k - 3) - d2.eval_piece(knot, k - 2)).abs();
            prop_assert!(jump0 < 1e-10 && jump1 < 1e-10 && jump2 < 1e-10, "{jump0} {jump1} {jump2}");
        }
    }

    #[test]
    fn reflection_mirrors_derivatives(s in cubic_spline(), f in 0.0f64..1.0) {
        let r = s.reflect();
        let (lo, hi) = s.domain();
        let u = lo + f * (hi - lo);
        let d = s.derivative().unwrap();
        let rd = r.derivative().unwrap();
        prop_assert!((d.eval(u).unwrap() + rd.eval(-u).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn third_derivative_jumps_at_knots() {
    // sanity check on the C2 test: the cubic's third derivative is piecewise
    // constant and generally discontinuous
    let kv = KnotVector::clamped(0.0, 1.0, 3, 3).unwrap();
    let s = Spline::new(kv, vec![0.0, 1.0, -1.0, 2.0, 0.5, 0.0, 1.0]).unwrap();
    let d3 = s.nth_derivative(3).unwrap();
    assert_eq!(d3.degree(), 0);
    let a = d3.eval(0.2).unwrap();
    let b = d3.eval(0.3).unwrap();
    assert!((a - b).abs() > 1e-3);
    // same check through the one-sided pieces at the knot 0.25
    let d2 = s.nth_derivative(2).unwrap();
    let h = 1e-3;
    let left = (d2.eval_piece(0.25, 1) - d2.eval_piece(0.25 - h, 1)) / h;
    let right = (d2.eval_piece(0.25 + h, 2) - d2.eval_piece(0.25, 2)) / h;
    assert!((left - a).abs() < 1e-6 && (right - b).abs() < 1e-6);
    assert!((s.eval_piece(0.25, 3) - s.eval_piece(0.25, 4)).abs() < 1e-14);
}

fn u3_spline() -> Spline {
    let xs: Vec<f64> = (0..=40).map(|j| j as f64 / 40.0).collect();
    let ys: Vec<f64> = xs.iter().map(|u| u * u * u).collect();
    let cfg = FitConfig {
        knots: KnotPlacement::Uniform(5),
        lambda: Lambda::Fixed(0.0),
        ..FitConfig::default()
    };
    fit_xy(&xs, &ys, &cfg).unwrap().spline
}

#[test]
fn cubic_fit_reproduces_u_cubed() {
    let s = u3_spline();
    assert!((s.eval(0.37).unwrap() - 0.37f64.powi(3)).abs() < 1e-10);
    let d = s.derivative().unwrap();
    for u in [0.1, 0.5, 0.9] {
        assert!((d.eval(u).unwrap() - 3.0 * u * u).abs() < 1e-10);
    }
    let d2 = d.derivative().unwrap();
    for k in 0..=20 {
        let u = k as f64 / 20.0;
        assert!((d2.eval(u).unwrap() - 6.0 * u).abs() < 1e-8);
    }
}

#[test]
fn polynomial_reproduction_on_grid() {
    let poly = |u: f64| 0.3 - 1.2 * u + 0.7 * u * u - 2.1 * u * u * u;
    let xs: Vec<f64> = (0..=30).map(|j| -2.0 + 5.0 * j as f64 / 30.0).collect();
    let ys: Vec<f64> = xs.iter().map(|&u| poly(u)).collect();
    let cfg = FitConfig {
        knots: KnotPlacement::Uniform(7),
        lambda: Lambda::Fixed(0.0),
        ..FitConfig::default()
    };
    let s = fit_xy(&xs, &ys, &cfg).unwrap().spline;
    let err = (0..200)
        .map(|k| -2.0 + 5.0 * k as f64 / 199.0)
        .map(|u| (s.eval(u).unwrap() - poly(u)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-9, "max error {err}");
}
