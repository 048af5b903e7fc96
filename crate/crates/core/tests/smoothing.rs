use phaseplane::smooth::{fit_xy, gcv_grid, gcv_profile, FitConfig, KnotPlacement, Lambda};
use phaseplane::{fit, RateCurve};
use proptest::prelude::*;

fn noisy_curve() -> (Vec<f64>, Vec<f64>) {
    // deterministic pseudo-noise so the fits are reproducible
    let xs: Vec<f64> = (15..=49).map(f64::from).collect();
    let ys = xs
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let bump = 0.2 * (-((x - 27.0) / 5.0).powi(2)).exp();
            bump + 0.004 * ((j as f64 * 12.9898).sin() * 43758.5453).fract().abs()
        })
        .collect();
    (xs, ys)
}

fn ols_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

fn fixed(lambda: f64) -> FitConfig {
    FitConfig {
        lambda: Lambda::Fixed(lambda),
        ..FitConfig::default()
    }
}

#[test]
fn heavy_penalty_tends_to_linear_regression() {
    let (xs, ys) = noisy_curve();
    let (a, b) = ols_line(&xs, &ys);
    let s = fit_xy(&xs, &ys, &fixed(1e12)).unwrap().spline;
    for &x in &xs {
        let err = (s.eval(x).unwrap() - (a + b * x)).abs();
        assert!(err < 1e-4, "at {x}: {err}");
    }
}

#[test]
fn sse_grows_and_dof_shrinks_with_lambda() {
    let (xs, ys) = noisy_curve();
    let mut prev: Option<(f64, f64)> = None;
    for lambda in [1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4] {
        let r = fit_xy(&xs, &ys, &fixed(lambda)).unwrap();
        if let Some((sse, dof)) = prev {
            assert!(r.residual_sse >= sse - 1e-12);
            assert!(r.effective_dof <= dof + 1e-9);
        }
        prev = Some((r.residual_sse, r.effective_dof));
    }
    let rough = fit_xy(&xs, &ys, &fixed(1e12)).unwrap();
    assert!(
        (rough.effective_dof - 2.0).abs() < 1e-3,
        "{}",
        rough.effective_dof
    );
}

#[test]
fn unpenalized_trace_equals_basis_count() {
    let (xs, ys) = noisy_curve();
    let cfg = FitConfig {
        knots: KnotPlacement::Uniform(6),
        lambda: Lambda::Fixed(0.0),
        ..FitConfig::default()
    };
    let r = fit_xy(&xs, &ys, &cfg).unwrap();
    assert!((r.effective_dof - 10.0).abs() < 1e-8);
}

#[test]
fn gcv_picks_the_grid_minimum() {
    let (xs, ys) = noisy_curve();
    let curve = RateCurve::new("x", xs, ys).unwrap();
    let cfg = FitConfig::default();
    let profile = gcv_profile(&curve, &cfg).unwrap();
    assert_eq!(profile.len(), gcv_grid().len());
    let best = profile
        .iter()
        .min_by(|a, b| a.score.total_cmp(&b.score))
        .unwrap();
    let r = fit(&curve, &cfg).unwrap();
    assert_eq!(r.lambda_used, best.lambda);
    assert_eq!(r.gcv_score, best.score);
    // a second run gives the identical answer
    assert_eq!(fit(&curve, &cfg).unwrap(), r);
}

proptest! {
    #[test]
    fn constant_shift_moves_the_fit(shift in -5.0f64..5.0, lambda in 1e-3f64..10.0) {
        let (xs, ys) = noisy_curve();
        let shifted: Vec<f64> = ys.iter().map(|y| y + shift).collect();
        let a = fit_xy(&xs, &ys, &fixed(lambda)).unwrap().spline;
        let b = fit_xy(&xs, &shifted, &fixed(lambda)).unwrap().spline;
        for k in 0..=68 {
            let u = 15.0 + k as f64 * 0.5;
            prop_assert!((b.eval(u).unwrap() - a.eval(u).unwrap() - shift).abs() < 1e-8);
        }
        let da = a.derivative().unwrap();
        let db = b.derivative().unwrap();
        prop_assert!((da.eval(30.0).unwrap() - db.eval(30.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn fit_is_linear_in_the_data(scale in 0.1f64..10.0) {
        let (xs, ys) = noisy_curve();
        let scaled: Vec<f64> = ys.iter().map(|y| y * scale).collect();
        let a = fit_xy(&xs, &ys, &fixed(0.5)).unwrap().spline;
        let b = fit_xy(&xs, &scaled, &fixed(0.5)).unwrap().spline;
        for (ca, cb) in a.coefficients().iter().zip(b.coefficients()) {
            prop_assert!((ca * scale - cb).abs() < 1e-9 * scale.max(1.0));
        }
    }
}
