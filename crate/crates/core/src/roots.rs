//! Sign-change bracketing on sampled values and bisection refinement.

/// Index pairs `(i, j)`, `i < j`, such that `values[i]` and `values[j]` are
/// nonzero with opposite signs and every value strictly between them is zero.
/// Exact zeros are absorbed into the surrounding bracket.
pub fn sign_changes(values: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if let Some(prev) = last {
            if values[prev].signum() != v.signum() {
                out.push((prev, i));
            }
        }
        last = Some(i);
    }
    out
}

/// Root of `f` in `[a, b]` by bisection, assuming `f(a)` and `f(b)` have
/// opposite signs. Stops once the bracket is narrower than `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    if f(b) == 0.0 {
        return b;
    }
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brackets_skip_exact_zeros() {
        let v = [1.0, 0.5, 0.0, -0.2, -1.0, 0.0, 0.0, 2.0, 3.0];
        assert_eq!(sign_changes(&v), vec![(1, 3), (4, 7)]);
        assert!(sign_changes(&[0.0, 0.0]).is_empty());
        assert!(sign_changes(&[1.0, 2.0, 0.0, 4.0]).is_empty());
    }

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bisection_decreasing_function() {
        let r = bisect(|x| (std::f64::consts::PI * x).cos(), 0.0, 1.0, 1e-9);
        assert!((r - 0.5).abs() < 1e-9);
    }

    #[test]
    fn bisection_exact_endpoint() {
        assert_eq!(bisect(|x| x - 1.0, 1.0, 3.0, 1e-6), 1.0);
    }
}
