//! Clamped B-spline bases and the splines built on them.
//!
//! Basis values come from the Cox–de Boor recursion
//!
//! ```text
//! N(i,0)(u) = 1 if u(i) <= u < u(i+1), else 0
//! N(i,d)(u) = w(i,d-1) N(i,d-1)(u) + (1 - w(i+1,d-1)) N(i+1,d-1)(u)
//! w(i,d-1)  = (u - u(i)) / (u(i+d) - u(i))
//! ```
//!
//! with `0/0 := 0` for repeated knots. The right end of the clamped interval
//! is treated as closed so the last breakpoint is evaluable.

use crate::error::{Error, Result};

/// Highest polynomial degree accepted by [`KnotVector`].
pub const MAX_DEGREE: usize = 10;

#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Non-decreasing breakpoint sequence in clamped form: the first and last
/// `degree + 1` knots coincide, interior knots are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    /// Validates an explicit clamped knot sequence.
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooHigh {
                degree,
                max: MAX_DEGREE,
            });
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnots("knots must be finite".into()));
        }
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnots(format!(
                "a clamped degree-{degree} knot vector needs at least {} knots, got {}",
                2 * (degree + 1),
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidKnots("knots must be non-decreasing".into()));
        }
        let lo = knots[0];
        let hi = knots[knots.len() - 1];
        if lo >= hi {
            return Err(Error::InvalidDomain { lo, hi });
        }
        let m = knots.len() - 1;
        if knots[..=degree].iter().any(|&k| k != lo) || knots[m - degree..].iter().any(|&k| k != hi)
        {
            return Err(Error::InvalidKnots(format!(
                "boundary knots must be repeated {} times",
                degree + 1
            )));
        }
        // interior breakpoints, bracketed by the two boundaries, must be distinct
        if knots[degree..=m - degree].windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidKnots(
                "interior knots must be strictly increasing and inside the domain".into(),
            ));
        }
        Ok(Self { knots, degree })
    }

    /// Clamped knots on `[lo, hi]` with `n_interior` equally spaced interior knots.
    pub fn clamped(lo: f64, hi: f64, n_interior: usize, degree: usize) -> Result<Self> {
        if lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidDomain { lo, hi });
        }
        let width = hi - lo;
        let interior: Vec<f64> = (1..=n_interior)
            .map(|j| lo + width * j as f64 / (n_interior + 1) as f64)
            .collect();
        Self::with_interior(lo, hi, &interior, degree)
    }

    /// Clamped knots on `[lo, hi]` with the given interior breakpoints.
    pub fn with_interior(lo: f64, hi: f64, interior: &[f64], degree: usize) -> Result<Self> {
        if lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidDomain { lo, hi });
        }
        let mut knots = Vec::with_capacity(interior.len() + 2 * (degree + 1));
        knots.extend(std::iter::repeat_n(lo, degree + 1));
        knots.extend_from_slice(interior);
        knots.extend(std::iter::repeat_n(hi, degree + 1));
        Self::new(knots, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `m - p` for knots `u_0..u_m`.
    pub fn basis_count(&self) -> usize {
        self.knots.len() - 1 - self.degree
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Interior breakpoints (excluding the repeated boundary knots).
    pub fn interior(&self) -> &[f64] {
        &self.knots[self.degree + 1..self.basis_count()]
    }

    /// Distinct breakpoints including both boundaries.
    pub fn breakpoints(&self) -> &[f64] {
        &self.knots[self.degree..=self.basis_count()]
    }

    pub fn contains(&self, u: f64) -> bool {
        let (lo, hi) = self.domain();
        u >= lo && u <= hi
    }

    fn check(&self, u: f64) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            let (lo, hi) = self.domain();
            Err(Error::OutOfDomain { u, lo, hi })
        }
    }

    /// Index `k` of the knot span holding `u`, with `degree <= k < basis_count`.
    /// The last span is closed on the right.
    pub fn span(&self, u: f64) -> usize {
        let p = self.degree;
        let n = self.basis_count();
        let inner = &self.knots[p + 1..n];
        p + inner.partition_point(|&k| k <= u)
    }

    /// The `degree + 1` basis values (or their `order`-th derivatives) that can
    /// be nonzero at `u`, together with the index of the first one.
    pub fn nonzero_basis(&self, u: f64, order: usize) -> Result<(usize, Vec<f64>)> {
        self.check(u)?;
        Ok(self.local_basis(u, order))
    }

    pub(crate) fn local_basis(&self, u: f64, order: usize) -> (usize, Vec<f64>) {
        self.local_basis_in_span(u, self.span(u), order)
    }

    /// Like [`Self::nonzero_basis`] but using the polynomial pieces of span
    /// `k` regardless of where `u` lies; at a breakpoint this yields the
    /// one-sided limit from span `k`.
    pub fn local_basis_in_span(&self, u: f64, k: usize, order: usize) -> (usize, Vec<f64>) {
        let p = self.degree;
        assert!(
            k >= p && k < self.basis_count(),
            "span {k} outside {p}..{}",
            self.basis_count()
        );
        let t = &self.knots;
        let mut vals = vec![0.0; p + 1];
        if order > p {
            return (k - p, vals);
        }
        // vals[j] holds N(k-d+j, d) at level d
        vals[0] = 1.0;
        let base = p - order;
        for d in 0..base {
            let mut next = vec![0.0; d + 2];
            for (j, slot) in next.iter_mut().enumerate() {
                let i = k - d - 1 + j;
                let left = if j >= 1 { vals[j - 1] } else { 0.0 };
                let right = if j <= d { vals[j] } else { 0.0 };
                let w_i = ratio(u - t[i], t[i + d + 1] - t[i]);
                let w_next = ratio(u - t[i + 1], t[i + d + 2] - t[i + 1]);
                *slot = w_i * left + (1.0 - w_next) * right;
            }
            vals[..d + 2].copy_from_slice(&next);
        }
        // differentiate the remaining levels: D N(i,d) = d [N(i,d-1)/(u(i+d)-u(i)) - N(i+1,d-1)/(u(i+d+1)-u(i+1))]
        for d in base..p {
            let level = d + 1;
            let mut next = vec![0.0; d + 2];
            for (j, slot) in next.iter_mut().enumerate() {
                let i = k - d - 1 + j;
                let left = if j >= 1 { vals[j - 1] } else { 0.0 };
                let right = if j <= d { vals[j] } else { 0.0 };
                *slot = level as f64
                    * (ratio(left, t[i + level] - t[i])
                        - ratio(right, t[i + level + 1] - t[i + 1]));
            }
            vals[..d + 2].copy_from_slice(&next);
        }
        (k - p, vals)
    }

    /// All `basis_count` basis values at `u`.
    pub fn eval_basis(&self, u: f64) -> Result<Vec<f64>> {
        self.eval_basis_derivative(u, 0)
    }

    /// All `order`-th derivatives of the basis functions at `u`.
    pub fn eval_basis_derivative(&self, u: f64, order: usize) -> Result<Vec<f64>> {
        let (first, local) = self.nonzero_basis(u, order)?;
        let mut out = vec![0.0; self.basis_count()];
        out[first..first + local.len()].copy_from_slice(&local);
        Ok(out)
    }

    /// Mirror image under `u -> -u`.
    pub fn reflect(&self) -> Self {
        Self {
            knots: self.knots.iter().rev().map(|k| -k).collect(),
            degree: self.degree,
        }
    }
}

/// Single basis function `N(index, degree)` over an arbitrary non-decreasing
/// knot sequence, with half-open spans and no boundary patch.
pub fn basis_function(knots: &[f64], index: usize, degree: usize, u: f64) -> f64 {
    if index + degree + 1 >= knots.len() {
        return 0.0;
    }
    let mut level: Vec<f64> = (index..=index + degree)
        .map(|i| {
            if knots[i] <= u && u < knots[i + 1] {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for d in 1..=degree {
        for j in 0..=degree - d {
            let i = index + j;
            let w_i = ratio(u - knots[i], knots[i + d] - knots[i]);
            let w_next = ratio(u - knots[i + 1], knots[i + d + 1] - knots[i + 1]);
            level[j] = w_i * level[j] + (1.0 - w_next) * level[j + 1];
        }
    }
    level[0]
}

/// A curve `f(u) = sum_i c_i N(i,p)(u)` over a clamped basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    basis: KnotVector,
    coefficients: Vec<f64>,
}

impl Spline {
    pub fn new(basis: KnotVector, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.basis_count() {
            return Err(Error::CoefficientCount {
                expected: basis.basis_count(),
                got: coefficients.len(),
            });
        }
        Ok(Self {
            basis,
            coefficients,
        })
    }

    pub fn basis(&self) -> &KnotVector {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn domain(&self) -> (f64, f64) {
        self.basis.domain()
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let (first, local) = self.basis.nonzero_basis(u, 0)?;
        Ok(local
            .iter()
            .zip(&self.coefficients[first..])
            .map(|(n, c)| n * c)
            .sum())
    }

    /// Value of the polynomial piece on knot span `k` at `u`.
    pub fn eval_piece(&self, u: f64, k: usize) -> f64 {
        let (first, local) = self.basis.local_basis_in_span(u, k, 0);
        local
            .iter()
            .zip(&self.coefficients[first..])
            .map(|(n, c)| n * c)
            .sum()
    }

    pub fn eval_many(&self, us: &[f64]) -> Result<Vec<f64>> {
        us.iter().map(|&u| self.eval(u)).collect()
    }

    /// The derivative as a spline of one degree lower on the same breakpoints,
    /// with coefficients `p (c_i - c_{i-1}) / (u_{i+p} - u_i)`.
    pub fn derivative(&self) -> Result<Spline> {
        let p = self.basis.degree;
        if p == 0 {
            return Err(Error::UnsupportedDerivative);
        }
        let t = &self.basis.knots;
        let c = &self.coefficients;
        let coefficients = (1..c.len())
            .map(|i| p as f64 * (c[i] - c[i - 1]) / (t[i + p] - t[i]))
            .collect();
        let basis = KnotVector {
            knots: t[1..t.len() - 1].to_vec(),
            degree: p - 1,
        };
        Ok(Spline {
            basis,
            coefficients,
        })
    }

    /// `order`-fold derivative.
    pub fn nth_derivative(&self, order: usize) -> Result<Spline> {
        let mut s = self.clone();
        for _ in 0..order {
            s = s.derivative()?;
        }
        Ok(s)
    }

    /// Same basis, every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Spline {
        Spline {
            basis: self.basis.clone(),
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    /// The curve `g(u) = f(-u)` on the mirrored domain.
    pub fn reflect(&self) -> Spline {
        Spline {
            basis: self.basis.reflect(),
            coefficients: self.coefficients.iter().rev().copied().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clamped_appendix_layout() {
        let kv = KnotVector::clamped(-1.0, 1.0, 3, 3).unwrap();
        assert_eq!(
            kv.knots(),
            &[-1.0, -1.0, -1.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0]
        );
        assert_eq!(kv.basis_count(), 7);
        assert_eq!(kv.interior(), &[-0.5, 0.0, 0.5]);
    }

    #[test]
    fn clamped_degree_zero_indicator() {
        let kv = KnotVector::clamped(0.0, 1.0, 0, 0).unwrap();
        assert_eq!(kv.knots(), &[0.0, 1.0]);
        assert_eq!(kv.basis_count(), 1);
        assert_eq!(kv.eval_basis(0.5).unwrap(), vec![1.0]);
        assert_eq!(kv.eval_basis(1.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn fertility_basis_count() {
        let kv = KnotVector::clamped(15.0, 49.0, 33, 3).unwrap();
        assert_eq!(kv.basis_count(), 37);
        for (j, k) in kv.interior().iter().enumerate() {
            assert_relative_eq!(*k, 16.0 + j as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_domains_and_knots() {
        assert!(matches!(
            KnotVector::clamped(1.0, 1.0, 2, 3),
            Err(Error::InvalidDomain { .. })
        ));
        assert!(matches!(
            KnotVector::clamped(0.0, 1.0, 2, 11),
            Err(Error::DegreeTooHigh { .. })
        ));
        // repeated interior knot
        assert!(matches!(
            KnotVector::with_interior(0.0, 1.0, &[0.5, 0.5], 3),
            Err(Error::InvalidKnots(_))
        ));
        // not clamped
        assert!(matches!(
            KnotVector::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], 1),
            Err(Error::InvalidKnots(_))
        ));
        // interior knot on the boundary
        assert!(KnotVector::with_interior(0.0, 1.0, &[0.0], 2).is_err());
    }

    #[test]
    fn left_end_interpolates() {
        let kv = KnotVector::clamped(-1.0, 1.0, 3, 3).unwrap();
        let b = kv.eval_basis(-1.0).unwrap();
        assert_eq!(b[0], 1.0);
        assert!(b[1..].iter().all(|&x| x == 0.0));
        let b = kv.eval_basis(1.0).unwrap();
        assert_eq!(b[6], 1.0);
        assert!(b[..6].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let kv = KnotVector::clamped(0.0, 1.0, 2, 2).unwrap();
        assert!(matches!(kv.eval_basis(1.5), Err(Error::OutOfDomain { .. })));
        let s = Spline::new(kv, vec![1.0; 5]).unwrap();
        assert!(matches!(s.eval(-0.1), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn uniform_cubic_single_basis() {
        let knots = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(
            basis_function(&knots, 0, 3, 2.0),
            4.0 / 6.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            basis_function(&knots, 0, 3, 1.0),
            1.0 / 6.0,
            epsilon = 1e-15
        );
        assert_eq!(basis_function(&knots, 0, 3, 4.0), 0.0);
    }

    #[test]
    fn degree_zero_step_lookup() {
        let kv = KnotVector::new(vec![0.0, 1.0, 2.0], 0).unwrap();
        let s = Spline::new(kv, vec![2.0, 5.0]).unwrap();
        assert_eq!(s.eval(1.5).unwrap(), 5.0);
        assert_eq!(s.eval(0.5).unwrap(), 2.0);
        assert_eq!(s.eval(2.0).unwrap(), 5.0);
        assert_eq!(s.derivative(), Err(Error::UnsupportedDerivative));
    }

    #[test]
    fn constant_spline_has_zero_derivative() {
        let kv = KnotVector::clamped(0.0, 3.0, 4, 3).unwrap();
        let s = Spline::new(kv.clone(), vec![2.5; kv.basis_count()]).unwrap();
        let d = s.derivative().unwrap();
        assert_eq!(d.degree(), 2);
        assert_eq!(d.basis().basis_count(), kv.basis_count() - 1);
        for j in 0..=30 {
            let u = j as f64 * 0.1;
            assert_relative_eq!(s.eval(u).unwrap(), 2.5, epsilon = 1e-14);
            assert_eq!(d.eval(u).unwrap(), 0.0);
        }
    }

    #[test]
    fn coefficient_count_checked() {
        let kv = KnotVector::clamped(0.0, 1.0, 1, 2).unwrap();
        assert!(matches!(
            Spline::new(kv, vec![0.0; 3]),
            Err(Error::CoefficientCount {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn basis_derivative_matches_spline_derivative() {
        let kv = KnotVector::clamped(0.0, 2.0, 3, 3).unwrap();
        let c = vec![0.3, -1.0, 2.0, 0.5, 0.7, 1.1, -0.4];
        let s = Spline::new(kv.clone(), c.clone()).unwrap();
        let d1 = s.derivative().unwrap();
        let d2 = d1.derivative().unwrap();
        for j in 0..=40 {
            let u = j as f64 * 0.05;
            let b1 = kv.eval_basis_derivative(u, 1).unwrap();
            let b2 = kv.eval_basis_derivative(u, 2).unwrap();
            let v1: f64 = b1.iter().zip(&c).map(|(b, c)| b * c).sum();
            let v2: f64 = b2.iter().zip(&c).map(|(b, c)| b * c).sum();
            assert_relative_eq!(v1, d1.eval(u).unwrap(), epsilon = 1e-11);
            assert_relative_eq!(v2, d2.eval(u).unwrap(), epsilon = 1e-10);
        }
        // beyond the degree every derivative vanishes
        assert!(kv
            .eval_basis_derivative(0.3, 4)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn reflect_mirrors_values() {
        let kv = KnotVector::with_interior(0.0, 3.0, &[0.5, 1.7, 2.2], 3).unwrap();
        let s = Spline::new(kv, vec![1.0, 3.0, -2.0, 0.5, 4.0, 2.0, 0.0]).unwrap();
        let r = s.reflect();
        assert_eq!(r.domain(), (-3.0, 0.0));
        for j in 0..=30 {
            let u = j as f64 * 0.1;
            assert_relative_eq!(s.eval(u).unwrap(), r.eval(-u).unwrap(), epsilon = 1e-12);
        }
    }
}
