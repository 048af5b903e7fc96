//! Penalized least-squares B-spline smoothing of rate curves.
//!
//! Coefficients minimize `|y - B c|^2 + lambda * c^T R c`, where `B` is the
//! collocation (design) matrix and `R` the integrated squared `q`-th derivative
//! of the basis. The normal equations `(B^T B + lambda R) c = B^T y` are banded
//! with half-bandwidth equal to the degree and are solved by band Cholesky.
//! With [`Lambda::Gcv`] the smoothing parameter is the minimizer of
//! `n SSE / (n - tr H)^2` over a fixed logarithmic grid.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::banded::SymBand;
use crate::bspline::{KnotVector, Spline};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate};

/// Number of candidates on the GCV grid.
pub const GCV_GRID_SIZE: usize = 50;
/// Smallest and largest lambda on the GCV grid.
pub const GCV_LAMBDA_RANGE: (f64, f64) = (1e-8, 1e4);

/// Observed rates for one year of one population.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    label: String,
    ages: Vec<f64>,
    rates: Vec<f64>,
}

impl RateCurve {
    pub fn new(label: impl Into<String>, ages: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if ages.len() != rates.len() {
            return Err(Error::InvalidCurve(format!(
                "{} ages but {} rates",
                ages.len(),
                rates.len()
            )));
        }
        if ages.is_empty() {
            return Err(Error::EmptyCurve);
        }
        if ages.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidCurve("ages must be finite".into()));
        }
        if ages.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCurve(
                "ages must be strictly increasing".into(),
            ));
        }
        if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(Error::InvalidCurve(format!(
                "rates must be finite and non-negative, found {r}"
            )));
        }
        Ok(Self {
            label: label.into(),
            ages,
            rates,
        })
    }

    /// Builds a curve from `(age, rate)` pairs.
    pub fn from_points(label: impl Into<String>, points: &[(f64, f64)]) -> Result<Self> {
        let (ages, rates) = points.iter().copied().unzip();
        Self::new(label, ages, rates)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ages(&self) -> &[f64] {
        &self.ages
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ages.iter().copied().zip(self.rates.iter().copied())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.ages[0], self.ages[self.ages.len() - 1])
    }
}

/// Where interior knots go.
#[derive(Debug, Clone, PartialEq)]
pub enum KnotPlacement {
    /// One interior knot at every observed age strictly inside the range.
    PerObservation,
    /// This many equally spaced interior knots.
    Uniform(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Fixed(f64),
    Gcv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub degree: usize,
    pub knots: KnotPlacement,
    pub penalty_order: usize,
    pub lambda: Lambda,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            knots: KnotPlacement::PerObservation,
            penalty_order: 2,
            lambda: Lambda::Gcv,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if self.penalty_order > self.degree {
            return Err(Error::PenaltyOrderTooHigh {
                order: self.penalty_order,
                degree: self.degree,
            });
        }
        if let Lambda::Fixed(l) = self.lambda {
            if l < 0.0 || !l.is_finite() {
                return Err(Error::InvalidLambda(l));
            }
        }
        Ok(())
    }

    /// Knot vector this configuration uses for observations at `ages`.
    pub fn knot_vector(&self, ages: &[f64]) -> Result<KnotVector> {
        let n = ages.len();
        if n == 0 {
            return Err(Error::EmptyCurve);
        }
        let (lo, hi) = (ages[0], ages[n - 1]);
        if lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidCurve(
                "at least two distinct ages are needed to define a domain".into(),
            ));
        }
        match self.knots {
            KnotPlacement::PerObservation => {
                KnotVector::with_interior(lo, hi, &ages[1..n - 1], self.degree)
            }
            KnotPlacement::Uniform(k) => KnotVector::clamped(lo, hi, k, self.degree),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub spline: Spline,
    pub lambda_used: f64,
    pub gcv_score: f64,
    pub residual_sse: f64,
    /// Trace of the hat matrix.
    pub effective_dof: f64,
}

/// One row per observation: index of the first nonzero column and the
/// `degree + 1` values starting there.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    columns: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        let (first, vals) = &self.rows[j];
        let mut out = vec![0.0; self.columns];
        out[*first..first + vals.len()].copy_from_slice(vals);
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|j| self.row(j)).collect()
    }

    pub fn mul_vec(&self, c: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|(first, vals)| vals.iter().zip(&c[*first..]).map(|(b, c)| b * c).sum())
            .collect()
    }

    /// `B^T y`.
    pub fn transpose_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.columns];
        for ((first, vals), yj) in self.rows.iter().zip(y) {
            for (k, v) in vals.iter().enumerate() {
                out[first + k] += v * yj;
            }
        }
        out
    }

    /// `B^T B` in band storage.
    pub fn gram(&self, bandwidth: usize) -> SymBand {
        let mut g = SymBand::zeros(self.columns, bandwidth);
        for (first, vals) in &self.rows {
            for (a, va) in vals.iter().enumerate() {
                for (b, vb) in vals.iter().enumerate().take(a + 1) {
                    g.add(first + a, first + b, va * vb);
                }
            }
        }
        g
    }
}

/// Collocation matrix `B[j][i] = N_i(age_j)`.
pub fn design_matrix(kv: &KnotVector, ages: &[f64]) -> Result<DesignMatrix> {
    let rows = ages
        .iter()
        .map(|&a| kv.nonzero_basis(a, 0))
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignMatrix {
        columns: kv.basis_count(),
        rows,
    })
}

/// Gram matrix of the `penalty_order`-th basis derivatives, integrated exactly
/// span by span with Gauss–Legendre quadrature.
pub fn roughness_matrix(kv: &KnotVector, penalty_order: usize) -> Result<SymBand> {
    let p = kv.degree();
    if penalty_order > p {
        return Err(Error::PenaltyOrderTooHigh {
            order: penalty_order,
            degree: p,
        });
    }
    // integrand has degree 2(p - q); n points integrate degree 2n - 1 exactly
    let points = p - penalty_order + 1;
    let (nodes, weights) = gauss_legendre(points);
    let mut r = SymBand::zeros(kv.basis_count(), p);
    for span in kv.breakpoints().windows(2) {
        let (a, b) = (span[0], span[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in nodes.iter().zip(&weights) {
            let u = mid + half * x;
            let (first, d) = kv.local_basis(u, penalty_order);
            for i in 0..d.len() {
                for j in 0..=i {
                    r.add(first + i, first + j, w * half * d[i] * d[j]);
                }
            }
        }
    }
    Ok(r)
}

/// Integral of `f(u)^2` over the domain of `s`, exact for polynomial splines.
pub fn integrated_square(s: &Spline) -> f64 {
    let (nodes, weights) = gauss_legendre(s.degree() + 1);
    s.basis()
        .breakpoints()
        .windows(2)
        .map(|w| {
            integrate(&nodes, &weights, w[0], w[1], |u| {
                let v = s.eval(u).expect("quadrature node inside domain");
                v * v
            })
        })
        .sum()
}

/// Score of one candidate lambda.
#[derive(Debug, Clone, PartialEq)]
pub struct GcvCandidate {
    pub lambda: f64,
    pub score: f64,
    pub residual_sse: f64,
    pub effective_dof: f64,
}

struct Problem {
    kv: KnotVector,
    design: DesignMatrix,
    gram: SymBand,
    rhs: Vec<f64>,
    penalty: SymBand,
    y: Vec<f64>,
}

struct Solution {
    coefficients: Vec<f64>,
    residual_sse: f64,
    effective_dof: f64,
}

impl Problem {
    fn new(xs: &[f64], ys: &[f64], cfg: &FitConfig) -> Result<Self> {
        cfg.validate()?;
        if xs.len() != ys.len() {
            return Err(Error::InvalidCurve(format!(
                "{} abscissae but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
        {
            return Err(Error::InvalidCurve(
                "abscissae must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("observations must be finite".into()));
        }
        let kv = cfg.knot_vector(xs)?;
        let design = design_matrix(&kv, xs)?;
        let gram = design.gram(kv.degree());
        let rhs = design.transpose_mul(ys);
        let penalty = roughness_matrix(&kv, cfg.penalty_order)?;
        Ok(Self {
            kv,
            design,
            gram,
            rhs,
            penalty,
            y: ys.to_vec(),
        })
    }

    fn solve(&self, lambda: f64) -> Result<Solution> {
        let system = self.gram.plus_scaled(&self.penalty, lambda);
        let chol = system.cholesky().ok_or(Error::SingularSystem)?;
        let coefficients = chol.solve(&self.rhs);
        let fitted = self.design.mul_vec(&coefficients);
        let residual_sse = self
            .y
            .iter()
            .zip(&fitted)
            .map(|(y, f)| (y - f) * (y - f))
            .sum();
        // tr H = tr((B^T B + lambda R)^-1 B^T B)
        let n = self.gram.size();
        let effective_dof = (0..n)
            .map(|j| {
                let col: Vec<f64> = (0..n).map(|i| self.gram.get(i, j)).collect();
                chol.solve(&col)[j]
            })
            .sum();
        Ok(Solution {
            coefficients,
            residual_sse,
            effective_dof,
        })
    }

    fn gcv(&self, sol: &Solution) -> f64 {
        let n = self.y.len() as f64;
        let denom = n - sol.effective_dof;
        if denom <= 1e-8 * n {
            f64::INFINITY
        } else {
            n * sol.residual_sse / (denom * denom)
        }
    }
}

/// The fixed logarithmic lambda grid used by automatic selection.
pub fn gcv_grid() -> Vec<f64> {
    let (lo, hi) = GCV_LAMBDA_RANGE;
    let (a, b) = (lo.log10(), hi.log10());
    (0..GCV_GRID_SIZE)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (GCV_GRID_SIZE - 1) as f64))
        .collect()
}

/// GCV score for every grid lambda. Candidates whose system is singular are
/// reported with an infinite score.
pub fn gcv_profile(curve: &RateCurve, cfg: &FitConfig) -> Result<Vec<GcvCandidate>> {
    let problem = Problem::new(curve.ages(), curve.rates(), cfg)?;
    Ok(profile(&problem))
}

fn profile(problem: &Problem) -> Vec<GcvCandidate> {
    gcv_grid()
        .into_par_iter()
        .map(|lambda| match problem.solve(lambda) {
            Ok(sol) => GcvCandidate {
                lambda,
                score: problem.gcv(&sol),
                residual_sse: sol.residual_sse,
                effective_dof: sol.effective_dof,
            },
            Err(_) => GcvCandidate {
                lambda,
                score: f64::INFINITY,
                residual_sse: f64::NAN,
                effective_dof: f64::NAN,
            },
        })
        .collect()
}

/// Fits a smoothing spline to `curve`.
pub fn fit(curve: &RateCurve, cfg: &FitConfig) -> Result<FitResult> {
    fit_xy(curve.ages(), curve.rates(), cfg)
}

/// Fits a smoothing spline to arbitrary finite observations `(xs[j], ys[j])`;
/// unlike [`RateCurve`] the values may be negative.
pub fn fit_xy(xs: &[f64], ys: &[f64], cfg: &FitConfig) -> Result<FitResult> {
    let problem = Problem::new(xs, ys, cfg)?;
    let lambda = match cfg.lambda {
        Lambda::Fixed(l) => l,
        Lambda::Gcv => {
            let best = profile(&problem)
                .into_iter()
                .filter(|c| c.score.is_finite())
                .fold(None::<GcvCandidate>, |best, c| match best {
                    Some(b) if b.score <= c.score => Some(b),
                    _ => Some(c),
                })
                .ok_or(Error::SingularSystem)?;
            best.lambda
        }
    };
    let sol = problem.solve(lambda)?;
    let gcv_score = problem.gcv(&sol);
    Ok(FitResult {
        spline: Spline::new(problem.kv, sol.coefficients)?,
        lambda_used: lambda,
        gcv_score,
        residual_sse: sol.residual_sse,
        effective_dof: sol.effective_dof,
    })
}
