//! Phase-plane paths (acceleration against velocity) and the landmarks read
//! off them.

use crate::bspline::Spline;
use crate::error::{Error, Result};
use crate::roots::{bisect, sign_changes};

/// Sampling step used when none is given, in domain units (years).
pub const DEFAULT_STEP: f64 = 0.05;
/// Width of the bracket returned by root refinement.
pub const ROOT_TOLERANCE: f64 = 1e-6;
/// Tie band for skew classification, as a fraction of `max |v|`.
pub const SKEW_TOLERANCE: f64 = 0.01;
/// Sampled values below this fraction of the largest magnitude are treated as
/// zero when bracketing roots.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub age: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

/// Samples of `(f', f'')` along the domain of a fitted spline, together with
/// the derivative splines they were taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePath {
    samples: Vec<PhaseSample>,
    step: f64,
    velocity: Spline,
    acceleration: Spline,
}

impl PhasePath {
    pub fn samples(&self) -> &[PhaseSample] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn velocity_spline(&self) -> &Spline {
        &self.velocity
    }

    pub fn acceleration_spline(&self) -> &Spline {
        &self.acceleration
    }

    pub fn domain(&self) -> (f64, f64) {
        self.velocity.domain()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_abs_velocity(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.velocity.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_acceleration(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.acceleration.abs())
            .fold(0.0, f64::max)
    }

    /// `sqrt((v / v_scale)^2 + (a / a_scale)^2)` per sample; a zero scale
    /// contributes zero.
    pub fn radii(&self, v_scale: f64, a_scale: f64) -> Vec<f64> {
        let norm = |x: f64, s: f64| if s > 0.0 { x / s } else { 0.0 };
        self.samples
            .iter()
            .map(|s| norm(s.velocity, v_scale).hypot(norm(s.acceleration, a_scale)))
            .collect()
    }

    /// Velocity and acceleration at an arbitrary age in the domain.
    pub fn at(&self, age: f64) -> Result<PhaseSample> {
        Ok(PhaseSample {
            age,
            velocity: self.velocity.eval(age)?,
            acceleration: self.acceleration.eval(age)?,
        })
    }
}

/// Ages `lo, lo + step, ...` ending exactly at `hi`.
pub fn sample_ages(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let span = hi - lo;
    let n = (span / step + 1e-9).floor() as usize;
    let mut ages: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    let last = ages[ages.len() - 1];
    if hi - last > 1e-9 * step {
        ages.push(hi);
    } else {
        let len = ages.len();
        ages[len - 1] = hi;
    }
    ages
}

pub fn phase_path(s: &Spline, step: f64) -> Result<PhasePath> {
    if s.degree() < 2 {
        return Err(Error::DegreeTooLowForPhase(s.degree()));
    }
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::InvalidStep(step));
    }
    let velocity = s.derivative()?;
    let acceleration = velocity.derivative()?;
    let (lo, hi) = s.domain();
    let samples = sample_ages(lo, hi, step)
        .into_iter()
        .map(|age| {
            Ok(PhaseSample {
                age,
                velocity: velocity.eval(age)?,
                acceleration: acceleration.eval(age)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhasePath {
        samples,
        step,
        velocity,
        acceleration,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// Positive to negative velocity: a local maximum of the curve.
    Down,
    /// Negative to positive velocity: a local minimum.
    Up,
}

impl Crossing {
    pub fn as_str(self) -> &'static str {
        match self {
            Crossing::Down => "down",
            Crossing::Up => "up",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroVelocity {
    pub age: f64,
    pub direction: Crossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityExtremum {
    pub age: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Skew {
    Right,
    Left,
    Symmetric,
}

impl Skew {
    pub fn as_str(self) -> &'static str {
        match self {
            Skew::Right => "right-skewed",
            Skew::Left => "left-skewed",
            Skew::Symmetric => "symmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSummary {
    pub max_radius: f64,
    pub mean_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFeatures {
    pub zero_velocity: Vec<ZeroVelocity>,
    pub max_positive_velocity_age: f64,
    pub max_positive_velocity: f64,
    pub max_negative_velocity_age: f64,
    pub max_negative_velocity: f64,
    pub radius: RadiusSummary,
    pub skew: Skew,
    /// Interior velocity extrema (acceleration zero crossings) in age order.
    pub velocity_local_extrema: Vec<VelocityExtremum>,
    /// At least two velocity maxima before the first down-crossing.
    pub bimodal: bool,
}

impl PhaseFeatures {
    /// Age of the first down-crossing of velocity, i.e. the first mode.
    pub fn peak_age(&self) -> Option<f64> {
        self.zero_velocity
            .iter()
            .find(|z| z.direction == Crossing::Down)
            .map(|z| z.age)
    }

    pub fn velocity_maxima(&self) -> impl Iterator<Item = &VelocityExtremum> {
        self.velocity_local_extrema
            .iter()
            .filter(|e| e.kind == ExtremumKind::Max)
    }
}

// rounding noise where f'' flattens at the ends would otherwise show up as
// spurious sign changes
fn flush_noise(mut values: Vec<f64>) -> Vec<f64> {
    let floor = NOISE_FLOOR * values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in &mut values {
        if v.abs() <= floor {
            *v = 0.0;
        }
    }
    values
}

pub fn extract_features(path: &PhasePath) -> Result<PhaseFeatures> {
    let samples = path.samples();
    if samples.len() < 3 {
        return Err(Error::DegeneratePath(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let ages: Vec<f64> = samples.iter().map(|s| s.age).collect();
    let vel = flush_noise(samples.iter().map(|s| s.velocity).collect());
    let acc = flush_noise(samples.iter().map(|s| s.acceleration).collect());
    let v_spline = path.velocity_spline();
    let a_spline = path.acceleration_spline();
    // brackets come from sample ages inside the domain
    let v_at = |u: f64| v_spline.eval(u).expect("age inside domain");
    let a_at = |u: f64| a_spline.eval(u).expect("age inside domain");

    let zero_velocity: Vec<ZeroVelocity> = sign_changes(&vel)
        .into_iter()
        .map(|(i, j)| ZeroVelocity {
            age: bisect(v_at, ages[i], ages[j], ROOT_TOLERANCE),
            direction: if vel[i] > 0.0 {
                Crossing::Down
            } else {
                Crossing::Up
            },
        })
        .collect();

    let velocity_local_extrema: Vec<VelocityExtremum> = sign_changes(&acc)
        .into_iter()
        .map(|(i, j)| {
            let age = bisect(a_at, ages[i], ages[j], ROOT_TOLERANCE);
            VelocityExtremum {
                age,
                value: v_at(age),
                kind: if acc[i] > 0.0 {
                    ExtremumKind::Max
                } else {
                    ExtremumKind::Min
                },
            }
        })
        .collect();

    let first = samples[0];
    let last = samples[samples.len() - 1];
    let candidates = || {
        velocity_local_extrema
            .iter()
            .map(|e| (e.age, e.value))
            .chain([(first.age, first.velocity), (last.age, last.velocity)])
    };
    let (max_positive_velocity_age, max_positive_velocity) = candidates()
        .fold(None::<(f64, f64)>, |best, c| match best {
            Some(b) if b.1 >= c.1 => Some(b),
            _ => Some(c),
        })
        .expect("endpoints are always candidates");
    let (max_negative_velocity_age, max_negative_velocity) = candidates()
        .fold(None::<(f64, f64)>, |best, c| match best {
            Some(b) if b.1 <= c.1 => Some(b),
            _ => Some(c),
        })
        .expect("endpoints are always candidates");

    let v_scale = path.max_abs_velocity();
    let a_scale = path.max_abs_acceleration();
    let radii = path.radii(v_scale, a_scale);
    let radius = RadiusSummary {
        max_radius: radii.iter().copied().fold(0.0, f64::max),
        mean_radius: radii.iter().sum::<f64>() / radii.len() as f64,
    };

    let tau = SKEW_TOLERANCE
        * v_scale
            .max(max_positive_velocity.abs())
            .max(max_negative_velocity.abs());
    let net = max_positive_velocity - max_negative_velocity.abs();
    let skew = if net > tau {
        Skew::Right
    } else if net < -tau {
        Skew::Left
    } else {
        Skew::Symmetric
    };

    let first_down = zero_velocity
        .iter()
        .find(|z| z.direction == Crossing::Down)
        .map_or(f64::INFINITY, |z| z.age);
    let bimodal = velocity_local_extrema
        .iter()
        .filter(|e| e.kind == ExtremumKind::Max && e.age < first_down)
        .count()
        >= 2;

    Ok(PhaseFeatures {
        zero_velocity,
        max_positive_velocity_age,
        max_positive_velocity,
        max_negative_velocity_age,
        max_negative_velocity,
        radius,
        skew,
        velocity_local_extrema,
        bimodal,
    })
}

/// Maximum radii of two paths under a shared normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusComparison {
    pub max_radius_a: f64,
    pub max_radius_b: f64,
    pub ratio: f64,
    pub velocity_scale: f64,
    pub acceleration_scale: f64,
}

/// Compares the size of two phase cycles. Both axes are normalized by their
/// maximum absolute value over the two paths jointly.
pub fn compare_paths(a: &PhasePath, b: &PhasePath) -> Result<RadiusComparison> {
    let (a_lo, a_hi) = a.domain();
    let (b_lo, b_hi) = b.domain();
    let tol = 1e-9 * (a_hi - a_lo).abs().max(b_hi - b_lo).max(1.0);
    if (a_lo - b_lo).abs() > tol || (a_hi - b_hi).abs() > tol {
        return Err(Error::MismatchedDomains {
            a_lo,
            a_hi,
            b_lo,
            b_hi,
        });
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegeneratePath("empty path".into()));
    }
    let v_scale = a.max_abs_velocity().max(b.max_abs_velocity());
    let a_scale = a.max_abs_acceleration().max(b.max_abs_acceleration());
    let max_r = |p: &PhasePath| p.radii(v_scale, a_scale).into_iter().fold(0.0, f64::max);
    let max_radius_a = max_r(a);
    let max_radius_b = max_r(b);
    Ok(RadiusComparison {
        max_radius_a,
        max_radius_b,
        ratio: max_radius_a / max_radius_b,
        velocity_scale: v_scale,
        acceleration_scale: a_scale,
    })
}
