//! Smooth age-indexed rate curves with B-splines, differentiate them exactly
//! and analyse the resulting velocity/acceleration phase plane.

pub mod banded;
pub mod bspline;
pub mod error;
pub mod ingest;
pub mod phase;
pub mod quadrature;
pub mod render;
pub mod roots;
pub mod smooth;

pub use bspline::{KnotVector, Spline};
pub use error::{Error, Result};
pub use ingest::{parse_table, RateTable, TableFormat};
pub use phase::{compare_paths, extract_features, phase_path, PhaseFeatures, PhasePath};
pub use smooth::{fit, fit_xy, FitConfig, FitResult, KnotPlacement, Lambda, RateCurve};
