//! Subcommands wiring ingestion, smoothing, phase analysis and rendering.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use phaseplane::phase::{compare_paths, extract_features, phase_path, DEFAULT_STEP};
use phaseplane::render::{
    basis_traces, comparison_csv, features_rows, fit_rows, labelled_path_rows, path_csv,
    render_basis, render_phase_plane, render_scatter, PlotSpec, FEATURES_HEADER, FIT_HEADER,
    LABELLED_PATH_HEADER,
};
use phaseplane::smooth::{fit, fit_xy, FitConfig, FitResult, KnotPlacement, Lambda};
use phaseplane::{KnotVector, PhasePath, RateCurve, RateTable, TableFormat};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read input file {path}: {source}")]
    ReadInput {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write output file {path}: {source}")]
    WriteOutput {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] phaseplane::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "phaseplane",
    version,
    about = "Phase-plane analysis of age-specific rate curves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plot a clamped B-spline basis and its first derivatives.
    Basis(BasisArgs),
    /// Smooth selected years and write fitted values and a scatter plot.
    Fit(DataArgs),
    /// Write velocity/acceleration paths and a phase-plane plot.
    Phase(DataArgs),
    /// Write the landmark report (zero-velocity ages, velocity extrema, skew).
    Features(DataArgs),
    /// Compare the phase-cycle radius of two years.
    Compare(DataArgs),
    /// Analytic sin(2 pi x) example on x = 0, 0.01, ..., 1.
    DemoSin(DemoArgs),
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 3)]
    pub interior: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Basis plot (with a derivative panel unless --no-derivative).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Separate plot of the first derivatives only.
    #[arg(long)]
    pub deriv_svg: Option<PathBuf>,
    #[arg(long)]
    pub no_derivative: bool,
    /// Sampled traces as `kind,index,u,value`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Equally spaced interior knots; default is one per observed age.
    #[arg(long)]
    pub interior: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub penalty_order: usize,
    /// Smoothing parameter, or `auto` for GCV selection.
    #[arg(long, default_value = "auto")]
    pub lambda: String,
}

impl FitArgs {
    pub fn config(&self) -> Result<FitConfig> {
        let lambda = if self.lambda.eq_ignore_ascii_case("auto") {
            Lambda::Gcv
        } else {
            Lambda::Fixed(self.lambda.parse().map_err(|_| {
                CliError::Usage(format!(
                    "--lambda expects a number or `auto`, got {:?}",
                    self.lambda
                ))
            })?)
        };
        Ok(FitConfig {
            degree: self.degree,
            knots: self
                .interior
                .map_or(KnotPlacement::PerObservation, KnotPlacement::Uniform),
            penalty_order: self.penalty_order,
            lambda,
        })
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input is `year,age,rate` rows.
    #[arg(long, conflicts_with = "wide")]
    pub long: bool,
    /// Input is an `age,<year>,...` matrix.
    #[arg(long)]
    pub wide: bool,
    /// Year column to analyse; repeat for several.
    #[arg(long = "year", required = true)]
    pub years: Vec<String>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Landmark report written alongside `phase` output.
    #[arg(long)]
    pub features_csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub features_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::WriteOutput {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a table; without an explicit flag the layout is wide when the
/// first header field is `age`.
pub fn load_table(path: &Path, long: bool, wide: bool) -> Result<RateTable> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadInput {
        path: path.to_path_buf(),
        source,
    })?;
    let format = if long {
        TableFormat::Long
    } else if wide {
        TableFormat::Wide
    } else {
        let first = text
            .trim_start_matches('\u{feff}')
            .lines()
            .next()
            .and_then(|l| l.split(',').next())
            .unwrap_or("");
        if first.trim().eq_ignore_ascii_case("age") {
            TableFormat::Wide
        } else {
            TableFormat::Long
        }
    };
    Ok(phaseplane::ingest::parse_str(
        text.trim_start_matches('\u{feff}'),
        format,
    )?)
}

struct Analysed {
    curve: RateCurve,
    fit: FitResult,
    path: PhasePath,
}

fn analyse(args: &DataArgs) -> Result<Vec<Analysed>> {
    let table = load_table(&args.input, args.long, args.wide)?;
    let cfg = args.fit.config()?;
    args.years
        .iter()
        .map(|year| {
            let curve = table.curve_for_year(year)?;
            let fit = fit(&curve, &cfg)?;
            let path = phase_path(&fit.spline, args.step)?;
            Ok(Analysed { curve, fit, path })
        })
        .collect()
}

fn features_report(items: &[Analysed]) -> Result<String> {
    let mut out = String::from(FEATURES_HEADER);
    for a in items {
        let f = extract_features(&a.path)?;
        out.push_str(&features_rows(a.curve.label(), &f));
    }
    Ok(out)
}

fn run_basis(args: &BasisArgs) -> Result<()> {
    let kv = KnotVector::clamped(args.lo, args.hi, args.interior, args.degree)?;
    if let Some(p) = &args.svg {
        let fig = render_basis(&kv, !args.no_derivative, &PlotSpec::basis())?;
        write(p, &fig.to_svg())?;
    }
    if let Some(p) = &args.deriv_svg {
        let mut spec = PlotSpec::new("u", "First derivative");
        spec.annotate_ages = false;
        let traces = basis_traces(&kv, 1)?;
        let fig = phaseplane::render::render_traces(&traces, &spec)?;
        write(p, &fig.to_svg())?;
    }
    if let Some(p) = &args.csv {
        let mut out = String::from("kind,index,u,value\n");
        for (kind, order) in [("basis", 0), ("derivative", 1)] {
            if order > kv.degree() {
                continue;
            }
            for (i, trace) in basis_traces(&kv, order)?.iter().enumerate() {
                for (u, v) in trace {
                    out.push_str(&format!("{kind},{i},{u},{v}\n"));
                }
            }
        }
        write(p, &out)?;
    }
    Ok(())
}

fn run_fit(args: &DataArgs) -> Result<()> {
    let items = analyse(args)?;
    if let Some(p) = &args.csv {
        let mut out = String::from(FIT_HEADER);
        for a in &items {
            out.push_str(&fit_rows(&a.curve, &a.fit.spline)?);
        }
        write(p, &out)?;
    }
    if let Some(p) = &args.svg {
        let pairs: Vec<_> = items.iter().map(|a| (&a.curve, &a.fit.spline)).collect();
        write(p, &render_scatter(&pairs, &PlotSpec::scatter())?.to_svg())?;
    }
    for a in &items {
        eprintln!(
            "{}: lambda = {}, edf = {:.3}, sse = {}",
            a.curve.label(),
            a.fit.lambda_used,
            a.fit.effective_dof,
            a.fit.residual_sse
        );
    }
    Ok(())
}

fn run_phase(args: &DataArgs) -> Result<()> {
    let items = analyse(args)?;
    if let Some(p) = &args.csv {
        let mut out = String::from(LABELLED_PATH_HEADER);
        for a in &items {
            out.push_str(&labelled_path_rows(a.curve.label(), &a.path));
        }
        write(p, &out)?;
    }
    if let Some(p) = &args.svg {
        let paths: Vec<_> = items.iter().map(|a| (a.curve.label(), &a.path)).collect();
        write(
            p,
            &render_phase_plane(&paths, &PlotSpec::phase_plane())?.to_svg(),
        )?;
    }
    if let Some(p) = &args.features_csv {
        write(p, &features_report(&items)?)?;
    }
    Ok(())
}

fn run_features(args: &DataArgs) -> Result<()> {
    let items = analyse(args)?;
    let report = features_report(&items)?;
    match &args.csv {
        Some(p) => write(p, &report),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

fn run_compare(args: &DataArgs) -> Result<()> {
    if args.years.len() != 2 {
        return Err(CliError::Usage(format!(
            "compare needs exactly two --year values, got {}",
            args.years.len()
        )));
    }
    let items = analyse(args)?;
    let c = compare_paths(&items[0].path, &items[1].path)?;
    let report = comparison_csv(items[0].curve.label(), items[1].curve.label(), &c);
    if let Some(p) = &args.svg {
        let paths: Vec<_> = items.iter().map(|a| (a.curve.label(), &a.path)).collect();
        write(
            p,
            &render_phase_plane(&paths, &PlotSpec::phase_plane())?.to_svg(),
        )?;
    }
    match &args.csv {
        Some(p) => write(p, &report),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

/// Fit used by `demo-sin`: cubic, 50 interior knots, no penalty, on the 101
/// exact samples of sin(2 pi x).
pub fn demo_sin_path(step: f64) -> Result<PhasePath> {
    let xs: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| (2.0 * std::f64::consts::PI * x).sin())
        .collect();
    let cfg = FitConfig {
        degree: 3,
        knots: KnotPlacement::Uniform(50),
        penalty_order: 2,
        lambda: Lambda::Fixed(0.0),
    };
    let fit = fit_xy(&xs, &ys, &cfg)?;
    Ok(phase_path(&fit.spline, step)?)
}

fn run_demo(args: &DemoArgs) -> Result<()> {
    let path = demo_sin_path(args.step)?;
    if let Some(p) = &args.csv {
        write(p, &path_csv(&path))?;
    }
    if let Some(p) = &args.svg {
        let mut spec = PlotSpec::phase_plane().with_title("sin(2πx)");
        spec.annotate_ages = false;
        write(p, &render_phase_plane(&[("sin", &path)], &spec)?.to_svg())?;
    }
    if let Some(p) = &args.features_csv {
        let f = extract_features(&path)?;
        write(p, &format!("{FEATURES_HEADER}{}", features_rows("sin", &f)))?;
    }
    if args.csv.is_none() && args.svg.is_none() && args.features_csv.is_none() {
        print!("{}", path_csv(&path));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Basis(a) => run_basis(a),
        Command::Fit(a) => run_fit(a),
        Command::Phase(a) => run_phase(a),
        Command::Features(a) => run_features(a),
        Command::Compare(a) => run_compare(a),
        Command::DemoSin(a) => run_demo(a),
    }
}
