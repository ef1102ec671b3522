//! Command-line front end: plant file in, trajectory data and plot out.

mod input;
mod output;
mod svg;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::boundary::{BoundaryError, RegionSpec};
use crate::tracer::{run, RootLocusResult, Termination, TraceError, TraceOptions};

pub use input::{parse_input, InputError};
pub use output::{fmt_f64, result_value, write_csv, write_json};
pub use svg::render as render_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Root locus of a dead-time system inside Re(s) >= sigma0 up to a gain cap.
#[derive(Debug, Clone, Parser)]
#[command(name = "dtlocus", version, allow_negative_numbers = true)]
pub struct RunConfig {
    /// Plant description (JSON).
    pub input: PathBuf,
    /// Left edge of the region Re(s) >= sigma0.
    #[arg(long)]
    pub sigma0: f64,
    /// Largest controller gain.
    #[arg(long)]
    pub kmax: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Also write an SVG plot to this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Trace negative gains as well.
    #[arg(long)]
    pub negative_gains: bool,
    /// Exit with status 3 when any trajectory ends in a step failure.
    #[arg(long)]
    pub strict: bool,
    /// Corrector tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Initial step length.
    #[arg(long, default_value_t = 1e-2)]
    pub h0: f64,
    /// Nominal contraction rate of the corrector.
    #[arg(long, default_value_t = 1.1)]
    pub kappa: f64,
    /// Nominal distance to the locus after correction.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Trace conjugate trajectories instead of mirroring them.
    #[arg(long)]
    pub no_mirror: bool,
}

impl RunConfig {
    pub fn trace_options(&self) -> Result<TraceOptions, String> {
        for (name, v) in [("tol", self.tol), ("h0", self.h0), ("kappa", self.kappa), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("--{name} must be positive, got {v}"));
            }
        }
        let mut opts = TraceOptions {
            negative_gains: self.negative_gains,
            mirror: !self.no_mirror,
            ..Default::default()
        };
        opts.corrector.tol = self.tol;
        opts.controller.kappa_nom = self.kappa;
        opts.controller.delta_nom = self.delta;
        opts.controller.h = self.h0.clamp(opts.controller.h_min, opts.controller.h_max);
        Ok(opts)
    }
}

fn is_validation(e: &TraceError) -> bool {
    matches!(
        e,
        TraceError::BranchOnBoundary(_)
            | TraceError::Boundary(
                BoundaryError::PoleOrZeroOnBoundary { .. }
                    | BoundaryError::BiProperGainCapViolated { .. }
                    | BoundaryError::InvalidRegion(_)
            )
    )
}

pub fn emit(result: &RootLocusResult, cfg: &RunConfig) -> io::Result<()> {
    let sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cfg.format {
        Format::Json => write_json(result, sink)?,
        Format::Csv => write_csv(result, sink)?,
    }
    if let Some(path) = &cfg.svg {
        std::fs::write(path, render_svg(result))?;
    }
    Ok(())
}

/// Runs the command line and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let bytes = match std::fs::read(&cfg.input) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cfg.input.display());
            return EXIT_IO;
        }
    };
    let plant = match parse_input(&bytes) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let region = match RegionSpec::new(cfg.sigma0, cfg.kmax) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let options = match cfg.trace_options() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let result = match run(&plant, &region, &options) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return if is_validation(&e) { EXIT_INVALID } else { EXIT_NUMERICAL };
        }
    };
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if let Err(e) = emit(&result, &cfg) {
        eprintln!("error: {e}");
        return EXIT_IO;
    }
    let failed = result
        .trajectories
        .iter()
        .any(|t| matches!(t.termination, Termination::StepFailure { .. }));
    if cfg.strict && failed {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}
