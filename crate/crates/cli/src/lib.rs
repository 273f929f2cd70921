//! Command-line front end: scenario files in, phase tables out.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 quadrature failure or
//! singular path, 4 failed condition check or rejected field, 5 Stokes
//! mismatch, 6 non-uniform B for the surface form, 7 ill-conditioned or
//! insufficient data.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use dipole_phase::analysis::{
    check_conditions, fit_velocity_basis, phase_kernels, solve_polarizabilities, speed_grid, velocity_scan,
    AnalysisError, Measurement,
};
use dipole_phase::fields::FieldError;
use dipole_phase::geometry::{GeometryError, Tolerance};
use dipole_phase::phases::{lepoutre_phase, surface_form_phase, total_phase_decomposition, PhaseError};
use dipole_phase::report::{sig17, FlatRecord};
use dipole_phase::scenario::{parse_measurements, parse_vscan_csv, Scenario, ScenarioError};

/// Line and surface forms agree when their relative difference is below this.
pub const STOKES_RELATIVE: f64 = 1e-6;
/// Below this both forms count as zero.
pub const STOKES_ZERO: f64 = 1e-12;

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const CHECK_FAILED: i32 = 4;
    pub const STOKES_MISMATCH: i32 = 5;
    pub const NON_UNIFORM_B: i32 = 6;
    pub const DATA: i32 = 7;
}

#[derive(Debug, Parser)]
#[command(
    name = "dipole-phase",
    version,
    about = "Interferometer phases of neutral particles with electric and magnetic dipoles"
)]
struct Cli {
    /// Relative quadrature tolerance; overrides the scenario's `options.tol`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the result to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every phase term with its error estimate.
    Compute { scenario: PathBuf },
    /// Force-free and ∇·B = 0 conditions on a tube around the loop.
    Check { scenario: PathBuf },
    /// Total phase over log-spaced speeds, as CSV with a fitted footer.
    Vscan {
        scenario: PathBuf,
        #[arg(long)]
        vmin: f64,
        #[arg(long)]
        vmax: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(4..))]
        steps: u32,
        /// Gaussian noise added to each phase, as a fraction of |phase|.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Polarizability phase as a line integral and as a surface flux.
    Stokes { scenario: PathBuf },
    /// Fit φ(v) = a_const + a_invv/v + a_linv·v to a vscan CSV.
    Fit { data: PathBuf },
    /// Solve for χ and κ from measured phases of the given scenarios.
    Solve {
        /// CSV with columns scenario_id,measured_phase_rad,sigma_rad; ids are scenario file stems.
        #[arg(long)]
        measurements: PathBuf,
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
}

/// A failed command: exit code and a one-line diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Self::new(exit::USAGE, format!("scenario error: {e}"))
    }
}

fn field_code(e: &FieldError) -> i32 {
    match e {
        FieldError::InvalidParameter(_) => exit::USAGE,
        _ => exit::NUMERIC,
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        let code = match &e {
            GeometryError::SingularPathPoint { .. }
            | GeometryError::NonConvergence { .. }
            | GeometryError::CrossesSource { .. }
            | GeometryError::AmbiguousWinding { .. } => exit::NUMERIC,
            GeometryError::Field(f) => field_code(f),
            _ => exit::USAGE,
        };
        let name = match &e {
            GeometryError::SingularPathPoint { .. } => "SingularPathPoint",
            GeometryError::NonConvergence { .. } => "NonConvergence",
            GeometryError::NonPlanarLoop { .. } => "NonPlanarLoop",
            _ => "geometry error",
        };
        Self::new(code, format!("{name}: {e}"))
    }
}

impl From<PhaseError> for Failure {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::Geometry(g) => g.into(),
            PhaseError::Field(f) => Self::new(field_code(&f), format!("field error: {f}")),
            PhaseError::RejectedField(_) => Self::new(exit::CHECK_FAILED, format!("RejectedField: {e}")),
            PhaseError::NonUniformB { .. } => Self::new(exit::NON_UNIFORM_B, format!("NonUniformB: {e}")),
            PhaseError::DegenerateVelocity { .. } | PhaseError::InvalidSpecies(_) => {
                Self::new(exit::USAGE, e.to_string())
            }
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Phase(p) => p.into(),
            AnalysisError::Geometry(g) => g.into(),
            AnalysisError::IllConditioned { .. } => Self::new(exit::DATA, format!("IllConditioned: {e}")),
            AnalysisError::InsufficientData(_) => Self::new(exit::DATA, format!("InsufficientData: {e}")),
            AnalysisError::InvalidInput(_) => Self::new(exit::USAGE, e.to_string()),
        }
    }
}

/// Rendered output and the exit code it goes out with. Failed checks
/// still print their report.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

fn render(record: &FlatRecord, format: Format) -> String {
    match format {
        Format::Table => record.to_table(),
        Format::Csv => record.to_csv(),
        Format::Json => record.to_json(),
    }
}

fn load(path: &Path, tol: Option<f64>) -> Result<Scenario, Failure> {
    let mut s = Scenario::from_path(path)?;
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(Failure::new(exit::USAGE, format!("--tol must lie in (0, 1), got {t}")));
        }
        s.tol = Tolerance::relative(t);
    }
    Ok(s)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(exit::USAGE, format!("cannot read {}: {e}", path.display())))
}

pub fn compute(path: &Path, tol: Option<f64>, format: Format) -> Result<Output, Failure> {
    let s = load(path, tol)?;
    let b = total_phase_decomposition(&s.species, &s.config, &s.lp, s.tol)?;
    Ok(Output {
        text: render(&b.to_record(), format),
        code: exit::OK,
    })
}

pub fn check(path: &Path, tol: Option<f64>, format: Format) -> Result<Output, Failure> {
    let s = load(path, tol)?;
    let report = check_conditions(&s.species, &s.config, &s.lp, s.tube_radius)?;
    let mut record = report.to_record();
    let mut failing = Vec::new();
    if report.div_b_violation {
        failing.push("div_B");
    }
    if report.magnetic_relevant && report.rel_curl_a_mag >= dipole_phase::analysis::FORCE_FREE_RELATIVE {
        failing.push("curl_A_mag");
    }
    if report.magnetic_relevant && report.rel_grad_v_mag >= dipole_phase::analysis::FORCE_FREE_RELATIVE {
        failing.push("grad_V_mag");
    }
    if report.electric_relevant && report.rel_curl_a_elec >= dipole_phase::analysis::FORCE_FREE_RELATIVE {
        failing.push("curl_A_elec");
    }
    if report.electric_relevant && report.rel_grad_v_elec >= dipole_phase::analysis::FORCE_FREE_RELATIVE {
        failing.push("grad_V_elec");
    }
    let verdict = if failing.is_empty() {
        "pass".to_string()
    } else {
        format!("fail: {}", failing.join(" "))
    };
    record.text("verdict", verdict);
    Ok(Output {
        text: render(&record, format),
        code: if report.passes() { exit::OK } else { exit::CHECK_FAILED },
    })
}

pub fn stokes(path: &Path, tol: Option<f64>, format: Format) -> Result<Output, Failure> {
    let s = load(path, tol)?;
    let surface = s.spanning_surface()?;
    let line = lepoutre_phase(&s.species, &s.config, &s.lp, s.tol)?;
    let area = surface_form_phase(&s.species, &s.config, &s.lp, &surface, s.tol)?;
    let diff = (line.value - area.value).abs();
    let scale = line.value.abs().max(area.value.abs());
    let both_zero = scale < STOKES_ZERO;
    let relative = if scale == 0.0 { 0.0 } else { diff / scale };
    let agree = both_zero || relative < STOKES_RELATIVE;
    let mut r = FlatRecord::new();
    r.measured("line_form", line.value, line.abs_error_estimate)
        .measured("surface_form", area.value, area.abs_error_estimate)
        .real("abs_difference", diff)
        .real("relative_difference", relative)
        .flag("agree", agree);
    Ok(Output {
        text: render(&r, format),
        code: if agree { exit::OK } else { exit::STOKES_MISMATCH },
    })
}

pub fn vscan(
    path: &Path,
    tol: Option<f64>,
    (vmin, vmax, steps): (f64, f64, usize),
    noise: f64,
    seed: u64,
) -> Result<Output, Failure> {
    if steps < 4 {
        return Err(Failure::new(
            exit::USAGE,
            format!("--steps must be at least 4, got {steps}"),
        ));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Failure::new(exit::USAGE, "--noise must be a nonnegative fraction"));
    }
    let s = load(path, tol)?;
    let speeds = speed_grid(vmin, vmax, steps)?;
    let mut scan = velocity_scan(&s.species, &s.config, &s.lp, &speeds, s.tol)?;
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (phase, err) in scan.phases.iter_mut().zip(scan.errors.iter_mut()) {
            let sigma = noise * phase.abs();
            if sigma > 0.0 {
                *phase += Normal::new(0.0, sigma).expect("finite sigma").sample(&mut rng);
            }
            *err = err.hypot(sigma);
        }
    }
    let mut text = String::from("speed_mps,phase_rad,err_rad\n");
    for i in 0..scan.speeds.len() {
        let _ = writeln!(
            text,
            "{},{},{}",
            sig17(scan.speeds[i]),
            sig17(scan.phases[i]),
            sig17(scan.errors[i])
        );
    }
    match fit_velocity_basis(&scan.speeds, &scan.phases) {
        Ok(fit) => {
            let c = fit.coefficients;
            let _ = writeln!(text, "# a_const,{},{}", sig17(c.a_const), sig17(fit.std_errors[0]));
            let _ = writeln!(text, "# a_invv,{},{}", sig17(c.a_invv), sig17(fit.std_errors[1]));
            let _ = writeln!(text, "# a_linv,{},{}", sig17(c.a_linv), sig17(fit.std_errors[2]));
            let _ = writeln!(text, "# residual_rms,{}", sig17(fit.residual_rms));
        }
        Err(e) => {
            let _ = writeln!(text, "# fit unavailable: {e}");
        }
    }
    Ok(Output { text, code: exit::OK })
}

pub fn fit(path: &Path, format: Format) -> Result<Output, Failure> {
    let table = parse_vscan_csv(&read_text(path)?)?;
    let fit = fit_velocity_basis(&table.speeds, &table.phases)?;
    Ok(Output {
        text: render(&fit.to_record(), format),
        code: exit::OK,
    })
}

pub fn solve(measurements: &Path, scenarios: &[PathBuf], tol: Option<f64>, format: Format) -> Result<Output, Failure> {
    let rows = parse_measurements(&read_text(measurements)?)?;
    let mut loaded = Vec::with_capacity(scenarios.len());
    for p in scenarios {
        loaded.push(load(p, tol)?);
    }
    let mut data = Vec::with_capacity(rows.len());
    for row in rows {
        let s = loaded.iter().find(|s| s.name == row.scenario_id).ok_or_else(|| {
            Failure::new(
                exit::USAGE,
                format!("measurement names scenario `{}`, which was not given", row.scenario_id),
            )
        })?;
        data.push(Measurement {
            id: row.scenario_id,
            kernels: phase_kernels(&s.species, &s.config, &s.lp, s.tol)?,
            phase: row.measured_phase_rad,
            sigma: row.sigma_rad,
        });
    }
    let solution = solve_polarizabilities(&data)?;
    Ok(Output {
        text: render(&solution.to_record(), format),
        code: exit::OK,
    })
}

/// Parses `args` (program name first), runs the command and writes the
/// result to `stdout` (or `--out`) and diagnostics to `stderr`. Nothing is
/// written to the output on failure. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Compute { scenario } => compute(scenario, cli.tol, cli.format),
        Command::Check { scenario } => check(scenario, cli.tol, cli.format),
        Command::Stokes { scenario } => stokes(scenario, cli.tol, cli.format),
        Command::Vscan {
            scenario,
            vmin,
            vmax,
            steps,
            noise,
            seed,
        } => vscan(scenario, cli.tol, (*vmin, *vmax, *steps as usize), *noise, *seed),
        Command::Fit { data } => fit(data, cli.format),
        Command::Solve {
            measurements,
            scenarios,
        } => solve(measurements, scenarios, cli.tol, cli.format),
    };
    match result {
        Ok(output) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &output.text) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    return exit::USAGE;
                }
            } else {
                let _ = stdout.write_all(output.text.as_bytes());
            }
            output.code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
