mod config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use pqpd::analysis::{expected_marginal, marginal_1d};
use pqpd::{
    assemble_grid, compare_slices, hemisphere_grid, parse_measurements, read_slice_csv, simulate_dataset,
    theory_pqpd_radial, write_measurements, write_slice_csv, ConvolvedTheory, CsvFormat, Execution, InterpKernelKind,
    PQPDSlice, PlaneSpec, PoincarePoint, ProbabilityField, ProbabilityGrid, Reconstructor, TheoryParams,
};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<pqpd::Error> for CliError {
    fn from(e: pqpd::Error) -> Self {
        use pqpd::Error as E;
        match e {
            E::NonFinite(_) | E::DomainError(_) | E::SingularProbe(_) => CliError::Numeric(e.to_string()),
            E::InvalidParameter(_) | E::OutOfRange { .. } | E::InvalidOrder(_) | E::NonPositiveWidth(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pqpd", version, about = "Polarization quasiprobability reconstruction")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// key = value configuration file; flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    p1: Option<f64>,
    /// Interpolation kernel: rectangular or cubic-spline
    #[arg(long, global = true)]
    kernel: Option<InterpKernelKind>,
    /// Pulses per measurement setting
    #[arg(long, global = true)]
    pulses: Option<u64>,
    /// Poincaré grid step in degrees
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Quadrature step in degrees for both angles
    #[arg(long, global = true)]
    quad_step: Option<f64>,
    /// Worker threads, 0 = all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file, standard output when absent
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate photon counting on the Poincaré grid
    Simulate {
        #[arg(long, default_value = "waveplate")]
        format: CsvFormat,
    },
    /// Reconstruct a slice from measurements or from the exact field
    Reconstruct {
        /// Measurement CSV
        measurements: Option<PathBuf>,
        #[arg(long, default_value = "waveplate")]
        format: CsvFormat,
        /// Use the exact outcome probabilities instead of data
        #[arg(long, conflicts_with_all = ["measurements", "analytic_grid"])]
        analytic: bool,
        /// Use exact probabilities sampled on the grid and interpolated
        #[arg(long, conflicts_with = "measurements")]
        analytic_grid: bool,
        #[arg(long, value_name = "SPEC")]
        plane: Option<PlaneSpec>,
    },
    /// Closed-form reference slice
    Theory {
        #[arg(long, value_name = "SPEC")]
        plane: Option<PlaneSpec>,
        #[arg(long, value_enum, default_value_t = Variant::Radial)]
        variant: Variant,
    },
    /// Compare slice A against reference slice B
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        exclude_radius: Option<f64>,
    },
    /// One-dimensional marginals of the convolved distribution
    Marginal {
        /// Direction as alpha,beta in degrees
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        direction: String,
        /// Comma-separated abscissae
        #[arg(long, default_value = "-1,-0.5,0,0.5,1", allow_hyphen_values = true)]
        xs: String,
        /// Lattice step of the transverse quadrature
        #[arg(long, default_value_t = 0.005)]
        step: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Variant {
    Radial,
    Convolved,
}

fn effective_config(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = c.p1 {
        cfg.p1 = v;
    }
    if let Some(v) = c.kernel {
        cfg.kernel = v;
    }
    if let Some(v) = c.pulses {
        cfg.pulses_per_setting = v;
    }
    if let Some(v) = c.grid_step {
        cfg.grid_step_deg = v;
    }
    if let Some(v) = c.quad_step {
        cfg.quad_step_deg = v;
    }
    if let Some(v) = c.threads {
        cfg.threads = v;
    }
    Ok(cfg)
}

fn init_threads(n: usize) -> Result<(), CliError> {
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        log::warn!("built without the parallel feature, ignoring --threads {n}");
    }
    Ok(())
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Data(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_in(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

fn write_slice(slice: &PQPDSlice, cfg: &RunConfig, extra: &[(&str, String)], out: Option<&Path>) -> Result<(), CliError> {
    slice.check_finite()?;
    let mut meta = cfg.provenance();
    meta.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    write_slice_csv(slice, &meta, open_out(out)?)?;
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig, format: CsvFormat, out: Option<&Path>) -> Result<(), CliError> {
    let grid = hemisphere_grid(cfg.grid_step_deg, true)?;
    info!(
        "simulating {} settings x {} pulses, p1 = {}, seed = {}",
        grid.len(),
        cfg.pulses_per_setting,
        cfg.p1,
        cfg.seed
    );
    let set = simulate_dataset(&cfg.state()?, &grid, cfg.pulses_per_setting, cfg.seed)?;
    write_measurements(&set, format, open_out(out)?)?;
    Ok(())
}

fn cmd_reconstruct(
    cfg: &RunConfig,
    measurements: Option<&Path>,
    format: CsvFormat,
    analytic: bool,
    analytic_grid: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (field, source) = match (measurements, analytic, analytic_grid) {
        (Some(path), false, false) => {
            let set = parse_measurements(open_in(path)?, format)?;
            info!("read {} records from {}", set.len(), path.display());
            let grid = assemble_grid(&set, cfg.grid_step_deg)?;
            (ProbabilityField::interpolated(grid, cfg.kernel), path.display().to_string())
        }
        (None, true, false) => (ProbabilityField::analytic(cfg.state()?), "analytic".to_string()),
        (None, false, true) => {
            let grid = ProbabilityGrid::analytic(&cfg.state()?, cfg.grid_step_deg, true)?;
            (ProbabilityField::interpolated(grid, cfg.kernel), "analytic-grid".to_string())
        }
        _ => {
            return Err(CliError::Usage(
                "reconstruct needs exactly one of MEASUREMENTS, --analytic or --analytic-grid".into(),
            ))
        }
    };
    let quad = cfg.quadrature();
    info!(
        "quadrature {} at {} deg, epsilon = {}, plane {}",
        quad.rule.name(),
        cfg.quad_step_deg,
        cfg.epsilon,
        cfg.plane
    );
    let start = Instant::now();
    let rec = Reconstructor::new(&field, cfg.delta_kernel()?, quad)?;
    let slice = rec.slice(&cfg.plane);
    info!(
        "{} cells over {} mesh nodes in {:.2} s",
        slice.values.len(),
        rec.mesh_size(),
        start.elapsed().as_secs_f64()
    );
    write_slice(&slice, cfg, &[("source", source)], out)
}

fn cmd_theory(cfg: &RunConfig, variant: Variant, out: Option<&Path>) -> Result<(), CliError> {
    let tp = TheoryParams::new(cfg.state()?, cfg.delta_kernel()?);
    let start = Instant::now();
    let slice = match variant {
        Variant::Radial => {
            let s = PQPDSlice::from_fn(&cfg.plane, tp.kernel, Execution::default(), |p| {
                let sph = p.spherical();
                theory_pqpd_radial(&tp, sph.radius, sph.theta).unwrap_or(f64::NAN)
            });
            // surface the domain error behind the first NaN
            if let Some((_, _, p, _)) = s.cells().find(|c| c.3.is_nan()) {
                let sph = p.spherical();
                theory_pqpd_radial(&tp, sph.radius, sph.theta)?;
            }
            s
        }
        Variant::Convolved => {
            let c = ConvolvedTheory::new(tp);
            PQPDSlice::from_fn(&cfg.plane, tp.kernel, Execution::default(), |p| c.eval(p))
        }
    };
    info!("{} cells in {:.2} s", slice.values.len(), start.elapsed().as_secs_f64());
    let name = match variant {
        Variant::Radial => "radial",
        Variant::Convolved => "convolved",
    };
    write_slice(&slice, cfg, &[("source", format!("theory-{name}"))], out)
}

fn cmd_compare(a: &Path, b: &Path, exclude_radius: f64, out: Option<&Path>) -> Result<(), CliError> {
    let (sa, _) = read_slice_csv(open_in(a)?)?;
    let (sb, _) = read_slice_csv(open_in(b)?)?;
    let m = compare_slices(&sa, &sb, exclude_radius)?;
    let fields = [m.rel_l2, m.rel_linf, m.peak_value, m.min_value, m.negative_mass];
    if fields.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Numeric(format!("non-finite metric in {m:?}")));
    }
    info!(
        "{} vs {}: relative L2 {:.3e}, relative max {:.3e} outside |S| < {exclude_radius}",
        a.display(),
        b.display(),
        m.rel_l2,
        m.rel_linf
    );
    let mut w = open_out(out)?;
    writeln!(w, "exclude_radius={exclude_radius}").and_then(|_| {
        writeln!(w, "rel_l2={:e}", m.rel_l2)?;
        writeln!(w, "rel_linf={:e}", m.rel_linf)?;
        writeln!(w, "peak_value={:e}", m.peak_value)?;
        writeln!(w, "peak_a={:.6}", m.peak_location.0)?;
        writeln!(w, "peak_b={:.6}", m.peak_location.1)?;
        writeln!(w, "min_value={:e}", m.min_value)?;
        writeln!(w, "min_a={:.6}", m.min_location.0)?;
        writeln!(w, "min_b={:.6}", m.min_location.1)?;
        writeln!(w, "negative_mass={:e}", m.negative_mass)?;
        w.flush()
    })
    .map_err(|e| CliError::Data(e.to_string()))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{what}: '{t}' is not a number")))
        })
        .collect()
}

fn cmd_marginal(cfg: &RunConfig, direction: &str, xs: &str, step: f64, out: Option<&Path>) -> Result<(), CliError> {
    let dir = parse_list(direction, "direction")?;
    let [alpha, beta] = dir[..] else {
        return Err(CliError::Usage("direction must be alpha,beta in degrees".into()));
    };
    let dir = PoincarePoint::from_degrees(alpha, beta)?;
    let xs = parse_list(xs, "xs")?;
    if step.is_nan() || step <= 0.0 {
        return Err(CliError::Usage("step must be positive".into()));
    }
    let state = cfg.state()?;
    let kernel = cfg.delta_kernel()?;
    let theory = ConvolvedTheory::new(TheoryParams::new(state, kernel));
    let radius = 1.0 + kernel.cutoff();
    let mut w = open_out(out)?;
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        let m = marginal_1d(|s| theory.eval(s), &dir, x, radius, step);
        let e = expected_marginal(&state, &kernel, &dir, x);
        let rel = (m - e).abs() / e.abs().max(pqpd::analysis::NOISE_FLOOR);
        if !m.is_finite() {
            return Err(CliError::Numeric(format!("marginal at x = {x} is {m}")));
        }
        rows.push(format!("{x},{m:e},{e:e},{rel:e}"));
    }
    let io = |e: io::Error| CliError::Data(e.to_string());
    writeln!(w, "x,marginal,expected,rel_err").map_err(io)?;
    for r in rows {
        writeln!(w, "{r}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = effective_config(&cli.common)?;
    let out = cli.common.out.as_deref();
    match &cli.command {
        Command::Reconstruct { plane: Some(p), .. } | Command::Theory { plane: Some(p), .. } => cfg.plane = *p,
        Command::Compare {
            exclude_radius: Some(r), ..
        } => cfg.exclude_radius = *r,
        _ => {}
    }
    cfg.validate()?;
    init_threads(cfg.threads)?;
    match cli.command {
        Command::Simulate { format } => cmd_simulate(&cfg, format, out),
        Command::Reconstruct {
            measurements,
            format,
            analytic,
            analytic_grid,
            ..
        } => cmd_reconstruct(&cfg, measurements.as_deref(), format, analytic, analytic_grid, out),
        Command::Theory { variant, .. } => cmd_theory(&cfg, variant, out),
        Command::Compare { a, b, .. } => cmd_compare(&a, &b, cfg.exclude_radius, out),
        Command::Marginal { direction, xs, step } => cmd_marginal(&cfg, &direction, &xs, step, out),
    }
}

fn init_logging() {
    let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
    let mut b = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"));
    b.target(env_logger::Target::Stderr);
    if no_color {
        b.write_style(env_logger::WriteStyle::Never);
    }
    b.init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.code())
        }
    }
}
