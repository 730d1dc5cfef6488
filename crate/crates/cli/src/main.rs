use amoebalab::parse::{parse_box, parse_complex, parse_count, parse_grid, parse_list, parse_points, parse_residues};
use amoebalab::{run, CliError, Mode, RunConfig, EXIT_CONFIG};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "amoebalab", version, about = "Classical and generalized amoebas, Ronkin functions, tropical superforms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Amoeba, orders, Newton polytope and MA mass of a Laurent polynomial.
    Classical(ClassicalArgs),
    /// Pipeline for logarithmic differentials on the Riemann sphere.
    Generalized(GeneralizedArgs),
    /// Randomized superform calculus and Theta identity suites.
    SuperformCheck(SuperformArgs),
    /// Hausdorff distance of rescaled amoebas to the asymptotic fan.
    FanLimit(FanArgs),
}

#[derive(Args)]
struct Common {
    /// `lo1,hi1,lo2,hi2`
    #[arg(long = "box", value_parser = parse_box, default_value = "-6,6,-6,6", allow_hyphen_values = true)]
    box_: [f64; 4],
    /// Cells per axis, `N` or `N1xN2`.
    #[arg(long, value_parser = parse_grid, default_value = "200")]
    grid: [usize; 2],
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct Outputs {
    /// Write a PPM raster of the complement components.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Write the Ronkin potential at grid nodes as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ClassicalArgs {
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    out: Outputs,
    /// Torus quadrature nodes per angle.
    #[arg(long, value_parser = parse_count, default_value = "256")]
    nq: usize,
    /// Fibers per slicing direction, 0 for twice the grid size.
    #[arg(long, value_parser = parse_count, default_value = "0")]
    fibers: usize,
    /// Angles per fiber.
    #[arg(long, value_parser = parse_count, default_value = "64")]
    angles: usize,
    /// Cells per axis of the Monge-Ampère gradient grid.
    #[arg(long, value_parser = parse_count, default_value = "60")]
    ma_grid: usize,
}

#[derive(Args)]
struct Sphere {
    /// Marked points, comma-separated complex numbers such as `0,1,0.5+2i`.
    #[arg(long, allow_hyphen_values = true)]
    points: String,
    /// Residue rows `a11,a12;a21,a22`.
    #[arg(long, allow_hyphen_values = true)]
    residues: String,
    #[arg(long, value_parser = parse_complex, default_value = "-1", allow_hyphen_values = true)]
    base_point: [f64; 2],
    #[arg(long, value_parser = parse_count)]
    samples: Option<usize>,
    /// Excluded disk radius around marked points.
    #[arg(long, default_value_t = amoebalab_core::generalized::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GeneralizedArgs {
    #[command(flatten)]
    sphere: Sphere,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    out: Outputs,
    /// Mollifier radius in cells.
    #[arg(long, default_value_t = 3.0)]
    eps: f64,
    /// Compare with the classical pipeline of this polynomial.
    #[arg(long, allow_hyphen_values = true)]
    compare_classical: Option<String>,
    #[arg(long, value_parser = parse_count, default_value = "256")]
    nq: usize,
    #[arg(long, value_parser = parse_count, default_value = "0")]
    fibers: usize,
    #[arg(long, value_parser = parse_count, default_value = "64")]
    angles: usize,
    /// Random test forms in the positivity check.
    #[arg(long, value_parser = parse_count, default_value = "50")]
    positivity_trials: usize,
}

#[derive(Args)]
struct SuperformArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Random forms in the calculus suite.
    #[arg(long, value_parser = parse_count, default_value = "200")]
    cases: usize,
    /// Random forms in the Theta suite.
    #[arg(long, value_parser = parse_count, default_value = "50")]
    forms: usize,
    /// Torus points per form in the Theta suite.
    #[arg(long, value_parser = parse_count, default_value = "20")]
    torus_points: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct FanArgs {
    #[command(flatten)]
    sphere: Sphere,
    #[command(flatten)]
    common: Common,
    /// Increasing scales `t`.
    #[arg(long, default_value = "1,2,4,8")]
    ts: String,
}

fn flag<T>(name: &str, r: Result<T, String>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("--{name}: {e}")))
}

fn apply_sphere(c: &mut RunConfig, s: Sphere, default_samples: usize) -> Result<(), CliError> {
    c.points = Some(flag("points", parse_points(&s.points))?);
    c.residues = Some(flag("residues", parse_residues(&s.residues))?);
    c.base_point = s.base_point;
    c.samples = s.samples.unwrap_or(default_samples);
    c.delta = s.delta;
    c.seed = s.seed;
    Ok(())
}

fn apply_common(c: &mut RunConfig, k: Common) {
    c.box_ = k.box_;
    c.grid = k.grid;
    c.report = k.report;
}

fn config(cli: Cli) -> Result<RunConfig, CliError> {
    Ok(match cli.cmd {
        Cmd::Classical(a) => {
            let mut c = RunConfig::new(Mode::Classical);
            c.poly = Some(a.poly);
            apply_common(&mut c, a.common);
            (c.emit, c.csv) = (a.out.emit, a.out.csv);
            (c.nq, c.fibers, c.angles, c.ma_grid) = (a.nq, a.fibers, a.angles, a.ma_grid);
            c
        }
        Cmd::Generalized(a) => {
            let mut c = RunConfig::new(Mode::Generalized);
            apply_sphere(&mut c, a.sphere, 2_000_000)?;
            apply_common(&mut c, a.common);
            (c.emit, c.csv) = (a.out.emit, a.out.csv);
            (c.eps, c.compare_classical) = (a.eps, a.compare_classical);
            (c.nq, c.fibers, c.angles, c.positivity_trials) = (a.nq, a.fibers, a.angles, a.positivity_trials);
            c
        }
        Cmd::SuperformCheck(a) => {
            let mut c = RunConfig::new(Mode::SuperformCheck);
            (c.seed, c.cases, c.forms, c.torus_points, c.report) = (a.seed, a.cases, a.forms, a.torus_points, a.report);
            c
        }
        Cmd::FanLimit(a) => {
            let mut c = RunConfig::new(Mode::FanLimit);
            apply_sphere(&mut c, a.sphere, 100_000)?;
            apply_common(&mut c, a.common);
            c.ts = flag("ts", parse_list(&a.ts))?;
            c
        }
    })
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("AMOEBALAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("AMOEBALAB_THREADS must be a count, got `{v}`")))?;
    if n == 0 {
        return Err(CliError::Config("AMOEBALAB_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let cfg = match config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cfg) {
        Ok(rep) => {
            let failing = rep.failing_checks();
            if failing.is_empty() {
                eprintln!("all {} checks passed", rep.checks.len());
            } else {
                if let Some(e) = &rep.error {
                    eprintln!("error in `{}`: {}", e.check, e.message);
                }
                eprintln!("failing checks: {}", failing.join(", "));
            }
            if cfg.report.is_none() {
                print!("{}", rep.to_json());
            }
            ExitCode::from(rep.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
