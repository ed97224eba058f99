//! Command-line front end: scenario runs, candidate comparison, maximal
//! selection, EOS verification, the weak-strong test, and the exact Riemann
//! solution.
//!
//! Exit codes: 0 success, 1 configuration or domain errors, 2 solver aborts
//! (vacuum, CFL), 3 equation-of-state hypothesis violations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maxdiss_core::config::{Config, ConfigError};
use maxdiss_core::io::{self, fmt_f64, IoError};
use maxdiss_core::measures::{
    compare, default_compare_tolerance, extremal_cells, select_maximal, MeasureError, OrderResult,
};
use maxdiss_core::solver::{self, SolverError, WaveKind};
use maxdiss_core::thermo::ThermoError;
use maxdiss_core::weakstrong::{self, ReferenceSolution, WeakStrongError};

#[derive(Parser)]
#[command(name = "maxdiss", about = "Maximal-dissipation toolkit for the 1-D Euler system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Dotted-key overrides, e.g. `--set grid.nx=400`; last one wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario; write trajectory, Young-measure, entropy-production,
    /// and diagnostics files.
    Run(ConfigArgs),
    /// Compare two entropy-production files under the local partial order.
    Compare {
        sigma_a: PathBuf,
        sigma_b: PathBuf,
        /// Comparison tolerance (default: 1e-10 of the larger total mass).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Select undominated candidates among (young-measure, sigma) file pairs.
    #[command(name = "select-maximal")]
    SelectMaximal {
        /// Alternating young-measure and sigma files: u0 s0 u1 s1 ...
        files: Vec<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Verify the entropy-law hypotheses and sample the stability Hessian.
    #[command(name = "verify-eos")]
    VerifyEos(ConfigArgs),
    /// Run a scenario against its smooth reference and report the residual.
    #[command(name = "weak-strong")]
    WeakStrong(ConfigArgs),
    /// Exact self-similar solution of the configured Riemann data.
    Riemann(ConfigArgs),
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(1, e.to_string())
    }
}

impl From<ThermoError> for Failure {
    fn from(e: ThermoError) -> Self {
        Failure::new(1, e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::new(1, e.to_string())
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        Failure::new(1, e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match &e {
            SolverError::CflViolation { .. }
            | SolverError::VacuumFormation { .. }
            | SolverError::AdmissibilityLost { .. }
            | SolverError::EntropyViolation { .. } => 2,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<WeakStrongError> for Failure {
    fn from(e: WeakStrongError) -> Self {
        match e {
            WeakStrongError::Solver(inner) => inner.into(),
            other => Failure::new(1, other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(args) => cmd_run(&args),
        Command::Compare { sigma_a, sigma_b, tol } => cmd_compare(&sigma_a, &sigma_b, tol),
        Command::SelectMaximal { files, tol } => cmd_select_maximal(&files, tol),
        Command::VerifyEos(args) => cmd_verify_eos(&args),
        Command::WeakStrong(args) => cmd_weak_strong(&args),
        Command::Riemann(args) => cmd_riemann(&args),
    }
}

fn load_config(args: &ConfigArgs) -> Result<Config, Failure> {
    let mut config = Config::load(&args.config)?;
    config.apply_overrides(&args.overrides)?;
    std::fs::create_dir_all(&args.out)?;
    Ok(config)
}

fn cmd_run(args: &ConfigArgs) -> Result<(), Failure> {
    let config = load_config(args)?;
    let scenario = config.build_scenario()?;
    let trajectory = solver::run(&scenario)?;
    let field = trajectory.dirac_field()?;
    let sigma = solver::entropy_residual(&trajectory, &scenario.model)?;
    let report = solver::diagnostics(&field, &scenario.model, None);

    io::write_trajectory(&args.out.join("trajectory.txt"), &trajectory, 11)?;
    io::write_young_measure(&args.out.join("young.txt"), &field)?;
    io::write_cell_measure(&args.out.join("sigma.txt"), &sigma)?;
    std::fs::write(args.out.join("diagnostics.txt"), io::diagnostics_to_string(&report))?;
    println!(
        "run complete: {} time cells, {} space cells, total sigma {}",
        trajectory.grid.n_t,
        trajectory.grid.n_x,
        fmt_f64(sigma.total_mass())
    );
    Ok(())
}

fn cmd_compare(sigma_a: &Path, sigma_b: &Path, tol: Option<f64>) -> Result<(), Failure> {
    let a = io::read_cell_measure(sigma_a)?;
    let b = io::read_cell_measure(sigma_b)?;
    let tol = tol.unwrap_or_else(|| default_compare_tolerance(&a, &b));
    let verdict = compare(&a, &b, tol).map_err(Failure::from)?;
    let (hi, lo) = extremal_cells(&a, &b, tol);
    match verdict {
        OrderResult::Greater => {
            let (t, x, d) = hi.unwrap();
            println!("GREATER {t} {x} {}", fmt_f64(d));
        }
        OrderResult::Less => {
            let (t, x, d) = lo.unwrap();
            println!("LESS {t} {x} {}", fmt_f64(d));
        }
        OrderResult::Equal => {
            // largest within-tolerance difference and its cell
            let grid = a.grid();
            let (mut cell, mut worst) = ((0usize, 0usize), 0.0f64);
            for (i, (va, vb)) in a.values().iter().zip(b.values().iter()).enumerate() {
                if (va - vb).abs() >= worst {
                    worst = (va - vb).abs();
                    cell = (i / grid.n_x, i % grid.n_x);
                }
            }
            println!("EQUAL {} {} {}", cell.0, cell.1, fmt_f64(worst));
        }
        OrderResult::Incomparable => {
            let (ta, xa, da) = hi.unwrap();
            let (tb, xb, db) = lo.unwrap();
            println!("INCOMPARABLE {ta} {xa} {} {tb} {xb} {}", fmt_f64(da), fmt_f64(db));
        }
    }
    Ok(())
}

fn cmd_select_maximal(files: &[PathBuf], tol: Option<f64>) -> Result<(), Failure> {
    if files.is_empty() || files.len() % 2 != 0 {
        return Err(Failure::new(
            1,
            "expected an even, nonempty list of files: young0 sigma0 young1 sigma1 ...",
        ));
    }
    let mut candidates = Vec::new();
    for pair in files.chunks(2) {
        let field = io::read_young_measure(&pair[0])?;
        let sigma = io::read_cell_measure(&pair[1])?;
        candidates.push((field, sigma));
    }
    let tol = tol.unwrap_or_else(|| {
        1e-10
            * candidates
                .iter()
                .map(|(_, s)| s.total_mass())
                .fold(0.0, f64::max)
    });
    for i in 0..candidates.len() {
        for j in (i + 1)..candidates.len() {
            let verdict = compare(&candidates[i].1, &candidates[j].1, tol).map_err(Failure::from)?;
            println!("{i} {j} {verdict}");
        }
    }
    let picked = select_maximal(&candidates, tol).map_err(Failure::from)?;
    let rendered: Vec<String> = picked.iter().map(usize::to_string).collect();
    println!("maximal {}", rendered.join(" "));
    Ok(())
}

fn cmd_verify_eos(args: &ConfigArgs) -> Result<(), Failure> {
    let config = load_config(args)?;
    let model = config.build_model_unvalidated()?;
    let report = model.hypothesis_report();

    // Stability Hessian sampling over random admissible (rho, pressure) pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(config.u64_or("seed", 0)?);
    let samples = 200;
    let mut concave = 0usize;
    let mut worst: f64 = f64::NEG_INFINITY;
    let threshold = model.law().cold_pressure();
    for _ in 0..samples {
        let rho = 10f64.powf(rng.gen_range(-1.0..1.0));
        let ratio = threshold + 10f64.powf(rng.gen_range(-2.0..2.0));
        let pressure = ratio * rho.powf(model.gamma());
        match model.entropy_hessian_rho_p(rho, pressure) {
            Ok(h) => {
                if h.concave {
                    concave += 1;
                }
                let trace = h.matrix[0][0] + h.matrix[1][1];
                let det = h.matrix[0][0] * h.matrix[1][1] - h.matrix[0][1] * h.matrix[1][0];
                let max_eig = 0.5 * (trace + (trace * trace - 4.0 * det).max(0.0).sqrt());
                worst = worst.max(max_eig);
            }
            Err(_) => {}
        }
    }
    let all_concave = concave == samples;

    let mut text = report.to_string();
    text.push_str(&format!(
        "hessian-concave {} {} {}\n",
        if all_concave { "ok" } else { "fail" },
        fmt_f64(worst),
        format_args!("{concave}/{samples}")
    ));
    std::fs::write(args.out.join("eos-report.txt"), &text)?;
    print!("{text}");

    if report.passed && all_concave {
        Ok(())
    } else {
        Err(Failure::new(3, "entropy law violates the required hypotheses"))
    }
}

fn cmd_weak_strong(args: &ConfigArgs) -> Result<(), Failure> {
    let config = load_config(args)?;
    let scenario = config.build_scenario()?;
    let reference = ReferenceSolution::from_scenario(&scenario).ok_or_else(|| {
        Failure::new(
            1,
            "weak-strong needs a smooth reference: ic.type = constant, or smooth-wave with \
             ic.velocity_amplitude = 0",
        )
    })?;
    let report = weakstrong::weak_strong_test(&scenario, &reference)?;
    std::fs::write(
        args.out.join("gronwall.txt"),
        io::gronwall_report_to_string(&report),
    )?;
    println!(
        "verdict {} max-residual {} fitted-L {}",
        report.verdict,
        fmt_f64(report.max_residual()),
        fmt_f64(report.fitted_growth)
    );
    Ok(())
}

fn cmd_riemann(args: &ConfigArgs) -> Result<(), Failure> {
    let config = load_config(args)?;
    let scenario = config.build_scenario()?;
    let (left, right) = match &scenario.ic {
        solver::InitialCondition::Riemann { left, right } => (*left, *right),
        _ => return Err(Failure::new(1, "riemann requires ic.type = riemann")),
    };
    let solution = solver::exact_riemann(&scenario.model, &left, &right)?;
    let wave = |w: WaveKind| match w {
        WaveKind::Shock => "shock",
        WaveKind::Rarefaction => "rarefaction",
    };
    let mut out = String::new();
    out.push_str(&format!("star-pressure {}\n", fmt_f64(solution.star_pressure)));
    out.push_str(&format!("star-velocity {}\n", fmt_f64(solution.star_velocity)));
    out.push_str(&format!("star-rho-left {}\n", fmt_f64(solution.star_rho_left)));
    out.push_str(&format!("star-rho-right {}\n", fmt_f64(solution.star_rho_right)));
    out.push_str(&format!("left-wave {}\n", wave(solution.left_wave)));
    out.push_str(&format!("right-wave {}\n", wave(solution.right_wave)));
    out.push_str("# x rho u p\n");
    let t = scenario.t_end;
    for i in 0..scenario.n_x {
        let x = solver::x_center(i, scenario.n_x);
        let s = solution.sample(x / t);
        out.push_str(&format!(
            "{} {} {} {}\n",
            fmt_f64(x),
            fmt_f64(s.rho),
            fmt_f64(s.u),
            fmt_f64(s.p)
        ));
    }
    std::fs::write(args.out.join("riemann.txt"), &out)?;
    println!("star-pressure {}", fmt_f64(solution.star_pressure));
    Ok(())
}
