use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use contest_core::bounds::BOUND_CSV_HEADER;
use contest_core::harness::{run_sweep, SweepConfig};
use contest_core::{
    compute_measures, solve_general_ne, solve_linear_ne, verify, BoundReport, ContestError,
    ContestInstance, EquilibriumResult, InstanceFile, Measures, SolverConfig, StrategyProfile,
};
use serde::Serialize;

mod figures;

/// Thread count for sweeps; defaults to the available parallelism.
const THREADS_ENV: &str = "CONTEST_THREADS";

#[derive(Parser)]
#[command(
    name = "contest",
    version,
    about = "Attention contests with a malicious player"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Closed,
    Iterative,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance given as JSON
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Write the JSON result here instead of stdout
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Print the bound table as CSV
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(
            long,
            allow_negative_numbers = true,
            conflicts_with = "theta_grid",
            required_unless_present = "theta_grid"
        )]
        theta: Option<f64>,
        /// start:stop:step
        #[arg(long, allow_negative_numbers = true)]
        theta_grid: Option<String>,
    },
    /// Run a sweep described by a JSON config
    Sweep {
        config: PathBuf,
        /// CSV destination; overrides the config's output field
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite
    Verify,
    /// Write the config and CSV behind one figure
    FiguresData {
        #[arg(long)]
        figure: u8,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<ContestError> for Failure {
    fn from(e: ContestError) -> Self {
        match e {
            ContestError::NonConvergence { .. } => Failure::Check(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn emit(f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match f(&mut out).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure::Usage(format!("stdout: {e}")))
        }
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    method: contest_core::SolveMethod,
    iterations: usize,
    degenerate: bool,
    /// Input index of each benign agent, in the solver's order.
    agent_order: &'a [usize],
    valuation_scale: f64,
    /// Malicious rate first, then benign agents in `agent_order`.
    rates: &'a [f64],
    shares: Vec<f64>,
    participating: Vec<usize>,
    malicious_active: bool,
    residuals: &'a [f64],
    max_kkt_violation: f64,
    profile: &'a StrategyProfile,
    measures: Measures,
    measures_input_units: Measures,
}

fn read_instance(path: &Path) -> Result<ContestInstance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        Failure::Usage(format!(
            "malformed instance JSON at '{}': {}",
            e.path(),
            e.inner()
        ))
    })?;
    Ok(file.into_instance()?)
}

fn solve(file: &Path, method: Method, json_out: Option<&Path>) -> Result<(), Failure> {
    let instance = read_instance(file)?;
    let result: EquilibriumResult = match method {
        Method::Closed => solve_linear_ne(&instance)?,
        Method::Iterative => solve_general_ne(&instance, &SolverConfig::default())?,
        Method::Auto if instance.is_all_linear() => solve_linear_ne(&instance)?,
        Method::Auto => solve_general_ne(&instance, &SolverConfig::default())?,
    };
    let measures = compute_measures(&instance, &result.profile)?;
    let order = instance.input_order();
    let output = SolveOutput {
        method: result.method,
        iterations: result.iterations,
        degenerate: result.degenerate,
        agent_order: order,
        valuation_scale: instance.valuation_scale(),
        rates: result.rates(),
        shares: result.profile.shares(),
        participating: result
            .participating_benign
            .iter()
            .map(|&i| order[i - 1])
            .collect(),
        malicious_active: result.malicious_active,
        residuals: &result.foc_residuals,
        max_kkt_violation: result.max_kkt_violation(&instance),
        profile: &result.profile,
        measures_input_units: measures.scaled(instance.valuation_scale()),
        measures,
    };
    let json = serde_json::to_string_pretty(&output).expect("solve output serializes");
    match json_out {
        Some(path) => fs::write(path, json + "\n").map_err(|e| io_failure(path, e)),
        None => emit(|w| writeln!(w, "{json}")),
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("theta grid '{spec}' is not start:stop:step")))?;
    let [start, stop, step] = parts[..] else {
        return Err(Failure::Usage(format!(
            "theta grid '{spec}' is not start:stop:step"
        )));
    };
    let config = SweepConfig {
        theta_start: start,
        theta_stop: stop,
        theta_step: step,
        ..SweepConfig::linear(1, 0.0, 1.0, 1, 0)
    };
    config.validate()?;
    Ok(config.theta_grid())
}

fn bounds(n: usize, theta: Option<f64>, grid: Option<&str>) -> Result<(), Failure> {
    let thetas = match (theta, grid) {
        (Some(t), _) => vec![t],
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => return Err(Failure::Usage("give --theta or --theta-grid".into())),
    };
    let rows: Vec<String> = thetas
        .iter()
        .map(|&t| BoundReport::new(n, t).map(|r| r.csv_row()))
        .collect::<Result<_, _>>()?;
    emit(|w| {
        writeln!(w, "{BOUND_CSV_HEADER}")?;
        rows.iter().try_for_each(|row| writeln!(w, "{row}"))
    })
}

fn write_sweep(config: &SweepConfig, out: Option<&Path>) -> Result<usize, Failure> {
    let output = run_sweep(config)?;
    let summary = serde_json::to_string_pretty(&serde_json::json!({
        "config": config,
        "summary": &output.summary,
    }))
    .expect("summary serializes");
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
            let mut w = std::io::BufWriter::new(file);
            output
                .write_csv(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| io_failure(path, e))?;
            let meta = path.with_extension("meta.json");
            fs::write(&meta, summary + "\n").map_err(|e| io_failure(&meta, e))?;
        }
        None => {
            emit(|w| output.write_csv(w))?;
            eprintln!("{summary}");
        }
    }
    let s = &output.summary;
    if s.nonconverged > 0 {
        eprintln!(
            "warning: {} records did not converge and were excluded",
            s.nonconverged
        );
    }
    if s.advisory_violations > 0 {
        eprintln!(
            "note: {} records exceed the advisory B2 upper bound",
            s.advisory_violations
        );
    }
    Ok(s.total_violations())
}

fn sweep(config_path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let text = fs::read_to_string(config_path).map_err(|e| io_failure(config_path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let config: SweepConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        Failure::Usage(format!(
            "malformed sweep config at '{}': {}",
            e.path(),
            e.inner()
        ))
    })?;
    let out = out.map(Path::to_path_buf).or_else(|| config.output.clone());
    match write_sweep(&config, out.as_deref())? {
        0 => Ok(()),
        v => Err(Failure::Check(format!("{v} bound violations"))),
    }
}

fn run_verify() -> Result<(), Failure> {
    let outcomes = verify::run_all();
    emit(|w| outcomes.iter().try_for_each(|o| writeln!(w, "{o}")))?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} checks failed")))
    }
}

fn figures_data(figure: u8, out_dir: &Path, instances: usize, seed: u64) -> Result<(), Failure> {
    if !figures::FIGURES.contains(&figure) {
        return Err(Failure::Usage(format!(
            "figure must be in 2..=13, got {figure}"
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| io_failure(out_dir, e))?;
    let csv_path = out_dir.join(format!("fig{figure}.csv"));
    let config_path = out_dir.join(format!("fig{figure}.config.json"));
    match figures::sweep_config(figure, instances, seed) {
        Some(mut config) => {
            config.output = Some(csv_path.clone());
            let meta = serde_json::json!({ "figure": figure, "ratios": figures::ratio_columns(figure), "sweep": &config });
            fs::write(
                &config_path,
                serde_json::to_string_pretty(&meta).expect("config serializes") + "\n",
            )
            .map_err(|e| io_failure(&config_path, e))?;
            match write_sweep(&config, Some(&csv_path))? {
                0 => {}
                v => return Err(Failure::Check(format!("{v} bound violations"))),
            }
        }
        None => {
            let meta = serde_json::json!({
                "figure": figure,
                "n": figures::HOMOGENEOUS_N,
                "theta": figures::HOMOGENEOUS_THETA,
                "targeted": [1, figures::HOMOGENEOUS_N],
                "valuations": "all 1",
            });
            fs::write(
                &config_path,
                serde_json::to_string_pretty(&meta).expect("config serializes") + "\n",
            )
            .map_err(|e| io_failure(&config_path, e))?;
            fs::write(&csv_path, figures::homogeneous_csv()?)
                .map_err(|e| io_failure(&csv_path, e))?;
        }
    }
    emit(|w| writeln!(w, "{}", csv_path.display()))
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value.parse().map_err(|_| {
            Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got '{value}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Solve {
            file,
            method,
            json_out,
        } => solve(file, *method, json_out.as_deref()),
        Command::Bounds {
            n,
            theta,
            theta_grid,
        } => bounds(*n, *theta, theta_grid.as_deref()),
        Command::Sweep { config, out } => sweep(config, out.as_deref()),
        Command::Verify => run_verify(),
        Command::FiguresData {
            figure,
            out_dir,
            instances,
            seed,
        } => figures_data(*figure, out_dir, *instances, *seed),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
