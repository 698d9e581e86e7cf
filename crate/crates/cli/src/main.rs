//! Command-line front end: analyze networks, simulate trajectories, render
//! phase portraits, scan parameter grids and hunt limit cycles.
//!
//! Exit codes: 0 success, 2 parse/usage error, 3 no positive equilibrium,
//! 4 integration failure.

mod report;
mod scan;
mod svg;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crn_planar::dynamics::{
    find_limit_cycles, integrate, CycleSearchOptions, IntegrateOptions, PoincareSection,
    ReturnOptions,
};
use crn_planar::equilibrium::{solve_equilibrium, SolveOptions};
use crn_planar::families;
use crn_planar::network::{parse_network, ReactionNetwork};

#[derive(Parser)]
#[command(
    name = "crn-planar",
    version,
    about = "Structural, local and global analysis of planar mass-action reaction networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct NetworkArgs {
    /// Network file (`a b -> a' b' @ kappa` per line).
    file: PathBuf,
    /// Positional rate-constant overrides, comma separated.
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Full structural / equilibrium / local / global report.
    Analyze {
        #[command(flatten)]
        net: NetworkArgs,
        /// Number of focal values to compute at a weak focus (1..=4).
        #[arg(long, default_value_t = 4)]
        focal_depth: usize,
        /// Emit the canonical JSON report instead of text.
        #[arg(long)]
        json: bool,
        /// Move the rate constants to the family's critical point first.
        #[arg(long)]
        at_critical: bool,
    },
    /// Integrate one trajectory and emit CSV (`t,x,y`).
    Simulate {
        #[command(flatten)]
        net: NetworkArgs,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        y0: f64,
        /// Integration time.
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render an SVG phase portrait from a grid of starting points.
    Portrait {
        #[command(flatten)]
        net: NetworkArgs,
        /// x-range `lo:hi`.
        #[arg(long)]
        xrange: String,
        /// y-range `lo:hi`.
        #[arg(long)]
        yrange: String,
        /// Starts per axis (0 renders axes and equilibrium only).
        #[arg(long, default_value_t = 4)]
        grid: usize,
        /// Integration time per start.
        #[arg(long, default_value_t = 40.0)]
        t: f64,
        /// Logarithmic axes.
        #[arg(long)]
        log_axes: bool,
        /// Draw the Poincare section ray.
        #[arg(long)]
        section: bool,
        /// Output SVG file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Scan a parameter grid and track local quantities as CSV.
    Scan {
        /// Network file; rate constants scan as `kappa1..kappaN`.
        file: Option<PathBuf>,
        /// Built-in family: quadrangle32, chain41, three51 or zigzag.
        #[arg(long)]
        family: Option<String>,
        /// Scan ranges `name=lo:hi:n` (up to two).
        #[arg(long = "param")]
        params: Vec<String>,
        /// Fixed parameter values `name=value`.
        #[arg(long = "set")]
        sets: Vec<String>,
        /// Quantities to track: trace, det, L1..L4, x, y.
        #[arg(long, value_delimiter = ',', default_value = "trace")]
        track: Vec<String>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect limit cycles through Poincare return maps; emits JSON.
    Cycles {
        #[command(flatten)]
        net: NetworkArgs,
        /// Section offset range `lo:hi` (auto-probed when omitted).
        #[arg(long)]
        section_range: Option<String>,
        /// Time budget per return.
        #[arg(long, default_value_t = 1e4)]
        budget: f64,
        /// Number of displacement samples.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
    fn no_equilibrium(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
    fn integration(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }
}

fn load_network(args: &NetworkArgs) -> Result<ReactionNetwork, CliError> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| CliError::parse(format!("{}: {e}", args.file.display())))?;
    let net = parse_network(&text).map_err(|e| CliError::parse(e.to_string()))?;
    if args.kappa.is_empty() {
        Ok(net)
    } else {
        net.with_rate_constants(&args.kappa)
            .map_err(|e| CliError::parse(e.to_string()))
    }
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::parse(format!("range `{s}` must be lo:hi")))?;
    let lo: f64 = lo
        .parse()
        .map_err(|_| CliError::parse(format!("bad range endpoint `{lo}`")))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| CliError::parse(format!("bad range endpoint `{hi}`")))?;
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(CliError::parse(format!("range `{s}` must have lo < hi")));
    }
    Ok((lo, hi))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze {
            net,
            focal_depth,
            json,
            at_critical,
        } => {
            let mut network = load_network(&net)?;
            if at_critical {
                network = families::to_critical(&network).map_err(CliError::parse)?;
            }
            let report = report::build_report(&network, focal_depth.clamp(1, 4));
            let rendered = if json {
                report.to_json()
            } else {
                report.to_text()
            };
            println!("{rendered}");
            if !report.equilibrium_exists() {
                return Err(CliError::no_equilibrium("no positive equilibrium"));
            }
            Ok(())
        }
        Command::Simulate {
            net,
            x0,
            y0,
            t,
            rtol,
            atol,
            out,
        } => {
            let network = load_network(&net)?;
            if !(x0 > 0.0 && y0 > 0.0) {
                return Err(CliError::integration(
                    "start point must lie in the open positive quadrant",
                ));
            }
            let opts = IntegrateOptions {
                rtol,
                atol,
                ..Default::default()
            };
            let traj = integrate(&network.vector_field(), (x0, y0), t, &opts);
            if traj.times.len() < 2 && t > 0.0 {
                return Err(CliError::integration("integration failed at the start"));
            }
            eprintln!("stopped: {:?}", traj.flag);
            write_output(&out, &traj.to_csv())
        }
        Command::Portrait {
            net,
            xrange,
            yrange,
            grid,
            t,
            log_axes,
            section,
            out,
        } => {
            let network = load_network(&net)?;
            let xr = parse_range(&xrange)?;
            let yr = parse_range(&yrange)?;
            if !(xr.0 > 0.0 && yr.0 > 0.0) {
                return Err(CliError::parse("ranges must be positive"));
            }
            let eq = solve_equilibrium(&network, &SolveOptions::default()).ok();
            let rendered = svg::render_portrait(&svg::PortraitSpec {
                field: network.vector_field(),
                xrange: xr,
                yrange: yr,
                grid,
                t,
                log_axes,
                equilibrium: eq.map(|e| (e.x, e.y)),
                section: section && eq.is_some(),
            });
            std::fs::write(&out, &rendered.svg)
                .map_err(|e| CliError::parse(format!("{}: {e}", out.display())))?;
            if rendered.failures > 0 {
                return Err(CliError::integration(format!(
                    "{} integrations failed; partial portrait written",
                    rendered.failures
                )));
            }
            Ok(())
        }
        Command::Scan {
            file,
            family,
            params,
            sets,
            track,
            out,
        } => {
            let csv = scan::run_scan(scan::ScanSpec {
                file,
                family,
                params,
                sets,
                track,
            })
            .map_err(CliError::parse)?;
            write_output(&out, &csv)
        }
        Command::Cycles {
            net,
            section_range,
            budget,
            grid,
            out,
        } => {
            let network = load_network(&net)?;
            let eq = solve_equilibrium(&network, &SolveOptions::default())
                .map_err(|e| CliError::no_equilibrium(e.to_string()))?;
            let mut sec = PoincareSection::horizontal((eq.x, eq.y));
            if let Some(range) = &section_range {
                sec.s_range = Some(parse_range(range)?);
            }
            let opts = CycleSearchOptions {
                grid_n: grid,
                ret: ReturnOptions {
                    t_budget: budget,
                    ..Default::default()
                },
                ..Default::default()
            };
            let report = find_limit_cycles(&network.vector_field(), &sec, &opts);
            write_output(&out, &(report.to_json() + "\n"))
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ParsedAssign {
    pub name: String,
    pub value: f64,
}

pub(crate) fn parse_assign(s: &str) -> Result<ParsedAssign, String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` must be name=value"))?;
    let value: f64 = value.parse().map_err(|_| format!("bad value in `{s}`"))?;
    Ok(ParsedAssign {
        name: name.to_string(),
        value,
    })
}

pub(crate) fn collect_sets(sets: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut map = BTreeMap::new();
    for s in sets {
        let a = parse_assign(s)?;
        map.insert(a.name, a.value);
    }
    Ok(map)
}
