//! Command-line runner: verification suites, orbit and flux scans, and the
//! aggregated machine-readable report.
//!
//! Exit codes: 0 all checks passed, 1 a check failed (or a numerical run
//! aborted), 2 usage or configuration error.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{parse_f64_list, parse_grid, parse_interval, FileConfig};
use orbitflux::chains;
use orbitflux::flow::IntegratorConfig;
use orbitflux::sampling;
use orbitflux::thurston;
use orbitflux::verify::{self, CheckResult};
use orbitflux::wadsley::sphere;
use orbitflux::SplitMix64;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "orbitflux",
    version,
    about = "Numerical experiments on flows with all orbits closed: identity suites, \
             orbit-length blow-up scans, tangent-cylinder fluxes and circle-action \
             metric averaging."
)]
struct Cli {
    /// Flat key=value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Override the pinned tolerance(s) of this command's checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Sample count for randomized checks.
    #[arg(long)]
    samples: Option<usize>,
    /// Seed of the portable splitmix64 sample stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Write results to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for --out.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise identities of the flow plus the exterior-calculus law suites.
    FormsVerify {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Pushforward/pullback residuals over a cube of lattice elements.
    DescentVerify {
        #[command(flatten)]
        common: CommonOpts,
        /// Half-width of the lattice cube (elements with |a|,|b|,|c| <= this).
        #[arg(long, allow_hyphen_values = true)]
        gamma_max: Option<i64>,
        /// Replace the flow field by a non-invariant control field.
        #[arg(long)]
        broken_field: bool,
    },
    /// Periods and frame-metric lengths of closed orbits across latitudes.
    OrbitScan {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated latitudes, e.g. "0.5,0.25,0.1,0.05".
        #[arg(long)]
        u_values: Option<String>,
        /// Base point coordinates of every orbit.
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        y0: Option<f64>,
        #[arg(long)]
        z0: Option<f64>,
        #[arg(long)]
        t0: Option<f64>,
        /// Detection gives up past this flow time.
        #[arg(long)]
        max_time: Option<f64>,
        /// Allow latitudes inside the excluded band around u ≡ 0 mod π.
        #[arg(long)]
        allow_bad_set: bool,
    },
    /// Moving-leaf cylinder flux, Stokes residual and normalized-flux law.
    FluxScan {
        #[command(flatten)]
        common: CommonOpts,
        /// Family interval "start,end" in the latitude parameter.
        #[arg(long)]
        s_interval: Option<String>,
        /// Mesh resolution "NSxNT", e.g. "192x64".
        #[arg(long)]
        grid: Option<String>,
        /// Repeat on a mesh with both steps halved (convergence order).
        #[arg(long)]
        refine: bool,
        #[arg(long)]
        max_time: Option<f64>,
    },
    /// Necessary conditions for a strongly adapted one-form.
    AdaptedCheck {
        #[command(flatten)]
        common: CommonOpts,
        /// Which form(s) to probe.
        #[arg(long, value_enum, default_value = "both")]
        form: ProbeTarget,
        /// Exit 1 when a probed form fails a condition (default: report only).
        #[arg(long)]
        as_gate: bool,
    },
    /// Averaging pipeline on the three-sphere: average, normalize, dual
    /// form, Euler metric, curl, Beltrami residual.
    WadsleyDemo {
        #[command(flatten)]
        common: CommonOpts,
        /// Quadrature nodes of the Haar average (minimum 8).
        #[arg(long)]
        quad_nodes: Option<usize>,
    },
    /// Run every suite and aggregate one JSON document keyed by check id.
    Report {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        quad_nodes: Option<usize>,
        #[arg(long)]
        max_time: Option<f64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProbeTarget {
    Beta,
    Hopf,
    Both,
}

/// Failures that map to specific exit codes.
enum Failure {
    /// Usage or configuration problem (exit 2).
    Usage(String),
    /// A numerical run aborted (exit 1).
    Run(String),
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<orbitflux::Error> for Failure {
    fn from(e: orbitflux::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        },
        None => FileConfig::default(),
    };
    match run(cli.command, &file) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

struct Resolved {
    tol: Option<f64>,
    samples: Option<usize>,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
}

fn resolve_common(common: &CommonOpts, file: &FileConfig) -> Result<Resolved, Failure> {
    let tol = match common.tol {
        Some(t) => Some(t),
        None => file.get::<f64>("tol")?,
    };
    let samples = match common.samples {
        Some(s) => Some(s),
        None => file.get::<usize>("samples")?,
    };
    let seed = match common.seed {
        Some(s) => s,
        None => file.get::<u64>("seed")?.unwrap_or(DEFAULT_SEED),
    };
    let out = common
        .out
        .clone()
        .or_else(|| file.get_string("out").map(PathBuf::from));
    let format = match common.format {
        Some(f) => Some(f),
        None => match file.get_string("format").as_deref() {
            Some("csv") => Some(OutputFormat::Csv),
            Some("json") => Some(OutputFormat::Json),
            Some(other) => {
                return Err(Failure::Usage(format!(
                    "unknown format '{other}' in config"
                )))
            }
            None => None,
        },
    };
    Ok(Resolved {
        tol,
        samples,
        seed,
        out,
        format,
    })
}

fn integrator_config(max_time: Option<f64>) -> IntegratorConfig {
    IntegratorConfig {
        max_time: max_time.unwrap_or(IntegratorConfig::default().max_time),
        ..Default::default()
    }
}

fn write_checks(resolved: &Resolved, checks: &[CheckResult]) -> Result<(), Failure> {
    if let Some(path) = &resolved.out {
        let content = match resolved.format.unwrap_or(OutputFormat::Json) {
            OutputFormat::Csv => output::checks_csv(checks),
            OutputFormat::Json => output::checks_json(resolved.seed, checks),
        };
        output::write_file(path, &content).map_err(Failure::Run)?;
    }
    Ok(())
}

fn summarize(checks: &[CheckResult]) -> bool {
    output::print_checks(checks);
    let ok = verify::all_pass(checks);
    println!(
        "{}: {} of {} checks passed",
        if ok { "PASS" } else { "FAIL" },
        checks.iter().filter(|c| c.pass).count(),
        checks.len()
    );
    ok
}

fn run(command: Command, file: &FileConfig) -> Result<bool, Failure> {
    match command {
        Command::FormsVerify { common } => {
            let r = resolve_common(&common, file)?;
            let pairing_samples = r.samples.unwrap_or(10_000);
            let coeff_samples = (pairing_samples / 10).max(100);
            let mut checks = verify::identity_suite(r.seed, pairing_samples, coeff_samples, r.tol)?;
            checks.extend(verify::property_suite(r.seed.wrapping_add(1), r.tol)?);
            write_checks(&r, &checks)?;
            Ok(summarize(&checks))
        }

        Command::DescentVerify {
            common,
            gamma_max,
            broken_field,
        } => {
            let r = resolve_common(&common, file)?;
            let gamma_max = match gamma_max {
                Some(g) => g,
                None => file.get::<i64>("gamma-max")?.unwrap_or(2),
            };
            if gamma_max < 0 {
                return Err(Failure::Usage(format!(
                    "gamma range is empty (gamma-max = {gamma_max})"
                )));
            }
            let broken = broken_field || file.get_bool("broken-field")?;
            let samples = r.samples.unwrap_or(100);
            let tol = r.tol.unwrap_or(1e-12);
            let checks = verify::descent_suite(r.seed, gamma_max, samples, tol, broken)?;
            write_checks(&r, &checks)?;
            Ok(summarize(&checks))
        }

        Command::OrbitScan {
            common,
            u_values,
            x0,
            y0,
            z0,
            t0,
            max_time,
            allow_bad_set,
        } => {
            let r = resolve_common(&common, file)?;
            let list_text = u_values
                .or_else(|| file.get_string("u-values"))
                .unwrap_or_else(|| "0.5,0.25,0.1,0.05".to_string());
            let u_list = parse_f64_list(&list_text)?;
            let allow = allow_bad_set || file.get_bool("allow-bad-set")?;
            for &u in &u_list {
                let d = thurston::distance_to_bad_set(u);
                // u exactly on the bad set is the explicitly requested
                // special case (the field extends as -∂z there); values
                // merely near it are rejected without --allow-bad-set
                if d > 0.0 && d <= thurston::DEFAULT_BAD_BAND && !allow {
                    return Err(Failure::Usage(format!(
                        "u = {u} lies inside the excluded band around u ≡ 0 mod π \
                         (pass --allow-bad-set to scan it anyway)"
                    )));
                }
            }
            let base = (
                x0.or(file.get::<f64>("x0")?).unwrap_or(0.0),
                y0.or(file.get::<f64>("y0")?).unwrap_or(0.0),
                z0.or(file.get::<f64>("z0")?).unwrap_or(0.0),
                t0.or(file.get::<f64>("t0")?).unwrap_or(0.0),
            );
            let cfg = integrator_config(match max_time {
                Some(t) => Some(t),
                None => file.get::<f64>("max-time")?,
            });
            let rows = orbitflux::flow::orbit_scan(&u_list, base, &cfg)?;

            let mut checks = Vec::new();
            if !rows.is_empty() {
                let worst_residual = rows
                    .iter()
                    .map(|row| row.closure_residual)
                    .fold(0.0_f64, f64::max);
                checks.push(CheckResult::le(
                    "scan.closure-residual",
                    "max closure residual across the scanned orbits",
                    verify::anchors::W_PERIOD,
                    worst_residual,
                    r.tol.unwrap_or(cfg.close_tol),
                ));
                let worst_drift = rows.iter().map(|row| row.u_drift).fold(0.0_f64, f64::max);
                checks.push(CheckResult::le(
                    "scan.u-drift",
                    "max drift of the conserved latitude along the orbits",
                    verify::anchors::LARGE_PERIODS,
                    worst_drift,
                    1e-6,
                ));
            }
            let decreasing_in_range = u_list.windows(2).all(|w| w[1] < w[0])
                && u_list
                    .iter()
                    .all(|&u| u > 0.0 && u <= std::f64::consts::FRAC_PI_2);
            if decreasing_in_range && rows.len() >= 2 {
                let min_increment = rows
                    .windows(2)
                    .map(|w| w[1].length - w[0].length)
                    .fold(f64::INFINITY, f64::min);
                checks.push(CheckResult::gt(
                    "scan.monotone-lengths",
                    "min length increment along the decreasing latitude list",
                    verify::anchors::MONOTONE_LENGTHS,
                    min_increment,
                    0.0,
                ));
            }

            for row in &rows {
                println!(
                    "u = {:9.6}  T = {:14.8}  length = {:14.8}  closure = {:9.3e}  u-drift = {:9.3e}",
                    row.u, row.period, row.length, row.closure_residual, row.u_drift
                );
            }
            if let Some(path) = &r.out {
                let content = match r.format.unwrap_or(OutputFormat::Csv) {
                    OutputFormat::Csv => output::scan_csv(&rows),
                    OutputFormat::Json => output::scan_json(r.seed, &rows, &checks),
                };
                output::write_file(path, &content).map_err(Failure::Run)?;
            }
            Ok(summarize(&checks))
        }

        Command::FluxScan {
            common,
            s_interval,
            grid,
            refine,
            max_time,
        } => {
            let r = resolve_common(&common, file)?;
            let interval_text = s_interval
                .or_else(|| file.get_string("s-interval"))
                .unwrap_or_else(|| "0.5,0.05".to_string());
            let (s_start, s_end) = parse_interval(&interval_text)?;
            for s in [s_start, s_end] {
                if thurston::distance_to_bad_set(s) <= thurston::DEFAULT_BAD_BAND {
                    return Err(Failure::Usage(format!(
                        "family endpoint s = {s} lies inside the excluded band"
                    )));
                }
            }
            let grid_text = grid
                .or_else(|| file.get_string("grid"))
                .unwrap_or_else(|| "192x64".to_string());
            let (n_s, n_theta) = parse_grid(&grid_text)?;
            let degenerate = s_start == s_end;
            if !degenerate && (n_s < 2 || n_s % 2 != 0) {
                return Err(Failure::Usage(format!(
                    "grid lines must be even and at least 2, got {n_s}"
                )));
            }
            if n_theta < 8 || n_theta % 2 != 0 {
                return Err(Failure::Usage(format!(
                    "grid columns must be even and at least 8, got {n_theta}"
                )));
            }
            let do_refine = refine || file.get_bool("refine")?;
            let cfg = integrator_config(match max_time {
                Some(t) => Some(t),
                None => file.get::<f64>("max-time")?,
            });
            let suite = verify::flux_suite(s_start, s_end, n_s, n_theta, &cfg, do_refine, "scan")?;
            println!(
                "cylinder s ∈ [{s_start}, {s_end}], grid {n_s}×{n_theta}: \
                 flux {:.8}, boundary difference {:.8}, normalized flux {:.8} (n = {})",
                suite.report.flux,
                suite.report.boundary_end - suite.report.boundary_start,
                suite.report.normalized_flux,
                suite.report.normalization
            );
            if let Some(path) = &r.out {
                let content = match r.format.unwrap_or(OutputFormat::Json) {
                    OutputFormat::Json => output::flux_json(r.seed, &suite.report, &suite.checks),
                    // CSV output dumps the mesh for external plotting
                    OutputFormat::Csv => output::mesh_csv(&suite.mesh),
                };
                output::write_file(path, &content).map_err(Failure::Run)?;
            }
            Ok(summarize(&suite.checks))
        }

        Command::AdaptedCheck {
            common,
            form,
            as_gate,
        } => {
            let r = resolve_common(&common, file)?;
            let gate = as_gate || file.get_bool("as-gate")?;
            let samples = r.samples.unwrap_or(500);
            let tol = r.tol.unwrap_or(1e-8);
            let mut rng = SplitMix64::new(r.seed);
            let mut checks = Vec::new();
            let mut conditions_ok = true;

            if form != ProbeTarget::Hopf {
                let x = thurston::field_x();
                let beta = thurston::form_beta();
                let mut points = vec![orbitflux::ChartPoint::new(&[0.0, 0.0, 0.0, 0.0, 0.0])];
                points.extend((0..samples).map(|_| sampling::thurston_point(&mut rng)));
                let probe = chains::strongly_adapted_probe(&beta, &x, &points, tol)?;
                println!("probe: invariant one-form of the nilmanifold flow");
                println!(
                    "  (i)  positivity α(X) > 0:        {} (min = {:.6})",
                    if probe.positivity_ok {
                        "PASSED"
                    } else {
                        "FAILED"
                    },
                    probe.min_pairing
                );
                println!(
                    "  (ii) closedness of ι_X dα:       {} (max coefficient = {:.6})",
                    if probe.closedness_ok {
                        "PASSED"
                    } else {
                        "FAILED"
                    },
                    probe.max_closedness_coeff
                );
                println!("  note: {}", probe.note);
                conditions_ok &= probe.positivity_ok && probe.closedness_ok;
                checks.push(CheckResult::gt(
                    "probe.beta.positivity",
                    "min β(X) over quotient samples",
                    verify::anchors::ADAPTED,
                    probe.min_pairing,
                    0.0,
                ));
                checks.push(CheckResult::le(
                    "probe.beta.closedness",
                    "max coefficient of d(ι_X dβ) (necessary condition)",
                    verify::anchors::ADAPTED,
                    probe.max_closedness_coeff,
                    tol,
                ));
            }
            if form != ProbeTarget::Beta {
                let hopf = sphere::hopf_field();
                let alpha = sphere::hopf_dual_form();
                let points: Vec<orbitflux::ChartPoint> = (0..samples)
                    .map(|_| sampling::sphere_point(&mut rng))
                    .collect();
                let probe = chains::strongly_adapted_probe(&alpha, &hopf, &points, tol)?;
                println!("probe: contact form of the Hopf field");
                println!(
                    "  (i)  positivity α(X) > 0:        {} (min = {:.6})",
                    if probe.positivity_ok {
                        "PASSED"
                    } else {
                        "FAILED"
                    },
                    probe.min_pairing
                );
                println!(
                    "  (ii) closedness of ι_X dα:       {} (max coefficient = {:.3e})",
                    if probe.closedness_ok {
                        "PASSED"
                    } else {
                        "FAILED"
                    },
                    probe.max_closedness_coeff
                );
                println!("  note: {}", probe.note);
                conditions_ok &= probe.positivity_ok && probe.closedness_ok;
                checks.push(CheckResult::gt(
                    "probe.hopf.positivity",
                    "min α(X) for the Hopf contact form",
                    verify::anchors::ADAPTED,
                    probe.min_pairing,
                    0.0,
                ));
                checks.push(CheckResult::le(
                    "probe.hopf.closedness",
                    "max coefficient of d(ι_X dα) (necessary condition)",
                    verify::anchors::ADAPTED,
                    probe.max_closedness_coeff,
                    tol,
                ));
            }
            write_checks(&r, &checks)?;
            // report-only by default: the probe states verdicts, it does
            // not judge them
            Ok(if gate { conditions_ok } else { true })
        }

        Command::WadsleyDemo { common, quad_nodes } => {
            let r = resolve_common(&common, file)?;
            let nodes = match quad_nodes {
                Some(n) => n,
                None => file.get::<usize>("quad-nodes")?.unwrap_or(64),
            };
            if nodes < 8 {
                return Err(Failure::Usage(format!(
                    "the Haar average needs at least 8 quadrature nodes, got {nodes}"
                )));
            }
            let samples = r.samples.unwrap_or(100);
            let mut checks = verify::wadsley_pipeline_suite(r.seed, nodes, samples)?;
            checks.extend(verify::curl_suite(
                r.seed.wrapping_add(1),
                200,
                samples.min(100),
            )?);
            write_checks(&r, &checks)?;
            Ok(summarize(&checks))
        }

        Command::Report {
            common,
            quad_nodes,
            max_time,
        } => {
            let r = resolve_common(&common, file)?;
            let nodes = match quad_nodes {
                Some(n) => n,
                None => file.get::<usize>("quad-nodes")?.unwrap_or(64),
            };
            if nodes < 8 {
                return Err(Failure::Usage(format!(
                    "the Haar average needs at least 8 quadrature nodes, got {nodes}"
                )));
            }
            let cfg = integrator_config(match max_time {
                Some(t) => Some(t),
                None => file.get::<f64>("max-time")?,
            });
            let mut checks = Vec::new();
            checks.extend(verify::identity_suite(r.seed, 10_000, 1_000, None)?);
            checks.extend(verify::property_suite(r.seed.wrapping_add(1), None)?);
            checks.extend(verify::descent_suite(
                r.seed.wrapping_add(2),
                2,
                100,
                1e-12,
                false,
            )?);
            checks.extend(verify::period_suite(&cfg)?);
            checks.extend(verify::length_suite(&cfg)?.checks);
            checks.extend(verify::flux_suite(0.3, 0.5, 200, 400, &cfg, true, "shallow")?.checks);
            checks.extend(verify::flux_suite(0.5, 0.05, 256, 64, &cfg, false, "deep")?.checks);
            checks.extend(verify::adapted_suite(r.seed.wrapping_add(3), 1_000, 1e-8)?);
            checks.extend(verify::wadsley_pipeline_suite(
                r.seed.wrapping_add(4),
                nodes,
                100,
            )?);
            checks.extend(verify::curl_suite(r.seed.wrapping_add(5), 1_000, 100)?);
            checks.extend(verify::positivity_suite(&cfg)?);
            if let Some(path) = &r.out {
                output::write_file(path, &output::report_json(r.seed, &checks))
                    .map_err(Failure::Run)?;
            }
            Ok(summarize(&checks))
        }
    }
}
