//! Command-line front end. `run_with_io` is the testable entry point.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::catalog;
use crate::coefficients::normalization::NormalizationSummary;
use crate::coefficients::normalize;
use crate::config::{self, ProblemConfig};
use crate::error::{Error, Result};
use crate::problem::TransportProblem;
use crate::simulator::{self, SimulationSettings, Trajectory};
use crate::spectral::{self, CharacteristicEvaluator, Region};
use crate::wellposedness::rt0::Rt0Summary;
use crate::wellposedness::{check_semigroup, discretize_rt0, WellPosednessReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_WELL_POSED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "graph-transport", version, about = "Well-posedness checks and simulation of transport on metric graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Problem file (JSON)
    #[arg(long, conflicts_with = "example")]
    pub config: Option<PathBuf>,
    /// Built-in example name
    #[arg(long)]
    pub example: Option<String>,
    /// Output directory for result files
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative tolerance for rank decisions
    #[arg(long, default_value_t = crate::linalg::DEFAULT_RANK_TOL)]
    pub tol: f64,
    /// Exponent p of the state space L^p
    #[arg(long)]
    pub p: Option<f64>,
    /// Reject disconnected graphs and degree-one vertices
    #[arg(long)]
    pub strict_graph: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Semigroup and group verdicts
    Check {
        #[command(flatten)]
        src: Source,
        /// Print the JSON report instead of text
        #[arg(long)]
        json: bool,
    },
    /// Method-of-characteristics simulation
    Simulate {
        #[command(flatten)]
        src: Source,
        /// Final time
        #[arg(long)]
        t_end: Option<f64>,
        /// Time step, at most 0.25 / max normalized speed
        #[arg(long)]
        dt: Option<f64>,
        /// Cells per unit length
        #[arg(long)]
        ns: Option<usize>,
        /// Truncation of external edges in normalized coordinates
        #[arg(long)]
        r_max: Option<f64>,
        /// Store a frame every this many steps
        #[arg(long)]
        output_every: Option<usize>,
    },
    /// Scan |det(Phi L_lambda)| on a rectangle and refine its zeros
    Spectrum {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        re_min: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        re_max: f64,
        #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
        im_min: f64,
        #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
        im_max: f64,
        #[arg(long, default_value_t = 81)]
        grid: usize,
    },
    /// Normalized speeds and reparametrization tables
    Normalize {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Smallest singular value of the discretized input-output operator
    Rt0 {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Print the config of a built-in example
    Example {
        name: String,
        /// Write to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

struct Loaded {
    problem: TransportProblem,
    config: ProblemConfig,
    base: PathBuf,
}

fn load(src: &Source) -> Result<Loaded> {
    let (mut cfg, base) = match (&src.config, &src.example) {
        (Some(path), _) => (ProblemConfig::load(path)?, config::base_dir(path)),
        (None, Some(name)) => {
            let mut cfg = ProblemConfig::from_problem(&catalog::by_name(name)?);
            cfg.name = Some(name.clone());
            (cfg, PathBuf::from("."))
        }
        (None, None) => return Err(Error::Config("one of --config or --example is required".into())),
    };
    if src.strict_graph {
        cfg.graph.strict = true;
    }
    if let Some(p) = src.p {
        cfg.p = p;
    }
    let problem = cfg.to_problem(&base)?;
    Ok(Loaded {
        problem,
        config: cfg,
        base,
    })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn report_text(r: &WellPosednessReport, warnings: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "edges: {} external, {} internal", r.ell, r.m);
    let _ = writeln!(s, "boundary dimension: {}", r.boundary_dim);
    let _ = writeln!(s, "sigma_min(R0) = {:.6e}  (||R0|| = {:.6e}, tol = {:e})", r.sigma_min, r.r0_norm, r.tolerance);
    let _ = writeln!(s, "semigroup: {:?}", r.verdict_semigroup);
    let _ = writeln!(s, "group: {:?}", r.verdict_group);
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    for w in warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,edge,s,value\n");
    for f in &traj.frames {
        for p in &f.profiles {
            for (x, v) in p.grid.iter().zip(&p.values) {
                let _ = writeln!(s, "{},{},{},{}", f.t, p.edge, x, v);
            }
        }
    }
    s
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    settings: &'a SimulationSettings,
    mass: Vec<(f64, f64)>,
    max_flux_residual: Vec<(f64, f64)>,
    flux_balance_final: &'a [(String, f64)],
    max_boundary_residual: f64,
}

fn simulate(
    loaded: &Loaded,
    tol: f64,
    t_end: Option<f64>,
    dt: Option<f64>,
    ns: Option<usize>,
    r_max: Option<f64>,
    output_every: Option<usize>,
) -> Result<(Trajectory, SimulationSettings)> {
    let p = &loaded.problem;
    let spec = loaded.config.simulation.clone();
    let n_s = ns.or(spec.as_ref().map(|s| s.n_s)).unwrap_or(64);
    let t_end = t_end.or(spec.as_ref().map(|s| s.t_end)).unwrap_or(1.0);
    let dt = match dt.or(spec.as_ref().and_then(|s| s.dt)) {
        Some(dt) => dt,
        None => config::default_dt(p, n_s)?,
    };
    let mut settings = SimulationSettings::new(t_end, dt, n_s);
    settings.tol = tol;
    settings.r_max = r_max.or(spec.as_ref().and_then(|s| s.r_max));
    settings.output_every = match output_every.or(spec.as_ref().and_then(|s| s.output_every)) {
        Some(k) => k,
        // at most about 100 frames
        None => (((t_end / dt).ceil() as usize) / 100).max(1),
    };
    // Gate on the verdict before touching initial data.
    let report = check_semigroup(p, settings.tol)?;
    if !report.verdict_semigroup.generates() {
        return Err(Error::NotWellPosed(format!(
            "semigroup verdict is {:?} (sigma_min(R0) = {:e})",
            report.verdict_semigroup, report.sigma_min
        )));
    }
    let initial = spec.map(|s| s.initial).unwrap_or_else(BTreeMap::new);
    let max_speed = p
        .external_velocities
        .iter()
        .map(|v| v.value(0.0).abs().max(v.value(f64::MAX).abs()))
        .fold(1.0, f64::max);
    let ext_len = settings.horizon() * max_speed;
    let f0 = config::initial_profiles(p, &initial, &config::default_initial(), n_s, ext_len, &loaded.base)?;
    Ok((simulator::solve(p, &f0, &settings)?, settings))
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: "<stdout>".into(),
        source: e,
    };
    match cli.command {
        Command::Check { src, json: as_json } => {
            let loaded = load(&src)?;
            let report = check_semigroup(&loaded.problem, src.tol)?;
            if as_json {
                writeln!(out, "{}", json(&report)).map_err(io)?;
            } else {
                write!(out, "{}", report_text(&report, &loaded.problem.graph.warnings)).map_err(io)?;
            }
            if let Some(dir) = &src.out {
                write_file(dir, "report.json", &json(&report))?;
            }
        }
        Command::Simulate {
            src,
            t_end,
            dt,
            ns,
            r_max,
            output_every,
        } => {
            let loaded = load(&src)?;
            let (traj, settings) = simulate(&loaded, src.tol, t_end, dt, ns, r_max, output_every)?;
            let summary = SimulationSummary {
                settings: &settings,
                mass: traj.masses(),
                max_flux_residual: traj
                    .frames
                    .iter()
                    .map(|f| (f.t, f.flux_balance.iter().fold(0.0_f64, |a, (_, r)| a.max(r.abs()))))
                    .collect(),
                flux_balance_final: traj.frames.last().map_or(&[][..], |f| &f.flux_balance),
                max_boundary_residual: traj.max_boundary_residual,
            };
            let text = json(&summary);
            if let Some(dir) = &src.out {
                write_file(dir, "trajectory.csv", &trajectory_csv(&traj))?;
                write_file(dir, "summary.json", &text)?;
                writeln!(out, "wrote {} frames to {}", traj.frames.len(), dir.display()).map_err(io)?;
            } else {
                writeln!(out, "{text}").map_err(io)?;
            }
        }
        Command::Spectrum {
            src,
            re_min,
            re_max,
            im_min,
            im_max,
            grid,
        } => {
            let loaded = load(&src)?;
            let ev = CharacteristicEvaluator::new(&loaded.problem)?;
            let scan = spectral::spectrum_scan(
                &ev,
                Region {
                    re: (re_min, re_max),
                    im: (im_min, im_max),
                },
                grid,
            );
            let mut csv = String::from("re,im,abs\n");
            for (re, im, a) in &scan.grid {
                let _ = writeln!(csv, "{re},{im},{a}");
            }
            let mut zeros = String::from("re,im,residual\n");
            for z in &scan.zeros {
                let _ = writeln!(zeros, "{},{},{}", z.re, z.im, z.residual);
            }
            match &src.out {
                Some(dir) => {
                    write_file(dir, "spectrum.csv", &csv)?;
                    write_file(dir, "zeros.csv", &zeros)?;
                    if scan.identically_zero {
                        writeln!(out, "characteristic function vanishes on the whole grid").map_err(io)?;
                    }
                    write!(out, "{zeros}").map_err(io)?;
                }
                None => {
                    write!(out, "{csv}").map_err(io)?;
                    writeln!(out, "# zeros (identically_zero = {})", scan.identically_zero).map_err(io)?;
                    for z in &scan.zeros {
                        writeln!(out, "# {},{},{}", z.re, z.im, z.residual).map_err(io)?;
                    }
                }
            }
        }
        Command::Normalize { src, samples } => {
            let loaded = load(&src)?;
            let np = normalize(&loaded.problem)?;
            let text = json(&NormalizationSummary::new(&np, samples.max(2))?);
            writeln!(out, "{text}").map_err(io)?;
            if let Some(dir) = &src.out {
                write_file(dir, "normalized.json", &text)?;
            }
        }
        Command::Rt0 { src, t0, n } => {
            let loaded = load(&src)?;
            let r = discretize_rt0(&loaded.problem, t0, n)?;
            let text = json(&Rt0Summary::from(&r));
            writeln!(out, "{text}").map_err(io)?;
            if let Some(dir) = &src.out {
                write_file(dir, "rt0.json", &text)?;
            }
        }
        Command::Example { name, out: file } => {
            let mut cfg = ProblemConfig::from_problem(&catalog::by_name(&name)?);
            cfg.name = Some(name);
            let text = cfg.to_json();
            match file {
                Some(path) => {
                    std::fs::write(&path, format!("{text}\n")).map_err(|source| Error::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                }
                None => writeln!(out, "{text}").map_err(io)?,
            }
        }
    }
    Ok(())
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let report = ErrorReport {
                error: "usage",
                message: e.to_string().trim().to_string(),
            };
            let _ = writeln!(stderr, "{}", serde_json::to_string(&report).unwrap_or_default());
            return EXIT_CONFIG;
        }
    };
    let simulate = matches!(cli.command, Command::Simulate { .. });
    match dispatch(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let report = ErrorReport {
                error: e.kind(),
                message: e.to_string(),
            };
            let _ = writeln!(stderr, "{}", serde_json::to_string(&report).unwrap_or_default());
            if simulate && matches!(e, Error::NotWellPosed(_)) {
                EXIT_NOT_WELL_POSED
            } else {
                EXIT_CONFIG
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with_io(std::iter::once("graph-transport").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn check_kirchhoff_pumpkin() {
        let (code, out, _) = run(&["check", "--example", "pumpkin-kirchhoff"]);
        assert_eq!(code, 0);
        assert!(out.contains("semigroup: NotGenerator"), "{out}");
    }

    #[test]
    fn simulate_kirchhoff_pumpkin_is_refused() {
        let (code, _, err) = run(&["simulate", "--example", "pumpkin-kirchhoff"]);
        assert_eq!(code, 3);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "NotWellPosed");
    }

    #[test]
    fn check_star_json() {
        let (code, out, _) = run(&["check", "--example", "star", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict_semigroup"], "Generator");
    }

    #[test]
    fn config_errors_exit_2() {
        let (code, _, err) = run(&["check", "--config", "/nonexistent/file.json"]);
        assert_eq!(code, 2);
        assert!(err.contains("\"error\""));
        let (code, _, _) = run(&["check"]);
        assert_eq!(code, 2);
        let (code, _, _) = run(&["frobnicate"]);
        assert_eq!(code, 2);
        let (code, _, _) = run(&["example", "nope"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn example_then_check_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loop.json");
        let (code, _, _) = run(&["example", "loop-graph", "--out", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        let (code, out, _) = run(&["check", "--config", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.contains("semigroup: Generator"), "{out}");
    }

    #[test]
    fn simulate_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let (code, _, err) = run(&["simulate", "--example", "pumpkin-weighted", "--t-end", "1", "--ns", "16", "--out", d]);
        assert_eq!(code, 0, "{err}");
        let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        assert!(csv.starts_with("t,edge,s,value\n"));
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert!(summary["mass"].as_array().unwrap().len() > 1);
    }

    #[test]
    fn other_subcommands_run() {
        for args in [
            vec!["spectrum", "--example", "loop-graph", "--grid", "9"],
            vec!["normalize", "--example", "loop"],
            vec!["rt0", "--example", "pumpkin-weighted", "--n", "8"],
        ] {
            let (code, out, err) = run(&args);
            assert_eq!(code, 0, "{args:?}: {err}");
            assert!(!out.is_empty());
        }
    }
}
