//! Command-line front end (`hillc`).

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{device_performance, run_scan, topology_params, ScanRow, ScanSpec};
use crate::decomp_alt::{bfs_tree, kalpazidou, schnakenberg};
use crate::error::{Error, Result};
use crate::graph::{validate, Caps, LabeledGraph, Severity, Violation};
use crate::hill::decompose;
use crate::io::{
    alt_rows, circuit_csv, parse_caps, read_graph_file, read_scan_csv, scan_csv, write_atomic,
    AltRow, BathTotal, Check, RunConfig, ScanSummary, Totals,
};
use crate::models::{build_model_with, preset, Model, Preset};
use crate::par::{self, Execution};
use crate::steady::{
    edge_entropy, max_one_way_flux, physical_currents_direct, rounding_flux, steady_nullspace,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hillc",
    version,
    about = "Circuit decomposition of multilevel absorption machines"
)]
pub struct Cli {
    /// Run configuration / recipe file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel loops.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Enumeration caps, e.g. `trees=1000000,circuits=100000`.
    #[arg(long, global = true)]
    pub caps: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List structural and thermodynamic violations of a graph.
    Validate(Source),
    /// Hill decomposition with per-circuit CSV and totals JSON.
    Decompose(DecomposeArgs),
    /// Parameter scan over a model family.
    Scan(ScanArgs),
    /// Topological connectivity parameters.
    Topology(TopologyArgs),
    /// List model families and temperature presets.
    Models,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Graph file (TOML).
    #[arg(long, conflicts_with = "model")]
    pub graph: Option<PathBuf>,
    /// Model, e.g. `G4`, `G4B:4`, `C_3p2mh:2`.
    #[arg(long)]
    pub model: Option<String>,
    /// Temperature preset for models (fig4, fig5, fig6).
    #[arg(long)]
    pub preset: Option<String>,
    /// Temperature scale parameter of the preset.
    #[arg(long)]
    pub t: Option<f64>,
    /// Multiplies every rate.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: Source,
    /// Output directory for circuits.csv, totals.json and alt.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run the cross-decomposition equalities and fail on mismatch.
    #[arg(long)]
    pub check: bool,
    /// Also write the Schnakenberg decomposition over a spanning tree.
    #[arg(long)]
    pub schnakenberg: bool,
    /// Also write the Kalpazidou cycle peeling of the steady fluxes.
    #[arg(long)]
    pub kalpazidou: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Temperature preset (fig4, fig5, fig6).
    #[arg(long)]
    pub preset: Option<String>,
    /// Model family, e.g. `G4B:1`; the size comes from `--sizes`.
    #[arg(long)]
    pub model: Option<String>,
    /// Family sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Values of t, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Rate scale factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    /// Output directory; rows already present there are reused.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TopologyArgs {
    #[command(flatten)]
    pub source: Source,
    /// Circuit length L.
    #[arg(long, default_value_t = 3)]
    pub length: usize,
    /// Count only circuits contributing at the given point.
    #[arg(long)]
    pub contributing: bool,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a command: exit code plus text for stdout.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

#[derive(Serialize)]
struct ErrorMessage<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidGraph(_) | Error::Parse { .. } => EXIT_VALIDATION,
        Error::Config(_) | Error::InvalidParams(_) | Error::NoSuchVertex(_) | Error::Io(_) => {
            EXIT_USAGE
        }
        _ => EXIT_NUMERIC,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidGraph(_) => "invalid_graph",
        Error::InvalidParams(_) => "invalid_params",
        Error::CapExceeded { .. } => "cap_exceeded",
        Error::NoSuchVertex(_) => "no_such_vertex",
        Error::NotACircuit(_) => "not_a_circuit",
        Error::BlockedCycle { .. } => "blocked_cycle",
        Error::NotUseful(_) => "not_useful",
        Error::DegenerateKernel => "degenerate_kernel",
        Error::TooLarge { .. } => "too_large",
        Error::NonConvergence(_) => "non_convergence",
        Error::Singular(_) => "singular",
        Error::NonFinite(_) => "non_finite",
        Error::Parse { .. } => "parse",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
        Error::Json(_) => "json",
    }
}

/// One-line JSON error for stderr.
pub fn error_json(e: &Error) -> String {
    let msg = ErrorMessage {
        error: error_kind(e),
        exit_code: exit_code(e),
        message: e.to_string(),
    };
    serde_json::to_string(&msg).expect("error message serializes")
}

/// Parses arguments and runs; usage errors are returned as exit code 1.
pub fn run_from<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return if code == EXIT_OK {
                (code, e.to_string(), String::new())
            } else {
                (code, String::new(), e.to_string())
            };
        }
    };
    match run(&cli) {
        Ok(o) => (o.code, o.stdout, String::new()),
        Err(e) => (exit_code(&e), String::new(), error_json(&e) + "\n"),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::read(p)?,
        None => RunConfig {
            schema: crate::io::CONFIG_SCHEMA,
            ..RunConfig::default()
        },
    };
    let mut caps = cfg.caps();
    if let Some(c) = &cli.caps {
        caps = parse_caps(c, caps)?;
    }
    let jobs = cli.jobs.or(cfg.jobs);
    if jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let exec = if jobs == Some(1) {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let ctx = Context { cfg, caps, exec };
    par::with_jobs(jobs, || match &cli.command {
        Command::Validate(s) => cmd_validate(&ctx, s),
        Command::Decompose(a) => cmd_decompose(&ctx, a),
        Command::Scan(a) => cmd_scan(&ctx, a),
        Command::Topology(a) => cmd_topology(&ctx, a),
        Command::Models => Ok(Outcome {
            code: EXIT_OK,
            stdout: models_text(),
        }),
    })
}

struct Context {
    cfg: RunConfig,
    caps: Caps,
    exec: Execution,
}

struct Built {
    graph: LabeledGraph,
    warnings: Vec<Violation>,
    source: String,
}

impl Context {
    fn preset(&self, name: Option<&String>) -> Result<Preset> {
        let name = name
            .or(self.cfg.preset.as_ref())
            .map(String::as_str)
            .unwrap_or("fig5");
        preset(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown preset '{name}' (expected fig4, fig5 or fig6)"
            ))
        })
    }

    fn build(&self, s: &Source) -> Result<Built> {
        let opts = self.cfg.validation();
        let sigma = s.sigma.or(self.cfg.sigma).unwrap_or(1.0);
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!(
                "--sigma must be finite and > 0, got {sigma}"
            )));
        }
        let graph_path = s.graph.clone().or_else(|| {
            if s.model.is_some() {
                None
            } else {
                self.cfg.graph.clone()
            }
        });
        let (g, warnings, source) = if let Some(path) = graph_path {
            let spec = read_graph_file(&path)?;
            let (g, w) = LabeledGraph::build(&spec, &opts)?;
            (g, w, path.display().to_string())
        } else {
            let name = s
                .model
                .as_ref()
                .or(self.cfg.model.as_ref())
                .ok_or_else(|| Error::Config("give --graph or --model".into()))?;
            let model: Model = name.parse()?;
            let p = self.preset(s.preset.as_ref())?;
            let t = s.t.or(self.cfg.t).unwrap_or(1.0);
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!(
                    "--t must be finite and > 0, got {t}"
                )));
            }
            let baths = self
                .cfg
                .baths
                .clone()
                .unwrap_or_else(|| p.baths_for(&model, t));
            let (g, w) = build_model_with(&p.params(model), &baths, &opts)?;
            (g, w, format!("{model}@{}:t={t}", p.name))
        };
        Ok(Built {
            graph: if sigma == 1.0 { g } else { g.scaled(sigma) },
            warnings,
            source,
        })
    }
}

#[derive(Serialize)]
struct ValidationOutput {
    source: String,
    valid: bool,
    violations: Vec<Violation>,
}

fn cmd_validate(ctx: &Context, s: &Source) -> Result<Outcome> {
    let opts = ctx.cfg.validation();
    let (source, violations) = match s.graph.clone().or_else(|| ctx.cfg.graph.clone()) {
        Some(path) if s.model.is_none() => {
            let spec = read_graph_file(&path)?;
            (path.display().to_string(), validate(&spec, &opts))
        }
        _ => match ctx.build(s) {
            Ok(b) => (b.source, b.warnings),
            Err(Error::InvalidGraph(v)) => ("model".to_string(), v),
            Err(e) => return Err(e),
        },
    };
    let valid = !violations.iter().any(|v| v.severity == Severity::Error);
    let out = ValidationOutput {
        source,
        valid,
        violations,
    };
    Ok(Outcome {
        code: if valid { EXIT_OK } else { EXIT_VALIDATION },
        stdout: serde_json::to_string_pretty(&out)? + "\n",
    })
}

/// `|a − b| / scale`, or 0 when the difference is within `floor`.
fn rel_dev(a: f64, b: f64, scale: f64, floor: f64) -> f64 {
    let d = (a - b).abs();
    if d <= floor {
        0.0
    } else if scale > 0.0 {
        d / scale
    } else {
        f64::MAX
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn cmd_decompose(ctx: &Context, a: &DecomposeArgs) -> Result<Outcome> {
    let Built {
        graph: g,
        warnings,
        source,
    } = ctx.build(&a.source)?;
    let rep = decompose(&g, &ctx.caps, ctx.exec)?;
    let steady = steady_nullspace(&g)?;
    let direct = physical_currents_direct(&g, &steady.populations);
    let entropy_edges = edge_entropy(&g, &steady.populations);
    let perf = g
        .roles()
        .map(|_| device_performance(&g, &rep))
        .transpose()?;
    let schnak = (a.schnakenberg || a.check)
        .then(|| schnakenberg(&g, &bfs_tree(&g), &steady.populations))
        .transpose()?;
    let kalp = (a.kalpazidou || a.check).then(|| kalpazidou(&g, &steady.populations));

    let mut checks = Vec::new();
    if a.check {
        let tol = ctx.cfg.check_tolerance();
        let j0 = rounding_flux(&g, &steady.populations);
        let gap = g.edges().iter().map(|e| e.gap).fold(0.0, f64::max);
        let gross = max_one_way_flux(&g, &steady.populations);
        let (q0, s0) = (j0 * gap, if gross > 0.0 { j0 * j0 / gross } else { 0.0 });
        let qmax = rep
            .heat
            .iter()
            .chain(&direct)
            .fold(0.0f64, |m, q| m.max(q.abs()));
        let heat_dev = rep
            .heat
            .iter()
            .zip(&direct)
            .map(|(h, d)| rel_dev(*h, *d, qmax, q0))
            .fold(0.0, f64::max);
        checks.push(Check::new("heat_hill_vs_direct", heat_dev, tol));
        let smax = rep.entropy.abs().max(entropy_edges.abs());
        checks.push(Check::new(
            "entropy_hill_vs_edges",
            rel_dev(rep.entropy, entropy_edges, smax, s0),
            tol,
        ));
        if let Some(s) = &schnak {
            checks.push(Check::new(
                "entropy_hill_vs_schnakenberg",
                rel_dev(rep.entropy, s.entropy, smax, s0),
                tol,
            ));
        }
        if let Some(k) = &kalp {
            checks.push(Check::new(
                "entropy_hill_vs_kalpazidou",
                rel_dev(rep.entropy, k.entropy, smax, s0),
                tol,
            ));
        }
        let first_law = rep
            .circuits
            .iter()
            .map(|c| {
                let m = c.heat.iter().fold(0.0f64, |m, q| m.max(q.abs()));
                rel_dev(c.heat.iter().sum(), 0.0, m, 0.0)
            })
            .fold(0.0, f64::max);
        checks.push(Check::new("circuit_first_law", first_law, 1e-10));
        let worst = rep.circuits.iter().map(|c| -c.entropy).fold(0.0, f64::max);
        checks.push(Check::new("circuit_entropy_nonnegative", worst, 1e-14));
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    let totals = Totals {
        source,
        n: rep.n,
        u: rep.u,
        ln_d: rep.ln_d,
        baths: rep
            .bath_labels
            .iter()
            .enumerate()
            .map(|(b, l)| BathTotal {
                label: l.clone(),
                temperature: rep.temperatures[b],
                heat: rep.heat[b],
                heat_direct: direct[b],
            })
            .collect(),
        entropy: rep.entropy,
        entropy_edges,
        counts: rep.counts,
        mode: perf
            .as_ref()
            .and_then(|p| p.mode)
            .map(|m| m.as_str().to_string()),
        x: perf.as_ref().and_then(|p| p.x),
        performance: perf.as_ref().and_then(|p| p.value),
        eps_carnot: perf.as_ref().and_then(|p| finite(p.eps_carnot)),
        eta_carnot: perf.as_ref().and_then(|p| finite(p.eta_carnot)),
        eps_max: perf.as_ref().and_then(|p| p.eps_max),
        entropy_schnakenberg: schnak.as_ref().map(|s| s.entropy),
        entropy_kalpazidou: kalp.as_ref().map(|k| k.entropy),
        warnings,
        checks,
    };
    let json = totals.to_json()?;
    let mut stdout = json.clone();
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        circuit_csv(&mut buf, &rep)?;
        write_atomic(&dir.join("circuits.csv"), &buf)?;
        write_atomic(&dir.join("totals.json"), json.as_bytes())?;
        if a.schnakenberg || a.kalpazidou {
            let rows = alt_rows(
                schnak.as_ref().filter(|_| a.schnakenberg),
                kalp.as_ref().filter(|_| a.kalpazidou),
            );
            let mut buf = Vec::new();
            AltRow::write_csv(&mut buf, &rows)?;
            write_atomic(&dir.join("alt.csv"), &buf)?;
        }
        stdout = format!("wrote {}\n", dir.display());
    }
    if !failed.is_empty() {
        let _ = writeln!(stdout, "check failed: {}", failed.join(", "));
        return Ok(Outcome {
            code: EXIT_NUMERIC,
            stdout,
        });
    }
    Ok(Outcome {
        code: EXIT_OK,
        stdout,
    })
}

fn scan_jobs(ctx: &Context, a: &ScanArgs) -> Result<Vec<(String, ScanSpec)>> {
    if let Some(model) = a.model.clone() {
        let preset = a
            .preset
            .clone()
            .or_else(|| ctx.cfg.preset.clone())
            .unwrap_or_else(|| "fig5".into());
        let sigma = if a.sigma.is_empty() {
            vec![1.0]
        } else {
            a.sigma.clone()
        };
        return Ok(vec![(
            "scan".into(),
            ScanSpec {
                preset,
                model,
                sizes: a.sizes.clone(),
                t: a.t.clone(),
                sigma,
            },
        )]);
    }
    let scans = ctx.cfg.scans()?;
    if scans.is_empty() {
        return Err(Error::Config(
            "give --model or a --config recipe with [[scan]] tables".into(),
        ));
    }
    Ok(scans)
}

fn cmd_scan(ctx: &Context, a: &ScanArgs) -> Result<Outcome> {
    let jobs = scan_jobs(ctx, a)?;
    let out_dir = a.out.clone().or_else(|| ctx.cfg.out.clone());
    let mut stdout = String::new();
    let mut any_failed = false;
    for (name, spec) in &jobs {
        let points = spec.points()?;
        let csv_path = out_dir.as_ref().map(|d| d.join(format!("{name}.csv")));
        let previous: Vec<ScanRow> = match &csv_path {
            Some(p) if p.exists() => read_scan_csv(std::fs::File::open(p)?)?,
            _ => Vec::new(),
        };
        let reusable: Vec<ScanRow> = previous.into_iter().filter(|r| r.error.is_none()).collect();
        let skip: BTreeSet<String> = reusable.iter().map(|r| r.key.clone()).collect();
        let fresh = run_scan(spec, &ctx.caps, ctx.exec, &skip)?;
        let reused = points.iter().filter(|p| skip.contains(&p.key())).count();
        let mut old: BTreeMap<String, ScanRow> =
            reusable.into_iter().map(|r| (r.key.clone(), r)).collect();
        let mut fresh = fresh.into_iter();
        let rows: Vec<ScanRow> = points
            .iter()
            .map(|p| {
                old.remove(&p.key())
                    .unwrap_or_else(|| fresh.next().expect("a fresh row per new point"))
            })
            .collect();
        let failed = rows.iter().filter(|r| r.error.is_some()).count();
        any_failed |= failed > 0;
        let summary = ScanSummary {
            name: name.clone(),
            preset: spec.preset.clone(),
            model: spec.model.clone(),
            points: rows.len(),
            failed,
            reused,
            refrigerator: rows
                .iter()
                .filter(|r| r.mode.as_deref() == Some("refrigerator"))
                .count(),
            transformer: rows
                .iter()
                .filter(|r| r.mode.as_deref() == Some("transformer"))
                .count(),
        };
        let mut buf = Vec::new();
        scan_csv(&mut buf, &rows)?;
        match (&out_dir, &csv_path) {
            (Some(dir), Some(p)) => {
                std::fs::create_dir_all(dir)?;
                write_atomic(p, &buf)?;
                let json = serde_json::to_string_pretty(&summary)? + "\n";
                write_atomic(&dir.join(format!("{name}.json")), json.as_bytes())?;
                let _ = writeln!(
                    stdout,
                    "{name}: {} rows ({} reused, {} failed)",
                    rows.len(),
                    reused,
                    failed
                );
            }
            _ => stdout.push_str(&String::from_utf8(buf).expect("csv is utf-8")),
        }
    }
    Ok(Outcome {
        code: if any_failed { EXIT_NUMERIC } else { EXIT_OK },
        stdout,
    })
}

fn cmd_topology(ctx: &Context, a: &TopologyArgs) -> Result<Outcome> {
    let b = ctx.build(&a.source)?;
    let reference = if a.contributing {
        Some(decompose(&b.graph, &ctx.caps, ctx.exec)?)
    } else {
        None
    };
    let rep = topology_params(&b.graph, a.length, reference.as_ref(), &ctx.caps)?;
    let json = serde_json::to_string_pretty(&rep)? + "\n";
    if let Some(path) = &a.out {
        write_file(path, json.as_bytes())?;
        return Ok(Outcome {
            code: EXIT_OK,
            stdout: format!("wrote {}\n", path.display()),
        });
    }
    Ok(Outcome {
        code: EXIT_OK,
        stdout: json,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_atomic(path, bytes)
}

fn models_text() -> String {
    let mut s = String::from("models:\n");
    for (name, about) in Model::all_names() {
        let _ = writeln!(s, "  {name:<16} {about}");
    }
    s.push_str("presets:\n");
    for p in crate::models::figure_presets() {
        let [a, b, c] = p.t_factors;
        let tw = p.fixed_tw.map_or(format!("{c}t"), |v| format!("{v}"));
        let _ = writeln!(
            s,
            "  {:<6} d={} omega_c={} omega_h={} T_c={a}t T_h={b}t T_w={tw}",
            p.name, p.dimension, p.omega_c, p.omega_h
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(run_from(["hillc", "frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_from(["hillc", "models"]).0, EXIT_OK);
        let (code, _, err) = run_from(["hillc", "decompose", "--model", "G9"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("\"error\":\"invalid_params\""), "{err}");
    }

    #[test]
    fn decompose_prints_totals() {
        let (code, out, _) = run_from(["hillc", "decompose", "--model", "G4", "--check"]);
        assert_eq!(code, EXIT_OK, "{out}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["counts"]["total"], 3);
        assert!(v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .all(|c| c["pass"] == true));
    }
}
