//! Command-line front end. Every subcommand reads domain/polynomial spec
//! files, runs one library operation, and writes a single JSON or CSV
//! document embedding the config echo, tool version, and seed. Identical
//! invocations produce identical output bytes.
//!
//! Exit codes: 0 success, 2 parse/config errors, 3 precondition violations,
//! 4 budget exhaustion (with partial results when available).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kobalab::domain::{Domain, DomainSpec};
use kobalab::error::Error;
use kobalab::finite_type::{line_type, m_convexity_constant, LineType};
use kobalab::hausdorff::local_hausdorff;
use kobalab::hyperbolicity::{
    fat_triangle_witness, four_point_scan, BoundaryDiskWitness, SamplerSpec,
};
use kobalab::kobayashi::{distance_bracket, finsler_bracket, quasi_geodesic, verify_quasi_geodesic};
use kobalab::poly::PolySpec;
use kobalab::rescaling::{
    blowup_sequence, distance_continuity_check, ApproachSpec,
};
use kobalab::CVector64;

#[derive(Parser)]
#[command(name = "kobalab", version, about = "Kobayashi metric laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for every randomized scan in the invocation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Certified distance bracket between two points of a domain.
    Distance {
        #[arg(long)]
        domain: PathBuf,
        /// Point as a JSON array of [re, im] pairs.
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        /// Path-optimizer sweeps (0 = default).
        #[arg(long, default_value_t = 0)]
        budget: usize,
    },
    /// Two-sided infinitesimal metric bounds at (p; v).
    Finsler {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        p: String,
        #[arg(long)]
        v: String,
    },
    /// Quasi-geodesic certificate toward a boundary point, with verification.
    Geodesic {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        p: String,
        /// Boundary point.
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 0)]
        budget: usize,
    },
    /// Four-point hyperbolicity scan over boundary-approaching layers.
    Hyperbolicity {
        #[arg(long)]
        domain: PathBuf,
        /// Quadruple count.
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 4)]
        kmin: u32,
        #[arg(long, default_value_t = 12)]
        kmax: u32,
        #[arg(long, default_value_t = 0)]
        budget: usize,
    },
    /// Fat-triangle non-hyperbolicity witness near a boundary disk.
    Witness {
        #[arg(long)]
        domain: PathBuf,
        /// Interior basepoint.
        #[arg(long)]
        o: String,
        /// Point in the open boundary disk.
        #[arg(long)]
        x: String,
        /// Point on the edge of the boundary disk.
        #[arg(long)]
        y: String,
        /// Defect target M.
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 10)]
        doublings: usize,
        #[arg(long, default_value_t = 0)]
        budget: usize,
    },
    /// Local Hausdorff distance between two domains within B_R(0).
    Hausdorff {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
    },
    /// Affine blow-up trace toward a boundary point.
    Blowup {
        #[arg(long)]
        domain: PathBuf,
        /// Boundary point.
        #[arg(long)]
        xi: String,
        /// Interior approach direction.
        #[arg(long)]
        direction: String,
        #[arg(long, default_value_t = 0.5)]
        rate: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        /// Optional normalized target domain for Hausdorff monitoring.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Distance continuity along a domain sequence.
    Continuity {
        /// Comma-separated spec files, in sequence order.
        #[arg(long, value_delimiter = ',')]
        sequence: Vec<PathBuf>,
        #[arg(long)]
        limit: PathBuf,
        /// JSON array of [p, q] probe pairs.
        #[arg(long)]
        probes: String,
        #[arg(long, default_value_t = 0)]
        budget: usize,
    },
    /// Multi-type decomposition of a Hermitian polynomial.
    Multitype {
        #[arg(long)]
        poly: PathBuf,
    },
    /// Line type estimate at a boundary point.
    Linetype {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 16)]
        cap: u32,
    },
    /// m-convexity constant estimate.
    Mconvex {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
}

/// Failure carrying the exit code and optional partial results.
struct Failure {
    code: u8,
    message: String,
    partial: Option<Value>,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
            partial: None,
        }
    }
}

fn classify(err: &Error) -> u8 {
    match err {
        Error::NoBoundaryHit { .. }
        | Error::FrameSearchFailed { .. }
        | Error::FrameConditioning { .. }
        | Error::NoInteriorSample
        | Error::BlowupStep { .. } => 4,
        Error::BracketInversion { .. } | Error::FrameResidual { .. } => 1,
        _ => 3,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Self {
            code: classify(&err),
            message: err.to_string(),
            partial: None,
        }
    }
}

fn read_spec(path: &Path) -> Result<Domain<f64>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    let spec: DomainSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("bad domain spec {}: {e}", path.display())))?;
    Ok(spec.to_domain()?)
}

fn parse_point(text: &str, what: &str) -> Result<CVector64, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::parse(format!("bad point {what}: {e}")))
}

fn threads_from_env() -> usize {
    std::env::var("KOBALAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(1)
        .max(1)
}

/// One CSV row as ordered (column, value) pairs.
type Row = Vec<(String, String)>;

struct Output {
    command: &'static str,
    config: BTreeMap<String, String>,
    result: Value,
    rows: Vec<Row>,
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let seed = cli.seed;
    match &cli.command {
        Command::Distance { domain, p, q, budget } => {
            let dom = read_spec(domain)?;
            let p = parse_point(p, "--p")?;
            let q = parse_point(q, "--q")?;
            let bracket = distance_bracket(&dom, &p, &q, *budget)?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("p".into(), serde_json::to_string(&p).unwrap());
            config.insert("q".into(), serde_json::to_string(&q).unwrap());
            config.insert("budget".into(), budget.to_string());
            let (_, path) = kobalab::kobayashi::distance_upper(&dom, &p, &q, *budget)?;
            let result = json!({
                "lower": bracket.lower,
                "upper": bracket.upper,
                "methods": [bracket.lower_method, bracket.upper_method],
                "path": path.nodes,
            });
            let rows = vec![vec![
                ("lower".into(), bracket.lower.to_string()),
                ("upper".into(), bracket.upper.to_string()),
                ("lower_method".into(), format!("{:?}", bracket.lower_method)),
                ("upper_method".into(), format!("{:?}", bracket.upper_method)),
            ]];
            Ok(Output { command: "distance", config, result, rows })
        }
        Command::Finsler { domain, p, v } => {
            let dom = read_spec(domain)?;
            let p = parse_point(p, "--p")?;
            let v = parse_point(v, "--v")?;
            let b = finsler_bracket(&dom, &p, &v)?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("p".into(), serde_json::to_string(&p).unwrap());
            config.insert("v".into(), serde_json::to_string(&v).unwrap());
            let result = json!({"lower": b.lower, "upper": b.upper});
            let rows = vec![vec![
                ("lower".into(), b.lower.to_string()),
                ("upper".into(), b.upper.to_string()),
            ]];
            Ok(Output { command: "finsler", config, result, rows })
        }
        Command::Geodesic { domain, p, x, budget } => {
            let dom = read_spec(domain)?;
            let p = parse_point(p, "--p")?;
            let x = parse_point(x, "--x")?;
            let cert = quasi_geodesic(&dom, &p, &x)?;
            let verification = verify_quasi_geodesic(&dom, &cert, *budget)?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("p".into(), serde_json::to_string(&p).unwrap());
            config.insert("x".into(), serde_json::to_string(&x).unwrap());
            config.insert("budget".into(), budget.to_string());
            let rows = verification
                .pairs
                .iter()
                .map(|c| {
                    vec![
                        ("t1".into(), c.t1.to_string()),
                        ("t2".into(), c.t2.to_string()),
                        ("lower".into(), c.bracket.lower.to_string()),
                        ("upper".into(), c.bracket.upper.to_string()),
                        ("lower_ok".into(), c.lower_consistent.to_string()),
                        ("upper_ok".into(), c.upper_consistent.to_string()),
                    ]
                })
                .collect();
            let result = json!({
                "a": cert.a,
                "b": cert.b,
                "epsilon": cert.epsilon,
                "ok": verification.ok,
                "pairs": verification.pairs,
            });
            Ok(Output { command: "geodesic", config, result, rows })
        }
        Command::Hyperbolicity { domain, points, kmin, kmax, budget } => {
            let dom = read_spec(domain)?;
            let spec = SamplerSpec::Layered { k_min: *kmin, k_max: *kmax };
            let report = four_point_scan(&dom, &spec, *points, *budget, seed, threads_from_env())?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("points".into(), points.to_string());
            config.insert("kmin".into(), kmin.to_string());
            config.insert("kmax".into(), kmax.to_string());
            config.insert("budget".into(), budget.to_string());
            let rows = report
                .per_scale
                .iter()
                .map(|s| {
                    vec![
                        ("k".into(), s.k.to_string()),
                        ("delta_lower".into(), s.delta_lower.to_string()),
                        ("delta_upper_estimate".into(), s.delta_upper_estimate.to_string()),
                        ("triples".into(), s.triples.to_string()),
                    ]
                })
                .collect();
            let result = serde_json::to_value(&report).unwrap();
            Ok(Output { command: "hyperbolicity", config, result, rows })
        }
        Command::Witness { domain, o, x, y, m, doublings, budget } => {
            let dom = read_spec(domain)?;
            let witness = BoundaryDiskWitness {
                interior: parse_point(o, "--o")?,
                disk_point: parse_point(x, "--x")?,
                disk_edge: parse_point(y, "--y")?,
            };
            let outcome = fat_triangle_witness(&dom, &witness, *m, *doublings, *budget)?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("o".into(), o.clone());
            config.insert("x".into(), x.clone());
            config.insert("y".into(), y.clone());
            config.insert("m".into(), m.to_string());
            config.insert("doublings".into(), doublings.to_string());
            let rows = outcome
                .history
                .iter()
                .map(|(t, d)| {
                    vec![("t".into(), t.to_string()), ("defect_lower".into(), d.to_string())]
                })
                .collect();
            let result = serde_json::to_value(&outcome).unwrap();
            if !outcome.reached {
                return Err(Failure {
                    code: 4,
                    message: format!(
                        "witness budget exhausted: best defect {} at T = {}",
                        outcome.defect.defect_lower, outcome.t_used
                    ),
                    partial: Some(envelope("witness", seed, &config, &result)),
                });
            }
            Ok(Output { command: "witness", config, result, rows })
        }
        Command::Hausdorff { domain, other, radius } => {
            let a = read_spec(domain)?;
            let b = read_spec(other)?;
            let est = local_hausdorff(&a, &b, *radius)?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("other".into(), other.display().to_string());
            config.insert("radius".into(), radius.to_string());
            let result = json!({
                "distance": est.distance,
                "resolution": est.resolution,
                "directions": est.directions,
            });
            let rows = vec![vec![
                ("distance".into(), est.distance.to_string()),
                ("resolution".into(), est.resolution.to_string()),
                ("directions".into(), est.directions.to_string()),
            ]];
            Ok(Output { command: "hausdorff", config, result, rows })
        }
        Command::Blowup { domain, xi, direction, rate, steps, radius, target } => {
            let dom = read_spec(domain)?;
            let xi_pt = parse_point(xi, "--xi")?;
            let dir = parse_point(direction, "--direction")?;
            let target_dom = target.as_ref().map(|t| read_spec(t)).transpose()?;
            let approach = ApproachSpec { direction: dir, rate: *rate };
            let trace =
                blowup_sequence(&dom, &xi_pt, &approach, *steps, *radius, target_dom.as_ref())?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("xi".into(), xi.clone());
            config.insert("direction".into(), direction.clone());
            config.insert("rate".into(), rate.to_string());
            config.insert("steps".into(), steps.to_string());
            config.insert("radius".into(), radius.to_string());
            if let Some(t) = target {
                config.insert("target".into(), t.display().to_string());
            }
            let rows = trace
                .steps
                .iter()
                .map(|s| {
                    let mut row = vec![("n".into(), s.n.to_string())];
                    for (i, tau) in s.tau.iter().enumerate() {
                        row.push((format!("tau_{i}"), tau.to_string()));
                    }
                    row.push((
                        "hausdorff".into(),
                        s.hausdorff.map_or(String::new(), |h| h.to_string()),
                    ));
                    row.push((
                        "resolution".into(),
                        s.resolution.map_or(String::new(), |r| r.to_string()),
                    ));
                    row
                })
                .collect();
            let result = serde_json::to_value(&trace).unwrap();
            Ok(Output { command: "blowup", config, result, rows })
        }
        Command::Continuity { sequence, limit, probes, budget } => {
            let seq = sequence
                .iter()
                .map(|p| read_spec(p))
                .collect::<Result<Vec<_>, _>>()?;
            let limit_dom = read_spec(limit)?;
            let probe_pairs: Vec<(CVector64, CVector64)> = serde_json::from_str(probes)
                .map_err(|e| Failure::parse(format!("bad --probes: {e}")))?;
            let report = distance_continuity_check(&seq, &limit_dom, &probe_pairs, *budget)?;
            let mut config = BTreeMap::new();
            config.insert(
                "sequence".into(),
                sequence
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            config.insert("limit".into(), limit.display().to_string());
            config.insert("probes".into(), probes.clone());
            config.insert("budget".into(), budget.to_string());
            let mut rows = Vec::new();
            for (pi, probe) in report.probes.iter().enumerate() {
                for (gi, gap) in probe.gaps.iter().enumerate() {
                    rows.push(vec![
                        ("probe".into(), pi.to_string()),
                        ("n".into(), (probe.start_index + gi).to_string()),
                        ("gap".into(), gap.to_string()),
                    ]);
                }
            }
            let result = serde_json::to_value(&report).unwrap();
            Ok(Output { command: "continuity", config, result, rows })
        }
        Command::Multitype { poly } => {
            let text = std::fs::read_to_string(poly)
                .map_err(|e| Failure::parse(format!("cannot read {}: {e}", poly.display())))?;
            let spec: PolySpec = serde_json::from_str(&text)
                .map_err(|e| Failure::parse(format!("bad polynomial spec: {e}")))?;
            let polynomial = spec.to_polynomial()?;
            let mt = polynomial.multitype()?;
            let mut config = BTreeMap::new();
            config.insert("poly".into(), poly.display().to_string());
            let limit_spec = PolySpec::from_polynomial(&mt.limit);
            let result = json!({
                "m": mt.weights,
                "adapted": mt.adapted,
                "limit": limit_spec,
            });
            let rows = limit_spec
                .terms
                .iter()
                .map(|t| {
                    vec![
                        ("alpha".into(), format!("{:?}", t.alpha)),
                        ("beta".into(), format!("{:?}", t.beta)),
                        ("re".into(), t.re.clone()),
                        ("im".into(), t.im.clone()),
                    ]
                })
                .collect();
            Ok(Output { command: "multitype", config, result, rows })
        }
        Command::Linetype { domain, x, cap } => {
            let dom = read_spec(domain)?;
            let x_pt = parse_point(x, "--x")?;
            let lt = line_type(&dom, &x_pt, *cap, seed)?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("x".into(), x.clone());
            config.insert("cap".into(), cap.to_string());
            let (kind, value) = match lt {
                LineType::Finite(v) => ("finite", v),
                LineType::AtLeast(v) => ("at_least", v),
            };
            let result = json!({"kind": kind, "value": value});
            let rows = vec![vec![
                ("kind".into(), kind.to_string()),
                ("value".into(), value.to_string()),
            ]];
            Ok(Output { command: "linetype", config, result, rows })
        }
        Command::Mconvex { domain, m, radius, samples } => {
            let dom = read_spec(domain)?;
            let report = m_convexity_constant(&dom, *m, *radius, *samples, seed)?;
            let mut config = BTreeMap::new();
            config.insert("domain".into(), domain.display().to_string());
            config.insert("m".into(), m.to_string());
            config.insert("radius".into(), radius.to_string());
            config.insert("samples".into(), samples.to_string());
            let rows = report
                .per_layer
                .iter()
                .map(|l| {
                    vec![
                        ("k".into(), l.k.to_string()),
                        ("max_ratio".into(), l.max_ratio.to_string()),
                        ("count".into(), l.count.to_string()),
                    ]
                })
                .collect();
            let result = serde_json::to_value(&report).unwrap();
            Ok(Output { command: "mconvex", config, result, rows })
        }
    }
}

fn envelope(command: &str, seed: u64, config: &BTreeMap<String, String>, result: &Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config": config,
        "result": result,
    })
}

fn render_csv(out: &Output, seed: u64) -> String {
    let mut text = String::new();
    text.push_str(&format!("# version={}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# command={}\n", out.command));
    text.push_str(&format!("# seed={seed}\n"));
    for (k, v) in &out.config {
        text.push_str(&format!("# {k}={}\n", v.replace('\n', " ")));
    }
    if let Some(first) = out.rows.first() {
        let header: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
        text.push_str(&header.join(","));
        text.push('\n');
        for row in &out.rows {
            let vals: Vec<String> = row
                .iter()
                .map(|(_, v)| {
                    if v.contains(',') || v.contains('"') {
                        format!("\"{}\"", v.replace('"', "\"\""))
                    } else {
                        v.clone()
                    }
                })
                .collect();
            text.push_str(&vals.join(","));
            text.push('\n');
        }
    }
    text
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::parse(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            let text = match cli.format {
                Format::Json => {
                    let doc = envelope(output.command, cli.seed, &output.config, &output.result);
                    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
                    s.push('\n');
                    s
                }
                Format::Csv => render_csv(&output, cli.seed),
            };
            if let Err(f) = write_output(cli.out.as_deref(), &text) {
                eprintln!("error: {}", f.message);
                return ExitCode::from(f.code);
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            if let Some(partial) = &failure.partial {
                let mut s = serde_json::to_string_pretty(partial).expect("serializable");
                s.push('\n');
                let _ = write_output(cli.out.as_deref(), &s);
            }
            ExitCode::from(failure.code)
        }
    }
}
