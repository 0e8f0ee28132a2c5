use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use tdlc_core::certificate::{self, Certificate, Operation};
use tdlc_core::dynamics::stone_orbit_graph;
use tdlc_core::permgrp::{FiniteGroup, Perm};
use tdlc_core::specfile::GroupSpec;
use tdlc_core::tree::{cayley_abels_ball, schreier_graph, Graph};
use tdlc_core::{presets, LabError};

#[derive(Parser)]
#[command(
    name = "tdlc-lab",
    version,
    about = "Finite-depth experiments with groups acting on trees"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Boundary depth; defaults to the spec's [limits]
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Longest word searched; defaults to the spec's [limits]
    #[arg(long, global = true)]
    word_bound: Option<usize>,
    /// Seed for sampled experiments
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Local prime content, sphere orbits and factors of the local group
    ReportLocal {
        spec: String,
        /// depth window `a..b` (defaults to `1..--depth`)
        #[arg(long, value_parser = parse_window)]
        depths: Option<(usize, usize)>,
    },
    /// Boundary dynamics at a fixed depth
    Dynamics {
        #[command(subcommand)]
        what: DynamicsCmd,
    },
    /// Constructions that come with a replayable certificate
    Certify {
        #[command(subcommand)]
        what: CertifyCmd,
    },
    /// Graphviz exports
    Export(ExportArgs),
    /// Re-run a certificate and compare it byte for byte
    Replay { certificate: PathBuf },
}

#[derive(Subcommand)]
enum DynamicsCmd {
    Minimal {
        spec: String,
    },
    Skewering {
        spec: String,
    },
    Minorising {
        spec: String,
    },
    Degree {
        spec: String,
    },
    Proximal {
        spec: String,
        #[arg(long, default_value_t = 6)]
        end_depth: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value = "{01}")]
        target: String,
    },
    Measure {
        spec: String,
        /// depths to test (defaults to 2..=--depth)
        #[arg(long, value_delimiter = ',')]
        depths: Vec<usize>,
    },
    FixedPoints {
        spec: String,
        #[arg(long, value_delimiter = ',')]
        depths: Vec<usize>,
    },
    Commensurated {
        spec: String,
        #[arg(long)]
        region: String,
    },
}

#[derive(Subcommand)]
enum CertifyCmd {
    Contraction {
        spec: String,
        #[arg(long)]
        element: String,
        #[arg(long)]
        u: String,
        #[arg(long, default_value_t = 4)]
        ball: usize,
        #[arg(long, default_value_t = 32)]
        k_max: usize,
    },
    Goodshrink {
        spec: String,
        #[arg(long)]
        element: String,
        #[arg(long, default_value = "{0}")]
        alpha: String,
    },
    Nub {
        spec: String,
        #[arg(long)]
        element: String,
        #[arg(long, default_value = "{02}")]
        beta: String,
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    FreeSemigroup {
        spec: String,
        #[arg(long = "L", default_value_t = 8)]
        length: usize,
    },
    TitsCore {
        spec: String,
        #[arg(long)]
        element: String,
        #[arg(long, default_value = "{0}")]
        alpha: String,
    },
    OrbitJoin {
        spec: String,
        #[arg(long)]
        alpha: String,
    },
}

#[derive(Args)]
struct ExportArgs {
    /// Also write the DOT text to this file
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    #[command(subcommand)]
    what: ExportCmd,
}

#[derive(Subcommand)]
enum ExportCmd {
    /// Radius-r ball with a transitivity certificate for the spec's elements
    CayleyAbels {
        spec: String,
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
    /// Coset graph G/U for permutation groups given by generators
    Schreier {
        #[arg(long)]
        degree: usize,
        /// generator of G in cycle notation (repeatable)
        #[arg(long = "gen", required = true)]
        gens: Vec<String>,
        /// U as the stabiliser of this point
        #[arg(long, conflicts_with = "sub_gens")]
        stab: Option<usize>,
        /// generator of U (repeatable)
        #[arg(long = "sub-gen")]
        sub_gens: Vec<String>,
    },
    /// Which depth-n cylinders each generator moves onto which
    StoneOrbit { spec: String },
}

enum Output {
    Cert(Certificate),
    Graph {
        graph: Graph,
        name: String,
        extra: Option<Value>,
    },
    Replay {
        identical: bool,
        text: String,
        json: Value,
    },
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let a: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty window {s}"));
    }
    Ok((a, b))
}

fn load_spec(arg: &str) -> Result<GroupSpec, LabError> {
    let text = match arg.strip_prefix("preset:") {
        Some(name) => presets::get(name)
            .ok_or_else(|| LabError::Invalid(format!("unknown preset {name}")))?
            .to_string(),
        None => read(Path::new(arg))?,
    };
    GroupSpec::parse(&text)
}

fn read(path: &Path) -> Result<String, LabError> {
    std::fs::read_to_string(path).map_err(|e| LabError::Invalid(format!("{}: {e}", path.display())))
}

fn certify(
    g: &Global,
    spec: &str,
    op: impl FnOnce(usize) -> Operation,
) -> Result<Output, LabError> {
    let spec = load_spec(spec)?;
    let depth = g.depth.unwrap_or(spec.limits.depth);
    let word_bound = g.word_bound.unwrap_or(spec.limits.word_bound);
    let seed = g.seed.unwrap_or(spec.limits.seed);
    let op = op(depth);
    certificate::run(&spec, depth, word_bound, seed, op).map(Output::Cert)
}

fn or_default(depths: &[usize], depth: usize) -> Vec<usize> {
    if depths.is_empty() {
        (2..=depth.max(2)).collect()
    } else {
        depths.to_vec()
    }
}

fn execute(cli: &Cli) -> Result<Output, LabError> {
    let g = &cli.global;
    match &cli.command {
        Command::ReportLocal { spec, depths } => certify(g, spec, |d| {
            let (from, to) = depths.unwrap_or((1, d));
            Operation::ReportLocal { from, to }
        }),
        Command::Dynamics { what } => match what {
            DynamicsCmd::Minimal { spec } => certify(g, spec, |_| Operation::Minimal),
            DynamicsCmd::Skewering { spec } => certify(g, spec, |_| Operation::Skewering),
            DynamicsCmd::Minorising { spec } => certify(g, spec, |_| Operation::Minorising),
            DynamicsCmd::Degree { spec } => certify(g, spec, |_| Operation::Degree),
            DynamicsCmd::Proximal {
                spec,
                end_depth,
                count,
                target,
            } => certify(g, spec, |_| Operation::Proximal {
                end_depth: *end_depth,
                count: *count,
                target: target.clone(),
            }),
            DynamicsCmd::Measure { spec, depths } => certify(g, spec, |d| Operation::Measure {
                depths: or_default(depths, d),
            }),
            DynamicsCmd::FixedPoints { spec, depths } => {
                certify(g, spec, |d| Operation::FixedPoints {
                    depths: or_default(depths, d),
                })
            }
            DynamicsCmd::Commensurated { spec, region } => {
                certify(g, spec, |_| Operation::Commensurated {
                    region: region.clone(),
                })
            }
        },
        Command::Certify { what } => match what {
            CertifyCmd::Contraction {
                spec,
                element,
                u,
                ball,
                k_max,
            } => certify(g, spec, |_| Operation::Contraction {
                element: element.clone(),
                u: u.clone(),
                ball: *ball,
                k_max: *k_max,
            }),
            CertifyCmd::Goodshrink {
                spec,
                element,
                alpha,
            } => certify(g, spec, |_| Operation::Goodshrink {
                element: element.clone(),
                alpha: alpha.clone(),
            }),
            CertifyCmd::Nub {
                spec,
                element,
                beta,
                m,
            } => certify(g, spec, |_| Operation::Nub {
                element: element.clone(),
                beta: beta.clone(),
                m: *m,
            }),
            CertifyCmd::FreeSemigroup { spec, length } => {
                certify(g, spec, |_| Operation::FreeSemigroup { length: *length })
            }
            CertifyCmd::TitsCore {
                spec,
                element,
                alpha,
            } => certify(g, spec, |_| Operation::TitsCore {
                element: element.clone(),
                alpha: alpha.clone(),
            }),
            CertifyCmd::OrbitJoin { spec, alpha } => certify(g, spec, |_| Operation::OrbitJoin {
                alpha: alpha.clone(),
            }),
        },
        Command::Export(args) => {
            let out = export(g, &args.what)?;
            if let (Some(path), Output::Graph { graph, name, .. }) = (&args.dot, &out) {
                std::fs::write(path, graph.to_dot(name))
                    .map_err(|e| LabError::Invalid(format!("{}: {e}", path.display())))?;
            }
            Ok(out)
        }
        Command::Replay { certificate: path } => {
            let text = read(path)?;
            let r = certificate::replay(&text)?;
            let summary = format!(
                "kind: {}\noriginal verdict: {}\nrerun verdict: {}\nidentical: {}\n",
                r.original.kind,
                verdict_name(&r.original),
                verdict_name(&r.rerun),
                r.identical
            );
            Ok(Output::Replay {
                identical: r.identical,
                text: summary,
                json: serde_json::json!({
                    "kind": r.original.kind,
                    "identical": r.identical,
                    "original_verdict": r.original.verdict,
                    "rerun_verdict": r.rerun.verdict,
                }),
            })
        }
    }
}

fn export(g: &Global, what: &ExportCmd) -> Result<Output, LabError> {
    match what {
        ExportCmd::CayleyAbels { spec, radius } => {
            let spec = load_spec(spec)?;
            let (graph, cert) = cayley_abels_ball(spec.shape, &spec.elements, *radius)?;
            Ok(Output::Graph {
                graph,
                name: format!("ball{radius}"),
                extra: Some(serde_json::to_value(cert).expect("serializable")),
            })
        }
        ExportCmd::Schreier {
            degree,
            gens,
            stab,
            sub_gens,
        } => {
            let parse = |s: &String| Perm::parse(s, *degree);
            let gens = gens.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
            let big = FiniteGroup::new(*degree, gens.clone())?;
            let sub = match stab {
                Some(p) => big.point_stabiliser(*p)?,
                None => FiniteGroup::new(
                    *degree,
                    sub_gens.iter().map(parse).collect::<Result<Vec<_>, _>>()?,
                )?,
            };
            Ok(Output::Graph {
                graph: schreier_graph(&big, &sub, &gens)?,
                name: "schreier".into(),
                extra: None,
            })
        }
        ExportCmd::StoneOrbit { spec } => {
            let spec = load_spec(spec)?;
            let depth = g.depth.unwrap_or(spec.limits.depth);
            let word_bound = g.word_bound.unwrap_or(spec.limits.word_bound);
            let ctx = spec.context(depth, word_bound)?;
            Ok(Output::Graph {
                graph: stone_orbit_graph(&ctx),
                name: format!("stone{depth}"),
                extra: None,
            })
        }
    }
}

fn verdict_name(c: &Certificate) -> String {
    serde_json::to_value(c.verdict)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn text_summary(c: &Certificate) -> String {
    let mut s = format!(
        "kind: {}\nverdict: {}\nspec: {}\ndepth: {}  word bound: {}  seed: {}\n",
        c.kind,
        verdict_name(c),
        c.group_spec_hash,
        c.parameters.depth,
        c.parameters.word_bound,
        c.parameters.seed
    );
    for ch in &c.checks {
        let mark = if ch.passed { "pass" } else { "FAIL" };
        s.push_str(&format!("  [{mark}] {}: {}\n", ch.name, ch.detail));
    }
    let r = &c.result;
    match c.kind.as_str() {
        "report-local" => {
            s.push_str(&format!("eta: {}\n", r["eta"]["eta"]));
            let max = r["sphere_orbits"]
                .as_array()
                .into_iter()
                .flatten()
                .filter(|o| o["level"].as_u64() >= Some(1))
                .filter_map(|o| o["max_orbit"].as_u64())
                .max();
            if let Some(m) = max {
                s.push_str(&format!("orbit bound: {m}\n"));
            }
            for lvl in r["realized_levels"].as_array().into_iter().flatten() {
                s.push_str(&format!(
                    "level {}: order {} factors {}\n",
                    lvl["level"], lvl["order"], lvl["composition_factors"]
                ));
            }
            s.push_str(&format!(
                "local group: order {} factors {}\n",
                r["local_group"]["order"], r["local_group"]["composition_factors"]
            ));
        }
        "degree" => s.push_str(&format!("result: {}\n", r["degree"])),
        "free-semigroup" => {
            for row in r["table"].as_array().into_iter().flatten() {
                let w = row["word"].as_str().unwrap_or("");
                let img = row["image"].as_str().unwrap_or("");
                s.push_str(&format!(
                    "{:<10} {img}\n",
                    if w.is_empty() { "1" } else { w }
                ));
            }
            s.push_str(&format!(
                "rows: {}  collisions: {}\n",
                r["rows"], r["collisions"]
            ));
        }
        "measure" => {
            for m in r.as_array().into_iter().flatten() {
                let v = &m["verdict"];
                s.push_str(&format!(
                    "depth {}: {}",
                    m["depth"],
                    v["status"].as_str().unwrap_or("?")
                ));
                if let Some(w) = v["weights"].as_object() {
                    let ws: Vec<String> = w
                        .iter()
                        .map(|(k, x)| format!("{k}={}", x.as_str().unwrap_or("")))
                        .collect();
                    s.push_str(&format!(" weights {}", ws.join(" ")));
                }
                s.push('\n');
            }
        }
        "contraction" => s.push_str(&format!("step: {}\n", r["step"])),
        "fixed-points" => {
            for f in r.as_array().into_iter().flatten() {
                s.push_str(&format!(
                    "depth {}: {} fixed classes\n",
                    f["depth"], f["fixed_count"]
                ));
            }
        }
        _ => {}
    }
    s
}

fn render(out: &Output, format: Format) -> String {
    match (out, format) {
        (Output::Cert(c), Format::Json) => c.to_json() + "\n",
        (Output::Cert(c), Format::Text) => text_summary(c),
        (Output::Graph { graph, name, .. }, Format::Text) => graph.to_dot(name),
        (Output::Graph { graph, extra, .. }, Format::Json) => {
            let mut v = serde_json::json!({ "graph": graph });
            if let Some(e) = extra {
                v["certificate"] = e.clone();
            }
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        }
        (Output::Replay { text, .. }, Format::Text) => text.clone(),
        (Output::Replay { json, .. }, Format::Json) => {
            serde_json::to_string_pretty(json).expect("serializable") + "\n"
        }
    }
}

fn error_code(e: &LabError) -> u8 {
    match e {
        LabError::ClosureCapExceeded { .. } => 3,
        LabError::SearchExhausted { .. }
        | LabError::NotTransitiveAtRadius { .. }
        | LabError::PrecisionExhausted(_) => 4,
        LabError::NotSkewering(_) | LabError::DisjointnessFailure(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_code(&e));
        }
    };
    let text = render(&out, cli.global.format);
    match &cli.global.out {
        Some(path) => {
            // certificate files are always JSON so they can be replayed
            let file = match &out {
                Output::Cert(c) => c.to_json() + "\n",
                _ => text.clone(),
            };
            if let Err(e) = std::fs::write(path, file) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
            if matches!((&out, cli.global.format), (Output::Cert(_), Format::Text)) {
                print!("{text}");
            }
        }
        None => print!("{text}"),
    }
    let code = match &out {
        Output::Cert(c) => c.verdict.exit_code() as u8,
        Output::Graph { .. } => 0,
        Output::Replay { identical, .. } => u8::from(!identical),
    };
    ExitCode::from(code)
}
