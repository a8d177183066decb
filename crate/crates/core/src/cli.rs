//! Command line front end. Every command reads JSON files and writes JSON
//! (or DOT) to standard output; failures map to exit codes by kind.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{CoverGraph, SurgeryMark, DOT_VERTEX_CAP};
use crate::lemmas::{
    lemma1_boost, lemma2_declose, lemma3_separate, lemma4_power_separate, LemmaConfig, SeparationResult,
};
use crate::pipeline::{run, CertComponent, Certificate, Instance, Mode};
use crate::verify::{brute_force_search, verify_certificate};
use crate::words::{FactorSpec, FreeProduct, NormalForm};

#[derive(Parser, Debug)]
#[command(name = "ordsep", version, about = "Order-separating permutation representations of free products")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Seed overriding the instance config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pipeline mode overriding the instance.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Vertex budget per graph overriding the instance config.
    #[arg(long, global = true)]
    max_vertices: Option<usize>,
    /// Directory receiving one DOT file per component graph.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    /// Report errors as JSON on standard error.
    #[arg(long, global = true)]
    json: bool,
    /// Worker cap. The engine currently runs on one thread.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and verify a certificate for an instance.
    Separate {
        instance: PathBuf,
        /// Where to write the certificate.
        #[arg(long, default_value = "certificate.json")]
        out: PathBuf,
    },
    /// Boost targets of the Cartesian subgroup to p-power orders.
    Lemma1 { args: PathBuf },
    /// Remove close edges for cyclically reduced Cartesian elements.
    Lemma2 { args: PathBuf },
    /// Separate orders of non-conjugate cyclic classes.
    Lemma3 { args: PathBuf },
    /// Separate orders of powers of one element.
    Lemma4 { args: PathBuf },
    /// Check a certificate against an instance.
    Verify { instance: PathBuf, certificate: PathBuf },
    /// Exhaustive search for a small separating representation.
    Oracle {
        instance: PathBuf,
        /// Largest permutation degree (defaults to the instance config).
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Operations on a single cover graph.
    #[command(subcommand)]
    Graph(GraphCommand),
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// Cut and reconnect t copies of a graph at marked (vertex, factor) pairs.
    Surgery {
        graph: PathBuf,
        #[arg(long)]
        t: usize,
        /// Mark as `vertex:factor`; repeatable.
        #[arg(long = "mark", value_parser = parse_pair)]
        marks: Vec<(usize, usize)>,
    },
    /// Synchronized product of two graphs.
    Product {
        graph: PathBuf,
        other: PathBuf,
        /// Base vertices as `v1:v2`.
        #[arg(long, value_parser = parse_pair, default_value = "0:0")]
        bases: (usize, usize),
    },
    /// Graphviz rendering.
    Dot { graph: PathBuf },
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown mode {s}; expected auto, theorem12 or theorem3"))
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s}"))?;
    Ok((a.parse().map_err(|e| format!("{e}"))?, b.parse().map_err(|e| format!("{e}"))?))
}

/// Arguments file for the lemma commands.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct LemmaArgs {
    factors: [FactorSpec; 2],
    #[serde(default)]
    targets: Vec<NormalForm>,
    p: Option<u64>,
    n: Option<u32>,
    #[serde(default)]
    pi: BTreeSet<u64>,
    w: Option<NormalForm>,
    #[serde(default)]
    exponents: Vec<i64>,
    #[serde(default)]
    config: LemmaConfig,
}

/// Runs the front end on `argv` and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 5 } else { 0 };
        }
    };
    let json = cli.global.json;
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            if json {
                eprintln!("{}", json!({"error": e.code(), "detail": e.to_string()}));
            } else {
                eprintln!("error: {}: {e}", e.code());
            }
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Internal(format!("{}: {e}", path.display())))
}

/// Writes to standard output, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json<T: serde::Serialize>(value: &T) {
    emit(&serde_json::to_string_pretty(value).expect("outputs serialize"));
}

fn load_instance(path: &Path, global: &GlobalArgs) -> Result<Instance> {
    let mut inst = Instance::from_json(&read(path)?)?;
    if let Some(seed) = global.seed {
        inst.config.seed = seed;
    }
    if let Some(mode) = global.mode {
        inst.mode = mode;
    }
    if let Some(v) = global.max_vertices {
        inst.config.max_vertices = v;
    }
    inst.config.check()?;
    Ok(inst)
}

fn load_lemma_args(path: &Path, global: &GlobalArgs) -> Result<(FreeProduct, LemmaArgs)> {
    let mut args: LemmaArgs = serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(seed) = global.seed {
        args.config.seed = seed;
    }
    if let Some(v) = global.max_vertices {
        args.config.max_vertices = v;
    }
    let [a, b] = args.factors.clone();
    let fp = FreeProduct::new(a, b);
    args.targets = args.targets.iter().map(|w| fp.normalize(w.syllables())).collect::<Result<_>>()?;
    if let Some(w) = &args.w {
        args.w = Some(fp.normalize(w.syllables())?);
    }
    Ok((fp, args))
}

fn required<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::Parse(format!("missing field `{name}`")))
}

fn emit_dot(dir: &Option<PathBuf>, graphs: &[(String, &CoverGraph)]) -> Result<()> {
    let Some(dir) = dir else { return Ok(()) };
    std::fs::create_dir_all(dir).map_err(|e| Error::Internal(format!("{}: {e}", dir.display())))?;
    for (name, g) in graphs {
        write(&dir.join(format!("{name}.dot")), &g.to_dot(DOT_VERTEX_CAP))?;
    }
    Ok(())
}

fn emit_lemma(global: &GlobalArgs, res: &SeparationResult) -> Result<i32> {
    let graphs: Vec<(String, &CoverGraph)> =
        res.components.iter().enumerate().map(|(k, c)| (format!("component_{k}"), &c.graph)).collect();
    emit_dot(&global.dot, &graphs)?;
    print_json(res);
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    let g = &cli.global;
    match cli.command {
        Command::Separate { instance, out } => {
            let inst = load_instance(&instance, g)?;
            let cert = run(&inst)?;
            let text = cert.to_json();
            write(&out, &text)?;
            let graphs: Vec<(String, &CoverGraph)> = cert
                .components
                .iter()
                .enumerate()
                .filter_map(|(k, c)| match c {
                    CertComponent::Graph { graph, .. } => Some((format!("component_{k}"), graph)),
                    CertComponent::Perm { .. } => None,
                })
                .collect();
            emit_dot(&g.dot, &graphs)?;
            print_json(&json!({
                "certificate": out.display().to_string(),
                "verified": cert.verified,
                "orders": cert.orders,
                "components": cert.components.len(),
            }));
            Ok(0)
        }
        Command::Lemma1 { args } => {
            let (fp, a) = load_lemma_args(&args, g)?;
            let c = lemma1_boost(&fp, &a.targets, required(a.p, "p")?, a.n.unwrap_or(0), &a.config)?;
            let res = SeparationResult::new(vec![c], &a.targets, Vec::new())?;
            emit_lemma(g, &res)
        }
        Command::Lemma2 { args } => {
            let (fp, a) = load_lemma_args(&args, g)?;
            emit_lemma(g, &lemma2_declose(&fp, &a.targets, required(a.p, "p")?, &a.config)?)
        }
        Command::Lemma3 { args } => {
            let (fp, a) = load_lemma_args(&args, g)?;
            emit_lemma(g, &lemma3_separate(&fp, &a.targets, &a.pi, &a.config)?)
        }
        Command::Lemma4 { args } => {
            let (fp, a) = load_lemma_args(&args, g)?;
            emit_lemma(g, &lemma4_power_separate(&fp, &required(a.w, "w")?, &a.exponents, &a.config)?)
        }
        Command::Verify { instance, certificate } => {
            let inst = load_instance(&instance, g)?;
            let cert = Certificate::from_json(&read(&certificate)?)?;
            let report = verify_certificate(&inst, &cert);
            print_json(&report);
            if report.pass {
                Ok(0)
            } else {
                Err(Error::VerificationFailed(report.failures.join("; ")))
            }
        }
        Command::Oracle { instance, max_degree } => {
            let inst = load_instance(&instance, g)?;
            let degree = max_degree.unwrap_or(inst.config.oracle_degree);
            print_json(&brute_force_search(&inst, degree)?);
            Ok(0)
        }
        Command::Graph(cmd) => {
            let budget = g.max_vertices.unwrap_or(1_000_000);
            let out = match cmd {
                GraphCommand::Surgery { graph, t, marks } => {
                    let graph = CoverGraph::from_json(&read(&graph)?)?;
                    let marks: Vec<SurgeryMark> =
                        marks.into_iter().map(|(vertex, factor)| SurgeryMark { vertex, factor }).collect();
                    graph.gamma_surgery(t, &marks, budget)?
                }
                GraphCommand::Product { graph, other, bases } => {
                    let a = CoverGraph::from_json(&read(&graph)?)?;
                    let b = CoverGraph::from_json(&read(&other)?)?;
                    a.synchronized_product(&b, bases, budget)?
                }
                GraphCommand::Dot { graph } => {
                    emit(CoverGraph::from_json(&read(&graph)?)?.to_dot(DOT_VERTEX_CAP).trim_end());
                    return Ok(0);
                }
            };
            emit_dot(&g.dot, &[("graph".to_string(), &out)])?;
            emit(&out.to_json());
            Ok(0)
        }
    }
}
