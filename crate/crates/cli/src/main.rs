use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use btlab_cli::analysis::{ball_graph, ball_stats, certificates, germ_scope, origin_of, parse_scope, radius_of};
use btlab_cli::cache::BallCache;
use btlab_cli::config::ExperimentConfig;
use btlab_cli::experiment::run_experiment;
use btlab_cli::{exit_code, EXIT_INVALID, EXIT_OK, EXIT_VIOLATION};
use btlab_core::canon::{are_isomorphic, canonical_form, IsoCheck};
use btlab_core::field::{closeness, descriptor_from_value, validate};
use btlab_core::geometry::{verify_geometry, CoxeterDiagram};
use btlab_core::germs::{propagate, short_cycle_certificate, GermAtlas, Propagation};
use btlab_core::graph::LabeledGraph;
use btlab_core::{rings_isomorphic, Budget, ChainRing, Error, FieldDescriptor, IsoOutcome, ResidueRing};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "btlab", version, about = "Residue rings, building balls and their local geometry")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Limit on ball vertices and module candidates.
    #[arg(long, global = true)]
    budget_vertices: Option<u64>,
    /// Limit on residue ring size.
    #[arg(long, global = true)]
    budget_ring: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reuse and store ball graphs here.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Field descriptors.
    #[command(subcommand)]
    Field(FieldCmd),
    /// Residue rings O/π^R.
    #[command(subcommand)]
    Ring(RingCmd),
    /// Balls in the building.
    #[command(subcommand)]
    Ball(BallCmd),
    /// Geometry axioms on a colored graph.
    #[command(subcommand)]
    Geometry(GeometryCmd),
    /// Germ labellings.
    #[command(subcommand)]
    Germs(GermsCmd),
    /// Canonical forms and isomorphism.
    #[command(subcommand)]
    Iso(IsoCmd),
    /// Scripted experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

/// Descriptors are given as a file path or inline JSON.
#[derive(Subcommand)]
enum FieldCmd {
    Validate { descriptor: String },
    Close {
        a: String,
        b: String,
        #[arg(long, default_value_t = 4)]
        max_r: u32,
    },
}

#[derive(Subcommand)]
enum RingCmd {
    Build {
        descriptor: String,
        #[arg(long)]
        r: u32,
    },
    /// Addition and multiplication tables (rings of at most 64 elements).
    Table {
        descriptor: String,
        #[arg(long)]
        r: u32,
    },
    Iso {
        a: String,
        b: String,
        #[arg(long)]
        r: u32,
    },
}

#[derive(Subcommand)]
enum BallCmd {
    /// Builds a ball and prints its statistics.
    Build {
        descriptor: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: u32,
        /// Also write the graph here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the ball graph as JSON or DOT.
    Export {
        descriptor: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compares the balls of two fields by canonical certificate.
    Compare {
        a: String,
        b: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: u32,
    },
}

#[derive(Subcommand)]
enum GeometryCmd {
    Verify {
        graph: PathBuf,
        /// `atilde:d` or `rank2:m`.
        #[arg(long)]
        diagram: String,
        /// `interior`, `full` or `within:N`.
        #[arg(long, default_value = "interior")]
        scope: String,
    },
}

#[derive(Subcommand)]
enum GermsCmd {
    Label {
        graph: PathBuf,
        #[arg(long)]
        diagram: String,
        #[arg(long)]
        basepoint: Option<usize>,
        /// Also check transport around cycles up to this length.
        #[arg(long)]
        certificate: Option<usize>,
    },
}

#[derive(Subcommand)]
enum IsoCmd {
    Canon {
        graph: PathBuf,
        /// Treat vertex colors as part of the structure.
        #[arg(long)]
        colors: bool,
    },
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        colors: bool,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

struct Ctx {
    budget: Budget,
    seed: Option<u64>,
    cache: Option<BallCache>,
    format: Option<Format>,
}

fn read_descriptor(arg: &str) -> Result<FieldDescriptor> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading descriptor {arg}"))?
    };
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{arg}: {e}")))?;
    let desc = descriptor_from_value(&v)?;
    let problems = validate(&desc);
    if !problems.is_empty() {
        return Err(Error::InvalidDescriptor(problems).into());
    }
    Ok(desc)
}

fn read_graph(path: &Path) -> Result<LabeledGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(LabeledGraph::from_json(&v)?)
}

/// Writes to stdout; a closed pipe (`btlab ... | head`) is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &Value) {
    emit(&(serde_json::to_string_pretty(v).expect("json") + "\n"));
}

fn render_graph(g: &LabeledGraph, format: Option<Format>) -> Result<String> {
    match format.unwrap_or(Format::Json) {
        Format::Json => Ok(serde_json::to_string_pretty(&g.to_json())? + "\n"),
        Format::Dot => Ok(g.to_dot()),
        Format::Csv => Err(Error::InvalidInput("graphs export as json or dot".into()).into()),
    }
}

fn characteristic(ring: &ResidueRing) -> u64 {
    let mut n = 1;
    let mut x = ring.one();
    while x != ring.zero() {
        x = ring.add(x, ring.one());
        n += 1;
    }
    n
}

fn ring_summary(ring: &ResidueRing) -> Value {
    let units = ring.elements().into_iter().filter(|&a| ring.is_unit(a)).count();
    json!({
        "descriptor": ring.descriptor().to_json(),
        "kind": ring.kind(),
        "size": ring.size(),
        "residue_field": ring.residue_size(),
        "nilpotency": ring.nilpotency(),
        "characteristic": characteristic(ring),
        "commutative": ring.is_commutative(),
        "units": units,
    })
}

fn field(cmd: FieldCmd, ctx: &Ctx) -> Result<i32> {
    match cmd {
        FieldCmd::Validate { descriptor } => {
            let desc = read_descriptor(&descriptor)?;
            print_json(&json!({ "valid": true, "descriptor": desc.to_json(), "characteristic_zero": desc.characteristic_zero() }));
        }
        FieldCmd::Close { a, b, max_r } => {
            let (a, b) = (read_descriptor(&a)?, read_descriptor(&b)?);
            let c = closeness(&a, &b, max_r, &ctx.budget)?;
            print_json(&json!({ "closeness": c, "capped": c == max_r, "max_r": max_r }));
        }
    }
    Ok(EXIT_OK)
}

fn ring(cmd: RingCmd, ctx: &Ctx) -> Result<i32> {
    match cmd {
        RingCmd::Build { descriptor, r } => {
            let ring = ResidueRing::build(&read_descriptor(&descriptor)?, r, &ctx.budget)?;
            print_json(&ring_summary(&ring));
        }
        RingCmd::Table { descriptor, r } => {
            let ring = ResidueRing::build(&read_descriptor(&descriptor)?, r, &ctx.budget)?;
            if ring.size() > 64 {
                return Err(Error::InvalidInput(format!("tables are limited to 64 elements, ring has {}", ring.size())).into());
            }
            let elems = ring.elements();
            let names: Vec<String> = elems.iter().map(|&a| ring.format_elem(a)).collect();
            let table = |op: &dyn Fn(u32, u32) -> u32| -> Vec<Vec<String>> {
                elems
                    .iter()
                    .map(|&a| elems.iter().map(|&b| ring.format_elem(op(a, b))).collect())
                    .collect()
            };
            let add = table(&|a, b| ring.add(a, b));
            let mul = table(&|a, b| ring.mul(a, b));
            if ctx.format == Some(Format::Json) {
                print_json(&json!({ "elements": names, "add": add, "mul": mul }));
            } else {
                let quoted = |xs: &[String]| xs.iter().map(|n| format!("\"{n}\"")).collect::<Vec<_>>().join(",");
                let mut text = String::new();
                for (title, t) in [("add", &add), ("mul", &mul)] {
                    text += &format!("{title},{}\n", quoted(&names));
                    for (name, row) in names.iter().zip(t) {
                        text += &format!("\"{name}\",{}\n", quoted(row));
                    }
                    text.push('\n');
                }
                emit(&text);
            }
        }
        RingCmd::Iso { a, b, r } => {
            let ra = ResidueRing::build(&read_descriptor(&a)?, r, &ctx.budget)?;
            let rb = ResidueRing::build(&read_descriptor(&b)?, r, &ctx.budget)?;
            match rings_isomorphic(&ra, &rb, &ctx.budget)? {
                IsoOutcome::Witness(w) => {
                    let map: Vec<[String; 2]> = ra
                        .elements()
                        .into_iter()
                        .map(|x| [ra.format_elem(x), rb.format_elem(w.apply(x))])
                        .collect();
                    print_json(&json!({ "isomorphic": true, "map": map }));
                }
                IsoOutcome::Mismatch { invariant, left, right } => {
                    print_json(&json!({ "isomorphic": false, "invariant": invariant, "left": left, "right": right }));
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn ball(cmd: BallCmd, ctx: &Ctx) -> Result<i32> {
    match cmd {
        BallCmd::Build { descriptor, d, r, out } => {
            let g = ball_graph(&read_descriptor(&descriptor)?, r, d, &ctx.budget, ctx.cache.as_ref())?;
            if let Some(path) = out {
                fs::write(&path, render_graph(&g, ctx.format)?)?;
            }
            print_json(&serde_json::to_value(ball_stats(&g))?);
        }
        BallCmd::Export { descriptor, d, r, out } => {
            let g = ball_graph(&read_descriptor(&descriptor)?, r, d, &ctx.budget, ctx.cache.as_ref())?;
            let text = render_graph(&g, ctx.format)?;
            match out {
                Some(path) => fs::write(path, text)?,
                None => emit(&text),
            }
        }
        BallCmd::Compare { a, b, d, r } => {
            let seed = ctx.seed.unwrap_or(0);
            let mut certs = Vec::new();
            for desc in [&a, &b] {
                let g = ball_graph(&read_descriptor(desc)?, r, d, &ctx.budget, ctx.cache.as_ref())?;
                certs.push(certificates(&g, &ctx.budget, seed, 0)?);
            }
            print_json(&json!({
                "isomorphic": certs[0].color_blind == certs[1].color_blind,
                "centered_isomorphic": certs[0].centered == certs[1].centered,
                "certificates": certs,
            }));
        }
    }
    Ok(EXIT_OK)
}

fn geometry(cmd: GeometryCmd) -> Result<i32> {
    let GeometryCmd::Verify { graph, diagram, scope } = cmd;
    let g = read_graph(&graph)?;
    let m = CoxeterDiagram::parse(&diagram)?;
    let tau = g
        .color
        .clone()
        .ok_or_else(|| Error::InvalidInput("graph carries no tau labels".into()))?;
    let scope = parse_scope(&scope)?;
    let radius = radius_of(&g).unwrap_or(0);
    let report = verify_geometry(&g, &tau, &m, &scope.predicate(&g, radius))?;
    print_json(&json!({
        "passed": report.passed(),
        "flags_checked": report.flags_checked,
        "violations": report.violations,
    }));
    Ok(if report.passed() { EXIT_OK } else { EXIT_VIOLATION })
}

fn germs(cmd: GermsCmd, ctx: &Ctx) -> Result<i32> {
    let GermsCmd::Label { graph, diagram, basepoint, certificate } = cmd;
    let g = read_graph(&graph)?;
    let m = CoxeterDiagram::parse(&diagram)?;
    let atlas = GermAtlas::new(&g, &m, &ctx.budget);
    let base = basepoint.or_else(|| origin_of(&g)).unwrap_or(0);
    if base >= g.vertex_count() {
        return Err(Error::InvalidInput(format!("basepoint {base} out of range")).into());
    }
    let scope = germ_scope(&g);
    let germs = atlas.germs_at(base)?;
    let Some(seed) = germs.first() else {
        print_json(&json!({ "outcome": "no-germ", "basepoint": base }));
        return Ok(EXIT_VIOLATION);
    };
    let mut code = EXIT_OK;
    let mut out = match propagate(&atlas, seed, &scope)? {
        Propagation::Labelling { tau, tree_edges, checked_edges } => {
            let labels: serde_json::Map<String, Value> = tau
                .iter()
                .enumerate()
                .filter_map(|(v, c)| c.map(|c| (v.to_string(), json!(c))))
                .collect();
            json!({ "outcome": "labelling", "basepoint": base, "germs_at_basepoint": germs.len(),
                    "tree_edges": tree_edges, "checked_edges": checked_edges, "labels": labels })
        }
        Propagation::Obstruction { cycle, edge } => {
            code = EXIT_VIOLATION;
            json!({ "outcome": "obstruction", "basepoint": base, "cycle": cycle, "edge": [edge.0, edge.1] })
        }
    };
    if let Some(k) = certificate {
        let cert = short_cycle_certificate(&atlas, k, &scope)?;
        if !cert.passed() {
            code = EXIT_VIOLATION;
        }
        out["certificate"] = json!({ "passed": cert.passed(), "classes": cert.classes });
    }
    print_json(&out);
    Ok(code)
}

fn iso(cmd: IsoCmd, ctx: &Ctx) -> Result<i32> {
    match cmd {
        IsoCmd::Canon { graph, colors } => {
            let g = read_graph(&graph)?;
            let cert = canonical_form(&g, colors, &ctx.budget)?;
            print_json(&json!({ "n": cert.n, "sha256": cert.digest(), "certificate": cert.hex() }));
        }
        IsoCmd::Compare { a, b, colors } => {
            let (ga, gb) = (read_graph(&a)?, read_graph(&b)?);
            match are_isomorphic(&ga, &gb, colors, &ctx.budget)? {
                IsoCheck::Isomorphic(map) => print_json(&json!({ "isomorphic": true, "map": map })),
                IsoCheck::Mismatch(reason) => print_json(&json!({ "isomorphic": false, "reason": reason })),
            }
        }
    }
    Ok(EXIT_OK)
}

fn experiment(cmd: ExperimentCmd, ctx: &Ctx, global: &Global) -> Result<i32> {
    let ExperimentCmd::Run { config } = cmd;
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(v) = global.budget_vertices {
        cfg.budget.max_vertices = v;
    }
    if let Some(v) = global.budget_ring {
        cfg.budget.max_ring = v;
    }
    if let Some(s) = ctx.seed {
        cfg.seed = s;
    }
    if let Some(dir) = &global.cache_dir {
        cfg.cache_dir = Some(std::env::current_dir()?.join(dir));
    }
    let (path, _) = run_experiment(&cfg)?;
    emit(&format!("{}\n", path.display()));
    Ok(EXIT_OK)
}

fn run(cli: Cli) -> Result<i32> {
    let mut budget = Budget::default();
    if let Some(v) = cli.global.budget_vertices {
        budget.max_vertices = v;
    }
    if let Some(v) = cli.global.budget_ring {
        budget.max_ring = v;
    }
    let ctx = Ctx {
        budget,
        seed: cli.global.seed,
        cache: cli.global.cache_dir.clone().map(BallCache::new),
        format: cli.global.format,
    };
    match cli.command {
        Command::Field(c) => field(c, &ctx),
        Command::Ring(c) => ring(c, &ctx),
        Command::Ball(c) => ball(c, &ctx),
        Command::Geometry(c) => geometry(c),
        Command::Germs(c) => germs(c, &ctx),
        Command::Iso(c) => iso(c, &ctx),
        Command::Experiment(c) => experiment(c, &ctx, &cli.global),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
