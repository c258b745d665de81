use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value as Json};
use sha2::{Digest, Sha256};

use sgt_core::formulas::{evaluate_formula, parse_params};
use sgt_core::gap::{self, SearchOptions};
use sgt_core::generators::Generators;
use sgt_core::graph::GraphError;
use sgt_core::io;
use sgt_core::number::Value;
use sgt_core::paths;
use sgt_core::report::{self, BoundSpec, GraphDescriptor, PathStrategy, ReportRequest, TargetSpec, WeightStrategy};
use sgt_core::{spectral, Error, FiniteMetricSpace, WeightedGraph};

/// Linear and nonlinear spectral gaps of weighted graphs.
///
/// Graphs are given as a file path or a generator spec: `hamming:N`,
/// `tree:D,R`, `path:N`, `cycle:N`, `complete:N`, `regular:N,D,SEED`.
/// Targets are `self`, `two:DELTA`, `line:X1,X2,...` or a metric or points
/// file. Set SGT_SIZE_CAP to change the vertex cap.
#[derive(Parser)]
#[command(name = "sgt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Paths {
    Auto,
    Bfs,
    Tree,
    Bitfix,
}

#[derive(clap::Args)]
struct GraphArg {
    /// Graph file or generator spec.
    #[arg(long)]
    graph: String,
}

#[derive(clap::Args)]
struct TargetArg {
    /// `self`, `two:DELTA`, `line:X1,X2,...`, or a metric/points file.
    #[arg(long)]
    metric: String,
}

#[derive(clap::Args)]
struct FormatArg {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(clap::Args)]
struct PathArgs {
    #[arg(long, value_enum, default_value = "auto")]
    paths: Paths,
    /// `auto`, `uniform`, `tree-exp` or `file:PATH`.
    #[arg(long = "w", default_value = "auto")]
    w: String,
    /// Route each `(y, x)` along the reverse of `γ(x, y)`.
    #[arg(long)]
    reverse_pairs: bool,
}

#[derive(clap::Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph in the graph file format.
    Gen {
        #[command(flatten)]
        graph: GraphArg,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<String>,
    },
    /// First positive eigenvalue of the random-walk Laplacian.
    Mu1 {
        #[command(flatten)]
        graph: GraphArg,
        /// Include the whole spectrum.
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Lower bound from routing paths.
    PathBound {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        paths: PathArgs,
        /// Include the per-edge congestion profile.
        #[arg(long)]
        profile: bool,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Exact gap by enumerating every map.
    GapExact {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        target: TargetArg,
        /// Maximum number of maps to enumerate.
        #[arg(long, default_value_t = gap::DEFAULT_MAP_CAP)]
        cap: u128,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Upper bound by seeded local search.
    GapSearch {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        target: TargetArg,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Poincaré quotient of one map.
    Quotient {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        target: TargetArg,
        /// Image point of each vertex, comma separated.
        #[arg(long)]
        map: String,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Evaluate a closed form.
    Formula {
        /// hamming-identity, tree-lower, tree-upper, path-mu1,
        /// euclidean-lower or log-ratio.
        name: String,
        /// `key=value` pairs, comma separated.
        #[arg(long, default_value = "")]
        params: String,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Run several estimators and check that they agree.
    Report {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        target: TargetArg,
        /// `all` or a comma-separated subset of mu1, path-bound, gap-exact,
        /// gap-search, identity, cut, closed-forms.
        #[arg(long, default_value = "all")]
        bounds: String,
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = gap::DEFAULT_MAP_CAP)]
        cap: u128,
        /// Record wall-clock time per entry (makes output nondeterministic).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        format: FormatArg,
    },
}

struct LoadedGraph {
    graph: WeightedGraph,
    descriptor: GraphDescriptor,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn numbers(s: &str, what: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| usage(format!("{what}: `{t}` is not a nonnegative integer")))
        })
        .collect()
}

fn generated(spec: &str, gens: &Generators) -> Option<Result<WeightedGraph, Error>> {
    let (family, args) = spec.split_once(':')?;
    let parse = |expected: usize| -> Result<Vec<usize>, Error> {
        let xs = numbers(args, family)?;
        if xs.len() != expected {
            return Err(usage(format!("{family} takes {expected} parameter(s)")));
        }
        Ok(xs)
    };
    let build = || -> Result<WeightedGraph, Error> {
        Ok(match family {
            "hamming" => gens.hamming(parse(1)?[0])?,
            "tree" => {
                let p = parse(2)?;
                gens.tree_ball(p[0], p[1])?
            }
            "path" => gens.path(parse(1)?[0])?,
            "cycle" => gens.cycle(parse(1)?[0])?,
            "complete" => gens.complete(parse(1)?[0])?,
            "regular" => {
                let p = parse(3)?;
                gens.random_regular(p[0], p[1], p[2] as u64)?
            }
            _ => return Err(usage(format!("unknown graph family `{family}`"))),
        })
    };
    matches!(family, "hamming" | "tree" | "path" | "cycle" | "complete" | "regular").then(build)
}

fn load_graph(spec: &str) -> Result<LoadedGraph, Error> {
    let gens = Generators::from_env();
    if let Some(g) = generated(spec, &gens) {
        let graph = g?;
        let descriptor = GraphDescriptor::generated(&graph);
        return Ok(LoadedGraph { graph, descriptor });
    }
    let text = io::read_text(Path::new(spec))?;
    let graph = io::parse_graph(&text)?;
    if graph.vertex_count() > gens.size_cap {
        return Err(GraphError::SizeCapExceeded {
            what: format!("graph file {spec}"),
            size: graph.vertex_count() as u128,
            cap: gens.size_cap,
        }
        .into());
    }
    let descriptor = GraphDescriptor::file(&graph, sha256_hex(text.as_bytes()));
    Ok(LoadedGraph { graph, descriptor })
}

fn load_target(spec: &str) -> Result<TargetSpec, Error> {
    if spec == "self" {
        return Ok(TargetSpec::SelfMetric);
    }
    if let Some(d) = spec.strip_prefix("two:") {
        let delta: Value = d.parse().map_err(|_| usage(format!("bad distance `{d}`")))?;
        return Ok(TargetSpec::TwoPoint(delta));
    }
    if let Some(list) = spec.strip_prefix("line:") {
        let pts = list
            .split(',')
            .map(|t| t.parse::<Value>().map_err(|_| usage(format!("bad point `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(TargetSpec::Line(pts));
    }
    let text = io::read_text(Path::new(spec))?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    let space = if first.starts_with("points") {
        let cfg = io::parse_points(&text)?;
        let k = cfg.points().len();
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| sgt_core::metric::PointDistances::point_distance(&cfg, i, j))
                    .collect()
            })
            .collect();
        FiniteMetricSpace::from_f64(rows)?
    } else {
        io::parse_metric(&text)?
    };
    Ok(TargetSpec::Metric {
        space,
        label: format!("sha256:{}", sha256_hex(text.as_bytes())),
    })
}

fn weight_strategy(spec: &str, graph: &WeightedGraph) -> Result<WeightStrategy, Error> {
    Ok(match spec {
        "auto" => WeightStrategy::Auto,
        "uniform" => WeightStrategy::Uniform,
        "tree-exp" => WeightStrategy::TreeExponential,
        _ => {
            let path = spec
                .strip_prefix("file:")
                .ok_or_else(|| usage(format!("unknown w `{spec}`")))?;
            let text = io::read_text(Path::new(path))?;
            let w = io::parse_edge_weights(&text, graph)?;
            WeightStrategy::Custom {
                w,
                label: format!("file:sha256:{}", sha256_hex(text.as_bytes())),
            }
        }
    })
}

fn path_strategy(p: Paths) -> PathStrategy {
    match p {
        Paths::Auto => PathStrategy::Auto,
        Paths::Bfs => PathStrategy::Bfs,
        Paths::Tree => PathStrategy::Tree,
        Paths::Bitfix => PathStrategy::Bitfix,
    }
}

fn value_json(v: &Value) -> Json {
    json!({ "exact": v.exact_string(), "decimal": v.to_f64() })
}

fn count_json(x: u128) -> Json {
    u64::try_from(x).map(Json::from).unwrap_or_else(|_| Json::from(x.to_string()))
}

/// Flat objects become one CSV row; nested values are written as JSON.
fn render(obj: Map<String, Json>, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&Json::Object(obj)).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut flat: Vec<(String, String)> = Vec::new();
            for (k, v) in obj {
                match v {
                    Json::Object(inner) if inner.contains_key("decimal") => {
                        for (ik, iv) in inner {
                            flat.push((format!("{k}_{ik}"), scalar_cell(&iv)));
                        }
                    }
                    other => flat.push((k, scalar_cell(&other))),
                }
            }
            let mut header = String::new();
            let mut row = String::new();
            for (i, (k, v)) in flat.iter().enumerate() {
                if i > 0 {
                    header.push(',');
                    row.push(',');
                }
                header.push_str(&csv_escape(k));
                row.push_str(&csv_escape(v));
            }
            format!("{header}\n{row}\n")
        }
    }
}

fn scalar_cell(v: &Json) -> String {
    match v {
        Json::Null => String::new(),
        Json::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn search_options(a: &SearchArgs) -> SearchOptions {
    SearchOptions {
        seed: a.seed,
        restarts: a.restarts,
        max_sweeps: a.max_sweeps,
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Gen { graph, out } => {
            let g = load_graph(&graph.graph)?;
            let text = io::write_graph(&g.graph);
            match out {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|e| {
                        Error::Io(io::IoError::Read {
                            path: path.clone(),
                            message: e.to_string(),
                        })
                    })?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::Mu1 { graph, full, format } => {
            let g = load_graph(&graph.graph)?;
            let s = spectral::laplacian_spectrum(&g.graph)?;
            let mut obj = Map::new();
            obj.insert("vertices".into(), json!(g.graph.vertex_count()));
            obj.insert("mu1".into(), json!(s.mu1));
            if full {
                obj.insert("eigenvalues".into(), json!(s.eigenvalues));
            }
            Ok(render(obj, format.format))
        }
        Command::PathBound {
            graph,
            paths: p,
            profile,
            format,
        } => {
            let g = load_graph(&graph.graph)?;
            let strategy = path_strategy(p.paths);
            let mut assignment = strategy.build(&g.graph)?;
            if p.reverse_pairs {
                assignment = assignment.with_reversed_pairs();
            }
            let (w, w_label) = weight_strategy(&p.w, &g.graph)?.build(&g.graph)?;
            let c = paths::congestion(&g.graph, &w, &assignment)?;
            let mut obj = Map::new();
            obj.insert("paths".into(), json!(strategy.resolve(&g.graph).name()));
            obj.insert("w".into(), json!(w_label));
            obj.insert("A".into(), value_json(&c.value));
            obj.insert("bound".into(), value_json(&c.lower_bound()));
            obj.insert("argmax_edge".into(), json!([c.argmax_edge.0, c.argmax_edge.1]));
            if profile {
                let rows: Vec<Json> = c
                    .profile
                    .iter()
                    .map(|((a, b), v)| json!({ "edge": [a, b], "A": value_json(v) }))
                    .collect();
                obj.insert("profile".into(), Json::Array(rows));
            }
            Ok(render(obj, format.format))
        }
        Command::GapExact {
            graph,
            target,
            cap,
            format,
        } => {
            let g = load_graph(&graph.graph)?;
            let x = load_target(&target.metric)?.space(&g.graph)?;
            let r = gap::gap_exact(&g.graph, &x, cap)?;
            Ok(render(gap_json(&r), format.format))
        }
        Command::GapSearch {
            graph,
            target,
            search,
            format,
        } => {
            let g = load_graph(&graph.graph)?;
            let x = load_target(&target.metric)?.space(&g.graph)?;
            let r = gap::gap_search(&g.graph, &x, &search_options(&search))?;
            let mut obj = gap_json(&r);
            obj.insert("max_sweeps".into(), json!(search.max_sweeps));
            Ok(render(obj, format.format))
        }
        Command::Quotient {
            graph,
            target,
            map,
            format,
        } => {
            let g = load_graph(&graph.graph)?;
            let x = load_target(&target.metric)?.space(&g.graph)?;
            let f = numbers(&map, "map")?;
            let q = gap::poincare_quotient(&g.graph, &x, &f)?;
            let mut obj = Map::new();
            obj.insert("value".into(), value_json(&q.ratio));
            obj.insert("numerator".into(), value_json(&q.numerator));
            obj.insert("denominator".into(), value_json(&q.denominator));
            Ok(render(obj, format.format))
        }
        Command::Formula { name, params, format } => {
            let v = evaluate_formula(&name, &parse_params(&params)?)?;
            let params: BTreeMap<String, String> = v.parameters.into_iter().collect();
            let mut obj = Map::new();
            obj.insert("formula".into(), json!(v.formula_id));
            obj.insert("parameters".into(), json!(params));
            obj.insert("value".into(), value_json(&v.value));
            Ok(render(obj, format.format))
        }
        Command::Report {
            graph,
            target,
            bounds,
            paths: p,
            search,
            cap,
            timings,
            format,
        } => {
            let g = load_graph(&graph.graph)?;
            let target = load_target(&target.metric)?;
            let weights = weight_strategy(&p.w, &g.graph)?;
            let mut req = ReportRequest::new(g.graph, g.descriptor, target);
            if bounds != "all" {
                req.bounds = bounds
                    .split(',')
                    .map(|b| BoundSpec::parse(b.trim()).ok_or_else(|| usage(format!("unknown bound `{b}`"))))
                    .collect::<Result<_, _>>()?;
                req.skip_inapplicable = false;
            }
            req.paths = path_strategy(p.paths);
            req.weights = weights;
            req.reverse_pairs = p.reverse_pairs;
            req.search = search_options(&search);
            req.map_cap = cap;
            req.timings = timings;
            let r = report::run_report(&req)?;
            Ok(match format.format {
                Format::Json => report::emit_json(&r),
                Format::Csv => report::emit_csv(&r),
            })
        }
    }
}

fn gap_json(r: &gap::GapResult) -> Map<String, Json> {
    let mut obj = Map::new();
    obj.insert("method".into(), json!(r.method.as_str()));
    obj.insert("value".into(), value_json(&r.value));
    obj.insert("numerator".into(), value_json(&r.numerator));
    obj.insert("denominator".into(), value_json(&r.denominator));
    obj.insert("witness".into(), json!(r.witness));
    obj.insert("maps_examined".into(), count_json(r.maps_examined));
    obj.insert("seed".into(), json!(r.seed));
    obj.insert("restarts".into(), json!(r.restarts));
    obj
}

fn fail(kind: &str, code: i32, message: &str) -> ExitCode {
    let line = json!({ "error": kind, "exit": code, "message": message });
    eprintln!("{line}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail("usage", 2, first);
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e.kind(), e.exit_code(), &e.to_string()),
    }
}
