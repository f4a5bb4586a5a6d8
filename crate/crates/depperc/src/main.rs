//! Command-line front end.
//!
//! Every subcommand prints one JSON document (or CSV rows mirroring the
//! results) with the shape `{command, params, results, seed, version}`.
//! Identical command lines with identical seeds produce byte-identical
//! output; pass `--timing` to append a `wall_time_ms` field when you want
//! timings more than reproducibility.
//!
//! Exit codes: 0 success, 2 invalid parameters, 3 resource guard exceeded,
//! 4 i/o error.

use clap::{Args, Parser, Subcommand};
use depperc::error::{Error, Result};
use depperc::{experiments, oracle, renorm, transfer};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "depperc", version, about = "Dependent percolation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Write output to this path instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format.
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Size of the worker thread pool (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Append wall-clock timing to the output (breaks byte-identical reruns).
    #[arg(long, default_value_t = false)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact survival probability across a diagonal box.
    ExactSurvival {
        #[arg(long)]
        w: usize,
        #[arg(long)]
        ell: usize,
        /// Single marginal; alternative to --p-sweep.
        #[arg(long)]
        p: Option<f64>,
        /// Marginal sweep start:stop:step (inclusive).
        #[arg(long, value_name = "START:STOP:STEP")]
        p_sweep: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo survival estimate with an exact confidence interval.
    McSurvival {
        #[arg(long)]
        w: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_name = "START:STOP:STEP")]
        p_sweep: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Iterate the renormalization map from a starting marginal.
    Renorm {
        #[arg(long)]
        w: usize,
        #[arg(long)]
        p0: f64,
        #[arg(long, default_value_t = renorm::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = renorm::DEFAULT_EPS)]
        eps: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Blocked-fan branching experiment on the oriented n-dimensional lattice.
    Branching {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        i_max: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sample moments of the flow-weighted connected count on a d-ary tree.
    TreeMoments {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "product")]
        kernel: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the exhaustive oracle suites, or check one explicit joint table.
    Verify {
        /// Joint-table file: `edges:`/`dist:` header then `bitstring prob` lines.
        #[arg(long)]
        table: Option<std::path::PathBuf>,
        /// Dependence range for the table checks.
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Number of generated tables in the equivalence battery.
        #[arg(long, default_value_t = 20)]
        tables: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Reproduce a survival table and write it as JSON and CSV.
    Reproduce {
        /// Which table: `fig5` (exact, w=20) or `fig6` (Monte Carlo, w=50).
        #[arg(long, value_parser = ["fig5", "fig6"])]
        table: String,
        /// Base output path; `.json` and `.csv` are appended.
        #[arg(long)]
        out: std::path::PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
        /// Size of the worker thread pool (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::InvalidParam(_) => 2,
                Error::Guard(_) => 3,
                Error::Io { .. } => 4,
            }
        }
    };
    std::process::exit(code);
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // Ignore the error if a pool already exists (tests, repeat runs).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::invalid(format!(
            "sweep {spec:?} is not START:STOP:STEP"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number {s:?}")))
        })
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(Error::invalid(format!("empty sweep {spec:?}")));
    }
    let mut points = Vec::new();
    let mut i = 0u32;
    loop {
        let p = start + step * f64::from(i);
        if p > stop + 1e-12 {
            break;
        }
        points.push(p.min(stop));
        i += 1;
    }
    Ok(points)
}

fn marginals(p: Option<f64>, sweep: Option<&str>) -> Result<Vec<f64>> {
    match (p, sweep) {
        (Some(p), None) => Ok(vec![p]),
        (None, Some(spec)) => parse_sweep(spec),
        (Some(_), Some(_)) => Err(Error::invalid("give either --p or --p-sweep, not both")),
        (None, None) => Err(Error::invalid("one of --p or --p-sweep is required")),
    }
}

#[derive(Serialize)]
struct OutputDoc {
    command: &'static str,
    params: Value,
    results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<u128>,
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::ExactSurvival {
            w,
            ell,
            p,
            p_sweep,
            common,
        } => {
            init_threads(common.threads);
            let points = marginals(p, p_sweep.as_deref())?;
            let rows: Vec<Value> = points
                .iter()
                .map(|&p| {
                    transfer::exact_survival(w, ell, p)
                        .map(|q| json!({"w": w, "ell": ell, "p": p, "q": q}))
                })
                .collect::<Result<_>>()?;
            emit(
                OutputDoc {
                    command: "exact-survival",
                    params: json!({"w": w, "ell": ell, "p": points}),
                    results: Value::Array(rows),
                    seed: None,
                    version: env!("CARGO_PKG_VERSION"),
                    wall_time_ms: common.timing.then(|| started.elapsed().as_millis()),
                },
                &common,
            )
        }
        Command::McSurvival {
            w,
            ell,
            p,
            p_sweep,
            trials,
            seed,
            confidence,
            common,
        } => {
            init_threads(common.threads);
            let points = marginals(p, p_sweep.as_deref())?;
            let rows: Vec<Value> = points
                .iter()
                .map(|&p| {
                    experiments::mc_survival(w, ell, p, trials, seed, confidence)
                        .map(|est| serde_json::to_value(est).expect("serialize"))
                })
                .collect::<Result<_>>()?;
            emit(
                OutputDoc {
                    command: "mc-survival",
                    params: json!({
                        "w": w, "ell": ell, "p": points, "trials": trials,
                        "confidence": confidence
                    }),
                    results: Value::Array(rows),
                    seed: Some(seed),
                    version: env!("CARGO_PKG_VERSION"),
                    wall_time_ms: common.timing.then(|| started.elapsed().as_millis()),
                },
                &common,
            )
        }
        Command::Renorm {
            w,
            p0,
            max_iters,
            eps,
            common,
        } => {
            init_threads(common.threads);
            let trajectory = renorm::iterate(p0, w, max_iters, eps)?;
            emit(
                OutputDoc {
                    command: "renorm",
                    params: json!({"w": w, "p0": p0, "max_iters": max_iters, "eps": eps}),
                    results: serde_json::to_value(&trajectory).expect("serialize"),
                    seed: None,
                    version: env!("CARGO_PKG_VERSION"),
                    wall_time_ms: common.timing.then(|| started.elapsed().as_millis()),
                },
                &common,
            )
        }
        Command::Branching {
            n,
            p,
            i_max,
            trials,
            seed,
            common,
        } => {
            init_threads(common.threads);
            let rows = experiments::branching_experiment(n, p, i_max, trials, seed)?;
            emit(
                OutputDoc {
                    command: "branching",
                    params: json!({"n": n, "p": p, "i_max": i_max, "trials": trials}),
                    results: serde_json::to_value(&rows).expect("serialize"),
                    seed: Some(seed),
                    version: env!("CARGO_PKG_VERSION"),
                    wall_time_ms: common.timing.then(|| started.elapsed().as_millis()),
                },
                &common,
            )
        }
        Command::TreeMoments {
            d,
            p,
            depth,
            trials,
            seed,
            kernel,
            common,
        } => {
            init_threads(common.threads);
            let kernel: experiments::TreeKernel = kernel.parse()?;
            let report = experiments::tree_moments(d, p, depth, trials, seed, kernel)?;
            emit(
                OutputDoc {
                    command: "tree-moments",
                    params: json!({
                        "d": d, "p": p, "depth": depth, "trials": trials,
                        "kernel": kernel
                    }),
                    results: serde_json::to_value(report).expect("serialize"),
                    seed: Some(seed),
                    version: env!("CARGO_PKG_VERSION"),
                    wall_time_ms: common.timing.then(|| started.elapsed().as_millis()),
                },
                &common,
            )
        }
        Command::Verify {
            table,
            k,
            tables,
            seed,
            common,
        } => {
            init_threads(common.threads);
            let (params, rows) = match table {
                Some(path) => {
                    let loaded = load_table_file(&path)?;
                    (
                        json!({"table": path, "k": k}),
                        verify_table(&loaded.0, &loaded.1, k)?,
                    )
                }
                None => (
                    json!({"k": k, "tables": tables}),
                    builtin_verify(tables, seed)?,
                ),
            };
            emit(
                OutputDoc {
                    command: "verify",
                    params,
                    results: serde_json::to_value(&rows).expect("serialize"),
                    seed: Some(seed),
                    version: env!("CARGO_PKG_VERSION"),
                    wall_time_ms: common.timing.then(|| started.elapsed().as_millis()),
                },
                &common,
            )
        }
        Command::Reproduce {
            table,
            out,
            trials,
            seed,
            confidence,
            threads,
        } => {
            init_threads(threads);
            let (results, params) = match table.as_str() {
                "fig5" => (
                    serde_json::to_value(experiments::exact_survival_table()?).expect("serialize"),
                    json!({"table": "fig5", "w": 20}),
                ),
                _ => (
                    serde_json::to_value(experiments::mc_survival_table(trials, seed, confidence)?)
                        .expect("serialize"),
                    json!({
                        "table": "fig6", "w": 50, "trials": trials,
                        "confidence": confidence
                    }),
                ),
            };
            let doc = OutputDoc {
                command: "reproduce",
                params,
                results,
                seed: Some(seed),
                version: env!("CARGO_PKG_VERSION"),
                wall_time_ms: None,
            };
            let json_path = out.with_extension("json");
            let csv_path = out.with_extension("csv");
            write_file(&json_path, &render_json(&doc))?;
            write_file(&csv_path, &render_csv(&doc.results))?;
            println!("wrote {} and {}", json_path.display(), csv_path.display());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct VerifyRow {
    check: String,
    pass: bool,
    detail: String,
}

fn verify_table(
    table: &oracle::JointTable,
    graph: &oracle::SmallGraph,
    k: u32,
) -> Result<Vec<VerifyRow>> {
    let pa = oracle::check_positive_association(table)?;
    let kind = oracle::check_k_independence(table, graph, k)?;
    let cond = oracle::check_information_propagation(table, graph, k)?;
    Ok(vec![
        VerifyRow {
            check: "positive_association".into(),
            pass: pa,
            detail: String::new(),
        },
        VerifyRow {
            check: format!("{k}-independence"),
            pass: kind,
            detail: String::new(),
        },
        VerifyRow {
            check: format!("information-propagation condition (k={k})"),
            pass: cond,
            detail: "must equal the conjunction of the two checks above".into(),
        },
        VerifyRow {
            check: "equivalence".into(),
            pass: cond == (pa && kind),
            detail: format!("condition {cond} vs PA {pa} and independence {kind}"),
        },
    ])
}

fn builtin_verify(tables: u64, seed: u64) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();

    let product = oracle::JointTable::product(4, 0.37)?;
    let cycle = oracle::SmallGraph::four_cycle();
    rows.push(VerifyRow {
        check: "product measure is positively associated".into(),
        pass: oracle::check_positive_association(&product)?,
        detail: String::new(),
    });
    rows.push(VerifyRow {
        check: "product measure is 0-independent".into(),
        pass: oracle::check_k_independence(&product, &cycle, 0)?,
        detail: String::new(),
    });

    let (match_table, match_graph) = oracle::four_cycle_match_table();
    let pa = oracle::check_positive_association(&match_table)?;
    let one_indep = oracle::check_k_independence(&match_table, &match_graph, 1)?;
    let cond = oracle::check_information_propagation(&match_table, &match_graph, 1)?;
    rows.push(VerifyRow {
        check: "4-cycle matching model: 1-independent, not PA, fails condition".into(),
        pass: one_indep && !pa && !cond,
        detail: format!("1-indep {one_indep}, PA {pa}, condition {cond}"),
    });
    let unconditioned = match_table.conditional_open_prob(0, &[]);
    let open_boundary = match_table.conditional_open_prob(0, &[(3, true), (1, true)]);
    let with_far_closed = match_table.conditional_open_prob(0, &[(3, true), (1, true), (2, false)]);
    rows.push(VerifyRow {
        check: "4-cycle matching model: conditioning witness 1/2, 1/2, 0".into(),
        pass: unconditioned == Some(0.5)
            && open_boundary == Some(0.5)
            && with_far_closed == Some(0.0),
        detail: format!("{unconditioned:?}, {open_boundary:?}, {with_far_closed:?}"),
    });

    let mut disagreements = 0u64;
    let mut truths = [0u64; 2];
    for t in 0..tables {
        let base = oracle::random_monotone_table(4, seed.wrapping_add(t))?;
        let blended = oracle::anticorrelated_blend(&base, 0, 2, 0.4)?;
        let theta = 0.3 + 0.4 * (t as f64 / tables.max(1) as f64);
        let product = oracle::JointTable::product(4, theta)?;
        let site_induced = oracle::site_induced_cycle_table(theta)?;
        for k in [0u32, 1] {
            for table in [&base, &blended, &product, &site_induced] {
                let lhs = oracle::check_information_propagation(table, &cycle, k)?;
                let rhs = oracle::check_positive_association(table)?
                    && oracle::check_k_independence(table, &cycle, k)?;
                if lhs != rhs {
                    disagreements += 1;
                }
                truths[usize::from(rhs)] += 1;
            }
        }
    }
    rows.push(VerifyRow {
        check: format!("equivalence battery over {tables} generated tables"),
        pass: disagreements == 0 && truths[0] > 0 && truths[1] > 0,
        detail: format!(
            "{disagreements} disagreements; {} negative / {} positive cases",
            truths[0], truths[1]
        ),
    });

    let mut bound_ok = true;
    for i in 0..=20 {
        let p = i as f64 / 20.0;
        let (rho, sigma) = oracle::domination_bound(p, 4, 1)?;
        if !(rho <= p + 1e-12 && p <= sigma + 1e-12) {
            bound_ok = false;
        }
    }
    rows.push(VerifyRow {
        check: "closed-form domination bounds bracket the marginal".into(),
        pass: bound_ok,
        detail: String::new(),
    });

    Ok(rows)
}

/// Parse the explicit joint-table format: an `edges:` line naming the edges,
/// `dist: i j d` lines for every unordered pair, then one `bitstring prob`
/// line per configuration (leftmost character = edge 0).
fn load_table_file(path: &std::path::Path) -> Result<(oracle::JointTable, oracle::SmallGraph)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut edges: Option<Vec<String>> = None;
    let mut dists: Vec<(usize, usize, u32)> = Vec::new();
    let mut probs: Vec<(usize, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::invalid(format!("{}:{}: {msg}", path.display(), lineno + 1));
        if let Some(rest) = line.strip_prefix("edges:") {
            edges = Some(rest.split_whitespace().map(str::to_string).collect());
        } else if let Some(rest) = line.strip_prefix("dist:") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad("expected `dist: i j d`"));
            }
            let i = parts[0].parse().map_err(|_| bad("bad edge index"))?;
            let j = parts[1].parse().map_err(|_| bad("bad edge index"))?;
            let d = parts[2].parse().map_err(|_| bad("bad distance"))?;
            dists.push((i, j, d));
        } else {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(bad("expected `bitstring probability`"));
            }
            let n = edges
                .as_ref()
                .ok_or_else(|| bad("`edges:` line must come first"))?
                .len();
            if parts[0].len() != n {
                return Err(bad("bitstring length does not match the edge count"));
            }
            let mut config = 0usize;
            for (e, ch) in parts[0].chars().enumerate() {
                match ch {
                    '1' => config |= 1 << e,
                    '0' => {}
                    _ => return Err(bad("bitstring must be 0s and 1s")),
                }
            }
            let prob: f64 = parts[1].parse().map_err(|_| bad("bad probability"))?;
            probs.push((config, prob));
        }
    }
    let edges = edges.ok_or_else(|| Error::invalid("missing `edges:` line".to_string()))?;
    let n = edges.len();
    let mut matrix = vec![vec![u32::MAX; n]; n];
    for (e, row) in matrix.iter_mut().enumerate() {
        row[e] = 0;
    }
    for (i, j, d) in dists {
        if i >= n || j >= n {
            return Err(Error::invalid(format!("dist indices {i},{j} out of range")));
        }
        matrix[i][j] = d;
        matrix[j][i] = d;
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if d == u32::MAX {
                return Err(Error::invalid(format!(
                    "missing dist line for edge pair {i},{j}"
                )));
            }
        }
    }
    let mut dense = vec![0.0; 1 << n];
    for (config, prob) in probs {
        dense[config] += prob;
    }
    Ok((
        oracle::JointTable::new(dense)?,
        oracle::SmallGraph::from_edge_distances(matrix)?,
    ))
}

fn render_json(doc: &OutputDoc) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("serialize");
    text.push('\n');
    text
}

fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (key, inner) in map {
                let name = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten_into(&name, inner, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// CSV mirror of the results: one row per result object, dotted keys for
/// nested fields.
fn render_csv(results: &Value) -> String {
    let rows: Vec<&Value> = match results {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    let mut text = String::new();
    let mut header: Option<Vec<String>> = None;
    for row in rows {
        let mut flat = Vec::new();
        flatten_into("", row, &mut flat);
        if header.is_none() {
            let names: Vec<String> = flat.iter().map(|(k, _)| k.clone()).collect();
            text.push_str(&names.join(","));
            text.push('\n');
            header = Some(names);
        }
        let values: Vec<String> = flat.into_iter().map(|(_, v)| v).collect();
        text.push_str(&values.join(","));
        text.push('\n');
    }
    text
}

fn write_file(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(doc: OutputDoc, common: &CommonArgs) -> Result<()> {
    let rendered = match common.format.as_str() {
        "csv" => render_csv(&doc.results),
        _ => render_json(&doc),
    };
    match &common.out {
        Some(path) => write_file(path, &rendered),
        None => std::io::stdout()
            .write_all(rendered.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".to_string(),
                source,
            }),
    }
}
