//! Command-line front end: theta computation, stability-number bounds from
//! the exact subgraph hierarchies, hierarchy levels, facet enumeration, the
//! violated-subgraph search, formulation comparison and exact alpha.
//!
//! Output is CSV (stable schema), JSON, or a human-readable summary. With a
//! fixed seed and `--no-time`, repeated runs produce byte-identical output.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use thetabound::graph::{
    circulant, erdos_renyi, hamming_complement_6_4, paley, parse_dimacs, Graph, VertexSubset,
};
use thetabound::hierarchy::{
    compare_formulations, compute_bound, compute_level, cutting_plane_search, BoundReport,
    Hierarchy, SearchConfig,
};
use thetabound::model::{build_theta_n, build_theta_nplus1, EscMode};
use thetabound::polytope::facets_stab2_empty_gated;
use thetabound::solver::{solve, SolveStatus, SolverSettings};
use thetabound::stable_sets::alpha_bruteforce;

#[derive(Parser)]
#[command(
    name = "thetabound",
    about = "Upper bounds on the stability number via theta-function SDPs with exact subgraph constraints",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute θ(G) through both SDP formulations and cross-check them.
    Theta {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        output: OutputOpts,
        #[command(flatten)]
        solver: SolverOpts,
        /// Print the interior-point iteration log to stderr.
        #[arg(long)]
        log_iters: bool,
    },
    /// Exact stability number by branch and bound.
    Alpha {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Bound from a chosen hierarchy and an explicit subset selection.
    Bound {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        output: OutputOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[arg(long, value_enum, default_value = "esh")]
        hierarchy: HierarchyArg,
        /// Constraint subsets, e.g. "1,2,3;4,5,6". Mutually exclusive with --k.
        #[arg(long)]
        subsets: Option<String>,
        /// Subset order for --all-subsets.
        #[arg(long)]
        k: Option<usize>,
        /// Add every subset of order --k.
        #[arg(long)]
        all_subsets: bool,
        #[arg(long, value_enum, default_value = "lambda")]
        mode: ModeArg,
    },
    /// The k-th hierarchy level (every order-k subset).
    Level {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        output: OutputOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[arg(long, value_enum, default_value = "esh")]
        hierarchy: HierarchyArg,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "lambda")]
        mode: ModeArg,
    },
    /// Iterative violated-subgraph cutting-plane search.
    Search {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        output: OutputOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[arg(long, value_enum, default_value = "esh")]
        hierarchy: HierarchyArg,
        /// Subgraph order to separate.
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        rounds: usize,
        #[arg(long, default_value_t = 200)]
        max_per_round: usize,
        /// Random candidates per round (0 = 50·n).
        #[arg(long, default_value_t = 0)]
        budget: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol_viol: f64,
        #[arg(long, default_value_t = 20)]
        seed: u64,
        /// Also write the per-round trajectory CSV to this path.
        #[arg(long)]
        trajectory_out: Option<PathBuf>,
    },
    /// Enumerate the facets of the squared stable set polytope of the
    /// edgeless graph of order k.
    Facets {
        #[command(flatten)]
        output: OutputOpts,
        #[arg(long)]
        k: usize,
        /// Allow the long-running k = 6 enumeration (116764 facets).
        #[arg(long)]
        allow_long: bool,
        /// Write the inequalities in PORTA-like .ieq form to this path.
        #[arg(long)]
        ieq: Option<PathBuf>,
    },
    /// Bounds from all three hierarchies on the same subsets.
    Compare {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        output: OutputOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[arg(long)]
        subsets: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        all_subsets: bool,
        #[arg(long, value_enum, default_value = "lambda")]
        mode: ModeArg,
    },
    /// Run `theta` on every instance listed in a batch file (one generator
    /// spec or DIMACS path per line; # starts a comment).
    Batch {
        /// Batch file path.
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
        #[command(flatten)]
        solver: SolverOpts,
    },
}

#[derive(Args)]
struct InputOpts {
    /// Generator spec: paley:61, er:60:0.25:7, hamming64,
    /// circulant:47:1,2,3, complement:<path>, empty:5, complete:5, cycle:5.
    #[arg(long, conflicts_with = "file")]
    gen: Option<String>,
    /// DIMACS edge-format file (or JSON graph when the extension is .json).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Compute the exact stability number even for larger graphs (n ≤ 70).
    #[arg(long)]
    with_alpha: bool,
    /// Skip the stability number entirely.
    #[arg(long, conflicts_with = "with_alpha")]
    no_alpha: bool,
}

#[derive(Args)]
struct OutputOpts {
    #[arg(long, value_enum, default_value = "pretty")]
    format: FormatArg,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report all solve times as zero (for byte-stable output).
    #[arg(long)]
    no_time: bool,
}

#[derive(Args)]
struct SolverOpts {
    #[arg(long, default_value_t = 1e-7)]
    tol_gap: f64,
    #[arg(long, default_value_t = 1e-7)]
    tol_feas: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

impl SolverOpts {
    fn settings(&self) -> SolverSettings {
        SolverSettings {
            tol_gap: self.tol_gap,
            tol_feas: self.tol_feas,
            max_iter: self.max_iter,
            step_frac: 0.98,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HierarchyArg {
    Esh,
    Cesh,
    Sesh,
}

impl From<HierarchyArg> for Hierarchy {
    fn from(h: HierarchyArg) -> Self {
        match h {
            HierarchyArg::Esh => Hierarchy::Esh,
            HierarchyArg::Cesh => Hierarchy::Cesh,
            HierarchyArg::Sesh => Hierarchy::Sesh,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lambda,
    Facets,
}

impl From<ModeArg> for EscMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lambda => EscMode::Lambda,
            ModeArg::Facets => EscMode::Facets,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Pretty,
}

/// One output record, aligned with the CSV schema.
struct Row {
    name: String,
    n: usize,
    m: usize,
    formulation: String,
    k_or_j: String,
    bound: Option<f64>,
    alpha: Option<usize>,
    solve_s: f64,
    iters: usize,
    status: String,
}

const CSV_HEADER: &str = "name,n,m,formulation,k_or_J,bound,alpha,solve_s,iters,status";

impl Row {
    fn csv(&self, no_time: bool) -> String {
        let bound = self
            .bound
            .map(|b| format!("{b:.6}"))
            .unwrap_or_default();
        let alpha = self.alpha.map(|a| a.to_string()).unwrap_or_default();
        let secs = if no_time { 0.0 } else { self.solve_s };
        format!(
            "{},{},{},{},{},{},{},{:.3},{},{}",
            self.name,
            self.n,
            self.m,
            self.formulation,
            self.k_or_j,
            bound,
            alpha,
            secs,
            self.iters,
            self.status
        )
    }

    fn json(&self, no_time: bool) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "formulation": self.formulation,
            "k_or_J": self.k_or_j,
            "bound": self.bound,
            "alpha": self.alpha,
            "solve_s": if no_time { 0.0 } else { self.solve_s },
            "iters": self.iters,
            "status": self.status,
        })
    }

    fn pretty(&self, no_time: bool) -> String {
        let bound = self
            .bound
            .map(|b| format!("{b:.6}"))
            .unwrap_or_else(|| "-".into());
        let alpha = self
            .alpha
            .map(|a| a.to_string())
            .unwrap_or_else(|| "-".into());
        let secs = if no_time { 0.0 } else { self.solve_s };
        format!(
            "{:<24} n={:<4} m={:<5} {:<10} {:<12} bound={:<12} alpha={:<4} {:.3}s it={} {}",
            self.name,
            self.n,
            self.m,
            self.formulation,
            self.k_or_j,
            bound,
            alpha,
            secs,
            self.iters,
            self.status
        )
    }
}

fn from_report(report: &BoundReport, k_or_j: String) -> Row {
    Row {
        name: report.graph_name.clone(),
        n: report.n,
        m: report.m,
        formulation: report.hierarchy.to_string(),
        k_or_j,
        bound: Some(report.bound),
        alpha: report.alpha_lb,
        solve_s: report.solve_seconds,
        iters: report.solver_iterations,
        status: report.solver_status.clone(),
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default exit code for usage errors is 2; this tool
            // reserves 2 for solver failures
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn load_graph(input: &InputOpts) -> Result<Graph> {
    match (&input.gen, &input.file) {
        (Some(spec), None) => parse_generator(spec),
        (None, Some(path)) => load_graph_file(path),
        _ => bail!("exactly one of --gen or --file is required"),
    }
}

fn load_graph_file(path: &PathBuf) -> Result<Graph> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(Graph::from_json(&text)?);
    }
    let parsed = parse_dimacs(&text)?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    let mut g = parsed.graph;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dimacs".into());
    g.set_name(stem);
    Ok(g)
}

fn parse_generator(spec: &str) -> Result<Graph> {
    let parts: Vec<&str> = spec.splitn(2, ':').collect();
    let rest = parts.get(1).copied().unwrap_or("");
    let int = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| anyhow!("bad integer {s:?} in generator spec"))
    };
    match parts[0] {
        "paley" => Ok(paley(int(rest)? as u64)?),
        "hamming64" => Ok(hamming_complement_6_4()),
        "er" => {
            let fields: Vec<&str> = rest.split(':').collect();
            if fields.len() != 3 {
                bail!("er spec is er:<n>:<p>:<seed>");
            }
            let n = int(fields[0])?;
            let p: f64 = fields[1]
                .parse()
                .map_err(|_| anyhow!("bad probability {:?}", fields[1]))?;
            let seed: u64 = fields[2]
                .parse()
                .map_err(|_| anyhow!("bad seed {:?}", fields[2]))?;
            Ok(erdos_renyi(n, p, seed)?)
        }
        "circulant" => {
            let fields: Vec<&str> = rest.split(':').collect();
            if fields.len() != 2 {
                bail!("circulant spec is circulant:<n>:<c1,c2,...>");
            }
            let n = int(fields[0])?;
            let conns: Vec<usize> = fields[1]
                .split(',')
                .map(int)
                .collect::<Result<_>>()?;
            Ok(circulant(n, &conns)?)
        }
        "complement" => {
            let inner = load_graph_file(&PathBuf::from(rest))?;
            Ok(inner.complement())
        }
        "empty" => Ok(Graph::empty(int(rest)?)),
        "complete" => Ok(Graph::complete(int(rest)?)),
        "cycle" => Ok(Graph::cycle(int(rest)?)),
        other => bail!("unknown generator {other:?}"),
    }
}

fn maybe_alpha(g: &Graph, input: &InputOpts) -> Result<Option<usize>> {
    if input.no_alpha {
        return Ok(None);
    }
    if input.with_alpha || g.n() <= 30 {
        Ok(Some(alpha_bruteforce(g)?))
    } else {
        Ok(None)
    }
}

fn parse_subsets(spec: &str) -> Result<Vec<VertexSubset>> {
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let members: Result<Vec<usize>> = part
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| anyhow!("bad vertex {v:?} in subset spec"))
                })
                .collect();
            Ok(VertexSubset::new(members?))
        })
        .collect()
}

fn selection_from(
    g: &Graph,
    subsets: &Option<String>,
    k: Option<usize>,
    all_subsets: bool,
) -> Result<Vec<VertexSubset>> {
    match (subsets, k, all_subsets) {
        (Some(spec), None, false) => parse_subsets(spec),
        (None, Some(k), true) => Ok(thetabound::graph::all_subsets_of_order(g.n(), k)),
        (None, None, false) => Ok(Vec::new()),
        _ => bail!("use either --subsets or --k with --all-subsets"),
    }
}

fn emit(output: &OutputOpts, rows: &[Row], extra_pretty: &[String]) -> Result<()> {
    let text = match output.format {
        FormatArg::Csv => {
            let mut lines = vec![CSV_HEADER.to_string()];
            lines.extend(rows.iter().map(|r| r.csv(output.no_time)));
            lines.join("\n") + "\n"
        }
        FormatArg::Json => {
            let values: Vec<serde_json::Value> =
                rows.iter().map(|r| r.json(output.no_time)).collect();
            serde_json::to_string_pretty(&values)? + "\n"
        }
        FormatArg::Pretty => {
            let mut lines: Vec<String> =
                rows.iter().map(|r| r.pretty(output.no_time)).collect();
            lines.extend(extra_pretty.iter().cloned());
            lines.join("\n") + "\n"
        }
    };
    match &output.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn status_exit(rows: &[Row]) -> i32 {
    if rows
        .iter()
        .all(|r| r.status == "optimal" || r.status == "exact" || r.status == "enumerated")
    {
        0
    } else {
        2
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Theta {
            input,
            output,
            solver,
            log_iters,
        } => {
            let g = load_graph(&input)?;
            let alpha = maybe_alpha(&g, &input)?;
            let rows = theta_rows(&g, &solver.settings(), alpha, log_iters)?;
            let ext = rows[0].bound.unwrap();
            let tra = rows[1].bound.unwrap();
            let mut code = status_exit(&rows);
            if (ext - tra).abs() > 1e-5 {
                eprintln!(
                    "warning: formulations disagree: extended {ext:.7} vs trace {tra:.7}"
                );
                code = 2;
            }
            emit(&output, &rows, &[])?;
            Ok(code)
        }
        Command::Alpha { input, output } => {
            let g = load_graph(&input)?;
            let t0 = std::time::Instant::now();
            let alpha = alpha_bruteforce(&g)?;
            let row = Row {
                name: g.name().into(),
                n: g.n(),
                m: g.m(),
                formulation: "alpha".into(),
                k_or_j: "-".into(),
                bound: Some(alpha as f64),
                alpha: Some(alpha),
                solve_s: t0.elapsed().as_secs_f64(),
                iters: 0,
                status: "exact".into(),
            };
            emit(&output, &[row], &[])?;
            Ok(0)
        }
        Command::Bound {
            input,
            output,
            solver,
            hierarchy,
            subsets,
            k,
            all_subsets,
            mode,
        } => {
            let g = load_graph(&input)?;
            let alpha = maybe_alpha(&g, &input)?;
            let selection = selection_from(&g, &subsets, k, all_subsets)?;
            let report = compute_bound(
                &g,
                hierarchy.into(),
                &selection,
                mode.into(),
                &solver.settings(),
                alpha,
            )?;
            let k_or_j = match (k, selection.len()) {
                (Some(k), _) => format!("k={k}"),
                (None, 0) => "J=empty".into(),
                (None, c) => format!("J={c}"),
            };
            let rows = vec![from_report(&report, k_or_j)];
            emit(&output, &rows, &[])?;
            Ok(status_exit(&rows))
        }
        Command::Level {
            input,
            output,
            solver,
            hierarchy,
            k,
            mode,
        } => {
            let g = load_graph(&input)?;
            let alpha = maybe_alpha(&g, &input)?;
            let report = compute_level(
                &g,
                hierarchy.into(),
                k,
                mode.into(),
                &solver.settings(),
                alpha,
            )?;
            let rows = vec![from_report(&report, format!("k={k}"))];
            emit(&output, &rows, &[])?;
            Ok(status_exit(&rows))
        }
        Command::Search {
            input,
            output,
            solver,
            hierarchy,
            k,
            rounds,
            max_per_round,
            budget,
            tol_viol,
            seed,
            trajectory_out,
        } => {
            let g = load_graph(&input)?;
            let alpha = maybe_alpha(&g, &input)?;
            let cfg = SearchConfig {
                order: k,
                rounds,
                max_per_round,
                candidate_budget: budget,
                tol_viol,
                seed,
            };
            let (selection, report) =
                cutting_plane_search(&g, hierarchy.into(), &cfg, &solver.settings(), alpha)?;
            if let Some(path) = trajectory_out {
                let mut text =
                    String::from("round,formulation,bound,escs_added,escs_total,solve_seconds\n");
                for r in &report.trajectory {
                    let secs = if output.no_time { 0.0 } else { r.solve_seconds };
                    text.push_str(&format!(
                        "{},{},{:.6},{},{},{:.3}\n",
                        r.round, report.hierarchy, r.bound, r.escs_added, r.escs_total, secs
                    ));
                }
                fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let mut extra: Vec<String> = report
                .trajectory
                .iter()
                .map(|r| {
                    format!(
                        "  round {:>2}: bound {:<12.6} escs +{:<4} total {:<5}",
                        r.round, r.bound, r.escs_added, r.escs_total
                    )
                })
                .collect();
            for (round, bound) in report.floor_improvements() {
                extra.push(format!(
                    "  floor improvement at round {round}: bound {bound:.6}"
                ));
            }
            let rows = vec![from_report(&report, format!("search-k{k}"))];
            let _ = selection;
            emit(&output, &rows, &extra)?;
            Ok(status_exit(&rows))
        }
        Command::Facets {
            output,
            k,
            allow_long,
            ieq,
        } => {
            let t0 = std::time::Instant::now();
            let system = facets_stab2_empty_gated(k, allow_long)?;
            let secs = t0.elapsed().as_secs_f64();
            if let Some(path) = ieq {
                fs::write(&path, system.to_ieq())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let row = Row {
                name: format!("stab2-empty-{k}"),
                n: k,
                m: 0,
                formulation: "facets".into(),
                k_or_j: format!("k={k}"),
                bound: Some(system.len() as f64),
                alpha: None,
                solve_s: secs,
                iters: 0,
                status: "enumerated".into(),
            };
            let extra = vec![format!("{} facets", system.len())];
            emit(&output, &[row], &extra)?;
            Ok(0)
        }
        Command::Compare {
            input,
            output,
            solver,
            subsets,
            k,
            all_subsets,
            mode,
        } => {
            let g = load_graph(&input)?;
            let alpha = maybe_alpha(&g, &input)?;
            let selection = selection_from(&g, &subsets, k, all_subsets)?;
            let report =
                compare_formulations(&g, &selection, mode.into(), &solver.settings(), alpha)?;
            let k_or_j = match (k, selection.len()) {
                (Some(k), _) => format!("k={k}"),
                (None, c) => format!("J={c}"),
            };
            for d in &report.diagnostics {
                eprintln!("warning: {d}");
            }
            let rows = vec![
                from_report(&report.esh, k_or_j.clone()),
                from_report(&report.cesh, k_or_j.clone()),
                from_report(&report.sesh, k_or_j),
            ];
            let extra = vec![format!(
                "ordering ESH<=CESH: {}   SESH=CESH: {}",
                report.ordering_holds, report.scaled_matches
            )];
            emit(&output, &rows, &extra)?;
            let code = if !report.ordering_holds || !report.scaled_matches {
                2
            } else {
                status_exit(&rows)
            };
            Ok(code)
        }
        Command::Batch {
            file,
            output,
            solver,
        } => {
            let text = fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let mut rows = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let g = if line.contains(':') && !std::path::Path::new(line).exists() {
                    parse_generator(line)?
                } else {
                    load_graph_file(&PathBuf::from(line))?
                };
                rows.extend(theta_rows(&g, &solver.settings(), None, false)?);
            }
            emit(&output, &rows, &[])?;
            Ok(status_exit(&rows))
        }
    }
}

fn theta_rows(
    g: &Graph,
    settings: &SolverSettings,
    alpha: Option<usize>,
    log_iters: bool,
) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (label, problem) in [
        ("extended", build_theta_nplus1(g)),
        ("trace", build_theta_n(g)),
    ] {
        let t0 = std::time::Instant::now();
        let sol = solve(&problem, settings)?;
        if log_iters {
            for l in &sol.trace {
                eprintln!("[{label}] {}", l.line());
            }
        }
        rows.push(Row {
            name: g.name().into(),
            n: g.n(),
            m: g.m(),
            formulation: label.into(),
            k_or_j: "-".into(),
            bound: Some(sol.dual_objective),
            alpha,
            solve_s: t0.elapsed().as_secs_f64(),
            iters: sol.iterations,
            status: match sol.status {
                SolveStatus::Optimal => "optimal".into(),
                SolveStatus::MaxIter => "max_iter".into(),
                SolveStatus::InfeasibleSuspect => "infeasible_suspect".into(),
                SolveStatus::NumericalFailure => "numerical_failure".into(),
            },
        });
    }
    Ok(rows)
}
