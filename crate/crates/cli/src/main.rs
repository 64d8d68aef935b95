//! Command-line toolkit for SOPI evaluation, set design, source-block
//! partitioning, conflict-graph coloring, and Monte Carlo experiments.
//!
//! Exit codes: 0 success, 2 usage/validation error, 3 domain failure
//! (insufficient palette, audit violation, bound violation).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sopi_core::{
    block_structure, build_sopi_set, capacity_bounds, designed_overlap_experiment, distance,
    estimate_failure_probability, greedy_color, prefix, run_random_trial,
    simulate_multi_source_download, validate_assignment, Assignment, DesignParams, DiffSet,
    DistanceResult, DownloadReport, Error as CoreError, ExperimentReport, FieldParams, NodeGraph,
    OverlapReport, PrefixSpec, Sopi, SopiSet, SplitRule, Strategy, TrialConfig,
};

#[derive(Parser)]
#[command(name = "sopi", version, about = "SOPI toolkit for erasure-coded multi-source downloads")]
struct Cli {
    /// Prime modulus N (count of available symbol IDs)
    #[arg(long, global = true, default_value_t = 2147483647)]
    n: u64,

    /// Seed for every randomized step; fixed seed means identical output
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write output to this path instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a permutation at one position or over a prefix
    Eval {
        /// Permutation offset A
        #[arg(long)]
        a: u64,
        /// Permutation stride B
        #[arg(long)]
        b: u64,
        /// Single position to evaluate
        #[arg(long, conflicts_with = "len")]
        pos: Option<u64>,
        /// Prefix length to materialize
        #[arg(long)]
        len: Option<u64>,
    },
    /// Minimal matching offset pair between two strides
    Distance {
        #[arg(long)]
        b0: u64,
        #[arg(long)]
        b1: u64,
        /// Aggregate prefix budget M defining the difference set
        #[arg(long)]
        m: u64,
    },
    /// Construct a SOPI set with guaranteed pairwise distance
    Genset {
        /// Minimum pairwise stride distance
        #[arg(long)]
        d: u64,
        /// Aggregate prefix budget M
        #[arg(long)]
        m: u64,
        /// Maximum number of strides
        #[arg(long, default_value_t = 16)]
        b_cap: usize,
        /// Maximum offsets per stride
        #[arg(long, default_value_t = 16)]
        a_cap: usize,
        /// Search strategy
        #[arg(long, default_value = "incremental")]
        strategy: String,
        /// Re-verify the constructed set and fail on any violation
        #[arg(long)]
        audit: bool,
    },
    /// Source-block structure of an object
    Partition {
        /// Object size in bytes
        #[arg(long)]
        f: u64,
        /// Symbol size in bytes
        #[arg(long)]
        t: u64,
        /// Maximum source-block size in bytes
        #[arg(long)]
        ws: u64,
    },
    /// Color a conflict graph with a SOPI set, or validate an assignment
    Color {
        /// Graph file: {"nodes":[...],"edges":[["a","b"],...]}
        #[arg(long)]
        graph: PathBuf,
        /// SOPI set file used as the palette
        #[arg(long, required_unless_present = "validate")]
        set: Option<PathBuf>,
        /// Validate an existing assignment file instead of coloring
        #[arg(long)]
        validate: Option<PathBuf>,
    },
    /// Run a reproducible experiment
    Experiment {
        #[arg(long, value_enum)]
        kind: ExperimentKind,
        /// Source symbols per block (random kind)
        #[arg(long)]
        k: Option<u64>,
        /// Overhead fraction delta in (0, 1) (random kind)
        #[arg(long)]
        delta: Option<f64>,
        /// Number of concurrent streams
        #[arg(long)]
        streams: Option<usize>,
        /// Monte Carlo trial count (random kind)
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Split rule for dividing symbols among streams (random kind)
        #[arg(long, default_value = "equal")]
        split: String,
        /// SOPI set file (designed kind)
        #[arg(long)]
        set: Option<PathBuf>,
        /// Total symbols per sample (designed kind)
        #[arg(long)]
        m: Option<u64>,
        /// Sample count (designed kind)
        #[arg(long, default_value_t = 100)]
        samples: u64,
        /// Assignment file (simulate kind)
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Comma-separated reachable nodes (simulate kind)
        #[arg(long)]
        view: Option<String>,
        /// Object size in bytes (simulate kind)
        #[arg(long)]
        f: Option<u64>,
        /// Symbol size in bytes (simulate kind)
        #[arg(long)]
        t: Option<u64>,
        /// Maximum source-block size in bytes (simulate kind)
        #[arg(long)]
        ws: Option<u64>,
        /// Symbols to download (simulate kind)
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentKind {
    Random,
    Designed,
    Simulate,
}

/// Errors mapped onto process exit codes.
enum CliError {
    /// Bad flags, ranges, or files: exit 2.
    Usage(String),
    /// The operation itself failed (palette too small, violated bound,
    /// failed audit): exit 3.
    Domain(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InsufficientPalette { .. } | CoreError::AuditFailure(_) => {
                CliError::Domain(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let params = FieldParams::new(cli.n)?;
    let output = match &cli.command {
        Command::Eval { a, b, pos, len } => cmd_eval(&cli, params, *a, *b, *pos, *len)?,
        Command::Distance { b0, b1, m } => cmd_distance(&cli, params, *b0, *b1, *m)?,
        Command::Genset {
            d,
            m,
            b_cap,
            a_cap,
            strategy,
            audit,
        } => cmd_genset(&cli, params, *d, *m, *b_cap, *a_cap, strategy, *audit)?,
        Command::Partition { f, t, ws } => cmd_partition(&cli, *f, *t, *ws)?,
        Command::Color {
            graph,
            set,
            validate,
        } => cmd_color(&cli, graph, set.as_deref(), validate.as_deref())?,
        Command::Experiment { .. } => cmd_experiment(&cli, params)?,
    };
    emit(&cli, output)
}

fn emit(cli: &Cli, mut content: String) -> Result<(), CliError> {
    if !content.ends_with('\n') {
        content.push('\n');
    }
    match &cli.out {
        Some(path) => fs::write(path, content)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serialization cannot fail")
}

#[derive(Serialize)]
struct EvalOutput {
    n: u64,
    sopi: Sopi,
    ids: Vec<u32>,
}

fn cmd_eval(
    cli: &Cli,
    params: FieldParams,
    a: u64,
    b: u64,
    pos: Option<u64>,
    len: Option<u64>,
) -> Result<String, CliError> {
    let sopi = Sopi::new(a, b, params)?;
    let (first, ids) = match (pos, len) {
        (Some(i), None) => (i, vec![sopi.symbol_id_at(i, params)?.0]),
        (None, Some(l)) => (
            0,
            prefix(PrefixSpec::new(sopi, l), params)?
                .into_iter()
                .map(|id| id.0)
                .collect(),
        ),
        _ => return Err(usage("exactly one of --pos or --len is required")),
    };
    Ok(match cli.format {
        Format::Json => to_json(&EvalOutput {
            n: params.n(),
            sopi,
            ids,
        }),
        Format::Csv => {
            let mut s = String::from("position,symbol_id\n");
            for (offset, id) in ids.iter().enumerate() {
                let _ = writeln!(s, "{},{id}", first + offset as u64);
            }
            s
        }
        Format::Text => ids
            .iter()
            .map(|id| id.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    })
}

fn cmd_distance(
    cli: &Cli,
    params: FieldParams,
    b0: u64,
    b1: u64,
    m: u64,
) -> Result<String, CliError> {
    let diff = DiffSet::new(m)?;
    let result = distance(b0, b1, diff, params)?;
    Ok(match cli.format {
        Format::Json => to_json(&result),
        Format::Csv => match result {
            DistanceResult::Matched { d0, d1, distance } => {
                format!("kind,d0,d1,distance\nmatched,{d0},{d1},{distance}")
            }
            DistanceResult::Unmatched { distance } => {
                format!("kind,d0,d1,distance\nunmatched,,,{distance}")
            }
        },
        Format::Text => match result {
            DistanceResult::Matched { d0, d1, distance } => {
                format!("distance {distance}, pair ({d0}, {d1})")
            }
            DistanceResult::Unmatched { distance } => {
                format!("unmatched, distance {distance}")
            }
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_genset(
    cli: &Cli,
    params: FieldParams,
    d: u64,
    m: u64,
    b_cap: usize,
    a_cap: usize,
    strategy: &str,
    audit: bool,
) -> Result<String, CliError> {
    let strategy: Strategy = strategy.parse()?;
    let design = DesignParams::new(params, d, m)?;
    let set = build_sopi_set(&design, b_cap, a_cap, cli.seed, strategy)?;
    if audit {
        set.verify()?;
    }
    let bounds = capacity_bounds(&design);
    Ok(match cli.format {
        Format::Json => set.to_json(),
        Format::Csv => {
            let mut s = String::from("A,B\n");
            for sopi in set.sopis() {
                let _ = writeln!(s, "{},{}", sopi.a, sopi.b);
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "N={} d={d} M={m} seed={} strategy={strategy}",
                params.n(),
                cli.seed
            );
            let _ = writeln!(
                s,
                "entries={} strides={}{}",
                set.len(),
                set.b_values().len(),
                if audit { " audit=ok" } else { "" }
            );
            let _ = writeln!(
                s,
                "capacity lower bounds: strides {:.1}, offsets-per-stride {:.1}, total {:.3e}",
                bounds.b_lower, bounds.a_lower, bounds.total_lower
            );
            for sopi in set.sopis() {
                let _ = writeln!(s, "{sopi}");
            }
            s
        }
    })
}

fn cmd_partition(cli: &Cli, f: u64, t: u64, ws: u64) -> Result<String, CliError> {
    let s = block_structure(f, t, ws)?;
    Ok(match cli.format {
        Format::Json => to_json(&s),
        Format::Csv => format!(
            "F,T,WS,Kt,Z,KL,KS,ZL,ZS\n{},{},{},{},{},{},{},{},{}",
            s.f, s.t, s.ws, s.kt, s.z, s.kl, s.ks, s.zl, s.zs
        ),
        Format::Text => format!(
            "Kt={} Kmax={} Z={}\n(KL,KS,ZL,ZS)=({},{},{},{})",
            s.kt, s.kmax, s.z, s.kl, s.ks, s.zl, s.zs
        ),
    })
}

fn cmd_color(
    cli: &Cli,
    graph_path: &std::path::Path,
    set_path: Option<&std::path::Path>,
    validate_path: Option<&std::path::Path>,
) -> Result<String, CliError> {
    let graph = NodeGraph::from_json(&read_file(graph_path)?)?;

    if let Some(path) = validate_path {
        let assignment = Assignment::from_json(&read_file(path)?)?;
        let violations = validate_assignment(&graph, &assignment);
        if violations.is_empty() {
            return Ok(match cli.format {
                Format::Json => r#"{"violations":[]}"#.to_string(),
                Format::Csv => "node_a,node_b\n".to_string(),
                Format::Text => "valid".to_string(),
            });
        }
        let listing = violations
            .iter()
            .map(|(a, b)| format!("{a} -- {b}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(CliError::Domain(format!(
            "{} violated edge(s): {listing}",
            violations.len()
        )));
    }

    let set_path = set_path.ok_or_else(|| usage("--set is required unless --validate is given"))?;
    let set = SopiSet::from_json(&read_file(set_path)?)?;
    let assignment = greedy_color(&graph, &set.sopis())?;
    Ok(match cli.format {
        Format::Json => assignment.to_json(),
        Format::Csv => {
            let mut s = String::from("node,A,B\n");
            for (node, sopi) in &assignment.assignments {
                let _ = writeln!(s, "{node},{},{}", sopi.a, sopi.b);
            }
            s
        }
        Format::Text => {
            let mut s = format!("colors_used {}\n", assignment.colors_used);
            for (node, sopi) in &assignment.assignments {
                let _ = writeln!(s, "{node} -> {sopi}");
            }
            s
        }
    })
}

fn cmd_experiment(cli: &Cli, params: FieldParams) -> Result<String, CliError> {
    let Command::Experiment {
        kind,
        k,
        delta,
        streams,
        trials,
        split,
        set,
        m,
        samples,
        assignment,
        view,
        f,
        t,
        ws,
        budget,
    } = &cli.command
    else {
        unreachable!("dispatched on Experiment");
    };
    let need = |name: &str| usage(format!("--{name} is required for this experiment kind"));

    match kind {
        ExperimentKind::Random => {
            let split: SplitRule = split.parse()?;
            let config = TrialConfig::new(
                params,
                k.ok_or_else(|| need("k"))?,
                delta.ok_or_else(|| need("delta"))?,
                streams.ok_or_else(|| need("streams"))?,
                split,
                *trials,
                cli.seed,
            )?;
            if cli.format == Format::Csv {
                let mut s = String::from("trial,distinct,duplicates,recoverable\n");
                for trial in 0..config.trials() {
                    let o = run_random_trial(&config, trial);
                    let _ = writeln!(s, "{trial},{},{},{}", o.distinct, o.duplicates, o.recoverable);
                }
                return Ok(s);
            }
            let report = estimate_failure_probability(&config)?;
            if !report.within_bound {
                return Err(CliError::Domain(format!(
                    "empirical failure rate {} exceeds bound {}",
                    report.failure_rate, report.bound_with_noise
                )));
            }
            Ok(match cli.format {
                Format::Json => to_json(&report),
                _ => render_experiment_text(&report),
            })
        }
        ExperimentKind::Designed => {
            let set_path = set.as_ref().ok_or_else(|| need("set"))?;
            let set = SopiSet::from_json(&read_file(set_path)?)?;
            let report = designed_overlap_experiment(
                &set,
                streams.ok_or_else(|| need("streams"))?,
                m.ok_or_else(|| need("m"))?,
                *samples,
                cli.seed,
            )?;
            if report.violations > 0 {
                return Err(CliError::Domain(format!(
                    "{} sample(s) exceeded the worst-case duplicate bound {}",
                    report.violations, report.bound_duplicates
                )));
            }
            Ok(match cli.format {
                Format::Json => to_json(&report),
                Format::Csv => format!(
                    "samples,streams,total_symbols,distance_floor,bound_duplicates,worst_duplicates,mean_duplicates,violations\n{},{},{},{},{},{},{},{}",
                    report.samples,
                    report.streams,
                    report.total_symbols,
                    report.distance_floor,
                    report.bound_duplicates,
                    report.worst_duplicates,
                    report.mean_duplicates,
                    report.violations
                ),
                Format::Text => render_overlap_text(&report),
            })
        }
        ExperimentKind::Simulate => {
            let assignment_path = assignment.as_ref().ok_or_else(|| need("assignment"))?;
            let assignment = Assignment::from_json(&read_file(assignment_path)?)?;
            let view: Vec<String> = view
                .as_ref()
                .ok_or_else(|| need("view"))?
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            let structure = block_structure(
                f.ok_or_else(|| need("f"))?,
                t.ok_or_else(|| need("t"))?,
                ws.ok_or_else(|| need("ws"))?,
            )?;
            let report = simulate_multi_source_download(
                &structure,
                &assignment,
                &view,
                budget.ok_or_else(|| need("budget"))?,
                cli.seed,
                params,
            )?;
            Ok(match cli.format {
                Format::Json => to_json(&report),
                Format::Csv => {
                    let mut s = String::from("block,required,received,distinct,recovered\n");
                    for b in &report.blocks {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{}",
                            b.block, b.required, b.received, b.distinct, b.recovered
                        );
                    }
                    s
                }
                Format::Text => render_download_text(&report),
            })
        }
    }
}

fn render_experiment_text(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "trials          {}", r.trials_run);
    let _ = writeln!(s, "failures        {}", r.failures);
    let _ = writeln!(s, "failure_rate    {:.6e}", r.failure_rate);
    let _ = writeln!(s, "theorem_bound   {:.6e}", r.theorem_bound);
    let _ = writeln!(s, "bound+3sigma    {:.6e}", r.bound_with_noise);
    let _ = writeln!(s, "within_bound    {}", r.within_bound);
    let _ = writeln!(s, "mean_duplicates {:.4}", r.mean_duplicates);
    let _ = writeln!(s, "mean_dup_bound  {:.4}", r.mean_duplicates_bound);
    let _ = writeln!(s, "max_duplicates  {}", r.max_duplicates);
    let _ = write!(s, "wall_time       {:.3}s", r.wall_time.as_secs_f64());
    s
}

fn render_overlap_text(r: &OverlapReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "samples          {}", r.samples);
    let _ = writeln!(s, "streams          {}", r.streams);
    let _ = writeln!(s, "total_symbols    {}", r.total_symbols);
    let _ = writeln!(s, "distance_floor   {}", r.distance_floor);
    let _ = writeln!(s, "bound_duplicates {:.2} ({:.4}%)", r.bound_duplicates, r.bound_fraction * 100.0);
    let _ = writeln!(s, "worst_duplicates {} ({:.4}%)", r.worst_duplicates, r.worst_fraction * 100.0);
    let _ = writeln!(s, "mean_duplicates  {:.4}", r.mean_duplicates);
    let _ = writeln!(s, "violations       {}", r.violations);
    let _ = write!(s, "wall_time        {:.3}s", r.wall_time.as_secs_f64());
    s
}

fn render_download_text(r: &DownloadReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "budget          {}", r.budget);
    let _ = writeln!(s, "streams_offered {}", r.streams_offered);
    let _ = writeln!(s, "streams_used    {}", r.streams_used);
    let _ = writeln!(s, "requested       {}", r.requested);
    for b in &r.blocks {
        let _ = writeln!(
            s,
            "block {:>4}: required={} received={} distinct={} recovered={}",
            b.block, b.required, b.received, b.distinct, b.recovered
        );
    }
    let _ = write!(s, "recoverable     {}", r.recoverable);
    s
}
