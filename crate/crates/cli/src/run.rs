use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use serde::Serialize;
use ted_core::dfs::Pattern;
use ted_core::engine::{mine, Algorithm, MiningConfig, MiningResult};
use ted_core::graph::{parse_database, GraphDatabase};
use ted_core::index::Alpha;
use ted_core::report::{containment_matrix, pattern_file, render_matrix, RunReport, REPORT_SCHEMA};
use ted_core::{Matcher, TedError};

use crate::args::{BenchArgs, Cli, Command, Common, MatrixArgs, MineArgs};

pub const EXIT_IO: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_CONFIG: u8 = 5;
pub const EXIT_RESOURCE: u8 = 6;
pub const EXIT_TIME_LIMIT: u8 = 7;

#[derive(Debug)]
pub struct Failure {
    pub exit: u8,
    pub message: String,
}

impl From<TedError> for Failure {
    fn from(e: TedError) -> Self {
        let exit = match e {
            TedError::Parse { .. } | TedError::Structure { .. } => EXIT_INPUT,
            TedError::Config(_) => EXIT_CONFIG,
            TedError::EmbeddingLimit { .. } | TedError::PoolLimit { .. } | TedError::OptCapacity { .. } => {
                EXIT_RESOURCE
            }
            TedError::TimeLimit { .. } => EXIT_TIME_LIMIT,
            TedError::IndexFull { .. } | TedError::DuplicatePattern | TedError::AbsentPattern | TedError::EmptyIndex => 1,
        };
        Failure {
            exit,
            message: e.to_string(),
        }
    }
}

fn config_error(message: String) -> Failure {
    Failure {
        exit: EXIT_CONFIG,
        message,
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        exit: EXIT_IO,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure {
        exit: EXIT_IO,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_database(path: &Path) -> Result<GraphDatabase, Failure> {
    parse_database(&read_text(path)?).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn config(common: &Common, algorithm: Algorithm) -> Result<MiningConfig, Failure> {
    let alpha = Alpha::parse(&common.alpha)?;
    let time_limit = match common.time_limit {
        None => None,
        Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => return Err(config_error(format!("time limit {s} is not a non-negative number of seconds"))),
    };
    let cfg = MiningConfig {
        k: common.k,
        emax: common.emax,
        alpha,
        minsup: common.minsup,
        algorithm,
        embedding_guard: common.embedding_guard,
        opt_candidate_cap: common.opt_candidate_cap,
        time_limit,
        ..MiningConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, Failure> {
    if threads == 0 {
        return Err(config_error("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| config_error(format!("cannot start {threads} threads: {e}")))
}

fn report_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Mine(args) => mine_command(args),
        Command::Bench(args) => bench_command(args),
        Command::Matrix(args) => matrix_command(args),
    }
}

fn mine_command(args: MineArgs) -> Result<ExitCode, Failure> {
    let algorithm: Algorithm = args.algo.parse()?;
    let cfg = config(&args.common, algorithm)?;
    let pool = thread_pool(args.common.threads)?;
    let db = load_database(&args.common.input)?;
    let (result, matrix) = pool.install(|| -> Result<_, Failure> {
        let r = mine(&db, &cfg)?;
        let m = args
            .matrix
            .as_ref()
            .map(|_| render_matrix(&containment_matrix(&r.patterns, &db), r.patterns.len()));
        Ok((r, m))
    })?;

    emit(args.output.as_deref(), &pattern_file(&result.patterns, &db))?;
    let report = RunReport::new(&result, &cfg);
    match &args.metrics {
        Some(p) => write_text(p, &report_json(&report))?,
        None => eprintln!(
            "{}: {} patterns, coverage {}/{} ({:.4})",
            report.algorithm, report.patterns, report.total_coverage, report.total_edges, report.coverage_rate
        ),
    }
    if let (Some(path), Some(text)) = (&args.matrix, matrix) {
        write_text(path, &text)?;
    }
    if !result.complete {
        return Err(time_limit_failure(&cfg));
    }
    Ok(ExitCode::SUCCESS)
}

fn time_limit_failure(cfg: &MiningConfig) -> Failure {
    let millis = cfg.time_limit.map_or(0, |d| d.as_millis() as u64);
    let mut f = Failure::from(TedError::TimeLimit { millis });
    f.message.push_str("; partial results written");
    f
}

#[derive(Serialize)]
struct Ratio {
    numerator: String,
    denominator: String,
    ratio: f64,
}

#[derive(Serialize)]
struct BenchFailure {
    algorithm: String,
    error: String,
}

#[derive(Serialize)]
struct BenchDocument {
    schema: u32,
    runs: Vec<RunReport>,
    ratios: Vec<Ratio>,
    failures: Vec<BenchFailure>,
}

fn parse_algorithms(csv: &str) -> Result<Vec<Algorithm>, Failure> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for name in csv.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a: Algorithm = name.parse()?;
        if seen.insert(a) {
            out.push(a);
        } else {
            eprintln!("warning: algorithm `{name}` listed more than once; running it once");
        }
    }
    if out.is_empty() {
        return Err(config_error("--algos names no algorithm".into()));
    }
    Ok(out)
}

fn bench_command(args: BenchArgs) -> Result<ExitCode, Failure> {
    let algorithms = parse_algorithms(&args.algos)?;
    let base = config(&args.common, algorithms[0])?;
    let pool = thread_pool(args.common.threads)?;
    let db = load_database(&args.common.input)?;

    let mut runs: Vec<(MiningResult, RunReport)> = Vec::new();
    let mut failures: Vec<(Algorithm, Failure)> = Vec::new();
    for &a in &algorithms {
        let cfg = base.clone().with_algorithm(a);
        match pool.install(|| mine(&db, &cfg)) {
            Ok(r) if !r.complete => failures.push((a, time_limit_failure(&cfg))),
            Ok(r) => {
                let report = RunReport::new(&r, &cfg);
                runs.push((r, report));
            }
            Err(e) => failures.push((a, e.into())),
        }
    }

    let mut ratios = Vec::new();
    for (i, (a, _)) in runs.iter().enumerate() {
        for (j, (b, _)) in runs.iter().enumerate() {
            if i != j && b.total_coverage > 0 {
                ratios.push(Ratio {
                    numerator: a.algorithm.name().into(),
                    denominator: b.algorithm.name().into(),
                    ratio: a.total_coverage as f64 / b.total_coverage as f64,
                });
            }
        }
    }

    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:<8} {:>8} {:>10} {:>8} {:>12} {:>8} {:>10} {:>12}",
        "algo", "patterns", "coverage", "rate", "elapsed_ms", "swaps", "prm_pruned", "index_bytes"
    );
    for (_, r) in &runs {
        let _ = writeln!(
            table,
            "{:<8} {:>8} {:>10} {:>8.4} {:>12.2} {:>8} {:>10} {:>12}",
            r.algorithm,
            r.patterns,
            r.coverage_fraction,
            r.coverage_rate,
            r.elapsed_ms,
            r.swaps,
            r.prm_pruned,
            r.index_size_bytes
        );
    }
    for (a, f) in &failures {
        let _ = writeln!(table, "{:<8} failed: {}", a.name(), f.message);
    }
    if !ratios.is_empty() {
        table.push_str("\ncoverage ratios\n");
        for r in &ratios {
            let _ = writeln!(table, "{}/{} {:.4}", r.numerator, r.denominator, r.ratio);
        }
    }
    emit(args.output.as_deref(), &table)?;

    let doc = BenchDocument {
        schema: REPORT_SCHEMA,
        runs: runs.into_iter().map(|(_, r)| r).collect(),
        ratios,
        failures: failures
            .iter()
            .map(|(a, f)| BenchFailure {
                algorithm: a.name().into(),
                error: f.message.clone(),
            })
            .collect(),
    };
    if let Some(p) = &args.metrics {
        write_text(p, &report_json(&doc))?;
    }
    match failures.into_iter().next() {
        Some((a, mut f)) => {
            f.message = format!("{}: {}", a.name(), f.message);
            Err(f)
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

fn matrix_command(args: MatrixArgs) -> Result<ExitCode, Failure> {
    let algorithm: Algorithm = args.algo.parse()?;
    let cfg = config(&args.common, algorithm)?;
    let pool = thread_pool(args.common.threads)?;
    let db = load_database(&args.common.input)?;
    let text = pool.install(|| -> Result<String, Failure> {
        let patterns: Vec<Pattern> = match &args.patterns {
            Some(path) => {
                let pats = load_database(path)?;
                let matcher = Matcher::new(cfg.embedding_guard);
                pats.graphs()
                    .iter()
                    .map(|g| Pattern::from_graph(g, &db, &matcher))
                    .collect::<Result<_, _>>()?
            }
            None => {
                let r = mine(&db, &cfg)?;
                if !r.complete {
                    return Err(time_limit_failure(&cfg));
                }
                r.patterns
            }
        };
        Ok(render_matrix(&containment_matrix(&patterns, &db), patterns.len()))
    })?;
    emit(args.matrix.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}
