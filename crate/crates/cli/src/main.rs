//! `sfest`: generate instances, run the estimators, certify, benchmark.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sublinear_sf::bench::{self, BenchRow, MisBenchSpec};
use sublinear_sf::certify;
use sublinear_sf::format::{parse_graph, parse_instance, write_graph, write_instance};
use sublinear_sf::gen::{GenSpec, Generated};
use sublinear_sf::mis::{alg_mul, alg_mul_hp, hp_instances, rgmis_exact, MisConfig};
use sublinear_sf::steiner::{estimate_sf, LevelReport, SfConfig};
use sublinear_sf::{CountingAdjacencyOracle, Error};

#[derive(Parser)]
#[command(
    name = "sfest",
    version,
    about = "Sublinear MIS and Steiner Forest estimation"
)]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for benchmarks (0 = one per core).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Memoize resolved vertices inside the MIS oracle.
    #[arg(long, global = true, value_enum, default_value_t = Switch::Off)]
    cache: Switch,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    I1,
    I2,
    Euclid,
    Line,
    Gnp,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance or graph.
    Gen(GenArgs),
    /// Estimate the RGMIS size of a graph file.
    MisEstimate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Race ceil(3 ln n) interleaved trials and keep the first to finish.
        #[arg(long)]
        hp: bool,
    },
    /// Estimate the Steiner Forest cost of an instance file.
    SfEstimate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Overrides --format for this report.
        #[arg(long, value_enum)]
        report: Option<Format>,
    },
    /// Build and check the certificate for an instance; exits 2 on a failed check.
    Verify {
        #[arg(long)]
        instance: PathBuf,
    },
    /// AlgMul query counts on random graphs.
    BenchMis {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Steiner Forest estimator over instance files.
    BenchSf {
        #[arg(long, num_args = 0.., value_delimiter = ',')]
        instances: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit the log-log slope of mean queries against n from a bench CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "queries")]
        y: String,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    levels: Option<usize>,
    /// Cluster gap for i2 (default 10 n).
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    /// Row output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Two-column (n, mean queries) data file for gnuplot.
    #[arg(long)]
    plot: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Check(String),
    /// Stdout was closed by the reader, e.g. piped into `head`.
    Closed,
}

fn io_failure(e: io::Error) -> Failure {
    if e.kind() == io::ErrorKind::BrokenPipe {
        Failure::Closed
    } else {
        Failure::Input(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        io_failure(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe => Failure::Closed,
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        match e.io_error_kind() {
            Some(io::ErrorKind::BrokenPipe) => Failure::Closed,
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> Outcome {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            for r in rows {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    let cache = cli.cache == Switch::On;
    match &cli.command {
        Command::Gen(args) => gen(args, cli.seed),
        Command::MisEstimate { graph, eps, hp } => {
            mis_estimate(graph, *eps, *hp, cli.seed, cache, cli.format)
        }
        Command::SfEstimate {
            instance,
            eps,
            report,
        } => sf_estimate(
            instance,
            *eps,
            cli.seed,
            cache,
            report.unwrap_or(cli.format),
        ),
        Command::Verify { instance } => verify(instance, cli.seed),
        Command::BenchMis {
            sizes,
            p,
            eps,
            trials,
            out,
        } => {
            let spec = MisBenchSpec {
                sizes: sizes.clone(),
                p: *p,
                epsilon: *eps,
                trials: *trials,
                seed: cli.seed,
                cache,
            };
            let rows = bench::run_mis_bench(&spec, cli.workers)?;
            emit(&rows, cli.format, &mut *sink(out.out.as_deref())?)?;
            plot(
                out,
                &bench::mean_by_n(&rows, |r: &BenchRow| r.n, |r| r.queries as f64),
            )
        }
        Command::BenchSf {
            instances,
            eps,
            trials,
            out,
        } => {
            let loaded = instances
                .iter()
                .map(|p| Ok((p.display().to_string(), parse_instance(&read(p)?)?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            let records =
                bench::run_sf_bench(&loaded, *eps, *trials, cli.seed, cache, cli.workers)?;
            let mut w = sink(out.out.as_deref())?;
            match cli.format {
                Format::Csv => emit(
                    &records.iter().map(|r| &r.row).collect::<Vec<_>>(),
                    Format::Csv,
                    &mut *w,
                )?,
                Format::Json => emit(&records, Format::Json, &mut *w)?,
            }
            plot(
                out,
                &bench::mean_by_n(&records, |r| r.row.n, |r| r.row.queries as f64),
            )
        }
        Command::Fit { input, x, y } => fit(input, x, y),
    }
}

fn plot(out: &OutArgs, points: &[(f64, f64)]) -> Outcome {
    if let Some(path) = &out.plot {
        fs::write(path, bench::gnuplot_columns(points))?;
    }
    Ok(())
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Input(format!("--{flag} is required for --kind {kind}")))
}

fn gen(args: &GenArgs, seed: u64) -> Outcome {
    let spec = match args.kind {
        Kind::I1 => GenSpec::I1 {
            levels: need(args.levels, "levels", "i1")?,
        },
        Kind::I2 => {
            let levels = need(args.levels, "levels", "i2")?;
            let n = (1usize << levels.min(62)) - 1;
            GenSpec::I2 {
                levels,
                gap: args.gap.unwrap_or(10.0 * n as f64),
            }
        }
        Kind::Euclid => GenSpec::Euclid {
            n: need(args.n, "n", "euclid")?,
            k: need(args.k, "k", "euclid")?,
            dim: args.dim,
            seed,
        },
        Kind::Line => GenSpec::LineRandom {
            n: need(args.n, "n", "line")?,
            k: need(args.k, "k", "line")?,
            seed,
        },
        Kind::Gnp => GenSpec::Gnp {
            n: need(args.n, "n", "gnp")?,
            p: need(args.p, "p", "gnp")?,
            seed,
        },
    };
    let text = match spec.generate()? {
        Generated::Metric(inst) => write_instance(&inst),
        Generated::Graph(g) => write_graph(&g),
    };
    sink(args.out.as_deref())?.write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct MisRecord {
    n: usize,
    value: f64,
    exact_prefix: usize,
    queries: u64,
    seed: u64,
    epsilon: f64,
    exact: usize,
}

fn mis_estimate(
    path: &Path,
    eps: f64,
    hp: bool,
    seed: u64,
    cache: bool,
    format: Format,
) -> Outcome {
    let graph = parse_graph(&read(path)?)?;
    let config = MisConfig::new(eps)?.with_cache(cache);
    let (est, queries) = if hp {
        let outcome = alg_mul_hp(
            || CountingAdjacencyOracle::explicit(&graph),
            &config,
            seed,
            hp_instances(graph.n()),
        )?;
        (outcome.estimate, outcome.total_queries)
    } else {
        let adj = CountingAdjacencyOracle::explicit(&graph);
        let est = alg_mul(&adj, &config, seed)?;
        let q = adj.query_count();
        (est, q)
    };
    let record = MisRecord {
        n: graph.n(),
        value: est.value,
        exact_prefix: est.exact_prefix.len(),
        queries,
        seed,
        epsilon: eps,
        exact: rgmis_exact(&graph, &est.permutation)?.len(),
    };
    emit(&[record], format, &mut io::stdout().lock())
}

#[derive(Serialize)]
struct SfSummary<'a> {
    sol_scaled: f64,
    sol_original: f64,
    scale: f64,
    k_eff: usize,
    ignored_pairs: usize,
    preprocessing_queries: u64,
    total_queries: u64,
    seed: u64,
    epsilon: f64,
    levels: &'a [LevelReport],
}

fn sf_estimate(path: &Path, eps: f64, seed: u64, cache: bool, format: Format) -> Outcome {
    let inst = parse_instance(&read(path)?)?;
    let report = estimate_sf(&inst, &SfConfig::new(eps, seed).with_cache(cache))?;
    let summary = SfSummary {
        sol_scaled: report.sol_scaled,
        sol_original: report.sol_original,
        scale: report.scale.factor(),
        k_eff: report.k_eff,
        ignored_pairs: report.ignored_pairs.len(),
        preprocessing_queries: report.preprocessing_queries,
        total_queries: report.total_queries,
        seed,
        epsilon: eps,
        levels: &report.levels,
    };
    let mut out = io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&summary)?)?,
        Format::Csv => {
            writeln!(
                out,
                "# sol_scaled={} sol_original={} scale={} k_eff={} preprocessing_queries={} total_queries={}",
                summary.sol_scaled,
                summary.sol_original,
                summary.scale,
                summary.k_eff,
                summary.preprocessing_queries,
                summary.total_queries
            )?;
            emit(&report.levels, Format::Csv, &mut out)?;
        }
    }
    Ok(())
}

fn verify(path: &Path, seed: u64) -> Outcome {
    let inst = parse_instance(&read(path)?)?;
    let outcome = certify::certify(&inst, seed)?;
    let written = writeln!(
        io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(&outcome)?
    );
    if outcome.passed() {
        written?;
        Ok(())
    } else {
        Err(Failure::Check(format!("{} failed", path.display())))
    }
}

fn fit(path: &Path, x: &str, y: &str) -> Outcome {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Input(format!("no column `{name}` in {}", path.display())))
    };
    let (xi, yi) = (column(x)?, column(y)?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let parse = |i: usize| -> Result<f64, Failure> {
            record[i]
                .parse()
                .map_err(|_| Failure::Input(format!("`{}` is not a number", &record[i])))
        };
        rows.push((parse(xi)?, parse(yi)?));
    }
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for (xv, yv) in rows {
        match groups.iter_mut().find(|g| g.0 == xv) {
            Some(g) => {
                g.1 += yv;
                g.2 += 1;
            }
            None => groups.push((xv, yv, 1)),
        }
    }
    let points: Vec<(f64, f64)> = groups.iter().map(|g| (g.0, g.1 / g.2 as f64)).collect();
    writeln!(
        io::stdout().lock(),
        "{}",
        bench::fit_scaling_exponent(&points)?
    )?;
    Ok(())
}
