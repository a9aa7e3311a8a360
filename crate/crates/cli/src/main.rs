//! `wrcm`: sampling, functionals, bound constants and verification suites
//! for weighted random connection models.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid configuration or
//! arguments, 3 sampler failure, 4 a check was inconclusive.

mod manifest;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use wrcm_core::bounds::{derive_theorem_params, Theorem};
use wrcm_core::config::{load_config, SimulationConfig};
use wrcm_core::functionals::{count_subgraphs, powered_edge_length, write_replication_csv};
use wrcm_core::graph::sample_graph_replication;
use wrcm_core::partitions::{enumerate_pim, partition_count_bound_check, PartitionClass};
use wrcm_core::process::sample_replication;
use wrcm_core::stats::{k_statistics, FunctionalChoice, Verdict};
use wrcm_core::{Error, Result};

use manifest::Run;
use verify::{Suite, Verifier};

#[derive(Parser)]
#[command(
    name = "wrcm",
    version,
    about = "Weighted random connection model experiments"
)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override `run.master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the marked vertex process of one replication.
    Sample {
        #[arg(long, default_value_t = 0)]
        replication: u64,
    },
    /// Sample vertices and edges of one replication.
    Graph {
        #[arg(long, default_value_t = 0)]
        replication: u64,
    },
    /// Evaluate a functional over replications and estimate its cumulants.
    Compute {
        #[arg(long, value_enum, default_value_t = FunctionalArg::Subgraph)]
        functional: FunctionalArg,
        /// Defaults to `run.replications`.
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
    },
    /// Run a parameter sweep and fit the cumulant scaling slope.
    Sweep {
        #[arg(long)]
        sweep: PathBuf,
    },
    /// Print theorem constants derived from the configuration.
    Bounds {
        /// SG, EL, SG' or EL'; defaults to both theorems matching the process.
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Count (or list) partitions of an m-by-q table.
    Partitions {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value_t = ClassArg::ConnectedMinTwo)]
        class: ClassArg,
        #[arg(long)]
        list: bool,
    },
    /// Run verification suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalArg {
    Subgraph,
    EdgePower,
}

impl From<FunctionalArg> for FunctionalChoice {
    fn from(f: FunctionalArg) -> Self {
        match f {
            FunctionalArg::Subgraph => FunctionalChoice::Subgraph,
            FunctionalArg::EdgePower => FunctionalChoice::EdgePower,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    All,
    MinTwo,
    Connected,
    ConnectedMinTwo,
}

impl From<ClassArg> for PartitionClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::All => PartitionClass::All,
            ClassArg::MinTwo => PartitionClass::MinBlockTwo,
            ClassArg::Connected => PartitionClass::Connected,
            ClassArg::ConnectedMinTwo => PartitionClass::ConnectedMinBlockTwo,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_sampler() { 3 } else { 2 })
        }
    }
}

fn config(cli: &Cli) -> Result<SimulationConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::validation("--config", "this command needs a configuration file"))?;
    let mut c = load_config(path)?;
    if let Some(seed) = cli.seed {
        c.master_seed = seed;
    }
    Ok(c)
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::precondition(format!("cannot start worker pool: {e}")))
}

fn json_bytes<T: serde::Serialize>(x: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(x).expect("report serializes");
    v.push(b'\n');
    v
}

fn run(cli: &Cli) -> Result<u8> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::Sample { replication } => {
            let c = config(cli)?;
            let sample = sample_replication(&c, *replication)?;
            let mut csv = Vec::new();
            sample.write_csv(&mut csv, c.dim())?;
            let mut run = Run::start(out, Some(&c), command_line())?;
            run.write("points.csv", &csv)?;
            run.finish("ok")?;
            eprintln!("{} points", sample.len());
            Ok(0)
        }
        Command::Graph { replication } => {
            let c = config(cli)?;
            let graph = sample_graph_replication(&c, *replication)?;
            let (mut points, mut edges) = (Vec::new(), Vec::new());
            graph.points.write_csv(&mut points, c.dim())?;
            graph.write_csv(&mut edges)?;
            let mut run = Run::start(out, Some(&c), command_line())?;
            run.write("points.csv", &points)?;
            run.write("edges.csv", &edges)?;
            run.finish("ok")?;
            eprintln!(
                "{} vertices, {} edges",
                graph.vertex_count(),
                graph.edges.len()
            );
            Ok(0)
        }
        Command::Compute {
            functional,
            replications,
            max_order,
        } => compute(cli, (*functional).into(), *replications, *max_order),
        Command::Sweep { sweep: path } => {
            let c = config(cli)?;
            let text = std::fs::read_to_string(path)?;
            let spec = sweep::SweepSpec::parse(&text)?;
            let outcome = sweep::run_sweep(&c, &spec, out, cli.workers, &command_line())?;
            for fit in &outcome.fits {
                println!("{}", fit.to_text());
            }
            for e in &outcome.fit_errors {
                eprintln!("fit skipped: {e}");
            }
            Ok(if outcome.failed_points() > 0 {
                3
            } else if !outcome.fit_errors.is_empty() {
                4
            } else {
                0
            })
        }
        Command::Bounds { theorem, format } => bounds(cli, theorem.as_deref(), *format),
        Command::Partitions { m, q, class, list } => {
            let class: PartitionClass = (*class).into();
            let report = partition_count_bound_check(*m, *q)?;
            let mut body = json!({
                "schema_version": wrcm_core::stats::REPORT_SCHEMA_VERSION,
                "m": m,
                "q": q,
                "bound_check": report,
            });
            if *list {
                let parts: Vec<String> = enumerate_pim(*m, *q, class)?
                    .iter()
                    .map(|p| p.to_canonical_string())
                    .collect();
                for p in &parts {
                    println!("{p}");
                }
                body["partitions"] = json!(parts);
            }
            println!(
                "m={m} q={q}: all={} connected_min_two={} bound={} holds={}",
                report.all, report.connected_min_two, report.bound, report.holds
            );
            let mut run = Run::start(out, None, command_line())?;
            run.write("partitions.json", &json_bytes(&body))?;
            run.finish("ok")?;
            Ok(if report.holds { 0 } else { 1 })
        }
        Command::Verify { suite } => {
            let c = config(cli)?;
            let checks = Verifier::new(&c, cli.workers).run(*suite)?;
            let mut run = Run::start(out, Some(&c), command_line())?;
            for ch in &checks {
                let dir = format!("verify/{}", ch.suite);
                run.write(&format!("{dir}/{}.json", ch.name), &json_bytes(ch))?;
                for (name, bytes) in &ch.files {
                    run.write(&format!("{dir}/{name}"), bytes)?;
                }
                println!("{}/{}: {}", ch.suite, ch.name, ch.verdict.as_str());
            }
            let verdict = verify::overall(&checks);
            run.finish(verdict.as_str())?;
            println!("overall: {}", verdict.as_str());
            Ok(match verdict {
                Verdict::Pass => 0,
                Verdict::Fail => 1,
                Verdict::Inconclusive => 4,
            })
        }
    }
}

fn compute(
    cli: &Cli,
    functional: FunctionalChoice,
    replications: Option<usize>,
    max_order: usize,
) -> Result<u8> {
    let c = config(cli)?;
    let n = replications.unwrap_or(c.replications);
    if n < 2 {
        return Err(Error::validation(
            "--replications",
            "need at least 2 replications",
        ));
    }
    let rows = pool(cli.workers)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let g = sample_graph_replication(&c, i as u64).map_err(|e| Error::Replication {
                    index: i,
                    source: Box::new(e),
                })?;
                Ok((
                    i,
                    match functional {
                        FunctionalChoice::Subgraph => count_subgraphs(&g, &c.pattern),
                        FunctionalChoice::EdgePower => powered_edge_length(&g, c.tau),
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let values: Vec<f64> = rows.iter().map(|(_, v)| v.value).collect();
    let mut report = k_statistics(&values, max_order)?;
    let theorem =
        Theorem::for_process(&c.vertex_process, functional == FunctionalChoice::EdgePower);
    match derive_theorem_params(&c, theorem) {
        Ok(d) => report = report.with_envelope(d.params.a, d.params.beta_n),
        Err(e) => eprintln!("no envelope: {e}"),
    }
    let mut csv = Vec::new();
    write_replication_csv(&mut csv, &rows)?;
    let mut run = Run::start(&cli.out, Some(&c), command_line())?;
    run.write("replications.csv", &csv)?;
    run.write("cumulants.json", &json_bytes(&report))?;
    run.finish("ok")?;
    println!("{}", report.to_text());
    Ok(0)
}

fn bounds(cli: &Cli, theorem: Option<&str>, format: Format) -> Result<u8> {
    let c = config(cli)?;
    let theorems = match theorem {
        Some(s) => vec![Theorem::parse(s)
            .ok_or_else(|| Error::validation("--theorem", format!("unknown theorem `{s}`")))?],
        None => vec![
            Theorem::for_process(&c.vertex_process, false),
            Theorem::for_process(&c.vertex_process, true),
        ],
    };
    let derived = theorems
        .iter()
        .map(|&t| derive_theorem_params(&c, t))
        .collect::<Result<Vec<_>>>()?;
    let (name, bytes) = match format {
        Format::Json => (
            "bounds.json",
            json_bytes(&json!({
                "schema_version": wrcm_core::stats::REPORT_SCHEMA_VERSION,
                "theorems": derived,
            })),
        ),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(e.into());
            w.write_record([
                "theorem",
                "a",
                "b",
                "beta_n",
                "variance_threshold",
                "v",
                "c_u1",
                "c_u2",
                "c_phi1",
                "c_phi2",
            ])
            .map_err(io)?;
            for d in &derived {
                let p = &d.params;
                let i = &d.inputs;
                w.write_record([
                    p.theorem.name().to_string(),
                    format!("{:?}", p.a),
                    format!("{:?}", p.b),
                    format!("{:?}", p.beta_n),
                    format!("{:?}", p.variance_threshold),
                    format!("{:?}", p.v_used),
                    format!("{:?}", i.c_u1),
                    format!("{:?}", i.c_u2),
                    format!("{:?}", i.c_phi1),
                    format!("{:?}", i.c_phi2),
                ])
                .map_err(io)?;
            }
            (
                "bounds.csv",
                w.into_inner().map_err(|e| Error::Io(e.into_error()))?,
            )
        }
    };
    print!("{}", String::from_utf8_lossy(&bytes));
    let mut run = Run::start(&cli.out, Some(&c), command_line())?;
    run.write(name, &bytes)?;
    run.finish("ok")?;
    Ok(0)
}
