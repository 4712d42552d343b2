//! Benchmark harness CLI: instance generation, single runs, sweeps,
//! verification suites, and result summaries.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use procure_bfm::harness::gen::{
    edge_list_text, gen_instance, random_vectors, vectors_csv_text, InstanceSpec,
};
use procure_bfm::harness::{
    load_dataset, report_summary, run_sweep, DatasetSource, ExperimentConfig, MechanismChoice,
    MechanismSpec,
};
use procure_bfm::market::{CostKind, CostModel, Market};
use procure_bfm::mechanism::{MechanismKind, MechanismParams, Preset};
use procure_bfm::oracle::write_vectors_bin;
use procure_bfm::verify::corpus::{
    guarantee_suite, truthfulness_suite, write_report_csv, CorpusConfig, OracleFamily, SuiteOutcome,
};
use procure_bfm::verify::{audit_run, run_mechanism};

#[derive(Parser)]
#[command(
    name = "procure-bfm",
    about = "Budget-feasible procurement auction benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset file.
    Gen(GenArgs),
    /// Run one mechanism once and print the outcome.
    Run(RunArgs),
    /// Sweep mechanisms over budgets and repetitions into a CSV.
    Sweep(SweepArgs),
    /// Run the verification suites and emit a machine-readable report.
    Verify(VerifyArgs),
    /// Summarize a results CSV.
    Summary(SummaryArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Generator kind: random-digraph | power-law-digraph | random-vectors
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    /// Edge probability (random-digraph)
    #[arg(long, default_value_t = 0.1)]
    edge_prob: f64,
    /// Degree exponent (power-law-digraph)
    #[arg(long, default_value_t = 2.5)]
    exponent: f64,
    /// Vector dimension (random-vectors)
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Emit the binary vector format instead of CSV (random-vectors)
    #[arg(long, default_value_t = false)]
    binary: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Dataset path, or a synthetic spec when --synthetic is given
    #[arg(long)]
    dataset: String,
    /// Interpret --dataset as <kind>:<n>[:<param>] (e.g. power-law-digraph:2000:2.5)
    #[arg(long, default_value_t = false)]
    synthetic: bool,
    /// Dataset layout for paths: edge-list | vectors-csv | vectors-bin
    #[arg(long, default_value = "edge-list")]
    dataset_kind: String,
    /// Symmetrize directed edges on ingestion
    #[arg(long, default_value_t = false)]
    symmetrize: bool,
    /// Cost model: uniform:<lo>,<hi> | stddev-prop:<mean> | explicit:<csv-path>
    #[arg(long, default_value = "uniform:0,1")]
    cost_model: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Allow datasets beyond the desk-scale guard
    #[arg(long, default_value_t = false)]
    large: bool,
}

#[derive(Args, Clone)]
struct MechanismArgs {
    /// Comma-separated list: bfm-swm | bfm-vm | distorted | roi | cost-scaled
    #[arg(long, default_value = "bfm-swm")]
    mechanism: String,
    /// Parameter preset: swm-nonmonotone | swm-monotone | vm
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    mechanism: MechanismArgs,
    #[arg(long)]
    budget: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    mechanism: MechanismArgs,
    /// Comma-separated budget list
    #[arg(long)]
    budget: String,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: guarantees | truthfulness | all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Instances per guarantee suite
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummaryArgs {
    csv: PathBuf,
}

fn parse_cost_model(text: &str, seed: u64) -> Result<CostModel<f64>> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let kind = match kind {
        "uniform" => {
            let (lo, hi) = rest
                .split_once(',')
                .context("uniform cost model needs lo,hi")?;
            CostKind::Uniform {
                lo: lo.trim().parse()?,
                hi: hi.trim().parse()?,
            }
        }
        "stddev-prop" => CostKind::StdDevProportional {
            target_mean: rest.trim().parse()?,
        },
        "explicit" => {
            let text = std::fs::read_to_string(rest)
                .with_context(|| format!("reading costs file {rest}"))?;
            CostKind::Explicit(procure_bfm::market::load_costs_csv(&text)?)
        }
        other => bail!("unknown cost model {other:?}"),
    };
    Ok(CostModel { kind, seed })
}

fn parse_synthetic_spec(text: &str) -> Result<InstanceSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let n: usize = parts
        .get(1)
        .context("synthetic spec needs <kind>:<n>[:<param>]")?
        .parse()?;
    match parts[0] {
        "random-digraph" => Ok(InstanceSpec::RandomDigraph {
            n,
            edge_prob: parts.get(2).map_or(Ok(0.1), |p| p.parse())?,
        }),
        "power-law-digraph" => Ok(InstanceSpec::PowerLawDigraph {
            n,
            exponent: parts.get(2).map_or(Ok(2.5), |p| p.parse())?,
        }),
        "random-vectors" => Ok(InstanceSpec::RandomVectors {
            n,
            dim: parts.get(2).map_or(Ok(8), |p| p.parse())?,
        }),
        other => bail!("unknown synthetic kind {other:?}"),
    }
}

fn dataset_source(args: &InstanceArgs) -> Result<DatasetSource> {
    if args.synthetic {
        return Ok(DatasetSource::Synthetic(parse_synthetic_spec(
            &args.dataset,
        )?));
    }
    let path = PathBuf::from(&args.dataset);
    match args.dataset_kind.as_str() {
        "edge-list" => Ok(DatasetSource::EdgeList(path)),
        "vectors-csv" => Ok(DatasetSource::VectorsCsv(path)),
        "vectors-bin" => Ok(DatasetSource::VectorsBin(path)),
        other => bail!("unknown dataset kind {other:?}"),
    }
}

/// Resolve parameters for one clock mechanism from the preset/override flags.
fn resolve_params(choice: MechanismChoice, args: &MechanismArgs) -> Result<MechanismParams<f64>> {
    let preset = match &args.preset {
        Some(name) => {
            let preset: Preset = name.parse()?;
            // presets only apply to the matching mechanism kind
            let matches = match choice {
                MechanismChoice::BfmSwm => preset.mechanism_kind() == MechanismKind::Swm,
                MechanismChoice::BfmVm => preset.mechanism_kind() == MechanismKind::Vm,
                _ => false,
            };
            if matches {
                preset
            } else {
                choice.default_preset().context("not a clock mechanism")?
            }
        }
        None => choice.default_preset().context("not a clock mechanism")?,
    };
    let mut params: MechanismParams<f64> = preset.params();
    if let Some(alpha) = args.alpha {
        params.alpha = alpha;
    }
    if let Some(beta) = args.beta {
        params.beta = beta;
    }
    if let Some(ell) = args.ell {
        params.ell = ell;
    }
    if let Some(eps) = args.eps {
        params.eps = eps;
    }
    Ok(params)
}

fn mechanism_specs(args: &MechanismArgs) -> Result<Vec<MechanismSpec>> {
    let mut specs = Vec::new();
    for name in args.mechanism.split(',') {
        let choice: MechanismChoice = name.trim().parse()?;
        let params = if choice.is_mechanism() {
            Some(resolve_params(choice, args)?)
        } else {
            None
        };
        specs.push(MechanismSpec { choice, params });
    }
    Ok(specs)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    match args.kind.as_str() {
        "random-digraph" => {
            let spec = InstanceSpec::RandomDigraph {
                n: args.n,
                edge_prob: args.edge_prob,
            };
            let (oracle, _) = gen_instance(&spec, args.seed)?;
            let procure_bfm::oracle::ValuationKind::Coverage(cv) = oracle.kind() else {
                unreachable!()
            };
            std::fs::write(&args.out, edge_list_text(cv))?;
        }
        "power-law-digraph" => {
            let spec = InstanceSpec::PowerLawDigraph {
                n: args.n,
                exponent: args.exponent,
            };
            let (oracle, _) = gen_instance(&spec, args.seed)?;
            let procure_bfm::oracle::ValuationKind::Coverage(cv) = oracle.kind() else {
                unreachable!()
            };
            std::fs::write(&args.out, edge_list_text(cv))?;
        }
        "random-vectors" => {
            let vectors = random_vectors(args.n, args.dim, args.seed)?;
            if args.binary {
                std::fs::write(&args.out, write_vectors_bin(&vectors))?;
            } else {
                std::fs::write(&args.out, vectors_csv_text(&vectors))?;
            }
        }
        other => bail!("unknown generator kind {other:?}"),
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let source = dataset_source(&args.instance)?;
    let data = load_dataset(&source, args.instance.symmetrize, args.instance.seed)?;
    let n = data.oracle.ground_size();
    let model = parse_cost_model(&args.instance.cost_model, args.instance.seed)?;
    let costs = procure_bfm::market::gen_costs(&model, n, data.aux.as_deref())?;

    let specs = mechanism_specs(&args.mechanism)?;
    if specs.len() != 1 {
        bail!("run takes exactly one mechanism");
    }
    let spec = &specs[0];
    if !spec.choice.is_mechanism() {
        bail!("run drives the clock mechanisms; use sweep for baselines");
    }
    let kind = if spec.choice == MechanismChoice::BfmSwm {
        MechanismKind::Swm
    } else {
        MechanismKind::Vm
    };
    let params = spec.params.unwrap();
    let mut market = Market::truthful(&costs, args.budget)?;
    let result = run_mechanism(kind, &data.oracle, &mut market, &params)?;
    let report = audit_run(&result, &market, &data.oracle, &params, kind, None)?;

    let true_cost: f64 = result.winners.iter().map(|&u| costs[u as usize]).sum();
    println!("dataset:   {} (n = {n})", data.label);
    println!("mechanism: {}", spec.choice.label());
    println!("winners:   {} sellers", result.winners.len());
    println!("valuation: {}", result.valuation);
    println!("payment:   {}", result.total_payment);
    println!("welfare:   {}", result.valuation - true_cost);
    println!("rounds:    {}", result.rounds);
    println!("queries:   {}", result.queries);
    println!(
        "audit:     {}",
        if report.passed() { "ok" } else { "FAILED" }
    );
    if !report.passed() {
        for check in report.failures() {
            println!(
                "  {}: {}",
                check.name,
                check.witness.clone().unwrap_or_default()
            );
        }
        bail!("property audit failed");
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let budgets: Result<Vec<f64>, _> = args
        .budget
        .split(',')
        .map(|b| b.trim().parse::<f64>())
        .collect();
    let config = ExperimentConfig {
        dataset: dataset_source(&args.instance)?,
        symmetrize: args.instance.symmetrize,
        cost_model: parse_cost_model(&args.instance.cost_model, args.instance.seed)?,
        budgets: budgets?,
        mechanisms: mechanism_specs(&args.mechanism)?,
        seed: args.instance.seed,
        repetitions: args.reps,
        out: args.out.clone(),
        large: args.instance.large,
    };
    let output = run_sweep(&config)?;
    println!(
        "wrote {} rows to {} (plot data: {})",
        output.rows.len(),
        output.csv_path.display(),
        output.plot_path.display()
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let mut outcome = SuiteOutcome::default();
    let run_guarantees = matches!(args.suite.as_str(), "guarantees" | "all");
    let run_truthfulness = matches!(args.suite.as_str(), "truthfulness" | "all");
    if !run_guarantees && !run_truthfulness {
        bail!("unknown suite {:?}", args.suite);
    }
    if run_guarantees {
        outcome.merge(guarantee_suite(
            Preset::SwmNonMonotone,
            &CorpusConfig::guarantees(OracleFamily::Mixed, args.instances, args.seed),
        )?);
        outcome.merge(guarantee_suite(
            Preset::SwmMonotone,
            &CorpusConfig::guarantees(OracleFamily::Coverage, args.instances, args.seed + 1),
        )?);
        outcome.merge(guarantee_suite(
            Preset::Vm,
            &CorpusConfig::guarantees(OracleFamily::Mixed, args.instances, args.seed + 2),
        )?);
    }
    if run_truthfulness {
        let instances = args.instances.min(50);
        outcome.merge(truthfulness_suite(&CorpusConfig::truthfulness(
            instances,
            args.seed + 3,
        ))?);
    }
    write_report_csv(&outcome.rows, &args.out)?;
    println!(
        "{} checks, {} failures; report at {}",
        outcome.rows.len(),
        outcome.failures,
        args.out.display()
    );
    if !outcome.is_clean() {
        bail!("{} verification failures", outcome.failures);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Summary(args) => {
            print!("{}", report_summary(&args.csv)?);
            Ok(())
        }
    }
}
