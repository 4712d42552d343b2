//! Experiment harness: dataset ingestion, sweep execution over budgets and
//! repetitions, deterministic CSV emission, and summary reporting.

pub mod gen;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{
    budget_truncate, cost_scaled_greedy, distorted_greedy, roi_greedy, BaselineError,
    GreedySequence,
};
use crate::market::{gen_costs, CostModel, CostModelError, Market, MarketError};
use crate::mechanism::{MechanismError, MechanismKind, MechanismParams, Preset};
use crate::oracle::{
    load_coverage_graph, load_vectors_bin, load_vectors_csv, LoadError, OracleError,
    SimilarityDiversityValuation, ValuationOracle,
};
use crate::verify::{audit_run, VerifyError};
use crate::NodeId;

use gen::{gen_instance, vector_stddevs, GenError, InstanceSpec};

/// Datasets above this many sellers are refused unless the config opts into
/// large mode; keeps accidental full-scale runs out of the test path.
pub const LARGE_DATASET_GUARD: usize = 20_000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("budget list must not be empty")]
    EmptyBudgets,
    #[error("budgets must be positive, got {0}")]
    BadBudget(f64),
    #[error("need at least one repetition")]
    ZeroRepetitions,
    #[error("need at least one mechanism")]
    NoMechanisms,
    #[error("dataset has {n} sellers; pass large=true to exceed {guard}")]
    DatasetTooLarge { n: usize, guard: usize },
    #[error("cost model needs aux scores, which this dataset does not provide")]
    MissingAux,
    #[error("property violation in {mechanism} at budget {budget} (seed {seed}): {detail}")]
    PropertyViolation {
        mechanism: String,
        budget: f64,
        seed: u64,
        detail: String,
    },
    #[error("malformed results csv: {0}")]
    MalformedCsv(String),
    #[error("unknown mechanism {0:?}")]
    UnknownMechanism(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    CostModel(#[from] CostModelError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Where the instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    EdgeList(PathBuf),
    VectorsCsv(PathBuf),
    VectorsBin(PathBuf),
    Synthetic(InstanceSpec),
}

/// All mechanisms and baselines the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismChoice {
    BfmSwm,
    BfmVm,
    Distorted,
    Roi,
    CostScaled,
}

impl MechanismChoice {
    pub fn label(self) -> &'static str {
        match self {
            MechanismChoice::BfmSwm => "bfm-swm",
            MechanismChoice::BfmVm => "bfm-vm",
            MechanismChoice::Distorted => "distorted",
            MechanismChoice::Roi => "roi",
            MechanismChoice::CostScaled => "cost-scaled",
        }
    }

    pub fn is_mechanism(self) -> bool {
        matches!(self, MechanismChoice::BfmSwm | MechanismChoice::BfmVm)
    }

    /// Default parameter preset for the clock mechanisms.
    pub fn default_preset(self) -> Option<Preset> {
        match self {
            MechanismChoice::BfmSwm => Some(Preset::SwmNonMonotone),
            MechanismChoice::BfmVm => Some(Preset::Vm),
            _ => None,
        }
    }
}

impl FromStr for MechanismChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfm-swm" => Ok(MechanismChoice::BfmSwm),
            "bfm-vm" => Ok(MechanismChoice::BfmVm),
            "distorted" => Ok(MechanismChoice::Distorted),
            "roi" => Ok(MechanismChoice::Roi),
            "cost-scaled" => Ok(MechanismChoice::CostScaled),
            other => Err(HarnessError::UnknownMechanism(other.to_string())),
        }
    }
}

/// A mechanism plus its resolved parameters (ignored by baselines).
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismSpec {
    pub choice: MechanismChoice,
    pub params: Option<MechanismParams<f64>>,
}

impl MechanismSpec {
    pub fn with_default_params(choice: MechanismChoice) -> Self {
        Self {
            choice,
            params: choice.default_preset().map(Preset::params),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub symmetrize: bool,
    pub cost_model: CostModel<f64>,
    /// Strictly positive, sorted ascending.
    pub budgets: Vec<f64>,
    pub mechanisms: Vec<MechanismSpec>,
    pub seed: u64,
    pub repetitions: usize,
    pub out: PathBuf,
    pub large: bool,
}

/// One result line; the CSV schema is versioned in the file header.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub mechanism: String,
    pub budget: f64,
    /// Welfare v(S)−c(S) for bfm-swm and the baselines, valuation v(S) for
    /// bfm-vm; always recomputed from true costs at write time.
    pub objective_value: f64,
    /// Empty for baselines, which make no payments.
    pub total_payment: Option<f64>,
    pub winners: usize,
    pub oracle_queries: u64,
    pub wallclock_ms: f64,
    /// Empty for baselines.
    pub rounds: Option<usize>,
    /// The repetition's derived cost seed.
    pub seed: u64,
}

pub const RESULTS_HEADER: &str =
    "dataset,mechanism,budget,objective_value,total_payment,winners,oracle_queries,wallclock_ms,rounds,seed";

impl ResultRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.dataset.replace(',', ";"),
            self.mechanism,
            self.budget,
            self.objective_value,
            self.total_payment.map_or(String::new(), |p| p.to_string()),
            self.winners,
            self.oracle_queries,
            self.wallclock_ms,
            self.rounds.map_or(String::new(), |r| r.to_string()),
            self.seed
        )
    }

    fn from_csv(line: &str) -> Result<Self, HarnessError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(HarnessError::MalformedCsv(format!(
                "expected 10 fields, got {}: {line}",
                fields.len()
            )));
        }
        let bad = |what: &str| HarnessError::MalformedCsv(format!("bad {what}: {line}"));
        Ok(ResultRow {
            dataset: fields[0].to_string(),
            mechanism: fields[1].to_string(),
            budget: fields[2].parse().map_err(|_| bad("budget"))?,
            objective_value: fields[3].parse().map_err(|_| bad("objective"))?,
            total_payment: if fields[4].is_empty() {
                None
            } else {
                Some(fields[4].parse().map_err(|_| bad("payment"))?)
            },
            winners: fields[5].parse().map_err(|_| bad("winners"))?,
            oracle_queries: fields[6].parse().map_err(|_| bad("queries"))?,
            wallclock_ms: fields[7].parse().map_err(|_| bad("wallclock"))?,
            rounds: if fields[8].is_empty() {
                None
            } else {
                Some(fields[8].parse().map_err(|_| bad("rounds"))?)
            },
            seed: fields[9].parse().map_err(|_| bad("seed"))?,
        })
    }
}

/// A loaded instance ready for sweeping.
pub struct LoadedDataset {
    pub oracle: ValuationOracle<f64>,
    /// Per-item aux scores (vector datasets only).
    pub aux: Option<Vec<f64>>,
    pub label: String,
}

pub fn load_dataset(
    source: &DatasetSource,
    symmetrize: bool,
    seed: u64,
) -> Result<LoadedDataset, HarnessError> {
    let stem = |p: &Path| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_string())
    };
    match source {
        DatasetSource::EdgeList(path) => {
            let text = std::fs::read_to_string(path)?;
            let cv = load_coverage_graph(&text, symmetrize)?;
            Ok(LoadedDataset {
                oracle: ValuationOracle::coverage(cv),
                aux: None,
                label: stem(path),
            })
        }
        DatasetSource::VectorsCsv(path) => {
            let text = std::fs::read_to_string(path)?;
            let vectors: Vec<Vec<f64>> = load_vectors_csv(&text)?;
            let aux = vector_stddevs(&vectors);
            let sd = SimilarityDiversityValuation::from_vectors(vectors)?;
            Ok(LoadedDataset {
                oracle: ValuationOracle::similarity_diversity(sd),
                aux: Some(aux),
                label: stem(path),
            })
        }
        DatasetSource::VectorsBin(path) => {
            let bytes = std::fs::read(path)?;
            let vectors: Vec<Vec<f64>> = load_vectors_bin(&bytes)?;
            let aux = vector_stddevs(&vectors);
            let sd = SimilarityDiversityValuation::from_vectors(vectors)?;
            Ok(LoadedDataset {
                oracle: ValuationOracle::similarity_diversity(sd),
                aux: Some(aux),
                label: stem(path),
            })
        }
        DatasetSource::Synthetic(spec) => {
            let (oracle, aux) = gen_instance(spec, seed)?;
            Ok(LoadedDataset {
                oracle,
                aux,
                label: spec.label(),
            })
        }
    }
}

fn derive_cost_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(rep as u64)
}

/// Run one mechanism or baseline at one (budget, repetition) point.
fn run_point(
    data: &LoadedDataset,
    spec: &MechanismSpec,
    budget: f64,
    costs: &[f64],
    cost_seed: u64,
) -> Result<ResultRow, HarnessError> {
    let oracle = data.oracle.fresh_clone();
    let start = Instant::now();
    let row = match spec.choice {
        MechanismChoice::BfmSwm | MechanismChoice::BfmVm => {
            let kind = if spec.choice == MechanismChoice::BfmSwm {
                MechanismKind::Swm
            } else {
                MechanismKind::Vm
            };
            let params = spec
                .params
                .unwrap_or_else(|| spec.choice.default_preset().unwrap().params());
            let mut market = Market::truthful(costs, budget)?;
            let result = crate::verify::run_mechanism(kind, &oracle, &mut market, &params)?;
            let report = audit_run(&result, &market, &oracle, &params, kind, None)?;
            if !report.passed() {
                let detail: Vec<String> = report
                    .failures()
                    .map(|c| format!("{}: {}", c.name, c.witness.clone().unwrap_or_default()))
                    .collect();
                return Err(HarnessError::PropertyViolation {
                    mechanism: spec.choice.label().to_string(),
                    budget,
                    seed: cost_seed,
                    detail: detail.join("; "),
                });
            }
            // the run had exclusive use of the oracle clone, so its local
            // count must equal the counter delta exactly
            assert_eq!(result.queries, oracle.queries());
            let true_cost: f64 = result.winners.iter().map(|&u| costs[u as usize]).sum();
            let objective = match kind {
                MechanismKind::Swm => result.valuation - true_cost,
                MechanismKind::Vm => result.valuation,
            };
            ResultRow {
                dataset: data.label.clone(),
                mechanism: spec.choice.label().to_string(),
                budget,
                objective_value: objective,
                total_payment: Some(result.total_payment),
                winners: result.winners.len(),
                oracle_queries: result.queries,
                wallclock_ms: 0.0,
                rounds: Some(result.rounds),
                seed: cost_seed,
            }
        }
        MechanismChoice::Distorted | MechanismChoice::Roi | MechanismChoice::CostScaled => {
            let seq: GreedySequence<f64> = match spec.choice {
                MechanismChoice::Distorted => distorted_greedy(&oracle, costs, None)?,
                MechanismChoice::Roi => roi_greedy(&oracle, costs)?,
                _ => cost_scaled_greedy(&oracle, costs)?,
            };
            let chosen: Vec<NodeId> = budget_truncate(&seq, costs, budget);
            let chosen_cost: f64 = chosen.iter().map(|&u| costs[u as usize]).sum();
            if chosen_cost > budget + 1e-9 {
                return Err(HarnessError::PropertyViolation {
                    mechanism: spec.choice.label().to_string(),
                    budget,
                    seed: cost_seed,
                    detail: format!("truncated prefix cost {chosen_cost} exceeds budget"),
                });
            }
            let value = oracle.evaluate_uncounted(&chosen)?;
            ResultRow {
                dataset: data.label.clone(),
                mechanism: spec.choice.label().to_string(),
                budget,
                objective_value: value - chosen_cost,
                total_payment: None,
                winners: chosen.len(),
                oracle_queries: oracle.queries(),
                wallclock_ms: 0.0,
                rounds: None,
                seed: cost_seed,
            }
        }
    };
    Ok(ResultRow {
        wallclock_ms: start.elapsed().as_secs_f64() * 1e3,
        ..row
    })
}

#[derive(Debug)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub csv_path: PathBuf,
    pub plot_path: PathBuf,
}

/// Execute the full sweep: for each budget × repetition × mechanism, draw the
/// repetition's costs, run on a fresh market and oracle clone, audit, and
/// emit one row. Points run concurrently (capped by `PROCURE_BFM_THREADS`);
/// rows are written in deterministic (budget, repetition, mechanism) order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput, HarnessError> {
    if config.budgets.is_empty() {
        return Err(HarnessError::EmptyBudgets);
    }
    if let Some(&bad) = config.budgets.iter().find(|b| !(**b > 0.0)) {
        return Err(HarnessError::BadBudget(bad));
    }
    if config.repetitions == 0 {
        return Err(HarnessError::ZeroRepetitions);
    }
    if config.mechanisms.is_empty() {
        return Err(HarnessError::NoMechanisms);
    }
    let mut budgets = config.budgets.clone();
    budgets.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let data = load_dataset(&config.dataset, config.symmetrize, config.seed)?;
    let n = data.oracle.ground_size();
    if n > LARGE_DATASET_GUARD && !config.large {
        return Err(HarnessError::DatasetTooLarge {
            n,
            guard: LARGE_DATASET_GUARD,
        });
    }

    // costs are fixed per repetition so budget series stay comparable
    let mut rep_costs: Vec<(u64, Vec<f64>)> = Vec::with_capacity(config.repetitions);
    for rep in 0..config.repetitions {
        let cost_seed = derive_cost_seed(config.seed, rep);
        let model = CostModel {
            kind: config.cost_model.kind.clone(),
            seed: cost_seed,
        };
        let costs = gen_costs(&model, n, data.aux.as_deref()).map_err(|e| match e {
            CostModelError::AuxLength { got: 0, .. } => HarnessError::MissingAux,
            other => HarnessError::CostModel(other),
        })?;
        rep_costs.push((cost_seed, costs));
    }

    struct Point<'a> {
        budget: f64,
        cost_seed: u64,
        costs: &'a [f64],
        spec: &'a MechanismSpec,
    }
    let mut points = Vec::new();
    for &budget in &budgets {
        for (cost_seed, costs) in &rep_costs {
            for spec in &config.mechanisms {
                points.push(Point {
                    budget,
                    cost_seed: *cost_seed,
                    costs,
                    spec,
                });
            }
        }
    }

    let compute = || -> Result<Vec<ResultRow>, HarnessError> {
        points
            .par_iter()
            .map(|p| run_point(&data, p.spec, p.budget, p.costs, p.cost_seed))
            .collect()
    };
    let rows = match thread_cap() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::ThreadPool(e.to_string()))?
            .install(compute),
        None => compute(),
    }?;

    write_results_csv(&rows, &config.out)?;
    let plot_path = plot_path_for(&config.out);
    write_plot_data(&rows, &config.mechanisms, &budgets, &plot_path)?;
    Ok(SweepOutput {
        rows,
        csv_path: config.out.clone(),
        plot_path,
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var("PROCURE_BFM_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&k| k >= 1)
}

pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# procure-bfm results v1")?;
    writeln!(file, "{RESULTS_HEADER}")?;
    for row in rows {
        writeln!(file, "{}", row.to_csv())?;
    }
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != RESULTS_HEADER {
                return Err(HarnessError::MalformedCsv(format!(
                    "unexpected header: {line}"
                )));
            }
            saw_header = true;
            continue;
        }
        rows.push(ResultRow::from_csv(line)?);
    }
    Ok(rows)
}

fn plot_path_for(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.plot.csv"))
}

/// Companion plot data: one row per budget, one column per mechanism holding
/// the mean objective across repetitions.
fn write_plot_data(
    rows: &[ResultRow],
    mechanisms: &[MechanismSpec],
    budgets: &[f64],
    path: &Path,
) -> Result<(), HarnessError> {
    let mut file = std::fs::File::create(path)?;
    writeln!(
        file,
        "# procure-bfm plot data v1 (mean objective per budget)"
    )?;
    let labels: Vec<&str> = mechanisms.iter().map(|m| m.choice.label()).collect();
    writeln!(file, "budget,{}", labels.join(","))?;
    for &budget in budgets {
        let mut line = format!("{budget}");
        for label in &labels {
            let series: Vec<f64> = rows
                .iter()
                .filter(|r| r.budget == budget && r.mechanism == *label)
                .map(|r| r.objective_value)
                .collect();
            let mean = if series.is_empty() {
                f64::NAN
            } else {
                series.iter().sum::<f64>() / series.len() as f64
            };
            let _ = write!(line, ",{mean}");
        }
        writeln!(file, "{line}")?;
    }
    Ok(())
}

/// Descriptive per-budget comparison of the welfare mechanism against the
/// best baseline; no assertions, just the local corpus numbers.
pub fn report_summary(csv_path: &Path) -> Result<String, HarnessError> {
    let rows = read_results_csv(csv_path)?;
    let mut budgets: Vec<f64> = rows.iter().map(|r| r.budget).collect();
    budgets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    budgets.dedup();

    let baseline_labels = ["distorted", "roi", "cost-scaled"];
    let mut out = String::new();
    let _ = writeln!(out, "summary of {}", csv_path.display());
    let mut ratios = Vec::new();
    for &budget in &budgets {
        let mean_of = |label: &str| -> Option<f64> {
            let series: Vec<f64> = rows
                .iter()
                .filter(|r| r.budget == budget && r.mechanism == label)
                .map(|r| r.objective_value)
                .collect();
            if series.is_empty() {
                None
            } else {
                Some(series.iter().sum::<f64>() / series.len() as f64)
            }
        };
        let swm = mean_of("bfm-swm");
        let best_baseline = baseline_labels
            .iter()
            .filter_map(|label| mean_of(label).map(|v| (*label, v)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        match (swm, best_baseline) {
            (Some(swm), Some((label, base))) => {
                if base > 0.0 {
                    let ratio = swm / base;
                    ratios.push(ratio);
                    let _ = writeln!(
                        out,
                        "budget {budget}: bfm-swm welfare {swm:.6}, best baseline {label} {base:.6}, ratio {ratio:.2}x"
                    );
                } else {
                    let _ = writeln!(
                        out,
                        "budget {budget}: bfm-swm welfare {swm:.6}, best baseline {label} {base:.6}, ratio n/a (baseline not positive)"
                    );
                }
            }
            _ => {
                let _ = writeln!(out, "budget {budget}: ratio n/a (missing series)");
            }
        }
    }
    if ratios.is_empty() {
        let _ = writeln!(out, "ratios: n/a");
    } else {
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let avg = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let _ = writeln!(out, "ratios: min {min:.2}x, avg {avg:.2}x, max {max:.2}x");
    }
    Ok(out)
}
