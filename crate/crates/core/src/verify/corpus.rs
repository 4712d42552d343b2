//! Seeded instance corpora and the suite runners behind the `verify` CLI
//! subcommand and the acceptance tests.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harness::gen;
use crate::market::{Market, Strategy};
use crate::mechanism::{MechanismKind, MechanismParams, Preset};
use crate::oracle::{SimilarityDiversityValuation, ValuationKind, ValuationOracle};
use crate::verify::{
    audit_run, brute_force_opt, check_guarantee, run_mechanism, truthfulness_probe, CheckStatus,
    GuaranteeSpec, Objective, PropertyReport, VerifyError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleFamily {
    Coverage,
    SimilarityDiversity,
    /// Alternate coverage (even ids) and similarity-diversity (odd ids).
    Mixed,
}

/// Deterministic family of random desk-scale instances.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub instances: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub family: OracleFamily,
    /// Budgets as fractions of the total seller cost, cycled per instance.
    pub budget_fractions: Vec<f64>,
    pub seed: u64,
}

impl CorpusConfig {
    /// The guarantee-suite corpus: uniform(0,1) costs, budgets cycling
    /// through {0.25, 0.5, 1.0}·Σc, ground sets of 4..=12 sellers.
    pub fn guarantees(family: OracleFamily, instances: usize, seed: u64) -> Self {
        Self {
            instances,
            n_min: 4,
            n_max: 12,
            family,
            budget_fractions: vec![0.25, 0.5, 1.0],
            seed,
        }
    }

    /// The truthfulness corpus keeps ground sets small enough to rerun every
    /// agent × policy deviation.
    pub fn truthfulness(instances: usize, seed: u64) -> Self {
        Self {
            instances,
            n_min: 4,
            n_max: 8,
            family: OracleFamily::Mixed,
            budget_fractions: vec![0.25, 0.5, 1.0],
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: usize,
    pub oracle: ValuationOracle<f64>,
    pub costs: Vec<f64>,
    pub budget: f64,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.oracle.ground_size()
    }

    pub fn is_coverage(&self) -> bool {
        matches!(self.oracle.kind(), ValuationKind::Coverage(_))
    }
}

pub fn build_instance(cfg: &CorpusConfig, index: usize) -> Instance {
    let mut rng =
        ChaCha8Rng::seed_from_u64(cfg.seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = rng.random_range(cfg.n_min..=cfg.n_max);
    let coverage = match cfg.family {
        OracleFamily::Coverage => true,
        OracleFamily::SimilarityDiversity => false,
        OracleFamily::Mixed => index.is_multiple_of(2),
    };
    let oracle = if coverage {
        let edge_prob = rng.random_range(0.15..0.6);
        let graph_seed = rng.random();
        ValuationOracle::coverage(gen::random_digraph(n, edge_prob, graph_seed).unwrap())
    } else {
        let dim = rng.random_range(3..=8);
        let vec_seed = rng.random();
        let vectors = gen::random_vectors(n, dim, vec_seed).unwrap();
        ValuationOracle::similarity_diversity(
            SimilarityDiversityValuation::from_vectors(vectors).unwrap(),
        )
    };
    let costs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let frac = cfg.budget_fractions[index % cfg.budget_fractions.len()];
    let budget = (frac * costs.iter().sum::<f64>()).max(1e-6);
    Instance {
        id: index,
        oracle,
        costs,
        budget,
    }
}

/// One row of the machine-readable verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub instance: usize,
    pub check: String,
    pub pass: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteOutcome {
    pub rows: Vec<SuiteRow>,
    pub failures: usize,
}

impl SuiteOutcome {
    pub fn is_clean(&self) -> bool {
        self.failures == 0
    }

    fn push(&mut self, instance: usize, check: impl Into<String>, pass: bool, margin: f64) {
        if !pass {
            self.failures += 1;
        }
        self.rows.push(SuiteRow {
            instance,
            check: check.into(),
            pass,
            margin,
        });
    }

    fn extend_report(&mut self, instance: usize, report: &PropertyReport) {
        for check in &report.checks {
            match check.status {
                CheckStatus::Skipped => {}
                CheckStatus::Pass => self.push(instance, check.name, true, check.margin),
                CheckStatus::Fail => self.push(instance, check.name, false, check.margin),
            }
        }
    }

    pub fn merge(&mut self, other: SuiteOutcome) {
        self.failures += other.failures;
        self.rows.extend(other.rows);
    }
}

/// The proven approximation guarantee for a preset.
pub fn guarantee_spec_for(preset: Preset) -> GuaranteeSpec<f64> {
    let eps = Preset::params::<f64>(preset).eps;
    match preset {
        Preset::SwmNonMonotone => GuaranteeSpec {
            gamma: 0.0328,
            additive_slack: eps / 4.0,
            objective: Objective::Welfare,
        },
        Preset::SwmMonotone => GuaranteeSpec {
            gamma: 0.0877,
            additive_slack: eps / 3.0,
            objective: Objective::Welfare,
        },
        Preset::Vm => GuaranteeSpec {
            gamma: 1.0 / (12.0 + 4.0 * 3.0f64.sqrt()),
            additive_slack: 0.0,
            objective: Objective::Valuation,
        },
    }
}

/// Run one preset over a corpus: every run is audited in full, compared to
/// the brute-force optimum, and checked against its approximation guarantee.
pub fn guarantee_suite(preset: Preset, cfg: &CorpusConfig) -> Result<SuiteOutcome, VerifyError> {
    let params: MechanismParams<f64> = preset.params();
    let kind = preset.mechanism_kind();
    let spec = guarantee_spec_for(preset);
    let mut outcome = SuiteOutcome::default();
    for index in 0..cfg.instances {
        let inst = build_instance(cfg, index);
        let oracle = inst.oracle.fresh_clone();
        let mut market = Market::truthful(&inst.costs, inst.budget)?;
        let result = run_mechanism(kind, &oracle, &mut market, &params)?;
        let cert = brute_force_opt(&oracle, &inst.costs, inst.budget, spec.objective)?;
        let audit_cert = match kind {
            MechanismKind::Swm => Some(&cert),
            MechanismKind::Vm => None,
        };
        let report = audit_run(&result, &market, &oracle, &params, kind, audit_cert)?;
        outcome.extend_report(index, &report);
        let outcome_g = check_guarantee(&result, &cert, &spec, &inst.costs)?;
        outcome.push(index, "guarantee", outcome_g.pass, outcome_g.margin);
    }
    Ok(outcome)
}

/// The scripted deviation family probed for strategyproofness.
pub fn standard_policies(budget: f64) -> Vec<Strategy<f64>> {
    vec![
        Strategy::AlwaysReject,
        Strategy::RejectBelow(0.5 * budget),
        Strategy::RejectBelow(budget),
        Strategy::AcceptMargin(0.05),
    ]
}

/// Probe every agent × policy deviation on every corpus instance, for both
/// mechanisms (and additionally the monotone preset on coverage instances).
pub fn truthfulness_suite(cfg: &CorpusConfig) -> Result<SuiteOutcome, VerifyError> {
    let mut outcome = SuiteOutcome::default();
    for index in 0..cfg.instances {
        let inst = build_instance(cfg, index);
        let policies = standard_policies(inst.budget);
        let mut presets = vec![Preset::SwmNonMonotone, Preset::Vm];
        if inst.is_coverage() {
            presets.push(Preset::SwmMonotone);
        }
        for preset in presets {
            let params: MechanismParams<f64> = preset.params();
            let report = truthfulness_probe(
                &inst.oracle.fresh_clone(),
                &inst.costs,
                inst.budget,
                &params,
                preset.mechanism_kind(),
                &policies,
            )?;
            outcome.push(
                index,
                format!("truthfulness-{}", preset.name()),
                report.is_clean(),
                -report.max_gain,
            );
        }
    }
    Ok(outcome)
}

/// Write the machine-readable report: `instance_id,check,pass,margin`.
pub fn write_report_csv(rows: &[SuiteRow], path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# procure-bfm verify report v1")?;
    writeln!(file, "instance_id,check,pass,margin")?;
    for row in rows {
        writeln!(
            file,
            "{},{},{},{}",
            row.instance, row.check, row.pass, row.margin
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_in_range() {
        let cfg = CorpusConfig::guarantees(OracleFamily::Mixed, 12, 7);
        for index in 0..cfg.instances {
            let a = build_instance(&cfg, index);
            let b = build_instance(&cfg, index);
            assert!(a.n() >= 4 && a.n() <= 12);
            assert_eq!(a.costs, b.costs);
            assert_eq!(a.budget, b.budget);
            assert_eq!(a.oracle, b.oracle);
            assert_eq!(a.is_coverage(), index % 2 == 0);
        }
    }

    #[test]
    fn small_guarantee_suite_is_clean() {
        let cfg = CorpusConfig::guarantees(OracleFamily::Mixed, 24, 11);
        let outcome = guarantee_suite(Preset::SwmNonMonotone, &cfg).unwrap();
        assert!(
            outcome.is_clean(),
            "failures: {:?}",
            outcome.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>()
        );
        let coverage = CorpusConfig::guarantees(OracleFamily::Coverage, 24, 13);
        assert!(guarantee_suite(Preset::SwmMonotone, &coverage)
            .unwrap()
            .is_clean());
        assert!(guarantee_suite(Preset::Vm, &cfg).unwrap().is_clean());
    }

    #[test]
    fn small_truthfulness_suite_is_clean() {
        let cfg = CorpusConfig::truthfulness(6, 17);
        let outcome = truthfulness_suite(&cfg).unwrap();
        assert!(outcome.is_clean());
        assert!(!outcome.rows.is_empty());
    }

    #[test]
    fn report_csv_schema() {
        let rows = vec![SuiteRow {
            instance: 3,
            check: "budget".into(),
            pass: true,
            margin: 0.5,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        write_report_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "# procure-bfm verify report v1\ninstance_id,check,pass,margin\n3,budget,true,0.5\n"
        );
    }
}
