//! Deterministic synthetic instance generators: desk-scale stand-ins for the
//! large public graph and image datasets the loaders accept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::oracle::{CoverageValuation, SimilarityDiversityValuation, ValuationOracle};
use crate::NodeId;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

/// Synthetic dataset families.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    /// Every ordered pair (u, v), self-pairs included, carries an edge
    /// independently with probability `edge_prob`.
    RandomDigraph { n: usize, edge_prob: f64 },
    /// Out-degrees follow a discrete power law with the given exponent
    /// (inverse-transform sampling, d = floor((1−U)^(−1/(exponent−1)))
    /// capped at n), targets drawn distinct uniformly.
    PowerLawDigraph { n: usize, exponent: f64 },
    /// n vectors with i.i.d. uniform [0,1) entries; similarity by inner
    /// product. Also yields per-vector standard deviations as aux scores.
    RandomVectors { n: usize, dim: usize },
}

impl InstanceSpec {
    pub fn n(&self) -> usize {
        match self {
            InstanceSpec::RandomDigraph { n, .. }
            | InstanceSpec::PowerLawDigraph { n, .. }
            | InstanceSpec::RandomVectors { n, .. } => *n,
        }
    }

    pub fn label(&self) -> String {
        // labels land in CSV fields, so no commas
        match self {
            InstanceSpec::RandomDigraph { n, edge_prob } => {
                format!("synth:random-digraph:n={n}:p={edge_prob}")
            }
            InstanceSpec::PowerLawDigraph { n, exponent } => {
                format!("synth:power-law-digraph:n={n}:exponent={exponent}")
            }
            InstanceSpec::RandomVectors { n, dim } => {
                format!("synth:random-vectors:n={n}:d={dim}")
            }
        }
    }
}

pub fn random_digraph(n: usize, edge_prob: f64, seed: u64) -> Result<CoverageValuation, GenError> {
    if n == 0 {
        return Err(GenError::InvalidSpec("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(GenError::InvalidSpec(format!(
            "edge_prob {edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjacency = vec![Vec::new(); n];
    for targets in adjacency.iter_mut() {
        for v in 0..n {
            if rng.random_bool(edge_prob) {
                targets.push(v as NodeId);
            }
        }
    }
    Ok(CoverageValuation::new(adjacency).expect("generated targets are in range"))
}

pub fn power_law_digraph(
    n: usize,
    exponent: f64,
    seed: u64,
) -> Result<CoverageValuation, GenError> {
    if n == 0 {
        return Err(GenError::InvalidSpec("n must be at least 1".into()));
    }
    if exponent <= 1.0 {
        return Err(GenError::InvalidSpec(format!(
            "power-law exponent must exceed 1, got {exponent}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjacency = vec![Vec::new(); n];
    let mut pool: Vec<NodeId> = (0..n as NodeId).collect();
    for targets in adjacency.iter_mut() {
        let uniform: f64 = rng.random_range(0.0..1.0);
        let degree = (1.0 - uniform).powf(-1.0 / (exponent - 1.0)).floor() as usize;
        let degree = degree.clamp(1, n);
        // partial Fisher-Yates for `degree` distinct targets
        for k in 0..degree {
            let j = rng.random_range(k..n);
            pool.swap(k, j);
        }
        targets.extend_from_slice(&pool[..degree]);
    }
    Ok(CoverageValuation::new(adjacency).expect("generated targets are in range"))
}

pub fn random_vectors(n: usize, dim: usize, seed: u64) -> Result<Vec<Vec<f64>>, GenError> {
    if n == 0 || dim == 0 {
        return Err(GenError::InvalidSpec(
            "need n ≥ 1 vectors of dimension ≥ 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect())
}

/// Population standard deviation of each vector's entries; the aux score the
/// stddev-proportional cost model consumes.
pub fn vector_stddevs(vectors: &[Vec<f64>]) -> Vec<f64> {
    vectors
        .iter()
        .map(|v| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            var.sqrt()
        })
        .collect()
}

/// Build the oracle (and aux scores, for vector instances) for a spec.
pub fn gen_instance(
    spec: &InstanceSpec,
    seed: u64,
) -> Result<(ValuationOracle<f64>, Option<Vec<f64>>), GenError> {
    match spec {
        InstanceSpec::RandomDigraph { n, edge_prob } => Ok((
            ValuationOracle::coverage(random_digraph(*n, *edge_prob, seed)?),
            None,
        )),
        InstanceSpec::PowerLawDigraph { n, exponent } => Ok((
            ValuationOracle::coverage(power_law_digraph(*n, *exponent, seed)?),
            None,
        )),
        InstanceSpec::RandomVectors { n, dim } => {
            let vectors = random_vectors(*n, *dim, seed)?;
            let aux = vector_stddevs(&vectors);
            let sd = SimilarityDiversityValuation::from_vectors(vectors)
                .map_err(|e| GenError::InvalidSpec(e.to_string()))?;
            Ok((ValuationOracle::similarity_diversity(sd), Some(aux)))
        }
    }
}

/// Render a coverage graph back to edge-list text (node labels = dense ids).
pub fn edge_list_text(cv: &CoverageValuation) -> String {
    let mut out = String::from("# directed edge list: u v means v in T(u)\n");
    for u in 0..cv.ground_size() as NodeId {
        for &v in cv.targets(u) {
            out.push_str(&format!("{u} {v}\n"));
        }
    }
    out
}

/// Render vectors as the CSV format the loaders accept.
pub fn vectors_csv_text(vectors: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for v in vectors {
        let row: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
