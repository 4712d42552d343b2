//! Similarity-diversity valuation
//! v(S) = (1/n) (Σ_{u∈N,v∈S} s_{u,v} − Σ_{u∈S,v∈S} s_{u,v}),
//! non-monotone submodular for a symmetric non-negative similarity matrix.

use crate::oracle::OracleError;
use crate::scalar::Real;
use crate::NodeId;

/// Above this ground-set size the similarity matrix is not materialized and
/// entries are recomputed from the stored vectors on demand. Both paths use
/// the same dot-product loop, so values are identical either way.
const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
enum Storage<R: Real> {
    /// Row-major n×n matrix.
    Dense(Vec<R>),
    /// Source vectors; s_{u,v} is their inner product.
    Lazy(Vec<Vec<R>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDiversityValuation<R: Real> {
    n: usize,
    storage: Storage<R>,
    /// col_sums[v] = Σ_{u∈N} s_{u,v}, precomputed once.
    col_sums: Vec<R>,
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    let mut acc = R::zero();
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc += x * y;
    }
    acc
}

impl<R: Real> SimilarityDiversityValuation<R> {
    /// Build from an explicit similarity matrix. The matrix must be square,
    /// symmetric, and entrywise non-negative.
    pub fn from_matrix(rows: Vec<Vec<R>>) -> Result<Self, OracleError> {
        let n = rows.len();
        if n == 0 {
            return Err(OracleError::EmptyGroundSet);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(OracleError::NotSquare {
                    row: i,
                    len: row.len(),
                    n,
                });
            }
        }
        let mut dense = Vec::with_capacity(n * n);
        for row in &rows {
            dense.extend_from_slice(row);
        }
        for u in 0..n {
            for v in 0..n {
                let s = dense[u * n + v];
                if s < R::zero() || !s.is_finite() {
                    return Err(OracleError::NegativeSimilarity { u, v });
                }
                if s != dense[v * n + u] {
                    return Err(OracleError::AsymmetricSimilarity { u, v });
                }
            }
        }
        let storage = Storage::Dense(dense);
        let col_sums = Self::column_sums(n, &storage);
        Ok(Self {
            n,
            storage,
            col_sums,
        })
    }

    /// Build from feature vectors; s_{u,v} is the inner product of vectors u
    /// and v. All vectors must share one dimension d ≥ 1 and have non-negative
    /// entries so the resulting matrix is non-negative.
    pub fn from_vectors(vectors: Vec<Vec<R>>) -> Result<Self, OracleError> {
        let n = vectors.len();
        if n == 0 {
            return Err(OracleError::EmptyGroundSet);
        }
        let d = vectors[0].len();
        if d == 0 {
            return Err(OracleError::ZeroDimension);
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != d {
                return Err(OracleError::RaggedVectors {
                    index: i,
                    got: v.len(),
                    expected: d,
                });
            }
            if v.iter().any(|x| *x < R::zero() || !x.is_finite()) {
                return Err(OracleError::NegativeVectorEntry { index: i });
            }
        }
        let storage = if n <= DENSE_LIMIT {
            let mut dense = Vec::with_capacity(n * n);
            for u in 0..n {
                for v in 0..n {
                    dense.push(dot(&vectors[u], &vectors[v]));
                }
            }
            Storage::Dense(dense)
        } else {
            Storage::Lazy(vectors)
        };
        let col_sums = Self::column_sums(n, &storage);
        Ok(Self {
            n,
            storage,
            col_sums,
        })
    }

    /// Lazy-storage construction regardless of size, for equivalence tests.
    #[cfg(test)]
    fn from_vectors_lazy(vectors: Vec<Vec<R>>) -> Self {
        let n = vectors.len();
        let storage = Storage::Lazy(vectors);
        let col_sums = Self::column_sums(n, &storage);
        Self {
            n,
            storage,
            col_sums,
        }
    }

    fn column_sums(n: usize, storage: &Storage<R>) -> Vec<R> {
        (0..n)
            .map(|v| {
                let mut acc = R::zero();
                for u in 0..n {
                    acc += Self::entry_in(storage, n, u, v);
                }
                acc
            })
            .collect()
    }

    fn entry_in(storage: &Storage<R>, n: usize, u: usize, v: usize) -> R {
        match storage {
            Storage::Dense(m) => m[u * n + v],
            Storage::Lazy(vecs) => dot(&vecs[u], &vecs[v]),
        }
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    /// s_{u,v}.
    pub fn similarity(&self, u: NodeId, v: NodeId) -> R {
        Self::entry_in(&self.storage, self.n, u as usize, v as usize)
    }

    pub(crate) fn value(&self, set: &[NodeId]) -> R {
        // Canonicalize so the value depends only on set membership, not on the
        // caller's ordering.
        let mut members: Vec<NodeId> = set.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut coverage = R::zero();
        for &v in &members {
            coverage += self.col_sums[v as usize];
        }
        let mut internal = R::zero();
        for &u in &members {
            for &v in &members {
                internal += Self::entry_in(&self.storage, self.n, u as usize, v as usize);
            }
        }
        (coverage - internal) / R::of_usize(self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> SimilarityDiversityValuation<f64> {
        SimilarityDiversityValuation::from_matrix(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap()
    }

    #[test]
    fn singleton_value_matches_formula() {
        // (1/2)((1 + 0.5) − 1) = 0.25
        assert_eq!(two_by_two().value(&[0]), 0.25);
    }

    #[test]
    fn full_set_value_is_zero_here() {
        assert_eq!(two_by_two().value(&[0, 1]), 0.0);
    }

    #[test]
    fn orthogonal_vectors_give_identity_matrix() {
        let sd = SimilarityDiversityValuation::from_vectors(vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        assert_eq!(sd.similarity(0, 0), 1.0);
        assert_eq!(sd.similarity(0, 1), 0.0);
        assert_eq!(sd.similarity(1, 0), 0.0);
        assert_eq!(sd.similarity(1, 1), 1.0);
    }

    #[test]
    fn single_vector_yields_zero_value() {
        let sd = SimilarityDiversityValuation::from_vectors(vec![vec![2.0]]).unwrap();
        assert_eq!(sd.similarity(0, 0), 4.0);
        assert_eq!(sd.value(&[0]), 0.0);
    }

    #[test]
    fn empty_vector_list_rejected() {
        let err = SimilarityDiversityValuation::<f64>::from_vectors(vec![]).unwrap_err();
        assert!(matches!(err, OracleError::EmptyGroundSet));
    }

    #[test]
    fn ragged_vectors_rejected() {
        let err = SimilarityDiversityValuation::from_vectors(vec![vec![1.0, 2.0], vec![1.0]])
            .unwrap_err();
        assert!(matches!(
            err,
            OracleError::RaggedVectors {
                index: 1,
                got: 1,
                expected: 2
            }
        ));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let err = SimilarityDiversityValuation::from_matrix(vec![vec![1.0, 0.2], vec![0.3, 1.0]])
            .unwrap_err();
        assert!(matches!(err, OracleError::AsymmetricSimilarity { .. }));
    }

    #[test]
    fn dense_and_lazy_storage_agree_bitwise() {
        let vectors: Vec<Vec<f64>> = (0..9)
            .map(|i| {
                (0..4)
                    .map(|j| ((i * 7 + j * 3) % 11) as f64 / 11.0)
                    .collect()
            })
            .collect();
        let dense = SimilarityDiversityValuation::from_vectors(vectors.clone()).unwrap();
        let lazy = SimilarityDiversityValuation::from_vectors_lazy(vectors);
        for mask in 0..1u32 << 9 {
            let set: Vec<NodeId> = (0..9).filter(|&v| mask >> v & 1 == 1).collect();
            assert_eq!(dense.value(&set), lazy.value(&set));
        }
    }

    #[test]
    fn value_is_order_insensitive() {
        let sd = SimilarityDiversityValuation::from_vectors(vec![
            vec![0.3, 0.9],
            vec![0.7, 0.1],
            vec![0.2, 0.8],
        ])
        .unwrap();
        assert_eq!(sd.value(&[2, 0, 1]), sd.value(&[0, 1, 2]));
        assert_eq!(sd.value(&[1, 0]), sd.value(&[0, 1]));
    }
}
