//! Dataset ingestion: edge lists for coverage oracles, CSV / binary vectors
//! for similarity-diversity oracles.

use std::collections::HashMap;

use crate::oracle::coverage::CoverageValuation;
use crate::oracle::LoadError;
use crate::scalar::Real;
use crate::NodeId;

/// Parse a directed edge list: one `u v` pair per line, `#` lines are
/// comments, blank lines are skipped. An edge line contributes v to T(u);
/// with `symmetrize` it also contributes u to T(v). Node labels are
/// re-indexed densely 0..n−1 in first-appearance order (u before v within a
/// line); duplicate edges are deduplicated and self-loops are kept.
pub fn load_coverage_graph(text: &str, symmetrize: bool) -> Result<CoverageValuation, LoadError> {
    let mut index: HashMap<u64, NodeId> = HashMap::new();
    let mut adjacency: Vec<Vec<NodeId>> = Vec::new();
    fn intern(
        label: u64,
        index: &mut HashMap<u64, NodeId>,
        adjacency: &mut Vec<Vec<NodeId>>,
    ) -> NodeId {
        *index.entry(label).or_insert_with(|| {
            adjacency.push(Vec::new());
            (adjacency.len() - 1) as NodeId
        })
    }
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(LoadError::EdgeTokenCount {
                    line: lineno + 1,
                    found: line.split_whitespace().count(),
                })
            }
        };
        let parse = |tok: &str| -> Result<u64, LoadError> {
            tok.parse().map_err(|_| LoadError::BadNodeToken {
                line: lineno + 1,
                token: tok.to_string(),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        let u = intern(a, &mut index, &mut adjacency);
        let v = intern(b, &mut index, &mut adjacency);
        adjacency[u as usize].push(v);
        if symmetrize {
            adjacency[v as usize].push(u);
        }
    }
    CoverageValuation::new(adjacency).map_err(|e| LoadError::Oracle(Box::new(e)))
}

/// Parse vectors from CSV text: one vector per line, comma-separated reals.
/// Blank lines and `#` comments are skipped.
pub fn load_vectors_csv<R: Real>(text: &str) -> Result<Vec<Vec<R>>, LoadError> {
    let mut vectors: Vec<Vec<R>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut vector = Vec::new();
        for tok in line.split(',') {
            let x: f64 = tok.trim().parse().map_err(|_| LoadError::BadRealToken {
                line: lineno + 1,
                token: tok.trim().to_string(),
            })?;
            vector.push(R::of(x));
        }
        if let Some(first) = vectors.first() {
            if vector.len() != first.len() {
                return Err(LoadError::RaggedLine {
                    line: lineno + 1,
                    got: vector.len(),
                    expected: first.len(),
                });
            }
        }
        vectors.push(vector);
    }
    Ok(vectors)
}

/// Parse the binary vector format: an 8-byte little-endian header of two u32
/// counts (n, d) followed by n·d little-endian f32 values in row-major order.
pub fn load_vectors_bin<R: Real>(bytes: &[u8]) -> Result<Vec<Vec<R>>, LoadError> {
    if bytes.len() < 8 {
        return Err(LoadError::BinaryTruncated {
            expected: 8,
            got: bytes.len(),
        });
    }
    let n = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let expected = 8 + n * d * 4;
    if bytes.len() != expected {
        return Err(LoadError::BinaryTruncated {
            expected,
            got: bytes.len(),
        });
    }
    let mut vectors = Vec::with_capacity(n);
    let mut offset = 8;
    for _ in 0..n {
        let mut vector = Vec::with_capacity(d);
        for _ in 0..d {
            let x = f32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap());
            vector.push(R::of(x as f64));
            offset += 4;
        }
        vectors.push(vector);
    }
    Ok(vectors)
}

/// Serialize vectors into the binary format accepted by [`load_vectors_bin`].
pub fn write_vectors_bin<R: Real>(vectors: &[Vec<R>]) -> Vec<u8> {
    let n = vectors.len();
    let d = vectors.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(8 + n * d * 4);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    for v in vectors {
        for &x in v {
            out.extend_from_slice(&(x.to_f64().unwrap() as f32).to_le_bytes());
        }
    }
    out
}
