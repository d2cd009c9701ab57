//! Persistent shape index and similarity retrieval.
//!
//! Index file format (JSON, version 1):
//!
//! ```json
//! {
//!   "version": 1,
//!   "fingerprint": "<hex sha-256 of the encoding config>",
//!   "records": [
//!     {"id": "...", "label": "...", "tokens": "S S1 S2 A1 D1", "contour": {...}}
//!   ]
//! }
//! ```
//!
//! `label` and `contour` are optional; `contour` (the original input
//! contour, stored with `--store-contours`) enables pairwise-alignment
//! queries and angle-bin sweeps, which must re-encode.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{similarity, ScoreTable};
use crate::contour::Contour;
use crate::encoding::SymbolString;
use crate::error::{Error, Result};

pub const INDEX_FORMAT_VERSION: u32 = 1;

/// One indexed shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(rename = "tokens")]
    pub symbols: SymbolString,
    /// Fingerprint of the config the symbols were produced under. Not
    /// serialized per record; the index-level fingerprint governs the file.
    #[serde(skip)]
    pub fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<Contour>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    fingerprint: String,
    records: Vec<ShapeRecord>,
}

/// An in-memory shape index. Immutable during queries; all records share
/// one config fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    fingerprint: String,
    records: Vec<ShapeRecord>,
}

/// One ranked hit of a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryHit {
    pub id: String,
    pub label: Option<String>,
    pub similarity: f64,
}

/// Ranked query hits, descending similarity, ties by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub hits: Vec<QueryHit>,
}

/// Per-query bulls-eye outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BullseyeEntry {
    pub id: String,
    pub label: String,
    /// Same-class records among the top `depth` (the query included).
    pub hits: usize,
}

/// Bulls-eye evaluation over a fully labeled index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BullseyeReport {
    pub score: f64,
    pub depth: usize,
    pub class_size: usize,
    pub record_count: usize,
    pub per_query: Vec<BullseyeEntry>,
}

impl Index {
    pub fn new(fingerprint: String) -> Index {
        Index {
            fingerprint,
            records: Vec::new(),
        }
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn records(&self) -> &[ShapeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Append a record after checking its fingerprint, id uniqueness and
    /// that it has symbols to match against.
    pub fn add(&mut self, record: ShapeRecord) -> Result<()> {
        if record.fingerprint != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                record: record.fingerprint.clone(),
                index: self.fingerprint.clone(),
            });
        }
        if record.symbols.is_empty() {
            return Err(Error::EmptySymbols(record.id.clone()));
        }
        if self.records.iter().any(|r| r.id == record.id) {
            return Err(Error::DuplicateId(record.id.clone()));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = IndexFile {
            version: INDEX_FORMAT_VERSION,
            fingerprint: self.fingerprint.clone(),
            records: self.records.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Index> {
        let file: IndexFile = serde_json::from_str(text)?;
        if file.version != INDEX_FORMAT_VERSION {
            return Err(Error::UnsupportedIndexVersion(file.version));
        }
        let mut index = Index::new(file.fingerprint.clone());
        for mut record in file.records {
            record.fingerprint = file.fingerprint.clone();
            index.add(record)?;
        }
        Ok(index)
    }

    /// Rank every record against `query` and keep the best `k`.
    ///
    /// With `prefilter` on, records whose length-ratio upper bound
    /// (`min(m,n)/max(m,n)`, since no alignment can beat a full match of the
    /// shorter string) falls strictly below the current k-th best score are
    /// skipped; results are identical to the full scan.
    pub fn query_topk(
        &self,
        query: &SymbolString,
        k: usize,
        table: &ScoreTable,
        prefilter: bool,
    ) -> Result<QueryResult> {
        if self.records.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        let mut hits: Vec<QueryHit> = if prefilter {
            self.query_with_prefilter(query, k, table)
        } else {
            self.records
                .par_iter()
                .map(|r| QueryHit {
                    id: r.id.clone(),
                    label: r.label.clone(),
                    similarity: similarity(query.tokens(), r.symbols.tokens(), table),
                })
                .collect()
        };
        sort_hits(&mut hits);
        hits.truncate(k);
        Ok(QueryResult { hits })
    }

    fn query_with_prefilter(
        &self,
        query: &SymbolString,
        k: usize,
        table: &ScoreTable,
    ) -> Vec<QueryHit> {
        let m = query.len();
        let mut order: Vec<(f64, &ShapeRecord)> = self
            .records
            .iter()
            .map(|r| {
                let n = r.symbols.len();
                let bound = if m.max(n) == 0 {
                    1.0
                } else {
                    m.min(n) as f64 / m.max(n) as f64
                };
                (bound, r)
            })
            .collect();
        order.sort_by(|(ba, ra), (bb, rb)| bb.total_cmp(ba).then_with(|| ra.id.cmp(&rb.id)));

        let mut hits: Vec<QueryHit> = Vec::new();
        for (bound, record) in order {
            if hits.len() >= k {
                let kth = hits[k - 1].similarity;
                if bound < kth {
                    break;
                }
            }
            hits.push(QueryHit {
                id: record.id.clone(),
                label: record.label.clone(),
                similarity: similarity(query.tokens(), record.symbols.tokens(), table),
            });
            sort_hits(&mut hits);
        }
        hits
    }

    /// Bulls-eye score: each record queries the index (itself included);
    /// the score is the fraction of same-class records retrieved within the
    /// top `depth` (default twice the class size), averaged over queries.
    pub fn bullseye(&self, depth: Option<usize>, table: &ScoreTable) -> Result<BullseyeReport> {
        if self.records.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let labels: Vec<&str> = self
            .records
            .iter()
            .map(|r| {
                r.label
                    .as_deref()
                    .ok_or_else(|| Error::UnlabeledRecord(r.id.clone()))
            })
            .collect::<Result<_>>()?;

        let mut class_sizes: std::collections::BTreeMap<&str, usize> = Default::default();
        for label in &labels {
            *class_sizes.entry(label).or_insert(0) += 1;
        }
        let class_size = *class_sizes.values().next().expect("non-empty");
        if class_sizes.values().any(|&c| c != class_size) {
            let detail = class_sizes
                .iter()
                .map(|(l, c)| format!("{l}={c}"))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::UnequalClassSizes(detail));
        }
        let depth = depth.unwrap_or(2 * class_size);
        if depth == 0 {
            return Err(Error::InvalidConfig("bulls-eye depth must be >= 1".into()));
        }

        let n = self.records.len();
        // Pairwise similarities; symmetric, so fill the upper triangle.
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let sims: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| {
                similarity(
                    self.records[i].symbols.tokens(),
                    self.records[j].symbols.tokens(),
                    table,
                )
            })
            .collect();
        let mut matrix = vec![0.0f64; n * n];
        for (&(i, j), &s) in pairs.iter().zip(&sims) {
            matrix[i * n + j] = s;
            matrix[j * n + i] = s;
        }
        // Self-similarity is exactly 1; no need to align a string with itself.
        for q in 0..n {
            matrix[q * n + q] = 1.0;
        }

        let per_query: Vec<BullseyeEntry> = (0..n)
            .map(|q| {
                let mut ranked: Vec<usize> = (0..n).collect();
                ranked.sort_by(|&x, &y| {
                    matrix[q * n + y]
                        .total_cmp(&matrix[q * n + x])
                        .then_with(|| self.records[x].id.cmp(&self.records[y].id))
                });
                let hits = ranked
                    .iter()
                    .take(depth)
                    .filter(|&&r| labels[r] == labels[q])
                    .count();
                BullseyeEntry {
                    id: self.records[q].id.clone(),
                    label: labels[q].to_string(),
                    hits,
                }
            })
            .collect();

        let total_hits: usize = per_query.iter().map(|e| e.hits).sum();
        Ok(BullseyeReport {
            score: total_hits as f64 / (n * class_size) as f64,
            depth,
            class_size,
            record_count: n,
            per_query,
        })
    }
}

fn sort_hits(hits: &mut [QueryHit]) {
    hits.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.id.cmp(&b.id))
    });
}
