//! Needleman-Wunsch token alignment with the shape-symbol substitution
//! scores, zero-initialized borders, and deterministic traceback.
//!
//! The border convention differs from textbook global alignment: row 0 and
//! column 0 are all zero, so a leading run of gaps in either sequence is
//! free while interior and trailing gaps cost the gap penalty. The
//! brute-force oracle in the tests uses the same convention.

use serde::{Deserialize, Serialize};

use crate::encoding::Token;
use crate::error::{Error, Result};

/// Substitution and gap scores.
///
/// Between tokens of the same family the score is the match score on the
/// diagonal and `1/|i - j|` for ranks `i != j` (adjacent ranks score 1,
/// then 1/2, 1/3, ...). Any cross-family substitution scores
/// `cross_family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub match_score: f64,
    pub gap: f64,
    pub cross_family: f64,
}

impl Default for ScoreTable {
    fn default() -> Self {
        ScoreTable {
            match_score: 2.0,
            gap: -2.0,
            cross_family: -2.0,
        }
    }
}

impl ScoreTable {
    pub fn validate(&self) -> Result<()> {
        if !(self.match_score > 0.0 && self.match_score.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "match score {} must be positive",
                self.match_score
            )));
        }
        if !(self.gap.is_finite() && self.cross_family.is_finite()) {
            return Err(Error::InvalidConfig(
                "gap and mismatch scores must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Substitution score between two tokens.
    pub fn score(&self, a: Token, b: Token) -> f64 {
        if a.family() != b.family() {
            return self.cross_family;
        }
        if a.rank() == b.rank() {
            return self.match_score;
        }
        1.0 / f64::from(a.rank().abs_diff(b.rank()))
    }
}

/// Filled DP grid for sequences `a` (columns) and `b` (rows):
/// `(b.len()+1) x (a.len()+1)`, row 0 and column 0 all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DpMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// The alignment score: the bottom-right cell.
    pub fn final_score(&self) -> f64 {
        self.get(self.rows - 1, self.cols - 1)
    }
}

/// Fill the DP matrix for aligning `a` against `b`.
pub fn nw_fill(a: &[Token], b: &[Token], table: &ScoreTable) -> DpMatrix {
    let cols = a.len() + 1;
    let rows = b.len() + 1;
    let mut f = DpMatrix {
        rows,
        cols,
        data: vec![0.0; rows * cols],
    };
    for i in 1..rows {
        for j in 1..cols {
            let diag = f.get(i - 1, j - 1) + table.score(b[i - 1], a[j - 1]);
            let up = f.get(i - 1, j) + table.gap;
            let left = f.get(i, j - 1) + table.gap;
            f.set(i, j, diag.max(up).max(left));
        }
    }
    f
}

/// One traceback step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AlignOp {
    /// `a[a_idx]` aligned with `b[b_idx]` (match or substitution).
    Match { a_idx: usize, b_idx: usize },
    /// `b[b_idx]` consumed against a gap in sequence `a`.
    GapInA { b_idx: usize },
    /// `a[a_idx]` consumed against a gap in sequence `b`.
    GapInB { a_idx: usize },
}

/// An op together with the score it contributed. Leading gaps reached
/// through the zero border contribute 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredOp {
    #[serde(flatten)]
    pub op: AlignOp,
    pub score: f64,
}

/// A complete alignment: ops in sequence order, total score, and the
/// normalized similarity `score / (match_score · max(m, n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub ops: Vec<ScoredOp>,
    pub score: f64,
    pub normalized: f64,
}

/// Reconstruct an optimal alignment from a filled matrix.
///
/// Walks from the bottom-right cell choosing a predecessor that reproduces
/// the cell value, preferring diagonal, then up (gap in `a`), then left
/// (gap in `b`). On reaching the zero border, the unconsumed prefix of the
/// other sequence is emitted as leading gaps with score 0.
pub fn traceback(f: &DpMatrix, a: &[Token], b: &[Token], table: &ScoreTable) -> Result<Alignment> {
    if f.rows() != b.len() + 1 || f.cols() != a.len() + 1 {
        return Err(Error::InconsistentMatrix(f.rows(), f.cols()));
    }
    let mut ops: Vec<ScoredOp> = Vec::new();
    let mut i = b.len();
    let mut j = a.len();
    while i > 0 && j > 0 {
        let cell = f.get(i, j);
        let sub = table.score(b[i - 1], a[j - 1]);
        if f.get(i - 1, j - 1) + sub == cell {
            ops.push(ScoredOp {
                op: AlignOp::Match {
                    a_idx: j - 1,
                    b_idx: i - 1,
                },
                score: sub,
            });
            i -= 1;
            j -= 1;
        } else if f.get(i - 1, j) + table.gap == cell {
            ops.push(ScoredOp {
                op: AlignOp::GapInA { b_idx: i - 1 },
                score: table.gap,
            });
            i -= 1;
        } else if f.get(i, j - 1) + table.gap == cell {
            ops.push(ScoredOp {
                op: AlignOp::GapInB { a_idx: j - 1 },
                score: table.gap,
            });
            j -= 1;
        } else {
            return Err(Error::InconsistentMatrix(i, j));
        }
    }
    // Free leading gaps for whatever prefix remains.
    while i > 0 {
        ops.push(ScoredOp {
            op: AlignOp::GapInA { b_idx: i - 1 },
            score: 0.0,
        });
        i -= 1;
    }
    while j > 0 {
        ops.push(ScoredOp {
            op: AlignOp::GapInB { a_idx: j - 1 },
            score: 0.0,
        });
        j -= 1;
    }
    ops.reverse();
    let score = f.final_score();
    Ok(Alignment {
        ops,
        score,
        normalized: normalized_similarity(score, a.len(), b.len(), table),
    })
}

fn normalized_similarity(score: f64, m: usize, n: usize, table: &ScoreTable) -> f64 {
    let longest = m.max(n);
    if longest == 0 {
        return 1.0;
    }
    score / (table.match_score * longest as f64)
}

/// Fill and trace in one call.
pub fn align(a: &[Token], b: &[Token], table: &ScoreTable) -> Result<Alignment> {
    let f = nw_fill(a, b, table);
    traceback(&f, a, b, table)
}

/// Normalized similarity between two token sequences: the alignment score
/// over `match_score · max(m, n)`. Two empty sequences score 1; exactly one
/// empty scores 0.
pub fn similarity(a: &[Token], b: &[Token], table: &ScoreTable) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let f = nw_fill(a, b, table);
    normalized_similarity(f.final_score(), a.len(), b.len(), table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::SymbolString;

    fn toks(text: &str) -> Vec<Token> {
        text.split_whitespace()
            .map(|t| Token::parse(t).unwrap())
            .collect()
    }

    fn t(name: &str) -> Token {
        Token::parse(name).unwrap()
    }

    /// Independent oracle: enumerate every alignment path explicitly and
    /// score it forward under the same zero-border convention.
    pub(crate) fn oracle_best_score(a: &[Token], b: &[Token], table: &ScoreTable) -> f64 {
        fn walk(i: usize, j: usize, a: &[Token], b: &[Token], table: &ScoreTable) -> f64 {
            if i == 0 || j == 0 {
                return 0.0; // free remaining prefix at the border
            }
            let mut best = walk(i - 1, j - 1, a, b, table) + table.score(b[i - 1], a[j - 1]);
            best = best.max(walk(i - 1, j, a, b, table) + table.gap);
            best.max(walk(i, j - 1, a, b, table) + table.gap)
        }
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        walk(b.len(), a.len(), a, b, table)
    }

    #[test]
    fn substitution_examples() {
        let s = ScoreTable::default();
        assert_eq!(s.score(t("A1"), t("A1")), 2.0);
        assert_eq!(s.score(t("A1"), t("A2")), 1.0);
        assert_eq!(s.score(t("A1"), t("A3")), 0.5);
        assert_eq!(s.score(t("A1"), t("A4")), 1.0 / 3.0);
        assert_eq!(s.score(t("A1"), t("S1")), -2.0);
        assert_eq!(s.score(t("S"), t("L")), 1.0);
        assert_eq!(s.score(t("S1"), t("M1")), 1.0);
        assert_eq!(s.score(t("S2"), t("M2")), 1.0);
        assert_eq!(s.score(t("D1"), t("D2")), 1.0);
        assert_eq!(s.score(t("S1"), t("S2")), -2.0);
    }

    #[test]
    fn worked_example_matrix() {
        // Aligning S S1 S2 A1 D1 (columns) with L S1 M2 A1 D2 (rows)
        // reproduces the published grid; final score 7.
        let a = toks("S S1 S2 A1 D1");
        let b = toks("L S1 M2 A1 D2");
        let f = nw_fill(&a, &b, &ScoreTable::default());
        let expected: [[f64; 6]; 6] = [
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, -1.0, -2.0, -2.0, -2.0],
            [0.0, -1.0, 3.0, 1.0, -1.0, -3.0],
            [0.0, -2.0, 1.0, 4.0, 2.0, 0.0],
            [0.0, -2.0, -1.0, 2.0, 6.0, 4.0],
            [0.0, -2.0, -3.0, 0.0, 4.0, 7.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(f.get(i, j), v, "cell ({i}, {j})");
            }
        }
        assert_eq!(f.final_score(), 7.0);
    }

    #[test]
    fn worked_example_traceback() {
        let a = toks("S S1 S2 A1 D1");
        let b = toks("L S1 M2 A1 D2");
        let al = align(&a, &b, &ScoreTable::default()).unwrap();
        assert_eq!(al.score, 7.0);
        assert_eq!(al.normalized, 0.7);
        assert_eq!(al.ops.len(), 5);
        let scores: Vec<f64> = al.ops.iter().map(|o| o.score).collect();
        assert_eq!(scores, vec![1.0, 2.0, 1.0, 2.0, 1.0]);
        for (k, op) in al.ops.iter().enumerate() {
            assert_eq!(
                op.op,
                AlignOp::Match { a_idx: k, b_idx: k },
                "op {k} should be diagonal"
            );
        }
    }

    #[test]
    fn self_alignment_scores_two_per_token() {
        let a = toks("S S1 S2 A1 D1 L M1 M2 A3 D2");
        let f = nw_fill(&a, &a, &ScoreTable::default());
        assert_eq!(f.final_score(), 2.0 * a.len() as f64);
        let al = align(&a, &a, &ScoreTable::default()).unwrap();
        assert_eq!(al.normalized, 1.0);
        assert!(al
            .ops
            .iter()
            .all(|o| matches!(o.op, AlignOp::Match { .. })));
    }

    #[test]
    fn trailing_gap_costs_but_leading_gap_is_free() {
        // a = S S1, b = S: best is match S/S then pay one trailing gap.
        let a = toks("S S1");
        let b = toks("S");
        let table = ScoreTable::default();
        let f = nw_fill(&a, &b, &table);
        assert_eq!(f.final_score(), 0.0);
        assert_eq!(f.final_score(), oracle_best_score(&a, &b, &table));
        let al = traceback(&f, &a, &b, &table).unwrap();
        let total: f64 = al.ops.iter().map(|o| o.score).sum();
        assert_eq!(total, 0.0);
        assert_eq!(al.ops.len(), 2);

        // Mirror case: leading gap is free because of the zero border.
        let a2 = toks("S1 S");
        let f2 = nw_fill(&a2, &b, &table);
        assert_eq!(f2.final_score(), 2.0);
        let al2 = traceback(&f2, &a2, &b, &table).unwrap();
        let total2: f64 = al2.ops.iter().map(|o| o.score).sum();
        assert_eq!(total2, 2.0);
        assert_eq!(al2.ops[0], ScoredOp { op: AlignOp::GapInB { a_idx: 0 }, score: 0.0 });
    }

    #[test]
    fn dp_matches_oracle_on_random_strings() {
        let table = ScoreTable::default();
        let alphabet = [
            "S", "L", "S1", "M1", "L1", "S2", "M2", "L2", "A1", "A2", "A3", "A4", "A5", "A6",
            "D1", "D2",
        ];
        let mut seed = 0x5eed_cafe_u64;
        let mut next = move |m: usize| {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) as usize % m
        };
        for _ in 0..300 {
            let la = next(7);
            let lb = next(7);
            let a: Vec<Token> = (0..la).map(|_| t(alphabet[next(16)])).collect();
            let b: Vec<Token> = (0..lb).map(|_| t(alphabet[next(16)])).collect();
            let f = nw_fill(&a, &b, &table);
            let oracle = oracle_best_score(&a, &b, &table);
            assert_eq!(f.final_score(), oracle, "a={a:?} b={b:?}");
            if !a.is_empty() && !b.is_empty() {
                let al = traceback(&f, &a, &b, &table).unwrap();
                let replay: f64 = al.ops.iter().map(|o| o.score).sum();
                assert_eq!(replay, f.final_score());
                verify_ops_consume(&al, a.len(), b.len());
            }
        }
    }

    fn verify_ops_consume(al: &Alignment, m: usize, n: usize) {
        let mut next_a = 0usize;
        let mut next_b = 0usize;
        for op in &al.ops {
            match op.op {
                AlignOp::Match { a_idx, b_idx } => {
                    assert_eq!(a_idx, next_a);
                    assert_eq!(b_idx, next_b);
                    next_a += 1;
                    next_b += 1;
                }
                AlignOp::GapInA { b_idx } => {
                    assert_eq!(b_idx, next_b);
                    next_b += 1;
                }
                AlignOp::GapInB { a_idx } => {
                    assert_eq!(a_idx, next_a);
                    next_a += 1;
                }
            }
        }
        assert_eq!(next_a, m);
        assert_eq!(next_b, n);
    }

    #[test]
    fn similarity_is_symmetric_and_self_maximal() {
        let table = ScoreTable::default();
        let a = toks("S S1 S2 A1 D1 L L1 L2 A4 D2");
        let b = toks("L S1 M2 A1 D2");
        assert_eq!(similarity(&a, &b, &table), similarity(&b, &a, &table));
        assert_eq!(similarity(&a, &a, &table), 1.0);
        assert!(similarity(&a, &b, &table) <= 1.0);
    }

    #[test]
    fn similarity_edge_cases() {
        let table = ScoreTable::default();
        let a = toks("S S1 S2 A1 D1");
        assert_eq!(similarity(&[], &[], &table), 1.0);
        assert_eq!(similarity(&a, &[], &table), 0.0);
        assert_eq!(similarity(&[], &a, &table), 0.0);
        // Paper pair normalizes to 7 / 10.
        let b = toks("L S1 M2 A1 D2");
        assert_eq!(similarity(&a, &b, &table), 0.7);
    }

    #[test]
    fn disjoint_families_score_at_most_zero() {
        let table = ScoreTable::default();
        // Every token of a is from the angle family, b only distances:
        // all substitutions -2, so nothing beats gaps/border stops.
        let a = toks("A1 A2 A3");
        let b = toks("S1 M1 L1");
        assert!(similarity(&a, &b, &table) <= 0.0);
    }

    #[test]
    fn inconsistent_matrix_is_reported() {
        let a = toks("S S1");
        let b = toks("S");
        let table = ScoreTable::default();
        let mut f = nw_fill(&a, &b, &table);
        f.set(1, 2, 99.0);
        assert!(matches!(
            traceback(&f, &a, &b, &table),
            Err(Error::InconsistentMatrix(1, 2))
        ));
    }

    #[test]
    fn symbol_string_alignment_works_through_the_wrapper() {
        let a = SymbolString::parse("S S1 S2 A1 D1").unwrap();
        let b = SymbolString::parse("L S1 M2 A1 D2").unwrap();
        let al = align(a.tokens(), b.tokens(), &ScoreTable::default()).unwrap();
        assert_eq!(al.score, 7.0);
    }
}
