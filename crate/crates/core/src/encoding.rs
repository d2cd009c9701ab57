//! Quantizing sections into five-token groups and assembling the shape's
//! symbol string.
//!
//! Each section becomes exactly five tokens in the fixed family order
//! (area, d1, d2, angle, degree). With the default six angle bins the
//! alphabet has 16 tokens: S/L, S1/M1/L1, S2/M2/L2, A1..A6, D1/D2.
//!
//! The canonical text form is whitespace-separated token names with an
//! optional `|` between quintuples (ignored on parse), e.g.
//! `S S1 S2 A1 D1 | L S1 M2 A1 D2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arp::{partition_contour, surrounding_circle, ArpConfig};
use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::sections::{make_sections, Section, SectionKind, SectionParams};

/// Feature family of a token; every quintuple carries one token of each
/// family in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    Area,
    Dist1,
    Dist2,
    Angle,
    Degree,
}

impl Family {
    pub const ORDER: [Family; 5] = [
        Family::Area,
        Family::Dist1,
        Family::Dist2,
        Family::Angle,
        Family::Degree,
    ];
}

/// One symbol of the alphabet: a family plus a 1-based rank within it.
/// Area and degree have 2 ranks, the distances 3, and the angle family as
/// many ranks as the configured angle bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token {
    family: Family,
    rank: u8,
}

impl Token {
    pub fn new(family: Family, rank: u8) -> Result<Token> {
        let max = match family {
            Family::Area | Family::Degree => 2,
            Family::Dist1 | Family::Dist2 => 3,
            Family::Angle => 99,
        };
        if rank < 1 || rank > max {
            return Err(Error::InvalidToken(format!("{family:?} rank {rank}")));
        }
        Ok(Token { family, rank })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn name(&self) -> String {
        match (self.family, self.rank) {
            (Family::Area, 1) => "S".into(),
            (Family::Area, _) => "L".into(),
            (Family::Dist1, r) => ["S1", "M1", "L1"][r as usize - 1].into(),
            (Family::Dist2, r) => ["S2", "M2", "L2"][r as usize - 1].into(),
            (Family::Angle, r) => format!("A{r}"),
            (Family::Degree, r) => format!("D{r}"),
        }
    }

    pub fn parse(name: &str) -> Result<Token> {
        let (family, rank) = match name {
            "S" => (Family::Area, 1),
            "L" => (Family::Area, 2),
            "S1" => (Family::Dist1, 1),
            "M1" => (Family::Dist1, 2),
            "L1" => (Family::Dist1, 3),
            "S2" => (Family::Dist2, 1),
            "M2" => (Family::Dist2, 2),
            "L2" => (Family::Dist2, 3),
            _ => {
                let (head, tail) = name.split_at(name.len().min(1));
                let rank: u8 = tail
                    .parse()
                    .map_err(|_| Error::InvalidToken(name.to_string()))?;
                match head {
                    "A" => (Family::Angle, rank),
                    "D" => (Family::Degree, rank),
                    _ => return Err(Error::InvalidToken(name.to_string())),
                }
            }
        };
        Token::new(family, rank)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl TryFrom<String> for Token {
    type Error = Error;
    fn try_from(s: String) -> Result<Token> {
        Token::parse(&s)
    }
}

impl From<Token> for String {
    fn from(t: Token) -> String {
        t.name()
    }
}

/// An encoded shape: a token sequence whose length is a multiple of five,
/// each quintuple in (area, d1, d2, angle, degree) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SymbolString {
    tokens: Vec<Token>,
}

impl SymbolString {
    pub fn new(tokens: Vec<Token>) -> Result<SymbolString> {
        if !tokens.len().is_multiple_of(5) {
            return Err(Error::BadQuintupleLength(tokens.len()));
        }
        for (i, t) in tokens.iter().enumerate() {
            if t.family() != Family::ORDER[i % 5] {
                return Err(Error::QuintupleOrder(i));
            }
        }
        Ok(SymbolString { tokens })
    }

    pub fn empty() -> SymbolString {
        SymbolString { tokens: Vec::new() }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn quintuples(&self) -> impl Iterator<Item = &[Token]> {
        self.tokens.chunks(5)
    }

    /// Parse the text form: whitespace-separated token names, `|` ignored.
    pub fn parse(text: &str) -> Result<SymbolString> {
        let tokens = text
            .split_whitespace()
            .filter(|t| *t != "|")
            .map(Token::parse)
            .collect::<Result<Vec<_>>>()?;
        SymbolString::new(tokens)
    }

    /// Canonical text form with `|` between quintuples.
    pub fn to_text(&self) -> String {
        self.quintuples()
            .map(|q| {
                q.iter()
                    .map(Token::name)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

impl TryFrom<String> for SymbolString {
    type Error = Error;
    fn try_from(s: String) -> Result<SymbolString> {
        SymbolString::parse(&s)
    }
}

impl From<SymbolString> for String {
    fn from(s: SymbolString) -> String {
        s.to_text()
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Quantizer thresholds. Distances are fractions of R; the area threshold
/// applies to the πR²-normalized section area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    pub area_threshold: f64,
    pub dist_edge_low: f64,
    pub dist_edge_high: f64,
    pub angle_bins: usize,
    pub degree_threshold: f64,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        QuantizerConfig {
            area_threshold: 0.01,
            dist_edge_low: 1.0 / 3.0,
            dist_edge_high: 2.0 / 3.0,
            angle_bins: 6,
            degree_threshold: 0.25,
        }
    }
}

impl QuantizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_threshold > 0.0 && self.area_threshold.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "area threshold {} must be positive",
                self.area_threshold
            )));
        }
        if !(0.0 < self.dist_edge_low
            && self.dist_edge_low < self.dist_edge_high
            && self.dist_edge_high < 1.0)
        {
            return Err(Error::InvalidConfig(format!(
                "distance edges ({}, {}) must be ascending inside (0, 1)",
                self.dist_edge_low, self.dist_edge_high
            )));
        }
        if !(2..=99).contains(&self.angle_bins) {
            return Err(Error::InvalidConfig(format!(
                "angle bins {} out of range 2..=99",
                self.angle_bins
            )));
        }
        if !(self.degree_threshold > 0.0 && self.degree_threshold.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "degree threshold {} must be positive",
                self.degree_threshold
            )));
        }
        Ok(())
    }
}

/// Quantize one section into its five tokens. All edges are half-open with
/// the top distance bin closed; Line sections force the small-area and
/// small-degree tokens.
pub fn quantize_section(s: &Section, q: &QuantizerConfig) -> Result<[Token; 5]> {
    q.validate()?;
    let is_line = s.kind == SectionKind::Line;
    let area_rank = if is_line || s.area < q.area_threshold {
        1
    } else {
        2
    };
    let dist_rank = |d: f64| {
        if d < q.dist_edge_low {
            1
        } else if d < q.dist_edge_high {
            2
        } else {
            3
        }
    };
    let k = q.angle_bins as f64;
    let angle_rank =
        ((s.alpha * k / std::f64::consts::PI) as usize + 1).min(q.angle_bins) as u8;
    let degree_rank = if is_line || s.degree < q.degree_threshold {
        1
    } else {
        2
    };
    Ok([
        Token::new(Family::Area, area_rank)?,
        Token::new(Family::Dist1, dist_rank(s.d1))?,
        Token::new(Family::Dist2, dist_rank(s.d2))?,
        Token::new(Family::Angle, angle_rank)?,
        Token::new(Family::Degree, degree_rank)?,
    ])
}

/// Everything the encoder needs besides the contour itself.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub arp: ArpConfig,
    pub sections: SectionParams,
    pub quant: QuantizerConfig,
}

/// Features of one encoded section, kept for debugging dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionFeatures {
    pub kind: SectionKind,
    pub area: f64,
    pub alpha: f64,
    pub degree: f64,
    pub d1: f64,
    pub d2: f64,
    /// The section's quintuple in text form.
    pub tokens: String,
}

/// Sections of one contour run inside one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub arc: crate::arp::PointRun,
    pub sections: Vec<SectionFeatures>,
}

/// All runs of one sector, in sweep order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorTrace {
    pub sector: crate::arp::SectorId,
    pub runs: Vec<RunTrace>,
}

/// The symbol string plus everything measured on the way to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeTrace {
    pub symbols: SymbolString,
    pub sectors: Vec<SectorTrace>,
}

/// Encode a contour: surrounding circle → sector partition → sections per
/// run → quintuple per section, concatenated by ascending sector ordinal,
/// run order within a sector, contour order within a run.
///
/// The traversal is normalized to clockwise (image frame) first so the
/// convex/concave convention is the same for every input.
pub fn encode_shape(contour: &Contour, cfg: &EncoderConfig) -> Result<SymbolString> {
    Ok(encode_shape_trace(contour, cfg)?.symbols)
}

/// [`encode_shape`] keeping per-sector, per-run and per-section detail.
pub fn encode_shape_trace(contour: &Contour, cfg: &EncoderConfig) -> Result<EncodeTrace> {
    cfg.arp.validate()?;
    cfg.sections.validate()?;
    cfg.quant.validate()?;
    let contour = contour.clockwise();
    let circle = surrounding_circle(&contour, &cfg.arp)?;
    let slices = partition_contour(&contour, &circle, &cfg.arp)?;

    let mut tokens = Vec::new();
    let mut sectors = Vec::with_capacity(slices.len());
    for slice in &slices {
        let mut runs = Vec::with_capacity(slice.arcs.len());
        for arc in &slice.arcs {
            let run = &contour.points()[arc.indices()];
            let is_full = arc.len == contour.len();
            let sections = make_sections(run, &circle, &cfg.sections, is_full)?;
            let mut features = Vec::with_capacity(sections.len());
            for section in &sections {
                let quintuple = quantize_section(section, &cfg.quant)?;
                features.push(SectionFeatures {
                    kind: section.kind,
                    area: section.area,
                    alpha: section.alpha,
                    degree: section.degree,
                    d1: section.d1,
                    d2: section.d2,
                    tokens: quintuple
                        .iter()
                        .map(Token::name)
                        .collect::<Vec<_>>()
                        .join(" "),
                });
                tokens.extend(quintuple);
            }
            runs.push(RunTrace {
                arc: *arc,
                sections: features,
            });
        }
        sectors.push(SectorTrace {
            sector: slice.sector,
            runs,
        });
    }
    Ok(EncodeTrace {
        symbols: SymbolString::new(tokens)?,
        sectors,
    })
}
