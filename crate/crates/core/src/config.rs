//! Runtime configuration: a flat `key=value` text format, CLI-overridable
//! key by key, with a stable fingerprint over everything that can affect
//! the symbols an index stores.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::ScoreTable;
use crate::arp::{ArpConfig, CircleCenter};
use crate::encoding::{EncoderConfig, QuantizerConfig};
use crate::error::{Error, Result};
use crate::sections::SectionParams;
use crate::shape_context::ScConfig;

/// How a query/record contour is pose-aligned before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignMode {
    /// Rotate each shape independently into its principal-axis frame.
    #[default]
    Canonical,
    /// Align the query to every database shape pairwise via shape context
    /// before encoding (requires stored contours; slower, closer to the
    /// two-shape matching narrative).
    Pairwise,
}

impl fmt::Display for AlignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlignMode::Canonical => "canonical",
            AlignMode::Pairwise => "pairwise",
        })
    }
}

impl std::str::FromStr for AlignMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(AlignMode::Canonical),
            "pairwise" => Ok(AlignMode::Pairwise),
            other => Err(Error::InvalidConfig(format!("unknown align mode {other:?}"))),
        }
    }
}

/// The full pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Points every contour is resampled to before encoding or alignment.
    pub resample_n: usize,
    pub align_mode: AlignMode,
    /// Dummy cost used when padding rectangular assignment matrices.
    pub dummy_cost: f64,
    pub sc: ScConfig,
    pub arp: ArpConfig,
    pub sections: SectionParams,
    pub quant: QuantizerConfig,
    pub score: ScoreTable,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            resample_n: 200,
            align_mode: AlignMode::Canonical,
            dummy_cost: 0.25,
            sc: ScConfig::default(),
            arp: ArpConfig::default(),
            sections: SectionParams::default(),
            quant: QuantizerConfig::default(),
            score: ScoreTable::default(),
        }
    }
}

/// All recognized keys, in sorted order.
pub const CONFIG_KEYS: [&str; 21] = [
    "align_mode",
    "arp_angular",
    "arp_center",
    "arp_radial",
    "arp_start_angle",
    "dummy_cost",
    "quant_angle_bins",
    "quant_area_threshold",
    "quant_degree_threshold",
    "quant_dist_edge_high",
    "quant_dist_edge_low",
    "resample_n",
    "sc_angular_bins",
    "sc_r_inner",
    "sc_r_outer",
    "sc_radial_bins",
    "score_cross_family",
    "score_gap",
    "score_match",
    "sections_line_eps",
    "sections_window",
];

/// Keys that feed the fingerprint: everything that can change the symbols
/// produced for a shape (alignment scores are query-time only).
const FINGERPRINT_KEYS: [&str; 18] = [
    "align_mode",
    "arp_angular",
    "arp_center",
    "arp_radial",
    "arp_start_angle",
    "dummy_cost",
    "quant_angle_bins",
    "quant_area_threshold",
    "quant_degree_threshold",
    "quant_dist_edge_high",
    "quant_dist_edge_low",
    "resample_n",
    "sc_angular_bins",
    "sc_r_inner",
    "sc_r_outer",
    "sc_radial_bins",
    "sections_line_eps",
    "sections_window",
];

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resample_n < 3 {
            return Err(Error::InvalidConfig(format!(
                "resample_n {} must be >= 3",
                self.resample_n
            )));
        }
        if !(self.dummy_cost.is_finite() && self.dummy_cost >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dummy cost {} must be non-negative",
                self.dummy_cost
            )));
        }
        self.sc.validate()?;
        self.arp.validate()?;
        self.sections.validate()?;
        self.quant.validate()?;
        self.score.validate()
    }

    pub fn encoder(&self) -> EncoderConfig {
        EncoderConfig {
            arp: self.arp.clone(),
            sections: self.sections.clone(),
            quant: self.quant.clone(),
        }
    }

    pub fn get_key(&self, key: &str) -> Result<String> {
        Ok(match key {
            "align_mode" => self.align_mode.to_string(),
            "arp_angular" => self.arp.angular_count.to_string(),
            "arp_center" => match self.arp.center {
                CircleCenter::Centroid => "centroid".into(),
                CircleCenter::MinEnclosing => "min_enclosing".into(),
            },
            "arp_radial" => self.arp.radial_count.to_string(),
            "arp_start_angle" => self.arp.start_angle.to_string(),
            "dummy_cost" => self.dummy_cost.to_string(),
            "quant_angle_bins" => self.quant.angle_bins.to_string(),
            "quant_area_threshold" => self.quant.area_threshold.to_string(),
            "quant_degree_threshold" => self.quant.degree_threshold.to_string(),
            "quant_dist_edge_high" => self.quant.dist_edge_high.to_string(),
            "quant_dist_edge_low" => self.quant.dist_edge_low.to_string(),
            "resample_n" => self.resample_n.to_string(),
            "sc_angular_bins" => self.sc.angular_bins.to_string(),
            "sc_r_inner" => self.sc.r_inner.to_string(),
            "sc_r_outer" => self.sc.r_outer.to_string(),
            "sc_radial_bins" => self.sc.radial_bins.to_string(),
            "score_cross_family" => self.score.cross_family.to_string(),
            "score_gap" => self.score.gap.to_string(),
            "score_match" => self.score.match_score.to_string(),
            "sections_line_eps" => self.sections.line_eps.to_string(),
            "sections_window" => self.sections.window.to_string(),
            other => return Err(Error::InvalidConfig(format!("unknown key {other:?}"))),
        })
    }

    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad value {value:?} for {key}")))
        }
        match key {
            "align_mode" => self.align_mode = value.parse()?,
            "arp_angular" => self.arp.angular_count = num(key, value)?,
            "arp_center" => {
                self.arp.center = match value {
                    "centroid" => CircleCenter::Centroid,
                    "min_enclosing" => CircleCenter::MinEnclosing,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "unknown circle center {other:?}"
                        )))
                    }
                }
            }
            "arp_radial" => self.arp.radial_count = num(key, value)?,
            "arp_start_angle" => self.arp.start_angle = num(key, value)?,
            "dummy_cost" => self.dummy_cost = num(key, value)?,
            "quant_angle_bins" => self.quant.angle_bins = num(key, value)?,
            "quant_area_threshold" => self.quant.area_threshold = num(key, value)?,
            "quant_degree_threshold" => self.quant.degree_threshold = num(key, value)?,
            "quant_dist_edge_high" => self.quant.dist_edge_high = num(key, value)?,
            "quant_dist_edge_low" => self.quant.dist_edge_low = num(key, value)?,
            "resample_n" => self.resample_n = num(key, value)?,
            "sc_angular_bins" => self.sc.angular_bins = num(key, value)?,
            "sc_r_inner" => self.sc.r_inner = num(key, value)?,
            "sc_r_outer" => self.sc.r_outer = num(key, value)?,
            "sc_radial_bins" => self.sc.radial_bins = num(key, value)?,
            "score_cross_family" => self.score.cross_family = num(key, value)?,
            "score_gap" => self.score.gap = num(key, value)?,
            "score_match" => self.score.match_score = num(key, value)?,
            "sections_line_eps" => self.sections.line_eps = num(key, value)?,
            "sections_window" => self.sections.window = num(key, value)?,
            other => return Err(Error::InvalidConfig(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Render as sorted `key=value` lines.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            out.push_str(key);
            out.push('=');
            out.push_str(&self.get_key(key).expect("known key"));
            out.push('\n');
        }
        out
    }

    /// Parse `key=value` lines on top of the defaults. Blank lines and
    /// `#` comments are allowed; unknown keys are rejected.
    pub fn from_kv_text(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            cfg.set_key(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hex SHA-256 over the sorted fingerprint-relevant `key=value` lines.
    /// Two configs with equal fingerprints produce identical symbols for
    /// identical inputs.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for key in FINGERPRINT_KEYS {
            hasher.update(key.as_bytes());
            hasher.update(b"=");
            hasher.update(self.get_key(key).expect("known key").as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_kv_text();
        let back = RunConfig::from_kv_text(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.fingerprint(), cfg.fingerprint());
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(matches!(
            RunConfig::from_kv_text("no_such_key=1\n"),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn comments_and_blanks_are_allowed() {
        let cfg = RunConfig::from_kv_text("# comment\n\nresample_n=64\n").unwrap();
        assert_eq!(cfg.resample_n, 64);
    }

    #[test]
    fn fingerprint_tracks_encoding_keys_only() {
        let base = RunConfig::default();
        let mut scoring = base.clone();
        scoring.set_key("score_gap", "-1").unwrap();
        assert_eq!(base.fingerprint(), scoring.fingerprint());

        let mut quant = base.clone();
        quant.set_key("quant_angle_bins", "5").unwrap();
        assert_ne!(base.fingerprint(), quant.fingerprint());

        let mut sampling = base.clone();
        sampling.set_key("resample_n", "150").unwrap();
        assert_ne!(base.fingerprint(), sampling.fingerprint());
    }

    #[test]
    fn every_key_is_settable_and_gettable() {
        let mut cfg = RunConfig::default();
        for key in CONFIG_KEYS {
            let value = cfg.get_key(key).unwrap();
            cfg.set_key(key, &value).unwrap();
        }
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set_key("resample_n", "abc").is_err());
        assert!(cfg.set_key("align_mode", "sideways").is_err());
        cfg.set_key("resample_n", "2").unwrap();
        assert!(cfg.validate().is_err());
    }
}
