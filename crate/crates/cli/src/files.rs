//! Input loading and atomic output writing.
//!
//! Shape inputs are contour JSON (`{"points": [[x,y],...], "closed": true}`),
//! mask JSON (`{"rows": [[bool,...],...]}`) or PGM (P2/P5, threshold 128).
//! All outputs go through a same-directory temp file plus rename.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use shapeseq_api::MaskGrid;
use shapeseq_core::{BinaryMask, Contour};

/// A loaded shape input, as the wire distinguishes them.
pub enum ShapeInput {
    Contour(Contour),
    Mask(MaskGrid),
}

impl ShapeInput {
    pub fn into_parts(self) -> (Option<Contour>, Option<MaskGrid>) {
        match self {
            ShapeInput::Contour(c) => (Some(c), None),
            ShapeInput::Mask(m) => (None, Some(m)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    /// Decide from the extension (`.pgm`) and JSON keys.
    Auto,
    /// Contour JSON.
    Contour,
    /// PGM image (P2 or P5).
    Pgm,
    /// Boolean-grid mask JSON.
    Mask,
}

pub fn load_shape(path: &Path, format: InputFormat) -> Result<ShapeInput> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let format = match format {
        InputFormat::Auto => sniff_format(path, &bytes)?,
        other => other,
    };
    match format {
        InputFormat::Contour => {
            let contour: Contour = serde_json::from_slice(&bytes)
                .with_context(|| format!("{} is not a contour file", path.display()))?;
            Ok(ShapeInput::Contour(contour))
        }
        InputFormat::Pgm => {
            let mask = BinaryMask::from_pgm(&bytes)
                .with_context(|| format!("{} is not a valid PGM", path.display()))?;
            Ok(ShapeInput::Mask(MaskGrid { rows: mask.rows() }))
        }
        InputFormat::Mask => {
            let mask = BinaryMask::from_json(&bytes)
                .with_context(|| format!("{} is not a mask grid file", path.display()))?;
            Ok(ShapeInput::Mask(MaskGrid { rows: mask.rows() }))
        }
        InputFormat::Auto => unreachable!("resolved above"),
    }
}

/// Load an input that must be a contour (mask inputs are traced later by
/// the server; query/match paths need the contour form).
pub fn load_contour(path: &Path) -> Result<Contour> {
    match load_shape(path, InputFormat::Auto)? {
        ShapeInput::Contour(c) => Ok(c),
        ShapeInput::Mask(_) => bail!(
            "{} is a mask; run `shapeseq encode` on it or provide a contour file",
            path.display()
        ),
    }
}

fn sniff_format(path: &Path, bytes: &[u8]) -> Result<InputFormat> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        || bytes.starts_with(b"P2")
        || bytes.starts_with(b"P5")
    {
        return Ok(InputFormat::Pgm);
    }
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .with_context(|| format!("{} is neither PGM nor JSON", path.display()))?;
    if value.get("points").is_some() {
        Ok(InputFormat::Contour)
    } else if value.get("rows").is_some() {
        Ok(InputFormat::Mask)
    } else {
        bail!(
            "{}: JSON has neither \"points\" (contour) nor \"rows\" (mask)",
            path.display()
        );
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Write via a temp file in the destination directory plus rename, so an
/// interrupted run never leaves a truncated output.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .with_context(|| format!("creating a temp file in {}", dir.display()))?;
    std::io::Write::write_all(&mut tmp, contents)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
