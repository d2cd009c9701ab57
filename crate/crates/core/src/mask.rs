//! Binary masks and boundary extraction.
//!
//! Accepted mask inputs:
//! - PGM, P2 (ASCII) or P5 (binary), maxval 1..=255. A sample is foreground
//!   iff its value is >= 128.
//! - JSON boolean grid: `{"rows": [[true, false, ...], ...]}`, row-major,
//!   all rows the same length; `true` is foreground.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::Contour;

/// Row-major boolean pixel grid.
#[derive(Debug, Clone)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

/// PGM luminance threshold: samples >= this value are foreground.
pub const PGM_THRESHOLD: u16 = 128;

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::Parse(format!(
                "mask dimensions {width}x{height} do not match {} bits",
                bits.len()
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel at column `x`, row `y`; out-of-bounds reads are background.
    pub fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        self.bits[y as usize * self.width + x as usize]
    }

    /// The grid as row vectors (the JSON mask form).
    pub fn rows(&self) -> Vec<Vec<bool>> {
        self.bits.chunks(self.width).map(<[bool]>::to_vec).collect()
    }

    /// Parse a P2 or P5 PGM image, thresholding at [`PGM_THRESHOLD`].
    pub fn from_pgm(data: &[u8]) -> Result<Self> {
        let mut header = PgmHeaderReader::new(data);
        let magic = header.token()?;
        if magic != "P2" && magic != "P5" {
            return Err(Error::Parse(format!("unsupported PGM magic {magic:?}")));
        }
        let width: usize = header.number()?;
        let height: usize = header.number()?;
        let maxval: u16 = header.number()?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Parse(format!(
                "unsupported PGM maxval {maxval}; expected 1..=255"
            )));
        }
        let npix = width
            .checked_mul(height)
            .ok_or_else(|| Error::Parse("PGM dimensions overflow".into()))?;
        let bits = if magic == "P5" {
            // Exactly one whitespace byte separates the header from raster data.
            let raster = header.rest_after_single_whitespace()?;
            if raster.len() < npix {
                return Err(Error::Parse(format!(
                    "P5 raster truncated: expected {npix} bytes, got {}",
                    raster.len()
                )));
            }
            raster[..npix]
                .iter()
                .map(|&b| u16::from(b) >= PGM_THRESHOLD)
                .collect()
        } else {
            let mut bits = Vec::with_capacity(npix);
            for _ in 0..npix {
                let v: u16 = header.number()?;
                bits.push(v >= PGM_THRESHOLD);
            }
            bits
        };
        BinaryMask::new(width, height, bits)
    }

    /// Parse the JSON boolean-grid form.
    pub fn from_json(data: &[u8]) -> Result<Self> {
        #[derive(Deserialize)]
        struct Grid {
            rows: Vec<Vec<bool>>,
        }
        let grid: Grid = serde_json::from_slice(data)?;
        let height = grid.rows.len();
        let width = grid.rows.first().map_or(0, Vec::len);
        if height == 0 || width == 0 {
            return Err(Error::Parse("mask grid is empty".into()));
        }
        let mut bits = Vec::with_capacity(width * height);
        for row in &grid.rows {
            if row.len() != width {
                return Err(Error::Parse("mask grid rows have unequal lengths".into()));
            }
            bits.extend_from_slice(row);
        }
        BinaryMask::new(width, height, bits)
    }
}

/// Incremental PGM header scanner handling `#` comments.
struct PgmHeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> PgmHeaderReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        PgmHeaderReader { data, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<String> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("unexpected end of PGM header".into()));
        }
        String::from_utf8(self.data[start..self.pos].to_vec())
            .map_err(|_| Error::Parse("PGM header is not ASCII".into()))
    }

    fn number<T: std::str::FromStr>(&mut self) -> Result<T> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::Parse(format!("invalid PGM header number {tok:?}")))
    }

    fn rest_after_single_whitespace(&mut self) -> Result<&'a [u8]> {
        if self.pos >= self.data.len() || !self.data[self.pos].is_ascii_whitespace() {
            return Err(Error::Parse("missing separator before P5 raster".into()));
        }
        Ok(&self.data[self.pos + 1..])
    }
}

/// Offsets of the Moore neighborhood in clockwise screen order starting
/// from the west neighbor (y down).
const MOORE: [(i64, i64); 8] = [
    (-1, 0),  // W
    (-1, -1), // NW
    (0, -1),  // N
    (1, -1),  // NE
    (1, 0),   // E
    (1, 1),   // SE
    (0, 1),   // S
    (-1, 1),  // SW
];

/// Trace the outer boundary of the largest 4-connected foreground region.
///
/// Moore-neighbor tracing with Jacob's stopping criterion; the walk starts
/// at the topmost-leftmost pixel of the region and proceeds clockwise on
/// screen. Boundary pixel centers become contour points `(x=col, y=row)`.
pub fn trace_boundary(mask: &BinaryMask) -> Result<Contour> {
    let region = largest_region(mask).ok_or(Error::EmptyMask)?;
    let inside = |x: i64, y: i64| -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < mask.width
            && (y as usize) < mask.height
            && region[y as usize * mask.width + x as usize]
    };

    // Topmost-leftmost pixel of the region; its west neighbor is background.
    let start_idx = region.iter().position(|&b| b).expect("non-empty region");
    let start = (
        (start_idx % mask.width) as i64,
        (start_idx / mask.width) as i64,
    );
    let initial_back = (start.0 - 1, start.1);

    let mut boundary: Vec<(i64, i64)> = Vec::new();
    let mut seen_states = std::collections::HashSet::new();
    let mut cur = start;
    let mut back = initial_back;
    loop {
        if !seen_states.insert((cur, back)) {
            break;
        }
        boundary.push(cur);
        let Some((next, next_back)) = next_boundary_pixel(cur, back, &inside) else {
            break; // isolated pixel
        };
        cur = next;
        back = next_back;
        if cur == start && back == initial_back {
            break; // Jacob's criterion: re-entered the start the same way
        }
    }

    let mut distinct: Vec<(i64, i64)> = boundary.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateRegion);
    }

    Contour::new(
        boundary
            .into_iter()
            .map(|(x, y)| Point2::new(x as f64, y as f64))
            .collect(),
    )
}

/// Sweep the Moore neighborhood of `cur` clockwise starting just after the
/// backtrack position; returns the first foreground neighbor and the last
/// background position checked before it.
fn next_boundary_pixel(
    cur: (i64, i64),
    back: (i64, i64),
    inside: &impl Fn(i64, i64) -> bool,
) -> Option<((i64, i64), (i64, i64))> {
    let offset = (back.0 - cur.0, back.1 - cur.1);
    let start = MOORE.iter().position(|&o| o == offset).unwrap_or(0);
    let mut prev = back;
    for step in 1..=8 {
        let (dx, dy) = MOORE[(start + step) % 8];
        let cand = (cur.0 + dx, cur.1 + dy);
        if inside(cand.0, cand.1) {
            return Some((cand, prev));
        }
        prev = cand;
    }
    None
}

/// Boolean map of the largest 4-connected foreground region, or None if the
/// mask has no foreground pixel. Ties are broken toward the region whose
/// first pixel comes earliest in raster order.
fn largest_region(mask: &BinaryMask) -> Option<Vec<bool>> {
    let n = mask.width * mask.height;
    let mut label = vec![0u32; n];
    let mut best: Option<(usize, u32)> = None; // (size, label)
    let mut next_label = 0u32;
    let mut queue = std::collections::VecDeque::new();
    for idx in 0..n {
        if !mask.bits[idx] || label[idx] != 0 {
            continue;
        }
        next_label += 1;
        let mut size = 0usize;
        label[idx] = next_label;
        queue.push_back(idx);
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % mask.width) as i64, (i / mask.width) as i64);
            for (dx, dy) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                let (nx, ny) = (x + dx, y + dy);
                if mask.get(nx, ny) {
                    let ni = ny as usize * mask.width + nx as usize;
                    if label[ni] == 0 {
                        label[ni] = next_label;
                        queue.push_back(ni);
                    }
                }
            }
        }
        if best.is_none_or(|(best_size, _)| size > best_size) {
            best = Some((size, next_label));
        }
    }
    let (_, keep) = best?;
    Some(label.iter().map(|&l| l == keep).collect())
}
