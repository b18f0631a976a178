//! Pictures of a realization pair: the product set turned by 45° so that
//! columns are vertical strips, or the two sets as bars.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::realization::Realization;
use crate::error::{Error, Result};
use crate::limits::Limits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    #[default]
    Pgm,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderView {
    /// Level-n squares of `F_1^n × F_2^n`, rotated so that `x - y` runs left to right.
    #[default]
    Product,
    /// `F_1^n` above `F_2^n` as intervals on the unit line.
    Bars,
}

impl std::str::FromStr for ImageFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(ImageFormat::Pgm),
            "svg" => Ok(ImageFormat::Svg),
            other => Err(Error::Parse(format!("unknown image format {other:?}"))),
        }
    }
}

impl std::str::FromStr for RenderView {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(RenderView::Product),
            "bars" => Ok(RenderView::Bars),
            other => Err(Error::Parse(format!("unknown view {other:?}"))),
        }
    }
}

const INK: u8 = 0;
const GRID: u8 = 210;
const BACKGROUND: u8 = 255;
const BAR_HEIGHT: usize = 24;
const BAR_GAP: usize = 8;
// smallest picture side before upscaling stops
const TARGET_SIDE: u64 = 512;

fn membership(r: &Realization, n: usize) -> Result<Vec<bool>> {
    let mut v = vec![false; r.width(n) as usize];
    for &a in r.level(n)? {
        v[a as usize] = true;
    }
    Ok(v)
}

fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Encodes the picture of level `n`; identical inputs give identical bytes.
pub fn render(
    r1: &Realization,
    r2: &Realization,
    n: usize,
    format: ImageFormat,
    view: RenderView,
    limits: &Limits,
) -> Result<Vec<u8>> {
    if r1.alphabet_size != r2.alphabet_size {
        return Err(Error::AlphabetMismatch {
            left: r1.alphabet_size,
            right: r2.alphabet_size,
        });
    }
    let w = r1.width(n);
    let side_cells = match view {
        RenderView::Product => 2 * w,
        RenderView::Bars => w,
    };
    if side_cells > limits.max_pixels {
        return Err(Error::ResourceLimitExceeded(format!(
            "level {n} needs {side_cells} pixels across, above the budget of {}",
            limits.max_pixels
        )));
    }
    let scale = (TARGET_SIDE / side_cells)
        .max(1)
        .min(limits.max_pixels / side_cells) as usize;
    let (f1, f2) = (membership(r1, n)?, membership(r2, n)?);
    let w = w as usize;
    Ok(match (view, format) {
        (RenderView::Product, ImageFormat::Pgm) => product_pgm(&f1, &f2, w, scale),
        (RenderView::Product, ImageFormat::Svg) => product_svg(&f1, &f2, w, scale).into_bytes(),
        (RenderView::Bars, ImageFormat::Pgm) => bars_pgm(&f1, &f2, w, scale),
        (RenderView::Bars, ImageFormat::Svg) => bars_svg(&f1, &f2, w, scale).into_bytes(),
    })
}

/// Canvas of `2w` column strips; strip `c` (from the left) is column
/// `c - w`. A square `(a, b)` occupies the diamond centred at
/// `x - y = (a - b) / w`, `x + y = (a + b + 1) / w`.
fn product_pgm(f1: &[bool], f2: &[bool], w: usize, scale: usize) -> Vec<u8> {
    let side = 2 * w * scale;
    let mut px = vec![BACKGROUND; side * side];
    let unit = (w * scale) as f64;
    for row in 0..side {
        for col in 0..side {
            // t = x - y ∈ [-1, 1] left to right, h = x + y ∈ [0, 2] bottom to top
            let t = (col as f64 + 0.5) / unit - 1.0;
            let h = 2.0 - (row as f64 + 0.5) / unit;
            let (x, y) = ((h + t) / 2.0, (h - t) / 2.0);
            let (a, b) = ((x * w as f64).floor(), (y * w as f64).floor());
            let inside = (0.0..w as f64).contains(&a) && (0.0..w as f64).contains(&b);
            px[row * side + col] = if inside && f1[a as usize] && f2[b as usize] {
                INK
            } else if col % scale == 0 && scale > 2 {
                GRID
            } else {
                BACKGROUND
            };
        }
    }
    pgm(side, side, &px)
}

fn product_svg(f1: &[bool], f2: &[bool], w: usize, scale: usize) -> String {
    let side = 2 * w * scale;
    let s = scale as f64;
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#).unwrap();
    writeln!(
        out,
        r#"<rect width="{side}" height="{side}" fill="white"/>"#
    )
    .unwrap();
    for c in 0..=2 * w {
        let x = c * scale;
        writeln!(
            out,
            r##"<line x1="{x}" y1="0" x2="{x}" y2="{side}" stroke="#d2d2d2" stroke-width="0.5"/>"##
        )
        .unwrap();
    }
    let wf = w as f64;
    for a in (0..w).filter(|&a| f1[a]) {
        for b in (0..w).filter(|&b| f2[b]) {
            // corners (a,b), (a+1,b), (a+1,b+1), (a,b+1) mapped to (t, h)
            let corners = [(a, b), (a + 1, b), (a + 1, b + 1), (a, b + 1)];
            let pts: Vec<String> = corners
                .iter()
                .map(|&(x, y)| {
                    let px = (x as f64 - y as f64 + wf) * s;
                    let py = (2.0 * wf - (x + y) as f64) * s;
                    format!("{px},{py}")
                })
                .collect();
            writeln!(out, r#"<polygon points="{}" fill="black"/>"#, pts.join(" ")).unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

fn bars_pgm(f1: &[bool], f2: &[bool], w: usize, scale: usize) -> Vec<u8> {
    let width = w * scale;
    let height = 2 * BAR_HEIGHT + 3 * BAR_GAP;
    let mut px = vec![BACKGROUND; width * height];
    for (i, set) in [f1, f2].into_iter().enumerate() {
        let top = BAR_GAP + i * (BAR_HEIGHT + BAR_GAP);
        for row in top..top + BAR_HEIGHT {
            for col in 0..width {
                if set[col / scale] {
                    px[row * width + col] = INK;
                }
            }
        }
    }
    pgm(width, height, &px)
}

fn bars_svg(f1: &[bool], f2: &[bool], w: usize, scale: usize) -> String {
    let width = w * scale;
    let height = 2 * BAR_HEIGHT + 3 * BAR_GAP;
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#).unwrap();
    writeln!(
        out,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    )
    .unwrap();
    for (i, set) in [f1, f2].into_iter().enumerate() {
        let top = BAR_GAP + i * (BAR_HEIGHT + BAR_GAP);
        for a in (0..w).filter(|&a| set[a]) {
            writeln!(
                out,
                r#"<rect x="{}" y="{top}" width="{scale}" height="{BAR_HEIGHT}" fill="black"/>"#,
                a * scale
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
