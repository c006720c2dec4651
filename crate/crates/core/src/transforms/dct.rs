//! Orthonormal type-II DCT applied independently to each 8x8 tile.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub const BLOCK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DctDirection {
    Forward,
    Inverse,
}

/// `basis()[u][x] = a(u) cos((2x + 1) u pi / 16)`.
fn basis() -> &'static [[f64; BLOCK]; BLOCK] {
    static BASIS: OnceLock<[[f64; BLOCK]; BLOCK]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; BLOCK]; BLOCK];
        for (u, row) in m.iter_mut().enumerate() {
            let scale = if u == 0 {
                (1.0 / BLOCK as f64).sqrt()
            } else {
                (2.0 / BLOCK as f64).sqrt()
            };
            for (x, v) in row.iter_mut().enumerate() {
                *v = scale
                    * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / (2 * BLOCK) as f64)
                        .cos();
            }
        }
        m
    })
}

/// Transforms one tile in place.
pub fn dct8_block(block: &mut [[f64; BLOCK]; BLOCK], direction: DctDirection) {
    let c = basis();
    let mut tmp = [[0.0; BLOCK]; BLOCK];
    // Rows then columns; the inverse uses the transposed basis.
    for r in 0..BLOCK {
        for k in 0..BLOCK {
            let mut acc = 0.0;
            for x in 0..BLOCK {
                acc += match direction {
                    DctDirection::Forward => c[k][x] * block[r][x],
                    DctDirection::Inverse => c[x][k] * block[r][x],
                };
            }
            tmp[r][k] = acc;
        }
    }
    for col in 0..BLOCK {
        for k in 0..BLOCK {
            let mut acc = 0.0;
            for y in 0..BLOCK {
                acc += match direction {
                    DctDirection::Forward => c[k][y] * tmp[y][col],
                    DctDirection::Inverse => c[y][k] * tmp[y][col],
                };
            }
            block[k][col] = acc;
        }
    }
}

pub fn ensure_tileable(image: &GrayImage) -> Result<()> {
    let (height, width) = image.dims();
    if height % BLOCK != 0 || width % BLOCK != 0 {
        return Err(Error::NotTileable { height, width });
    }
    Ok(())
}

/// Visits every tile: load, transform, hand to `f`, store back.
pub(crate) fn for_each_tile(
    image: &GrayImage,
    direction: DctDirection,
    mut after: impl FnMut(usize, usize, &mut [[f64; BLOCK]; BLOCK]),
    post_direction: Option<DctDirection>,
) -> Result<GrayImage> {
    ensure_tileable(image)?;
    let (height, width) = image.dims();
    let mut out = image.clone();
    let mut block = [[0.0; BLOCK]; BLOCK];
    for by in (0..height).step_by(BLOCK) {
        for bx in (0..width).step_by(BLOCK) {
            for (r, row) in block.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = image.get(by + r, bx + c) as f64;
                }
            }
            dct8_block(&mut block, direction);
            after(by / BLOCK, bx / BLOCK, &mut block);
            if let Some(post) = post_direction {
                dct8_block(&mut block, post);
            }
            for (r, row) in block.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    out.set(by + r, bx + c, v as f32);
                }
            }
        }
    }
    Ok(out)
}

/// Blockwise transform of the whole raster; output holds coefficients
/// (forward) or pixels (inverse) at the same positions.
pub fn block_dct8(image: &GrayImage, direction: DctDirection) -> Result<GrayImage> {
    for_each_tile(image, direction, |_, _, _| {}, None)
}
