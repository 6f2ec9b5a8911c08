//! Synthetic test objects, 8-bit range (peak 255).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::ImageBuffer;

pub const PEAK: f64 = 255.0;

pub fn constant(width: usize, height: usize, value: f64) -> ImageBuffer {
    ImageBuffer::filled(width, height, value, PEAK)
}

/// Bright centered square covering `fraction` of each side on a dark background.
pub fn centered_square(
    width: usize,
    height: usize,
    fraction: f64,
    background: f64,
    foreground: f64,
) -> ImageBuffer {
    let (sw, sh) = (
        (width as f64 * fraction).round() as usize,
        (height as f64 * fraction).round() as usize,
    );
    let (x0, y0) = ((width - sw) / 2, (height - sh) / 2);
    ImageBuffer::from_fn(width, height, PEAK, |x, y| {
        if x >= x0 && x < x0 + sw && y >= y0 && y < y0 + sh {
            foreground
        } else {
            background
        }
    })
}

/// Alternating cells of side `cell` pixels.
pub fn checkerboard(width: usize, height: usize, cell: usize, low: f64, high: f64) -> ImageBuffer {
    let cell = cell.max(1);
    ImageBuffer::from_fn(width, height, PEAK, |x, y| {
        if (x / cell + y / cell) % 2 == 0 {
            high
        } else {
            low
        }
    })
}

/// Resolution target in the style of the USAF 1951 chart.
///
/// Each element is three bars of width `b` separated by `b`, five widths long.
/// Vertical-bar elements run along the upper half, horizontal-bar elements
/// along the lower half, with bar widths shrinking left to right.
pub fn stripes(width: usize, height: usize) -> ImageBuffer {
    const BASE: [f64; 5] = [6.0, 4.0, 3.0, 2.0, 1.0];
    const LOW: f64 = 30.0;
    const HIGH: f64 = 220.0;
    let scale = width.min(height) as f64 / 128.0;
    let margin = (4.0 * scale).round().max(1.0) as usize;
    let mut img = ImageBuffer::filled(width, height, LOW, PEAK);
    let mut fill = |x0: usize, y0: usize, w: usize, h: usize| {
        for y in y0..(y0 + h).min(height) {
            for x in x0..(x0 + w).min(width) {
                img.set(x, y, HIGH);
            }
        }
    };

    let widths: Vec<usize> = BASE
        .iter()
        .map(|b| (b * scale).round().max(1.0) as usize)
        .collect();

    let mut x = margin;
    for &b in &widths {
        for k in 0..3 {
            fill(x + 2 * k * b, margin, b, 5 * b);
        }
        x += 5 * b + margin;
    }

    let mut x = margin;
    let top = height / 2 + margin;
    for &b in &widths {
        for k in 0..3 {
            fill(x, top + 2 * k * b, 5 * b, b);
        }
        x += 5 * b + margin;
    }

    // A solid patch and a thin frame give the target some large-scale structure.
    let patch = (width / 4).max(1);
    fill(width - patch - margin, height - patch - margin, patch, patch);
    fill(0, 0, width, 1);
    fill(0, height - 1, width, 1);
    fill(0, 0, 1, height);
    fill(width - 1, 0, 1, height);
    img
}

/// Natural-looking random scene: shaded background, overlapping ellipses and
/// rectangles, plus mild texture. Deterministic in `seed`.
pub fn scene(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fw, fh) = (width as f64, height as f64);
    let g0: f64 = rng.random_range(40.0..140.0);
    let gx: f64 = rng.random_range(-60.0..60.0);
    let gy: f64 = rng.random_range(-60.0..60.0);
    let mut img = ImageBuffer::from_fn(width, height, PEAK, |x, y| {
        g0 + gx * (x as f64 / fw - 0.5) + gy * (y as f64 / fh - 0.5)
    });

    let shapes = rng.random_range(4..9);
    for _ in 0..shapes {
        let cx = rng.random_range(0.0..fw);
        let cy = rng.random_range(0.0..fh);
        let rx = rng.random_range(0.05..0.35) * fw;
        let ry = rng.random_range(0.05..0.35) * fh;
        let level: f64 = rng.random_range(0.0..255.0);
        let shade: f64 = rng.random_range(-30.0..30.0);
        let rect = rng.random_bool(0.35);
        for y in 0..height {
            for x in 0..width {
                let (dx, dy) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                let inside = if rect {
                    dx.abs() <= 1.0 && dy.abs() <= 1.0
                } else {
                    dx * dx + dy * dy <= 1.0
                };
                if inside {
                    img.set(x, y, level + shade * dy);
                }
            }
        }
    }

    let fx: f64 = rng.random_range(2.0..9.0);
    let fy: f64 = rng.random_range(2.0..9.0);
    let amp: f64 = rng.random_range(2.0..10.0);
    let tau = std::f64::consts::TAU;
    for y in 0..height {
        for x in 0..width {
            let t = (tau * fx * x as f64 / fw).sin() * (tau * fy * y as f64 / fh).cos();
            let v = img.get(x, y) + amp * t;
            img.set(x, y, v.clamp(0.0, PEAK));
        }
    }
    img
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomKind {
    Constant,
    Square,
    Stripes,
    Checkerboard,
    Scene,
}

impl PhantomKind {
    pub const ALL: [PhantomKind; 5] = [
        PhantomKind::Constant,
        PhantomKind::Square,
        PhantomKind::Stripes,
        PhantomKind::Checkerboard,
        PhantomKind::Scene,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhantomKind::Constant => "constant",
            PhantomKind::Square => "square",
            PhantomKind::Stripes => "stripes",
            PhantomKind::Checkerboard => "checkerboard",
            PhantomKind::Scene => "scene",
        }
    }

    pub fn render(self, width: usize, height: usize, seed: u64) -> ImageBuffer {
        match self {
            PhantomKind::Constant => constant(width, height, 128.0),
            PhantomKind::Square => centered_square(width, height, 0.5, 40.0, 220.0),
            PhantomKind::Stripes => stripes(width, height),
            PhantomKind::Checkerboard => checkerboard(width, height, (width / 8).max(1), 40.0, 220.0),
            PhantomKind::Scene => scene(width, height, seed),
        }
    }
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhantomKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown phantom '{s}'")))
    }
}

/// Deterministic stand-in training set of `count` scenes.
pub fn training_scenes(width: usize, height: usize, count: usize, seed: u64) -> Vec<ImageBuffer> {
    (0..count)
        .map(|i| scene(width, height, seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_has_two_levels() {
        let img = centered_square(64, 64, 0.5, 40.0, 220.0);
        assert_eq!(img.get(0, 0), 40.0);
        assert_eq!(img.get(32, 32), 220.0);
        let bright = img.as_slice().iter().filter(|&&v| v == 220.0).count();
        assert_eq!(bright, 32 * 32);
    }

    #[test]
    fn stripes_within_range_and_varied() {
        for n in [32, 64, 128, 256] {
            let img = stripes(n, n);
            let (lo, hi) = img.min_max();
            assert_eq!((lo, hi), (30.0, 220.0));
        }
    }

    #[test]
    fn scene_deterministic() {
        assert_eq!(scene(32, 32, 5), scene(32, 32, 5));
        assert_ne!(scene(32, 32, 5), scene(32, 32, 6));
        let (lo, hi) = scene(64, 64, 1).min_max();
        assert!(lo >= 0.0 && hi <= 255.0);
    }

    #[test]
    fn kind_parse() {
        assert_eq!("Stripes".parse::<PhantomKind>().unwrap(), PhantomKind::Stripes);
        assert!("usaf".parse::<PhantomKind>().is_err());
    }
}
