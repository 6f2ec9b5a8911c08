//! Hadamard pattern orders.
//!
//! Every order is a permutation of the full `p`×`q` spectral grid. Orders
//! that rank patterns by a statistic break ties by `(u + v, u)` ascending,
//! which makes them total and reproducible.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digest::{self, Hasher};
use crate::error::{Error, Result};
use crate::raster::ImageBuffer;
use crate::transform::{
    hadamard_entry, natural_to_sequency, require_pow2, sequency_to_natural,
    synthesize_pattern_rect, wht_2d, Pattern,
};

/// Position in the sequency-ordered spectrum: `u` is the row, `v` the column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpectralCoord {
    pub u: usize,
    pub v: usize,
}

impl SpectralCoord {
    pub const DC: SpectralCoord = SpectralCoord { u: 0, v: 0 };

    pub const fn new(u: usize, v: usize) -> Self {
        Self { u, v }
    }

    #[inline]
    fn tie_key(self) -> (usize, usize) {
        (self.u + self.v, self.u)
    }
}

impl fmt::Display for SpectralCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Natural,
    Random,
    Walsh,
    Cc,
    Tv,
    Po,
    Xy,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Natural,
        Strategy::Random,
        Strategy::Walsh,
        Strategy::Cc,
        Strategy::Tv,
        Strategy::Po,
        Strategy::Xy,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Natural => "natural",
            Strategy::Random => "random",
            Strategy::Walsh => "walsh",
            Strategy::Cc => "cc",
            Strategy::Tv => "tv",
            Strategy::Po => "po",
            Strategy::Xy => "xy",
        }
    }

    pub(crate) fn code(self) -> u8 {
        Strategy::ALL.iter().position(|&s| s == self).unwrap() as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Strategy::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .iter()
            .copied()
            .find(|st| st.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy '{s}'")))
    }
}

/// A measurement priority over all basis patterns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternOrder {
    width: usize,
    height: usize,
    strategy: Strategy,
    seed: Option<u64>,
    dataset_digest: Option<String>,
    sequence: Vec<SpectralCoord>,
}

impl PatternOrder {
    /// Validates that `sequence` is a permutation of the `width`×`height` grid.
    pub fn new(
        width: usize,
        height: usize,
        strategy: Strategy,
        seed: Option<u64>,
        dataset_digest: Option<String>,
        sequence: Vec<SpectralCoord>,
    ) -> Result<Self> {
        require_pow2(width, "width")?;
        require_pow2(height, "height")?;
        if sequence.len() != width * height {
            return Err(Error::Dimension(format!(
                "order has {} entries, grid has {}",
                sequence.len(),
                width * height
            )));
        }
        let mut seen = vec![false; width * height];
        for c in &sequence {
            if c.u >= height || c.v >= width {
                return Err(Error::OutOfRange(format!(
                    "{c} outside {width}x{height} spectrum"
                )));
            }
            let slot = &mut seen[c.u * width + c.v];
            if *slot {
                return Err(Error::DuplicateCoordinate { u: c.u, v: c.v });
            }
            *slot = true;
        }
        Ok(Self {
            width,
            height,
            strategy,
            seed,
            dataset_digest,
            sequence,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dataset_digest(&self) -> Option<&str> {
        self.dataset_digest.as_deref()
    }

    pub fn sequence(&self) -> &[SpectralCoord] {
        &self.sequence
    }

    pub fn first(&self) -> SpectralCoord {
        self.sequence[0]
    }

    /// The first `m` coordinates.
    pub fn prefix(&self, m: usize) -> &[SpectralCoord] {
        &self.sequence[..m.min(self.sequence.len())]
    }

    pub fn digest(&self) -> String {
        digest::order_digest(self)
    }
}

/// How per-pattern statistics are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StatMethod {
    /// Rank-one closed forms in `(u, v)`.
    #[default]
    ClosedForm,
    /// Per pattern, scan its two Walsh factors and combine.
    Factored,
    /// Synthesize each full pattern and measure it directly.
    BruteForce,
}

fn grid(width: usize, height: usize) -> impl Iterator<Item = SpectralCoord> {
    (0..height).flat_map(move |u| (0..width).map(move |v| SpectralCoord::new(u, v)))
}

fn sorted_by_key<K: Ord + Copy>(
    width: usize,
    height: usize,
    mut key: impl FnMut(SpectralCoord) -> K,
) -> Vec<SpectralCoord> {
    let mut keyed: Vec<(K, (usize, usize), SpectralCoord)> = grid(width, height)
        .map(|c| (key(c), c.tie_key(), c))
        .collect();
    keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, _, c)| c).collect()
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    require_pow2(width, "width")?;
    require_pow2(height, "height")
}

/// Reshaped rows of `H_q ⊗ H_p` in Sylvester order.
///
/// Natural row `k` factors as `k = k_row·p + k_col`; each factor is converted
/// to its sequency index.
pub fn natural_order(width: usize, height: usize) -> Result<PatternOrder> {
    check_dims(width, height)?;
    let sequence = (0..width * height)
        .map(|k| {
            SpectralCoord::new(
                natural_to_sequency(k / width, height),
                natural_to_sequency(k % width, width),
            )
        })
        .collect();
    PatternOrder::new(width, height, Strategy::Natural, None, None, sequence)
}

/// Uniform random permutation determined by `seed`.
pub fn random_order(width: usize, height: usize, seed: u64) -> Result<PatternOrder> {
    check_dims(width, height)?;
    let mut sequence: Vec<_> = grid(width, height).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sequence.shuffle(&mut rng);
    PatternOrder::new(width, height, Strategy::Random, Some(seed), None, sequence)
}

/// Sign changes of the pattern `(u, v)` read row-major as one long vector.
pub fn walsh_key(c: SpectralCoord, height: usize) -> usize {
    // v changes inside each of the `height` rows; the row seams follow W_u
    // directly when the row ends on +1 (v even) and inverted otherwise.
    let seams = if c.v % 2 == 0 { c.u } else { height - 1 - c.u };
    height * c.v + seams
}

/// Sign changes of a pattern flattened row-major.
pub fn flattened_sign_changes(pattern: &Pattern) -> Result<usize> {
    pattern.validate()?;
    Ok(pattern.as_slice().windows(2).filter(|w| w[0] != w[1]).count())
}

/// Ascending one-dimensional sequency of the row-major flattened pattern.
pub fn walsh_order(width: usize, height: usize) -> Result<PatternOrder> {
    check_dims(width, height)?;
    let sequence = sorted_by_key(width, height, |c| walsh_key(c, height));
    PatternOrder::new(width, height, Strategy::Walsh, None, None, sequence)
}

/// Number of 4-connected constant-sign regions, both signs counted.
pub fn count_blocks(pattern: &Pattern) -> Result<usize> {
    pattern.validate()?;
    let (w, h) = (pattern.width(), pattern.height());
    let cells = pattern.as_slice();
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut regions = 0;
    for start in 0..w * h {
        if seen[start] {
            continue;
        }
        regions += 1;
        let sign = cells[start];
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if !seen[j] && cells[j] == sign {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
    }
    Ok(regions)
}

/// Anisotropic total variation without wrap-around.
pub fn pattern_tv(pattern: &Pattern) -> Result<f64> {
    pattern.validate()?;
    let (w, h) = (pattern.width(), pattern.height());
    let cells = pattern.as_slice();
    let mut tv = 0i64;
    for y in 0..h {
        for x in 0..w {
            let here = cells[y * w + x] as i64;
            if x + 1 < w {
                tv += (cells[y * w + x + 1] as i64 - here).abs();
            }
            if y + 1 < h {
                tv += (cells[(y + 1) * w + x] as i64 - here).abs();
            }
        }
    }
    Ok(tv as f64)
}

/// `(u + 1)(v + 1)`: a rank-one ±1 pattern is a grid of constant rectangles.
pub fn blocks_closed_form(c: SpectralCoord) -> usize {
    (c.u + 1) * (c.v + 1)
}

/// `2(p·u + q·v)`; equals `2N(u + v)` for square `N`×`N` patterns.
pub fn tv_closed_form(c: SpectralCoord, width: usize, height: usize) -> usize {
    2 * (width * c.u + height * c.v)
}

fn factor_sign_changes(seq: usize, n: usize) -> usize {
    let row = sequency_to_natural(seq, n);
    (1..n)
        .filter(|&j| hadamard_entry(row, j) != hadamard_entry(row, j - 1))
        .count()
}

fn blocks_of(c: SpectralCoord, width: usize, height: usize, method: StatMethod) -> usize {
    match method {
        StatMethod::ClosedForm => blocks_closed_form(c),
        StatMethod::Factored => {
            (factor_sign_changes(c.u, height) + 1) * (factor_sign_changes(c.v, width) + 1)
        }
        StatMethod::BruteForce => {
            let p = synthesize_pattern_rect(c.u, c.v, width, height).expect("coordinate in grid");
            count_blocks(&p).expect("synthesized pattern is ±1")
        }
    }
}

fn tv_of(c: SpectralCoord, width: usize, height: usize, method: StatMethod) -> usize {
    match method {
        StatMethod::ClosedForm => tv_closed_form(c, width, height),
        StatMethod::Factored => {
            2 * (width * factor_sign_changes(c.u, height) + height * factor_sign_changes(c.v, width))
        }
        StatMethod::BruteForce => {
            let p = synthesize_pattern_rect(c.u, c.v, width, height).expect("coordinate in grid");
            pattern_tv(&p).expect("synthesized pattern is ±1") as usize
        }
    }
}

/// Cake-cutting order: ascending connected-block count.
pub fn cc_order(width: usize, height: usize) -> Result<PatternOrder> {
    cc_order_with(width, height, StatMethod::ClosedForm)
}

pub fn cc_order_with(width: usize, height: usize, method: StatMethod) -> Result<PatternOrder> {
    check_dims(width, height)?;
    let sequence = sorted_by_key(width, height, |c| blocks_of(c, width, height, method));
    PatternOrder::new(width, height, Strategy::Cc, None, None, sequence)
}

/// Ascending pattern total variation.
pub fn tv_order(width: usize, height: usize) -> Result<PatternOrder> {
    tv_order_with(width, height, StatMethod::ClosedForm)
}

pub fn tv_order_with(width: usize, height: usize, method: StatMethod) -> Result<PatternOrder> {
    check_dims(width, height)?;
    let sequence = sorted_by_key(width, height, |c| tv_of(c, width, height, method));
    PatternOrder::new(width, height, Strategy::Tv, None, None, sequence)
}

/// XY weight `m = x·y + (x² + y²)/4` with `(x, y) = (u, v)`.
pub fn xy_weight(c: SpectralCoord) -> f64 {
    xy_weight_x4(c) as f64 / 4.0
}

/// `4m` as an exact integer.
#[inline]
pub fn xy_weight_x4(c: SpectralCoord) -> u64 {
    let (x, y) = (c.u as u64, c.v as u64);
    4 * x * y + x * x + y * y
}

/// Ascending XY weight measured from the upper-left (DC) corner.
pub fn xy_order(width: usize, height: usize) -> Result<PatternOrder> {
    check_dims(width, height)?;
    let sequence = sorted_by_key(width, height, xy_weight_x4);
    PatternOrder::new(width, height, Strategy::Xy, None, None, sequence)
}

/// Accumulates normalized spectral magnitudes over a dataset.
///
/// Each image contributes `|h(u,v)| / max |h|`; images with an all-zero
/// spectrum contribute nothing.
#[derive(Clone, Debug)]
pub struct PowerSpectrumAccumulator {
    width: usize,
    height: usize,
    sum: Vec<f64>,
    count: usize,
    hasher: Hasher,
}

impl PowerSpectrumAccumulator {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            sum: vec![0.0; width * height],
            count: 0,
            hasher: Hasher::new(),
        })
    }

    pub fn add(&mut self, img: &ImageBuffer) -> Result<()> {
        if img.dims() != (self.width, self.height) {
            return Err(Error::Dimension(format!(
                "dataset image is {}x{}, expected {}x{}",
                img.width(),
                img.height(),
                self.width,
                self.height
            )));
        }
        let spec = wht_2d(img)?;
        let max = spec.as_slice().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if max > 0.0 {
            for (acc, c) in self.sum.iter_mut().zip(spec.as_slice()) {
                *acc += c.abs() / max;
            }
        }
        self.hasher.image(img);
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Accumulated spectrum, row-major by `(u, v)`.
    pub fn power_spectrum(&self) -> &[f64] {
        &self.sum
    }

    /// Coordinates by descending accumulated value.
    pub fn finish(self) -> Result<PatternOrder> {
        if self.count == 0 {
            return Err(Error::Empty("preliminary order needs at least one image".into()));
        }
        let width = self.width;
        let sum = &self.sum;
        let mut coords: Vec<SpectralCoord> = grid(width, self.height).collect();
        coords.sort_unstable_by(|a, b| {
            let (sa, sb) = (sum[a.u * width + a.v], sum[b.u * width + b.v]);
            sb.total_cmp(&sa).then(a.tie_key().cmp(&b.tie_key()))
        });
        let digest = self.hasher.finish_hex();
        PatternOrder::new(width, self.height, Strategy::Po, None, Some(digest), coords)
    }
}

/// Preliminary order from a dataset of grayscale `width`×`height` images.
pub fn po_order(images: &[ImageBuffer], width: usize, height: usize) -> Result<PatternOrder> {
    if images.is_empty() {
        return Err(Error::Empty("preliminary order needs at least one image".into()));
    }
    let mut acc = PowerSpectrumAccumulator::new(width, height)?;
    for img in images {
        acc.add(img)?;
    }
    acc.finish()
}

/// Dataset-free generators by strategy. `Po` requires [`po_order`].
pub fn generate(strategy: Strategy, width: usize, height: usize, seed: u64) -> Result<PatternOrder> {
    match strategy {
        Strategy::Natural => natural_order(width, height),
        Strategy::Random => random_order(width, height, seed),
        Strategy::Walsh => walsh_order(width, height),
        Strategy::Cc => cc_order(width, height),
        Strategy::Tv => tv_order(width, height),
        Strategy::Xy => xy_order(width, height),
        Strategy::Po => Err(Error::InvalidParameter(
            "the po strategy needs a training dataset".into(),
        )),
    }
}
