//! Exponential probability-function sampling along a pattern order.
//!
//! Order position `n` (1-based) is drawn with probability
//! `E(n) = a^((n−1)/(p·q))`. The base `a` is calibrated so that the expected
//! number of draws equals the requested budget, and the realized draw is then
//! trimmed or topped up to exactly `M = round(SR·p·q)` patterns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::{PatternOrder, SpectralCoord};

const MAX_BISECTION_STEPS: usize = 200;

/// Probability-function parameters recorded with a PF selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfDraw {
    pub a: f64,
    pub seed: u64,
    /// Number of positions the Bernoulli walk picked before exact-M adjustment.
    pub drawn: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    width: usize,
    height: usize,
    sr: f64,
    order_digest: String,
    pf: Option<PfDraw>,
    /// Selected order positions (0-based), ascending.
    positions: Vec<usize>,
    selected: Vec<SpectralCoord>,
}

impl SampleSet {
    /// Assembles a sample set from explicit coordinates, as read back from a file.
    pub fn from_parts(
        width: usize,
        height: usize,
        sr: f64,
        order_digest: String,
        pf: Option<PfDraw>,
        selected: Vec<SpectralCoord>,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(selected.len());
        for c in &selected {
            if c.u >= height || c.v >= width {
                return Err(Error::OutOfRange(format!("{c} outside {width}x{height}")));
            }
            if !seen.insert(*c) {
                return Err(Error::DuplicateCoordinate { u: c.u, v: c.v });
            }
        }
        Ok(Self {
            width,
            height,
            sr,
            order_digest,
            pf,
            positions: Vec::new(),
            selected,
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

    pub fn sampling_ratio(&self) -> f64 {
        self.sr
    }

    /// `M`, the number of selected patterns.
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn pf(&self) -> Option<&PfDraw> {
        self.pf.as_ref()
    }

    pub fn order_digest(&self) -> &str {
        &self.order_digest
    }

    pub fn selected(&self) -> &[SpectralCoord] {
        &self.selected
    }

    /// Order positions of the selection; empty when built with [`SampleSet::from_parts`].
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Selection rendered as a row-major 0/1 mask over the spectrum.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.width * self.height];
        for c in &self.selected {
            m[c.u * self.width + c.v] = true;
        }
        m
    }
}

/// Number of measurements for a sampling ratio, `round(SR·p·q)`.
pub fn budget(sr: f64, total: usize) -> Result<usize> {
    check_sr(sr)?;
    let m = (sr * total as f64).round() as usize;
    if m == 0 {
        return Err(Error::InvalidParameter(format!(
            "sampling ratio {sr} selects no pattern out of {total}"
        )));
    }
    Ok(m.min(total))
}

fn check_sr(sr: f64) -> Result<()> {
    if sr.is_finite() && sr > 0.0 && sr <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "sampling ratio {sr} outside (0, 1]"
        )))
    }
}

/// `Σ_{n=1}^{N} a^((n−1)/N)` written in terms of `ln a`.
pub fn expected_count(ln_a: f64, total: usize) -> f64 {
    if ln_a == 0.0 {
        return total as f64;
    }
    // Geometric series with ratio a^(1/N): (1 − a) / (1 − a^(1/N)).
    ln_a.exp_m1() / (ln_a / total as f64).exp_m1()
}

/// Base `a` of the probability function for a sampling ratio.
///
/// Solves `Σ E(n) = SR·p·q` by bisection on `ln a`. Returns exactly 1 at
/// `SR = 1`.
pub fn calibrate_a(sr: f64, width: usize, height: usize) -> Result<f64> {
    check_sr(sr)?;
    let total = width * height;
    if total < 2 {
        return Err(Error::Dimension(format!(
            "probability function needs at least 2 patterns, got {total}"
        )));
    }
    if sr == 1.0 {
        return Ok(1.0);
    }
    let target = sr * total as f64;
    let mut lo = f64::MIN_POSITIVE.ln();
    let mut hi = 0.0f64;
    if expected_count(lo, total) >= target {
        return Ok(lo.exp());
    }
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if expected_count(mid, total) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (slo, shi) = (expected_count(lo, total), expected_count(hi, total));
    let ln_a = if (slo - target).abs() <= (shi - target).abs() {
        lo
    } else {
        hi
    };
    Ok(ln_a.exp())
}

/// `E(n) = a^((n−1)/(p·q))` for 1-based order position `n`.
pub fn probability(n: usize, a: f64, total: usize) -> Result<f64> {
    if total == 0 || n == 0 || n > total {
        return Err(Error::OutOfRange(format!(
            "order position {n} outside 1..={total}"
        )));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("base a = {a} outside (0, 1]")));
    }
    Ok(prob_unchecked(n, a.ln(), total))
}

#[inline]
fn prob_unchecked(n: usize, ln_a: f64, total: usize) -> f64 {
    (ln_a * (n - 1) as f64 / total as f64).exp()
}

/// Probability-function selection of exactly `round(SR·p·q)` patterns.
///
/// Walks order positions `1..=p·q` once, consuming one uniform draw per
/// position from a ChaCha8 stream seeded with `seed`. An overfull draw drops
/// the latest positions; an underfull one adds the earliest missing ones.
pub fn select(order: &PatternOrder, sr: f64, seed: u64) -> Result<SampleSet> {
    let total = order.len();
    let m = budget(sr, total)?;
    let a = calibrate_a(sr, order.width(), order.height())?;
    let ln_a = a.ln();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = vec![false; total];
    let mut drawn = 0;
    for (i, slot) in picked.iter_mut().enumerate() {
        let e = prob_unchecked(i + 1, ln_a, total);
        if rng.random::<f64>() < e {
            *slot = true;
            drawn += 1;
        }
    }

    let mut count = drawn;
    if count > m {
        for slot in picked.iter_mut().rev() {
            if count == m {
                break;
            }
            if *slot {
                *slot = false;
                count -= 1;
            }
        }
    } else if count < m {
        for slot in picked.iter_mut() {
            if count == m {
                break;
            }
            if !*slot {
                *slot = true;
                count += 1;
            }
        }
    }

    let positions: Vec<usize> = (0..total).filter(|&i| picked[i]).collect();
    let selected = positions.iter().map(|&i| order.sequence()[i]).collect();
    Ok(SampleSet {
        width: order.width(),
        height: order.height(),
        sr,
        order_digest: order.digest(),
        pf: Some(PfDraw { a, seed, drawn }),
        positions,
        selected,
    })
}

/// Deterministic selection of the first `round(SR·p·q)` order positions.
pub fn select_prefix(order: &PatternOrder, sr: f64) -> Result<SampleSet> {
    let m = budget(sr, order.len())?;
    Ok(SampleSet {
        width: order.width(),
        height: order.height(),
        sr,
        order_digest: order.digest(),
        pf: None,
        positions: (0..m).collect(),
        selected: order.prefix(m).to_vec(),
    })
}
