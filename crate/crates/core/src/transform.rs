//! Walsh–Hadamard transforms.
//!
//! The 1D transform multiplies by the Sylvester (natural-order) Hadamard
//! matrix, unnormalized. 2D spectra are re-indexed so that both axes run in
//! sequency order: coefficient `(u, v)` belongs to the pattern with `u` sign
//! changes down each column and `v` sign changes along each row, so low
//! sequencies sit at the upper-left corner.
//!
//! Forward transforms are unnormalized; [`iwht_2d`] applies `1/(p·q)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::SpectralCoord;
use crate::raster::ImageBuffer;

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

pub(crate) fn require_pow2(n: usize, what: &str) -> Result<()> {
    if is_power_of_two(n) {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{what} = {n} is not a power of two")))
    }
}

/// In-place unnormalized fast Walsh–Hadamard transform (natural order).
pub fn fwht_in_place(data: &mut [f64]) -> Result<()> {
    require_pow2(data.len(), "transform length")?;
    butterfly(data);
    Ok(())
}

/// Returns `H_N · v` for the natural-order Hadamard matrix `H_N`.
pub fn fwht_1d(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_in_place(&mut out)?;
    Ok(out)
}

fn butterfly(data: &mut [f64]) {
    let n = data.len();
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

/// Natural-order row of `H_N` whose Walsh function has `s` sign changes.
///
/// Computed as the bit reversal (over `log2 N` bits) of the Gray code of `s`.
#[inline]
pub fn sequency_to_natural(s: usize, n: usize) -> usize {
    let bits = n.trailing_zeros();
    if bits == 0 {
        return 0;
    }
    let gray = s ^ (s >> 1);
    gray.reverse_bits() >> (usize::BITS - bits)
}

/// Inverse of [`sequency_to_natural`].
#[inline]
pub fn natural_to_sequency(row: usize, n: usize) -> usize {
    let bits = n.trailing_zeros();
    if bits == 0 {
        return 0;
    }
    let mut g = row.reverse_bits() >> (usize::BITS - bits);
    // Gray decode
    let mut shift = 1;
    while shift < usize::BITS {
        g ^= g >> shift;
        shift <<= 1;
    }
    g
}

/// `perm[s]` is the natural-order row of `H_N` with sequency `s`.
pub fn sequency_permutation(n: usize) -> Result<Vec<usize>> {
    require_pow2(n, "N")?;
    Ok((0..n).map(|s| sequency_to_natural(s, n)).collect())
}

/// Walsh function of sequency `s` and length `n`, entries in {−1, +1}.
pub fn walsh_vector(s: usize, n: usize) -> Result<Vec<i8>> {
    require_pow2(n, "N")?;
    if s >= n {
        return Err(Error::OutOfRange(format!("sequency {s} >= {n}")));
    }
    let row = sequency_to_natural(s, n);
    Ok((0..n).map(|j| hadamard_entry(row, j)).collect())
}

/// Entry `(i, j)` of the Sylvester Hadamard matrix.
#[inline]
pub fn hadamard_entry(i: usize, j: usize) -> i8 {
    if (i & j).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Hadamard spectrum with sequency-ordered axes.
///
/// `width` (p) counts columns and indexes `v`; `height` (q) counts rows and
/// indexes `u`. Storage is row-major: `coeffs[u * width + v]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    width: usize,
    height: usize,
    coeffs: Vec<f64>,
}

impl Spectrum {
    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        require_pow2(width, "width")?;
        require_pow2(height, "height")?;
        Ok(Self {
            width,
            height,
            coeffs: vec![0.0; width * height],
        })
    }

    pub fn from_vec(width: usize, height: usize, coeffs: Vec<f64>) -> Result<Self> {
        require_pow2(width, "width")?;
        require_pow2(height, "height")?;
        if coeffs.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} coefficients cannot be {width}x{height}",
                coeffs.len()
            )));
        }
        Ok(Self {
            width,
            height,
            coeffs,
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

    #[inline]
    pub fn get(&self, c: SpectralCoord) -> f64 {
        self.coeffs[c.u * self.width + c.v]
    }

    #[inline]
    pub fn set(&mut self, c: SpectralCoord, value: f64) {
        self.coeffs[c.u * self.width + c.v] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn contains(&self, c: SpectralCoord) -> bool {
        c.u < self.height && c.v < self.width
    }
}

/// Separable natural-order transform of a row-major `width`×`height` buffer.
fn natural_2d(data: &mut [f64], width: usize, height: usize) {
    for row in data.chunks_exact_mut(width) {
        butterfly(row);
    }
    let mut col = vec![0.0; height];
    for x in 0..width {
        for (y, c) in col.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        butterfly(&mut col);
        for (y, c) in col.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }
}

/// Sequency-ordered forward transform of a row-major buffer.
pub(crate) fn forward_2d(data: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut nat = data.to_vec();
    natural_2d(&mut nat, width, height);
    let row_perm: Vec<usize> = (0..height).map(|s| sequency_to_natural(s, height)).collect();
    let col_perm: Vec<usize> = (0..width).map(|s| sequency_to_natural(s, width)).collect();
    let mut coeffs = Vec::with_capacity(width * height);
    for &r in &row_perm {
        let src = &nat[r * width..(r + 1) * width];
        coeffs.extend(col_perm.iter().map(|&c| src[c]));
    }
    coeffs
}

/// Inverse of [`forward_2d`], including the `1/(p·q)` factor.
pub(crate) fn inverse_2d(coeffs: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut nat = vec![0.0; width * height];
    for u in 0..height {
        let r = sequency_to_natural(u, height);
        let src = &coeffs[u * width..(u + 1) * width];
        let dst = &mut nat[r * width..(r + 1) * width];
        for (v, &x) in src.iter().enumerate() {
            dst[sequency_to_natural(v, width)] = x;
        }
    }
    natural_2d(&mut nat, width, height);
    let scale = 1.0 / (width * height) as f64;
    for v in &mut nat {
        *v *= scale;
    }
    nat
}

/// Forward 2D transform, `h(u,v) = Σ_{x,y} W_u(y)·W_v(x)·img(x,y)`.
pub fn wht_2d(img: &ImageBuffer) -> Result<Spectrum> {
    let (w, h) = img.dims();
    require_pow2(w, "width")?;
    require_pow2(h, "height")?;
    Ok(Spectrum {
        width: w,
        height: h,
        coeffs: forward_2d(img.as_slice(), w, h),
    })
}

/// Inverse of [`wht_2d`]; carries the `1/(p·q)` normalization.
pub fn iwht_2d(spec: &Spectrum) -> Result<ImageBuffer> {
    iwht_2d_with_peak(spec, 1.0)
}

pub(crate) fn iwht_2d_with_peak(spec: &Spectrum, peak: f64) -> Result<ImageBuffer> {
    let (w, h) = spec.dims();
    ImageBuffer::from_vec(w, h, inverse_2d(&spec.coeffs, w, h), peak)
}

/// A 2D ±1 pattern, row-major with `height` rows of `width` entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    width: usize,
    height: usize,
    data: Vec<i8>,
}

impl Pattern {
    /// Wraps raw entries. Entry values are checked by the consumers that need ±1.
    pub fn from_vec(width: usize, height: usize, data: Vec<i8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} entries cannot be {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.data[row * self.width + col]
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.data
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self.data.iter().position(|&e| e != 1 && e != -1) {
            None => Ok(()),
            Some(i) => Err(Error::InvalidPattern {
                row: i / self.width,
                col: i % self.width,
                value: self.data[i] as f64,
            }),
        }
    }
}

/// Square basis pattern `P(row, col) = W_u(row)·W_v(col)`.
pub fn synthesize_pattern(u: usize, v: usize, n: usize) -> Result<Pattern> {
    synthesize_pattern_rect(u, v, n, n)
}

/// Basis pattern for a `width`×`height` grid; `u < height`, `v < width`.
pub fn synthesize_pattern_rect(u: usize, v: usize, width: usize, height: usize) -> Result<Pattern> {
    require_pow2(width, "width")?;
    require_pow2(height, "height")?;
    if u >= height || v >= width {
        return Err(Error::OutOfRange(format!(
            "pattern ({u}, {v}) outside {width}x{height} spectrum"
        )));
    }
    let wu = walsh_vector(u, height)?;
    let wv = walsh_vector(v, width)?;
    let mut data = Vec::with_capacity(width * height);
    for &a in &wu {
        data.extend(wv.iter().map(|&b| a * b));
    }
    Ok(Pattern {
        width,
        height,
        data,
    })
}
