//! Simulated differential single-pixel acquisition.
//!
//! A ±1 pattern is displayed as two complementary binary masks
//! `I⁺ = (I + 1)/2` and `I⁻ = (1 − I)/2`; the differential bucket value
//! `B = B⁺ − B⁻ = Σ I·O` is one Hadamard spectral coefficient of the object.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::SpectralCoord;
use crate::raster::ImageBuffer;
use crate::sampler::SampleSet;
use crate::transform::{synthesize_pattern_rect, wht_2d, Pattern};

/// Binary DMD mask with entries in {0, 1}, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryPattern {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryPattern {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    /// Total light collected from `object` through this mask.
    pub fn bucket(&self, object: &ImageBuffer) -> Result<f64> {
        if object.dims() != (self.width, self.height) {
            return Err(Error::Dimension(format!(
                "mask {}x{} vs object {}x{}",
                self.width,
                self.height,
                object.width(),
                object.height()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(object.as_slice())
            .filter(|(&m, _)| m == 1)
            .map(|(_, &o)| o)
            .sum())
    }
}

/// Splits a ±1 pattern into its complementary binary pair `(I⁺, I⁻)`.
pub fn split_pattern(pattern: &Pattern) -> Result<(BinaryPattern, BinaryPattern)> {
    pattern.validate()?;
    let plus = pattern.as_slice().iter().map(|&e| ((e + 1) / 2) as u8).collect();
    let minus = pattern.as_slice().iter().map(|&e| ((1 - e) / 2) as u8).collect();
    let mk = |data| BinaryPattern {
        width: pattern.width(),
        height: pattern.height(),
        data,
    };
    Ok((mk(plus), mk(minus)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub coord: SpectralCoord,
    /// Differential value `B`.
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<f64>,
}

impl MeasurementRecord {
    pub fn new(coord: SpectralCoord, value: f64) -> Self {
        Self {
            coord,
            value,
            plus: None,
            minus: None,
        }
    }
}

/// Additive Gaussian noise applied to the object, the bucket values, or both.
///
/// Object noise has standard deviation `object_sigma_rel × peak`; measurement
/// noise uses `measurement_sigma_rel × max |B|`. The two fields draw from
/// independent streams derived from `seed`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub object_sigma_rel: f64,
    pub measurement_sigma_rel: f64,
    pub seed: u64,
}

const MEASUREMENT_STREAM: u64 = 0x6d65_6173_7572_6521;

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            object_sigma_rel: 0.0,
            measurement_sigma_rel: 0.0,
            seed: 0,
        }
    }

    pub fn object(sigma_rel: f64, seed: u64) -> Self {
        Self {
            object_sigma_rel: sigma_rel,
            measurement_sigma_rel: 0.0,
            seed,
        }
    }

    pub fn measurement(sigma_rel: f64, seed: u64) -> Self {
        Self {
            object_sigma_rel: 0.0,
            measurement_sigma_rel: sigma_rel,
            seed,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.object_sigma_rel == 0.0 && self.measurement_sigma_rel == 0.0
    }

    fn measurement_seed(&self) -> u64 {
        self.seed ^ MEASUREMENT_STREAM
    }
}

fn check_sigma(sigma_rel: f64) -> Result<()> {
    if sigma_rel.is_finite() && sigma_rel >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "noise level {sigma_rel} must be finite and non-negative"
        )))
    }
}

/// Per-pixel Gaussian noise with `σ = sigma_rel × img.peak()`.
pub fn add_noise_image(img: &ImageBuffer, sigma_rel: f64, seed: u64) -> Result<ImageBuffer> {
    check_sigma(sigma_rel)?;
    if sigma_rel == 0.0 {
        return Ok(img.clone());
    }
    let sigma = sigma_rel * img.peak();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    for v in out.as_mut_slice() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += sigma * z;
    }
    Ok(out)
}

/// Per-record Gaussian noise with `σ = sigma_rel × max |B|`, drawn in list order.
pub fn add_noise_measurements(
    records: &[MeasurementRecord],
    sigma_rel: f64,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    check_sigma(sigma_rel)?;
    if sigma_rel == 0.0 {
        return Ok(records.to_vec());
    }
    let scale = records.iter().fold(0.0f64, |m, r| m.max(r.value.abs()));
    let sigma = sigma_rel * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(records
        .iter()
        .map(|r| {
            let z: f64 = StandardNormal.sample(&mut rng);
            // Components no longer satisfy B = B⁺ − B⁻ once B is perturbed.
            MeasurementRecord::new(r.coord, r.value + sigma * z)
        })
        .collect())
}

fn check_dims(object: &ImageBuffer, samples: &SampleSet) -> Result<()> {
    if object.dims() != samples.dims() {
        return Err(Error::Dimension(format!(
            "object {}x{} vs sample set {}x{}",
            object.width(),
            object.height(),
            samples.width(),
            samples.height()
        )));
    }
    Ok(())
}

/// Bucket values for every selected pattern, read from the object's spectrum.
pub fn measure(
    object: &ImageBuffer,
    samples: &SampleSet,
    noise: &NoiseSpec,
) -> Result<Vec<MeasurementRecord>> {
    check_dims(object, samples)?;
    let noisy = add_noise_image(object, noise.object_sigma_rel, noise.seed)?;
    let spec = wht_2d(&noisy)?;
    let ideal: Vec<_> = samples
        .selected()
        .iter()
        .map(|&c| MeasurementRecord::new(c, spec.get(c)))
        .collect();
    add_noise_measurements(&ideal, noise.measurement_sigma_rel, noise.measurement_seed())
}

/// Noiseless bucket values from explicit `I⁺`/`I⁻` displays, one pattern at a time.
pub fn measure_differential(
    object: &ImageBuffer,
    samples: &SampleSet,
) -> Result<Vec<MeasurementRecord>> {
    check_dims(object, samples)?;
    samples
        .selected()
        .iter()
        .map(|&c| {
            let p = synthesize_pattern_rect(c.u, c.v, object.width(), object.height())?;
            let (ip, im) = split_pattern(&p)?;
            let (bp, bm) = (ip.bucket(object)?, im.bucket(object)?);
            Ok(MeasurementRecord {
                coord: c,
                value: bp - bm,
                plus: Some(bp),
                minus: Some(bm),
            })
        })
        .collect()
}
