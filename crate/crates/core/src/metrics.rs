//! Image quality: MSE, PSNR and SSIM, whole-image or on a rectangle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::ImageBuffer;

/// PSNR reported when the two images are identical.
pub const PSNR_CAP_DB: f64 = 99.0;

pub fn mse(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    reference.require_same_dims(test)?;
    let n = reference.as_slice().len() as f64;
    let sum: f64 = reference
        .as_slice()
        .iter()
        .zip(test.as_slice())
        .map(|(a, b)| (b - a) * (b - a))
        .sum();
    Ok(sum / n)
}

/// `10·log10(peak² / MSE)`, or [`PSNR_CAP_DB`] when the MSE is zero.
pub fn psnr(reference: &ImageBuffer, test: &ImageBuffer, peakval: f64) -> Result<f64> {
    if !(peakval.is_finite() && peakval > 0.0) {
        return Err(Error::InvalidParameter(format!("peak value {peakval} must be positive")));
    }
    let e = mse(reference, test)?;
    Ok(psnr_from_mse(e, peakval))
}

pub fn psnr_from_mse(mse: f64, peakval: f64) -> f64 {
    if mse == 0.0 {
        PSNR_CAP_DB
    } else {
        10.0 * (peakval * peakval / mse).log10()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SsimWindow {
    /// Sliding Gaussian window over every fully contained position.
    Gaussian { size: usize, sigma: f64 },
    /// One window covering the whole region.
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub c1: f64,
    pub c2: f64,
    pub window: SsimWindow,
    pub dynamic_range: f64,
}

impl SsimParams {
    /// 11×11 Gaussian window with σ = 1.5, `C1 = (0.01 L)²`, `C2 = (0.03 L)²`.
    pub fn new(dynamic_range: f64) -> Self {
        Self {
            c1: (0.01 * dynamic_range).powi(2),
            c2: (0.03 * dynamic_range).powi(2),
            window: SsimWindow::Gaussian {
                size: 11,
                sigma: 1.5,
            },
            dynamic_range,
        }
    }

    pub fn global(dynamic_range: f64) -> Self {
        Self {
            window: SsimWindow::Global,
            ..Self::new(dynamic_range)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::InvalidParameter("SSIM constants must be positive".into()));
        }
        if let SsimWindow::Gaussian { size, sigma } = self.window {
            if size % 2 == 0 || size == 0 || !(sigma > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "SSIM window needs odd size and positive sigma (got {size}, {sigma})"
                )));
            }
        }
        Ok(())
    }
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let mut k = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            k.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

struct Moments {
    mx: f64,
    my: f64,
    vx: f64,
    vy: f64,
    cxy: f64,
}

impl Moments {
    fn ssim(&self, c1: f64, c2: f64) -> f64 {
        ((2.0 * self.mx * self.my + c1) * (2.0 * self.cxy + c2))
            / ((self.mx * self.mx + self.my * self.my + c1) * (self.vx + self.vy + c2))
    }
}

/// Mean SSIM over sliding windows, or a single global evaluation.
pub fn ssim(reference: &ImageBuffer, test: &ImageBuffer, params: &SsimParams) -> Result<f64> {
    reference.require_same_dims(test)?;
    params.validate()?;
    let (w, h) = reference.dims();
    let (a, b) = (reference.as_slice(), test.as_slice());
    match params.window {
        SsimWindow::Global => {
            let n = a.len() as f64;
            let mx = a.iter().sum::<f64>() / n;
            let my = b.iter().sum::<f64>() / n;
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for (&x, &y) in a.iter().zip(b) {
                vx += (x - mx) * (x - mx);
                vy += (y - my) * (y - my);
                cxy += (x - mx) * (y - my);
            }
            let m = Moments {
                mx,
                my,
                vx: vx / n,
                vy: vy / n,
                cxy: cxy / n,
            };
            Ok(m.ssim(params.c1, params.c2))
        }
        SsimWindow::Gaussian { size, sigma } => {
            if w < size || h < size {
                return Err(Error::Dimension(format!(
                    "{w}x{h} region is smaller than the {size}x{size} SSIM window"
                )));
            }
            let k = gaussian_kernel(size, sigma);
            let mut total = 0.0;
            let mut count = 0usize;
            for y0 in 0..=h - size {
                for x0 in 0..=w - size {
                    let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    for dy in 0..size {
                        let row = (y0 + dy) * w + x0;
                        let kr = &k[dy * size..(dy + 1) * size];
                        for (dx, &kw) in kr.iter().enumerate() {
                            let (x, y) = (a[row + dx], b[row + dx]);
                            mx += kw * x;
                            my += kw * y;
                            sxx += kw * x * x;
                            syy += kw * y * y;
                            sxy += kw * x * y;
                        }
                    }
                    let m = Moments {
                        mx,
                        my,
                        vx: sxx - mx * mx,
                        vy: syy - my * my,
                        cxy: sxy - mx * my,
                    };
                    total += m.ssim(params.c1, params.c2);
                    count += 1;
                }
            }
            Ok(total / count as f64)
        }
    }
}

/// Axis-aligned region: top-left corner `(x, y)` and size in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn full(img: &ImageBuffer) -> Self {
        Self::new(0, 0, img.width(), img.height())
    }
}

impl std::str::FromStr for Rect {
    type Err = Error;

    /// Parses `x,y,width,height`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("bad region '{s}': {e}")))?;
        match parts.as_slice() {
            &[x, y, w, h] => Ok(Rect::new(x, y, w, h)),
            _ => Err(Error::InvalidParameter(format!(
                "region '{s}' must be x,y,width,height"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityPair {
    pub psnr_db: f64,
    pub ssim: f64,
}

/// PSNR and SSIM of the `rect` crops of both images.
pub fn roi_metrics(
    reference: &ImageBuffer,
    test: &ImageBuffer,
    rect: Rect,
    peakval: f64,
    ssim_params: &SsimParams,
) -> Result<QualityPair> {
    reference.require_same_dims(test)?;
    let a = reference.crop(rect.x, rect.y, rect.width, rect.height)?;
    let b = test.crop(rect.x, rect.y, rect.width, rect.height)?;
    Ok(QualityPair {
        psnr_db: psnr(&a, &b, peakval)?,
        ssim: ssim(&a, &b, ssim_params)?,
    })
}

/// One emitted metrics record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub strategy: String,
    #[serde(rename = "SR")]
    pub sr: f64,
    pub seed: u64,
    pub psnr_db: f64,
    pub ssim: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roi: Option<RoiRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoiRecord {
    pub rect: Rect,
    pub psnr_db: f64,
    pub ssim: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, 255.0, |x, y| ((x * 13 + y * 29) % 256) as f64)
    }

    #[test]
    fn mse_offset() {
        let a = ramp(16, 16);
        let b = a.map(|v| v + 10.0);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert!((mse(&a, &b).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn psnr_anchor_and_sentinel() {
        assert!((psnr_from_mse(100.0, 255.0) - 28.1308).abs() < 1e-3);
        let a = ramp(8, 8);
        assert_eq!(psnr(&a, &a, 255.0).unwrap(), PSNR_CAP_DB);
        assert!(psnr(&a, &a, 0.0).is_err());
        let d = psnr_from_mse(7.0, 510.0) - psnr_from_mse(7.0, 255.0);
        assert!((d - 20.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn ssim_identity_and_symmetry() {
        let a = ramp(24, 20);
        let b = a.map(|v| (v * 0.9 + 7.0) % 255.0);
        let p = SsimParams::new(255.0);
        assert_eq!(ssim(&a, &a, &p).unwrap(), 1.0);
        assert_eq!(ssim(&a, &b, &p).unwrap(), ssim(&b, &a, &p).unwrap());
        let g = SsimParams::global(255.0);
        assert_eq!(ssim(&a, &a, &g).unwrap(), 1.0);
    }

    #[test]
    fn ssim_global_constants() {
        let a = ImageBuffer::filled(8, 8, 100.0, 255.0);
        let b = ImageBuffer::filled(8, 8, 120.0, 255.0);
        let v = ssim(&a, &b, &SsimParams::global(255.0)).unwrap();
        assert!((v - (24000.0 + 6.5025) / (24400.0 + 6.5025)).abs() < 1e-12);
        assert!((v - 0.98362).abs() < 1e-4);
    }

    #[test]
    fn ssim_window_too_large() {
        let a = ramp(8, 8);
        assert!(matches!(
            ssim(&a, &a, &SsimParams::new(255.0)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn dims_mismatch() {
        assert!(mse(&ramp(8, 8), &ramp(8, 4)).is_err());
    }

    #[test]
    fn roi_bounds() {
        let a = ramp(16, 16);
        let r = Rect::new(8, 8, 12, 12);
        assert!(roi_metrics(&a, &a, r, 255.0, &SsimParams::new(255.0)).is_err());
        let q = roi_metrics(&a, &a, Rect::new(2, 2, 12, 12), 255.0, &SsimParams::new(255.0)).unwrap();
        assert_eq!(q.ssim, 1.0);
        assert_eq!(q.psnr_db, PSNR_CAP_DB);
        assert_eq!("1,2,3,4".parse::<Rect>().unwrap(), Rect::new(1, 2, 3, 4));
        assert!("1,2,3".parse::<Rect>().is_err());
    }
}
