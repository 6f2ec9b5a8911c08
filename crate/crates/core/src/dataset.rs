//! Image loading and dataset ingestion.

use std::path::{Path, PathBuf};

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::fileio;
use crate::raster::ImageBuffer;

/// Rec. 601 luma weights.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Loads an image as grayscale in `[0, 255]`.
///
/// Binary PGM goes through the crate's own reader; PNG and the other
/// portable formats are decoded by `image`. Color sources use Rec. 601 luma.
pub fn load_gray(path: &Path) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"P5") {
        return fileio::decode_pgm(path, &bytes);
    }
    let img = image::load_from_memory(&bytes)?;
    Ok(to_gray(&img))
}

fn to_gray(img: &DynamicImage) -> ImageBuffer {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = if img.color().has_color() {
        img.to_rgb32f()
            .pixels()
            .map(|p| 255.0 * (LUMA[0] * p[0] as f64 + LUMA[1] * p[1] as f64 + LUMA[2] * p[2] as f64))
            .collect()
    } else if img.color().bytes_per_pixel() / img.color().channel_count() as u8 > 1 {
        img.to_luma16()
            .pixels()
            .map(|p| p[0] as f64 * 255.0 / 65535.0)
            .collect()
    } else {
        img.to_luma8().pixels().map(|p| p[0] as f64).collect()
    };
    ImageBuffer::from_vec(w, h, data, 255.0).expect("decoded pixels are finite")
}

/// Bilinear resampling with pixel-center alignment. Same-size input is copied
/// unchanged.
pub fn resize_bilinear(img: &ImageBuffer, width: usize, height: usize) -> Result<ImageBuffer> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension("resize target must be non-empty".into()));
    }
    if img.dims() == (width, height) {
        return Ok(img.clone());
    }
    let (sw, sh) = img.dims();
    let sx = sw as f64 / width as f64;
    let sy = sh as f64 / height as f64;
    let sample = |pos: f64, n: usize| -> (usize, usize, f64) {
        let p = pos.clamp(0.0, (n - 1) as f64);
        let i0 = p.floor() as usize;
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, p - i0 as f64)
    };
    Ok(ImageBuffer::from_fn(width, height, img.peak(), |x, y| {
        let (x0, x1, fx) = sample((x as f64 + 0.5) * sx - 0.5, sw);
        let (y0, y1, fy) = sample((y as f64 + 0.5) * sy - 0.5, sh);
        let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
        let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }))
}

#[derive(Clone, Debug)]
pub struct DatasetImage {
    pub path: PathBuf,
    pub image: ImageBuffer,
}

const EXTENSIONS: [&str; 5] = ["pgm", "ppm", "pnm", "png", "pbm"];

/// Every decodable image in `dir` (sorted by file name), grayscale and
/// resized to `width`×`height`.
///
/// Undecodable files are skipped with a warning; the call fails only if no
/// file could be used.
pub fn ingest_dataset(dir: &Path, width: usize, height: usize) -> Result<Vec<DatasetImage>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Empty(format!("no image files in {}", dir.display())));
    }
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        match load_gray(&path).and_then(|img| resize_bilinear(&img, width, height)) {
            Ok(image) => out.push(DatasetImage { path, image }),
            Err(e) => log::warn!("skipping {}: {e}", path.display()),
        }
    }
    if out.is_empty() {
        return Err(Error::Empty(format!(
            "no decodable image in {}",
            dir.display()
        )));
    }
    Ok(out)
}
