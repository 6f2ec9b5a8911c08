//! Benchmark sweeps over images, strategies, sampling ratios and replicates.
//!
//! Every cell runs order → select → noisy acquisition → reconstruction →
//! metrics. Cells are independent and run on a thread pool; results are
//! collected in cell order, so output does not depend on scheduling.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{measure, NoiseSpec};
use crate::dataset::{ingest_dataset, load_gray, resize_bilinear};
use crate::digest::Hasher;
use crate::error::{Error, Result};
use crate::fileio;
use crate::metrics::{psnr, roi_metrics, ssim, Rect, RoiRecord, SsimParams};
use crate::ordering::{self, PatternOrder, Strategy};
use crate::phantom::{self, PhantomKind};
use crate::raster::ImageBuffer;
use crate::recon::{tv_reconstruct, zero_fill_with_report, ReconParams};
use crate::sampler::{select, select_prefix};

/// An order plus the way patterns are picked from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SweepStrategy {
    pub order: Strategy,
    /// Probability-function sampling instead of taking the order's prefix.
    pub pf: bool,
}

impl SweepStrategy {
    pub const fn prefix(order: Strategy) -> Self {
        Self { order, pf: false }
    }

    pub const fn pf(order: Strategy) -> Self {
        Self { order, pf: true }
    }

    /// The seven strategies of the standard comparison.
    pub fn standard() -> Vec<Self> {
        vec![
            Self::prefix(Strategy::Random),
            Self::prefix(Strategy::Natural),
            Self::prefix(Strategy::Walsh),
            Self::prefix(Strategy::Cc),
            Self::prefix(Strategy::Tv),
            Self::pf(Strategy::Po),
            Self::pf(Strategy::Xy),
        ]
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SweepStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pf {
            write!(f, "{}+pf", self.order)
        } else {
            write!(f, "{}", self.order)
        }
    }
}

impl FromStr for SweepStrategy {
    type Err = Error;

    /// `name`, `name+pf` or `name+prefix`. Bare `po` and `xy` mean PF sampling.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(base) = s.strip_suffix("+pf") {
            return Ok(Self::pf(base.parse()?));
        }
        if let Some(base) = s.strip_suffix("+prefix") {
            return Ok(Self::prefix(base.parse()?));
        }
        let order: Strategy = s.parse()?;
        Ok(Self {
            order,
            pf: matches!(order, Strategy::Po | Strategy::Xy),
        })
    }
}

impl Serialize for SweepStrategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SweepStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A test object: an image file or a bundled phantom.
///
/// In JSON either a string (`"phantom:stripes"` or a path) or
/// `{"phantom": "scene", "seed": 3}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ImageSource {
    Phantom { phantom: PhantomKind, seed: u64 },
    File(PathBuf),
}

impl<'de> Deserialize<'de> for ImageSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Phantom {
                phantom: PhantomKind,
                #[serde(default)]
                seed: u64,
            },
        }
        match Repr::deserialize(d)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Phantom { phantom, seed } => Ok(ImageSource::Phantom { phantom, seed }),
        }
    }
}

impl ImageSource {
    pub fn name(&self) -> String {
        match self {
            ImageSource::Phantom { phantom, .. } => phantom.name().to_string(),
            ImageSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
        }
    }

    pub fn load(&self, width: usize, height: usize) -> Result<ImageBuffer> {
        match self {
            ImageSource::Phantom { phantom, seed } => Ok(phantom.render(width, height, *seed)),
            ImageSource::File(p) => resize_bilinear(&load_gray(p)?, width, height),
        }
    }
}

impl FromStr for ImageSource {
    type Err = Error;

    /// `phantom:<kind>` or a file path.
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("phantom:") {
            Some(kind) => Ok(ImageSource::Phantom {
                phantom: kind.parse()?,
                seed: 0,
            }),
            None => Ok(ImageSource::File(PathBuf::from(s))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconMethod {
    ZeroFill,
    Tv,
}

impl ReconMethod {
    pub fn name(self) -> &'static str {
        match self {
            ReconMethod::ZeroFill => "zero-fill",
            ReconMethod::Tv => "tv",
        }
    }
}

impl FromStr for ReconMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tv" => Ok(ReconMethod::Tv),
            "zero-fill" | "zerofill" | "zf" => Ok(ReconMethod::ZeroFill),
            other => Err(Error::InvalidParameter(format!("unknown reconstruction '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub images: Vec<ImageSource>,
    pub width: usize,
    pub height: usize,
    pub strategies: Vec<SweepStrategy>,
    pub sampling_ratios: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    /// Relative Gaussian noise on the object (fraction of its peak).
    pub object_noise: f64,
    /// Relative Gaussian noise on bucket values (fraction of max |B|).
    pub measurement_noise: f64,
    pub recon: ReconParams,
    pub recon_methods: Vec<ReconMethod>,
    /// Directory of training images for the preliminary order; synthetic
    /// scenes are used when absent.
    pub po_dataset: Option<PathBuf>,
    pub po_training_count: usize,
    pub roi: Option<Rect>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            images: vec![ImageSource::Phantom {
                phantom: PhantomKind::Stripes,
                seed: 0,
            }],
            width: 64,
            height: 64,
            strategies: SweepStrategy::standard(),
            sampling_ratios: vec![0.05, 0.07, 0.10, 0.15, 0.20, 0.25, 0.30],
            replicates: 5,
            master_seed: 2023,
            object_noise: 0.01,
            measurement_noise: 0.0,
            recon: ReconParams::default(),
            recon_methods: vec![ReconMethod::ZeroFill, ReconMethod::Tv],
            po_dataset: None,
            po_training_count: 20,
            roi: None,
            output_dir: None,
            threads: None,
        }
    }
}

impl SweepSpec {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        crate::transform::require_pow2(self.width, "width")?;
        crate::transform::require_pow2(self.height, "height")?;
        if self.images.is_empty() || self.strategies.is_empty() || self.sampling_ratios.is_empty() {
            return Err(Error::InvalidParameter(
                "a sweep needs at least one image, strategy and sampling ratio".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be >= 1".into()));
        }
        if self.recon_methods.is_empty() {
            return Err(Error::InvalidParameter("no reconstruction method selected".into()));
        }
        for &sr in &self.sampling_ratios {
            if !(sr > 0.0 && sr <= 1.0) {
                return Err(Error::InvalidParameter(format!("sampling ratio {sr} outside (0, 1]")));
            }
        }
        for img in &self.images {
            if let ImageSource::File(p) = img {
                if !p.is_file() {
                    return Err(Error::InvalidParameter(format!(
                        "image {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        if let Some(dir) = &self.po_dataset {
            if !dir.is_dir() {
                return Err(Error::InvalidParameter(format!(
                    "PO dataset {} is not a directory",
                    dir.display()
                )));
            }
        }
        self.recon.validate()
    }

    fn ssim_params(&self) -> SsimParams {
        if self.width >= 11 && self.height >= 11 {
            SsimParams::new(phantom::PEAK)
        } else {
            SsimParams::global(phantom::PEAK)
        }
    }
}

/// One (image, strategy, SR, replicate) coordinate of the sweep grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub image: usize,
    pub strategy: SweepStrategy,
    pub sr: f64,
    pub replicate: usize,
}

/// Per-cell, per-reconstruction result row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub image: String,
    pub strategy: String,
    #[serde(rename = "SR")]
    pub sr: f64,
    pub replicate: usize,
    pub seed: u64,
    pub recon: String,
    pub psnr_db: f64,
    pub ssim: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roi: Option<RoiRecord>,
    pub iterations: usize,
    pub converged: bool,
    pub order_digest: String,
    pub samples_digest: String,
    pub object_digest: String,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub image: String,
    pub strategy: String,
    #[serde(rename = "SR")]
    pub sr: f64,
    pub replicate: usize,
    pub error: String,
}

/// Mean and standard deviation over replicates for one
/// (image, strategy, SR, recon) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub image: String,
    pub strategy: String,
    #[serde(rename = "SR")]
    pub sr: f64,
    pub recon: String,
    pub count: usize,
    pub psnr_mean: f64,
    pub psnr_std: f64,
    pub ssim_mean: f64,
    pub ssim_std: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<CellRow>,
    pub failures: Vec<CellFailure>,
    pub aggregates: Vec<AggregateRow>,
}

impl SweepResult {
    pub fn aggregate(&self, image: &str, strategy: &str, sr: f64, recon: &str) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.image == image && a.strategy == strategy && a.sr == sr && a.recon == recon)
    }

    /// Aggregate CSV: one line per row, then `mean` and `std` lines per group.
    /// Contains no timing information.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("image,strategy,SR,seed,recon,psnr_db,ssim\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{:.6},{:.6}\n",
                r.image, r.strategy, r.sr, r.seed, r.recon, r.psnr_db, r.ssim
            ));
        }
        for a in &self.aggregates {
            s.push_str(&format!(
                "{},{},{},mean,{},{:.6},{:.6}\n",
                a.image, a.strategy, a.sr, a.recon, a.psnr_mean, a.ssim_mean
            ));
            s.push_str(&format!(
                "{},{},{},std,{},{:.6},{:.6}\n",
                a.image, a.strategy, a.sr, a.recon, a.psnr_std, a.ssim_std
            ));
        }
        s
    }

    /// One JSON object per row, newline separated.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut s = String::new();
        for r in &self.rows {
            s.push_str(&serde_json::to_string(r)?);
            s.push('\n');
        }
        for f in &self.failures {
            s.push_str(&serde_json::to_string(f)?);
            s.push('\n');
        }
        Ok(s)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), self.to_csv())?;
        std::fs::write(dir.join("cells.jsonl"), self.to_jsonl()?)?;
        fileio::write_json(&self.aggregates, &dir.join("aggregate.json"))?;
        Ok(())
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Sampling seed for one cell.
pub fn cell_seed(master: u64, image: &str, strategy: &SweepStrategy, sr: f64, replicate: usize) -> u64 {
    let mut h = Hasher::new();
    h.str("cell")
        .u64(master)
        .str(image)
        .str(&strategy.to_string())
        .f64(sr)
        .u64(replicate as u64);
    h.finish_u64()
}

/// Object-noise seed; shared by every strategy and ratio of a replicate so
/// comparisons within a replicate see the same noisy object.
pub fn noise_seed(master: u64, image: &str, replicate: usize) -> u64 {
    let mut h = Hasher::new();
    h.str("noise").u64(master).str(image).u64(replicate as u64);
    h.finish_u64()
}

struct Prepared {
    names: Vec<String>,
    objects: Vec<ImageBuffer>,
    orders: Vec<(Strategy, PatternOrder)>,
}

impl Prepared {
    fn order(&self, s: Strategy) -> Option<&PatternOrder> {
        self.orders.iter().find(|(k, _)| *k == s).map(|(_, o)| o)
    }
}

fn prepare(spec: &SweepSpec) -> Result<Prepared> {
    let (w, h) = (spec.width, spec.height);
    let mut names = Vec::new();
    let mut objects = Vec::new();
    for src in &spec.images {
        let mut name = src.name();
        while names.contains(&name) {
            name.push('_');
        }
        names.push(name);
        objects.push(src.load(w, h)?);
    }
    let mut orders: Vec<(Strategy, PatternOrder)> = Vec::new();
    for st in &spec.strategies {
        if st.order == Strategy::Random || orders.iter().any(|(k, _)| *k == st.order) {
            continue;
        }
        let order = if st.order == Strategy::Po {
            match &spec.po_dataset {
                Some(dir) => {
                    let imgs: Vec<ImageBuffer> =
                        ingest_dataset(dir, w, h)?.into_iter().map(|d| d.image).collect();
                    ordering::po_order(&imgs, w, h)?
                }
                None => {
                    let imgs = phantom::training_scenes(w, h, spec.po_training_count.max(1), 7);
                    ordering::po_order(&imgs, w, h)?
                }
            }
        } else {
            ordering::generate(st.order, w, h, 0)?
        };
        orders.push((st.order, order));
    }
    Ok(Prepared {
        names,
        objects,
        orders,
    })
}

fn run_cell(spec: &SweepSpec, prep: &Prepared, cell: &Cell) -> Result<Vec<CellRow>> {
    let start = Instant::now();
    let name = &prep.names[cell.image];
    let object = &prep.objects[cell.image];
    let seed = cell_seed(spec.master_seed, name, &cell.strategy, cell.sr, cell.replicate);

    let random;
    let order = match cell.strategy.order {
        Strategy::Random => {
            random = ordering::random_order(spec.width, spec.height, seed)?;
            &random
        }
        s => prep
            .order(s)
            .ok_or_else(|| Error::InvalidParameter(format!("order {s} was not prepared")))?,
    };
    let samples = if cell.strategy.pf {
        select(order, cell.sr, seed)?
    } else {
        select_prefix(order, cell.sr)?
    };
    let noise = NoiseSpec {
        object_sigma_rel: spec.object_noise,
        measurement_sigma_rel: spec.measurement_noise,
        seed: noise_seed(spec.master_seed, name, cell.replicate),
    };
    let meas = measure(object, &samples, &noise)?;
    let dims = (spec.width, spec.height);
    let ssim_params = spec.ssim_params();
    let samples_digest = fileio::samples_digest(&samples);
    let object_digest = crate::digest::image_digest(object);

    let mut rows = Vec::with_capacity(spec.recon_methods.len());
    for &method in &spec.recon_methods {
        let out = match method {
            ReconMethod::ZeroFill => zero_fill_with_report(&meas, dims, spec.recon.value_range)?,
            ReconMethod::Tv => tv_reconstruct(&meas, dims, &spec.recon)?,
        };
        let roi = match spec.roi {
            Some(rect) => {
                let roi_ssim = if rect.width >= 11 && rect.height >= 11 {
                    ssim_params
                } else {
                    SsimParams::global(phantom::PEAK)
                };
                let q = roi_metrics(object, &out.image, rect, phantom::PEAK, &roi_ssim)?;
                Some(RoiRecord {
                    rect,
                    psnr_db: q.psnr_db,
                    ssim: q.ssim,
                })
            }
            None => None,
        };
        rows.push(CellRow {
            image: name.clone(),
            strategy: cell.strategy.label(),
            sr: cell.sr,
            replicate: cell.replicate,
            seed,
            recon: method.name().to_string(),
            psnr_db: psnr(object, &out.image, phantom::PEAK)?,
            ssim: ssim(object, &out.image, &ssim_params)?,
            roi,
            iterations: out.report.iterations,
            converged: out.report.converged,
            order_digest: order.digest(),
            samples_digest: samples_digest.clone(),
            object_digest: object_digest.clone(),
            elapsed_ms: 0.0,
        });
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    for r in &mut rows {
        r.elapsed_ms = ms;
    }
    Ok(rows)
}

/// All cells in output order: image, strategy, SR, replicate.
pub fn cells(spec: &SweepSpec) -> Vec<Cell> {
    let mut out = Vec::new();
    for image in 0..spec.images.len() {
        for &strategy in &spec.strategies {
            for &sr in &spec.sampling_ratios {
                for replicate in 0..spec.replicates {
                    out.push(Cell {
                        image,
                        strategy,
                        sr,
                        replicate,
                    });
                }
            }
        }
    }
    out
}

/// Runs the sweep. A failing cell is recorded and the sweep continues; setup
/// errors (unreadable images, bad spec) are returned directly.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let prep = prepare(spec)?;
    let grid = cells(spec);

    let work = || -> Vec<Result<Vec<CellRow>>> {
        grid.par_iter().map(|c| run_cell(spec, &prep, c)).collect()
    };
    let outcomes = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut result = SweepResult::default();
    for (cell, outcome) in grid.iter().zip(outcomes) {
        match outcome {
            Ok(rows) => result.rows.extend(rows),
            Err(e) => {
                log::error!(
                    "cell {} / {} / SR {} / replicate {} failed: {e}",
                    prep.names[cell.image],
                    cell.strategy,
                    cell.sr,
                    cell.replicate
                );
                result.failures.push(CellFailure {
                    image: prep.names[cell.image].clone(),
                    strategy: cell.strategy.label(),
                    sr: cell.sr,
                    replicate: cell.replicate,
                    error: e.to_string(),
                });
            }
        }
    }

    for name in &prep.names {
        for st in &spec.strategies {
            let label = st.label();
            for &sr in &spec.sampling_ratios {
                for method in &spec.recon_methods {
                    let group: Vec<&CellRow> = result
                        .rows
                        .iter()
                        .filter(|r| {
                            &r.image == name && r.strategy == label && r.sr == sr && r.recon == method.name()
                        })
                        .collect();
                    if group.is_empty() {
                        continue;
                    }
                    let p: Vec<f64> = group.iter().map(|r| r.psnr_db).collect();
                    let s: Vec<f64> = group.iter().map(|r| r.ssim).collect();
                    let (pm, ps) = mean_std(&p);
                    let (sm, ss) = mean_std(&s);
                    result.aggregates.push(AggregateRow {
                        image: name.clone(),
                        strategy: label.clone(),
                        sr,
                        recon: method.name().to_string(),
                        count: group.len(),
                        psnr_mean: pm,
                        psnr_std: ps,
                        ssim_mean: sm,
                        ssim_std: ss,
                    });
                }
            }
        }
    }

    if let Some(dir) = &spec.output_dir {
        result.write(dir)?;
    }
    Ok(result)
}
