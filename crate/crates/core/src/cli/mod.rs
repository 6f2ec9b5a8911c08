//! Command-line front end and the experiment drivers behind it.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 when a sweep finished
//! with failed cells.

pub mod bench;
pub mod sweep;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::acquisition::{measure, NoiseSpec};
use crate::dataset::{ingest_dataset, load_gray};
use crate::digest::image_digest;
use crate::error::{Error, Result};
use crate::fileio::{self, BitDepth, Encoding, MeasurementFile};
use crate::metrics::{psnr, roi_metrics, ssim, MetricsRecord, Rect, RoiRecord, SsimParams};
use crate::ordering::{self, PatternOrder, StatMethod, Strategy};
use crate::phantom::PhantomKind;
use crate::recon::{tv_reconstruct, zero_fill_with_report, ReconParams};
use crate::sampler::{select, select_prefix};

pub use bench::{bench_csv, bench_orders, BenchConfig, BenchRow};
pub use sweep::{run_sweep, ImageSource, ReconMethod, SweepResult, SweepSpec, SweepStrategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CELL_FAILURES: i32 = 2;

/// Image or spectrum size, `N` or `WxH`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad size '{s}': {e}"));
        let (w, h) = match s.split_once(['x', 'X']) {
            Some((w, h)) => (parse(w)?, parse(h)?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if !crate::transform::is_power_of_two(w) || !crate::transform::is_power_of_two(h) {
            return Err(format!("size {w}x{h} must be powers of two"));
        }
        Ok(Size {
            width: w,
            height: h,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Bin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SsimMode {
    Window,
    Global,
}

#[derive(Debug, Parser)]
#[command(name = "hsi", version, about = "Hadamard single-pixel imaging simulator")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a pattern order and write it as CSV and/or binary.
    GenOrder(GenOrderArgs),
    /// Grayscale and resize a directory of images into PGM files.
    Ingest(IngestArgs),
    /// Select patterns from an order file at a sampling ratio.
    Sample(SampleArgs),
    /// Simulate differential measurements of an object.
    Measure(MeasureArgs),
    /// Reconstruct an image from a measurement file.
    Reconstruct(ReconstructArgs),
    /// Compare a reconstruction against a reference image.
    Metrics(MetricsArgs),
    /// Run a benchmark sweep and write per-cell and aggregate results.
    Sweep(SweepArgs),
    /// Time CC, TV and XY order generation.
    BenchOrders(BenchArgs),
    /// Render a synthetic test object.
    Phantom(PhantomArgs),
}

#[derive(Debug, Args)]
pub struct GenOrderArgs {
    #[arg(long, default_value = "64")]
    pub size: Size,
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// Seed for the random order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training images for the po strategy.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Evaluate CC/TV statistics on synthesized patterns instead of closed forms.
    #[arg(long)]
    pub brute: bool,
    /// Output path; with no --format both `<out>.csv` and `<out>.bin` are written.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Natural,
    Random,
    Walsh,
    Cc,
    Tv,
    Po,
    Xy,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Natural => Strategy::Natural,
            StrategyArg::Random => Strategy::Random,
            StrategyArg::Walsh => Strategy::Walsh,
            StrategyArg::Cc => Strategy::Cc,
            StrategyArg::Tv => Strategy::Tv,
            StrategyArg::Po => Strategy::Po,
            StrategyArg::Xy => Strategy::Xy,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, default_value = "64")]
    pub size: Size,
    /// Output directory for the resized PGMs.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub order_file: PathBuf,
    #[arg(long)]
    pub sr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Take the first round(SR·p·q) positions instead of probability-function sampling.
    #[arg(long)]
    pub prefix: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Object image (PGM or PNG).
    #[arg(long)]
    pub image: PathBuf,
    /// Sample-set file.
    #[arg(long)]
    pub samples: PathBuf,
    /// Relative Gaussian noise on the object, e.g. 0.01 for 1% of peak.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Relative Gaussian noise on bucket values.
    #[arg(long, default_value_t = 0.0)]
    pub measurement_noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReconArg {
    Tv,
    ZeroFill,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub measurements: PathBuf,
    #[arg(long, value_enum, default_value = "tv")]
    pub method: ReconArg,
    /// Output image (`.png` for PNG, otherwise binary PGM); a `.json` sidecar is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// PGM sample depth.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u8).range(8..=16))]
    pub depth: u8,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Peak value for PSNR; defaults to the reference's declared range.
    #[arg(long)]
    pub peak: Option<f64>,
    #[arg(long, value_enum, default_value = "window")]
    pub ssim: SsimMode,
    /// Region `x,y,width,height` evaluated in addition to the whole image.
    #[arg(long)]
    pub roi: Option<String>,
    /// Labels copied into the emitted record.
    #[arg(long, default_value = "")]
    pub strategy: String,
    #[arg(long, default_value_t = 0.0)]
    pub sr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep specification; command-line flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Test images: file paths or `phantom:<kind>`. Repeatable or comma separated.
    #[arg(long = "image", value_delimiter = ',')]
    pub images: Vec<String>,
    #[arg(long)]
    pub size: Option<Size>,
    /// Strategies, e.g. `xy+pf,po+pf,cc,tv,random`. Repeatable or comma separated.
    #[arg(long = "strategy", value_delimiter = ',')]
    pub strategies: Vec<String>,
    /// Sampling ratios as fractions. Repeatable or comma separated.
    #[arg(long = "sr", value_delimiter = ',')]
    pub sampling_ratios: Vec<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Master seed from which per-cell seeds are derived.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative object noise.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub recon: Vec<String>,
    /// Training images for the po strategy.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub roi: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    /// Skip the flood-fill CC timing above this size.
    #[arg(long)]
    pub cc_max: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value = "64")]
    pub size: Size,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn gen_order(a: &GenOrderArgs) -> Result<i32> {
    let (w, h) = (a.size.width, a.size.height);
    let strategy: Strategy = a.strategy.into();
    let method = if a.brute {
        StatMethod::BruteForce
    } else {
        StatMethod::ClosedForm
    };
    let order: PatternOrder = match strategy {
        Strategy::Po => {
            let dir = a.dataset.as_ref().ok_or_else(|| {
                Error::InvalidParameter("--dataset is required for the po strategy".into())
            })?;
            let imgs: Vec<_> = ingest_dataset(dir, w, h)?.into_iter().map(|d| d.image).collect();
            ordering::po_order(&imgs, w, h)?
        }
        Strategy::Cc => ordering::cc_order_with(w, h, method)?,
        Strategy::Tv => ordering::tv_order_with(w, h, method)?,
        s => ordering::generate(s, w, h, a.seed)?,
    };
    match a.format {
        None => {
            let (c, b) = fileio::write_order_both(&order, &a.out)?;
            log::info!("wrote {} and {}", c.display(), b.display());
        }
        Some(Format::Csv) => fileio::write_order(&order, &a.out, Encoding::Csv)?,
        Some(Format::Bin) => fileio::write_order(&order, &a.out, Encoding::Binary)?,
        Some(Format::Json) => fileio::write_json(&order, &a.out)?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct IngestSummary {
    source: String,
    output: String,
    digest: String,
}

fn ingest(a: &IngestArgs) -> Result<i32> {
    let items = ingest_dataset(&a.dir, a.size.width, a.size.height)?;
    std::fs::create_dir_all(&a.out)?;
    let mut summary = Vec::with_capacity(items.len());
    for item in &items {
        let stem = item
            .path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into());
        let out = a.out.join(format!("{stem}.pgm"));
        fileio::write_pgm(&item.image, &out, BitDepth::Sixteen)?;
        summary.push(IngestSummary {
            source: item.path.display().to_string(),
            output: out.display().to_string(),
            digest: image_digest(&item.image),
        });
    }
    print_json(&summary)?;
    Ok(EXIT_OK)
}

fn sample(a: &SampleArgs) -> Result<i32> {
    let order = fileio::read_order(&a.order_file)?;
    let set = if a.prefix {
        select_prefix(&order, a.sr)?
    } else {
        select(&order, a.sr, a.seed)?
    };
    match a.format {
        Format::Csv => fileio::write_samples(&set, &a.out, Encoding::Csv)?,
        Format::Bin => fileio::write_samples(&set, &a.out, Encoding::Binary)?,
        Format::Json => fileio::write_json(&set, &a.out)?,
    }
    Ok(EXIT_OK)
}

fn load_image(path: &Path) -> Result<crate::raster::ImageBuffer> {
    load_gray(path)
}

fn measure_cmd(a: &MeasureArgs) -> Result<i32> {
    let object = load_image(&a.image)?;
    let samples = fileio::read_samples(&a.samples)?;
    let noise = NoiseSpec {
        object_sigma_rel: a.noise,
        measurement_sigma_rel: a.measurement_noise,
        seed: a.seed,
    };
    let records = measure(&object, &samples, &noise)?;
    let file = MeasurementFile {
        width: object.width(),
        height: object.height(),
        object_digest: image_digest(&object),
        samples_digest: fileio::samples_digest(&samples),
        noise,
        records,
    };
    fileio::write_measurements(&file, &a.out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    measurements: String,
    object_digest: &'a str,
    samples_digest: &'a str,
    #[serde(flatten)]
    report: &'a crate::recon::ReconReport,
}

fn reconstruct(a: &ReconstructArgs) -> Result<i32> {
    let file = fileio::read_measurements(&a.measurements)?;
    let dims = (file.width, file.height);
    let mut params = ReconParams::default();
    if let Some(v) = a.mu {
        params.mu = v;
    }
    if let Some(v) = a.beta {
        params.beta = v;
    }
    if let Some(v) = a.iterations {
        params.max_iterations = v;
    }
    if let Some(v) = a.tolerance {
        params.tolerance = v;
    }
    let out = match a.method {
        ReconArg::Tv => tv_reconstruct(&file.records, dims, &params)?,
        ReconArg::ZeroFill => zero_fill_with_report(&file.records, dims, params.value_range)?,
    };
    let is_png = a
        .out
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        fileio::write_png(&out.image, &a.out)?;
    } else {
        let depth = match a.depth {
            8 => BitDepth::Eight,
            16 => BitDepth::Sixteen,
            d => return Err(Error::InvalidParameter(format!("--depth must be 8 or 16, got {d}"))),
        };
        fileio::write_pgm(&out.image, &a.out, depth)?;
    }
    let sidecar = Sidecar {
        measurements: a.measurements.display().to_string(),
        object_digest: &file.object_digest,
        samples_digest: &file.samples_digest,
        report: &out.report,
    };
    fileio::write_json(&sidecar, &a.out.with_extension("json"))?;
    Ok(EXIT_OK)
}

fn metrics_cmd(a: &MetricsArgs) -> Result<i32> {
    let reference = load_image(&a.reference)?;
    let test = load_image(&a.test)?;
    let peak = a.peak.unwrap_or(reference.peak());
    let params = match a.ssim {
        SsimMode::Window => SsimParams::new(peak),
        SsimMode::Global => SsimParams::global(peak),
    };
    let roi = match &a.roi {
        Some(r) => {
            let rect: Rect = r.parse()?;
            let q = roi_metrics(&reference, &test, rect, peak, &params)?;
            Some(RoiRecord {
                rect,
                psnr_db: q.psnr_db,
                ssim: q.ssim,
            })
        }
        None => None,
    };
    let record = MetricsRecord {
        strategy: a.strategy.clone(),
        sr: a.sr,
        seed: a.seed,
        psnr_db: psnr(&reference, &test, peak)?,
        ssim: ssim(&reference, &test, &params)?,
        roi,
    };
    match &a.out {
        Some(p) => fileio::write_json(&record, p)?,
        None => print_json(&record)?,
    }
    Ok(EXIT_OK)
}

/// Builds a sweep spec from an optional JSON file plus flag overrides.
pub fn sweep_spec_from_args(a: &SweepArgs) -> Result<SweepSpec> {
    let mut spec = match &a.config {
        Some(p) => SweepSpec::from_json_file(p)?,
        None => SweepSpec::default(),
    };
    if !a.images.is_empty() {
        spec.images = a
            .images
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
    }
    if let Some(s) = a.size {
        spec.width = s.width;
        spec.height = s.height;
    }
    if !a.strategies.is_empty() {
        spec.strategies = a
            .strategies
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
    }
    if !a.sampling_ratios.is_empty() {
        spec.sampling_ratios = a.sampling_ratios.clone();
    }
    if let Some(r) = a.replicates {
        spec.replicates = r;
    }
    if let Some(s) = a.seed {
        spec.master_seed = s;
    }
    if let Some(n) = a.noise {
        spec.object_noise = n;
    }
    if !a.recon.is_empty() {
        spec.recon_methods = a.recon.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if a.dataset.is_some() {
        spec.po_dataset = a.dataset.clone();
    }
    if let Some(r) = &a.roi {
        spec.roi = Some(r.parse()?);
    }
    if a.threads.is_some() {
        spec.threads = a.threads;
    }
    if a.out.is_some() {
        spec.output_dir = a.out.clone();
    }
    Ok(spec)
}

fn sweep_cmd(a: &SweepArgs) -> Result<i32> {
    let spec = sweep_spec_from_args(a)?;
    let result = run_sweep(&spec)?;
    if spec.output_dir.is_none() {
        print!("{}", result.to_csv());
    }
    if result.failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("{} sweep cell(s) failed", result.failures.len());
        Ok(EXIT_CELL_FAILURES)
    }
}

fn bench_cmd(a: &BenchArgs) -> Result<i32> {
    let cfg = BenchConfig {
        sizes: a.sizes.clone(),
        runs: a.runs,
        cc_max_size: a.cc_max,
        ..BenchConfig::default()
    };
    let rows = bench_orders(&cfg)?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        _ => bench_csv(&rows),
    };
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn phantom_cmd(a: &PhantomArgs) -> Result<i32> {
    let kind: PhantomKind = a.kind.parse()?;
    let img = kind.render(a.size.width, a.size.height, a.seed);
    fileio::write_image(&img, &a.out)?;
    Ok(EXIT_OK)
}

/// Runs one parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::GenOrder(a) => gen_order(a),
        Command::Ingest(a) => ingest(a),
        Command::Sample(a) => sample(a),
        Command::Measure(a) => measure_cmd(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Metrics(a) => metrics_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::BenchOrders(a) => bench_cmd(a),
        Command::Phantom(a) => phantom_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    execute(&cli)
}
