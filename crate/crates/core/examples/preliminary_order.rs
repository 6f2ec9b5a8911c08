//! Builds the dataset-derived preliminary order and compares it with XY.
//!
//! With a directory argument, every PGM/PPM/PNG in it is grayscaled and
//! resized; otherwise synthetic scenes stand in for a photo collection.
//!
//! cargo run --release --example preliminary_order -- [image_dir] [N]

use std::path::PathBuf;

use hsi::acquisition::{measure, NoiseSpec};
use hsi::dataset::ingest_dataset;
use hsi::metrics::psnr;
use hsi::ordering::{po_order, xy_order};
use hsi::phantom::{scene, training_scenes};
use hsi::recon::{tv_reconstruct, ReconParams};
use hsi::sampler::select;
use hsi::ImageBuffer;

fn main() -> hsi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.get(1).map_or(64, |s| s.parse().expect("N must be an integer"));
    let training: Vec<ImageBuffer> = match args.first() {
        Some(dir) => ingest_dataset(&PathBuf::from(dir), n, n)?
            .into_iter()
            .map(|d| d.image)
            .collect(),
        None => training_scenes(n, n, 20, 11),
    };
    let po = po_order(&training, n, n)?;
    println!("{} training images, digest {}", training.len(), po.dataset_digest().unwrap_or("-"));
    let head: Vec<String> = po.prefix(12).iter().map(|c| c.to_string()).collect();
    println!("PO head: {}", head.join(" "));

    let xy = xy_order(n, n)?;
    let test = scene(n, n, 999);
    let params = ReconParams::default();
    for sr in [0.05, 0.10, 0.20] {
        let mut line = format!("SR {:>3.0}%", sr * 100.0);
        for (name, order) in [("PO+PF", &po), ("XY+PF", &xy)] {
            let s = select(order, sr, 4)?;
            let meas = measure(&test, &s, &NoiseSpec::object(0.01, 8))?;
            let rec = tv_reconstruct(&meas, (n, n), &params)?;
            line.push_str(&format!("  {name} {:.2} dB", psnr(&test, &rec.image, 255.0)?));
        }
        println!("{line}");
    }
    Ok(())
}
