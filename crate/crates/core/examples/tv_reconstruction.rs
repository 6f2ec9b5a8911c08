//! Zero-fill against TV reconstruction at low sampling ratios.
//!
//! cargo run --release --example tv_reconstruction -- [out_dir]

use std::path::PathBuf;

use hsi::acquisition::{measure, NoiseSpec};
use hsi::fileio::{write_pgm, BitDepth};
use hsi::metrics::psnr;
use hsi::ordering::xy_order;
use hsi::phantom::stripes;
use hsi::recon::{tv_reconstruct, zero_fill_with_report, ReconParams};
use hsi::sampler::select;

fn main() -> hsi::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let n = 128;
    let obj = stripes(n, n);
    let order = xy_order(n, n)?;
    let params = ReconParams::default();

    println!("{:>5} {:>12} {:>9} {:>6}", "SR", "zero-fill", "TV", "iters");
    for sr in [0.05, 0.10, 0.20, 0.30] {
        let s = select(&order, sr, 1)?;
        let meas = measure(&obj, &s, &NoiseSpec::object(0.01, 2))?;
        let zf = zero_fill_with_report(&meas, (n, n), params.value_range)?;
        let tv = tv_reconstruct(&meas, (n, n), &params)?;
        println!(
            "{:>4.0}% {:>9.2} dB {:>6.2} dB {:>6}",
            sr * 100.0,
            psnr(&obj, &zf.image, 255.0)?,
            psnr(&obj, &tv.image, 255.0)?,
            tv.report.iterations
        );
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            let tag = (sr * 100.0).round();
            write_pgm(&zf.image, &dir.join(format!("zero_fill_{tag}.pgm")), BitDepth::Eight)?;
            write_pgm(&tv.image, &dir.join(format!("tv_{tag}.pgm")), BitDepth::Eight)?;
        }
    }
    Ok(())
}
