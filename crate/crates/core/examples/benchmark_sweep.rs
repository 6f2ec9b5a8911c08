//! A small strategy comparison sweep with per-cell seeds and mean ± std rows.
//!
//! cargo run --release --example benchmark_sweep -- [out_dir]

use std::path::PathBuf;

use hsi::cli::{run_sweep, ImageSource, ReconMethod, SweepSpec};
use hsi::phantom::PhantomKind;

fn main() -> hsi::Result<()> {
    let labels = ["xy+pf", "po+pf", "cc", "tv", "walsh", "random", "natural"];
    let spec = SweepSpec {
        images: vec![ImageSource::Phantom {
            phantom: PhantomKind::Stripes,
            seed: 0,
        }],
        width: 64,
        height: 64,
        strategies: labels.iter().map(|s| s.parse()).collect::<hsi::Result<_>>()?,
        sampling_ratios: vec![0.05, 0.10, 0.20, 0.30],
        replicates: 3,
        recon_methods: vec![ReconMethod::Tv],
        output_dir: std::env::args().nth(1).map(PathBuf::from),
        ..SweepSpec::default()
    };
    let result = run_sweep(&spec)?;

    print!("{:<8}", "");
    for sr in &spec.sampling_ratios {
        print!("{:>14}", format!("{:.0}%", sr * 100.0));
    }
    println!();
    for label in labels {
        print!("{label:<8}");
        for &sr in &spec.sampling_ratios {
            let a = result.aggregate("stripes", label, sr, "tv").expect("every cell ran");
            print!("{:>14}", format!("{:.2}±{:.2}", a.psnr_mean, a.psnr_std));
        }
        println!();
    }
    if let Some(dir) = &spec.output_dir {
        println!("results written to {}", dir.display());
    }
    Ok(())
}
