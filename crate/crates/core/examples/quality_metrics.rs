//! PSNR and SSIM, whole image and on a region of interest.
//!
//! cargo run --example quality_metrics

use hsi::acquisition::add_noise_image;
use hsi::metrics::{mse, psnr, roi_metrics, ssim, Rect, SsimParams};
use hsi::phantom::stripes;

fn main() -> hsi::Result<()> {
    let reference = stripes(128, 128);
    let windowed = SsimParams::new(255.0);
    let global = SsimParams::global(255.0);
    let bars = Rect::new(8, 8, 112, 56);

    println!("{:>6} {:>8} {:>9} {:>8} {:>8} {:>10}", "noise", "MSE", "PSNR", "SSIM", "global", "bars SSIM");
    for sigma in [0.005, 0.01, 0.02, 0.04] {
        let noisy = add_noise_image(&reference, sigma, 3)?;
        let roi = roi_metrics(&reference, &noisy, bars, 255.0, &windowed)?;
        println!(
            "{:>5.1}% {:>8.2} {:>6.2} dB {:>8.4} {:>8.4} {:>10.4}",
            sigma * 100.0,
            mse(&reference, &noisy)?,
            psnr(&reference, &noisy, 255.0)?,
            ssim(&reference, &noisy, &windowed)?,
            ssim(&reference, &noisy, &global)?,
            roi.ssim
        );
    }
    Ok(())
}
