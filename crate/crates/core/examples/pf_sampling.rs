//! Probability-function sampling along the XY order.
//!
//! cargo run --example pf_sampling -- [SR] [seed]

use hsi::ordering::xy_order;
use hsi::sampler::{budget, calibrate_a, probability, select};

fn main() -> hsi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let sr: f64 = args.first().map_or(0.10, |s| s.parse().expect("SR must be a number"));
    let seed: u64 = args.get(1).map_or(2023, |s| s.parse().expect("seed must be an integer"));

    for size in [64usize, 128, 256] {
        println!("a({sr}, {size}x{size}) = {:.4e}", calibrate_a(sr, size, size)?);
    }

    let n = 64;
    let total = n * n;
    let a = calibrate_a(sr, n, n)?;
    for k in [1, total / 4, total / 2, total] {
        println!("E({k}) = {:.4}", probability(k, a, total)?);
    }

    let order = xy_order(n, n)?;
    let s = select(&order, sr, seed)?;
    let pf = s.pf().expect("select records its draw");
    println!(
        "selected {} of {total} (budget {}, {} drawn before adjustment)",
        s.len(),
        budget(sr, total)?,
        pf.drawn
    );

    // Coarse view of the spectral mask: one character per 4x4 block.
    let mask = s.mask();
    for bu in 0..n / 4 {
        let line: String = (0..n / 4)
            .map(|bv| {
                let hits = (0..4)
                    .flat_map(|i| (0..4).map(move |j| (bu * 4 + i) * n + bv * 4 + j))
                    .filter(|&k| mask[k])
                    .count();
                [' ', '.', ':', '*', '#'][(hits + 3) / 4]
            })
            .collect();
        println!("|{line}|");
    }
    Ok(())
}
