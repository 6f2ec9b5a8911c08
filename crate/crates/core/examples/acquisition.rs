//! Differential bucket measurements: explicit I+/I- displays against the
//! spectral fast path, then the effect of 1 % object noise.
//!
//! cargo run --example acquisition

use hsi::acquisition::{measure, measure_differential, split_pattern, NoiseSpec};
use hsi::ordering::xy_order;
use hsi::phantom::stripes;
use hsi::sampler::select_prefix;
use hsi::transform::synthesize_pattern;

fn main() -> hsi::Result<()> {
    let (plus, minus) = split_pattern(&synthesize_pattern(1, 1, 2)?)?;
    println!("2x2 checker: I+ {:?}, I- {:?}", plus.as_slice(), minus.as_slice());

    let n = 32;
    let obj = stripes(n, n);
    let samples = select_prefix(&xy_order(n, n)?, 0.05)?;
    let slow = measure_differential(&obj, &samples)?;
    let fast = measure(&obj, &samples, &NoiseSpec::none())?;
    let noisy = measure(&obj, &samples, &NoiseSpec::object(0.01, 5))?;

    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "coord", "B+", "B-", "B", "B (1% noise)");
    for ((s, f), z) in slow.iter().zip(&fast).zip(&noisy).take(10) {
        assert!((s.value - f.value).abs() < 1e-9 * f.value.abs().max(1.0));
        println!(
            "{:>8} {:>12.1} {:>12.1} {:>12.1} {:>12.1}",
            s.coord.to_string(),
            s.plus.unwrap_or_default(),
            s.minus.unwrap_or_default(),
            s.value,
            z.value
        );
    }
    Ok(())
}
