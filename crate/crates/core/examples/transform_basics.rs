//! Walsh–Hadamard transform round trip, sequency ordering and basis patterns.
//!
//! cargo run --example transform_basics

use hsi::phantom::scene;
use hsi::transform::{iwht_2d, sequency_permutation, synthesize_pattern, walsh_vector, wht_2d};
use hsi::SpectralCoord;

fn main() -> hsi::Result<()> {
    let n = 8;
    println!("sequency -> natural row for N = {n}: {:?}", sequency_permutation(n)?);
    for s in 0..n {
        let w: String = walsh_vector(s, n)?
            .iter()
            .map(|&e| if e > 0 { '+' } else { '-' })
            .collect();
        println!("  W_{s}: {w}");
    }

    let p = synthesize_pattern(1, 2, 4)?;
    println!("pattern (u=1, v=2), 4x4:");
    for row in 0..4 {
        let line: Vec<String> = (0..4).map(|c| format!("{:+}", p.get(row, c))).collect();
        println!("  {}", line.join(" "));
    }

    let img = scene(64, 64, 1);
    let spec = wht_2d(&img)?;
    let back = iwht_2d(&spec)?;
    let err = img
        .as_slice()
        .iter()
        .zip(back.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("64x64 scene: DC = {:.1}, max round-trip error {err:.2e}", spec.get(SpectralCoord::DC));

    let total: f64 = spec.as_slice().iter().map(|c| c * c).sum();
    let corner: f64 = (0..16)
        .flat_map(|u| (0..16).map(move |v| SpectralCoord::new(u, v)))
        .map(|c| spec.get(c).powi(2))
        .sum();
    println!("energy in the 16x16 low-sequency corner: {:.2}%", 100.0 * corner / total);
    Ok(())
}
