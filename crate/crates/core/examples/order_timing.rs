//! Generation time of the CC (flood fill), TV and XY orders.
//!
//! cargo run --release --example order_timing -- [max_cc_size]

use hsi::cli::{bench_csv, bench_orders, BenchConfig};

fn main() -> hsi::Result<()> {
    let cc_max = std::env::args().nth(1).map(|s| s.parse().expect("size must be an integer"));
    let cfg = BenchConfig {
        sizes: vec![32, 64, 128, 256],
        runs: 3,
        cc_max_size: cc_max.or(Some(128)),
        ..BenchConfig::default()
    };
    print!("{}", bench_csv(&bench_orders(&cfg)?));
    Ok(())
}
