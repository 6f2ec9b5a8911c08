//! Generates every dataset-free order and prints how each one starts.
//!
//! cargo run --example pattern_orders -- [N] [out_dir]

use std::path::PathBuf;

use hsi::fileio::write_order_both;
use hsi::ordering::{blocks_closed_form, generate, tv_closed_form, xy_weight};
use hsi::Strategy;

fn main() -> hsi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(16, |s| s.parse().expect("N must be an integer"));
    let out = args.get(1).map(PathBuf::from);

    for strategy in [Strategy::Natural, Strategy::Random, Strategy::Walsh, Strategy::Cc, Strategy::Tv, Strategy::Xy] {
        let order = generate(strategy, n, n, 7)?;
        let head: Vec<String> = order.prefix(8).iter().map(|c| c.to_string()).collect();
        println!("{:<8} {}", strategy.tag(), head.join(" "));
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            let (csv, bin) = write_order_both(&order, &dir.join(strategy.tag()))?;
            println!("         wrote {} and {}", csv.display(), bin.display());
        }
    }

    let c = hsi::SpectralCoord::new(2, 3);
    println!(
        "\n{c}: blocks {}, TV {}, XY weight {}",
        blocks_closed_form(c),
        tv_closed_form(c, n, n),
        xy_weight(c)
    );
    Ok(())
}
