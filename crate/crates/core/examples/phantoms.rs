//! Renders the bundled test objects as PGM files.
//!
//! cargo run --example phantoms -- [out_dir] [N]

use std::path::PathBuf;

use hsi::fileio::write_image;
use hsi::phantom::PhantomKind;

fn main() -> hsi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map_or("phantoms", String::as_str));
    let n: usize = args.get(1).map_or(128, |s| s.parse().expect("N must be an integer"));
    std::fs::create_dir_all(&dir)?;
    for kind in PhantomKind::ALL {
        let img = kind.render(n, n, 1);
        let path = dir.join(format!("{}.pgm", kind.name()));
        write_image(&img, &path)?;
        let (lo, hi) = img.min_max();
        println!("{:<13} range [{lo:.0}, {hi:.0}] -> {}", kind.name(), path.display());
    }
    Ok(())
}
