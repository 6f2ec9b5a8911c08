use hsi::dataset::{ingest_dataset, load_gray, resize_bilinear, LUMA};
use image::{GrayImage, Luma, Rgb, RgbImage};
use tempfile::tempdir;

#[test]
fn solid_red_maps_to_luma() {
    let dir = tempdir().unwrap();
    RgbImage::from_pixel(16, 16, Rgb([255, 0, 0]))
        .save(dir.path().join("red.png"))
        .unwrap();
    let imgs = ingest_dataset(dir.path(), 8, 8).unwrap();
    assert_eq!(imgs.len(), 1);
    let want = LUMA[0] * 255.0;
    assert!((want - 76.245).abs() < 1e-9);
    for &v in imgs[0].image.as_slice() {
        assert!((v - want).abs() < 1e-4);
    }
}

#[test]
fn grayscale_downscale() {
    let dir = tempdir().unwrap();
    GrayImage::from_fn(256, 256, |x, y| Luma([((x + y) / 2) as u8]))
        .save(dir.path().join("g.png"))
        .unwrap();
    let imgs = ingest_dataset(dir.path(), 64, 64).unwrap();
    assert_eq!(imgs[0].image.dims(), (64, 64));
    let (lo, hi) = imgs[0].image.min_max();
    assert!(lo >= 0.0 && hi <= 255.0);
}

#[test]
fn same_size_passes_through() {
    let dir = tempdir().unwrap();
    let src = GrayImage::from_fn(32, 32, |x, y| Luma([(x * 7 + y) as u8]));
    src.save(dir.path().join("s.png")).unwrap();
    let imgs = ingest_dataset(dir.path(), 32, 32).unwrap();
    for (i, &v) in imgs[0].image.as_slice().iter().enumerate() {
        assert_eq!(v, src.as_raw()[i] as f64);
    }
    let direct = load_gray(&dir.path().join("s.png")).unwrap();
    assert_eq!(resize_bilinear(&direct, 32, 32).unwrap(), imgs[0].image);
}

#[test]
fn skips_undecodable_and_fails_when_nothing_usable() {
    let dir = tempdir().unwrap();
    std::fs::write(dir.path().join("junk.png"), b"not an image").unwrap();
    assert!(ingest_dataset(dir.path(), 8, 8).is_err());
    GrayImage::from_pixel(8, 8, Luma([9])).save(dir.path().join("ok.png")).unwrap();
    let imgs = ingest_dataset(dir.path(), 8, 8).unwrap();
    assert_eq!(imgs.len(), 1);

    let empty = tempdir().unwrap();
    assert!(ingest_dataset(empty.path(), 8, 8).is_err());
}

#[test]
fn sixteen_bit_pgm_is_rescaled() {
    let dir = tempdir().unwrap();
    let mut bytes = b"P5\n2 1\n65535\n".to_vec();
    bytes.extend_from_slice(&65535u16.to_be_bytes());
    bytes.extend_from_slice(&0u16.to_be_bytes());
    let p = dir.path().join("h.pgm");
    std::fs::write(&p, bytes).unwrap();
    let img = load_gray(&p).unwrap();
    assert_eq!(img.as_slice(), &[255.0, 0.0]);
}
