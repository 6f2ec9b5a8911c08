use hsi::acquisition::add_noise_image;
use hsi::metrics::{mse, psnr, roi_metrics, ssim, Rect, SsimParams, SsimWindow, PSNR_CAP_DB};
use hsi::phantom::{scene, stripes};
use hsi::ImageBuffer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(w: usize, h: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageBuffer::from_fn(w, h, 255.0, |_, _| rng.random_range(0.0..255.0))
}

fn loop_mse(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    let mut s = 0.0;
    for y in 0..a.height() {
        for x in 0..a.width() {
            s += (a.get(x, y) - b.get(x, y)).powi(2);
        }
    }
    s / (a.width() * a.height()) as f64
}

// Straightforward windowed SSIM: normalized Gaussian weights per window position.
fn loop_ssim(a: &ImageBuffer, b: &ImageBuffer, size: usize, sigma: f64, l: f64) -> f64 {
    let (c1, c2) = ((0.01 * l).powi(2), (0.03 * l).powi(2));
    let r = (size / 2) as f64;
    let mut wts = vec![vec![0.0; size]; size];
    let mut total = 0.0;
    for (i, row) in wts.iter_mut().enumerate() {
        for (j, w) in row.iter_mut().enumerate() {
            let (dy, dx) = (i as f64 - r, j as f64 - r);
            *w = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
            total += *w;
        }
    }
    let mut acc = 0.0;
    let mut count = 0;
    for y0 in 0..=a.height() - size {
        for x0 in 0..=a.width() - size {
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..size {
                for j in 0..size {
                    let w = wts[i][j] / total;
                    ma += w * a.get(x0 + j, y0 + i);
                    mb += w * b.get(x0 + j, y0 + i);
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..size {
                for j in 0..size {
                    let w = wts[i][j] / total;
                    let (da, db) = (a.get(x0 + j, y0 + i) - ma, b.get(x0 + j, y0 + i) - mb);
                    va += w * da * da;
                    vb += w * db * db;
                    cov += w * da * db;
                }
            }
            acc += (2.0 * ma * mb + c1) * (2.0 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    acc / count as f64
}

#[test]
fn mse_examples() {
    let a = random_image(8, 8, 1);
    assert_eq!(mse(&a, &a).unwrap(), 0.0);
    let shifted = a.map(|v| v + 10.0);
    assert!((mse(&a, &shifted).unwrap() - 100.0).abs() < 1e-9);
    let b = random_image(8, 8, 2);
    let want = loop_mse(&a, &b);
    assert!((mse(&a, &b).unwrap() - want).abs() <= 1e-12 * want);
    assert!(mse(&a, &random_image(4, 8, 1)).is_err());
}

#[test]
fn psnr_examples() {
    let a = random_image(16, 16, 3);
    assert_eq!(psnr(&a, &a, 255.0).unwrap(), PSNR_CAP_DB);
    let shifted = a.map(|v| v + 10.0);
    let p = psnr(&a, &shifted, 255.0).unwrap();
    assert!((p - 28.1308).abs() < 1e-3);
    let p2 = psnr(&a, &shifted, 510.0).unwrap();
    assert!((p2 - p - 20.0 * 2f64.log10()).abs() < 1e-12);
    let b = random_image(16, 16, 4);
    let want = 10.0 * (255.0f64.powi(2) / loop_mse(&a, &b)).log10();
    assert!((psnr(&a, &b, 255.0).unwrap() - want).abs() <= 1e-12 * want);
    assert!(psnr(&a, &b, 0.0).is_err());
}

#[test]
fn psnr_decreases_with_noise() {
    let img = scene(64, 64, 1);
    let mut last = f64::INFINITY;
    for sigma in [0.005, 0.01, 0.02, 0.04] {
        let noisy = add_noise_image(&img, sigma, 7).unwrap();
        let p = psnr(&img, &noisy, 255.0).unwrap();
        assert!(p < last);
        last = p;
    }
}

#[test]
fn ssim_matches_loop_oracle() {
    let a = random_image(24, 20, 5);
    let b = a.map(|v| 0.8 * v + 20.0);
    let c = random_image(24, 20, 6);
    for (x, y) in [(&a, &b), (&a, &c)] {
        let fast = ssim(x, y, &SsimParams::new(255.0)).unwrap();
        let slow = loop_ssim(x, y, 11, 1.5, 255.0);
        assert!((fast - slow).abs() < 1e-10, "{fast} vs {slow}");
    }
}

#[test]
fn ssim_properties() {
    let a = random_image(32, 32, 8);
    let b = random_image(32, 32, 9);
    let p = SsimParams::new(255.0);
    assert_eq!(ssim(&a, &a, &p).unwrap(), 1.0);
    assert_eq!(ssim(&a, &a, &SsimParams::global(255.0)).unwrap(), 1.0);
    let (ab, ba) = (ssim(&a, &b, &p).unwrap(), ssim(&b, &a, &p).unwrap());
    assert!((ab - ba).abs() < 1e-15);
    assert!(ab.abs() <= 1.0);
    let neg = a.map(|v| 255.0 - v);
    assert!(ssim(&a, &neg, &p).unwrap() >= -1.0);
    assert!(ssim(&random_image(8, 8, 1), &random_image(8, 8, 2), &p).is_err());
}

#[test]
fn global_constant_case() {
    let a = ImageBuffer::filled(16, 16, 100.0, 255.0);
    let b = ImageBuffer::filled(16, 16, 120.0, 255.0);
    let g = SsimParams::global(255.0);
    assert!(matches!(g.window, SsimWindow::Global));
    let want = (24000.0 + 6.5025) / (24400.0 + 6.5025);
    let got = ssim(&a, &b, &g).unwrap();
    assert!((got - want).abs() < 1e-12);
    assert!((got - 0.98362).abs() < 1e-4);
}

#[test]
fn roi_examples() {
    let img = stripes(64, 64);
    let p = SsimParams::new(255.0);
    let other = add_noise_image(&img, 0.02, 1).unwrap();
    let full = roi_metrics(&img, &other, Rect::full(&img), 255.0, &p).unwrap();
    assert_eq!(full.psnr_db, psnr(&img, &other, 255.0).unwrap());
    assert_eq!(full.ssim, ssim(&img, &other, &p).unwrap());

    let r = Rect::new(4, 4, 24, 24);
    let same = roi_metrics(&img, &img, r, 255.0, &p).unwrap();
    assert_eq!(same.ssim, 1.0);
    assert_eq!(same.psnr_db, PSNR_CAP_DB);

    // A one-pixel horizontal shift of the bar region loses structure.
    let shifted = ImageBuffer::from_fn(64, 64, 255.0, |x, y| img.get((x + 1).min(63), y));
    let aligned = roi_metrics(&img, &img.clone(), Rect::new(8, 8, 32, 24), 255.0, &p).unwrap();
    let off = roi_metrics(&img, &shifted, Rect::new(8, 8, 32, 24), 255.0, &p).unwrap();
    assert!(off.ssim < aligned.ssim);

    assert!(roi_metrics(&img, &img, Rect::new(60, 0, 8, 8), 255.0, &p).is_err());
    assert_eq!("1,2,3,4".parse::<Rect>().unwrap(), Rect::new(1, 2, 3, 4));
    assert!("1,2,3".parse::<Rect>().is_err());
}
