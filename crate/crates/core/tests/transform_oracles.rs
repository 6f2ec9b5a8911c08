use hsi::transform::{
    fwht_1d, hadamard_entry, iwht_2d, natural_to_sequency, sequency_permutation, synthesize_pattern,
    synthesize_pattern_rect, walsh_vector, wht_2d,
};
use hsi::{ImageBuffer, SpectralCoord, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(w: usize, h: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageBuffer::from_fn(w, h, 255.0, |_, _| rng.random_range(0.0..255.0))
}

fn sign_changes(v: &[i8]) -> usize {
    v.windows(2).filter(|w| w[0] != w[1]).count()
}

// Dense Sylvester matrix built by the Kronecker recursion, independent of the bit formula.
fn sylvester(n: usize) -> Vec<Vec<i8>> {
    let mut h = vec![vec![1i8]];
    while h.len() < n {
        let m = h.len();
        let mut next = vec![vec![0i8; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = h[i][j];
                next[i][j + m] = h[i][j];
                next[i + m][j] = h[i][j];
                next[i + m][j + m] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

#[test]
fn hadamard_entry_matches_kronecker_recursion() {
    let h = sylvester(32);
    for (i, row) in h.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            assert_eq!(hadamard_entry(i, j), e);
        }
    }
}

#[test]
fn fwht_matches_dense_product() {
    let n = 16;
    let h = sylvester(n);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let fast = fwht_1d(&v).unwrap();
    for i in 0..n {
        let dense: f64 = (0..n).map(|j| h[i][j] as f64 * v[j]).sum();
        assert!((fast[i] - dense).abs() < 1e-12);
    }
}

#[test]
fn sequency_rows_have_exact_sign_changes() {
    for n in [1usize, 2, 4, 8, 16, 32, 64, 128] {
        let h = sylvester(n);
        let perm = sequency_permutation(n).unwrap();
        let mut seen = vec![false; n];
        for (s, &row) in perm.iter().enumerate() {
            assert_eq!(sign_changes(&h[row]), s, "n={n} s={s}");
            assert_eq!(walsh_vector(s, n).unwrap(), h[row]);
            assert_eq!(natural_to_sequency(row, n), s);
            seen[row] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }
}

#[test]
fn wht_2d_matches_dense_oracle_8x8() {
    let n = 8;
    let h = sylvester(n);
    let perm = sequency_permutation(n).unwrap();
    let img = random_image(n, n, 11);
    let spec = wht_2d(&img).unwrap();
    for u in 0..n {
        for v in 0..n {
            let mut acc = 0.0;
            for row in 0..n {
                for col in 0..n {
                    acc += h[perm[u]][row] as f64 * h[perm[v]][col] as f64 * img.get(col, row);
                }
            }
            let got = spec.get(SpectralCoord::new(u, v));
            assert!((got - acc).abs() < 1e-9 * acc.abs().max(1.0), "({u},{v}) {got} vs {acc}");
        }
    }
}

#[test]
fn wht_2d_matches_dense_oracle_rectangular() {
    let (w, hgt) = (8, 4);
    let hw = sylvester(w);
    let hh = sylvester(hgt);
    let pw = sequency_permutation(w).unwrap();
    let ph = sequency_permutation(hgt).unwrap();
    let img = random_image(w, hgt, 5);
    let spec = wht_2d(&img).unwrap();
    assert_eq!(spec.dims(), (w, hgt));
    for u in 0..hgt {
        for v in 0..w {
            let mut acc = 0.0;
            for row in 0..hgt {
                for col in 0..w {
                    acc += hh[ph[u]][row] as f64 * hw[pw[v]][col] as f64 * img.get(col, row);
                }
            }
            assert!((spec.get(SpectralCoord::new(u, v)) - acc).abs() < 1e-9);
        }
    }
}

#[test]
fn round_trip_random_images() {
    let sizes = [(1, 1), (2, 2), (4, 8), (16, 16), (64, 32), (128, 128), (256, 256)];
    for (k, &(w, h)) in sizes.iter().enumerate() {
        let img = random_image(w, h, k as u64);
        let back = iwht_2d(&wht_2d(&img).unwrap()).unwrap();
        let num: f64 = img.as_slice().iter().zip(back.as_slice()).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = img.as_slice().iter().map(|a| a * a).sum();
        assert!((num / den).sqrt() < 1e-9, "{w}x{h}");
    }
}

#[test]
fn constant_image_is_dc_only() {
    let img = ImageBuffer::filled(8, 8, 3.0, 255.0);
    let spec = wht_2d(&img).unwrap();
    for u in 0..8 {
        for v in 0..8 {
            let want = if u == 0 && v == 0 { 192.0 } else { 0.0 };
            assert_eq!(spec.get(SpectralCoord::new(u, v)), want);
        }
    }
}

#[test]
fn single_coefficient_inverts_to_scaled_pattern() {
    let n = 8;
    let mut spec = Spectrum::zeros(n, n).unwrap();
    spec.set(SpectralCoord::new(3, 5), 64.0);
    let img = iwht_2d(&spec).unwrap();
    let p = synthesize_pattern(3, 5, n).unwrap();
    for row in 0..n {
        for col in 0..n {
            assert_eq!(img.get(col, row), p.get(row, col) as f64);
        }
    }
}

#[test]
fn patterns_are_reshaped_rows_of_the_big_hadamard() {
    for n in [2usize, 4, 8, 16] {
        let nn = n * n;
        for k in 0..nn {
            let u = natural_to_sequency(k / n, n);
            let v = natural_to_sequency(k % n, n);
            let p = synthesize_pattern(u, v, n).unwrap();
            for row in 0..n {
                for col in 0..n {
                    assert_eq!(p.get(row, col), hadamard_entry(k, row * n + col));
                }
            }
        }
    }
}

#[test]
fn patterns_are_mutually_orthogonal_up_to_16() {
    for n in [2usize, 4, 8, 16] {
        let pats: Vec<Vec<i8>> = (0..n * n)
            .map(|k| synthesize_pattern(k / n, k % n, n).unwrap().as_slice().to_vec())
            .collect();
        for i in 0..pats.len() {
            for j in i..pats.len() {
                let dot: i64 = pats[i].iter().zip(&pats[j]).map(|(&a, &b)| (a as i64) * (b as i64)).sum();
                let want = if i == j { (n * n) as i64 } else { 0 };
                assert_eq!(dot, want, "n={n} i={i} j={j}");
            }
        }
    }
}

#[test]
fn pattern_sign_changes_follow_coordinates() {
    let (w, h) = (16, 8);
    for u in 0..h {
        for v in 0..w {
            let p = synthesize_pattern_rect(u, v, w, h).unwrap();
            for row in 0..h {
                let r: Vec<i8> = (0..w).map(|c| p.get(row, c)).collect();
                assert_eq!(sign_changes(&r), v);
            }
            for col in 0..w {
                let c: Vec<i8> = (0..h).map(|r| p.get(r, col)).collect();
                assert_eq!(sign_changes(&c), u);
            }
        }
    }
}

#[test]
fn small_pattern_examples() {
    let p = synthesize_pattern(0, 0, 4).unwrap();
    assert!(p.as_slice().iter().all(|&x| x == 1));
    let p = synthesize_pattern(1, 0, 4).unwrap();
    for row in 0..4 {
        let want = if row < 2 { 1 } else { -1 };
        for col in 0..4 {
            assert_eq!(p.get(row, col), want);
        }
    }
}

#[test]
fn rejects_non_power_of_two() {
    assert!(ImageBuffer::from_vec(3, 4, vec![0.0; 12], 1.0).is_ok_and(|img| wht_2d(&img).is_err()));
    assert!(sequency_permutation(12).is_err());
    assert!(synthesize_pattern(4, 0, 4).is_err());
}
