//! Image reconstruction from partial Hadamard measurements.
//!
//! [`zero_fill_reconstruct`] inverts the spectrum with unmeasured coefficients
//! set to zero. [`tv_reconstruct`] solves
//!
//! ```text
//!   min_x  ‖∇x‖₁ + (μ/2)‖A x − b‖²
//! ```
//!
//! with anisotropic forward-difference TV and `A` the selected rows of the
//! orthonormal sequency-ordered 2D Hadamard transform, in units where the
//! object range is `[0, 1]`. The solver is an alternating direction method
//! of multipliers over the splittings `d = ∇x` and `z = x`:
//!
//! - `x` solves `(β∇ᵀ∇ + ρI)x = β∇ᵀ(d − λ_d) + ρ(z − λ_z)` by conjugate gradients;
//! - `d` is a soft threshold of `∇x + λ_d` at `1/β`;
//! - `z` is the exact data step in the spectral domain, which is closed form
//!   because the rows of `A` are orthonormal;
//! - the scaled multipliers for `d = ∇x` and `z = x` accumulate residuals.
//!
//! A complete measurement set determines the image; it is returned as the
//! exact inverse transform without iterating.
//!
//! `A` is never materialized; every application is one fast transform.

use serde::{Deserialize, Serialize};

use crate::acquisition::MeasurementRecord;
use crate::error::{Error, Result};
use crate::raster::ImageBuffer;
use crate::transform::{forward_2d, inverse_2d, require_pow2, Spectrum};

const CG_MAX_STEPS: usize = 40;
const CG_REL_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TvFlavor {
    Anisotropic,
}

/// Solver settings.
///
/// `mu` weights data fidelity against TV in units where the object range is
/// `[0, 1]`. `beta` is the splitting penalty; the image splitting reuses it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconParams {
    pub mu: f64,
    pub beta: f64,
    pub max_iterations: usize,
    /// Stop once `‖x_k − x_{k−1}‖ / ‖x_k‖` and the relative splitting
    /// residual both drop below this.
    pub tolerance: f64,
    pub tv: TvFlavor,
    /// Declared pixel range; the final iterate is clamped to it and it sets the
    /// internal intensity scale. `None` leaves the output unclamped.
    pub value_range: Option<(f64, f64)>,
}

impl Default for ReconParams {
    fn default() -> Self {
        Self {
            mu: 128.0,
            beta: 16.0,
            max_iterations: 150,
            tolerance: 1e-4,
            tv: TvFlavor::Anisotropic,
            value_range: Some((0.0, 255.0)),
        }
    }
}

impl ReconParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.mu) || !positive(self.beta) || !positive(self.tolerance) {
            return Err(Error::InvalidParameter(format!(
                "mu, beta and tolerance must be positive (got {}, {}, {})",
                self.mu, self.beta, self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if let Some((lo, hi)) = self.value_range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "value range ({lo}, {hi}) is empty"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconReport {
    pub method: String,
    pub iterations: usize,
    pub converged: bool,
    /// `‖A x − B‖ / ‖B‖` for the returned image before clamping.
    pub relative_residual: f64,
    pub params: Option<ReconParams>,
}

#[derive(Clone, Debug)]
pub struct ReconOutput {
    pub image: ImageBuffer,
    pub report: ReconReport,
}

/// Validated measurement layout: flat spectral indices and values.
struct Layout {
    width: usize,
    height: usize,
    index: Vec<usize>,
    values: Vec<f64>,
}

impl Layout {
    fn new(meas: &[MeasurementRecord], dims: (usize, usize)) -> Result<Self> {
        let (width, height) = dims;
        require_pow2(width, "width")?;
        require_pow2(height, "height")?;
        let mut seen = vec![false; width * height];
        let mut index = Vec::with_capacity(meas.len());
        let mut values = Vec::with_capacity(meas.len());
        for r in meas {
            let c = r.coord;
            if c.u >= height || c.v >= width {
                return Err(Error::OutOfRange(format!(
                    "measurement at {c} outside {width}x{height} spectrum"
                )));
            }
            let i = c.u * width + c.v;
            if seen[i] {
                return Err(Error::DuplicateCoordinate { u: c.u, v: c.v });
            }
            if !r.value.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite measurement at {c}")));
            }
            seen[i] = true;
            index.push(i);
            values.push(r.value);
        }
        Ok(Self {
            width,
            height,
            index,
            values,
        })
    }

    fn n(&self) -> usize {
        self.width * self.height
    }

    fn zero_fill(&self) -> Vec<f64> {
        let mut coeffs = vec![0.0; self.n()];
        for (&i, &b) in self.index.iter().zip(&self.values) {
            coeffs[i] = b;
        }
        inverse_2d(&coeffs, self.width, self.height)
    }

    /// `‖A x − B‖ / ‖B‖` in raw transform units.
    fn relative_residual(&self, x: &[f64]) -> f64 {
        let spec = forward_2d(x, self.width, self.height);
        let (mut num, mut den) = (0.0, 0.0);
        for (&i, &b) in self.index.iter().zip(&self.values) {
            num += (spec[i] - b).powi(2);
            den += b * b;
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

/// Inverse transform with zeros at every unmeasured coefficient.
pub fn zero_fill_reconstruct(
    meas: &[MeasurementRecord],
    dims: (usize, usize),
) -> Result<ImageBuffer> {
    let layout = Layout::new(meas, dims)?;
    ImageBuffer::from_vec(layout.width, layout.height, layout.zero_fill(), 1.0)
}

/// Zero-fill reconstruction wrapped with a report, clamped like the TV output.
pub fn zero_fill_with_report(
    meas: &[MeasurementRecord],
    dims: (usize, usize),
    value_range: Option<(f64, f64)>,
) -> Result<ReconOutput> {
    let layout = Layout::new(meas, dims)?;
    let x = layout.zero_fill();
    let relative_residual = layout.relative_residual(&x);
    let mut image = ImageBuffer::from_vec(layout.width, layout.height, x, 1.0)?;
    if let Some((lo, hi)) = value_range {
        image.clamp(lo, hi);
        image.set_peak(hi);
    }
    Ok(ReconOutput {
        image,
        report: ReconReport {
            method: "zero-fill".into(),
            iterations: 0,
            converged: true,
            relative_residual,
            params: None,
        },
    })
}

/// Measured values placed in an otherwise zero spectrum.
pub fn assemble_spectrum(meas: &[MeasurementRecord], dims: (usize, usize)) -> Result<Spectrum> {
    let layout = Layout::new(meas, dims)?;
    let mut coeffs = vec![0.0; layout.n()];
    for (&i, &b) in layout.index.iter().zip(&layout.values) {
        coeffs[i] = b;
    }
    Spectrum::from_vec(layout.width, layout.height, coeffs)
}

/// Forward differences along rows (`gx`) and columns (`gy`), zero at the far edge.
fn gradient(x: &[f64], w: usize, h: usize, gx: &mut [f64], gy: &mut [f64]) {
    for y in 0..h {
        let row = &x[y * w..(y + 1) * w];
        let gxr = &mut gx[y * w..(y + 1) * w];
        for i in 0..w - 1 {
            gxr[i] = row[i + 1] - row[i];
        }
        gxr[w - 1] = 0.0;
    }
    for y in 0..h {
        for i in 0..w {
            let k = y * w + i;
            gy[k] = if y + 1 < h { x[k + w] - x[k] } else { 0.0 };
        }
    }
}

/// Adjoint of [`gradient`]; `out = ∇ᵀ(gx, gy)`.
fn gradient_adjoint(gx: &[f64], gy: &[f64], w: usize, h: usize, out: &mut [f64]) {
    for y in 0..h {
        for i in 0..w {
            let k = y * w + i;
            let mut v = 0.0;
            if i + 1 < w {
                v -= gx[k];
            }
            if i > 0 {
                v += gx[k - 1];
            }
            if y + 1 < h {
                v -= gy[k];
            }
            if y > 0 {
                v += gy[k - w];
            }
            out[k] = v;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Reusable buffers for the SPD system `(β∇ᵀ∇ + ρI)x = rhs`.
struct NormalSolver {
    w: usize,
    h: usize,
    beta: f64,
    rho: f64,
    gx: Vec<f64>,
    gy: Vec<f64>,
    r: Vec<f64>,
    p: Vec<f64>,
    kp: Vec<f64>,
}

impl NormalSolver {
    fn new(w: usize, h: usize, beta: f64, rho: f64) -> Self {
        let n = w * h;
        Self {
            w,
            h,
            beta,
            rho,
            gx: vec![0.0; n],
            gy: vec![0.0; n],
            r: vec![0.0; n],
            p: vec![0.0; n],
            kp: vec![0.0; n],
        }
    }

    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        gradient(x, self.w, self.h, &mut self.gx, &mut self.gy);
        gradient_adjoint(&self.gx, &self.gy, self.w, self.h, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = self.beta * *o + self.rho * xi;
        }
    }

    /// Warm-started conjugate gradients; `x` holds the initial guess.
    fn solve(&mut self, rhs: &[f64], x: &mut [f64]) {
        let mut kx = std::mem::take(&mut self.kp);
        self.apply(x, &mut kx);
        for ((r, &b), &k) in self.r.iter_mut().zip(rhs).zip(&kx) {
            *r = b - k;
        }
        self.kp = kx;
        self.p.copy_from_slice(&self.r);
        let stop = CG_REL_TOL * norm(rhs).max(f64::MIN_POSITIVE);
        let mut rr = dot(&self.r, &self.r);
        for _ in 0..CG_MAX_STEPS {
            if rr.sqrt() <= stop {
                break;
            }
            let p = std::mem::take(&mut self.p);
            let mut kp = std::mem::take(&mut self.kp);
            self.apply(&p, &mut kp);
            let alpha = rr / dot(&p, &kp);
            for i in 0..x.len() {
                x[i] += alpha * p[i];
                self.r[i] -= alpha * kp[i];
            }
            let rr_next = dot(&self.r, &self.r);
            let ratio = rr_next / rr;
            let mut p = p;
            for (pi, &ri) in p.iter_mut().zip(&self.r) {
                *pi = ri + ratio * *pi;
            }
            self.p = p;
            self.kp = kp;
            rr = rr_next;
        }
    }
}

fn shrink(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// TV-regularized compressed-sensing reconstruction.
///
/// Starts from the zero-fill image. Running out of iterations is not an
/// error: the last iterate is returned with `converged = false`.
pub fn tv_reconstruct(
    meas: &[MeasurementRecord],
    dims: (usize, usize),
    params: &ReconParams,
) -> Result<ReconOutput> {
    params.validate()?;
    let layout = Layout::new(meas, dims)?;
    let (w, h, n) = (layout.width, layout.height, layout.n());
    let sqrt_n = (n as f64).sqrt();

    let zf = layout.zero_fill();
    let scale = match params.value_range {
        Some((lo, hi)) => hi.abs().max(lo.abs()),
        None => zf.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    };
    let scale = if scale > 0.0 { scale } else { 1.0 };

    // Orthonormal, intensity-normalized data: b = B / (√n · scale).
    let b: Vec<f64> = layout.values.iter().map(|v| v / (sqrt_n * scale)).collect();

    let (mu, beta) = (params.mu, params.beta);
    let rho = beta;

    let mut x: Vec<f64> = zf.iter().map(|v| v / scale).collect();
    let mut z = x.clone();
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    gradient(&x, w, h, &mut dx, &mut dy);
    let mut lam_x = vec![0.0; n];
    let mut lam_y = vec![0.0; n];
    let mut lam_z = vec![0.0; n];

    let mut solver = NormalSolver::new(w, h, beta, rho);
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut tmp_x = vec![0.0; n];
    let mut tmp_y = vec![0.0; n];
    let mut x_prev = x.clone();
    let mut wbuf = vec![0.0; n];
    let mut delta = vec![0.0; n];

    let mut iterations = 0;
    let mut converged = false;
    if layout.index.len() == n {
        // Every coefficient measured: the constraint set is a single point.
        converged = true;
    }
    while !converged && iterations < params.max_iterations {
        iterations += 1;
        x_prev.copy_from_slice(&x);

        // x-step
        for i in 0..n {
            tmp_x[i] = dx[i] - lam_x[i];
            tmp_y[i] = dy[i] - lam_y[i];
        }
        gradient_adjoint(&tmp_x, &tmp_y, w, h, &mut rhs);
        for i in 0..n {
            rhs[i] = beta * rhs[i] + rho * (z[i] - lam_z[i]);
        }
        solver.solve(&rhs, &mut x);

        // d-step
        gradient(&x, w, h, &mut gx, &mut gy);
        let t = 1.0 / beta;
        for i in 0..n {
            dx[i] = shrink(gx[i] + lam_x[i], t);
            dy[i] = shrink(gy[i] + lam_y[i], t);
        }

        // z-step: exact in the orthonormal spectral domain
        for i in 0..n {
            wbuf[i] = x[i] + lam_z[i];
        }
        let what = forward_2d(&wbuf, w, h);
        delta.iter_mut().for_each(|d| *d = 0.0);
        for (k, &i) in layout.index.iter().enumerate() {
            let wi = what[i] / sqrt_n;
            let zi = (mu * b[k] + rho * wi) / (mu + rho);
            delta[i] = zi - wi;
        }
        let corr = inverse_2d(&delta, w, h);
        for i in 0..n {
            z[i] = wbuf[i] + sqrt_n * corr[i];
        }

        // multipliers
        for i in 0..n {
            lam_x[i] += gx[i] - dx[i];
            lam_y[i] += gy[i] - dy[i];
            lam_z[i] += x[i] - z[i];
        }


        let change: f64 = x
            .iter()
            .zip(&x_prev)
            .map(|(a, p)| (a - p).powi(2))
            .sum::<f64>()
            .sqrt();
        let primal: f64 = (0..n)
            .map(|i| (gx[i] - dx[i]).powi(2) + (gy[i] - dy[i]).powi(2) + (x[i] - z[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        let size = norm(&x).max(f64::MIN_POSITIVE);
        if change / size < params.tolerance && primal / size < params.tolerance {
            converged = true;
            break;
        }
    }

    let mut out: Vec<f64> = x.iter().map(|v| v * scale).collect();
    let relative_residual = layout.relative_residual(&out);
    if let Some((lo, hi)) = params.value_range {
        for v in &mut out {
            *v = v.clamp(lo, hi);
        }
    }
    let peak = params.value_range.map_or(1.0, |r| r.1);
    let image = ImageBuffer::from_vec(w, h, out, peak)?;
    Ok(ReconOutput {
        image,
        report: ReconReport {
            method: "tv".into(),
            iterations,
            converged,
            relative_residual,
            params: Some(params.clone()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordering::SpectralCoord;

    #[test]
    fn gradient_adjoint_identity() {
        let (w, h) = (5, 3);
        let x: Vec<f64> = (0..15).map(|i| ((i * 7) % 11) as f64 - 4.0).collect();
        let px: Vec<f64> = (0..15).map(|i| ((i * 3) % 5) as f64 - 2.0).collect();
        let py: Vec<f64> = (0..15).map(|i| ((i * 5) % 7) as f64 - 3.0).collect();
        let (mut gx, mut gy) = (vec![0.0; 15], vec![0.0; 15]);
        gradient(&x, w, h, &mut gx, &mut gy);
        let mut adj = vec![0.0; 15];
        gradient_adjoint(&px, &py, w, h, &mut adj);
        let lhs = dot(&gx, &px) + dot(&gy, &py);
        let rhs = dot(&x, &adj);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn dc_only_constant_image() {
        let meas = vec![MeasurementRecord::new(SpectralCoord::DC, 7.0 * 64.0)];
        let img = zero_fill_reconstruct(&meas, (8, 8)).unwrap();
        assert!(img.as_slice().iter().all(|&v| (v - 7.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        let dup = vec![
            MeasurementRecord::new(SpectralCoord::DC, 1.0),
            MeasurementRecord::new(SpectralCoord::DC, 2.0),
        ];
        assert!(matches!(
            zero_fill_reconstruct(&dup, (4, 4)),
            Err(Error::DuplicateCoordinate { .. })
        ));
        let oob = vec![MeasurementRecord::new(SpectralCoord::new(4, 0), 1.0)];
        assert!(matches!(
            tv_reconstruct(&oob, (4, 4), &ReconParams::default()),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn params_validation() {
        let mut p = ReconParams::default();
        p.max_iterations = 0;
        assert!(p.validate().is_err());
        let mut p = ReconParams::default();
        p.mu = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let meas = vec![
            MeasurementRecord::new(SpectralCoord::DC, 100.0 * 64.0),
            MeasurementRecord::new(SpectralCoord::new(1, 0), 640.0),
            MeasurementRecord::new(SpectralCoord::new(3, 5), -900.0),
        ];
        let params = ReconParams {
            max_iterations: 1,
            tolerance: 1e-15,
            ..ReconParams::default()
        };
        let out = tv_reconstruct(&meas, (8, 8), &params).unwrap();
        assert_eq!(out.report.iterations, 1);
        assert!(!out.report.converged);
        assert!(out.image.is_finite());
    }
}
