//! MUSIC: covariance estimation, noise-subspace extraction, pseudospectrum
//! evaluation and peak search for Doppler frequency, 2D angle of arrival,
//! and roll.
//!
//! All estimators assume a single dominant source. With one source the
//! noise projector is `I - u u^H` for the principal eigenvector `u`, which
//! lets the grid searches run in O(m) per point instead of O(m^2).

use std::f64::consts::PI;
use std::io::Write;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen, HermitianOperator};
use crate::signalmodel::{steering_vector_2d, steering_vector_roll, CfrRecord};

/// Number of sources assumed by every estimator in this crate.
pub const NUM_SOURCES: usize = 1;

/// Frequency grid spacing is 1 / (FREQ_OVERSAMPLING * K) cycles/packet.
pub const FREQ_OVERSAMPLING: usize = 8;

/// Coarse grid step for angle searches, degrees.
pub const ANGLE_GRID_STEP: f64 = 0.2;

/// Elevation below which azimuth is reported as unidentifiable, degrees.
pub const DEGENERATE_ELEVATION: f64 = ANGLE_GRID_STEP / 2.0;

/// Sample covariance of the received signal.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    matrix: DMatrix<Complex64>,
    snapshots: usize,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    /// Largest elementwise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Forward-backward averaged covariance over all length-`window`
/// subvectors of `samples`.
pub fn covariance_from_sliding_window(
    samples: &[Complex64],
    window: usize,
) -> Result<CovarianceMatrix> {
    let k = samples.len();
    if window < 2 || window > k / 2 {
        return Err(Error::Domain(format!(
            "window {window} outside [2, K/2] for K = {k}"
        )));
    }
    let m = window;
    let l = k - m + 1;
    let inv_l = 1.0 / l as f64;
    let mut fwd = DMatrix::<Complex64>::zeros(m, m);
    // First row directly, the rest of the upper triangle by sliding each
    // diagonal one step: R[i][j] = R[i-1][j-1] + (y[i+l-1] y*[j+l-1] - y[i-1] y*[j-1]) / l.
    for j in 0..m {
        let acc: Complex64 = (0..l).map(|t| samples[t] * samples[t + j].conj()).sum();
        fwd[(0, j)] = acc * inv_l;
    }
    for i in 1..m {
        for j in i..m {
            let add = samples[i + l - 1] * samples[j + l - 1].conj();
            let sub = samples[i - 1] * samples[j - 1].conj();
            fwd[(i, j)] = fwd[(i - 1, j - 1)] + (add - sub) * inv_l;
        }
    }
    for i in 0..m {
        fwd[(i, i)] = Complex64::new(fwd[(i, i)].re, 0.0);
        for j in 0..i {
            fwd[(i, j)] = fwd[(j, i)].conj();
        }
    }
    let fb = DMatrix::from_fn(m, m, |i, j| {
        (fwd[(i, j)] + fwd[(m - 1 - i, m - 1 - j)].conj()) * 0.5
    });
    Ok(CovarianceMatrix {
        matrix: fb,
        snapshots: l,
    })
}

/// The forward-backward sliding-window covariance as an operator. Products
/// are computed with FFT correlations in O(K log K) instead of O(m^2).
pub struct SlidingWindowOperator {
    window: usize,
    snapshots: usize,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Spectra of conj(s) and s for the forward and backward sequences.
    conj_spectra: [Vec<Complex64>; 2],
    spectra: [Vec<Complex64>; 2],
}

impl SlidingWindowOperator {
    pub fn new(samples: &[Complex64], window: usize) -> Result<Self> {
        let k = samples.len();
        if window < 2 || window > k / 2 {
            return Err(Error::Domain(format!(
                "window {window} outside [2, K/2] for K = {k}"
            )));
        }
        let size = (k + window).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let backward: Vec<Complex64> = samples.iter().rev().map(|z| z.conj()).collect();
        let spectrum = |seq: &[Complex64], conj: bool| {
            let mut buf: Vec<Complex64> = seq
                .iter()
                .map(|z| if conj { z.conj() } else { *z })
                .collect();
            buf.resize(size, Complex64::new(0.0, 0.0));
            forward.process(&mut buf);
            buf
        };
        let conj_spectra = [spectrum(samples, true), spectrum(&backward, true)];
        let spectra = [spectrum(samples, false), spectrum(&backward, false)];
        Ok(Self {
            window,
            snapshots: k - window + 1,
            size,
            forward,
            inverse,
            conj_spectra,
            spectra,
        })
    }
}

impl HermitianOperator for SlidingWindowOperator {
    fn dim(&self) -> usize {
        self.window
    }

    fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let (m, l, n) = (self.window, self.snapshots, self.size);
        let zero = Complex64::new(0.0, 0.0);
        // c_t = sum_i conj(s[t + i]) x[i] is entry t + m - 1 of conj(s) * reverse(x).
        let mut xr = vec![zero; n];
        for i in 0..m {
            xr[i] = x[m - 1 - i];
        }
        self.forward.process(&mut xr);
        let mut acc = vec![zero; n];
        for d in 0..2 {
            let mut c: Vec<Complex64> = xr
                .iter()
                .zip(&self.conj_spectra[d])
                .map(|(a, b)| a * b)
                .collect();
            self.inverse.process(&mut c);
            // out_i = sum_t s[i + t] c_t is entry i + l - 1 of s * reverse(c).
            let mut cr = vec![zero; n];
            for t in 0..l {
                cr[t] = c[l - 1 - t + m - 1];
            }
            self.forward.process(&mut cr);
            for ((a, b), s) in acc.iter_mut().zip(&cr).zip(&self.spectra[d]) {
                *a += b * s;
            }
        }
        self.inverse.process(&mut acc);
        // Both FFT round trips are unnormalized.
        let scale = 0.5 / (l as f64 * (n * n) as f64);
        DVector::from_fn(m, |i, _| acc[i + l - 1] * scale)
    }
}

/// Sample mean of y y^H over antenna-domain snapshots.
pub fn covariance_from_snapshots(snapshots: &[Vec<Complex64>]) -> Result<CovarianceMatrix> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::Domain("need at least one snapshot".into()))?;
    let m = first.len();
    if m == 0 {
        return Err(Error::Domain("snapshots must be non-empty".into()));
    }
    let mut acc = DMatrix::<Complex64>::zeros(m, m);
    for snap in snapshots {
        if snap.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: snap.len(),
            });
        }
        for i in 0..m {
            for j in i..m {
                acc[(i, j)] += snap[i] * snap[j].conj();
            }
        }
    }
    let scale = 1.0 / snapshots.len() as f64;
    for i in 0..m {
        acc[(i, i)] = Complex64::new(acc[(i, i)].re * scale, 0.0);
        for j in (i + 1)..m {
            acc[(i, j)] *= scale;
            acc[(j, i)] = acc[(i, j)].conj();
        }
    }
    Ok(CovarianceMatrix {
        matrix: acc,
        snapshots: snapshots.len(),
    })
}

/// Eigenvectors of the `m - p` smallest eigenvalues, plus the complementary
/// signal basis.
#[derive(Debug, Clone)]
pub struct NoiseSubspace {
    basis: DMatrix<Complex64>,
    signal: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
}

impl NoiseSubspace {
    /// m x (m - p), orthonormal columns.
    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    /// m x p, the dominant eigenvectors.
    pub fn signal_basis(&self) -> &DMatrix<Complex64> {
        &self.signal
    }

    /// All eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// ||U_n^H a||.
    pub fn projection_norm(&self, steering: &[Complex64]) -> Result<f64> {
        Ok(self.quadratic_form(steering)?.sqrt())
    }

    /// a^H U_n U_n^H a.
    pub fn quadratic_form(&self, steering: &[Complex64]) -> Result<f64> {
        if steering.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: steering.len(),
            });
        }
        let mut total = 0.0;
        for c in 0..self.basis.ncols() {
            let dot: Complex64 = self
                .basis
                .column(c)
                .iter()
                .zip(steering)
                .map(|(u, a)| u.conj() * a)
                .sum();
            total += dot.norm_sqr();
        }
        Ok(total)
    }
}

pub fn noise_subspace(cov: &CovarianceMatrix, num_sources: usize) -> Result<NoiseSubspace> {
    let m = cov.dim();
    if num_sources == 0 || num_sources >= m {
        return Err(Error::Domain(format!(
            "source count {num_sources} must lie in [1, {m})"
        )));
    }
    let HermitianEigen { values, vectors } = linalg::hermitian_eigen(cov.matrix())?;
    Ok(NoiseSubspace {
        basis: vectors.columns(num_sources, m - num_sources).into_owned(),
        signal: vectors.columns(0, num_sources).into_owned(),
        eigenvalues: values,
    })
}

/// 1 / (a^H U_n U_n^H a) sampled on a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSpectrum<X> {
    pub grid: Vec<X>,
    pub values: Vec<f64>,
}

impl<X: Copy> PseudoSpectrum<X> {
    /// Grid point with the largest value.
    pub fn peak(&self) -> Option<(X, f64)> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (self.grid[i], *v))
    }
}

impl PseudoSpectrum<f64> {
    /// Two columns: parameter, value.
    pub fn write_columns<W: Write>(&self, mut out: W) -> Result<()> {
        for (x, v) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{x:e} {v:e}")?;
        }
        Ok(())
    }
}

impl PseudoSpectrum<(f64, f64)> {
    /// Three columns: theta, phi, value.
    pub fn write_columns<W: Write>(&self, mut out: W) -> Result<()> {
        for ((a, b), v) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{a:e} {b:e} {v:e}")?;
        }
        Ok(())
    }
}

// Keeps the spectrum finite where the steering vector lies in the signal
// subspace to machine precision.
const DENOMINATOR_FLOOR: f64 = 1e-300;

pub fn pseudospectrum<X, F>(
    noise: &NoiseSubspace,
    steering: F,
    grid: &[X],
) -> Result<PseudoSpectrum<X>>
where
    X: Copy,
    F: Fn(X) -> Vec<Complex64>,
{
    let values = grid
        .iter()
        .map(|&x| {
            noise
                .quadratic_form(&steering(x))
                .map(|d| 1.0 / d.max(DENOMINATOR_FLOOR))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoSpectrum {
        grid: grid.to_vec(),
        values,
    })
}

/// Iterated three-point parabolic refinement of a smooth minimum.
///
/// `f` is sampled at `x - h, x, x + h`; the stencil walks downhill until the
/// centre is the lowest point, then jumps to the parabola vertex and
/// shrinks. Stops once the step drops below `tol`.
fn refine_minimum<F: Fn(f64) -> f64>(f: F, mut x: f64, mut h: f64, tol: f64) -> f64 {
    let mut f0 = f(x);
    for _ in 0..400 {
        if h < tol {
            break;
        }
        let fm = f(x - h);
        let fp = f(x + h);
        if fm < f0 && fm <= fp {
            x -= h;
            f0 = fm;
            continue;
        }
        if fp < f0 {
            x += h;
            f0 = fp;
            continue;
        }
        let curvature = fm - 2.0 * f0 + fp;
        if curvature > 0.0 {
            let step = (0.5 * h * (fm - fp) / curvature).clamp(-h, h);
            let candidate = x + step;
            let fc = f(candidate);
            if fc <= f0 {
                x = candidate;
                f0 = fc;
            }
        }
        h *= 0.25;
    }
    x
}

/// Options for Doppler frequency estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimator {
    /// Covariance window; `None` selects floor(K/2).
    pub window: Option<usize>,
    pub oversampling: usize,
}

impl Default for FrequencyEstimator {
    fn default() -> Self {
        Self {
            window: None,
            oversampling: FREQ_OVERSAMPLING,
        }
    }
}

fn wrap_frequency(f: f64) -> f64 {
    let w = f - (f + 0.5).floor();
    if w >= 0.5 {
        w - 1.0
    } else {
        w
    }
}

impl FrequencyEstimator {
    /// Normalized frequency f_d in [-0.5, 0.5) of the model
    /// H(k) ~ exp(-j 2 pi f_d k).
    pub fn estimate(&self, samples: &[Complex64]) -> Result<f64> {
        let k = samples.len();
        let m = self.window.unwrap_or(k / 2);
        if m < 2 || k < 2 * m {
            return Err(Error::Domain(format!(
                "need K >= 2m with m >= 2, got K = {k}, m = {m}"
            )));
        }
        let top = if m <= linalg::DENSE_EIGEN_LIMIT {
            let cov = covariance_from_sliding_window(samples, m)?;
            linalg::dominant_eigenpairs(cov.matrix(), NUM_SOURCES)?
        } else {
            linalg::lanczos(&SlidingWindowOperator::new(samples, m)?, NUM_SOURCES)?
        };
        let u: Vec<Complex64> = top.vectors.column(0).iter().copied().collect();

        // |a(f)^H u|^2 on the grid g / G equals |FFT(conj(u))[g]|^2.
        let g = (self.oversampling.max(1) * k).max(m);
        let mut buf: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
        buf.resize(g, Complex64::new(0.0, 0.0));
        FftPlanner::new().plan_fft_forward(g).process(&mut buf);
        let best = buf
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let coarse = best as f64 / g as f64;

        let mf = m as f64;
        let denominator = |f: f64| {
            let step = Complex64::from_polar(1.0, 2.0 * PI * f);
            let mut phase = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for z in &u {
                acc += phase * z;
                phase *= step;
            }
            mf - acc.norm_sqr()
        };
        let refined = refine_minimum(denominator, coarse, 1.0 / g as f64, 1e-13);
        Ok(wrap_frequency(refined))
    }
}

/// Doppler frequency of a scalar record with the default estimator.
pub fn estimate_frequency(record: &CfrRecord, window: Option<usize>) -> Result<f64> {
    if record.antennas().is_some() {
        return Err(Error::Domain(
            "frequency estimation expects a scalar record".into(),
        ));
    }
    FrequencyEstimator {
        window,
        ..Default::default()
    }
    .estimate(record.samples())
}

/// Temporal steering vector [1, e^{-j 2 pi f}, ..].
pub fn frequency_steering(f: f64, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|i| Complex64::from_polar(1.0, -2.0 * PI * f * i as f64))
        .collect()
}

/// Estimated direction of the dominant source, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoaEstimate {
    pub theta: f64,
    pub phi: f64,
    /// False when the elevation is so close to broadside that the steering
    /// vector no longer depends on azimuth; `phi` is then arbitrary.
    pub azimuth_identifiable: bool,
}

fn principal_vector(snapshots: &[Vec<Complex64>], expected_dim: usize) -> Result<Vec<Complex64>> {
    for s in snapshots {
        if s.len() != expected_dim {
            return Err(Error::DimensionMismatch {
                expected: expected_dim,
                actual: s.len(),
            });
        }
    }
    let cov = covariance_from_snapshots(snapshots)?;
    let top = linalg::dominant_eigenpairs(cov.matrix(), NUM_SOURCES)?;
    Ok(top.vectors.column(0).iter().copied().collect())
}

/// ||a||^2 - |a^H u|^2 for the UPA steering vector, with `u` unit-norm.
fn upa_denominator(u: &[Complex64], rows: usize, cols: usize, theta: f64, phi: f64) -> f64 {
    let (t, p) = (theta.to_radians(), phi.to_radians());
    let step_m = Complex64::from_polar(1.0, PI * t.sin() * p.cos());
    let step_n = Complex64::from_polar(1.0, PI * t.sin() * p.sin());
    let mut outer = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..cols {
        let mut inner = Complex64::new(0.0, 0.0);
        let mut phase = outer;
        for m in 0..rows {
            inner += phase * u[n * rows + m];
            phase *= step_m;
        }
        acc += inner;
        outer *= step_n;
    }
    (rows * cols) as f64 - acc.norm_sqr()
}

/// Joint refinement of a 2D minimum from a 3x3 stencil: Newton step from
/// finite-difference gradient and Hessian, clamped to the stencil, falling
/// back to per-axis parabolic steps when the Hessian is not positive definite.
fn refine_minimum_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    mut x: f64,
    mut y: f64,
    mut h: f64,
    tol: f64,
) -> (f64, f64) {
    let mut f0 = f(x, y);
    for _ in 0..400 {
        if h < tol {
            break;
        }
        let fxm = f(x - h, y);
        let fxp = f(x + h, y);
        let fym = f(x, y - h);
        let fyp = f(x, y + h);
        // Walk downhill first.
        let (mut bx, mut by, mut bf) = (x, y, f0);
        for (cx, cy, cf) in [
            (x - h, y, fxm),
            (x + h, y, fxp),
            (x, y - h, fym),
            (x, y + h, fyp),
        ] {
            if cf < bf {
                (bx, by, bf) = (cx, cy, cf);
            }
        }
        if bf < f0 {
            (x, y, f0) = (bx, by, bf);
            continue;
        }
        let fpp = f(x + h, y + h);
        let fpm = f(x + h, y - h);
        let fmp = f(x - h, y + h);
        let fmm = f(x - h, y - h);
        let gx = (fxp - fxm) / (2.0 * h);
        let gy = (fyp - fym) / (2.0 * h);
        let hxx = (fxp - 2.0 * f0 + fxm) / (h * h);
        let hyy = (fyp - 2.0 * f0 + fym) / (h * h);
        let hxy = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        let det = hxx * hyy - hxy * hxy;
        let (dx, dy) = if hxx > 0.0 && det > 0.0 {
            (
                (-(hyy * gx - hxy * gy) / det),
                (-(hxx * gy - hxy * gx) / det),
            )
        } else {
            let dx = if hxx > 0.0 { -gx / hxx } else { 0.0 };
            let dy = if hyy > 0.0 { -gy / hyy } else { 0.0 };
            (dx, dy)
        };
        let (cx, cy) = (x + dx.clamp(-h, h), y + dy.clamp(-h, h));
        let fc = f(cx, cy);
        if fc <= f0 {
            (x, y, f0) = (cx, cy, fc);
        }
        h *= 0.25;
    }
    (x, y)
}

fn wrap_degrees(angle: f64) -> f64 {
    let w = (angle + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Best point of the 0.2 degree (theta, phi) grid, scanned exhaustively.
#[cfg(test)]
fn exhaustive_grid_minimum<F: Fn(f64, f64) -> f64>(f: &F) -> (f64, f64, f64) {
    let n_theta = (90.0 / ANGLE_GRID_STEP).round() as i64;
    let n_phi = (360.0 / ANGLE_GRID_STEP).round() as i64;
    let mut best = (0.0, -180.0, f64::INFINITY);
    for it in 0..n_theta {
        let theta = it as f64 * ANGLE_GRID_STEP;
        // Broadside: the steering vector does not depend on azimuth.
        let phis = if it == 0 { 1 } else { n_phi };
        for ip in 0..phis {
            let phi = -180.0 + ip as f64 * ANGLE_GRID_STEP;
            let d = f(theta, phi);
            if d < best.2 {
                best = (theta, phi, d);
            }
        }
    }
    best
}

const SCOUT_STEP: f64 = 1.0;
const SCOUT_CANDIDATES: usize = 3;

/// Same 0.2 degree grid as `exhaustive_grid_minimum`, visited only within
/// one scout step of the best local minima of a 1 degree scout grid. The
/// pseudospectrum of a small array varies over tens of degrees, so the
/// global grid minimum always lies inside one of these patches.
fn grid_minimum<F: Fn(f64, f64) -> f64>(f: &F) -> (f64, f64, f64) {
    let nt = (90.0 / SCOUT_STEP).round() as usize;
    let np = (360.0 / SCOUT_STEP).round() as usize;
    let scout: Vec<f64> = (0..nt * np)
        .map(|i| {
            f(
                (i / np) as f64 * SCOUT_STEP,
                -180.0 + (i % np) as f64 * SCOUT_STEP,
            )
        })
        .collect();
    let at = |t: isize, p: isize| -> f64 {
        let t = t.clamp(0, nt as isize - 1) as usize;
        scout[t * np + p.rem_euclid(np as isize) as usize]
    };
    let mut minima: Vec<(f64, usize, usize)> = Vec::new();
    for t in 0..nt {
        for p in 0..np {
            let v = scout[t * np + p];
            let is_min = (-1..=1)
                .flat_map(|dt| (-1..=1).map(move |dp| (dt, dp)))
                .filter(|&d| d != (0, 0))
                .all(|(dt, dp)| v <= at(t as isize + dt, p as isize + dp));
            if is_min {
                minima.push((v, t, p));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ratio = (SCOUT_STEP / ANGLE_GRID_STEP).round() as i64;
    let n_theta = (90.0 / ANGLE_GRID_STEP).round() as i64;
    let n_phi = (360.0 / ANGLE_GRID_STEP).round() as i64;
    let mut best = (0.0, -180.0, f64::INFINITY);
    for &(_, t, p) in minima.iter().take(SCOUT_CANDIDATES) {
        let (ct, cp) = (t as i64 * ratio, p as i64 * ratio);
        for it in (ct - ratio).max(0)..=(ct + ratio).min(n_theta - 1) {
            let theta = it as f64 * ANGLE_GRID_STEP;
            for ip in (cp - ratio)..=(cp + ratio) {
                let phi = -180.0 + ip.rem_euclid(n_phi) as f64 * ANGLE_GRID_STEP;
                let d = f(theta, phi);
                if d < best.2 {
                    best = (theta, phi, d);
                }
            }
        }
    }
    best
}

/// 2D MUSIC over elevation [0, 90) and azimuth [-180, 180) degrees.
pub fn estimate_aoa_2d(
    snapshots: &[Vec<Complex64>],
    rows: usize,
    cols: usize,
) -> Result<AoaEstimate> {
    let u = principal_vector(snapshots, rows * cols)?;
    let denominator = |t: f64, p: f64| upa_denominator(&u, rows, cols, t, p);
    let best = grid_minimum(&denominator);
    let (theta, phi) = refine_minimum_2d(denominator, best.0, best.1, ANGLE_GRID_STEP, 1e-9);
    // Negative elevation is the same direction with azimuth turned by 180.
    let (theta, phi) = if theta < 0.0 {
        (-theta, phi + 180.0)
    } else {
        (theta, phi)
    };
    let theta = theta.min(90.0 - 1e-12);
    Ok(AoaEstimate {
        theta,
        phi: wrap_degrees(phi),
        azimuth_identifiable: theta >= DEGENERATE_ELEVATION,
    })
}

fn roll_denominator(u: &[Complex64], rows: usize, cols: usize, gamma: f64) -> f64 {
    let step = Complex64::from_polar(1.0, PI * gamma.to_radians().sin());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut phase = Complex64::new(1.0, 0.0);
    for m in 0..rows {
        let column_sum: Complex64 = (0..cols).map(|n| u[n * rows + m]).sum();
        acc += phase * column_sum;
        phase *= step;
    }
    (rows * cols) as f64 - acc.norm_sqr()
}

/// 1D MUSIC for roll over (-90, 90) degrees.
pub fn estimate_roll(snapshots: &[Vec<Complex64>], rows: usize, cols: usize) -> Result<f64> {
    let u = principal_vector(snapshots, rows * cols)?;
    let half = (90.0 / ANGLE_GRID_STEP).round() as i64;
    let coarse = (-(half - 1)..half)
        .map(|i| i as f64 * ANGLE_GRID_STEP)
        .min_by(|a, b| {
            roll_denominator(&u, rows, cols, *a).total_cmp(&roll_denominator(&u, rows, cols, *b))
        })
        .unwrap_or(0.0);
    let gamma = refine_minimum(
        |g| roll_denominator(&u, rows, cols, g),
        coarse,
        ANGLE_GRID_STEP,
        1e-9,
    );
    Ok(gamma.clamp(-90.0 + 1e-9, 90.0 - 1e-9))
}

/// Convenience: pseudospectrum of a scalar record over normalized frequency.
pub fn frequency_pseudospectrum(
    samples: &[Complex64],
    window: usize,
    grid: &[f64],
) -> Result<PseudoSpectrum<f64>> {
    let cov = covariance_from_sliding_window(samples, window)?;
    let noise = noise_subspace(&cov, NUM_SOURCES)?;
    pseudospectrum(&noise, |f| frequency_steering(f, window), grid)
}

/// Convenience: 2D angular pseudospectrum of antenna snapshots.
pub fn angle_pseudospectrum(
    snapshots: &[Vec<Complex64>],
    rows: usize,
    cols: usize,
    grid: &[(f64, f64)],
) -> Result<PseudoSpectrum<(f64, f64)>> {
    let cov = covariance_from_snapshots(snapshots)?;
    let noise = noise_subspace(&cov, NUM_SOURCES)?;
    pseudospectrum(&noise, |(t, p)| steering_vector_2d(t, p, rows, cols), grid)
}

pub fn roll_pseudospectrum(
    snapshots: &[Vec<Complex64>],
    rows: usize,
    cols: usize,
    grid: &[f64],
) -> Result<PseudoSpectrum<f64>> {
    let cov = covariance_from_snapshots(snapshots)?;
    let noise = noise_subspace(&cov, NUM_SOURCES)?;
    pseudospectrum(&noise, |g| steering_vector_roll(g, rows, cols), grid)
}

/// Smallest-to-largest eigenvalue ratio helper used by diagnostics.
pub fn eigenvalue_spread(cov: &CovarianceMatrix) -> Result<(f64, f64)> {
    let eig = linalg::hermitian_eigen(cov.matrix())?;
    Ok((eig.values[0], *eig.values.last().unwrap_or(&0.0)))
}
