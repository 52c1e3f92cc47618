//! Channel synthesis under motion, the unitary beam codebook, and UPA
//! steering vectors.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::scenario::SPEED_OF_LIGHT;

/// Per-packet velocity along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityTrace {
    samples: Vec<f64>,
    packet_rate: f64,
}

impl VelocityTrace {
    pub fn new(samples: Vec<f64>, packet_rate: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain(format!(
                "velocity trace needs at least 2 packets, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "velocity trace contains non-finite samples".into(),
            ));
        }
        if !(packet_rate > 0.0 && packet_rate.is_finite()) {
            return Err(Error::Domain(format!(
                "packet rate must be positive, got {packet_rate}"
            )));
        }
        Ok(Self {
            samples,
            packet_rate,
        })
    }

    pub fn constant(velocity: f64, packets: usize, packet_rate: f64) -> Result<Self> {
        Self::new(vec![velocity; packets], packet_rate)
    }

    /// Starts at rest and accelerates uniformly: v(k) = k a / R_p.
    pub fn accelerating(acceleration: f64, packets: usize, packet_rate: f64) -> Result<Self> {
        let samples = (0..packets)
            .map(|k| k as f64 * acceleration / packet_rate)
            .collect();
        Self::new(samples, packet_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn packet_rate(&self) -> f64 {
        self.packet_rate
    }

    /// Mean velocity over the observation.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Complex channel samples, packet-major, with an optional antenna axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CfrRecord {
    samples: Vec<Complex64>,
    antennas: Option<usize>,
    snr_db: Option<f64>,
}

impl CfrRecord {
    /// Single-stream record (one sample per packet).
    pub fn scalar(samples: Vec<Complex64>, snr_db: Option<f64>) -> Self {
        Self {
            samples,
            antennas: None,
            snr_db,
        }
    }

    /// One snapshot of `antennas` entries per packet.
    pub fn per_antenna(
        snapshots: &[Vec<Complex64>],
        antennas: usize,
        snr_db: Option<f64>,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(snapshots.len() * antennas);
        for snap in snapshots {
            if snap.len() != antennas {
                return Err(Error::DimensionMismatch {
                    expected: antennas,
                    actual: snap.len(),
                });
            }
            samples.extend_from_slice(snap);
        }
        Ok(Self {
            samples,
            antennas: Some(antennas),
            snr_db,
        })
    }

    pub fn num_packets(&self) -> usize {
        self.samples.len() / self.antennas.unwrap_or(1)
    }

    pub fn antennas(&self) -> Option<usize> {
        self.antennas
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }

    /// All samples of packet `k` (length 1 for scalar records).
    pub fn packet(&self, k: usize) -> &[Complex64] {
        let width = self.antennas.unwrap_or(1);
        &self.samples[k * width..(k + 1) * width]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn snapshots(&self) -> Vec<Vec<Complex64>> {
        (0..self.num_packets())
            .map(|k| self.packet(k).to_vec())
            .collect()
    }

    pub fn conjugated(&self) -> Self {
        Self {
            samples: self.samples.iter().map(|z| z.conj()).collect(),
            ..self.clone()
        }
    }

    /// Whitespace-separated columns: packet, real, imaginary[, antenna].
    pub fn write_columns<W: Write>(&self, mut out: W) -> Result<()> {
        match self.antennas {
            None => {
                writeln!(out, "# packet real imag")?;
                for (k, z) in self.samples.iter().enumerate() {
                    writeln!(out, "{k} {:e} {:e}", z.re, z.im)?;
                }
            }
            Some(width) => {
                writeln!(out, "# packet real imag antenna")?;
                for (i, z) in self.samples.iter().enumerate() {
                    writeln!(out, "{} {:e} {:e} {}", i / width, z.re, z.im, i % width)?;
                }
            }
        }
        Ok(())
    }
}

/// Noise variance per complex sample for a given SNR and channel gain.
pub fn noise_variance(alpha: Complex64, snr_db: f64) -> f64 {
    alpha.norm_sqr() / 10f64.powf(snr_db / 10.0)
}

/// Normalized Doppler frequency in cycles/packet for velocity `v`.
pub fn doppler_frequency(velocity: f64, carrier_freq: f64, packet_rate: f64) -> f64 {
    carrier_freq * velocity / (SPEED_OF_LIGHT * packet_rate)
}

/// Synthesize H(k) = alpha * exp(-j 2 pi f0 sum_{i<=k} v(i) / (c R_p)) plus
/// circular Gaussian noise at `snr_db` (`None` = noiseless).
pub fn synth_cfr_with<R: Rng + ?Sized>(
    trace: &VelocityTrace,
    alpha: Complex64,
    carrier_freq: f64,
    snr_db: Option<f64>,
    rng: &mut R,
) -> CfrRecord {
    let scale = -2.0 * PI * carrier_freq / (SPEED_OF_LIGHT * trace.packet_rate());
    let variance = snr_db.map(|snr| noise_variance(alpha, snr));
    let mut displacement = 0.0;
    let samples = trace
        .samples()
        .iter()
        .map(|v| {
            displacement += v;
            let clean = alpha * Complex64::from_polar(1.0, scale * displacement);
            match variance {
                Some(var) => clean + rng::complex_gaussian(rng, var),
                None => clean,
            }
        })
        .collect();
    CfrRecord::scalar(samples, snr_db)
}

pub fn synth_cfr(
    trace: &VelocityTrace,
    alpha: Complex64,
    carrier_freq: f64,
    snr_db: Option<f64>,
    seed: u64,
) -> CfrRecord {
    synth_cfr_with(trace, alpha, carrier_freq, snr_db, &mut rng::seeded(seed))
}

/// Unitary beam codebook; rows are beam weight vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamCodebook {
    matrix: DMatrix<Complex64>,
}

impl BeamCodebook {
    pub const UNITARY_TOL: f64 = 1e-12;

    /// Checks B B^H = I elementwise.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        let gram = &matrix * matrix.adjoint();
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - target).norm() > Self::UNITARY_TOL {
                    return Err(Error::Domain(format!(
                        "codebook is not unitary at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    /// Unitary DFT matrix of size `n`.
    pub fn dft(n: usize) -> Self {
        let norm = 1.0 / (n as f64).sqrt();
        let matrix = DMatrix::from_fn(n, n, |k, i| {
            Complex64::from_polar(norm, -2.0 * PI * ((k * i) % n) as f64 / n as f64)
        });
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: len,
            });
        }
        Ok(())
    }
}

fn mat_vec(m: &DMatrix<Complex64>, x: &[Complex64], adjoint: bool) -> Vec<Complex64> {
    let n = m.nrows();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if adjoint {
                        m[(j, i)].conj() * x[j]
                    } else {
                        m[(i, j)] * x[j]
                    }
                })
                .sum()
        })
        .collect()
}

/// Beam-domain measurements B (H + n), n ~ CN(0, sigma^2 I).
pub fn apply_codebook_with<R: Rng + ?Sized>(
    per_antenna: &[Complex64],
    codebook: &BeamCodebook,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    codebook.check_len(per_antenna.len())?;
    let variance = noise_sigma * noise_sigma;
    let noisy: Vec<Complex64> = if variance > 0.0 {
        per_antenna
            .iter()
            .map(|h| h + rng::complex_gaussian(rng, variance))
            .collect()
    } else {
        per_antenna.to_vec()
    };
    Ok(mat_vec(codebook.matrix(), &noisy, false))
}

pub fn apply_codebook(
    per_antenna: &[Complex64],
    codebook: &BeamCodebook,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    apply_codebook_with(per_antenna, codebook, noise_sigma, &mut rng::seeded(seed))
}

/// Per-antenna channel estimate B^H y.
pub fn invert_codebook(
    beam_measurements: &[Complex64],
    codebook: &BeamCodebook,
) -> Result<Vec<Complex64>> {
    codebook.check_len(beam_measurements.len())?;
    Ok(mat_vec(codebook.matrix(), beam_measurements, true))
}

/// UPA steering vector. Index `n * rows + m` holds Omega^m Phi^n with
/// Omega = exp(-j pi sin(theta) cos(phi)), Phi = exp(-j pi sin(theta) sin(phi)).
pub fn steering_vector_2d(theta: f64, phi: f64, rows: usize, cols: usize) -> Vec<Complex64> {
    let (t, p) = (theta.to_radians(), phi.to_radians());
    let u = PI * t.sin() * p.cos();
    let v = PI * t.sin() * p.sin();
    let mut out = Vec::with_capacity(rows * cols);
    for n in 0..cols {
        for m in 0..rows {
            out.push(Complex64::from_polar(1.0, -(u * m as f64 + v * n as f64)));
        }
    }
    out
}

/// Roll steering vector: `cols` copies of [1, Gamma, .., Gamma^(rows-1)],
/// Gamma = exp(-j pi sin(gamma)).
pub fn steering_vector_roll(gamma: f64, rows: usize, cols: usize) -> Vec<Complex64> {
    let w = PI * gamma.to_radians().sin();
    let block: Vec<Complex64> = (0..rows)
        .map(|m| Complex64::from_polar(1.0, -w * m as f64))
        .collect();
    block.iter().copied().cycle().take(rows * cols).collect()
}
