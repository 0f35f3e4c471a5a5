//! Reproducible random streams and the random matrix ensembles used by
//! the experiments.
//!
//! Streams are ChaCha8 keyed by `seed` with the 64-bit ChaCha stream
//! selector set to `stream`, so `(seed, stream)` fixes the whole draw
//! sequence independently of how many threads run trials. Gaussians come
//! from the Box–Muller transform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CurError, Result};
use crate::linalg::{singular_values, Matrix};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    core: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut core = ChaCha8Rng::seed_from_u64(seed);
        core.set_stream(stream);
        RngStream {
            seed,
            stream,
            core,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Independent stream for a named sub-task (`lane`) of the same trial.
    pub fn fork(&self, lane: u64) -> RngStream {
        RngStream::new(splitmix64(self.seed ^ splitmix64(lane.wrapping_add(0x5EED))), self.stream)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.core.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// `rows × cols` matrix of i.i.d. standard normals, filled row by row.
    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| self.normal()).collect();
        Matrix::from_row_slice(rows, cols, &data)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Rank-`k` matrix `G₁·G₂` with standard Gaussian factors (`m × k`, `k × n`).
///
/// With `normalize_spectral` the result is scaled to `‖A‖₂ = 1`; the norm is
/// read off the `k × k` product of the factors' triangular QR parts, so no
/// `m × n` decomposition is needed.
pub fn gen_lowrank(m: usize, n: usize, k: usize, rng: &mut RngStream, normalize_spectral: bool) -> Result<Matrix> {
    if k == 0 || k > m.min(n) {
        return Err(CurError::domain(format!("rank {k} outside 1..={} for {m}x{n}", m.min(n))));
    }
    let mut left = rng.gaussian_matrix(m, k);
    let right = rng.gaussian_matrix(k, n);
    if normalize_spectral {
        let r_left = left.clone().qr().r();
        let r_right = right.transpose().qr().r();
        let core = r_left * r_right.transpose();
        let top = singular_values(&core)?[0];
        left /= top;
    }
    Ok(left * right)
}

/// i.i.d. `N(0, sigma²)` entries; with `normalize_spectral_to = Some(s)` the
/// draw is rescaled so that `‖E‖₂ = s`.
pub fn gen_noise(
    m: usize,
    n: usize,
    sigma: f64,
    rng: &mut RngStream,
    normalize_spectral_to: Option<f64>,
) -> Result<Matrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(CurError::domain(format!("noise level must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(Matrix::zeros(m, n));
    }
    let mut e = rng.gaussian_matrix(m, n) * sigma;
    if let Some(target) = normalize_spectral_to {
        if !(target >= 0.0 && target.is_finite()) {
            return Err(CurError::domain(format!("spectral target must be finite and >= 0, got {target}")));
        }
        let top = singular_values(&e)?[0];
        e *= target / top;
    }
    Ok(e)
}
