//! Qubit states in Bloch form, expectation/variance evaluation, and two
//! independent samplers for the measure induced by partial-tracing
//! Haar-random pure states on a two-qubit system.

use num_complex::Complex64;
use rand::Rng;

use crate::numeric::{self, Vec3};
use crate::observables::QubitObservable;
use crate::{Error, Result};

/// A qubit density matrix `rho = (I + r.sigma)/2` stored as its Bloch
/// vector; `|r| <= 1`, with equality exactly for pure states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    r: Vec3,
}

impl BlochState {
    /// Validates positivity: `|r| <= 1 + 1e-12`.
    pub fn new(r: Vec3) -> Result<Self> {
        let n = numeric::norm3(r);
        if n > 1.0 + 1e-12 {
            return Err(Error::DomainError(format!(
                "Bloch vector norm {n} exceeds 1"
            )));
        }
        Ok(Self { r })
    }

    pub fn maximally_mixed() -> Self {
        Self { r: [0.0; 3] }
    }

    /// Pure state along the (normalized) direction `v`.
    pub fn pure_along(v: Vec3) -> Self {
        Self {
            r: numeric::normalize3(v),
        }
    }

    pub fn vector(&self) -> Vec3 {
        self.r
    }

    pub fn radius(&self) -> f64 {
        numeric::norm3(self.r)
    }
}

/// Expectation value `<A> = a0 + <a, r>`.
pub fn mean(obs: &QubitObservable, state: &BlochState) -> f64 {
    obs.offset + numeric::dot3(obs.vec, state.r)
}

/// Variance `|a|^2 - <a, r>^2`, clamped into `[0, |a|^2]`.
pub fn variance(obs: &QubitObservable, state: &BlochState) -> f64 {
    let proj = numeric::dot3(obs.vec, state.r);
    (numeric::dot3(obs.vec, obs.vec) - proj * proj).max(0.0)
}

/// Standard deviation `sqrt(variance)`.
pub fn deviation(obs: &QubitObservable, state: &BlochState) -> f64 {
    variance(obs, state).sqrt()
}

/// The smaller eigenvalue of a sampled qubit state, `0 <= lambda1 <= 1/2`.
///
/// Under the induced measure the eigenvalue density is `6(1-2*lambda1)^2`
/// with CDF `1 - (1-2*lambda1)^3`; the Bloch radius is `1 - 2*lambda1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    pub lambda1: f64,
}

impl SpectralSample {
    /// Inverse-CDF draw from a uniform `u` in [0, 1).
    pub fn from_uniform(u: f64) -> Self {
        let lambda1 = 0.5 * (1.0 - (1.0 - u).cbrt());
        Self { lambda1 }
    }

    pub fn lambda2(&self) -> f64 {
        1.0 - self.lambda1
    }

    /// Bloch radius `lambda2 - lambda1`.
    pub fn radius(&self) -> f64 {
        1.0 - 2.0 * self.lambda1
    }

    /// Eigenvalue density `6 (1 - 2 l)^2` on [0, 1/2].
    pub fn density(lambda1: f64) -> f64 {
        if (0.0..=0.5).contains(&lambda1) {
            6.0 * (1.0 - 2.0 * lambda1).powi(2)
        } else {
            0.0
        }
    }

    /// Eigenvalue CDF `1 - (1 - 2 l)^3` on [0, 1/2].
    pub fn cdf(lambda1: f64) -> f64 {
        if lambda1 <= 0.0 {
            0.0
        } else if lambda1 >= 0.5 {
            1.0
        } else {
            1.0 - (1.0 - 2.0 * lambda1).powi(3)
        }
    }
}

/// One standard normal via Box-Muller (consumes two uniforms).
fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// Draws a Haar-random pure state on C^2 x C^2 (four standard complex
/// Gaussians, normalized), partial-traces the second factor, and returns the
/// reduced state in Bloch form.
pub fn sample_purified<R: Rng + ?Sized>(rng: &mut R) -> BlochState {
    let mut amps = [Complex64::new(0.0, 0.0); 4];
    for a in &mut amps {
        let (re, im) = normal_pair(rng);
        *a = Complex64::new(re, im);
    }
    let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    // Index layout: amps[2a + b] for subsystem indices (a, b).
    let rho00 = (amps[0].norm_sqr() + amps[1].norm_sqr()) / norm_sq;
    let rho11 = (amps[2].norm_sqr() + amps[3].norm_sqr()) / norm_sq;
    let rho01 = (amps[0] * amps[2].conj() + amps[1] * amps[3].conj()) / norm_sq;
    BlochState {
        r: [2.0 * rho01.re, -2.0 * rho01.im, rho00 - rho11],
    }
}

/// Draws the eigenvalue by inverse CDF and an independent uniform direction;
/// distributed identically to [`sample_purified`].
pub fn sample_spectral<R: Rng + ?Sized>(rng: &mut R) -> BlochState {
    let radius = SpectralSample::from_uniform(rng.gen()).radius();
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let s = (1.0 - z * z).max(0.0).sqrt();
    BlochState {
        r: [radius * s * phi.cos(), radius * s * phi.sin(), radius * z],
    }
}

/// Closed form of the ensemble average `E[exp(-i Tr(A rho))]`:
/// `3 e^{-i a0} (sin|a| - |a| cos|a|) / |a|^3`.
pub fn char_fn(obs: &QubitObservable) -> Result<Complex64> {
    let x = obs.vec_norm();
    if x == 0.0 {
        return Err(Error::DegenerateObservable);
    }
    let radial = if x < 1e-2 {
        // 3 (sin x - x cos x)/x^3 = 1 - x^2/10 + x^4/280 - ...
        1.0 - x * x / 10.0 + x.powi(4) / 280.0
    } else {
        3.0 * (x.sin() - x * x.cos()) / (x * x * x)
    };
    Ok(Complex64::from_polar(1.0, -obs.offset) * radial)
}
