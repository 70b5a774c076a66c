//! Seeded sampling of admissible states.
//!
//! All functions draw from a caller-supplied [`rand::Rng`], so a fixed seed
//! reproduces the same sample set on every platform.

use rand::Rng;

use crate::eos::AdmissibleWindow;
#[allow(unused_imports)]
use num_traits::Float;

/// Log-uniform density in `[ρ*+δ, rho_max]`.
pub fn density<R: Rng + ?Sized>(window: &AdmissibleWindow, rng: &mut R) -> f64 {
    window.log_lerp(rng.random::<f64>())
}

/// Uniformly random direction, with `|v|²` uniform in `[0, (1−δ)c²)`.
pub fn velocity3<R: Rng + ?Sized>(c: f64, delta: f64, rng: &mut R) -> [f64; 3] {
    let speed2 = (1.0 - delta) * c * c * rng.random::<f64>();
    scale_to(direction(rng), speed2.sqrt())
}

/// Uniform point on the unit sphere.
pub fn direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * core::f64::consts::PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

pub fn scale_to(dir: [f64; 3], speed: f64) -> [f64; 3] {
    [dir[0] * speed, dir[1] * speed, dir[2] * speed]
}

/// 1D velocity uniform in `(−√(1−δ)c, √(1−δ)c)`.
pub fn velocity1<R: Rng + ?Sized>(c: f64, delta: f64, rng: &mut R) -> f64 {
    (2.0 * rng.random::<f64>() - 1.0) * (1.0 - delta).sqrt() * c
}
