//! Periodic finite-difference stencils.

use alloc::vec::Vec;

/// Fourth-order central first derivative on a periodic grid.
pub fn periodic_d1(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let inv = 1.0 / (12.0 * dx);
    (0..n)
        .map(|i| {
            let m2 = f[(i + n - 2) % n];
            let m1 = f[(i + n - 1) % n];
            let p1 = f[(i + 1) % n];
            let p2 = f[(i + 2) % n];
            (8.0 * (p1 - m1) - (p2 - m2)) * inv
        })
        .collect()
}
