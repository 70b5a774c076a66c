//! Observed convergence orders from error sequences.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Pairwise orders `log(e_i/e_{i+1}) / log(h_i/h_{i+1})` for successive
/// `(cells, error)` entries; `h ∝ 1/cells`.
pub fn pairwise_orders(levels: &[(usize, f64)]) -> Vec<f64> {
    levels
        .windows(2)
        .map(|w| {
            let (n0, e0) = w[0];
            let (n1, e1) = w[1];
            (e0 / e1).ln() / (n1 as f64 / n0 as f64).ln()
        })
        .collect()
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(levels: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = levels.iter().map(|&(n, e)| (-(n as f64).ln(), e.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
