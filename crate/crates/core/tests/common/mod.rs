//! Shared oracles and fixtures for the integration tests.
#![allow(dead_code)]

use weyl_core::{Potential, Settings};

pub fn settings() -> Settings {
    Settings::default()
}

/// Depth 2, width 1.
pub fn well() -> Potential {
    Potential::square_well(2.0, 1.0, 1e-3).unwrap()
}

/// Amplitude -1, center 3, width 0.5, cut at 8.
pub fn gaussian() -> Potential {
    Potential::gaussian_bump(-1.0, 3.0, 0.5, 8.0, 1e-3).unwrap()
}

/// The two reference potentials with their names.
pub fn test_potentials() -> Vec<(&'static str, Potential)> {
    vec![("square well", well()), ("gaussian bump", gaussian())]
}

/// Closed-form transmission of a square well of depth v0 and width a at energy k^2.
pub fn well_transmission(v0: f64, a: f64, k: f64) -> f64 {
    let e = k * k;
    let kp = (e + v0).sqrt();
    1.0 / (1.0 + v0 * v0 * (kp * a).sin().powi(2) / (4.0 * e * (e + v0)))
}

/// Average of V over [x - h/2, x + h/2], split at the support ends so that
/// jumps are averaged exactly.
fn cell_average(v: &Potential, x: f64, h: f64) -> f64 {
    let (a, b) = (x - 0.5 * h, x + 0.5 * h);
    let mut cuts = vec![a, b];
    cuts.extend([0.0, v.support_end()].iter().copied().filter(|&c| c > a && c < b));
    cuts.sort_by(f64::total_cmp);
    // 3-point Gauss-Legendre on each smooth piece.
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let (m, r) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (t, wt) in nodes.iter().zip(weights) {
            sum += wt * r * v.value(m + r * t);
        }
    }
    sum / h
}

/// Finite-difference Dirichlet problem -u'' + V u = E u on [lo, hi], step h.
pub struct FiniteDifference {
    diag: Vec<f64>,
    off_sq: f64,
}

impl FiniteDifference {
    pub fn new(v: &Potential, lo: f64, hi: f64, h: f64) -> Self {
        let n = ((hi - lo) / h).round() as usize - 1;
        let inv = 1.0 / (h * h);
        let diag = (1..=n).map(|i| 2.0 * inv + cell_average(v, lo + i as f64 * h, h)).collect();
        FiniteDifference { diag, off_sq: inv * inv }
    }

    /// Number of eigenvalues below `e`, by Sturm sequence of the LDL^T pivots.
    pub fn count_below(&self, e: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for (i, a) in self.diag.iter().enumerate() {
            d = a - e - if i == 0 { 0.0 } else { self.off_sq / d };
            if d == 0.0 {
                d = -f64::EPSILON;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// All eigenvalues in [floor, 0), ascending, bisected to `tol`.
    pub fn negative_eigenvalues(&self, floor: f64, tol: f64) -> Vec<f64> {
        let n = self.count_below(0.0);
        (0..n)
            .map(|j| {
                let (mut a, mut b) = (floor, 0.0);
                while b - a > tol {
                    let m = 0.5 * (a + b);
                    if self.count_below(m) > j {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }
}

/// Half-line Dirichlet eigenvalues, ascending, on [0, 60] with step h.
pub fn fd_dirichlet(v: &Potential, h: f64) -> Vec<f64> {
    FiniteDifference::new(v, 0.0, 60.0, h).negative_eigenvalues(v.min_value() - 1.0, 1e-11)
}

/// Whole-line eigenvalues (V zero for x < 0), ascending, on [-40, 41] with step h.
pub fn fd_whole_line(v: &Potential, h: f64) -> Vec<f64> {
    FiniteDifference::new(v, -40.0, 41.0, h).negative_eigenvalues(v.min_value() - 1.0, 1e-11)
}
