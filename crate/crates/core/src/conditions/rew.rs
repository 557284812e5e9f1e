//! Re w(k) rebuilt from the spectral measure: a low-energy part f(k) from
//! E <= 1 (bound states and the density on [0, 1]) plus the Hilbert transform
//! of the odd extension of nu, with an analytic correction for nu beyond the
//! sampled grid.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::hilbert::{hilbert_transform, HilbertMode};
use super::measure::LineMeasure;
use crate::config::Settings;
use crate::error::{invalid, Error, Result};
use crate::potentials::Potential;
use crate::quad::{hann_mean, integrate, QuadOptions};
use crate::schrodinger::{bound_state_norm, dirichlet_eigenvalues, weyl_w, Momentum};
use crate::spectral::{linspace, nu_from_potential, SignedMeasureNu};

/// Momentum grid on which nu is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuGrid {
    pub kmax: f64,
    pub step: f64,
}

impl Default for NuGrid {
    fn default() -> Self {
        NuGrid { kmax: 120.0, step: 0.01 }
    }
}

impl NuGrid {
    /// Nodes from just above 1 to kmax. The first node sits at 1 + 1e-9 so
    /// the density is sampled strictly inside k > 1.
    pub fn nodes(&self) -> Result<Vec<f64>> {
        if !(self.kmax > 2.0 && self.step > 0.0 && self.step < 1.0) {
            return Err(invalid("nu grid needs kmax > 2 and 0 < step < 1"));
        }
        let n = ((self.kmax - 1.0) / self.step).round() as usize + 1;
        let mut g = linspace(1.0, self.kmax, n);
        g[0] = 1.0 + 1e-9;
        Ok(g)
    }

    pub fn sample(&self, v: &Potential, settings: &Settings) -> Result<SignedMeasureNu> {
        nu_from_potential(v, &self.nodes()?, settings)
    }
}

/// Measure data needed to rebuild Re w at any k in (1, kmax).
#[derive(Debug, Clone)]
pub struct ReWModel {
    pub nu: SignedMeasureNu,
    odd: LineMeasure,
    /// Odd extension of nu restricted to every other grid node, for
    /// extrapolating away the O(h^2) interpolation error.
    odd_coarse: Option<LineMeasure>,
    /// Dirichlet bound states as (E_j, weight).
    pub point_masses: Vec<(f64, f64)>,
    /// c in nu'(k) ~ c / k beyond the grid.
    pub tail_coefficient: f64,
    low: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReWDecomposition {
    pub k: f64,
    pub re_w: f64,
    pub low_energy: f64,
    pub hilbert: f64,
    pub tail: f64,
    pub residual: f64,
}

/// Nodes of the low-energy density (Im w(q) - q)/pi on q in (0, 1].
const LOW_NODES: usize = 2001;

impl ReWModel {
    pub fn new(v: &Potential, grid: NuGrid, settings: &Settings) -> Result<ReWModel> {
        let nu = grid.sample(v, settings)?;
        let odd = LineMeasure::odd_extension(&nu);
        let odd_coarse = coarsened(&nu)?.map(|c| LineMeasure::odd_extension(&c));
        let point_masses = dirichlet_eigenvalues(v, settings)?
            .kappas
            .iter()
            .map(|&kappa| {
                let (d, n) = bound_state_norm(v, kappa, settings)?;
                Ok((-kappa * kappa, d * d / n))
            })
            .collect::<Result<Vec<_>>>()?;
        let half = grid.kmax / 2.0;
        let window: Vec<f64> =
            nu.k_grid.iter().zip(&nu.ac_density).filter(|(k, _)| **k >= half).map(|(k, d)| k * d).collect();
        let tail_coefficient = hann_mean(&window);
        let low = linspace(0.0, 1.0, LOW_NODES)
            .into_par_iter()
            .map(|q| {
                if q == 0.0 {
                    return Ok((0.0, 0.0));
                }
                let w = weyl_w(v, Momentum::real(q)?, 0.0, settings).map_err(|_| Error::ResonanceProximity { k: q })?;
                Ok((q, (w.im - q) / PI))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReWModel { nu, odd, odd_coarse, point_masses, tail_coefficient, low })
    }

    fn kmax(&self) -> f64 {
        *self.nu.k_grid.last().expect("nonempty grid")
    }

    /// Integral over E <= 1 of d(rho - rho_0)(E) / (E - k^2).
    pub fn low_energy(&self, k: f64) -> Result<f64> {
        let k2 = k * k;
        let atoms: f64 = self.point_masses.iter().map(|&(e, w)| w / (e - k2)).sum();
        // Density in q with dE = 2q dq, interpolated linearly between nodes.
        let density = |q: f64| {
            let i = self.low.partition_point(|p| p.0 <= q).clamp(1, self.low.len() - 1);
            let (a, b) = (self.low[i - 1], self.low[i]);
            a.1 + (b.1 - a.1) * (q - a.0) / (b.0 - a.0)
        };
        let opts = QuadOptions::new(1e-12).abs_tol(1e-14).panels(64);
        let r = integrate(|q: f64| Ok(density(q) * 2.0 * q / (q * q - k2)), 0.0, 1.0, &opts)?;
        Ok(atoms + r.value)
    }

    /// Contribution of a c/xi density beyond kmax.
    pub fn tail(&self, k: f64) -> f64 {
        let big = self.kmax();
        2.0 * self.tail_coefficient / PI * ((big + k) / (big - k)).ln() / (2.0 * k)
    }

    pub fn re_w_model(&self, k: f64) -> Result<(f64, f64, f64)> {
        if !(k > 1.0 && k < 0.5 * self.kmax()) {
            return Err(invalid(format!("k must lie in (1, kmax/2), got {k}")));
        }
        let low = self.low_energy(k)?;
        let mut h = hilbert_transform(&self.odd, k, HilbertMode::Full)?;
        if let Some(coarse) = &self.odd_coarse {
            h += (h - hilbert_transform(coarse, k, HilbertMode::Full)?) / 3.0;
        }
        Ok((low, h, self.tail(k)))
    }

    pub fn decompose(&self, v: &Potential, k: f64, settings: &Settings) -> Result<ReWDecomposition> {
        let (low_energy, hilbert, tail) = self.re_w_model(k)?;
        let re_w = weyl_w(v, Momentum::real(k)?, 0.0, settings)?.re;
        let residual = (re_w - low_energy - hilbert - tail).abs();
        Ok(ReWDecomposition { k, re_w, low_energy, hilbert, tail, residual })
    }
}

/// nu on every other node, when the node count is odd and large enough for
/// both grids to share their end points.
fn coarsened(nu: &SignedMeasureNu) -> Result<Option<SignedMeasureNu>> {
    let n = nu.k_grid.len();
    if n < 5 || n.is_multiple_of(2) {
        return Ok(None);
    }
    let grid = nu.k_grid.iter().step_by(2).copied().collect();
    let density = nu.ac_density.iter().step_by(2).copied().collect();
    SignedMeasureNu::new(grid, density, nu.point_masses.clone()).map(Some)
}

pub fn re_w_decomposition_residual(v: &Potential, k: f64, settings: &Settings) -> Result<f64> {
    if v.is_zero() {
        return Ok(0.0);
    }
    Ok(ReWModel::new(v, NuGrid::default(), settings)?.decompose(v, k, settings)?.residual)
}
