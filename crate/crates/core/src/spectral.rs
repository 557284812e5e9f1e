//! Spectral measure of the Dirichlet half-line operator, the free measure and
//! the signed momentum-space measure nu.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Settings;
use crate::error::{invalid, Error, Result};
use crate::potentials::Potential;
use crate::schrodinger::{bound_state_norm, dirichlet_eigenvalues, weyl_w, EigenvalueList, Momentum};

/// Free density d rho_0 / dE = sqrt(E) / pi.
pub fn rho0_density(e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(invalid(format!("energy must be positive, got {e}")));
    }
    Ok(e.sqrt() / PI)
}

/// d rho / dE = Im w(sqrt E; 0) / pi.
pub fn spectral_density(v: &Potential, e: f64, settings: &Settings) -> Result<f64> {
    rho0_density(e)?;
    let k = e.sqrt();
    let w = weyl_w(v, Momentum::real(k)?, 0.0, settings).map_err(|_| Error::ResonanceProximity { k })?;
    Ok(w.im / PI)
}

/// Absolutely continuous density on a grid plus point masses, in the JSON
/// layout `{grid, density, point_masses}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    #[serde(rename = "grid")]
    pub energy_grid: Vec<f64>,
    #[serde(rename = "density")]
    pub ac_density: Vec<f64>,
    pub point_masses: Vec<(f64, f64)>,
}

/// Spectral measure of the Dirichlet operator sampled on `energy_grid`.
///
/// The weight of an eigenvalue -kappa^2 is psi'(0)^2 / integral of psi^2,
/// the inverse squared norm of the eigenfunction normalized by u'(0) = 1.
pub fn spectral_measure(v: &Potential, energy_grid: &[f64], settings: &Settings) -> Result<SpectralMeasure> {
    if energy_grid.windows(2).any(|w| !(w[1] > w[0])) || energy_grid.first().is_some_and(|&e| e <= 0.0) {
        return Err(invalid("energy grid must be positive and strictly increasing"));
    }
    let ac_density = energy_grid
        .par_iter()
        .map(|&e| spectral_density(v, e, settings))
        .collect::<Result<Vec<_>>>()?;
    let eig = dirichlet_eigenvalues(v, settings)?;
    let mut point_masses = eig
        .kappas
        .iter()
        .map(|&kappa| {
            let (d, n) = bound_state_norm(v, kappa, settings)?;
            Ok((-kappa * kappa, d * d / n))
        })
        .collect::<Result<Vec<_>>>()?;
    point_masses.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(SpectralMeasure { energy_grid: energy_grid.to_vec(), ac_density, point_masses })
}

/// The signed measure nu on k > 1: an a.c. density on `k_grid` (linear between
/// nodes, zero outside) plus signed atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasureNu {
    #[serde(rename = "grid")]
    pub k_grid: Vec<f64>,
    #[serde(rename = "density")]
    pub ac_density: Vec<f64>,
    pub point_masses: Vec<(f64, f64)>,
}

impl SignedMeasureNu {
    pub fn zero() -> Self {
        SignedMeasureNu { k_grid: Vec::new(), ac_density: Vec::new(), point_masses: Vec::new() }
    }

    pub fn atoms(point_masses: Vec<(f64, f64)>) -> Result<Self> {
        SignedMeasureNu { k_grid: Vec::new(), ac_density: Vec::new(), point_masses }.validated()
    }

    pub fn new(k_grid: Vec<f64>, ac_density: Vec<f64>, point_masses: Vec<(f64, f64)>) -> Result<Self> {
        SignedMeasureNu { k_grid, ac_density, point_masses }.validated()
    }

    /// Check the layout: grid above 1 and strictly increasing, matching
    /// lengths, finite values, atoms above 1. Atoms are sorted.
    pub fn validated(mut self) -> Result<Self> {
        if self.k_grid.len() != self.ac_density.len() {
            return Err(invalid("grid and density lengths differ"));
        }
        if self.k_grid.len() == 1 {
            return Err(invalid("a density needs at least two grid points"));
        }
        if self.k_grid.first().is_some_and(|&k| k < 1.0) || self.k_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("k grid must start at or above 1 and increase strictly"));
        }
        if self.k_grid.iter().chain(&self.ac_density).any(|v| !v.is_finite()) {
            return Err(invalid("grid and density must be finite"));
        }
        if self.point_masses.iter().any(|&(p, w)| !(p >= 1.0 && p.is_finite() && w.is_finite())) {
            return Err(invalid("point masses must sit at finite k >= 1 with finite weights"));
        }
        self.point_masses.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: SignedMeasureNu =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        m.validated()
    }

    pub fn is_zero(&self) -> bool {
        self.ac_density.iter().all(|&d| d == 0.0) && self.point_masses.iter().all(|&(_, w)| w == 0.0)
    }

    /// Smallest interval containing the support, or None for the zero measure.
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let (Some(a), Some(b)) = (self.k_grid.first(), self.k_grid.last()) {
            lo = lo.min(*a);
            hi = hi.max(*b);
        }
        for &(p, _) in &self.point_masses {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Density at k (linear interpolation, zero off the grid).
    pub fn density_at(&self, k: f64) -> f64 {
        let g = &self.k_grid;
        if g.is_empty() || k < g[0] || k > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&x| x <= k).clamp(1, g.len() - 1);
        let t = (k - g[i - 1]) / (g[i] - g[i - 1]);
        self.ac_density[i - 1] + t * (self.ac_density[i] - self.ac_density[i - 1])
    }
}

/// nu from a potential: density Im w(k; 0) - k on `k_grid`, no atoms.
pub fn nu_from_potential(v: &Potential, k_grid: &[f64], settings: &Settings) -> Result<SignedMeasureNu> {
    if k_grid.iter().any(|&k| !(k > 1.0)) {
        return Err(invalid("nu is defined on k > 1"));
    }
    let density = k_grid
        .par_iter()
        .map(|&k| {
            let w = weyl_w(v, Momentum::real(k)?, 0.0, settings).map_err(|_| Error::ResonanceProximity { k })?;
            Ok(w.im - k)
        })
        .collect::<Result<Vec<_>>>()?;
    SignedMeasureNu::new(k_grid.to_vec(), density, Vec::new())
}

/// Sum of kappa_j^3 = sum of |E_j|^{3/2}.
pub fn lieb_thirring_sum(eigs: &EigenvalueList) -> f64 {
    // fold from +0 so an empty list gives 0, not the -0 of an empty f64 sum
    eigs.kappas.iter().fold(0.0, |acc, k| acc + k * k * k)
}

/// Interlacing of Dirichlet energies E_j with whole-line energies E_j^(0):
/// E_j^(0) <= E_j <= E_{j+1}^(0), with at most one extra whole-line state.
pub fn interlacing_check(half: &EigenvalueList, whole: &EigenvalueList) -> bool {
    let e = half.energies();
    let e0 = whole.energies();
    if e0.len() < e.len() || e0.len() > e.len() + 1 {
        return false;
    }
    e.iter().enumerate().all(|(j, &ej)| e0[j] <= ej && e0.get(j + 1).is_none_or(|&next| ej <= next))
}

/// n points from a to b inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// n log-spaced points from a to b inclusive (a, b > 0).
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect();
    // exp(ln a) is not always a; pin the endpoints
    if let Some(first) = out.first_mut() {
        *first = a;
    }
    if n > 1 {
        out[n - 1] = b;
    }
    out
}
