//! The Gaussian-smoothed function F(q), the local solubility integral and the
//! Fourier identity that ties F to the sine transform of nu.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::quad::{integrate, GaussRule, QuadOptions};
use crate::spectral::SignedMeasureNu;

/// Beyond this distance the Gaussian weight is below 1e-35.
const GAUSS_REACH: f64 = 9.0;
const CHUNK: f64 = 0.25;

/// Integral of g(p) against the density of nu over [lo, hi] (clipped to the grid),
/// with 10-point Gauss rules on chunks of width <= 0.25.
fn density_integral(nu: &SignedMeasureNu, lo: f64, hi: f64, rule: &GaussRule, g: impl Fn(f64) -> f64) -> f64 {
    let grid = &nu.k_grid;
    if grid.len() < 2 {
        return 0.0;
    }
    let start = grid.partition_point(|&x| x <= lo).saturating_sub(1);
    let mut sum = 0.0;
    for i in start..grid.len() - 1 {
        let (a, b) = (grid[i].max(lo), grid[i + 1].min(hi));
        if grid[i] >= hi {
            break;
        }
        if b <= a {
            continue;
        }
        let (d0, d1) = (nu.ac_density[i], nu.ac_density[i + 1]);
        let slope = (d1 - d0) / (grid[i + 1] - grid[i]);
        let n = ((b - a) / CHUNK).ceil().max(1.0) as usize;
        for j in 0..n {
            let c0 = a + (b - a) * j as f64 / n as f64;
            let c1 = if j + 1 == n { b } else { a + (b - a) * (j + 1) as f64 / n as f64 };
            sum += rule.integrate(c0, c1, |p| (d0 + slope * (p - grid[i])) * g(p));
        }
    }
    sum
}

/// F(q) = pi^{-1/2} times the integral over p >= 1 of p^{-1} e^{-(q-p)^2} d nu(p).
#[derive(Debug, Clone)]
pub struct GaussianSmoothing<'a> {
    nu: &'a SignedMeasureNu,
    rule: GaussRule,
}

impl<'a> GaussianSmoothing<'a> {
    pub fn new(nu: &'a SignedMeasureNu) -> Self {
        GaussianSmoothing { nu, rule: GaussRule::new(10) }
    }

    pub fn eval(&self, q: f64) -> f64 {
        let kernel = |p: f64| (-(q - p) * (q - p)).exp() / p;
        let ac = density_integral(self.nu, q - GAUSS_REACH, q + GAUSS_REACH, &self.rule, kernel);
        let atoms: f64 = self.nu.point_masses.iter().map(|&(p, w)| w * kernel(p)).sum();
        (ac + atoms) / PI.sqrt()
    }
}

pub fn f_of_q(nu: &SignedMeasureNu, q: f64) -> f64 {
    GaussianSmoothing::new(nu).eval(q)
}

fn q_window(nu: &SignedMeasureNu) -> Option<(f64, f64, Vec<f64>)> {
    let (lo, hi) = nu.support()?;
    let mut bps: Vec<f64> = nu.point_masses.iter().map(|a| a.0).collect();
    bps.extend([lo, hi]);
    Some((lo - GAUSS_REACH - 1.0, hi + GAUSS_REACH + 1.0, bps))
}

/// Integral of |F(q)|^2 over q >= 0.
pub fn local_solubility_integral(nu: &SignedMeasureNu, settings: &Settings) -> Result<f64> {
    let Some((_, hi, bps)) = q_window(nu) else {
        return Ok(0.0);
    };
    let smooth = GaussianSmoothing::new(nu);
    let opts = QuadOptions::new(settings.quad_tol.min(1e-10)).abs_tol(1e-16).breakpoints(bps);
    let r = integrate(|q: f64| Ok(smooth.eval(q).powi(2)), 0.0, hi, &opts)?;
    if !r.converged {
        return Err(Error::QuadratureFailure { error: r.error, intervals: r.panels });
    }
    Ok(r.value)
}

/// Two evaluations of the sine transform of F at frequency 2 alpha:
/// by quadrature of F itself, and in closed form through nu,
/// 2 integral of F(q) sin(2 alpha q) dq = e^{-alpha^2} * 2 integral of p^{-1} sin(2 alpha p) d nu(p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierCheck {
    pub alpha: f64,
    /// i[F^(2 alpha) - F^(-2 alpha)] = 2 integral of F(q) sin(2 alpha q) dq.
    pub transform_side: f64,
    /// e^{-alpha^2} A_F(alpha) with A_F(alpha) = 2 integral of p^{-1} sin(2 alpha p) d nu.
    pub measure_side: f64,
    pub residual: f64,
    /// The large-energy A-function of the measure, -(4/pi) integral of sin(2 alpha k) d nu,
    /// for reference; it is not Gaussian-dual to F as defined here.
    pub a_large: f64,
}

pub fn fourier_identity(nu: &SignedMeasureNu, alpha: f64, settings: &Settings) -> Result<FourierCheck> {
    if !alpha.is_finite() {
        return Err(crate::error::invalid("alpha must be finite"));
    }
    let Some((lo, hi, bps)) = q_window(nu) else {
        return Ok(FourierCheck { alpha, transform_side: 0.0, measure_side: 0.0, residual: 0.0, a_large: 0.0 });
    };
    let smooth = GaussianSmoothing::new(nu);
    let opts = QuadOptions::new(settings.quad_tol.min(1e-12)).abs_tol(1e-13).breakpoints(bps);
    let r = integrate(|q: f64| Ok(2.0 * smooth.eval(q) * (2.0 * alpha * q).sin()), lo, hi, &opts)?;
    if !r.converged {
        return Err(Error::QuadratureFailure { error: r.error, intervals: r.panels });
    }
    let rule = GaussRule::new(10);
    let sine = |p: f64| (2.0 * alpha * p).sin();
    let (glo, ghi) = (f64::NEG_INFINITY, f64::INFINITY);
    let a_f = 2.0
        * (density_integral(nu, glo, ghi, &rule, |p| sine(p) / p)
            + nu.point_masses.iter().map(|&(p, w)| w * sine(p) / p).sum::<f64>());
    let a_large = -4.0 / PI
        * (density_integral(nu, glo, ghi, &rule, sine) + nu.point_masses.iter().map(|&(p, w)| w * sine(p)).sum::<f64>());
    let measure_side = (-alpha * alpha).exp() * a_f;
    Ok(FourierCheck { alpha, transform_side: r.value, measure_side, residual: (r.value - measure_side).abs(), a_large })
}

pub fn fourier_identity_residual(nu: &SignedMeasureNu, alpha: f64, settings: &Settings) -> Result<f64> {
    Ok(fourier_identity(nu, alpha, settings)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Settings {
        Settings::default()
    }

    #[test]
    fn single_atom_closed_form() {
        let nu = SignedMeasureNu::atoms(vec![(2.0, 1.5)]).unwrap();
        for q in [-1.0, 0.5, 2.0, 3.3] {
            let exact = 1.5 / 2.0 * (-(q - 2.0f64).powi(2)).exp() / PI.sqrt();
            assert!((f_of_q(&nu, q) - exact).abs() < 1e-15);
        }
        assert_eq!(f_of_q(&SignedMeasureNu::zero(), 1.0), 0.0);
    }

    #[test]
    fn gaussian_decay_for_negative_q() {
        let nu = SignedMeasureNu::new(vec![1.0, 4.0], vec![1.0, -0.5], vec![(6.0, 2.0)]).unwrap();
        // |F(q)| <= C e^{-q^2} for q <= 0; the ratio stays bounded.
        let ratios: Vec<f64> = [-0.5, -1.0, -2.0, -3.0].iter().map(|&q| f_of_q(&nu, q).abs() / (-q * q).exp()).collect();
        let c = ratios.iter().copied().fold(0.0, f64::max);
        assert!(c < 1.0, "{ratios:?}");
    }

    #[test]
    fn fourier_single_atom() {
        let nu = SignedMeasureNu::atoms(vec![(2.0, 1.0)]).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let c = fourier_identity(&nu, alpha, &s()).unwrap();
            let exact = (-alpha * alpha).exp() * (4.0 * alpha).sin();
            assert!((c.measure_side - exact).abs() < 1e-15);
            assert!(c.residual <= 1e-8, "{c:?}");
        }
        assert_eq!(fourier_identity_residual(&SignedMeasureNu::zero(), 1.0, &s()).unwrap(), 0.0);
    }

    #[test]
    fn density_smoothing_matches_adaptive_quadrature() {
        let nu = SignedMeasureNu::new(vec![1.0, 2.5, 7.0], vec![0.3, -1.0, 0.4], vec![]).unwrap();
        let q = 2.2;
        let direct = integrate(
            |p: f64| Ok(nu.density_at(p) * (-(q - p) * (q - p)).exp() / p / PI.sqrt()),
            1.0,
            7.0,
            &QuadOptions::new(1e-13).breakpoints(vec![2.5]),
        )
        .unwrap()
        .value;
        assert!((f_of_q(&nu, q) - direct).abs() < 1e-13);
    }
}
