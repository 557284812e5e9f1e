//! Relative Wronskian, Blaschke factors, g_t and the numerical sum rules.
//!
//! The relative Wronskian a_t(k) = W(t, k)/W(0, k) compares the operator
//! with its truncation to [t, inf). Its logarithm is the integral of
//! V phi / W along the backward Jost integration, which fixes the branch
//! that is continuous in t.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::Settings;
use crate::error::{invalid, Error, Result};
use crate::potentials::Potential;
use crate::scattering::{default_kmax, half_line_integral, quasi_szego_q, scattering_pair};
use crate::schrodinger::{reduced_profile, whole_line_eigenvalues, Momentum};
use crate::spectral::lieb_thirring_sum;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Default height on the imaginary axis where g_t is required to be real.
pub const BRANCH_KAPPA: f64 = 100.0;

/// Largest condition number accepted for the asymptotic fit.
const MAX_FIT_CONDITION: f64 = 1e10;

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("t must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// log a_t(k), continuous in t with log a_0 = 0.
pub fn log_relative_wronskian(v: &Potential, t: f64, k: Momentum, settings: &Settings) -> Result<C64> {
    check_t(t)?;
    if t == 0.0 || v.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let reds = reduced_profile(v, k, &[0.0, t], true, settings)?;
    Ok(reds[0].log_tail - reds[1].log_tail)
}

/// W(t, k)/W(0, k) computed directly, for cross-checks.
pub fn wronskian_ratio(v: &Potential, t: f64, k: Momentum, settings: &Settings) -> Result<C64> {
    check_t(t)?;
    let reds = reduced_profile(v, k, &[0.0, t], false, settings)?;
    let w0 = reds[0].wronskian();
    if w0.norm() < 1e-14 {
        return Err(Error::EvaluationAtPole);
    }
    Ok(reds[1].wronskian() / w0)
}

/// Least-squares coefficients of log a_t(i kappa) in powers of 1/kappa.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub c1: f64,
    pub c3: f64,
    /// Coefficients of the 1/kappa^4 and 1/kappa^5 correction columns.
    pub corrections: Vec<f64>,
    pub condition: f64,
    pub rms_residual: f64,
}

/// Geometric grid of 24 points on [20, 200].
pub fn default_kappa_grid() -> Vec<f64> {
    crate::spectral::logspace(20.0, 200.0, 24)
}

/// Fit log a_t(i kappa) = c1/kappa + c3/kappa^3 + d4/kappa^4 + d5/kappa^5.
///
/// The two correction columns absorb the boundary-layer terms that a
/// discontinuous potential produces at moderate kappa; without them c3
/// is biased by several percent on a grid starting at 20.
pub fn wronskian_asymptotics_fit(v: &Potential, t: f64, kappas: &[f64], settings: &Settings) -> Result<AsymptoticFit> {
    check_t(t)?;
    let powers = [1, 3, 4, 5];
    if kappas.len() < powers.len() + 2 {
        return Err(invalid(format!("need at least {} kappa values", powers.len() + 2)));
    }
    if kappas.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(invalid("kappa values must be positive and finite"));
    }
    if v.is_zero() || t == 0.0 {
        return Ok(AsymptoticFit { c1: 0.0, c3: 0.0, corrections: vec![0.0, 0.0], condition: 1.0, rms_residual: 0.0 });
    }
    use rayon::prelude::*;
    let values: Vec<f64> = kappas
        .par_iter()
        .map(|&k| Ok(log_relative_wronskian(v, t, Momentum::imag(k)?, settings)?.re))
        .collect::<Result<_>>()?;
    let m = kappas.len();
    let mut a = DMatrix::from_fn(m, powers.len(), |i, j| kappas[i].powi(-powers[j]));
    // Column scaling so the condition number reflects the fit, not the units.
    let scales: Vec<f64> = (0..powers.len()).map(|j| a.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let b = DVector::from_vec(values);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !(condition < MAX_FIT_CONDITION) {
        return Err(Error::FitConditioning { condition });
    }
    let x = svd.solve(&b, 0.0).map_err(|e| invalid(e.to_string()))?;
    let rms_residual = ((&a * &x - &b).norm_squared() / m as f64).sqrt();
    let coef: Vec<f64> = x.iter().zip(&scales).map(|(c, s)| c / s).collect();
    Ok(AsymptoticFit { c1: coef[0], c3: coef[1], corrections: coef[2..].to_vec(), condition, rms_residual })
}

/// One Blaschke factor log of ((k + i kappa)/(k - i kappa)) ((k - i lambda)/(k + i lambda))
/// minus 2i (kappa - lambda)/k, principal branch. A zero momentum means
/// the bound state is absent and its Mobius factor is 1.
fn blaschke_factor(k: C64, kappa: f64, lambda: f64) -> Result<C64> {
    if kappa == lambda {
        return Ok(C64::new(0.0, 0.0));
    }
    let scale = k.norm().max(kappa).max(lambda);
    let mut out = -2.0 * I * (kappa - lambda) / k;
    if kappa > 0.0 {
        let den = k - I * kappa;
        if den.norm() <= 1e-14 * scale {
            return Err(Error::EvaluationAtPole);
        }
        out += ((k + I * kappa) / den).ln();
    }
    if lambda > 0.0 {
        let num = k - I * lambda;
        if num.norm() <= 1e-14 * scale {
            return Err(Error::EvaluationAtPole);
        }
        out += (num / (k + I * lambda)).ln();
    }
    Ok(out)
}

/// log B_t(k) as a sum of principal-branch factors; the shorter list is
/// padded with zeros. Both lists are taken in descending order.
pub fn blaschke_log(kappas0: &[f64], kappast: &[f64], k: Momentum) -> Result<C64> {
    if kappas0.iter().chain(kappast).any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(invalid("bound-state momenta must be finite and >= 0"));
    }
    let k = k.value();
    let n = kappas0.len().max(kappast.len());
    let mut sum = C64::new(0.0, 0.0);
    for j in 0..n {
        let a = kappas0.get(j).copied().unwrap_or(0.0);
        let b = kappast.get(j).copied().unwrap_or(0.0);
        sum += blaschke_factor(k, a, b)?;
    }
    Ok(sum)
}

/// g_t = log(a_t / B_t) with bound states and branch fixed once, so it can be
/// evaluated at many momenta.
#[derive(Debug, Clone)]
pub struct GFunction {
    v: Potential,
    t: f64,
    settings: Settings,
    pub kappas0: Vec<f64>,
    pub kappast: Vec<f64>,
    /// Integer n with g = log a - log B - 2 pi i n.
    pub branch: i32,
}

impl GFunction {
    pub fn new(v: &Potential, t: f64, settings: &Settings) -> Result<GFunction> {
        GFunction::with_branch_point(v, t, BRANCH_KAPPA, settings)
    }

    pub fn with_branch_point(v: &Potential, t: f64, kappa_big: f64, settings: &Settings) -> Result<GFunction> {
        check_t(t)?;
        let kappas0 = whole_line_eigenvalues(v, 0.0, settings)?.kappas;
        let kappast = whole_line_eigenvalues(v, t, settings)?.kappas;
        let mut g = GFunction { v: v.clone(), t, settings: *settings, kappas0, kappast, branch: 0 };
        let raw = g.raw(Momentum::imag(kappa_big)?)?;
        let two_pi = 2.0 * std::f64::consts::PI;
        let n = (raw.im / two_pi).round();
        if n.abs() > 3.0 || (raw.im - two_pi * n).abs() > 1e-6 {
            return Err(Error::BranchFix { imag: raw.im });
        }
        g.branch = n as i32;
        Ok(g)
    }

    fn raw(&self, k: Momentum) -> Result<C64> {
        Ok(log_relative_wronskian(&self.v, self.t, k, &self.settings)? - blaschke_log(&self.kappas0, &self.kappast, k)?)
    }

    pub fn eval(&self, k: Momentum) -> Result<C64> {
        Ok(self.raw(k)? - 2.0 * std::f64::consts::PI * I * self.branch as f64)
    }

    /// Re g_t(k) from |W(t)/W(0)|, which does not depend on any branch.
    pub fn real_part(&self, k: Momentum) -> Result<f64> {
        let ratio = wronskian_ratio(&self.v, self.t, k, &self.settings)?;
        Ok(ratio.norm().ln() - blaschke_log(&self.kappas0, &self.kappast, k)?.re)
    }

    /// Coefficients (a, b) of g_t(iy) = a/y + b/y^3 + o(1/y^3).
    pub fn asymptotic_coefficients(&self) -> Result<(f64, f64)> {
        let a = -0.5 * self.v.integral(self.t)?;
        let cubes: f64 = self.kappas0.iter().map(|k| k.powi(3)).sum::<f64>() - self.kappast.iter().map(|k| k.powi(3)).sum::<f64>();
        Ok((a, self.v.l2_norm_sq(self.t)? / 8.0 - 2.0 / 3.0 * cubes))
    }
}

/// g_t(k) with the branch that is real at k = 100 i.
pub fn g_t(v: &Potential, t: f64, k: Momentum, settings: &Settings) -> Result<C64> {
    GFunction::new(v, t, settings)?.eval(k)
}

/// Both sides of the Poisson-type identity for Re g_t on the imaginary axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tail_error: f64,
}

/// Re[g_t(i y0) - y1 g_t(i y1)/y0] against the xi-integral of
/// K(xi) log(T(xi, 0)/T(xi, t)) / pi.
pub fn poisson_identity(v: &Potential, t: f64, y0: f64, y1: f64, settings: &Settings) -> Result<PoissonCheck> {
    check_t(t)?;
    if !(y0 > 0.0 && y1 > 0.0 && y0.is_finite() && y1.is_finite()) || y0 == y1 {
        return Err(invalid(format!("need distinct y0, y1 > 0, got {y0}, {y1}")));
    }
    settings.validate()?;
    if v.is_zero() || t == 0.0 {
        return Ok(PoissonCheck { lhs: 0.0, rhs: 0.0, residual: 0.0, tail_error: 0.0 });
    }
    let g = GFunction::new(v, t, settings)?;
    let lhs = g.real_part(Momentum::imag(y0)?)? - y1 / y0 * g.real_part(Momentum::imag(y1)?)?;
    let (vv, s) = (v.clone(), *settings);
    let kernel = move |xi: f64| {
        let x2 = xi * xi;
        (y0 * y0 - y1 * y1) * x2 / (y0 * (x2 + y0 * y0) * (x2 + y1 * y1)) / std::f64::consts::PI
    };
    let integrand = move |xi: f64| {
        let (p0, pt) = scattering_pair(&vv, xi, t, &s)?;
        Ok(kernel(xi) * (pt.log_inverse_transmission() - p0.log_inverse_transmission()))
    };
    let (integral, _) = half_line_integral(v, integrand, settings)?;
    Ok(PoissonCheck { lhs, rhs: integral.value, residual: (lhs - integral.value).abs(), tail_error: integral.tail_error })
}

pub fn poisson_identity_residual(v: &Potential, t: f64, y0: f64, y1: f64, settings: &Settings) -> Result<f64> {
    Ok(poisson_identity(v, t, y0, y1, settings)?.residual)
}

/// Terms of the step-by-step sum rule at a finite smoothing height y.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSumRule {
    pub y: f64,
    pub lhs: f64,
    pub eig_term: f64,
    pub scattering_term: f64,
    pub residual: f64,
    pub tail_error: f64,
}

/// Kernel 4 xi^2 y^4 / (pi (xi^2 + 4y^2)(xi^2 + y^2)); increases to xi^2/pi as y grows.
pub fn step_kernel(xi: f64, y: f64) -> f64 {
    let x2 = xi * xi;
    let y2 = y * y;
    4.0 * x2 * y2 * y2 / (std::f64::consts::PI * (x2 + 4.0 * y2) * (x2 + y2))
}

pub fn step_sum_rule(v: &Potential, t: f64, y: f64, settings: &Settings) -> Result<StepSumRule> {
    check_t(t)?;
    if !(y > 0.0 && y.is_finite()) {
        return Err(invalid(format!("y must be positive, got {y}")));
    }
    settings.validate()?;
    if v.is_zero() || t == 0.0 {
        return Ok(StepSumRule { y, lhs: 0.0, eig_term: 0.0, scattering_term: 0.0, residual: 0.0, tail_error: 0.0 });
    }
    let lhs = v.l2_norm_sq(t)? / 8.0;
    let k0 = whole_line_eigenvalues(v, 0.0, settings)?;
    let kt = whole_line_eigenvalues(v, t, settings)?;
    let eig_term = 2.0 / 3.0 * (lieb_thirring_sum(&k0) - lieb_thirring_sum(&kt));
    let mut s = *settings;
    s.kmax = Some(default_kmax(v, settings).max(10.0 * y));
    let vv = v.clone();
    let integrand = move |xi: f64| {
        let (p0, pt) = scattering_pair(&vv, xi, t, &s)?;
        Ok(step_kernel(xi, y) * (p0.log_inverse_transmission() - pt.log_inverse_transmission()))
    };
    let (integral, _) = half_line_integral(v, integrand, &s)?;
    let scattering_term = integral.value;
    Ok(StepSumRule {
        y,
        lhs,
        eig_term,
        scattering_term,
        residual: (lhs - eig_term - scattering_term).abs(),
        tail_error: integral.tail_error,
    })
}

pub fn step_sum_rule_residual(v: &Potential, t: f64, y: f64, settings: &Settings) -> Result<f64> {
    Ok(step_sum_rule(v, t, y, settings)?.residual)
}

/// Discretization used for a sum-rule evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub k_min: f64,
    pub kmax: f64,
    pub ode_tol: f64,
    pub quad_tol: f64,
    pub resonances_skipped: usize,
}

/// The sum rule (1/8) int V^2 = (2/3) sum kappa_j^3 + Q.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRuleReport {
    pub lhs: f64,
    pub eig_term: f64,
    pub szego_term: f64,
    pub residual: f64,
    pub tail_error: f64,
    pub grid_meta: GridMeta,
}

impl SumRuleReport {
    pub fn relative_residual(&self) -> f64 {
        if self.lhs == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / self.lhs
        }
    }
}

pub fn fz_sum_rule_report(v: &Potential, settings: &Settings) -> Result<SumRuleReport> {
    settings.validate()?;
    let lhs = v.l2_norm_sq(f64::INFINITY)? / 8.0;
    let eig_term = 2.0 / 3.0 * lieb_thirring_sum(&whole_line_eigenvalues(v, 0.0, settings)?);
    let q = quasi_szego_q(v, settings)?;
    Ok(SumRuleReport {
        lhs,
        eig_term,
        szego_term: q.value,
        residual: lhs - eig_term - q.value,
        tail_error: q.integral.tail_error + q.integral.body_error,
        grid_meta: GridMeta {
            k_min: settings.k_min,
            kmax: q.integral.kmax,
            ode_tol: settings.ode_tol,
            quad_tol: settings.quad_tol,
            resonances_skipped: q.resonances_skipped.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::scattering_point;

    fn s() -> Settings {
        Settings::default()
    }

    fn well() -> Potential {
        Potential::square_well(2.0, 1.0, 1e-3).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let z = Potential::zero(1e-3).unwrap();
        let k = Momentum::new(C64::new(1.0, 0.5)).unwrap();
        assert_eq!(log_relative_wronskian(&z, 2.0, k, &s()).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(log_relative_wronskian(&well(), 0.0, k, &s()).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(g_t(&z, 1.0, k, &s()).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(poisson_identity_residual(&z, 1.0, 2.0, 3.0, &s()).unwrap(), 0.0);
        assert_eq!(step_sum_rule_residual(&z, 1.0, 5.0, &s()).unwrap(), 0.0);
        let r = fz_sum_rule_report(&z, &s()).unwrap();
        assert_eq!((r.lhs, r.eig_term, r.szego_term, r.residual), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn log_matches_wronskian_ratio() {
        let k = Momentum::new(C64::new(2.0, 1.0)).unwrap();
        let la = log_relative_wronskian(&well(), 1.0, k, &s()).unwrap();
        let ratio = wronskian_ratio(&well(), 1.0, k, &s()).unwrap();
        assert!((la.exp() - ratio).norm() < 1e-7 * ratio.norm());
    }

    #[test]
    fn asymptotic_fit_square_well() {
        let fit = wronskian_asymptotics_fit(&well(), 1.0, &default_kappa_grid(), &s()).unwrap();
        assert!((fit.c1 - 1.0).abs() < 0.01, "{fit:?}");
        assert!((fit.c3 - 0.5).abs() < 0.005, "{fit:?}");
    }

    #[test]
    fn asymptotic_fit_rejects_degenerate_grid() {
        let grid = vec![50.0; 8];
        assert!(matches!(wronskian_asymptotics_fit(&well(), 1.0, &grid, &s()), Err(Error::FitConditioning { .. })));
    }

    #[test]
    fn blaschke_equal_lists_vanish() {
        let k = Momentum::new(C64::new(0.3, 2.0)).unwrap();
        assert_eq!(blaschke_log(&[2.0, 1.0], &[2.0, 1.0], k).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn blaschke_unimodular_on_real_axis() {
        let b = blaschke_log(&[1.0], &[], Momentum::real(5.0).unwrap()).unwrap();
        assert!((b.exp().norm() - 1.0).abs() < 1e-12);
        assert!(b.re.abs() < 1e-15);
    }

    #[test]
    fn blaschke_imaginary_axis_asymptotics() {
        // Exact F(iy) = log((y+1)/(y-1)) + log((y-0.5)/(y+0.5)) - 1/y; the
        // leading term is (2/(3y^3))(1 - 1/8).
        for y in [50.0, 100.0, 200.0] {
            let b = blaschke_log(&[1.0], &[0.5], Momentum::imag(y).unwrap()).unwrap();
            let model = 2.0 / (3.0 * y * y * y) * 0.875;
            assert!(b.im.abs() < 1e-15);
            assert!((b.re - model).abs() <= 5.0 / y.powi(5), "y={y}");
        }
    }

    #[test]
    fn blaschke_pole() {
        assert!(matches!(blaschke_log(&[1.0], &[], Momentum::imag(1.0).unwrap()), Err(Error::EvaluationAtPole)));
    }

    #[test]
    fn g_real_on_upper_axis_and_matches_transmission() {
        let g = GFunction::new(&well(), 1.0, &s()).unwrap();
        assert!(g.eval(Momentum::imag(100.0).unwrap()).unwrap().im.abs() < 1e-6);
        let k = 2.0;
        let re = g.eval(Momentum::real(k).unwrap()).unwrap().re;
        let t0 = scattering_point(&well(), k, 0.0, &s()).unwrap().transmission;
        let tt = scattering_point(&well(), k, 1.0, &s()).unwrap().transmission;
        assert!((re - 0.5 * (t0 / tt).ln()).abs() < 1e-6);
    }

    #[test]
    fn g_asymptotics_on_imaginary_axis() {
        let g = GFunction::new(&well(), 1.0, &s()).unwrap();
        let (a, b) = g.asymptotic_coefficients().unwrap();
        assert_eq!(a, 1.0);
        let y = 400.0;
        let val = g.eval(Momentum::imag(y).unwrap()).unwrap().re;
        assert!((val - a / y).abs() < 2.0 * b.abs() / y.powi(3) + 1e-9);
    }

    #[test]
    fn poisson_identity_square_well() {
        let r = poisson_identity(&well(), 1.0, 2.0, 3.0, &s()).unwrap();
        assert!(r.residual <= 1e-4, "{r:?}");
    }

    #[test]
    fn step_rule_at_zero_t() {
        assert_eq!(step_sum_rule_residual(&well(), 0.0, 5.0, &s()).unwrap(), 0.0);
    }

    #[test]
    fn step_kernel_monotone_in_y() {
        for xi in [0.1, 1.0, 10.0, 100.0] {
            let mut last = 0.0;
            for y in [1.0, 2.0, 5.0, 50.0] {
                let p = step_kernel(xi, y);
                assert!(p > last);
                last = p;
            }
            assert!(last < xi * xi / std::f64::consts::PI);
        }
    }

    #[test]
    fn fz_report_square_well() {
        let r = fz_sum_rule_report(&well(), &s()).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert!(r.relative_residual() <= 1e-3, "{r:?}");
        assert!(r.eig_term >= 0.0 && r.szego_term >= 0.0);
    }
}
