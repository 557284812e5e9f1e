//! Momentum-space integrals of the measure conditions.

use serde::Serialize;

use super::maximal::{MaximalMode, MaximalOperator};
use super::measure::LineMeasure;
use crate::config::Settings;
use crate::error::{invalid, Error, Result};
use crate::potentials::Potential;
use crate::quad::{integrate, integrate_clustered, QuadOptions};
use crate::scattering::{half_line_integral, quasi_szego_q, scattering_point};
use crate::spectral::SignedMeasureNu;

/// Partial integrals over a doubling ladder of ranges [lo, R_i].
///
/// Finiteness cannot be decided on a truncated range; instead the last
/// increments are compared. A tail decaying like R^-a shrinks them by 2^-a
/// per doubling, while log or power growth keeps them level or growing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeGrowth {
    pub value: f64,
    pub ranges: Vec<f64>,
    pub partials: Vec<f64>,
    pub divergent: bool,
    /// Summed quadrature error estimate over all pieces.
    pub error: f64,
}

/// Relative tolerance for integrals of maximal functions. Their integrands
/// have kinks at every grid node and log peaks at atoms, and the range-doubling
/// decision needs far less than the default accuracy.
pub const MAXIMAL_QUAD_TOL: f64 = 1e-6;

/// Panel budget per breakpoint interval for maximal-function integrals.
const MAXIMAL_PANELS: usize = 4000;

/// Relative error above which a range-doubling integral is rejected.
const GROSS_ERROR: f64 = 1e-3;

/// Ratio of successive increments above which growth is reported.
const GROWTH_RATIO: f64 = 0.9;

impl RangeGrowth {
    pub fn zero() -> RangeGrowth {
        RangeGrowth { value: 0.0, ranges: Vec::new(), partials: Vec::new(), divergent: false, error: 0.0 }
    }

    fn from_partials(ranges: Vec<f64>, partials: Vec<f64>, error: f64, tol: f64) -> RangeGrowth {
        let value = *partials.last().unwrap_or(&0.0);
        let n = partials.len();
        let divergent = n >= 3 && {
            let d_last = partials[n - 1] - partials[n - 2];
            let d_prev = partials[n - 2] - partials[n - 3];
            d_last.abs() > (tol * value.abs().max(1.0)).max(10.0 * error) && d_last.abs() >= GROWTH_RATIO * d_prev.abs()
        };
        RangeGrowth { value, ranges, partials, divergent, error }
    }
}

/// Integrate `f` over [lo, hi] in consecutive pieces ending at hi/8, hi/4, hi/2, hi
/// (measured from lo) and report the running totals.
pub fn range_doubling<F>(f: F, lo: f64, hi: f64, breakpoints: &[f64], settings: &Settings) -> Result<RangeGrowth>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(hi > lo) {
        return Ok(RangeGrowth::zero());
    }
    let ranges: Vec<f64> = [0.125, 0.25, 0.5, 1.0].iter().map(|s| lo + s * (hi - lo)).collect();
    let mut partials = Vec::new();
    let mut start = lo;
    let mut total = 0.0;
    let mut error = 0.0;
    for &end in &ranges {
        let bps: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > start && b < end).collect();
        let mut opts = QuadOptions::new(settings.quad_tol.max(MAXIMAL_QUAD_TOL)).abs_tol(1e-12).breakpoints(bps);
        opts.max_panels = MAXIMAL_PANELS;
        let r = integrate_clustered(&f, start, end, &opts)?;
        total += r.value;
        error += r.error;
        partials.push(total);
        start = end;
    }
    // Peaks of tiny atoms far out are narrower than the rounding of k allows
    // to resolve, so the requested tolerance is not always reachable; only
    // a gross shortfall is an error.
    if !(error <= GROSS_ERROR * total.abs().max(1.0)) {
        return Err(Error::QuadratureFailure { error, intervals: 0 });
    }
    Ok(RangeGrowth::from_partials(ranges, partials, error, settings.quad_tol.max(1e-6)))
}

/// Sum over unit cells [n, n + 1) of |nu|(cell)^2.
pub fn ell2m_norm_sq(nu: &SignedMeasureNu) -> f64 {
    cell_masses(nu).iter().map(|(_, m)| m * m).sum()
}

/// (n, |nu|([n, n + 1))) for every cell meeting the support.
pub fn cell_masses(nu: &SignedMeasureNu) -> Vec<(i64, f64)> {
    let Some((lo, hi)) = nu.support() else {
        return Vec::new();
    };
    let p = LineMeasure::from_nu(nu).abs_profile();
    (lo.floor() as i64..=hi.floor() as i64)
        .map(|n| (n, p.variation_half_open(n as f64, n as f64 + 1.0)))
        .filter(|(_, m)| *m > 0.0)
        .collect()
}

fn measure_breakpoints(nu: &SignedMeasureNu) -> Vec<f64> {
    let mut out: Vec<f64> = nu.point_masses.iter().flat_map(|&(p, _)| [p - 1.0, p, p + 1.0]).collect();
    if let Some((lo, hi)) = nu.support() {
        out.extend([lo - 1.0, lo, lo + 1.0, hi - 1.0, hi, hi + 1.0]);
    }
    out
}

/// Integral of log[1 + (M_s nu(k)/k)^2] k^2 over the represented range, with
/// range-doubling growth.
pub fn normalization_integral(nu: &SignedMeasureNu, settings: &Settings) -> Result<RangeGrowth> {
    let Some((lo, hi)) = nu.support() else {
        return Ok(RangeGrowth::zero());
    };
    let op = MaximalOperator::for_nu(nu);
    let f = |k: f64| {
        if k <= 0.0 {
            return Ok(0.0);
        }
        let m = op.eval(k, MaximalMode::Short);
        // M_s is infinite only exactly on an atom, a null set that quadrature
        // nodes hit by rounding; the log singularity around it is integrable.
        Ok(if m.is_finite() { (m / k).powi(2).ln_1p() * k * k } else { 0.0 })
    };
    range_doubling(f, (lo - 1.0).max(0.0), hi + 1.0, &measure_breakpoints(nu), settings)
}

/// Integral of M_l nu(k)^2 over [0, far], a lower estimate of the
/// full half-line integral (the tail beyond `far` is dropped).
pub fn long_maximal_l2(nu: &SignedMeasureNu, settings: &Settings) -> Result<f64> {
    let Some((lo, hi)) = nu.support() else {
        return Ok(0.0);
    };
    let op = MaximalOperator::for_nu(nu);
    let far = hi + 10.0 * (hi - lo + 1.0);
    let opts = QuadOptions::new(settings.quad_tol).abs_tol(1e-12).breakpoints(measure_breakpoints(nu));
    let r = integrate(|k: f64| Ok(op.eval(k, MaximalMode::Long).powi(2)), 0.0, far, &opts)?;
    Ok(r.value)
}

/// log(1/4 delta + 1/2 + 1/(4 delta)) written as log1p((delta - 1)^2 / (4 delta)).
pub fn qs_log(delta: f64) -> f64 {
    ((delta - 1.0).powi(2) / (4.0 * delta)).ln_1p()
}

/// Quasi-Szego integral of a density ratio given in energy, over [e_lo, e_hi].
pub fn quasi_szego_energy_form<F>(delta: F, e_lo: f64, e_hi: f64, breakpoints: &[f64], settings: &Settings) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(e_hi >= e_lo && e_lo >= 0.0) {
        return Err(invalid("energy range must satisfy 0 <= lo <= hi"));
    }
    let f = |e: f64| {
        let d = delta(e);
        if !(d > 0.0) {
            return Err(Error::NonpositiveDensity { k: e.sqrt() });
        }
        Ok(qs_log(d) * e.sqrt())
    };
    let opts = QuadOptions::new(settings.quad_tol).abs_tol(1e-14).breakpoints(breakpoints.to_vec());
    Ok(integrate(f, e_lo, e_hi, &opts)?.value)
}

/// Both normalizations of the quasi-Szego integral. The energy form
/// (integral against sqrt(E) dE) is exactly twice the momentum form (against k^2 dk).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiSzegoForms {
    pub energy_form: f64,
    pub momentum_form: f64,
}

fn delta_of(k: f64, w_im: f64) -> Result<f64> {
    let d = w_im / k;
    if !(d > 0.0) {
        return Err(Error::NonpositiveDensity { k });
    }
    Ok(d)
}

pub fn quasi_szego_integral(v: &Potential, settings: &Settings) -> Result<QuasiSzegoForms> {
    settings.validate()?;
    if v.is_zero() {
        return Ok(QuasiSzegoForms { energy_form: 0.0, momentum_form: 0.0 });
    }
    let (vv, s) = (v.clone(), *settings);
    let g = move |k: f64| {
        let p = scattering_point(&vv, k, 0.0, &s)?;
        Ok(qs_log(delta_of(k, p.w.im)?) * k * k)
    };
    let (integral, _) = half_line_integral(v, g, settings)?;
    Ok(QuasiSzegoForms { energy_form: 2.0 * integral.value, momentum_form: integral.value })
}

/// Quasi-Szego integral of a measure over its represented density range,
/// with delta = 1 + nu'(k)/k. Atoms are singular and do not enter.
pub fn quasi_szego_from_nu(nu: &SignedMeasureNu, settings: &Settings) -> Result<QuasiSzegoForms> {
    let (Some(&lo), Some(&hi)) = (nu.k_grid.first(), nu.k_grid.last()) else {
        return Ok(QuasiSzegoForms { energy_form: 0.0, momentum_form: 0.0 });
    };
    let f = |k: f64| {
        let d = 1.0 + nu.density_at(k) / k;
        if !(d > 0.0) {
            return Err(Error::NonpositiveDensity { k });
        }
        Ok(qs_log(d) * k * k)
    };
    let opts = QuadOptions::new(settings.quad_tol).abs_tol(1e-14);
    let m = integrate(f, lo, hi, &opts)?.value;
    Ok(QuasiSzegoForms { energy_form: 2.0 * m, momentum_form: m })
}

/// Strong quasi-Szego integral, equal to pi Q.
pub fn sqs_integral(v: &Potential, settings: &Settings) -> Result<f64> {
    Ok(std::f64::consts::PI * quasi_szego_q(v, settings)?.value)
}

fn re_w_integral<F>(v: &Potential, settings: &Settings, term: F) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send + 'static,
{
    if v.is_zero() {
        return Ok(0.0);
    }
    let (vv, s) = (v.clone(), *settings);
    let g = move |k: f64| {
        let p = scattering_point(&vv, k, 0.0, &s)?;
        let delta = delta_of(k, p.w.im)?;
        Ok(term(k, p.w.re / k, delta) * k * k)
    };
    Ok(half_line_integral(v, g, settings)?.0.value)
}

/// R = integral of log(1 + (Re w/k)^2) k^2.
pub fn r_integral(v: &Potential, settings: &Settings) -> Result<f64> {
    settings.validate()?;
    re_w_integral(v, settings, |_, f, _| (f * f).ln_1p())
}

/// Second factor of the SQS integrand split: integral of
/// log(1 + (Re w/k)^2 / (1 + delta)^2) k^2.
pub fn sqs_cross_term(v: &Potential, settings: &Settings) -> Result<f64> {
    settings.validate()?;
    re_w_integral(v, settings, |_, f, d| (f * f / ((1.0 + d) * (1.0 + d))).ln_1p())
}

/// Checks of three log inequalities for f >= 0 and eps in (0, 1]:
/// log(1+f^2) <= log(1+eps f^2)/eps, log(1+f^2) <= log(1+eps f^2) + log(1+1/eps),
/// and, when delta = eps^{-1/2} - 1 >= 6, log(1+1/eps) <= 6 log(delta/4 + 1/2 + 1/(4 delta)).
pub fn llog_check(f: f64, eps: f64) -> bool {
    if !(f >= 0.0 && eps > 0.0 && eps <= 1.0) {
        return false;
    }
    let slack = |x: f64| x * (1.0 + 1e-12) + 1e-300;
    let lhs = (f * f).ln_1p();
    let small = (eps * f * f).ln_1p();
    let first = lhs <= slack(small / eps);
    let second = lhs <= slack(small + (1.0 / eps).ln_1p());
    let delta = eps.powf(-0.5) - 1.0;
    let third = delta < 6.0 || (1.0 / eps).ln_1p() <= slack(6.0 * qs_log(delta));
    first && second && third
}
