//! Transmission, reflection and the quasi-Szego functional Q.

use std::sync::Mutex;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::Settings;
use crate::error::{invalid, Error, Result};
use crate::potentials::Potential;
use crate::quad::{integrate_to_infinity, QuadOptions, TailedIntegral};
use crate::schrodinger::{reduced_profile, Momentum, Reduced};

/// Scattering data at one real momentum for the operator truncated at t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringPoint {
    pub k: f64,
    pub w: C64,
    #[serde(rename = "T")]
    pub transmission: f64,
    pub r: C64,
}

impl ScatteringPoint {
    fn from_reduced(k: f64, red: &Reduced) -> Result<ScatteringPoint> {
        let w = red.weyl().map_err(|_| Error::ResonanceProximity { k })?;
        let denom = (w + C64::new(0.0, k)).norm_sqr();
        Ok(ScatteringPoint { k, w, transmission: 4.0 * k * w.im / denom, r: red.reflection() })
    }

    /// -log T computed from |r|^2, accurate when T is close to 1.
    pub fn log_inverse_transmission(&self) -> f64 {
        -(-self.r.norm_sqr()).ln_1p()
    }
}

fn real_momentum(k: f64) -> Result<Momentum> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid(format!("scattering needs real k > 0, got {k}")));
    }
    Momentum::real(k)
}

/// Scattering data for the potential restricted to [t, inf).
pub fn scattering_point(v: &Potential, k: f64, t: f64, settings: &Settings) -> Result<ScatteringPoint> {
    let red = reduced_profile(v, real_momentum(k)?, &[t], false, settings)?[0];
    ScatteringPoint::from_reduced(k, &red)
}

/// Scattering data at x = 0 and x = t from one backward integration.
pub fn scattering_pair(v: &Potential, k: f64, t: f64, settings: &Settings) -> Result<(ScatteringPoint, ScatteringPoint)> {
    let reds = reduced_profile(v, real_momentum(k)?, &[0.0, t], false, settings)?;
    Ok((ScatteringPoint::from_reduced(k, &reds[0])?, ScatteringPoint::from_reduced(k, &reds[1])?))
}

/// T(k, t) = 4k Im w / |w + ik|^2.
pub fn transmission(v: &Potential, k: f64, t: f64, settings: &Settings) -> Result<f64> {
    Ok(scattering_point(v, k, t, settings)?.transmission)
}

/// r(k) = (ik - w)/(ik + w) with w = w(k; 0).
pub fn reflection(v: &Potential, k: f64, settings: &Settings) -> Result<C64> {
    Ok(scattering_point(v, k, 0.0, settings)?.r)
}

/// sup over z in the upper half-plane of |(ik - z)/(ik + z)| for arg k = eta.
pub fn mobius_sup_bound(eta: f64) -> Result<f64> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&eta) {
        return Err(invalid(format!("eta must lie in [0, pi/2), got {eta}")));
    }
    let s = eta.sin();
    Ok(((1.0 + s) / (1.0 - s)).sqrt())
}

/// Partial sum of -log(1 - x) = sum x^m / m with x = |r|^2, and the bound
/// x^{M+1} / ((M+1)(1 - x)) on what is left.
pub fn log_series(r_abs: f64, terms: usize) -> (f64, f64) {
    let x = r_abs * r_abs;
    let mut sum = 0.0;
    let mut pow = 1.0;
    for m in 1..=terms {
        pow *= x;
        sum += pow / m as f64;
    }
    let bound = pow * x / ((terms + 1) as f64 * (1.0 - x));
    (sum, bound)
}

/// Momentum cutoff for half-line integrals: 60 (1 + sqrt(max |V|)) unless set.
pub fn default_kmax(v: &Potential, settings: &Settings) -> f64 {
    settings.kmax.unwrap_or_else(|| 60.0 * (1.0 + v.max_abs().sqrt()))
}

/// Initial uniform panels: roughly one per oscillation of |r(k)|^2.
pub(crate) fn initial_panels(v: &Potential, kmax: f64) -> usize {
    ((kmax * v.support_end() / std::f64::consts::PI).ceil() as usize).clamp(16, 400)
}

/// Evaluate `f`, stepping around isolated resonances: a failure at k is
/// replaced by the mean of the values at k(1 -+ 1e-6) and k is recorded.
pub(crate) fn skip_resonances<F>(f: F, skipped: &Mutex<Vec<f64>>) -> impl Fn(f64) -> Result<f64> + Sync + '_
where
    F: Fn(f64) -> Result<f64> + Sync + 'static,
{
    move |k| match f(k) {
        Err(Error::ResonanceProximity { .. }) | Err(Error::PoleProximity { .. }) => {
            let lo = f(k * (1.0 - 1e-6))?;
            let hi = f(k * (1.0 + 1e-6))?;
            skipped.lock().expect("resonance log poisoned").push(k);
            Ok(0.5 * (lo + hi))
        }
        other => other,
    }
}

/// Q = -(1/pi) * integral of log T(k, 0) k^2 over (0, inf).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiSzego {
    pub value: f64,
    pub integral: TailedIntegral,
    pub resonances_skipped: Vec<f64>,
}

/// Integrate `g` over (k_min, inf) with the shared half-line engine.
pub(crate) fn half_line_integral<G>(v: &Potential, g: G, settings: &Settings) -> Result<(TailedIntegral, Vec<f64>)>
where
    G: Fn(f64) -> Result<f64> + Sync + 'static,
{
    let kmax = default_kmax(v, settings);
    let skipped = Mutex::new(Vec::new());
    let f = skip_resonances(g, &skipped);
    let opts = QuadOptions::new(settings.quad_tol).abs_tol(1e-13).panels(initial_panels(v, kmax));
    let integral = integrate_to_infinity(&f, settings.k_min, kmax, &opts, settings.tail_tol)?;
    drop(f);
    let mut skipped = skipped.into_inner().expect("resonance log poisoned");
    skipped.sort_by(f64::total_cmp);
    Ok((integral, skipped))
}

pub fn quasi_szego_q(v: &Potential, settings: &Settings) -> Result<QuasiSzego> {
    settings.validate()?;
    if v.is_zero() {
        return Ok(QuasiSzego {
            value: 0.0,
            integral: TailedIntegral { value: 0.0, body: 0.0, body_error: 0.0, tail: 0.0, tail_error: 0.0, kmax: 0.0 },
            resonances_skipped: Vec::new(),
        });
    }
    let vv = v.clone();
    let s = *settings;
    let g = move |k: f64| Ok(scattering_point(&vv, k, 0.0, &s)?.log_inverse_transmission() * k * k / std::f64::consts::PI);
    let (integral, resonances_skipped) = half_line_integral(v, g, settings)?;
    Ok(QuasiSzego { value: integral.value, integral, resonances_skipped })
}
