//! Dormand-Prince 5(4) stepper for small complex systems.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Error control for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    /// Per-component absolute scale; the absolute tolerance is `rtol * scale[i]`.
    pub scale: f64,
    pub max_steps: usize,
}

impl Tolerance {
    pub fn new(rtol: f64) -> Self {
        Tolerance { rtol, scale: 1.0, max_steps: 2_000_000 }
    }
}

fn axpy<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += k[i] * (h * c);
            }
        }
    }
    out
}

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction).
///
/// `weights[i]` rescales component i in the error norm, so components of
/// different natural size share one tolerance. `guard` runs after every
/// accepted step and may abort the integration.
pub fn integrate<const N: usize, F, G>(
    mut f: F,
    x0: f64,
    y0: [C64; N],
    x1: f64,
    h_init: f64,
    weights: &[f64; N],
    tol: &Tolerance,
    mut guard: G,
) -> Result<[C64; N]>
where
    F: FnMut(f64, &[C64; N]) -> [C64; N],
    G: FnMut(f64, &[C64; N]) -> Result<()>,
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = h_init.abs().min(span.abs()).max(span.abs() * 1e-12);
    let mut k1 = f(x, &y);
    let h_floor = 1e-14 * (x0.abs() + x1.abs()).max(1.0);
    let atol = tol.rtol * tol.scale;
    for _ in 0..tol.max_steps {
        let remaining = (x1 - x).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;
        let k2 = f(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(x + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(
            x + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let x_new = if last { x1 } else { x + hs };
        let k7 = f(x_new, &y_new);
        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            let sc = atol * weights[i] + tol.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < h_floor {
                return Err(Error::NumericFailure { x });
            }
            continue;
        }
        if err <= 1.0 {
            x = x_new;
            y = y_new;
            k1 = k7;
            guard(x, &y)?;
            if last {
                return Ok(y);
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_floor {
                return Err(Error::NumericFailure { x });
            }
        }
    }
    Err(Error::NumericFailure { x })
}
