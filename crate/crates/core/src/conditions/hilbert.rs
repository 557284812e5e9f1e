//! Hilbert transform (1/pi) PV of the integral of d mu(y) / (x - y), and its split
//! into the short-range kernel (1/u - u)/pi on |u| < 1 and the long-range
//! remainder (u/pi on |u| < 1, 1/(pi u) outside).
//!
//! H and H_l are exact for the piecewise-linear density. H_s is computed
//! independently by symmetric-pair quadrature with an epsilon ladder, so
//! H_s + H_l = H is a real consistency check.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::measure::{LineMeasure, Piece};
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HilbertMode {
    #[serde(rename = "H")]
    Full,
    #[serde(rename = "Hs")]
    Short,
    #[serde(rename = "Hl")]
    Long,
}

/// Epsilon ladder for the principal value.
const EPS_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

pub fn hilbert_transform(mu: &LineMeasure, x: f64, mode: HilbertMode) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid("x must be finite"));
    }
    match mode {
        HilbertMode::Full => full(mu, x),
        HilbertMode::Long => long(mu, x),
        HilbertMode::Short => short(mu, x),
    }
}

fn check_atom(mu: &LineMeasure, x: f64) -> Result<()> {
    if mu.atom_at(x).is_some() {
        return Err(Error::AtomAtSingularity { x });
    }
    Ok(())
}

/// Integral of d(y) / (x - y) over [a, b] within one piece, as
/// d(x) log|x - a| - d(x) log|x - b| - s (b - a). Terms whose log argument is
/// exactly zero are left out and their coefficients returned separately.
fn cauchy_piece(p: &Piece, a: f64, b: f64, x: f64, singular: &mut f64) -> f64 {
    let dx = p.at(x);
    let mut out = -p.slope() * (b - a);
    for (y, sign) in [(a, 1.0), (b, -1.0)] {
        let u = (x - y).abs();
        if u == 0.0 {
            *singular += sign * dx;
        } else {
            out += sign * dx * u.ln();
        }
    }
    out
}

fn finish_singular(value: f64, singular: f64, scale: f64, x: f64) -> Result<f64> {
    if singular.abs() > 1e-12 * scale.max(1.0) {
        return Err(invalid(format!("density jumps at x = {x}; the principal value diverges")));
    }
    Ok(value)
}

fn scale_of(mu: &LineMeasure) -> f64 {
    mu.pieces().iter().map(|p| p.d0.abs().max(p.d1.abs())).fold(0.0, f64::max)
}

fn full(mu: &LineMeasure, x: f64) -> Result<f64> {
    check_atom(mu, x)?;
    let mut singular = 0.0;
    let mut sum = 0.0;
    for p in mu.pieces() {
        sum += cauchy_piece(p, p.x0, p.x1, x, &mut singular);
    }
    for &(y, w) in mu.atoms() {
        sum += w / (x - y);
    }
    finish_singular(sum / PI, singular, scale_of(mu), x)
}

/// Integral of u d(y) dy over [a, b] with u = x - y.
fn linear_moment(p: &Piece, a: f64, b: f64, x: f64) -> f64 {
    // d(y) = d(x) - s u; integrate (d(x) u - s u^2) du over u in [x - b, x - a].
    let dx = p.at(x);
    let s = p.slope();
    let (u0, u1) = (x - b, x - a);
    dx * 0.5 * (u1 * u1 - u0 * u0) - s * (u1.powi(3) - u0.powi(3)) / 3.0
}

fn long(mu: &LineMeasure, x: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut singular = 0.0;
    for p in mu.pieces() {
        let cuts = [p.x0, (x - 1.0).clamp(p.x0, p.x1), (x + 1.0).clamp(p.x0, p.x1), p.x1];
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            if (x - mid).abs() < 1.0 {
                sum += linear_moment(p, a, b, x);
            } else {
                sum += cauchy_piece(p, a, b, x, &mut singular);
            }
        }
    }
    for &(y, w) in mu.atoms() {
        let u = x - y;
        sum += if u.abs() < 1.0 { w * u } else { w / u };
    }
    // The log terms cannot be singular here: |x - y| >= 1 on those parts.
    Ok(sum / PI)
}

fn short(mu: &LineMeasure, x: f64) -> Result<f64> {
    check_atom(mu, x)?;
    let mut atoms = 0.0;
    for &(y, w) in mu.atoms() {
        let u = x - y;
        if u.abs() < 1.0 {
            atoms += w * (1.0 / u - u);
        }
    }
    // -u part of the kernel in closed form.
    let mut moment = 0.0;
    for p in mu.pieces() {
        let (a, b) = (p.x0.max(x - 1.0), p.x1.min(x + 1.0));
        if b > a {
            moment += linear_moment(p, a, b, x);
        }
    }
    let pair = symmetric_pair_pv(mu, x)?;
    Ok((pair - moment + atoms) / PI)
}

/// PV of the integral of d(y)/(x - y) over |x - y| < 1 for the density part, as
/// the limit eps -> 0 of the integral over s in [eps, 1] of (d(x - s) - d(x + s))/s.
fn symmetric_pair_pv(mu: &LineMeasure, x: f64) -> Result<f64> {
    let nodes = mu.nodes();
    let near: Vec<f64> = nodes.iter().map(|n| (n - x).abs()).filter(|&s| s < 1.0).collect();
    // The integrand is constant for s below the nearest nonzero node distance,
    // so the ladder is kept under it and the extrapolation is exact there.
    let gap = near.iter().copied().filter(|&s| s > 0.0).fold(1.0, f64::min);
    let ladder: Vec<f64> = EPS_LADDER.iter().map(|&e| e.min(0.5 * gap * e / EPS_LADDER[0])).collect();
    let mut singular = 0.0;
    for p in mu.pieces() {
        if p.x0 == x {
            singular += p.d0;
        }
        if p.x1 == x {
            singular -= p.d1;
        }
    }
    finish_singular(0.0, singular, scale_of(mu), x)?;
    let density = |y: f64| mu.density_at(y);
    let f = |s: f64| Ok((density(x - s) - density(x + s)) / s);
    let opts = QuadOptions::new(1e-13).abs_tol(1e-15).panels(2).breakpoints(near.clone());
    let vals: Vec<f64> = ladder
        .iter()
        .map(|&eps| integrate(f, eps, 1.0, &opts).map(|r| r.value))
        .collect::<Result<_>>()?;
    // Quadratic extrapolation of I(eps) to eps = 0 through the three rungs.
    let (e, v) = (&ladder, &vals);
    let mut out = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if j != i {
                w *= e[j] / (e[j] - e[i]);
            }
        }
        out += w * v[i];
    }
    Ok(out)
}
