//! Jost solutions, the Weyl function w(k; x) and bound states.
//!
//! The Jost solution is carried in the reduced form psi = e^{ikx} phi. With
//! phi = 1, phi' = 0 at the support edge, phi stays bounded when integrating
//! backward for any k in the closed upper half-plane, so large imaginary k
//! never overflows. The Wronskian W(x, k) = e^{-ikx}(psi' + ik psi) is then
//! simply phi' + 2ik phi.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Settings;
use crate::error::{invalid, Error, Result};
use crate::ode::{self, Tolerance};
use crate::potentials::Potential;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A momentum k with Im k >= 0 and k != 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Momentum(C64);

impl Momentum {
    pub fn new(k: C64) -> Result<Momentum> {
        if !(k.re.is_finite() && k.im.is_finite()) || k.im < 0.0 || k == C64::new(0.0, 0.0) {
            return Err(invalid(format!("momentum must be nonzero with Im k >= 0, got {k}")));
        }
        Ok(Momentum(k))
    }

    pub fn real(k: f64) -> Result<Momentum> {
        Momentum::new(C64::new(k, 0.0))
    }

    /// k = i kappa.
    pub fn imag(kappa: f64) -> Result<Momentum> {
        Momentum::new(C64::new(0.0, kappa))
    }

    pub fn value(self) -> C64 {
        self.0
    }
}

/// psi_+(x, k) and its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JostData {
    pub psi: C64,
    pub dpsi: C64,
    pub x: f64,
    pub k: Momentum,
}

/// Jost solution in reduced form at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduced {
    pub x: f64,
    pub k: C64,
    pub phi: C64,
    pub dphi: C64,
    /// Integral of V(y) / (ik + w(k; y)) over [x, X]; zero unless requested.
    pub log_tail: C64,
}

impl Reduced {
    fn free(x: f64, k: C64) -> Reduced {
        Reduced { x, k, phi: C64::new(1.0, 0.0), dphi: C64::new(0.0, 0.0), log_tail: C64::new(0.0, 0.0) }
    }

    pub fn jost(&self) -> (C64, C64) {
        let e = (I * self.k * self.x).exp();
        (e * self.phi, e * (self.dphi + I * self.k * self.phi))
    }

    /// W(x, k) = phi' + 2ik phi.
    pub fn wronskian(&self) -> C64 {
        self.dphi + 2.0 * I * self.k * self.phi
    }

    fn pole_scale(&self) -> f64 {
        self.phi.norm() + self.dphi.norm() / self.k.norm().max(1.0)
    }

    /// w = psi'/psi, failing when psi is numerically zero.
    pub fn weyl(&self) -> Result<C64> {
        if self.phi.norm() < 1e-13 * self.pole_scale() {
            return Err(Error::PoleProximity { x: self.x, k_re: self.k.re, k_im: self.k.im });
        }
        Ok(I * self.k + self.dphi / self.phi)
    }

    /// Reflection coefficient (ik - w)/(ik + w), written without cancellation.
    pub fn reflection(&self) -> C64 {
        -self.dphi / (2.0 * I * self.k * self.phi + self.dphi)
    }
}

fn tolerance(settings: &Settings) -> Tolerance {
    Tolerance::new(settings.ode_tol)
}

/// Size of the reduced solution at x = 0 when the whole path is classically
/// allowed: e^{-Im k * X}. Used as the absolute floor of its error norm, so a
/// deep bound state keeps full relative accuracy where psi_+(0) is tiny.
fn reduced_envelope(v: &Potential, k: C64) -> f64 {
    (-k.im.max(0.0) * v.support_end()).exp().max(1e-290)
}

fn initial_step(k: C64, len: f64) -> f64 {
    len.min(0.05 / k.norm().max(1.0))
}

/// Descending list of node positions: the support edge, interior breakpoints
/// and the requested stops below the edge.
fn path_nodes(v: &Potential, stops: &[f64]) -> Vec<f64> {
    let x_end = v.support_end();
    let mut nodes: Vec<f64> = v.breakpoints();
    nodes.extend(stops.iter().copied().filter(|&s| s < x_end));
    nodes.push(x_end);
    nodes.sort_by(|a, b| b.total_cmp(a));
    nodes.dedup();
    nodes
}

fn inside(v: &Potential, x: f64, lo: f64, hi: f64) -> f64 {
    let eps = 1e-12 * (hi - lo);
    v.value(x.clamp(lo + eps, hi - eps))
}

/// Integrate the reduced Jost system backward and report it at every stop
/// (in the caller's order). Points at or beyond the support get free data.
pub fn reduced_profile(v: &Potential, k: Momentum, stops: &[f64], track_log: bool, settings: &Settings) -> Result<Vec<Reduced>> {
    let k = k.value();
    if stops.iter().any(|&s| !(s >= 0.0)) {
        return Err(invalid("evaluation points must be >= 0"));
    }
    let nodes = path_nodes(v, stops);
    let tol = tolerance(settings);
    let env = reduced_envelope(v, k);
    let weights = [env, env * k.norm().max(1.0), 1.0];
    let two_ik = 2.0 * I * k;
    let mut state = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    let mut at: Vec<(f64, [C64; 3])> = vec![(nodes[0], state)];
    for w in nodes.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        let h0 = initial_step(k, hi - lo);
        if track_log {
            state = ode::integrate(
                |x, y: &[C64; 3]| {
                    let vx = inside(v, x, lo, hi);
                    let wr = y[1] + two_ik * y[0];
                    [y[1], vx * y[0] - two_ik * y[1], -vx * y[0] / wr]
                },
                hi,
                state,
                lo,
                h0,
                &weights,
                &tol,
                |x, y| {
                    if y[2].is_finite() {
                        Ok(())
                    } else {
                        Err(Error::PoleCrossing { x })
                    }
                },
            )?;
        } else {
            let out = ode::integrate(
                |x, y: &[C64; 2]| {
                    let vx = inside(v, x, lo, hi);
                    [y[1], vx * y[0] - two_ik * y[1]]
                },
                hi,
                [state[0], state[1]],
                lo,
                h0,
                &[weights[0], weights[1]],
                &tol,
                |_, _| Ok(()),
            )?;
            state = [out[0], out[1], state[2]];
        }
        at.push((lo, state));
    }
    Ok(stops
        .iter()
        .map(|&s| {
            if s >= v.support_end() {
                return Reduced::free(s, k);
            }
            let (_, y) = at.iter().find(|(x, _)| *x == s).expect("stop was integrated");
            Reduced { x: s, k, phi: y[0], dphi: y[1], log_tail: y[2] }
        })
        .collect())
}

fn reduced_at(v: &Potential, k: Momentum, x: f64, settings: &Settings) -> Result<Reduced> {
    Ok(reduced_profile(v, k, &[x], false, settings)?[0])
}

/// Jost solution at x. Exact free values for x >= support_end.
pub fn jost(v: &Potential, k: Momentum, x: f64, settings: &Settings) -> Result<JostData> {
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be >= 0, got {x}")));
    }
    if x >= v.support_end() {
        let kv = k.value();
        let e = (I * kv * x).exp();
        return Ok(JostData { psi: e, dpsi: I * kv * e, x, k });
    }
    let (psi, dpsi) = reduced_at(v, k, x, settings)?.jost();
    Ok(JostData { psi, dpsi, x, k })
}

/// w(k; x) = psi'/psi from the Jost solution.
pub fn weyl_w(v: &Potential, k: Momentum, x: f64, settings: &Settings) -> Result<C64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be >= 0, got {x}")));
    }
    reduced_at(v, k, x, settings)?.weyl()
}

/// w(k; x) by integrating w' = V - k^2 - w^2 backward from w(X) = ik.
pub fn riccati_w(v: &Potential, k: Momentum, x: f64, settings: &Settings) -> Result<C64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be >= 0, got {x}")));
    }
    let kv = k.value();
    let k2 = kv * kv;
    let nodes = path_nodes(v, &[x]);
    let tol = tolerance(settings);
    let mut w = I * kv;
    for seg in nodes.windows(2) {
        let (hi, lo) = (seg[0], seg[1]);
        let out = ode::integrate(
            |y, s: &[C64; 1]| [inside(v, y, lo, hi) - k2 - s[0] * s[0]],
            hi,
            [w],
            lo,
            initial_step(kv, hi - lo),
            &[kv.norm().max(1.0)],
            &tol,
            |y, s| if s[0].norm() > 1e8 { Err(Error::PoleCrossing { x: y }) } else { Ok(()) },
        )?;
        w = out[0];
        if lo <= x {
            break;
        }
    }
    Ok(w)
}

/// W(x, k) = e^{-ikx}(psi' + ik psi).
pub fn wronskian(v: &Potential, k: Momentum, x: f64, settings: &Settings) -> Result<C64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be >= 0, got {x}")));
    }
    Ok(reduced_at(v, k, x, settings)?.wronskian())
}

/// Which operator an eigenvalue list belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    HalfLineDirichlet,
    WholeLine,
}

/// Bound-state momenta kappa_j > 0 (eigenvalues -kappa_j^2), descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueList {
    pub kappas: Vec<f64>,
    pub t: f64,
    pub kind: OperatorKind,
}

impl EigenvalueList {
    pub fn empty(t: f64, kind: OperatorKind) -> Self {
        EigenvalueList { kappas: Vec::new(), t, kind }
    }

    /// Eigenvalues -kappa^2 in increasing order.
    pub fn energies(&self) -> Vec<f64> {
        self.kappas.iter().map(|k| -k * k).collect()
    }

    pub fn len(&self) -> usize {
        self.kappas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappas.is_empty()
    }
}

/// Top of the bound-state scan, or None when V >= 0 (no negative spectrum).
fn kappa_ceiling(v: &Potential, settings: &Settings) -> Option<f64> {
    let depth = -v.min_value();
    (depth > 0.0).then(|| depth.sqrt() + settings.kappa_margin)
}

/// Sign scan on (0, kappa_max] followed by bisection. Returns descending roots.
fn scan_roots<F>(f: F, kappa_max: f64, settings: &Settings) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let n = settings.scan_points;
    let mut grid: Vec<f64> = vec![kappa_max * 1e-9];
    grid.extend((1..=n).map(|i| kappa_max * i as f64 / n as f64));
    let vals: Vec<f64> = grid.par_iter().map(|&k| f(k)).collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for i in 0..grid.len() - 1 {
        if vals[i] == 0.0 {
            brackets.push((grid[i], grid[i], vals[i]));
        } else if vals[i] * vals[i + 1] < 0.0 {
            brackets.push((grid[i], grid[i + 1], vals[i]));
        }
    }
    if vals[grid.len() - 1] == 0.0 {
        let k = grid[grid.len() - 1];
        brackets.push((k, k, 0.0));
    }
    let mut roots: Vec<f64> = brackets
        .par_iter()
        .map(|&(mut a, mut b, mut fa)| {
            while b - a > settings.root_tol {
                let m = 0.5 * (a + b);
                let fm = f(m)?;
                if fm == 0.0 {
                    return Ok(m);
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect::<Result<_>>()?;
    roots.sort_by(|a, b| b.total_cmp(a));
    roots.dedup();
    Ok(roots)
}

/// Bound states of the half-line operator with u(0) = 0: zeros of psi_+(0, i kappa).
pub fn dirichlet_eigenvalues(v: &Potential, settings: &Settings) -> Result<EigenvalueList> {
    let Some(kmax) = kappa_ceiling(v, settings) else {
        return Ok(EigenvalueList::empty(0.0, OperatorKind::HalfLineDirichlet));
    };
    let f = |kappa: f64| Ok(reduced_at(v, Momentum::imag(kappa)?, 0.0, settings)?.phi.re);
    Ok(EigenvalueList { kappas: scan_roots(f, kmax, settings)?, t: 0.0, kind: OperatorKind::HalfLineDirichlet })
}

/// Bound states of the whole-line operator with potential V on (t, inf):
/// zeros of W(t, i kappa).
pub fn whole_line_eigenvalues(v: &Potential, t: f64, settings: &Settings) -> Result<EigenvalueList> {
    if !(t >= 0.0) {
        return Err(invalid(format!("t must be >= 0, got {t}")));
    }
    let empty = EigenvalueList::empty(t, OperatorKind::WholeLine);
    if t >= v.support_end() {
        return Ok(empty);
    }
    let Some(kmax) = kappa_ceiling(&v.clone(), settings) else {
        return Ok(empty);
    };
    let f = |kappa: f64| Ok(reduced_at(v, Momentum::imag(kappa)?, t, settings)?.wronskian().re);
    Ok(EigenvalueList { kappas: scan_roots(f, kmax, settings)?, t, kind: OperatorKind::WholeLine })
}

/// For a Dirichlet bound state kappa returns (psi'(0), integral of psi^2 over [0, inf)).
/// Their ratio psi'(0)^2 / norm is the spectral weight of the eigenvalue.
pub fn bound_state_norm(v: &Potential, kappa: f64, settings: &Settings) -> Result<(f64, f64)> {
    let k = Momentum::imag(kappa)?.value();
    let x_end = v.support_end();
    let nodes = path_nodes(v, &[0.0]);
    let tol = tolerance(settings);
    let two_ik = 2.0 * I * k;
    let env = reduced_envelope(v, k);
    let tail = (-2.0 * kappa * x_end).exp() / (2.0 * kappa);
    let mut state = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(tail, 0.0)];
    for w in nodes.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        state = ode::integrate(
            |x, y: &[C64; 3]| {
                let vx = inside(v, x, lo, hi);
                [y[1], vx * y[0] - two_ik * y[1], -(-2.0 * kappa * x).exp() * y[0] * y[0]]
            },
            hi,
            state,
            lo,
            initial_step(k, hi - lo),
            &[env, env * k.norm().max(1.0), tail.max(1e-300)],
            &tol,
            |_, _| Ok(()),
        )?;
    }
    let dpsi0 = state[1].re - kappa * state[0].re;
    Ok((dpsi0, state[2].re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Settings {
        Settings::default()
    }

    fn well() -> Potential {
        Potential::square_well(2.0, 1.0, 1e-3).unwrap()
    }

    #[test]
    fn momentum_validation() {
        assert!(Momentum::new(C64::new(1.0, -0.1)).is_err());
        assert!(Momentum::real(0.0).is_err());
        assert!(Momentum::imag(2.0).is_ok());
    }

    #[test]
    fn free_jost() {
        let z = Potential::zero(1e-3).unwrap();
        let j = jost(&z, Momentum::imag(1.0).unwrap(), 0.0, &s()).unwrap();
        assert_eq!(j.psi, C64::new(1.0, 0.0));
        assert_eq!(j.dpsi, C64::new(-1.0, 0.0));
        let j = jost(&z, Momentum::real(2.0).unwrap(), 3.0, &s()).unwrap();
        assert_eq!(j.psi, (I * 6.0).exp());
        assert_eq!(j.dpsi, 2.0 * I * (I * 6.0).exp());
        assert_eq!(weyl_w(&z, Momentum::imag(0.7).unwrap(), 0.0, &s()).unwrap(), C64::new(-0.7, 0.0));
        assert_eq!(weyl_w(&z, Momentum::real(3.0).unwrap(), 0.0, &s()).unwrap(), C64::new(0.0, 3.0));
        assert_eq!(riccati_w(&z, Momentum::real(3.0).unwrap(), 0.5, &s()).unwrap(), C64::new(0.0, 3.0));
    }

    #[test]
    fn jost_beyond_support_is_exact() {
        let v = well();
        let k = Momentum::new(C64::new(1.3, 0.2)).unwrap();
        let j = jost(&v, k, 1.7, &s()).unwrap();
        let e = (I * k.value() * 1.7).exp();
        assert_eq!(j.psi, e);
        assert_eq!(wronskian(&v, k, 2.0, &s()).unwrap(), 2.0 * I * k.value());
    }

    #[test]
    fn riccati_agrees_with_jost() {
        let v = well();
        for k in [C64::new(1.0, 0.0), C64::new(1.0, 0.5), C64::new(7.0, 0.1)] {
            let m = Momentum::new(k).unwrap();
            let a = weyl_w(&v, m, 0.0, &s()).unwrap();
            let b = riccati_w(&v, m, 0.0, &s()).unwrap();
            assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()), "{k}: {a} vs {b}");
        }
    }

    #[test]
    fn dirichlet_bound_state_is_a_pole() {
        // sqrt(2) < pi/2, so the depth-2 well has no Dirichlet state; depth 4 has one
        assert!(dirichlet_eigenvalues(&well(), &s()).unwrap().is_empty());
        let v = Potential::square_well(4.0, 1.0, 1e-3).unwrap();
        let eig = dirichlet_eigenvalues(&v, &s()).unwrap();
        assert_eq!(eig.len(), 1);
        // closed form: kappa = -q cot q with q = sqrt(4 - kappa^2)
        let kap = eig.kappas[0];
        let q = (4.0 - kap * kap).sqrt();
        assert!((kap + q / q.tan()).abs() < 1e-8);
        let m = Momentum::imag(kap).unwrap();
        // the root is only known to ~1e-10, so w is either rejected or huge
        match weyl_w(&v, m, 0.0, &s()) {
            Err(Error::PoleProximity { .. }) => {}
            Ok(w) => assert!(w.norm() > 1e6, "{w}"),
            Err(e) => panic!("{e}"),
        }
        assert!(riccati_w(&v, m, 0.0, &s()).is_err());
    }

    #[test]
    fn nonnegative_potential_has_no_bound_states() {
        let v = Potential::gaussian_bump(1.0, 3.0, 0.5, 8.0, 1e-3).unwrap();
        assert!(dirichlet_eigenvalues(&v, &s()).unwrap().is_empty());
        assert!(whole_line_eigenvalues(&v, 0.0, &s()).unwrap().is_empty());
        assert!(whole_line_eigenvalues(&well(), 1.0, &s()).unwrap().is_empty());
    }

    #[test]
    fn whole_line_well_matches_even_odd_matching() {
        // V = -2 on (0,1) for the whole line is a symmetric well of width 1:
        // even states satisfy q tan(q/2) = kappa, odd states -q cot(q/2) = kappa.
        let eig = whole_line_eigenvalues(&well(), 0.0, &s()).unwrap();
        assert_eq!(eig.len(), 1);
        let kap = eig.kappas[0];
        let q = (2.0 - kap * kap).sqrt();
        assert!((q * (0.5 * q).tan() - kap).abs() < 1e-8);
    }

    #[test]
    fn bound_state_norm_matches_closed_form() {
        let v = Potential::square_well(4.0, 1.0, 1e-3).unwrap();
        let kap = dirichlet_eigenvalues(&v, &s()).unwrap().kappas[0];
        let (d, n) = bound_state_norm(&v, kap, &s()).unwrap();
        // u = sin(qx) inside, sin(q) e^{-kappa(x-1)} outside
        let q = (4.0 - kap * kap).sqrt();
        let norm_u = 0.5 - (2.0 * q).sin() / (4.0 * q) + q.sin().powi(2) / (2.0 * kap);
        assert!((d * d / n - q * q / norm_u).abs() < 1e-7 * q * q / norm_u);
    }
}
