//! Library results against independent closed forms and discretizations.

mod common;

use std::f64::consts::PI;

use statrs::function::erf::erf;

use common::{fd_dirichlet, fd_whole_line, gaussian, settings, well, well_transmission};
use weyl_core::conditions::{conditions_report, conditions_report_for_measure, local_solubility_integral, NuGrid};
use weyl_core::scattering::scattering_point;
use weyl_core::schrodinger::{dirichlet_eigenvalues, whole_line_eigenvalues};
use weyl_core::spectral::{rho0_density, spectral_density};
use weyl_core::sumrules::fz_sum_rule_report;
use weyl_core::{Potential, SignedMeasureNu};

/// Dirichlet bound states of a square well: q cot(q a) = -kappa with
/// q^2 + kappa^2 = V0, one root per branch of cot, found by bisection.
/// kappa = sqrt(V0) (q = 0) solves the cleared form trivially and is skipped.
fn well_dirichlet_kappas(v0: f64, a: f64) -> Vec<f64> {
    let f = |kappa: f64| {
        let q = (v0 - kappa * kappa).sqrt();
        q * (q * a).cos() + kappa * (q * a).sin()
    };
    let n = 20_000;
    let top = v0.sqrt();
    let mut roots = Vec::new();
    for i in 0..n - 1 {
        let (mut lo, mut hi) = (top * i as f64 / n as f64, top * (i + 1) as f64 / n as f64);
        if lo == 0.0 {
            lo = 1e-12;
        }
        if f(lo).signum() == f(hi).signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.reverse();
    roots
}

#[test]
fn square_well_transmission_matches_closed_form() {
    let s = settings();
    for (v0, a) in [(2.0, 1.0), (8.0, 1.0), (0.5, 5.0)] {
        let v = Potential::square_well(v0, a, 1e-3).unwrap();
        for i in 0..60 {
            let k = 0.02 + 0.4 * i as f64;
            let t = scattering_point(&v, k, 0.0, &s).unwrap().transmission;
            let exact = well_transmission(v0, a, k);
            assert!((t - exact).abs() <= 1e-8, "V0={v0} a={a} k={k}: {t} vs {exact}");
        }
    }
}

#[test]
fn square_well_dirichlet_roots_match_transcendental_equation() {
    let s = settings();
    for (v0, a) in [(2.0, 1.0), (8.0, 1.0), (4.0, 3.0), (9.0, 5.0)] {
        let v = Potential::square_well(v0, a, 1e-3).unwrap();
        let got = dirichlet_eigenvalues(&v, &s).unwrap().kappas;
        let want = well_dirichlet_kappas(v0, a);
        assert_eq!(got.len(), want.len(), "V0={v0} a={a}");
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-8, "V0={v0} a={a}: {g} vs {w}");
        }
    }
}

#[test]
fn gaussian_bound_states_match_finite_differences() {
    let s = settings();
    let v = Potential::gaussian_bump(-6.0, 3.0, 0.7, 9.0, 1e-3).unwrap();
    let cases = [
        (dirichlet_eigenvalues(&v, &s).unwrap().energies(), fd_dirichlet(&v, 2e-4)),
        (whole_line_eigenvalues(&v, 0.0, &s).unwrap().energies(), fd_whole_line(&v, 2e-4)),
    ];
    for (roots, oracle) in cases {
        assert!(!roots.is_empty());
        assert_eq!(roots.len(), oracle.len());
        for (a, b) in roots.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-5, "{a} vs {b}");
        }
    }
}

#[test]
fn free_spectral_density() {
    let v = Potential::zero(1e-3).unwrap();
    for e in [0.01, 0.5, 2.0, 100.0] {
        let rho = spectral_density(&v, e, &settings()).unwrap();
        assert!((rho - e.sqrt() / PI).abs() <= 1e-14);
        assert_eq!(rho0_density(e).unwrap(), e.sqrt() / PI);
    }
}

#[test]
fn sum_rule_terms_close() {
    let s = settings();
    for v in [well(), gaussian()] {
        let r = fz_sum_rule_report(&v, &s).unwrap();
        assert_eq!(r.residual, r.lhs - r.eig_term - r.szego_term);
        assert!(r.eig_term >= 0.0 && r.szego_term >= 0.0 && r.lhs > 0.0);
        assert!(r.relative_residual() <= 1e-3);
    }
    // The well has lhs = V0^2 a / 8 exactly.
    let r = fz_sum_rule_report(&well(), &s).unwrap();
    assert!((r.lhs - 0.5).abs() <= 1e-14);
}

#[test]
fn single_atom_local_solubility() {
    // F(q) = c e^{-(q-p)^2} / (p sqrt(pi)), so the integral of F^2 over q >= 0
    // is c^2 / (p^2 pi) * sqrt(pi/2) * (1 + erf(sqrt(2) p)) / 2.
    for (p, c) in [(1.5, 1.0), (3.0, -0.4), (12.0, 2.5)] {
        let nu = SignedMeasureNu::atoms(vec![(p, c)]).unwrap();
        let got = local_solubility_integral(&nu, &settings()).unwrap();
        let want = c * c / (p * p * PI) * (PI / 2.0).sqrt() * 0.5 * (1.0 + erf(2f64.sqrt() * p));
        assert!((got - want).abs() <= 1e-10 * want, "p={p}: {got} vs {want}");
    }
}

#[test]
fn zero_potential_report_is_trivial() {
    let r = conditions_report(&Potential::zero(1e-3).unwrap(), NuGrid::default(), &settings()).unwrap();
    assert!(r.weyl_ok && r.all_flags_hold());
    assert_eq!((r.qs, r.normalization, r.r_integral, r.ell2m), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn square_well_report_flags_hold() {
    let r = conditions_report(&well(), NuGrid::default(), &settings()).unwrap();
    assert!(r.weyl_ok);
    for f in &r.inequality_flags {
        assert!(f.holds, "{} : {} > {}", f.name, f.lhs, f.rhs);
    }
    assert!(r.divergence_flags.iter().all(|f| !f.divergent));
    assert!((r.qs - 2.0 * r.qs_momentum).abs() <= 1e-12 * r.qs);
    assert!(r.local_solubility > 0.0 && r.normalization > 0.0);
}

#[test]
fn synthetic_measures_classified_by_growth() {
    let s = settings();
    let atoms = |w: fn(f64) -> f64| {
        SignedMeasureNu::atoms((1..=40).map(|j| (j as f64 * j as f64 + 0.5, w(j as f64))).collect()).unwrap()
    };
    let normalization_divergent = |nu: &SignedMeasureNu| {
        let r = conditions_report_for_measure(nu, &s).unwrap();
        r.divergence_flags.iter().find(|f| f.name == "normalization").unwrap().divergent
    };
    assert!(!normalization_divergent(&atoms(|j| j.powi(-4))));
    assert!(normalization_divergent(&atoms(|j| 1.0 / j)));
    assert!(normalization_divergent(&atoms(|_| 1.0)));
}

#[test]
fn cell_norm_of_integer_atoms() {
    let s = settings();
    let nu = SignedMeasureNu::atoms((2..=30).map(|j| (j as f64, 1.0 / j as f64)).collect()).unwrap();
    let r = conditions_report_for_measure(&nu, &s).unwrap();
    let want: f64 = (2..=30).map(|j| 1.0 / (j * j) as f64).sum();
    assert!((r.ell2m - want).abs() <= 1e-14);
    assert!(r.all_flags_hold());
}
