//! Acceptance suite: every criterion at its stated tolerance, one PASS/FAIL
//! line each.
//!
//! The process fails if a criterion fails that is not in `KNOWN_FAILURES`, or
//! if a listed one unexpectedly passes, so the list cannot drift out of date.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fd_dirichlet, fd_whole_line, settings, test_potentials};
use weyl_core::conditions::{
    fourier_identity_residual, long_maximal_l2, quasi_szego_integral, r_integral, sqs_integral, InequalityFlag,
    MaximalMode, MaximalOperator, NuGrid, ReWModel,
};
use weyl_core::scattering::{quasi_szego_q, scattering_point};
use weyl_core::schrodinger::{dirichlet_eigenvalues, riccati_w, weyl_w, whole_line_eigenvalues};
use weyl_core::spectral::{interlacing_check, logspace};
use weyl_core::sumrules::{
    blaschke_log, default_kappa_grid, fz_sum_rule_report, poisson_identity_residual, step_sum_rule_residual,
    wronskian_asymptotics_fit,
};
use weyl_core::{LineMeasure, Momentum, Potential, SignedMeasureNu};

/// Criteria expected to fail, with the reason printed next to the FAIL line.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    8,
    "for the square well at t = support_end the residual at y = 50 is about 1.1e-2 of the bound; \
     the jump in V leaves a kernel deficit of 7 V0^2 / (96 y), so y near 600 would be needed",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_unitarity() -> Outcome {
    let s = settings();
    let start = Instant::now();
    let ks = logspace(1e-2, 50.0, 500);
    let mut worst: f64 = 0.0;
    for (_, v) in test_potentials() {
        for &k in &ks {
            let p = scattering_point(&v, k, 0.0, &s).unwrap();
            worst = worst.max((p.transmission + p.r.norm_sqr() - 1.0).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && elapsed <= Duration::from_secs(10),
        format!("max |T + |r|^2 - 1| = {worst:.2e} over 2 x 500 points in {elapsed:.1?}"),
    )
}

fn c2_sum_rule() -> Outcome {
    let s = settings();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v) in test_potentials() {
        let start = Instant::now();
        let r = fz_sum_rule_report(&v, &s).unwrap();
        let elapsed = start.elapsed();
        let rel = r.relative_residual();
        pass &= rel <= 1e-3 && elapsed <= Duration::from_secs(60);
        parts.push(format!("{name}: relative residual {rel:.2e} in {elapsed:.1?}"));
    }
    outcome(pass, parts.join("; "))
}

fn c3_interlacing() -> Outcome {
    let s = settings();
    let mut failures = Vec::new();
    for depth in [0.5, 2.0, 8.0] {
        for width in [1.0, 5.0] {
            let v = Potential::square_well(depth, width, 1e-3).unwrap();
            let half = dirichlet_eigenvalues(&v, &s).unwrap();
            let whole = whole_line_eigenvalues(&v, 0.0, &s).unwrap();
            if !interlacing_check(&half, &whole) {
                failures.push(format!("({depth}, {width})"));
            }
        }
    }
    outcome(failures.is_empty(), format!("6 wells, ordering violated for [{}]", failures.join(", ")))
}

fn c4_cross_method() -> Outcome {
    let s = settings();
    let mut ks: Vec<Complex64> = logspace(0.05, 50.0, 100).into_iter().map(|k| Complex64::new(k, 0.0)).collect();
    for a in logspace(0.2, 20.0, 10) {
        for b in logspace(0.1, 3.0, 10) {
            ks.push(Complex64::new(a, b));
        }
    }
    let mut worst: f64 = 0.0;
    for (_, v) in test_potentials() {
        for &k in &ks {
            let m = Momentum::new(k).unwrap();
            let a = weyl_w(&v, m, 0.0, &s).unwrap();
            let b = riccati_w(&v, m, 0.0, &s).unwrap();
            worst = worst.max((a - b).norm() / (1.0 + a.norm()));
        }
    }
    outcome(worst <= 1e-7, format!("max |weyl - riccati| / (1 + |w|) = {worst:.2e} over 2 x {} points", ks.len()))
}

fn c5_asymptotics() -> Outcome {
    let s = settings();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v) in test_potentials() {
        let t = v.support_end();
        let fit = wronskian_asymptotics_fit(&v, t, &default_kappa_grid(), &s).unwrap();
        let c1 = -0.5 * v.integral(t).unwrap();
        let c3 = 0.125 * v.l2_norm_sq(t).unwrap();
        let (e1, e3) = ((fit.c1 - c1).abs() / c1.abs(), (fit.c3 - c3).abs() / c3.abs());
        pass &= e1 <= 0.01 && e3 <= 0.01;
        parts.push(format!("{name}: c1 off by {e1:.1e}, c3 off by {e3:.1e}"));
    }
    outcome(pass, parts.join("; "))
}

fn c6_blaschke() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ks = logspace(1e-2, 100.0, 100);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let list = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(0..=5);
            let mut l: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..5.0)).collect();
            l.sort_by(|a, b| b.total_cmp(a));
            l
        };
        let (a, b) = (list(&mut rng), list(&mut rng));
        for &k in &ks {
            let lb = blaschke_log(&a, &b, Momentum::real(k).unwrap()).unwrap();
            worst = worst.max((lb.exp().norm() - 1.0).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max ||B(k)| - 1| = {worst:.2e} over 50 list pairs x 100 k"))
}

fn c7_poisson() -> Outcome {
    let s = settings();
    let mut worst: f64 = 0.0;
    for (_, v) in test_potentials() {
        for (y0, y1) in [(2.0, 3.0), (1.0, 4.0)] {
            worst = worst.max(poisson_identity_residual(&v, v.support_end(), y0, y1, &s).unwrap());
        }
    }
    outcome(worst <= 1e-4, format!("max residual {worst:.2e}"))
}

fn c8_step_sum_rule() -> Outcome {
    let s = settings();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v) in test_potentials() {
        for frac in [0.5, 1.0] {
            let t = frac * v.support_end();
            let scale = 0.125 * v.l2_norm_sq(t).unwrap();
            let r5 = step_sum_rule_residual(&v, t, 5.0, &s).unwrap();
            let r50 = step_sum_rule_residual(&v, t, 50.0, &s).unwrap();
            let ok = r50 <= 1e-3 * scale && r50 < r5;
            pass &= ok;
            parts.push(format!(
                "{name} t={t}: {}{:.2e} of bound at y=50 ({:.2e} at y=5)",
                if ok { "" } else { "FAILS " },
                r50 / scale,
                r5 / scale
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn c9_inequalities() -> Outcome {
    let s = settings();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v) in test_potentials() {
        for (sign, v) in [("", v.clone()), ("flipped ", v.scaled(-1.0).unwrap())] {
            let qs = quasi_szego_integral(&v, &s).unwrap().momentum_form;
            let sqs = sqs_integral(&v, &s).unwrap();
            let r = r_integral(&v, &s).unwrap();
            let flags = [
                InequalityFlag::new("qs <= sqs", qs, sqs),
                InequalityFlag::new("sqs <= qs + r", sqs, qs + r),
                InequalityFlag::new("r <= 55 sqs", r, 55.0 * sqs),
            ];
            let ok = flags.iter().all(|f| f.holds);
            pass &= ok;
            parts.push(format!("{sign}{name}: QS {qs:.4} SQS {sqs:.4} R {r:.4}{}", if ok { "" } else { " VIOLATED" }));
        }
    }
    outcome(pass, parts.join("; "))
}

fn c10_fourier() -> Outcome {
    let s = settings();
    let alphas = [0.5, 1.0, 2.0];
    let atom = SignedMeasureNu::atoms(vec![(2.0, 1.0)]).unwrap();
    let atom_worst = alphas.iter().map(|&a| fourier_identity_residual(&atom, a, &s).unwrap()).fold(0.0, f64::max);
    let mut pot_worst: f64 = 0.0;
    for (_, v) in test_potentials() {
        let nu = NuGrid::default().sample(&v, &s).unwrap();
        for &a in &alphas {
            pot_worst = pot_worst.max(fourier_identity_residual(&nu, a, &s).unwrap());
        }
    }
    outcome(
        atom_worst <= 1e-8 && pot_worst <= 1e-5,
        format!("single atom {atom_worst:.2e}, potential-derived {pot_worst:.2e}"),
    )
}

fn c11_re_w() -> Outcome {
    let s = settings();
    let mut worst: f64 = 0.0;
    for (_, v) in test_potentials() {
        let model = ReWModel::new(&v, NuGrid::default(), &s).unwrap();
        for k in [2.0, 3.0, 5.0] {
            worst = worst.max(model.decompose(&v, k, &s).unwrap().residual);
        }
    }
    outcome(worst <= 1e-4, format!("max residual {worst:.2e}"))
}

/// A random measure on (1, 1 + span): a piecewise-linear density with random
/// signs and a few signed atoms.
fn random_measure(rng: &mut ChaCha8Rng) -> SignedMeasureNu {
    let span = rng.gen_range(3.0..25.0);
    let n = rng.gen_range(2..40);
    let mut grid: Vec<f64> = (0..n).map(|_| 1.0 + rng.gen_range(0.0..span)).collect();
    grid.push(1.0 + 1e-9);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let density = grid.iter().map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-2.0..2.0) }).collect();
    let atoms = (0..rng.gen_range(0..6))
        .map(|_| (1.0 + rng.gen_range(0.0..span), rng.gen_range(-1.5..1.5)))
        .collect();
    SignedMeasureNu::new(grid, density, atoms).unwrap()
}

fn c12_maximal_chain() -> Outcome {
    let s = settings();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut violations = Vec::new();
    for i in 0..20 {
        let nu = random_measure(&mut rng);
        let profile = LineMeasure::from_nu(&nu).abs_profile();
        let op = MaximalOperator::for_nu(&nu);
        let (lo, hi) = nu.support().unwrap();
        let cells: Vec<f64> =
            (lo.floor() as i64..=hi.floor() as i64).map(|n| profile.variation_closed(n as f64, n as f64 + 1.0)).collect();
        let lhs: f64 = cells.iter().map(|m| m * m).sum();
        let rhs = 4.0 * long_maximal_l2(&nu, &s).unwrap();
        if lhs > rhs {
            violations.push(format!("#{i} chain {lhs:.4} > {rhs:.4}"));
        }
        for (j, n) in (lo.floor() as i64..=hi.floor() as i64).enumerate() {
            for q in 0..=20 {
                let k = n as f64 + q as f64 / 20.0;
                if 0.5 * cells[j] > op.eval(k, MaximalMode::Long) * (1.0 + 1e-12) {
                    violations.push(format!("#{i} cell bound at k={k}"));
                }
            }
        }
    }
    outcome(violations.is_empty(), format!("20 measures, violations: [{}]", violations.join(", ")))
}

fn c13_eigen_oracle() -> Outcome {
    let s = settings();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut mismatched = Vec::new();
    for (depth, width) in [(2.0, 1.0), (8.0, 1.0), (4.0, 3.0), (6.0, 4.0), (9.0, 5.0)] {
        let v = Potential::square_well(depth, width, 1e-3).unwrap();
        let cases = [
            (dirichlet_eigenvalues(&v, &s).unwrap().energies(), fd_dirichlet(&v, 1e-4)),
            (whole_line_eigenvalues(&v, 0.0, &s).unwrap().energies(), fd_whole_line(&v, 1e-4)),
        ];
        for (roots, oracle) in cases {
            if roots.len() != oracle.len() || roots.len() > 5 {
                mismatched.push(format!("({depth}, {width})"));
                continue;
            }
            for (a, b) in roots.iter().zip(&oracle) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-5 && mismatched.is_empty() && elapsed <= Duration::from_secs(120),
        format!("max |kappa^2 difference| {worst:.2e}, count mismatches [{}], {elapsed:.1?}", mismatched.join(", ")),
    )
}

fn c14_truncation() -> Outcome {
    let s = settings();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v) in test_potentials() {
        let x = v.support_end();
        let q = quasi_szego_q(&v, &s).unwrap().value;
        let radii: Vec<f64> = (2..=7).map(|j| x * (1.0 - 0.5f64.powi(j))).chain([x, 1.5 * x, 2.0 * x]).collect();
        let gaps: Vec<f64> =
            radii.iter().map(|&r| (quasi_szego_q(&v.truncate(r).unwrap(), &s).unwrap().value - q).abs()).collect();
        let beyond = radii.iter().zip(&gaps).filter(|(r, _)| **r >= x).all(|(_, g)| *g <= 1e-6);
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9);
        pass &= beyond && monotone;
        parts.push(format!(
            "{name}: gaps {} ({})",
            gaps.iter().map(|g| format!("{g:.1e}")).collect::<Vec<_>>().join(" "),
            if monotone { "monotone" } else { "not monotone" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 14] = [
        (1, "unitarity", c1_unitarity),
        (2, "Faddeev-Zakharov sum rule", c2_sum_rule),
        (3, "interlacing", c3_interlacing),
        (4, "cross-method m-function", c4_cross_method),
        (5, "high-energy asymptotics", c5_asymptotics),
        (6, "Blaschke modulus", c6_blaschke),
        (7, "Poisson identity", c7_poisson),
        (8, "step-by-step sum rule", c8_step_sum_rule),
        (9, "quasi-Szego inequalities", c9_inequalities),
        (10, "Fourier identity", c10_fourier),
        (11, "Re w decomposition", c11_re_w),
        (12, "maximal / l2(M) chain", c12_maximal_chain),
        (13, "eigenvalue oracle", c13_eigen_oracle),
        (14, "truncation ladder", c14_truncation),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        println!(
            "{} [{id:>2}] {name}: {} ({:.1?})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
        match (o.pass, known) {
            (false, Some((_, why))) => println!("          documented failure: {why}"),
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, Some(_)) => unexpected.push(format!("criterion {id} passed but is listed as a known failure")),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("acceptance: {}", unexpected.join("; "));
        std::process::exit(1);
    }
}
