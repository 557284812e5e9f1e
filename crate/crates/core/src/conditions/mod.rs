//! Measure-side conditions: maximal functions, normalization, the
//! quasi-Szego family, the l^2(M) norm, local solubility, the Fourier
//! identity for F and Hilbert transforms.

pub mod hilbert;
pub mod integrals;
pub mod local;
pub mod maximal;
pub mod measure;
pub mod rew;

use serde::Serialize;

pub use hilbert::{hilbert_transform, HilbertMode};
pub use integrals::{
    cell_masses, ell2m_norm_sq, llog_check, long_maximal_l2, normalization_integral, quasi_szego_energy_form,
    quasi_szego_from_nu, quasi_szego_integral, r_integral, sqs_cross_term, sqs_integral, QuasiSzegoForms, RangeGrowth,
};
pub use local::{f_of_q, fourier_identity, fourier_identity_residual, local_solubility_integral, FourierCheck};
pub use maximal::{maximal, MaximalMode, MaximalOperator};
pub use measure::{LineMeasure, Piece};
pub use rew::{re_w_decomposition_residual, NuGrid, ReWDecomposition, ReWModel};

use crate::config::Settings;
use crate::error::Result;
use crate::potentials::Potential;
use crate::schrodinger::dirichlet_eigenvalues;
use crate::spectral::{lieb_thirring_sum, SignedMeasureNu};

/// Absolute slack for comparisons between separately integrated quantities.
pub const INEQUALITY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityFlag {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityFlag {
    pub fn new(name: &str, lhs: f64, rhs: f64) -> InequalityFlag {
        InequalityFlag { name: name.to_string(), lhs, rhs, holds: lhs <= rhs + INEQUALITY_SLACK }
    }
}

/// Growth of a truncated integral under range doubling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceFlag {
    pub name: String,
    pub partials: Vec<f64>,
    pub divergent: bool,
}

impl DivergenceFlag {
    fn new(name: &str, g: &RangeGrowth) -> DivergenceFlag {
        DivergenceFlag { name: name.to_string(), partials: g.partials.clone(), divergent: g.divergent }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsReport {
    pub source: String,
    pub weyl_ok: bool,
    pub normalization: f64,
    pub lieb_thirring: f64,
    /// Quasi-Szego integral against sqrt(E) dE.
    pub qs: f64,
    /// The same integrand against k^2 dk (half the energy form).
    pub qs_momentum: f64,
    /// Not available for a loaded measure, which carries no Re w.
    pub sqs: Option<f64>,
    pub r_integral: f64,
    pub ell2m: f64,
    pub local_solubility: f64,
    pub inequality_flags: Vec<InequalityFlag>,
    pub divergence_flags: Vec<DivergenceFlag>,
}

impl ConditionsReport {
    pub fn all_flags_hold(&self) -> bool {
        self.inequality_flags.iter().all(|f| f.holds)
    }
}

fn ell2m_flags(nu: &SignedMeasureNu, settings: &Settings) -> Result<(f64, Vec<InequalityFlag>)> {
    let ell2m = ell2m_norm_sq(nu);
    let ml = long_maximal_l2(nu, settings)?;
    Ok((ell2m, vec![InequalityFlag::new("cells_sq_le_4_int_Ml_sq", ell2m, 4.0 * ml)]))
}

/// Every functional for a compactly supported potential, with nu sampled on `grid`.
pub fn conditions_report(v: &Potential, grid: NuGrid, settings: &Settings) -> Result<ConditionsReport> {
    settings.validate()?;
    let eig = dirichlet_eigenvalues(v, settings)?;
    let weyl_ok = eig.kappas.iter().all(|&k| k > 0.0) && eig.kappas.windows(2).all(|w| w[0] > w[1]);
    if v.is_zero() {
        return Ok(ConditionsReport {
            source: "potential".into(),
            weyl_ok,
            normalization: 0.0,
            lieb_thirring: 0.0,
            qs: 0.0,
            qs_momentum: 0.0,
            sqs: Some(0.0),
            r_integral: 0.0,
            ell2m: 0.0,
            local_solubility: 0.0,
            inequality_flags: vec![
                InequalityFlag::new("qs_le_sqs", 0.0, 0.0),
                InequalityFlag::new("sqs_le_qs_plus_r", 0.0, 0.0),
                InequalityFlag::new("r_le_55_sqs", 0.0, 0.0),
                InequalityFlag::new("cells_sq_le_4_int_Ml_sq", 0.0, 0.0),
            ],
            divergence_flags: Vec::new(),
        });
    }
    let nu = grid.sample(v, settings)?;
    let norm = normalization_integral(&nu, settings)?;
    let qs = quasi_szego_integral(v, settings)?;
    let sqs = sqs_integral(v, settings)?;
    let r = r_integral(v, settings)?;
    let (ell2m, mut flags) = ell2m_flags(&nu, settings)?;
    let local_solubility = local_solubility_integral(&nu, settings)?;
    let mut inequality_flags = vec![
        InequalityFlag::new("qs_le_sqs", qs.momentum_form, sqs),
        InequalityFlag::new("sqs_le_qs_plus_r", sqs, qs.momentum_form + r),
        InequalityFlag::new("r_le_55_sqs", r, 55.0 * sqs),
    ];
    inequality_flags.append(&mut flags);
    Ok(ConditionsReport {
        source: "potential".into(),
        weyl_ok,
        normalization: norm.value,
        lieb_thirring: lieb_thirring_sum(&eig),
        qs: qs.energy_form,
        qs_momentum: qs.momentum_form,
        sqs: Some(sqs),
        r_integral: r,
        ell2m,
        local_solubility,
        inequality_flags,
        divergence_flags: vec![DivergenceFlag::new("normalization", &norm)],
    })
}

/// R for a loaded measure, with Re w taken as the Hilbert transform of the
/// odd extension of nu (no information below k = 1 is available).
pub fn r_integral_from_nu(nu: &SignedMeasureNu, settings: &Settings) -> Result<RangeGrowth> {
    let Some((lo, hi)) = nu.support() else {
        return Ok(RangeGrowth::zero());
    };
    let odd = LineMeasure::odd_extension(nu);
    let f = |k: f64| match hilbert_transform(&odd, k, HilbertMode::Full) {
        Ok(h) => Ok((h / k).powi(2).ln_1p() * k * k),
        // Exactly on an atom: a null set, reached only by rounding.
        Err(crate::error::Error::AtomAtSingularity { .. }) => Ok(0.0),
        Err(e) => Err(e),
    };
    let bps: Vec<f64> = nu.point_masses.iter().map(|a| a.0).chain([lo, hi]).collect();
    integrals::range_doubling(f, lo.max(1.0), hi + 1.0, &bps, settings)
}

/// The measure-side functionals for a loaded nu.
pub fn conditions_report_for_measure(nu: &SignedMeasureNu, settings: &Settings) -> Result<ConditionsReport> {
    settings.validate()?;
    let norm = normalization_integral(nu, settings)?;
    let qs = quasi_szego_from_nu(nu, settings)?;
    let r = r_integral_from_nu(nu, settings)?;
    let (ell2m, inequality_flags) = ell2m_flags(nu, settings)?;
    Ok(ConditionsReport {
        source: "measure".into(),
        weyl_ok: true,
        normalization: norm.value,
        lieb_thirring: 0.0,
        qs: qs.energy_form,
        qs_momentum: qs.momentum_form,
        sqs: None,
        r_integral: r.value,
        ell2m,
        local_solubility: local_solubility_integral(nu, settings)?,
        inequality_flags,
        divergence_flags: vec![DivergenceFlag::new("normalization", &norm), DivergenceFlag::new("r_integral", &r)],
    })
}
