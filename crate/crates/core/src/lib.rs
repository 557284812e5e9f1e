//! Spectral and scattering quantities of half-line Schrodinger operators
//! -u'' + V u = k^2 u with compactly supported potentials, and numerical
//! checks of the associated sum rules and measure conditions.

pub mod conditions;
pub mod config;
pub mod error;
pub mod ode;
pub mod potentials;
pub mod quad;
pub mod scattering;
pub mod schrodinger;
pub mod spectral;
pub mod sumrules;

pub use conditions::{ConditionsReport, LineMeasure};
pub use config::Settings;
pub use error::{Error, Result};
pub use potentials::{Potential, PotentialKind};
pub use schrodinger::{EigenvalueList, JostData, Momentum, OperatorKind};
pub use scattering::{QuasiSzego, ScatteringPoint};
pub use spectral::{SignedMeasureNu, SpectralMeasure};
pub use sumrules::SumRuleReport;
