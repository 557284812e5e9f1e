use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Tolerances and discretization knobs shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    /// Relative local error target of the ODE stepper.
    pub ode_tol: f64,
    /// Relative tolerance of adaptive quadrature.
    pub quad_tol: f64,
    /// Upper momentum cutoff for half-line integrals. `None` picks one from the potential.
    pub kmax: Option<f64>,
    /// Number of scan points in bound-state searches.
    pub scan_points: usize,
    /// Added to sqrt(-min V) to get the top of the bound-state scan.
    pub kappa_margin: f64,
    /// Bisection stopping width for bound states.
    pub root_tol: f64,
    /// Largest acceptable uncertainty of a fitted large-k tail.
    pub tail_tol: f64,
    /// Lower momentum cutoff for half-line integrals.
    pub k_min: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            ode_tol: 1e-10,
            quad_tol: 1e-8,
            kmax: None,
            scan_points: 400,
            kappa_margin: 0.5,
            root_tol: 1e-10,
            tail_tol: 1e-4,
            k_min: 1e-4,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        let in_range = |v: f64| v > 0.0 && v <= 1e-2;
        if !in_range(self.ode_tol) {
            return Err(invalid(format!("ode_tol {} outside (0, 1e-2]", self.ode_tol)));
        }
        if !in_range(self.quad_tol) {
            return Err(invalid(format!("quad_tol {} outside (0, 1e-2]", self.quad_tol)));
        }
        if let Some(k) = self.kmax {
            if !(k.is_finite() && k > 1.0) {
                return Err(invalid(format!("kmax {k} must be finite and above 1")));
            }
        }
        if self.scan_points < 2 {
            return Err(invalid("scan_points must be at least 2"));
        }
        if !(self.tail_tol > 0.0) || !(self.root_tol > 0.0) || !(self.k_min > 0.0) {
            return Err(invalid("tail_tol, root_tol and k_min must be positive"));
        }
        Ok(())
    }
}
