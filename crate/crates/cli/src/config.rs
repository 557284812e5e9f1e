//! Run configuration: one JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use weyl_core::spectral::{linspace, logspace};
use weyl_core::{Potential, Settings, SignedMeasureNu};

use crate::Failure;

fn default_grid_step() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    SquareWell { depth: f64, width: f64 },
    GaussianBump { amplitude: f64, center: f64, sigma: f64, support_end: f64 },
    /// Two-column CSV of (x, V); relative paths are taken from the config's directory.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for KGrid {
    fn default() -> Self {
        KGrid { min: 1e-2, max: 50.0, count: 200, spacing: Spacing::Log }
    }
}

impl KGrid {
    pub fn points(&self) -> Result<Vec<f64>, Failure> {
        if self.count < 2 {
            return Err(Failure::Config(format!("k_grid.count must be at least 2, got {}", self.count)));
        }
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(Failure::Config(format!("k_grid needs 0 < min < max, got [{}, {}]", self.min, self.max)));
        }
        Ok(match self.spacing {
            Spacing::Linear => linspace(self.min, self.max, self.count),
            Spacing::Log => logspace(self.min, self.max, self.count),
        })
    }
}

/// Momentum grid for sampling nu on k > 1.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuGridSpec {
    pub kmax: f64,
    pub step: f64,
}

impl Default for NuGridSpec {
    fn default() -> Self {
        let g = weyl_core::conditions::NuGrid::default();
        NuGridSpec { kmax: g.kmax, step: g.step }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialSpec>,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    /// A loaded nu in the `{grid, density, point_masses}` layout, for `conditions`.
    pub measure: Option<PathBuf>,
    #[serde(default)]
    pub k_grid: KGrid,
    #[serde(default)]
    pub nu_grid: NuGridSpec,
    pub ode_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub kmax: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub plot: bool,
    /// Directory of the config file, for resolving relative paths.
    #[serde(skip)]
    pub base: PathBuf,
}

/// Values given on the command line, which win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub plot: bool,
    pub ode_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub kmax: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path, over: &Overrides) -> Result<RunConfig, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
            Failure::Config(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
        })?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if over.out.is_some() {
            cfg.out = over.out.clone();
        }
        cfg.plot |= over.plot;
        cfg.ode_tol = over.ode_tol.or(cfg.ode_tol);
        cfg.quad_tol = over.quad_tol.or(cfg.quad_tol);
        cfg.kmax = over.kmax.or(cfg.kmax);
        cfg.settings()?;
        Ok(cfg)
    }

    pub fn settings(&self) -> Result<Settings, Failure> {
        let d = Settings::default();
        let s = Settings {
            ode_tol: self.ode_tol.unwrap_or(d.ode_tol),
            quad_tol: self.quad_tol.unwrap_or(d.quad_tol),
            kmax: self.kmax,
            ..d
        };
        s.validate().map_err(|e| Failure::Config(e.to_string()))?;
        Ok(s)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn potential(&self) -> Result<Potential, Failure> {
        let spec = self.potential.as_ref().ok_or_else(|| Failure::Config("config has no potential".into()))?;
        let h = self.grid_step;
        let built = match spec {
            PotentialSpec::Zero => Potential::zero(h),
            PotentialSpec::SquareWell { depth, width } => Potential::square_well(*depth, *width, h),
            PotentialSpec::GaussianBump { amplitude, center, sigma, support_end } => {
                Potential::gaussian_bump(*amplitude, *center, *sigma, *support_end, h)
            }
            PotentialSpec::Csv { path } => {
                let path = self.resolve(path);
                return Potential::from_csv_file(&path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())));
            }
        };
        built.map_err(|e| Failure::Config(format!("potential: {e}")))
    }

    pub fn measure(&self) -> Result<Option<SignedMeasureNu>, Failure> {
        let Some(p) = &self.measure else {
            return Ok(None);
        };
        let path = self.resolve(p);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Failure::Config(format!("cannot read measure {}: {e}", path.display())))?;
        SignedMeasureNu::from_json(&text)
            .map(Some)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }
}
