//! Compactly supported potentials on [0, X].

use std::path::Path;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// How values between grid points are produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    SquareWell { depth: f64, width: f64 },
    GaussianBump { amplitude: f64, center: f64, sigma: f64 },
    /// Linear interpolation through the given nodes.
    Tabulated { xs: Vec<f64>, vs: Vec<f64> },
}

impl PotentialKind {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialKind::SquareWell { .. } => "square_well",
            PotentialKind::GaussianBump { .. } => "gaussian_bump",
            PotentialKind::Tabulated { .. } => "tabulated",
        }
    }
}

/// A real potential vanishing beyond `support_end`, sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    support_end: f64,
    grid_step: f64,
    values: Vec<f64>,
    kind: PotentialKind,
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("grid_step must be positive and finite, got {h}")))
    }
}

impl Potential {
    fn build(support_end: f64, grid_step: f64, kind: PotentialKind) -> Potential {
        let n = (support_end / grid_step + 1e-9).floor() as usize;
        let mut p = Potential { support_end, grid_step, values: Vec::new(), kind };
        p.values = (0..=n).map(|i| p.value(i as f64 * grid_step)).collect();
        p
    }

    /// V = 0 with empty support.
    pub fn zero(grid_step: f64) -> Result<Potential> {
        check_step(grid_step)?;
        Ok(Potential::build(0.0, grid_step, PotentialKind::SquareWell { depth: 0.0, width: 0.0 }))
    }

    /// V = -depth on [0, width]. A zero depth or width gives the zero potential.
    pub fn square_well(depth: f64, width: f64, grid_step: f64) -> Result<Potential> {
        check_step(grid_step)?;
        if !(depth.is_finite() && width.is_finite() && depth >= 0.0 && width >= 0.0) {
            return Err(invalid(format!("square well needs depth, width >= 0, got ({depth}, {width})")));
        }
        if depth == 0.0 || width == 0.0 {
            return Potential::zero(grid_step);
        }
        Ok(Potential::build(width, grid_step, PotentialKind::SquareWell { depth, width }))
    }

    /// amplitude * exp(-(x - center)^2 / (2 sigma^2)) on [0, support_end].
    pub fn gaussian_bump(amplitude: f64, center: f64, sigma: f64, support_end: f64, grid_step: f64) -> Result<Potential> {
        check_step(grid_step)?;
        if !(amplitude.is_finite() && center.is_finite() && sigma.is_finite() && support_end.is_finite()) {
            return Err(invalid("gaussian bump parameters must be finite"));
        }
        if center <= 0.0 || sigma <= 0.0 || support_end <= center {
            return Err(invalid(format!(
                "gaussian bump needs 0 < center < support_end and sigma > 0, got center {center}, sigma {sigma}, support_end {support_end}"
            )));
        }
        if amplitude != 0.0 {
            let ratio = (-(support_end - center).powi(2) / (2.0 * sigma * sigma)).exp();
            if ratio >= 1e-12 {
                return Err(Error::TailTooLarge { tail: ratio * amplitude.abs() });
            }
        }
        Ok(Potential::build(support_end, grid_step, PotentialKind::GaussianBump { amplitude, center, sigma }))
    }

    /// Potential through tabulated (x, V) nodes, linearly interpolated.
    pub fn tabulated(xs: Vec<f64>, vs: Vec<f64>, grid_step: f64) -> Result<Potential> {
        check_step(grid_step)?;
        if xs.len() != vs.len() || xs.len() < 2 {
            return Err(invalid("tabulated potential needs at least two (x, V) pairs"));
        }
        if xs[0].abs() > 1e-12 {
            return Err(invalid(format!("tabulated potential must start at x = 0, got {}", xs[0])));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("tabulated x values must be strictly increasing"));
        }
        if xs.iter().chain(&vs).any(|v| !v.is_finite()) {
            return Err(invalid("tabulated values must be finite"));
        }
        let end = *xs.last().unwrap();
        Ok(Potential::build(end, grid_step, PotentialKind::Tabulated { xs, vs }))
    }

    /// Parse a two-column CSV of (x, V). A header line is optional; blank
    /// lines and lines starting with '#' are skipped.
    pub fn parse_csv(text: &str) -> Result<Potential> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        let mut seen_row = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: Option<(f64, f64)> = match fields.as_slice() {
                [a, b] => a.parse().ok().zip(b.parse().ok()),
                _ => None,
            };
            match parsed {
                Some((x, v)) => {
                    if !(x.is_finite() && v.is_finite()) {
                        return Err(Error::Parse { line: line_no, message: "non-finite value".into() });
                    }
                    if let Some(&prev) = xs.last() {
                        if !(x > prev) {
                            return Err(Error::Parse { line: line_no, message: format!("x = {x} is not increasing") });
                        }
                    } else if x.abs() > 1e-12 {
                        return Err(Error::Parse { line: line_no, message: format!("first x must be 0, got {x}") });
                    }
                    xs.push(x);
                    vs.push(v);
                    seen_row = true;
                }
                None if !seen_row && xs.is_empty() && fields.len() == 2 => {
                    // header
                    seen_row = true;
                }
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected two numeric columns, got '{line}'"),
                    })
                }
            }
        }
        if xs.len() < 2 {
            return Err(Error::Parse { line: text.lines().count(), message: "need at least two data rows".into() });
        }
        let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        Potential::tabulated(xs, vs, step)
    }

    pub fn from_csv_file(path: &Path) -> Result<Potential> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { line: 0, message: format!("{}: {e}", path.display()) })?;
        Potential::parse_csv(&text)
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    /// Samples V(i * grid_step) on [0, support_end].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.support_end == 0.0 || self.values.iter().all(|&v| v == 0.0) && self.max_abs_analytic() == 0.0
    }

    fn max_abs_analytic(&self) -> f64 {
        match &self.kind {
            PotentialKind::SquareWell { depth, .. } => depth.abs(),
            PotentialKind::GaussianBump { amplitude, .. } => amplitude.abs(),
            PotentialKind::Tabulated { vs, .. } => vs.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// V(x); exactly 0 beyond the support and for x < 0.
    pub fn value(&self, x: f64) -> f64 {
        if !(x >= 0.0) || x > self.support_end {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::SquareWell { depth, width } => {
                if x <= *width {
                    -depth
                } else {
                    0.0
                }
            }
            PotentialKind::GaussianBump { amplitude, center, sigma } => {
                let z = (x - center) / sigma;
                amplitude * (-0.5 * z * z).exp()
            }
            PotentialKind::Tabulated { xs, vs } => {
                let i = xs.partition_point(|&p| p <= x);
                if i == 0 {
                    return vs[0];
                }
                if i >= xs.len() {
                    return vs[xs.len() - 1];
                }
                let (x0, x1) = (xs[i - 1], xs[i]);
                vs[i - 1] + (vs[i] - vs[i - 1]) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Interior points of (0, support_end) where V is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::Tabulated { xs, .. } => {
                xs.iter().copied().filter(|&x| x > 0.0 && x < self.support_end).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Infimum of V over the support (0 for the zero potential).
    pub fn min_value(&self) -> f64 {
        match &self.kind {
            PotentialKind::SquareWell { depth, .. } => (-depth).min(0.0),
            PotentialKind::GaussianBump { amplitude, .. } => amplitude.min(0.0),
            PotentialKind::Tabulated { .. } => self.values.iter().fold(0.0, |m: f64, &v| m.min(v)),
        }
    }

    /// Largest |V|, used to scale momentum cutoffs.
    pub fn max_abs(&self) -> f64 {
        if self.support_end == 0.0 {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::Tabulated { .. } => self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
            _ => self.max_abs_analytic(),
        }
    }

    /// c V with the same support and kind. A negative factor on a square well
    /// gives a repulsive barrier.
    pub fn scaled(&self, c: f64) -> Result<Potential> {
        if !c.is_finite() {
            return Err(invalid(format!("scale factor must be finite, got {c}")));
        }
        let kind = match &self.kind {
            PotentialKind::SquareWell { depth, width } => PotentialKind::SquareWell { depth: c * depth, width: *width },
            PotentialKind::GaussianBump { amplitude, center, sigma } => {
                PotentialKind::GaussianBump { amplitude: c * amplitude, center: *center, sigma: *sigma }
            }
            PotentialKind::Tabulated { xs, vs } => {
                PotentialKind::Tabulated { xs: xs.clone(), vs: vs.iter().map(|v| c * v).collect() }
            }
        };
        Ok(Potential::build(self.support_end, self.grid_step, kind))
    }

    /// V^(R): equal to V on [0, R] and zero beyond.
    pub fn truncate(&self, r: f64) -> Result<Potential> {
        if !(r >= 0.0) {
            return Err(invalid(format!("truncation radius must be >= 0, got {r}")));
        }
        if r >= self.support_end {
            return Ok(self.clone());
        }
        if r == 0.0 {
            return Potential::zero(self.grid_step);
        }
        let kind = match &self.kind {
            PotentialKind::SquareWell { depth, width } => PotentialKind::SquareWell { depth: *depth, width: width.min(r) },
            PotentialKind::GaussianBump { .. } => self.kind.clone(),
            PotentialKind::Tabulated { xs, vs } => {
                let mut nx: Vec<f64> = xs.iter().copied().take_while(|&x| x < r).collect();
                let mut nv: Vec<f64> = vs[..nx.len()].to_vec();
                nx.push(r);
                nv.push(self.value(r));
                PotentialKind::Tabulated { xs: nx, vs: nv }
            }
        };
        Ok(Potential::build(r, self.grid_step, kind))
    }

    fn upper(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("integration limit must be >= 0, got {t}")));
        }
        Ok(t.min(self.support_end))
    }

    /// Integral of V over [0, t].
    pub fn integral(&self, t: f64) -> Result<f64> {
        let b = self.upper(t)?;
        Ok(self.integrate_power(b, 1))
    }

    /// Integral of V^2 over [0, t].
    pub fn l2_norm_sq(&self, t: f64) -> Result<f64> {
        let b = self.upper(t)?;
        Ok(self.integrate_power(b, 2))
    }

    fn integrate_power(&self, b: f64, power: i32) -> f64 {
        if b <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::SquareWell { depth, width } => (-depth).powi(power) * width.min(b),
            PotentialKind::GaussianBump { .. } => {
                // composite Simpson with an even panel count near the grid step
                let mut n = (b / self.grid_step).ceil() as usize;
                n += n % 2;
                n = n.max(2);
                let h = b / n as f64;
                let mut s = self.value(0.0).powi(power) + self.value(b).powi(power);
                for i in 1..n {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    s += w * self.value(i as f64 * h).powi(power);
                }
                s * h / 3.0
            }
            PotentialKind::Tabulated { xs, vs } => {
                // exact for the piecewise-linear interpolant
                let mut s = 0.0;
                for i in 0..xs.len() - 1 {
                    let (x0, x1) = (xs[i], xs[i + 1].min(b));
                    if x1 <= x0 {
                        break;
                    }
                    let (v0, v1) = (vs[i], self.value(x1));
                    s += match power {
                        1 => 0.5 * (v0 + v1) * (x1 - x0),
                        _ => (v0 * v0 + v0 * v1 + v1 * v1) * (x1 - x0) / 3.0,
                    };
                }
                s
            }
        }
    }
}
