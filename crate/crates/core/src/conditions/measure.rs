//! Signed measures on the line: a piecewise-linear density plus atoms.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectral::SignedMeasureNu;

/// Linear density from (x0, d0) to (x1, d1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub x0: f64,
    pub x1: f64,
    pub d0: f64,
    pub d1: f64,
}

impl Piece {
    pub fn slope(&self) -> f64 {
        (self.d1 - self.d0) / (self.x1 - self.x0)
    }

    /// Value of the linear extension at x.
    pub fn at(&self, x: f64) -> f64 {
        self.d0 + self.slope() * (x - self.x0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineMeasure {
    pieces: Vec<Piece>,
    atoms: Vec<(f64, f64)>,
}

impl LineMeasure {
    /// Pieces must not overlap (touching is fine, which allows jumps).
    pub fn new(mut pieces: Vec<Piece>, mut atoms: Vec<(f64, f64)>) -> Result<LineMeasure> {
        if pieces.iter().any(|p| !(p.x1 > p.x0) || ![p.x0, p.x1, p.d0, p.d1].iter().all(|v| v.is_finite())) {
            return Err(invalid("pieces need finite values and x1 > x0"));
        }
        if atoms.iter().any(|&(x, w)| !(x.is_finite() && w.is_finite())) {
            return Err(invalid("atoms must be finite"));
        }
        pieces.sort_by(|a, b| a.x0.total_cmp(&b.x0));
        if pieces.windows(2).any(|w| w[1].x0 < w[0].x1) {
            return Err(invalid("pieces overlap"));
        }
        atoms.retain(|&(_, w)| w != 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(LineMeasure { pieces, atoms })
    }

    pub fn zero() -> LineMeasure {
        LineMeasure { pieces: Vec::new(), atoms: Vec::new() }
    }

    /// Density sampled at nodes; a repeated node makes a jump.
    pub fn from_samples(xs: &[f64], ds: &[f64], atoms: Vec<(f64, f64)>) -> Result<LineMeasure> {
        if xs.len() != ds.len() {
            return Err(invalid("node and density lengths differ"));
        }
        if xs.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("nodes must be nondecreasing"));
        }
        let pieces = xs
            .windows(2)
            .zip(ds.windows(2))
            .filter(|(x, _)| x[1] > x[0])
            .map(|(x, d)| Piece { x0: x[0], x1: x[1], d0: d[0], d1: d[1] })
            .collect();
        LineMeasure::new(pieces, atoms)
    }

    fn nu_pieces(nu: &SignedMeasureNu, sign: f64, mirror: bool) -> Vec<Piece> {
        nu.k_grid
            .windows(2)
            .zip(nu.ac_density.windows(2))
            .map(|(x, d)| {
                if mirror {
                    Piece { x0: -x[1], x1: -x[0], d0: sign * d[1], d1: sign * d[0] }
                } else {
                    Piece { x0: x[0], x1: x[1], d0: sign * d[0], d1: sign * d[1] }
                }
            })
            .collect()
    }

    pub fn from_nu(nu: &SignedMeasureNu) -> LineMeasure {
        LineMeasure::new(LineMeasure::nu_pieces(nu, 1.0, false), nu.point_masses.clone()).expect("validated nu")
    }

    /// -nu on the positive axis and its mirror image +nu on the negative axis.
    pub fn odd_extension(nu: &SignedMeasureNu) -> LineMeasure {
        let mut pieces = LineMeasure::nu_pieces(nu, -1.0, false);
        pieces.extend(LineMeasure::nu_pieces(nu, 1.0, true));
        let mut atoms: Vec<(f64, f64)> = nu.point_masses.iter().map(|&(p, w)| (p, -w)).collect();
        atoms.extend(nu.point_masses.iter().map(|&(p, w)| (-p, w)));
        LineMeasure::new(pieces, atoms).expect("validated nu")
    }

    /// nu plus its mirror image.
    pub fn even_extension(nu: &SignedMeasureNu) -> LineMeasure {
        let mut pieces = LineMeasure::nu_pieces(nu, 1.0, false);
        pieces.extend(LineMeasure::nu_pieces(nu, 1.0, true));
        let mut atoms = nu.point_masses.clone();
        atoms.extend(nu.point_masses.iter().map(|&(p, w)| (-p, w)));
        LineMeasure::new(pieces, atoms).expect("validated nu")
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.pieces.iter().all(|p| p.d0 == 0.0 && p.d1 == 0.0)
    }

    /// Sorted distinct piece endpoints.
    pub fn nodes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pieces.iter().flat_map(|p| [p.x0, p.x1]).collect();
        out.dedup();
        out
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        let xs = self.pieces.iter().flat_map(|p| [p.x0, p.x1]).chain(self.atoms.iter().map(|a| a.0));
        let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        (lo <= hi).then_some((lo, hi))
    }

    pub fn atom_at(&self, x: f64) -> Option<f64> {
        self.atoms.iter().find(|a| a.0 == x).map(|a| a.1)
    }

    /// Density at x; at a jump the mean of the one-sided values.
    pub fn density_at(&self, x: f64) -> f64 {
        // Pieces are disjoint and sorted, so at most two can contain x.
        let i = self.pieces.partition_point(|p| p.x1 < x);
        let containing = |j: usize| self.pieces.get(j).filter(|p| p.x0 <= x && x <= p.x1);
        match (containing(i), containing(i + 1)) {
            (None, _) => 0.0,
            (Some(p), None) if p.x0 < x && x < p.x1 => p.at(x),
            (Some(p), None) => 0.5 * p.at(x),
            (Some(p), Some(q)) => 0.5 * (p.at(x) + q.at(x)),
        }
    }

    pub fn abs_profile(&self) -> AbsProfile {
        AbsProfile::new(self)
    }

    /// |mu|([a, b]) with closed ends.
    pub fn total_variation(&self, a: f64, b: f64) -> f64 {
        self.abs_profile().variation_closed(a, b)
    }
}

/// |density| as linear pieces (split where the density changes sign), with
/// cumulative masses, plus atom masses with prefix sums.
#[derive(Debug, Clone)]
pub struct AbsProfile {
    x0: Vec<f64>,
    x1: Vec<f64>,
    a0: Vec<f64>,
    slope: Vec<f64>,
    cum: Vec<f64>,
    atom_x: Vec<f64>,
    atom_cum: Vec<f64>,
}

impl AbsProfile {
    fn new(m: &LineMeasure) -> AbsProfile {
        let mut x0 = Vec::new();
        let mut x1 = Vec::new();
        let mut a0 = Vec::new();
        let mut slope = Vec::new();
        let mut push = |a: f64, b: f64, da: f64, db: f64| {
            if b > a {
                x0.push(a);
                x1.push(b);
                a0.push(da.abs());
                slope.push((db.abs() - da.abs()) / (b - a));
            }
        };
        for p in &m.pieces {
            if p.d0 * p.d1 < 0.0 {
                let root = (p.x0 - p.d0 * (p.x1 - p.x0) / (p.d1 - p.d0)).clamp(p.x0, p.x1);
                push(p.x0, root, p.d0, 0.0);
                push(root, p.x1, 0.0, p.d1);
            } else {
                push(p.x0, p.x1, p.d0, p.d1);
            }
        }
        let mut cum = vec![0.0];
        for i in 0..x0.len() {
            let w = x1[i] - x0[i];
            cum.push(cum[i] + w * (a0[i] + 0.5 * slope[i] * w));
        }
        let atom_x: Vec<f64> = m.atoms.iter().map(|a| a.0).collect();
        let mut atom_cum = vec![0.0];
        for a in &m.atoms {
            atom_cum.push(atom_cum.last().unwrap() + a.1.abs());
        }
        AbsProfile { x0, x1, a0, slope, cum, atom_x, atom_cum }
    }

    /// Endpoints of the |density| pieces and atom positions.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.x0.iter().chain(&self.x1).chain(&self.atom_x).copied()
    }

    pub fn total_mass(&self) -> f64 {
        self.cum.last().unwrap() + self.atom_cum.last().unwrap()
    }

    /// Integral of |density| over (-inf, y].
    pub fn cumulative(&self, y: f64) -> f64 {
        let i = self.x0.partition_point(|&a| a <= y);
        if i == 0 {
            return 0.0;
        }
        let j = i - 1;
        let w = (y.min(self.x1[j]) - self.x0[j]).max(0.0);
        self.cum[j] + w * (self.a0[j] + 0.5 * self.slope[j] * w)
    }

    /// (|density|, slope) of the piece containing y, taken from the right at
    /// a node. Zero outside the pieces.
    pub fn line_at(&self, y: f64) -> (f64, f64) {
        let i = self.x0.partition_point(|&a| a <= y);
        if i == 0 || y >= self.x1[i - 1] {
            return (0.0, 0.0);
        }
        let j = i - 1;
        (self.a0[j] + self.slope[j] * (y - self.x0[j]), self.slope[j])
    }

    /// Total |atom| mass in [a, b].
    pub fn atoms_closed(&self, a: f64, b: f64) -> f64 {
        let lo = self.atom_x.partition_point(|&x| x < a);
        let hi = self.atom_x.partition_point(|&x| x <= b);
        if hi <= lo {
            0.0
        } else {
            self.atom_cum[hi] - self.atom_cum[lo]
        }
    }

    /// Total |atom| mass in [a, b).
    pub fn atoms_half_open(&self, a: f64, b: f64) -> f64 {
        let lo = self.atom_x.partition_point(|&x| x < a);
        let hi = self.atom_x.partition_point(|&x| x < b);
        if hi <= lo {
            0.0
        } else {
            self.atom_cum[hi] - self.atom_cum[lo]
        }
    }

    pub fn variation_closed(&self, a: f64, b: f64) -> f64 {
        self.cumulative(b) - self.cumulative(a) + self.atoms_closed(a, b)
    }

    pub fn variation_half_open(&self, a: f64, b: f64) -> f64 {
        self.cumulative(b) - self.cumulative(a) + self.atoms_half_open(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variation_of_sign_changing_piece() {
        // density from -1 to 1 on [0, 2]: |d| integrates to 1.
        let m = LineMeasure::from_samples(&[0.0, 2.0], &[-1.0, 1.0], vec![(1.0, -0.5)]).unwrap();
        let p = m.abs_profile();
        assert!((p.cumulative(2.0) - 1.0).abs() < 1e-15);
        assert!((p.cumulative(1.0) - 0.5).abs() < 1e-15);
        assert!((m.total_variation(0.0, 2.0) - 1.5).abs() < 1e-15);
        assert!((p.variation_half_open(0.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn jump_from_repeated_node() {
        let m = LineMeasure::from_samples(&[0.0, 1.0, 1.0, 2.0], &[1.0, 1.0, 3.0, 3.0], vec![]).unwrap();
        assert_eq!(m.pieces().len(), 2);
        assert_eq!(m.density_at(1.0), 2.0);
        assert_eq!(m.density_at(0.0), 0.5);
        assert!((m.total_variation(0.0, 2.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn odd_extension_is_antisymmetric() {
        let nu = SignedMeasureNu::new(vec![1.0, 2.0, 3.0], vec![0.5, -1.0, 2.0], vec![(4.0, 0.25)]).unwrap();
        let m = LineMeasure::odd_extension(&nu);
        for x in [1.2, 2.5, 2.9] {
            assert!((m.density_at(x) + m.density_at(-x)).abs() < 1e-14);
        }
        assert_eq!(m.atom_at(4.0), Some(-0.25));
        assert_eq!(m.atom_at(-4.0), Some(0.25));
        assert!(LineMeasure::new(vec![Piece { x0: 0.0, x1: 2.0, d0: 1.0, d1: 1.0 }, Piece { x0: 1.0, x1: 3.0, d0: 1.0, d1: 1.0 }], vec![]).is_err());
    }
}
