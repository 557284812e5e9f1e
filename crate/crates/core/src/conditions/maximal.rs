//! Hardy-Littlewood maximal functions of |mu|, computed exactly.
//!
//! For a piecewise-linear density, A(L) = |mu|([x - L, x + L]) is quadratic
//! in L between consecutive distances from x to nodes and atoms, so
//! A(L)/(2L) = a0/(2L) + a1/2 + a2 L/2 there. Its supremum over such an
//! interval is at an end or at the single stationary point sqrt(a0/a2).

use serde::{Deserialize, Serialize};

use super::measure::{AbsProfile, LineMeasure};
use crate::spectral::SignedMeasureNu;

/// Range of window half-widths: all L > 0, L <= 1, or L >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaximalMode {
    #[serde(rename = "M")]
    Full,
    #[serde(rename = "Ms")]
    Short,
    #[serde(rename = "Ml")]
    Long,
}

impl MaximalMode {
    fn range(self) -> (f64, f64) {
        match self {
            MaximalMode::Full => (0.0, f64::INFINITY),
            MaximalMode::Short => (0.0, 1.0),
            MaximalMode::Long => (1.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MaximalOperator {
    profile: AbsProfile,
    /// Sorted breakpoints of the profile.
    points: Vec<f64>,
}

impl MaximalOperator {
    pub fn new(m: &LineMeasure) -> MaximalOperator {
        let profile = m.abs_profile();
        let mut points: Vec<f64> = profile.breakpoints().collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        MaximalOperator { profile, points }
    }

    pub fn for_nu(nu: &SignedMeasureNu) -> MaximalOperator {
        MaximalOperator::new(&LineMeasure::from_nu(nu))
    }

    fn window(&self, x: f64, l: f64) -> f64 {
        self.profile.variation_closed(x - l, x + l)
    }

    /// sup over the mode's L-range of |mu|([x - L, x + L]) / (2L).
    pub fn eval(&self, x: f64, mode: MaximalMode) -> f64 {
        if mode == MaximalMode::Full {
            // Split the sup at L = 1 so that M = max(M_s, M_l) holds to the bit.
            return self.eval(x, MaximalMode::Short).max(self.eval(x, MaximalMode::Long));
        }
        let (lo, hi) = mode.range();
        if self.points.is_empty() {
            return 0.0;
        }
        // Distances to breakpoints that can matter for this range.
        let (a, b) = if hi.is_finite() { (x - hi, x + hi) } else { (f64::NEG_INFINITY, f64::INFINITY) };
        let i0 = self.points.partition_point(|&p| p < a);
        let i1 = self.points.partition_point(|&p| p <= b);
        let mut dists: Vec<f64> = self.points[i0..i1].iter().map(|p| (p - x).abs()).filter(|&d| d > lo && d < hi).collect();
        if lo > 0.0 {
            dists.push(lo);
        }
        if hi.is_finite() {
            dists.push(hi);
        }
        dists.sort_by(f64::total_cmp);
        dists.dedup();

        let mut best: f64 = 0.0;
        if lo == 0.0 {
            if self.profile.atoms_closed(x, x) > 0.0 {
                return f64::INFINITY;
            }
            // L -> 0: mean of the one-sided densities.
            let right = self.profile.line_at(x).0;
            let left = self.left_value(x);
            best = 0.5 * (right + left);
        }
        for &l in &dists {
            best = best.max(self.window(x, l) / (2.0 * l));
        }
        let starts = std::iter::once(lo).chain(dists.iter().copied());
        for (l0, l1) in starts.zip(dists.iter().copied()) {
            if let Some(v) = self.interior_max(x, l0, l1) {
                best = best.max(v);
            }
        }
        best
    }

    fn left_value(&self, x: f64) -> f64 {
        // Density just left of x: the line of the piece containing x - 0.
        let i = self.points.partition_point(|&p| p < x);
        if i == 0 {
            return 0.0;
        }
        let probe = 0.5 * (self.points[i - 1] + x);
        let (v, s) = self.profile.line_at(probe);
        v + s * (x - probe)
    }

    /// Stationary point of A(L)/(2L) strictly inside (l0, l1), if it is a maximum.
    fn interior_max(&self, x: f64, l0: f64, l1: f64) -> Option<f64> {
        if !(l1 > l0) {
            return None;
        }
        let lm = 0.5 * (l0 + l1);
        let (vr, sr) = self.profile.line_at(x + lm);
        let (vl, sl) = self.profile.line_at(x - lm);
        // |d|(x - L) on the left piece has slope -sl in L.
        let gamma = sr - sl;
        let a2 = 0.5 * gamma;
        let a1 = vr + vl - gamma * lm;
        let a_start = self.profile.cumulative(x + l0) - self.profile.cumulative(x - l0) + self.profile.atoms_closed(x - l0, x + l0);
        let a0 = a_start - a1 * l0 - a2 * l0 * l0;
        if !(a0 < 0.0 && a2 < 0.0) {
            return None;
        }
        let l = (a0 / a2).sqrt();
        (l > l0 && l < l1).then(|| (a_start + (a1 * (l - l0) + a2 * (l * l - l0 * l0))) / (2.0 * l))
    }
}

/// Convenience wrapper for a single evaluation.
pub fn maximal(nu: &SignedMeasureNu, x: f64, mode: MaximalMode) -> f64 {
    MaximalOperator::for_nu(nu).eval(x, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(m: &LineMeasure, x: f64, lo: f64, hi: f64) -> f64 {
        let p = m.abs_profile();
        let mut best: f64 = 0.0;
        let n = 200_000;
        for i in 1..=n {
            let l = lo + (hi - lo) * i as f64 / n as f64;
            best = best.max(p.variation_closed(x - l, x + l) / (2.0 * l));
        }
        best
    }

    #[test]
    fn unit_atom() {
        let nu = SignedMeasureNu::atoms(vec![(5.0, 1.0)]).unwrap();
        assert_eq!(maximal(&nu, 5.0, MaximalMode::Long), 0.5);
        assert_eq!(maximal(&nu, 5.5, MaximalMode::Short), 1.0);
        assert_eq!(maximal(&nu, 5.0, MaximalMode::Full), f64::INFINITY);
        assert_eq!(maximal(&nu, 7.5, MaximalMode::Short), 0.0);
    }

    #[test]
    fn constant_plateau() {
        let nu = SignedMeasureNu::new(vec![2.0, 10.0], vec![1.0, 1.0], vec![]).unwrap();
        assert!((maximal(&nu, 6.0, MaximalMode::Full) - 1.0).abs() < 1e-15);
        assert!((maximal(&nu, 6.0, MaximalMode::Long) - 1.0).abs() < 1e-15);
        // At the edge the best window is as wide as possible inside the plateau
        // only on one side, so the average is 1/2.
        assert!((maximal(&nu, 2.0, MaximalMode::Short) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interior_stationary_point_matches_brute_force() {
        // A dip in |density| next to x makes the sup occur inside a piece.
        let m = LineMeasure::from_samples(&[0.0, 1.0, 3.0], &[-2.0, 0.5, 3.0], vec![(4.2, 0.7)]).unwrap();
        let op = MaximalOperator::new(&m);
        for x in [0.3, 1.1, 2.0, 3.7] {
            for (mode, lo, hi) in [(MaximalMode::Short, 0.0, 1.0), (MaximalMode::Long, 1.0, 8.0)] {
                let exact = op.eval(x, mode);
                let approx = brute(&m, x, lo, hi);
                assert!(exact >= approx - 1e-10 && exact - approx < 1e-4, "x={x} {mode:?} {exact} {approx}");
            }
        }
    }
}
