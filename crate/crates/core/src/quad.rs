//! Quadrature: Gauss-Legendre panels, adaptive Gauss-Kronrod and
//! half-line integrals with a fitted power-law tail.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed Gauss-Legendre rule reused across many panels.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussRule { nodes, weights }
    }

    /// Mapped nodes and weights on [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_636_976_875,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn kronrod21<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<f64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid)?;
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = WGK[10] * fc.abs();
    let mut vals = [(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(mid - dx)?, f(mid + dx)?);
        vals[j] = (f1, f2);
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((vals[j].0 - mean).abs() + (vals[j].1 - mean).abs());
    }
    if !kron.is_finite() {
        return Err(Error::NonFiniteIntegrand { a, b });
    }
    let value = kron * half;
    let resabs = abs_sum * half.abs();
    let resasc = asc * half.abs();
    let mut error = ((kron - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel { a, b, value, error })
}

/// Options for [`integrate`].
#[derive(Debug, Clone)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Uniform panels per breakpoint interval before refinement.
    pub initial_panels: usize,
    /// Interior points where the integrand may be non-smooth.
    pub breakpoints: Vec<f64>,
}

impl QuadOptions {
    pub fn new(rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol: 1e-14,
            rel_tol,
            max_panels: 20_000,
            initial_panels: 8,
            breakpoints: Vec::new(),
        }
    }

    pub fn abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn panels(mut self, n: usize) -> Self {
        self.initial_panels = n.max(1);
        self
    }

    pub fn breakpoints(mut self, pts: Vec<f64>) -> Self {
        self.breakpoints = pts;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Globally adaptive Gauss-Kronrod (10/21) integration of `f` over [a, b].
///
/// Panels are refined in parallel batches; the result does not depend on the
/// thread count because the final sum runs over panels sorted by position.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, panels: 0, converged: true });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts = vec![lo];
    let mut bps: Vec<f64> = opts.breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    cuts.extend(bps);
    cuts.push(hi);
    let mut initial = Vec::new();
    for w in cuts.windows(2) {
        let n = opts.initial_panels;
        for i in 0..n {
            let x0 = w[0] + (w[1] - w[0]) * i as f64 / n as f64;
            let x1 = if i + 1 == n { w[1] } else { w[0] + (w[1] - w[0]) * (i + 1) as f64 / n as f64 };
            initial.push((x0, x1));
        }
    }
    let first: Vec<Panel> = initial
        .par_iter()
        .map(|&(x0, x1)| kronrod21(&f, x0, x1))
        .collect::<Result<_>>()?;
    let mut heap: BinaryHeap<Panel> = first.into_iter().collect();
    let mut done: Vec<Panel> = Vec::new();
    let min_width = (hi - lo) * 1e-13;
    loop {
        let total: f64 = heap.iter().chain(&done).map(|p| p.value).sum();
        let err: f64 = heap.iter().chain(&done).map(|p| p.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        let count = heap.len() + done.len();
        if err <= target || heap.is_empty() || count >= opts.max_panels {
            let mut all: Vec<Panel> = heap.into_vec();
            all.extend(done);
            all.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value: f64 = all.iter().map(|p| p.value).sum();
            let error: f64 = all.iter().map(|p| p.error).sum();
            return Ok(QuadResult {
                value: sign * value,
                error,
                panels: all.len(),
                converged: error <= target.max(1e3 * f64::EPSILON * value.abs()),
            });
        }
        // Split the worst panels until the remaining error would meet the target.
        let mut batch = Vec::new();
        let mut remaining = err;
        while let Some(p) = heap.pop() {
            if p.b - p.a < min_width {
                done.push(p);
                continue;
            }
            remaining -= p.error;
            batch.push(p);
            if batch.len() >= 64 || remaining <= 0.5 * target {
                break;
            }
        }
        if batch.is_empty() {
            continue;
        }
        let halves: Vec<Panel> = batch
            .par_iter()
            .flat_map_iter(|p| {
                let m = 0.5 * (p.a + p.b);
                [(p.a, m), (m, p.b)]
            })
            .map(|(x0, x1)| kronrod21(&f, x0, x1))
            .collect::<Result<_>>()?;
        heap.extend(halves);
    }
}

/// Like [`integrate`], but each breakpoint interval is mapped from [0, 1]
/// through x = a + (b - a) t^2 (3 - 2t). The Jacobian vanishes at both ends,
/// which tames log and inverse-square-root singularities sitting on breakpoints.
pub fn integrate_clustered<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = opts.breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let n = (cuts.len() - 1).max(1) as f64;
    let sub = QuadOptions { abs_tol: opts.abs_tol / n, breakpoints: Vec::new(), ..opts.clone() };
    let mut out = QuadResult { value: 0.0, error: 0.0, panels: 0, converged: true };
    for w in cuts.windows(2) {
        let (x0, width) = (w[0], w[1] - w[0]);
        let g = |t: f64| {
            let x = x0 + width * t * t * (3.0 - 2.0 * t);
            let jac = 6.0 * width * t * (1.0 - t);
            if jac == 0.0 {
                return Ok(0.0);
            }
            Ok(f(x)? * jac)
        };
        let r = integrate(g, 0.0, 1.0, &sub)?;
        out.value += r.value;
        out.error += r.error;
        out.panels += r.panels;
        out.converged &= r.converged;
    }
    out.value *= sign;
    Ok(out)
}

/// Integral over [lo, inf) split into an adaptive body on [lo, kmax] and a tail
/// fitted to `C / k^2` decay of the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailedIntegral {
    pub value: f64,
    pub body: f64,
    pub body_error: f64,
    pub tail: f64,
    pub tail_error: f64,
    pub kmax: f64,
}

/// Number of samples in the tail-fit window [kmax/2, kmax].
const TAIL_SAMPLES: usize = 800;

/// Hann-weighted mean; the smooth window suppresses leakage from
/// oscillations that do not fit a whole number of periods in the window.
pub fn hann_mean(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, x) in xs.iter().enumerate() {
        let w = (std::f64::consts::PI * (i as f64 + 0.5) / n).sin().powi(2);
        num += w * x;
        den += w;
    }
    num / den
}

/// Fit `f(k) ~ C / k^2` on [kmax/2, kmax] and return (tail, uncertainty).
///
/// C is a Hann-weighted mean of k^2 f(k) over the window, which averages out
/// oscillating corrections. The uncertainty compares the two window halves.
pub fn fit_inverse_square_tail<F>(f: &F, kmax: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let lo = 0.5 * kmax;
    let h = (kmax - lo) / TAIL_SAMPLES as f64;
    let scaled: Vec<f64> = (0..TAIL_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let k = lo + (i as f64 + 0.5) * h;
            f(k).map(|v| v * k * k)
        })
        .collect::<Result<_>>()?;
    let half = TAIL_SAMPLES / 2;
    let c_lo = hann_mean(&scaled[..half]);
    let c_hi = hann_mean(&scaled[half..]);
    let c = hann_mean(&scaled);
    let tail = c / kmax;
    let uncertainty = ((c_lo - c_hi).abs() + c.abs() / kmax) / kmax;
    Ok((tail, uncertainty))
}

/// Adaptive body plus fitted tail. Fails with `TailNotDecaying` when the tail
/// uncertainty exceeds `tail_tol` or k^2 f(k) grows across the window.
pub fn integrate_to_infinity<F>(f: F, lo: f64, kmax: f64, opts: &QuadOptions, tail_tol: f64) -> Result<TailedIntegral>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let body = integrate(&f, lo, kmax, opts)?;
    if !body.converged {
        return Err(Error::QuadratureFailure { error: body.error, intervals: body.panels });
    }
    let (tail, tail_error) = fit_inverse_square_tail(&f, kmax)?;
    if tail_error > tail_tol {
        return Err(Error::TailNotDecaying { tail, uncertainty: tail_error });
    }
    Ok(TailedIntegral {
        value: body.value + tail,
        body: body.value,
        body_error: body.error,
        tail,
        tail_error,
        kmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::new(8);
        // degree 15 is the limit for 8 points
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let (_, w) = gauss_legendre(13);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_log_singularity() {
        let opts = QuadOptions::new(1e-10);
        let r = integrate(|x: f64| Ok(x.ln()), 0.0, 1.0, &opts).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn adaptive_oscillatory() {
        let opts = QuadOptions::new(1e-12).panels(16);
        let r = integrate(|x: f64| Ok((50.0 * x).sin() * x), 0.0, 3.0, &opts).unwrap();
        let exact = ((150f64).sin() - 150.0 * (150f64).cos()) / 2500.0;
        assert!((r.value - exact).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let opts = QuadOptions::new(1e-12);
        let r = integrate(|x: f64| Ok(x * x), 2.0, 0.0, &opts).unwrap();
        assert!((r.value + 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tail_fit_recovers_inverse_square() {
        let f = |k: f64| Ok((1.0 + (2.0 * k).cos()) / (k * k));
        let t = integrate_to_infinity(f, 1.0, 200.0, &QuadOptions::new(1e-10).panels(64), 1e-3).unwrap();
        // exact: int_1^inf (1 + cos 2k)/k^2 = 1 + int_1^inf cos(2k)/k^2
        let body = integrate(|k: f64| Ok((2.0 * k).cos() / (k * k)), 1.0, 5000.0, &QuadOptions::new(1e-12).panels(2000))
            .unwrap()
            .value;
        let exact = 1.0 + body;
        assert!((t.value - exact).abs() < 1e-4, "{} vs {}", t.value, exact);
    }

    #[test]
    fn growing_tail_is_rejected() {
        let r = integrate_to_infinity(|k: f64| Ok(k.sqrt()), 0.0, 50.0, &QuadOptions::new(1e-8), 1e-4);
        assert!(matches!(r, Err(Error::TailNotDecaying { .. })));
    }
}
