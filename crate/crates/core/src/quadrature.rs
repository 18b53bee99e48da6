//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The panel with the largest error estimate is bisected until the summed
//! estimate falls below `max(abs, rel * |I|)`. Error estimates follow the
//! QUADPACK `qk21` heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1); odd indices are the 10-point Gauss nodes.
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
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Convergence target for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_panels: 2000,
        }
    }

    pub const fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl std::ops::Add for QuadResult {
    type Output = QuadResult;
    fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut kronrod = WGK[10] * f_center;
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut values = [(0.0, 0.0); 10];
    for (j, value) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *value = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (f_center - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    Panel {
        lo,
        hi,
        value,
        error,
    }
}

/// Integrates `f` over the finite interval `[lo, hi]`.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "integration limits must be finite, got [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(QuadResult::default());
    }
    let first = kronrod21(&mut f, lo, hi);
    let mut evaluations = 21;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::with_capacity(64);
    heap.push(first);

    while error > tol.target(value) {
        if !value.is_finite() {
            break;
        }
        if heap.len() >= tol.max_panels {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo.min(worst.hi) || mid >= worst.lo.max(worst.hi) {
            // Panel too narrow to split further in floating point.
            heap.push(worst);
            break;
        }
        let left = kronrod21(&mut f, worst.lo, mid);
        let right = kronrod21(&mut f, mid, worst.hi);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed accumulated update drift.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    let target = tol.target(value);
    if !value.is_finite() || error > target {
        return Err(Error::Quadrature {
            lo,
            hi,
            estimate: value,
            error_estimate: error,
            tolerance: target,
        });
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Integrates over consecutive panels `[p0, p1], [p1, p2], ...`, each to `tol`.
/// Non-increasing neighbours are skipped.
pub fn integrate_pieces<F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    let mut total = QuadResult::default();
    for w in points.windows(2) {
        if w[1] > w[0] {
            total = total + integrate(&mut f, w[0], w[1], tol)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TIGHT: Tolerance = Tolerance::new(1e-13, 1e-13);

    #[test]
    fn polynomials_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, TIGHT).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn smooth_functions() {
        let r = integrate(f64::sin, 0.0, PI, TIGHT).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(|x| (-x * x).exp(), -10.0, 10.0, TIGHT).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_square_root_singularity() {
        // ∫0^1 1/sqrt(x) dx = 2
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::new(1e-10, 1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn kink_is_handled() {
        let r = integrate(|x: f64| x.abs(), -1.0, 3.0, TIGHT).unwrap();
        assert!((r.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_negate() {
        let a = integrate(f64::exp, 0.0, 1.0, TIGHT).unwrap().value;
        let b = integrate(f64::exp, 1.0, 0.0, TIGHT).unwrap().value;
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let err = integrate(
            |x| (1.0 / x).sin() / x,
            1e-9,
            1.0,
            Tolerance::new(1e-14, 0.0).with_max_panels(20),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn pieces_skip_degenerate_panels() {
        let r = integrate_pieces(|x| x, &[0.0, 1.0, 1.0, 2.0, 1.5], TIGHT).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }
}
