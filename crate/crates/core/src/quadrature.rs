//! Adaptive Gauss-Kronrod integration.
//!
//! A 21-point Kronrod rule with its embedded 10-point Gauss rule is applied on
//! each subinterval; the subinterval with the largest error estimate is bisected
//! until the global error estimate meets the requested tolerance. Semi-infinite
//! and infinite ranges are mapped onto `(0, 1]` first.

use crate::error::{Error, Result};

/// Relative tolerance used by the distribution transforms and oracles.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

const DEFAULT_LIMIT: usize = 2000;

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
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

/// Integral estimate with its absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += WG[j] * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    let abs_half = half.abs();
    Segment {
        a,
        b,
        value: res_kronrod * half,
        error: rescale_error(err, res_abs * abs_half, res_asc * abs_half),
        abs_value: res_abs * abs_half,
    }
}

/// Integrates `f` over the finite interval `[a, b]` to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Integral> {
    integrate_with(&f, a, b, 0.0, rel_tol, DEFAULT_LIMIT)
}

/// Like [`integrate`] with an explicit absolute tolerance floor and subdivision limit.
pub fn integrate_with<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    limit: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    let mut segments = vec![kronrod21(f, a, b)];
    let mut total = segments[0].value;
    let mut total_err = segments[0].error;

    loop {
        // an error at the roundoff floor of the integral of |f| is accepted
        let abs_total: f64 = segments.iter().map(|s| s.abs_value).sum();
        let tolerance = abs_tol.max(rel_tol * total.abs()).max(100.0 * f64::EPSILON * abs_total);
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                abs_error: total_err,
                tolerance: rel_tol,
                intervals: segments.len(),
            });
        }
        if total_err <= tolerance {
            return Ok(Integral {
                value: total,
                abs_error: total_err,
                intervals: segments.len(),
            });
        }
        if segments.len() >= limit {
            return Err(Error::Quadrature {
                estimate: total,
                abs_error: total_err,
                tolerance: rel_tol,
                intervals: segments.len(),
            });
        }

        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error))
            .expect("segment list is never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // interval can no longer be split in floating point
            return Err(Error::Quadrature {
                estimate: total,
                abs_error: total_err,
                tolerance: rel_tol,
                intervals: segments.len() + 1,
            });
        }
        let left = kronrod21(f, seg.a, mid);
        let right = kronrod21(f, mid, seg.b);
        total += left.value + right.value - seg.value;
        segments.push(left);
        segments.push(right);
        // re-sum the error to avoid drift from repeated subtraction
        total_err = segments.iter().map(|s| s.error).sum();
    }
}

/// Integrates `f` over `[a, +inf)` through the map `x = a + (1 - t) / t`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> Result<Integral> {
    let mapped = |t: f64| {
        let x = a + (1.0 - t) / t;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v / (t * t)
        }
    };
    integrate_with(&mapped, 0.0, 1.0, 0.0, rel_tol, DEFAULT_LIMIT)
}

/// Integrates `f` over the whole real line.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<Integral> {
    let mapped = |t: f64| {
        let x = (1.0 - t) / t;
        let v = f(x) + f(-x);
        if v == 0.0 {
            0.0
        } else {
            v / (t * t)
        }
    };
    integrate_with(&mapped, 0.0, 1.0, 0.0, rel_tol, DEFAULT_LIMIT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_needs_subdivision() {
        let r = integrate(|x| (50.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-10).unwrap();
        // integral of sin(50x) over [0, pi] is (1 - cos(50 pi)) / 50 = 0
        assert!(r.value.abs() < 1e-10);
        let r = integrate(|x| (x).sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x| (-x).exp(), 0.0, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_to_infinity(|x| x * (-2.0 * x).exp(), 0.0, 1e-10).unwrap();
        assert!((r.value - 0.25).abs() < 1e-10);
    }

    #[test]
    fn gaussian_on_real_line() {
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let r = integrate_real_line(|x| norm * (-0.5 * x * x).exp(), 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nonconvergence_is_reported() {
        // 1/x on (0, 1] diverges
        let err = integrate_with(&|x: f64| 1.0 / x, 0.0, 1.0, 0.0, 1e-12, 50).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
