//! Adaptive Gauss–Kronrod quadrature for complex integrands.
//!
//! The 21-point Kronrod rule with its embedded 10-point Gauss rule is applied
//! with global subdivision: the subinterval with the largest error estimate is
//! bisected until the summed estimate meets the tolerance. Infinite limits are
//! mapped onto finite ones with algebraic substitutions. Integrands may fail,
//! which lets a quadrature call sit inside the integrand of another one.

use num_complex::Complex64;

use crate::{Error, Result};

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
    0.123_491_976_262_065_851_077_208_980_528_612,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Relative tolerance on the integral.
    pub rel_tol: f64,
    /// Absolute tolerance on the integral.
    pub abs_tol: f64,
    /// Maximum number of subintervals before giving up.
    pub max_subdivisions: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

impl Options {
    /// Options with the given relative tolerance and no absolute floor.
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Replaces the absolute tolerance.
    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Replaces the subdivision limit.
    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }
}

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Integral estimate.
    pub value: Complex64,
    /// Estimated absolute error.
    pub error: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64)>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut kron = fc * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).norm();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Tolerance(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok((value, error))
}

/// Integrates a fallible complex integrand over `[a, b]`.
///
/// Either limit may be infinite. Errors raised by the integrand are passed
/// through unchanged, so nested calls propagate inner failures.
pub fn integrate_fallible<F>(mut f: F, a: f64, b: f64, opts: Options) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidInput("NaN integration limit".into()));
    }
    if a == b {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    if a > b {
        let est = integrate_fallible(f, b, a, opts)?;
        return Ok(Estimate {
            value: -est.value,
            ..est
        });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(&mut f, a, b, opts),
        (false, false) => {
            let mut g = |t: f64| {
                let d = 1.0 - t * t;
                let x = t / d;
                Ok(f(x)? * ((1.0 + t * t) / (d * d)))
            };
            adapt(&mut g, -1.0, 1.0, opts)
        }
        (true, false) => {
            let mut g = |t: f64| {
                let d = 1.0 - t;
                Ok(f(a + t / d)? * (1.0 / (d * d)))
            };
            adapt(&mut g, 0.0, 1.0, opts)
        }
        (false, true) => {
            let mut g = |t: f64| {
                let d = 1.0 - t;
                Ok(f(b - t / d)? * (1.0 / (d * d)))
            };
            adapt(&mut g, 0.0, 1.0, opts)
        }
    }
}

/// Integrates a complex integrand over `[a, b]`; see [`integrate_fallible`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: Options) -> Result<Estimate>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_fallible(|x| Ok(f(x)), a, b, opts)
}

/// Integrates a real integrand over `[a, b]` and returns `(value, error)`.
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, opts: Options) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let est = integrate_fallible(|x| Ok(Complex64::new(f(x), 0.0)), a, b, opts)?;
    Ok((est.value.re, est.error))
}

fn adapt<F>(f: &mut F, a: f64, b: f64, opts: Options) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let (value, error) = kronrod(f, a, b)?;
    let mut segments = vec![Segment { a, b, value, error }];
    let mut evaluations = 21;
    loop {
        let total: Complex64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= target {
            return Ok(Estimate {
                value: total,
                error: err,
                evaluations,
            });
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(Error::Tolerance(format!(
                "adaptive quadrature on [{a}, {b}] stopped at {} subintervals with error {err:e} > {target:e}",
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Tolerance(format!(
                "subinterval [{}, {}] cannot be bisected further",
                seg.a, seg.b
            )));
        }
        let (v1, e1) = kronrod(f, seg.a, mid)?;
        let (v2, e2) = kronrod(f, mid, seg.b)?;
        evaluations += 42;
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` points
/// on `[a, b]`, returned as `(nodes, weights)`.
pub fn composite_gauss_legendre(
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert_relative_eq!(k, 2.0, epsilon = 1e-15);
        assert_relative_eq!(g, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn kronrod_rule_is_exact_for_degree_31_and_gauss_for_degree_19() {
        for deg in 0..=31u32 {
            let mut f = |x: f64| Ok(Complex64::new(x.powi(deg as i32), 0.0));
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            let (k, _) = kronrod(&mut f, -1.0, 1.0).unwrap();
            assert!(
                (k.re - exact).abs() < 1e-14,
                "kronrod degree {deg}: {} vs {exact}",
                k.re
            );
        }
        for deg in 0..=19i32 {
            let mut g = 0.0;
            for j in 0..5 {
                let x = XGK[2 * j + 1];
                g += WG[j] * (x.powi(deg) + (-x).powi(deg));
            }
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((g - exact).abs() < 1e-14, "gauss degree {deg}");
        }
    }

    #[test]
    fn integrates_gaussian_over_real_line() {
        let est = integrate(
            |x| Complex64::new((-x * x).exp(), 0.0),
            f64::NEG_INFINITY,
            f64::INFINITY,
            Options::rel(1e-12),
        )
        .unwrap();
        assert_relative_eq!(est.value.re, PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn integrates_semi_infinite_and_reversed_limits() {
        let (v, _) =
            integrate_real(|x| (-x).exp(), 0.0, f64::INFINITY, Options::rel(1e-12)).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        let (v, _) =
            integrate_real(|x| x.exp(), f64::NEG_INFINITY, 0.0, Options::rel(1e-12)).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        let (v, _) = integrate_real(|x| x * x, 1.0, 0.0, Options::rel(1e-12)).unwrap();
        assert_relative_eq!(v, -1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn resolves_peaked_integrand() {
        let (v, _) =
            integrate_real(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Options::rel(1e-10)).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert_relative_eq!(v, exact, max_relative = 1e-10);
    }

    #[test]
    fn reports_tolerance_failure() {
        let r = integrate_real(
            |x| x.abs().sqrt().recip(),
            -1.0,
            1.0,
            Options::rel(1e-14).with_max_subdivisions(20),
        );
        assert!(matches!(r, Err(Error::Tolerance(_))));
    }

    #[test]
    fn propagates_integrand_errors() {
        let r = integrate_fallible(
            |_| Err(Error::Domain("inner".into())),
            0.0,
            1.0,
            Options::default(),
        );
        assert_eq!(r.unwrap_err(), Error::Domain("inner".into()));
    }

    #[test]
    fn gauss_legendre_rules_are_exact() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) as i32 {
                let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((s - exact).abs() < 1e-13, "n = {n}, degree {deg}");
            }
        }
    }

    #[test]
    fn composite_rule_integrates_sine() {
        let (x, w) = composite_gauss_legendre(0.0, PI, 4, 8);
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.sin()).sum();
        assert_relative_eq!(s, 2.0, max_relative = 1e-13);
    }
}
