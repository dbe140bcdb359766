//! One-dimensional quadrature.
//!
//! [`integrate`] is a globally adaptive Gauss-Kronrod (10/21) scheme that
//! returns an error estimate alongside the value; the estimate is the sum of
//! `|K21 - G10|` over the final partition, which is what the certification
//! layer carries forward as a safety margin. [`gauss_legendre`] provides an
//! unrelated composite rule used for cross-checking.
//!
//! Both rules are open: no node ever lands on an interval endpoint.

use crate::{Error, Result};

// 21-point Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
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
    0.123_491_976_262_065_851_077_600_525_478_434,
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

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute error target for the whole integral.
    pub abs_tol: f64,
    /// Hard cap on the number of subintervals.
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    /// Estimated absolute error of `value`.
    pub error: f64,
    /// Integral of the auxiliary channel (see [`integrate_with_aux`]).
    pub aux: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    aux: f64,
}

fn kronrod21<F>(f: &F, a: f64, b: f64) -> Segment
where
    F: Fn(f64) -> (f64, f64),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (fc, ac) = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut aux = WGK[10] * ac.abs();
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, a1) = f(center - dx);
        let (f2, a2) = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        aux += WGK[j] * (a1.abs() + a2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    Segment {
        a,
        b,
        value,
        error: ((kronrod - gauss) * half).abs(),
        aux: aux * half.abs(),
    }
}

/// A single 21-point Kronrod panel on `[a, b]`: `(value, |K21 - G10|)`.
pub fn kronrod_panel<F>(f: F, a: f64, b: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let s = kronrod21(&|x| (f(x), 0.0), a, b);
    (s.value, s.error)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `opts.abs_tol`.
///
/// `breakpoints` are interior points where `f` (or a derivative) is known to
/// be non-smooth; points outside `(a, b)` are ignored.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: QuadOptions) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    integrate_with_aux(|x| (f(x), 0.0), a, b, breakpoints, opts)
}

/// Like [`integrate`], but the integrand also returns a nonnegative
/// auxiliary quantity (typically the error of a nested integral evaluated at
/// `x`) whose integral over the final partition is reported in
/// [`Estimate::aux`].
pub fn integrate_with_aux<F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<Estimate>
where
    F: Fn(f64) -> (f64, f64),
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Estimate::default());
    }
    if a > b {
        let mut e = integrate_with_aux(f, b, a, breakpoints, opts)?;
        e.value = -e.value;
        return Ok(e);
    }

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut segments: Vec<Segment> = edges.windows(2).map(|w| kronrod21(&f, w[0], w[1])).collect();
    let mut evaluations = 21 * segments.len();

    loop {
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        if total_error <= opts.abs_tol {
            break;
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                a,
                b,
                error: total_error,
                tol: opts.abs_tol,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            // Interval can no longer be split in floating point.
            return Err(Error::Quadrature {
                a,
                b,
                error: total_error,
                tol: opts.abs_tol,
            });
        }
        segments.push(kronrod21(&f, s.a, mid));
        segments.push(kronrod21(&f, mid, s.b));
        evaluations += 42;
    }

    // Sum in a fixed order so results do not depend on the refinement history.
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(Estimate {
        value: segments.iter().map(|s| s.value).sum(),
        error: segments.iter().map(|s| s.error).sum(),
        aux: segments.iter().map(|s| s.aux).sum(),
        evaluations,
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
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

/// Composite Gauss-Legendre quadrature with `panels` equal panels of
/// `order` nodes each. Breakpoints split the range first.
pub fn gauss_legendre<F>(f: F, a: f64, b: f64, breakpoints: &[f64], panels: usize, order: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let (nodes, weights) = gauss_legendre_rule(order);
    let mut edges = vec![a];
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    edges.extend(cuts);
    edges.push(b);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for k in 0..panels {
            let lo = w[0] + h * k as f64;
            let c = lo + 0.5 * h;
            let s: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, wt)| wt * f(c + 0.5 * h * x))
                .sum();
            total += 0.5 * h * s;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_exactness() {
        // K21 is exact through degree 31, G10 through degree 19.
        for deg in [0, 1, 5, 19, 30] {
            let s = kronrod21(&|x: f64| (x.powi(deg), 0.0), -1.0, 1.0);
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((s.value - exact).abs() < 1e-14, "degree {deg}");
            if deg <= 19 {
                assert!(s.error < 1e-14, "degree {deg}: {}", s.error);
            }
        }
    }

    #[test]
    fn gauss_legendre_rule_is_exact() {
        for n in [1, 2, 5, 10, 20] {
            let (x, w) = gauss_legendre_rule(n);
            for deg in 0..(2 * n) {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} deg={deg}: {s}");
            }
        }
        // the 10-point nodes coincide with the Kronrod table's Gauss subset
        let (x, _) = gauss_legendre_rule(10);
        for j in 0..5 {
            assert!((x[9 - j] - XGK[2 * j + 1]).abs() < 1e-15);
        }
    }

    #[test]
    fn adaptive_handles_smooth_and_kinked_integrands() {
        let e = integrate(|x| x.exp(), 0.0, 3.0, &[], QuadOptions::default()).unwrap();
        assert!((e.value - (3f64.exp() - 1.0)).abs() < 1e-12);

        let e = integrate(|x| (x - 0.3).abs(), 0.0, 1.0, &[], QuadOptions::with_tol(1e-12)).unwrap();
        assert!((e.value - (0.045 + 0.245)).abs() < 1e-12);
        // with the kink given as a breakpoint, one step suffices
        let e = integrate(|x| (x - 0.3).abs(), 0.0, 1.0, &[0.3], QuadOptions::with_tol(1e-12)).unwrap();
        assert_eq!(e.evaluations, 42);

        // integrable endpoint singularity, never sampled at 0
        let e = integrate(|x| x.sqrt().recip(), 0.0, 1.0, &[], QuadOptions::with_tol(1e-9)).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn reversed_and_empty_ranges() {
        let f = |x: f64| x * x;
        let fwd = integrate(f, 0.0, 2.0, &[], QuadOptions::default()).unwrap();
        let rev = integrate(f, 2.0, 0.0, &[], QuadOptions::default()).unwrap();
        assert_eq!(fwd.value, -rev.value);
        assert_eq!(integrate(f, 1.0, 1.0, &[], QuadOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-14,
            max_intervals: 3,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, &[], opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn aux_channel_is_integrated() {
        let e = integrate_with_aux(|x| (x, 2.0 * x), 0.0, 1.0, &[], QuadOptions::default()).unwrap();
        assert!((e.value - 0.5).abs() < 1e-15);
        assert!((e.aux - 1.0).abs() < 1e-15);
    }

    #[test]
    fn composite_rule_agrees_with_adaptive() {
        let f = |x: f64| (-x * x).exp() * (3.0 * x).cos();
        let a = integrate(f, -2.0, 5.0, &[], QuadOptions::with_tol(1e-13)).unwrap();
        let g = gauss_legendre(f, -2.0, 5.0, &[], 16, 20);
        assert!((a.value - g).abs() < 1e-12);
    }
}
