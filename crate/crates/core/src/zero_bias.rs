//! Zero-bias transforms of discrete laws and the mean metric.
//!
//! For a centred law `W` with variance `s^2` the zero-biased law `W*` has the
//! piecewise-constant density `p(w) = E[W 1{W > w}] / s^2` (equivalently
//! `E[-W 1{W < w}] / s^2` for `w < 0`), so its CDF is piecewise linear with
//! breakpoints at the atoms of `W`. The mean metric `kappa1` between a
//! staircase CDF and a piecewise-linear one is then an exact sum of
//! trapezoids, split at sign changes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::{Error, Result};

/// Maximum |mean| accepted by the zero-bias constructors.
pub const CENTER_TOL: f64 = 1e-12;

/// A density that is constant between consecutive breakpoints and zero
/// outside `[breakpoints[0], breakpoints[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantDensity {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantDensity {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Density value on each interval `(breakpoints[j], breakpoints[j + 1])`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().expect("nonempty"))
    }

    pub fn value(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let j = self.breakpoints.partition_point(|&b| b <= x).saturating_sub(1);
        self.values[j.min(self.values.len() - 1)]
    }

    pub fn integral(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| v * (w[1] - w[0]))
            .sum()
    }

    /// Fourier transform, integrated piece by piece in closed form.
    pub fn cf(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(self.integral(), 0.0);
        }
        let i_t = Complex64::new(0.0, t);
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| {
                let hi = Complex64::from_polar(1.0, t * w[1]);
                let lo = Complex64::from_polar(1.0, t * w[0]);
                (hi - lo) * *v / i_t
            })
            .sum()
    }
}

/// Staircase CDF of a discrete law.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    jumps: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepCdf {
    /// Builds the staircase, skipping zero-probability atoms.
    pub fn new(d: &DiscreteDistribution) -> Self {
        let mut jumps = Vec::with_capacity(d.len());
        let mut cumulative = Vec::with_capacity(d.len());
        let mut acc = 0.0;
        for (x, p) in d.iter().filter(|(_, p)| *p > 0.0) {
            acc += p;
            jumps.push(x);
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self { jumps, cumulative }
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.jumps.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// The same CDF written as a piecewise-linear one with zero-width ramps.
    pub fn to_piecewise_linear(&self) -> PiecewiseLinearCdf {
        let mut breakpoints = Vec::with_capacity(2 * self.jumps.len());
        let mut values = Vec::with_capacity(2 * self.jumps.len());
        let mut below = 0.0;
        for (&x, &c) in self.jumps.iter().zip(&self.cumulative) {
            breakpoints.extend([x, x]);
            values.extend([below, c]);
            below = c;
        }
        PiecewiseLinearCdf { breakpoints, values }
    }
}

/// A continuous-or-jumping CDF that is linear between breakpoints, zero
/// before the first and one after the last.
///
/// Breakpoints are nondecreasing; a repeated breakpoint encodes a jump.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCdf {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearCdf {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("piecewise-linear CDF: {m}")));
        if breakpoints.len() < 2 || breakpoints.len() != values.len() {
            return bad("need at least two breakpoints with matching values");
        }
        if breakpoints.windows(2).any(|w| w[0] > w[1]) {
            return bad("breakpoints must be nondecreasing");
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return bad("values must be nondecreasing");
        }
        if values[0] != 0.0 || *values.last().expect("len >= 2") != 1.0 {
            return bad("values must start at 0 and end at 1");
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right-continuous value F(x).
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        self.interpolate(k, x)
    }

    /// Left limit F(x-).
    pub fn eval_left(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b < x);
        self.interpolate(k, x)
    }

    // `k` = number of breakpoints on the chosen side of x.
    fn interpolate(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if k == self.breakpoints.len() {
            return 1.0;
        }
        let (x0, x1) = (self.breakpoints[k - 1], self.breakpoints[k]);
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        if x1 == x0 {
            return y1;
        }
        if x == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// sup over x of |F(x) - G(x)|, attained at a breakpoint of either CDF
    /// from one side or the other.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in self.breakpoints.iter().chain(&other.breakpoints) {
            worst = worst
                .max((self.eval(x) - other.eval(x)).abs())
                .max((self.eval_left(x) - other.eval_left(x)).abs());
        }
        worst
    }
}

/// Merged, deduplicated breakpoints of several CDFs.
fn merged_grid<'a>(sets: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut grid: Vec<f64> = sets.into_iter().flatten().copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// ∫ |F(x) - G(x)| dx for two piecewise-linear CDFs, exactly.
pub fn kappa1_piecewise(f: &PiecewiseLinearCdf, g: &PiecewiseLinearCdf) -> f64 {
    let grid = merged_grid([f.breakpoints(), g.breakpoints()]);
    grid.windows(2)
        .map(|w| {
            let (x0, x1) = (w[0], w[1]);
            let d0 = f.eval(x0) - g.eval(x0);
            let d1 = f.eval_left(x1) - g.eval_left(x1);
            abs_linear_integral(d0, d1, x1 - x0)
        })
        .sum()
}

/// ∫_0^h |d0 + (d1 - d0) s/h| ds.
fn abs_linear_integral(d0: f64, d1: f64, h: f64) -> f64 {
    if d0 * d1 >= 0.0 {
        0.5 * h * (d0.abs() + d1.abs())
    } else {
        // split at the root s* = h d0 / (d0 - d1)
        0.5 * h * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
    }
}

/// Mean metric between a staircase CDF and a piecewise-linear one.
pub fn kappa1(f: &StepCdf, g: &PiecewiseLinearCdf) -> f64 {
    kappa1_piecewise(&f.to_piecewise_linear(), g)
}

/// Mean metric between two discrete laws.
pub fn kappa1_discrete(x: &DiscreteDistribution, y: &DiscreteDistribution) -> f64 {
    kappa1(&StepCdf::new(x), &StepCdf::new(y).to_piecewise_linear())
}

fn require_centered(d: &DiscreteDistribution) -> Result<f64> {
    let m = d.moments();
    if m.mean.abs() > CENTER_TOL {
        return Err(Error::NotCentered(m.mean));
    }
    if m.variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(m.variance)
}

/// Density of the zero-biased law of a centred discrete `d`.
pub fn zero_bias_density(d: &DiscreteDistribution) -> Result<PiecewiseConstantDensity> {
    let variance = require_centered(d)?;
    let atoms = d.atoms();
    let probs = d.probs();
    let n = atoms.len();
    // upper[j] = sum_{i >= j} p_i x_i, lower[j] = sum_{i < j} -p_i x_i
    let mut upper = vec![0.0; n + 1];
    for i in (0..n).rev() {
        upper[i] = upper[i + 1] + probs[i] * atoms[i];
    }
    let mut lower = vec![0.0; n + 1];
    for i in 0..n {
        lower[i + 1] = lower[i] - probs[i] * atoms[i];
    }
    let values = (0..n - 1)
        .map(|j| {
            let mid = 0.5 * (atoms[j] + atoms[j + 1]);
            let mass = if mid >= 0.0 { upper[j + 1] } else { lower[j + 1] };
            (mass / variance).max(0.0)
        })
        .collect();
    Ok(PiecewiseConstantDensity {
        breakpoints: atoms.to_vec(),
        values,
    })
}

/// Exact CDF of the zero-biased law of a centred discrete `d`.
pub fn zero_bias_cdf(d: &DiscreteDistribution) -> Result<PiecewiseLinearCdf> {
    let density = zero_bias_density(d)?;
    let mut values = Vec::with_capacity(density.breakpoints.len());
    let mut acc = 0.0;
    values.push(0.0);
    for (w, v) in density.breakpoints.windows(2).zip(&density.values) {
        acc += v * (w[1] - w[0]);
        values.push(acc);
    }
    // total mass is one up to rounding; normalise so the CDF ends at 1
    for v in values.iter_mut() {
        *v /= acc;
    }
    *values.last_mut().expect("nonempty") = 1.0;
    PiecewiseLinearCdf::new(density.breakpoints, values)
}

/// Mean-metric report for a standardized law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa1Report {
    pub beta3: f64,
    pub kappa1: f64,
    /// `beta3 / 2 - kappa1`, nonnegative by the sharp zero-bias bound.
    pub gap: f64,
}

pub fn kappa1_report(d: &DiscreteDistribution) -> Result<Kappa1Report> {
    let m = d.require_standardized()?;
    let k = kappa1(&StepCdf::new(d), &zero_bias_cdf(d)?);
    Ok(Kappa1Report {
        beta3: m.beta3,
        kappa1: k,
        gap: 0.5 * m.beta3 - k,
    })
}

/// `E|W|^3 / 2 - kappa1(W, W*)` for a standardized law.
pub fn third_moment_gap(d: &DiscreteDistribution) -> Result<f64> {
    Ok(kappa1_report(d)?.gap)
}

/// The unique standardized law on `{-a, -b, c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreePointParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub delta: f64,
}

impl ThreePointParams {
    pub fn distribution(&self) -> Result<DiscreteDistribution> {
        DiscreteDistribution::new(
            vec![-self.a, -self.b, self.c],
            vec![self.p.max(0.0), self.q.max(0.0), self.r.max(0.0)],
        )
    }

    pub fn beta3(&self) -> f64 {
        self.p * self.a.powi(3) + self.q * self.b.powi(3) + self.r * self.c.powi(3)
    }
}

/// Solves the moment equations for the probabilities on `{-a, -b, c}`.
///
/// Requires `a > b >= 0` and `c > 0`; returns
/// [`Error::InfeasibleThreePoint`] when `ac < 1` or `bc > 1`.
pub fn threepoint_params(a: f64, b: f64, c: f64) -> Result<ThreePointParams> {
    if !(a > b && b >= 0.0 && c > 0.0 && a.is_finite() && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "three-point values need a > b >= 0 and c > 0, got ({a}, {b}, {c})"
        )));
    }
    if a * c < 1.0 || b * c > 1.0 {
        return Err(Error::InfeasibleThreePoint { a, b, c });
    }
    let delta = (a + c) * (b + c) * (a - b);
    Ok(ThreePointParams {
        a,
        b,
        c,
        p: (1.0 - b * c) * (c + b) / delta,
        q: (a * c - 1.0) * (a + c) / delta,
        r: (a * b + 1.0) * (a - b) / delta,
        delta,
    })
}

/// Which closed form of `g(a, b, c)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThreePointCase {
    /// a(a-b) <= 1
    A,
    /// a(a-b) >= 1 and c(b+c) >= 1
    B,
    /// c(b+c) <= 1
    C,
}

impl std::fmt::Display for ThreePointCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
        };
        f.write_str(s)
    }
}

pub fn threepoint_case(a: f64, b: f64, c: f64) -> ThreePointCase {
    if a * (a - b) < 1.0 {
        ThreePointCase::A
    } else if c * (b + c) < 1.0 {
        ThreePointCase::C
    } else {
        ThreePointCase::B
    }
}

/// Evaluates the closed form of `case` regardless of whether its conditions
/// hold. Used for the continuity checks at case boundaries.
pub fn threepoint_g_expr(t: &ThreePointParams, case: ThreePointCase) -> f64 {
    let ThreePointParams { a, b, c, p, q, r, .. } = *t;
    match case {
        ThreePointCase::A => r / c - p * a.powi(3) - q * b.powi(3),
        ThreePointCase::B => {
            p * a * (a - b - 1.0 / a).powi(2) + r / c - p * a.powi(3) - q * b.powi(3)
        }
        ThreePointCase::C => p / a - r * c.powi(3),
    }
}

/// `kappa1(W, W*) - E|W|^3 / 2` for the standardized law on `{-a, -b, c}`,
/// with the case used.
pub fn threepoint_g(a: f64, b: f64, c: f64) -> Result<(f64, ThreePointCase)> {
    let t = threepoint_params(a, b, c)?;
    let case = threepoint_case(a, b, c);
    Ok((threepoint_g_expr(&t, case), case))
}

/// CDF of the zero-biased law of `(X_1 + ... + X_n) / s`, assembled as the
/// variance-weighted mixture over `k` of the laws of
/// `sum_{j != k} X_j / s + (X_k / s)*`.
pub fn mixture_zero_bias_sum(ds: &[DiscreteDistribution]) -> Result<PiecewiseLinearCdf> {
    if ds.is_empty() {
        return Err(Error::InvalidParameter("empty collection of summands".into()));
    }
    let mut variances = Vec::with_capacity(ds.len());
    for d in ds {
        let m = d.moments();
        if m.mean.abs() > CENTER_TOL {
            return Err(Error::NotCentered(m.mean));
        }
        variances.push(m.variance);
    }
    let total: f64 = variances.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sigma = total.sqrt();
    let scaled: Vec<DiscreteDistribution> = ds
        .iter()
        .map(|d| d.affine(1.0 / sigma, 0.0))
        .collect::<Result<_>>()?;

    let mut components: Vec<(f64, PiecewiseLinearCdf)> = Vec::new();
    for (k, xk) in scaled.iter().enumerate() {
        if variances[k] <= 0.0 {
            continue;
        }
        let rest = scaled
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .fold(DiscreteDistribution::point_mass(0.0), |acc, (_, d)| acc.convolve(d));
        let zb = zero_bias_cdf(xk)?;
        components.push((variances[k] / total, shift_mixture(&rest, &zb)?));
    }

    let grid = merged_grid(components.iter().map(|(_, c)| c.breakpoints()));
    let mut values: Vec<f64> = grid
        .iter()
        .map(|&x| components.iter().map(|(w, c)| w * c.eval(x)).sum::<f64>())
        .collect();
    let last = *values.last().expect("nonempty grid");
    for v in values.iter_mut() {
        *v = (*v / last).min(1.0);
    }
    values[0] = 0.0;
    *values.last_mut().expect("nonempty") = 1.0;
    for i in 1..values.len() {
        // rounding can leave a 1-ulp dip between equal plateaus
        values[i] = values[i].max(values[i - 1]);
    }
    PiecewiseLinearCdf::new(grid, values)
}

/// CDF of `Y + Z` for discrete `Y` and continuous piecewise-linear `G = F_Z`.
fn shift_mixture(y: &DiscreteDistribution, g: &PiecewiseLinearCdf) -> Result<PiecewiseLinearCdf> {
    let grid = merged_grid(std::iter::once(
        y.atoms()
            .iter()
            .flat_map(|a| g.breakpoints().iter().map(move |b| a + b))
            .collect::<Vec<_>>()
            .as_slice(),
    ));
    let mut values: Vec<f64> = grid
        .iter()
        .map(|&x| y.iter().map(|(a, p)| p * g.eval(x - a)).sum::<f64>())
        .collect();
    values[0] = 0.0;
    *values.last_mut().expect("nonempty") = 1.0;
    for i in 1..values.len() {
        values[i] = values[i].clamp(values[i - 1], 1.0);
    }
    PiecewiseLinearCdf::new(grid, values)
}

/// `(1/6) |E W^3| / E|W|^3` for the standardized two-point law with weight
/// `p` on the negative atom; tends to 1/6 as `p -> 1`.
pub fn zeta3_ratio_lower(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")));
    }
    let q = 1.0 - p;
    let neg = q * (q / p).sqrt();
    let pos = p * (p / q).sqrt();
    Ok((pos - neg).abs() / (pos + neg) / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rademacher_zero_bias_is_uniform() {
        let r = DiscreteDistribution::rademacher();
        let dens = zero_bias_density(&r).unwrap();
        assert_eq!(dens.breakpoints(), &[-1.0, 1.0]);
        assert_eq!(dens.values(), &[0.5]);
        let cdf = zero_bias_cdf(&r).unwrap();
        assert_eq!(cdf.breakpoints(), &[-1.0, 1.0]);
        assert_eq!(cdf.values(), &[0.0, 1.0]);
        assert_eq!(cdf.eval(0.0), 0.5);
    }

    #[test]
    fn two_point_density_is_sqrt_pq() {
        for &p in &[0.1, 0.37, 0.9] {
            let d = DiscreteDistribution::standard_two_point(p).unwrap();
            let dens = zero_bias_density(&d).unwrap();
            assert_eq!(dens.values().len(), 1);
            assert!(close(dens.values()[0], (p * (1.0 - p)).sqrt(), 1e-14));
            assert!(close(dens.integral(), 1.0, 1e-14));
        }
    }

    #[test]
    fn three_point_cdf_pieces() {
        let t = threepoint_params(2.0, 0.5, 1.0).unwrap();
        let d = t.distribution().unwrap();
        let dens = zero_bias_density(&d).unwrap();
        assert!(close(dens.integral(), 1.0, 1e-12));
        // slope on (-a, -b) is p a; on (-b, c) it is r c
        assert!(close(dens.values()[0], t.p * t.a, 1e-14));
        assert!(close(dens.values()[1], t.r * t.c, 1e-14));
        let cdf = zero_bias_cdf(&d).unwrap();
        let big_r = t.p * t.a * (t.a - t.b);
        assert!(close(cdf.eval(-t.b), big_r, 1e-14));
        let big_s = big_r + t.r * t.c * t.b;
        assert!(close(cdf.eval(0.0), big_s, 1e-14));
    }

    #[test]
    fn zero_bias_requires_centered_input() {
        let d = DiscreteDistribution::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(zero_bias_density(&d), Err(Error::NotCentered(_))));
        assert_eq!(
            zero_bias_cdf(&DiscreteDistribution::point_mass(0.0)),
            Err(Error::ZeroVariance)
        );
    }

    #[test]
    fn kappa1_of_identical_cdfs_is_zero() {
        let d = DiscreteDistribution::new(vec![-1.0, 0.0, 2.0], vec![0.2, 0.5, 0.3]).unwrap();
        let f = StepCdf::new(&d);
        assert_eq!(kappa1(&f, &f.to_piecewise_linear()), 0.0);
    }

    #[test]
    fn kappa1_examples() {
        let r = DiscreteDistribution::rademacher();
        let k = kappa1(&StepCdf::new(&r), &zero_bias_cdf(&r).unwrap());
        assert!(close(k, 0.5, 1e-15));

        let d = DiscreteDistribution::standard_two_point(0.9).unwrap();
        let k = kappa1(&StepCdf::new(&d), &zero_bias_cdf(&d).unwrap());
        assert!(close(k, 0.5 * d.moments().beta3, 1e-13));
        assert!(close(k, 1.366_666_666_667, 1e-9));
    }

    #[test]
    fn kappa1_between_point_masses_is_distance() {
        let x = DiscreteDistribution::point_mass(-0.5);
        let y = DiscreteDistribution::point_mass(1.25);
        assert!(close(kappa1_discrete(&x, &y), 1.75, 1e-15));
    }

    #[test]
    fn threepoint_param_examples() {
        let t = threepoint_params(2.0, 0.5, 1.0).unwrap();
        assert!(close(t.p, 1.0 / 9.0, 1e-15));
        assert!(close(t.q, 4.0 / 9.0, 1e-15));
        assert!(close(t.r, 4.0 / 9.0, 1e-15));
        let m = t.distribution().unwrap().moments();
        assert!(close(m.mean, 0.0, 1e-15) && close(m.variance, 1.0, 1e-14));

        let t = threepoint_params(1.0, 0.0, 1.0).unwrap();
        assert_eq!((t.p, t.q, t.r), (0.5, 0.0, 0.5));

        assert_eq!(
            threepoint_params(2.0, 0.5, 0.4),
            Err(Error::InfeasibleThreePoint { a: 2.0, b: 0.5, c: 0.4 })
        );
        assert!(matches!(threepoint_params(2.0, 0.5, 2.5), Err(Error::InfeasibleThreePoint { .. })));
        assert!(matches!(threepoint_params(0.5, 0.5, 2.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn threepoint_g_example_matches_exact_kappa1() {
        let (g, case) = threepoint_g(2.0, 0.5, 1.0).unwrap();
        assert_eq!(case, ThreePointCase::B);
        assert!(close(g, -2.5 / 9.0, 1e-14));
        let d = threepoint_params(2.0, 0.5, 1.0).unwrap().distribution().unwrap();
        assert!(close(-third_moment_gap(&d).unwrap(), g, 1e-12));
    }

    #[test]
    fn threepoint_case_boundaries_are_continuous() {
        // a(a - b) = 1
        for &a in &[1.0, 1.2, 1.7, 2.5, 4.0] {
            let b: f64 = a - 1.0 / a;
            let c_lo = (-b + (b * b + 4.0).sqrt()) / 2.0;
            for c in [c_lo.max(1.0 / a), 1.0 / a.max(1e-9) + 0.3, if b > 0.0 { 1.0 / b } else { 5.0 }] {
                if let Ok(t) = threepoint_params(a, b, c) {
                    let ga = threepoint_g_expr(&t, ThreePointCase::A);
                    let gb = threepoint_g_expr(&t, ThreePointCase::B);
                    assert!(close(ga, gb, 1e-10), "a={a} c={c}: {ga} vs {gb}");
                }
            }
        }
        // c(b + c) = 1
        for &b in &[0.0_f64, 0.1, 0.4, 0.8] {
            let c: f64 = (-b + (b * b + 4.0).sqrt()) / 2.0;
            for a in [1.0 / c, (1.0 / c).max(b + 0.5), 3.0] {
                if a * (a - b) < 1.0 {
                    continue;
                }
                let t = threepoint_params(a, b, c).unwrap();
                let gb = threepoint_g_expr(&t, ThreePointCase::B);
                let gc = threepoint_g_expr(&t, ThreePointCase::C);
                assert!(close(gb, gc, 1e-10), "b={b} a={a}: {gb} vs {gc}");
            }
        }
    }

    #[test]
    fn single_summand_mixture_is_plain_zero_bias() {
        let d = DiscreteDistribution::new(vec![-1.0, 0.5, 2.0], vec![0.3, 0.5, 0.2])
            .unwrap()
            .standardize()
            .unwrap();
        let mix = mixture_zero_bias_sum(std::slice::from_ref(&d)).unwrap();
        let direct = zero_bias_cdf(&d).unwrap();
        assert!(mix.sup_distance(&direct) < 1e-12);
    }

    #[test]
    fn mixture_rejects_bad_collections() {
        assert!(mixture_zero_bias_sum(&[]).is_err());
        assert_eq!(
            mixture_zero_bias_sum(&[DiscreteDistribution::point_mass(0.0)]),
            Err(Error::ZeroVariance)
        );
        let off = DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(mixture_zero_bias_sum(&[off]), Err(Error::NotCentered(_))));
    }

    #[test]
    fn two_scaled_rademacher_mixture() {
        let h = DiscreteDistribution::rademacher()
            .affine(std::f64::consts::FRAC_1_SQRT_2, 0.0)
            .unwrap();
        let mix = mixture_zero_bias_sum(&[h.clone(), h.clone()]).unwrap();
        let direct = zero_bias_cdf(&h.convolve(&h).standardize().unwrap()).unwrap();
        assert!(mix.sup_distance(&direct) < 1e-10);
    }

    #[test]
    fn zeta3_ratio_examples() {
        assert_eq!(zeta3_ratio_lower(0.5).unwrap(), 0.0);
        let r = zeta3_ratio_lower(0.9).unwrap();
        assert!(close(r, (2.666_666_666_666_667 / 2.733_333_333_333_333) / 6.0, 1e-12));
        assert!(close(r, 0.16260, 1e-5));
        assert!(zeta3_ratio_lower(0.999).unwrap() >= 1.0 / 6.0 - 1e-3);
        assert!(zeta3_ratio_lower(1.0).is_err());
    }

    #[test]
    fn density_cf_matches_zero_bias_cf() {
        let d = DiscreteDistribution::new(vec![-1.5, 0.2, 1.0], vec![0.25, 0.35, 0.4])
            .unwrap()
            .standardize()
            .unwrap();
        let dens = zero_bias_density(&d).unwrap();
        for &t in &[0.0, 0.1, 1.0, 2.5, -4.0, 13.0] {
            let a = d.zero_bias_cf(t).unwrap();
            let b = dens.cf(t);
            assert!((a - b).norm() < 1e-10, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn pl_cdf_validation_and_eval() {
        assert!(PiecewiseLinearCdf::new(vec![0.0], vec![1.0]).is_err());
        assert!(PiecewiseLinearCdf::new(vec![1.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(PiecewiseLinearCdf::new(vec![0.0, 1.0], vec![0.5, 1.0]).is_err());
        let g = PiecewiseLinearCdf::new(vec![0.0, 0.0, 2.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.eval(-1.0), 0.0);
        assert_eq!(g.eval_left(0.0), 0.0);
        assert_eq!(g.eval(0.0), 0.5);
        assert_eq!(g.eval(1.0), 0.75);
        assert_eq!(g.eval(3.0), 1.0);
    }
}
