//! Majorants for characteristic functions of normalised sums.
//!
//! Everything here is expressed through `b(t, gamma)`, which bounds
//! `|f(t)|^2 - 1` for a standardized summand with `E|X|^3 + 1 <= gamma`:
//!
//! - `f_hat1..3` bound `|f_{S_n}(t)|` (general, i.i.d. finite `n`, i.i.d.
//!   uniformly over `n >= m`);
//! - `delta_hat1..4` bound `|f_{S_n}(t) - exp(-t^2/2)|` for the same three
//!   situations. The first two have closed forms through Dawson's integral;
//!   the i.i.d. ones are integrals evaluated numerically and come with an
//!   error estimate.
//!
//! The small-epsilon functions at the bottom turn an auxiliary bound on the
//! Kolmogorov distance, valid once `eps_hat + eps' <= 0.2`, into a bound on
//! `rho / eps`.

mod constants;
mod special;

use std::f64::consts::TAU;

pub use constants::{ratio, BoundConstants};
pub use special::{dawson, gauss_moment};

use crate::quad::{integrate, kronrod_panel, Estimate, QuadOptions};
use crate::{Error, Result};

/// `exp(-t^2/2)`, the standard normal characteristic function.
pub fn phi(t: f64) -> f64 {
    (-0.5 * t * t).exp()
}

/// The three-branch majorant `b(t, gamma)`.
pub fn b(t: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok(b_unchecked(t, gamma))
}

#[inline]
pub(crate) fn b_unchecked(t: f64, gamma: f64) -> f64 {
    let c = BoundConstants::get();
    let t = t.abs();
    let x = gamma * t;
    if x < c.m {
        t * t * (2.0 * gamma * c.a * t - 1.0)
    } else if x <= TAU {
        -2.0 * (1.0 - (gamma * t).cos()) / (gamma * gamma)
    } else {
        0.0
    }
}

/// Points where `b(., gamma)` switches branch: `M/gamma` and `2 pi/gamma`.
pub fn b_breakpoints(gamma: f64) -> [f64; 2] {
    [BoundConstants::get().m / gamma, TAU / gamma]
}

/// Parameters of an i.i.d. sum of `n` standardized summands with Lyapunov
/// fraction `epsilon = E|X|^3 / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidContext {
    pub epsilon: f64,
    pub n: u64,
    /// Threshold from which the sweep over `n` is handled uniformly.
    pub m: u64,
    /// `1/sqrt(n)`.
    pub tau: f64,
}

impl IidContext {
    pub fn new(epsilon: f64, n: u64, m: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("n and m must be at least 1".into()));
        }
        let tau = 1.0 / (n as f64).sqrt();
        // E|X|^3 >= 1 forces epsilon >= 1/sqrt(n)
        if !(epsilon > 0.0) || epsilon < tau * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {epsilon} is below 1/sqrt(n) for n = {n}"
            )));
        }
        Ok(Self { epsilon, n, m, tau })
    }

    /// `epsilon + 1/sqrt(n)`, the second argument of `b` for this sum.
    pub fn gamma(&self) -> f64 {
        self.epsilon + self.tau
    }
}

/// `exp(b(t, 2 eps) / 2)`.
pub fn f_hat1(epsilon: f64, t: f64) -> f64 {
    (0.5 * b_unchecked(t, 2.0 * epsilon)).exp()
}

/// `max(0, 1 + b(t, eps + 1/sqrt(n)) / n)^(n/2)`.
pub fn f_hat2(ctx: &IidContext, t: f64) -> f64 {
    let n = ctx.n as f64;
    let base = 1.0 + b_unchecked(t, ctx.gamma()) / n;
    base.max(0.0).powf(0.5 * n)
}

/// `exp(b(t, eps + 1/sqrt(m)) / 2)`; dominates `f_hat2` for every `n >= m`.
pub fn f_hat3(epsilon: f64, m: u64, t: f64) -> f64 {
    let gamma = epsilon + 1.0 / (m as f64).sqrt();
    (0.5 * b_unchecked(t, gamma)).exp()
}

/// `eps phi(t) ∫_0^|t| (s^2/2) exp(s^2/2) ds`, via Dawson's integral.
pub fn delta_hat1(epsilon: f64, t: f64) -> f64 {
    epsilon * gauss_moment(t.abs())
}

/// `A = eps^(-1/3) / (6a)`, where the two branches of `delta_hat2` meet.
pub fn delta_hat2_seam(epsilon: f64) -> f64 {
    BoundConstants::get().peak() / epsilon.cbrt()
}

/// The sharper of the two general-case bounds past small `t`: the supremum
/// of `exp(s^2/2 - 2 a s^3)` over the summands' scales is taken exactly up
/// to `A`, and replaced by `1/l` beyond it.
pub fn delta_hat2(epsilon: f64, t: f64) -> f64 {
    let t = t.abs();
    if t <= delta_hat2_seam(epsilon) {
        delta_hat2_inner(epsilon, t)
    } else {
        delta_hat2_outer(epsilon, t)
    }
}

/// Branch of `delta_hat2` for `|t| <= A`, evaluated at any `t`.
pub fn delta_hat2_inner(epsilon: f64, t: f64) -> f64 {
    let t = t.abs();
    let e13 = epsilon.cbrt();
    let scaled = t * e13;
    // phi(t) exp(scaled^2/2) = exp(t^2 (eps^(2/3) - 1) / 2)
    (0.5 * t * t * (e13 * e13 - 1.0)).exp() * gauss_moment(scaled)
}

/// Branch of `delta_hat2` for `|t| > A`, evaluated at any `t`.
pub fn delta_hat2_outer(epsilon: f64, t: f64) -> f64 {
    delta_hat2_outer_with(epsilon, t, gauss_moment(BoundConstants::get().peak()))
}

/// The `|t| > A` branch with the bracket written as `c^2/2 - Daw(c/√2)/√2`,
/// `c = 1/(6a)`, instead of `c/2 - Daw(c/√2)/√2`. Only used to measure how
/// far that variant is from the integral it is meant to equal.
pub fn delta_hat2_outer_variant(epsilon: f64, t: f64) -> f64 {
    let c = BoundConstants::get().peak();
    let bracket = 0.5 * c * c - std::f64::consts::FRAC_1_SQRT_2 * dawson(c * std::f64::consts::FRAC_1_SQRT_2);
    delta_hat2_outer_with(epsilon, t, bracket)
}

fn delta_hat2_outer_with(epsilon: f64, t: f64, bracket: f64) -> f64 {
    let k = BoundConstants::get();
    let t = t.abs();
    let c = k.peak();
    let seam = delta_hat2_seam(epsilon);
    let head = (0.5 * (c * c - t * t)).exp() * bracket;
    // eps phi(t) ∫_A^t s^2/(2l) exp(2 a eps s^3) ds, antiderivative in closed form
    let cubic = |u: f64| 2.0 * k.a * epsilon * u * u * u;
    let tail = ((cubic(t) - 0.5 * t * t).exp() - (cubic(seam) - 0.5 * t * t).exp()) / (12.0 * k.a * k.l);
    head + tail
}

/// How `|f_{S_n}|` is damped inside the i.i.d. difference integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Damping {
    /// `max(0, 1 + b(s, gamma)/n)^((n-1)/2)`
    Power { n: f64, gamma: f64 },
    /// `exp((m-1)/(2m) b(s, gamma))`
    Exponential { coef: f64, gamma: f64 },
}

impl Damping {
    #[inline]
    fn weight(&self, s: f64) -> f64 {
        match *self {
            Self::Power { n, gamma } => {
                let base = (1.0 + b_unchecked(s, gamma) / n).max(0.0);
                base.powf(0.5 * (n - 1.0))
            }
            Self::Exponential { coef, gamma } => (coef * b_unchecked(s, gamma)).exp(),
        }
    }

    fn gamma(&self) -> f64 {
        match *self {
            Self::Power { gamma, .. } | Self::Exponential { gamma, .. } => gamma,
        }
    }
}

// Panels of the cumulative table are at most this wide.
const PANEL_WIDTH: f64 = 0.5;

/// Tabulation of `t -> eps phi(t) ∫_0^t w(s) (s^2/2) exp(s^2/2) ds` for the
/// i.i.d. majorants `delta_hat3` / `delta_hat4`.
///
/// The running integral is stored at panel edges in the rescaled form
/// `H_k = exp(-e_k^2/2) ∫_0^{e_k} ...`, so nothing overflows however far the
/// table extends. An evaluation adds one Kronrod panel from the nearest edge.
#[derive(Debug, Clone)]
pub struct DeltaTable {
    epsilon: f64,
    damping: Damping,
    edges: Vec<f64>,
    heads: Vec<f64>,
    head_errors: Vec<f64>,
}

impl DeltaTable {
    /// Table for `delta_hat3(ctx, .)` on `[0, upper]`.
    pub fn finite(ctx: &IidContext, upper: f64, opts: QuadOptions) -> Result<Self> {
        let damping = Damping::Power {
            n: ctx.n as f64,
            gamma: ctx.gamma(),
        };
        Self::build(ctx.epsilon, damping, upper, opts)
    }

    /// Table for `delta_hat4(epsilon, m, .)` on `[0, upper]`.
    pub fn tail(epsilon: f64, m: u64, upper: f64, opts: QuadOptions) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        let mf = m as f64;
        let damping = Damping::Exponential {
            coef: (mf - 1.0) / (2.0 * mf),
            gamma: epsilon + 1.0 / mf.sqrt(),
        };
        Self::build(epsilon, damping, upper, opts)
    }

    fn build(epsilon: f64, damping: Damping, upper: f64, opts: QuadOptions) -> Result<Self> {
        if !(epsilon > 0.0) || !(upper >= 0.0) || !upper.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "table needs epsilon > 0 and a finite upper limit, got {epsilon}, {upper}"
            )));
        }
        let mut cuts = vec![0.0];
        for k in b_breakpoints(damping.gamma()) {
            if k > 0.0 && k < upper {
                cuts.push(k);
            }
        }
        cuts.push(upper);
        let mut edges = vec![0.0];
        for w in cuts.windows(2) {
            let pieces = ((w[1] - w[0]) / PANEL_WIDTH).ceil().max(1.0) as usize;
            for j in 1..=pieces {
                let x = if j == pieces { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / pieces as f64 };
                edges.push(x);
            }
        }
        edges.dedup();

        let panel_opts = QuadOptions {
            abs_tol: opts.abs_tol / edges.len() as f64,
            ..opts
        };
        let mut heads = Vec::with_capacity(edges.len());
        let mut head_errors = Vec::with_capacity(edges.len());
        heads.push(0.0);
        head_errors.push(0.0);
        for k in 1..edges.len() {
            let (lo, hi) = (edges[k - 1], edges[k]);
            let decay = (-0.5 * (hi - lo) * (hi + lo)).exp();
            let panel = integrate(|s| scaled_integrand(&damping, s, hi), lo, hi, &[], panel_opts)?;
            heads.push(decay * heads[k - 1] + panel.value);
            head_errors.push(decay * head_errors[k - 1] + panel.error);
        }
        Ok(Self {
            epsilon,
            damping,
            edges,
            heads,
            head_errors,
        })
    }

    pub fn upper(&self) -> f64 {
        *self.edges.last().expect("table has edges")
    }

    /// Majorant value at `t` and the accumulated error estimate.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let t = t.abs();
        if t == 0.0 {
            return (0.0, 0.0);
        }
        let k = self.edges.partition_point(|&e| e <= t).saturating_sub(1).min(self.edges.len() - 1);
        let lo = self.edges[k];
        let decay = (-0.5 * (t - lo) * (t + lo)).exp();
        let mut value = decay * self.heads[k];
        let mut error = decay * self.head_errors[k];
        if t > lo {
            let (v, e) = kronrod_panel(|s| scaled_integrand(&self.damping, s, t), lo, t);
            value += v;
            error += e;
        }
        (self.epsilon * value, self.epsilon * error)
    }
}

/// `w(s) (s^2/2) exp((s^2 - top^2)/2)`.
#[inline]
fn scaled_integrand(damping: &Damping, s: f64, top: f64) -> f64 {
    damping.weight(s) * 0.5 * s * s * (0.5 * (s - top) * (s + top)).exp()
}

fn standalone(table: Result<DeltaTable>, t: f64) -> Result<Estimate> {
    let (value, error) = table?.eval(t);
    Ok(Estimate {
        value,
        error,
        ..Estimate::default()
    })
}

/// `eps phi(t) ∫_0^|t| max(0, 1 + b(s, gamma)/n)^((n-1)/2) (s^2/2) exp(s^2/2) ds`
/// with `gamma = eps + 1/sqrt(n)`.
pub fn delta_hat3(ctx: &IidContext, t: f64) -> Result<Estimate> {
    standalone(DeltaTable::finite(ctx, t.abs(), QuadOptions::with_tol(1e-13)), t)
}

/// `eps phi(t) ∫_0^|t| exp((m-1)/(2m) b(s, gamma) + s^2/2) (s^2/2) ds`
/// with `gamma = eps + 1/sqrt(m)`.
pub fn delta_hat4(epsilon: f64, m: u64, t: f64) -> Result<Estimate> {
    standalone(DeltaTable::tail(epsilon, m, t.abs(), QuadOptions::with_tol(1e-13)), t)
}

/// Coefficients of the auxiliary Kolmogorov bound used for small epsilon:
/// `0.27283 e_hat + 0.19948 e' + 0.09116 e'' + 0.00095 (e_hat + e')^2`,
/// valid when `e_hat + e' <= 0.2`.
const SMALL_EPS_COEFS: [f64; 4] = [0.27283, 0.19948, 0.09116, 0.00095];
const SMALL_EPS_VALIDITY: f64 = 0.2;

fn small_eps_combine(epsilon: f64, e_hat: f64, e1: f64, e2: f64) -> Option<f64> {
    if e_hat + e1 > SMALL_EPS_VALIDITY {
        return None;
    }
    let [c0, c1, c2, c3] = SMALL_EPS_COEFS;
    let bound = c0 * e_hat + c1 * e1 + c2 * e2 + c3 * (e_hat + e1).powi(2);
    Some(bound / epsilon)
}

/// Bound on `rho / eps` for general summands with Lyapunov fraction `eps`,
/// or `None` where the auxiliary bound does not apply.
///
/// Uses the worst-case substitutions `lambda = (1 - eps^(2/3))^(-1)`,
/// `e_hat = e' = lambda^(3/2) eps`, `e'' = e'^(4/3)`.
pub fn small_eps_bound_general(epsilon: f64) -> Option<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return None;
    }
    let lambda = 1.0 / (1.0 - epsilon.powf(2.0 / 3.0));
    let e_hat = lambda.powf(1.5) * epsilon;
    small_eps_combine(epsilon, e_hat, e_hat, e_hat.powf(4.0 / 3.0))
}

/// `ceil(1/eps^2)`, the least `n` compatible with Lyapunov fraction `eps`
/// for i.i.d. standardized summands.
pub fn min_sample_size(epsilon: f64) -> u64 {
    let n = (1.0 / (epsilon * epsilon)).ceil();
    // guard against 1/eps^2 landing one ulp above an integer
    let below = n - 1.0;
    if below >= 1.0 && epsilon * below.sqrt() >= 1.0 {
        below as u64
    } else {
        n as u64
    }
}

/// The i.i.d. small-epsilon bound on `rho / eps` evaluated with the worst
/// case over `n >= n0` for a given `n0 >= 2`.
pub fn small_eps_bound_iid_cell(epsilon: f64, n0: u64) -> Option<f64> {
    if n0 < 2 || !(epsilon > 0.0) {
        return None;
    }
    let n0f = n0 as f64;
    let lambda = n0f / (n0f - 1.0);
    let l32 = lambda.powf(1.5);
    small_eps_combine(epsilon, l32 * epsilon, l32 / n0f.sqrt(), lambda * lambda / n0f)
}

/// Bound on `rho / eps` for i.i.d. summands, or `None` where inapplicable.
pub fn small_eps_bound_iid(epsilon: f64) -> Option<f64> {
    if !(epsilon > 0.0) {
        return None;
    }
    small_eps_bound_iid_cell(epsilon, min_sample_size(epsilon))
}

/// Largest deviation between the two branches of `b` at `gamma |t| = M`
/// and of the middle branch from 0 at `gamma |t| = 2 pi`, over a set of
/// `gamma` values.
pub fn b_seam_residuals(gammas: &[f64]) -> (f64, f64) {
    let c = BoundConstants::get();
    let mut at_m: f64 = 0.0;
    let mut at_2pi: f64 = 0.0;
    for &g in gammas {
        let t = c.m / g;
        let first = t * t * (2.0 * g * c.a * t - 1.0);
        let second = -2.0 * (1.0 - (g * t).cos()) / (g * g);
        at_m = at_m.max((first - second).abs());
        at_2pi = at_2pi.max(b_unchecked(TAU / g, g).abs());
    }
    (at_m, at_2pi)
}

/// `|delta_hat2_inner(A) - delta_hat2_outer(A)|`.
pub fn delta_hat2_seam_residual(epsilon: f64) -> f64 {
    let a = delta_hat2_seam(epsilon);
    (delta_hat2_inner(epsilon, a) - delta_hat2_outer(epsilon, a)).abs()
}
