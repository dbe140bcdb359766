//! Right-hand side of the Prawitz smoothing inequality.
//!
//! For `0 < U0 <= U`,
//!
//! ```text
//! rho(S_n, N) <= 2 ∫_0^U0  |K(u/U)|/U  delta(u) du
//!             +  2 ∫_U0^U  |K(u/U)|/U  |f(u)| du
//!             +  2 ∫_0^U0  |K(u/U)/U - i/(2 pi u)| phi(u) du
//!             +  2 ∫_U0^∞  phi(u) / (2 pi u) du
//! ```
//!
//! with `K(v) = (1-|v|)/2 + i/2 ((1-|v|) cot(pi v) + sgn(v)/pi)`. Replacing
//! `delta` and `|f|` by the majorants of [`crate::bounds`] and dividing by
//! `eps` gives the computable quantity `D*(eps, U0, U)`.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    b_breakpoints, delta_hat1, delta_hat2, delta_hat2_seam, f_hat1, f_hat2, f_hat3, DeltaTable, IidContext,
};
use crate::quad::{integrate, integrate_with_aux, QuadOptions};
use crate::{Error, Result};

/// Default absolute tolerance per integral.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
/// Default upper limit replacing infinity in the fourth integral.
pub const DEFAULT_TRUNCATION: f64 = 40.0;

/// Smoothing parameters and quadrature settings for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrawitzParams {
    pub u0: f64,
    pub u: f64,
    pub quad_tol: f64,
    pub truncation: f64,
}

impl PrawitzParams {
    pub fn new(u0: f64, u: f64) -> Result<Self> {
        let p = Self {
            u0,
            u,
            quad_tol: DEFAULT_QUAD_TOL,
            truncation: DEFAULT_TRUNCATION,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tol(self, quad_tol: f64) -> Self {
        Self { quad_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u0 > 0.0 && self.u0 <= self.u && self.u.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < U0 <= U, got U0 = {}, U = {}",
                self.u0, self.u
            )));
        }
        if !(self.quad_tol > 0.0) || !(self.truncation > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerance and truncation must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which majorants enter the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BoundMode {
    /// Arbitrary independent summands: `min(delta_hat1, delta_hat2)` and `f_hat1`.
    General { epsilon: f64 },
    /// `n` i.i.d. summands: `delta_hat3` and `f_hat2`.
    IidFinite { epsilon: f64, n: u64 },
    /// i.i.d. summands, uniformly over `n >= m`: `delta_hat4` and `f_hat3`.
    IidTail { epsilon: f64, m: u64 },
}

impl BoundMode {
    pub fn epsilon(&self) -> f64 {
        match *self {
            Self::General { epsilon } | Self::IidFinite { epsilon, .. } | Self::IidTail { epsilon, .. } => epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon() > 0.0) || !self.epsilon().is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon()
            )));
        }
        match *self {
            Self::General { .. } => Ok(()),
            Self::IidFinite { epsilon, n } => IidContext::new(epsilon, n, n).map(|_| ()),
            Self::IidTail { m, .. } if m == 0 => Err(Error::InvalidParameter("m must be at least 1".into())),
            Self::IidTail { .. } => Ok(()),
        }
    }

    /// The `gamma` at which the modulus majorant's `b` is evaluated.
    fn modulus_gamma(&self) -> f64 {
        match *self {
            Self::General { epsilon } => 2.0 * epsilon,
            Self::IidFinite { epsilon, n } => epsilon + 1.0 / (n as f64).sqrt(),
            Self::IidTail { epsilon, m } => epsilon + 1.0 / (m as f64).sqrt(),
        }
    }
}

/// The kernel `K(u)` for `0 < |u| <= 1`.
pub fn kernel_k(u: f64) -> Result<Complex64> {
    if !(u != 0.0 && u.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("kernel needs 0 < |u| <= 1, got {u}")));
    }
    let v = u.abs();
    let k = Complex64::new(0.5 * (1.0 - v), 0.5 * (damped_cot(v) + FRAC_1_PI));
    Ok(if u < 0.0 { k.conj() } else { k })
}

/// `(1 - v) cot(pi v)` for `0 < v <= 1`; near `v = 1` the pole is cancelled
/// analytically (`w = 1 - v` is exact there), giving `-1/pi` at `v = 1`.
#[inline]
fn damped_cot(v: f64) -> f64 {
    if v <= 0.5 {
        (1.0 - v) / (PI * v).tan()
    } else {
        let w = 1.0 - v;
        if w == 0.0 {
            -FRAC_1_PI
        } else {
            -w / (PI * w).tan()
        }
    }
}

/// `|K(v)|` for `0 < v <= 1`.
#[inline]
pub fn kernel_abs(v: f64) -> f64 {
    let re = 0.5 * (1.0 - v);
    let im = 0.5 * (damped_cot(v) + FRAC_1_PI);
    re.hypot(im)
}

/// `cot x - 1/x`, with a series for small `x` where the two terms cancel.
#[inline]
fn cot_minus_recip(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // -Σ 2^(2k) |B_2k| x^(2k-1) / (2k)!
        -x * (1.0 / 3.0
            + x2 * (1.0 / 45.0
                + x2 * (2.0 / 945.0 + x2 * (1.0 / 4725.0 + x2 * (2.0 / 93555.0 + x2 * (1382.0 / 638_512_875.0))))))
    } else {
        1.0 / x.tan() - 1.0 / x
    }
}

/// `|K(u/U)/U - i/(2 pi u)| phi(u)` with the removable singularity at
/// `u = 0` filled by its limit `1/(2U)`.
///
/// Writing `v = u/U`, the difference equals
/// `(1 - v)/(2U) (1 + i (cot(pi v) - 1/(pi v)))`, so no cancellation occurs.
pub fn integral3_integrand(u: f64, big_u: f64) -> f64 {
    let phi = (-0.5 * u * u).exp();
    let v = (u / big_u).abs();
    if v == 0.0 {
        return phi / (2.0 * big_u);
    }
    if v > 0.5 {
        let k = Complex64::new(0.5 * (1.0 - v), 0.5 * (damped_cot(v) + FRAC_1_PI)) / big_u;
        let d = k - Complex64::new(0.0, 1.0 / (2.0 * PI * u.abs()));
        return d.norm() * phi;
    }
    let c = cot_minus_recip(PI * v);
    phi * (1.0 - v) / (2.0 * big_u) * (1.0 + c * c).sqrt()
}

/// Tail bound for `2 ∫_T^∞ phi(u)/(2 pi u) du`, namely `phi(T)/(pi T^2)`.
fn integral4_tail(truncation: f64) -> f64 {
    (-0.5 * truncation * truncation).exp() / (PI * truncation * truncation)
}

/// `2 ∫_U0^∞ phi(u)/(2 pi u) du`, integrated up to `truncation`; the
/// returned error includes the analytic bound on the discarded tail.
pub fn integral4(u0: f64, truncation: f64, opts: QuadOptions) -> Result<crate::quad::Estimate> {
    if !(u0 > 0.0) {
        return Err(Error::InvalidParameter(format!("U0 must be positive, got {u0}")));
    }
    if u0 >= truncation {
        return Ok(crate::quad::Estimate {
            error: integral4_tail(u0),
            ..Default::default()
        });
    }
    let mut e = integrate(|u| (-0.5 * u * u).exp() / (PI * u), u0, truncation, &[], opts)?;
    e.error += integral4_tail(truncation);
    Ok(e)
}

/// One evaluation of `D*` with its breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrawitzValue {
    /// `(I1 + I2 + I3 + I4) / eps`.
    pub dstar: f64,
    /// Accumulated quadrature error, divided by `eps`.
    pub margin: f64,
    /// The four integrals, each over the full symmetric range.
    pub integrals: [f64; 4],
}

impl PrawitzValue {
    /// `dstar + margin`, the value that is safe to certify with.
    pub fn bound(&self) -> f64 {
        self.dstar + self.margin
    }
}

enum Difference {
    General { epsilon: f64 },
    Table(DeltaTable),
}

/// Evaluates `D*` for one mode at many `(U0, U)`, reusing the tabulated
/// difference majorant of the i.i.d. modes between calls.
pub struct PrawitzEvaluator {
    mode: BoundMode,
    difference: Difference,
    u0_max: f64,
    quad_tol: f64,
    truncation: f64,
}

impl PrawitzEvaluator {
    /// Prepares evaluations with `U0 <= u0_max`.
    pub fn new(mode: BoundMode, u0_max: f64, quad_tol: f64, truncation: f64) -> Result<Self> {
        mode.validate()?;
        if !(u0_max > 0.0 && u0_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("U0 range must be positive, got {u0_max}")));
        }
        let table_opts = QuadOptions::with_tol(0.1 * quad_tol);
        let difference = match mode {
            BoundMode::General { epsilon } => Difference::General { epsilon },
            BoundMode::IidFinite { epsilon, n } => {
                let ctx = IidContext::new(epsilon, n, n)?;
                Difference::Table(DeltaTable::finite(&ctx, u0_max, table_opts)?)
            }
            BoundMode::IidTail { epsilon, m } => Difference::Table(DeltaTable::tail(epsilon, m, u0_max, table_opts)?),
        };
        Ok(Self {
            mode,
            difference,
            u0_max,
            quad_tol,
            truncation,
        })
    }

    pub fn mode(&self) -> BoundMode {
        self.mode
    }

    pub fn u0_max(&self) -> f64 {
        self.u0_max
    }

    /// Difference majorant at `t` with its own error estimate.
    #[inline]
    fn delta(&self, t: f64) -> (f64, f64) {
        match &self.difference {
            Difference::General { epsilon } => (delta_hat1(*epsilon, t).min(delta_hat2(*epsilon, t)), 0.0),
            Difference::Table(table) => table.eval(t),
        }
    }

    #[inline]
    fn modulus(&self, t: f64) -> f64 {
        match self.mode {
            BoundMode::General { epsilon } => f_hat1(epsilon, t),
            BoundMode::IidFinite { epsilon, n } => {
                let ctx = IidContext {
                    epsilon,
                    n,
                    m: n,
                    tau: 1.0 / (n as f64).sqrt(),
                };
                f_hat2(&ctx, t)
            }
            BoundMode::IidTail { epsilon, m } => f_hat3(epsilon, m, t),
        }
    }

    pub fn eval(&self, u0: f64, big_u: f64) -> Result<PrawitzValue> {
        if !(u0 > 0.0 && u0 <= big_u && big_u.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < U0 <= U, got U0 = {u0}, U = {big_u}"
            )));
        }
        if u0 > self.u0_max * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "U0 = {u0} exceeds the prepared range {}",
                self.u0_max
            )));
        }
        let opts = QuadOptions::with_tol(0.5 * self.quad_tol);
        let epsilon = self.mode.epsilon();
        let kernel = |u: f64| kernel_abs(u / big_u) / big_u;

        let mut cuts1 = Vec::new();
        if let BoundMode::General { epsilon } = self.mode {
            cuts1.push(delta_hat2_seam(epsilon));
        } else {
            cuts1.extend(b_breakpoints(self.mode.modulus_gamma()));
        }
        let i1 = integrate_with_aux(
            |u| {
                let k = kernel(u);
                let (d, e) = self.delta(u);
                (k * d, k * e)
            },
            0.0,
            u0,
            &cuts1,
            opts,
        )?;

        let cuts2 = b_breakpoints(self.mode.modulus_gamma());
        let i2 = integrate(|u| kernel(u) * self.modulus(u), u0, big_u, &cuts2, opts)?;
        let i3 = integrate(|u| integral3_integrand(u, big_u), 0.0, u0, &[], opts)?;
        let i4 = integral4(u0, self.truncation, opts)?;

        let integrals = [2.0 * i1.value, 2.0 * i2.value, 2.0 * i3.value, i4.value];
        let error = 2.0 * (i1.error + i1.aux + i2.error + i3.error) + i4.error;
        Ok(PrawitzValue {
            dstar: integrals.iter().sum::<f64>() / epsilon,
            margin: error / epsilon,
            integrals,
        })
    }
}

/// `D*(eps, U0, U)` for the given mode.
pub fn prawitz_rhs(mode: BoundMode, params: &PrawitzParams) -> Result<PrawitzValue> {
    params.validate()?;
    PrawitzEvaluator::new(mode, params.u0, params.quad_tol, params.truncation)?.eval(params.u0, params.u)
}
