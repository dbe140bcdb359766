//! Finitely supported probability distributions.
//!
//! A [`DiscreteDistribution`] is a sorted list of atoms with probabilities.
//! Everything here is exact up to floating-point rounding: moments are
//! weighted sums, convolution enumerates all pairwise sums, and the
//! Kolmogorov distance to the standard normal is evaluated at the atoms,
//! where the supremum is attained.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Probabilities whose sum is off by less than this are renormalised.
pub const RENORMALIZE_TOL: f64 = 1e-9;
/// Convolution merges sums closer than this into a single atom.
pub const MERGE_TOL: f64 = 1e-12;
/// Tolerance used when checking that a law is centred / standardized.
pub const STANDARD_TOL: f64 = 1e-10;

const ZERO_BIAS_TAYLOR_CUTOFF: f64 = 1e-8;

/// A probability law on finitely many points.
///
/// Atoms are strictly increasing and probabilities are nonnegative and sum to
/// one. Zero-probability atoms are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct DiscreteDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        DiscreteDistribution::new(raw.atoms, raw.probs)
    }
}

impl From<DiscreteDistribution> for RawDistribution {
    fn from(d: DiscreteDistribution) -> Self {
        RawDistribution {
            atoms: d.atoms,
            probs: d.probs,
        }
    }
}

/// Mean, variance and the third raw moments of a law.
///
/// `beta3` and `mu3` are moments about zero; standardize first if central
/// moments are wanted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    /// E|W|^3
    pub beta3: f64,
    /// E W^3
    pub mu3: f64,
}

impl DiscreteDistribution {
    /// Builds a distribution from strictly increasing atoms and their
    /// probabilities.
    ///
    /// Probabilities summing to within [`RENORMALIZE_TOL`] of one are
    /// rescaled to sum to one exactly; anything further off is rejected.
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if atoms.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        if let Some(x) = atoms.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!("non-finite atom {x}")));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("invalid probability {p}")));
        }
        if let Some(w) = atoms.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(format!(
                "atoms not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() >= RENORMALIZE_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let probs = if total == 1.0 {
            probs
        } else {
            probs.into_iter().map(|p| p / total).collect()
        };
        Ok(Self { atoms, probs })
    }

    /// Builds a distribution from unsorted `(atom, probability)` pairs,
    /// merging atoms closer than [`MERGE_TOL`].
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.iter().any(|(x, _)| x.is_nan()) {
            return Err(Error::InvalidDistribution("NaN atom".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut anchor = f64::NEG_INFINITY;
        for (x, p) in pairs {
            if x - anchor <= MERGE_TOL {
                *probs.last_mut().expect("anchor set") += p;
            } else {
                anchor = x;
                atoms.push(x);
                probs.push(p);
            }
        }
        Self::new(atoms, probs)
    }

    /// Unit mass at `x`.
    pub fn point_mass(x: f64) -> Self {
        Self {
            atoms: vec![x],
            probs: vec![1.0],
        }
    }

    /// Symmetric law on {-1, 1}.
    pub fn rademacher() -> Self {
        Self {
            atoms: vec![-1.0, 1.0],
            probs: vec![0.5, 0.5],
        }
    }

    /// The standardized two-point law taking `-sqrt(q/p)` with probability
    /// `p` and `sqrt(p/q)` with probability `q = 1 - p`.
    pub fn standard_two_point(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "two-point weight must lie in (0, 1), got {p}"
            )));
        }
        let q = 1.0 - p;
        Self::new(vec![-(q / p).sqrt(), (p / q).sqrt()], vec![p, q])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn moments(&self) -> MomentSummary {
        let mean: f64 = self.iter().map(|(x, p)| p * x).sum();
        let variance: f64 = self.iter().map(|(x, p)| p * (x - mean).powi(2)).sum();
        let beta3: f64 = self.iter().map(|(x, p)| p * x.abs().powi(3)).sum();
        let mu3: f64 = self.iter().map(|(x, p)| p * x.powi(3)).sum();
        MomentSummary {
            mean,
            variance,
            beta3,
            mu3,
        }
    }

    /// Affine image `scale * W + shift`. `scale` must be positive.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "affine scale must be positive, got {scale}"
            )));
        }
        let atoms: Vec<f64> = self.atoms.iter().map(|x| scale * x + shift).collect();
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            // Rounding collapsed two atoms; fall back to the merging path.
            return Self::from_pairs(atoms.into_iter().zip(self.probs.iter().copied()).collect());
        }
        Ok(Self {
            atoms,
            probs: self.probs.clone(),
        })
    }

    /// `(W - E W) / sd(W)`.
    pub fn standardize(&self) -> Result<Self> {
        let m = self.moments();
        if m.variance <= 0.0 {
            return Err(Error::ZeroVariance);
        }
        let sd = m.variance.sqrt();
        if self.is_standardized() {
            return Ok(self.clone());
        }
        let atoms: Vec<f64> = self.atoms.iter().map(|x| (x - m.mean) / sd).collect();
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Self::from_pairs(atoms.into_iter().zip(self.probs.iter().copied()).collect());
        }
        Ok(Self {
            atoms,
            probs: self.probs.clone(),
        })
    }

    /// Mean zero and variance one, both within [`STANDARD_TOL`].
    pub fn is_standardized(&self) -> bool {
        let m = self.moments();
        m.mean.abs() <= STANDARD_TOL && (m.variance - 1.0).abs() <= STANDARD_TOL
    }

    pub(crate) fn require_standardized(&self) -> Result<MomentSummary> {
        let m = self.moments();
        if m.mean.abs() > STANDARD_TOL || (m.variance - 1.0).abs() > STANDARD_TOL {
            return Err(Error::NotStandardized {
                mean: m.mean,
                variance: m.variance,
            });
        }
        Ok(m)
    }

    /// Law of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &Self) -> Self {
        let pairs: Vec<(f64, f64)> = self
            .iter()
            .flat_map(|(x, p)| other.iter().map(move |(y, q)| (x + y, p * q)))
            .collect();
        Self::from_pairs(pairs).expect("convolution of valid laws is valid")
    }

    /// `n`-fold convolution power. `n = 0` gives the point mass at zero.
    pub fn convolve_power(&self, n: usize) -> Self {
        let mut acc = Self::point_mass(0.0);
        for _ in 0..n {
            acc = acc.convolve(self);
        }
        acc
    }

    /// P(W <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        self.probs[..k].iter().sum::<f64>().min(1.0)
    }

    /// Characteristic function E exp(itW).
    pub fn cf(&self, t: f64) -> Complex64 {
        self.iter()
            .map(|(x, p)| Complex64::from_polar(p, t * x))
            .sum()
    }

    /// Characteristic function of the zero-biased law, `-f'(t)/t`.
    ///
    /// Requires a standardized law. Near `t = 0` the second-order Taylor
    /// expansion `1 + i t mu3/2 - t^2 mu4/6` is used.
    pub fn zero_bias_cf(&self, t: f64) -> Result<Complex64> {
        let m = self.require_standardized()?;
        if t.abs() < ZERO_BIAS_TAYLOR_CUTOFF {
            let mu4: f64 = self.iter().map(|(x, p)| p * x.powi(4)).sum();
            return Ok(Complex64::new(1.0 - t * t * mu4 / 6.0, 0.5 * t * m.mu3));
        }
        // -f'(t)/t = sum (p x / t) (-i) e^{itx}; the mean term -i E[W]/t is
        // zero for a centred law, so (-i)(e^{itx} - 1) = sin(tx) + 2i sin^2(tx/2)
        // is used instead, which avoids cancellation at small t.
        let s: Complex64 = self
            .iter()
            .map(|(x, p)| {
                let h = (0.5 * t * x).sin();
                Complex64::new((t * x).sin(), 2.0 * h * h) * (p * x / t)
            })
            .sum();
        Ok(s)
    }

    /// Exact sup-distance between the CDF of this law and the standard
    /// normal CDF. The supremum sits at an atom, approached from the left or
    /// attained from the right.
    pub fn kolmogorov_vs_normal(&self) -> f64 {
        let mut below = 0.0;
        let mut worst: f64 = 0.0;
        for (x, p) in self.iter() {
            let phi = normal_cdf(x);
            let after = (below + p).min(1.0);
            worst = worst.max((below - phi).abs()).max((after - phi).abs());
            below = after;
        }
        worst
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// exp(-t^2 / 2), the standard normal characteristic function.
pub fn normal_cf(t: f64) -> f64 {
    (-0.5 * t * t).exp()
}
