//! Helpers shared by the integration tests: seeded random laws and
//! independent numerical oracles.

#![allow(dead_code)]

use beccert::dist::DiscreteDistribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A standardized law on `2..=max_atoms` atoms drawn uniformly from
/// `[-5, 5]` with flat Dirichlet weights.
pub fn random_law(rng: &mut ChaCha8Rng, max_atoms: usize) -> DiscreteDistribution {
    loop {
        let k = rng.gen_range(2..=max_atoms);
        let atoms: Vec<f64> = (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let pairs = atoms.into_iter().zip(raw.into_iter().map(|w| w / total)).collect();
        let Ok(d) = DiscreteDistribution::from_pairs(pairs) else { continue };
        if let Ok(s) = d.standardize() {
            return s;
        }
    }
}

/// A centered (not unit-variance) law on up to `max_atoms` atoms.
pub fn random_centered(rng: &mut ChaCha8Rng, max_atoms: usize) -> DiscreteDistribution {
    let s = random_law(rng, max_atoms);
    s.affine(rng.gen_range(0.3..2.0), 0.0).unwrap()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Exponential integral `E1(x)` for `x > 0`: power series below 1,
/// continued fraction above.
pub fn exp_int_e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        -EULER - x.ln() + sum
    } else {
        // modified Lentz on E1(x) = e^-x / (x + 1/(1 + 1/(x + 2/(1 + ...))))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Lyapunov fraction `sum E|X_j|^3 / (sum Var X_j)^(3/2)`.
pub fn lyapunov(ds: &[DiscreteDistribution]) -> f64 {
    let var: f64 = ds.iter().map(|d| d.moments().variance).sum();
    ds.iter().map(|d| d.moments().beta3).sum::<f64>() / var.powf(1.5)
}

/// Law of `(X_1 + ... + X_n) / sigma`.
pub fn normalized_sum(ds: &[DiscreteDistribution]) -> DiscreteDistribution {
    let var: f64 = ds.iter().map(|d| d.moments().variance).sum();
    let s = ds
        .iter()
        .fold(DiscreteDistribution::point_mass(0.0), |acc, d| acc.convolve(d));
    s.affine(1.0 / var.sqrt(), 0.0).unwrap()
}
