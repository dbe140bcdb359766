//! The smoothing-inequality bound `D*`: reference evaluations, independent
//! re-integration, the kernel, and monotonicity in epsilon.

mod common;

use beccert::bounds::*;
use beccert::certify::{optimize_params, OptimizerSettings};
use beccert::dist::DiscreteDistribution;
use beccert::prawitz::*;
use beccert::quad::{gauss_legendre, QuadOptions};
use beccert::Error;
use common::{exp_int_e1, simpson};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::time::Instant;

fn params(u0: f64, u: f64) -> PrawitzParams {
    PrawitzParams::new(u0, u).unwrap()
}

#[test]
fn general_reference_evaluation() {
    let start = Instant::now();
    let v = prawitz_rhs(BoundMode::General { epsilon: 0.5092 }, &params(2.4852, 5.9508)).unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert!((0.5590..=0.5606).contains(&v.dstar), "{v:?}");
    assert!(v.bound() <= 0.5606);
    assert!((v.dstar - 0.56054).abs() < 5e-5, "{}", v.dstar);
    assert!(v.margin < 1e-8);
}

#[test]
fn iid_reference_evaluation() {
    let start = Instant::now();
    let mode = BoundMode::IidFinite { epsilon: 0.3536, n: 8 };
    let v = prawitz_rhs(mode, &params(2.6157, 8.9115)).unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert!((0.4770..=0.4785).contains(&v.dstar), "{v:?}");
    assert!(v.bound() <= 0.4785);
    assert!((v.dstar - 0.47849).abs() < 5e-5, "{}", v.dstar);
}

#[test]
fn rejects_bad_parameters() {
    assert!(matches!(PrawitzParams::new(3.0, 2.0), Err(Error::InvalidParameter(_))));
    assert!(PrawitzParams::new(0.0, 2.0).is_err());
    let mode = BoundMode::IidFinite { epsilon: 0.3, n: 8 };
    assert!(prawitz_rhs(mode, &params(2.0, 8.0)).is_err());
    assert!(prawitz_rhs(BoundMode::IidTail { epsilon: 0.3, m: 0 }, &params(2.0, 8.0)).is_err());
}

#[test]
fn kernel_values_and_symmetry() {
    let k = kernel_k(0.5).unwrap();
    assert!((k.re - 0.25).abs() < 1e-15);
    assert!((k.im - 0.5 / PI).abs() < 1e-15);
    let one = kernel_k(1.0).unwrap();
    assert!(one.norm() < 1e-15);
    assert!(kernel_k(0.0).is_err());
    assert!(kernel_k(1.5).is_err());
    for i in 1..=1000 {
        let u = i as f64 / 1000.0;
        let k = kernel_k(u).unwrap();
        assert_eq!(kernel_k(-u).unwrap(), k.conj());
        assert!((kernel_abs(u) - k.norm()).abs() < 1e-15);
        // direct formula away from the removable points
        if u < 0.99 {
            let direct = 0.5 * (1.0 - u) / (PI * u).tan() + 0.5 / PI;
            assert!((k.im - direct).abs() < 1e-12, "u={u}");
        }
    }
}

#[test]
fn integral3_integrand_is_even_and_matches_complex_form() {
    for &big_u in &[3.0, 5.95, 8.9] {
        for i in 1..200 {
            let u = big_u * i as f64 / 200.0;
            let a = integral3_integrand(u, big_u);
            assert_eq!(a, integral3_integrand(-u, big_u));
            let k = kernel_k(u / big_u).unwrap() / big_u;
            let direct = (k - num_complex::Complex64::new(0.0, 1.0 / (2.0 * PI * u))).norm() * (-0.5 * u * u).exp();
            assert!((a - direct).abs() < 1e-12 * (1.0 + direct), "u={u}, U={big_u}");
        }
    }
}

#[test]
fn integral4_matches_exponential_integral() {
    for &u0 in &[0.1, 0.5, 1.0, 2.4852, 5.0, 9.0] {
        let e = integral4(u0, DEFAULT_TRUNCATION, QuadOptions::default()).unwrap();
        let oracle = exp_int_e1(0.5 * u0 * u0) / (2.0 * PI);
        assert!((e.value - oracle).abs() < 1e-10, "u0={u0}: {} vs {oracle}", e.value);
        assert!(e.error < 1e-9);
    }
}

/// `D*` for the general mode integrated with rules independent of the
/// adaptive scheme.
fn general_dstar_oracle(eps: f64, u0: f64, u: f64) -> f64 {
    let kernel = |x: f64| kernel_abs(x / u) / u;
    let seam = delta_hat2_seam(eps);
    let d = |x: f64| kernel(x) * delta_hat1(eps, x).min(delta_hat2(eps, x));
    let m = |x: f64| kernel(x) * f_hat1(eps, x);
    let cuts: Vec<f64> = [seam].into_iter().filter(|&c| c < u0).collect();
    let i1 = gauss_legendre(d, 0.0, u0, &cuts, 64, 20);
    let i2 = gauss_legendre(m, u0, u, &b_breakpoints(2.0 * eps), 64, 20);
    let i3 = simpson(|x| integral3_integrand(x, u), 0.0, u0, 20_000);
    let i4 = exp_int_e1(0.5 * u0 * u0) / (2.0 * PI);
    (2.0 * (i1 + i2 + i3) + i4) / eps
}

#[test]
fn general_dstar_agrees_with_independent_rules() {
    for &(eps, u0, u) in &[(0.5092, 2.4852, 5.9508), (0.3, 2.8, 9.0), (1.0, 1.9, 4.0), (0.1, 4.0, 25.0)] {
        let v = prawitz_rhs(BoundMode::General { epsilon: eps }, &params(u0, u)).unwrap();
        let oracle = general_dstar_oracle(eps, u0, u);
        assert!((v.dstar - oracle).abs() < 1e-8, "eps={eps}: {} vs {oracle}", v.dstar);
    }
}

#[test]
fn iid_dstar_agrees_with_independent_rules() {
    let (eps, n, u0, u) = (0.3536, 8u64, 2.6157, 8.9115);
    let v = prawitz_rhs(BoundMode::IidFinite { epsilon: eps, n }, &params(u0, u)).unwrap();
    let ctx = IidContext::new(eps, n, n).unwrap();
    let kernel = |x: f64| kernel_abs(x / u) / u;
    // delta_hat3 vanishes like x^3 at 0 while the kernel has a 1/x pole
    let i1 = simpson(|x| if x == 0.0 { 0.0 } else { kernel(x) * delta_hat3(&ctx, x).unwrap().value }, 0.0, u0, 400);
    let i2 = gauss_legendre(|x| kernel(x) * f_hat2(&ctx, x), u0, u, &b_breakpoints(ctx.gamma()), 64, 20);
    let i3 = simpson(|x| integral3_integrand(x, u), 0.0, u0, 20_000);
    let i4 = exp_int_e1(0.5 * u0 * u0) / (2.0 * PI);
    let oracle = (2.0 * (i1 + i2 + i3) + i4) / eps;
    assert!((v.dstar - oracle).abs() < 1e-8, "{} vs {oracle}", v.dstar);
}

#[test]
fn evaluation_is_deterministic() {
    let mode = BoundMode::IidTail { epsilon: 0.2, m: 40 };
    let a = prawitz_rhs(mode, &params(3.0, 12.0)).unwrap();
    let b = prawitz_rhs(mode, &params(3.0, 12.0)).unwrap();
    assert_eq!(a, b);
}

/// `eps * D*(eps)` must not decrease in `eps` at fixed `(U0, U)`; this is
/// what lets one evaluation cover an interval of smaller epsilon.
#[test]
fn bridging_numerator_monotone_in_eps() {
    let eps: Vec<f64> = (0..30).map(|i| 0.12 + 0.02 * i as f64).collect();
    let modes: Vec<Box<dyn Fn(f64) -> Option<BoundMode>>> = vec![
        Box::new(|e| Some(BoundMode::General { epsilon: e })),
        Box::new(|e| (e * 8f64.sqrt() >= 1.0).then_some(BoundMode::IidFinite { epsilon: e, n: 8 })),
        Box::new(|e| (e * 30f64.sqrt() >= 1.0).then_some(BoundMode::IidFinite { epsilon: e, n: 30 })),
        Box::new(|e| Some(BoundMode::IidTail { epsilon: e, m: 40 })),
    ];
    for mode_at in &modes {
        for &(u0, u) in &[(2.5, 6.0), (3.2, 12.0)] {
            let mut prev: Option<f64> = None;
            for &e in &eps {
                let Some(mode) = mode_at(e) else { continue };
                let v = prawitz_rhs(mode, &params(u0, u)).unwrap();
                let num = v.dstar * e;
                if let Some(p) = prev {
                    assert!(num >= p - 1e-12, "{mode:?}: {num} < {p}");
                }
                prev = Some(num);
            }
        }
    }
}

#[test]
fn optimum_is_seed_independent() {
    let settings = OptimizerSettings::default();
    let cases = [
        (BoundMode::General { epsilon: 0.5092 }, 0.5606),
        (BoundMode::IidFinite { epsilon: 0.3536, n: 8 }, 0.4785),
    ];
    for (mode, target) in cases {
        let vals: Vec<f64> = [(1.8, 2.4), (2.5, 7.0), (3.5, 11.0)]
            .iter()
            .map(|&seed| optimize_params(mode, seed, &settings, DEFAULT_QUAD_TOL).unwrap().bound())
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(0.0, f64::max);
        assert!(hi - lo < 2e-4, "{mode:?}: {vals:?}");
        assert!(hi <= target, "{mode:?}: {vals:?}");
    }
}

#[test]
fn optimized_general_reference_point() {
    let o = optimize_params(
        BoundMode::General { epsilon: 0.5092 },
        (2.4852, 5.9508),
        &OptimizerSettings::default(),
        DEFAULT_QUAD_TOL,
    )
    .unwrap();
    assert!((o.u0 - 2.4852).abs() < 5e-3 && (o.u - 5.9508).abs() < 5e-3, "{o:?}");
    assert!(o.bound() <= 0.5606);
}

/// Exact Kolmogorov distances of small two-point sums stay far below the
/// certified constants.
#[test]
fn exact_distances_respect_constants() {
    for i in 1..=19 {
        let p = i as f64 / 20.0;
        let x = DiscreteDistribution::standard_two_point(p).unwrap();
        let beta = x.moments().beta3;
        for k in 1..=10usize {
            let s = x.convolve_power(k).affine(1.0 / (k as f64).sqrt(), 0.0).unwrap();
            let eps = beta / (k as f64).sqrt();
            let rho = s.kolmogorov_vs_normal();
            assert!(rho <= 0.4785 * eps + 1e-9, "p={p}, k={k}: {rho} > {}", 0.4785 * eps);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dstar_parts_nonnegative(eps in 0.05f64..1.5, u0 in 0.5f64..5.0, du in 0.5f64..20.0) {
        let v = prawitz_rhs(BoundMode::General { epsilon: eps }, &params(u0, u0 + du)).unwrap();
        prop_assert!(v.integrals.iter().all(|&x| x >= 0.0));
        prop_assert!(v.margin >= 0.0 && v.margin < 1e-6);
        prop_assert!((v.integrals.iter().sum::<f64>() / eps - v.dstar).abs() < 1e-12 * v.dstar);
    }

    #[test]
    fn tail_dominates_finite_n(eps in 0.2f64..0.6, extra in 0u64..20) {
        let m = 8u64;
        let n = m + extra;
        prop_assume!(eps * (n as f64).sqrt() >= 1.0);
        let p = params(2.6, 9.0);
        let fin = prawitz_rhs(BoundMode::IidFinite { epsilon: eps, n }, &p).unwrap();
        let tail = prawitz_rhs(BoundMode::IidTail { epsilon: eps, m }, &p).unwrap();
        prop_assert!(fin.dstar <= tail.dstar + 1e-9);
    }
}
