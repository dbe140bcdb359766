//! Certified scans of `D(eps) = sup rho / eps` over an epsilon segment.
//!
//! `eps D*(eps, U0, U)` is nondecreasing in `eps` at fixed `(U0, U)`, so a
//! single evaluation at `eps_k` certifies every `eps` in
//! `[eps_k D*_k / target, eps_k]`. The scan walks from the right end of the
//! segment to the left, starting each step at the previous left edge, and
//! re-evaluates `D*` at every left edge with the same parameters as a check.
//!
//! Outside the segment two other arguments take over: for large `eps` the
//! trivial bound `rho <= 1`, and for small `eps` an auxiliary explicit bound
//! (see [`crate::bounds::small_eps_bound_general`]).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{min_sample_size, small_eps_bound_general, small_eps_bound_iid, small_eps_bound_iid_cell};
use crate::optim::golden_section;
use crate::prawitz::{BoundMode, PrawitzEvaluator, PrawitzValue, DEFAULT_QUAD_TOL, DEFAULT_TRUNCATION};
use crate::{Error, Result};

/// Version tag written into every certificate.
pub const SCHEMA_VERSION: &str = "v1";

/// Settings of the coordinate-wise golden-section optimiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Passes stop once a full pass improves the objective by less than this
    /// relative amount.
    pub rel_tol: f64,
    pub max_passes: usize,
    /// Each line search covers `[x / width, x * width]` around the current
    /// point, clipped to the feasible range.
    pub bracket_width: f64,
    /// Relative bracket length at which a line search stops.
    pub x_rel_tol: f64,
    pub u0_min: f64,
    pub u0_max: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_passes: 60,
            bracket_width: 1.5,
            x_rel_tol: 1e-7,
            u0_min: 0.05,
            u0_max: 20.0,
        }
    }
}

/// Result of [`optimize_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimized {
    pub u0: f64,
    pub u: f64,
    pub value: PrawitzValue,
    pub evaluations: usize,
}

impl Optimized {
    pub fn bound(&self) -> f64 {
        self.value.bound()
    }
}

/// Upper end of the range searched for `U`: past `2 pi / gamma` the modulus
/// majorant is identically one, so the optimum sits near or below it.
fn u_ceiling(mode: &BoundMode) -> f64 {
    let gamma = match *mode {
        BoundMode::General { epsilon } => 2.0 * epsilon,
        BoundMode::IidFinite { epsilon, n } => epsilon + 1.0 / (n as f64).sqrt(),
        BoundMode::IidTail { epsilon, m } => epsilon + 1.0 / (m as f64).sqrt(),
    };
    (1.5 * std::f64::consts::TAU / gamma).max(12.0)
}

/// Locally minimises `D* + margin` over `(U0, U)` from `seed`.
///
/// Alternates golden-section searches in `U0` (on `[U0_min, U]`) and `U`
/// (on `[U0, ceiling]`). The result is never worse than the seed.
pub fn optimize_params(
    mode: BoundMode,
    seed: (f64, f64),
    settings: &OptimizerSettings,
    quad_tol: f64,
) -> Result<Optimized> {
    let evaluator = PrawitzEvaluator::new(mode, settings.u0_max, quad_tol, DEFAULT_TRUNCATION)?;
    optimize_with(&evaluator, seed, settings)
}

fn optimize_with(evaluator: &PrawitzEvaluator, seed: (f64, f64), settings: &OptimizerSettings) -> Result<Optimized> {
    let u_max = u_ceiling(&evaluator.mode());
    let u0_max = settings.u0_max.min(evaluator.u0_max());
    let (mut u0, mut u) = seed;
    if !(u0 > 0.0 && u0 <= u) {
        return Err(Error::InvalidParameter(format!("seed needs 0 < U0 <= U, got ({u0}, {u})")));
    }
    u0 = u0.clamp(settings.u0_min, u0_max);
    u = u.max(u0);
    let mut best = evaluator.eval(u0, u)?;
    let mut evaluations = 1;
    let objective = |a: f64, b: f64| evaluator.eval(a, b).map(|v| v.bound()).unwrap_or(f64::INFINITY);
    let w = settings.bracket_width;

    for _ in 0..settings.max_passes {
        let before = best.bound();

        let lo = (u0 / w).max(settings.u0_min);
        let hi = (u0 * w).min(u).min(u0_max);
        if hi > lo {
            let r = golden_section(|x| objective(x, u), lo, hi, settings.x_rel_tol * u0, 200);
            evaluations += r.evaluations;
            if r.value < best.bound() {
                u0 = r.x;
                best = evaluator.eval(u0, u)?;
                evaluations += 1;
            }
        }

        let lo = (u / w).max(u0);
        let hi = (u * w).min(u_max).max(lo);
        if hi > lo {
            let r = golden_section(|x| objective(u0, x), lo, hi, settings.x_rel_tol * u, 200);
            evaluations += r.evaluations;
            if r.value < best.bound() {
                u = r.x;
                best = evaluator.eval(u0, u)?;
                evaluations += 1;
            }
        }

        if before - best.bound() <= settings.rel_tol * before {
            break;
        }
    }
    Ok(Optimized {
        u0,
        u,
        value: best,
        evaluations,
    })
}

/// Which family of summands a scan certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    General,
    Iid,
}

/// Everything that determines a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub mode: ScanMode,
    pub target: f64,
    pub eps_lo: f64,
    pub eps_hi: f64,
    /// i.i.d. only: sample sizes `n >= m` are handled uniformly.
    pub m: Option<u64>,
    pub quad_tol: f64,
    pub truncation: f64,
    pub optimizer: OptimizerSettings,
    /// Epsilon values the walk is forced to land on exactly.
    pub checkpoints: Vec<f64>,
    /// Seed `(U0, U)` for the first grid point.
    pub seed: (f64, f64),
    /// The walk gives up when a step would be shorter than this relative
    /// amount.
    pub min_rel_step: f64,
}

/// Smallest `x` with `x * target >= 1` and `1/x <= target` in floating point.
pub fn trivial_threshold(target: f64) -> f64 {
    let mut x = 1.0 / target;
    while x * target < 1.0 || 1.0 / x > target {
        x = x.next_up();
    }
    x
}

impl ScanConfig {
    /// Default general-case scan: target 0.5606 on `[0.02, 1/0.5606]`.
    pub fn general() -> Self {
        let target = 0.5606;
        Self {
            mode: ScanMode::General,
            target,
            eps_lo: 0.02,
            eps_hi: trivial_threshold(target),
            m: None,
            quad_tol: DEFAULT_QUAD_TOL,
            truncation: DEFAULT_TRUNCATION,
            optimizer: OptimizerSettings::default(),
            checkpoints: vec![0.5092],
            seed: (1.8, 2.4),
            min_rel_step: 1e-9,
        }
    }

    /// Default i.i.d. scan: target 0.4785 on `[0.037, 1/0.4785]`, `m = 40`.
    pub fn iid() -> Self {
        let target = 0.4785;
        Self {
            mode: ScanMode::Iid,
            target,
            eps_lo: 0.037,
            eps_hi: trivial_threshold(target),
            m: Some(40),
            quad_tol: DEFAULT_QUAD_TOL,
            truncation: DEFAULT_TRUNCATION,
            optimizer: OptimizerSettings::default(),
            checkpoints: vec![0.3536],
            seed: (1.8, 2.4),
            min_rel_step: 1e-9,
        }
    }

    /// Replaces the target and moves the right end to the matching trivial
    /// threshold.
    pub fn with_target(mut self, target: f64) -> Self {
        self.target = target;
        self.eps_hi = trivial_threshold(target);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target > 0.0) {
            return Err(Error::InvalidParameter(format!("target must be positive, got {}", self.target)));
        }
        if !(self.eps_lo > 0.0 && self.eps_lo < self.eps_hi && self.eps_hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < eps_lo < eps_hi, got [{}, {}]",
                self.eps_lo, self.eps_hi
            )));
        }
        if self.mode == ScanMode::Iid && self.m.is_none_or(|m| m < 2) {
            return Err(Error::InvalidParameter("i.i.d. scans need m >= 2".into()));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerance must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, prefixed with the crate version.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update(b"\0");
        h.update(json.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub epsilon: f64,
    pub u0: f64,
    pub u: f64,
    pub dstar: f64,
    pub margin: f64,
    /// Left end of the epsilon interval this entry certifies.
    pub bridged_to: f64,
    /// `D* + margin` recomputed at `bridged_to` with the same parameters.
    pub left_check: f64,
    /// i.i.d. only: `D* + margin` for every finite sample size considered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_detail: Option<BTreeMap<u64, f64>>,
    /// i.i.d. only: the sample size attaining the maximum, `None` if the
    /// uniform tail does.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_n: Option<u64>,
    /// i.i.d. only: threshold of the uniform tail and its `D* + margin`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<(u64, f64)>,
}

impl ScanEntry {
    pub fn bound(&self) -> f64 {
        self.dstar + self.margin
    }

    /// `(epsilon / bridged_to) * (dstar + margin)`, the certified value on
    /// `[bridged_to, epsilon]`.
    pub fn bridged_bound(&self) -> f64 {
        self.epsilon / self.bridged_to * self.bound()
    }
}

/// The small-epsilon regime check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallEpsWitness {
    pub eps_lo: f64,
    /// `None` when the auxiliary bound does not apply there.
    pub value_at_eps_lo: Option<f64>,
    /// Largest value over the sampled grid on `(0, eps_lo]`.
    /// `None` when the auxiliary bound does not apply at some grid point.
    pub grid_max: Option<f64>,
    pub grid_points: usize,
    /// Whether the sampled values are nondecreasing in epsilon.
    pub monotone_on_grid: bool,
    /// i.i.d. only: largest value over the endpoints of every cell with
    /// constant `ceil(1/eps^2)` inside `(0, eps_lo]`, checked up to `cells`
    /// cells, and the explicit envelope beyond them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<f64>,
    pub assumption: String,
    pub passed: bool,
}

/// Machine-readable record of a certified scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub mode: ScanMode,
    pub target: f64,
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub entries: Vec<ScanEntry>,
    pub small_eps_witness: Option<SmallEpsWitness>,
    pub large_eps_note: String,
    /// Largest certified value over all regimes checked so far.
    pub global_bound: f64,
    pub config: ScanConfig,
    pub fingerprint: String,
}

impl Certificate {
    /// Largest certified value over the scanned segment.
    pub fn segment_bound(&self) -> f64 {
        self.entries.iter().map(ScanEntry::bridged_bound).fold(0.0, f64::max)
    }

    /// Checks that the entries tile `[eps_lo, eps_hi]` with matching edges
    /// and that every entry's bridged value is within the target.
    pub fn verify_coverage(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Regime(m));
        let Some(first) = self.entries.first() else {
            return fail("certificate has no entries".into());
        };
        if first.epsilon != self.eps_hi {
            return fail(format!("first entry at {} instead of {}", first.epsilon, self.eps_hi));
        }
        for w in self.entries.windows(2) {
            if w[0].bridged_to != w[1].epsilon {
                return fail(format!("gap between {} and {}", w[1].epsilon, w[0].bridged_to));
            }
        }
        let last = self.entries.last().expect("nonempty");
        if last.bridged_to != self.eps_lo {
            return fail(format!("coverage stops at {} above {}", last.bridged_to, self.eps_lo));
        }
        for e in &self.entries {
            if !(e.bridged_to <= e.epsilon) || e.bridged_bound() > self.target || e.left_check > self.target {
                return fail(format!("entry at eps = {} exceeds the target", e.epsilon));
            }
        }
        Ok(())
    }

    /// CSV table `epsilon,u0,u,dstar,margin,certified_from`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,u0,u,dstar,margin,certified_from\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.epsilon, e.u0, e.u, e.dstar, e.margin, e.bridged_to
            ));
        }
        out
    }
}

/// What one grid point produced before bridging.
struct PointResult {
    epsilon: f64,
    best: Optimized,
    n_detail: Option<BTreeMap<u64, f64>>,
    worst_n: Option<u64>,
    tail: Option<(u64, f64)>,
    /// Optimised `(U0, U)` per component, for warm starts and the left check.
    params: Vec<(BoundMode, f64, f64)>,
}

/// Progress callback, invoked once per accepted grid point.
pub type Progress<'a> = &'a (dyn Fn(&ScanEntry) + Sync);

/// Components evaluated at `epsilon` in i.i.d. mode: finite `n` in
/// `[ceil(1/eps^2), m)` and the uniform tail from `max(m, ceil(1/eps^2))`.
fn iid_components(epsilon: f64, m: u64) -> Vec<BoundMode> {
    let n0 = min_sample_size(epsilon);
    let mut out: Vec<BoundMode> = (n0..m).map(|n| BoundMode::IidFinite { epsilon, n }).collect();
    out.push(BoundMode::IidTail { epsilon, m: m.max(n0) });
    out
}

fn component_key(mode: &BoundMode) -> Option<u64> {
    match *mode {
        BoundMode::IidFinite { n, .. } => Some(n),
        _ => None,
    }
}

fn with_epsilon(mode: BoundMode, epsilon: f64) -> BoundMode {
    match mode {
        BoundMode::General { .. } => BoundMode::General { epsilon },
        BoundMode::IidFinite { n, .. } => BoundMode::IidFinite { epsilon, n },
        BoundMode::IidTail { m, .. } => BoundMode::IidTail { epsilon, m },
    }
}

struct Scanner<'a> {
    config: &'a ScanConfig,
    /// Last optimised parameters per component (`None` key = general/tail).
    warm: BTreeMap<Option<u64>, (f64, f64)>,
}

impl Scanner<'_> {
    fn seed_for(&self, key: Option<u64>) -> (f64, f64) {
        self.warm
            .get(&key)
            .or_else(|| self.warm.values().next())
            .copied()
            .unwrap_or(self.config.seed)
    }

    fn evaluate(&mut self, epsilon: f64) -> Result<PointResult> {
        let cfg = self.config;
        let modes = match cfg.mode {
            ScanMode::General => vec![BoundMode::General { epsilon }],
            ScanMode::Iid => iid_components(epsilon, cfg.m.expect("validated")),
        };
        let jobs: Vec<(BoundMode, (f64, f64))> = modes
            .iter()
            .map(|m| (*m, self.seed_for(component_key(m))))
            .collect();
        let results: Vec<Result<Optimized>> = jobs
            .par_iter()
            .map(|(mode, seed)| optimize_params(*mode, *seed, &cfg.optimizer, cfg.quad_tol))
            .collect();
        let mut params = Vec::with_capacity(modes.len());
        let mut best: Option<(BoundMode, Optimized)> = None;
        let mut n_detail = BTreeMap::new();
        let mut tail = None;
        for (mode, r) in modes.iter().zip(results) {
            let r = r?;
            self.warm.insert(component_key(mode), (r.u0, r.u));
            params.push((*mode, r.u0, r.u));
            match *mode {
                BoundMode::IidFinite { n, .. } => {
                    n_detail.insert(n, r.bound());
                }
                BoundMode::IidTail { m, .. } => tail = Some((m, r.bound())),
                BoundMode::General { .. } => {}
            }
            if best.as_ref().is_none_or(|(_, b)| r.bound() > b.bound()) {
                best = Some((*mode, r));
            }
        }
        let (worst_mode, best) = best.expect("at least one component");
        let iid = cfg.mode == ScanMode::Iid;
        Ok(PointResult {
            epsilon,
            best,
            n_detail: iid.then_some(n_detail),
            worst_n: component_key(&worst_mode),
            tail,
            params,
        })
    }

    /// `D* + margin` at `epsilon` with each component's parameters from the
    /// grid point, skipping sample sizes that are impossible at `epsilon`.
    fn left_check(&self, point: &PointResult, epsilon: f64) -> Result<f64> {
        let cfg = self.config;
        let checks: Vec<Result<f64>> = point
            .params
            .par_iter()
            .filter(|(mode, _, _)| match *mode {
                BoundMode::IidFinite { n, .. } => epsilon * (n as f64).sqrt() >= 1.0,
                _ => true,
            })
            .map(|(mode, u0, u)| {
                let ev = PrawitzEvaluator::new(with_epsilon(*mode, epsilon), *u0, cfg.quad_tol, cfg.truncation)?;
                Ok(ev.eval(*u0, *u)?.bound())
            })
            .collect();
        checks.into_iter().try_fold(0.0, |acc, c| Ok(f64::max(acc, c?)))
    }
}

/// Walks `[eps_lo, eps_hi]` from right to left and returns the certificate
/// (without the small-epsilon witness; see [`stitch_regimes`]).
pub fn certified_scan(config: &ScanConfig, progress: Option<Progress<'_>>) -> Result<Certificate> {
    config.validate()?;
    let target = config.target;
    let mut scanner = Scanner {
        config,
        warm: BTreeMap::new(),
    };
    let mut checkpoints: Vec<f64> = config
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c > config.eps_lo && c < config.eps_hi)
        .collect();
    checkpoints.sort_by(|a, b| b.total_cmp(a));

    let mut entries: Vec<ScanEntry> = Vec::new();
    let mut epsilon = config.eps_hi;
    loop {
        let point = scanner.evaluate(epsilon)?;
        let bound = point.best.bound();
        let mut left = epsilon * bound / target;
        if !(left < epsilon * (1.0 - config.min_rel_step)) {
            return Err(Error::CertificationFailed {
                epsilon,
                bound,
                target,
            });
        }
        // floating-point nudge so the stored invariant holds exactly
        while epsilon / left * bound > target {
            left = left.next_up();
        }
        let mut done = false;
        if left <= config.eps_lo {
            left = config.eps_lo;
            done = true;
        }
        while checkpoints.first().is_some_and(|&c| c >= epsilon) {
            checkpoints.remove(0);
        }
        if let Some(&c) = checkpoints.first() {
            if c >= left {
                left = c;
                checkpoints.remove(0);
                done = false;
            }
        }
        let left_check = scanner.left_check(&point, left)?;
        if left_check > target {
            return Err(Error::CertificationFailed {
                epsilon: left,
                bound: left_check,
                target,
            });
        }
        let entry = ScanEntry {
            epsilon: point.epsilon,
            u0: point.best.u0,
            u: point.best.u,
            dstar: point.best.value.dstar,
            margin: point.best.value.margin,
            bridged_to: left,
            left_check,
            n_detail: point.n_detail,
            worst_n: point.worst_n,
            tail: point.tail,
        };
        if let Some(p) = progress {
            p(&entry);
        }
        entries.push(entry);
        if done {
            break;
        }
        epsilon = left;
    }

    let mut cert = Certificate {
        schema: SCHEMA_VERSION.into(),
        mode: config.mode,
        target,
        eps_lo: config.eps_lo,
        eps_hi: config.eps_hi,
        entries,
        small_eps_witness: None,
        large_eps_note: large_eps_note(config.eps_hi, target),
        global_bound: 0.0,
        config: config.clone(),
        fingerprint: config.fingerprint(),
    };
    cert.global_bound = cert.segment_bound();
    cert.verify_coverage()?;
    Ok(cert)
}

fn large_eps_note(eps_hi: f64, target: f64) -> String {
    format!("for eps >= {eps_hi}: rho <= 1 <= {target} * eps, so D(eps) <= 1/eps <= {target}")
}

/// General-case scan with the given bounds.
pub fn certified_scan_general(
    eps_lo: f64,
    eps_hi: f64,
    target: f64,
    progress: Option<Progress<'_>>,
) -> Result<Certificate> {
    let config = ScanConfig {
        eps_lo,
        eps_hi,
        target,
        ..ScanConfig::general()
    };
    certified_scan(&config, progress)
}

/// i.i.d. scan with the given bounds and uniform-tail threshold `m`.
pub fn certified_scan_iid(
    eps_lo: f64,
    eps_hi: f64,
    target: f64,
    m: u64,
    progress: Option<Progress<'_>>,
) -> Result<Certificate> {
    let config = ScanConfig {
        eps_lo,
        eps_hi,
        target,
        m: Some(m),
        ..ScanConfig::iid()
    };
    certified_scan(&config, progress)
}

/// Number of points of the small-epsilon grid.
pub const SMALL_EPS_GRID: usize = 100;
/// Cells `ceil(1/eps^2) = n0` checked individually in the i.i.d. witness.
pub const SMALL_EPS_CELLS: u64 = 1_000_000;

fn small_eps_witness(mode: ScanMode, eps_lo: f64, target: f64) -> SmallEpsWitness {
    let eval = |e: f64| match mode {
        ScanMode::General => small_eps_bound_general(e),
        ScanMode::Iid => small_eps_bound_iid(e),
    };
    let grid: Vec<f64> = (1..=SMALL_EPS_GRID)
        .map(|i| eps_lo * i as f64 / SMALL_EPS_GRID as f64)
        .collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&e| eval(e)).collect();
    let all_ok = values.iter().all(Option::is_some);
    let vals: Vec<f64> = values.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
    let grid_max = all_ok.then(|| vals.iter().copied().fold(0.0, f64::max));
    let monotone_on_grid = vals.windows(2).all(|w| w[0] <= w[1]);
    let value_at_eps_lo = *values.last().expect("grid nonempty");
    let within = |v: Option<f64>| v.is_some_and(|v| v <= target);

    match mode {
        ScanMode::General => SmallEpsWitness {
            eps_lo,
            value_at_eps_lo,
            grid_max,
            grid_points: grid.len(),
            monotone_on_grid,
            cell_max: None,
            cells: None,
            envelope: None,
            assumption: "the bound/eps is nondecreasing in eps on (0, eps_lo] (each substituted term is); \
                         checked on the grid"
                .into(),
            passed: all_ok && monotone_on_grid && within(value_at_eps_lo) && within(grid_max),
        },
        ScanMode::Iid => {
            // Within a cell of constant n0 the bound/eps is a sum of terms
            // monotone or convex in eps, so its maximum is at a cell end.
            let n_first = min_sample_size(eps_lo);
            let n_last = n_first + SMALL_EPS_CELLS;
            let mut cell_max: f64 = 0.0;
            let mut cell_ok = true;
            for n0 in n_first..n_last {
                let right = if n0 == n_first { eps_lo } else { 1.0 / ((n0 - 1) as f64).sqrt() };
                let left = 1.0 / (n0 as f64).sqrt();
                for e in [left, right] {
                    match small_eps_bound_iid_cell(e, n0) {
                        Some(v) => cell_max = cell_max.max(v),
                        None => cell_ok = false,
                    }
                }
            }
            // For eps <= 1/sqrt(N - 1) with N = n_last: lambda <= N/(N-1),
            // e' <= lambda^1.5 eps, e'' <= lambda^2 eps^2, hence
            // D <= lambda^1.5 (c0 + c1) + (c2 lambda^2 + 4 c3 lambda^3) eps.
            let nf = n_last as f64;
            let lambda = nf / (nf - 1.0);
            let e_max = 1.0 / (nf - 1.0).sqrt();
            let envelope = lambda.powf(1.5) * (0.27283 + 0.19948)
                + (0.09116 * lambda.powi(2) + 4.0 * 0.00095 * lambda.powi(3)) * e_max;
            SmallEpsWitness {
                eps_lo,
                value_at_eps_lo,
                grid_max,
                grid_points: grid.len(),
                monotone_on_grid,
                cell_max: Some(cell_max),
                cells: Some(SMALL_EPS_CELLS),
                envelope: Some(envelope),
                assumption: "within each cell of constant ceil(1/eps^2) the bound/eps attains its maximum at a \
                             cell end; cells are checked individually up to the stated count and by the \
                             explicit envelope beyond"
                    .into(),
                passed: all_ok
                    && cell_ok
                    && within(value_at_eps_lo)
                    && within(grid_max)
                    && cell_max <= target
                    && envelope <= target,
            }
        }
    }
}

/// Final constant obtained from a certificate and the two outer regimes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub mode: ScanMode,
    pub target: f64,
    /// The certified constant; equals the target on success.
    pub c_bound: f64,
    /// Largest value certified on the scanned segment.
    pub segment_bound: f64,
    pub small_eps_bound: f64,
    /// `1/eps_hi`, the trivial bound at the right end.
    pub large_eps_bound: f64,
    pub global_bound: f64,
    pub entries: usize,
    pub fingerprint: String,
}

/// Adds the small-epsilon witness and the trivial large-epsilon regime to a
/// certificate and checks all three regimes against the target.
pub fn stitch_regimes(cert: &mut Certificate) -> Result<ConstantReport> {
    cert.verify_coverage()?;
    let witness = small_eps_witness(cert.mode, cert.eps_lo, cert.target);
    let small = witness
        .grid_max
        .unwrap_or(f64::INFINITY)
        .max(witness.cell_max.unwrap_or(0.0))
        .max(witness.envelope.unwrap_or(0.0));
    let passed = witness.passed;
    cert.small_eps_witness = Some(witness);
    if !passed {
        return Err(Error::Regime(format!(
            "small-eps bound {small} on (0, {}] exceeds target {}",
            cert.eps_lo, cert.target
        )));
    }
    let large = 1.0 / cert.eps_hi;
    if cert.eps_hi * cert.target < 1.0 || large > cert.target {
        return Err(Error::Regime(format!(
            "segment ends at {} below the trivial threshold 1/{}",
            cert.eps_hi, cert.target
        )));
    }
    let segment = cert.segment_bound();
    cert.global_bound = segment.max(small).max(large);
    if cert.global_bound > cert.target {
        return Err(Error::Regime(format!(
            "global bound {} exceeds target {}",
            cert.global_bound, cert.target
        )));
    }
    Ok(ConstantReport {
        mode: cert.mode,
        target: cert.target,
        c_bound: cert.target,
        segment_bound: segment,
        small_eps_bound: small,
        large_eps_bound: large,
        global_bound: cert.global_bound,
        entries: cert.entries.len(),
        fingerprint: cert.fingerprint.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_threshold_properties() {
        for t in [0.5606, 0.4785, 0.4, 0.5] {
            let x = trivial_threshold(t);
            assert!(x * t >= 1.0 && 1.0 / x <= t);
            assert!((x - 1.0 / t).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_components_follow_min_sample_size() {
        let c = iid_components(0.3536, 30);
        assert_eq!(component_key(&c[0]), Some(8));
        assert_eq!(c.len(), 30 - 8 + 1);
        let c = iid_components(0.05, 30);
        assert_eq!(c, vec![BoundMode::IidTail { epsilon: 0.05, m: 400 }]);
        let c = iid_components(1.5, 30);
        assert_eq!(component_key(&c[0]), Some(1));
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = ScanConfig::general();
        assert_eq!(a.fingerprint(), ScanConfig::general().fingerprint());
        assert_ne!(a.fingerprint(), a.clone().with_target(0.57).fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn config_validation() {
        assert!(ScanConfig::general().validate().is_ok());
        let mut c = ScanConfig::iid();
        c.m = Some(1);
        assert!(c.validate().is_err());
        let mut c = ScanConfig::general();
        c.eps_lo = 3.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_eps_witnesses_pass_at_defaults() {
        let g = small_eps_witness(ScanMode::General, 0.02, 0.5606);
        assert!(g.passed && g.monotone_on_grid, "{g:?}");
        let i = small_eps_witness(ScanMode::Iid, 0.037, 0.4785);
        assert!(i.passed, "{i:?}");
        let low = small_eps_witness(ScanMode::Iid, 0.037, 0.40);
        assert!(!low.passed);
    }
}
