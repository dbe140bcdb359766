use std::sync::OnceLock;

use serde::Serialize;

/// The constants behind the majorant `b(t, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `max_{x>0} (cos x - 1 + x^2/2) / x^3`.
    pub a: f64,
    /// The maximiser of the ratio above.
    #[serde(rename = "M")]
    pub m: f64,
    /// `inf_{t>=0} exp(-t^2/2 + 2 a t^3)`, attained at `t = 1/(6a)`.
    pub l: f64,
}

impl BoundConstants {
    /// Recomputes the constants from their definitions.
    pub fn compute() -> Self {
        // The ratio's derivative vanishes where
        // x (x - sin x) = 3 (cos x - 1 + x^2/2), i.e. at the root of
        // -x^2/2 - x sin x - 3 cos x + 3 on [3, 5].
        let stationarity = |x: f64| -0.5 * x * x - x * x.sin() - 3.0 * x.cos() + 3.0;
        let (mut lo, mut hi) = (3.0_f64, 5.0_f64);
        while hi - lo > 0.0 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if stationarity(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let m = 0.5 * (lo + hi);
        let a = ratio(m);
        let c = 1.0 / (6.0 * a);
        // -c^2/2 + 2 a c^3 = -c^2/2 + c^2/3
        let l = (-c * c / 6.0).exp();
        Self { a, m, l }
    }

    /// Shared instance, computed on first use.
    pub fn get() -> &'static Self {
        static CONSTANTS: OnceLock<BoundConstants> = OnceLock::new();
        CONSTANTS.get_or_init(Self::compute)
    }

    /// `1/(6a)`, where `exp(s^2/2 - 2 a s^3)` peaks.
    pub fn peak(&self) -> f64 {
        1.0 / (6.0 * self.a)
    }
}

/// `(cos x - 1 + x^2/2) / x^3`, the ratio whose maximum defines `a`.
pub fn ratio(x: f64) -> f64 {
    (x.cos() - 1.0 + 0.5 * x * x) / (x * x * x)
}
