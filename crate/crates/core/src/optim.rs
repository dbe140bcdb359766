//! Derivative-free one-dimensional minimisation.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Outcome of a line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMin {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `x_tol` or after `max_evals`
/// evaluations. For a unimodal `f` the returned point is within `x_tol` of
/// the minimiser; otherwise it is a local minimum of the sampled values.
pub fn golden_section<F>(f: F, mut a: f64, mut b: f64, x_tol: f64, max_evals: usize) -> LineMin
where
    F: Fn(f64) -> f64,
{
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while (b - a) > x_tol && evals < max_evals {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 <= f2 {
        LineMin { x: x1, value: f1, evaluations: evals }
    } else {
        LineMin { x: x2, value: f2, evaluations: evals }
    }
}

/// Golden-section search for a maximum.
pub fn golden_section_max<F>(f: F, a: f64, b: f64, x_tol: f64, max_evals: usize) -> LineMin
where
    F: Fn(f64) -> f64,
{
    let r = golden_section(|x| -f(x), a, b, x_tol, max_evals);
    LineMin { value: -r.value, ..r }
}
