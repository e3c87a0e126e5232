//! Real functions on closed intervals, divided differences, and sampling-based
//! checks of (strong) convexity of higher order.
//!
//! A function `f` is *n-strongly convex with modulus c* on `[α, β]` when every
//! `n`th order divided difference of `f` over points of the interval is at
//! least `c`. For `n`-times differentiable `f` this is the same as
//! `f⁽ⁿ⁾ ≥ c·n!`, which is what [`estimate_strong_modulus`] measures on a grid.
//!
//! Verdicts returned by the sampling checks are one-sided: `Passed` means no
//! counterexample was found among the sampled tuples, not that the property is
//! proven.

mod catalog;

pub use catalog::{named_function, FUNCTION_NAMES};

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing divided differences to a threshold.
pub const DIVIDED_DIFFERENCE_TOL: f64 = 1e-10;

/// Default number of grid points used by [`estimate_strong_modulus`].
pub const DEFAULT_GRID_SIZE: usize = 10_001;

/// A shareable real-valued evaluator.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A closed interval `[lower, upper]` with `lower < upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper - lower < 1e-14 {
            return Err(Error::DegenerateInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Membership with a small absolute slack that absorbs rounding in
    /// convex combinations of interval points.
    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.lower.abs().max(self.upper.abs()));
        t >= self.lower - slack && t <= self.upper + slack
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if t.is_finite() && self.contains(t) {
            Ok(())
        } else {
            Err(Error::PointOutOfInterval {
                value: t,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }

    /// `size` equally spaced points including both endpoints.
    pub fn grid(&self, size: usize) -> impl Iterator<Item = f64> + '_ {
        let step = self.width() / (size.max(2) - 1) as f64;
        (0..size.max(2)).map(move |i| {
            if i + 1 == size.max(2) {
                self.upper
            } else {
                self.lower + step * i as f64
            }
        })
    }
}

/// A real function on an interval together with evaluators for its first
/// few derivatives.
#[derive(Clone)]
pub struct FunctionSpec {
    name: String,
    interval: Interval,
    value: RealFn,
    derivatives: Vec<RealFn>,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("interval", &self.interval)
            .field("max_order", &self.max_order())
            .finish()
    }
}

impl FunctionSpec {
    pub fn new<F>(name: impl Into<String>, interval: Interval, value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            interval,
            value: Arc::new(value),
            derivatives: Vec::new(),
        }
    }

    /// Appends the evaluator of the next derivative order.
    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivatives.push(Arc::new(derivative));
        self
    }

    /// Same function, restricted to another interval.
    pub fn on_interval(&self, interval: Interval) -> Self {
        Self {
            interval,
            ..self.clone()
        }
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..self.clone()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// Highest derivative order with an evaluator.
    pub fn max_order(&self) -> usize {
        self.derivatives.len()
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    /// `f⁽ᵏ⁾(t)`, with `k = 0` meaning `f` itself.
    pub fn derivative(&self, order: usize, t: f64) -> Result<f64> {
        match order {
            0 => Ok(self.eval(t)),
            k => self
                .derivatives
                .get(k - 1)
                .map(|d| d(t))
                .ok_or(Error::MissingDerivative {
                    order: k,
                    available: self.max_order(),
                }),
        }
    }

    pub fn require_order(&self, order: usize) -> Result<()> {
        if order > self.max_order() {
            Err(Error::MissingDerivative {
                order,
                available: self.max_order(),
            })
        } else {
            Ok(())
        }
    }

    /// Checks every derivative against a central difference of the previous
    /// order at interior grid points. Returns the orders and points where the
    /// relative mismatch exceeds `1e-5`.
    pub fn self_test(&self, grid_size: usize) -> Vec<DerivativeMismatch> {
        let mut mismatches = Vec::new();
        let h_scale = f64::EPSILON.cbrt() * self.interval.width().min(1.0);
        let interior: Vec<f64> = self
            .interval
            .grid(grid_size.max(3))
            .filter(|&t| t > self.interval.lower && t < self.interval.upper)
            .collect();
        for order in 1..=self.max_order() {
            for &t in &interior {
                let h = h_scale.min(t - self.interval.lower).min(self.interval.upper - t);
                let (Ok(up), Ok(down), Ok(exact)) = (
                    self.derivative(order - 1, t + h),
                    self.derivative(order - 1, t - h),
                    self.derivative(order, t),
                ) else {
                    continue;
                };
                let estimate = (up - down) / (2.0 * h);
                if !exact.is_finite() || (estimate - exact).abs() > 1e-5 * exact.abs().max(1.0) {
                    mismatches.push(DerivativeMismatch {
                        order,
                        point: t,
                        exact,
                        estimate,
                    });
                }
            }
        }
        mismatches
    }
}

/// A derivative that disagrees with the finite difference of its predecessor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeMismatch {
    pub order: usize,
    pub point: f64,
    pub exact: f64,
    pub estimate: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `n (n-1) ... (n-k+1)`.
pub(crate) fn falling_factorial(n: f64, k: usize) -> f64 {
    (0..k).map(|i| n - i as f64).product()
}

/// `[z₀, …, zₙ; f]`, allowing repeated points.
///
/// Points are sorted first, so the result does not depend on their order.
/// A run of `j` equal points contributes `f⁽ʲ⁻¹⁾(z)/(j-1)!`.
pub fn divided_difference(points: &[f64], spec: &FunctionSpec) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    if let Some(&bad) = points.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite point {bad}")));
    }
    let mut z = points.to_vec();
    z.sort_by(f64::total_cmp);

    let mut longest_run = 1;
    let mut run = 1;
    for pair in z.windows(2) {
        run = if pair[0] == pair[1] { run + 1 } else { 1 };
        longest_run = longest_run.max(run);
    }
    spec.require_order(longest_run - 1)?;

    let mut table: Vec<f64> = z.iter().map(|&t| spec.eval(t)).collect();
    for level in 1..z.len() {
        for i in (level..z.len()).rev() {
            let span = z[i] - z[i - level];
            table[i] = if span == 0.0 {
                spec.derivative(level, z[i])? / factorial(level)
            } else {
                (table[i] - table[i - 1]) / span
            };
        }
    }
    Ok(table[z.len() - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateVerdict {
    Certified,
    Failed,
    Indeterminate,
}

/// Grid-verified lower bound `c` with `f⁽ⁿ⁾(t) ≥ c·n!` at every tested point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusCertificate {
    pub function: String,
    pub interval: Interval,
    pub order: usize,
    pub modulus: f64,
    /// Smallest observed `f⁽ⁿ⁾(t)/n!`; may be negative.
    pub min_scaled_derivative: f64,
    pub grid_size: usize,
    pub verdict: CertificateVerdict,
}

impl ModulusCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == CertificateVerdict::Certified
    }

    /// Whether `c` is covered by this certificate, allowing for the last few
    /// bits of rounding in the grid minimum.
    pub fn covers(&self, c: f64) -> bool {
        self.is_certified() && c <= self.modulus * (1.0 + 1e-12) + 1e-15
    }
}

/// Estimates the order-`n` strong-convexity modulus as
/// `max(0, min_t f⁽ⁿ⁾(t)/n!)` over a uniform grid that includes both endpoints.
pub fn estimate_strong_modulus(
    spec: &FunctionSpec,
    n: usize,
    grid_size: usize,
) -> Result<ModulusCertificate> {
    if n == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    if grid_size < 2 {
        return Err(Error::InvalidParameter("grid size must be at least 2".into()));
    }
    spec.require_order(n)?;
    let scale = factorial(n);
    let mut min = f64::INFINITY;
    let mut finite = true;
    for t in spec.interval().grid(grid_size) {
        let v = spec.derivative(n, t)? / scale;
        if !v.is_finite() {
            finite = false;
            break;
        }
        min = min.min(v);
    }
    let verdict = if !finite {
        CertificateVerdict::Indeterminate
    } else if min >= 0.0 {
        CertificateVerdict::Certified
    } else {
        CertificateVerdict::Failed
    };
    Ok(ModulusCertificate {
        function: spec.name().to_string(),
        interval: spec.interval(),
        order: n,
        modulus: if finite { min.max(0.0) } else { 0.0 },
        min_scaled_derivative: if finite { min } else { f64::NAN },
        grid_size,
        verdict,
    })
}

/// Outcome of a randomized falsification search.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SampleVerdict {
    Passed { samples: usize },
    Failed { witness: Vec<f64>, value: f64 },
}

impl SampleVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, SampleVerdict::Passed { .. })
    }
}

fn sample_distinct(rng: &mut ChaCha8Rng, interval: Interval, count: usize) -> Vec<f64> {
    loop {
        let mut pts: Vec<f64> = (0..count)
            .map(|_| rng.gen_range(interval.lower()..=interval.upper()))
            .collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[0] != w[1]) {
            return pts;
        }
    }
}

fn search_below(
    spec: &FunctionSpec,
    n: usize,
    threshold: f64,
    sample_count: usize,
    seed: u64,
) -> Result<SampleVerdict> {
    if n == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sample_count {
        let tuple = sample_distinct(&mut rng, spec.interval(), n + 1);
        let value = divided_difference(&tuple, spec)?;
        if !(value >= threshold - DIVIDED_DIFFERENCE_TOL) {
            return Ok(SampleVerdict::Failed {
                witness: tuple,
                value,
            });
        }
    }
    Ok(SampleVerdict::Passed {
        samples: sample_count,
    })
}

/// Looks for `n+1` distinct points with a negative `n`th divided difference.
pub fn is_n_convex(
    spec: &FunctionSpec,
    n: usize,
    sample_count: usize,
    seed: u64,
) -> Result<SampleVerdict> {
    search_below(spec, n, 0.0, sample_count, seed)
}

/// Looks for `n+1` distinct points whose divided difference falls below `c`.
pub fn is_n_strongly_convex(
    spec: &FunctionSpec,
    n: usize,
    c: f64,
    sample_count: usize,
    seed: u64,
) -> Result<SampleVerdict> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("modulus must be positive, got {c}")));
    }
    search_below(spec, n, c, sample_count, seed)
}

/// `g(x) = f(x) - c xⁿ`, which is `n`-convex whenever `f` is `n`-strongly
/// convex with modulus `c`.
pub fn shift_to_convex(spec: &FunctionSpec, n: usize, c: f64) -> Result<FunctionSpec> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("modulus must be nonnegative, got {c}")));
    }
    let power = n as i32;
    let f = spec.value.clone();
    let mut shifted = FunctionSpec::new(
        format!("{}-{}*t^{}", spec.name(), c, n),
        spec.interval(),
        move |t| f(t) - c * t.powi(power),
    );
    for (idx, d) in spec.derivatives.iter().enumerate() {
        let k = idx + 1;
        let d = d.clone();
        if k <= n {
            let coeff = c * falling_factorial(n as f64, k);
            let exponent = power - k as i32;
            shifted = shifted.with_derivative(move |t| d(t) - coeff * t.powi(exponent));
        } else {
            shifted.derivatives.push(d);
        }
    }
    Ok(shifted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn divided_difference_basic_values() {
        let sq = named_function("square", Interval::new(0.0, 2.0).unwrap()).unwrap();
        assert_eq!(divided_difference(&[0.0, 1.0], &sq).unwrap(), 1.0);
        assert_eq!(divided_difference(&[0.0, 1.0, 2.0], &sq).unwrap(), 1.0);
        let cube = named_function("cube", Interval::new(0.0, 2.0).unwrap()).unwrap();
        assert_eq!(divided_difference(&[1.0, 1.0, 1.0], &cube).unwrap(), 3.0);
    }

    #[test]
    fn divided_difference_exp_matches_direct_recurrence() {
        let e = std::f64::consts::E;
        let expected = ((e * e - e) - (e - 1.0)) / 2.0;
        let f = named_function("exp", Interval::new(0.0, 2.0).unwrap()).unwrap();
        let got = divided_difference(&[2.0, 0.0, 1.0], &f).unwrap();
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn divided_difference_mixed_repeats() {
        // [0,0,1; t^3] = ([0,1] - [0,0]) / 1 = 1 - 0
        let cube = named_function("cube", Interval::new(0.0, 1.0).unwrap()).unwrap();
        assert!((divided_difference(&[0.0, 1.0, 0.0], &cube).unwrap() - 1.0).abs() < 1e-15);
        // [0,1,1; t^3] = ([1,1] - [0,1]) / 1 = 3 - 1
        assert!((divided_difference(&[1.0, 0.0, 1.0], &cube).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn divided_difference_errors() {
        let f = FunctionSpec::new("bare", unit(), |t| t * t);
        assert_eq!(divided_difference(&[], &f), Err(Error::EmptyPoints));
        assert_eq!(
            divided_difference(&[0.5, 0.5], &f),
            Err(Error::MissingDerivative {
                order: 1,
                available: 0
            })
        );
        assert!(divided_difference(&[0.1, 0.5], &f).is_ok());
    }

    #[test]
    fn modulus_of_simple_functions() {
        let sq = named_function("square", unit()).unwrap();
        let cert = estimate_strong_modulus(&sq, 2, 11).unwrap();
        assert_eq!(cert.modulus, 1.0);
        assert!(cert.is_certified());

        let lin = named_function("linear", unit()).unwrap();
        let cert = estimate_strong_modulus(&lin, 2, 11).unwrap();
        assert_eq!(cert.modulus, 0.0);
        assert!(cert.is_certified());

        let exp = named_function("exp", unit()).unwrap();
        let cert = estimate_strong_modulus(&exp, 2, DEFAULT_GRID_SIZE).unwrap();
        // dense-grid oracle: smallest e^t / 2 over 10^6 points
        let oracle = (0..=1_000_000)
            .map(|i| (i as f64 * 1e-6).exp() / 2.0)
            .fold(f64::INFINITY, f64::min);
        assert!((cert.modulus - oracle).abs() < 1e-15);
        assert!((cert.modulus - 0.5).abs() < 1e-15);
    }

    #[test]
    fn modulus_rejects_bad_arguments() {
        let sq = named_function("square", unit()).unwrap();
        assert!(matches!(
            estimate_strong_modulus(&sq, 2, 1),
            Err(Error::InvalidParameter(_))
        ));
        let bare = FunctionSpec::new("bare", unit(), |t| t);
        assert!(matches!(
            estimate_strong_modulus(&bare, 2, 10),
            Err(Error::MissingDerivative { .. })
        ));
        let neg = FunctionSpec::new("neg", unit(), |t| -t * t)
            .with_derivative(|t| -2.0 * t)
            .with_derivative(|_| -2.0);
        let cert = estimate_strong_modulus(&neg, 2, 10).unwrap();
        assert_eq!(cert.verdict, CertificateVerdict::Failed);
        assert_eq!(cert.modulus, 0.0);
    }

    #[test]
    fn convexity_sampling() {
        let sq = named_function("square", unit()).unwrap();
        assert!(is_n_convex(&sq, 2, 500, 7).unwrap().passed());
        assert!(is_n_strongly_convex(&sq, 2, 1.0, 500, 7).unwrap().passed());
        assert!(!is_n_strongly_convex(&sq, 2, 1.5, 500, 7).unwrap().passed());

        let neg = FunctionSpec::new("neg_square", unit(), |t| -t * t);
        match is_n_convex(&neg, 2, 10, 1).unwrap() {
            SampleVerdict::Failed { witness, value } => {
                assert_eq!(witness.len(), 3);
                assert!((value + 1.0).abs() < 1e-9);
            }
            other => panic!("expected failure, got {other:?}"),
        }

        let cube = named_function("cube", Interval::new(-1.0, 1.0).unwrap()).unwrap();
        match is_n_convex(&cube, 2, 1000, 3).unwrap() {
            SampleVerdict::Failed { witness, value } => {
                // [z0,z1,z2; t^3] = z0 + z1 + z2
                let direct: f64 = witness.iter().sum();
                assert!((value - direct).abs() < 1e-9);
                assert!(direct < 0.0);
            }
            other => panic!("expected failure, got {other:?}"),
        }

        let exp = named_function("exp", unit()).unwrap();
        assert!(is_n_strongly_convex(&exp, 2, 0.4, 1000, 11).unwrap().passed());
    }

    #[test]
    fn shift_removes_the_power() {
        let sq = named_function("square", unit()).unwrap();
        let g = shift_to_convex(&sq, 2, 1.0).unwrap();
        for t in [0.0, 0.3, 0.9] {
            assert_eq!(g.eval(t), 0.0);
            assert_eq!(g.derivative(1, t).unwrap(), 0.0);
            assert_eq!(g.derivative(2, t).unwrap(), 0.0);
        }
        let same = shift_to_convex(&sq, 2, 0.0).unwrap();
        for t in [0.0, 0.3, 0.9] {
            assert_eq!(same.eval(t), sq.eval(t));
        }
        let exp = named_function("exp", unit()).unwrap();
        let g = shift_to_convex(&exp, 2, 0.5).unwrap();
        assert!((g.eval(1.0) - (std::f64::consts::E - 0.5)).abs() < 1e-15);
        assert!(g.self_test(101).is_empty());
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
        let grid: Vec<f64> = unit().grid(5).collect();
        assert_eq!(grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
