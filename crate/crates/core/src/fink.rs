//! Fink's representation of a function through its mean, boundary
//! derivatives and a kernel integral of `f⁽ⁿ⁾`, applied to the Sherman
//! difference `Σ aⱼ f(xⱼ) − Σ bᵢ f(yᵢ)`.
//!
//! ```text
//! f(x) = n/(β−α) ∫ f
//!      − Σ_{w=1}^{n−1} (n−w)/w! · (f⁽ʷ⁻¹⁾(α)(x−α)ʷ − f⁽ʷ⁻¹⁾(β)(x−β)ʷ)/(β−α)
//!      + 1/((n−1)!(β−α)) ∫ (x−t)ⁿ⁻¹ k(t,x) f⁽ⁿ⁾(t) dt
//! ```
//!
//! with `k(t,x) = t−α` for `t ≤ x` and `t−β` for `t > x`.

use serde::Serialize;

use crate::convexity::{estimate_strong_modulus, shift_to_convex, FunctionSpec, Interval, DEFAULT_GRID_SIZE};
use crate::error::{Error, Result};
use crate::majorization::WeightedPair;
use crate::quadrature::{integrate, QuadratureConfig};

/// Grid used by [`higher_order_sherman_bound`] to classify the kernel sign.
pub const DEFAULT_KERNEL_GRID: usize = 1001;
/// Absolute tolerance when classifying the sign of the kernel combination.
pub const KERNEL_SIGN_TOL: f64 = 1e-12;
/// Slack on the higher-order bound.
pub const BOUND_SLACK: f64 = 1e-9;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn kernel_unchecked(t: f64, x: f64, lower: f64, upper: f64) -> f64 {
    if t <= x {
        t - lower
    } else {
        t - upper
    }
}

/// `k(t, x)` on `[lower, upper]`; at `t = x` the left branch `t − α` is used.
pub fn fink_kernel(t: f64, x: f64, lower: f64, upper: f64) -> Result<f64> {
    let interval = Interval::new(lower, upper)?;
    interval.check(t)?;
    interval.check(x)?;
    Ok(kernel_unchecked(t, x, lower, upper))
}

/// `(x − t)ⁿ⁻¹ k(t, x)`.
fn kernel_term(t: f64, x: f64, n: usize, lower: f64, upper: f64) -> f64 {
    (x - t).powi(n as i32 - 1) * kernel_unchecked(t, x, lower, upper)
}

/// Terms of the Fink expansion of `f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinkExpansion {
    pub order: usize,
    pub point: f64,
    pub value: f64,
    pub mean_term: f64,
    pub boundary_sum: f64,
    pub kernel_integral: f64,
    /// `f(x)` minus the right-hand side.
    pub residual: f64,
}

/// Evaluates every term of Fink's identity at `x` and returns the mismatch.
pub fn fink_identity_check(
    spec: &FunctionSpec,
    x: f64,
    n: usize,
    quad: &QuadratureConfig,
) -> Result<FinkExpansion> {
    if n == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    spec.require_order(n)?;
    let interval = spec.interval();
    interval.check(x)?;
    let (lo, hi) = (interval.lower(), interval.upper());
    let width = hi - lo;

    let mean = integrate(|t| spec.eval(t), lo, hi, &[], quad)?;
    let mean_term = n as f64 / width * mean.value;

    let mut boundary_sum = 0.0;
    for w in 1..n {
        let at_lower = spec.derivative(w - 1, lo)? * (x - lo).powi(w as i32);
        let at_upper = spec.derivative(w - 1, hi)? * (x - hi).powi(w as i32);
        boundary_sum += (n - w) as f64 / factorial(w) * (at_lower - at_upper) / width;
    }

    let nth = |t: f64| spec.derivative(n, t).unwrap_or(f64::NAN);
    let integral = integrate(
        |t| kernel_term(t, x, n, lo, hi) * nth(t),
        lo,
        hi,
        &[x],
        quad,
    )?;
    let kernel_integral = integral.value / (factorial(n - 1) * width);

    let value = spec.eval(x);
    Ok(FinkExpansion {
        order: n,
        point: x,
        value,
        mean_term,
        boundary_sum,
        kernel_integral,
        residual: value - (mean_term - boundary_sum + kernel_integral),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSign {
    Nonnegative,
    Nonpositive,
    Indefinite,
}

/// `Σ aⱼ (xⱼ−t)ⁿ⁻¹ k(t,xⱼ) − Σ bᵢ (yᵢ−t)ⁿ⁻¹ k(t,yᵢ)`.
pub fn kernel_combination(pair: &WeightedPair, n: usize, t: f64, interval: Interval) -> f64 {
    let (lo, hi) = (interval.lower(), interval.upper());
    pair.source().weighted_sum_of(|x| kernel_term(t, x, n, lo, hi))
        - pair.target().weighted_sum_of(|y| kernel_term(t, y, n, lo, hi))
}

fn breakpoints(pair: &WeightedPair) -> Vec<f64> {
    pair.source()
        .points()
        .iter()
        .chain(pair.target().points())
        .copied()
        .collect()
}

/// Classifies the sign of [`kernel_combination`] over a uniform grid of
/// `t_grid_size` points plus every point of the pair.
pub fn check_kernel_condition(
    pair: &WeightedPair,
    n: usize,
    interval: Interval,
    t_grid_size: usize,
) -> Result<KernelSign> {
    if n == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    if t_grid_size < 2 {
        return Err(Error::InvalidParameter("kernel grid needs at least 2 points".into()));
    }
    let (mut any_negative, mut any_positive) = (false, false);
    let extra = breakpoints(pair);
    for t in interval.grid(t_grid_size).chain(extra) {
        let g = kernel_combination(pair, n, t, interval);
        any_negative |= !(g >= -KERNEL_SIGN_TOL);
        any_positive |= g > KERNEL_SIGN_TOL;
    }
    Ok(match (any_negative, any_positive) {
        (false, _) => KernelSign::Nonnegative,
        (true, false) => KernelSign::Nonpositive,
        (true, true) => KernelSign::Indefinite,
    })
}

/// Terms of the Sherman-difference identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinkReport {
    pub order: usize,
    pub function: String,
    /// `Σ aⱼ f(xⱼ) − Σ bᵢ f(yᵢ)`
    pub lhs: f64,
    /// The two boundary sums over `w = 2, …, n−1`.
    pub boundary_terms: f64,
    pub integral_term: f64,
    /// `lhs − boundary_terms − integral_term`
    pub residual: f64,
    pub kernel_condition: KernelSign,
    pub quadrature_error: f64,
    pub abs_tol: f64,
}

impl FinkReport {
    /// Whether the residual is within ten quadrature tolerances.
    pub fn within_tolerance(&self) -> bool {
        self.residual.abs() <= 10.0 * self.abs_tol
    }
}

const MOMENT_TOL: f64 = 1e-9;

/// The identity drops the zeroth and first moment terms, which cancel under
/// weighted majorization; check that they do.
fn check_moments(pair: &WeightedPair) -> Result<()> {
    let (x, y) = (pair.source(), pair.target());
    let weight_defect = (x.weight_sum() - y.weight_sum()).abs();
    let moment_defect = (x.weighted_sum() - y.weighted_sum()).abs();
    let scale = x.weight_sum().abs().max(1.0);
    if weight_defect > MOMENT_TOL * scale || moment_defect > MOMENT_TOL * scale {
        return Err(Error::MajorizationNotVerified {
            weight_residual: weight_defect,
            point_residual: moment_defect,
        });
    }
    Ok(())
}

/// `(1/(β−α)) Σ_{w=2}^{n−1} (n−w)/w! [f⁽ʷ⁻¹⁾(β) Dʷ(β) − f⁽ʷ⁻¹⁾(α) Dʷ(α)]`
/// with `Dʷ(s) = Σ aⱼ (xⱼ−s)ʷ − Σ bᵢ (yᵢ−s)ʷ`.
fn boundary_terms(pair: &WeightedPair, spec: &FunctionSpec, n: usize) -> Result<f64> {
    let interval = spec.interval();
    let (lo, hi) = (interval.lower(), interval.upper());
    let spread = |s: f64, w: i32| {
        pair.source().weighted_sum_of(|x| (x - s).powi(w))
            - pair.target().weighted_sum_of(|y| (y - s).powi(w))
    };
    let mut total = 0.0;
    for w in 2..n {
        let coeff = (n - w) as f64 / factorial(w);
        total += coeff
            * (spec.derivative(w - 1, hi)? * spread(hi, w as i32)
                - spec.derivative(w - 1, lo)? * spread(lo, w as i32));
    }
    Ok(total / (hi - lo))
}

fn difference(pair: &WeightedPair, spec: &FunctionSpec) -> f64 {
    pair.source().weighted_sum_of(|x| spec.eval(x)) - pair.target().weighted_sum_of(|y| spec.eval(y))
}

/// Evaluates both sides of the Sherman-difference identity for order `n`.
pub fn sherman_difference_identity(
    pair: &WeightedPair,
    spec: &FunctionSpec,
    n: usize,
    quad: &QuadratureConfig,
) -> Result<FinkReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    spec.require_order(n)?;
    check_moments(pair)?;
    let interval = spec.interval();
    pair.source().check_within(interval)?;
    pair.target().check_within(interval)?;
    let (lo, hi) = (interval.lower(), interval.upper());

    let lhs = difference(pair, spec);
    let boundary = boundary_terms(pair, spec, n)?;
    let nth = |t: f64| spec.derivative(n, t).unwrap_or(f64::NAN);
    let integral = integrate(
        |t| kernel_combination(pair, n, t, interval) * nth(t),
        lo,
        hi,
        &breakpoints(pair),
        quad,
    )?;
    let integral_term = integral.value / (factorial(n - 1) * (hi - lo));
    Ok(FinkReport {
        order: n,
        function: spec.name().to_string(),
        lhs,
        boundary_terms: boundary,
        integral_term,
        residual: lhs - boundary - integral_term,
        kernel_condition: check_kernel_condition(pair, n, interval, DEFAULT_KERNEL_GRID)?,
        quadrature_error: integral.error,
        abs_tol: quad.abs_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HigherOrderBound {
    pub order: usize,
    pub modulus: f64,
    /// `Σ aⱼ f(xⱼ) − Σ bᵢ f(yᵢ) − c(Σ aⱼ xⱼⁿ − Σ bᵢ yᵢⁿ)`
    pub lhs_with_correction: f64,
    /// Boundary sums evaluated at `g = f − c tⁿ`.
    pub rhs_boundary: f64,
    /// The integral term that the bound discards; its sign follows the kernel.
    pub dropped_integral: f64,
    pub kernel_condition: KernelSign,
    pub holds: bool,
}

/// Lower (or, for a nonpositive kernel, upper) bound on the corrected
/// Sherman difference of an `n`-strongly convex `f`, obtained by applying
/// the identity to `g(t) = f(t) − c tⁿ` and discarding the integral term.
pub fn higher_order_sherman_bound(
    pair: &WeightedPair,
    spec: &FunctionSpec,
    n: usize,
    c: f64,
    quad: &QuadratureConfig,
) -> Result<HigherOrderBound> {
    let interval = spec.interval();
    let kernel_condition = check_kernel_condition(pair, n, interval, DEFAULT_KERNEL_GRID)?;
    if kernel_condition == KernelSign::Indefinite {
        return Err(Error::KernelConditionIndefinite);
    }
    let certificate = estimate_strong_modulus(spec, n, DEFAULT_GRID_SIZE)?;
    if !certificate.covers(c) {
        return Err(Error::ModulusNotCertified {
            requested: c,
            certified: certificate.modulus,
        });
    }
    let shifted = shift_to_convex(spec, n, c)?;
    let report = sherman_difference_identity(pair, &shifted, n, quad)?;

    let power = n as i32;
    let lhs_with_correction = difference(pair, spec)
        - c * (pair.source().weighted_sum_of(|x| x.powi(power))
            - pair.target().weighted_sum_of(|y| y.powi(power)));
    let rhs_boundary = report.boundary_terms;
    let holds = match kernel_condition {
        KernelSign::Nonnegative => lhs_with_correction >= rhs_boundary - BOUND_SLACK,
        _ => lhs_with_correction <= rhs_boundary + BOUND_SLACK,
    };
    Ok(HigherOrderBound {
        order: n,
        modulus: c,
        lhs_with_correction,
        rhs_boundary,
        dropped_integral: report.integral_term,
        kernel_condition,
        holds,
    })
}
