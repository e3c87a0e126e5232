//! Csiszár-type divergences `Σ pᵢ f(qᵢ/pᵢ)` between positive measures, a
//! catalog of common generators, and certified two-sided bounds derived from
//! the strong Sherman chain.

use serde::Serialize;

use crate::bounds::{chain_with_modulus, BoundChain};
use crate::convexity::{estimate_strong_modulus, named_function, FunctionSpec, Interval, ModulusCertificate, DEFAULT_GRID_SIZE};
use crate::error::{Error, Result};
use crate::majorization::{StochasticKind, StochasticMatrix, WeightedPair, WeightedVector};

/// Catalog names accepted by [`kernel_by_name`].
pub const KERNEL_NAMES: &[&str] = &[
    "kl",
    "hellinger",
    "variational",
    "harmonic",
    "bhattacharya",
    "triangular",
    "chi_square",
    "renyi",
];

const NORMALIZED_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ConvexityClass {
    StronglyConvex { modulus: f64 },
    ConvexOnly,
    Nonconvex,
}

/// A named generator `f` on a positive ratio interval.
#[derive(Debug, Clone)]
pub struct DivergenceKernel {
    name: String,
    generator: FunctionSpec,
    normalized: bool,
    convexity: ConvexityClass,
    certificate: Option<ModulusCertificate>,
}

impl DivergenceKernel {
    /// Wraps a generator, certifying its second-order modulus on the
    /// generator's interval.
    pub fn certified(name: impl Into<String>, generator: FunctionSpec) -> Result<Self> {
        let name = name.into();
        let certificate = estimate_strong_modulus(&generator, 2, DEFAULT_GRID_SIZE)?;
        let convexity = if !certificate.is_certified() {
            ConvexityClass::Nonconvex
        } else if certificate.modulus > 0.0 {
            ConvexityClass::StronglyConvex {
                modulus: certificate.modulus,
            }
        } else {
            ConvexityClass::ConvexOnly
        };
        Ok(Self {
            normalized: generator.eval(1.0).abs() <= NORMALIZED_TOL,
            name,
            generator,
            convexity,
            certificate: Some(certificate),
        })
    }

    fn declared(name: &str, generator: FunctionSpec, convexity: ConvexityClass) -> Self {
        Self {
            name: name.to_string(),
            normalized: generator.eval(1.0).abs() <= NORMALIZED_TOL,
            generator,
            convexity,
            certificate: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator(&self) -> &FunctionSpec {
        &self.generator
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn convexity(&self) -> ConvexityClass {
        self.convexity
    }

    pub fn certificate(&self) -> Option<&ModulusCertificate> {
        self.certificate.as_ref()
    }

    pub fn interval(&self) -> Interval {
        self.generator.interval()
    }

    pub fn strong_modulus(&self) -> Option<f64> {
        match self.convexity {
            ConvexityClass::StronglyConvex { modulus } => Some(modulus),
            _ => None,
        }
    }
}

fn check_ratio_interval(interval: Interval) -> Result<()> {
    if interval.lower() <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ratio interval must be positive, got [{}, {}]",
            interval.lower(),
            interval.upper()
        )));
    }
    Ok(())
}

/// Builds a catalog kernel on `interval`. `alpha` is the Rényi order and
/// must exceed 1; it is ignored by the other kernels.
pub fn kernel_by_name(name: &str, alpha: Option<f64>, interval: Interval) -> Result<DivergenceKernel> {
    check_ratio_interval(interval)?;
    let (base, inline_alpha) = match name.split_once(':') {
        Some((b, a)) => (
            b,
            Some(a.parse::<f64>().map_err(|_| Error::UnknownFunction(name.to_string()))?),
        ),
        None => (name, None),
    };
    let spec = |f: fn(f64) -> f64, ds: &[fn(f64) -> f64]| {
        ds.iter()
            .fold(FunctionSpec::new(base, interval, f), |s, &d| s.with_derivative(d))
    };
    match base {
        "kl" => DivergenceKernel::certified("kl", named_function("xlogx", interval)?.renamed("kl")),
        "chi_square" | "chi-square" | "chi2" => DivergenceKernel::certified(
            "chi_square",
            spec(|t| (t - 1.0) * (t - 1.0), &[|t| 2.0 * (t - 1.0), |_| 2.0, |_| 0.0, |_| 0.0])
                .renamed("chi_square"),
        ),
        "hellinger" => DivergenceKernel::certified(
            "hellinger",
            spec(
                |t| 0.5 * (t.sqrt() - 1.0).powi(2),
                &[
                    |t| 0.5 - 0.5 / t.sqrt(),
                    |t| 0.25 * t.powf(-1.5),
                    |t| -0.375 * t.powf(-2.5),
                    |t| 0.9375 * t.powf(-3.5),
                ],
            ),
        ),
        "bhattacharya" => DivergenceKernel::certified(
            "bhattacharya",
            spec(
                |t| -t.sqrt(),
                &[
                    |t| -0.5 / t.sqrt(),
                    |t| 0.25 * t.powf(-1.5),
                    |t| -0.375 * t.powf(-2.5),
                    |t| 0.9375 * t.powf(-3.5),
                ],
            ),
        ),
        "triangular" => DivergenceKernel::certified(
            "triangular",
            spec(
                |t| (t - 1.0) * (t - 1.0) / (t + 1.0),
                &[
                    |t| 1.0 - 4.0 / ((t + 1.0) * (t + 1.0)),
                    |t| 8.0 / (t + 1.0).powi(3),
                    |t| -24.0 / (t + 1.0).powi(4),
                    |t| 96.0 / (t + 1.0).powi(5),
                ],
            ),
        ),
        "renyi" => {
            let alpha = inline_alpha.or(alpha).ok_or_else(|| {
                Error::InvalidParameter("renyi kernel needs an alpha parameter".into())
            })?;
            if !(alpha > 1.0) || !alpha.is_finite() {
                return Err(Error::InvalidParameter(format!("renyi alpha must exceed 1, got {alpha}")));
            }
            let name = format!("renyi:{alpha}");
            DivergenceKernel::certified(
                name.clone(),
                named_function(&format!("pow:{alpha}"), interval)?.renamed(name),
            )
        }
        "variational" => Ok(DivergenceKernel::declared(
            "variational",
            spec(|t| (t - 1.0).abs(), &[|t| (t - 1.0).signum()]),
            ConvexityClass::ConvexOnly,
        )),
        "harmonic" => Ok(DivergenceKernel::declared(
            "harmonic",
            spec(
                |t| 2.0 * t / (1.0 + t),
                &[
                    |t| 2.0 / ((1.0 + t) * (1.0 + t)),
                    |t| -4.0 / (1.0 + t).powi(3),
                    |t| 12.0 / (1.0 + t).powi(4),
                ],
            ),
            ConvexityClass::Nonconvex,
        )),
        _ => Err(Error::UnknownFunction(name.to_string())),
    }
}

/// All eight catalog kernels on `interval`.
pub fn catalog(interval: Interval, renyi_alpha: f64) -> Result<Vec<DivergenceKernel>> {
    KERNEL_NAMES
        .iter()
        .map(|name| kernel_by_name(name, Some(renyi_alpha), interval))
        .collect()
}

/// Two strictly positive vectors of equal length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionPair {
    p: Vec<f64>,
    q: Vec<f64>,
}

fn check_positive(v: &[f64]) -> Result<()> {
    match v.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
        Some((index, &value)) => Err(Error::NonPositiveEntry { index, value }),
        None => Ok(()),
    }
}

impl DistributionPair {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: q.len(),
            });
        }
        if p.is_empty() {
            return Err(Error::InvalidParameter("distributions are empty".into()));
        }
        check_positive(&p)?;
        check_positive(&q)?;
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// `qᵢ / pᵢ`
    pub fn ratios(&self) -> Vec<f64> {
        self.p.iter().zip(&self.q).map(|(p, q)| q / p).collect()
    }

    /// `[min ratio, max ratio]` widened by `1e-9` on each side.
    pub fn ratio_interval(&self) -> Result<Interval> {
        let r = self.ratios();
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new((lo - 1e-9).max(0.5 * lo), hi + 1e-9)
    }

    fn check_ratios(&self, interval: Interval) -> Result<Vec<f64>> {
        let ratios = self.ratios();
        for &ratio in &ratios {
            if !interval.contains(ratio) {
                return Err(Error::RatioOutOfDomain {
                    ratio,
                    lower: interval.lower(),
                    upper: interval.upper(),
                });
            }
        }
        Ok(ratios)
    }
}

/// `Σ pᵢ f(qᵢ/pᵢ)`
pub fn csiszar_divergence(pair: &DistributionPair, kernel: &DivergenceKernel) -> Result<f64> {
    let ratios = pair.check_ratios(kernel.interval())?;
    Ok(pair
        .p
        .iter()
        .zip(ratios)
        .map(|(p, r)| p * kernel.generator.eval(r))
        .sum())
}

/// `Σ pᵢ ln(1/pᵢ)` for a strictly positive probability vector.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::NotAProbabilityVector("empty".into()));
    }
    if let Some(bad) = p.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::NotAProbabilityVector(format!("entry {bad} is not positive")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotAProbabilityVector(format!("sums to {total}")));
    }
    let entropy: f64 = p.iter().map(|v| v * (1.0 / v).ln()).sum();
    // −D_f(e, p) with f(t) = −ln t
    debug_assert!({
        let via_divergence: f64 = -p.iter().map(|v| v * -(1.0 / v).ln()).sum::<f64>();
        (via_divergence - entropy).abs() <= 1e-12
    });
    Ok(entropy)
}

/// `Σ qᵢ ln(qᵢ/pᵢ)`
pub fn kl_divergence(pair: &DistributionPair) -> Result<f64> {
    Ok(pair.p.iter().zip(&pair.q).map(|(p, q)| q * (q / p).ln()).sum())
}

/// Ordered bounds around a divergence value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sandwich {
    pub kernel: String,
    pub modulus: f64,
    pub lower: f64,
    pub upper: f64,
    /// Divergence of the aggregated measures.
    pub lower_ck: f64,
    pub lower_strong: f64,
    pub value: f64,
    pub upper_converse: f64,
    /// `Σⱼ pⱼ (qⱼ/pⱼ)² − Σᵢ Pᵢ (Qᵢ/Pᵢ)²` over the aggregated masses.
    pub delta: f64,
    pub correction_converse: f64,
}

impl Sandwich {
    fn from_chain(kernel: &DivergenceKernel, chain: &BoundChain, delta: f64) -> Self {
        Self {
            kernel: kernel.name.clone(),
            modulus: chain.modulus,
            lower: chain.lower,
            upper: chain.upper,
            lower_ck: chain.lhs,
            lower_strong: chain.lhs + chain.correction_quadratic,
            value: chain.plain_bound,
            upper_converse: chain.converse_bound,
            delta,
            correction_converse: chain.correction_converse,
        }
    }

    /// Links of the sandwich that fail by more than `slack`.
    pub fn violations(&self, slack: f64) -> Vec<String> {
        [
            ("lower_ck <= lower_strong", self.lower_strong - self.lower_ck),
            ("lower_strong <= value", self.value - self.lower_strong),
            ("value <= upper_converse", self.upper_converse - self.value),
        ]
        .iter()
        .filter(|(_, gap)| !(*gap >= -slack))
        .map(|(name, gap)| format!("{name} violated by {:e}", -gap))
        .collect()
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.violations(slack).is_empty()
    }
}

fn certified_modulus(kernel: &DivergenceKernel, c: f64) -> Result<()> {
    let Some(modulus) = kernel.strong_modulus() else {
        return Err(Error::NotStronglyConvex(kernel.name.clone()));
    };
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("modulus must be nonnegative, got {c}")));
    }
    if c > modulus * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::ModulusNotCertified {
            requested: c,
            certified: modulus,
        });
    }
    Ok(())
}

fn pair_tolerance(values: &[f64]) -> f64 {
    1e-10 * values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
}

/// Sandwich for the total masses `P = Σ pⱼ`, `Q = Σ qⱼ`:
/// `P f(Q/P) ≤ P f(Q/P) + cΔ ≤ D_f(q, p) ≤` converse bound.
pub fn divergence_bounds(pair: &DistributionPair, kernel: &DivergenceKernel, c: f64) -> Result<Sandwich> {
    let row = vec![vec![1.0; pair.len()]];
    let all_ones = StochasticMatrix::new(row, StochasticKind::Column)?;
    aggregated_divergence_bounds(pair, &all_ones, kernel, c)
}

/// Sandwich for the measures aggregated by a column-stochastic `R`
/// (`m × l`): the divergence between `(⟨p,rᵢ⟩)` and `(⟨q,rᵢ⟩)` sits below
/// `D_f(q, p) − cΔ`.
pub fn aggregated_divergence_bounds(
    pair: &DistributionPair,
    r: &StochasticMatrix,
    kernel: &DivergenceKernel,
    c: f64,
) -> Result<Sandwich> {
    certified_modulus(kernel, c)?;
    if !r.is_column_stochastic() {
        return Err(Error::InvalidMatrix("R must be column stochastic".into()));
    }
    if r.cols() != pair.len() {
        return Err(Error::DimensionMismatch(format!(
            "R is {}x{} but the distributions have length {}",
            r.rows(),
            r.cols(),
            pair.len()
        )));
    }
    let ratios = pair.check_ratios(kernel.interval())?;
    let p_agg = r.apply(&pair.p)?;
    let q_agg = r.apply(&pair.q)?;
    if let Some((row, &value)) = p_agg.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::ZeroAggregateWeight { row, value });
    }
    let entries = r
        .entries()
        .iter()
        .zip(&p_agg)
        .map(|(ri, pi)| ri.iter().zip(&pair.p).map(|(rij, pj)| pj * rij / pi).collect())
        .collect();
    let a = StochasticMatrix::new(entries, StochasticKind::Row)?;
    let y: Vec<f64> = q_agg.iter().zip(&p_agg).map(|(q, p)| q / p).collect();

    let delta = pair.p.iter().zip(&ratios).map(|(p, x)| p * x * x).sum::<f64>()
        - p_agg.iter().zip(&y).map(|(b, y)| b * y * y).sum::<f64>();

    let tol = pair_tolerance(&pair.p).max(pair_tolerance(&ratios));
    let weighted = WeightedPair::verified(
        WeightedVector::new(ratios, pair.p.clone())?,
        WeightedVector::new(y, p_agg)?,
        a,
        tol,
    )?;
    let chain = chain_with_modulus(&weighted, &kernel.generator, c)?;
    Ok(Sandwich::from_chain(kernel, &chain, delta))
}
