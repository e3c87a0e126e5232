//! Strong-convexity refinements of the Jensen, Lah-Ribarič and Sherman
//! inequalities and the converse Sherman bound.
//!
//! For a pair `(y, b) ≺ (x, a)` and `f` strongly convex with modulus `c` on
//! `[α, β]`, [`full_chain`] evaluates
//!
//! ```text
//! Σ bᵢ f(yᵢ) ≤ Σ aⱼ f(xⱼ) − c(Σ aⱼ xⱼ² − Σ bᵢ yᵢ²) ≤ Σ aⱼ f(xⱼ)
//!            ≤ ((Bβ − Σ aⱼxⱼ) f(α) + (Σ aⱼxⱼ − Bα) f(β)) / (β − α) − c Σ aⱼ (β − xⱼ)(xⱼ − α)
//! ```
//!
//! with `B = Σ bᵢ`.

use serde::Serialize;

use crate::convexity::{estimate_strong_modulus, FunctionSpec, ModulusCertificate, DEFAULT_GRID_SIZE};
use crate::error::{Error, Result};
use crate::majorization::{WeightedPair, WeightedVector};

/// Absolute slack allowed on each link of the chain.
pub const CHAIN_SLACK: f64 = 1e-9;

const NORMALIZATION_TOL: f64 = 1e-12;

/// How the strong-convexity modulus is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    /// Largest grid-certified value.
    Auto,
    /// A caller value; rejected if it exceeds the certified modulus.
    Fixed(f64),
    /// A caller value taken on trust.
    Unchecked(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedModulus {
    pub value: f64,
    pub certificate: Option<ModulusCertificate>,
}

/// Resolves `modulus` for second-order strong convexity of `spec`.
pub fn resolve_modulus(spec: &FunctionSpec, modulus: Modulus, grid_size: usize) -> Result<ResolvedModulus> {
    if let Modulus::Unchecked(c) = modulus {
        check_modulus(c)?;
        return Ok(ResolvedModulus {
            value: c,
            certificate: None,
        });
    }
    let certificate = estimate_strong_modulus(spec, 2, grid_size)?;
    if !certificate.is_certified() {
        return Err(Error::NotConvex {
            function: spec.name().to_string(),
            min_scaled: certificate.min_scaled_derivative,
        });
    }
    let value = match modulus {
        Modulus::Auto => certificate.modulus,
        Modulus::Fixed(c) => {
            check_modulus(c)?;
            if !certificate.covers(c) {
                return Err(Error::ModulusNotCertified {
                    requested: c,
                    certified: certificate.modulus,
                });
            }
            c
        }
        Modulus::Unchecked(_) => unreachable!(),
    };
    Ok(ResolvedModulus {
        value,
        certificate: Some(certificate),
    })
}

fn check_modulus(c: f64) -> Result<()> {
    if c.is_finite() && c >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("modulus must be nonnegative, got {c}")))
    }
}

fn check_normalized(x: &WeightedVector) -> Result<()> {
    let total = x.weight_sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::WeightsNotNormalized(total));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JensenBound {
    /// `f(x̄)`
    pub lhs: f64,
    /// `Σ aᵢ f(xᵢ) − c Σ aᵢ (xᵢ − x̄)²`
    pub rhs: f64,
    pub variance_term: f64,
}

/// Jensen's inequality for a strongly convex `f`; weights must sum to one.
pub fn jensen_strong(x: &WeightedVector, spec: &FunctionSpec, c: f64) -> Result<JensenBound> {
    check_normalized(x)?;
    check_modulus(c)?;
    x.check_within(spec.interval())?;
    let mean = x.weighted_sum();
    let variance_term = x.weighted_sum_of(|t| (t - mean) * (t - mean));
    Ok(JensenBound {
        lhs: spec.eval(mean),
        rhs: x.weighted_sum_of(|t| spec.eval(t)) - c * variance_term,
        variance_term,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LahRibaricBound {
    /// `Σ aⱼ f(xⱼ)`
    pub lhs: f64,
    pub rhs: f64,
    /// `c Σ aⱼ (β − xⱼ)(xⱼ − α)`
    pub correction: f64,
}

/// `Σ aⱼ (β − xⱼ)(xⱼ − α)`
fn endpoint_spread(x: &WeightedVector, lower: f64, upper: f64) -> f64 {
    x.weighted_sum_of(|t| (upper - t) * (t - lower))
}

/// Chord bound at the endpoints, tightened by the modulus.
pub fn lah_ribaric_strong(x: &WeightedVector, spec: &FunctionSpec, c: f64) -> Result<LahRibaricBound> {
    check_normalized(x)?;
    check_modulus(c)?;
    x.check_within(spec.interval())?;
    let (lo, hi) = (spec.interval().lower(), spec.interval().upper());
    let width = hi - lo;
    let mean = x.weighted_sum();
    let correction = c * endpoint_spread(x, lo, hi);
    Ok(LahRibaricBound {
        lhs: x.weighted_sum_of(|t| spec.eval(t)),
        rhs: (hi - mean) / width * spec.eval(lo) + (mean - lo) / width * spec.eval(hi) - correction,
        correction,
    })
}

/// The three leftmost terms of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShermanBound {
    pub lhs: f64,
    pub strong_bound: f64,
    pub plain_bound: f64,
    /// `c(Σ aⱼ xⱼ² − Σ bᵢ yᵢ²)`
    pub correction_quadratic: f64,
}

/// Sherman's inequality with the quadratic strong-convexity correction.
pub fn sherman_strong(pair: &WeightedPair, spec: &FunctionSpec, c: f64) -> Result<ShermanBound> {
    check_modulus(c)?;
    let (x, y) = (pair.source(), pair.target());
    x.check_within(spec.interval())?;
    y.check_within(spec.interval())?;
    let plain_bound = x.weighted_sum_of(|t| spec.eval(t));
    let correction_quadratic = c * (x.weighted_sum_of(|t| t * t) - y.weighted_sum_of(|t| t * t));
    Ok(ShermanBound {
        lhs: y.weighted_sum_of(|t| spec.eval(t)),
        strong_bound: plain_bound - correction_quadratic,
        plain_bound,
        correction_quadratic,
    })
}

/// Right-hand side of the converse Sherman inequality for target weight
/// total `b_total = Σ bᵢ`.
pub fn converse_sherman_strong(x: &WeightedVector, b_total: f64, spec: &FunctionSpec, c: f64) -> Result<f64> {
    check_modulus(c)?;
    if !(b_total > 0.0) || !b_total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target weight total must be positive, got {b_total}"
        )));
    }
    x.check_within(spec.interval())?;
    let (lo, hi) = (spec.interval().lower(), spec.interval().upper());
    let width = hi - lo;
    let first_moment = x.weighted_sum();
    Ok((b_total * hi - first_moment) / width * spec.eval(lo)
        + (first_moment - b_total * lo) / width * spec.eval(hi)
        - c * endpoint_spread(x, lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Specialization {
    /// `m = 1`, `b = (1)`.
    Jensen,
    /// `m = l`, `b = (1, …, 1)`.
    Majorization,
    /// `m = l`, all weights equal.
    Fuchs,
    General,
}

fn all_equal(values: impl Iterator<Item = f64>, to: f64) -> bool {
    values.into_iter().all(|v| (v - to).abs() <= NORMALIZATION_TOL * to.abs().max(1.0))
}

fn classify(pair: &WeightedPair) -> Specialization {
    let (a, b) = (pair.source().weights(), pair.target().weights());
    if b.len() == 1 && (b[0] - 1.0).abs() <= NORMALIZATION_TOL {
        Specialization::Jensen
    } else if a.len() == b.len() && all_equal(b.iter().copied(), 1.0) {
        Specialization::Majorization
    } else if a.len() == b.len() && all_equal(a.iter().chain(b).copied(), b[0]) {
        Specialization::Fuchs
    } else {
        Specialization::General
    }
}

/// The evaluated chain, flat for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundChain {
    pub lhs: f64,
    pub strong_bound: f64,
    pub plain_bound: f64,
    pub converse_bound: f64,
    pub correction_quadratic: f64,
    pub correction_converse: f64,
    pub modulus: f64,
    pub function: String,
    pub lower: f64,
    pub upper: f64,
    pub source_len: usize,
    pub target_len: usize,
    pub weight_total: f64,
    pub specialization: Specialization,
    /// `m = l` with every weight equal.
    pub fuchs: bool,
    pub verified: bool,
    pub warnings: Vec<String>,
}

impl BoundChain {
    /// Links of the chain that fail by more than `slack`.
    pub fn violations(&self, slack: f64) -> Vec<String> {
        let links = [
            ("lhs <= strong_bound", self.strong_bound - self.lhs),
            ("strong_bound <= plain_bound", self.plain_bound - self.strong_bound),
            ("plain_bound <= converse_bound", self.converse_bound - self.plain_bound),
            ("correction_quadratic >= 0", self.correction_quadratic),
        ];
        links
            .iter()
            .filter(|(_, gap)| !(*gap >= -slack))
            .map(|(name, gap)| format!("{name} violated by {:e}", -gap))
            .collect()
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.violations(slack).is_empty()
    }
}

/// Evaluates the whole chain with a modulus resolved against `spec`.
pub fn full_chain(pair: &WeightedPair, spec: &FunctionSpec, modulus: Modulus) -> Result<BoundChain> {
    let resolved = resolve_modulus(spec, modulus, DEFAULT_GRID_SIZE)?;
    chain_with_modulus(pair, spec, resolved.value)
}

/// [`full_chain`] with a modulus the caller has already resolved.
pub fn chain_with_modulus(pair: &WeightedPair, spec: &FunctionSpec, c: f64) -> Result<BoundChain> {
    check_modulus(c)?;
    let (x, y) = (pair.source(), pair.target());
    let interval = spec.interval();
    let specialization = classify(pair);
    let mut warnings = Vec::new();
    if !pair.is_verified() {
        warnings.push("weighted majorization assumed, not verified".to_string());
    }
    let weight_total = y.weight_sum();
    let mut chain = BoundChain {
        lhs: 0.0,
        strong_bound: 0.0,
        plain_bound: 0.0,
        converse_bound: 0.0,
        correction_quadratic: 0.0,
        correction_converse: 0.0,
        modulus: c,
        function: spec.name().to_string(),
        lower: interval.lower(),
        upper: interval.upper(),
        source_len: x.len(),
        target_len: y.len(),
        weight_total,
        specialization,
        fuchs: x.len() == y.len() && matches!(specialization, Specialization::Majorization | Specialization::Fuchs),
        verified: pair.is_verified(),
        warnings,
    };
    if weight_total == 0.0 {
        x.check_within(interval)?;
        y.check_within(interval)?;
        log::warn!("all target weights are zero; the chain is vacuous");
        chain.warnings.push("all target weights are zero; chain is vacuous".into());
        return Ok(chain);
    }
    let sherman = sherman_strong(pair, spec, c)?;
    chain.lhs = sherman.lhs;
    chain.strong_bound = sherman.strong_bound;
    chain.plain_bound = sherman.plain_bound;
    chain.correction_quadratic = sherman.correction_quadratic;
    chain.converse_bound = converse_sherman_strong(x, weight_total, spec, c)?;
    chain.correction_converse = c * endpoint_spread(x, interval.lower(), interval.upper());
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::{named_function, Interval};
    use crate::majorization::{StochasticKind, StochasticMatrix};

    fn unit_square() -> FunctionSpec {
        named_function("square", Interval::new(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn jensen_examples() {
        let x = WeightedVector::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let j = jensen_strong(&x, &unit_square(), 1.0).unwrap();
        assert_eq!(j.lhs, 0.25);
        assert_eq!(j.rhs, 0.25);

        let single = WeightedVector::new(vec![0.3], vec![1.0]).unwrap();
        let j = jensen_strong(&single, &unit_square(), 1.0).unwrap();
        assert_eq!(j.lhs, j.rhs);

        let exp = named_function("exp", Interval::new(0.0, 1.0).unwrap()).unwrap();
        let third = 1.0 / 3.0;
        let x = WeightedVector::new(vec![0.0, 0.5, 1.0], vec![third; 3]).unwrap();
        let j = jensen_strong(&x, &exp, 0.5).unwrap();
        let mean = (0.0 + 0.5 + 1.0) / 3.0;
        let lhs = f64::exp(mean);
        let var = ((0.0 - mean).powi(2) + (0.5 - mean).powi(2) + (1.0 - mean).powi(2)) / 3.0;
        let rhs = (1.0 + 0.5f64.exp() + 1f64.exp()) / 3.0 - 0.5 * var;
        assert!((j.lhs - lhs).abs() < 1e-15 && (j.rhs - rhs).abs() < 1e-15);
        assert!(j.lhs <= j.rhs);
    }

    #[test]
    fn jensen_errors() {
        let x = WeightedVector::new(vec![0.0, 1.0], vec![0.5, 0.6]).unwrap();
        assert!(matches!(jensen_strong(&x, &unit_square(), 1.0), Err(Error::WeightsNotNormalized(_))));
        let x = WeightedVector::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(jensen_strong(&x, &unit_square(), 1.0), Err(Error::PointOutOfInterval { .. })));
    }

    #[test]
    fn lah_ribaric_examples() {
        let x = WeightedVector::new(vec![0.5], vec![1.0]).unwrap();
        let lr = lah_ribaric_strong(&x, &unit_square(), 1.0).unwrap();
        assert_eq!((lr.lhs, lr.rhs), (0.25, 0.25));

        let x = WeightedVector::new(vec![0.0], vec![1.0]).unwrap();
        let lr = lah_ribaric_strong(&x, &unit_square(), 1.0).unwrap();
        assert_eq!(lr.lhs, lr.rhs);
        assert_eq!(lr.correction, 0.0);
    }

    #[test]
    fn converse_reduces_to_lah_ribaric() {
        let f = named_function("exp", Interval::new(0.0, 1.0).unwrap()).unwrap();
        let x = WeightedVector::new(vec![0.1, 0.7, 0.9], vec![0.2, 0.5, 0.3]).unwrap();
        let lr = lah_ribaric_strong(&x, &f, 0.5).unwrap();
        let conv = converse_sherman_strong(&x, 1.0, &f, 0.5).unwrap();
        assert!((lr.rhs - conv).abs() < 1e-15);

        let at_lower = WeightedVector::new(vec![0.0, 0.0], vec![1.5, 0.5]).unwrap();
        let conv = converse_sherman_strong(&at_lower, 2.0, &f, 0.5).unwrap();
        assert_eq!(conv, 2.0 * f.eval(0.0));
        assert!(converse_sherman_strong(&at_lower, 0.0, &f, 0.5).is_err());
    }

    #[test]
    fn quadratic_is_the_equality_case() {
        let a = StochasticMatrix::new(
            vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.4, 0.0]],
            StochasticKind::Row,
        )
        .unwrap();
        let pair = WeightedPair::generate(vec![0.1, 0.5, 0.9], vec![0.7, 1.3], a).unwrap();
        let chain = full_chain(&pair, &unit_square(), Modulus::Auto).unwrap();
        assert_eq!(chain.modulus, 1.0);
        assert!((chain.lhs - chain.strong_bound).abs() <= 1e-12);
        assert!(chain.holds(CHAIN_SLACK));
        assert_eq!(chain.specialization, Specialization::General);
    }

    #[test]
    fn modulus_cannot_be_inflated() {
        let f = unit_square();
        assert!(matches!(
            resolve_modulus(&f, Modulus::Fixed(1.5), 101),
            Err(Error::ModulusNotCertified { .. })
        ));
        assert_eq!(resolve_modulus(&f, Modulus::Fixed(0.5), 101).unwrap().value, 0.5);
        let r = resolve_modulus(&f, Modulus::Unchecked(1.5), 101).unwrap();
        assert_eq!(r.value, 1.5);
        assert!(r.certificate.is_none());
        let concave = FunctionSpec::new("concave", f.interval(), |t| -t * t)
            .with_derivative(|t| -2.0 * t)
            .with_derivative(|_| -2.0);
        assert!(matches!(resolve_modulus(&concave, Modulus::Auto, 11), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn jensen_specialization_matches_chain() {
        let exp = named_function("exp", Interval::new(0.0, 1.0).unwrap()).unwrap();
        let a = vec![0.25, 0.25, 0.5];
        let row = StochasticMatrix::new(vec![a.clone()], StochasticKind::Row).unwrap();
        let pair = WeightedPair::generate(vec![0.0, 0.4, 1.0], vec![1.0], row).unwrap();
        let chain = chain_with_modulus(&pair, &exp, 0.5).unwrap();
        assert_eq!(chain.specialization, Specialization::Jensen);
        let x = WeightedVector::new(vec![0.0, 0.4, 1.0], a).unwrap();
        let j = jensen_strong(&x, &exp, 0.5).unwrap();
        let lr = lah_ribaric_strong(&x, &exp, 0.5).unwrap();
        assert!((chain.lhs - j.lhs).abs() < 1e-15);
        assert!((chain.strong_bound - j.rhs).abs() < 1e-15);
        assert!((chain.converse_bound - lr.rhs).abs() < 1e-15);
    }

    #[test]
    fn zero_weights_give_vacuous_chain() {
        let pair = WeightedPair::generate(vec![0.2, 0.8], vec![0.0, 0.0], StochasticMatrix::identity(2)).unwrap();
        let chain = chain_with_modulus(&pair, &unit_square(), 1.0).unwrap();
        assert_eq!(chain.lhs, 0.0);
        assert_eq!(chain.converse_bound, 0.0);
        assert_eq!(chain.warnings.len(), 1);
    }

    #[test]
    fn majorization_and_fuchs_flags() {
        let ds = StochasticMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]], StochasticKind::Doubly).unwrap();
        let pair = WeightedPair::generate(vec![0.0, 1.0], vec![1.0, 1.0], ds.clone()).unwrap();
        let chain = chain_with_modulus(&pair, &unit_square(), 0.0).unwrap();
        assert_eq!(chain.specialization, Specialization::Majorization);
        assert!(chain.fuchs);
        let pair = WeightedPair::generate(vec![0.0, 1.0], vec![0.3, 0.3], ds).unwrap();
        assert_eq!(classify(&pair), Specialization::Fuchs);
    }
}
