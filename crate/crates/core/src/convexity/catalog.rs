use super::{falling_factorial, FunctionSpec, Interval};
use crate::error::{Error, Result};

/// Number of derivative evaluators attached to catalog functions.
const ORDERS: usize = 8;

/// Names accepted by [`named_function`]; `pow:<p>` takes a real exponent.
pub const FUNCTION_NAMES: &[&str] = &[
    "linear", "square", "cube", "exp", "xlogx", "neglog", "pow:<p>",
];

/// Looks up a function by name and restricts it to `interval`.
pub fn named_function(name: &str, interval: Interval) -> Result<FunctionSpec> {
    match name {
        "linear" => Ok(power(name, 1.0, interval)),
        "square" => Ok(power(name, 2.0, interval)),
        "cube" => Ok(power(name, 3.0, interval)),
        "exp" => Ok(exp(interval)),
        "xlogx" => xlogx(interval),
        "neglog" => neglog(interval),
        _ => match name.strip_prefix("pow:") {
            Some(p) => {
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::UnknownFunction(name.to_string()))?;
                if !p.is_finite() {
                    return Err(Error::InvalidParameter(format!("exponent {p}")));
                }
                let integral = p.fract() == 0.0 && p >= 0.0;
                if !integral && interval.lower() <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "t^{p} needs a positive interval"
                    )));
                }
                Ok(power(name, p, interval))
            }
            None => Err(Error::UnknownFunction(name.to_string())),
        },
    }
}

fn power(name: &str, p: f64, interval: Interval) -> FunctionSpec {
    let integral = p.fract() == 0.0 && p >= 0.0 && p <= i32::MAX as f64;
    let eval = move |k: usize, t: f64| -> f64 {
        if integral && k as f64 > p {
            return 0.0;
        }
        let coeff = falling_factorial(p, k);
        if integral {
            coeff * t.powi(p as i32 - k as i32)
        } else {
            coeff * t.powf(p - k as f64)
        }
    };
    let mut spec = FunctionSpec::new(name, interval, move |t| eval(0, t));
    for k in 1..=ORDERS {
        spec = spec.with_derivative(move |t| eval(k, t));
    }
    spec
}

fn exp(interval: Interval) -> FunctionSpec {
    let mut spec = FunctionSpec::new("exp", interval, f64::exp);
    for _ in 0..ORDERS {
        spec = spec.with_derivative(f64::exp);
    }
    spec
}

fn require_positive(name: &str, interval: Interval) -> Result<()> {
    if interval.lower() <= 0.0 {
        Err(Error::InvalidParameter(format!(
            "{name} is only defined for positive arguments"
        )))
    } else {
        Ok(())
    }
}

fn xlogx(interval: Interval) -> Result<FunctionSpec> {
    require_positive("xlogx", interval)?;
    // f' = ln t + 1, f⁽ᵏ⁾ = (-1)^k (k-2)! / t^(k-1) for k >= 2
    let mut spec = FunctionSpec::new("xlogx", interval, |t| t * t.ln())
        .with_derivative(|t| t.ln() + 1.0);
    for k in 2..=ORDERS {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * falling_factorial((k - 2) as f64, k - 2);
        spec = spec.with_derivative(move |t| coeff / t.powi(k as i32 - 1));
    }
    Ok(spec)
}

fn neglog(interval: Interval) -> Result<FunctionSpec> {
    require_positive("neglog", interval)?;
    // f⁽ᵏ⁾ = (-1)^k (k-1)! / t^k
    let mut spec = FunctionSpec::new("neglog", interval, |t| -t.ln());
    for k in 1..=ORDERS {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * falling_factorial((k - 1) as f64, k - 1);
        spec = spec.with_derivative(move |t| coeff / t.powi(k as i32));
    }
    Ok(spec)
}
