//! Turns exact pmf polynomials into probabilities.
//!
//! A pmf value is `e^{-kλ}` times the engine polynomial. The float path
//! evaluates the polynomial by sparse Horner and multiplies by `exp(-kλ)`;
//! the log path takes `ln(poly(λ)) - kλ` and stays finite in regimes where
//! the product underflows double precision.

use thiserror::Error;

use crate::engines::{pmf_polynomial, EngineError, MethodKind};
use crate::exact::LambdaPolynomial;

/// The pair (k, λ): order and rate of the distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderKParams {
    k: u64,
    lambda: f64,
}

impl OrderKParams {
    pub fn new(k: u64, lambda: f64) -> Result<Self, EvaluateError> {
        if k < 1 {
            return Err(EvaluateError::InvalidOrder { k });
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(EvaluateError::InvalidRate { lambda });
        }
        Ok(OrderKParams { k, lambda })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvaluateError {
    #[error("order k must be at least 1, got {k}")]
    InvalidOrder { k: u64 },
    #[error("rate lambda must be a positive finite real, got {lambda}")]
    InvalidRate { lambda: f64 },
    #[error("polynomial evaluated to a non-positive value; in-scope pmf polynomials have positive coefficients")]
    NonPositivePolyValue,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// One pmf value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmfEntry {
    pub n: u64,
    pub probability: f64,
    pub log_probability: f64,
}

/// Evaluate `e^{-kλ} · poly(λ)`.
///
/// `poly` must be a pmf polynomial for some n; its index is recovered from the
/// degree (p_n has degree n, and p_0 = 1 has degree 0).
pub fn evaluate_pmf(poly: &LambdaPolynomial, params: &OrderKParams) -> Result<PmfEntry, EvaluateError> {
    let n = poly.degree().unwrap_or(0);
    let value = poly.eval_f64(params.lambda);
    if !(value > 0.0) {
        return Err(EvaluateError::NonPositivePolyValue);
    }
    let k_lambda = params.k as f64 * params.lambda;
    let log_probability = value.ln() - k_lambda;
    Ok(PmfEntry {
        n,
        probability: value * (-k_lambda).exp(),
        log_probability,
    })
}

/// Dense pmf table for n = 0..=n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    pub params: OrderKParams,
    pub method: MethodKind,
    pub entries: Vec<PmfEntry>,
    pub cumulative: f64,
}

pub fn pmf_table(params: &OrderKParams, n_max: u64, method: MethodKind) -> Result<PmfTable, EvaluateError> {
    let mut entries = Vec::with_capacity(n_max as usize + 1);
    let mut cumulative = 0.0;
    for n in 0..=n_max {
        let poly = pmf_polynomial(method, params.k, n)?;
        let entry = evaluate_pmf(&poly, params)?;
        cumulative += entry.probability;
        entries.push(entry);
    }
    Ok(PmfTable {
        params: *params,
        method,
        entries,
        cumulative,
    })
}

/// `1 − Σ_{n=0}^{n_max} p_n`: the probability mass beyond the table.
pub fn normalization_defect(params: &OrderKParams, n_max: u64, method: MethodKind) -> Result<f64, EvaluateError> {
    Ok(1.0 - pmf_table(params, n_max, method)?.cumulative)
}
