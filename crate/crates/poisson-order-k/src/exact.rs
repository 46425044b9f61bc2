//! Exact rational arithmetic, memoized factorials/binomials, and the sparse
//! polynomial in λ that every pmf engine produces.
//!
//! Every pmf value of the order-k family is `e^{-kλ}` times a polynomial in λ
//! with positive rational coefficients. The engines construct that polynomial
//! exactly; cancellation between terms must be identical, not approximate, so
//! no floats appear anywhere in this module.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use thiserror::Error;

/// Arbitrary-precision rational in canonical reduced form.
///
/// Invariants (maintained by `BigRational`): denominator > 0, gcd of numerator
/// and denominator is 1, zero is `0/1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`, reduced on construction. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rational(BigRational::new(num, den))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn to_f64(&self) -> f64 {
        // Falls back to a quotient of float conversions only for operands
        // outside f64 range; in-scope coefficients convert directly.
        self.0.to_f64().unwrap_or_else(|| {
            let n = self.0.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.0.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Parse a plain decimal string such as "0.5" or "2" into an exact value.
    pub fn from_decimal_str(s: &str) -> Result<Self, ParseRationalError> {
        let s = s.trim();
        let (sign, digits) = match s.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParseRationalError(s.to_string()));
        }
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) {
            return Err(ParseRationalError(s.to_string()));
        }
        let mut num = if int_part.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int_part).map_err(|_| ParseRationalError(s.to_string()))?
        };
        let mut den = BigInt::one();
        for b in frac_part.bytes() {
            num = num * 10 + (b - b'0');
            den *= 10;
        }
        Ok(Rational(BigRational::new(num * sign, den)))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid rational literal: {0}")]
pub struct ParseRationalError(String);

impl fmt::Display for Rational {
    /// "num/den" in lowest terms, "num" when the denominator is 1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_int = |p: &str| BigInt::from_str(p).map_err(|_| ParseRationalError(s.to_string()));
        match s.split_once('/') {
            Some((n, d)) => {
                let den = parse_int(d)?;
                if den.is_zero() {
                    return Err(ParseRationalError(s.to_string()));
                }
                Ok(Rational(BigRational::new(parse_int(n)?, den)))
            }
            None => Ok(Rational(BigRational::from_integer(parse_int(s)?))),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(std::ops::$trait::$method(self.0, rhs.0))
            }
        }
        impl std::ops::$trait for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(std::ops::$trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::ops::Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

// Process-wide factorial table; grown on demand, never shrunk. Concurrent
// callers see identical values regardless of interleaving.
static FACTORIALS: Lazy<Mutex<Vec<BigUint>>> = Lazy::new(|| Mutex::new(vec![BigUint::one()]));

/// m! as an arbitrary-precision integer.
pub fn factorial(m: u64) -> BigUint {
    let mut table = FACTORIALS.lock().unwrap();
    while (table.len() as u64) <= m {
        let next = table.last().unwrap() * BigUint::from(table.len());
        table.push(next);
    }
    table[m as usize].clone()
}

/// C(n, j) with C(n, j) = 0 for j < 0 or j > n.
///
/// The out-of-range convention is load-bearing: the inner sums of the blocked
/// pmf formula index binomials past the top row and expect zero.
pub fn binomial(n: u64, j: i64) -> BigUint {
    if j < 0 || (j as u64) > n {
        return BigUint::zero();
    }
    let j = j as u64;
    let j = j.min(n - j);
    static ROWS: Lazy<Mutex<Vec<Vec<BigUint>>>> = Lazy::new(|| Mutex::new(Vec::new()));
    let mut rows = ROWS.lock().unwrap();
    while (rows.len() as u64) <= n {
        let r = rows.len() as u64;
        // Only the left half of each row; the rest is symmetric.
        let half: Vec<BigUint> = (0..=r / 2)
            .map(|c| factorial(r) / (factorial(c) * factorial(r - c)))
            .collect();
        rows.push(half);
    }
    rows[n as usize][j as usize].clone()
}

/// 1/m! as a rational, the ubiquitous pmf coefficient.
pub fn inv_factorial(m: u64) -> Rational {
    Rational::from_ratio(BigInt::one(), factorial(m).into())
}

/// Sparse polynomial in λ with exact rational coefficients.
///
/// Stored coefficients are never zero; the zero polynomial has empty storage.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LambdaPolynomial {
    coeffs: BTreeMap<u64, Rational>,
}

impl LambdaPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(degree: u64, coeff: Rational) -> Self {
        let mut p = Self::default();
        p.add_term(degree, coeff);
        p
    }

    /// Add `coeff · λ^degree`, pruning the entry if it cancels to zero.
    pub fn add_term(&mut self, degree: u64, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.coeffs.entry(degree) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest stored degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Lowest stored degree; `None` for the zero polynomial.
    pub fn min_degree(&self) -> Option<u64> {
        self.coeffs.keys().next().copied()
    }

    pub fn coefficient(&self, degree: u64) -> Rational {
        self.coeffs.get(&degree).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Terms in ascending degree order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.coeffs.iter().map(|(d, c)| (*d, c))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::default();
        for (d, c) in &self.coeffs {
            out.add_term(*d, c * s);
        }
        out
    }

    /// Evaluate at a rational λ, exactly.
    pub fn eval_exact(&self, lambda: &Rational) -> Rational {
        // Horner over the sparse degree set, highest degree first.
        let mut acc = Rational::zero();
        let mut prev_degree: Option<u64> = None;
        for (d, c) in self.coeffs.iter().rev() {
            if let Some(p) = prev_degree {
                for _ in 0..(p - d) {
                    acc = &acc * lambda;
                }
            }
            acc = &acc + c;
            prev_degree = Some(*d);
        }
        if let Some(d) = prev_degree {
            for _ in 0..d {
                acc = &acc * lambda;
            }
        }
        acc
    }

    /// Evaluate at a float λ via Horner over the sparse degree set.
    ///
    /// All in-scope polynomials have positive coefficients, so the descending
    /// Horner pass is forward-stable.
    pub fn eval_f64(&self, lambda: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev_degree: Option<u64> = None;
        for (d, c) in self.coeffs.iter().rev() {
            if let Some(p) = prev_degree {
                acc *= lambda.powi((p - d) as i32);
            }
            acc += c.to_f64();
            prev_degree = Some(*d);
        }
        if let Some(d) = prev_degree {
            acc *= lambda.powi(d as i32);
        }
        acc
    }

    /// JSON object mapping degree (string key) to rational string, descending
    /// degree, e.g. `{"2":"1/2","1":"1"}`. Emission order is fixed so that
    /// parse → re-emit is byte-identical.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        for (i, (d, c)) in self.coeffs.iter().rev().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{}\":\"{}\"", d, c));
        }
        out.push('}');
        out
    }

    pub fn from_json(s: &str) -> Result<Self, PolynomialJsonError> {
        let value: serde_json::Value =
            serde_json::from_str(s).map_err(|e| PolynomialJsonError(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| PolynomialJsonError("expected a JSON object".into()))?;
        let mut poly = Self::default();
        for (k, v) in obj {
            let degree: u64 = k
                .parse()
                .map_err(|_| PolynomialJsonError(format!("bad degree key: {k}")))?;
            let coeff: Rational = v
                .as_str()
                .ok_or_else(|| PolynomialJsonError(format!("non-string coefficient at degree {k}")))?
                .parse()
                .map_err(|e: ParseRationalError| PolynomialJsonError(e.to_string()))?;
            if coeff.is_zero() {
                return Err(PolynomialJsonError(format!("explicit zero coefficient at degree {k}")));
            }
            if poly.coeffs.insert(degree, coeff).is_some() {
                return Err(PolynomialJsonError(format!("duplicate degree {k}")));
            }
        }
        Ok(poly)
    }

    /// Human-readable form, descending degree: "λ^2/2 + λ".
    pub fn display_text(&self, ascii: bool) -> String {
        let sym = if ascii { "L" } else { "λ" };
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (d, c)) in self.coeffs.iter().rev().enumerate() {
            let positive = c.is_positive();
            if i == 0 {
                if !positive {
                    out.push('-');
                }
            } else {
                out.push_str(if positive { " + " } else { " - " });
            }
            let num = c.numer().magnitude();
            let den = c.denom();
            if *d == 0 {
                out.push_str(&num.to_string());
                if !den.is_one() {
                    out.push_str(&format!("/{den}"));
                }
                continue;
            }
            if !num.is_one() {
                out.push_str(&num.to_string());
            }
            out.push_str(sym);
            if *d > 1 {
                out.push_str(&format!("^{d}"));
            }
            if !den.is_one() {
                out.push_str(&format!("/{den}"));
            }
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid polynomial JSON: {0}")]
pub struct PolynomialJsonError(String);

impl std::ops::Add for &LambdaPolynomial {
    type Output = LambdaPolynomial;
    fn add(self, rhs: &LambdaPolynomial) -> LambdaPolynomial {
        let mut out = self.clone();
        for (d, c) in &rhs.coeffs {
            out.add_term(*d, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &LambdaPolynomial {
    type Output = LambdaPolynomial;
    fn sub(self, rhs: &LambdaPolynomial) -> LambdaPolynomial {
        let mut out = self.clone();
        for (d, c) in &rhs.coeffs {
            out.add_term(*d, -c);
        }
        out
    }
}
