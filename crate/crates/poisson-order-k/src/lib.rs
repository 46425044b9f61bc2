//! Exact pmf of the Poisson distribution of order k.
//!
//! The Poisson distribution of order k is the compound Poisson distribution
//! with pgf weights a₁ = … = a_k = λ and all higher weights zero; at k = 1 it
//! is the standard Poisson distribution. Every pmf value p_n has the form
//! `e^{-kλ}` times a polynomial in λ with positive rational coefficients.
//!
//! This crate constructs that polynomial exactly by three independent
//! formulas (a partition-sum oracle, the Kostadinova–Minkova combinatorial
//! sum, and a blocked combinatorial sum whose summation limits skip every
//! term that would cancel identically to zero), plus a k = 2 closed form,
//! and proves them equal on a finite grid. It also counts the monomial
//! contributions each combinatorial sum generates, quantifying how many
//! identically-cancelling terms the blocked sum avoids.

pub mod engines;
pub mod evaluate;
pub mod exact;

pub use engines::{
    alt_polynomial, alt_polynomial_parts, enumerate_compositions, k2_polynomial, km_polynomial,
    oracle_polynomial, pmf_polynomial, term_census, AltParts, BlockIndex, Composition, EngineError,
    MethodKind, TermCensus,
};
pub use evaluate::{evaluate_pmf, normalization_defect, pmf_table, EvaluateError, OrderKParams, PmfEntry, PmfTable};
pub use exact::{binomial, factorial, LambdaPolynomial, Rational};
