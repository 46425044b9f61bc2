//! The four pmf-polynomial constructors.
//!
//! Each engine returns the exact polynomial factor of p_n, without the
//! `e^{-kλ}` prefactor:
//!
//! - [`oracle_polynomial`]: direct enumeration of the constrained compositions
//!   n₁ + 2n₂ + … + k·n_k = n. Slow but unarguable; the ground truth the other
//!   engines are checked against.
//! - [`km_polynomial`]: the Kostadinova–Minkova combinatorial sum, whose tail
//!   blocks have length k+1 and whose inner sums generate low-degree terms
//!   that cancel identically.
//! - [`alt_polynomial`]: the blocked sum with blocks of length k. Its summation
//!   limits start at the polynomial's true minimum degree r+1 where
//!   r = ⌊(n−1)/k⌋, so no identically-cancelling terms are generated.
//! - [`k2_polynomial`]: the k = 2 closed form.
//!
//! The three combinatorial engines are proven equal on a finite grid by the
//! test suite. Equality beyond the tested grid is conjectural from this
//! crate's point of view: the blocked sum is validated here by oracle
//! equivalence, not by proof.

use num_bigint::BigInt;
use thiserror::Error;

use crate::exact::{binomial, LambdaPolynomial, Rational};

/// Names the four engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Oracle,
    Km,
    Alt,
    K2,
}

impl MethodKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodKind::Oracle => "oracle",
            MethodKind::Km => "km",
            MethodKind::Alt => "alt",
            MethodKind::K2 => "k2",
        }
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("the k=2 closed form requires k = 2, got k = {k}")]
    K2WithWrongK { k: u64 },
    #[error("term census is defined for the km and alt engines, not {method}")]
    CensusUnsupportedMethod { method: MethodKind },
}

/// Block decomposition n = r·k + m with 1 ≤ m ≤ k, so r = ⌊(n−1)/k⌋.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockIndex {
    pub r: u64,
    pub m: u64,
}

impl BlockIndex {
    /// Requires n ≥ 1 and k ≥ 1.
    pub fn from_n(k: u64, n: u64) -> Self {
        assert!(k >= 1 && n >= 1);
        let r = (n - 1) / k;
        BlockIndex { r, m: n - r * k }
    }

    pub fn n(&self, k: u64) -> u64 {
        self.r * k + self.m
    }
}

/// One solution (n₁, …, n_k) of n₁ + 2n₂ + … + k·n_k = n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub counts: Vec<u64>,
}

impl Composition {
    /// Σ nᵢ, the degree of this composition's monomial.
    pub fn part_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Σ i·nᵢ, the n this composition decomposes.
    pub fn weighted_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u64 + 1) * c)
            .sum()
    }
}

/// Yields every (n₁, …, n_k) with Σ i·nᵢ = n, each exactly once.
///
/// Iterative odometer over (n₂, …, n_k); n₁ is forced by the constraint, so
/// memory stays O(k) regardless of how many compositions exist.
pub fn enumerate_compositions(k: u64, n: u64) -> CompositionIter {
    assert!(k >= 1);
    CompositionIter {
        k: k as usize,
        n,
        counts: vec![0; k as usize],
        used: 0,
        done: false,
    }
}

pub struct CompositionIter {
    k: usize,
    n: u64,
    // counts[i] holds n_{i+1}; counts[0] is derived, not part of the odometer.
    counts: Vec<u64>,
    // Σ_{i≥2} i·nᵢ for the current odometer state.
    used: u64,
    done: bool,
}

impl Iterator for CompositionIter {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        loop {
            if self.done {
                return None;
            }
            let emit = if self.used <= self.n {
                self.counts[0] = self.n - self.used;
                Some(Composition {
                    counts: self.counts.clone(),
                })
            } else {
                None
            };
            self.advance();
            if emit.is_some() {
                return emit;
            }
        }
    }
}

impl CompositionIter {
    fn advance(&mut self) {
        for idx in 1..self.k {
            let weight = idx as u64 + 1;
            self.counts[idx] += 1;
            self.used += weight;
            if self.used <= self.n {
                return;
            }
            self.used -= weight * self.counts[idx];
            self.counts[idx] = 0;
        }
        self.done = true;
    }
}

/// Partition-sum engine: Σ over compositions of λ^{n₁+…+n_k}/(n₁!⋯n_k!).
pub fn oracle_polynomial(k: u64, n: u64) -> LambdaPolynomial {
    let mut poly = LambdaPolynomial::zero();
    for comp in enumerate_compositions(k, n) {
        let mut denom = BigInt::from(1);
        for &c in &comp.counts {
            denom *= BigInt::from(crate::exact::factorial(c));
        }
        poly.add_term(comp.part_count(), Rational::from_ratio(BigInt::from(1), denom));
    }
    poly
}

/// One generated monomial, before any merging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contribution {
    pub degree: u64,
    pub coeff: Rational,
}

fn head_sum_contributions(n: u64, j_start: u64, out: &mut Vec<Contribution>) {
    for j in j_start..=n {
        let coeff = Rational::from_ratio(
            BigInt::from(binomial(n - 1, j as i64 - 1)),
            BigInt::from(crate::exact::factorial(j)),
        );
        out.push(Contribution { degree: j, coeff });
    }
}

fn signed_inner_coeff(i: u64, j: u64, top: u64, col: u64) -> Rational {
    // Coefficient of λ^{i+j} contributed through the correction sum, with the
    // overall subtraction folded in: (−1)^i · C(top, col) / (i! j!).
    let mut num = BigInt::from(binomial(top, col as i64));
    if i % 2 == 1 {
        num = -num;
    }
    let den = BigInt::from(crate::exact::factorial(i) * crate::exact::factorial(j));
    Rational::from_ratio(num, den)
}

/// Every monomial the Kostadinova–Minkova sum generates for p_n, in
/// evaluation order, before merging.
pub fn km_contributions(k: u64, n: u64) -> Vec<Contribution> {
    assert!(k >= 1);
    let mut out = Vec::new();
    if n == 0 {
        out.push(Contribution {
            degree: 0,
            coeff: Rational::one(),
        });
        return out;
    }
    head_sum_contributions(n, 1, &mut out);
    if n > k {
        // Tail blocks of length k+1: n = ℓ(k+1) + m with 0 ≤ m ≤ k.
        let l = n / (k + 1);
        for i in 1..=l {
            let upper = n - i * (k + 1);
            for j in 0..=upper {
                out.push(Contribution {
                    degree: i + j,
                    coeff: signed_inner_coeff(i, j, upper + i - 1, j + i - 1),
                });
            }
        }
    }
    out
}

/// Every monomial the blocked sum generates for p_n, in evaluation order,
/// before merging.
pub fn alt_contributions(k: u64, n: u64) -> Vec<Contribution> {
    assert!(k >= 1);
    let mut out = Vec::new();
    if n == 0 {
        out.push(Contribution {
            degree: 0,
            coeff: Rational::one(),
        });
        return out;
    }
    if n <= k {
        head_sum_contributions(n, 1, &mut out);
        return out;
    }
    let r = BlockIndex::from_n(k, n).r;
    head_sum_contributions(n, r + 1, &mut out);
    for i in 1..=r {
        // Empty when r+1-i > n-ik-1; such inner sums contribute nothing.
        let lower = r + 1 - i;
        let upper = n - i * k - 1;
        for j in lower..=upper {
            out.push(Contribution {
                degree: i + j,
                coeff: signed_inner_coeff(i, j, upper, j + i - 1),
            });
        }
    }
    out
}

fn merge(contributions: Vec<Contribution>) -> LambdaPolynomial {
    let mut poly = LambdaPolynomial::zero();
    for c in contributions {
        poly.add_term(c.degree, c.coeff);
    }
    poly
}

/// Kostadinova–Minkova engine.
pub fn km_polynomial(k: u64, n: u64) -> LambdaPolynomial {
    merge(km_contributions(k, n))
}

/// Blocked-sum engine.
pub fn alt_polynomial(k: u64, n: u64) -> LambdaPolynomial {
    merge(alt_contributions(k, n))
}

/// The blocked sum split into its two summands: `polynomial = head − correction`.
///
/// `correction` is Σ_{i=1}^{r} (−1)^{i−1} (λ^i/i!) Σ_j …, with its own sign,
/// i.e. the quantity that is subtracted from the head sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltParts {
    pub head: LambdaPolynomial,
    pub correction: LambdaPolynomial,
}

impl AltParts {
    pub fn combined(&self) -> LambdaPolynomial {
        &self.head - &self.correction
    }
}

pub fn alt_polynomial_parts(k: u64, n: u64) -> AltParts {
    assert!(k >= 1);
    if n == 0 {
        return AltParts {
            head: LambdaPolynomial::one(),
            correction: LambdaPolynomial::zero(),
        };
    }
    let mut head_contribs = Vec::new();
    let j_start = if n <= k { 1 } else { BlockIndex::from_n(k, n).r + 1 };
    head_sum_contributions(n, j_start, &mut head_contribs);
    let head = merge(head_contribs);
    let full = alt_polynomial(k, n);
    AltParts {
        correction: &head - &full,
        head,
    }
}

/// Dispatch to the engine named by `method`.
pub fn pmf_polynomial(method: MethodKind, k: u64, n: u64) -> Result<LambdaPolynomial, EngineError> {
    assert!(k >= 1);
    match method {
        MethodKind::Oracle => Ok(oracle_polynomial(k, n)),
        MethodKind::Km => Ok(km_polynomial(k, n)),
        MethodKind::Alt => Ok(alt_polynomial(k, n)),
        MethodKind::K2 => {
            if k != 2 {
                Err(EngineError::K2WithWrongK { k })
            } else {
                Ok(k2_polynomial(n))
            }
        }
    }
}

/// k = 2 closed form: Σ_{j=0}^{⌊n/2⌋} λ^{n−j}/((n−2j)! j!).
pub fn k2_polynomial(n: u64) -> LambdaPolynomial {
    let mut poly = LambdaPolynomial::zero();
    for j in 0..=n / 2 {
        let den = crate::exact::factorial(n - 2 * j) * crate::exact::factorial(j);
        poly.add_term(n - j, Rational::from_ratio(BigInt::from(1), BigInt::from(den)));
    }
    poly
}

/// Counts of monomial contributions generated by one engine for one (k, n),
/// split at the minimum-degree boundary r = ⌊(n−1)/k⌋.
///
/// `low_degree_terms` counts contributions of degree ≤ r; those are exactly
/// the ones that must cancel to zero in the merged polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermCensus {
    pub method: MethodKind,
    pub k: u64,
    pub n: u64,
    pub total_terms: u64,
    pub low_degree_terms: u64,
    pub surviving_terms: u64,
}

/// Census of generated monomials for the km or alt engine. Requires n ≥ 1.
pub fn term_census(method: MethodKind, k: u64, n: u64) -> Result<TermCensus, EngineError> {
    assert!(k >= 1 && n >= 1);
    let contributions = match method {
        MethodKind::Km => km_contributions(k, n),
        MethodKind::Alt => alt_contributions(k, n),
        other => return Err(EngineError::CensusUnsupportedMethod { method: other }),
    };
    let r = BlockIndex::from_n(k, n).r;
    let total = contributions.len() as u64;
    let low = contributions.iter().filter(|c| c.degree <= r).count() as u64;
    Ok(TermCensus {
        method,
        k,
        n,
        total_terms: total,
        low_degree_terms: low,
        surviving_terms: total - low,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::inv_factorial as invf;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn counts(iter: CompositionIter) -> BTreeSet<Vec<u64>> {
        iter.map(|c| c.counts).collect()
    }

    // Independent brute-force enumeration for small k, used as the oracle for
    // the odometer iterator itself.
    fn brute_force_compositions(k: u64, n: u64) -> BTreeSet<Vec<u64>> {
        let mut out = BTreeSet::new();
        let mut counts = vec![0u64; k as usize];
        fn rec(counts: &mut Vec<u64>, idx: usize, remaining: u64, out: &mut BTreeSet<Vec<u64>>) {
            if idx == counts.len() {
                if remaining == 0 {
                    out.insert(counts.clone());
                }
                return;
            }
            let weight = idx as u64 + 1;
            for c in 0..=remaining / weight {
                counts[idx] = c;
                rec(counts, idx + 1, remaining - weight * c, out);
                counts[idx] = 0;
            }
        }
        rec(&mut counts, 0, n, &mut out);
        out
    }

    #[test]
    fn compositions_small_cases() {
        assert_eq!(
            counts(enumerate_compositions(2, 3)),
            BTreeSet::from([vec![3, 0], vec![1, 1]])
        );
        assert_eq!(counts(enumerate_compositions(2, 0)), BTreeSet::from([vec![0, 0]]));
        assert_eq!(
            counts(enumerate_compositions(3, 4)),
            BTreeSet::from([vec![4, 0, 0], vec![2, 1, 0], vec![0, 2, 0], vec![1, 0, 1]])
        );
        assert_eq!(counts(enumerate_compositions(1, 5)), BTreeSet::from([vec![5]]));
    }

    #[test]
    fn compositions_match_brute_force() {
        for k in 1..=4 {
            for n in 0..=12 {
                assert_eq!(
                    counts(enumerate_compositions(k, n)),
                    brute_force_compositions(k, n),
                    "k={k} n={n}"
                );
            }
        }
    }

    #[test]
    fn compositions_are_distinct_and_valid() {
        for k in 1..=5 {
            for n in 0..=20 {
                let all: Vec<_> = enumerate_compositions(k, n).collect();
                let set: BTreeSet<_> = all.iter().map(|c| c.counts.clone()).collect();
                assert_eq!(all.len(), set.len(), "duplicates at k={k} n={n}");
                for c in &all {
                    assert_eq!(c.weighted_sum(), n);
                }
            }
        }
    }

    #[test]
    fn block_index_round_trip() {
        for k in 1..=6 {
            for n in 1..=100 {
                let b = BlockIndex::from_n(k, n);
                assert!(b.m >= 1 && b.m <= k);
                assert_eq!(b.n(k), n);
            }
        }
    }

    fn poly(terms: &[(u64, Rational)]) -> LambdaPolynomial {
        let mut p = LambdaPolynomial::zero();
        for (d, c) in terms {
            p.add_term(*d, c.clone());
        }
        p
    }

    #[test]
    fn oracle_fixtures() {
        // k=2, n=4: λ⁴/4! + λ³/(2!1!) + λ²/(0!2!)
        assert_eq!(
            oracle_polynomial(2, 4),
            poly(&[(4, invf(4)), (3, Rational::new(1, 2)), (2, Rational::new(1, 2))])
        );
        // k=1 is the standard Poisson
        assert_eq!(oracle_polynomial(1, 3), poly(&[(3, invf(3))]));
        // k=3, n=4: summed over (4,0,0),(2,1,0),(0,2,0),(1,0,1)
        assert_eq!(
            oracle_polynomial(3, 4),
            poly(&[(4, invf(4)), (3, Rational::new(1, 2)), (2, Rational::new(3, 2))])
        );
        assert_eq!(oracle_polynomial(5, 0), LambdaPolynomial::one());
    }

    #[test]
    fn km_fixtures() {
        assert_eq!(
            km_polynomial(2, 2),
            poly(&[(2, Rational::new(1, 2)), (1, Rational::one())])
        );
        assert_eq!(km_polynomial(2, 0), LambdaPolynomial::one());
        assert_eq!(km_polynomial(3, 7), oracle_polynomial(3, 7));
    }

    #[test]
    fn alt_fixtures() {
        // k=2, n=5: λ⁵/5! + λ⁴/(3!1!) + λ³/(1!2!)
        assert_eq!(
            alt_polynomial(2, 5),
            poly(&[(5, invf(5)), (4, Rational::new(1, 6)), (3, Rational::new(1, 2))])
        );
        // k=2, n=3: correction sum is empty
        assert_eq!(alt_polynomial(2, 3), poly(&[(3, invf(3)), (2, Rational::one())]));
        assert_eq!(alt_polynomial(4, 13), oracle_polynomial(4, 13));
    }

    #[test]
    fn k2_fixtures() {
        assert_eq!(k2_polynomial(0), LambdaPolynomial::one());
        assert_eq!(k2_polynomial(1), poly(&[(1, Rational::one())]));
        // n=8: λ⁸/40320 + λ⁷/720 + λ⁶/48 + λ⁵/12 + λ⁴/24
        assert_eq!(
            k2_polynomial(8),
            poly(&[
                (8, Rational::new(1, 40320)),
                (7, Rational::new(1, 720)),
                (6, Rational::new(1, 48)),
                (5, Rational::new(1, 12)),
                (4, Rational::new(1, 24)),
            ])
        );
    }

    #[test]
    fn dispatch() {
        assert_eq!(
            pmf_polynomial(MethodKind::Alt, 2, 4).unwrap(),
            poly(&[(4, invf(4)), (3, Rational::new(1, 2)), (2, Rational::new(1, 2))])
        );
        assert_eq!(pmf_polynomial(MethodKind::Oracle, 5, 0).unwrap(), LambdaPolynomial::one());
        assert_eq!(
            pmf_polynomial(MethodKind::K2, 3, 2),
            Err(EngineError::K2WithWrongK { k: 3 })
        );
        assert_eq!(pmf_polynomial(MethodKind::K2, 2, 4).unwrap(), oracle_polynomial(2, 4));
    }

    #[test]
    fn alt_parts_recombine() {
        for k in 1..=4 {
            for n in 0..=30 {
                let parts = alt_polynomial_parts(k, n);
                assert_eq!(parts.combined(), alt_polynomial(k, n), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn census_counts() {
        // k=2, n=8, r=3. Counted by hand from the two sums:
        // head j=1..8 (3 of degree ≤ 3), i=1: j=0..5 (3 low), i=2: j=0..2 (2 low).
        let km = term_census(MethodKind::Km, 2, 8).unwrap();
        assert_eq!(km.total_terms, 17);
        assert_eq!(km.low_degree_terms, 8);
        assert_eq!(km.surviving_terms, 9);

        let alt = term_census(MethodKind::Alt, 2, 8).unwrap();
        assert_eq!(alt.low_degree_terms, 0);
        assert!(alt.total_terms < km.total_terms);

        let small = term_census(MethodKind::Alt, 2, 2).unwrap();
        assert_eq!(small.total_terms, 2);
        assert_eq!(small.low_degree_terms, 0);

        assert_eq!(
            term_census(MethodKind::Oracle, 2, 8),
            Err(EngineError::CensusUnsupportedMethod {
                method: MethodKind::Oracle
            })
        );
    }

    #[test]
    fn census_partition_is_consistent() {
        for k in 2..=5 {
            for n in 1..=40 {
                for method in [MethodKind::Km, MethodKind::Alt] {
                    let c = term_census(method, k, n).unwrap();
                    assert_eq!(c.total_terms, c.low_degree_terms + c.surviving_terms);
                }
                if n > k {
                    let km = term_census(MethodKind::Km, k, n).unwrap();
                    assert!(km.low_degree_terms > 0, "k={k} n={n}");
                }
                let alt = term_census(MethodKind::Alt, k, n).unwrap();
                assert_eq!(alt.low_degree_terms, 0, "k={k} n={n}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn engines_agree_with_oracle(k in 1u64..=5, n in 0u64..=35) {
            let oracle = oracle_polynomial(k, n);
            prop_assert_eq!(&km_polynomial(k, n), &oracle);
            prop_assert_eq!(&alt_polynomial(k, n), &oracle);
            if k == 2 {
                prop_assert_eq!(&k2_polynomial(n), &oracle);
            }
        }

        #[test]
        fn structural_facts(k in 1u64..=5, n in 1u64..=35) {
            let p = alt_polynomial(k, n);
            prop_assert_eq!(p.degree(), Some(n));
            prop_assert_eq!(p.coefficient(n), invf(n));
            prop_assert_eq!(p.min_degree(), Some(BlockIndex::from_n(k, n).r + 1));
            for (_, c) in p.terms() {
                prop_assert!(c.is_positive());
            }
        }

        #[test]
        fn k1_is_standard_poisson(n in 0u64..=30) {
            let p = alt_polynomial(1, n);
            prop_assert_eq!(p.term_count(), 1);
            prop_assert_eq!(p.coefficient(n), invf(n));
        }
    }
}
