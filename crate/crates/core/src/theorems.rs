//! Existence and nonexistence of eta-quotients in `M_k(Γ_1(N))`.
//!
//! The decision procedure, for `gcd(N, 6) = 1` and even `k >= 2`:
//!
//! 1. `h_N ∤ k`: no weakly holomorphic eta-quotient of weight `k` exists,
//!    so none in `M_k` either.
//! 2. `h_N | k` and not (`k = 2` and `N ∈ S`): one exists. The witness is
//!    built on a prime or a product of two primes dividing `N` and lifted.
//! 3. `k = 2`, `N ∈ S` squarefree and `4 ∏ (p+1)/(p-1) < p_1 + 1`: every
//!    candidate is an eta-product, and no eta-product of weight 2 satisfies
//!    the mod-24 congruence, so none exists.
//! 4. Anything else is left undecided.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{h_of, in_s, prime_ratio_product, residue_set, Level};
use crate::cusps::per_cusp_orders;
use crate::error::{Error, Result};
use crate::etacore::EtaExponents;
use crate::search::{check_weight, enumerate, find_first, SearchConfig, SearchMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ExistsConstructive,
    ExistsBySearch,
    NotExistsWeakObstruction,
    NotExistsMod24Obstruction,
    UndecidedByTheorems,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ExistsConstructive => "EXISTS_CONSTRUCTIVE",
            Verdict::ExistsBySearch => "EXISTS_BY_SEARCH",
            Verdict::NotExistsWeakObstruction => "NOT_EXISTS_WEAK_OBSTRUCTION",
            Verdict::NotExistsMod24Obstruction => "NOT_EXISTS_MOD24_OBSTRUCTION",
            Verdict::UndecidedByTheorems => "UNDECIDED_BY_THEOREMS",
        }
    }

    pub fn is_exists(&self) -> bool {
        matches!(self, Verdict::ExistsConstructive | Verdict::ExistsBySearch)
    }

    pub fn is_not_exists(&self) -> bool {
        matches!(
            self,
            Verdict::NotExistsWeakObstruction | Verdict::NotExistsMod24Obstruction
        )
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub n: u64,
    pub k: u32,
    pub verdict: Verdict,
    pub witness: Option<EtaExponents>,
    pub obstruction_note: String,
    pub theorem_refs: Vec<String>,
}

/// JSON shape of a [`Decision`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub n: u64,
    pub k: u32,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<(u64, i64)>>,
    pub obstruction_note: String,
    pub theorem_refs: Vec<String>,
}

impl Decision {
    pub fn to_record(&self) -> DecisionRecord {
        DecisionRecord {
            n: self.n,
            k: self.k,
            verdict: self.verdict,
            witness: self.witness.as_ref().map(EtaExponents::pairs),
            obstruction_note: self.obstruction_note.clone(),
            theorem_refs: self.theorem_refs.clone(),
        }
    }

    pub fn from_record(rec: &DecisionRecord) -> Result<Decision> {
        let witness = match &rec.witness {
            Some(pairs) => Some(EtaExponents::from_pairs(Level::new(rec.n)?, pairs)?),
            None => None,
        };
        Ok(Decision {
            n: rec.n,
            k: rec.k,
            verdict: rec.verdict,
            witness,
            obstruction_note: rec.obstruction_note.clone(),
            theorem_refs: rec.theorem_refs.clone(),
        })
    }
}

fn refs(tags: &[&str]) -> Vec<String> {
    tags.iter().map(|s| s.to_string()).collect()
}

pub fn decide(level: &Level, k: i64) -> Result<Decision> {
    let k = check_weight(k)?;
    level.require_coprime_to_6()?;
    let n = level.n();
    let h = h_of(level)?;

    if !(k as u64).is_multiple_of(h) {
        return Ok(Decision {
            n,
            k,
            verdict: Verdict::NotExistsWeakObstruction,
            witness: None,
            obstruction_note: format!(
                "h_N = {h} does not divide k = {k}; no weakly holomorphic eta-quotient of this weight exists"
            ),
            theorem_refs: refs(&["weak-existence"]),
        });
    }

    let s = in_s(level)?;
    if !(k == 2 && s) {
        let witness = witness_for_exist(level, k as i64)?;
        let mut tags = vec!["existence"];
        if !level.is_squarefree() {
            tags.push("radical-reduction");
        }
        if level.omega() >= 3 {
            tags.push("semiprime-reduction");
        }
        return Ok(Decision {
            n,
            k,
            verdict: Verdict::ExistsConstructive,
            witness: Some(witness),
            obstruction_note: String::new(),
            theorem_refs: refs(&tags),
        });
    }

    if level.is_squarefree() && rwhyp_holds(level)? {
        if !eta_product_forced(level, 2)? || !mod24_obstruction(level)? {
            return Err(Error::TheoremViolation(format!(
                "weight-2 obstruction argument failed to close at N = {n}"
            )));
        }
        return Ok(Decision {
            n,
            k,
            verdict: Verdict::NotExistsMod24Obstruction,
            witness: None,
            obstruction_note: format!(
                "k = 2, N in S and 4*prod (p+1)/(p-1) < p_1 + 1 = {}: quotients are eta-products, \
                 and no eta-product of weight 2 meets the mod-24 congruence",
                level.smallest_prime().unwrap_or(0) + 1
            ),
            theorem_refs: refs(&["weight-2-nonexistence", "eta-product-forcing", "mod-24-obstruction"]),
        });
    }

    let why = if level.is_squarefree() {
        "k = 2 and N in S, but 4*prod (p+1)/(p-1) >= p_1 + 1"
    } else {
        "k = 2 and N in S at a non-squarefree level"
    };
    Ok(Decision {
        n,
        k,
        verdict: Verdict::UndecidedByTheorems,
        witness: None,
        obstruction_note: why.to_string(),
        theorem_refs: refs(&["existence"]),
    })
}

/// [`decide`], falling back to exhaustive search when the theorems are
/// silent and the level is squarefree.
pub fn decide_with_fallback(level: &Level, k: i64) -> Result<Decision> {
    let mut d = decide(level, k)?;
    if d.verdict != Verdict::UndecidedByTheorems || !level.is_squarefree() {
        return Ok(d);
    }
    let config = SearchConfig::new(level.clone(), k, SearchMode::Holomorphic)?;
    match find_first(&config)? {
        Some(hit) => {
            d.verdict = Verdict::ExistsBySearch;
            d.witness = Some(hit.exponents);
            d.obstruction_note.clear();
            d.theorem_refs.push("bounded-search".into());
        }
        None => {
            d.obstruction_note.push_str("; exhaustive search within the l1 window found none");
            d.theorem_refs.push("bounded-search".into());
        }
    }
    Ok(d)
}

/// Two distinct primes `p, q | N` with `h_{pq} = h_N` and, when `N ∉ S`,
/// `pq ∉ S`. Chosen by case analysis on `h_N` over the residues of the
/// prime divisors mod 24.
pub fn reduce_to_semiprime(level: &Level) -> Result<(u64, u64)> {
    level.require_coprime_to_6()?;
    if level.omega() < 2 {
        return Err(Error::TooFewPrimes(level.n()));
    }
    let primes: Vec<u64> = level.primes().collect();
    let residues = residue_set(level)?;
    let h = h_of(level)?;
    let n = level.n();

    let pick = |pred: &dyn Fn(u64) -> bool, exclude: Option<u64>| {
        primes.iter().copied().find(|&p| Some(p) != exclude && pred(p))
    };
    let other = |p: u64| pick(&|_| true, Some(p));
    let broken = |case: &str| {
        Error::TheoremViolation(format!("semiprime reduction: case {case} has no candidate at N = {n}"))
    };
    let with_other = |p: Option<u64>, case: &str| -> Result<(u64, u64)> {
        let p = p.ok_or_else(|| broken(case))?;
        let q = other(p).ok_or_else(|| broken(case))?;
        Ok((p, q))
    };

    match h {
        12 => Ok((primes[0], primes[1])),
        6 => with_other(pick(&|p| p % 24 == 13, None), "h=6"),
        4 => with_other(pick(&|p| p % 24 == 17, None), "h=4"),
        3 => with_other(pick(&|p| matches!(p % 24, 7 | 19), None), "h=3"),
        2 => {
            if residues.is_subset_of(&[1, 5]) {
                if in_s(level)? {
                    with_other(pick(&|p| p % 24 == 5, None), "h=2, N in S")
                } else {
                    // outside S with residues in {1,5}: only the prime 5 can be the reason
                    with_other(pick(&|p| p == 5, None), "h=2, 5 | N")
                }
            } else if !residues.contains(5) {
                let p = pick(&|p| p % 24 == 17, None).ok_or_else(|| broken("h=2, 17"))?;
                let q = pick(&|p| p % 24 == 13, None).ok_or_else(|| broken("h=2, 13"))?;
                Ok((p, q))
            } else {
                let p = pick(&|p| p % 24 == 5, None).ok_or_else(|| broken("h=2, 5"))?;
                let q = pick(&|p| matches!(p % 24, 13 | 17), None).ok_or_else(|| broken("h=2, 13/17"))?;
                Ok((p, q))
            }
        }
        1 => {
            let p = pick(&|p| p % 4 == 3, None).ok_or_else(|| broken("h=1, 3 mod 4"))?;
            // p itself may already be 2 mod 3, in which case any q will do
            let q = pick(&|q| q % 3 == 2, Some(p))
                .or_else(|| if p % 3 == 2 { other(p) } else { None })
                .ok_or_else(|| broken("h=1, 2 mod 3"))?;
            Ok((p, q))
        }
        _ => Err(broken("unexpected h")),
    }
}

/// A holomorphic eta-quotient of weight `k` at level `N`, found at the
/// level `p` or `pq` chosen by [`reduce_to_semiprime`] on the radical and
/// zero-padded up to `N`.
pub fn witness_for_exist(level: &Level, k: i64) -> Result<EtaExponents> {
    let kk = check_weight(k)?;
    level.require_coprime_to_6()?;
    let h = h_of(level)?;
    if !(kk as u64).is_multiple_of(h) || (kk == 2 && in_s(level)?) {
        return Err(Error::Precondition(format!(
            "existence conditions fail at N = {}, k = {k}",
            level.n()
        )));
    }
    let radical = level.radical_level();
    let base = if radical.omega() == 1 {
        radical.n()
    } else {
        let (p, q) = reduce_to_semiprime(&radical)?;
        p * q
    };
    let config = SearchConfig::new(Level::new(base)?, k, SearchMode::Holomorphic)?;
    let hit = find_first(&config)?.ok_or_else(|| {
        Error::TheoremViolation(format!(
            "no holomorphic eta-quotient of weight {k} at level {base}, though one must exist"
        ))
    })?;
    hit.exponents.lift(level)
}

fn smallest_prime_plus_one(level: &Level) -> Result<BigRational> {
    let p1 = level
        .smallest_prime()
        .ok_or(Error::NoPrimeDivisors(level.n()))?;
    Ok(BigRational::from_integer(BigInt::from(p1 + 1)))
}

/// `4 ∏_{p|N} (p+1)/(p-1) < p_1 + 1`, exactly.
pub fn rwhyp_holds(level: &Level) -> Result<bool> {
    level.require_squarefree()?;
    let rhs = smallest_prime_plus_one(level)?;
    Ok(prime_ratio_product(level, 1) * BigInt::from(4) < rhs)
}

/// `2k ∏_{p|N} (p+1)/(p-1) < p_1 + 1`; when true every holomorphic
/// eta-quotient of weight `k` has all exponents nonnegative.
pub fn eta_product_forced(level: &Level, k: i64) -> Result<bool> {
    level.require_squarefree()?;
    level.require_coprime_to_6()?;
    let rhs = smallest_prime_plus_one(level)?;
    Ok(prime_ratio_product(level, 1) * BigInt::from(2 * k) < rhs)
}

/// Finite check that no nonnegative `r` with `Σ r_δ = 4` has
/// `Σ δ r_δ ≡ 0 (mod 24)`. For `N ∈ S` every divisor is 1 or 5 mod 24, so
/// only the multiset of residues used matters.
pub fn mod24_obstruction(level: &Level) -> Result<bool> {
    level.require_squarefree()?;
    if !in_s(level)? {
        return Err(Error::NotInS(level.n()));
    }
    let mut classes: Vec<u64> = level.divisors().iter().map(|d| d % 24).collect();
    classes.sort_unstable();
    classes.dedup();
    if !classes.iter().all(|c| matches!(c, 1 | 5)) {
        return Err(Error::TheoremViolation(format!(
            "divisor residues {classes:?} of {} escape {{1, 5}}",
            level.n()
        )));
    }
    // multisets of size 4 drawn from the classes
    fn any_zero(classes: &[u64], start: usize, left: u32, acc: u64) -> bool {
        if left == 0 {
            return acc.is_multiple_of(24);
        }
        (start..classes.len()).any(|i| any_zero(classes, i, left - 1, acc + classes[i]))
    }
    Ok(!any_zero(&classes, 0, 4, 0))
}

/// Weight, both congruences, and nonnegative order at every cusp via the
/// per-cusp formula.
pub fn reverify_holomorphic(e: &EtaExponents, k: i64) -> Result<bool> {
    if e.exponent_sum() != 2 * k || !e.satisfies_congruences() {
        return Ok(false);
    }
    Ok(per_cusp_orders(e)?.is_holomorphic())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    /// Hits from exhaustive search, when the level allowed running it.
    pub hit_count: Option<usize>,
    pub witness_ok: Option<bool>,
    pub consistent: bool,
}

/// Cross-checks a decision against exhaustive search (squarefree levels)
/// and re-verifies any witness.
pub fn verify_decision(level: &Level, decision: &Decision) -> Result<Verification> {
    let k = decision.k as i64;
    let witness_ok = match &decision.witness {
        Some(w) => Some(reverify_holomorphic(w, k)?),
        None => None,
    };
    let hit_count = if level.is_squarefree() {
        let config = SearchConfig::new(level.clone(), k, SearchMode::Holomorphic)?;
        Some(enumerate(&config)?.hits.len())
    } else {
        None
    };
    let consistent = match decision.verdict {
        v if v.is_exists() => witness_ok == Some(true) && hit_count.is_none_or(|c| c >= 1),
        v if v.is_not_exists() => hit_count.is_none_or(|c| c == 0),
        _ => true,
    };
    Ok(Verification { hit_count, witness_ok, consistent })
}
