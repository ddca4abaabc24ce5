//! Exponent vectors of eta-quotients `∏_{δ | N} η(δτ)^{r_δ}` with their
//! weight, the two mod-24 modularity congruences, and the quadratic
//! Nebentypus.

use std::fmt;

use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{kronecker_i64, Level};
use crate::error::{Error, Result};

/// Dense exponent vector aligned with `level.divisors()`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EtaExponents {
    level: Level,
    r: Vec<i64>,
}

impl EtaExponents {
    pub fn new(level: Level, r: Vec<i64>) -> Result<Self> {
        if r.len() != level.divisors().len() {
            return Err(Error::ExponentKeys(level.n()));
        }
        Ok(EtaExponents { level, r })
    }

    pub fn zero(level: Level) -> Self {
        let r = vec![0; level.divisors().len()];
        EtaExponents { level, r }
    }

    /// Builds from `(δ, r_δ)` pairs; unlisted divisors get exponent 0.
    pub fn from_pairs(level: Level, pairs: &[(u64, i64)]) -> Result<Self> {
        let mut r = vec![0; level.divisors().len()];
        for &(d, e) in pairs {
            let i = level.divisor_index(d)?;
            r[i] += e;
        }
        Ok(EtaExponents { level, r })
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    /// Exponents in ascending divisor order.
    pub fn exponents(&self) -> &[i64] {
        &self.r
    }

    pub fn get(&self, d: u64) -> Option<i64> {
        self.level.divisor_index(d).ok().map(|i| self.r[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.level.divisors().iter().copied().zip(self.r.iter().copied())
    }

    /// Nonzero `(δ, r_δ)` pairs, ascending in δ.
    pub fn pairs(&self) -> Vec<(u64, i64)> {
        self.iter().filter(|&(_, e)| e != 0).collect()
    }

    pub fn l1_norm(&self) -> u64 {
        self.r.iter().map(|e| e.unsigned_abs()).sum()
    }

    pub fn exponent_sum(&self) -> i64 {
        self.r.iter().sum()
    }

    pub fn is_eta_product(&self) -> bool {
        self.r.iter().all(|&e| e >= 0)
    }

    /// `k = Σ r_δ / 2`, possibly half-integral or negative.
    pub fn weight(&self) -> Rational64 {
        Rational64::new(self.exponent_sum(), 2)
    }

    /// Integral weight, or an error when `Σ r_δ` is odd.
    pub fn integral_weight(&self) -> Result<i64> {
        let s = self.exponent_sum();
        if s % 2 != 0 {
            return Err(Error::HalfIntegralWeight);
        }
        Ok(s / 2)
    }

    /// `Σ δ r_δ`
    pub fn delta_sum(&self) -> i128 {
        self.iter().map(|(d, e)| d as i128 * e as i128).sum()
    }

    /// `Σ (N/δ) r_δ`
    pub fn codelta_sum(&self) -> i128 {
        let n = self.level.n();
        self.iter().map(|(d, e)| (n / d) as i128 * e as i128).sum()
    }

    pub fn congruence_delta(&self) -> bool {
        self.delta_sum().rem_euclid(24) == 0
    }

    pub fn congruence_codelta(&self) -> bool {
        self.codelta_sum().rem_euclid(24) == 0
    }

    pub fn satisfies_congruences(&self) -> bool {
        self.congruence_delta() && self.congruence_codelta()
    }

    /// Squarefree kernel `D` of `(-1)^k ∏ δ^{r_δ}`, found from the parity of
    /// each `ord_p(s)` without forming `s`.
    pub fn character_kernel(&self) -> Result<CharacterKernel> {
        let k = self.integral_weight()?;
        let mut d: i64 = if k % 2 == 0 { 1 } else { -1 };
        for p in self.level.primes() {
            let ord: i128 = self
                .iter()
                .map(|(delta, e)| {
                    let mut v = 0i128;
                    let mut x = delta;
                    while x % p == 0 {
                        x /= p;
                        v += 1;
                    }
                    v * e as i128
                })
                .sum();
            if ord.rem_euclid(2) == 1 {
                d = d
                    .checked_mul(p as i64)
                    .ok_or(Error::Overflow("character kernel"))?;
            }
        }
        Ok(CharacterKernel { d })
    }

    /// Pointwise sum, i.e. the product of the two quotients.
    pub fn combine(&self, other: &EtaExponents) -> Result<EtaExponents> {
        if self.level != other.level {
            return Err(Error::Precondition(format!(
                "cannot combine exponents at levels {} and {}",
                self.level.n(),
                other.level.n()
            )));
        }
        let r = self.r.iter().zip(&other.r).map(|(a, b)| a + b).collect();
        Ok(EtaExponents { level: self.level.clone(), r })
    }

    /// Re-indexes onto the divisors of a multiple of the current level.
    pub fn lift(&self, to: &Level) -> Result<EtaExponents> {
        if !to.n().is_multiple_of(self.level.n()) {
            return Err(Error::NotADivisor { d: self.level.n(), n: to.n() });
        }
        EtaExponents::from_pairs(to.clone(), &self.pairs())
    }

    /// Canonical text form, e.g. `[[1,-1],[5,5]]`.
    pub fn to_canonical_string(&self) -> String {
        format_pairs(&self.pairs())
    }
}

impl fmt::Display for EtaExponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pairs()
            .into_iter()
            .map(|(d, e)| format!("eta({d}t)^{e}"))
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" * "))
        }
    }
}

pub fn format_pairs(pairs: &[(u64, i64)]) -> String {
    let parts: Vec<String> = pairs.iter().map(|(d, e)| format!("[{d},{e}]")).collect();
    format!("[{}]", parts.join(","))
}

/// Parses the canonical `[[δ,r],...]` text form.
pub fn parse_pairs(text: &str) -> Result<Vec<(u64, i64)>> {
    let pairs: Vec<(u64, i64)> =
        serde_json::from_str(text.trim()).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(pairs)
}

/// The Nebentypus `d ↦ (D / d)` stored by its squarefree kernel `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharacterKernel {
    d: i64,
}

impl CharacterKernel {
    pub fn new(d: i64) -> Self {
        CharacterKernel { d }
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn is_trivial(&self) -> bool {
        self.d == 1
    }

    pub fn eval(&self, m: i64) -> i8 {
        kronecker_i64(self.d, m)
    }
}

impl fmt::Display for CharacterKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}/.)", self.d)
    }
}

/// Samples random exponent vectors and checks that the δ and N/δ
/// congruences always agree. Only meaningful for levels coprime to 6.
pub fn congruences_equivalent_check<R: Rng>(
    level: &Level,
    samples: usize,
    range: i64,
    rng: &mut R,
) -> Result<bool> {
    level.require_coprime_to_6()?;
    for _ in 0..samples {
        let r = (0..level.divisors().len())
            .map(|_| rng.gen_range(-range..=range))
            .collect();
        let e = EtaExponents::new(level.clone(), r)?;
        if e.congruence_delta() != e.congruence_codelta() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eta(n: u64, r: &[i64]) -> EtaExponents {
        EtaExponents::new(Level::new(n).unwrap(), r.to_vec()).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(eta(1, &[24]).weight(), Rational64::from_integer(12));
        assert_eq!(eta(5, &[-1, 5]).weight(), Rational64::from_integer(2));
        assert_eq!(eta(35, &[0, 0, 0, 0]).weight(), Rational64::from_integer(0));
        assert_eq!(eta(5, &[1, 0]).weight(), Rational64::new(1, 2));
    }

    #[test]
    fn congruence_examples() {
        let e = eta(5, &[-1, 5]);
        assert_eq!(e.delta_sum(), 24);
        assert_eq!(e.codelta_sum(), 0);
        assert!(e.congruence_delta() && e.congruence_codelta());
        assert!(eta(1, &[24]).congruence_delta());
        let bad = eta(5, &[1, 1]);
        assert_eq!(bad.delta_sum(), 6);
        assert!(!bad.congruence_delta());
    }

    #[test]
    fn character_examples() {
        assert_eq!(eta(5, &[-1, 5]).character_kernel().unwrap().d(), 5);
        assert_eq!(eta(1, &[24]).character_kernel().unwrap().d(), 1);
        assert_eq!(eta(5, &[5, -1]).character_kernel().unwrap().d(), 5);
        // k = 1 is odd: sign flips
        assert_eq!(eta(5, &[1, 1]).character_kernel().unwrap().d(), -5);
        assert_eq!(
            eta(5, &[1, 0]).character_kernel(),
            Err(Error::HalfIntegralWeight)
        );
    }

    #[test]
    fn key_mismatch_rejected() {
        let l = Level::new(35).unwrap();
        assert!(EtaExponents::new(l.clone(), vec![1, 2]).is_err());
        assert!(EtaExponents::from_pairs(l, &[(3, 1)]).is_err());
    }

    #[test]
    fn canonical_text_round_trip() {
        let e = eta(5, &[-1, 5]);
        assert_eq!(e.to_canonical_string(), "[[1,-1],[5,5]]");
        let back = EtaExponents::from_pairs(e.level().clone(), &parse_pairs("[[1,-1],[5,5]]").unwrap())
            .unwrap();
        assert_eq!(back, e);
        assert_eq!(eta(35, &[0, 0, 0, 0]).to_canonical_string(), "[]");
        assert!(parse_pairs("[[1,2],").is_err());
    }

    #[test]
    fn lift_zero_pads() {
        let e = eta(5, &[-1, 5]);
        let up = e.lift(&Level::new(175).unwrap()).unwrap();
        assert_eq!(up.exponents(), &[-1, 5, 0, 0, 0, 0]);
        assert!(e.lift(&Level::new(7).unwrap()).is_err());
    }

    #[test]
    fn congruences_equivalent_on_sample_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [5u64, 25, 35] {
            let l = Level::new(n).unwrap();
            assert!(congruences_equivalent_check(&l, 1000, 10, &mut rng).unwrap());
        }
        assert!(congruences_equivalent_check(&Level::new(10).unwrap(), 10, 10, &mut rng).is_err());
    }

    #[test]
    fn congruences_disagree_off_domain() {
        // N = 2, r = (2, 11): Σδr = 24 but Σ(N/δ)r = 15
        let e = eta(2, &[2, 11]);
        assert!(e.congruence_delta());
        assert!(!e.congruence_codelta());
    }

    #[test]
    fn congruences_equivalent_exhaustive_box() {
        for n in [5u64, 7, 35] {
            let l = Level::new(n).unwrap();
            let m = l.divisors().len();
            let side = if m == 2 { 25i64 } else { 9 };
            let total = (2 * side + 1).pow(m as u32);
            for idx in 0..total {
                let mut x = idx;
                let r = (0..m)
                    .map(|_| {
                        let v = x % (2 * side + 1) - side;
                        x /= 2 * side + 1;
                        v
                    })
                    .collect();
                let e = EtaExponents::new(l.clone(), r).unwrap();
                assert_eq!(e.congruence_delta(), e.congruence_codelta());
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn level_strategy() -> impl Strategy<Value = Level> {
            prop::sample::select(vec![5u64, 7, 25, 35, 77, 143, 175, 385, 1001])
                .prop_map(|n| Level::new(n).unwrap())
        }

        fn exps(level: Level, big: bool) -> impl Strategy<Value = EtaExponents> {
            let m = level.divisors().len();
            let range = if big { -1_000_000_000i64..1_000_000_000 } else { -40i64..40 };
            prop::collection::vec(range, m)
                .prop_map(move |r| EtaExponents::new(level.clone(), r).unwrap())
        }

        proptest! {
            #[test]
            fn congruences_agree_big_exponents(e in level_strategy().prop_flat_map(|l| exps(l, true))) {
                prop_assert_eq!(e.congruence_delta(), e.congruence_codelta());
            }

            #[test]
            fn weight_is_additive(pair in level_strategy().prop_flat_map(|l| (exps(l.clone(), false), exps(l, false)))) {
                let (a, b) = pair;
                let c = a.combine(&b).unwrap();
                prop_assert_eq!(c.weight(), a.weight() + b.weight());
            }

            #[test]
            fn kernel_stable_under_even_shift(
                e in level_strategy().prop_flat_map(|l| exps(l, false)),
                idx in any::<prop::sample::Index>(),
                up in any::<bool>(),
            ) {
                prop_assume!(e.exponent_sum() % 2 == 0);
                let i = idx.index(e.exponents().len());
                let mut r = e.exponents().to_vec();
                r[i] += if up { 2 } else { -2 };
                // the weight moves by ±1, so compare kernels up to the sign from (-1)^k
                let shifted = EtaExponents::new(e.level().clone(), r).unwrap();
                let a = e.character_kernel().unwrap().d();
                let b = shifted.character_kernel().unwrap().d();
                prop_assert_eq!(a, -b);
            }
        }
    }
}
