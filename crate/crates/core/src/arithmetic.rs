//! Integer primitives: factorization, divisor lists, residues mod 24,
//! `h_N`, membership in the weight-2 obstruction class `S`, and the
//! Kronecker symbol.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Pluggable factorization backend.
pub trait Factorizer {
    /// Prime factorization of `n >= 2`, primes ascending.
    fn factor(&self, n: u64) -> Vec<(u64, u32)>;
}

/// Plain trial division. Adequate for levels up to ~10^12.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialDivision;

impl Factorizer for TrialDivision {
    fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut push = |p: u64, n: &mut u64| {
            let mut e = 0u32;
            while (*n).is_multiple_of(p) {
                *n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
        };
        push(2, &mut n);
        push(3, &mut n);
        // 6k +- 1 wheel
        let mut p = 5u64;
        while p.saturating_mul(p) <= n {
            push(p, &mut n);
            push(p + 2, &mut n);
            p += 6;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }
}

/// A level `N` together with its factorization and divisor lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Level {
    n: u64,
    factors: Vec<(u64, u32)>,
    divisors: Vec<u64>,
    radical: u64,
    squarefree: bool,
    coprime6: bool,
}

impl Level {
    pub fn new(n: u64) -> Result<Level> {
        factorize(n)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `(p_i, e_i)` with primes ascending.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// All divisors, ascending. First entry 1, last entry `n`.
    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn radical(&self) -> u64 {
        self.radical
    }

    pub fn is_squarefree(&self) -> bool {
        self.squarefree
    }

    pub fn is_coprime_to_6(&self) -> bool {
        self.coprime6
    }

    pub fn smallest_prime(&self) -> Option<u64> {
        self.factors.first().map(|&(p, _)| p)
    }

    pub fn ord(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn divides(&self, d: u64) -> bool {
        d != 0 && self.n.is_multiple_of(d)
    }

    /// Position of `d` in [`Level::divisors`].
    pub fn divisor_index(&self, d: u64) -> Result<usize> {
        self.divisors
            .binary_search(&d)
            .map_err(|_| Error::NotADivisor { d, n: self.n })
    }

    pub fn radical_level(&self) -> Level {
        Level::new(self.radical).expect("radical of a positive level is positive")
    }

    pub fn require_squarefree(&self) -> Result<()> {
        if self.squarefree {
            Ok(())
        } else {
            Err(Error::NotSquarefree(self.n))
        }
    }

    pub fn require_coprime_to_6(&self) -> Result<()> {
        if self.coprime6 {
            Ok(())
        } else {
            Err(Error::NotCoprimeTo6(self.n))
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

pub fn factorize(n: u64) -> Result<Level> {
    factorize_with(n, &TrialDivision)
}

pub fn factorize_with(n: u64, backend: &dyn Factorizer) -> Result<Level> {
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let factors = if n == 1 { Vec::new() } else { backend.factor(n) };
    debug_assert_eq!(
        factors.iter().map(|&(p, e)| p.pow(e)).product::<u64>(),
        n,
        "factorization backend returned a wrong product"
    );

    let mut divisors = vec![1u64];
    for &(p, e) in &factors {
        let mut next = Vec::with_capacity(divisors.len() * (e as usize + 1));
        for &d in &divisors {
            let mut pk = 1u64;
            for _ in 0..=e {
                next.push(d * pk);
                pk *= p;
            }
        }
        divisors = next;
    }
    divisors.sort_unstable();

    let radical = factors.iter().map(|&(p, _)| p).product();
    let squarefree = factors.iter().all(|&(_, e)| e == 1);
    Ok(Level {
        n,
        factors,
        divisors,
        radical,
        squarefree,
        coprime6: !n.is_multiple_of(2) && !n.is_multiple_of(3),
    })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let f = TrialDivision.factor(n);
    f.len() == 1 && f[0].1 == 1
}

/// `h_N = gcd({p - 1 : p | N} ∪ {24}) / 2`.
pub fn h_of(level: &Level) -> Result<u64> {
    if level.omega() == 0 {
        return Err(Error::NoPrimeDivisors(level.n));
    }
    let g = level.primes().fold(24u64, |g, p| g.gcd(&(p - 1)));
    if g % 2 == 1 {
        return Err(Error::HUndefined(level.n));
    }
    Ok(g / 2)
}

/// Every prime divisor exceeds 5 and is 1 or 5 mod 24, with at least one 5 mod 24.
pub fn in_s(level: &Level) -> Result<bool> {
    if level.omega() == 0 {
        return Err(Error::NoPrimeDivisors(level.n));
    }
    let all_ok = level.primes().all(|p| p > 5 && matches!(p % 24, 1 | 5));
    let some_five = level.primes().any(|p| p % 24 == 5);
    Ok(all_ok && some_five)
}

/// Least residues mod 24 of the prime divisors of a level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ResidueSet(BTreeSet<u64>);

impl ResidueSet {
    pub fn contains(&self, r: u64) -> bool {
        self.0.contains(&r)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset_of(&self, allowed: &[u64]) -> bool {
        self.0.iter().all(|r| allowed.contains(r))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<u64> for ResidueSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        ResidueSet(iter.into_iter().map(|r| r % 24).collect())
    }
}

impl fmt::Display for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

pub fn residue_set(level: &Level) -> Result<ResidueSet> {
    if level.omega() == 0 {
        return Err(Error::NoPrimeDivisors(level.n));
    }
    Ok(level.primes().collect())
}

// (2/n) for odd n, indexed by n mod 8.
const TWO_TABLE: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

fn low_bits(x: &BigInt) -> u64 {
    // two's-complement low bits, so negative values give the right residue mod 8
    let mag = x.magnitude().iter_u64_digits().next().unwrap_or(0);
    if x.sign() == Sign::Minus {
        mag.wrapping_neg()
    } else {
        mag
    }
}

/// Kronecker symbol `(a / m)` over the full integer domain.
pub fn kronecker(a: &BigInt, m: &BigInt) -> i8 {
    if m.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    if a.is_even() && m.is_even() {
        return 0;
    }
    let mut a = a.clone();
    let mut b = m.clone();

    let v = b.trailing_zeros().unwrap_or(0);
    b >>= v;
    let mut k: i8 = if v.is_multiple_of(2) {
        1
    } else {
        TWO_TABLE[(low_bits(&a) & 7) as usize]
    };
    if b.is_negative() {
        b = -b;
        if a.is_negative() {
            k = -k;
        }
    }

    // b is odd and positive from here on
    loop {
        if a.is_zero() {
            return if b.is_one() { k } else { 0 };
        }
        let v = a.trailing_zeros().unwrap_or(0);
        a >>= v;
        if v % 2 == 1 {
            k *= TWO_TABLE[(low_bits(&b) & 7) as usize];
        }
        if low_bits(&a) & low_bits(&b) & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b.mod_floor(&r);
        b = r;
    }
}

pub fn kronecker_i64(a: i64, m: i64) -> i8 {
    kronecker(&BigInt::from(a), &BigInt::from(m))
}

/// Exact `∏_{p | N} (p + 1) / (p - 1)` raised per prime to `min(cap, ord_p N)`.
pub(crate) fn prime_ratio_product(level: &Level, cap: u32) -> num_rational::BigRational {
    use num_rational::BigRational;
    let mut acc = BigRational::one();
    for &(p, e) in level.factors() {
        let ratio = BigRational::new(BigInt::from(p + 1), BigInt::from(p - 1));
        for _ in 0..e.min(cap) {
            acc *= &ratio;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(n: u64) -> Level {
        Level::new(n).unwrap()
    }

    #[test]
    fn factorize_small_cases() {
        let one = level(1);
        assert!(one.factors().is_empty());
        assert_eq!(one.divisors(), &[1]);
        assert_eq!(one.radical(), 1);

        let l = level(35);
        assert_eq!(l.factors(), &[(5, 1), (7, 1)]);
        assert_eq!(l.divisors(), &[1, 5, 7, 35]);
        assert!(l.is_squarefree());
        assert!(l.is_coprime_to_6());

        let l = level(175);
        assert_eq!(l.factors(), &[(5, 2), (7, 1)]);
        assert_eq!(l.radical(), 35);
        assert!(!l.is_squarefree());
        assert_eq!(l.divisors().len(), 6);
    }

    #[test]
    fn factorize_rejects_zero() {
        assert_eq!(Level::new(0), Err(Error::ZeroLevel));
    }

    #[test]
    fn level_invariants_up_to_1e5() {
        for n in 2..=100_000u64 {
            let l = level(n);
            assert_eq!(l.factors().iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
            let count: usize = l.factors().iter().map(|&(_, e)| e as usize + 1).product();
            assert_eq!(l.divisors().len(), count);
            assert_eq!(*l.divisors().first().unwrap(), 1);
            assert_eq!(*l.divisors().last().unwrap(), n);
            assert!(l.divisors().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(n % l.radical(), 0);
            assert!(level(l.radical()).is_squarefree());
            assert_eq!(l.is_squarefree(), l.radical() == n);
        }
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_of(&level(7)), Ok(3));
        assert_eq!(h_of(&level(35)), Ok(1));
        assert_eq!(h_of(&level(145)), Ok(2));
        assert_eq!(h_of(&level(73)), Ok(12));
        assert_eq!(h_of(&level(1)), Err(Error::NoPrimeDivisors(1)));
        assert_eq!(h_of(&level(10)), Err(Error::HUndefined(10)));
    }

    #[test]
    fn s_membership_examples() {
        assert!(in_s(&level(29)).unwrap());
        assert!(!in_s(&level(145)).unwrap());
        assert!(in_s(&level(2117)).unwrap());
        assert!(!in_s(&level(73)).unwrap());
        assert!(!in_s(&level(5)).unwrap());
        assert!(in_s(&level(1)).is_err());
    }

    #[test]
    fn residue_examples() {
        let r = residue_set(&level(35)).unwrap();
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![5, 7]);
        let r = residue_set(&level(29 * 53)).unwrap();
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![5]);
        let r = residue_set(&level(13 * 37)).unwrap();
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![13]);
    }

    #[test]
    fn radical_preserves_h_and_s() {
        for n in (5..20_000u64).filter(|n| n % 2 != 0 && n % 3 != 0) {
            let l = level(n);
            let r = l.radical_level();
            assert_eq!(h_of(&l), h_of(&r));
            assert_eq!(in_s(&l), in_s(&r));
        }
    }

    #[test]
    fn kronecker_examples() {
        for m in [-7i64, -1, 1, 2, 3, 8, 15, 1001] {
            assert_eq!(kronecker_i64(1, m), 1);
        }
        assert_eq!(kronecker_i64(5, 11), 1);
        assert_eq!(kronecker_i64(5, 13), -1);
        assert_eq!(kronecker_i64(0, 1), 1);
        assert_eq!(kronecker_i64(2, 0), 0);
        assert_eq!(kronecker_i64(-1, 0), 1);
        assert_eq!(kronecker_i64(4, 2), 0);
        assert_eq!(kronecker_i64(-1, -1), -1);
        assert_eq!(kronecker_i64(3, 2), -1);
        assert_eq!(kronecker_i64(-3, 2), -1);
        assert_eq!(kronecker_i64(-7, 2), 1);
    }

    fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
        let mut r = 1u128;
        let m128 = m as u128;
        let mut b128 = (b % m) as u128;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b128 % m128;
            }
            b128 = b128 * b128 % m128;
            e >>= 1;
        }
        b = r as u64;
        b
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        let primes: Vec<u64> = (3..400).filter(|&p| is_prime(p)).collect();
        for &p in &primes {
            for a in -60i64..60 {
                let ar = a.rem_euclid(p as i64) as u64;
                if ar == 0 {
                    assert_eq!(kronecker_i64(a, p as i64), 0);
                    continue;
                }
                let e = pow_mod(ar, (p - 1) / 2, p);
                let expected = if e == 1 { 1 } else { -1 };
                assert_eq!(kronecker_i64(a, p as i64), expected, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_big_arguments() {
        // (a + m*t / m) = (a / m) for odd positive m
        let m = BigInt::from(1_000_003u64);
        let big = BigInt::from(7u8).pow(80) + BigInt::from(5);
        let reduced = big.mod_floor(&m);
        assert_eq!(kronecker(&big, &m), kronecker(&reduced, &m));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kronecker_multiplicative_in_numerator(a in -5000i64..5000, b in -5000i64..5000, m in -3000i64..3000) {
                prop_assert_eq!(
                    kronecker_i64(a, m) * kronecker_i64(b, m),
                    kronecker_i64(a * b, m)
                );
            }

            #[test]
            fn kronecker_multiplicative_in_denominator(a in -5000i64..5000, m in -300i64..300, n in -300i64..300) {
                prop_assume!(m != 0 && n != 0);
                prop_assert_eq!(
                    kronecker_i64(a, m) * kronecker_i64(a, n),
                    kronecker_i64(a, m * n)
                );
            }
        }
    }
}
