//! Independent oracles shared by the integration tests. Nothing here calls
//! into the search or the cusp module.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;

pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    let mut sieve = vec![true; hi as usize + 1];
    let mut out = Vec::new();
    for i in 2..=hi as usize {
        if sieve[i] {
            if i as u64 >= lo {
                out.push(i as u64);
            }
            let mut j = i * i;
            while j <= hi as usize {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

pub fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).take_while(|d| d * d <= n).filter(|d| n.is_multiple_of(*d)).flat_map(|d| [d, n / d]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn is_squarefree(n: u64) -> bool {
    prime_factors(n).iter().all(|&(_, e)| e == 1)
}

/// `½ gcd(p-1 for p | n, 24)`.
pub fn h_oracle(n: u64) -> u64 {
    prime_factors(n).iter().fold(24, |g, &(p, _)| g.gcd(&(p - 1))) / 2
}

pub fn in_s_oracle(n: u64) -> bool {
    let ps = prime_factors(n);
    !ps.is_empty()
        && ps.iter().all(|&(p, _)| p > 5 && (p % 24 == 1 || p % 24 == 5))
        && ps.iter().any(|&(p, _)| p % 24 == 5)
}

/// `24·v` at the cusp `1/d` times the positive factor `gcd(d, n/d)·d`, as an
/// integer: `Σ gcd(d,δ)² r_δ (n/δ)`.
pub fn scaled_order(n: u64, r: &[(u64, i64)], d: u64) -> i128 {
    r.iter()
        .map(|&(delta, x)| {
            let g = d.gcd(&delta) as i128;
            g * g * x as i128 * (n / delta) as i128
        })
        .sum()
}

/// Exact `24·v` at `1/d` as (numerator, denominator) in lowest terms.
pub fn order24(n: u64, r: &[(u64, i64)], d: u64) -> (i128, i128) {
    let num = scaled_order(n, r, d);
    let den = (d.gcd(&(n / d)) * d) as i128;
    let g = num.gcd(&den);
    (num / g, den / g)
}

pub fn passes_congruences(n: u64, r: &[(u64, i64)]) -> bool {
    let a: i128 = r.iter().map(|&(d, x)| d as i128 * x as i128).sum();
    let b: i128 = r.iter().map(|&(d, x)| (n / d) as i128 * x as i128).sum();
    a % 24 == 0 && b % 24 == 0
}

/// Is `r` (weight `k`) a holomorphic eta-quotient of level `n`? Checks weight,
/// both congruences and the order at every divisor of `n`.
pub fn holomorphic_oracle(n: u64, k: i64, r: &[(u64, i64)]) -> bool {
    r.iter().map(|&(_, x)| x).sum::<i64>() == 2 * k
        && passes_congruences(n, r)
        && divisors(n).iter().all(|&d| scaled_order(n, r, d) >= 0)
}

/// `floor(2k ∏ ((p+1)/(p-1))^{min(2, e)})`.
pub fn window_oracle(n: u64, k: i64) -> i64 {
    let mut num = BigInt::from(2 * k);
    let mut den = BigInt::from(1);
    for (p, e) in prime_factors(n) {
        for _ in 0..e.min(2) {
            num *= p + 1;
            den *= p - 1;
        }
    }
    (num / den).try_into().unwrap()
}

/// Every holomorphic eta-quotient of level `n` and weight `k` with
/// `Σ|r| <= bound`, by scanning the whole box with the last exponent fixed by
/// the weight. Sorted lexicographically by exponent vector.
pub fn box_scan(n: u64, k: i64, bound: i64) -> Vec<Vec<i64>> {
    let divs = divisors(n);
    let m = divs.len();
    let mut out = Vec::new();
    let mut r = vec![-bound; m.saturating_sub(1)];
    if m == 1 {
        let cand = vec![2 * k];
        if cand[0].abs() <= bound && holomorphic_oracle(n, k, &[(1, 2 * k)]) {
            out.push(cand);
        }
        return out;
    }
    loop {
        let partial: i64 = r.iter().sum();
        let last = 2 * k - partial;
        let l1: i64 = r.iter().map(|x| x.abs()).sum::<i64>() + last.abs();
        if l1 <= bound {
            let mut full = r.clone();
            full.push(last);
            let pairs: Vec<(u64, i64)> = divs.iter().copied().zip(full.iter().copied()).collect();
            if holomorphic_oracle(n, k, &pairs) {
                out.push(full);
            }
        }
        let mut i = 0;
        loop {
            if i == r.len() {
                out.sort();
                return out;
            }
            if r[i] < bound {
                r[i] += 1;
                break;
            }
            r[i] = -bound;
            i += 1;
        }
    }
}

/// Coefficients of `∏_{n>=1} (1 - q^n)^e` below `q^terms`, by multiplying
/// the factors one at a time.
pub fn naive_eta_power(e: u32, terms: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::from(0); terms];
    if terms == 0 {
        return acc;
    }
    acc[0] = BigInt::from(1);
    for _ in 0..e {
        for n in 1..terms {
            for i in (n..terms).rev() {
                let t = acc[i - n].clone();
                acc[i] -= t;
            }
        }
    }
    acc
}
