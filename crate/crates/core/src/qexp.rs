//! Exact q-expansions of eta-quotients at the cusp ∞.
//!
//! `η(τ) = q^{1/24} ∏_{n>=1} (1 - q^n)`. The product is expanded with the
//! pentagonal number theorem and raised to integer powers (negative
//! included) with the J.C.P. Miller recurrence, all over `BigInt`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::etacore::EtaExponents;
use crate::wire::{big_from_number, big_to_number};

/// `q^lead * (c_0 + c_1 q + ... + c_{T-1} q^{T-1} + O(q^T))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    lead: Rational64,
    coeffs: Vec<BigInt>,
}

impl QSeries {
    pub fn new(lead: Rational64, coeffs: Vec<BigInt>) -> Self {
        QSeries { lead, coeffs }
    }

    pub fn one(terms: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); terms];
        if terms > 0 {
            coeffs[0] = BigInt::one();
        }
        QSeries { lead: Rational64::zero(), coeffs }
    }

    pub fn lead(&self) -> Rational64 {
        self.lead
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Number of known coefficients.
    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Exponent of the first nonzero term, if one is within the truncation.
    pub fn order(&self) -> Option<Rational64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.lead + Rational64::from_integer(i as i64))
    }

    /// Product, truncated to the shorter of the two inputs.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let t = self.terms().min(other.terms());
        QSeries {
            lead: self.lead + other.lead,
            coeffs: mul_truncated(&self.coeffs, &other.coeffs, t),
        }
    }

    pub fn truncate(&self, terms: usize) -> QSeries {
        let t = terms.min(self.terms());
        QSeries { lead: self.lead, coeffs: self.coeffs[..t].to_vec() }
    }

    pub fn to_record(&self) -> QSeriesRecord {
        QSeriesRecord {
            lead: (*self.lead.numer(), *self.lead.denom()),
            coeffs: self.coeffs.iter().map(big_to_number).collect(),
        }
    }

    pub fn from_record(rec: &QSeriesRecord) -> Result<QSeries> {
        if rec.lead.1 == 0 {
            return Err(Error::Parse("zero denominator in leading exponent".into()));
        }
        let coeffs = rec.coeffs.iter().map(big_from_number).collect::<Result<Vec<_>>>()?;
        Ok(QSeries { lead: Rational64::new(rec.lead.0, rec.lead.1), coeffs })
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q^({}/{}) * (", self.lead.numer(), self.lead.denom())?;
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = match j {
                0 => mag.to_string(),
                1 => format!("{mag}*q"),
                _ => format!("{mag}*q^{j}"),
            };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            write!(f, "{body}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{}))", self.terms())
    }
}

/// JSON shape `{lead: [a, b], coeffs: [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSeriesRecord {
    pub lead: (i64, i64),
    pub coeffs: Vec<serde_json::Number>,
}

fn mul_truncated(a: &[BigInt], b: &[BigInt], terms: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); terms];
    for (i, x) in a.iter().enumerate().take(terms) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(terms - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `∏_{n>=1} (1 - q^n)` to `terms` coefficients.
fn euler_product(terms: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); terms];
    if terms == 0 {
        return c;
    }
    c[0] = BigInt::one();
    // exponents k(3k-1)/2 and k(3k+1)/2 for k >= 1, sign (-1)^k
    let mut k: usize = 1;
    loop {
        let a = k * (3 * k - 1) / 2;
        if a >= terms {
            break;
        }
        let sign = if k.is_multiple_of(2) { 1 } else { -1 };
        c[a] += sign;
        let b = k * (3 * k + 1) / 2;
        if b < terms {
            c[b] += sign;
        }
        k += 1;
    }
    c
}

/// `f^a` for a power series with `f_0 = 1`, by
/// `n g_n = Σ_{j=1}^{n} ((a+1) j - n) f_j g_{n-j}`.
fn power_unit_series(f: &[BigInt], a: i64, terms: usize) -> Vec<BigInt> {
    let mut g = vec![BigInt::zero(); terms];
    if terms == 0 {
        return g;
    }
    g[0] = BigInt::one();
    let a1 = BigInt::from(a) + 1;
    for n in 1..terms {
        let mut acc = BigInt::zero();
        for j in 1..=n.min(f.len() - 1) {
            if f[j].is_zero() {
                continue;
            }
            let w = &a1 * BigInt::from(j) - BigInt::from(n);
            acc += w * &f[j] * &g[n - j];
        }
        let (q, r) = acc.div_rem(&BigInt::from(n));
        debug_assert!(r.is_zero(), "power of a unit series with integer coefficients stays integral");
        g[n] = q;
    }
    g
}

/// `∏ (1 - q^n)^exponent` to `terms` coefficients; the `q^{exponent/24}`
/// prefactor of `η^exponent` is left out (`lead = 0`).
pub fn eta_power_series(exponent: i64, terms: usize) -> QSeries {
    let coeffs = match exponent {
        0 => QSeries::one(terms).coeffs,
        1 => euler_product(terms),
        _ => power_unit_series(&euler_product(terms), exponent, terms),
    };
    QSeries { lead: Rational64::zero(), coeffs }
}

/// Expansion of `∏_δ η(δτ)^{r_δ}` at ∞ with `lead = Σ δ r_δ / 24`.
pub fn quotient_series(e: &EtaExponents, terms: usize) -> Result<QSeries> {
    let mut acc = QSeries::one(terms).coeffs;
    for (delta, r) in e.pairs() {
        let delta = delta as usize;
        let inner = eta_power_series(r, terms.div_ceil(delta));
        let mut spread = vec![BigInt::zero(); terms];
        for (i, c) in inner.coeffs.into_iter().enumerate() {
            if i * delta < terms {
                spread[i * delta] = c;
            }
        }
        acc = mul_truncated(&acc, &spread, terms);
    }
    let lead = i64::try_from(e.delta_sum()).map_err(|_| Error::Overflow("leading exponent"))?;
    Ok(QSeries { lead: Rational64::new(lead, 24), coeffs: acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::Level;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// ∏_{n<T} (1 - q^n) by direct truncated multiplication.
    fn naive_euler(terms: usize) -> Vec<BigInt> {
        let mut acc = ints(&[1]);
        acc.resize(terms, BigInt::zero());
        for n in 1..terms {
            let mut factor = vec![BigInt::zero(); terms];
            factor[0] = BigInt::one();
            factor[n] = BigInt::from(-1);
            acc = mul_truncated(&acc, &factor, terms);
        }
        acc
    }

    fn partitions(n: usize) -> Vec<BigInt> {
        // p(n) by counting parts, independent of any series inversion
        let mut p = vec![BigInt::zero(); n];
        p[0] = BigInt::one();
        for part in 1..n {
            for total in part..n {
                let prev = p[total - part].clone();
                p[total] += prev;
            }
        }
        p
    }

    #[test]
    fn eta_first_terms() {
        let s = eta_power_series(1, 8);
        assert_eq!(s.coeffs(), ints(&[1, -1, -1, 0, 0, 1, 0, 1]).as_slice());
        assert_eq!(s.coeffs(), naive_euler(8).as_slice());
        assert_eq!(eta_power_series(0, 4).coeffs(), ints(&[1, 0, 0, 0]).as_slice());
    }

    #[test]
    fn euler_product_matches_naive_product() {
        assert_eq!(euler_product(200), naive_euler(200));
    }

    #[test]
    fn inverse_eta_is_partition_generating_function() {
        let s = eta_power_series(-1, 6);
        assert_eq!(s.coeffs(), ints(&[1, 1, 2, 3, 5, 7]).as_slice());
        assert_eq!(eta_power_series(-1, 120).coeffs(), partitions(120).as_slice());
    }

    #[test]
    fn powers_match_repeated_multiplication() {
        let t = 40;
        let base = naive_euler(t);
        let mut acc = QSeries::one(t).coeffs;
        for a in 1..=30i64 {
            acc = mul_truncated(&acc, &base, t);
            assert_eq!(eta_power_series(a, t).coeffs(), acc.as_slice(), "a={a}");
        }
    }

    #[test]
    fn delta_expansion() {
        let e = EtaExponents::new(Level::new(1).unwrap(), vec![24]).unwrap();
        let s = quotient_series(&e, 5).unwrap();
        assert_eq!(s.lead(), Rational64::from_integer(1));
        assert_eq!(s.coeffs(), ints(&[1, -24, 252, -1472, 4830]).as_slice());
        assert_eq!(s.to_string(), "q^(1/1) * (1 - 24*q + 252*q^2 - 1472*q^3 + 4830*q^4 + O(q^5))");
    }

    #[test]
    fn level_five_quotient() {
        let e = EtaExponents::new(Level::new(5).unwrap(), vec![-1, 5]).unwrap();
        let s = quotient_series(&e, 10).unwrap();
        assert_eq!(s.lead(), Rational64::from_integer(1));
        assert_eq!(s.coeffs()[0], BigInt::one());
        assert_eq!(s.order(), Some(Rational64::from_integer(1)));
        let z = EtaExponents::zero(Level::new(35).unwrap());
        let s = quotient_series(&z, 4).unwrap();
        assert_eq!(s, QSeries::one(4));
    }

    #[test]
    fn display_edge_cases() {
        let s = QSeries::new(Rational64::new(-1, 24), ints(&[-1, 0, 3]));
        assert_eq!(s.to_string(), "q^(-1/24) * (-1 + 3*q^2 + O(q^3))");
        let z = QSeries::new(Rational64::zero(), ints(&[0, 0]));
        assert_eq!(z.to_string(), "q^(0/1) * (0 + O(q^2))");
    }

    #[test]
    fn record_round_trip() {
        let e = EtaExponents::new(Level::new(1).unwrap(), vec![-48]).unwrap();
        let s = quotient_series(&e, 60).unwrap();
        let json = serde_json::to_string(&s.to_record()).unwrap();
        let rec: QSeriesRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(QSeries::from_record(&rec).unwrap(), s);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn power_and_inverse_cancel(a in -60i64..60, t in 1usize..60) {
                let s = eta_power_series(a, t).mul(&eta_power_series(-a, t));
                prop_assert_eq!(s, QSeries::one(t));
            }

            #[test]
            fn quotient_series_is_multiplicative(
                n in prop::sample::select(vec![1u64, 5, 7, 35, 77]),
                seed_a in prop::collection::vec(-8i64..8, 4),
                seed_b in prop::collection::vec(-8i64..8, 4),
            ) {
                let l = Level::new(n).unwrap();
                let m = l.divisors().len();
                let a = EtaExponents::new(l.clone(), seed_a[..m].to_vec()).unwrap();
                let b = EtaExponents::new(l, seed_b[..m].to_vec()).unwrap();
                let t = 30;
                let lhs = quotient_series(&a.combine(&b).unwrap(), t).unwrap();
                let rhs = quotient_series(&a, t).unwrap().mul(&quotient_series(&b, t).unwrap());
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn lead_integral_iff_delta_congruence(
                n in prop::sample::select(vec![5u64, 7, 35]),
                seed in prop::collection::vec(-30i64..30, 4),
            ) {
                let l = Level::new(n).unwrap();
                let m = l.divisors().len();
                let e = EtaExponents::new(l, seed[..m].to_vec()).unwrap();
                let s = quotient_series(&e, 3).unwrap();
                prop_assert_eq!(s.lead().is_integer(), e.congruence_delta());
                prop_assert!(s.coeffs()[0].is_one());
            }
        }
    }
}
