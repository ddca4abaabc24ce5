//! Cusps of `Γ_0(N)` at squarefree level, orders of vanishing of
//! eta-quotients there, and the cusp matrix `A_N` whose rows and columns
//! are permutations of the divisors of `N`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arithmetic::Level;
use crate::error::{Error, Result};
use crate::etacore::EtaExponents;

/// The cusp `1/d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cusp {
    pub d: u64,
}

pub fn cusp_set(level: &Level) -> Result<Vec<Cusp>> {
    level.require_squarefree()?;
    Ok(level.divisors().iter().map(|&d| Cusp { d }).collect())
}

/// Order of vanishing at the cusp `1/d`, relative to `Γ_0(N)`:
///
/// `v = (N/24) Σ_δ gcd(d,δ)² r_δ / (gcd(d, N/d) · d · δ)`.
///
/// Evaluated term by term in exact rationals. Valid for any `d | N`, not
/// only at squarefree level.
pub fn vanishing_order(e: &EtaExponents, d: u64) -> Result<BigRational> {
    let level = e.level();
    let n = level.n();
    if !level.divides(d) {
        return Err(Error::NotADivisor { d, n });
    }
    let width = d.gcd(&(n / d));
    let mut acc = BigRational::zero();
    for (delta, r) in e.iter() {
        if r == 0 {
            continue;
        }
        let g = d.gcd(&delta);
        let num = BigInt::from(g) * BigInt::from(g) * BigInt::from(r);
        let den = BigInt::from(width) * BigInt::from(d) * BigInt::from(delta);
        acc += BigRational::new(num, den);
    }
    Ok(acc * BigRational::new(BigInt::from(n), BigInt::from(24)))
}

/// Orders of vanishing at every cusp, indexed by ascending divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuspOrderVector {
    divisors: Vec<u64>,
    orders: Vec<BigRational>,
}

impl CuspOrderVector {
    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn orders(&self) -> &[BigRational] {
        &self.orders
    }

    pub fn get(&self, d: u64) -> Option<&BigRational> {
        self.divisors.binary_search(&d).ok().map(|i| &self.orders[i])
    }

    /// `24 v`, which is integral at squarefree level.
    pub fn scaled(&self) -> Vec<BigRational> {
        let t = BigRational::from_integer(BigInt::from(24));
        self.orders.iter().map(|v| v * &t).collect()
    }

    pub fn min(&self) -> Option<&BigRational> {
        self.orders.iter().min()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.orders.iter().all(|v| !v.is_negative())
    }

    pub fn is_cuspidal(&self) -> bool {
        self.orders.iter().all(|v| v.is_positive())
    }

    /// `(d, numerator, denominator)` triples.
    pub fn triples(&self) -> Vec<(u64, BigInt, BigInt)> {
        self.divisors
            .iter()
            .zip(&self.orders)
            .map(|(&d, v)| (d, v.numer().clone(), v.denom().clone()))
            .collect()
    }

    pub fn from_triples(triples: &[(u64, BigInt, BigInt)]) -> Result<Self> {
        let mut divisors = Vec::with_capacity(triples.len());
        let mut orders = Vec::with_capacity(triples.len());
        for (d, num, den) in triples {
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator at cusp 1/{d}")));
            }
            divisors.push(*d);
            orders.push(BigRational::new(num.clone(), den.clone()));
        }
        if !divisors.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parse("cusp divisors must be strictly ascending".into()));
        }
        Ok(CuspOrderVector { divisors, orders })
    }
}

/// Evaluates [`vanishing_order`] at every divisor. Works at any level.
pub fn per_cusp_orders(e: &EtaExponents) -> Result<CuspOrderVector> {
    let divisors = e.level().divisors().to_vec();
    let orders = divisors
        .iter()
        .map(|&d| vanishing_order(e, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(CuspOrderVector { divisors, orders })
}

/// `A_N[i][j] = N gcd(d_i, d_j)² / (d_i d_j)` over ascending divisors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuspMatrix {
    level: Level,
    rows: Vec<Vec<u64>>,
}

pub(crate) fn matrix_entry(n: u64, a: u64, b: u64) -> u64 {
    // N g² / (ab) = (N / lcm(a,b)) * g; lcm | N at squarefree level
    let g = a.gcd(&b);
    let l = a / g * b;
    n / l * g
}

impl CuspMatrix {
    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn divisors(&self) -> &[u64] {
        self.level.divisors()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn row(&self, d: u64) -> Result<&[u64]> {
        let i = self.level.divisor_index(d)?;
        Ok(&self.rows[i])
    }

    pub fn entry(&self, di: u64, dj: u64) -> Result<u64> {
        let i = self.level.divisor_index(di)?;
        let j = self.level.divisor_index(dj)?;
        Ok(self.rows[i][j])
    }

    /// `A_N r`, i.e. `24 v` at every cusp.
    pub fn apply(&self, r: &[i64]) -> Vec<BigInt> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(r)
                    .map(|(&a, &x)| BigInt::from(a) * BigInt::from(x))
                    .sum()
            })
            .collect()
    }

    pub fn to_record(&self) -> CuspMatrixRecord {
        CuspMatrixRecord {
            divisors: self.divisors().to_vec(),
            rows: self.rows.clone(),
        }
    }

    /// Rebuilds from a record, rejecting anything that is not exactly `A_N`.
    pub fn from_record(rec: &CuspMatrixRecord) -> Result<Self> {
        let n = *rec
            .divisors
            .last()
            .ok_or_else(|| Error::Parse("empty divisor list".into()))?;
        let m = cusp_matrix(&Level::new(n)?)?;
        if m.divisors() != rec.divisors.as_slice() || m.rows != rec.rows {
            return Err(Error::Parse(format!("record is not the cusp matrix of {n}")));
        }
        Ok(m)
    }
}

/// JSON shape `{divisors: [...], rows: [[...]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspMatrixRecord {
    pub divisors: Vec<u64>,
    pub rows: Vec<Vec<u64>>,
}

pub fn cusp_matrix(level: &Level) -> Result<CuspMatrix> {
    level.require_squarefree()?;
    let n = level.n();
    let divs = level.divisors();
    let rows = divs
        .iter()
        .map(|&a| divs.iter().map(|&b| matrix_entry(n, a, b)).collect())
        .collect();
    Ok(CuspMatrix { level: level.clone(), rows })
}

/// Orders through the matrix route: `v = A_N r / 24`.
pub fn orders_vector(e: &EtaExponents) -> Result<CuspOrderVector> {
    let m = cusp_matrix(e.level())?;
    let scale = BigInt::from(24);
    let orders = m
        .apply(e.exponents())
        .into_iter()
        .map(|x| BigRational::new(x, scale.clone()))
        .collect();
    Ok(CuspOrderVector {
        divisors: e.level().divisors().to_vec(),
        orders,
    })
}

/// Whether every row and column of `A_N` is a permutation of the divisors.
pub fn check_latin(level: &Level) -> Result<bool> {
    level.require_coprime_to_6()?;
    let m = cusp_matrix(level)?;
    let divs = level.divisors();
    let is_perm = |mut xs: Vec<u64>| {
        xs.sort_unstable();
        xs == divs
    };
    let size = divs.len();
    for i in 0..size {
        if !is_perm(m.rows[i].clone()) {
            return Ok(false);
        }
        if !is_perm((0..size).map(|r| m.rows[r][i]).collect()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The column `d_j = gcd(c, d_i) gcd(N/c, N/d_i)` at which row `d_i` of
/// `A_N` holds the entry `c`.
pub fn latin_witness(level: &Level, c: u64, d_i: u64) -> Result<u64> {
    level.require_squarefree()?;
    let n = level.n();
    for d in [c, d_i] {
        if !level.divides(d) {
            return Err(Error::NotADivisor { d, n });
        }
    }
    let d_j = c.gcd(&d_i) * (n / c).gcd(&(n / d_i));
    if matrix_entry(n, d_i, d_j) != c {
        return Err(Error::TheoremViolation(format!(
            "witness {d_j} for entry {c} in row {d_i} of A_{n} does not check out"
        )));
    }
    Ok(d_j)
}
