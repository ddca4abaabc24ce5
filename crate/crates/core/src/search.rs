//! Exhaustive enumeration of holomorphic eta-quotients in `M_k(Γ_1(N))`.
//!
//! Every holomorphic eta-quotient of weight `k` satisfies the ℓ¹ bound
//! `Σ |r_δ| <= 2k ∏_{p|N} ((p+1)/(p-1))^{min(2, ord_p N)}`, so a finite
//! search over that window is complete. The search is a depth-first walk
//! over the exponents (largest divisor first) that tracks, per cusp, the
//! partial value of `24 v = (A_N r)_d` and cuts a branch as soon as the
//! best completion within the remaining ℓ¹ budget still leaves a pole.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{h_of, prime_ratio_product, Level};
use crate::cusps::{matrix_entry, orders_vector, CuspOrderVector};
use crate::error::{Error, Result};
use crate::etacore::{CharacterKernel, EtaExponents};
use crate::wire::{big_from_number, big_to_number};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Holomorphic,
    Cuspidal,
    WeakWitness,
}

impl SearchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchMode::Holomorphic => "holomorphic",
            SearchMode::Cuspidal => "cuspidal",
            SearchMode::WeakWitness => "weak-witness",
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holomorphic" => Ok(SearchMode::Holomorphic),
            "cuspidal" => Ok(SearchMode::Cuspidal),
            "weak" | "weak-witness" => Ok(SearchMode::WeakWitness),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub level: Level,
    pub weight: u32,
    pub mode: SearchMode,
    pub bound_override: Option<u64>,
}

impl SearchConfig {
    pub fn new(level: Level, weight: i64, mode: SearchMode) -> Result<Self> {
        let weight = check_weight(weight)?;
        level.require_coprime_to_6()?;
        Ok(SearchConfig { level, weight, mode, bound_override: None })
    }

    pub fn holomorphic(n: u64, weight: i64) -> Result<Self> {
        SearchConfig::new(Level::new(n)?, weight, SearchMode::Holomorphic)
    }

    pub fn with_bound(mut self, bound: u64) -> Self {
        self.bound_override = Some(bound);
        self
    }
}

pub(crate) fn check_weight(k: i64) -> Result<u32> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::BadWeight(k));
    }
    u32::try_from(k).map_err(|_| Error::BadWeight(k))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hit {
    pub exponents: EtaExponents,
    pub character: CharacterKernel,
    pub orders: CuspOrderVector,
    pub is_cusp_form: bool,
}

impl Hit {
    fn from_exponents(exponents: EtaExponents) -> Result<Hit> {
        let character = exponents.character_kernel()?;
        let orders = orders_vector(&exponents)?;
        let is_cusp_form = orders.is_cuspidal();
        Ok(Hit { exponents, character, orders, is_cusp_form })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub config: SearchConfig,
    pub hits: Vec<Hit>,
    pub nodes_explored: u64,
    pub bound_used: u64,
}

impl SearchReport {
    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn to_record(&self) -> SearchReportRecord {
        SearchReportRecord {
            level: self.config.level.n(),
            weight: self.config.weight,
            mode: self.config.mode,
            bound: self.bound_used,
            hits: self.hits.iter().map(HitRecord::from).collect(),
            nodes: self.nodes_explored,
        }
    }

    /// Rebuilds a report, recomputing each hit's metadata and rejecting
    /// records whose stored character or orders disagree.
    pub fn from_record(rec: &SearchReportRecord) -> Result<SearchReport> {
        let level = Level::new(rec.level)?;
        let mut config = SearchConfig::new(level.clone(), rec.weight as i64, rec.mode)?;
        // weak mode records the witness norm, not a search window
        if rec.mode != SearchMode::WeakWitness && rec.bound != rw_bound(&level, rec.weight as i64)? {
            config.bound_override = Some(rec.bound);
        }
        let hits = rec
            .hits
            .iter()
            .map(|h| {
                let e = EtaExponents::from_pairs(level.clone(), &h.r)?;
                let hit = if rec.mode == SearchMode::WeakWitness {
                    weak_hit(e)?
                } else {
                    Hit::from_exponents(e)?
                };
                let triples = h
                    .orders
                    .iter()
                    .map(|(d, a, b)| Ok((*d, big_from_number(a)?, big_from_number(b)?)))
                    .collect::<Result<Vec<_>>>()?;
                let stored = CuspOrderVector::from_triples(&triples)?;
                if stored != hit.orders
                    || h.character != hit.character.d()
                    || h.cusp != hit.is_cusp_form
                {
                    return Err(Error::Parse(format!(
                        "hit {:?} metadata disagrees with recomputation",
                        h.r
                    )));
                }
                Ok(hit)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SearchReport {
            config,
            hits,
            nodes_explored: rec.nodes,
            bound_used: rec.bound,
        })
    }
}

/// JSON shape of a [`SearchReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReportRecord {
    pub level: u64,
    pub weight: u32,
    pub mode: SearchMode,
    pub bound: u64,
    pub hits: Vec<HitRecord>,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitRecord {
    pub r: Vec<(u64, i64)>,
    pub character: i64,
    pub orders: Vec<(u64, serde_json::Number, serde_json::Number)>,
    pub cusp: bool,
}

impl From<&Hit> for HitRecord {
    fn from(h: &Hit) -> Self {
        HitRecord {
            r: h.exponents.pairs(),
            character: h.character.d(),
            orders: h
                .orders
                .triples()
                .into_iter()
                .map(|(d, a, b)| (d, big_to_number(&a), big_to_number(&b)))
                .collect(),
            cusp: h.is_cusp_form,
        }
    }
}

/// `floor(2k ∏_{p|N} ((p+1)/(p-1))^{min(2, ord_p N)})`, evaluated exactly.
pub fn rw_bound(level: &Level, k: i64) -> Result<u64> {
    if k < 1 {
        return Err(Error::BadWeight(k));
    }
    let value = prime_ratio_product(level, 2) * BigInt::from(2 * k);
    value
        .floor()
        .to_integer()
        .to_u64()
        .ok_or(Error::Overflow("ℓ¹ window"))
}

/// Precomputed per-level tables for the DFS.
struct Problem {
    size: usize,
    // exponent index visited at each depth
    order: Vec<usize>,
    // cusp matrix, rows in ascending divisor order
    rows: Vec<Vec<i64>>,
    // residue of each divisor mod 24
    residues: Vec<i64>,
    // max/min of row i over the columns still free at depth t: [t][i]
    rem_max: Vec<Vec<i64>>,
    rem_min: Vec<Vec<i64>>,
    target_sum: i64,
    bound: i64,
    strict: bool,
}

#[derive(Clone)]
struct State {
    r: Vec<i64>,
    partial: Vec<i64>,
    sum: i64,
    residue: i64,
    used: i64,
}

impl Problem {
    fn new(level: &Level, weight: u32, bound: u64, strict: bool) -> Result<Problem> {
        level.require_squarefree()?;
        let n = level.n();
        let divs = level.divisors();
        let size = divs.len();
        let to_i64 = |x: u64| i64::try_from(x).map_err(|_| Error::Overflow("cusp matrix entry"));
        let rows = divs
            .iter()
            .map(|&a| divs.iter().map(|&b| to_i64(matrix_entry(n, a, b))).collect())
            .collect::<Result<Vec<Vec<i64>>>>()?;
        let order: Vec<usize> = (0..size).rev().collect();
        let mut rem_max = vec![vec![i64::MIN; size]; size + 1];
        let mut rem_min = vec![vec![i64::MAX; size]; size + 1];
        for t in (0..size).rev() {
            let j = order[t];
            for i in 0..size {
                rem_max[t][i] = rem_max[t + 1][i].max(rows[i][j]);
                rem_min[t][i] = rem_min[t + 1][i].min(rows[i][j]);
            }
        }
        let bound = i64::try_from(bound).map_err(|_| Error::Overflow("ℓ¹ window"))?;
        // keeps every partial row sum far inside i64
        if rows.iter().flatten().any(|&a| a.checked_mul(bound.max(1) * 4).is_none()) {
            return Err(Error::Overflow("search window too large for level"));
        }
        Ok(Problem {
            size,
            order,
            rows,
            residues: divs.iter().map(|&d| (d % 24) as i64).collect(),
            rem_max,
            rem_min,
            target_sum: 2 * weight as i64,
            bound,
            strict,
        })
    }

    fn root(&self) -> State {
        State {
            r: vec![0; self.size],
            partial: vec![0; self.size],
            sum: 0,
            residue: 0,
            used: 0,
        }
    }

    /// Largest value of `Σ_{j free} a_j x_j` over integer `x` with
    /// `Σ x_j = s` and `Σ |x_j| <= b`, given `a_min <= a_j <= a_max`.
    #[inline]
    fn best_completion(a_max: i64, a_min: i64, s: i64, b: i64) -> i64 {
        let p = Integer::div_floor(&(b + s), &2);
        a_max * p - a_min * (p - s)
    }

    /// Whether assigning `x` to the variable at depth `t` can still lead to a
    /// solution. `t + 1` variables are fixed afterwards.
    #[inline]
    fn admissible(&self, st: &State, t: usize, x: i64) -> bool {
        let j = self.order[t];
        let budget = self.bound - st.used - x.abs();
        if budget < 0 {
            return false;
        }
        let s = self.target_sum - st.sum - x;
        let free = self.size - t - 1;
        if free == 0 {
            if s != 0 {
                return false;
            }
        } else if s.abs() > budget {
            return false;
        }
        for i in 0..self.size {
            let fixed = st.partial[i] + self.rows[i][j] * x;
            let best = if free == 0 {
                fixed
            } else {
                fixed + Self::best_completion(self.rem_max[t + 1][i], self.rem_min[t + 1][i], s, budget)
            };
            if best < 0 || (self.strict && best == 0) {
                return false;
            }
        }
        true
    }

    fn assign(&self, st: &mut State, t: usize, x: i64) {
        let j = self.order[t];
        st.r[j] = x;
        st.sum += x;
        st.used += x.abs();
        st.residue = (st.residue + self.residues[j] * x).rem_euclid(24);
        for i in 0..self.size {
            st.partial[i] += self.rows[i][j] * x;
        }
    }

    fn unassign(&self, st: &mut State, t: usize, x: i64) {
        let j = self.order[t];
        st.r[j] = 0;
        st.sum -= x;
        st.used -= x.abs();
        st.residue = (st.residue - self.residues[j] * x).rem_euclid(24);
        for i in 0..self.size {
            st.partial[i] -= self.rows[i][j] * x;
        }
    }

    /// Candidate values at depth `t`, ascending.
    fn candidates(&self, st: &State, t: usize) -> std::ops::RangeInclusive<i64> {
        if t + 1 == self.size {
            let x = self.target_sum - st.sum;
            return x..=x;
        }
        let b = self.bound - st.used;
        -b..=b
    }

    fn dfs(&self, st: &mut State, t: usize, out: &mut Sink) {
        out.nodes += 1;
        if out.done() {
            return;
        }
        if t == self.size {
            if st.residue == 0 {
                out.hits.push(st.r.clone());
            }
            return;
        }
        for x in self.candidates(st, t) {
            if !self.admissible(st, t, x) {
                continue;
            }
            self.assign(st, t, x);
            self.dfs(st, t + 1, out);
            self.unassign(st, t, x);
            if out.done() {
                return;
            }
        }
    }

    /// Runs the subtree under the first branching value `x`.
    fn run_branch(&self, x: i64) -> Sink {
        let mut out = Sink::new(None);
        let mut st = self.root();
        if self.size == 0 || !self.admissible(&st, 0, x) {
            return out;
        }
        self.assign(&mut st, 0, x);
        self.dfs(&mut st, 1, &mut out);
        out
    }
}

struct Sink {
    hits: Vec<Vec<i64>>,
    nodes: u64,
    limit: Option<usize>,
}

impl Sink {
    fn new(limit: Option<usize>) -> Self {
        Sink { hits: Vec::new(), nodes: 0, limit }
    }

    fn done(&self) -> bool {
        self.limit.is_some_and(|l| self.hits.len() >= l)
    }
}

fn prepare(config: &SearchConfig) -> Result<(Problem, u64)> {
    let strict = match config.mode {
        SearchMode::Holomorphic => false,
        SearchMode::Cuspidal => true,
        SearchMode::WeakWitness => return Err(Error::BadMode("weak-witness")),
    };
    check_weight(config.weight as i64)?;
    config.level.require_coprime_to_6()?;
    config.level.require_squarefree()?;
    let bound = match config.bound_override {
        Some(b) => b,
        None => rw_bound(&config.level, config.weight as i64)?,
    };
    Ok((Problem::new(&config.level, config.weight, bound, strict)?, bound))
}

fn finish(config: &SearchConfig, mut raw: Vec<Vec<i64>>, nodes: u64, bound: u64) -> Result<SearchReport> {
    raw.sort();
    let hits = raw
        .into_iter()
        .map(|r| Hit::from_exponents(EtaExponents::new(config.level.clone(), r)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchReport {
        config: config.clone(),
        hits,
        nodes_explored: nodes,
        bound_used: bound,
    })
}

/// All integer exponent vectors of weight `k` satisfying the modularity
/// congruences and holomorphy (or cuspidality) at every cusp, sorted
/// lexicographically over ascending divisors.
pub fn enumerate(config: &SearchConfig) -> Result<SearchReport> {
    let (problem, bound) = prepare(config)?;
    let mut out = Sink::new(None);
    let mut st = problem.root();
    problem.dfs(&mut st, 0, &mut out);
    finish(config, out.hits, out.nodes, bound)
}

/// [`enumerate`] with the first branching level (the exponent of `η(Nτ)`)
/// split across `workers` threads. Output is identical to the serial run.
pub fn enumerate_parallel(config: &SearchConfig, workers: usize) -> Result<SearchReport> {
    if workers <= 1 {
        return enumerate(config);
    }
    let (problem, bound) = prepare(config)?;
    let b = problem.bound;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let parts: Vec<Sink> = pool.install(|| (-b..=b).into_par_iter().map(|x| problem.run_branch(x)).collect());
    // the root node itself
    let mut nodes = 1;
    let mut hits = Vec::new();
    for p in parts {
        nodes += p.nodes;
        hits.extend(p.hits);
    }
    finish(config, hits, nodes, bound)
}

/// Stops at the first hit in search order. Cheaper than [`enumerate`] when
/// only existence matters.
pub fn find_first(config: &SearchConfig) -> Result<Option<Hit>> {
    let (problem, _) = prepare(config)?;
    let mut out = Sink::new(Some(1));
    let mut st = problem.root();
    problem.dfs(&mut st, 0, &mut out);
    out.hits
        .pop()
        .map(|r| Hit::from_exponents(EtaExponents::new(config.level.clone(), r)?))
        .transpose()
}

fn weak_hit(e: EtaExponents) -> Result<Hit> {
    let character = e.character_kernel()?;
    let orders = crate::cusps::per_cusp_orders(&e)?;
    Ok(Hit { exponents: e, character, orders, is_cusp_form: false })
}

/// Report for weak mode: at most one hit, the [`weak_witness`].
pub fn weak_report(level: &Level, k: i64) -> Result<SearchReport> {
    let config = SearchConfig::new(level.clone(), k, SearchMode::WeakWitness)?;
    let witness = weak_witness(level, k)?;
    let bound_used = witness.as_ref().map_or(0, EtaExponents::l1_norm);
    let hits = witness.into_iter().map(weak_hit).collect::<Result<Vec<_>>>()?;
    Ok(SearchReport { config, hits, nodes_explored: 0, bound_used })
}

/// A weakly holomorphic eta-quotient of weight `k` (weight and both
/// congruences, no condition at the cusps), or `None` when `h_N ∤ k`.
///
/// Returns the solution of least ℓ¹ norm, ties broken lexicographically
/// over ascending divisors. When `h_N | k` a solution exists with every
/// `r_δ`, `δ > 1`, in `[0, 24)` and `r_1` absorbing the weight, which caps
/// the shells to scan at `2k + 46 (#divisors - 1)`.
pub fn weak_witness(level: &Level, k: i64) -> Result<Option<EtaExponents>> {
    check_weight(k)?;
    level.require_coprime_to_6()?;
    let h = h_of(level)?;
    if !(k as u64).is_multiple_of(h) {
        return Ok(None);
    }
    let divs = level.divisors();
    let residues: Vec<i64> = divs.iter().map(|&d| (d % 24) as i64).collect();
    let target = 2 * k;
    let max_shell = target + 46 * (divs.len() as i64 - 1);
    let mut r = vec![0i64; divs.len()];
    let mut shell = target;
    while shell <= max_shell {
        if shell_search(&residues, &mut r, 0, shell, target, 0) {
            return Ok(Some(EtaExponents::new(level.clone(), r)?));
        }
        shell += 2;
    }
    Err(Error::TheoremViolation(format!(
        "no weak witness at level {} weight {k} within ℓ¹ {max_shell}",
        level.n()
    )))
}

/// Lexicographically first `r[t..]` with `Σ|r| = mass`, `Σ r = sum` that
/// completes the residue to 0 mod 24.
fn shell_search(residues: &[i64], r: &mut [i64], t: usize, mass: i64, sum: i64, residue: i64) -> bool {
    let free = residues.len() - t;
    if free == 0 {
        return mass == 0 && sum == 0 && residue == 0;
    }
    if free == 1 {
        if mass != sum.abs() {
            return false;
        }
        if (residue + residues[t] * sum).rem_euclid(24) == 0 {
            r[t] = sum;
            return true;
        }
        return false;
    }
    for x in -mass..=mass {
        let m = mass - x.abs();
        let s = sum - x;
        if s.abs() > m || (m - s) % 2 != 0 {
            continue;
        }
        r[t] = x;
        if shell_search(residues, r, t + 1, m, s, (residue + residues[t] * x).rem_euclid(24)) {
            return true;
        }
    }
    r[t] = 0;
    false
}
