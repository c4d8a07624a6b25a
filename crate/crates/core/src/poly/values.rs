//! Factorization of `P(1), …, P(x)` by sieving arithmetic progressions.

use super::modp::{roots_mod_p, RootsModP};
use super::PolynomialZ;
use crate::arith::{is_prime_u64, Factorization};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use std::collections::BTreeSet;
use std::ops::Range;

/// Above this sieving bound the prime table gets too large for a desk run.
const MAX_BOUND: u64 = 200_000_000;

fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn isqrt_ceil(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r.saturating_mul(r) < v {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= v {
        r -= 1;
    }
    r
}

/// Factorizations of `|P(n)|` for `n` in one block, stored flat.
#[derive(Debug, Clone)]
pub struct BlockFactors {
    start: u64,
    values: Vec<u64>,
    offsets: Vec<u32>,
    entries: Vec<(u64, u32)>,
}

impl BlockFactors {
    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `|P(start + i)|`.
    pub fn value(&self, i: usize) -> u64 {
        self.values[i]
    }

    /// Prime factorization of `|P(start + i)|`, ascending primes.
    pub fn factors(&self, i: usize) -> &[(u64, u32)] {
        &self.entries[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn factorization(&self, i: usize) -> Factorization {
        Factorization::from_pairs(self.factors(i).iter().copied())
    }
}

/// Precomputed progressions for sieving `P(n)`, `1 <= n <= x`.
#[derive(Debug, Clone)]
pub struct PolyValueSieve {
    poly: PolynomialZ,
    x: u64,
    bound: u64,
    /// `(p, roots of P mod p)` for every prime `p <= bound`; an empty list
    /// is skipped, `None` means `P ≡ 0 (mod p)`.
    progressions: Vec<(u64, Option<Vec<u64>>)>,
}

impl PolyValueSieve {
    /// `bound` defaults to `max(2x, ⌈sqrt(max |P(n)|)⌉)`, which makes every
    /// leftover cofactor prime.
    pub fn new(poly: &PolynomialZ, x: u64, bound: Option<u64>) -> Result<Self> {
        if poly.degree() == 0 {
            return Err(Error::InvalidArgument("polynomial must be nonconstant".into()));
        }
        if x == 0 {
            return Err(Error::InvalidArgument("x must be positive".into()));
        }
        let max_val = poly.max_abs_value(x).ok_or(Error::OutOfRange {
            what: "max |P(n)|",
            value: u128::MAX,
            limit: u64::MAX as u128,
        })?;
        let bound = bound.unwrap_or_else(|| (2 * x).max(isqrt_ceil(max_val))).max(2);
        if bound > MAX_BOUND {
            return Err(Error::Precondition(format!(
                "sieving bound {bound} for {poly} up to x = {x} exceeds the feasible limit {MAX_BOUND}"
            )));
        }
        let progressions = primes_up_to(bound)
            .into_iter()
            .filter_map(|p| match roots_mod_p(poly, p) {
                RootsModP::All => Some((p, None)),
                RootsModP::Roots(r) if r.is_empty() => None,
                RootsModP::Roots(r) => Some((p, Some(r))),
            })
            .collect();
        Ok(Self {
            poly: poly.clone(),
            x,
            bound,
            progressions,
        })
    }

    pub fn poly(&self) -> &PolynomialZ {
        &self.poly
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Factors `|P(n)|` for `n` in `range ⊆ [1, x]`.
    pub fn factor_block(&self, range: Range<u64>) -> Result<BlockFactors> {
        let len = (range.end - range.start) as usize;
        let mut values = Vec::with_capacity(len);
        for n in range.clone() {
            let v = self.poly.eval(n as i64).ok_or(Error::Overflow("polynomial value"))?;
            if v == 0 {
                return Err(Error::Precondition(format!("P({n}) = 0 for P = {}", self.poly)));
            }
            values.push(u64::try_from(v.unsigned_abs()).map_err(|_| Error::Overflow("polynomial value"))?);
        }
        let mut rem = values.clone();
        // hits in ascending prime order: (index, p, e)
        let mut hits: Vec<(u32, u64, u32)> = Vec::new();
        let divide = |i: usize, p: u64, rem: &mut Vec<u64>, hits: &mut Vec<(u32, u64, u32)>| {
            let mut e = 0;
            while rem[i] % p == 0 {
                rem[i] /= p;
                e += 1;
            }
            if e > 0 {
                hits.push((i as u32, p, e));
            }
        };
        for (p, roots) in &self.progressions {
            let p = *p;
            match roots {
                None => {
                    for i in 0..len {
                        divide(i, p, &mut rem, &mut hits);
                    }
                }
                Some(roots) => {
                    for &r in roots {
                        // first n >= start with n ≡ r (mod p)
                        let off = (r + p - range.start % p) % p;
                        let mut i = off as usize;
                        while i < len {
                            divide(i, p, &mut rem, &mut hits);
                            i += p as usize;
                        }
                    }
                }
            }
        }
        let bound_sq = (self.bound as u128) * (self.bound as u128);
        for (i, &r) in rem.iter().enumerate() {
            if r > 1 {
                if (r as u128) >= bound_sq && !is_prime_u64(r) {
                    return Err(Error::SieveBound {
                        n: range.start + i as u64,
                        cofactor: r,
                        bound: self.bound,
                        required: isqrt_ceil(r),
                    });
                }
                hits.push((i as u32, r, 1));
            }
        }
        // stable counting sort by index keeps primes ascending within each n
        let mut offsets = vec![0u32; len + 1];
        for &(i, _, _) in &hits {
            offsets[i as usize + 1] += 1;
        }
        for i in 0..len {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut entries = vec![(0u64, 0u32); hits.len()];
        for (i, p, e) in hits {
            let slot = &mut cursor[i as usize];
            entries[*slot as usize] = (p, e);
            *slot += 1;
        }
        Ok(BlockFactors {
            start: range.start,
            values,
            offsets,
            entries,
        })
    }

    /// Applies `f` to every block of `[1, x]` and returns the results in
    /// block order.
    pub fn map_blocks<T, F>(&self, exec: Exec, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&BlockFactors) -> T + Sync + Send,
    {
        par::map_blocks(1..self.x + 1, exec, |r| self.factor_block(r).map(|b| f(&b)))
            .into_iter()
            .collect()
    }
}

/// Factorizations of `P(1), …, P(x)` (absolute values).
pub fn factor_poly_values(poly: &PolynomialZ, x: u64, bound: Option<u64>, exec: Exec) -> Result<Vec<Factorization>> {
    let sieve = PolyValueSieve::new(poly, x, bound)?;
    let parts = sieve.map_blocks(exec, |b| (0..b.len()).map(|i| b.factorization(i)).collect::<Vec<_>>())?;
    Ok(parts.into_iter().flatten().collect())
}

/// `N_P(x)`: prime powers `p^k` with `p >= threshold` and `p^k ∥ P(n)`
/// for some `n <= x`, plus the witnesses.
#[derive(Debug, Clone)]
pub struct LargePrimePowerSet {
    x: u64,
    threshold: u64,
    members: BTreeSet<(u64, u32)>,
    witnesses: Vec<(u64, u64, u32)>,
}

impl LargePrimePowerSet {
    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn members(&self) -> &BTreeSet<(u64, u32)> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `(n, p, k)` with `p^k ∥ P(n)`, one per occurrence, ordered by `n`.
    pub fn witnesses(&self) -> &[(u64, u64, u32)] {
        &self.witnesses
    }
}

/// Computes `N_P(x)` with threshold `p >= threshold` (default `x`).
pub fn large_prime_powers(poly: &PolynomialZ, x: u64, threshold: Option<u64>, exec: Exec) -> Result<LargePrimePowerSet> {
    let threshold = threshold.unwrap_or(x);
    let sieve = PolyValueSieve::new(poly, x, None)?;
    let parts = sieve.map_blocks(exec, |b| {
        let mut out = Vec::new();
        for i in 0..b.len() {
            for &(p, k) in b.factors(i) {
                if p >= threshold {
                    out.push((b.start() + i as u64, p, k));
                }
            }
        }
        out
    })?;
    let witnesses: Vec<_> = parts.into_iter().flatten().collect();
    let members = witnesses.iter().map(|&(_, p, k)| (p, k)).collect();
    Ok(LargePrimePowerSet {
        x,
        threshold,
        members,
        witnesses,
    })
}
