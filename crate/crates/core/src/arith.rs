//! Integer substrate: smallest-prime-factor sieve, factorizations, CRT,
//! Euler's totient and the Möbius function.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default sieve limit, overridable from the CLI environment.
pub const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

/// Smallest-prime-factor table for `2 <= n <= limit`.
///
/// Immutable after construction; share it freely across workers.
#[derive(Debug, Clone)]
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

/// Prime factorization as `(prime, exponent)` pairs in ascending prime order.
/// The empty list represents 1.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Factorization {
    entries: Vec<(u64, u32)>,
}

impl FactorSieve {
    /// Linear sieve; `spf[n]` is the smallest prime dividing `n`.
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidArgument(format!(
                "sieve limit must be at least 2, got {limit}"
            )));
        }
        if limit > u32::MAX as u64 - 1 {
            return Err(Error::OutOfRange {
                what: "sieve limit",
                value: limit as u128,
                limit: (u32::MAX - 1) as u128,
            });
        }
        let len = limit as usize + 1;
        let mut spf: Vec<u32> = Vec::new();
        spf.try_reserve_exact(len).map_err(|_| Error::Resource(len))?;
        spf.resize(len, 0);
        let mut primes: Vec<u32> = Vec::new();
        for n in 2..len {
            if spf[n] == 0 {
                spf[n] = n as u32;
                primes.push(n as u32);
            }
            let s = spf[n];
            for &p in &primes {
                if p > s {
                    break;
                }
                let m = n * p as usize;
                if m >= len {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(Self { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] as u64 == n
    }

    /// All primes up to the sieve limit, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `p <= x` (clamped to the limit).
    pub fn primes_up_to(&self, x: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| (p as u64) <= x);
        &self.primes[..end]
    }

    /// Fails with out-of-range when `x` exceeds the sieve limit.
    pub fn check_covers(&self, x: u64) -> Result<()> {
        if x > self.limit {
            return Err(Error::OutOfRange {
                what: "x",
                value: x as u128,
                limit: self.limit as u128,
            });
        }
        Ok(())
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::InvalidArgument("cannot factor 0".into()));
        }
        self.check_covers(n).map_err(|_| Error::OutOfRange {
            what: "n",
            value: n as u128,
            limit: self.limit as u128,
        })?;
        Ok(self.factorize_unchecked(n))
    }

    /// Factorization without range checks; `1 <= n <= limit` is assumed.
    pub fn factorize_unchecked(&self, mut n: u64) -> Factorization {
        let mut entries = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            entries.push((p, e));
        }
        Factorization { entries }
    }

    /// Calls `visit(p, e)` for each prime power exactly dividing `n`.
    #[inline]
    pub fn for_each_prime_power(&self, mut n: u64, mut visit: impl FnMut(u64, u32)) {
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            visit(p, e);
        }
    }
}

impl Factorization {
    /// Builds a factorization from arbitrary pairs, merging repeated primes.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut entries: Vec<(u64, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        entries.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(entries.len());
        for (p, e) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += e,
                _ => merged.push((p, e)),
            }
        }
        Self { entries: merged }
    }

    pub fn one() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[(u64, u32)] {
        &self.entries
    }

    pub fn is_one(&self) -> bool {
        self.entries.is_empty()
    }

    /// The factored integer, or an overflow error.
    pub fn value(&self) -> Result<u64> {
        self.entries.iter().try_fold(1u64, |acc, &(p, e)| {
            checked_pow(p, e).and_then(|q| acc.checked_mul(q)).ok_or(Error::Overflow("factorization value"))
        })
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.entries
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// All positive divisors as factorizations, in no particular order.
    pub fn divisors(&self) -> Vec<Factorization> {
        let mut out = vec![Factorization::one()];
        for &(p, e) in &self.entries {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for d in &out {
                for j in 0..=e {
                    let mut entries = d.entries.clone();
                    if j > 0 {
                        entries.push((p, j));
                    }
                    next.push(Factorization { entries });
                }
            }
            out = next;
        }
        out
    }

    pub fn mul(&self, other: &Factorization) -> Factorization {
        Factorization::from_pairs(self.entries.iter().chain(other.entries.iter()).copied())
    }
}

/// ∏ p^{e-1}(p-1).
pub fn euler_phi(fac: &Factorization) -> u64 {
    fac.entries()
        .iter()
        .map(|&(p, e)| p.pow(e - 1) * (p - 1))
        .product()
}

/// Möbius function from a factorization.
pub fn mobius(fac: &Factorization) -> i64 {
    if fac.entries().iter().any(|&(_, e)| e >= 2) {
        0
    } else if fac.entries().len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn gcd_i(a: i64, b: i64) -> u64 {
    num_integer::gcd(a.unsigned_abs(), b.unsigned_abs())
}

pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

pub fn checked_pow(p: u64, e: u32) -> Option<u64> {
    p.checked_pow(e)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Trial-division factorization for integers outside the sieve (used on
/// resultants and moduli, which are small in practice).
pub fn factor_trial(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    let mut n = n;
    let mut pairs = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            pairs.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
        if p > 3_000_000 && is_prime_u64(n) {
            break;
        }
    }
    if n > 1 {
        if !is_prime_u64(n) {
            return Err(Error::InvalidArgument(format!(
                "trial division could not finish factoring {n}"
            )));
        }
        pairs.push((n, 1));
    }
    Ok(Factorization::from_pairs(pairs))
}

/// Modular inverse of `a` mod `m` when it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return if m == 1 { Some(0) } else { None };
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Solves the system `x ≡ r_i (mod m_i)`.
///
/// Returns `(x, lcm)` with `0 <= x < lcm`. Non-coprime moduli are accepted
/// when the residues are consistent.
pub fn crt_solve(pairs: &[(u64, u64)]) -> Result<(u64, u64)> {
    let mut x: u128 = 0;
    let mut m: u128 = 1;
    for &(r, mi) in pairs {
        if mi == 0 {
            return Err(Error::InvalidArgument("modulus 0 in CRT system".into()));
        }
        let r = (r % mi) as u128;
        let mi = mi as u128;
        let g = num_integer::gcd(m, mi);
        let diff = (r as i128 - (x % mi) as i128).rem_euclid(mi as i128) as u128;
        if diff % g != 0 {
            return Err(Error::NoSolution(format!(
                "x ≡ {x} (mod {m}) and x ≡ {r} (mod {mi})"
            )));
        }
        let m_red = m / g;
        let mi_red = mi / g;
        // x + m·t ≡ r (mod mi)  ⇔  (m/g)·t ≡ diff/g (mod mi/g)
        let t = if mi_red == 1 {
            0
        } else {
            let inv = inv_mod((m_red % mi_red) as u64, mi_red as u64).expect("coprime after reduction");
            ((diff / g) % mi_red) * inv as u128 % mi_red
        };
        let new_m = m_red.checked_mul(mi).ok_or(Error::Overflow("crt modulus"))?;
        if new_m > u64::MAX as u128 {
            return Err(Error::Overflow("crt modulus"));
        }
        x = (x + m * t) % new_m;
        m = new_m;
    }
    Ok((x as u64, m as u64))
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}
