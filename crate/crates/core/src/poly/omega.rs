//! Root counts `ω_P(p^k)` and joint local densities.

use super::modp::{is_simple_root, roots_mod_p, RootsModP};
use super::PolynomialZ;
use crate::arith::{checked_pow, inv_mod, Factorization};
use crate::error::{Error, Result};
use num_rational::Ratio;

/// Exact densities.
pub type Rational = Ratio<i128>;

/// Residues mod `p` are enumerated one by one when `P ≡ 0 (mod p)`.
const MAX_RESIDUE_SCAN: u64 = 10_000_000;
/// Largest root list materialised by [`roots_prime_power`].
const MAX_ROOTS: u64 = 10_000_000;

fn prime_power(p: u64, k: u32) -> Result<u64> {
    checked_pow(p, k).ok_or(Error::OutOfRange {
        what: "p^k",
        value: (p as u128).saturating_pow(k),
        limit: u64::MAX as u128,
    })
}

/// Taylor coefficients of `y ↦ P(r + s·y)` reduced mod `m`, where
/// `s = p^j`. Reported as "all zero" when the whole class `r + p^j ℤ`
/// consists of roots mod `m`.
fn class_vanishes(poly: &PolynomialZ, r: u64, p: u64, j: u32, m: u64) -> bool {
    let m128 = m as u128;
    let mut work: Vec<u128> = poly
        .coeffs()
        .iter()
        .map(|&c| (c as i128).rem_euclid(m as i128) as u128)
        .collect();
    let r = r as u128 % m128;
    // s^i mod m, zero once p^{ij} >= m (p^{ij} is then a multiple of m)
    let mut s_pow: u128 = 1 % m128;
    let s = checked_pow(p, j).map(|v| v as u128 % m128);
    for i in 0..work.len() {
        // synthetic division by (x - r): the remainder is the i-th Taylor coefficient
        let len = work.len() - i;
        let mut carry = 0u128;
        for idx in (0..len).rev() {
            let cur = (work[idx] + carry * r) % m128;
            work[idx] = carry;
            carry = cur;
        }
        // the quotient now sits in work[..len - 1]
        let taylor = carry;
        if taylor * s_pow % m128 != 0 {
            return false;
        }
        s_pow = match s {
            Some(sv) => s_pow * sv % m128,
            None => 0,
        };
        if s_pow == 0 {
            return true;
        }
    }
    true
}

/// One Hensel step for a simple root `r` of `P` mod `p^j`.
fn hensel_step(poly: &PolynomialZ, deriv: &PolynomialZ, r: u64, p: u64, pj: u64) -> u64 {
    let pj1 = pj * p;
    let v = poly.eval_mod(r, pj1) / pj;
    let d = deriv.eval_mod(r, p);
    let inv = inv_mod(d, p).expect("simple root");
    let t = (p - v % p) % p * inv % p;
    r + t * pj
}

fn list_roots(poly: &PolynomialZ, p: u64, k: u32) -> Result<Vec<u64>> {
    let pk = prime_power(p, k)?;
    if k == 0 {
        return Ok(vec![0]);
    }
    let mut stack: Vec<(u64, u32)> = match roots_mod_p(poly, p) {
        RootsModP::All => {
            if class_vanishes(poly, 0, p, 0, pk) {
                if pk > MAX_ROOTS {
                    return Err(Error::Precondition(format!("{pk} roots exceed the listing cap")));
                }
                return Ok((0..pk).collect());
            }
            if p > MAX_RESIDUE_SCAN {
                return Err(Error::Precondition(format!("P vanishes mod {p}; too many residues to expand")));
            }
            (0..p).map(|r| (r, 1)).collect()
        }
        RootsModP::Roots(v) => v.into_iter().map(|r| (r, 1)).collect(),
    };
    let deriv = poly.derivative();
    let mut list = Vec::new();
    while let Some((r, j)) = stack.pop() {
        if list.len() as u64 + stack.len() as u64 > MAX_ROOTS {
            return Err(Error::Precondition("root list exceeds cap".into()));
        }
        let pj = p.pow(j);
        if j == k {
            list.push(r);
        } else if class_vanishes(poly, r, p, j, pk) {
            let extra = pk / pj;
            if list.len() as u64 + extra > MAX_ROOTS {
                return Err(Error::Precondition("root list exceeds cap".into()));
            }
            list.extend((0..extra).map(|t| r + t * pj));
        } else if is_simple_root(poly, r, p) {
            let d = deriv.as_ref().expect("simple root implies nonconstant");
            let (mut root, mut level) = (r, pj);
            for _ in j..k {
                root = hensel_step(poly, d, root, p, level);
                level *= p;
            }
            list.push(root);
        } else {
            let pj1 = pj * p;
            for t in 0..p {
                let cand = r + t * pj;
                if poly.eval_mod(cand, pj1) == 0 {
                    stack.push((cand, j + 1));
                }
            }
        }
    }
    list.sort_unstable();
    Ok(list)
}

fn valuation_capped(c: u128, p: u128, cap: u32) -> u32 {
    if c == 0 {
        return cap;
    }
    let (mut c, mut v) = (c, 0);
    while v < cap && c % p == 0 {
        c /= p;
        v += 1;
    }
    v
}

/// Roots mod `p^k` of the polynomial with coefficients `f` (already
/// reduced mod `p^k`).
///
/// For each root `r` mod `p`, `P(r + p·y) = p^c·Q(y)` with `Q` primitive,
/// and the roots of `P` in that class are the lifts of roots of `Q` mod
/// `p^{k-c}`. The recursion only ever follows roots mod `p`, so its size
/// is bounded by the degree times the depth.
fn count_roots(f: &[u128], p: u64, k: u32) -> Result<u64> {
    if k == 0 {
        return Ok(1);
    }
    let pk = prime_power(p, k)? as u128;
    let p128 = p as u128;
    let content = f.iter().map(|&c| valuation_capped(c, p128, k)).min().unwrap_or(k);
    if content >= k {
        return Ok(pk as u64);
    }
    if content > 0 {
        let scale = (p128).pow(content);
        let reduced: Vec<u128> = f.iter().map(|&c| c / scale % (pk / scale)).collect();
        let inner = count_roots(&reduced, p, k - content)?;
        return Ok(inner * prime_power(p, content)?);
    }
    let modp = PolynomialZ::new(f.iter().map(|&c| (c % p128) as i64).collect())?;
    let roots = match roots_mod_p(&modp, p) {
        RootsModP::Roots(v) => v,
        RootsModP::All => unreachable!("content is zero"),
    };
    let mut total = 0u64;
    for r in roots {
        if is_simple_root(&modp, r, p) {
            total += 1;
            continue;
        }
        // Taylor coefficients of P(r + p·y), the i-th scaled by p^i
        let mut work = f.to_vec();
        let mut shifted = Vec::with_capacity(f.len());
        let r = r as u128;
        for i in 0..f.len() {
            let len = f.len() - i;
            let mut carry = 0u128;
            for idx in (0..len).rev() {
                let cur = (work[idx] + carry * r) % pk;
                work[idx] = carry;
                carry = cur;
            }
            shifted.push(carry);
        }
        let mut s_pow = 1u128;
        for c in shifted.iter_mut() {
            *c = *c * s_pow % pk;
            s_pow = s_pow * p128 % pk;
        }
        let c = shifted.iter().map(|&v| valuation_capped(v, p128, k)).min().unwrap_or(k);
        if c >= k {
            total += prime_power(p, k - 1)?;
            continue;
        }
        let scale = p128.pow(c);
        let modulus = pk / scale;
        let q: Vec<u128> = shifted.iter().map(|&v| v / scale % modulus).collect();
        // y ranges mod p^{k-1}; Q only constrains it mod p^{k-c}
        let inner = count_roots(&q, p, k - c)?;
        total = total
            .checked_add(inner.checked_mul(prime_power(p, c - 1)?).ok_or(Error::Overflow("omega"))?)
            .ok_or(Error::Overflow("omega"))?;
    }
    Ok(total)
}

/// `ω_P(p^k) = #{r mod p^k : P(r) ≡ 0}`.
///
/// Simple roots mod `p` lift uniquely. At a singular root the polynomial
/// is rescaled, `P(r + p·y) = p^c·Q(y)`, and the count recurses on `Q`;
/// large root sets are never listed.
pub fn omega_prime_power(poly: &PolynomialZ, p: u64, k: u32) -> Result<u64> {
    let pk = prime_power(p, k)?;
    if pk > 1 << 62 {
        return Err(Error::OutOfRange { what: "p^k", value: pk as u128, limit: 1 << 62 });
    }
    let f: Vec<u128> = poly
        .coeffs()
        .iter()
        .map(|&c| (c as i128).rem_euclid(pk as i128) as u128)
        .collect();
    count_roots(&f, p, k)
}

/// The roots of `P` mod `p^k`, ascending.
pub fn roots_prime_power(poly: &PolynomialZ, p: u64, k: u32) -> Result<Vec<u64>> {
    list_roots(poly, p, k)
}

/// `ω_P(m)` by multiplicativity.
pub fn omega(poly: &PolynomialZ, m: &Factorization) -> Result<u64> {
    m.entries().iter().try_fold(1u64, |acc, &(p, k)| {
        let w = omega_prime_power(poly, p, k)?;
        acc.checked_mul(w).ok_or(Error::Overflow("omega"))
    })
}

/// Density of `{n : p^a | P(n), p^b | Q(n)}`.
pub fn joint_divisor_density(p_poly: &PolynomialZ, q_poly: &PolynomialZ, p: u64, a: u32, b: u32) -> Result<Rational> {
    let frac = |count: u64, modulus: u64| Rational::new(count as i128, modulus as i128);
    match (a, b) {
        (0, 0) => Ok(Rational::from_integer(1)),
        (0, _) => Ok(frac(omega_prime_power(q_poly, p, b)?, prime_power(p, b)?)),
        (_, 0) => Ok(frac(omega_prime_power(p_poly, p, a)?, prime_power(p, a)?)),
        _ => {
            // list roots of the form with the larger exponent, filter by the other
            let (big, big_e, small, small_e) = if a >= b { (p_poly, a, q_poly, b) } else { (q_poly, b, p_poly, a) };
            let modulus = prime_power(p, big_e)?;
            let small_mod = prime_power(p, small_e)?;
            let roots = roots_prime_power(big, p, big_e)?;
            let count = roots.iter().filter(|&&r| small.eval_mod(r, small_mod) == 0).count() as u64;
            Ok(frac(count, modulus))
        }
    }
}

/// `ω(p^k, p^ℓ)`: density of `{n : p^k ∥ P(n), p^ℓ ∥ Q(n)}`.
pub fn joint_omega(p_poly: &PolynomialZ, q_poly: &PolynomialZ, p: u64, k: u32, l: u32) -> Result<Rational> {
    let n = |a, b| joint_divisor_density(p_poly, q_poly, p, a, b);
    Ok(n(k, l)? - n(k + 1, l)? - n(k, l + 1)? + n(k + 1, l + 1)?)
}

/// `F(d_1, d_2)`: density of `{n : d_1 | P(n), d_2 | Q(n)}`.
pub fn joint_density_f(p_poly: &PolynomialZ, q_poly: &PolynomialZ, d1: &Factorization, d2: &Factorization) -> Result<Rational> {
    let mut primes: Vec<u64> = d1.entries().iter().chain(d2.entries()).map(|&(p, _)| p).collect();
    primes.sort_unstable();
    primes.dedup();
    primes.into_iter().try_fold(Rational::from_integer(1), |acc, p| {
        Ok(acc * joint_divisor_density(p_poly, q_poly, p, d1.exponent_of(p), d2.exponent_of(p))?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factor_trial, gcd, is_prime_u64};
    use proptest::prelude::*;

    fn poly(s: &str) -> PolynomialZ {
        PolynomialZ::parse(s).unwrap()
    }

    fn brute_omega(p: &PolynomialZ, m: u64) -> u64 {
        (0..m).filter(|&r| p.eval_mod(r, m) == 0).count() as u64
    }

    fn brute_joint(p: &PolynomialZ, q: &PolynomialZ, prime: u64, k: u32, l: u32) -> Rational {
        let m = prime.pow(k.max(l) + 1);
        let exact = |v: u64, e: u32| v % prime.pow(e) == 0 && v % prime.pow(e + 1) != 0;
        let count = (0..m).filter(|&n| exact(p.eval_mod(n, m), k) && exact(q.eval_mod(n, m), l)).count();
        Rational::new(count as i128, m as i128)
    }

    #[test]
    fn omega_examples() {
        let p = poly("x^2+1");
        assert_eq!(omega_prime_power(&p, 5, 1).unwrap(), 2);
        assert_eq!(omega_prime_power(&p, 5, 2).unwrap(), 2);
        assert_eq!(roots_prime_power(&p, 5, 2).unwrap(), vec![7, 18]);
        assert_eq!(omega_prime_power(&p, 2, 1).unwrap(), 1);
        assert_eq!(omega_prime_power(&p, 2, 2).unwrap(), 0);
        assert_eq!(omega_prime_power(&p, 3, 1).unwrap(), 0);
        assert_eq!(omega(&p, &factor_trial(65).unwrap()).unwrap(), 4);
        assert_eq!(brute_omega(&p, 65), 4);
        assert_eq!(omega(&p, &Factorization::one()).unwrap(), 1);
        assert_eq!(omega(&PolynomialZ::x(), &factor_trial(360).unwrap()).unwrap(), 1);
        assert!(omega_prime_power(&p, 3, 60).is_err());
    }

    #[test]
    fn singular_and_degenerate_cases_match_enumeration() {
        let polys = ["x^2", "x^3", "4*x^2+4", "x^2+x", "2*x", "x^2-9", "9*x^3+3", "x^4-8*x^2+16", "6*x^2+6*x+12"];
        for text in polys {
            let f = poly(text);
            for p in [2u64, 3, 5, 7] {
                for k in 0..=6 {
                    let m = p.pow(k);
                    if m > 20_000 {
                        continue;
                    }
                    assert_eq!(omega_prime_power(&f, p, k).unwrap(), brute_omega(&f, m), "{text} mod {p}^{k}");
                    let roots = roots_prime_power(&f, p, k).unwrap();
                    let expect: Vec<u64> = (0..m).filter(|&r| f.eval_mod(r, m) == 0).collect();
                    assert_eq!(roots, expect, "{text} mod {p}^{k}");
                }
            }
        }
        // large classes are counted without enumeration
        assert_eq!(omega_prime_power(&poly("x^2"), 2, 60).unwrap(), 1 << 30);
        assert_eq!(omega_prime_power(&poly("x^2"), 97, 9).unwrap(), 97u64.pow(4));
        // x ≡ 0, or x ≡ ±1 mod 2^39
        assert_eq!(omega_prime_power(&poly("x^3-x"), 2, 40).unwrap(), 1 + 4);
    }

    #[test]
    fn hensel_consistency_off_discriminant() {
        // x^3 - x - 1 has discriminant -23
        let f = poly("x^3-x-1");
        for p in (2u64..=50).filter(|&p| is_prime_u64(p) && p != 23) {
            let base = omega_prime_power(&f, p, 1).unwrap();
            for k in 2..=6 {
                assert_eq!(omega_prime_power(&f, p, k).unwrap(), base, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn joint_examples() {
        let (x, x1, x2, x4) = (poly("x"), poly("x+1"), poly("x+2"), poly("x+4"));
        assert_eq!(joint_omega(&x, &x1, 2, 1, 1).unwrap(), Rational::from_integer(0));
        assert_eq!(joint_omega(&x, &x1, 2, 1, 0).unwrap(), Rational::new(1, 4));
        // 4 ∥ n forces 8 | n + 4
        assert_eq!(joint_omega(&x, &x4, 2, 2, 2).unwrap(), Rational::from_integer(0));
        assert_eq!(joint_omega(&x, &x4, 2, 2, 3).unwrap(), Rational::new(1, 16));
        assert_eq!(brute_joint(&x, &x4, 2, 2, 3), Rational::new(1, 16));
        let f = |a: u64, b: u64| (factor_trial(a).unwrap(), factor_trial(b).unwrap());
        let (d1, d2) = f(3, 2);
        assert_eq!(joint_density_f(&x, &x1, &d1, &d2).unwrap(), Rational::new(1, 6));
        let (d1, d2) = f(1, 1);
        assert_eq!(joint_density_f(&x, &x1, &d1, &d2).unwrap(), Rational::from_integer(1));
        let (d1, d2) = f(2, 2);
        assert_eq!(joint_density_f(&x, &x2, &d1, &d2).unwrap(), Rational::new(1, 2));
    }

    #[test]
    fn joint_omega_matches_enumeration_and_marginals() {
        let pairs = [("x", "x+1"), ("x", "x+4"), ("x^2+1", "x+3"), ("x^2+x+1", "2*x+1"), ("x^2", "x^2+2")];
        for (a, b) in pairs {
            let (pp, qq) = (poly(a), poly(b));
            for p in [2u64, 3, 5, 7] {
                for k in 0..=2 {
                    let mut marginal = Rational::from_integer(0);
                    for l in 0..=2 {
                        let got = joint_omega(&pp, &qq, p, k, l).unwrap();
                        assert_eq!(got, brute_joint(&pp, &qq, p, k, l), "{a},{b} p={p} k={k} l={l}");
                        marginal += got;
                    }
                    // the tail ℓ >= 3 is the density of p^k ∥ P(n) and p^3 | Q(n)
                    let tail = joint_divisor_density(&pp, &qq, p, k, 3).unwrap() - joint_divisor_density(&pp, &qq, p, k + 1, 3).unwrap();
                    let pk = Rational::new(omega_prime_power(&pp, p, k).unwrap() as i128, p.pow(k) as i128);
                    let pk1 = Rational::new(omega_prime_power(&pp, p, k + 1).unwrap() as i128, p.pow(k + 1) as i128);
                    assert_eq!(marginal + tail, pk - pk1, "{a},{b} p={p} k={k}");
                }
            }
        }
    }

    #[test]
    fn empirical_density() {
        let f = poly("x^2+1");
        let x = 100_000u64;
        for d in 1..=100u64 {
            let count = (1..=x).filter(|&n| f.eval_mod(n, d) == 0).count() as f64;
            let w = omega(&f, &factor_trial(d).unwrap()).unwrap() as f64;
            assert!((count / x as f64 - w / d as f64).abs() <= 10.0 * d as f64 / x as f64, "d={d}");
        }
    }

    proptest! {
        #[test]
        fn omega_is_multiplicative(c in proptest::collection::vec(-30i64..30, 4), m1 in 1u64..100, m2 in 1u64..100) {
            prop_assume!(c[3] != 0 && gcd(m1, m2) == 1);
            let f = PolynomialZ::new(c).unwrap();
            let w = |m: u64| omega(&f, &factor_trial(m).unwrap()).unwrap();
            prop_assert_eq!(w(m1 * m2), w(m1) * w(m2));
            prop_assert_eq!(w(m1 * m2), brute_omega(&f, m1 * m2));
        }
    }
}
