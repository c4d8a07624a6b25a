//! Multiplicative functions into the closed unit disc, their decomposition
//! `f = 1 * θ`, Dirichlet characters, twists and the pretentious distance.

mod character;
mod distance;
mod parse;

pub use character::{characters_mod, primitive_characters_mod, CharGroup, CyclotomicInt, DirichletCharacter};
pub use distance::{distance, distance_poly, pretentious_scan, DistanceValue, DistanceVariant, ScanResult};
pub use parse::make_mult_func;

use crate::arith::{Factorization, FactorSieve};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Slack allowed when checking |f(p^k)| <= 1 and unimodularity.
pub const UNIT_TOL: f64 = 1e-12;

type Rule = dyn Fn(u64, u32) -> Complex64 + Send + Sync;

/// A multiplicative function given by its values on prime powers.
///
/// `f(1) = 1` is implicit; `rule(p, k)` is only consulted for `k >= 1`.
#[derive(Clone)]
pub struct MultFunc {
    name: String,
    rule: Arc<Rule>,
    unimodular: bool,
    completely_multiplicative: bool,
}

impl fmt::Debug for MultFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultFunc")
            .field("name", &self.name)
            .field("unimodular", &self.unimodular)
            .field("completely_multiplicative", &self.completely_multiplicative)
            .finish()
    }
}

impl MultFunc {
    pub fn new<F>(name: impl Into<String>, unimodular: bool, completely_multiplicative: bool, rule: F) -> Self
    where
        F: Fn(u64, u32) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            rule: Arc::new(rule),
            unimodular,
            completely_multiplicative,
        }
    }

    /// Completely multiplicative function determined by its values at primes.
    pub fn completely<F>(name: impl Into<String>, unimodular: bool, at_prime: F) -> Self
    where
        F: Fn(u64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(name, unimodular, true, move |p, k| at_prime(p).powu(k))
    }

    pub fn one() -> Self {
        Self::new("one", true, true, |_, _| Complex64::new(1.0, 0.0))
    }

    pub fn liouville() -> Self {
        Self::new("liouville", true, true, |_, k| {
            Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
    }

    /// Indicator of the squarefree integers.
    pub fn mobius_sq() -> Self {
        Self::new("mobius_sq", false, false, |_, k| {
            Complex64::new(if k == 1 { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// `n ↦ n^{it}`.
    pub fn nit(t: f64) -> Self {
        Self::new(format!("nit({t})"), true, true, move |p, k| {
            Complex64::from_polar(1.0, k as f64 * t * (p as f64).ln())
        })
    }

    pub fn indicator_odd() -> Self {
        Self::new("indicator_odd", false, false, |p, _| {
            Complex64::new(if p == 2 { 0.0 } else { 1.0 }, 0.0)
        })
    }

    /// The character `χ` viewed as a (completely) multiplicative function.
    pub fn from_character(chi: &DirichletCharacter) -> Self {
        let chi = chi.clone();
        let name = format!("char({},{})", chi.modulus(), chi.index());
        Self::new(name, false, true, move |p, k| chi.value(p).powu(k))
    }

    /// Completely multiplicative, `f(2) = -1`, `f(p) = 1` otherwise.
    pub fn period_two_completely() -> Self {
        Self::new("override(one; 2:^ => -1)", true, true, |p, k| {
            if p == 2 && k % 2 == 1 {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_unimodular(&self) -> bool {
        self.unimodular
    }

    pub fn is_completely_multiplicative(&self) -> bool {
        self.completely_multiplicative
    }

    /// `f(p^k)`, with `f(p^0) = 1`.
    #[inline]
    pub fn at(&self, p: u64, k: u32) -> Complex64 {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            (self.rule)(p, k)
        }
    }

    /// `f(p^k)` with the unimodular flag enforced.
    pub fn checked_at(&self, p: u64, k: u32) -> Result<Complex64> {
        let v = self.at(p, k);
        let m = v.norm();
        if m > 1.0 + UNIT_TOL {
            return Err(Error::ValueRange {
                value: format!("{}({}^{})", self.name, p, k),
                modulus: m,
            });
        }
        if self.unimodular && (m - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnimodular {
                name: self.name.clone(),
                p,
                k,
                modulus: m,
            });
        }
        Ok(v)
    }

    /// Checks the unit-disc and unimodular contracts on every prime power
    /// `p^k` with `p <= primes_up_to` and `k <= max_k`.
    pub fn validate(&self, primes: &[u32], max_k: u32) -> Result<()> {
        for &p in primes {
            for k in 1..=max_k {
                self.checked_at(p as u64, k)?;
            }
        }
        Ok(())
    }

    /// Evaluation by multiplicativity.
    pub fn eval_at(&self, fac: &Factorization) -> Complex64 {
        fac.entries()
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &(p, e)| acc * self.at(p, e))
    }

    /// `f(n)` for `1 <= n <= sieve.limit()`.
    #[inline]
    pub fn eval_n(&self, n: u64, sieve: &FactorSieve) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        sieve.for_each_prime_power(n, |p, e| acc *= self.at(p, e));
        acc
    }

    /// `θ(p^0), …, θ(p^K)` where `f = 1 * θ`, i.e. `θ(p^k) = f(p^k) - f(p^{k-1})`.
    pub fn theta_values(&self, p: u64, max_k: u32) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(max_k as usize + 1);
        out.push(Complex64::new(1.0, 0.0));
        let mut prev = Complex64::new(1.0, 0.0);
        for k in 1..=max_k {
            let cur = self.at(p, k);
            out.push(cur - prev);
            prev = cur;
        }
        out
    }

    /// `θ(p^k)` for a single exponent.
    pub fn theta(&self, p: u64, k: u32) -> Complex64 {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            self.at(p, k) - self.at(p, k - 1)
        }
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> MultFunc {
        let rule = self.rule.clone();
        MultFunc {
            name: format!("conj({})", self.name),
            rule: Arc::new(move |p, k| rule(p, k).conj()),
            unimodular: self.unimodular,
            completely_multiplicative: self.completely_multiplicative,
        }
    }

    /// `f(n) / n^{it}`.
    pub fn untwist_archimedean(&self, t: f64) -> MultFunc {
        if t == 0.0 {
            return self.clone();
        }
        let rule = self.rule.clone();
        MultFunc {
            name: format!("{}/nit({t})", self.name),
            rule: Arc::new(move |p, k| rule(p, k) * Complex64::from_polar(1.0, -(k as f64) * t * (p as f64).ln())),
            unimodular: self.unimodular,
            completely_multiplicative: self.completely_multiplicative,
        }
    }

    /// `F(p^k) = f(p^k)·conj(χ(p^k))·p^{-ikt}` for `p ∤ q`, `F(p^k) = 1` for `p | q`.
    pub fn twist(&self, chi: &DirichletCharacter, t: f64) -> MultFunc {
        let rule = self.rule.clone();
        let chi = chi.clone();
        let q = chi.modulus();
        MultFunc {
            name: format!("twist({}; char({},{}); {t})", self.name, q, chi.index()),
            rule: Arc::new(move |p, k| {
                if q % p == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    rule(p, k)
                        * chi.value(p).powu(k).conj()
                        * Complex64::from_polar(1.0, -(k as f64) * t * (p as f64).ln())
                }
            }),
            unimodular: self.unimodular,
            completely_multiplicative: false,
        }
    }

    /// Replaces the values on the listed prime powers; other values unchanged.
    pub fn with_prime_table(&self, name: impl Into<String>, table: std::collections::HashMap<u64, Complex64>, completely: bool) -> MultFunc {
        let rule = self.rule.clone();
        let table = Arc::new(table);
        MultFunc {
            name: name.into(),
            rule: Arc::new(move |p, k| match table.get(&p) {
                Some(v) if completely => v.powu(k),
                Some(v) if k == 1 => *v,
                _ => rule(p, k),
            }),
            unimodular: self.unimodular,
            completely_multiplicative: self.completely_multiplicative && completely,
        }
    }

    /// The function agreeing with `f` on prime powers `p^k` accepted by
    /// `keep` and equal to 1 elsewhere.
    pub fn restricted<K>(&self, name: impl Into<String>, keep: K) -> MultFunc
    where
        K: Fn(u64, u32) -> bool + Send + Sync + 'static,
    {
        let rule = self.rule.clone();
        MultFunc {
            name: name.into(),
            rule: Arc::new(move |p, k| if keep(p, k) { rule(p, k) } else { Complex64::new(1.0, 0.0) }),
            unimodular: self.unimodular,
            completely_multiplicative: false,
        }
    }

    /// Pointwise product `f·g` (multiplicative).
    pub fn product(&self, other: &MultFunc) -> MultFunc {
        let (a, b) = (self.rule.clone(), other.rule.clone());
        MultFunc {
            name: format!("({})*({})", self.name, other.name),
            rule: Arc::new(move |p, k| a(p, k) * b(p, k)),
            unimodular: self.unimodular && other.unimodular,
            completely_multiplicative: self.completely_multiplicative && other.completely_multiplicative,
        }
    }

    /// Whether all values on prime powers are real.
    pub fn is_real_on(&self, primes: &[u32], max_k: u32) -> bool {
        primes
            .iter()
            .all(|&p| (1..=max_k).all(|k| self.at(p as u64, k).im.abs() <= UNIT_TOL))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        let sieve = FactorSieve::new(1000).unwrap();
        let fac = |n| sieve.factorize(n).unwrap();
        assert_eq!(MultFunc::liouville().eval_at(&fac(12)), c(-1.0));
        assert_eq!(MultFunc::mobius_sq().eval_at(&fac(12)), c(0.0));
        let f = make_mult_func("override(one; 2:* => -1)").unwrap();
        assert_eq!(f.eval_at(&fac(10)), c(-1.0));
        assert_eq!(f.eval_at(&fac(1)), c(1.0));
        assert_eq!(f.eval_n(8, &sieve), c(-1.0));
        assert_eq!(f.eval_n(9, &sieve), c(1.0));
    }

    #[test]
    fn theta_examples() {
        for p in [2u64, 3, 97] {
            let th = MultFunc::one().theta_values(p, 6);
            assert_eq!(th[0], c(1.0));
            assert!(th[1..].iter().all(|z| *z == c(0.0)));
        }
        let th = MultFunc::mobius_sq().theta_values(3, 3);
        assert_eq!(&th[1..], &[c(0.0), c(-1.0), c(0.0)]);
        let th = MultFunc::period_two_completely().theta_values(2, 8);
        for (k, z) in th.iter().enumerate().skip(1) {
            let expected = 2.0 * if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(*z, c(expected), "k = {k}");
        }
    }

    #[test]
    fn theta_inversion_for_builtins() {
        let specs = [
            "one",
            "liouville",
            "mobius_sq",
            "nit(0.7)",
            "char(5,1)",
            "char(12,3)",
            "indicator_odd",
            "override(liouville; 3:2 => 0.5+0.5i; 5:* => -1)",
        ];
        let sieve = FactorSieve::new(100).unwrap();
        for spec in specs {
            let f = make_mult_func(spec).unwrap();
            for &p in sieve.primes() {
                let th = f.theta_values(p as u64, 10);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..=10u32 {
                    acc += th[k as usize];
                    assert!((acc - f.at(p as u64, k)).norm() < 1e-12, "{spec} p={p} k={k}");
                }
            }
        }
    }

    #[test]
    fn unimodular_flag_is_enforced() {
        let f = MultFunc::new("bad", true, false, |_, _| Complex64::new(0.5, 0.0));
        assert!(matches!(f.checked_at(2, 1), Err(Error::NotUnimodular { .. })));
        assert!(MultFunc::liouville().checked_at(2, 3).is_ok());
        let g = MultFunc::new("big", false, false, |_, _| Complex64::new(1.5, 0.0));
        assert!(matches!(g.checked_at(3, 1), Err(Error::ValueRange { .. })));
    }

    #[test]
    fn twist_examples() {
        let chis = characters_mod(3);
        let chi = &chis[1];
        let f = MultFunc::from_character(chi).product(&MultFunc::nit(0.4));
        let big_f = f.twist(chi, 0.4);
        for p in [2u64, 5, 7, 11, 13] {
            for k in 1..4 {
                assert!((big_f.at(p, k) - c(1.0)).norm() < 1e-12);
            }
        }
        assert_eq!(big_f.at(3, 2), c(1.0));
        let twisted_one = MultFunc::one().twist(chi, 0.0);
        assert!((twisted_one.at(2, 1) - c(-1.0)).norm() < 1e-15);
        let trivial = &characters_mod(1)[0];
        let lam = MultFunc::liouville().twist(trivial, 0.0);
        for p in [2u64, 3, 5] {
            for k in 1..5 {
                assert_eq!(lam.at(p, k), MultFunc::liouville().at(p, k));
            }
        }
    }

    proptest! {
        #[test]
        fn eval_is_multiplicative_on_coprime_pairs(m in 1u64..100_000, n in 1u64..100_000, which in 0usize..4) {
            prop_assume!(crate::arith::gcd(m, n) == 1);
            let sieve = FactorSieve::new(100_000).unwrap();
            let f = [
                make_mult_func("liouville").unwrap(),
                make_mult_func("nit(1.3)").unwrap(),
                make_mult_func("char(7,2)").unwrap(),
                make_mult_func("override(mobius_sq; 2:* => 0.6-0.8i)").unwrap(),
            ][which].clone();
            let fm = f.eval_n(m, &sieve);
            let fn_ = f.eval_n(n, &sieve);
            let mn = Factorization::from_pairs(
                sieve.factorize(m).unwrap().entries().iter().chain(sieve.factorize(n).unwrap().entries()).copied(),
            );
            prop_assert!((f.eval_at(&mn) - fm * fn_).norm() < 1e-12);
        }
    }
}
