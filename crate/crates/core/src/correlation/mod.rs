//! Correlation predictions: Euler products of local correlation factors,
//! the singular series `Σ_{r | ad-bc} G(r)/r`, character-twisted shifts,
//! and direct-sum oracles.

mod character;
mod linear;

pub use character::{
    char_autocorr, char_autocorr_literal, char_autocorr_table, keytotao_value, local_char_shift_factor, local_shift_factor,
    predict_char_shift,
};
pub use linear::{
    autocorr_g0, g_factor, g_local, linear_series, predict_linear_corr, shifted_selfcorr, GFactor, LinearForms, LinearSeries,
};

use crate::arith::{factor_trial, FactorSieve};
use crate::error::{Error, Result};
use crate::meanvalue::local_mean_poly;
use crate::multfun::{distance_poly, MultFunc};
use crate::padic::{local_expectation, LocalForm};
use crate::par::{self, Exec};
use crate::poly::{large_prime_powers, PolyValueSieve, PolynomialZ};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

/// Mass below which the local engine stops refining residue classes.
pub(crate) const ENGINE_TOL: f64 = 1e-16;
/// Local factors at primes up to this are always computed jointly.
pub(crate) const JOINT_CUTOFF: u64 = 50;

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub kind: &'static str,
    pub spec: BTreeMap<String, String>,
    pub x: u64,
    pub prediction: Complex64,
    /// `M_i`, 1 when there is no archimedean twist.
    pub archimedean: Complex64,
    pub direct: Option<Complex64>,
    pub local_factors: Vec<(u64, Complex64)>,
    pub series_terms: Option<Vec<(u64, Complex64)>>,
    /// `|series − product|` when both forms were evaluated.
    pub form_gap: Option<f64>,
    pub tail_bound: f64,
    pub error_budget: Option<f64>,
}

impl CorrelationReport {
    pub(crate) fn new(kind: &'static str, x: u64) -> Self {
        Self {
            kind,
            spec: BTreeMap::new(),
            x,
            prediction: Complex64::new(0.0, 0.0),
            archimedean: Complex64::new(1.0, 0.0),
            direct: None,
            local_factors: Vec::new(),
            series_terms: None,
            form_gap: None,
            tail_bound: 0.0,
            error_budget: None,
        }
    }

    pub(crate) fn with_spec(mut self, key: &str, value: impl ToString) -> Self {
        self.spec.insert(key.to_string(), value.to_string());
        self
    }

    /// `|direct − prediction|`, if the oracle ran.
    pub fn gap(&self) -> Option<f64> {
        self.direct.map(|d| (d - self.prediction).norm())
    }
}

/// Primes `p <= x` from the sieve, plus the prime factors of `extra`
/// above `x`, ascending.
pub(crate) fn prime_set(x: u64, extra: u64, sieve: &FactorSieve) -> Result<Vec<u64>> {
    sieve.check_covers(x)?;
    let mut out: Vec<u64> = sieve.primes_up_to(x).iter().map(|&p| p as u64).collect();
    if extra > 1 {
        for &(p, _) in factor_trial(extra)?.entries() {
            if p > x {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// `M_i ≈ a^{it} b^{iu} x^{iT} / (1 + iT)` with `T = Dt + du`.
pub fn archimedean_factor(t: f64, u: f64, p_poly: &PolynomialZ, q_poly: &PolynomialZ, x: u64) -> Result<Complex64> {
    if t == 0.0 && u == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (a, b) = (p_poly.leading(), q_poly.leading());
    if a < 1 || b < 1 {
        return Err(Error::InvalidArgument("leading coefficients must be positive".into()));
    }
    let big_t = p_poly.degree() as f64 * t + q_poly.degree() as f64 * u;
    let phase = t * (a as f64).ln() + u * (b as f64).ln() + big_t * (x as f64).ln();
    Ok(Complex64::from_polar(1.0, phase) / Complex64::new(1.0, big_t))
}

/// Joint local factor for any number of forms, by the `p`-adic walk.
pub(crate) fn joint_local(funcs: &[&MultFunc], polys: &[&PolynomialZ], p: u64) -> Result<(Complex64, f64)> {
    let weights: Vec<Box<dyn Fn(u32) -> Complex64 + Sync>> = funcs
        .iter()
        .map(|&f| {
            let f = f.clone();
            Box::new(move |v: u32| f.at(p, v)) as Box<dyn Fn(u32) -> Complex64 + Sync>
        })
        .collect();
    let forms: Vec<LocalForm> = polys
        .iter()
        .zip(&weights)
        .map(|(&poly, w)| LocalForm { poly, weight: w.as_ref() })
        .collect();
    let r = local_expectation(&forms, p, ENGINE_TOL)?;
    Ok((r.value, r.tail))
}

/// `M_p(f(P), g(Q))` given the resultant (if it fit in 128 bits).
fn local_corr_with(
    f: &MultFunc,
    g: &MultFunc,
    p_poly: &PolynomialZ,
    q_poly: &PolynomialZ,
    p: u64,
    res: Option<i128>,
) -> Result<(Complex64, f64)> {
    match res {
        Some(r) if p > JOINT_CUTOFF && r % p as i128 != 0 => {
            // P and Q have no common root mod p: at most one of them is divisible by p
            let a = local_mean_poly(f, p_poly, p)?;
            let b = local_mean_poly(g, q_poly, p)?;
            Ok((a.value + b.value - 1.0, a.tail_bound + b.tail_bound))
        }
        _ => joint_local(&[f, g], &[p_poly, q_poly], p),
    }
}

fn resultant_or_none(p_poly: &PolynomialZ, q_poly: &PolynomialZ) -> Result<Option<i128>> {
    match p_poly.check_coprime(q_poly) {
        Ok(r) => Ok(Some(r)),
        Err(Error::Overflow(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `M_p(f(P), g(Q)) = lim (1/x) Σ f_p(P(n)) g_p(Q(n))`, where `f_p` agrees
/// with `f` on powers of `p` and is 1 elsewhere.
pub fn local_corr_poly(f: &MultFunc, g: &MultFunc, p_poly: &PolynomialZ, q_poly: &PolynomialZ, p: u64) -> Result<Complex64> {
    let res = resultant_or_none(p_poly, q_poly)?;
    Ok(local_corr_with(f, g, p_poly, q_poly, p, res)?.0)
}

fn error_budget(
    funcs: &[(&MultFunc, &PolynomialZ)],
    x: u64,
    sieve: &FactorSieve,
    exec: Exec,
) -> Result<f64> {
    let lx = (x as f64).ln();
    let mut acc = 1.0 / lx.ln();
    for &(f, poly) in funcs {
        let large = large_prime_powers(poly, x, None, exec)?;
        acc += distance_poly(&MultFunc::one(), f, lx, x as f64, &large, false, sieve)?.value;
    }
    Ok(acc)
}

/// Euler-product prediction for `(1/x) Σ_{n <= x} f(P(n)) g(Q(n))`, with
/// `f ≈ n^{it}`, `g ≈ n^{iu}` removed before forming local factors.
#[allow(clippy::too_many_arguments)]
pub fn predict_poly_corr(
    f: &MultFunc,
    g: &MultFunc,
    p_poly: &PolynomialZ,
    q_poly: &PolynomialZ,
    t: f64,
    u: f64,
    x: u64,
    with_direct: bool,
    sieve: &FactorSieve,
    exec: Exec,
) -> Result<CorrelationReport> {
    if x < 16 {
        return Err(Error::InvalidArgument("x must be at least 16".into()));
    }
    let res = resultant_or_none(p_poly, q_poly)?;
    let f0 = f.untwist_archimedean(t);
    let g0 = g.untwist_archimedean(u);
    let primes = prime_set(x, 1, sieve)?;
    let factors = par::map_items(primes, exec, |p| local_corr_with(&f0, &g0, p_poly, q_poly, p, res).map(|v| (p, v)));
    let mut report = CorrelationReport::new("poly", x)
        .with_spec("f", f.name())
        .with_spec("g", g.name())
        .with_spec("P", p_poly)
        .with_spec("Q", q_poly)
        .with_spec("t", t)
        .with_spec("u", u);
    let mut product = Complex64::new(1.0, 0.0);
    let mut upper = 1.0;
    let mut exact = 1.0;
    for item in factors {
        let (p, (v, tail)) = item?;
        product *= v;
        upper *= v.norm() + tail;
        exact *= v.norm();
        report.local_factors.push((p, v));
    }
    report.archimedean = archimedean_factor(t, u, p_poly, q_poly, x)?;
    report.prediction = report.archimedean * product;
    report.tail_bound = upper - exact;
    report.error_budget = Some(error_budget(&[(&f0, p_poly), (&g0, q_poly)], x, sieve, exec)?);
    if with_direct {
        report.direct = Some(corr_direct_multi(&[f, g], &[p_poly, q_poly], x, exec)?);
    }
    Ok(report)
}

/// `(1/x) Σ_{n <= x} Π_j f_j(P_j(n))`, values read as `f_j(|P_j(n)|)`.
pub fn corr_direct_multi(funcs: &[&MultFunc], polys: &[&PolynomialZ], x: u64, exec: Exec) -> Result<Complex64> {
    if funcs.len() != polys.len() || funcs.is_empty() {
        return Err(Error::InvalidArgument("need one function per form".into()));
    }
    let sieves: Vec<PolyValueSieve> = polys.iter().map(|p| PolyValueSieve::new(p, x, None)).collect::<Result<_>>()?;
    let parts = par::map_blocks(1..x + 1, exec, |range| -> Result<Complex64> {
        let blocks: Vec<_> = sieves.iter().map(|s| s.factor_block(range.clone())).collect::<Result<_>>()?;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..blocks[0].len() {
            let mut term = Complex64::new(1.0, 0.0);
            for (f, b) in funcs.iter().zip(&blocks) {
                term *= crate::meanvalue::eval_factors(f, b.factors(i));
                if term == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            acc += term;
        }
        Ok(acc)
    });
    let mut total = Complex64::new(0.0, 0.0);
    for part in parts {
        total += part?;
    }
    Ok(total / x as f64)
}

/// `(1/x) Σ_{n <= x} f(P(n)) g(Q(n))`.
pub fn corr_direct(f: &MultFunc, g: &MultFunc, p_poly: &PolynomialZ, q_poly: &PolynomialZ, x: u64, exec: Exec) -> Result<Complex64> {
    corr_direct_multi(&[f, g], &[p_poly, q_poly], x, exec)
}

/// One factor `f_j(a_j n + b_j)` of an m-point correlation, with
/// `f_j ≈ n^{i t_j}`.
#[derive(Clone)]
pub struct MultiTerm {
    pub f: MultFunc,
    pub t: f64,
    pub a: i64,
    pub b: i64,
}

/// Prediction for `(1/x) Σ_{n <= x} Π_j f_j(a_j n + b_j)`.
///
/// Local factors come from the joint walk at primes up to the cutoff or
/// dividing some `a_i b_j − a_j b_i`; elsewhere at most one form is
/// divisible by `p` and the factor is `Σ_j M_p(f_j) − (m − 1)`.
pub fn correlate_multi(terms: &[MultiTerm], x: u64, with_direct: bool, sieve: &FactorSieve, exec: Exec) -> Result<CorrelationReport> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    if x < 16 {
        return Err(Error::InvalidArgument("x must be at least 16".into()));
    }
    let mut polys = Vec::with_capacity(terms.len());
    for (j, term) in terms.iter().enumerate() {
        if term.a < 1 {
            return Err(Error::InvalidArgument(format!("term {j}: leading coefficient must be positive")));
        }
        if crate::arith::gcd_i(term.a, term.b) != 1 {
            return Err(Error::InvalidArgument(format!("term {j}: gcd(a, b) must be 1")));
        }
        polys.push(PolynomialZ::linear(term.a, term.b)?);
    }
    let mut special = 1u64;
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let det = terms[i].a as i128 * terms[j].b as i128 - terms[j].a as i128 * terms[i].b as i128;
            if det == 0 {
                return Err(Error::DegenerateForms(format!(
                    "terms {i} and {j} ({}, {}) are proportional",
                    polys[i], polys[j]
                )));
            }
            let det = u64::try_from(det.unsigned_abs()).map_err(|_| Error::Overflow("pairwise determinant"))?;
            special = crate::arith::lcm(special, det).ok_or(Error::Overflow("lcm of pairwise determinants"))?;
        }
    }
    let special_primes: Vec<u64> = if special > 1 {
        factor_trial(special)?.entries().iter().map(|&(p, _)| p).collect()
    } else {
        Vec::new()
    };
    let funcs: Vec<MultFunc> = terms.iter().map(|t| t.f.untwist_archimedean(t.t)).collect();
    let func_refs: Vec<&MultFunc> = funcs.iter().collect();
    let poly_refs: Vec<&PolynomialZ> = polys.iter().collect();
    let primes = prime_set(x, special, sieve)?;
    let m = terms.len() as f64;
    let factors = par::map_items(primes, exec, |p| -> Result<(u64, Complex64, f64)> {
        if p <= JOINT_CUTOFF || special_primes.contains(&p) {
            let (v, tail) = joint_local(&func_refs, &poly_refs, p)?;
            return Ok((p, v, tail));
        }
        let mut v = Complex64::new(1.0 - m, 0.0);
        let mut tail = 0.0;
        for (f, poly) in funcs.iter().zip(&polys) {
            let r = local_mean_poly(f, poly, p)?;
            v += r.value;
            tail += r.tail_bound;
        }
        Ok((p, v, tail))
    });
    let mut report = CorrelationReport::new("multi", x);
    for (j, term) in terms.iter().enumerate() {
        report.spec.insert(format!("term{j}"), format!("{} @ {}*n{:+} t={}", term.f.name(), term.a, term.b, term.t));
    }
    let (mut product, mut upper, mut exact) = (Complex64::new(1.0, 0.0), 1.0, 1.0);
    for item in factors {
        let (p, v, tail) = item?;
        product *= v;
        upper *= v.norm() + tail;
        exact *= v.norm();
        report.local_factors.push((p, v));
    }
    let big_t: f64 = terms.iter().map(|t| t.t).sum();
    report.archimedean = if terms.iter().all(|t| t.t == 0.0) {
        Complex64::new(1.0, 0.0)
    } else {
        let phase: f64 = terms.iter().map(|t| t.t * (t.a as f64).ln()).sum::<f64>() + big_t * (x as f64).ln();
        Complex64::from_polar(1.0, phase) / Complex64::new(1.0, big_t)
    };
    report.prediction = report.archimedean * product;
    report.tail_bound = upper - exact;
    if with_direct {
        let orig: Vec<&MultFunc> = terms.iter().map(|t| &t.f).collect();
        report.direct = Some(corr_direct_multi(&orig, &poly_refs, x, exec)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multfun::make_mult_func;

    fn poly(s: &str) -> PolynomialZ {
        PolynomialZ::parse(s).unwrap()
    }

    /// `(1/p^K) Σ_{n mod p^K} f_p(P(n)) g_p(Q(n))` with valuations capped at `K`.
    fn enumerate(f: &MultFunc, g: &MultFunc, pp: &PolynomialZ, qq: &PolynomialZ, p: u64, k: u32) -> Complex64 {
        let m = p.pow(k);
        let val = |v: u64| if v == 0 { k } else { crate::arith::valuation(v, p) };
        (0..m)
            .map(|n| f.at(p, val(pp.eval_mod(n, m))) * g.at(p, val(qq.eval_mod(n, m))))
            .sum::<Complex64>()
            / m as f64
    }

    #[test]
    fn local_factor_examples() {
        let (one, sq) = (MultFunc::one(), MultFunc::mobius_sq());
        for p in [2u64, 3, 101] {
            assert!((local_corr_poly(&one, &one, &poly("x^2+1"), &poly("x+3"), p).unwrap() - 1.0).norm() < 1e-14);
        }
        let v = local_corr_poly(&sq, &sq, &PolynomialZ::x(), &poly("x+1"), 3).unwrap();
        assert!((v.re - (1.0 - 2.0 / 9.0)).abs() < 1e-15);
        let v = local_corr_poly(&sq, &sq, &PolynomialZ::x(), &poly("x+2"), 2).unwrap();
        let brute = enumerate(&sq, &sq, &PolynomialZ::x(), &poly("x+2"), 2, 3);
        assert!((v - brute).norm() < 1e-15);
        assert!((v.re - 0.5).abs() < 1e-15);
        assert!(matches!(
            local_corr_poly(&sq, &sq, &poly("x^2+1"), &poly("x^2+1"), 5),
            Err(Error::ResultantZero(..))
        ));
    }

    #[test]
    fn shortcut_matches_joint_walk() {
        let f = make_mult_func("override(liouville; 53:2 => 0.5i)").unwrap();
        let g = MultFunc::mobius_sq();
        let (pp, qq) = (poly("x^2+x+1"), poly("3*x+7"));
        let res = pp.resultant(&qq).unwrap();
        for p in [53u64, 59, 61, 67, 71, 101, 1009] {
            if res % p as i128 == 0 {
                continue;
            }
            let (a, _) = local_corr_with(&f, &g, &pp, &qq, p, Some(res)).unwrap();
            let (b, _) = joint_local(&[&f, &g], &[&pp, &qq], p).unwrap();
            assert!((a - b).norm() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn archimedean_examples() {
        let x = PolynomialZ::x();
        assert_eq!(archimedean_factor(0.0, 0.0, &x, &x, 100).unwrap(), Complex64::new(1.0, 0.0));
        let big = (2.0 * std::f64::consts::PI).exp().round() as u64;
        let v = archimedean_factor(1.0, 0.0, &x, &x, big).unwrap();
        assert!((v.norm() - 0.5f64.sqrt()).abs() < 1e-12);
        let v = archimedean_factor(0.7, -0.7, &x, &x, 1000).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn poly_prediction_for_one_is_one() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let one = MultFunc::one();
        let r = predict_poly_corr(&one, &one, &poly("x^2+1"), &poly("x+1"), 0.0, 0.0, 10_000, true, &sieve, Exec::Sequential).unwrap();
        assert!((r.prediction - 1.0).norm() < 1e-12);
        assert_eq!(r.direct, Some(Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn multi_reduces_to_pairs() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let sq = MultFunc::mobius_sq();
        let terms = [
            MultiTerm { f: sq.clone(), t: 0.0, a: 1, b: 0 },
            MultiTerm { f: sq.clone(), t: 0.0, a: 1, b: 1 },
        ];
        let m = correlate_multi(&terms, 10_000, false, &sieve, Exec::Sequential).unwrap();
        let two = predict_poly_corr(&sq, &sq, &PolynomialZ::x(), &poly("x+1"), 0.0, 0.0, 10_000, false, &sieve, Exec::Sequential).unwrap();
        assert!((m.prediction - two.prediction).norm() < 1e-10);
        let bad = [terms[0].clone(), terms[0].clone()];
        assert!(matches!(
            correlate_multi(&bad, 10_000, false, &sieve, Exec::Sequential),
            Err(Error::DegenerateForms(_))
        ));
    }
}
