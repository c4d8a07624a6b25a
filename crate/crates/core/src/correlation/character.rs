//! Shifted correlations of functions pretending to be `χ(n) n^{it}`.

use super::{prime_set, CorrelationReport};
use crate::arith::{factor_trial, mobius, valuation, FactorSieve};
use crate::error::{Error, Result};
use crate::meanvalue::local_mean;
use crate::multfun::{CyclotomicInt, DirichletCharacter, MultFunc, UNIT_TOL};
use crate::par::{self, Exec};
use crate::poly::PolynomialZ;
use num_complex::Complex64;
use std::collections::HashMap;

const SERIES_TOL: f64 = 1e-17;

fn require_primitive(chi: &DirichletCharacter) -> Result<()> {
    if chi.is_primitive() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "character {} mod {} has conductor {}; a primitive character is required",
            chi.index(),
            chi.modulus(),
            chi.conductor()
        )))
    }
}

/// `Σ_{a mod q} χ(a) conj χ(a+b)` in closed form: the product over
/// `p^k ∥ q` of `φ(p^k)` if `p^k | b`, `−p^{k−1}` if `p^{k−1} ∥ b`, else 0.
pub fn char_autocorr(chi: &DirichletCharacter, b: i64) -> Result<i64> {
    require_primitive(chi)?;
    let q = chi.modulus();
    let b = b.unsigned_abs() % q;
    let mut acc = 1i64;
    for &(p, k) in factor_trial(q)?.entries() {
        let pk1 = p.pow(k - 1) as i64;
        let i = if b == 0 { u32::MAX } else { valuation(b, p) };
        acc *= if i >= k {
            pk1 * (p as i64 - 1)
        } else if i == k - 1 {
            -pk1
        } else {
            return Ok(0);
        };
    }
    Ok(acc)
}

/// `χ(n) = ζ_E^{phase[n]}` for `0 <= n < 2q`, `u32::MAX` off the units.
fn phase_table(chi: &DirichletCharacter) -> Vec<u32> {
    let q = chi.modulus();
    let one: Vec<u32> = (0..q).map(|n| chi.phase(n).map_or(u32::MAX, |v| v as u32)).collect();
    one.iter().chain(one.iter()).copied().collect()
}

fn shift_histogram(phase: &[u32], q: usize, e: u32, b: usize, hist: &mut [i64]) {
    hist.iter_mut().for_each(|h| *h = 0);
    for a in 0..q {
        let (x, y) = (phase[a], phase[a + b]);
        if x != u32::MAX && y != u32::MAX {
            let j = if x >= y { x - y } else { x + e - y };
            hist[j as usize] += 1;
        }
    }
}

/// The literal sum `Σ_{a mod q} χ(a) conj χ(a+b)` as an exact element of
/// `ℤ[ζ_E]`, `E` the exponent of the character group.
pub fn char_autocorr_literal(chi: &DirichletCharacter, b: i64) -> CyclotomicInt {
    let q = chi.modulus() as usize;
    let e = chi.group().exponent();
    let phase = phase_table(chi);
    let mut hist = vec![0i64; e as usize];
    shift_histogram(&phase, q, e as u32, b.rem_euclid(q as i64) as usize, &mut hist);
    CyclotomicInt::from_powers(e, &hist)
}

/// The literal sums for every shift `0 <= b < q`.
///
/// Shifts with identical phase-difference histograms share one reduction.
pub fn char_autocorr_table(chi: &DirichletCharacter) -> Vec<CyclotomicInt> {
    let q = chi.modulus() as usize;
    let e = chi.group().exponent();
    let phase = phase_table(chi);
    let mut hist = vec![0i64; e as usize];
    let mut memo: HashMap<Vec<i64>, CyclotomicInt> = HashMap::new();
    (0..q)
        .map(|b| {
            shift_histogram(&phase, q, e as u32, b, &mut hist);
            if let Some(v) = memo.get(&hist) {
                return v.clone();
            }
            let v = CyclotomicInt::from_powers(e, &hist);
            memo.insert(hist.clone(), v.clone());
            v
        })
        .collect()
}

/// `M_p(F, conj F; d)` for `p^n ∥ d`: the mean of
/// `F(p^{v_p(m)}) conj F(p^{v_p(m+d)})` over `m ∈ ℤ_p`.
pub fn local_shift_factor(big_f: &MultFunc, p: u64, n: u32) -> Complex64 {
    let inv = 1.0 / p as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 1.0;
    for k in 0..n {
        acc += big_f.at(p, k).norm_sqr() * (1.0 - inv) * scale;
        scale *= inv;
    }
    let fn_ = big_f.at(p, n);
    acc += fn_.norm_sqr() * (1.0 - 2.0 * inv) * scale;
    let mut j = n + 1;
    scale *= inv;
    while 2.0 * scale >= SERIES_TOL {
        acc += 2.0 * (fn_ * big_f.at(p, j).conj()).re * (1.0 - inv) * scale;
        scale *= inv;
        j += 1;
    }
    acc
}

/// The factor at `p^ℓ ∥ q` for `p^i ∥ d`:
/// `Σ_{j<=i} |f(p^j)|²/p^j · c(i−j)` with `c(e) = 1 − 1/p` for `e >= ℓ`,
/// `−1/p` for `e = ℓ − 1`, and 0 otherwise.
pub fn local_char_shift_factor(f: &MultFunc, p: u64, ell: u32, i: u32) -> Complex64 {
    let inv = 1.0 / p as f64;
    let c = |e: u32| {
        if e >= ell {
            1.0 - inv
        } else if e + 1 == ell {
            -inv
        } else {
            0.0
        }
    };
    let mut acc = 0.0;
    let mut scale = 1.0;
    for j in 0..=i {
        acc += f.at(p, j).norm_sqr() * scale * c(i - j);
        scale *= inv;
    }
    Complex64::new(acc, 0.0)
}

fn check_unimodular_off(f: &MultFunc, q: u64, primes: &[u64]) -> Result<()> {
    for &p in primes.iter().take(2000) {
        if q % p == 0 {
            continue;
        }
        for k in 1..=3 {
            let v = f.at(p, k);
            if (v.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotUnimodular {
                    name: f.name().to_string(),
                    p,
                    k,
                    modulus: v.norm(),
                });
            }
        }
    }
    Ok(())
}

/// Prediction for `(1/x) Σ_{n <= x} f(n) conj f(n+d)` when `f` pretends
/// to be `χ(n) n^{it}` with `χ` primitive mod `q`.
#[allow(clippy::too_many_arguments)]
pub fn predict_char_shift(
    f: &MultFunc,
    chi: &DirichletCharacter,
    t: f64,
    d: i64,
    x: u64,
    with_direct: bool,
    sieve: &FactorSieve,
    exec: Exec,
) -> Result<CorrelationReport> {
    require_primitive(chi)?;
    if d == 0 {
        return Err(Error::InvalidArgument("shift d must be nonzero; use the self-correlation for d = 0".into()));
    }
    if x < 16 {
        return Err(Error::InvalidArgument("x must be at least 16".into()));
    }
    let q = chi.modulus();
    let dd = d.unsigned_abs();
    let primes = prime_set(x, dd * q, sieve)?;
    check_unimodular_off(f, q, &primes)?;
    let big_f = f.twist(chi, t);
    let ells: HashMap<u64, u32> = factor_trial(q)?.entries().iter().copied().collect();
    let mut all = primes;
    for &p in ells.keys() {
        if !all.contains(&p) {
            all.push(p);
        }
    }
    all.sort_unstable();
    let factors = par::map_items(all, exec, |p| {
        let i = valuation(dd, p);
        let v = match ells.get(&p) {
            Some(&ell) => local_char_shift_factor(f, p, ell, i),
            None => local_shift_factor(&big_f, p, i),
        };
        (p, v)
    });
    let mut report = CorrelationReport::new("char-shift", x)
        .with_spec("f", f.name())
        .with_spec("q", q)
        .with_spec("chi", chi.index())
        .with_spec("t", t)
        .with_spec("d", d);
    report.prediction = factors.iter().fold(Complex64::new(1.0, 0.0), |acc, &(_, v)| acc * v);
    report.local_factors = factors;
    if with_direct {
        let pos = super::corr_direct(f, &f.conj(), &PolynomialZ::x(), &PolynomialZ::linear(1, dd as i64)?, x, exec)?;
        // Σ f(n) conj f(n−|d|) is the conjugate of the positive shift up to O(|d|/x)
        report.direct = Some(if d > 0 { pos } else { pos.conj() });
    }
    Ok(report)
}

/// `(μ(q)/q) Π_{p ∤ q, p <= x} (2 Re[(1 − 1/p) Σ_k F(p^k)/p^k] − 1)` with
/// `F` the twist of `f` by `χ` and `n^{it}`.
pub fn keytotao_value(f: &MultFunc, chi: &DirichletCharacter, t: f64, x: u64, sieve: &FactorSieve) -> Result<Complex64> {
    require_primitive(chi)?;
    let q = chi.modulus();
    let fac = factor_trial(q)?;
    let big_f = f.twist(chi, t);
    let mut acc = mobius(&fac) as f64 / q as f64;
    for p in prime_set(x, 1, sieve)? {
        if q % p != 0 {
            acc *= 2.0 * local_mean(&big_f, p).value.re - 1.0;
        }
    }
    Ok(Complex64::new(acc, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::shifted_selfcorr;
    use crate::multfun::{make_mult_func, primitive_characters_mod};

    fn prim(q: u64) -> DirichletCharacter {
        primitive_characters_mod(q).into_iter().next().unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let chi3 = prim(3);
        assert_eq!(char_autocorr(&chi3, 1).unwrap(), -1);
        assert_eq!(char_autocorr_literal(&chi3, 1).as_integer(), Some(-1));
        let chi9 = prim(9);
        assert_eq!(char_autocorr(&chi9, 3).unwrap(), -3);
        assert_eq!(char_autocorr(&chi9, 1).unwrap(), 0);
        assert_eq!(char_autocorr(&chi9, 0).unwrap(), 6);
        assert_eq!(char_autocorr_literal(&chi9, 3).as_integer(), Some(-3));
        assert_eq!(char_autocorr_literal(&chi9, 1).as_integer(), Some(0));
        let imprimitive = DirichletCharacter::new(9, 0).unwrap();
        assert!(char_autocorr(&imprimitive, 1).is_err());
    }

    #[test]
    fn closed_form_matches_literal_sums_up_to_120() {
        for q in 1..=120 {
            for chi in primitive_characters_mod(q) {
                let table = char_autocorr_table(&chi);
                let e = chi.group().exponent();
                for (b, lit) in table.iter().enumerate() {
                    let closed = char_autocorr(&chi, b as i64).unwrap();
                    assert_eq!(lit, &CyclotomicInt::from_integer(e, closed), "q={q} chi={} b={b}", chi.index());
                }
            }
        }
    }

    #[test]
    fn shift_factor_telescopes_for_one() {
        let one = MultFunc::one();
        for p in [2u64, 3, 7] {
            for n in 0..4 {
                assert!((local_shift_factor(&one, p, n) - 1.0).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn shift_factor_matches_enumeration() {
        let f = make_mult_func("override(liouville; 2:3 => 0.6+0.8i; 3:* => i)").unwrap();
        for (p, d) in [(2u64, 4u64), (2, 3), (3, 9), (3, 2), (5, 5)] {
            let k = if p == 2 { 14 } else { 8 };
            let m = p.pow(k);
            let val = |v: u64| if v == 0 { k } else { valuation(v, p) };
            let brute: Complex64 = (0..m)
                .map(|a| f.at(p, val(a)) * f.at(p, val((a + d) % m)).conj())
                .sum::<Complex64>()
                / m as f64;
            let got = local_shift_factor(&f, p, valuation(d, p));
            assert!((got - brute).norm() < 4.0 / (p as f64).powi(k as i32 - 2), "p={p} d={d}: {got} vs {brute}");
        }
    }

    #[test]
    fn zero_unless_q_divides_d_rad_q() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let chi = prim(9);
        let f = MultFunc::from_character(&chi);
        let r = predict_char_shift(&f, &chi, 0.0, 1, 1000, false, &sieve, Exec::Sequential).unwrap();
        assert_eq!(r.prediction, Complex64::new(0.0, 0.0));
        let r = predict_char_shift(&f, &chi, 0.0, 3, 1000, false, &sieve, Exec::Sequential).unwrap();
        assert!(r.prediction.norm() > 0.1);
    }

    #[test]
    fn character_shift_against_direct_sums() {
        let sieve = FactorSieve::new(200_000).unwrap();
        for (q, d) in [(3u64, 1i64), (9, 3), (9, 6), (4, 2), (8, 4), (5, 5), (12, 6), (15, 1)] {
            for chi in primitive_characters_mod(q) {
                let f = MultFunc::from_character(&chi);
                let r = predict_char_shift(&f, &chi, 0.0, d, 200_000, true, &sieve, Exec::Parallel).unwrap();
                assert!(r.gap().unwrap() < 0.01, "q={q} d={d}: {} vs {}", r.prediction, r.direct.unwrap());
            }
        }
        let chi = prim(3);
        let f = make_mult_func("override(char(3,1); 3:1 => 0.5; 3:2 => -0.5; 3:* => 0.2)").unwrap();
        for d in [1i64, 3, 9, 18] {
            let r = predict_char_shift(&f, &chi, 0.0, d, 200_000, true, &sieve, Exec::Parallel).unwrap();
            assert!(r.gap().unwrap() < 0.01, "d={d}: {} vs {}", r.prediction, r.direct.unwrap());
        }
    }

    #[test]
    fn trivial_character_reduces_to_self_correlation() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let one = DirichletCharacter::new(1, 0).unwrap();
        for spec in ["override(one; 2:* => -1)", "liouville", "override(nit(0.3); 3:* => -1)"] {
            let f = make_mult_func(spec).unwrap();
            for d in [1u64, 2, 6, 12] {
                let a = predict_char_shift(&f, &one, 0.0, d as i64, 10_000, false, &sieve, Exec::Sequential).unwrap();
                let b = shifted_selfcorr(&f, d, 10_000, false, &sieve, Exec::Sequential).unwrap();
                assert!((a.prediction - b.prediction).norm() < 1e-10, "{spec} d={d}");
            }
        }
    }

    #[test]
    fn keytotao_examples() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let chi3 = prim(3);
        let f = MultFunc::from_character(&chi3);
        assert!((keytotao_value(&f, &chi3, 0.0, 10_000, &sieve).unwrap().re + 1.0 / 3.0).abs() < 1e-12);
        let triv = DirichletCharacter::new(1, 0).unwrap();
        let g = MultFunc::period_two_completely();
        assert!((keytotao_value(&g, &triv, 0.0, 10_000, &sieve).unwrap().re + 1.0 / 3.0).abs() < 1e-12);
        assert!((keytotao_value(&MultFunc::one(), &triv, 0.0, 10_000, &sieve).unwrap().re - 1.0).abs() < 1e-12);
    }
}
