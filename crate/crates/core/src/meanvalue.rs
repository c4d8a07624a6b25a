//! Local factors `M_p(f)`, `M_p(f(P))`, their Euler products, and the
//! direct-sum oracles they are compared against.

use crate::arith::{checked_pow, FactorSieve};
use crate::error::{Error, Result};
use crate::multfun::{distance_poly, MultFunc};
use crate::par::Exec;
use crate::poly::{large_prime_powers, omega_prime_power, PolyValueSieve, PolynomialZ, Rational};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;

/// Series are cut once the remaining mass is below this.
pub const TAIL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalFactorReport {
    pub p: u64,
    pub value: Complex64,
    pub truncation_k: u32,
    pub tail_bound: f64,
}

/// `M_p(f) = (1 - 1/p) Σ_k f(p^k)/p^k`.
///
/// The mass of `v_p(n) >= K` is assigned to `f(p^K)`, so a function with
/// `f(2^k) = -1` for all `k` gets exactly zero at `p = 2`.
pub fn local_mean(f: &MultFunc, p: u64) -> LocalFactorReport {
    let inv = 1.0 / p as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mass = 1.0;
    let mut k = 0;
    while 2.0 * mass >= TAIL_TOL {
        acc += f.at(p, k) * (mass * (1.0 - inv));
        mass *= inv;
        k += 1;
    }
    acc += f.at(p, k) * mass;
    LocalFactorReport {
        p,
        value: acc,
        truncation_k: k,
        tail_bound: 2.0 * mass,
    }
}

/// `ω_P(p^k)/p^k` for `k = 0..` until it drops below the tolerance or
/// `p^k` leaves the 64-bit range.
fn omega_densities(poly: &PolynomialZ, p: u64) -> Result<Vec<f64>> {
    let mut out = vec![1.0];
    let mut k = 1;
    while let Some(pk) = checked_pow(p, k).filter(|&v| v <= 1 << 62) {
        let w = omega_prime_power(poly, p, k)? as f64 / pk as f64;
        out.push(w);
        if 2.0 * w < TAIL_TOL {
            break;
        }
        k += 1;
    }
    Ok(out)
}

/// `M_p(f(P)) = Σ_k f(p^k)(ω_P(p^k)/p^k - ω_P(p^{k+1})/p^{k+1})`.
pub fn local_mean_poly(f: &MultFunc, poly: &PolynomialZ, p: u64) -> Result<LocalFactorReport> {
    let w = omega_densities(poly, p)?;
    let kk = w.len() - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..kk {
        acc += f.at(p, k as u32) * (w[k] - w[k + 1]);
    }
    acc += f.at(p, kk as u32) * w[kk];
    Ok(LocalFactorReport {
        p,
        value: acc,
        truncation_k: kk as u32,
        tail_bound: 2.0 * w[kk],
    })
}

/// The exact weights of `M_p(f(P))` for `k < K`, and the residual mass
/// `ω_P(p^K)/p^K`. They always sum to 1.
pub fn local_mean_poly_weights(poly: &PolynomialZ, p: u64, max_k: u32) -> Result<(Vec<Rational>, Rational)> {
    let dens = |k: u32| -> Result<Rational> {
        let pk = checked_pow(p, k).ok_or(Error::OutOfRange {
            what: "p^k",
            value: p as u128,
            limit: u64::MAX as u128,
        })?;
        Ok(Rational::new(omega_prime_power(poly, p, k)? as i128, pk as i128))
    };
    let w: Vec<Rational> = (0..=max_k).map(dens).collect::<Result<_>>()?;
    let weights = w.windows(2).map(|pair| pair[0] - pair[1]).collect();
    Ok((weights, w[max_k as usize]))
}

/// A product of local factors with its error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerProduct {
    pub value: Complex64,
    /// Bound from the truncated local series.
    pub tail_bound: f64,
    /// Bound on accumulated floating-point rounding.
    pub rounding_bound: f64,
}

/// Multiplies the factors in ascending prime order.
pub fn euler_product(factors: &[LocalFactorReport]) -> EulerProduct {
    let mut sorted: Vec<&LocalFactorReport> = factors.iter().collect();
    sorted.sort_by_key(|r| r.p);
    let mut value = Complex64::new(1.0, 0.0);
    let mut exact_abs = 1.0;
    let mut upper = 1.0;
    let mut rounding = 0.0;
    for r in sorted {
        value *= r.value;
        exact_abs *= r.value.norm();
        upper *= r.value.norm() + r.tail_bound;
        // one complex multiplication: a few ulps relative to the result
        rounding += 4.0 * f64::EPSILON * upper;
    }
    EulerProduct {
        value,
        tail_bound: upper - exact_abs,
        rounding_bound: rounding,
    }
}

/// `Π_{p <= limit} M_p(f(P))` with the per-prime reports.
pub fn poly_euler_product(
    f: &MultFunc,
    poly: &PolynomialZ,
    limit: u64,
    sieve: &FactorSieve,
) -> Result<(EulerProduct, Vec<LocalFactorReport>)> {
    sieve.check_covers(limit)?;
    let factors: Vec<LocalFactorReport> = sieve
        .primes_up_to(limit)
        .iter()
        .map(|&p| local_mean_poly(f, poly, p as u64))
        .collect::<Result<_>>()?;
    Ok((euler_product(&factors), factors))
}

/// `𝔓(f; P; x)`, the Euler product of `M_p(f(P))` over `p <= x`.
pub fn frak_p(f: &MultFunc, poly: &PolynomialZ, x: u64, sieve: &FactorSieve) -> Result<Complex64> {
    Ok(poly_euler_product(f, poly, x, sieve)?.0.value)
}

/// `Σ_{n <= x} w(n, factors of |P(n)|)`, reduced over fixed blocks.
pub(crate) fn sum_over_values<W>(poly: &PolynomialZ, x: u64, bound: Option<u64>, exec: Exec, w: W) -> Result<Complex64>
where
    W: Fn(u64, &[(u64, u32)]) -> Complex64 + Sync + Send,
{
    let sieve = PolyValueSieve::new(poly, x, bound)?;
    let parts = sieve.map_blocks(exec, |b| {
        (0..b.len()).fold(Complex64::new(0.0, 0.0), |acc, i| acc + w(b.start() + i as u64, b.factors(i)))
    })?;
    Ok(parts.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b))
}

pub(crate) fn eval_factors(f: &MultFunc, factors: &[(u64, u32)]) -> Complex64 {
    factors.iter().fold(Complex64::new(1.0, 0.0), |acc, &(p, k)| acc * f.at(p, k))
}

/// `(1/x) Σ_{n <= x} f(P(n))`, with `f(P(n))` read as `f(|P(n)|)`.
pub fn mean_direct(f: &MultFunc, poly: &PolynomialZ, x: u64, exec: Exec) -> Result<Complex64> {
    let s = sum_over_values(poly, x, None, exec, |_, fac| eval_factors(f, fac))?;
    Ok(s / x as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanValueReport {
    pub f: String,
    pub poly: String,
    pub x: u64,
    pub product_limit: u64,
    pub prediction: Complex64,
    pub direct: Option<Complex64>,
    /// `𝔻_P(1, f; log x; x) + 1/log log x`.
    pub error_budget: f64,
    pub product: EulerProduct,
    pub factors: Vec<LocalFactorReport>,
}

/// The Euler product over `p <= product_limit` next to the direct mean
/// of `f(P(n))` over `n <= x`.
pub fn mean_value_report(
    f: &MultFunc,
    poly: &PolynomialZ,
    x: u64,
    product_limit: u64,
    with_direct: bool,
    sieve: &FactorSieve,
    exec: Exec,
) -> Result<MeanValueReport> {
    if x < 16 {
        return Err(Error::InvalidArgument("x must be at least 16".into()));
    }
    let (product, factors) = poly_euler_product(f, poly, product_limit, sieve)?;
    let direct = if with_direct { Some(mean_direct(f, poly, x, exec)?) } else { None };
    let large = large_prime_powers(poly, x, None, exec)?;
    let lx = (x as f64).ln();
    let dist = distance_poly(&MultFunc::one(), f, lx, x as f64, &large, false, sieve)?;
    Ok(MeanValueReport {
        f: f.name().to_string(),
        poly: poly.to_string(),
        x,
        product_limit,
        prediction: product.value,
        direct,
        error_budget: dist.value + 1.0 / lx.ln(),
        product,
        factors,
    })
}

/// Checks `Σ f(P(n)) g(n) ≈ 𝔓(f; P; x) Σ g(n)` for the given weight `g`.
#[derive(Debug, Clone, Serialize)]
pub struct DecouplingReport {
    pub frak_p: Complex64,
    pub weighted_sum: Complex64,
    pub plain_sum: Complex64,
    /// `|Σ f(P(n))g(n) - 𝔓 Σ g(n)| / x`.
    pub gap: f64,
}

pub fn decoupling_check<G>(
    f: &MultFunc,
    poly: &PolynomialZ,
    x: u64,
    g: G,
    sieve: &FactorSieve,
    exec: Exec,
) -> Result<DecouplingReport>
where
    G: Fn(u64) -> Complex64 + Sync + Send,
{
    let fp = frak_p(f, poly, x, sieve)?;
    let weighted = sum_over_values(poly, x, None, exec, |n, fac| eval_factors(f, fac) * g(n))?;
    let plain = crate::par::sum_blocks(1..x + 1, exec, Complex64::new(0.0, 0.0), |r| {
        r.fold(Complex64::new(0.0, 0.0), |acc, n| acc + g(n))
    });
    Ok(DecouplingReport {
        frak_p: fp,
        weighted_sum: weighted,
        plain_sum: plain,
        gap: (weighted - fp * plain).norm() / x as f64,
    })
}

/// Mean, variance proxy and empirical spread of an additive function
/// `h(P(n)) = Σ_{p^k ∥ P(n), p^k < x} h(p^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TkVariance {
    pub mu: Complex64,
    pub sigma2: f64,
    /// `(1/x) Σ_{n <= x} |h(P(n)) - μ|²`.
    pub empirical: f64,
    /// `empirical / σ²` (0 when both vanish).
    pub ratio_sigma: f64,
    /// `empirical / (σ² + (log log x)³ / log x)`.
    pub ratio_bound: f64,
}

pub fn tk_variance<H>(h: H, poly: &PolynomialZ, x: u64, sieve: &FactorSieve, exec: Exec) -> Result<TkVariance>
where
    H: Fn(u64, u32) -> Complex64 + Sync + Send,
{
    if x < 16 {
        return Err(Error::InvalidArgument("x must be at least 16".into()));
    }
    sieve.check_covers(x)?;
    let mut mu = Complex64::new(0.0, 0.0);
    let mut sigma2 = 0.0;
    for &p in sieve.primes_up_to(x) {
        let p = p as u64;
        let mut pk = p;
        let mut k = 1;
        let mut om = omega_prime_power(poly, p, 1)?;
        while pk < x {
            let next = omega_prime_power(poly, p, k + 1)?;
            let w = (om as f64 - next as f64 / p as f64) / pk as f64;
            let v = h(p, k);
            if v.norm() > 2.0 + 1e-12 {
                return Err(Error::InvalidArgument(format!("|h({p}^{k})| exceeds 2")));
            }
            mu += v * w;
            sigma2 += v.norm_sqr() * w;
            om = next;
            pk *= p;
            k += 1;
        }
    }
    let total = sum_over_values(poly, x, None, exec, |_, fac| {
        let hv = fac
            .iter()
            .filter(|&&(p, k)| checked_pow(p, k).is_some_and(|v| v < x))
            .fold(Complex64::new(0.0, 0.0), |acc, &(p, k)| acc + h(p, k));
        Complex64::new((hv - mu).norm_sqr(), 0.0)
    })?;
    let empirical = total.re / x as f64;
    let lx = (x as f64).ln();
    let bound = sigma2 + lx.ln().powi(3) / lx;
    Ok(TkVariance {
        mu,
        sigma2,
        empirical,
        ratio_sigma: if sigma2 > 0.0 { empirical / sigma2 } else { 0.0 },
        ratio_bound: empirical / bound,
    })
}

/// The function built to make `f(P(n))` have a large mean by steering the
/// values at primes `p > 2x`.
#[derive(Debug, Clone, Serialize)]
pub struct AdversarialReport {
    pub x: u64,
    /// `|𝔐(x)|`: the `n <= x` whose `P(n)` has a private prime above `2x`.
    pub steered: usize,
    pub steered_fraction: f64,
    /// Sum of `f(P(n))` over the remaining `n`.
    pub complement_sum: Complex64,
    pub phi: f64,
    /// `(|complement_sum| + |𝔐|)/x`.
    pub predicted_mean: f64,
    /// `|mean|` recomputed from scratch with the constructed function.
    pub achieved_mean: f64,
    /// `(n, p, f(p))`.
    pub assignments: Vec<(u64, u64, Complex64)>,
    #[serde(skip)]
    pub function: Option<MultFunc>,
}

/// Builds `f` agreeing with `base` except at primes `p > 2x` that divide
/// exactly one `P(n)`, `n <= x`, to the first power and are its only prime
/// factor above `2x`. There `f(p) = e^{iφ} conj(base(P(n)/p))` with
/// `φ = arg` of the sum over the other `n`, so both parts point the same way.
pub fn adversarial_mean(poly: &PolynomialZ, x: u64, base: &MultFunc, exec: Exec) -> Result<AdversarialReport> {
    if x < 100 {
        return Err(Error::InvalidArgument("x must be at least 100".into()));
    }
    if !base.is_unimodular() {
        return Err(Error::InvalidArgument(format!("base function {} must be unimodular", base.name())));
    }
    let big = 2 * x;
    let vs = PolyValueSieve::new(poly, x, Some(big))?;
    // (n, large primes with exponents, value of base on the small part)
    let rows = vs.map_blocks(exec, |b| {
        (0..b.len())
            .map(|i| {
                let fac = b.factors(i);
                let large: Vec<(u64, u32)> = fac.iter().copied().filter(|&(p, _)| p > big).collect();
                let small: Complex64 = fac
                    .iter()
                    .filter(|&&(p, _)| p <= big)
                    .fold(Complex64::new(1.0, 0.0), |acc, &(p, k)| acc * base.at(p, k));
                let full = eval_factors(base, fac);
                (b.start() + i as u64, large, small, full)
            })
            .collect::<Vec<_>>()
    })?;
    let rows: Vec<_> = rows.into_iter().flatten().collect();
    let mut uses: HashMap<u64, u32> = HashMap::new();
    for (_, large, _, _) in &rows {
        for &(p, _) in large {
            *uses.entry(p).or_default() += 1;
        }
    }
    let steerable = |large: &[(u64, u32)]| large.len() == 1 && large[0].1 == 1 && uses[&large[0].0] == 1;
    let mut complement = Complex64::new(0.0, 0.0);
    let mut steered = Vec::new();
    for (n, large, small, full) in &rows {
        if steerable(large) {
            steered.push((*n, large[0].0, *small));
        } else {
            complement += full;
        }
    }
    let phi = if complement.norm() > 0.0 { complement.arg() } else { 0.0 };
    let rot = Complex64::from_polar(1.0, phi);
    let assignments: Vec<(u64, u64, Complex64)> = steered.iter().map(|&(n, p, small)| (n, p, rot * small.conj())).collect();
    let table: HashMap<u64, Complex64> = assignments.iter().map(|&(_, p, v)| (p, v)).collect();
    let f = base.with_prime_table(format!("adversary({}; x={x})", base.name()), table, false);
    let achieved = sum_over_values(poly, x, Some(big), exec, |_, fac| eval_factors(&f, fac))?.norm() / x as f64;
    Ok(AdversarialReport {
        x,
        steered: steered.len(),
        steered_fraction: steered.len() as f64 / x as f64,
        complement_sum: complement,
        phi,
        predicted_mean: (complement.norm() + steered.len() as f64) / x as f64,
        achieved_mean: achieved,
        assignments,
        function: Some(f),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceLevel {
    pub level: u32,
    pub x: u64,
    pub steered: usize,
    /// `|(1/x) Σ_{n <= x} f(n² + 1)|`.
    pub mean_abs: f64,
    /// `𝔻(1, f; x)²`.
    pub distance_sq: f64,
    /// `2 log log x`.
    pub reference: f64,
}

/// Iterates the adversarial step at `x_k = 2^{2^k}`, `k = 1..=K`, for a
/// completely multiplicative `f` that is `-1` at every prime not steered.
///
/// The primes steered at level `k` lie in `(2x_k, x_k² + 1]`, below the
/// next level's range `(2x_k², …)`, so later levels never touch what an
/// earlier mean depends on.
pub fn dependence_demo(max_level: u32, exec: Exec) -> Result<Vec<DependenceLevel>> {
    if max_level == 0 || max_level > 4 {
        return Err(Error::OutOfRange {
            what: "dependence level K",
            value: max_level as u128,
            limit: 4,
        });
    }
    let poly = PolynomialZ::parse("x^2+1")?;
    let mut assigned: HashMap<u64, f64> = HashMap::new();
    let mut out = Vec::new();
    for level in 1..=max_level {
        let x = 1u64 << (1u32 << level);
        let big = 2 * x;
        let vs = PolyValueSieve::new(&poly, x, Some(big.max(2)))?;
        let fval = |p: u64, k: u32, table: &HashMap<u64, f64>| -> f64 {
            let v = table.get(&p).copied().unwrap_or(-1.0);
            if k % 2 == 0 { 1.0 } else { v }
        };
        let rows: Vec<(u64, Vec<(u64, u32)>)> = vs
            .map_blocks(exec, |b| (0..b.len()).map(|i| (b.start() + i as u64, b.factors(i).to_vec())).collect::<Vec<_>>())?
            .into_iter()
            .flatten()
            .collect();
        let mut uses: HashMap<u64, u32> = HashMap::new();
        for (_, fac) in &rows {
            for &(p, _) in fac.iter().filter(|&&(p, _)| p > big) {
                *uses.entry(p).or_default() += 1;
            }
        }
        let mut complement = 0.0;
        let mut steered = Vec::new();
        for (n, fac) in &rows {
            let large: Vec<_> = fac.iter().filter(|&&(p, _)| p > big).collect();
            let small: f64 = fac.iter().filter(|&&(p, _)| p <= big).map(|&(p, k)| fval(p, k, &assigned)).product();
            if large.len() == 1 && large[0].1 == 1 && uses[&large[0].0] == 1 {
                steered.push((*n, large[0].0, small));
            } else {
                complement += fac.iter().map(|&(p, k)| fval(p, k, &assigned)).product::<f64>();
            }
        }
        let sign = if complement < 0.0 { -1.0 } else { 1.0 };
        for &(_, p, small) in &steered {
            assigned.insert(p, sign * small);
        }
        let total: f64 = rows
            .iter()
            .map(|(_, fac)| fac.iter().map(|&(p, k)| fval(p, k, &assigned)).product::<f64>())
            .sum();
        let distance_sq: f64 = crate::arith::FactorSieve::new(x.max(2))?
            .primes_up_to(x)
            .iter()
            .map(|&p| (1.0 - fval(p as u64, 1, &assigned)) / p as f64)
            .sum();
        out.push(DependenceLevel {
            level,
            x,
            steered: steered.len(),
            mean_abs: total.abs() / x as f64,
            distance_sq,
            reference: 2.0 * (x as f64).ln().ln(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime_u64;
    use crate::multfun::make_mult_func;

    fn poly(s: &str) -> PolynomialZ {
        PolynomialZ::parse(s).unwrap()
    }

    #[test]
    fn local_mean_examples() {
        for p in [2u64, 3, 101, 99991] {
            assert!((local_mean(&MultFunc::one(), p).value - 1.0).norm() < 1e-15);
        }
        let r = local_mean(&MultFunc::mobius_sq(), 2);
        assert!((r.value.re - 0.75).abs() < 1e-15);
        assert!(r.tail_bound < 1e-12);
        let neg = make_mult_func("override(one; 2:* => -1)").unwrap();
        assert!(local_mean(&neg, 2).value.norm() < 1e-15);
        assert!(local_mean(&neg, 3).value.norm() > 0.5);
    }

    #[test]
    fn vanishing_only_for_minus_one_at_two() {
        let neg = make_mult_func("override(one; 2:* => -1)").unwrap();
        let lam = MultFunc::liouville();
        let tweaked = make_mult_func("override(one; 2:* => -1; 2:7 => 1)").unwrap();
        assert!(local_mean(&neg, 2).value.norm() < 1e-15);
        assert!(local_mean(&lam, 2).value.norm() > 0.1);
        assert!(local_mean(&tweaked, 2).value.norm() > 1e-3);
        for p in [3u64, 5, 7] {
            let f = make_mult_func(&format!("override(one; {p}:* => -1)")).unwrap();
            assert!(local_mean(&f, p).value.norm() > 0.3);
        }
    }

    #[test]
    fn local_mean_poly_examples() {
        let sq = MultFunc::mobius_sq();
        let p2 = poly("x^2+1");
        assert!((local_mean_poly(&sq, &p2, 2).unwrap().value.re - 1.0).abs() < 1e-15);
        assert!((local_mean_poly(&sq, &p2, 5).unwrap().value.re - 23.0 / 25.0).abs() < 1e-15);
        assert!((local_mean_poly(&sq, &p2, 3).unwrap().value.re - 1.0).abs() < 1e-15);
        for p in [2u64, 3, 7, 13] {
            let a = local_mean_poly(&sq, &PolynomialZ::x(), p).unwrap().value;
            assert!((a - local_mean(&sq, p).value).norm() < 1e-15);
        }
    }

    #[test]
    fn telescoping_is_exact() {
        let polys = ["x", "x+1", "x^2+1", "2*x^2+3", "x^3-x", "x^2", "6*x^3+x+5", "x^3+x^2+x+1"];
        let primes: Vec<u64> = (2..=100).filter(|&p| is_prime_u64(p)).collect();
        for text in polys {
            let pl = poly(text);
            for &p in &primes {
                let max_k = if p < 10 { 6 } else { 3 };
                let (weights, residual) = local_mean_poly_weights(&pl, p, max_k).unwrap();
                let total = weights.iter().fold(residual, |acc, w| acc + w);
                assert_eq!(total, Rational::from_integer(1), "{text} p={p}");
                let v = local_mean_poly(&MultFunc::one(), &pl, p).unwrap().value;
                assert!((v - 1.0).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn squarefree_product_and_direct_count() {
        let sieve = FactorSieve::new(100_000).unwrap();
        let sq = MultFunc::mobius_sq();
        let (prod, _) = poly_euler_product(&sq, &PolynomialZ::x(), 100_000, &sieve).unwrap();
        // independent count with a plain square sieve
        let n = 1_000_000usize;
        let mut free = vec![true; n + 1];
        for d in 2..=1000usize {
            let mut m = d * d;
            while m <= n {
                free[m] = false;
                m += d * d;
            }
        }
        let count = free[1..].iter().filter(|&&b| b).count();
        assert_eq!(count, 607_926);
        assert!((prod.value.re - 0.607927).abs() < 2e-5);
        let direct = mean_direct(&sq, &PolynomialZ::x(), 1_000_000, Exec::Parallel).unwrap();
        assert_eq!(direct.re, count as f64 / 1e6);
    }

    #[test]
    fn report_has_budget_and_factors() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let r = mean_value_report(&MultFunc::one(), &poly("x^2+1"), 10_000, 10_000, true, &sieve, Exec::Sequential).unwrap();
        assert_eq!(r.direct, Some(Complex64::new(1.0, 0.0)));
        assert!((r.prediction - 1.0).norm() < 1e-12);
        assert_eq!(r.factors.len(), 1229);
        assert!((r.error_budget - 1.0 / (10_000f64).ln().ln()).abs() < 1e-12);
    }

    #[test]
    fn tk_variance_zero_and_identity() {
        let sieve = FactorSieve::new(100_000).unwrap();
        let z = tk_variance(|_, _| Complex64::new(0.0, 0.0), &PolynomialZ::x(), 10_000, &sieve, Exec::Sequential).unwrap();
        assert_eq!((z.mu, z.sigma2, z.empirical), (Complex64::new(0.0, 0.0), 0.0, 0.0));
        let r = tk_variance(|_, _| Complex64::new(1.0, 0.0), &PolynomialZ::x(), 100_000, &sieve, Exec::Parallel).unwrap();
        assert!((r.mu.re - (1e5f64).ln().ln()).abs() < 0.5, "{}", r.mu);
        assert!(r.ratio_sigma <= 10.0);
    }

    #[test]
    fn adversary_smoke() {
        let r = adversarial_mean(&poly("x^2+1"), 100, &MultFunc::liouville(), Exec::Sequential).unwrap();
        assert!((r.achieved_mean - r.predicted_mean).abs() < 1e-12);
        assert!(r.achieved_mean >= r.steered_fraction - 1e-12);
        assert!(adversarial_mean(&poly("x^2+1"), 50, &MultFunc::one(), Exec::Sequential).is_err());
    }

    #[test]
    fn dependence_small_levels() {
        let levels = dependence_demo(3, Exec::Sequential).unwrap();
        assert_eq!(levels.iter().map(|l| l.x).collect::<Vec<_>>(), vec![4, 16, 256]);
        assert!(levels.iter().all(|l| l.mean_abs >= l.steered as f64 / l.x as f64 - 1e-12));
        assert!(dependence_demo(5, Exec::Sequential).is_err());
    }
}
