//! Linear correlations `Σ f(an+c) g(bn+d)` through the singular series
//! `Σ_{r | ad-bc} G(f; g; r; x)/r`.

use super::{archimedean_factor, error_budget, local_corr_with, prime_set, CorrelationReport};
use crate::arith::{factor_trial, gcd_i, valuation, FactorSieve};
use crate::error::{Error, Result};
use crate::multfun::MultFunc;
use crate::par::{self, Exec};
use crate::poly::PolynomialZ;
use num_complex::Complex64;
use serde::Serialize;

const SERIES_TOL: f64 = 1e-17;

/// The forms `P(n) = an + c`, `Q(n) = bn + d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinearForms {
    pub a: i64,
    pub c: i64,
    pub b: i64,
    pub d: i64,
}

impl LinearForms {
    /// Requires `a >= 1`, `b != 0`, `gcd(a, c) = gcd(b, d) = 1` and `ad != bc`.
    pub fn new(a: i64, c: i64, b: i64, d: i64) -> Result<Self> {
        if a < 1 || b == 0 {
            return Err(Error::InvalidArgument(format!("need a >= 1 and b != 0, got a = {a}, b = {b}")));
        }
        if gcd_i(a, c) != 1 || gcd_i(b, d) != 1 {
            return Err(Error::InvalidArgument(format!(
                "need gcd(a, c) = gcd(b, d) = 1, got ({a}, {c}) and ({b}, {d})"
            )));
        }
        let forms = Self { a, c, b, d };
        if forms.determinant() == 0 {
            return Err(Error::DegenerateForms(format!("ad - bc = 0 for ({a}n{c:+}, {b}n{d:+})")));
        }
        Ok(forms)
    }

    /// `ad − bc`.
    pub fn determinant(&self) -> i128 {
        self.a as i128 * self.d as i128 - self.b as i128 * self.c as i128
    }

    pub fn polys(&self) -> Result<(PolynomialZ, PolynomialZ)> {
        Ok((PolynomialZ::linear(self.a, self.c)?, PolynomialZ::linear(self.b, self.d)?))
    }
}

/// The local factor of `G` at `p` with `k = v_p(r)`:
/// `θ(p^k)γ(p^k) + δ_b Σ_{i>k} θ(p^k)γ(p^i)/p^{i−k} + δ_a Σ_{i>k} γ(p^k)θ(p^i)/p^{i−k}`,
/// with `δ_ℓ = 0` iff `p | ℓ`. Returns the value and a tail bound.
pub fn g_local(f: &MultFunc, g: &MultFunc, p: u64, k: u32, a: i64, b: i64) -> (Complex64, f64) {
    let pa = a.unsigned_abs() % p == 0;
    let pb = b.unsigned_abs() % p == 0;
    if k >= 1 && pa && pb {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    let th_k = f.theta(p, k);
    let ga_k = g.theta(p, k);
    let mut value = th_k * ga_k;
    let use_b = !pb && th_k != Complex64::new(0.0, 0.0);
    let use_a = !pa && ga_k != Complex64::new(0.0, 0.0);
    if !use_a && !use_b {
        return (value, 0.0);
    }
    let inv = 1.0 / p as f64;
    let mut scale = inv;
    let mut i = k + 1;
    // |θ|, |γ| <= 2, so the remaining terms are at most 4·scale/(1 − 1/p)
    let bound = |s: f64| 4.0 * s / (1.0 - inv);
    while bound(scale) >= SERIES_TOL {
        if use_b {
            value += th_k * g.theta(p, i) * scale;
        }
        if use_a {
            value += ga_k * f.theta(p, i) * scale;
        }
        scale *= inv;
        i += 1;
    }
    let terms = use_a as u32 + use_b as u32;
    (value, terms as f64 * bound(scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GFactor {
    pub r: u64,
    pub value: Complex64,
    pub a: i64,
    pub b: i64,
    pub tail_bound: f64,
}

/// `G(f; g; r; x) = Π_p g_local(p, v_p(r))` over every prime `p <= x` and
/// every prime dividing `r`.
pub fn g_factor(f: &MultFunc, g: &MultFunc, r: u64, a: i64, b: i64, x: u64, sieve: &FactorSieve) -> Result<GFactor> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let mut value = Complex64::new(1.0, 0.0);
    let (mut upper, mut exact) = (1.0, 1.0);
    for p in prime_set(x, r, sieve)? {
        let (v, tail) = g_local(f, g, p, valuation(r, p), a, b);
        value *= v;
        upper *= v.norm() + tail;
        exact *= v.norm();
    }
    Ok(GFactor {
        r,
        value,
        a,
        b,
        tail_bound: upper - exact,
    })
}

/// `G₀(r)` for the self-correlation of `f`: `G(f; conj f; r; x)` with `a = b = 1`.
pub fn autocorr_g0(f: &MultFunc, r: u64, x: u64, sieve: &FactorSieve) -> Result<Complex64> {
    Ok(g_factor(f, &f.conj(), r, 1, 1, x, sieve)?.value)
}

/// Both evaluations of the linear prediction at fixed truncation.
#[derive(Debug, Clone, Serialize)]
pub struct LinearSeries {
    /// `Σ_{r | N} G(r)/r`, `N = |ad − bc|`.
    pub series: Complex64,
    pub terms: Vec<(u64, Complex64)>,
    /// `Π_p M_p(f(P), g(Q))` over the same primes.
    pub product: Complex64,
    pub local_factors: Vec<(u64, Complex64)>,
    pub tail_bound: f64,
}

/// Evaluates the singular series and the Euler product for the forms over
/// the primes `p <= x` together with the primes dividing `ad − bc`.
pub fn linear_series(f: &MultFunc, g: &MultFunc, forms: &LinearForms, x: u64, sieve: &FactorSieve, exec: Exec) -> Result<LinearSeries> {
    let det = forms.determinant();
    let n = u64::try_from(det.unsigned_abs()).map_err(|_| Error::Overflow("ad - bc"))?;
    let primes = prime_set(x, n, sieve)?;
    let (pp, qq) = forms.polys()?;
    let res = Some(det);
    let locals = par::map_items(primes, exec, |p| -> Result<_> {
        let top = valuation(n, p);
        let g_vals: Vec<(Complex64, f64)> = (0..=top).map(|k| g_local(f, g, p, k, forms.a, forms.b)).collect();
        let m = local_corr_with(f, g, &pp, &qq, p, res)?;
        Ok((p, g_vals, m))
    });
    let mut base = Complex64::new(1.0, 0.0);
    let (mut upper, mut exact) = (1.0, 1.0);
    let mut special: Vec<(u64, Vec<(Complex64, f64)>)> = Vec::new();
    let mut product = Complex64::new(1.0, 0.0);
    let mut local_factors = Vec::new();
    for item in locals {
        let (p, g_vals, (m, _)) = item?;
        product *= m;
        local_factors.push((p, m));
        if g_vals.len() == 1 {
            let (v, tail) = g_vals[0];
            base *= v;
            upper *= v.norm() + tail;
            exact *= v.norm();
        } else {
            special.push((p, g_vals));
        }
    }
    let divisors = factor_trial(n)?.divisors();
    let mut terms = Vec::with_capacity(divisors.len());
    let mut series = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    for dv in divisors {
        let r = dv.value()?;
        let mut g_r = base;
        let (mut up, mut ex) = (upper, exact);
        for (p, vals) in &special {
            let (v, t) = vals[dv.exponent_of(*p) as usize];
            g_r *= v;
            up *= v.norm() + t;
            ex *= v.norm();
        }
        series += g_r / r as f64;
        tail += (up - ex) / r as f64;
        terms.push((r, g_r));
    }
    terms.sort_by_key(|&(r, _)| r);
    Ok(LinearSeries {
        series,
        terms,
        product,
        local_factors,
        tail_bound: tail,
    })
}

/// Prediction for `(1/x) Σ_{n <= x} f(an+c) g(bn+d)` where `f ≈ n^{it}`
/// and `g ≈ n^{iu}`: `M_i · Σ_{r | ad−bc} G(f₀; g₀; r; x)/r` with
/// `f₀ = f/n^{it}`, `g₀ = g/n^{iu}`.
#[allow(clippy::too_many_arguments)]
pub fn predict_linear_corr(
    f: &MultFunc,
    g: &MultFunc,
    forms: &LinearForms,
    t: f64,
    u: f64,
    x: u64,
    with_direct: bool,
    sieve: &FactorSieve,
    exec: Exec,
) -> Result<CorrelationReport> {
    if forms.b < 1 {
        return Err(Error::InvalidArgument("b must be positive".into()));
    }
    if x < 16 {
        return Err(Error::InvalidArgument("x must be at least 16".into()));
    }
    let f0 = f.untwist_archimedean(t);
    let g0 = g.untwist_archimedean(u);
    let s = linear_series(&f0, &g0, forms, x, sieve, exec)?;
    let (pp, qq) = forms.polys()?;
    let mut report = CorrelationReport::new("linear", x)
        .with_spec("f", f.name())
        .with_spec("g", g.name())
        .with_spec("a", forms.a)
        .with_spec("c", forms.c)
        .with_spec("b", forms.b)
        .with_spec("d", forms.d)
        .with_spec("t", t)
        .with_spec("u", u);
    report.archimedean = archimedean_factor(t, u, &pp, &qq, x)?;
    report.prediction = report.archimedean * s.series;
    report.form_gap = Some((s.series - s.product).norm());
    report.series_terms = Some(s.terms);
    report.local_factors = s.local_factors;
    report.tail_bound = s.tail_bound;
    report.error_budget = Some(error_budget(&[(&f0, &pp), (&g0, &qq)], x, sieve, exec)?);
    if with_direct {
        report.direct = Some(super::corr_direct(f, g, &pp, &qq, x, exec)?);
    }
    Ok(report)
}

/// `(1/x) Σ f(n) conj f(n+m)` predicted by `Σ_{r | m} G₀(r)/r`.
pub fn shifted_selfcorr(f: &MultFunc, m: u64, x: u64, with_direct: bool, sieve: &FactorSieve, exec: Exec) -> Result<CorrelationReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("shift must be positive".into()));
    }
    let shift = i64::try_from(m).map_err(|_| Error::Overflow("shift"))?;
    let forms = LinearForms::new(1, 0, 1, shift)?;
    let mut report = predict_linear_corr(f, &f.conj(), &forms, 0.0, 0.0, x, with_direct, sieve, exec)?;
    report.kind = "selfcorr";
    report.spec.insert("m".into(), m.to_string());
    Ok(report)
}
