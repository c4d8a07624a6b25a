//! Bounded partial sums of ±1-valued multiplicative functions.

use super::{collect_values, stream_values};
use crate::arith::{valuation, FactorSieve};
use crate::correlation::{g_local, prime_set};
use crate::error::{Error, Result};
use crate::multfun::{distance, DirichletCharacter, MultFunc};
use crate::par::Exec;
use num_complex::Complex64;
use serde::Serialize;

/// Periods are verified exhaustively on `n <= 10m`, which must stay below this.
const VERIFY_CAP: u64 = 10_000_000;
/// Tolerance for the identities satisfied by `G`.
pub const G_TOL: f64 = 1e-8;
/// `|E_p(p^k)| <= |θ|² + 2·|θ|·Σ|θ|/p^i <= 4 + 8/(p − 1) <= 12`.
const E_BOUND: f64 = 12.0;
const LOCAL_TOL: f64 = 1e-17;

fn sign_at(f: &MultFunc, p: u64, k: u32) -> Result<i8> {
    let v = f.at(p, k);
    if v.im.abs() <= 1e-12 && (v.re.abs() - 1.0).abs() <= 1e-12 {
        Ok(if v.re > 0.0 { 1 } else { -1 })
    } else {
        Err(Error::InvalidArgument(format!("{} is not ±1-valued: f({p}^{k}) = {v}", f.name())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EctStatus {
    Satisfied,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct EctVerdict {
    pub f: String,
    pub status: EctStatus,
    pub satisfies_characterization: bool,
    pub period_m: Option<u64>,
    pub threshold_m: u64,
    /// Stabilization was inspected on every prime up to here.
    pub primes_checked_up_to: u64,
    /// `(p, e_p)` with `e_p > 0`: `f(p^k) = f(p^{e_p})` for all checked `k >= e_p`.
    pub stabilization: Vec<(u64, u32)>,
    pub period_sum: Option<i64>,
    pub verified_up_to: Option<u64>,
    pub witnesses: Vec<String>,
}

/// Tests whether `f: ℕ → {−1, 1}` is periodic with mean zero, through the
/// conditions `f(2^k) = −1` and `f(p^k) = f(p^{k−1})` for `p^k >= M`.
///
/// Prime powers up to `M²` are inspected on the primes covered by the
/// sieve. When both conditions hold the period `m = Π p^{e_p}` is built
/// from the stabilization exponents and checked exhaustively.
pub fn ect_characterize(f: &MultFunc, big_m: u64, sieve: &FactorSieve, exec: Exec) -> Result<EctVerdict> {
    if big_m < 2 {
        return Err(Error::InvalidArgument("M must be at least 2".into()));
    }
    let square = big_m.saturating_mul(big_m);
    let top = square.min(sieve.limit());
    let mut verdict = EctVerdict {
        f: f.name().to_string(),
        status: EctStatus::Violated,
        satisfies_characterization: false,
        period_m: None,
        threshold_m: big_m,
        primes_checked_up_to: top,
        stabilization: Vec::new(),
        period_sum: None,
        verified_up_to: None,
        witnesses: Vec::new(),
    };
    let (mut pk, mut k) = (2u64, 1u32);
    while pk <= big_m {
        if sign_at(f, 2, k)? != -1 {
            verdict.witnesses.push(format!("f(2^{k}) = +1, expected -1"));
        }
        pk *= 2;
        k += 1;
    }
    for &p in sieve.primes_up_to(top) {
        let p = p as u64;
        let mut vals = vec![1i8];
        let mut pk = 1u64;
        while let Some(next) = pk.checked_mul(p).filter(|&v| v <= square) {
            pk = next;
            let k = vals.len() as u32;
            vals.push(sign_at(f, p, k)?);
            if pk >= big_m && vals[k as usize] != vals[k as usize - 1] {
                verdict
                    .witnesses
                    .push(format!("f({p}^{k}) = {} differs from f({p}^{}) although {p}^{k} >= M", vals[k as usize], k - 1));
            }
        }
        let last = *vals.last().unwrap();
        let e = vals.iter().rposition(|&v| v != last).map_or(0, |i| i + 1) as u32;
        if e > 0 {
            verdict.stabilization.push((p, e));
        }
    }
    if !verdict.witnesses.is_empty() {
        return Ok(verdict);
    }
    let m = verdict
        .stabilization
        .iter()
        .try_fold(1u64, |acc, &(p, e)| acc.checked_mul(p.checked_pow(e)?));
    let m = match m.filter(|&m| m <= VERIFY_CAP / 10) {
        Some(m) => m,
        None => {
            verdict.status = EctStatus::Inconclusive;
            verdict
                .witnesses
                .push(format!("period candidate exceeds the verification window {VERIFY_CAP}"));
            return Ok(verdict);
        }
    };
    verdict.period_m = Some(m);
    let vals = collect_values(f, 11 * m, exec)?;
    let sign = |n: u64| vals[(n - 1) as usize].re.round() as i64;
    let sum: i64 = (1..=m).map(sign).sum();
    verdict.period_sum = Some(sum);
    if sum != 0 {
        verdict.witnesses.push(format!("Σ_{{n <= {m}}} f(n) = {sum}"));
    }
    if let Some(n) = (1..=10 * m).find(|&n| sign(n + m) != sign(n)) {
        verdict.witnesses.push(format!("f({}) != f({n})", n + m));
    }
    if verdict.witnesses.is_empty() {
        verdict.status = EctStatus::Satisfied;
        verdict.satisfies_characterization = true;
        verdict.verified_up_to = Some(10 * m);
    }
    Ok(verdict)
}

/// `max_{y <= x} |Σ_{n <= y} f(n)|` recorded at each checkpoint (ascending).
pub fn discrepancy_profile(f: &MultFunc, checkpoints: &[u64], exec: Exec) -> Result<Vec<(u64, f64)>> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be ascending".into()));
    }
    let Some(&x) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().copied().peekable();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut best = 0.0f64;
    while next.peek() == Some(&0) {
        out.push((0, 0.0));
        next.next();
    }
    stream_values(f, x, exec, |start, vals| {
        for (i, v) in vals.iter().enumerate() {
            sum += v;
            best = best.max(sum.norm());
            let n = start + i as u64;
            while next.peek() == Some(&n) {
                out.push((n, best));
                next.next();
            }
        }
    })?;
    Ok(out)
}

/// `max_{y <= x} |Σ_{n <= y} f(n)|`.
pub fn discrepancy(f: &MultFunc, x: u64, exec: Exec) -> Result<f64> {
    Ok(discrepancy_profile(f, &[x], exec)?.first().map_or(0.0, |v| v.1))
}

fn real_pm_preconditions(f: &MultFunc, sieve: &FactorSieve) -> Vec<String> {
    let mut out = Vec::new();
    let primes = sieve.primes_up_to(1000.min(sieve.limit()));
    if !f.is_real_on(primes, 8) {
        out.push("f must be real-valued".to_string());
    }
    if let Some(k) = (1..=30).find(|&k| (f.at(2, k) + 1.0).norm() > 1e-12) {
        out.push(format!("f(2^k) = -1 is required; f(2^{k}) = {}", f.at(2, k)));
    }
    out
}

/// `E_p(p^k)` for every prime `p <= x`, evaluated lazily: `G(a)` is the
/// product of `E_p(p^{v_p(a)})` over those primes.
struct GTable<'a> {
    f: &'a MultFunc,
    conj: MultFunc,
    primes: Vec<u64>,
    base: Vec<(f64, f64)>,
}

impl<'a> GTable<'a> {
    fn new(f: &'a MultFunc, x: u64, sieve: &FactorSieve) -> Result<Self> {
        let conj = f.conj();
        let primes = prime_set(x, 1, sieve)?;
        let base = primes
            .iter()
            .map(|&p| {
                let (v, t) = g_local(f, &conj, p, 0, 1, 1);
                (v.re, t)
            })
            .collect();
        Ok(Self { f, conj, primes, base })
    }

    fn local(&self, p: u64, k: u32) -> (f64, f64) {
        let (v, t) = g_local(self.f, &self.conj, p, k, 1, 1);
        (v.re, t)
    }

    /// `G(a)` and a bound on its truncation error.
    fn g(&self, a: u64) -> (f64, f64) {
        let (mut value, mut upper, mut exact) = (1.0f64, 1.0f64, 1.0f64);
        for (i, &p) in self.primes.iter().enumerate() {
            let (v, t) = if a % p == 0 { self.local(p, valuation(a, p)) } else { self.base[i] };
            value *= v;
            upper *= v.abs() + t;
            exact *= v.abs();
        }
        (value, upper - exact)
    }

    /// `Σ_k E_p(p^k)/p^{ks}`, the local factor of `Σ_a G(a)/a^s`.
    fn local_sum(&self, i: usize, s: i32) -> (f64, f64) {
        let p = self.primes[i];
        let q = (p as f64).powi(-s);
        let (mut acc, mut tail) = self.base[i];
        let mut scale = q;
        let mut k = 1;
        while E_BOUND * scale / (1.0 - q) >= LOCAL_TOL {
            let (v, t) = self.local(p, k);
            acc += v * scale;
            tail += t * scale;
            scale *= q;
            k += 1;
        }
        (acc, tail + E_BOUND * scale / (1.0 - q))
    }

    /// `Π_p Σ_k E_p(p^k)/p^{ks}` over the table's primes, skipping the
    /// primes in `skip`, with a bound on the truncation error.
    fn dirichlet_sum(&self, s: i32, skip: &[u64]) -> (f64, f64) {
        let (mut value, mut upper, mut exact) = (1.0f64, 1.0f64, 1.0f64);
        for (i, p) in self.primes.iter().enumerate() {
            if skip.contains(p) {
                continue;
            }
            let (v, t) = self.local_sum(i, s);
            value *= v;
            upper *= v.abs() + t;
            exact *= v.abs();
        }
        (value, upper - exact)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub holds: bool,
    pub max_error: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GProperties {
    pub f: String,
    pub x: u64,
    pub preconditions: Vec<String>,
    pub checks: Vec<PropertyCheck>,
    /// `(a, G(a))` for `a <= 200`.
    pub g_values: Vec<(u64, f64)>,
    pub sum_over_a: f64,
    pub sum_over_a2: f64,
    pub tail_bound: f64,
}

impl GProperties {
    pub fn all_hold(&self) -> bool {
        self.preconditions.is_empty() && self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect()
    }
}

/// Checks the identities of `G(a) = G(f; f; a)` for real `f` with
/// `f(2^k) = −1`, using the built-in evaluator of `G`.
pub fn g_properties_check(f: &MultFunc, x: u64, sieve: &FactorSieve) -> Result<GProperties> {
    let table = GTable::new(f, x, sieve)?;
    let eval = |a: u64| Ok(table.g(a).0);
    check_with_table(f, x, &table, &eval)
}

/// As [`g_properties_check`], but pointwise values `G(a)` come from `g`.
/// The Dirichlet-series identities still use the built-in local factors.
pub fn g_properties_check_with(
    f: &MultFunc,
    x: u64,
    sieve: &FactorSieve,
    g: &dyn Fn(u64) -> Result<f64>,
) -> Result<GProperties> {
    let table = GTable::new(f, x, sieve)?;
    check_with_table(f, x, &table, g)
}

fn check_with_table(f: &MultFunc, x: u64, table: &GTable<'_>, g: &dyn Fn(u64) -> Result<f64>) -> Result<GProperties> {
    let preconditions = real_pm_preconditions(f, &FactorSieve::new(1000)?);
    let g_values: Vec<(u64, f64)> = (1..=200).map(|a| g(a).map(|v| (a, v))).collect::<Result<_>>()?;
    let at = |a: u64| g_values[(a - 1) as usize].1;
    let scale = at(1).abs().max(1.0);
    let mut checks = Vec::new();
    let mut push = |name: &str, err: f64, limit: f64, detail: String| {
        checks.push(PropertyCheck {
            name: name.to_string(),
            holds: err <= limit,
            max_error: err,
            detail,
        });
    };

    let err = (1..=50).map(|a| at(4 * a).abs()).fold(0.0, f64::max);
    push("G(4a)=0", err, G_TOL * scale, "a <= 50".into());

    let err = (1..=100)
        .step_by(2)
        .map(|a| (at(2 * a) + 4.0 * at(a)).abs())
        .fold(0.0, f64::max);
    push("G(2a)=-4G(a)", err, G_TOL * scale, "odd a <= 100".into());

    let (sum2, tail2) = table.dirichlet_sum(2, &[]);
    push("sum G(a)/a^2 = 0", sum2.abs(), G_TOL + tail2, format!("Euler product over p <= {x}"));

    if (f.at(3, 1) - 1.0).norm() <= 1e-12 {
        let err = (1..=100).step_by(2).map(|a| at(a).max(0.0)).fold(0.0, f64::max);
        push("G(a)<=0 for odd a", err, G_TOL * scale, "odd a <= 100, f(3) = 1".into());
    } else {
        push("G(a)<=0 for odd a", 0.0, 0.0, "not applicable: f(3) != 1".into());
    }

    let (sum1, tail1) = table.dirichlet_sum(1, &[]);
    push("sum G(a)/a = 1", (sum1 - 1.0).abs(), G_TOL + tail1, format!("Euler product over p <= {x}"));

    Ok(GProperties {
        f: f.name().to_string(),
        x,
        preconditions,
        checks,
        g_values,
        sum_over_a: sum1,
        sum_over_a2: sum2,
        tail_bound: tail1 + tail2,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondMoment {
    pub h: u64,
    pub x: u64,
    /// `(1/x) Σ_{n <= x} (Σ_{k=n+1}^{n+H} f(k))²`.
    pub empirical: f64,
    /// `−2 Σ_{a odd} G(a) ‖H/(2a)‖`.
    pub predicted: f64,
    pub tail_bound: f64,
}

fn dist_to_int(y: f64) -> f64 {
    (y - y.round()).abs()
}

/// Second moments of window sums of length `H` for each `H` in `hs`,
/// measured over `n <= x` and predicted from `G`.
///
/// For odd `a > H` the weight `‖H/(2a)‖` equals `H/(2a)`, so the predicted
/// series is `−2[Σ_{a <= H odd} G(a)(‖H/2a‖ − H/2a) + (H/2) Σ_{a odd} G(a)/a]`
/// and the last sum is the Euler product `E_2(1) Π_{p odd} Σ_k E_p(p^k)/p^k`.
pub fn second_moment(f: &MultFunc, hs: &[u64], x: u64, sieve: &FactorSieve, exec: Exec) -> Result<Vec<SecondMoment>> {
    let pre = real_pm_preconditions(f, sieve);
    if !pre.is_empty() {
        return Err(Error::Precondition(pre.join("; ")));
    }
    for &p in sieve.primes_up_to(1000.min(sieve.limit())) {
        for k in 1..=8 {
            sign_at(f, p as u64, k)?;
        }
    }
    if hs.contains(&0) || x == 0 {
        return Err(Error::InvalidArgument("H and x must be positive".into()));
    }
    let h_max = *hs.iter().max().unwrap_or(&1);
    let vals = collect_values(f, x + h_max, exec)?;
    let mut prefix = Vec::with_capacity(vals.len() + 1);
    prefix.push(0i64);
    for v in &vals {
        prefix.push(prefix.last().unwrap() + v.re.round() as i64);
    }

    let table = GTable::new(f, x, sieve)?;
    let (e2, e2_tail) = table.local(2, 0);
    let (odd_prod, odd_tail) = table.dirichlet_sum(1, &[2]);
    let sum_odd = e2 * odd_prod;
    let sum_odd_tail = (e2.abs() + e2_tail) * (odd_prod.abs() + odd_tail) - (e2 * odd_prod).abs();
    let g_odd: Vec<(u64, (f64, f64))> = (1..=h_max).step_by(2).map(|a| (a, table.g(a))).collect();

    Ok(hs
        .iter()
        .map(|&h| {
            let sq: i128 = (1..=x)
                .map(|n| {
                    let w = (prefix[(n + h) as usize] - prefix[n as usize]) as i128;
                    w * w
                })
                .sum();
            let hf = h as f64;
            let mut acc = hf / 2.0 * sum_odd;
            let mut tail = hf / 2.0 * sum_odd_tail;
            for &(a, (g, gt)) in g_odd.iter().filter(|(a, _)| *a <= h) {
                let y = hf / (2.0 * a as f64);
                let w = dist_to_int(y) - y;
                acc += g * w;
                tail += gt * w.abs();
            }
            SecondMoment {
                h,
                x,
                empirical: sq as f64 / x as f64,
                predicted: -2.0 * acc,
                tail_bound: 2.0 * tail,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexcorReport {
    pub f: String,
    pub q: u64,
    pub chi_index: u64,
    pub t: f64,
    pub q_odd: bool,
    /// `(k, f(2^k), −χ(2)^k 2^{−ikt})`.
    pub values: Vec<(u32, Complex64, Complex64)>,
    pub first_failure: Option<u32>,
    pub passes: bool,
    /// `𝔻(f, χ n^{it}; distance_x)`.
    pub distance: f64,
    pub distance_x: u64,
}

/// The necessary conditions on `f(2^k)` for a unimodular `f` with bounded
/// partial sums pretending to be `χ(n) n^{it}`.
pub fn complexcor_check(f: &MultFunc, chi: &DirichletCharacter, t: f64, max_k: u32, sieve: &FactorSieve) -> Result<ComplexcorReport> {
    if !chi.is_primitive() {
        return Err(Error::InvalidArgument(format!(
            "character {} mod {} is not primitive",
            chi.index(),
            chi.modulus()
        )));
    }
    let q = chi.modulus();
    let chi2 = chi.value(2);
    let values: Vec<(u32, Complex64, Complex64)> = (1..=max_k)
        .map(|k| {
            let expected = -chi2.powu(k) * Complex64::from_polar(1.0, -(k as f64) * t * 2f64.ln());
            (k, f.at(2, k), expected)
        })
        .collect();
    let first_failure = values.iter().find(|(_, a, e)| (a - e).norm() > 1e-12).map(|v| v.0);
    let target = {
        let chi = chi.clone();
        MultFunc::completely(format!("char({q},{})*n^it", chi.index()), true, move |p| {
            chi.value(p) * Complex64::from_polar(1.0, t * (p as f64).ln())
        })
    };
    let distance_x = 1_000_000.min(sieve.limit());
    let d = distance(f, &target, 1.0, distance_x as f64, sieve)?;
    let q_odd = q % 2 == 1;
    Ok(ComplexcorReport {
        f: f.name().to_string(),
        q,
        chi_index: chi.index(),
        t,
        q_odd,
        passes: q_odd && first_failure.is_none(),
        values,
        first_failure,
        distance: d.value,
        distance_x,
    })
}
