//! Application pipelines: bounded partial sums of ±1-valued functions,
//! divided differences `f(n+1) − f(n)`, and binary additive problems over
//! multiplicative sets.

mod ect;
mod katai;

pub use ect::{
    complexcor_check, discrepancy, discrepancy_profile, ect_characterize, g_properties_check, g_properties_check_with,
    second_moment, ComplexcorReport, EctStatus, EctVerdict, GProperties, PropertyCheck, SecondMoment,
};
pub use katai::{katai_energy, katai_report, katai_stat, KataiBranch, KataiReport, KataiStat};

use crate::arith::{valuation, FactorSieve};
use crate::correlation::{linear_series, LinearForms};
use crate::error::{Error, Result};
use crate::meanvalue::eval_factors;
use crate::multfun::MultFunc;
use crate::par::{self, Exec, BLOCK};
use crate::poly::{PolyValueSieve, PolynomialZ};
use num_complex::Complex64;
use serde::Serialize;

/// Blocks evaluated together before their values are handed out in order.
const CHUNK_BLOCKS: u64 = 64;
const LOCAL_TOL: f64 = 1e-17;

/// Evaluates `f(n)` for `1 <= n <= n_max` block by block and calls
/// `visit(start, values)` in increasing order of `start`.
///
/// Factorizations come from a segmented sieve over primes up to
/// `sqrt(n_max)`, so `n_max` is not limited by a [`FactorSieve`].
pub(crate) fn stream_values<V>(f: &MultFunc, n_max: u64, exec: Exec, mut visit: V) -> Result<()>
where
    V: FnMut(u64, &[Complex64]),
{
    if n_max == 0 {
        return Ok(());
    }
    let sieve = PolyValueSieve::new(&PolynomialZ::x(), n_max, Some(n_max.isqrt() + 2))?;
    let mut lo = 1;
    while lo <= n_max {
        let hi = (lo + CHUNK_BLOCKS * BLOCK).min(n_max + 1);
        let parts = par::map_blocks(lo..hi, exec, |range| {
            sieve.factor_block(range).map(|b| {
                let vals: Vec<Complex64> = (0..b.len()).map(|i| eval_factors(f, b.factors(i))).collect();
                (b.start(), vals)
            })
        });
        for part in parts {
            let (start, vals) = part?;
            visit(start, &vals);
        }
        lo = hi;
    }
    Ok(())
}

/// `f(1), …, f(n_max)` at index `n - 1`.
pub(crate) fn collect_values(f: &MultFunc, n_max: u64, exec: Exec) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(n_max as usize);
    stream_values(f, n_max, exec, |_, v| out.extend_from_slice(v))?;
    Ok(out)
}

/// Checks that `f` takes only the values 0 and 1 on prime powers up to
/// `p^max_k`, `p <= 1000`.
fn require_indicator(f: &MultFunc, sieve: &FactorSieve) -> Result<()> {
    for &p in sieve.primes_up_to(1000.min(sieve.limit())) {
        for k in 1..=6 {
            let v = f.at(p as u64, k);
            let ok = v.im.abs() <= 1e-12 && (v.re.abs() <= 1e-12 || (v.re - 1.0).abs() <= 1e-12);
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "{} is not an indicator: value {v} at {p}^{k}",
                    f.name()
                )));
            }
        }
    }
    Ok(())
}

/// Local factor of `ρ_A(p^e)`: `(1 − 1/p) Σ_{j>=0} 1_A(p^{j+e})/p^j`, with a
/// tail bound.
pub fn local_density(a: &MultFunc, p: u64, e: u32) -> (f64, f64) {
    let inv = 1.0 / p as f64;
    let mut acc = 0.0;
    let mut scale = 1.0;
    let mut j = 0;
    while scale >= LOCAL_TOL {
        acc += a.at(p, j + e).re * scale;
        scale *= inv;
        j += 1;
    }
    ((1.0 - inv) * acc, scale)
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub set: String,
    pub d: u64,
    pub x: u64,
    /// `(d/x) Σ_{k <= x/d} 1_A(kd)`.
    pub empirical: f64,
    /// Euler product over `p <= x` and `p | d`.
    pub predicted: f64,
    pub tail_bound: f64,
    /// Set when the predicted density vanishes.
    pub zero_density: bool,
}

/// `ρ_A(d)` from the local factors, over primes `p <= limit` and `p | d`.
pub fn density_product(a: &MultFunc, d: u64, limit: u64, sieve: &FactorSieve) -> Result<(f64, f64)> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let mut value = 1.0;
    let (mut upper, mut exact) = (1.0f64, 1.0f64);
    for p in crate::correlation::prime_set(limit, d, sieve)? {
        let (v, tail) = local_density(a, p, valuation(d, p));
        value *= v;
        upper *= v.abs() + tail;
        exact *= v.abs();
    }
    Ok((value, upper - exact))
}

/// Density of a multiplicative set along the multiples of `d`, measured
/// and predicted.
pub fn density(a: &MultFunc, d: u64, x: u64, sieve: &FactorSieve, exec: Exec) -> Result<DensityReport> {
    require_indicator(a, sieve)?;
    if d == 0 || d > x {
        return Err(Error::InvalidArgument(format!("need 1 <= d <= x, got d = {d}, x = {x}")));
    }
    let (predicted, tail_bound) = density_product(a, d, x, sieve)?;
    let mut hits = 0u64;
    stream_values(a, x, exec, |start, vals| {
        for (i, v) in vals.iter().enumerate() {
            if (start + i as u64) % d == 0 && v.re > 0.5 {
                hits += 1;
            }
        }
    })?;
    Ok(DensityReport {
        set: a.name().to_string(),
        d,
        x,
        empirical: hits as f64 / (x / d) as f64,
        predicted,
        tail_bound,
        zero_density: predicted < 1e-12,
    })
}

/// `#{(m, n − m) : 1 <= m < n, m ∈ A, n − m ∈ B}`.
pub fn brudern_count(a: &MultFunc, b: &MultFunc, n: u64, exec: Exec) -> Result<u64> {
    if n < 2 {
        return Ok(0);
    }
    let va = collect_values(a, n - 1, exec)?;
    let vb = collect_values(b, n - 1, exec)?;
    let count = (1..n)
        .filter(|&m| va[(m - 1) as usize].re > 0.5 && vb[(n - m - 1) as usize].re > 0.5)
        .count();
    Ok(count as u64)
}

/// Which normalization of `a(p^k)` enters the product `σ(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum SigmaReading {
    /// `a(p^k) = ρ_A(p^k)/p^k − ρ_A(p^{k−1})/p^{k−1}`, taken literally.
    #[default]
    Printed,
    /// `a(p^k) = (ρ_A(p^k) − ρ_A(p^{k−1}))/(p^k ρ_A)`: the excess density of
    /// multiples of `p^k` over the expected share, so `σ(n) = 1` for `A = B = ℕ`.
    Normalized,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaFactor {
    pub p: u64,
    pub m: u32,
    /// `a(p^k)`, `k = 1..=m+1`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub factor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BrudernReport {
    pub set_a: String,
    pub set_b: String,
    pub n: u64,
    pub r_direct: u64,
    /// `n · Σ_{r | n} G(1_A; 1_B; r)/r` for the forms `m` and `n − m`.
    pub r_pred_g: f64,
    pub series_terms: Vec<(u64, Complex64)>,
    pub rho_a: f64,
    pub rho_b: f64,
    pub sigma_reading: SigmaReading,
    pub sigma: f64,
    /// `ρ_A ρ_B σ(n) n`.
    pub r_pred_sigma: f64,
    pub sigma_factors: Vec<SigmaFactor>,
    /// A set of density zero: no prediction beyond `r(n) = o(n)`.
    pub degenerate: bool,
    pub tail_bound: f64,
}

impl BrudernReport {
    pub fn relative_gap(&self) -> f64 {
        (self.r_direct as f64 - self.r_pred_g).abs() / self.n as f64
    }
}

/// `ρ_A(p^k)` for `k = 0..=top`, from `ρ_A` and the local factor at `p`.
fn rho_powers(a: &MultFunc, rho: f64, p: u64, top: u32) -> Vec<f64> {
    let base = local_density(a, p, 0).0;
    (0..=top).map(|k| rho * local_density(a, p, k).0 / base).collect()
}

fn sigma_factor(a: &MultFunc, b: &MultFunc, rho_a: f64, rho_b: f64, p: u64, m: u32, reading: SigmaReading) -> SigmaFactor {
    let coeffs = |f: &MultFunc, rho: f64| -> Vec<f64> {
        let r = rho_powers(f, rho, p, m + 1);
        let pf = p as f64;
        (1..=m + 1)
            .map(|k| match reading {
                SigmaReading::Printed => r[k as usize] / pf.powi(k as i32) - r[k as usize - 1] / pf.powi(k as i32 - 1),
                SigmaReading::Normalized => (r[k as usize] - r[k as usize - 1]) / (pf.powi(k as i32) * rho),
            })
            .collect()
    };
    let (ca, cb) = (coeffs(a, rho_a), coeffs(b, rho_b));
    let pf = p as f64;
    let mut factor = 1.0;
    for k in 1..=m {
        factor += pf.powi(k as i32 - 1) * ca[k as usize - 1] * cb[k as usize - 1] / (pf - 1.0);
    }
    factor -= pf.powi(m as i32) * ca[m as usize] * cb[m as usize] / ((pf - 1.0) * (pf - 1.0));
    SigmaFactor { p, m, a: ca, b: cb, factor }
}

/// Representations `n = m + (n − m)` with `m ∈ A`, `n − m ∈ B`: the exact
/// count, the singular-series prediction through the linear forms
/// `(m, n − m)`, and the closed product `ρ_A ρ_B σ(n) n`.
pub fn brudern_predict(
    a: &MultFunc,
    b: &MultFunc,
    n: u64,
    reading: SigmaReading,
    sieve: &FactorSieve,
    exec: Exec,
) -> Result<BrudernReport> {
    require_indicator(a, sieve)?;
    require_indicator(b, sieve)?;
    if !(2..=1_000_000).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as u128,
            limit: 1_000_000,
        });
    }
    sieve.check_covers(n)?;
    let r_direct = brudern_count(a, b, n, exec)?;
    let (rho_a, tail_a) = density_product(a, 1, n, sieve)?;
    let (rho_b, tail_b) = density_product(b, 1, n, sieve)?;
    let mut report = BrudernReport {
        set_a: a.name().to_string(),
        set_b: b.name().to_string(),
        n,
        r_direct,
        r_pred_g: 0.0,
        series_terms: Vec::new(),
        rho_a,
        rho_b,
        sigma_reading: reading,
        sigma: 0.0,
        r_pred_sigma: 0.0,
        sigma_factors: Vec::new(),
        degenerate: rho_a < 1e-12 || rho_b < 1e-12,
        tail_bound: tail_a + tail_b,
    };
    if report.degenerate {
        return Ok(report);
    }
    let forms = LinearForms::new(1, 0, -1, n as i64)?;
    let series = linear_series(a, b, &forms, n, sieve, exec)?;
    report.r_pred_g = n as f64 * series.series.re;
    report.series_terms = series.terms;
    report.tail_bound += n as f64 * series.tail_bound;
    let fac = crate::arith::factor_trial(n)?;
    report.sigma_factors = fac
        .entries()
        .iter()
        .map(|&(p, m)| sigma_factor(a, b, rho_a, rho_b, p, m, reading))
        .collect();
    report.sigma = report.sigma_factors.iter().map(|s| s.factor).product();
    report.r_pred_sigma = rho_a * rho_b * report.sigma * n as f64;
    Ok(report)
}
