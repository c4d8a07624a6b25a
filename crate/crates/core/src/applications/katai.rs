//! Logarithmic averages of `|f(n+1) − f(n)|²`.

use super::stream_values;
use crate::arith::FactorSieve;
use crate::correlation::keytotao_value;
use crate::error::{Error, Result};
use crate::multfun::{DirichletCharacter, MultFunc, UNIT_TOL};
use crate::par::Exec;
use num_complex::Complex64;
use serde::Serialize;

/// Below this mean of `|f|` the function is treated as vanishing on average.
const VANISHING_MEAN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KataiBranch {
    /// `|f| = 1`; the statistic is compared with `2(1 − Re E(f))`.
    Unimodular,
    /// `(1/x) Σ |f(n)|` is below the threshold; no energy comparison.
    Vanishing,
}

#[derive(Debug, Clone, Serialize)]
pub struct KataiStat {
    pub x: u64,
    /// `(1/log x) Σ_{n <= x} |f(n+1) − f(n)|²/n`.
    pub statistic: f64,
    pub mean_abs: f64,
    pub branch: KataiBranch,
}

fn is_unimodular_on_small_primes(f: &MultFunc) -> bool {
    crate::arith::FactorSieve::new(1000)
        .map(|s| s.primes().iter().all(|&p| (1..=6).all(|k| (f.at(p as u64, k).norm() - 1.0).abs() <= UNIT_TOL)))
        .unwrap_or(false)
}

/// The divided-difference statistic, summed exactly over `n <= x`.
pub fn katai_stat(f: &MultFunc, x: u64, exec: Exec) -> Result<KataiStat> {
    if x < 2 {
        return Err(Error::InvalidArgument("x must be at least 2".into()));
    }
    let mut prev: Option<Complex64> = None;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    stream_values(f, x + 1, exec, |start, vals| {
        for (i, &v) in vals.iter().enumerate() {
            let n = start + i as u64;
            if let Some(p) = prev {
                sum += (v - p).norm_sqr() / (n - 1) as f64;
            }
            if n <= x {
                abs_sum += v.norm();
            }
            prev = Some(v);
        }
    })?;
    let mean_abs = abs_sum / x as f64;
    let branch = if mean_abs < VANISHING_MEAN {
        KataiBranch::Vanishing
    } else if is_unimodular_on_small_primes(f) {
        KataiBranch::Unimodular
    } else {
        return Err(Error::Precondition(format!(
            "{} is neither unimodular nor small on average (mean |f| = {mean_abs:.4})",
            f.name()
        )));
    };
    Ok(KataiStat {
        x,
        statistic: sum / (x as f64).ln(),
        mean_abs,
        branch,
    })
}

/// `E(f) = (μ(q)/q) Π_{p ∤ q} (2 Re[(1 − 1/p) Σ_k f(p^k) conj χ(p^k) p^{−ikt}/p^k] − 1)`
/// over primes `p <= limit`.
pub fn katai_energy(f: &MultFunc, chi: &DirichletCharacter, t: f64, limit: u64, sieve: &FactorSieve) -> Result<Complex64> {
    keytotao_value(f, chi, t, limit, sieve)
}

#[derive(Debug, Clone, Serialize)]
pub struct KataiReport {
    pub f: String,
    pub q: u64,
    pub chi_index: u64,
    pub t: f64,
    pub x: u64,
    pub product_limit: u64,
    pub energy: Complex64,
    /// `2(1 − Re E)`.
    pub coefficient_pred: f64,
    pub coefficient_emp: f64,
    pub mean_abs: f64,
    pub branch: KataiBranch,
}

impl KataiReport {
    pub fn gap(&self) -> f64 {
        (self.coefficient_emp - self.coefficient_pred).abs()
    }
}

/// The measured statistic next to `2(1 − Re E(f))`.
pub fn katai_report(f: &MultFunc, chi: &DirichletCharacter, t: f64, x: u64, sieve: &FactorSieve, exec: Exec) -> Result<KataiReport> {
    let stat = katai_stat(f, x, exec)?;
    let product_limit = x.min(sieve.limit());
    let energy = match stat.branch {
        KataiBranch::Unimodular => katai_energy(f, chi, t, product_limit, sieve)?,
        KataiBranch::Vanishing => Complex64::new(0.0, 0.0),
    };
    Ok(KataiReport {
        f: f.name().to_string(),
        q: chi.modulus(),
        chi_index: chi.index(),
        t,
        x,
        product_limit,
        energy,
        coefficient_pred: 2.0 * (1.0 - energy.re),
        coefficient_emp: stat.statistic,
        mean_abs: stat.mean_abs,
        branch: stat.branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multfun::make_mult_func;

    #[test]
    fn katai_stat_matches_direct_sum() {
        let s = FactorSieve::new(10_001).unwrap();
        let f = make_mult_func("override(one; 2:^ => -1; 5:* => i)").unwrap();
        let x = 10_000;
        let direct: f64 = (1..=x).map(|n| (f.eval_n(n + 1, &s) - f.eval_n(n, &s)).norm_sqr() / n as f64).sum();
        let r = katai_stat(&f, x, Exec::Parallel).unwrap();
        assert!((r.statistic - direct / (x as f64).ln()).abs() < 1e-12);
        assert_eq!(r.branch, KataiBranch::Unimodular);
        assert_eq!(katai_stat(&MultFunc::one(), 1000, Exec::Parallel).unwrap().statistic, 0.0);
    }

    #[test]
    fn energies() {
        let s = FactorSieve::new(100_000).unwrap();
        let trivial = DirichletCharacter::new(1, 0).unwrap();
        let e = katai_energy(&MultFunc::nit(0.3), &trivial, 0.3, 100_000, &s).unwrap();
        assert!((e.re - 1.0).abs() < 1e-12);
        let f = make_mult_func("override(one; 2:^ => -1)").unwrap();
        let e = katai_energy(&f, &trivial, 0.0, 100_000, &s).unwrap();
        assert!((e.re + 1.0 / 3.0).abs() < 1e-12);
        let chi = DirichletCharacter::new(3, 1).unwrap();
        let e = katai_energy(&MultFunc::from_character(&chi), &chi, 0.0, 100_000, &s).unwrap();
        assert!((e.re + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_branch_short_circuits() {
        // f(n) = 0 for n > 1
        let f = MultFunc::new("delta", false, true, |_, _| Complex64::new(0.0, 0.0));
        let r = katai_stat(&f, 10_000, Exec::Parallel).unwrap();
        assert_eq!(r.branch, KataiBranch::Vanishing);
        let half = make_mult_func("override(one; 2:* => 0.5)").unwrap();
        assert!(katai_stat(&half, 1000, Exec::Parallel).is_err());
    }
}
