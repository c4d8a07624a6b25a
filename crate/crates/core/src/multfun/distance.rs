use super::{primitive_characters_mod, DirichletCharacter, MultFunc};
use crate::arith::FactorSieve;
use crate::error::{Error, Result};
use crate::poly::LargePrimePowerSet;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceVariant {
    Plain,
    PolyWeighted,
    Starred,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceValue {
    pub value: f64,
    pub y: f64,
    pub x: f64,
    pub variant: DistanceVariant,
}

fn check_range(y: f64, x: f64, sieve: &FactorSieve) -> Result<()> {
    if !(y >= 1.0 && y <= x) {
        return Err(Error::InvalidArgument(format!("need 1 <= y <= x, got y = {y}, x = {x}")));
    }
    sieve.check_covers(x.floor() as u64)
}

fn pair_term(f: &MultFunc, g: &MultFunc, p: u64, k: u32) -> f64 {
    1.0 - (f.at(p, k) * g.at(p, k).conj()).re
}

/// Squared distance `Σ_{y <= p <= x} (1 - Re f(p) conj g(p)) / p`.
fn plain_sq(f: &MultFunc, g: &MultFunc, y: f64, x: f64, sieve: &FactorSieve) -> f64 {
    sieve
        .primes_up_to(x.floor() as u64)
        .iter()
        .filter(|&&p| p as f64 >= y)
        .map(|&p| pair_term(f, g, p as u64, 1) / p as f64)
        .sum()
}

/// `𝔻(f, g; y; x)`.
pub fn distance(f: &MultFunc, g: &MultFunc, y: f64, x: f64, sieve: &FactorSieve) -> Result<DistanceValue> {
    check_range(y, x, sieve)?;
    Ok(DistanceValue {
        value: plain_sq(f, g, y, x, sieve).max(0.0).sqrt(),
        y,
        x,
        variant: DistanceVariant::Plain,
    })
}

/// `𝔻_P` (plain prime sum) or `𝔻*_P` (sum over prime powers `p^k` in
/// `[y, x]` weighted by `1/p^k`), plus `Σ_{p^k ∈ N_P(x)} (1 - Re f conj g)(p^k) / x`.
///
/// `large` must be `N_P(x)` for the same `x`.
pub fn distance_poly(
    f: &MultFunc,
    g: &MultFunc,
    y: f64,
    x: f64,
    large: &LargePrimePowerSet,
    starred: bool,
    sieve: &FactorSieve,
) -> Result<DistanceValue> {
    check_range(y, x, sieve)?;
    let xi = x.floor() as u64;
    if large.x() != xi {
        return Err(Error::InvalidArgument(format!(
            "N_P was computed for x = {}, distance requested at x = {xi}",
            large.x()
        )));
    }
    let base = if starred {
        let mut acc = 0.0;
        for &p in sieve.primes_up_to(xi) {
            let p = p as u64;
            let mut pk = p;
            let mut k = 1;
            loop {
                if pk as f64 >= y {
                    acc += pair_term(f, g, p, k) / pk as f64;
                }
                match pk.checked_mul(p) {
                    Some(next) if next <= xi => {
                        pk = next;
                        k += 1;
                    }
                    _ => break,
                }
            }
        }
        acc
    } else {
        plain_sq(f, g, y, x, sieve)
    };
    let extra: f64 = large.members().iter().map(|&(p, k)| pair_term(f, g, p, k)).sum::<f64>() / x;
    Ok(DistanceValue {
        value: (base + extra).max(0.0).sqrt(),
        y,
        x,
        variant: if starred { DistanceVariant::Starred } else { DistanceVariant::PolyWeighted },
    })
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub character: DirichletCharacter,
    pub t: f64,
    pub distance: DistanceValue,
}

/// Minimises `𝔻(f, χ n^{it}; 1; x)` over primitive characters of modulus
/// at most `q_max` and `t` in `t_grid`. The sum skips primes dividing the
/// modulus of `χ`, where `χ` carries no information.
pub fn pretentious_scan(f: &MultFunc, q_max: u64, t_grid: &[f64], x: u64, sieve: &FactorSieve) -> Result<ScanResult> {
    if q_max == 0 || t_grid.is_empty() {
        return Err(Error::InvalidArgument("need q_max >= 1 and a nonempty t grid".into()));
    }
    sieve.check_covers(x)?;
    let primes = sieve.primes_up_to(x);
    let fp: Vec<Complex64> = primes.iter().map(|&p| f.at(p as u64, 1)).collect();
    let logs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
    let mut best: Option<(f64, DirichletCharacter, f64)> = None;
    for q in 1..=q_max {
        for chi in primitive_characters_mod(q) {
            let chip: Vec<Complex64> = primes.iter().map(|&p| chi.value(p as u64)).collect();
            for &t in t_grid {
                let mut acc = 0.0;
                for i in 0..primes.len() {
                    let p = primes[i] as u64;
                    if q % p == 0 {
                        continue;
                    }
                    let target = chip[i] * Complex64::from_polar(1.0, t * logs[i]);
                    acc += (1.0 - (fp[i] * target.conj()).re) / p as f64;
                }
                if best.as_ref().is_none_or(|b| acc < b.0 - 1e-15) {
                    best = Some((acc, chi.clone(), t));
                }
            }
        }
    }
    let (sq, character, t) = best.expect("grid is nonempty");
    Ok(ScanResult {
        character,
        t,
        distance: DistanceValue {
            value: sq.max(0.0).sqrt(),
            y: 1.0,
            x: x as f64,
            variant: DistanceVariant::Plain,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multfun::make_mult_func;
    use crate::poly::PolynomialZ;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let sieve = FactorSieve::new(1_000_000).unwrap();
        let lam = MultFunc::liouville();
        assert_eq!(distance(&lam, &lam, 1.0, 1e6, &sieve).unwrap().value, 0.0);
        let d = distance(&MultFunc::one(), &lam, 1.0, 1e6, &sieve).unwrap();
        // independent prime sum by trial division
        let mut sq = 0.0;
        for p in 2u64..=1_000_000 {
            if crate::arith::is_prime_u64(p) {
                sq += 2.0 / p as f64;
            }
        }
        assert!((d.value * d.value - sq).abs() < 1e-9);
        assert!((d.value - 2.403).abs() < 1e-3);
        assert_eq!(distance(&MultFunc::one(), &MultFunc::mobius_sq(), 1.0, 1e6, &sieve).unwrap().value, 0.0);
        assert!(distance(&lam, &lam, 1.0, 2e6, &sieve).is_err());
    }

    #[test]
    fn poly_variant_adds_large_primes() {
        let sieve = FactorSieve::new(20_000).unwrap();
        let p = PolynomialZ::parse("x^2+1").unwrap();
        let large = crate::poly::large_prime_powers(&p, 10_000, None, crate::par::Exec::Sequential).unwrap();
        let (one, lam) = (MultFunc::one(), MultFunc::liouville());
        let plain = distance(&one, &lam, 1.0, 1e4, &sieve).unwrap().value;
        let poly = distance_poly(&one, &lam, 1.0, 1e4, &large, false, &sieve).unwrap().value;
        assert!(large.members().iter().any(|&(_, k)| k % 2 == 1));
        assert!(poly > plain);
        let extra: f64 = large.members().iter().filter(|&&(_, k)| k % 2 == 1).count() as f64 * 2.0 / 1e4;
        assert!((poly * poly - plain * plain - extra).abs() < 1e-9);
        assert_eq!(distance_poly(&one, &one, 1.0, 1e4, &large, true, &sieve).unwrap().value, 0.0);
        assert_eq!(distance_poly(&lam, &lam, 1.0, 1e4, &large, false, &sieve).unwrap().value, 0.0);
    }

    #[test]
    fn scan_examples() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let grid = [-0.5, 0.0, 0.25, 0.5, 1.0];
        let r = pretentious_scan(&MultFunc::one(), 6, &grid, 10_000, &sieve).unwrap();
        assert_eq!((r.character.modulus(), r.t, r.distance.value), (1, 0.0, 0.0));
        let chi3 = make_mult_func("char(3,1)").unwrap();
        let r = pretentious_scan(&chi3, 8, &grid, 10_000, &sieve).unwrap();
        assert_eq!((r.character.modulus(), r.t), (3, 0.0));
        assert!(r.distance.value < 1e-12);
        let grid = [0.0, 0.3, 0.45, 0.7];
        let r = pretentious_scan(&MultFunc::nit(0.5), 1, &grid, 10_000, &sieve).unwrap();
        assert_eq!(r.t, 0.45);
    }

    fn unit(re: f64, im: f64) -> Complex64 {
        let z = Complex64::new(re, im);
        if z.norm() > 1.0 { z / z.norm() } else { z }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn triangle_inequality(seed in any::<u64>(), y in 1.0f64..50.0, x in 100.0f64..5000.0) {
            use rand::{Rng, SeedableRng};
            let sieve = FactorSieve::new(5000).unwrap();
            let mk = |s: u64| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
                let table: Vec<Complex64> = (0..700).map(|_| unit(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                let idx: std::collections::HashMap<u64, usize> = sieve.primes().iter().enumerate().map(|(i, &p)| (p as u64, i)).collect();
                MultFunc::new(format!("rand{s}"), false, true, move |p, k| table[idx[&p]].powu(k))
            };
            let (f, g, h) = (mk(seed), mk(seed ^ 1), mk(seed ^ 2));
            let fg = distance(&f, &g, y, x, &sieve).unwrap().value;
            let gh = distance(&g, &h, y, x, &sieve).unwrap().value;
            let fh = distance(&f, &h, y, x, &sieve).unwrap().value;
            prop_assert!(fg + gh >= fh - 1e-12);
        }
    }
}
