use pretlab::arith::{factor_trial, gcd, FactorSieve};
use pretlab::multfun::{characters_mod, distance, make_mult_func, primitive_characters_mod, pretentious_scan, DirichletCharacter, MultFunc};
use pretlab::Complex64;
use proptest::prelude::*;
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::OnceLock;

fn sieve() -> &'static FactorSieve {
    static S: OnceLock<FactorSieve> = OnceLock::new();
    S.get_or_init(|| FactorSieve::new(200_000).unwrap())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

/// Number of prime factors with multiplicity, by trial division.
fn big_omega(mut n: u64) -> u32 {
    let mut count = 0;
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            n /= p;
            count += 1;
        }
        p += 1;
    }
    count + u32::from(n > 1)
}

fn is_squarefree(n: u64) -> bool {
    (2..).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0)
}

fn v(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

fn phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

fn mu(n: u64) -> i64 {
    if !is_squarefree(n) {
        0
    } else if big_omega(n) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Completely multiplicative function with random phases at the primes up to 13.
fn phased(phases: [f64; 6]) -> MultFunc {
    let table: HashMap<u64, Complex64> = [2u64, 3, 5, 7, 11, 13]
        .into_iter()
        .zip(phases)
        .map(|(p, a)| (p, Complex64::from_polar(1.0, TAU * a)))
        .collect();
    MultFunc::one().with_prime_table("phased", table, true)
}

#[test]
fn builtins_match_their_definitions() {
    let s = sieve();
    let lambda = MultFunc::liouville();
    let sq = MultFunc::mobius_sq();
    let odd = MultFunc::indicator_odd();
    for n in 1..=5000u64 {
        let want = if big_omega(n) % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(lambda.eval_n(n, s).re, want, "liouville({n})");
        assert_eq!(sq.eval_n(n, s).re, if is_squarefree(n) { 1.0 } else { 0.0 }, "mu^2({n})");
        assert_eq!(odd.eval_n(n, s).re, (n % 2) as f64, "odd({n})");
    }
    let t = 0.7;
    let nit = MultFunc::nit(t);
    for n in [2u64, 12, 97, 1000, 65536] {
        let want = Complex64::from_polar(1.0, t * (n as f64).ln());
        assert!(close(nit.eval_n(n, s), want, 1e-12), "nit({n})");
    }
}

#[test]
fn override_specs_follow_precedence() {
    let s = sieve();
    let f = make_mult_func("override(liouville; 2:* => -1; 3:2 => i; 5:^ => -1; 5:1 => 1)").unwrap();
    for n in 1..=3000u64 {
        let (e2, e3, e5) = (v(n, 2), v(n, 3), v(n, 5));
        let rest = n / 2u64.pow(e2) / 3u64.pow(e3) / 5u64.pow(e5);
        let mut want = Complex64::new(if big_omega(rest) % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        if e2 > 0 {
            want = -want;
        }
        match e3 {
            0 => {}
            2 => want *= Complex64::i(),
            k => want *= if k % 2 == 0 { 1.0 } else { -1.0 },
        }
        // exact 5:1 beats 5:^
        if e5 > 1 {
            want *= if e5 % 2 == 0 { 1.0 } else { -1.0 };
        }
        assert!(close(f.eval_n(n, s), want, 1e-12), "f({n})");
    }
    assert!(make_mult_func("override(one; 4:1 => 1)").is_err());
    assert!(make_mult_func("override(one; 2:1 => 2)").is_err());
    assert!(make_mult_func("nope").is_err());
}

#[test]
fn characters_have_the_expected_counts() {
    for q in 1..=60u64 {
        let chars = characters_mod(q);
        assert_eq!(chars.len() as u64, phi(q), "#chars mod {q}");
        // primitive count: Σ_{d | q} μ(q/d) φ(d)
        let want: i64 = (1..=q).filter(|d| q % d == 0).map(|d| mu(q / d) * phi(d) as i64).sum();
        assert_eq!(primitive_characters_mod(q).len() as i64, want, "#primitive mod {q}");
        for chi in primitive_characters_mod(q) {
            assert_eq!(chi.conductor(), q);
        }
    }
}

#[test]
fn character_orthogonality() {
    for q in [1u64, 3, 8, 9, 12, 15, 16, 21, 35] {
        let chars = characters_mod(q);
        for a in 0..q {
            let total: Complex64 = chars.iter().map(|c| c.value(a)).sum();
            let want = if a % q == 1 % q && gcd(a, q) == 1 { phi(q) as f64 } else { 0.0 };
            assert!(close(total, Complex64::new(want, 0.0), 1e-9), "q = {q}, a = {a}");
        }
        for chi in &chars {
            let total: Complex64 = (0..q).map(|n| chi.value(n)).sum();
            let want = if chi.is_principal() { phi(q) as f64 } else { 0.0 };
            assert!(close(total, Complex64::new(want, 0.0), 1e-9), "q = {q}, chi = {}", chi.index());
        }
    }
}

#[test]
fn scan_recovers_a_planted_character() {
    let s = sieve();
    let chi = DirichletCharacter::new(7, 1).unwrap();
    assert!(chi.is_primitive());
    let f = MultFunc::from_character(&chi).product(&MultFunc::nit(0.5));
    let grid: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.25).collect();
    let found = pretentious_scan(&f, 10, &grid, 20_000, s).unwrap();
    assert_eq!(found.character.modulus(), 7);
    assert_eq!(found.character.index(), 1);
    assert_eq!(found.t, 0.5);
    assert!(found.distance.value < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn values_are_multiplicative(m in 1u64..400, n in 1u64..400, t in -2.0f64..2.0, q in 3u64..30) {
        prop_assume!(gcd(m, n) == 1);
        let s = sieve();
        let chi = characters_mod(q).pop().unwrap();
        let funcs = [
            MultFunc::liouville(),
            MultFunc::mobius_sq(),
            MultFunc::nit(t),
            MultFunc::from_character(&chi),
            make_mult_func("override(one; 2:3 => -1; 3:* => i)").unwrap(),
        ];
        for f in &funcs {
            let lhs = f.eval_n(m * n, s);
            let rhs = f.eval_n(m, s) * f.eval_n(n, s);
            prop_assert!(close(lhs, rhs, 1e-9), "{}: f({}) = {} vs {}", f.name(), m * n, lhs, rhs);
        }
    }

    #[test]
    fn theta_sums_back_to_f(phases in prop::array::uniform6(0.0f64..1.0), pi in 0usize..6, k in 0u32..12) {
        let f = phased(phases);
        let p = [2u64, 3, 5, 7, 11, 13][pi];
        // f = 1 * θ on prime powers: f(p^k) = Σ_{j <= k} θ(p^j)
        let sum: Complex64 = f.theta_values(p, k).into_iter().sum();
        prop_assert!(close(sum, f.at(p, k), 1e-12));
        prop_assert!(close(f.theta(p, k), f.theta_values(p, k)[k as usize], 1e-15));
    }

    #[test]
    fn characters_are_periodic_and_multiplicative(q in 2u64..80, idx in 0u64..1000, a in 0u64..500, b in 0u64..500) {
        let chars = characters_mod(q);
        let chi = &chars[(idx % chars.len() as u64) as usize];
        prop_assert!(close(chi.value(a + q), chi.value(a), 1e-12));
        prop_assert!(close(chi.value(a * b), chi.value(a) * chi.value(b), 1e-9));
        prop_assert_eq!(chi.value(a) == Complex64::new(0.0, 0.0), gcd(a, q) != 1);
        prop_assert!(close(chi.value_i(-(a as i64)), chi.value((q - a % q) % q), 1e-12));
    }

    #[test]
    fn distance_is_a_pseudometric(
        fa in prop::array::uniform6(0.0f64..1.0),
        ga in prop::array::uniform6(0.0f64..1.0),
        ha in prop::array::uniform6(0.0f64..1.0),
        y in 1.0f64..5.0,
    ) {
        let s = sieve();
        let (f, g, h) = (phased(fa), phased(ga), phased(ha));
        let x = 100.0;
        let d = |a: &MultFunc, b: &MultFunc| distance(a, b, y, x, s).unwrap().value;
        prop_assert!(d(&f, &f) < 1e-7);
        prop_assert!((d(&f, &g) - d(&g, &f)).abs() < 1e-12);
        prop_assert!(d(&f, &h) <= d(&f, &g) + d(&g, &h) + 1e-12);
        // direct sum over primes in [y, x]
        let want: f64 = (2..=100u64)
            .filter(|&p| factor_trial(p).unwrap().entries() == [(p, 1)] && p as f64 >= y)
            .map(|p| (1.0 - (f.at(p, 1) * g.at(p, 1).conj()).re) / p as f64)
            .sum();
        prop_assert!((d(&f, &g) - want.max(0.0).sqrt()).abs() < 1e-12);
    }
}
