use pretlab::arith::{crt_solve, euler_phi, factor_trial, gcd, mobius, FactorSieve, Factorization};
use proptest::prelude::*;
use std::sync::OnceLock;

fn sieve() -> &'static FactorSieve {
    static S: OnceLock<FactorSieve> = OnceLock::new();
    S.get_or_init(|| FactorSieve::new(1_000_000).unwrap())
}

fn phi_by_count(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

fn mobius_by_definition(mut n: u64) -> i64 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        -sign
    } else {
        sign
    }
}

#[test]
fn every_n_up_to_a_million_factors_back() {
    let s = sieve();
    for n in 1..=1_000_000u64 {
        let fac = s.factorize(n).unwrap();
        let mut prod = 1u64;
        for &(p, e) in fac.entries() {
            assert_eq!(s.spf(p), p, "{p} is not prime");
            prod *= p.pow(e);
        }
        assert_eq!(prod, n);
        assert!(fac.entries().windows(2).all(|w| w[0].0 < w[1].0));
    }
}

#[test]
fn phi_and_mobius_match_definitions() {
    for n in 1..=2000u64 {
        let fac = factor_trial(n).unwrap();
        assert_eq!(euler_phi(&fac), phi_by_count(n), "phi({n})");
        assert_eq!(mobius(&fac), mobius_by_definition(n), "mu({n})");
    }
}

#[test]
fn out_of_range_is_reported() {
    let s = FactorSieve::new(1000).unwrap();
    assert!(s.factorize(1001).is_err());
    assert!(s.check_covers(1000).is_ok());
}

proptest! {
    #[test]
    fn sieve_agrees_with_trial_division(n in 1u64..1_000_000) {
        prop_assert_eq!(sieve().factorize(n).unwrap(), factor_trial(n).unwrap());
    }

    #[test]
    fn trial_division_handles_large_inputs(a in 2u64..2_000_000, b in 2u64..2_000_000) {
        let n = a.saturating_mul(b);
        let fac = factor_trial(n).unwrap();
        prop_assert_eq!(fac.value().unwrap(), n);
    }

    #[test]
    fn phi_is_multiplicative(m in 1u64..1000, n in 1u64..1000) {
        prop_assume!(gcd(m, n) == 1);
        let s = sieve();
        let phi = |k: u64| euler_phi(&s.factorize(k).unwrap());
        prop_assert_eq!(phi(m * n), phi(m) * phi(n));
    }

    #[test]
    fn divisors_are_exactly_the_divisors(n in 1u64..20_000) {
        let mut got: Vec<u64> = sieve().factorize(n).unwrap().divisors().iter().map(|d| d.value().unwrap()).collect();
        got.sort_unstable();
        let want: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn crt_solution_is_the_unique_residue(
        pairs in prop::collection::vec((0u64..1000, 1u64..60), 1..5)
    ) {
        let pairs: Vec<(u64, u64)> = pairs.into_iter().map(|(r, m)| (r % m, m)).collect();
        // brute force over one period of the lcm
        let lcm = pairs.iter().fold(1u64, |l, &(_, m)| l / gcd(l, m) * m);
        prop_assume!(lcm <= 2_000_000);
        let brute: Vec<u64> = (0..lcm).filter(|&x| pairs.iter().all(|&(r, m)| x % m == r)).collect();
        match crt_solve(&pairs) {
            Ok((r, m)) => {
                prop_assert_eq!(m, lcm);
                prop_assert_eq!(brute, vec![r]);
            }
            Err(_) => prop_assert!(brute.is_empty()),
        }
    }

    #[test]
    fn factorization_product_merges_exponents(a in 1u64..1000, b in 1u64..1000) {
        let s = sieve();
        let prod: Factorization = s.factorize(a).unwrap().mul(&s.factorize(b).unwrap());
        prop_assert_eq!(prod, s.factorize(a * b).unwrap());
    }
}
