//! Roots of integer polynomials modulo a prime (Cantor–Zassenhaus).

use super::PolynomialZ;
use crate::arith::{inv_mod, mul_mod};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootsModP {
    /// `P ≡ 0 (mod p)`: every residue is a root.
    All,
    /// Distinct roots in ascending order.
    Roots(Vec<u64>),
}

impl RootsModP {
    pub fn count(&self, p: u64) -> u64 {
        match self {
            RootsModP::All => p,
            RootsModP::Roots(r) => r.len() as u64,
        }
    }
}

/// Polynomials over `F_p`, ascending coefficients, no trailing zeros.
type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Fp {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn rem(a: &[u64], m: &[u64], p: u64) -> Fp {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    let inv_lead = inv_mod(m[dm], p).expect("nonzero leading coefficient");
    while r.len() > dm {
        let top = *r.last().unwrap();
        if top != 0 {
            let c = mul_mod(top, inv_lead, p);
            let shift = r.len() - 1 - dm;
            for (j, &mj) in m.iter().enumerate() {
                r[shift + j] = (r[shift + j] + p - mul_mod(c, mj, p)) % p;
            }
        }
        r.pop();
    }
    trim(r)
}

fn div_exact(a: &[u64], m: &[u64], p: u64) -> Fp {
    let dm = m.len() - 1;
    let inv_lead = inv_mod(m[dm], p).expect("nonzero leading coefficient");
    let mut r = a.to_vec();
    let mut q = vec![0u64; a.len() - dm];
    for i in (0..q.len()).rev() {
        let c = mul_mod(r[i + dm], inv_lead, p);
        q[i] = c;
        for (j, &mj) in m.iter().enumerate() {
            r[i + j] = (r[i + j] + p - mul_mod(c, mj, p)) % p;
        }
    }
    trim(q)
}

fn mul_rem(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    rem(&out, m, p)
}

fn pow_rem(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Fp {
    let mut result = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = mul_rem(&result, &b, m, p);
        }
        b = mul_rem(&b, &b, m, p);
        e >>= 1;
    }
    result
}

fn gcd(mut a: Fp, mut b: Fp, p: u64) -> Fp {
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    // make monic
    if let Some(&lead) = a.last() {
        let inv = inv_mod(lead, p).expect("nonzero");
        for c in &mut a {
            *c = mul_mod(*c, inv, p);
        }
    }
    a
}

/// Splits a squarefree product of distinct linear factors into its roots.
fn split(g: Fp, p: u64, out: &mut Vec<u64>) {
    match g.len() {
        0 | 1 => {}
        2 => {
            let inv = inv_mod(g[1], p).expect("nonzero");
            out.push((p - mul_mod(g[0], inv, p)) % p);
        }
        _ => {
            for a in 0..p {
                let h = pow_rem(&[a, 1], (p - 1) / 2, &g, p);
                let d = gcd(g.clone(), sub(&h, &[1], p), p);
                if d.len() > 1 && d.len() < g.len() {
                    let other = div_exact(&g, &d, p);
                    split(d, p, out);
                    split(other, p, out);
                    return;
                }
            }
            unreachable!("splitting always succeeds for odd p");
        }
    }
}

/// Roots of `P` modulo the prime `p`.
pub fn roots_mod_p(poly: &PolynomialZ, p: u64) -> RootsModP {
    let f = trim(
        poly.coeffs()
            .iter()
            .map(|&c| (c as i128).rem_euclid(p as i128) as u64)
            .collect(),
    );
    if f.is_empty() {
        return RootsModP::All;
    }
    if f.len() == 1 {
        return RootsModP::Roots(Vec::new());
    }
    if p <= 64 {
        let roots = (0..p).filter(|&r| poly.eval_mod(r, p) == 0).collect();
        return RootsModP::Roots(roots);
    }
    if f.len() == 2 {
        let inv = inv_mod(f[1], p).expect("p is prime");
        return RootsModP::Roots(vec![(p - mul_mod(f[0], inv, p)) % p]);
    }
    // g = gcd(f, x^p - x) collects the distinct linear factors
    let xp = pow_rem(&[0, 1], p, &f, p);
    let g = gcd(f.clone(), sub(&xp, &[0, 1], p), p);
    let mut roots = Vec::new();
    split(g, p, &mut roots);
    roots.sort_unstable();
    roots.dedup();
    RootsModP::Roots(roots)
}

/// `r` such that `P'(r) ≢ 0 (mod p)`.
pub(crate) fn is_simple_root(poly: &PolynomialZ, r: u64, p: u64) -> bool {
    poly.derivative().is_some_and(|d| d.eval_mod(r, p) != 0)
}
