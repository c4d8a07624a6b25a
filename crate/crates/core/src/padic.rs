//! Local expectations over the `p`-adic integers.
//!
//! For forms `P_1, …, P_m` and weights `w_j(v)` (usually `f_j(p^v)`) this
//! computes `E[Π_j w_j(v_p(P_j(n)))]` for `n` Haar-distributed in `ℤ_p`,
//! which is the local factor `M_p` of a correlation. The computation walks
//! residue classes `r mod p^L`. On each class every form is written as
//! `P(r + p^L y) = p^m Q(y)` from its Taylor expansion; only classes over
//! roots of `Q mod p` are split further, and a lone form with `Q` linear is
//! summed as a geometric series.

use crate::error::{Error, Result};
use crate::poly::{roots_mod_p, PolynomialZ, RootsModP};
use num_complex::Complex64;

/// Classes lighter than this are truncated (with their mass added to the tail).
const MIN_MASS: f64 = 1e-18;
/// Cap on the number of child classes followed from one class.
const MAX_ENUM_PRIME: u64 = 1_000_000;

/// One form `P` with its weight function `v ↦ w(v)`, `|w| <= 1`, `w(0) = 1`.
pub struct LocalForm<'a> {
    pub poly: &'a PolynomialZ,
    pub weight: &'a (dyn Fn(u32) -> Complex64 + Sync),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalResult {
    pub value: Complex64,
    /// Bound on the truncation error.
    pub tail: f64,
}

struct Walker<'a, 'b> {
    forms: &'b [LocalForm<'a>],
    p: u64,
    tol: f64,
    /// `p^cap` is the working modulus; valuations are known up to `cap`.
    cap: u32,
    modulus: u128,
    value: Complex64,
    tail: f64,
}

/// How form `j` behaves on a class `r + p^L ℤ_p`.
enum Shape {
    /// `v_p(P(n))` is the same for every `n` in the class.
    Exact(u32),
    /// `P(r + p^L y) = p^m Q(y)`; `v_p = m` unless `y mod p` is a root of `Q`.
    Split { m: u32, roots: Vec<u64>, simple: bool },
    /// Valuations beyond the working precision.
    Deep,
}

fn valuation_capped(c: u128, p: u128, cap: u32) -> u32 {
    if c == 0 {
        return cap;
    }
    let (mut c, mut v) = (c, 0);
    while v < cap && c % p == 0 {
        c /= p;
        v += 1;
    }
    v
}

impl Walker<'_, '_> {
    fn shape(&self, j: usize, r: u64, level: u32) -> Shape {
        let (p, m128) = (self.p as u128, self.modulus);
        let mut work: Vec<u128> = self.forms[j]
            .poly
            .coeffs()
            .iter()
            .map(|&c| (c as i128).rem_euclid(m128 as i128) as u128)
            .collect();
        let r = r as u128 % m128;
        // Taylor coefficients at r by repeated synthetic division
        let mut taylor = Vec::with_capacity(work.len());
        for i in 0..work.len() {
            let len = work.len() - i;
            let mut carry = 0u128;
            for idx in (0..len).rev() {
                let cur = (work[idx] + carry * r) % m128;
                work[idx] = carry;
                carry = cur;
            }
            taylor.push(carry);
        }
        // valuation and unit part of t_i p^{iL}
        let parts: Vec<(u32, u128)> = taylor
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let v = valuation_capped(t, p, self.cap);
                let shift = (i as u64 * level as u64).min(self.cap as u64) as u32;
                let total = (v + shift).min(self.cap);
                let unit = if v < self.cap { t / p.pow(v) % p } else { 0 };
                (total, unit)
            })
            .collect();
        let v0 = parts[0].0;
        let m = parts[1..].iter().map(|x| x.0).min().unwrap_or(self.cap);
        if v0 < m {
            return Shape::Exact(v0);
        }
        if m >= self.cap {
            return Shape::Deep;
        }
        let q: Vec<i64> = parts.iter().map(|&(v, u)| if v == m { u as i64 } else { 0 }).collect();
        let q = PolynomialZ::new(q).expect("some coefficient has valuation m");
        let roots = match roots_mod_p(&q, self.p) {
            RootsModP::Roots(v) => v,
            RootsModP::All => unreachable!("Q is nonzero mod p"),
        };
        // Q linear with unit slope mod p: v_p(Q(y)) is geometric on ℤ_p
        let simple = q.degree() == 1 && parts[1].0 == m;
        Shape::Split { m, roots, simple }
    }

    fn weight(&self, j: usize, v: u32) -> Complex64 {
        (self.forms[j].weight)(v)
    }

    /// Class `r mod p^L` of mass `mass`; forms outside `open` have
    /// contributed `closed`.
    fn visit(&mut self, r: u64, level: u32, mass: f64, open: Vec<usize>, closed: Complex64) -> Result<()> {
        let p = self.p;
        let mut closed = closed;
        let mut splits = Vec::new();
        for &j in &open {
            match self.shape(j, r, level) {
                Shape::Exact(v) => closed *= self.weight(j, v),
                Shape::Deep => {
                    self.value += closed * self.weight(j, self.cap) * mass;
                    self.tail += 2.0 * mass;
                    return Ok(());
                }
                Shape::Split { m, roots, simple } => splits.push((j, m, roots, simple)),
            }
        }
        if splits.is_empty() {
            self.value += closed * mass;
            return Ok(());
        }
        if mass < MIN_MASS || level + 1 >= self.cap {
            let here = splits.iter().fold(closed, |acc, s| acc * self.weight(s.0, s.1));
            self.value += here * mass;
            self.tail += 2.0 * mass;
            return Ok(());
        }
        if splits.len() == 1 && splits[0].3 {
            // v_p(P(n)) = m + i with probability (1 - 1/p) p^{-i}
            let (j, m) = (splits[0].0, splits[0].1);
            let inv_p = 1.0 / p as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut scale = 1.0;
            let mut i = 0;
            while 2.0 * scale * mass >= self.tol {
                acc += self.weight(j, m + i) * (1.0 - inv_p) * scale;
                scale *= inv_p;
                i += 1;
            }
            acc += self.weight(j, m + i) * scale;
            self.value += closed * acc * mass;
            self.tail += 2.0 * scale * mass;
            return Ok(());
        }
        let mut special: Vec<u64> = splits.iter().flat_map(|s| s.2.iter().copied()).collect();
        special.sort_unstable();
        special.dedup();
        if special.len() as u64 > MAX_ENUM_PRIME {
            return Err(Error::Precondition(format!("too many residue classes to expand at p = {p}")));
        }
        let child_mass = mass / p as f64;
        let ordinary = (p - special.len() as u64) as f64;
        let all_closed = splits.iter().fold(closed, |acc, s| acc * self.weight(s.0, s.1));
        self.value += all_closed * (child_mass * ordinary);
        let pl = p.pow(level);
        for t in special {
            let mut still = Vec::new();
            let mut closed_here = closed;
            for (j, m, roots, _) in &splits {
                if roots.binary_search(&t).is_ok() {
                    still.push(*j);
                } else {
                    closed_here *= self.weight(*j, *m);
                }
            }
            self.visit(r + t * pl, level + 1, child_mass, still, closed_here)?;
        }
        Ok(())
    }
}

/// `E[Π_j w_j(v_p(P_j(n)))]` over `n ∈ ℤ_p`, truncated with total error
/// at most `tail`. Terms are truncated once their mass drops below `tol`.
pub fn local_expectation(forms: &[LocalForm<'_>], p: u64, tol: f64) -> Result<LocalResult> {
    if forms.iter().any(|f| f.poly.degree() == 0) {
        return Err(Error::InvalidArgument("forms must be nonconstant".into()));
    }
    // largest p^cap below 2^62 keeps products inside u128
    let mut cap = 0u32;
    let mut modulus = 1u128;
    while modulus * p as u128 <= 1 << 62 {
        modulus *= p as u128;
        cap += 1;
    }
    let mut walker = Walker {
        forms,
        p,
        tol,
        cap,
        modulus,
        value: Complex64::new(0.0, 0.0),
        tail: 0.0,
    };
    walker.visit(0, 0, 1.0, (0..forms.len()).collect(), Complex64::new(1.0, 0.0))?;
    Ok(LocalResult {
        value: walker.value,
        tail: walker.tail,
    })
}
