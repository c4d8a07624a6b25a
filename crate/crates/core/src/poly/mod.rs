//! Integer polynomials: parsing, evaluation, resultants, root counts modulo
//! prime powers and bulk factorization of polynomial values.

mod modp;
mod omega;
mod values;

pub use modp::{roots_mod_p, RootsModP};
pub use omega::{
    joint_density_f, joint_divisor_density, joint_omega, omega, omega_prime_power, roots_prime_power, Rational,
};
pub use values::{factor_poly_values, large_prime_powers, BlockFactors, LargePrimePowerSet, PolyValueSieve};

use crate::error::{Error, Result};
use std::fmt;

/// Polynomial with integer coefficients `c_0 + c_1 x + … + c_D x^D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolynomialZ {
    coeffs: Vec<i64>,
}

impl PolynomialZ {
    /// Builds a polynomial from coefficients in ascending degree; trailing
    /// zeros are dropped. The zero polynomial is rejected.
    pub fn new(mut coeffs: Vec<i64>) -> Result<Self> {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("zero polynomial".into()));
        }
        Ok(Self { coeffs })
    }

    /// `a·x + c`.
    pub fn linear(a: i64, c: i64) -> Result<Self> {
        Self::new(vec![c, a])
    }

    pub fn x() -> Self {
        Self { coeffs: vec![0, 1] }
    }

    /// Parses literals such as `"x^2+1"`, `"3*x - 2"`, `"-x^3 + 2x"`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::MalformedSpec {
            input: text.to_string(),
            reason: reason.to_string(),
        };
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(bad("empty polynomial"));
        }
        let mut coeffs: Vec<i64> = Vec::new();
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in s.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 && !s[..i].ends_with('^') {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        for term in terms {
            let (sign, body) = match term.as_bytes().first() {
                Some(b'-') => (-1i64, &term[1..]),
                Some(b'+') => (1, &term[1..]),
                _ => (1, term),
            };
            if body.is_empty() {
                return Err(bad("empty term"));
            }
            let (coef, deg) = match body.find('x') {
                None => (body.parse::<i64>().map_err(|_| bad("bad constant"))?, 0usize),
                Some(pos) => {
                    let head = body[..pos].strip_suffix('*').unwrap_or(&body[..pos]);
                    let coef = if head.is_empty() {
                        1
                    } else {
                        head.parse::<i64>().map_err(|_| bad("bad coefficient"))?
                    };
                    let tail = &body[pos + 1..];
                    let deg = if tail.is_empty() {
                        1
                    } else {
                        let e = tail.strip_prefix('^').ok_or_else(|| bad("expected ^ after x"))?;
                        e.parse::<usize>().map_err(|_| bad("bad exponent"))?
                    };
                    if deg > 64 {
                        return Err(bad("degree too large"));
                    }
                    (coef, deg)
                }
            };
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, 0);
            }
            coeffs[deg] = coeffs[deg]
                .checked_add(sign * coef)
                .ok_or_else(|| bad("coefficient overflow"))?;
        }
        Self::new(coeffs).map_err(|_| bad("zero polynomial"))
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> i64 {
        *self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn content(&self) -> u64 {
        self.coeffs.iter().fold(0u64, |g, &c| crate::arith::gcd(g, c.unsigned_abs()))
    }

    pub fn derivative(&self) -> Option<PolynomialZ> {
        if self.degree() == 0 {
            return None;
        }
        let c = self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as i64).collect();
        PolynomialZ::new(c).ok()
    }

    /// Exact value, or `None` on 128-bit overflow.
    pub fn eval(&self, n: i64) -> Option<i128> {
        let n = n as i128;
        self.coeffs
            .iter()
            .rev()
            .try_fold(0i128, |acc, &c| acc.checked_mul(n)?.checked_add(c as i128))
    }

    /// `P(n) mod m` for `m >= 1`.
    pub fn eval_mod(&self, n: u64, m: u64) -> u64 {
        let n = (n % m) as u128;
        let m128 = m as u128;
        self.coeffs.iter().rev().fold(0u128, |acc, &c| {
            let c = (c as i128).rem_euclid(m as i128) as u128;
            (acc * n + c) % m128
        }) as u64
    }

    /// Largest `|P(n)|` over `1 <= n <= x`, or `None` if it exceeds 64 bits.
    /// Uses the bound `Σ |c_i| x^i`, which is attained by no more than a
    /// constant factor.
    pub fn max_abs_value(&self, x: u64) -> Option<u64> {
        let mut best = 0u128;
        let mut xp = 1u128;
        for &c in &self.coeffs {
            best = best.checked_add((c.unsigned_abs() as u128).checked_mul(xp)?)?;
            xp = xp.checked_mul(x as u128)?;
        }
        u64::try_from(best).ok()
    }

    /// `Res(self, other)`, the Sylvester determinant, by fraction-free
    /// Bareiss elimination. For `a x + c` and `b x + d` this is `ad - bc`.
    pub fn resultant(&self, other: &PolynomialZ) -> Result<i128> {
        let (m, n) = (self.degree(), other.degree());
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("resultant needs nonconstant polynomials".into()));
        }
        let size = m + n;
        let mut mat = vec![vec![0i128; size]; size];
        for row in 0..n {
            for (j, &c) in self.coeffs.iter().rev().enumerate() {
                mat[row][row + j] = c as i128;
            }
        }
        for row in 0..m {
            for (j, &c) in other.coeffs.iter().rev().enumerate() {
                mat[n + row][row + j] = c as i128;
            }
        }
        bareiss_det(mat)
    }

    /// Rejects pairs sharing a root.
    pub fn check_coprime(&self, other: &PolynomialZ) -> Result<i128> {
        let r = self.resultant(other)?;
        if r == 0 {
            return Err(Error::ResultantZero(self.to_string(), other.to_string()));
        }
        Ok(r)
    }
}

fn bareiss_det(mut a: Vec<Vec<i128>>) -> Result<i128> {
    let n = a.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| a[i][k].checked_mul(a[k][j]).and_then(|y| x.checked_sub(y)))
                    .ok_or(Error::Overflow("resultant"))?;
                a[i][j] = t / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}

impl fmt::Display for PolynomialZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (deg, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if c < 0 { "-" } else { "+" })?;
            }
            first = false;
            match (deg, mag) {
                (0, _) => write!(f, "{mag}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{mag}*x")?,
                (_, 1) => write!(f, "x^{deg}")?,
                _ => write!(f, "{mag}*x^{deg}")?,
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for PolynomialZ {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
