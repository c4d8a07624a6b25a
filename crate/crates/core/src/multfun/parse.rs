//! Text specs for multiplicative functions.
//!
//! ```text
//! spec     := builtin | "override(" spec ";" override (";" override)* ")"
//! builtin  := "one" | "liouville" | "mobius_sq" | "nit(" real ")"
//!           | "char(" nat "," nat ")" | "indicator_odd"
//! override := prime ":" (exponent | "*" | "^") "=>" complex
//! ```
//!
//! `p:k => z` sets `f(p^k) = z`, `p:* => z` sets `f(p^k) = z` for every
//! `k >= 1` and `p:^ => z` sets `f(p^k) = z^k`. An exact exponent entry
//! wins over `*` and `^` entries for the same prime; otherwise the last
//! matching entry wins. Whitespace is ignored.

use super::{CharGroup, MultFunc, UNIT_TOL};
use crate::arith::is_prime_u64;
use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Exponent {
    Exact(u32),
    All,
    Power,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    p: u64,
    exp: Exponent,
    z: Complex64,
}

/// Parses a function spec. The returned function's name is the input text.
pub fn make_mult_func(spec: &str) -> Result<MultFunc> {
    let compact: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let mut parser = Parser {
        src: &compact,
        pos: 0,
        original: spec,
    };
    let f = parser.spec()?;
    if parser.pos != compact.len() {
        return Err(parser.fail("trailing input"));
    }
    Ok(f.with_name(spec.trim()))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    original: &'a str,
}

impl<'a> Parser<'a> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::MalformedSpec {
            input: self.original.to_string(),
            reason: format!("{} at offset {}", reason.into(), self.pos),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.fail(format!("expected {token:?}")))
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        let len = self.rest().find(|c: char| !pred(c)).unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..start + len]
    }

    fn nat(&mut self) -> Result<u64> {
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits.parse().map_err(|_| self.fail("expected a natural number"))
    }

    fn real(&mut self) -> Result<f64> {
        let text = self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
        text.parse().map_err(|_| self.fail(format!("bad real number {text:?}")))
    }

    fn spec(&mut self) -> Result<MultFunc> {
        if self.eat("override(") {
            let base = self.spec()?;
            let mut entries = Vec::new();
            while self.eat(";") {
                entries.push(self.entry()?);
            }
            if entries.is_empty() {
                return Err(self.fail("override needs at least one entry"));
            }
            self.expect(")")?;
            return Ok(apply_overrides(base, entries));
        }
        if self.eat("one") {
            return Ok(MultFunc::one());
        }
        if self.eat("liouville") {
            return Ok(MultFunc::liouville());
        }
        if self.eat("mobius_sq") {
            return Ok(MultFunc::mobius_sq());
        }
        if self.eat("indicator_odd") {
            return Ok(MultFunc::indicator_odd());
        }
        if self.eat("nit(") {
            let t = self.real()?;
            self.expect(")")?;
            if !t.is_finite() {
                return Err(self.fail("t must be finite"));
            }
            return Ok(MultFunc::nit(t));
        }
        if self.eat("char(") {
            let q = self.nat()?;
            self.expect(",")?;
            let idx = self.nat()?;
            self.expect(")")?;
            if q == 0 || q > 1_000_000 {
                return Err(self.fail("character modulus must be in 1..=10^6"));
            }
            let group = CharGroup::new(q);
            let chi = group
                .character(idx)
                .ok_or_else(|| self.fail(format!("modulus {q} has only {} characters", group.size())))?;
            return Ok(MultFunc::from_character(&chi));
        }
        Err(self.fail("unknown builtin"))
    }

    fn entry(&mut self) -> Result<Entry> {
        let p = self.nat()?;
        if !is_prime_u64(p) {
            return Err(self.fail(format!("{p} is not prime")));
        }
        self.expect(":")?;
        let exp = if self.eat("*") {
            Exponent::All
        } else if self.eat("^") {
            Exponent::Power
        } else {
            let k = self.nat()?;
            if k == 0 || k > u32::MAX as u64 {
                return Err(self.fail("exponent must be >= 1"));
            }
            Exponent::Exact(k as u32)
        };
        self.expect("=>")?;
        let z = self.complex()?;
        if z.norm() > 1.0 + UNIT_TOL {
            return Err(Error::ValueRange {
                value: format!("{p}:{} => {z}", match exp {
                    Exponent::Exact(k) => k.to_string(),
                    Exponent::All => "*".into(),
                    Exponent::Power => "^".into(),
                }),
                modulus: z.norm(),
            });
        }
        Ok(Entry { p, exp, z })
    }

    /// `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
    fn complex(&mut self) -> Result<Complex64> {
        let text = self.take_while(|c| !matches!(c, ';' | ')'));
        parse_complex(text).ok_or_else(|| self.fail(format!("bad complex literal {text:?}")))
    }
}

fn parse_complex(text: &str) -> Option<Complex64> {
    if text.is_empty() {
        return None;
    }
    let imag_part = |s: &str| -> Option<f64> {
        let body = s.strip_suffix('i')?;
        match body {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => body.parse().ok(),
        }
    };
    if !text.ends_with('i') {
        return text.parse().ok().map(|re| Complex64::new(re, 0.0));
    }
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = text.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| matches!(bytes[j], b'+' | b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    match split {
        Some(j) => {
            let re: f64 = text[..j].parse().ok()?;
            Some(Complex64::new(re, imag_part(&text[j..])?))
        }
        None => Some(Complex64::new(0.0, imag_part(text)?)),
    }
}

fn apply_overrides(base: MultFunc, entries: Vec<Entry>) -> MultFunc {
    let unimodular = base.is_unimodular() && entries.iter().all(|e| (e.z.norm() - 1.0).abs() <= UNIT_TOL);
    let completely = base.is_completely_multiplicative() && entries.iter().all(|e| e.exp == Exponent::Power);
    let name = base.name().to_string();
    MultFunc::new(name, unimodular, completely, move |p, k| {
        let mut exact = None;
        let mut general = None;
        for e in entries.iter().filter(|e| e.p == p) {
            match e.exp {
                Exponent::Exact(j) if j == k => exact = Some(e.z),
                Exponent::Exact(_) => {}
                Exponent::All => general = Some(e.z),
                Exponent::Power => general = Some(e.z.powu(k)),
            }
        }
        exact.or(general).unwrap_or_else(|| base.at(p, k))
    })
}
