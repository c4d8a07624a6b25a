use crate::arith::{factor_trial, gcd, lcm, pow_mod};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Cyclic generator of one prime-power factor of `(ℤ/q)^×`.
#[derive(Debug, Clone)]
struct Generator {
    value: u64,
    order: u64,
}

/// The factor `(ℤ/p^a)^×` with discrete logarithms against its generators.
#[derive(Debug)]
struct Component {
    p: u64,
    a: u32,
    pa: u64,
    gens: Vec<Generator>,
    /// `dlog[r * gens.len() + i]` is the exponent of generator `i` in `r`;
    /// `u32::MAX` marks non-units.
    dlog: Vec<u32>,
}

/// `(ℤ/q)^×` decomposed by CRT into cyclic factors: a primitive root for
/// odd `p^a`, `-1` for `4` and `{-1, 5}` for `2^a` with `a >= 3`.
#[derive(Debug)]
pub struct CharGroup {
    q: u64,
    comps: Vec<Component>,
    /// `(component, generator)` for each flattened generator.
    layout: Vec<(usize, usize)>,
    orders: Vec<u64>,
    exponent: u64,
    roots: Vec<Complex64>,
}

fn primitive_root_mod_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fac = factor_trial(p - 1).expect("p - 1 >= 1");
    (2..p)
        .find(|&g| fac.entries().iter().all(|&(r, _)| pow_mod(g, (p - 1) / r, p) != 1))
        .expect("every prime has a primitive root")
}

impl Component {
    fn new(p: u64, a: u32) -> Self {
        let pa = p.pow(a);
        let mut gens = Vec::new();
        if p == 2 {
            if a >= 2 {
                gens.push(Generator { value: pa - 1, order: 2 });
            }
            if a >= 3 {
                gens.push(Generator { value: 5, order: pa / 4 });
            }
        } else {
            let mut g = primitive_root_mod_prime(p);
            if a >= 2 && pow_mod(g, p - 1, p * p) == 1 {
                g += p;
            }
            gens.push(Generator { value: g % pa, order: pa / p * (p - 1) });
        }
        let ng = gens.len().max(1);
        let mut dlog = vec![u32::MAX; pa as usize * ng];
        match gens.len() {
            0 => {
                // trivial group: only residue 1 (mod 2) or residue 0 (mod 1)
                dlog[(1 % pa) as usize] = 0;
            }
            1 => {
                let (g, ord) = (gens[0].value, gens[0].order);
                let mut x = 1 % pa;
                for k in 0..ord {
                    dlog[x as usize] = k as u32;
                    x = x * g % pa;
                }
            }
            _ => {
                let ord5 = gens[1].order;
                for s in 0..2u64 {
                    let mut x = if s == 0 { 1 } else { pa - 1 };
                    for t in 0..ord5 {
                        dlog[x as usize * 2] = s as u32;
                        dlog[x as usize * 2 + 1] = t as u32;
                        x = x * 5 % pa;
                    }
                }
            }
        }
        Self { p, a, pa, gens, dlog }
    }

    /// Conductor exponent of the component character with the given
    /// generator exponents.
    fn conductor(&self, exps: &[u64]) -> u64 {
        if exps.iter().all(|&e| e == 0) {
            return 1;
        }
        if self.p == 2 {
            let s = exps[0];
            let t = exps.get(1).copied().unwrap_or(0);
            if t == 0 {
                return if s == 0 { 1 } else { 4 };
            }
            let c = self.a - t.trailing_zeros();
            return 1 << c;
        }
        let e = exps[0];
        let mut v = 0;
        let mut m = e;
        while m % self.p == 0 && v < self.a - 1 {
            m /= self.p;
            v += 1;
        }
        self.p.pow(self.a - v)
    }
}

impl CharGroup {
    pub fn new(q: u64) -> Arc<Self> {
        assert!(q >= 1, "modulus must be positive");
        let fac = factor_trial(q).expect("q >= 1");
        let comps: Vec<Component> = fac.entries().iter().map(|&(p, a)| Component::new(p, a)).collect();
        let mut layout = Vec::new();
        let mut orders = Vec::new();
        for (ci, c) in comps.iter().enumerate() {
            for (gi, g) in c.gens.iter().enumerate() {
                layout.push((ci, gi));
                orders.push(g.order);
            }
        }
        let exponent = orders.iter().fold(1u64, |acc, &o| lcm(acc, o).expect("group exponent fits"));
        let roots = (0..exponent)
            .map(|j| unit_root(j, exponent))
            .collect();
        Arc::new(Self {
            q,
            comps,
            layout,
            orders,
            exponent,
            roots,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Number of characters, `φ(q)`.
    pub fn size(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Exponent `E` of the group: all character values are `E`-th roots of unity.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn generator_orders(&self) -> &[u64] {
        &self.orders
    }

    /// Character with mixed-radix index `index` (0 is principal).
    pub fn character(self: &Arc<Self>, index: u64) -> Option<DirichletCharacter> {
        if index >= self.size() {
            return None;
        }
        let mut rest = index;
        let exps: Vec<u64> = self
            .orders
            .iter()
            .map(|&o| {
                let e = rest % o;
                rest /= o;
                e
            })
            .collect();
        let mut conductor = 1;
        let mut offset = 0;
        for c in &self.comps {
            conductor *= c.conductor(&exps[offset..offset + c.gens.len()]);
            offset += c.gens.len();
        }
        Some(DirichletCharacter {
            group: self.clone(),
            exps: exps.into(),
            index,
            conductor,
        })
    }
}

/// A Dirichlet character stored as exponents against the generators of
/// its [`CharGroup`].
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    group: Arc<CharGroup>,
    exps: Arc<[u64]>,
    index: u64,
    conductor: u64,
}

impl DirichletCharacter {
    /// Shorthand for `CharGroup::new(q).character(index)`.
    pub fn new(q: u64, index: u64) -> Option<Self> {
        CharGroup::new(q).character(index)
    }

    pub fn modulus(&self) -> u64 {
        self.group.q
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.q
    }

    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    pub fn group(&self) -> &Arc<CharGroup> {
        &self.group
    }

    /// `χ(n) = ζ_E^{phase}`, or `None` when `gcd(n, q) > 1`.
    pub fn phase(&self, n: u64) -> Option<u64> {
        let g = &self.group;
        let mut acc = 0u64;
        for (flat, &(ci, gi)) in g.layout.iter().enumerate() {
            let c = &g.comps[ci];
            let r = (n % c.pa) as usize;
            let d = c.dlog[r * c.gens.len() + gi];
            if d == u32::MAX {
                return None;
            }
            acc = (acc + self.exps[flat] * d as u64 % g.orders[flat] * (g.exponent / g.orders[flat])) % g.exponent;
        }
        // components without generators still need the unit test
        for c in &g.comps {
            if c.gens.is_empty() && n % c.p == 0 {
                return None;
            }
        }
        Some(acc)
    }

    pub fn value(&self, n: u64) -> Complex64 {
        match self.phase(n) {
            Some(j) => self.group.roots[j as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn value_i(&self, n: i64) -> Complex64 {
        self.value(n.rem_euclid(self.group.q as i64) as u64)
    }

    /// Order of `χ` in the character group.
    pub fn order(&self) -> u64 {
        self.exps
            .iter()
            .zip(self.group.orders.iter())
            .fold(1, |acc, (&e, &o)| lcm(acc, o / gcd(e, o)).expect("order fits"))
    }
}

/// All `φ(q)` characters mod `q`, principal first.
pub fn characters_mod(q: u64) -> Vec<DirichletCharacter> {
    let g = CharGroup::new(q);
    (0..g.size()).map(|i| g.character(i).expect("index in range")).collect()
}

pub fn primitive_characters_mod(q: u64) -> Vec<DirichletCharacter> {
    characters_mod(q).into_iter().filter(|c| c.is_primitive()).collect()
}

/// An element `Σ c_j ζ_n^j` of `ℤ[ζ_n]`, kept reduced modulo the
/// cyclotomic polynomial `Φ_n` so that equality is coefficient equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicInt {
    n: u64,
    coeffs: Vec<i64>,
}

thread_local! {
    static CYCLOTOMIC: std::cell::RefCell<HashMap<u64, Arc<Vec<i64>>>> = std::cell::RefCell::new(HashMap::new());
}

/// Coefficients of `Φ_n`, lowest degree first.
pub(crate) fn cyclotomic_poly(n: u64) -> Arc<Vec<i64>> {
    if let Some(hit) = CYCLOTOMIC.with(|c| c.borrow().get(&n).cloned()) {
        return hit;
    }
    // Φ_n = Π_{d | n} (x^d - 1)^{μ(n/d)}
    let mut num = vec![1i64];
    let mut dens = Vec::new();
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        let mu = crate::arith::mobius(&factor_trial(n / d).expect("n/d >= 1"));
        if mu == 0 {
            continue;
        }
        let mut binom = vec![0i64; d as usize + 1];
        binom[0] = -1;
        binom[d as usize] = 1;
        if mu == 1 {
            num = poly_mul(&num, &binom);
        } else {
            dens.push(binom);
        }
    }
    for den in dens {
        let (quot, rem) = poly_divrem_monic(&num, &den);
        debug_assert!(rem.iter().all(|&c| c == 0));
        num = quot;
    }
    let out = Arc::new(num);
    CYCLOTOMIC.with(|c| c.borrow_mut().insert(n, out.clone()));
    out
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Division by a monic polynomial.
fn poly_divrem_monic(a: &[i64], m: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let dm = m.len() - 1;
    let mut rem = a.to_vec();
    if rem.len() <= dm {
        rem.resize(dm, 0);
        return (vec![0], rem);
    }
    let mut quot = vec![0i64; rem.len() - dm];
    for i in (dm..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        quot[i - dm] = c;
        for (j, &mj) in m.iter().enumerate() {
            rem[i - dm + j] -= c * mj;
        }
    }
    rem.truncate(dm);
    (quot, rem)
}

impl CyclotomicInt {
    /// Reduces `Σ_j hist[j] ζ_n^j` (with `hist.len() == n`).
    pub fn from_powers(n: u64, hist: &[i64]) -> Self {
        assert_eq!(hist.len() as u64, n);
        let phi = cyclotomic_poly(n);
        let (_, rem) = poly_divrem_monic(hist, &phi);
        Self { n, coeffs: rem }
    }

    pub fn from_integer(n: u64, value: i64) -> Self {
        let mut hist = vec![0i64; n as usize];
        hist[0] = value;
        Self::from_powers(n, &hist)
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// The rational integer represented, if the element lies in `ℤ`.
    pub fn as_integer(&self) -> Option<i64> {
        if self.coeffs.iter().skip(1).all(|&c| c == 0) {
            Some(self.coeffs.first().copied().unwrap_or(0))
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| Complex64::from_polar(c as f64, TAU * j as f64 / self.n as f64))
            .sum()
    }
}

/// `e^{2πi j/n}`, exact at multiples of a quarter turn.
fn unit_root(j: u64, n: u64) -> Complex64 {
    if (4 * j) % n == 0 {
        return match 4 * j / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * j as f64 / n as f64)
}
