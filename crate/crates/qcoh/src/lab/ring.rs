//! Finite commutative rings given by full addition and multiplication tables.

use std::fmt;

use super::{LabError, Result};

/// Largest carrier supported; ideals are stored as `u64` bitsets.
pub const MAX_RING: usize = 64;

/// Subset of a ring's carrier.
pub type Ideal = u64;

#[derive(Clone)]
pub struct FiniteRing {
    name: String,
    size: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    one: u8,
    /// `(p, deg, x)` for polynomial quotients, used for printing and parsing elements.
    poly: Option<(u64, usize, u8)>,
    ideals: Vec<Ideal>,
    radical: Ideal,
    idempotents: Vec<(u8, usize)>,
}

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteRing({})", self.name)
    }
}

impl PartialEq for FiniteRing {
    fn eq(&self, o: &Self) -> bool {
        self.size == o.size && self.add == o.add && self.mul == o.mul
    }
}

impl Eq for FiniteRing {}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Parses a polynomial in `x` with integer coefficients, e.g. `x^2+2x-1`.
/// Returns coefficients from the constant term up.
fn parse_poly(s: &str) -> Result<Vec<i64>> {
    let bad = || LabError::Parse(format!("bad polynomial `{s}`"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let mut coeffs: Vec<i64> = Vec::new();
    let mut terms = Vec::new();
    let mut cur = String::new();
    for (i, c) in t.chars().enumerate() {
        if (c == '+' || c == '-') && i > 0 {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(c);
    }
    terms.push(cur);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1, b),
            None => (1, term.strip_prefix('+').unwrap_or(&term)),
        };
        let (coef, deg) = match body.find('x') {
            None => (body.parse::<i64>().map_err(|_| bad())?, 0),
            Some(pos) => {
                let c = match &body[..pos] {
                    "" => 1,
                    c => c.trim_end_matches('*').parse::<i64>().map_err(|_| bad())?,
                };
                let d = match &body[pos + 1..] {
                    "" => 1,
                    e => e.strip_prefix('^').ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?,
                };
                (c, d)
            }
        };
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0);
        }
        coeffs[deg] += sign * coef;
    }
    Ok(coeffs)
}

impl FiniteRing {
    /// Builds a ring from tables; element 0 must be the zero. Checks the axioms.
    pub fn from_tables(name: &str, size: usize, add: Vec<u8>, mul: Vec<u8>, one: u8) -> Result<Self> {
        if size == 0 || size > MAX_RING {
            return Err(LabError::TooLarge(format!("ring of size {size}; at most {MAX_RING} supported")));
        }
        if add.len() != size * size || mul.len() != size * size || add.iter().chain(&mul).any(|&x| x as usize >= size) {
            return Err(LabError::Parse("table shape".into()));
        }
        let mut neg = vec![0u8; size];
        for a in 0..size {
            neg[a] = (0..size)
                .find(|&b| add[a * size + b] == 0)
                .ok_or_else(|| LabError::Axiom(format!("{a} has no additive inverse")))? as u8;
        }
        let mut r = FiniteRing {
            name: name.to_string(),
            size,
            add,
            mul,
            neg,
            one,
            poly: None,
            ideals: vec![],
            radical: 0,
            idempotents: vec![],
        };
        r.check_axioms()?;
        r.ideals = r.compute_ideals();
        r.radical = r.compute_radical();
        r.idempotents = r.compute_idempotents();
        Ok(r)
    }

    /// `Zmod:m` or `GF:p:f(x)` (the quotient `F_p[x]/(f)`).
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        match parts.as_slice() {
            ["Zmod", m] => {
                let m: usize = m.trim().parse().map_err(|_| LabError::Parse(format!("bad modulus in `{spec}`")))?;
                if m < 2 {
                    return Err(LabError::Parse("modulus must be at least 2".into()));
                }
                if m > MAX_RING {
                    return Err(LabError::TooLarge(format!("Zmod:{m}; at most {MAX_RING} elements")));
                }
                let add = (0..m * m).map(|i| ((i / m + i % m) % m) as u8).collect();
                let mul = (0..m * m).map(|i| ((i / m) * (i % m) % m) as u8).collect();
                Self::from_tables(&format!("Zmod:{m}"), m, add, mul, 1)
            }
            ["GF", p, f] => {
                let p: u64 = p.trim().parse().map_err(|_| LabError::Parse(format!("bad prime in `{spec}`")))?;
                if !is_prime(p) {
                    return Err(LabError::Parse(format!("{p} is not prime")));
                }
                let mut c: Vec<u64> = parse_poly(f)?.into_iter().map(|x| x.rem_euclid(p as i64) as u64).collect();
                while c.last() == Some(&0) {
                    c.pop();
                }
                let deg = c.len().saturating_sub(1);
                if deg == 0 {
                    return Err(LabError::Parse(format!("`{f}` must have positive degree mod {p}")));
                }
                let size = (p as usize).checked_pow(deg as u32).filter(|&s| s <= MAX_RING).ok_or_else(|| {
                    LabError::TooLarge(format!("GF:{p}:{f} has more than {MAX_RING} elements"))
                })?;
                // make f monic
                let lead_inv = (1..p).find(|y| c[deg] * y % p == 1).expect("prime field");
                let monic: Vec<u64> = c.iter().map(|x| x * lead_inv % p).collect();
                let decode = |a: usize| -> Vec<u64> {
                    let mut v = vec![0; deg];
                    let mut a = a as u64;
                    for x in v.iter_mut() {
                        *x = a % p;
                        a /= p;
                    }
                    v
                };
                let encode = |v: &[u64]| -> u8 { v.iter().rev().fold(0u64, |acc, &x| acc * p + x) as u8 };
                let mut add = vec![0u8; size * size];
                let mut mul = vec![0u8; size * size];
                for a in 0..size {
                    let va = decode(a);
                    for b in 0..size {
                        let vb = decode(b);
                        let s: Vec<u64> = va.iter().zip(&vb).map(|(x, y)| (x + y) % p).collect();
                        add[a * size + b] = encode(&s);
                        let mut prod = vec![0u64; 2 * deg];
                        for (i, x) in va.iter().enumerate() {
                            for (j, y) in vb.iter().enumerate() {
                                prod[i + j] = (prod[i + j] + x * y) % p;
                            }
                        }
                        for top in (deg..2 * deg).rev() {
                            let t = prod[top];
                            if t != 0 {
                                for (i, m) in monic.iter().enumerate().take(deg) {
                                    prod[top - deg + i] = (prod[top - deg + i] + (p - t) * m) % p;
                                }
                                prod[top] = 0;
                            }
                        }
                        mul[a * size + b] = encode(&prod[..deg]);
                    }
                }
                let mut r = Self::from_tables(&format!("GF:{p}:{}", f.trim()), size, add, mul, 1)?;
                let x = if deg > 1 { p as u8 } else { ((p - monic[0]) % p) as u8 };
                r.poly = Some((p, deg, x));
                Ok(r)
            }
            _ => Err(LabError::Parse(format!("ring spec `{spec}` is not Zmod:m or GF:p:f(x)"))),
        }
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.size;
        let fail = |what: &str| Err(LabError::Axiom(format!("{} fails {what}", self.name)));
        for a in 0..n {
            if self.add(a as u8, 0) != a as u8 {
                return fail("additive identity");
            }
            if self.mul(a as u8, self.one) != a as u8 {
                return fail("multiplicative identity");
            }
            for b in 0..n {
                let (a8, b8) = (a as u8, b as u8);
                if self.add(a8, b8) != self.add(b8, a8) {
                    return fail("commutativity of +");
                }
                if self.mul(a8, b8) != self.mul(b8, a8) {
                    return fail("commutativity of ·");
                }
                for c in 0..n {
                    let c8 = c as u8;
                    if self.add(self.add(a8, b8), c8) != self.add(a8, self.add(b8, c8)) {
                        return fail("associativity of +");
                    }
                    if self.mul(self.mul(a8, b8), c8) != self.mul(a8, self.mul(b8, c8)) {
                        return fail("associativity of ·");
                    }
                    if self.mul(a8, self.add(b8, c8)) != self.add(self.mul(a8, b8), self.mul(a8, c8)) {
                        return fail("distributivity");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.size + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.size + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    pub fn one(&self) -> u8 {
        self.one
    }

    pub fn elements(&self) -> impl Iterator<Item = u8> {
        0..self.size as u8
    }

    pub fn is_unit(&self, a: u8) -> bool {
        self.elements().any(|b| self.mul(a, b) == self.one)
    }

    /// Element written as a polynomial in `x` (GF specs) or an integer.
    pub fn element_name(&self, a: u8) -> String {
        let Some((p, deg, _)) = self.poly else { return a.to_string() };
        let mut v = a as u64;
        let mut terms = Vec::new();
        for i in 0..deg {
            let c = v % p;
            v /= p;
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
            terms.push(match i {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{i}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.reverse();
            terms.join("+")
        }
    }

    /// Reads an element written as an integer (Zmod) or a polynomial in `x` (GF).
    pub fn parse_element(&self, s: &str) -> Result<u8> {
        match self.poly {
            None => {
                let v: i64 = s.trim().parse().map_err(|_| LabError::Parse(format!("bad element `{s}` of {}", self.name)))?;
                Ok(v.rem_euclid(self.size as i64) as u8)
            }
            Some((p, _, x)) => {
                let c = parse_poly(s)?;
                let mut acc = 0u8;
                let mut xpow = self.one;
                for coef in c {
                    let k = coef.rem_euclid(p as i64) as u8;
                    acc = self.add(acc, self.mul(k, xpow));
                    xpow = self.mul(xpow, x);
                }
                Ok(acc)
            }
        }
    }

    /// Integer multiple `k·1`.
    pub fn from_int(&self, k: i64) -> u8 {
        let mut acc = 0u8;
        let one = if k < 0 { self.neg(self.one) } else { self.one };
        for _ in 0..k.unsigned_abs() {
            acc = self.add(acc, one);
        }
        acc
    }

    pub fn characteristic(&self) -> usize {
        (1..=self.size).find(|&k| self.from_int(k as i64) == 0).expect("finite")
    }

    pub fn ideal_elements(&self, i: Ideal) -> Vec<u8> {
        self.elements().filter(|&a| i >> a & 1 == 1).collect()
    }

    /// Smallest ideal containing `gens`.
    pub fn ideal_generated(&self, gens: &[u8]) -> Ideal {
        let mut set: Ideal = 1;
        for &g in gens {
            let multiples: Vec<u8> = self.elements().map(|r| self.mul(r, g)).collect();
            let mut next = set;
            for s in self.ideal_elements(set) {
                for &m in &multiples {
                    next |= 1 << self.add(s, m);
                }
            }
            set = next;
        }
        set
    }

    fn compute_ideals(&self) -> Vec<Ideal> {
        let mut found: Vec<Ideal> = self.elements().map(|a| self.ideal_generated(&[a])).collect();
        found.sort();
        found.dedup();
        let mut frontier = found.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &a in &frontier {
                for b in found.clone() {
                    let gens: Vec<u8> = self.ideal_elements(a | b);
                    let s = self.ideal_generated(&gens);
                    if !found.contains(&s) {
                        found.push(s);
                        next.push(s);
                    }
                }
            }
            frontier = next;
        }
        found.sort_by_key(|i| (i.count_ones(), *i));
        found
    }

    /// All ideals, ordered by size.
    pub fn ideals(&self) -> &[Ideal] {
        &self.ideals
    }

    pub fn annihilator(&self, i: Ideal) -> Ideal {
        let elems = self.ideal_elements(i);
        self.elements()
            .filter(|&r| elems.iter().all(|&x| self.mul(r, x) == 0))
            .fold(0, |acc, r| acc | 1 << r)
    }

    fn full(&self) -> Ideal {
        if self.size == 64 {
            u64::MAX
        } else {
            (1u64 << self.size) - 1
        }
    }

    pub fn maximal_ideals(&self) -> Vec<Ideal> {
        let full = self.full();
        let proper: Vec<Ideal> = self.ideals.iter().copied().filter(|&i| i != full).collect();
        proper.iter().copied().filter(|&i| !proper.iter().any(|&j| j != i && j & i == i)).collect()
    }

    fn compute_radical(&self) -> Ideal {
        self.maximal_ideals().into_iter().fold(self.full(), |a, m| a & m)
    }

    /// Jacobson radical.
    pub fn radical(&self) -> Ideal {
        self.radical
    }

    /// Self-injective (quasi-Frobenius): `ann(ann(I)) = I` for every ideal.
    pub fn is_self_injective(&self) -> bool {
        self.ideals.iter().all(|&i| self.annihilator(self.annihilator(i)) == i)
    }

    pub fn is_local(&self) -> bool {
        self.maximal_ideals().len() == 1
    }

    pub fn is_field(&self) -> bool {
        self.elements().filter(|&a| a != 0).all(|a| self.is_unit(a))
    }

    fn compute_idempotents(&self) -> Vec<(u8, usize)> {
        let idem: Vec<u8> = self.elements().filter(|&e| e != 0 && self.mul(e, e) == e).collect();
        let primitive: Vec<u8> = idem
            .iter()
            .copied()
            .filter(|&e| idem.iter().all(|&f| f == e || self.mul(f, e) != f))
            .collect();
        primitive
            .into_iter()
            .map(|e| {
                let er: std::collections::BTreeSet<u8> = self.elements().map(|r| self.mul(e, r)).collect();
                let ej: std::collections::BTreeSet<u8> =
                    self.ideal_elements(self.radical).into_iter().map(|r| self.mul(e, r)).collect();
                (e, er.len() / ej.len())
            })
            .collect()
    }

    /// Primitive idempotents `e` with the size of the residue field of `eR`.
    pub fn primitive_idempotents(&self) -> &[(u8, usize)] {
        &self.idempotents
    }
}

impl fmt::Display for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
