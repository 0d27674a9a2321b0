//! Sparse multivariate polynomials over a registered variable list.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Index of a variable in its system's registration order.
pub type VarId = usize;

/// Exponent vector stored sparsely as `(variable, exponent)` pairs sorted by
/// variable, with no zero exponents.
///
/// Ordering is graded: lower total degree first, then lexicographic with
/// earlier-registered variables ranked first (`x^2`, `xy`, `y^2`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    exps: Vec<(VarId, u32)>,
}

impl MultiIndex {
    pub fn one() -> Self {
        MultiIndex::default()
    }

    pub fn var(v: VarId) -> Self {
        Self::var_pow(v, 1)
    }

    pub fn var_pow(v: VarId, e: u32) -> Self {
        if e == 0 {
            return Self::one();
        }
        MultiIndex { exps: vec![(v, e)] }
    }

    /// Builds from arbitrary pairs; repeated variables accumulate.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut m: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *m.entry(v).or_insert(0) += e;
        }
        MultiIndex {
            exps: m.into_iter().filter(|(_, e)| *e > 0).collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.exps
            .binary_search_by_key(&v, |(w, _)| *w)
            .map(|i| self.exps[i].1)
            .unwrap_or(0)
    }

    pub fn pairs(&self) -> &[(VarId, u32)] {
        &self.exps
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.exps.iter().map(|(v, _)| *v)
    }

    pub fn involves(&self, v: VarId) -> bool {
        self.exponent(v) > 0
    }

    pub fn mul(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() || j < other.exps.len() {
            match (self.exps.get(i), other.exps.get(j)) {
                (Some(&(va, ea)), Some(&(vb, eb))) if va == vb => {
                    out.push((va, ea + eb));
                    i += 1;
                    j += 1;
                }
                (Some(&(va, ea)), Some(&(vb, _))) if va < vb => {
                    out.push((va, ea));
                    i += 1;
                }
                (Some(&(va, ea)), None) => {
                    out.push((va, ea));
                    i += 1;
                }
                (_, Some(&p)) => {
                    out.push(p);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        MultiIndex { exps: out }
    }

    /// Restriction to a subset of variables.
    pub fn restrict(&self, keep: impl Fn(VarId) -> bool) -> MultiIndex {
        MultiIndex {
            exps: self.exps.iter().copied().filter(|(v, _)| keep(*v)).collect(),
        }
    }

    /// `prod_v values[v]^e_v`.
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.exps
            .iter()
            .map(|(v, e)| values[*v].powi(*e as i32))
            .product()
    }

    /// `x^2*y` style rendering with the given variable names; `1` for the
    /// empty index.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_one() {
            return "1".into();
        }
        self.exps
            .iter()
            .map(|(v, e)| {
                if *e == 1 {
                    names[*v].clone()
                } else {
                    format!("{}^{}", names[*v], e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            // first differing variable: a nonzero exponent on an earlier
            // variable ranks first
            for (a, b) in self.exps.iter().zip(&other.exps) {
                if a.0 != b.0 {
                    return a.0.cmp(&b.0);
                }
                if a.1 != b.1 {
                    return b.1.cmp(&a.1);
                }
            }
            other.exps.len().cmp(&self.exps.len())
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with real coefficients; zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<MultiIndex, f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: f64) -> Self {
        Poly::monomial(MultiIndex::one(), c)
    }

    pub fn one() -> Self {
        Poly::constant(1.0)
    }

    pub fn var(v: VarId) -> Self {
        Poly::monomial(MultiIndex::var(v), 1.0)
    }

    pub fn monomial(m: MultiIndex, c: f64) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(vac) => {
                vac.insert(c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn coefficient(&self, m: &MultiIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = &out * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        out
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(values)).sum()
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        let mut terms: Vec<(&MultiIndex, &f64)> = self.terms.iter().collect();
        terms.sort_by(|a, b| display_order(a.0, b.0));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if k == 0 {
                if sign == "-" {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            let body = m.render(names);
            if m.is_one() {
                s.push_str(&fmt_coef(mag));
            } else if mag == 1.0 {
                s.push_str(&body);
            } else {
                s.push_str(&format!("{}*{}", fmt_coef(mag), body));
            }
        }
        s
    }
}

/// Display order: highest degree first, earlier variables first within a
/// degree.
pub(crate) fn display_order(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    b.degree().cmp(&a.degree()).then_with(|| a.cmp(b))
}

/// Integers print without a fractional part; everything else round-trips.
pub(crate) fn fmt_coef(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:?}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max_var = self
            .terms
            .keys()
            .flat_map(|m| m.vars())
            .max()
            .map_or(0, |v| v + 1);
        let names: Vec<String> = (0..max_var).map(|v| format!("b{v}")).collect();
        f.write_str(&self.render(&names))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
