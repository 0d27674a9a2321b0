//! Closed moment recursions derived by recursive expansion.
//!
//! Starting from a target moment `E[b^xi]`, the update `prod g_i^{xi_i}` is
//! expanded, every term is factored over the dependence graph, and each
//! factor that is neither known nor already tracked is expanded in turn.
//! The result is a finite set of tracked moments whose values at `t + 1`
//! are polynomials in tracked and known moments at `t`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::graph::{factor_moment, DependenceGraph};
use super::poly::{display_order, fmt_coef, MultiIndex};
use super::system::PolySystem;
use crate::error::{Error, Result};

/// Highest total degree of any tracked or known moment.
pub const MAX_MOMENT_DEGREE: u32 = 16;

/// Default cap on the number of tracked moments.
pub const DEFAULT_EXPANSION_CAP: usize = 10_000;

/// A factor of one expression term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentRef {
    /// Index into the tracked set.
    Tracked(usize),
    /// Index into the known (base) moment list.
    Base(usize),
}

/// `coef * prod E[factor]` where the factors multiply back to `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprTerm {
    pub coef: f64,
    pub alpha: MultiIndex,
    pub factors: Vec<MomentRef>,
}

/// Symbolic expression `E[b^xi]_{t+1} = sum_terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    pub terms: Vec<ExprTerm>,
}

impl Expression {
    pub fn eval(&self, tracked: &[f64], base: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.factors.iter().fold(t.coef, |acc, f| {
                    acc * match *f {
                        MomentRef::Tracked(i) => tracked[i],
                        MomentRef::Base(i) => base[i],
                    }
                })
            })
            .sum()
    }
}

/// Tracked moments `Z` with their update expressions `F`, plus the list of
/// known moments the expressions consume. Immutable once built.
#[derive(Debug, Clone)]
pub struct MomentDynamics {
    names: Vec<String>,
    tracked: Vec<MultiIndex>,
    exprs: Vec<Expression>,
    base: Vec<MultiIndex>,
}

impl MomentDynamics {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Tracked set in graded order.
    pub fn tracked(&self) -> &[MultiIndex] {
        &self.tracked
    }

    pub fn expressions(&self) -> &[Expression] {
        &self.exprs
    }

    /// Known moments referenced by the expressions, in graded order.
    pub fn base_moments(&self) -> &[MultiIndex] {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.tracked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracked.is_empty()
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.tracked.binary_search(alpha).ok()
    }

    pub fn var(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UndeclaredVariable(name.into()))
    }

    /// Scans every expression and confirms each factor refers to a tracked
    /// or known moment and that the factors multiply back to the term.
    pub fn check_closure(&self, sys: &PolySystem) -> Result<()> {
        for (xi, e) in self.tracked.iter().zip(&self.exprs) {
            for t in &e.terms {
                let mut prod = MultiIndex::one();
                for f in &t.factors {
                    let m = match *f {
                        MomentRef::Tracked(i) => self.tracked.get(i),
                        MomentRef::Base(i) => self.base.get(i).filter(|m| sys.is_known(m)),
                    }
                    .ok_or_else(|| {
                        Error::MissingBaseMoment(format!(
                            "dangling factor in update of E[{}]",
                            xi.render(&self.names)
                        ))
                    })?;
                    prod = prod.mul(m);
                }
                if prod != t.alpha {
                    return Err(Error::InvalidArgument(format!(
                        "factors of E[{}] do not multiply back",
                        t.alpha.render(&self.names)
                    )));
                }
            }
        }
        Ok(())
    }

    fn render_ref(&self, r: MomentRef) -> String {
        let m = match r {
            MomentRef::Tracked(i) => &self.tracked[i],
            MomentRef::Base(i) => &self.base[i],
        };
        format!("E[{}]_t", m.render(&self.names))
    }

    /// One line per expression, `E[xi]_{t+1} = ...`, tracked moments in
    /// graded order and terms highest degree first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tracked moments: {}", self.tracked.len());
        let _ = writeln!(out, "# known moments: {}", self.base.len());
        for (xi, e) in self.tracked.iter().zip(&self.exprs) {
            let mut rhs = String::new();
            let mut terms: Vec<&ExprTerm> = e.terms.iter().collect();
            terms.sort_by(|a, b| display_order(&a.alpha, &b.alpha));
            for (k, t) in terms.into_iter().enumerate() {
                let (sign, mag) = if t.coef < 0.0 { ('-', -t.coef) } else { ('+', t.coef) };
                if k == 0 {
                    if sign == '-' {
                        rhs.push('-');
                    }
                } else {
                    let _ = write!(rhs, " {sign} ");
                }
                let factors: Vec<String> = t.factors.iter().map(|f| self.render_ref(*f)).collect();
                if factors.is_empty() {
                    rhs.push_str(&fmt_coef(mag));
                } else if mag == 1.0 {
                    rhs.push_str(&factors.join("*"));
                } else {
                    let _ = write!(rhs, "{}*{}", fmt_coef(mag), factors.join("*"));
                }
            }
            if rhs.is_empty() {
                rhs.push('0');
            }
            let _ = writeln!(out, "E[{}]_{{t+1}} = {}", xi.render(&self.names), rhs);
        }
        out
    }
}

/// Call-local state of the recursive expansion.
#[derive(Debug, Clone)]
pub struct Expansion<'a> {
    sys: &'a PolySystem,
    graph: &'a DependenceGraph,
    cap: usize,
    /// Tracked moment -> symbolic terms `(coef, alpha, factors)`.
    z: BTreeMap<MultiIndex, Vec<(f64, MultiIndex, Vec<MultiIndex>)>>,
}

impl<'a> Expansion<'a> {
    pub fn new(sys: &'a PolySystem, graph: &'a DependenceGraph) -> Result<Self> {
        if graph.n_vars() != sys.n_vars() {
            return Err(Error::InvalidArgument(format!(
                "graph has {} vertices for {} variables",
                graph.n_vars(),
                sys.n_vars()
            )));
        }
        Ok(Expansion {
            sys,
            graph,
            cap: DEFAULT_EXPANSION_CAP,
            z: BTreeMap::new(),
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn contains(&self, xi: &MultiIndex) -> bool {
        self.z.contains_key(xi)
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    fn check_degree(&self, m: &MultiIndex) -> Result<()> {
        if m.degree() > MAX_MOMENT_DEGREE {
            return Err(Error::OrderLimit {
                requested: m.degree() as usize,
                limit: MAX_MOMENT_DEGREE as usize,
            });
        }
        Ok(())
    }

    /// Adds `xi` and everything its update needs. Already tracked moments
    /// are left alone.
    pub fn expand(&mut self, xi: &MultiIndex) -> Result<()> {
        if xi.is_one() {
            return Err(Error::InvalidArgument("cannot expand the constant moment".into()));
        }
        let mut pending = vec![xi.clone()];
        while let Some(cur) = pending.pop() {
            if self.z.contains_key(&cur) {
                continue;
            }
            self.check_degree(&cur)?;
            if self.z.len() >= self.cap {
                return Err(Error::ExpansionCap { cap: self.cap });
            }
            let p = self.sys.substitute(&cur)?;
            let mut terms = Vec::with_capacity(p.len());
            for (alpha, coef) in p.terms() {
                let factors = if alpha.is_one() {
                    Vec::new()
                } else {
                    factor_moment(alpha, self.graph)
                };
                for f in &factors {
                    self.check_degree(f)?;
                    if !self.sys.is_known(f) && !self.z.contains_key(f) && *f != cur {
                        pending.push(f.clone());
                    }
                }
                terms.push((coef, alpha.clone(), factors));
            }
            self.z.insert(cur, terms);
        }
        Ok(())
    }

    /// Resolves symbols to indices. Known factors become base references
    /// unless the moment is itself tracked.
    pub fn finish(self) -> MomentDynamics {
        let tracked: Vec<MultiIndex> = self.z.keys().cloned().collect();
        let mut base_set: BTreeSet<MultiIndex> = BTreeSet::new();
        for terms in self.z.values() {
            for (_, _, fs) in terms {
                for f in fs {
                    if !self.z.contains_key(f) {
                        base_set.insert(f.clone());
                    }
                }
            }
        }
        let base: Vec<MultiIndex> = base_set.into_iter().collect();
        let exprs = self
            .z
            .values()
            .map(|terms| Expression {
                terms: terms
                    .iter()
                    .map(|(coef, alpha, fs)| ExprTerm {
                        coef: *coef,
                        alpha: alpha.clone(),
                        factors: fs
                            .iter()
                            .map(|f| match tracked.binary_search(f) {
                                Ok(i) => MomentRef::Tracked(i),
                                Err(_) => MomentRef::Base(
                                    base.binary_search(f).expect("collected above"),
                                ),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        MomentDynamics {
            names: self.sys.names().to_vec(),
            tracked,
            exprs,
            base,
        }
    }
}

/// Runs the expansion from a single target.
pub fn expand(xi: &MultiIndex, sys: &PolySystem, graph: &DependenceGraph) -> Result<MomentDynamics> {
    let mut e = Expansion::new(sys, graph)?;
    e.expand(xi)?;
    Ok(e.finish())
}

/// Position targets `E[x^a y^b]` with `1 <= a + b <= order`.
pub fn position_targets(sys: &PolySystem, order: usize) -> Result<Vec<MultiIndex>> {
    let (x, y) = (sys.var("x")?, sys.var("y")?);
    let mut out = Vec::new();
    for n in 1..=order as u32 {
        for a in (0..=n).rev() {
            out.push(MultiIndex::from_pairs([(x, a), (y, n - a)]));
        }
    }
    Ok(out)
}

/// Expands every position moment up to `order`.
pub fn derive_position_moments(
    sys: &PolySystem,
    graph: &DependenceGraph,
    order: usize,
) -> Result<MomentDynamics> {
    if order == 0 || order as u32 > MAX_MOMENT_DEGREE {
        return Err(Error::OrderLimit {
            requested: order,
            limit: MAX_MOMENT_DEGREE as usize,
        });
    }
    derive_from_targets(sys, graph, &position_targets(sys, order)?)
}

pub fn derive_from_targets(
    sys: &PolySystem,
    graph: &DependenceGraph,
    targets: &[MultiIndex],
) -> Result<MomentDynamics> {
    let mut e = Expansion::new(sys, graph)?;
    for t in targets {
        e.expand(t)?;
    }
    Ok(e.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treering::poly::Poly;

    /// `x' = x + w`, `w` known: a random walk.
    fn walk() -> (PolySystem, DependenceGraph) {
        let mut s = PolySystem::new(["x", "w"]).unwrap();
        s.set_update(0, &Poly::var(0) + &Poly::var(1)).unwrap();
        s.mark_known(1).unwrap();
        (s, DependenceGraph::new(2))
    }

    #[test]
    fn random_walk_closes_on_powers() {
        let (s, g) = walk();
        let d = expand(&MultiIndex::var_pow(0, 3), &s, &g).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.base_moments().len(), 3);
        d.check_closure(&s).unwrap();
        let text = d.dump();
        assert!(text.contains("E[x^2]_{t+1} = E[x^2]_t + 2*E[x]_t*E[w]_t + E[w^2]_t"), "{text}");
    }

    #[test]
    fn cap_trips() {
        let (s, g) = walk();
        let mut e = Expansion::new(&s, &g).unwrap().with_cap(2);
        assert!(matches!(
            e.expand(&MultiIndex::var_pow(0, 4)),
            Err(Error::ExpansionCap { cap: 2 })
        ));
    }

    #[test]
    fn degree_limit() {
        let (s, g) = walk();
        assert!(matches!(
            expand(&MultiIndex::var_pow(0, 17), &s, &g),
            Err(Error::OrderLimit { .. })
        ));
    }

    #[test]
    fn self_referential_update_terminates() {
        // x' = x^2 would never close; x' = 2x does
        let mut s = PolySystem::new(["x"]).unwrap();
        s.set_update(0, Poly::var(0).scale(2.0)).unwrap();
        let d = expand(&MultiIndex::var(0), &s, &DependenceGraph::new(1)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.expressions()[0].eval(&[3.0], &[]), 6.0);
    }
}
