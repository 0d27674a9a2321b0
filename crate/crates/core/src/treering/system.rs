//! Polynomial transition systems `b_{t+1} = g(b_t)`.

use std::collections::BTreeSet;

use super::poly::{MultiIndex, Poly, VarId};
use crate::error::{Error, Result};

/// Named variables with polynomial updates.
///
/// Variables marked known have moments supplied by an external provider at
/// every step (noise terms, or state components independent of the rest).
/// A moment is known when every variable it involves is known.
#[derive(Debug, Clone)]
pub struct PolySystem {
    names: Vec<String>,
    updates: Vec<Option<Poly>>,
    known: BTreeSet<VarId>,
}

impl PolySystem {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::InvalidArgument("duplicate variable name".into()));
        }
        Ok(PolySystem {
            updates: vec![None; names.len()],
            names,
            known: BTreeSet::new(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var(&self, name: &str) -> Result<VarId> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UndeclaredVariable(name.into()))
    }

    pub fn set_update(&mut self, v: VarId, g: Poly) -> Result<()> {
        self.check(v)?;
        if let Some(bad) = g.terms().flat_map(|(m, _)| m.vars()).find(|u| *u >= self.n_vars()) {
            return Err(Error::UndeclaredVariable(format!("b{bad}")));
        }
        self.updates[v] = Some(g);
        Ok(())
    }

    pub fn update(&self, v: VarId) -> Option<&Poly> {
        self.updates.get(v).and_then(Option::as_ref)
    }

    pub fn mark_known(&mut self, v: VarId) -> Result<()> {
        self.check(v)?;
        self.known.insert(v);
        Ok(())
    }

    pub fn known_vars(&self) -> &BTreeSet<VarId> {
        &self.known
    }

    pub fn is_known(&self, alpha: &MultiIndex) -> bool {
        alpha.vars().all(|v| self.known.contains(&v))
    }

    fn check(&self, v: VarId) -> Result<()> {
        if v < self.n_vars() {
            Ok(())
        } else {
            Err(Error::UndeclaredVariable(format!("b{v}")))
        }
    }

    /// `prod_i g_i(b)^{xi_i}`, fully expanded.
    pub fn substitute(&self, xi: &MultiIndex) -> Result<Poly> {
        let mut out = Poly::one();
        for &(v, e) in xi.pairs() {
            let g = self.update(v).ok_or_else(|| {
                Error::UndeclaredVariable(
                    self.names.get(v).cloned().unwrap_or_else(|| format!("b{v}")),
                )
            })?;
            out = &out * &g.pow(e);
        }
        Ok(out)
    }

    pub fn render(&self, alpha: &MultiIndex) -> String {
        alpha.render(&self.names)
    }
}

/// Free-function form of [`PolySystem::substitute`].
pub fn substitute_dynamics(xi: &MultiIndex, sys: &PolySystem) -> Result<Poly> {
    sys.substitute(xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undeclared_variables() {
        let mut s = PolySystem::new(["x", "w"]).unwrap();
        assert!(s.var("z").is_err());
        assert!(s.set_update(0, Poly::var(5)).is_err());
        s.set_update(0, &Poly::var(0) + &Poly::var(1)).unwrap();
        // w has no update
        assert!(s.substitute(&MultiIndex::var(1)).is_err());
        let p = s.substitute(&MultiIndex::var_pow(0, 2)).unwrap();
        assert_eq!(p.len(), 3);
        assert!(PolySystem::new(["x", "x"]).is_err());
    }
}
