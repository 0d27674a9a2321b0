//! Dependence graphs and moment factorization over connected components.

use std::collections::BTreeSet;

use super::poly::{MultiIndex, VarId};
use crate::error::{Error, Result};

/// Undirected graph over the registered variables. Variables in different
/// connected components of an induced subgraph are independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceGraph {
    n_vars: usize,
    edges: BTreeSet<(VarId, VarId)>,
}

impl DependenceGraph {
    pub fn new(n_vars: usize) -> Self {
        DependenceGraph {
            n_vars,
            edges: BTreeSet::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn add_edge(&mut self, a: VarId, b: VarId) -> Result<()> {
        if a == b {
            return Err(Error::InvalidArgument(format!("self-loop on variable {a}")));
        }
        if a >= self.n_vars || b >= self.n_vars {
            return Err(Error::UndeclaredVariable(format!("{}", a.max(b))));
        }
        self.edges.insert((a.min(b), a.max(b)));
        Ok(())
    }

    pub fn with_edges(n_vars: usize, edges: &[(VarId, VarId)]) -> Result<Self> {
        let mut g = DependenceGraph::new(n_vars);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn has_edge(&self, a: VarId, b: VarId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.edges.iter().copied()
    }

    /// Connected components of the subgraph induced by `vars`, each sorted,
    /// ordered by smallest member.
    pub fn components(&self, vars: &[VarId]) -> Vec<Vec<VarId>> {
        let mut label: Vec<usize> = (0..vars.len()).collect();
        fn find(label: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while label[r] != r {
                r = label[r];
            }
            label[i] = r;
            r
        }
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                if self.has_edge(vars[i], vars[j]) {
                    let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut groups: Vec<Vec<VarId>> = Vec::new();
        let mut root_of: Vec<(usize, usize)> = Vec::new();
        for i in 0..vars.len() {
            let r = find(&mut label, i);
            match root_of.iter().find(|(root, _)| *root == r) {
                Some(&(_, g)) => groups[g].push(vars[i]),
                None => {
                    root_of.push((r, groups.len()));
                    groups.push(vec![vars[i]]);
                }
            }
        }
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort();
        groups
    }
}

/// Splits `alpha` over the connected components of the subgraph induced by
/// its support. `E[b^alpha]` is the product of the factor moments.
pub fn factor_moment(alpha: &MultiIndex, g: &DependenceGraph) -> Vec<MultiIndex> {
    let support: Vec<VarId> = alpha.vars().collect();
    g.components(&support)
        .into_iter()
        .map(|comp| alpha.restrict(|v| comp.binary_search(&v).is_ok()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        let mut g = DependenceGraph::new(3);
        assert!(g.add_edge(1, 1).is_err());
        assert!(g.add_edge(0, 3).is_err());
        assert!(g.add_edge(2, 0).is_ok());
        assert!(g.has_edge(0, 2));
    }

    #[test]
    fn chain_is_one_component() {
        let g = DependenceGraph::with_edges(4, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.components(&[0, 1, 2, 3]), vec![vec![0, 1, 2], vec![3]]);
        // removing the middle vertex disconnects the chain
        assert_eq!(g.components(&[0, 2]), vec![vec![0], vec![2]]);
    }

    #[test]
    fn factors_multiply_back() {
        let g = DependenceGraph::with_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let a = MultiIndex::from_pairs([(0, 2), (1, 1), (2, 3), (3, 1)]);
        let f = factor_moment(&a, &g);
        assert_eq!(f.len(), 2);
        let back = f.iter().fold(MultiIndex::one(), |acc, m| acc.mul(m));
        assert_eq!(back, a);
    }
}
