//! Block systems and (quasi-)primitivity.

use std::collections::BTreeSet;

use crate::error::{LabError, Result};
use crate::permgrp::normal::minimal_normal_subgroups;
use crate::permgrp::FiniteGroup;

/// A partition of the points into blocks, each block sorted, blocks ordered
/// by least point.
pub type BlockSystem = Vec<Vec<usize>>;

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }

    fn classes(&mut self) -> BlockSystem {
        let n = self.0.len();
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for x in 0..n {
            let r = self.find(x);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(x);
        }
        out
    }
}

/// Finest invariant partition in which the given pairs share blocks.
fn invariant_closure(g: &FiniteGroup, pairs: &[(usize, usize)]) -> BlockSystem {
    let mut uf = UnionFind::new(g.degree());
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in pairs {
        if uf.union(a, b) {
            queue.push((a, b));
        }
    }
    while let Some((a, b)) = queue.pop() {
        for s in g.generators() {
            let (x, y) = (s.apply(a), s.apply(b));
            if uf.union(x, y) {
                queue.push((x, y));
            }
        }
    }
    uf.classes()
}

fn require_transitive(g: &FiniteGroup) -> Result<()> {
    if g.is_transitive() {
        Ok(())
    } else {
        Err(LabError::NotTransitive { degree: g.degree() })
    }
}

/// All nontrivial proper block systems.
///
/// Systems generated by a single pair `{0, b}` are found first; every block
/// system is the join of such systems, so the list is then closed under joins.
pub fn block_systems(g: &FiniteGroup) -> Result<Vec<BlockSystem>> {
    require_transitive(g)?;
    let m = g.degree();
    let mut found: BTreeSet<BlockSystem> = BTreeSet::new();
    for b in 1..m {
        let sys = invariant_closure(g, &[(0, b)]);
        if sys.len() > 1 {
            found.insert(sys);
        }
    }
    loop {
        let list: Vec<BlockSystem> = found.iter().cloned().collect();
        let mut grew = false;
        for (i, p) in list.iter().enumerate() {
            for q in &list[..i] {
                let pairs: Vec<(usize, usize)> = p
                    .iter()
                    .chain(q.iter())
                    .flat_map(|blk| blk.windows(2).map(|w| (w[0], w[1])))
                    .collect();
                let join = invariant_closure(g, &pairs);
                if join.len() > 1 && found.insert(join) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    Ok(found.into_iter().collect())
}

pub fn is_primitive(g: &FiniteGroup) -> Result<bool> {
    Ok(block_systems(g)?.is_empty())
}

/// Every nontrivial normal subgroup is transitive; equivalently every
/// minimal normal subgroup is.
pub fn is_quasi_primitive(g: &FiniteGroup) -> Result<bool> {
    require_transitive(g)?;
    Ok(minimal_normal_subgroups(g)?
        .iter()
        .all(FiniteGroup::is_transitive))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_four_has_one_system() {
        let c4 = FiniteGroup::from_cycle_strings(4, &["(0 1 2 3)"]).unwrap();
        assert_eq!(
            block_systems(&c4).unwrap(),
            vec![vec![vec![0, 2], vec![1, 3]]]
        );
        assert!(!is_primitive(&c4).unwrap());
    }

    #[test]
    fn symmetric_three_is_primitive() {
        assert!(is_primitive(&FiniteGroup::symmetric(3)).unwrap());
        assert!(is_quasi_primitive(&FiniteGroup::symmetric(3)).unwrap());
    }

    #[test]
    fn regular_klein_is_not_quasi_primitive() {
        let v4 = FiniteGroup::from_cycle_strings(4, &["(0 1)(2 3)", "(0 2)(1 3)"]).unwrap();
        assert!(!is_quasi_primitive(&v4).unwrap());
        assert_eq!(block_systems(&v4).unwrap().len(), 3);
    }

    #[test]
    fn intransitive_is_rejected() {
        let g = FiniteGroup::from_cycle_strings(4, &["(0 1)"]).unwrap();
        assert_eq!(
            block_systems(&g),
            Err(LabError::NotTransitive { degree: 4 })
        );
    }
}
