use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{LabError, Result};
use crate::permgrp::Perm;

/// Hard ceiling on enumerated group orders.
pub const CLOSURE_CAP: usize = 1 << 20;

/// The closure cap in force: [`CLOSURE_CAP`], lowered by `TDLC_CAP` if set.
pub fn default_cap() -> usize {
    std::env::var("TDLC_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map_or(CLOSURE_CAP, |c| c.min(CLOSURE_CAP))
}

/// Fully enumerated element list, sorted lexicographically by image arrays.
#[derive(Debug)]
pub struct Closure {
    elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
}

impl Closure {
    fn from_elements(mut elements: Vec<Perm>) -> Self {
        elements.sort();
        elements.dedup();
        let index = elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        Closure { elements, index }
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// A finite permutation group given by generators; the element closure is
/// computed once on first use.
#[derive(Clone)]
pub struct FiniteGroup {
    degree: usize,
    generators: Vec<Perm>,
    cap: usize,
    closure: OnceLock<std::result::Result<Arc<Closure>, LabError>>,
}

impl FiniteGroup {
    pub fn new(degree: usize, generators: Vec<Perm>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
            return Err(LabError::invalid(format!(
                "generator {g} has degree {} but the group has degree {degree}",
                g.degree()
            )));
        }
        Ok(FiniteGroup {
            degree,
            generators,
            cap: default_cap(),
            closure: OnceLock::new(),
        })
    }

    pub fn trivial(degree: usize) -> Self {
        FiniteGroup::new(degree, Vec::new()).expect("no generators")
    }

    pub fn symmetric(n: usize) -> Self {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Perm::from_cycles(n, &[(0..n).collect()]).unwrap());
            gens.push(Perm::from_cycles(n, &[vec![0, 1]]).unwrap());
        }
        FiniteGroup::new(n, gens).unwrap()
    }

    pub fn alternating(n: usize) -> Self {
        let gens = (2..n)
            .map(|k| Perm::from_cycles(n, &[vec![0, 1, k]]).unwrap())
            .collect();
        FiniteGroup::new(n, gens).unwrap()
    }

    pub fn cyclic(n: usize) -> Self {
        let gens = if n >= 2 {
            vec![Perm::from_cycles(n, &[(0..n).collect()]).unwrap()]
        } else {
            Vec::new()
        };
        FiniteGroup::new(n, gens).unwrap()
    }

    /// Parses generators in cycle notation.
    pub fn from_cycle_strings(degree: usize, gens: &[&str]) -> Result<Self> {
        let gens = gens
            .iter()
            .map(|g| Perm::parse(g, degree))
            .collect::<Result<Vec<_>>>()?;
        FiniteGroup::new(degree, gens)
    }

    /// Group whose element set is known in advance (it must be closed).
    pub fn from_elements(degree: usize, elements: Vec<Perm>) -> Self {
        let closure = Closure::from_elements(elements);
        let generators = greedy_generators(degree, closure.elements());
        let cell = OnceLock::new();
        let _ = cell.set(Ok(Arc::new(closure)));
        FiniteGroup {
            degree,
            generators,
            cap: default_cap(),
            closure: cell,
        }
    }

    /// Lowers the closure cap for this group (it can never exceed [`CLOSURE_CAP`]).
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.min(CLOSURE_CAP);
        self.closure = OnceLock::new();
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn closure(&self) -> Result<&Closure> {
        self.closure
            .get_or_init(|| enumerate(self.degree, &self.generators, self.cap).map(Arc::new))
            .as_ref()
            .map(|c| c.as_ref())
            .map_err(Clone::clone)
    }

    pub fn elements(&self) -> Result<&[Perm]> {
        self.closure().map(Closure::elements)
    }

    pub fn order(&self) -> Result<usize> {
        self.closure().map(Closure::len)
    }

    pub fn contains(&self, p: &Perm) -> Result<bool> {
        Ok(p.degree() == self.degree && self.closure()?.index_of(p).is_some())
    }

    pub fn identity(&self) -> Perm {
        Perm::identity(self.degree)
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.iter().all(Perm::is_identity)
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .all(|a| self.generators.iter().all(|b| a.compose(b) == b.compose(a)))
    }

    pub fn is_subgroup_of(&self, other: &FiniteGroup) -> Result<bool> {
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Same element set.
    pub fn same_elements(&self, other: &FiniteGroup) -> Result<bool> {
        Ok(self.degree == other.degree && self.elements()? == other.elements()?)
    }

    /// Orbit of a point under the generators, sorted.
    pub fn orbit(&self, point: usize) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        seen[point] = true;
        let mut queue = VecDeque::from([point]);
        let mut out = vec![point];
        while let Some(x) = queue.pop_front() {
            for g in &self.generators {
                let y = g.apply(x);
                if !seen[y] {
                    seen[y] = true;
                    out.push(y);
                    queue.push_back(y);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// All orbits, ordered by least point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for p in 0..self.degree {
            if !seen[p] {
                let orb = self.orbit(p);
                for &x in &orb {
                    seen[x] = true;
                }
                out.push(orb);
            }
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || self.orbit(0).len() == self.degree
    }

    /// Stabiliser of a point, by filtering the closure.
    pub fn point_stabiliser(&self, point: usize) -> Result<FiniteGroup> {
        let elems: Vec<Perm> = self
            .elements()?
            .iter()
            .filter(|g| g.fixes(point))
            .cloned()
            .collect();
        Ok(FiniteGroup::from_elements(self.degree, elems))
    }

    /// Subgroup generated by the given elements of this group.
    pub fn subgroup(&self, generators: Vec<Perm>) -> Result<FiniteGroup> {
        Ok(FiniteGroup::new(self.degree, generators)?.with_cap(self.cap))
    }

    /// Direct product acting on the disjoint union of the point sets.
    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
        let m = a.degree + b.degree;
        let lift_a = |p: &Perm| {
            let mut v: Vec<usize> = p.images().collect();
            v.extend(a.degree..m);
            Perm::from_images(v).unwrap()
        };
        let lift_b = |p: &Perm| {
            let mut v: Vec<usize> = (0..a.degree).collect();
            v.extend(p.images().map(|x| x + a.degree));
            Perm::from_images(v).unwrap()
        };
        let gens = a
            .generators
            .iter()
            .map(lift_a)
            .chain(b.generators.iter().map(lift_b))
            .collect();
        FiniteGroup::new(m, gens).unwrap()
    }
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup(deg {}, gens [", self.degree)?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("])")
    }
}

fn enumerate(degree: usize, generators: &[Perm], cap: usize) -> Result<Closure> {
    let id = Perm::identity(degree);
    let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
    let mut elements = vec![id];
    let mut next = 0;
    while next < elements.len() {
        let x = elements[next].clone();
        next += 1;
        for g in generators {
            let y = g.compose(&x);
            if !seen.contains(&y) {
                if elements.len() >= cap {
                    return Err(LabError::ClosureCapExceeded { cap });
                }
                seen.insert(y.clone());
                elements.push(y);
            }
        }
    }
    Ok(Closure::from_elements(elements))
}

/// A small generating set for a closed element list, chosen greedily in
/// lexicographic order.
pub(crate) fn greedy_generators(degree: usize, elements: &[Perm]) -> Vec<Perm> {
    let mut gens: Vec<Perm> = Vec::new();
    let mut current: HashSet<Perm> = HashSet::from([Perm::identity(degree)]);
    let target = elements.len();
    for e in elements {
        if current.len() == target {
            break;
        }
        if current.contains(e) {
            continue;
        }
        gens.push(e.clone());
        // Extend the closure by the new generator.
        let mut list: Vec<Perm> = current.iter().cloned().collect();
        let mut i = 0;
        while i < list.len() {
            let x = list[i].clone();
            i += 1;
            for g in &gens {
                let y = g.compose(&x);
                if current.insert(y.clone()) {
                    list.push(y);
                }
            }
        }
    }
    gens
}

/// A subgroup together with the group it was taken from.
#[derive(Clone, Debug)]
pub struct SubgroupHandle {
    parent: Arc<FiniteGroup>,
    group: FiniteGroup,
}

impl SubgroupHandle {
    /// Wraps generators, checking that they lie in `parent`.
    pub fn new(parent: Arc<FiniteGroup>, generators: Vec<Perm>) -> Result<Self> {
        for g in &generators {
            if !parent.contains(g)? {
                return Err(LabError::invalid(format!(
                    "{g} does not lie in the parent group"
                )));
            }
        }
        let group = parent.subgroup(generators)?;
        Ok(SubgroupHandle { parent, group })
    }

    pub(crate) fn from_group(parent: Arc<FiniteGroup>, group: FiniteGroup) -> Self {
        SubgroupHandle { parent, group }
    }

    pub fn parent(&self) -> &FiniteGroup {
        &self.parent
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn generators(&self) -> &[Perm] {
        self.group.generators()
    }

    pub fn order(&self) -> Result<usize> {
        self.group.order()
    }

    pub fn elements(&self) -> Result<&[Perm]> {
        self.group.elements()
    }

    pub fn is_trivial(&self) -> Result<bool> {
        Ok(self.order()? == 1)
    }
}
