//! Normal structure: closures, derived series, the normal-subgroup lattice
//! and the cores and residuals built from it.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::permgrp::labels::{label_simple, SimpleLabel};
use crate::permgrp::{FiniteGroup, Perm, SubgroupHandle};

/// A set of primes.
pub type Primes = BTreeSet<u64>;

/// Prime factorisation as an ascending list with multiplicity.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Whether every prime divisor of `n` lies in `pi`.
pub fn is_pi_number(n: u64, pi: &Primes) -> bool {
    prime_factors(n).iter().all(|p| pi.contains(p))
}

fn handle(g: &Arc<FiniteGroup>, h: FiniteGroup) -> SubgroupHandle {
    SubgroupHandle::from_group(g.clone(), h)
}

/// Subgroup generated by `gens` together with all its conjugates under `g`.
pub(crate) fn normal_closure_of(g: &FiniteGroup, gens: &[Perm]) -> Result<FiniteGroup> {
    let mut current: Vec<Perm> = gens.iter().filter(|p| !p.is_identity()).cloned().collect();
    let mut sub = g.subgroup(current.clone())?;
    let mut i = 0;
    while i < current.len() {
        let n = current[i].clone();
        i += 1;
        for s in g.generators() {
            let c = s.conjugate(&n);
            if !sub.contains(&c)? {
                current.push(c);
                sub = g.subgroup(current.clone())?;
            }
        }
    }
    sub.closure()?;
    Ok(sub)
}

pub fn normal_closure(g: &Arc<FiniteGroup>, s: &SubgroupHandle) -> Result<SubgroupHandle> {
    g.closure()?;
    Ok(handle(g, normal_closure_of(g, s.generators())?))
}

pub(crate) fn derived_of(g: &FiniteGroup) -> Result<FiniteGroup> {
    let gens = g.generators();
    let mut comms = Vec::new();
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[..i] {
            let c = Perm::commutator(a, b);
            if !c.is_identity() {
                comms.push(c);
            }
        }
    }
    normal_closure_of(g, &comms)
}

pub fn derived_subgroup(g: &Arc<FiniteGroup>) -> Result<SubgroupHandle> {
    Ok(handle(g, derived_of(g)?))
}

/// `G = G⁰ ≥ G¹ ≥ …` down to the first repeated term (included once).
pub fn derived_series(g: &FiniteGroup) -> Result<Vec<FiniteGroup>> {
    let mut series = vec![g.clone()];
    loop {
        let last = series.last().expect("nonempty");
        let next = derived_of(last)?;
        if next.order()? == last.order()? {
            return Ok(series);
        }
        series.push(next);
    }
}

pub fn is_soluble(g: &FiniteGroup) -> Result<bool> {
    Ok(derived_series(g)?.last().expect("nonempty").order()? == 1)
}

/// Conjugacy classes as sorted lists of element indices, ordered by least index.
pub fn conjugacy_class_indices(g: &FiniteGroup) -> Result<Vec<Vec<usize>>> {
    let cl = g.closure()?;
    let mut seen = vec![false; cl.len()];
    let mut out = Vec::new();
    for start in 0..cl.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut class = vec![start];
        let mut i = 0;
        while i < class.len() {
            let x = &cl.elements()[class[i]];
            i += 1;
            for s in g.generators() {
                let y = cl.index_of(&s.conjugate(x)).expect("closed");
                if !seen[y] {
                    seen[y] = true;
                    class.push(y);
                }
            }
        }
        class.sort_unstable();
        out.push(class);
    }
    Ok(out)
}

pub fn conjugacy_classes(g: &FiniteGroup) -> Result<Vec<Vec<Perm>>> {
    let cl = g.closure()?;
    Ok(conjugacy_class_indices(g)?
        .into_iter()
        .map(|c| c.into_iter().map(|i| cl.elements()[i].clone()).collect())
        .collect())
}

/// Element set of a subgroup of `g` as a sorted index list.
fn index_set(g: &FiniteGroup, h: &FiniteGroup) -> Result<Vec<usize>> {
    let cl = g.closure()?;
    let mut v: Vec<usize> = h
        .elements()?
        .iter()
        .map(|p| cl.index_of(p).expect("subgroup of g"))
        .collect();
    v.sort_unstable();
    Ok(v)
}

/// All normal subgroups of `g`, sorted by order and then by element list.
///
/// Each normal subgroup is generated by the conjugacy classes it contains,
/// so the lattice is the closure of the class-generated subgroups under
/// products.
pub fn normal_subgroups(g: &FiniteGroup) -> Result<Vec<FiniteGroup>> {
    let cl = g.closure()?;
    let classes = conjugacy_class_indices(g)?;
    let mut atoms: Vec<FiniteGroup> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let trivial = g.subgroup(Vec::new())?;
    seen.insert(index_set(g, &trivial)?);
    let mut members = vec![trivial];
    for class in &classes {
        let rep = &cl.elements()[class[0]];
        if rep.is_identity() {
            continue;
        }
        let gens: Vec<Perm> = class.iter().map(|&i| cl.elements()[i].clone()).collect();
        let sub = FiniteGroup::new(g.degree(), gens)?.with_cap(g.cap());
        let key = index_set(g, &sub)?;
        let small = FiniteGroup::from_elements(g.degree(), sub.elements()?.to_vec());
        if seen.insert(key) {
            members.push(small.clone());
        }
        if !atoms
            .iter()
            .any(|a| a.same_elements(&small).unwrap_or(false))
        {
            atoms.push(small);
        }
    }
    let mut i = 0;
    while i < members.len() {
        for a in &atoms {
            let m = &members[i];
            if a.is_subgroup_of(m)? {
                continue;
            }
            let gens: Vec<Perm> = m
                .generators()
                .iter()
                .chain(a.generators())
                .cloned()
                .collect();
            let prod = FiniteGroup::new(g.degree(), gens)?.with_cap(g.cap());
            let key = index_set(g, &prod)?;
            if seen.insert(key) {
                members.push(FiniteGroup::from_elements(
                    g.degree(),
                    prod.elements()?.to_vec(),
                ));
            }
        }
        i += 1;
    }
    let mut keyed: Vec<(usize, Vec<Perm>, FiniteGroup)> = members
        .into_iter()
        .map(|m| {
            let els = m.elements().map(<[Perm]>::to_vec);
            els.map(|e| (e.len(), e, m))
        })
        .collect::<Result<_>>()?;
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(keyed.into_iter().map(|(_, _, m)| m).collect())
}

/// Nontrivial normal subgroups containing no smaller nontrivial normal subgroup.
pub fn minimal_normal_subgroups(g: &FiniteGroup) -> Result<Vec<FiniteGroup>> {
    let lattice = normal_subgroups(g)?;
    let nontrivial: Vec<&FiniteGroup> = lattice
        .iter()
        .filter(|n| n.order().unwrap_or(1) > 1)
        .collect();
    let mut out = Vec::new();
    for n in &nontrivial {
        let mut minimal = true;
        for m in &nontrivial {
            if m.order()? < n.order()? && m.is_subgroup_of(n)? {
                minimal = false;
                break;
            }
        }
        if minimal {
            out.push((*n).clone());
        }
    }
    Ok(out)
}

/// Proper normal subgroups that are maximal among proper normal subgroups.
pub fn maximal_normal_subgroups(g: &FiniteGroup) -> Result<Vec<FiniteGroup>> {
    let order = g.order()?;
    let lattice = normal_subgroups(g)?;
    let proper: Vec<&FiniteGroup> = lattice
        .iter()
        .filter(|n| n.order().unwrap_or(0) < order)
        .collect();
    let mut out = Vec::new();
    for n in &proper {
        let mut maximal = true;
        for m in &proper {
            if m.order()? > n.order()? && n.is_subgroup_of(m)? {
                maximal = false;
                break;
            }
        }
        if maximal {
            out.push((*n).clone());
        }
    }
    Ok(out)
}

pub fn is_simple(g: &FiniteGroup) -> Result<bool> {
    let order = g.order()?;
    if order == 1 {
        return Ok(false);
    }
    let pf = prime_factors(order as u64);
    if pf.iter().all(|&p| p == pf[0]) {
        return Ok(pf.len() == 1);
    }
    Ok(normal_subgroups(g)?.len() == 2)
}

/// Composition factors with multiplicity, sorted.
///
/// Abelian layers of the derived series contribute one cyclic factor per
/// prime divisor of their order; a perfect residual is split along a
/// maximal normal subgroup and the pieces treated recursively.
pub fn composition_factors(g: &FiniteGroup) -> Result<Vec<SimpleLabel>> {
    let mut out = Vec::new();
    collect_factors(g, &mut out)?;
    out.sort();
    Ok(out)
}

fn collect_factors(g: &FiniteGroup, out: &mut Vec<SimpleLabel>) -> Result<()> {
    let series = derived_series(g)?;
    for pair in series.windows(2) {
        let index = pair[0].order()? / pair[1].order()?;
        out.extend(
            prime_factors(index as u64)
                .into_iter()
                .map(SimpleLabel::Cyclic),
        );
    }
    let residual = series.last().expect("nonempty");
    let order = residual.order()?;
    if order == 1 {
        return Ok(());
    }
    let maximal = maximal_normal_subgroups(residual)?;
    let m = maximal
        .into_iter()
        .next()
        .ok_or_else(|| LabError::invalid("nontrivial group without a maximal normal subgroup"))?;
    out.push(label_simple(order / m.order()?));
    collect_factors(&m, out)
}

/// Largest normal π-subgroup `O_π(G)`.
pub fn pi_core(g: &Arc<FiniteGroup>, pi: &Primes) -> Result<SubgroupHandle> {
    let lattice = normal_subgroups(g)?;
    let best = lattice
        .into_iter()
        .rev()
        .find(|n| n.order().is_ok_and(|o| is_pi_number(o as u64, pi)))
        .expect("trivial subgroup qualifies");
    Ok(handle(g, best))
}

/// Smallest normal subgroup with π-group quotient `O^π(G)`: the subgroup
/// generated by all π′-elements.
pub fn pi_residual(g: &Arc<FiniteGroup>, pi: &Primes) -> Result<SubgroupHandle> {
    Ok(handle(g, pi_residual_of(g, pi)?))
}

pub(crate) fn pi_residual_of(g: &FiniteGroup, pi: &Primes) -> Result<FiniteGroup> {
    let gens: Vec<Perm> = g
        .elements()?
        .iter()
        .filter(|x| {
            !x.is_identity()
                && prime_factors(x.order() as u64)
                    .iter()
                    .all(|p| !pi.contains(p))
        })
        .cloned()
        .collect();
    let sub = FiniteGroup::new(g.degree(), gens)?.with_cap(g.cap());
    Ok(FiniteGroup::from_elements(
        g.degree(),
        sub.elements()?.to_vec(),
    ))
}

/// Largest soluble normal subgroup `O_∞(G)`.
pub fn prosoluble_core(g: &Arc<FiniteGroup>) -> Result<SubgroupHandle> {
    Ok(handle(g, soluble_radical(g)?))
}

pub(crate) fn soluble_radical(g: &FiniteGroup) -> Result<FiniteGroup> {
    for n in normal_subgroups(g)?.into_iter().rev() {
        if is_soluble(&n)? {
            return Ok(n);
        }
    }
    unreachable!("the trivial subgroup is soluble")
}

/// Smallest normal subgroup with soluble quotient `O^∞(G)`: the last term
/// of the derived series.
pub fn prosoluble_residual(g: &Arc<FiniteGroup>) -> Result<SubgroupHandle> {
    Ok(handle(g, derived_series(g)?.pop().expect("nonempty")))
}

/// Intersection of all maximal normal subgroups.
pub fn melnikov(g: &Arc<FiniteGroup>) -> Result<SubgroupHandle> {
    let maximal = maximal_normal_subgroups(g)?;
    let mut acc: Option<Vec<Perm>> = None;
    for m in &maximal {
        let els: HashSet<&Perm> = m.elements()?.iter().collect();
        acc = Some(match acc {
            None => m.elements()?.to_vec(),
            Some(prev) => prev.into_iter().filter(|p| els.contains(p)).collect(),
        });
    }
    let els = acc.unwrap_or_else(|| g.elements().map(<[Perm]>::to_vec).unwrap_or_default());
    Ok(handle(g, FiniteGroup::from_elements(g.degree(), els)))
}

/// Exhibits a characteristically simple group as `F^k`.
pub fn char_simple_decompose(g: &FiniteGroup) -> Result<(SimpleLabel, usize)> {
    let order = g.order()?;
    if order == 1 {
        return Err(LabError::DecompositionNotFound("trivial group".into()));
    }
    if g.is_abelian() {
        let primes: BTreeSet<u64> = prime_factors(order as u64).into_iter().collect();
        let p = *primes.iter().next().expect("order > 1");
        let elementary = primes.len() == 1
            && g.elements()?
                .iter()
                .all(|x| x.is_identity() || x.order() as u64 == p);
        if !elementary {
            return Err(LabError::DecompositionNotFound(format!(
                "abelian group of order {order} is not elementary abelian"
            )));
        }
        return Ok((SimpleLabel::Cyclic(p), prime_factors(order as u64).len()));
    }
    let minimal = minimal_normal_subgroups(g)?;
    let first = &minimal[0];
    let t = first.order()?;
    for m in &minimal {
        if m.order()? != t || m.is_abelian() || !is_simple(m)? {
            return Err(LabError::DecompositionNotFound(format!(
                "minimal normal subgroup of order {} is not a nonabelian simple group of order {t}",
                m.order()?
            )));
        }
    }
    for (i, a) in minimal.iter().enumerate() {
        for b in &minimal[..i] {
            let commute = a
                .generators()
                .iter()
                .all(|x| b.generators().iter().all(|y| x.compose(y) == y.compose(x)));
            if !commute {
                return Err(LabError::DecompositionNotFound(
                    "minimal normal subgroups do not commute".into(),
                ));
            }
        }
    }
    let k = minimal.len();
    if t.checked_pow(k as u32) != Some(order) {
        return Err(LabError::DecompositionNotFound(format!(
            "{k} minimal normal subgroups of order {t} do not fill a group of order {order}"
        )));
    }
    Ok((label_simple(t), k))
}

/// Checks one instance of the derived-subgroup lemma: with `N` the normal
/// closure of `xs`, if some `x ∈ N` has `[A, xAx⁻¹] = 1` then `[A, A] ≤ N`.
/// Returns false only when the hypothesis holds and the conclusion fails.
pub fn fitting_check(g: &Arc<FiniteGroup>, a: &SubgroupHandle, xs: &[Perm]) -> Result<bool> {
    let n = normal_closure_of(g, xs)?;
    let agens = a.generators();
    let hypothesis = n.elements()?.iter().any(|x| {
        agens.iter().all(|p| {
            agens.iter().all(|q| {
                let xq = x.conjugate(q);
                p.compose(&xq) == xq.compose(p)
            })
        })
    });
    if !hypothesis {
        return Ok(true);
    }
    let derived = derived_of(a.group())?;
    derived.is_subgroup_of(&n)
}

/// Whether `h` normalises `k` (both inside a common group).
pub fn normalises(h: &FiniteGroup, k: &FiniteGroup) -> Result<bool> {
    for x in h.generators() {
        for y in k.generators() {
            if !k.contains(&x.conjugate(y))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(g: FiniteGroup) -> Arc<FiniteGroup> {
        Arc::new(g)
    }

    #[test]
    fn closure_examples() {
        let s3 = arc(FiniteGroup::symmetric(3));
        let t = SubgroupHandle::new(s3.clone(), vec![Perm::parse("(0 1)", 3).unwrap()]).unwrap();
        assert_eq!(normal_closure(&s3, &t).unwrap().order().unwrap(), 6);
        let a4 = arc(FiniteGroup::alternating(4));
        let v =
            SubgroupHandle::new(a4.clone(), vec![Perm::parse("(0 1)(2 3)", 4).unwrap()]).unwrap();
        assert_eq!(normal_closure(&a4, &v).unwrap().order().unwrap(), 4);
        let triv = SubgroupHandle::new(a4.clone(), vec![]).unwrap();
        assert_eq!(normal_closure(&a4, &triv).unwrap().order().unwrap(), 1);
    }

    #[test]
    fn derived_examples() {
        let s3 = arc(FiniteGroup::symmetric(3));
        assert_eq!(derived_subgroup(&s3).unwrap().order().unwrap(), 3);
        let v4 = arc(FiniteGroup::from_cycle_strings(4, &["(0 1)(2 3)", "(0 2)(1 3)"]).unwrap());
        assert_eq!(derived_subgroup(&v4).unwrap().order().unwrap(), 1);
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(
            normal_subgroups(&FiniteGroup::symmetric(4)).unwrap().len(),
            4
        );
        assert_eq!(
            normal_subgroups(&FiniteGroup::alternating(5))
                .unwrap()
                .len(),
            2
        );
        assert_eq!(normal_subgroups(&FiniteGroup::cyclic(6)).unwrap().len(), 4);
    }

    #[test]
    fn factor_examples() {
        let s4 = composition_factors(&FiniteGroup::symmetric(4)).unwrap();
        assert_eq!(
            s4,
            vec![
                SimpleLabel::Cyclic(2),
                SimpleLabel::Cyclic(2),
                SimpleLabel::Cyclic(2),
                SimpleLabel::Cyclic(3)
            ]
        );
        assert_eq!(
            composition_factors(&FiniteGroup::alternating(5)).unwrap(),
            vec![SimpleLabel::Alternating(5)]
        );
    }

    #[test]
    fn cores_and_residuals() {
        let two: Primes = [2].into();
        let s4 = arc(FiniteGroup::symmetric(4));
        assert_eq!(pi_core(&s4, &two).unwrap().order().unwrap(), 4);
        let s3 = arc(FiniteGroup::symmetric(3));
        assert_eq!(pi_core(&s3, &two).unwrap().order().unwrap(), 1);
        assert_eq!(pi_residual(&s3, &two).unwrap().order().unwrap(), 3);
        assert_eq!(prosoluble_residual(&s4).unwrap().order().unwrap(), 1);
        let a5 = arc(FiniteGroup::alternating(5));
        assert_eq!(prosoluble_residual(&a5).unwrap().order().unwrap(), 60);
        assert_eq!(prosoluble_core(&a5).unwrap().order().unwrap(), 1);
    }

    #[test]
    fn melnikov_examples() {
        assert_eq!(
            melnikov(&arc(FiniteGroup::symmetric(3)))
                .unwrap()
                .order()
                .unwrap(),
            3
        );
        assert_eq!(
            melnikov(&arc(FiniteGroup::alternating(5)))
                .unwrap()
                .order()
                .unwrap(),
            1
        );
        let v4 = arc(FiniteGroup::from_cycle_strings(4, &["(0 1)(2 3)", "(0 2)(1 3)"]).unwrap());
        assert_eq!(melnikov(&v4).unwrap().order().unwrap(), 1);
    }

    #[test]
    fn char_simple_examples() {
        let v4 = FiniteGroup::from_cycle_strings(4, &["(0 1)(2 3)", "(0 2)(1 3)"]).unwrap();
        assert_eq!(
            char_simple_decompose(&v4).unwrap(),
            (SimpleLabel::Cyclic(2), 2)
        );
        assert_eq!(
            char_simple_decompose(&FiniteGroup::alternating(5)).unwrap(),
            (SimpleLabel::Alternating(5), 1)
        );
        assert!(matches!(
            char_simple_decompose(&FiniteGroup::symmetric(3)),
            Err(LabError::DecompositionNotFound(_))
        ));
    }

    #[test]
    fn a5_squared_decomposes() {
        let a5 = FiniteGroup::alternating(5);
        let g = FiniteGroup::direct_product(&a5, &a5);
        assert_eq!(
            char_simple_decompose(&g).unwrap(),
            (SimpleLabel::Alternating(5), 2)
        );
    }
}
