//! Brute-force reference implementations shared by the integration tests.
//!
//! Nothing here calls into `tdlc_core::permgrp`: permutations are plain image
//! vectors, groups are explicit element sets, and every subgroup lattice
//! question is answered by exhaustive search.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use tdlc_core::permgrp::{FiniteGroup, Perm};
use tdlc_core::specfile::GroupSpec;

pub type P = Vec<usize>;
pub type Set = BTreeSet<P>;

/// `(name, degree, generators in cycle notation)`, all of order at most 200.
pub const CORPUS: [(&str, usize, &[&str]); 9] = [
    ("S3", 3, &["(0 1 2)", "(0 1)"]),
    ("A4", 4, &["(0 1 2)", "(1 2 3)"]),
    ("S4", 4, &["(0 1 2 3)", "(0 1)"]),
    ("D8", 4, &["(0 1 2 3)", "(0 2)"]),
    ("C2^3", 6, &["(0 1)", "(2 3)", "(4 5)"]),
    ("S3xS3", 6, &["(0 1 2)", "(0 1)", "(3 4 5)", "(3 4)"]),
    ("F21", 7, &["(0 1 2 3 4 5 6)", "(1 2 4)(3 6 5)"]),
    ("A5", 5, &["(0 1 2 3 4)", "(0 1 2)"]),
    ("GL(3,2)", 7, &["(0 1 2 3 4 5 6)", "(0 1)(2 5)"]),
];

/// Independent cycle-notation reader.
pub fn parse_cycles(text: &str, degree: usize) -> P {
    let mut img: P = (0..degree).collect();
    for cyc in text
        .split(')')
        .map(|c| c.trim().trim_start_matches('('))
        .filter(|c| !c.is_empty())
    {
        let pts: Vec<usize> = cyc.split_whitespace().map(|x| x.parse().unwrap()).collect();
        for (i, &a) in pts.iter().enumerate() {
            img[a] = pts[(i + 1) % pts.len()];
        }
    }
    img
}

/// `a ∘ b`, applying `b` first.
pub fn mul(a: &P, b: &P) -> P {
    b.iter().map(|&x| a[x]).collect()
}

pub fn inv(a: &P) -> P {
    let mut r = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        r[x] = i;
    }
    r
}

pub fn identity(n: usize) -> P {
    (0..n).collect()
}

pub fn closure(degree: usize, gens: &[P]) -> Set {
    let mut seen: Set = BTreeSet::from([identity(degree)]);
    let mut queue = VecDeque::from([identity(degree)]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = mul(g, &x);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

pub fn corpus_group(i: usize) -> (String, usize, Set) {
    let (name, n, gens) = CORPUS[i];
    let gens: Vec<P> = gens.iter().map(|g| parse_cycles(g, n)).collect();
    (name.to_string(), n, closure(n, &gens))
}

pub fn lib_group(i: usize) -> FiniteGroup {
    let (_, n, gens) = CORPUS[i];
    FiniteGroup::from_cycle_strings(n, gens).unwrap()
}

pub fn to_p(p: &Perm) -> P {
    p.images().collect()
}

pub fn elements(g: &FiniteGroup) -> Set {
    g.elements().unwrap().iter().map(to_p).collect()
}

pub fn is_closed(s: &Set) -> bool {
    s.iter().all(|a| s.iter().all(|b| s.contains(&mul(a, b))))
}

pub fn conj_classes(g: &Set) -> Vec<Set> {
    let mut left = g.clone();
    let mut out = Vec::new();
    while let Some(x) = left.iter().next().cloned() {
        let class: Set = g.iter().map(|h| mul(&mul(h, &x), &inv(h))).collect();
        for c in &class {
            left.remove(c);
        }
        out.push(class);
    }
    out
}

/// Normal subgroups of `g`: unions of conjugacy classes closed under products.
pub fn normal_subgroups(g: &Set) -> Vec<Set> {
    let n = g.iter().next().unwrap().len();
    let e = identity(n);
    let classes: Vec<Set> = conj_classes(g)
        .into_iter()
        .filter(|c| !c.contains(&e))
        .collect();
    let order = g.len();
    let mut out = Vec::new();
    for mask in 0u64..(1 << classes.len()) {
        let size = 1
            + (0..classes.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| classes[i].len())
                .sum::<usize>();
        if !order.is_multiple_of(size) {
            continue;
        }
        let mut s: Set = BTreeSet::from([e.clone()]);
        for (i, c) in classes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s.extend(c.iter().cloned());
            }
        }
        if is_closed(&s) {
            out.push(s);
        }
    }
    out.sort_by_key(BTreeSet::len);
    out
}

pub fn maximal_normal(g: &Set) -> Vec<Set> {
    let ns: Vec<Set> = normal_subgroups(g)
        .into_iter()
        .filter(|n| n.len() < g.len())
        .collect();
    ns.iter()
        .filter(|n| !ns.iter().any(|m| m.len() > n.len() && n.is_subset(m)))
        .cloned()
        .collect()
}

pub fn minimal_normal(g: &Set) -> Vec<Set> {
    let ns: Vec<Set> = normal_subgroups(g)
        .into_iter()
        .filter(|n| n.len() > 1)
        .collect();
    ns.iter()
        .filter(|n| !ns.iter().any(|m| m.len() < n.len() && m.is_subset(n)))
        .cloned()
        .collect()
}

pub fn derived(g: &Set) -> Set {
    let n = g.iter().next().unwrap().len();
    let comms: Vec<P> = g
        .iter()
        .flat_map(|a| {
            g.iter()
                .map(move |b| mul(&mul(a, b), &mul(&inv(a), &inv(b))))
        })
        .collect::<Set>()
        .into_iter()
        .collect();
    closure(n, &comms)
}

pub fn derived_orders(g: &Set) -> Vec<usize> {
    let mut out = vec![g.len()];
    let mut cur = g.clone();
    loop {
        let d = derived(&cur);
        if d.len() == cur.len() {
            return out;
        }
        out.push(d.len());
        cur = d;
    }
}

pub fn soluble(g: &Set) -> bool {
    derived_orders(g).last() == Some(&1)
}

/// Orders of the composition factors, sorted.
pub fn composition_orders(g: &Set) -> Vec<usize> {
    let mut out = Vec::new();
    let mut cur = g.clone();
    while cur.len() > 1 {
        let m = maximal_normal(&cur)
            .into_iter()
            .max_by_key(BTreeSet::len)
            .unwrap();
        out.push(cur.len() / m.len());
        cur = m;
    }
    out.sort_unstable();
    out
}

pub fn prime_divisors(mut n: usize) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    let mut p = 2;
    while n > 1 {
        if n.is_multiple_of(p) {
            out.insert(p as u64);
            n /= p;
        } else {
            p += 1;
        }
    }
    out
}

pub fn is_pi(n: usize, pi: &BTreeSet<u64>) -> bool {
    prime_divisors(n).is_subset(pi)
}

/// Largest normal subgroup whose order is a π-number.
pub fn pi_core(g: &Set, pi: &BTreeSet<u64>) -> Set {
    normal_subgroups(g)
        .into_iter()
        .rev()
        .find(|n| is_pi(n.len(), pi))
        .unwrap()
}

/// Smallest normal subgroup of π-number index.
pub fn pi_residual(g: &Set, pi: &BTreeSet<u64>) -> Set {
    normal_subgroups(g)
        .into_iter()
        .find(|n| is_pi(g.len() / n.len(), pi))
        .unwrap()
}

pub fn soluble_radical(g: &Set) -> Set {
    normal_subgroups(g).into_iter().rev().find(soluble).unwrap()
}

pub fn melnikov(g: &Set) -> Set {
    maximal_normal(g)
        .into_iter()
        .reduce(|a, b| a.intersection(&b).cloned().collect())
        .unwrap_or_else(|| g.clone())
}

pub fn normalises(h: &Set, k: &Set) -> bool {
    h.iter()
        .all(|x| k.iter().all(|y| k.contains(&mul(&mul(x, y), &inv(x)))))
}

pub fn spec(text: &str) -> GroupSpec {
    GroupSpec::parse(text).unwrap()
}
