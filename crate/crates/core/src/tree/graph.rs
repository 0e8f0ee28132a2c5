use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::boolalg::{Address, TreeShape};
use crate::error::{LabError, Result};
use crate::permgrp::{FiniteGroup, Perm};
use crate::tree::element::Automorphism;

/// A labelled directed multigraph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize, String)>,
    /// Emit edges without arrowheads.
    pub undirected: bool,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b, _) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let (kw, arrow) = if self.undirected {
            ("graph", "--")
        } else {
            ("digraph", "->")
        };
        let mut s = format!("{kw} \"{name}\" {{\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"{}\"];", n.replace('"', "\\\""));
        }
        for (a, b, l) in &self.edges {
            let _ = writeln!(
                s,
                "  n{a} {arrow} n{b} [label=\"{}\"];",
                l.replace('"', "\\\"")
            );
        }
        s.push_str("}\n");
        s
    }
}

/// Coset graph of `G/U` (left cosets `xU`) with an edge `xU → sxU` per generator.
pub fn schreier_graph(g: &FiniteGroup, u: &FiniteGroup, gens: &[Perm]) -> Result<Graph> {
    g.closure()?;
    if !u.is_subgroup_of(g)? {
        return Err(LabError::invalid("U is not a subgroup of G"));
    }
    let u_elems = u.elements()?.to_vec();
    let canon = |x: &Perm| -> Perm {
        u_elems
            .iter()
            .map(|h| x.compose(h))
            .min()
            .expect("U nonempty")
    };
    let start = canon(&g.identity());
    let mut index: HashMap<Perm, usize> = HashMap::from([(start.clone(), 0)]);
    let mut reps = vec![start];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < reps.len() {
        let x = reps[i].clone();
        for s in gens {
            let y = canon(&s.compose(&x));
            let j = match index.get(&y) {
                Some(&j) => j,
                None => {
                    if reps.len() >= g.cap() {
                        return Err(LabError::ClosureCapExceeded { cap: g.cap() });
                    }
                    index.insert(y.clone(), reps.len());
                    reps.push(y);
                    reps.len() - 1
                }
            };
            edges.push((i, j, s.to_string()));
        }
        i += 1;
    }
    Ok(Graph {
        nodes: reps.iter().map(|r| format!("{r}U")).collect(),
        edges,
        undirected: false,
    })
}

/// One element per neighbour of the base vertex, and words covering a ball.
#[derive(Clone, Debug, Serialize)]
pub struct TransitiveGenerators {
    pub radius: usize,
    /// neighbour → word (rightmost letter applied first) moving the base vertex there
    pub sigma: Vec<(String, Vec<String>)>,
    /// ball vertex → word in the chosen elements reaching it
    pub covering: BTreeMap<String, Vec<String>>,
}

fn apply_word(
    shape: TreeShape,
    gens: &BTreeMap<String, Automorphism>,
    word: &[String],
) -> Automorphism {
    word.iter()
        .fold(Automorphism::identity(shape), |acc, name| {
            acc.compose(&gens[name])
        })
}

/// Searches, for each neighbour `c` of the base vertex, a word of length at
/// most `2r` in the given elements and their inverses moving the base vertex
/// to `c`; then checks that these elements move the base vertex onto every
/// vertex of the radius-`r` ball.
pub fn find_transitive_generators(
    shape: TreeShape,
    gens: &[(String, Automorphism)],
    r: usize,
) -> Result<TransitiveGenerators> {
    let bound = 2 * r;
    let mut letters: BTreeMap<String, Automorphism> = BTreeMap::new();
    for (name, g) in gens {
        letters.insert(name.clone(), g.clone());
        let inv = g.inverse();
        if inv != *g {
            letters.insert(format!("{name}^-1"), inv);
        }
    }
    let mut out = TransitiveGenerators {
        radius: r,
        sigma: Vec::new(),
        covering: BTreeMap::from([(Address::root().to_string(), Vec::new())]),
    };
    if r == 0 {
        return Ok(out);
    }
    let fail = || LabError::NotTransitiveAtRadius { radius: r, bound };
    // vertex -> shortest word reaching it from the base vertex
    let reach = |alphabet: &BTreeMap<String, Automorphism>| -> BTreeMap<Address, Vec<String>> {
        let mut seen: BTreeMap<Address, Vec<String>> =
            BTreeMap::from([(Address::root(), Vec::new())]);
        let mut frontier = vec![Address::root()];
        for _ in 0..bound {
            let mut next = Vec::new();
            for x in &frontier {
                for (name, g) in alphabet {
                    let y = g.image(x);
                    if !seen.contains_key(&y) {
                        let mut w = vec![name.clone()];
                        w.extend(seen[x].iter().cloned());
                        seen.insert(y.clone(), w);
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        seen
    };
    let from_given = reach(&letters);
    let mut chosen: BTreeMap<String, Automorphism> = BTreeMap::new();
    for c in shape.sphere(1) {
        let word = from_given.get(&c).ok_or_else(fail)?.clone();
        let name = format!("s{c}");
        chosen.insert(name.clone(), apply_word(shape, &letters, &word));
        out.sigma.push((c.to_string(), word));
    }
    let mut alphabet = chosen.clone();
    for (name, g) in &chosen {
        alphabet.insert(format!("{name}^-1"), g.inverse());
    }
    let covered = reach(&alphabet);
    for v in std::iter::once(Address::root()).chain(shape.ball_addresses(r)) {
        let w = covered.get(&v).ok_or_else(fail)?;
        out.covering.insert(v.to_string(), w.clone());
    }
    Ok(out)
}

/// The radius-`r` ball of the tree as an undirected graph, with the given
/// elements certified transitive on its vertices.
pub fn cayley_abels_ball(
    shape: TreeShape,
    gens: &[(String, Automorphism)],
    r: usize,
) -> Result<(Graph, TransitiveGenerators)> {
    let cert = find_transitive_generators(shape, gens, r)?;
    let mut vertices = vec![Address::root()];
    vertices.extend(shape.ball_addresses(r));
    let index: HashMap<&Address, usize> =
        vertices.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut edges = Vec::new();
    for v in vertices.iter().skip(1) {
        let p = v.parent().expect("nonempty");
        edges.push((index[&p], index[v], v.last().expect("nonempty").to_string()));
    }
    let graph = Graph {
        nodes: vertices.iter().map(Address::to_string).collect(),
        edges,
        undirected: true,
    };
    Ok((graph, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::element::{HyperbolicSpec, Portrait};

    #[test]
    fn schreier_examples() {
        let s4 = FiniteGroup::symmetric(4);
        let stab = s4.point_stabiliser(0).unwrap();
        let gens: Vec<Perm> = ["(0 1)", "(1 2)", "(2 3)"]
            .iter()
            .map(|s| Perm::parse(s, 4).unwrap())
            .collect();
        let g = schreier_graph(&s4, &stab, &gens).unwrap();
        assert_eq!(g.node_count(), 4);
        assert!(g.is_connected());
        let whole = schreier_graph(&s4, &s4, &gens).unwrap();
        assert_eq!(whole.node_count(), 1);
        assert!(whole.edges.iter().all(|&(a, b, _)| a == 0 && b == 0));
    }

    fn translations() -> Vec<(String, Automorphism)> {
        let t3 = TreeShape::regular(3);
        (0..3u8)
            .map(|c| {
                let post =
                    Portrait::elementary(t3, Address::root(), Perm::parse("(0 1 2)", 3).unwrap())
                        .unwrap();
                let h = HyperbolicSpec {
                    copy: 0,
                    word: vec![c],
                    post_factor: Some(post),
                };
                (format!("t{c}"), h.to_automorphism(t3).unwrap())
            })
            .collect()
    }

    #[test]
    fn translations_cover_balls() {
        let t3 = TreeShape::regular(3);
        let cert = find_transitive_generators(t3, &translations(), 3).unwrap();
        assert_eq!(cert.sigma.len(), 3);
        assert_eq!(cert.covering.len(), 1 + 3 + 6 + 12);
        assert!(find_transitive_generators(t3, &[], 0)
            .unwrap()
            .sigma
            .is_empty());
        let rot =
            Portrait::elementary(t3, Address::root(), Perm::parse("(0 1 2)", 3).unwrap()).unwrap();
        assert!(matches!(
            find_transitive_generators(t3, &[("r".into(), rot.to_automorphism())], 2),
            Err(LabError::NotTransitiveAtRadius { .. })
        ));
    }

    #[test]
    fn cayley_abels_ball_counts() {
        let (g, _) = cayley_abels_ball(TreeShape::regular(3), &translations(), 2).unwrap();
        assert_eq!(g.node_count(), 10);
        assert!(g.is_connected());
        assert!(g.to_dot("ball").starts_with("graph"));
    }
}
