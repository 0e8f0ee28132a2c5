use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::boolalg::{Address, CylinderClopen, TreeShape};
use crate::error::{LabError, Result};
use crate::permgrp::Perm;

/// An elliptic automorphism given by local permutations at finitely many
/// vertices.
///
/// On a regular tree the decoration at `v` permutes the edge colours at `v`
/// relative to its parent: the local action at `v` is the product of the
/// decorations along the path from the base vertex, and every decoration
/// away from the base vertex fixes the colour pointing back. On a rooted
/// tree the decoration at `v` permutes the children of `v` directly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Portrait {
    shape: TreeShape,
    decorations: BTreeMap<Address, Perm>,
}

impl Portrait {
    pub fn identity(shape: TreeShape) -> Self {
        Portrait {
            shape,
            decorations: BTreeMap::new(),
        }
    }

    /// Validates and builds a portrait; identity decorations are dropped.
    pub fn new(
        shape: TreeShape,
        decorations: impl IntoIterator<Item = (Address, Perm)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (addr, perm) in decorations {
            check_site(shape, &addr, &perm)?;
            if map.contains_key(&addr) {
                return Err(LabError::invalid(format!("vertex {addr} decorated twice")));
            }
            if !perm.is_identity() {
                map.insert(addr, perm);
            }
        }
        Ok(Portrait {
            shape,
            decorations: map,
        })
    }

    /// A portrait with a single decorated vertex.
    pub fn elementary(shape: TreeShape, addr: Address, perm: Perm) -> Result<Self> {
        Portrait::new(shape, [(addr, perm)])
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    pub fn decorations(&self) -> &BTreeMap<Address, Perm> {
        &self.decorations
    }

    pub fn to_automorphism(&self) -> Automorphism {
        let mut parts = vec![Part::default(); part_count(self.shape)];
        for (addr, perm) in &self.decorations {
            let (k, rest) = split(self.shape, addr.letters());
            parts[k].decorations.insert(rest.to_vec(), perm.clone());
        }
        Automorphism {
            shape: self.shape,
            parts,
        }
    }
}

/// Permutation degree of a decoration on this shape.
pub fn local_degree(shape: TreeShape) -> usize {
    shape.degree() as usize
}

fn check_site(shape: TreeShape, addr: &Address, perm: &Perm) -> Result<()> {
    if !shape.is_valid(addr.letters()) {
        return Err(LabError::invalid(format!(
            "address {addr} is not a vertex of {shape}"
        )));
    }
    if perm.degree() != local_degree(shape) {
        return Err(LabError::invalid(format!(
            "decoration {perm} at {addr} has degree {} but the tree needs {}",
            perm.degree(),
            local_degree(shape)
        )));
    }
    match shape {
        TreeShape::Rooted { .. } => Ok(()),
        TreeShape::Regular { .. } => match addr.last() {
            Some(c) if !perm.fixes(c as usize) => Err(LabError::invalid(format!(
                "decoration {perm} at {addr} moves the colour {c} pointing back to the base vertex"
            ))),
            _ => Ok(()),
        },
        TreeShape::Forest { .. } => match addr.len() {
            0 => Err(LabError::invalid("the forest root cannot be decorated")),
            1 => Ok(()),
            _ => {
                let c = addr.last().expect("nonempty");
                if perm.fixes(c as usize) {
                    Ok(())
                } else {
                    Err(LabError::invalid(format!(
                        "decoration {perm} at {addr} moves the colour {c} pointing back to the copy base"
                    )))
                }
            }
        },
    }
}

fn part_count(shape: TreeShape) -> usize {
    match shape {
        TreeShape::Forest { copies, .. } => copies as usize,
        _ => 1,
    }
}

/// Splits a full address into (component, address within the component).
fn split(shape: TreeShape, addr: &[u8]) -> (usize, &[u8]) {
    match shape {
        TreeShape::Forest { .. } => (addr[0] as usize, &addr[1..]),
        _ => (0, addr),
    }
}

/// Free reduction of `x·y` in the free product of order-two groups.
pub(crate) fn reduce_concat(x: &[u8], y: &[u8]) -> Vec<u8> {
    let mut out = x.to_vec();
    for &c in y {
        if out.last() == Some(&c) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    out
}

fn reversed(x: &[u8]) -> Vec<u8> {
    x.iter().rev().copied().collect()
}

#[derive(Clone, Copy)]
struct Kind {
    rooted: bool,
    degree: usize,
}

/// `λ_shift ∘ portrait` on one regular tree, or a bare portrait on a rooted tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Part {
    shift: Vec<u8>,
    decorations: BTreeMap<Vec<u8>, Perm>,
}

impl Part {
    fn dec(&self, w: &[u8]) -> Option<&Perm> {
        self.decorations.get(w)
    }

    /// Local action of the portrait factor at `w`.
    fn sigma(&self, kind: Kind, w: &[u8]) -> Perm {
        if kind.rooted {
            return self
                .dec(w)
                .cloned()
                .unwrap_or_else(|| Perm::identity(kind.degree));
        }
        let mut s = self
            .dec(&[])
            .cloned()
            .unwrap_or_else(|| Perm::identity(kind.degree));
        for i in 1..=w.len() {
            if let Some(d) = self.dec(&w[..i]) {
                s = s.compose(d);
            }
        }
        s
    }

    fn portrait_image(&self, kind: Kind, w: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(w.len());
        if kind.rooted {
            for i in 0..w.len() {
                let c = w[i] as usize;
                out.push(self.dec(&w[..i]).map_or(c, |d| d.apply(c)) as u8);
            }
            return out;
        }
        let mut s: Option<Perm> = self.dec(&[]).cloned();
        for i in 0..w.len() {
            let c = w[i] as usize;
            out.push(s.as_ref().map_or(c, |p| p.apply(c)) as u8);
            if let Some(d) = self.dec(&w[..=i]) {
                s = Some(match s {
                    Some(p) => p.compose(d),
                    None => d.clone(),
                });
            }
        }
        out
    }

    fn portrait_preimage(&self, kind: Kind, w: &[u8]) -> Vec<u8> {
        let mut pre: Vec<u8> = Vec::with_capacity(w.len());
        if kind.rooted {
            for &c in w {
                let x = self
                    .dec(&pre)
                    .map_or(c as usize, |d| d.inverse().apply(c as usize));
                pre.push(x as u8);
            }
            return pre;
        }
        let mut s: Option<Perm> = self.dec(&[]).cloned();
        for &c in w {
            let x = s
                .as_ref()
                .map_or(c as usize, |p| p.inverse().apply(c as usize));
            pre.push(x as u8);
            if let Some(d) = self.dec(&pre) {
                s = Some(match s {
                    Some(p) => p.compose(d),
                    None => d.clone(),
                });
            }
        }
        pre
    }

    fn image(&self, kind: Kind, w: &[u8]) -> Vec<u8> {
        let p = self.portrait_image(kind, w);
        if self.shift.is_empty() {
            p
        } else {
            reduce_concat(&self.shift, &p)
        }
    }

    fn preimage(&self, kind: Kind, w: &[u8]) -> Vec<u8> {
        if self.shift.is_empty() {
            self.portrait_preimage(kind, w)
        } else {
            self.portrait_preimage(kind, &reduce_concat(&reversed(&self.shift), w))
        }
    }

    /// Decorations from a local-action function evaluated at candidate sites.
    fn from_sigma(
        kind: Kind,
        shift: Vec<u8>,
        candidates: BTreeSet<Vec<u8>>,
        sigma: impl Fn(&[u8]) -> Perm,
    ) -> Part {
        let mut decorations = BTreeMap::new();
        for w in candidates {
            let d = if kind.rooted || w.is_empty() {
                sigma(&w)
            } else {
                sigma(&w[..w.len() - 1]).inverse().compose(&sigma(&w))
            };
            if !d.is_identity() {
                decorations.insert(w, d);
            }
        }
        Part { shift, decorations }
    }

    fn compose(&self, kind: Kind, other: &Part) -> Part {
        if kind.rooted {
            let mut cands: BTreeSet<Vec<u8>> = other.decorations.keys().cloned().collect();
            for u in self.decorations.keys() {
                cands.insert(other.portrait_preimage(kind, u));
            }
            return Part::from_sigma(kind, Vec::new(), cands, |w| {
                self.sigma(kind, &other.portrait_image(kind, w))
                    .compose(&other.sigma(kind, w))
            });
        }
        // (λ_x p)(λ_y q) = λ_{x·p(y)} (p' q) with p' = λ_{p(y)}⁻¹ p λ_y.
        let y = &other.shift;
        let py = self.portrait_image(kind, y);
        let shift = reduce_concat(&self.shift, &py);
        let p_prime = if y.is_empty() {
            Part {
                shift: Vec::new(),
                decorations: self.decorations.clone(),
            }
        } else {
            let ry = reversed(y);
            let mut decorations = BTreeMap::new();
            let root = self.sigma(kind, y);
            if !root.is_identity() {
                decorations.insert(Vec::new(), root);
            }
            for (u, d) in &self.decorations {
                if u.is_empty() {
                    continue;
                }
                let a = reduce_concat(&ry, &u[..u.len() - 1]);
                let b = reduce_concat(&ry, u);
                if b.len() > a.len() {
                    decorations.insert(b, d.clone());
                } else {
                    decorations.insert(a, d.inverse());
                }
            }
            Part {
                shift: Vec::new(),
                decorations,
            }
        };
        let mut cands: BTreeSet<Vec<u8>> = other.decorations.keys().cloned().collect();
        cands.insert(Vec::new());
        for u in p_prime.decorations.keys() {
            cands.insert(other.portrait_preimage(kind, u));
        }
        Part::from_sigma(kind, shift, cands, |w| {
            p_prime
                .sigma(kind, &other.portrait_image(kind, w))
                .compose(&other.sigma(kind, w))
        })
    }

    fn inverse(&self, kind: Kind) -> Part {
        let mut cands: BTreeSet<Vec<u8>> = self
            .decorations
            .keys()
            .map(|u| self.portrait_image(kind, u))
            .collect();
        if !kind.rooted {
            cands.insert(Vec::new());
        }
        let pinv = Part::from_sigma(kind, Vec::new(), cands, |w| {
            self.sigma(kind, &self.portrait_preimage(kind, w)).inverse()
        });
        if self.shift.is_empty() {
            return pinv;
        }
        let back = Part {
            shift: reversed(&self.shift),
            decorations: BTreeMap::new(),
        };
        pinv.compose(kind, &back)
    }
}

/// An automorphism in exact normal form.
///
/// On a regular tree an automorphism is stored as `λ_x ∘ p`, where `λ_x` is
/// the colour-preserving automorphism taking the base vertex to `x` and `p`
/// is a portrait fixing the base vertex. A forest carries one such pair per
/// copy; copies are never exchanged. On a rooted tree only the portrait is
/// present. The form is canonical, so equality is exact.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Automorphism {
    shape: TreeShape,
    parts: Vec<Part>,
}

impl Automorphism {
    pub fn identity(shape: TreeShape) -> Self {
        Automorphism {
            shape,
            parts: vec![Part::default(); part_count(shape)],
        }
    }

    /// The colour-preserving automorphism taking the base vertex (of copy
    /// `copy`, for forests) to the vertex with colour word `word`.
    pub fn translation(shape: TreeShape, copy: usize, word: &[u8]) -> Result<Self> {
        let q = shape.degree();
        let reduced = word.windows(2).all(|w| w[0] != w[1]) && word.iter().all(|&c| c < q);
        match shape {
            TreeShape::Rooted { .. } if !word.is_empty() => {
                return Err(LabError::invalid("rooted trees admit no translations"));
            }
            _ if !reduced => {
                return Err(LabError::invalid(format!(
                    "{word:?} is not a reduced colour word"
                )));
            }
            _ if copy >= part_count(shape) => {
                return Err(LabError::invalid(format!(
                    "copy {copy} does not exist on {shape}"
                )));
            }
            _ => {}
        }
        let mut g = Automorphism::identity(shape);
        g.parts[copy].shift = word.to_vec();
        Ok(g)
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    fn kind(&self) -> Kind {
        Kind {
            rooted: matches!(self.shape, TreeShape::Rooted { .. }),
            degree: local_degree(self.shape),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.parts
            .iter()
            .all(|p| p.shift.is_empty() && p.decorations.is_empty())
    }

    /// Image of the base vertex of `copy` as a colour word.
    pub fn shift(&self, copy: usize) -> &[u8] {
        &self.parts[copy].shift
    }

    /// Largest distance a copy base vertex is moved.
    pub fn displacement(&self) -> usize {
        self.parts.iter().map(|p| p.shift.len()).max().unwrap_or(0)
    }

    /// The portrait factor (decorations of `p` in `λ_x ∘ p`).
    pub fn portrait(&self) -> Portrait {
        let mut decorations = BTreeMap::new();
        for (k, part) in self.parts.iter().enumerate() {
            for (w, d) in &part.decorations {
                let addr = match self.shape {
                    TreeShape::Forest { .. } => {
                        let mut a = vec![k as u8];
                        a.extend_from_slice(w);
                        Address(a)
                    }
                    _ => Address(w.clone()),
                };
                decorations.insert(addr, d.clone());
            }
        }
        Portrait {
            shape: self.shape,
            decorations,
        }
    }

    /// Vertices carrying a nontrivial decoration in the portrait factor.
    pub fn support(&self) -> Vec<Address> {
        self.portrait().decorations.into_keys().collect()
    }

    pub fn image(&self, addr: &Address) -> Address {
        let kind = self.kind();
        match self.shape {
            TreeShape::Forest { .. } => {
                if addr.is_empty() {
                    return Address::root();
                }
                let (k, rest) = split(self.shape, addr.letters());
                let mut out = vec![k as u8];
                out.extend(self.parts[k].image(kind, rest));
                Address(out)
            }
            _ => Address(self.parts[0].image(kind, addr.letters())),
        }
    }

    pub fn preimage(&self, addr: &Address) -> Address {
        let kind = self.kind();
        match self.shape {
            TreeShape::Forest { .. } => {
                if addr.is_empty() {
                    return Address::root();
                }
                let (k, rest) = split(self.shape, addr.letters());
                let mut out = vec![k as u8];
                out.extend(self.parts[k].preimage(kind, rest));
                Address(out)
            }
            _ => Address(self.parts[0].preimage(kind, addr.letters())),
        }
    }

    /// Local action at `v`: how the edge colours (regular trees) or child
    /// indices (rooted trees) at `v` map to those at the image of `v`.
    pub fn local_action(&self, v: &Address) -> Perm {
        let kind = self.kind();
        match self.shape {
            TreeShape::Forest { .. } if v.is_empty() => Perm::identity(kind.degree),
            _ => {
                let (k, rest) = split(self.shape, v.letters());
                self.parts[k].sigma(kind, rest)
            }
        }
    }

    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        debug_assert_eq!(self.shape, other.shape);
        let kind = self.kind();
        Automorphism {
            shape: self.shape,
            parts: self
                .parts
                .iter()
                .zip(&other.parts)
                .map(|(a, b)| a.compose(kind, b))
                .collect(),
        }
    }

    pub fn inverse(&self) -> Automorphism {
        let kind = self.kind();
        Automorphism {
            shape: self.shape,
            parts: self.parts.iter().map(|p| p.inverse(kind)).collect(),
        }
    }

    /// `self^k` for any integer `k`.
    pub fn pow(&self, k: i64) -> Automorphism {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Automorphism::identity(self.shape);
        for _ in 0..k.unsigned_abs() {
            acc = acc.compose(&base);
        }
        acc
    }

    /// `self · other · self⁻¹`.
    pub fn conjugate(&self, other: &Automorphism) -> Automorphism {
        self.compose(other).compose(&self.inverse())
    }

    pub fn commutes_with(&self, other: &Automorphism) -> bool {
        self.compose(other) == other.compose(self)
    }

    /// Translation length `d(v, g²v) − d(v, gv)` measured at the base
    /// vertex, clamped at zero (the maximum over forest copies).
    pub fn translation_length(&self) -> usize {
        let kind = self.kind();
        if kind.rooted {
            return 0;
        }
        self.parts
            .iter()
            .map(|p| {
                let once = p.shift.len();
                let twice = p.image(kind, &p.shift).len();
                twice.saturating_sub(once)
            })
            .max()
            .unwrap_or(0)
    }

    /// Whether the local action at every vertex lies in `allowed`.
    ///
    /// Local actions change only across decorated vertices, so it is enough
    /// to look at the copy base vertices and the decorated sites.
    pub fn local_actions_within(&self, allowed: &dyn Fn(&Perm) -> bool) -> bool {
        let kind = self.kind();
        self.parts.iter().all(|p| {
            let mut sites: Vec<&Vec<u8>> = p.decorations.keys().collect();
            let root = Vec::new();
            if !kind.rooted {
                sites.push(&root);
            }
            sites.into_iter().all(|w| allowed(&p.sigma(kind, w)))
        })
    }

    /// Image of a single cylinder.
    fn cylinder_image(&self, addr: &Address) -> CylinderClopen {
        let shape = self.shape;
        if addr.is_empty() {
            return CylinderClopen::top(shape);
        }
        if let TreeShape::Rooted { .. } = shape {
            return CylinderClopen::cylinder(shape, self.image(addr));
        }
        if let TreeShape::Forest { .. } = shape {
            if addr.len() == 1 {
                return CylinderClopen::cylinder(shape, addr.clone());
            }
        }
        let gw = self.image(addr);
        let gp = self.image(&addr.parent().expect("nonempty"));
        if gw.len() > gp.len() {
            CylinderClopen::cylinder(shape, gw)
        } else {
            let ambient = match shape {
                TreeShape::Forest { .. } => {
                    CylinderClopen::cylinder(shape, Address(vec![addr.letters()[0]]))
                }
                _ => CylinderClopen::top(shape),
            };
            ambient.difference(&CylinderClopen::cylinder(shape, gp))
        }
    }

    /// Image of a clopen set of ends.
    pub fn image_clopen(&self, a: &CylinderClopen) -> CylinderClopen {
        if a.is_top() {
            return a.clone();
        }
        a.cover_slice()
            .iter()
            .map(|w| self.cylinder_image(w))
            .fold(CylinderClopen::zero(self.shape), |acc, c| acc.join(&c))
    }

    /// Spec-file rendering: `portrait …` or `hyperbolic w ; …`, with
    /// forest components prefixed by `on k` and joined by ` | `.
    pub fn render(&self) -> String {
        let forest = matches!(self.shape, TreeShape::Forest { .. });
        let mut pieces = Vec::new();
        for (k, part) in self.parts.iter().enumerate() {
            if forest && part.shift.is_empty() && part.decorations.is_empty() {
                continue;
            }
            let mut s = String::new();
            if forest {
                s.push_str(&format!("on {k} "));
            }
            let mut fields: Vec<String> = Vec::new();
            if part.shift.is_empty() {
                s.push_str("portrait");
            } else {
                s.push_str("hyperbolic");
                fields.push(Address(part.shift.clone()).to_string());
            }
            fields.extend(
                part.decorations
                    .iter()
                    .map(|(w, d)| format!("{} {d}", Address(w.clone()))),
            );
            if !fields.is_empty() {
                s.push(' ');
                s.push_str(&fields.join(" ; "));
            }
            pieces.push(s);
        }
        if pieces.is_empty() {
            "portrait".to_string()
        } else {
            pieces.join(" | ")
        }
    }
}

impl serde::Serialize for Automorphism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.render())
    }
}

impl serde::Serialize for Portrait {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_automorphism().render())
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Automorphism[{}]({})", self.shape, self.render())
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A hyperbolic element `λ_w ∘ post`: the colour-preserving shift by the word
/// `w` followed (on the right) by an optional elliptic post-factor.
///
/// A cyclically reduced `w` of even length gives a colour-preserving
/// translation along the axis `…www…`. Odd-length translations need a
/// post-factor rotating colours, e.g. `w = 0` with `(0 1 2)` at the base
/// vertex is a translation of length one on the 3-regular tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperbolicSpec {
    pub copy: usize,
    pub word: Vec<u8>,
    pub post_factor: Option<Portrait>,
}

impl HyperbolicSpec {
    pub fn to_automorphism(&self, shape: TreeShape) -> Result<Automorphism> {
        let t = Automorphism::translation(shape, self.copy, &self.word)?;
        Ok(match &self.post_factor {
            Some(p) => t.compose(&p.to_automorphism()),
            None => t,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> TreeShape {
        TreeShape::regular(3)
    }

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    fn perm(s: &str) -> Perm {
        Perm::parse(s, 3).unwrap()
    }

    fn unit_translation() -> Automorphism {
        HyperbolicSpec {
            copy: 0,
            word: vec![0],
            post_factor: Some(
                Portrait::elementary(t3(), Address::root(), perm("(0 1 2)")).unwrap(),
            ),
        }
        .to_automorphism(t3())
        .unwrap()
    }

    #[test]
    fn unit_translation_moves_along_its_axis() {
        let t = unit_translation();
        assert_eq!(t.image(&Address::root()), a("0"));
        assert_eq!(t.image(&a("0")), a("01"));
        assert_eq!(t.image(&a("01")), a("012"));
        assert_eq!(t.image(&a("2")), Address::root());
        assert_eq!(t.translation_length(), 1);
        assert_eq!(t.preimage(&a("012")), a("01"));
    }

    #[test]
    fn inverse_and_composition() {
        let t = unit_translation();
        let ti = t.inverse();
        assert!(t.compose(&ti).is_identity());
        assert!(ti.compose(&t).is_identity());
        let s = Portrait::elementary(t3(), a("0"), perm("(1 2)"))
            .unwrap()
            .to_automorphism();
        let g = t.compose(&s).compose(&t);
        for w in t3().ball_addresses(5) {
            assert_eq!(g.image(&w), t.image(&s.image(&t.image(&w))));
            assert_eq!(g.preimage(&g.image(&w)), w);
        }
    }

    #[test]
    fn cylinder_images_follow_the_axis() {
        let t = unit_translation();
        let alpha = CylinderClopen::cylinder(t3(), a("0"));
        assert_eq!(
            t.image_clopen(&alpha),
            CylinderClopen::cylinder(t3(), a("01"))
        );
        let back = CylinderClopen::cylinder(t3(), a("2"));
        // the half-tree through "2" contains v0's other branches after one step back
        let img = t
            .inverse()
            .image_clopen(&CylinderClopen::cylinder(t3(), a("0")));
        assert_eq!(img.complement(), CylinderClopen::cylinder(t3(), a("2")));
        assert_eq!(
            t.image_clopen(&back).complement(),
            CylinderClopen::cylinder(t3(), a("0"))
        );
    }

    #[test]
    fn regular_portraits_keep_the_back_colour() {
        assert!(Portrait::elementary(t3(), a("0"), perm("(0 1)")).is_err());
        assert!(Portrait::elementary(t3(), a("0"), perm("(1 2)")).is_ok());
    }

    #[test]
    fn rooted_portraits_compose_like_functions() {
        let b = TreeShape::rooted(2);
        let s = Perm::parse("(0 1)", 2).unwrap();
        let p = Portrait::elementary(b, Address::root(), s.clone())
            .unwrap()
            .to_automorphism();
        let q = Portrait::elementary(b, a("0"), s)
            .unwrap()
            .to_automorphism();
        let pq = p.compose(&q);
        for w in b.ball_addresses(4) {
            assert_eq!(pq.image(&w), p.image(&q.image(&w)));
            assert_eq!(pq.inverse().image(&pq.image(&w)), w);
        }
        assert_eq!(p.compose(&p), Automorphism::identity(b));
    }

    #[test]
    fn forest_components_act_separately() {
        let f = TreeShape::forest(2, 3);
        let t = Automorphism::translation(f, 1, &[0, 1]).unwrap();
        assert_eq!(t.image(&a("02")), a("02"));
        assert_eq!(t.image(&a("1")), a("101"));
        assert_eq!(t.image(&a("12")), a("1012"));
        assert!(t.compose(&t.inverse()).is_identity());
        let c = CylinderClopen::cylinder(f, a("10"));
        assert_eq!(t.image_clopen(&c), CylinderClopen::cylinder(f, a("1010")));
        let d = CylinderClopen::cylinder(f, a("11"));
        let expected =
            CylinderClopen::cylinder(f, a("1")).difference(&CylinderClopen::cylinder(f, a("10")));
        assert_eq!(
            t.inverse().image_clopen(&d),
            expected.meet(&t.inverse().image_clopen(&d))
        );
    }
}
