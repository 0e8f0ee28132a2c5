//! Cylinder Boolean algebras of tree boundaries.
//!
//! A clopen subset of the boundary is stored as a canonical antichain of
//! vertex addresses: each address stands for the set of ends passing through
//! that vertex away from the base vertex. Complete sibling families are merged
//! eagerly, so two clopens are equal exactly when their covers are equal.
//! The whole boundary is the distinguished value [`CylinderClopen::top`].

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Shape of the tree whose boundary is being modelled.
///
/// `Regular` trees are addressed through a proper edge colouring: an address
/// is a word in the colours with no letter repeated in adjacent positions.
/// `Forest` is a disjoint union of regular trees; its first letter selects
/// the copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeShape {
    Rooted { degree: u8 },
    Regular { degree: u8 },
    Forest { copies: u8, degree: u8 },
}

impl TreeShape {
    pub fn rooted(degree: u8) -> Self {
        assert!((2..=10).contains(&degree), "degree must lie in 2..=10");
        TreeShape::Rooted { degree }
    }

    pub fn regular(degree: u8) -> Self {
        assert!(
            (3..=10).contains(&degree),
            "regular degree must lie in 3..=10"
        );
        TreeShape::Regular { degree }
    }

    pub fn forest(copies: u8, degree: u8) -> Self {
        assert!((2..=10).contains(&copies), "copies must lie in 2..=10");
        assert!(
            (3..=10).contains(&degree),
            "regular degree must lie in 3..=10"
        );
        TreeShape::Forest { copies, degree }
    }

    /// Local degree: number of children of a rooted vertex, or the valency
    /// of a regular tree.
    pub fn degree(&self) -> u8 {
        match *self {
            TreeShape::Rooted { degree }
            | TreeShape::Regular { degree }
            | TreeShape::Forest { degree, .. } => degree,
        }
    }

    /// Letters that may follow `addr`.
    pub fn children(&self, addr: &[u8]) -> impl Iterator<Item = u8> + '_ {
        let (limit, forbidden) = match *self {
            TreeShape::Rooted { degree } => (degree, None),
            TreeShape::Regular { degree } => (degree, addr.last().copied()),
            TreeShape::Forest { copies, degree } => match addr.len() {
                0 => (copies, None),
                1 => (degree, None),
                _ => (degree, addr.last().copied()),
            },
        };
        (0..limit).filter(move |&c| Some(c) != forbidden)
    }

    pub fn branching(&self, addr: &[u8]) -> usize {
        self.children(addr).count()
    }

    pub fn is_valid(&self, addr: &[u8]) -> bool {
        (0..addr.len()).all(|i| self.children(&addr[..i]).any(|c| c == addr[i]))
    }

    /// Number of vertices at distance `n` from the base vertex.
    pub fn sphere_size(&self, n: usize) -> usize {
        match *self {
            TreeShape::Rooted { degree } => (degree as usize).pow(n as u32),
            TreeShape::Regular { degree } => {
                if n == 0 {
                    1
                } else {
                    degree as usize * (degree as usize - 1).pow(n as u32 - 1)
                }
            }
            TreeShape::Forest { copies, degree } => match n {
                0 => 1,
                1 => copies as usize,
                _ => copies as usize * degree as usize * (degree as usize - 1).pow(n as u32 - 2),
            },
        }
    }

    /// All addresses of length `n`, in lexicographic order.
    pub fn sphere(&self, n: usize) -> Vec<Address> {
        self.extensions(&Address::root(), n)
    }

    /// All addresses of length `n` extending `prefix`, in lexicographic order.
    pub fn extensions(&self, prefix: &Address, n: usize) -> Vec<Address> {
        let mut out = Vec::new();
        if prefix.len() > n {
            return out;
        }
        let mut buf = prefix.0.clone();
        self.extend_into(&mut buf, n, &mut out);
        out
    }

    fn extend_into(&self, buf: &mut Vec<u8>, n: usize, out: &mut Vec<Address>) {
        if buf.len() == n {
            out.push(Address(buf.clone()));
            return;
        }
        let kids: Vec<u8> = self.children(buf).collect();
        for c in kids {
            buf.push(c);
            self.extend_into(buf, n, out);
            buf.pop();
        }
    }

    /// Addresses of length between 1 and `n`, shortest first.
    pub fn ball_addresses(&self, n: usize) -> Vec<Address> {
        (1..=n).flat_map(|k| self.sphere(k)).collect()
    }
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TreeShape::Rooted { degree } => write!(f, "rooted({degree})"),
            TreeShape::Regular { degree } => write!(f, "T_{degree}"),
            TreeShape::Forest { copies, degree } => write!(f, "{copies}xT_{degree}"),
        }
    }
}

/// A vertex address: the sequence of letters read from the base vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Address(pub Vec<u8>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn new(letters: impl Into<Vec<u8>>) -> Self {
        Address(letters.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn parent(&self) -> Option<Address> {
        if self.0.is_empty() {
            None
        } else {
            Some(Address(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, c: u8) -> Address {
        let mut v = self.0.clone();
        v.push(c);
        Address(v)
    }

    pub fn is_prefix_of(&self, other: &Address) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl Borrow<[u8]> for Address {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("@");
        }
        for &c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Address {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "@" {
            return Ok(Address::root());
        }
        s.chars()
            .enumerate()
            .map(|(i, ch)| {
                ch.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| LabError::parse(1, i + 1, format!("bad address letter '{ch}'")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Address)
    }
}

impl From<Address> for String {
    fn from(a: Address) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Address {
    type Error = LabError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Top,
    Cover(Vec<Address>),
}

/// A clopen subset of the boundary in canonical minimal-cylinder-cover form.
///
/// Deliberately not `Ord`: `le` and `lt` are set inclusion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CylinderClopen {
    shape: TreeShape,
    repr: Repr,
}

impl CylinderClopen {
    pub fn zero(shape: TreeShape) -> Self {
        CylinderClopen {
            shape,
            repr: Repr::Cover(Vec::new()),
        }
    }

    pub fn top(shape: TreeShape) -> Self {
        CylinderClopen {
            shape,
            repr: Repr::Top,
        }
    }

    /// The set of ends through `addr`. The empty address gives the whole boundary.
    pub fn cylinder(shape: TreeShape, addr: Address) -> Self {
        debug_assert!(
            shape.is_valid(addr.letters()),
            "invalid address {addr} for {shape}"
        );
        Self::from_addresses(shape, std::iter::once(addr))
    }

    /// Builds the canonical clopen covered by the given cylinders.
    pub fn from_addresses(shape: TreeShape, addrs: impl IntoIterator<Item = Address>) -> Self {
        let set: BTreeSet<Address> = addrs.into_iter().collect();
        canonicalize(shape, set)
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.repr, Repr::Cover(c) if c.is_empty())
    }

    pub fn is_top(&self) -> bool {
        matches!(self.repr, Repr::Top)
    }

    /// The canonical cover. For `TOP` this is the single root address.
    pub fn cover(&self) -> Vec<Address> {
        match &self.repr {
            Repr::Top => vec![Address::root()],
            Repr::Cover(c) => c.clone(),
        }
    }

    pub(crate) fn cover_slice(&self) -> &[Address] {
        match &self.repr {
            Repr::Top => &[],
            Repr::Cover(c) => c,
        }
    }

    pub fn depth(&self) -> usize {
        match &self.repr {
            Repr::Top => 0,
            Repr::Cover(c) => c.iter().map(Address::len).max().unwrap_or(0),
        }
    }

    pub fn meet(&self, other: &Self) -> Self {
        debug_assert_eq!(self.shape, other.shape);
        match (&self.repr, &other.repr) {
            (Repr::Top, _) => other.clone(),
            (_, Repr::Top) => self.clone(),
            (Repr::Cover(a), Repr::Cover(b)) => {
                let mut out = BTreeSet::new();
                for x in a {
                    for y in b {
                        if x.is_prefix_of(y) {
                            out.insert(y.clone());
                        } else if y.is_prefix_of(x) {
                            out.insert(x.clone());
                        }
                    }
                }
                canonicalize(self.shape, out)
            }
        }
    }

    pub fn join(&self, other: &Self) -> Self {
        debug_assert_eq!(self.shape, other.shape);
        match (&self.repr, &other.repr) {
            (Repr::Top, _) | (_, Repr::Top) => Self::top(self.shape),
            (Repr::Cover(a), Repr::Cover(b)) => {
                let set: BTreeSet<Address> = a.iter().chain(b.iter()).cloned().collect();
                canonicalize(self.shape, set)
            }
        }
    }

    pub fn complement(&self) -> Self {
        match &self.repr {
            Repr::Top => Self::zero(self.shape),
            Repr::Cover(c) if c.is_empty() => Self::top(self.shape),
            Repr::Cover(c) => {
                let cover: BTreeSet<&[u8]> = c.iter().map(|a| a.letters()).collect();
                let mut out = Vec::new();
                let mut buf = Vec::new();
                complement_into(self.shape, &cover, &mut buf, &mut out);
                out.sort();
                CylinderClopen {
                    shape: self.shape,
                    repr: Repr::Cover(out),
                }
            }
        }
    }

    /// `self ∖ other`.
    pub fn difference(&self, other: &Self) -> Self {
        self.meet(&other.complement())
    }

    pub fn le(&self, other: &Self) -> bool {
        self.meet(other) == *self
    }

    /// Strict inclusion.
    pub fn lt(&self, other: &Self) -> bool {
        self != other && self.le(other)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.meet(other).is_zero()
    }

    /// The exact set of depth-`n` addresses whose cylinders make up `self`.
    pub fn refine(&self, n: usize) -> Result<Vec<Address>> {
        let depth = self.depth();
        if n < depth {
            return Err(LabError::Precision {
                requested: n,
                available: depth,
            });
        }
        Ok(match &self.repr {
            Repr::Top => self.shape.sphere(n),
            Repr::Cover(c) => c.iter().flat_map(|a| self.shape.extensions(a, n)).collect(),
        })
    }

    /// Uniform measure: each cylinder splits its weight evenly among children.
    pub fn measure(&self) -> BigRational {
        match &self.repr {
            Repr::Top => BigRational::one(),
            Repr::Cover(c) => c
                .iter()
                .map(|a| cylinder_weight(self.shape, a))
                .fold(BigRational::zero(), |acc, w| acc + w),
        }
    }
}

fn complement_into(
    shape: TreeShape,
    cover: &BTreeSet<&[u8]>,
    buf: &mut Vec<u8>,
    out: &mut Vec<Address>,
) {
    let kids: Vec<u8> = shape.children(buf).collect();
    for c in kids {
        buf.push(c);
        if cover.contains(buf.as_slice()) {
            // covered
        } else if cover
            .range::<[u8], _>((
                std::ops::Bound::Excluded(buf.as_slice()),
                std::ops::Bound::Unbounded,
            ))
            .next()
            .is_some_and(|next| next.starts_with(buf))
        {
            complement_into(shape, cover, buf, out);
        } else {
            out.push(Address(buf.clone()));
        }
        buf.pop();
    }
}

fn canonicalize(shape: TreeShape, set: BTreeSet<Address>) -> CylinderClopen {
    // Drop addresses that extend another member.
    let mut antichain: BTreeSet<Address> = BTreeSet::new();
    let mut last: Option<Address> = None;
    for a in set {
        if a.is_empty() {
            return CylinderClopen::top(shape);
        }
        if let Some(l) = &last {
            if l.is_prefix_of(&a) {
                continue;
            }
        }
        last = Some(a.clone());
        antichain.insert(a);
    }
    // Merge complete sibling families, deepest first; merges bubble upward.
    let max_depth = antichain.iter().map(Address::len).max().unwrap_or(0);
    for depth in (1..=max_depth).rev() {
        let mut parents: BTreeMap<Address, usize> = BTreeMap::new();
        for a in antichain.iter().filter(|a| a.len() == depth) {
            *parents.entry(a.parent().expect("nonempty")).or_default() += 1;
        }
        for (p, count) in parents {
            if count == shape.branching(p.letters()) {
                if p.is_empty() {
                    return CylinderClopen::top(shape);
                }
                for c in shape.children(p.letters()) {
                    antichain.remove(&p.child(c));
                }
                antichain.insert(p);
            }
        }
    }
    CylinderClopen {
        shape,
        repr: Repr::Cover(antichain.into_iter().collect()),
    }
}

fn cylinder_weight(shape: TreeShape, addr: &Address) -> BigRational {
    let mut denom = BigInt::one();
    for i in 0..addr.len() {
        denom *= BigInt::from(shape.branching(&addr.letters()[..i]));
    }
    BigRational::new(BigInt::one(), denom)
}

/// Uniform reference weights on the depth-`n` cylinders.
pub fn measure_weights(shape: TreeShape, n: usize) -> BTreeMap<Address, BigRational> {
    shape
        .sphere(n)
        .into_iter()
        .map(|a| {
            let w = cylinder_weight(shape, &a);
            (a, w)
        })
        .collect()
}

/// A partition of the boundary into nonzero, pairwise disjoint clopens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthPartition {
    parts: Vec<CylinderClopen>,
}

impl DepthPartition {
    pub fn new(parts: Vec<CylinderClopen>) -> Result<Self> {
        let shape = parts
            .first()
            .map(|p| p.shape())
            .ok_or_else(|| LabError::invalid("empty partition"))?;
        let mut acc = CylinderClopen::zero(shape);
        for p in &parts {
            if p.is_zero() {
                return Err(LabError::invalid("partition has a zero part"));
            }
            if !acc.is_disjoint(p) {
                return Err(LabError::invalid(format!(
                    "part {p} overlaps earlier parts"
                )));
            }
            acc = acc.join(p);
        }
        if !acc.is_top() {
            return Err(LabError::invalid("parts do not cover the boundary"));
        }
        Ok(DepthPartition { parts })
    }

    /// The partition into depth-`n` cylinders.
    pub fn cylinders(shape: TreeShape, n: usize) -> Self {
        let parts = if n == 0 {
            vec![CylinderClopen::top(shape)]
        } else {
            shape
                .sphere(n)
                .into_iter()
                .map(|a| CylinderClopen::cylinder(shape, a))
                .collect()
        };
        DepthPartition { parts }
    }

    pub fn parts(&self) -> &[CylinderClopen] {
        &self.parts
    }
}

impl fmt::Display for CylinderClopen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Top => f.write_str("TOP"),
            Repr::Cover(c) => {
                f.write_str("{")?;
                for (i, a) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl Serialize for CylinderClopen {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses the textual form `{01,02}`, `{}` or `TOP`.
pub fn parse_clopen(shape: TreeShape, text: &str) -> Result<CylinderClopen> {
    let t = text.trim();
    if t == "TOP" {
        return Ok(CylinderClopen::top(shape));
    }
    let inner = t
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| LabError::parse(1, 1, format!("expected '{{...}}' or TOP, got '{t}'")))?;
    let mut addrs = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a: Address = part.parse()?;
        if a.is_empty() || !shape.is_valid(a.letters()) {
            return Err(LabError::parse(
                1,
                1,
                format!("address {part} is not valid on {shape}"),
            ));
        }
        addrs.push(a);
    }
    Ok(CylinderClopen::from_addresses(shape, addrs))
}
