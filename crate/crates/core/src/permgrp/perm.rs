use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A permutation of `{0..m-1}`.
///
/// Products compose like functions: `(p * q)(x) = p(q(x))`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm {
    images: Box<[u16]>,
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm {
            images: (0..degree as u16).collect(),
        }
    }

    /// Builds a permutation from its image array, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &i in &images {
            if i >= m || seen[i] {
                return Err(LabError::invalid(format!(
                    "image array {images:?} is not a bijection"
                )));
            }
            seen[i] = true;
        }
        Ok(Perm {
            images: images.into_iter().map(|i| i as u16).collect(),
        })
    }

    pub(crate) fn from_images_unchecked(images: Vec<u16>) -> Self {
        Perm {
            images: images.into_boxed_slice(),
        }
    }

    /// Builds a permutation from disjoint cycles.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cyc in cycles {
            for (k, &p) in cyc.iter().enumerate() {
                if p >= degree {
                    return Err(LabError::invalid(format!(
                        "point {p} exceeds degree {degree}"
                    )));
                }
                if touched[p] {
                    return Err(LabError::invalid(format!(
                        "point {p} repeated in cycle notation"
                    )));
                }
                touched[p] = true;
                images[p] = cyc[(k + 1) % cyc.len()];
            }
        }
        Perm::from_images(images)
    }

    /// Parses disjoint-cycle notation such as `(0 1 2)(3 4)`; `()` is the identity.
    pub fn parse(text: &str, degree: usize) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut current: Option<Vec<usize>> = None;
        let mut number = String::new();
        let chars: Vec<char> = text.chars().collect();
        let flush =
            |number: &mut String, current: &mut Option<Vec<usize>>, col: usize| -> Result<()> {
                if !number.is_empty() {
                    let v: usize = number
                        .parse()
                        .map_err(|_| LabError::parse(1, col, format!("bad point '{number}'")))?;
                    current
                        .as_mut()
                        .ok_or_else(|| LabError::parse(1, col, "point outside a cycle"))?
                        .push(v);
                    number.clear();
                }
                Ok(())
            };
        for (i, &ch) in chars.iter().enumerate() {
            let col = i + 1;
            match ch {
                '(' => {
                    if current.is_some() {
                        return Err(LabError::parse(1, col, "nested '('"));
                    }
                    current = Some(Vec::new());
                }
                ')' => {
                    flush(&mut number, &mut current, col)?;
                    let cyc = current
                        .take()
                        .ok_or_else(|| LabError::parse(1, col, "unmatched ')'"))?;
                    if !cyc.is_empty() {
                        cycles.push(cyc);
                    }
                }
                c if c.is_ascii_digit() => number.push(c),
                c if c.is_whitespace() || c == ',' => flush(&mut number, &mut current, col)?,
                other => {
                    return Err(LabError::parse(
                        1,
                        col,
                        format!("unexpected character '{other}'"),
                    ))
                }
            }
        }
        if current.is_some() {
            return Err(LabError::parse(1, chars.len().max(1), "unterminated cycle"));
        }
        if !number.is_empty() {
            return Err(LabError::parse(1, chars.len(), "point outside a cycle"));
        }
        Perm::from_cycles(degree, &cycles).map_err(|e| match e {
            LabError::Invalid(m) => LabError::parse(1, 1, m),
            other => other,
        })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().map(|&i| i as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &x)| i == x as usize)
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u16; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u16;
        }
        Perm::from_images_unchecked(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm::from_images_unchecked(
            other
                .images
                .iter()
                .map(|&x| self.images[x as usize])
                .collect(),
        )
    }

    /// `self * other * self⁻¹`.
    pub fn conjugate(&self, other: &Perm) -> Perm {
        self.compose(other).compose(&self.inverse())
    }

    /// Commutator `[a, b] = a b a⁻¹ b⁻¹`.
    pub fn commutator(a: &Perm, b: &Perm) -> Perm {
        a.compose(b).compose(&a.inverse()).compose(&b.inverse())
    }

    pub fn order(&self) -> usize {
        self.cycles().iter().map(Vec::len).fold(1, num_integer::lcm)
    }

    /// Nontrivial cycles, each starting at its smallest point, ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cyc.push(x);
                x = self.apply(x);
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    pub fn fixes(&self, x: usize) -> bool {
        self.apply(x) == x
    }

    /// Acts on a set of points given as a sorted vector.
    pub fn apply_set(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&x| self.apply(x)).collect();
        out.sort_unstable();
        out
    }
}

impl std::ops::Mul for &Perm {
    type Output = Perm;
    fn mul(self, rhs: &Perm) -> Perm {
        self.compose(rhs)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for cyc in cycles {
            f.write_str("(")?;
            for (i, p) in cyc.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_notation_roundtrip() {
        let p = Perm::parse("(0 1 2)(3 4)", 5).unwrap();
        assert_eq!(p.to_string(), "(0 1 2)(3 4)");
        assert_eq!(p.order(), 6);
        assert_eq!(Perm::parse("()", 3).unwrap(), Perm::identity(3));
        assert_eq!(Perm::identity(4).to_string(), "()");
    }

    #[test]
    fn composition_applies_right_first() {
        let a = Perm::parse("(0 1)", 3).unwrap();
        let b = Perm::parse("(1 2)", 3).unwrap();
        // a(b(1)) = a(2) = 2
        assert_eq!((&a * &b).apply(1), 2);
        assert!(a.compose(&a.inverse()).is_identity());
    }

    #[test]
    fn malformed_cycles_report_column() {
        match Perm::parse("(0 1", 3) {
            Err(LabError::Parse { .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
        match Perm::parse("(0 x)", 3) {
            Err(LabError::Parse { column, .. }) => assert_eq!(column, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Perm::parse("(0 5)", 3).is_err());
        assert!(Perm::parse("(0 1)(1 2)", 3).is_err());
    }
}
