//! The group spec text format.
//!
//! ```text
//! [tree]
//! kind = regular          # regular | rooted | forest
//! degree = 3
//!
//! [local_group]
//! generators = (0 1 2), (0 1)
//!
//! [elements]
//! t0 = hyperbolic 0 ; @ (0 1 2)
//! s0 = portrait 0 (1 2)
//!
//! [limits]
//! depth = 4
//! word_bound = 8
//! seed = 0
//! ```
//!
//! On a forest an element may start with `on k` to act on copy `k`, and
//! components on different copies are joined with `|`.

use sha2::{Digest, Sha256};

use crate::boolalg::{Address, TreeShape};
use crate::dynamics::ActionContext;
use crate::error::{LabError, Result};
use crate::permgrp::{FiniteGroup, Perm};
use crate::tree::{local_degree, Automorphism, HyperbolicSpec, Portrait, UniversalGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub depth: usize,
    pub word_bound: usize,
    pub seed: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            depth: 4,
            word_bound: 8,
            seed: 0,
        }
    }
}

/// A parsed group spec.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub shape: TreeShape,
    pub local_generators: Vec<Perm>,
    pub elements: Vec<(String, Automorphism)>,
    pub limits: Limits,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Tree,
    Local,
    Elements,
    Limits,
}

struct Located<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

impl Located<'_> {
    fn err(&self, offset: usize, message: impl Into<String>) -> LabError {
        LabError::parse(self.line, self.column + offset, message)
    }

    /// Re-anchors an error raised while parsing a slice at `offset`.
    fn shift(&self, offset: usize, e: LabError) -> LabError {
        match e {
            LabError::Parse {
                column, message, ..
            } => LabError::parse(self.line, self.column + offset + column - 1, message),
            other => LabError::parse(self.line, self.column + offset, other.to_string()),
        }
    }
}

fn offset_in(outer: &str, inner: &str) -> usize {
    inner.as_ptr() as usize - outer.as_ptr() as usize
}

/// Splits on commas outside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_number<T: std::str::FromStr>(v: &Located<'_>) -> Result<T> {
    v.text
        .trim()
        .parse()
        .map_err(|_| v.err(0, format!("expected a number, got '{}'", v.text.trim())))
}

fn parse_address(v: &Located<'_>, offset: usize, s: &str) -> Result<Address> {
    s.parse().map_err(|e| v.shift(offset, e))
}

/// `addr perm` pairs separated by `;`, with addresses relative to `prefix`.
fn parse_decorations(
    shape: TreeShape,
    v: &Located<'_>,
    fields: &[&str],
    prefix: &[u8],
) -> Result<Vec<(Address, Perm)>> {
    let degree = local_degree(shape);
    let mut out = Vec::new();
    for field in fields {
        let off = offset_in(v.text, field);
        let t = field.trim_start();
        let off = off + (field.len() - t.len());
        let t = t.trim_end();
        let (addr, perm) = t
            .split_once(char::is_whitespace)
            .ok_or_else(|| v.err(off, format!("expected 'address permutation', got '{t}'")))?;
        let a = parse_address(v, off, addr)?;
        let perm_off = off + offset_in(t, perm.trim_start());
        let p = Perm::parse(perm.trim(), degree).map_err(|e| v.shift(perm_off, e))?;
        let mut full = prefix.to_vec();
        full.extend_from_slice(a.letters());
        out.push((Address(full), p));
    }
    Ok(out)
}

fn parse_component(shape: TreeShape, v: &Located<'_>, comp: &str) -> Result<Automorphism> {
    let base = offset_in(v.text, comp);
    let mut t = comp.trim();
    let mut copy = 0usize;
    let forest = matches!(shape, TreeShape::Forest { .. });
    if let Some(rest) = t.strip_prefix("on ") {
        if !forest {
            return Err(v.err(base, "'on k' is only meaningful on a forest"));
        }
        let rest = rest.trim_start();
        let (k, tail) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        copy = k
            .parse()
            .map_err(|_| v.err(base, format!("bad copy index '{k}'")))?;
        if copy >= shape_copies(shape) {
            return Err(v.err(base, format!("copy {copy} does not exist on {shape}")));
        }
        t = tail.trim_start();
    }
    let prefix: Vec<u8> = if forest { vec![copy as u8] } else { Vec::new() };
    let (kind, body) = t.split_once(char::is_whitespace).unwrap_or((t, ""));
    let fields: Vec<&str> = if body.trim().is_empty() {
        Vec::new()
    } else {
        body.split(';').collect()
    };
    let wrap = |e: LabError| match e {
        LabError::Parse { .. } => e,
        other => v.err(base, other.to_string()),
    };
    match kind {
        "portrait" => {
            let decos = parse_decorations(shape, v, &fields, &prefix)?;
            Ok(Portrait::new(shape, decos).map_err(wrap)?.to_automorphism())
        }
        "hyperbolic" => {
            let (word, rest) = fields
                .split_first()
                .ok_or_else(|| v.err(base, "hyperbolic needs an axis word"))?;
            let w = parse_address(v, offset_in(v.text, word), word.trim())?;
            let decos = parse_decorations(shape, v, rest, &prefix)?;
            let post = if decos.is_empty() {
                None
            } else {
                Some(Portrait::new(shape, decos).map_err(wrap)?)
            };
            HyperbolicSpec {
                copy,
                word: w.0,
                post_factor: post,
            }
            .to_automorphism(shape)
            .map_err(wrap)
        }
        other => Err(v.err(
            base,
            format!("expected 'portrait' or 'hyperbolic', got '{other}'"),
        )),
    }
}

fn shape_copies(shape: TreeShape) -> usize {
    match shape {
        TreeShape::Forest { copies, .. } => copies as usize,
        _ => 1,
    }
}

fn parse_element(shape: TreeShape, v: &Located<'_>) -> Result<Automorphism> {
    v.text
        .split('|')
        .map(|c| parse_component(shape, v, c))
        .try_fold(Automorphism::identity(shape), |acc, g| Ok(acc.compose(&g?)))
}

impl GroupSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut section = Section::None;
        let mut kind: Option<(String, usize)> = None;
        let mut degree: Option<(u8, usize)> = None;
        let mut copies: Option<u8> = None;
        let mut generators: Option<Located<'_>> = None;
        let mut raw_elements: Vec<(String, Located<'_>)> = Vec::new();
        let mut limits = Limits::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let lead = content.len() - content.trim_start().len() + 1;
            if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = match name.trim() {
                    "tree" => Section::Tree,
                    "local_group" => Section::Local,
                    "elements" => Section::Elements,
                    "limits" => Section::Limits,
                    other => {
                        return Err(LabError::parse(
                            line,
                            lead,
                            format!("unknown section [{other}]"),
                        ))
                    }
                };
                continue;
            }
            let (key, _) = trimmed
                .split_once('=')
                .ok_or_else(|| LabError::parse(line, lead, "expected 'key = value'"))?;
            let key = key.trim();
            let value_start = content.find('=').expect("has '='") + 1;
            let vtext = &content[value_start..];
            let vtrim = vtext.trim();
            let located = Located {
                line,
                column: value_start + 1 + (vtext.len() - vtext.trim_start().len()),
                text: vtrim,
            };
            match (section, key) {
                (Section::None, _) => {
                    return Err(LabError::parse(line, lead, "key outside any section"))
                }
                (Section::Tree, "kind") => kind = Some((vtrim.to_string(), line)),
                (Section::Tree, "degree") => degree = Some((parse_number(&located)?, line)),
                (Section::Tree, "copies") => copies = Some(parse_number(&located)?),
                (Section::Local, "generators") => generators = Some(located),
                (Section::Elements, name) => {
                    if name.is_empty()
                        || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                    {
                        return Err(LabError::parse(
                            line,
                            lead,
                            format!("bad element name '{name}'"),
                        ));
                    }
                    if raw_elements.iter().any(|(n, _)| n == name) {
                        return Err(LabError::parse(
                            line,
                            lead,
                            format!("element '{name}' defined twice"),
                        ));
                    }
                    raw_elements.push((name.to_string(), located));
                }
                (Section::Limits, "depth") => limits.depth = parse_number(&located)?,
                (Section::Limits, "word_bound") => limits.word_bound = parse_number(&located)?,
                (Section::Limits, "seed") => limits.seed = parse_number(&located)?,
                (_, other) => {
                    return Err(LabError::parse(
                        line,
                        lead,
                        format!("unknown key '{other}'"),
                    ))
                }
            }
        }
        let (kind, kind_line) = kind.ok_or_else(|| LabError::parse(1, 1, "missing [tree] kind"))?;
        let (degree, degree_line) =
            degree.ok_or_else(|| LabError::parse(1, 1, "missing [tree] degree"))?;
        let shape = match kind.as_str() {
            "regular" if degree >= 3 => TreeShape::regular(degree),
            "rooted" if degree >= 2 => TreeShape::rooted(degree),
            "forest" if degree >= 3 => TreeShape::forest(
                copies.ok_or_else(|| LabError::parse(kind_line, 1, "a forest needs 'copies'"))?,
                degree,
            ),
            "regular" | "rooted" | "forest" => {
                return Err(LabError::parse(
                    degree_line,
                    1,
                    format!("degree {degree} is too small for {kind}"),
                ))
            }
            other => {
                return Err(LabError::parse(
                    kind_line,
                    1,
                    format!("unknown tree kind '{other}'"),
                ))
            }
        };
        if copies.is_some() && !matches!(shape, TreeShape::Forest { .. }) {
            return Err(LabError::parse(
                kind_line,
                1,
                "'copies' is only meaningful on a forest",
            ));
        }
        let ldeg = local_degree(shape);
        let local_generators = match &generators {
            None => Vec::new(),
            Some(v) => split_top_level(v.text)
                .into_iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    let off = offset_in(v.text, s) + (s.len() - s.trim_start().len());
                    Perm::parse(s.trim(), ldeg).map_err(|e| v.shift(off, e))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let elements = raw_elements
            .iter()
            .map(|(name, v)| Ok((name.clone(), parse_element(shape, v)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupSpec {
            shape,
            local_generators,
            elements,
            limits,
        })
    }

    pub fn local_group(&self) -> Result<FiniteGroup> {
        FiniteGroup::new(local_degree(self.shape), self.local_generators.clone())
    }

    pub fn universal(&self) -> Result<UniversalGroup> {
        UniversalGroup::new(self.shape, self.local_group()?)
    }

    pub fn element(&self, name: &str) -> Result<&Automorphism> {
        self.elements
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, g)| g)
            .ok_or_else(|| LabError::invalid(format!("no element named '{name}'")))
    }

    pub fn context(&self, depth: usize, word_bound: usize) -> Result<ActionContext> {
        ActionContext::new(self.shape, self.elements.iter().cloned(), depth, word_bound)
    }

    /// The canonical text of the spec: every element in normal form.
    pub fn render(&self) -> String {
        let mut s = String::from("[tree]\n");
        match self.shape {
            TreeShape::Rooted { degree } => {
                s.push_str(&format!("kind = rooted\ndegree = {degree}\n"))
            }
            TreeShape::Regular { degree } => {
                s.push_str(&format!("kind = regular\ndegree = {degree}\n"))
            }
            TreeShape::Forest { copies, degree } => s.push_str(&format!(
                "kind = forest\ndegree = {degree}\ncopies = {copies}\n"
            )),
        }
        let gens: Vec<String> = self
            .local_generators
            .iter()
            .map(ToString::to_string)
            .collect();
        s.push_str(&format!(
            "\n[local_group]\ngenerators = {}\n\n[elements]\n",
            gens.join(", ")
        ));
        for (name, g) in &self.elements {
            s.push_str(&format!("{name} = {}\n", g.render()));
        }
        s.push_str(&format!(
            "\n[limits]\ndepth = {}\nword_bound = {}\nseed = {}\n",
            self.limits.depth, self.limits.word_bound, self.limits.seed
        ));
        s
    }

    /// Hex SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const U_S3: &str = "\
# U(Sym(3)) on the 3-regular tree
[tree]
kind = regular
degree = 3

[local_group]
generators = (0 1 2), (0 1)

[elements]
t0 = hyperbolic 0 ; @ (0 1 2)
r01 = portrait @ (0 1)
s0 = portrait 0 (1 2)
";

    #[test]
    fn parses_and_round_trips() {
        let spec = GroupSpec::parse(U_S3).unwrap();
        assert_eq!(spec.shape, TreeShape::regular(3));
        assert_eq!(spec.elements.len(), 3);
        assert_eq!(spec.limits, Limits::default());
        let again = GroupSpec::parse(&spec.render()).unwrap();
        assert_eq!(again.render(), spec.render());
        assert_eq!(again.hash(), spec.hash());
        assert_eq!(spec.hash().len(), 64);
        let t = spec.element("t0").unwrap();
        assert_eq!(t.image(&"0".parse().unwrap()), "01".parse().unwrap());
        assert!(spec.universal().unwrap().contains(t));
    }

    #[test]
    fn reports_positions() {
        let bad = U_S3.replace("(0 1 2), (0 1)", "(0 1 2), (0 x)");
        match GroupSpec::parse(&bad) {
            Err(LabError::Parse { line, column, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(column, 26);
            }
            other => panic!("{other:?}"),
        }
        let unknown = U_S3.replace("degree = 3", "degree = 3\ncolour = red");
        assert!(matches!(
            GroupSpec::parse(&unknown),
            Err(LabError::Parse { line: 5, .. })
        ));
        let bad_site = U_S3.replace("s0 = portrait 0 (1 2)", "s0 = portrait 0 (0 1)");
        assert!(matches!(
            GroupSpec::parse(&bad_site),
            Err(LabError::Parse { line: 12, .. })
        ));
    }

    #[test]
    fn forest_components() {
        let text = "\
[tree]
kind = forest
degree = 3
copies = 2
[local_group]
generators = (0 1 2), (0 1)
[elements]
t = on 0 hyperbolic 0 ; @ (0 1 2) | on 1 hyperbolic 0 ; @ (0 1 2)
";
        let spec = GroupSpec::parse(text).unwrap();
        let t = spec.element("t").unwrap();
        assert_eq!(t.image(&"0".parse().unwrap()), "00".parse().unwrap());
        assert_eq!(t.image(&"1".parse().unwrap()), "10".parse().unwrap());
        let again = GroupSpec::parse(&spec.render()).unwrap();
        assert_eq!(again.element("t").unwrap(), t);
    }
}
