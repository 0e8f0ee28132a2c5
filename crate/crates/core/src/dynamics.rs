//! Boundary dynamics at a finite depth: minimality, skewering, minorising
//! sets and their degree, pair compression, free subsemigroups, orbit joins
//! and invariant-measure feasibility.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boolalg::{measure_weights, Address, CylinderClopen, TreeShape};
use crate::check::{all_passed, Check};
use crate::error::{LabError, Result};
use crate::lp::{self, Feasibility};
use crate::par;
use crate::tree::{Automorphism, Graph};

/// A word in the context's generators; the first letter is applied last.
pub type Word = Vec<String>;

/// Renders a word as `a b c`, or `e` when empty.
pub fn word_string(w: &[String]) -> String {
    if w.is_empty() {
        "e".to_string()
    } else {
        w.join(" ")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Generator {
    pub name: String,
    pub element: Automorphism,
}

/// Named generators closed under inversion, a word bound and a working depth.
#[derive(Clone, Debug, Serialize)]
pub struct ActionContext {
    pub shape: TreeShape,
    pub generators: Vec<Generator>,
    pub word_bound: usize,
    pub depth: usize,
    #[serde(skip)]
    pub parallel: bool,
}

impl ActionContext {
    /// Adds `name^-1` for every element that is not an involution, then
    /// sorts the alphabet by name.
    pub fn new(
        shape: TreeShape,
        named: impl IntoIterator<Item = (String, Automorphism)>,
        depth: usize,
        word_bound: usize,
    ) -> Result<Self> {
        let mut generators: Vec<Generator> = Vec::new();
        for (name, element) in named {
            if element.shape() != shape {
                return Err(LabError::invalid(format!(
                    "generator {name} lives on {}",
                    element.shape()
                )));
            }
            let inv = element.inverse();
            if inv != element {
                generators.push(Generator {
                    name: format!("{name}^-1"),
                    element: inv,
                });
            }
            generators.push(Generator { name, element });
        }
        generators.sort_by(|a, b| a.name.cmp(&b.name));
        if let Some(w) = generators.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(LabError::invalid(format!(
                "duplicate generator name {}",
                w[0].name
            )));
        }
        Ok(ActionContext {
            shape,
            generators,
            word_bound,
            depth,
            parallel: par::available(),
        })
    }

    pub fn with_depth(&self, depth: usize) -> Self {
        ActionContext {
            depth,
            ..self.clone()
        }
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn generator(&self, name: &str) -> Option<&Automorphism> {
        self.generators
            .iter()
            .find(|g| g.name == name)
            .map(|g| &g.element)
    }

    /// The element named by a word.
    pub fn evaluate(&self, word: &[String]) -> Result<Automorphism> {
        word.iter()
            .try_fold(Automorphism::identity(self.shape), |acc, name| {
                self.generator(name)
                    .map(|g| acc.compose(g))
                    .ok_or_else(|| LabError::invalid(format!("unknown generator {name}")))
            })
    }

    pub fn max_displacement(&self) -> usize {
        self.generators
            .iter()
            .map(|g| g.element.displacement())
            .max()
            .unwrap_or(0)
    }

    /// Depth-`n` cylinders, lexicographically.
    pub fn cylinders(&self, n: usize) -> Vec<CylinderClopen> {
        self.shape
            .sphere(n)
            .into_iter()
            .map(|a| CylinderClopen::cylinder(self.shape, a))
            .collect()
    }

    fn word_of(&self, idx: &[usize]) -> Word {
        idx.iter()
            .map(|&i| self.generators[i].name.clone())
            .collect()
    }

    /// Breadth-first search over the states reachable from `start` by words
    /// of length at most the word bound, in lexicographic generator order.
    /// `visit` sees each new state once with its shortest word and returns
    /// true to stop. Returns whether the search was stopped.
    fn explore<S, F, V>(&self, start: S, act: F, mut visit: V) -> bool
    where
        S: Clone + Eq + Hash,
        F: Fn(&Automorphism, &S) -> S,
        V: FnMut(&S, &[usize]) -> bool,
    {
        let mut seen: HashSet<S> = HashSet::from([start.clone()]);
        if visit(&start, &[]) {
            return true;
        }
        let mut frontier: Vec<(S, Vec<usize>)> = vec![(start, Vec::new())];
        for _ in 0..self.word_bound {
            let mut next = Vec::new();
            for (state, word) in &frontier {
                for (i, g) in self.generators.iter().enumerate() {
                    let image = act(&g.element, state);
                    if seen.insert(image.clone()) {
                        let mut w = Vec::with_capacity(word.len() + 1);
                        w.push(i);
                        w.extend_from_slice(word);
                        if visit(&image, &w) {
                            return true;
                        }
                        next.push((image, w));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        false
    }

    fn clopen_orbit<V>(&self, start: &CylinderClopen, visit: V) -> bool
    where
        V: FnMut(&CylinderClopen, &[usize]) -> bool,
    {
        self.explore(start.clone(), |g, c| g.image_clopen(c), visit)
    }
}

/// A word carrying a source onto an image inside a target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub source: CylinderClopen,
    pub target: CylinderClopen,
    pub word: Word,
    pub image: CylinderClopen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinimalityVerdict {
    MinimalAtDepth,
    NotMinimal,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityReport {
    pub depth: usize,
    pub word_bound: usize,
    pub verdict: MinimalityVerdict,
    pub pairs: usize,
    pub longest_word: usize,
    /// first ordered pair with no word reaching it
    pub counterexample: Option<(CylinderClopen, CylinderClopen)>,
}

/// For every ordered pair `(a, b)` of depth-`n` cylinders, looks for a word
/// of length at most `B` with `w(a) ∧ b ≠ 0`.
pub fn check_minimal(ctx: &ActionContext) -> MinimalityReport {
    let cyls = ctx.cylinders(ctx.depth);
    let per_source = par::map(&cyls, ctx.parallel, |a| {
        let mut reached: Vec<Option<usize>> = vec![None; cyls.len()];
        let mut left = cyls.len();
        ctx.clopen_orbit(a, |img, w| {
            for (j, b) in cyls.iter().enumerate() {
                if reached[j].is_none() && !img.is_disjoint(b) {
                    reached[j] = Some(w.len());
                    left -= 1;
                }
            }
            left == 0
        });
        reached
    });
    let mut counterexample = None;
    let mut longest = 0;
    'outer: for (i, reached) in per_source.iter().enumerate() {
        for (j, r) in reached.iter().enumerate() {
            match r {
                Some(l) => longest = longest.max(*l),
                None => {
                    counterexample = Some((cyls[i].clone(), cyls[j].clone()));
                    break 'outer;
                }
            }
        }
    }
    MinimalityReport {
        depth: ctx.depth,
        word_bound: ctx.word_bound,
        verdict: if counterexample.is_none() {
            MinimalityVerdict::MinimalAtDepth
        } else {
            MinimalityVerdict::NotMinimal
        },
        pairs: cyls.len() * cyls.len(),
        longest_word: longest,
        counterexample,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Skewering {
    pub word: Word,
    pub element: Automorphism,
    pub alpha: CylinderClopen,
    pub g_alpha: CylinderClopen,
    pub beta: CylinderClopen,
    /// uniform measures of α and gα, as exact fractions
    pub measures: (String, String),
}

impl Skewering {
    fn new(word: Word, element: Automorphism, alpha: CylinderClopen) -> Self {
        let g_alpha = element.image_clopen(&alpha);
        let beta = alpha.difference(&g_alpha);
        let measures = (alpha.measure().to_string(), g_alpha.measure().to_string());
        Skewering {
            word,
            element,
            alpha,
            g_alpha,
            beta,
            measures,
        }
    }
}

/// First element (by word length, then lexicographically) with a cylinder of
/// depth `1..=n` mapped strictly inside itself.
pub fn skewering_search(ctx: &ActionContext) -> Option<Skewering> {
    let candidates: Vec<CylinderClopen> = (1..=ctx.depth.max(1))
        .flat_map(|k| ctx.cylinders(k))
        .collect();
    let mut found = None;
    ctx.explore(
        Automorphism::identity(ctx.shape),
        |g, x| g.compose(x),
        |x, w| {
            if w.is_empty() {
                return false;
            }
            if let Some(alpha) = candidates.iter().find(|a| x.image_clopen(a).lt(a)) {
                found = Some(Skewering::new(ctx.word_of(w), x.clone(), alpha.clone()));
                return true;
            }
            false
        },
    );
    found
}

/// Targets among `targets` below which some translate of `c` lies strictly,
/// with the first witness for each.
fn coverage(
    ctx: &ActionContext,
    c: &CylinderClopen,
    targets: &[CylinderClopen],
) -> Vec<Option<Witness>> {
    let mut out: Vec<Option<Witness>> = vec![None; targets.len()];
    let mut left = targets.len();
    ctx.clopen_orbit(c, |img, w| {
        for (j, b) in targets.iter().enumerate() {
            if out[j].is_none() && img.lt(b) && !img.is_zero() {
                out[j] = Some(Witness {
                    source: c.clone(),
                    target: b.clone(),
                    word: ctx.word_of(w),
                    image: img.clone(),
                });
                left -= 1;
            }
        }
        left == 0
    });
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MinorisingSet {
    pub depth: usize,
    pub set: Vec<CylinderClopen>,
    /// one witness per depth-`n` target cylinder
    pub witnesses: Vec<Witness>,
    pub longest_word: usize,
}

/// Smallest set of depth-`n` cylinders whose translates dip strictly below
/// every depth-`n` cylinder.
pub fn minorising_set(ctx: &ActionContext) -> Result<MinorisingSet> {
    let n = ctx.depth.max(1);
    let targets = ctx.cylinders(n);
    let table = par::map(&targets, ctx.parallel, |c| coverage(ctx, c, &targets));
    let exhausted = || LabError::SearchExhausted {
        what: format!("minorising set at depth {n}"),
        bound: ctx.word_bound,
    };
    let covered_by =
        |set: &[usize]| (0..targets.len()).all(|j| set.iter().any(|&i| table[i][j].is_some()));
    let mut chosen: Option<Vec<usize>> = None;
    for k in 1..=targets.len().min(4) {
        if let Some(c) = (0..targets.len()).combinations(k).find(|c| covered_by(c)) {
            chosen = Some(c);
            break;
        }
    }
    if chosen.is_none() {
        // greedy cover beyond the exhaustive range
        let mut set: Vec<usize> = Vec::new();
        let mut open: HashSet<usize> = (0..targets.len()).collect();
        while !open.is_empty() {
            let best = (0..targets.len())
                .max_by_key(|&i| {
                    (
                        open.iter().filter(|&&j| table[i][j].is_some()).count(),
                        usize::MAX - i,
                    )
                })
                .filter(|&i| open.iter().any(|&j| table[i][j].is_some()))
                .ok_or_else(exhausted)?;
            open.retain(|&j| table[best][j].is_none());
            set.push(best);
        }
        set.sort_unstable();
        chosen = Some(set);
    }
    let set = chosen.ok_or_else(exhausted)?;
    let witnesses: Vec<Witness> = (0..targets.len())
        .map(|j| {
            set.iter()
                .find_map(|&i| table[i][j].clone())
                .expect("covered")
        })
        .collect();
    Ok(MinorisingSet {
        depth: n,
        set: set.iter().map(|&i| targets[i].clone()).collect(),
        longest_word: witnesses.iter().map(|w| w.word.len()).max().unwrap_or(0),
        witnesses,
    })
}

/// Whether the orbit of a single clopen is minorising at the context depth.
pub fn is_minorising_orbit(ctx: &ActionContext, c: &CylinderClopen) -> bool {
    let targets = ctx.cylinders(ctx.depth.max(1));
    coverage(ctx, c, &targets).iter().all(Option::is_some)
}

/// Union of all translates of `a`, saturated until invariant.
fn saturate(ctx: &ActionContext, a: &CylinderClopen) -> Option<CylinderClopen> {
    let mut cur = a.clone();
    for _ in 0..=ctx.word_bound.max(1) * 4 {
        let next = ctx.generators.iter().fold(cur.clone(), |acc, g| {
            acc.join(&g.element.image_clopen(&cur))
        });
        if next == cur {
            return Some(cur);
        }
        cur = next;
    }
    None
}

fn is_invariant(ctx: &ActionContext, a: &CylinderClopen) -> bool {
    ctx.generators
        .iter()
        .all(|g| g.element.image_clopen(a) == *a)
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub depth: usize,
    pub degree: usize,
    pub minorising: Vec<CylinderClopen>,
    /// saturation of each minorising cylinder under the action
    pub upsilon: Vec<CylinderClopen>,
    /// minimal nonzero invariant clopens among meets of the υ_i
    pub minimal_invariant: Vec<CylinderClopen>,
    pub reduced: Vec<CylinderClopen>,
    pub checks: Vec<Check>,
}

/// Degree of the minorising action: the number of minimal nonzero invariant
/// clopens cut out by the saturations of a minorising set.
pub fn minorising_degree(ctx: &ActionContext) -> Result<DegreeReport> {
    let m = minorising_set(ctx)?;
    let upsilon: Vec<CylinderClopen> = m
        .set
        .iter()
        .map(|c| {
            saturate(ctx, c).ok_or_else(|| LabError::SearchExhausted {
                what: format!("saturation of {c}"),
                bound: ctx.word_bound,
            })
        })
        .collect::<Result<_>>()?;
    let mut meets: Vec<CylinderClopen> = Vec::new();
    for k in 1..=upsilon.len() {
        for s in (0..upsilon.len()).combinations(k) {
            let x = s.iter().fold(CylinderClopen::top(ctx.shape), |acc, &i| {
                acc.meet(&upsilon[i])
            });
            if !x.is_zero() && !meets.contains(&x) {
                meets.push(x);
            }
        }
    }
    let mut minimal: Vec<CylinderClopen> = meets
        .iter()
        .filter(|x| !meets.iter().any(|y| y.lt(x)))
        .cloned()
        .collect();
    minimal.sort_by_key(ToString::to_string);
    let reduced: Vec<CylinderClopen> = minimal
        .iter()
        .filter_map(|u| m.set.iter().find(|c| c.le(u)).cloned())
        .collect();
    let n = m.depth;
    let cyls = ctx.cylinders(n);
    let dense = par::all(&minimal, ctx.parallel, |u| {
        let inside: Vec<&CylinderClopen> = cyls.iter().filter(|c| c.le(u)).collect();
        inside.iter().all(|a| {
            let mut hit = vec![false; inside.len()];
            let mut left = inside.len();
            ctx.clopen_orbit(a, |img, _| {
                for (j, b) in inside.iter().enumerate() {
                    if !hit[j] && !img.is_disjoint(b) {
                        hit[j] = true;
                        left -= 1;
                    }
                }
                left == 0
            });
            left == 0
        })
    });
    let checks = vec![
        Check::new(
            "invariant",
            minimal.iter().all(|u| is_invariant(ctx, u)),
            "each minimal clopen is invariant under every generator",
        ),
        Check::new(
            "disjoint",
            minimal
                .iter()
                .tuple_combinations()
                .all(|(a, b)| a.is_disjoint(b)),
            "minimal invariant clopens are pairwise disjoint",
        ),
        Check::new(
            "reduced-size",
            reduced.len() == minimal.len(),
            format!("reduced minorising set has {} elements", reduced.len()),
        ),
        Check::new(
            "dense-orbits",
            dense,
            format!("every depth-{n} cylinder inside each minimal clopen reaches all others"),
        ),
    ];
    Ok(DegreeReport {
        depth: n,
        degree: minimal.len(),
        minorising: m.set,
        upsilon,
        minimal_invariant: minimal,
        reduced,
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompressionSchedule {
    pub source: (Address, Address),
    pub target: CylinderClopen,
    pub word: Word,
    /// images of the two source cylinders after each letter, innermost first
    pub trace: Vec<(CylinderClopen, CylinderClopen)>,
}

impl CompressionSchedule {
    /// Replays the word and checks that both cylinders land in the target.
    pub fn replay(&self, ctx: &ActionContext) -> Result<bool> {
        let g = ctx.evaluate(&self.word)?;
        let (x, y) = (
            CylinderClopen::cylinder(ctx.shape, self.source.0.clone()),
            CylinderClopen::cylinder(ctx.shape, self.source.1.clone()),
        );
        Ok(g.image_clopen(&x).le(&self.target) && g.image_clopen(&y).le(&self.target))
    }
}

/// Shortest word moving the cylinders of both ends inside `target`.
pub fn pair_compression(
    ctx: &ActionContext,
    xi: &Address,
    eta: &Address,
    target: &CylinderClopen,
) -> Result<CompressionSchedule> {
    if target.is_zero() {
        return Err(LabError::invalid("compression target is empty"));
    }
    let start = (
        CylinderClopen::cylinder(ctx.shape, xi.clone()),
        CylinderClopen::cylinder(ctx.shape, eta.clone()),
    );
    let mut found: Option<Vec<usize>> = None;
    ctx.explore(
        start.clone(),
        |g, (a, b)| (g.image_clopen(a), g.image_clopen(b)),
        |(a, b), w| {
            if a.le(target) && b.le(target) {
                found = Some(w.to_vec());
                return true;
            }
            false
        },
    );
    let idx = found.ok_or_else(|| LabError::SearchExhausted {
        what: format!("compression of ({xi}, {eta}) into {target}"),
        bound: ctx.word_bound,
    })?;
    let mut trace = Vec::new();
    let mut cur = start;
    for &i in idx.iter().rev() {
        let g = &ctx.generators[i].element;
        cur = (g.image_clopen(&cur.0), g.image_clopen(&cur.1));
        trace.push(cur.clone());
    }
    Ok(CompressionSchedule {
        source: (xi.clone(), eta.clone()),
        target: target.clone(),
        word: ctx.word_of(&idx),
        trace,
    })
}

/// Seeded random pairs of depth-`end_depth` vertices.
pub fn sample_end_pairs(
    shape: TreeShape,
    end_depth: usize,
    count: usize,
    seed: u64,
) -> Vec<(Address, Address)> {
    let sphere = shape.sphere(end_depth);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = sphere[rng.gen_range(0..sphere.len())].clone();
            let b = sphere[rng.gen_range(0..sphere.len())].clone();
            (a, b)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ProximalityReport {
    pub end_depth: usize,
    pub target: CylinderClopen,
    pub seed: u64,
    pub attempted: usize,
    pub compressed: usize,
    pub longest_word: usize,
    pub schedules: Vec<CompressionSchedule>,
    /// pairs with no schedule within the word bound
    pub failures: Vec<(Address, Address)>,
}

/// Compresses seeded end pairs into a fixed target.
pub fn proximality_sample(
    ctx: &ActionContext,
    end_depth: usize,
    count: usize,
    seed: u64,
    target: &CylinderClopen,
) -> Result<ProximalityReport> {
    let pairs = sample_end_pairs(ctx.shape, end_depth, count, seed);
    let results = par::map(&pairs, ctx.parallel, |(a, b)| {
        pair_compression(ctx, a, b, target)
    });
    let mut schedules = Vec::new();
    let mut failures = Vec::new();
    for (pair, r) in pairs.into_iter().zip(results) {
        match r {
            Ok(s) => schedules.push(s),
            Err(LabError::SearchExhausted { .. }) => failures.push(pair),
            Err(e) => return Err(e),
        }
    }
    Ok(ProximalityReport {
        end_depth,
        target: target.clone(),
        seed,
        attempted: count,
        compressed: schedules.len(),
        longest_word: schedules.iter().map(|s| s.word.len()).max().unwrap_or(0),
        schedules,
        failures,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WordImage {
    pub word: String,
    pub image: CylinderClopen,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeSemigroupCertificate {
    pub g_word: Word,
    pub h_word: Word,
    pub g: Automorphism,
    pub h: Automorphism,
    pub alpha: CylinderClopen,
    pub g_alpha: CylinderClopen,
    pub h_alpha: CylinderClopen,
    pub max_length: usize,
    pub rows: usize,
    pub collisions: usize,
    pub table: Vec<WordImage>,
    pub checks: Vec<Check>,
}

/// Ping-pong pair `g`, `h = r g r⁻¹` with `gα < α` and `hα ≤ α ∖ gα`, and
/// the images of `α` under all words of length at most `max_len` in them.
pub fn free_semigroup_certificate(
    ctx: &ActionContext,
    max_len: usize,
) -> Result<FreeSemigroupCertificate> {
    let sk = skewering_search(ctx).ok_or_else(|| LabError::SearchExhausted {
        what: "skewering element".into(),
        bound: ctx.word_bound,
    })?;
    let (g, alpha) = (sk.element.clone(), sk.alpha.clone());
    let g_alpha = sk.g_alpha.clone();
    let beta = sk.beta.clone();
    let ginv = g.inverse();
    let mut conj: Option<(Vec<usize>, Automorphism)> = None;
    ctx.explore(
        Automorphism::identity(ctx.shape),
        |s, x| s.compose(x),
        |r, w| {
            let h = r.compose(&g).compose(&r.inverse());
            let ha = h.image_clopen(&alpha);
            if h != g && h != ginv && !ha.is_zero() && ha.le(&beta) {
                conj = Some((w.to_vec(), h));
                return true;
            }
            false
        },
    );
    let (r_idx, h) = conj.ok_or_else(|| LabError::SearchExhausted {
        what: "conjugate of the skewering element into α ∖ gα".into(),
        bound: ctx.word_bound,
    })?;
    let r_word = ctx.word_of(&r_idx);
    let r_inv_word: Word = r_word
        .iter()
        .rev()
        .map(|n| inverse_name(ctx, n))
        .collect::<Result<_>>()?;
    let h_word: Word = r_word
        .iter()
        .cloned()
        .chain(sk.word.iter().cloned())
        .chain(r_inv_word)
        .collect();
    let h_alpha = h.image_clopen(&alpha);

    // level k holds the words of length k, letters 'g' and 'h', leftmost applied last
    let mut table = vec![WordImage {
        word: String::new(),
        image: alpha.clone(),
    }];
    let mut level = vec![(String::new(), alpha.clone())];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (letter, e) in [('g', &g), ('h', &h)] {
            for (w, img) in &level {
                next.push((format!("{letter}{w}"), e.image_clopen(img)));
            }
        }
        table.extend(next.iter().map(|(w, i)| WordImage {
            word: w.clone(),
            image: i.clone(),
        }));
        level = next;
    }
    let mut seen: HashMap<&CylinderClopen, usize> = HashMap::new();
    for row in &table {
        *seen.entry(&row.image).or_default() += 1;
    }
    let collisions: usize = seen.values().map(|c| c - 1).sum();
    let starts = |l: char| table.iter().filter(move |r| r.word.starts_with(l));
    let g_union = starts('g').fold(CylinderClopen::zero(ctx.shape), |acc, r| acc.join(&r.image));
    let h_union = starts('h').fold(CylinderClopen::zero(ctx.shape), |acc, r| acc.join(&r.image));
    let checks = vec![
        Check::new("skewering", g_alpha.lt(&alpha), format!("g{alpha} = {g_alpha}")),
        Check::new(
            "ping-pong",
            h_alpha.le(&beta) && h_alpha.is_disjoint(&g_alpha) && !h_alpha.is_zero(),
            format!("h{alpha} = {h_alpha} inside {beta}"),
        ),
        Check::new(
            "distinct-images",
            collisions == 0,
            format!("{} words, {collisions} collisions; distinct images give distinct cosets of the stabiliser of alpha", table.len()),
        ),
        Check::new(
            "prefix-disjoint",
            g_union.is_disjoint(&h_union),
            "images of words with different first letters have meet 0",
        ),
    ];
    Ok(FreeSemigroupCertificate {
        g_word: sk.word,
        h_word,
        g,
        h,
        alpha,
        g_alpha,
        h_alpha,
        max_length: max_len,
        rows: table.len(),
        collisions,
        table,
        checks,
    })
}

fn inverse_name(ctx: &ActionContext, name: &str) -> Result<String> {
    let g = ctx
        .generator(name)
        .ok_or_else(|| LabError::invalid(format!("unknown generator {name}")))?;
    let inv = g.inverse();
    ctx.generators
        .iter()
        .find(|x| x.element == inv)
        .map(|x| x.name.clone())
        .ok_or_else(|| LabError::invalid(format!("no inverse for {name}")))
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitJoin {
    pub alpha: CylinderClopen,
    pub alpha_star: CylinderClopen,
    pub witnesses: Vec<Witness>,
    pub invariant: bool,
}

/// Saturates `α` to the invariant clopen `α*` and picks translates of `α`
/// whose join is `α*`, largest first.
pub fn orbit_join(ctx: &ActionContext, alpha: &CylinderClopen) -> Result<OrbitJoin> {
    if alpha.is_zero() {
        return Err(LabError::invalid("orbit join of the empty set"));
    }
    let exhausted = || LabError::SearchExhausted {
        what: format!("orbit join of {alpha}"),
        bound: ctx.word_bound,
    };
    let star = saturate(ctx, alpha).ok_or_else(exhausted)?;
    let mut translates: Vec<(CylinderClopen, Vec<usize>)> = Vec::new();
    ctx.clopen_orbit(alpha, |img, w| {
        translates.push((img.clone(), w.to_vec()));
        false
    });
    translates
        .sort_by(|(a, wa), (b, wb)| b.measure().cmp(&a.measure()).then(wa.len().cmp(&wb.len())));
    let mut acc = CylinderClopen::zero(ctx.shape);
    let mut witnesses = Vec::new();
    for (img, w) in &translates {
        if acc == star {
            break;
        }
        if !img.le(&acc) {
            acc = acc.join(img);
            witnesses.push(Witness {
                source: alpha.clone(),
                target: star.clone(),
                word: ctx.word_of(w),
                image: img.clone(),
            });
        }
    }
    if acc != star {
        return Err(exhausted());
    }
    Ok(OrbitJoin {
        alpha: alpha.clone(),
        invariant: is_invariant(ctx, &star),
        alpha_star: star,
        witnesses,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MeasureVerdict {
    Feasible {
        uniform: bool,
        /// weights of the depth-`n` cylinders
        weights: BTreeMap<String, String>,
    },
    Infeasible {
        /// Farkas multipliers, one per constraint row
        farkas: Vec<String>,
        /// the skewering chain `μ(α) = μ(gα) + μ(α ∖ gα) > μ(gα)`
        chain: Option<Skewering>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    pub depth: usize,
    pub variable_depth: usize,
    pub variables: usize,
    pub constraints: usize,
    pub verdict: MeasureVerdict,
    pub verified: bool,
}

impl MeasureReport {
    pub fn feasible(&self) -> bool {
        matches!(self.verdict, MeasureVerdict::Feasible { .. })
    }
}

/// Variable depth, variables, constraint rows and right-hand side.
pub type InvarianceSystem = (usize, Vec<Address>, Vec<Vec<i64>>, Vec<i64>);

/// The invariance system: one row `μ(g·c) − μ(c) = 0` per generator and
/// depth-`n` cylinder (zero and repeated rows dropped), then `Σμ = 1`,
/// over the cylinders at depth `n + max displacement`.
pub fn invariance_system(ctx: &ActionContext, n: usize) -> Result<InvarianceSystem> {
    let big = n + ctx.max_displacement();
    let vars = ctx.shape.sphere(big);
    let index: HashMap<&Address, usize> = vars.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    for g in &ctx.generators {
        for c in ctx.cylinders(n) {
            let mut row = vec![0i64; vars.len()];
            for a in g.element.image_clopen(&c).refine(big)? {
                row[index[&a]] += 1;
            }
            for a in c.refine(big)? {
                row[index[&a]] -= 1;
            }
            if row.iter().any(|&v| v != 0) && seen.insert(row.clone()) {
                rows.push(row);
            }
        }
    }
    let mut b = vec![0i64; rows.len()];
    rows.push(vec![1; vars.len()]);
    b.push(1);
    Ok((big, vars, rows, b))
}

/// Exact search for a finitely additive invariant probability measure on
/// the depth-`n` cylinders.
pub fn invariant_measure_search(ctx: &ActionContext, n: usize) -> Result<MeasureReport> {
    let (big, vars, a, b) = invariance_system(ctx, n)?;
    let uniform: Vec<BigRational> = {
        let w = measure_weights(ctx.shape, big);
        vars.iter().map(|v| w[v].clone()).collect()
    };
    let aggregate = |x: &[BigRational]| -> BTreeMap<String, String> {
        let mut out: BTreeMap<Address, BigRational> = BTreeMap::new();
        for (v, val) in vars.iter().zip(x) {
            let key = Address(v.letters()[..n].to_vec());
            *out.entry(key).or_insert_with(BigRational::zero) += val;
        }
        out.into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    };
    let (verdict, verified) = if lp::is_solution(&a, &b, &uniform) {
        (
            MeasureVerdict::Feasible {
                uniform: true,
                weights: aggregate(&uniform),
            },
            true,
        )
    } else {
        match lp::feasibility(&a, &b) {
            Feasibility::Feasible(x) => {
                let ok = lp::is_solution(&a, &b, &x);
                (
                    MeasureVerdict::Feasible {
                        uniform: false,
                        weights: aggregate(&x),
                    },
                    ok,
                )
            }
            Feasibility::Infeasible(y) => {
                let ok = lp::is_farkas(&a, &b, &y);
                (
                    MeasureVerdict::Infeasible {
                        farkas: y.iter().map(ToString::to_string).collect(),
                        chain: skewering_search(&ctx.with_depth(n)),
                    },
                    ok,
                )
            }
        }
    };
    Ok(MeasureReport {
        depth: n,
        variable_depth: big,
        variables: vars.len(),
        constraints: a.len(),
        verdict,
        verified,
    })
}

/// Depth-`n` cylinders as nodes, with an edge `c → d` labelled `g`
/// whenever `g·c` meets `d`.
pub fn stone_orbit_graph(ctx: &ActionContext) -> Graph {
    let cyls = ctx.cylinders(ctx.depth);
    let mut edges = Vec::new();
    for (i, c) in cyls.iter().enumerate() {
        for g in &ctx.generators {
            let img = g.element.image_clopen(c);
            for (j, d) in cyls.iter().enumerate() {
                if !img.is_disjoint(d) {
                    edges.push((i, j, g.name.clone()));
                }
            }
        }
    }
    Graph {
        nodes: cyls.iter().map(ToString::to_string).collect(),
        edges,
        undirected: false,
    }
}

/// Whether every check in a list passed; re-exported for report builders.
pub fn verified(checks: &[Check]) -> bool {
    all_passed(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgrp::Perm;
    use crate::tree::{HyperbolicSpec, Portrait};

    fn t3() -> TreeShape {
        TreeShape::regular(3)
    }

    fn rot(s: &str) -> Automorphism {
        Portrait::elementary(t3(), Address::root(), Perm::parse(s, 3).unwrap())
            .unwrap()
            .to_automorphism()
    }

    fn trans(c: u8) -> Automorphism {
        let post = Portrait::elementary(t3(), Address::root(), Perm::parse("(0 1 2)", 3).unwrap())
            .unwrap();
        HyperbolicSpec {
            copy: 0,
            word: vec![c],
            post_factor: Some(post),
        }
        .to_automorphism(t3())
        .unwrap()
    }

    fn full(depth: usize, bound: usize) -> ActionContext {
        let s0 = Portrait::elementary(t3(), "0".parse().unwrap(), Perm::parse("(1 2)", 3).unwrap())
            .unwrap()
            .to_automorphism();
        ActionContext::new(
            t3(),
            vec![
                ("t0".to_string(), trans(0)),
                ("t1".to_string(), trans(1)),
                ("t2".to_string(), trans(2)),
                ("r01".to_string(), rot("(0 1)")),
                ("r12".to_string(), rot("(1 2)")),
                ("s0".to_string(), s0),
            ],
            depth,
            bound,
        )
        .unwrap()
    }

    fn rotations(depth: usize) -> ActionContext {
        ActionContext::new(
            t3(),
            vec![
                ("r01".to_string(), rot("(0 1)")),
                ("r12".to_string(), rot("(1 2)")),
            ],
            depth,
            8,
        )
        .unwrap()
    }

    fn cyl(s: &str) -> CylinderClopen {
        CylinderClopen::cylinder(t3(), s.parse().unwrap())
    }

    #[test]
    fn alphabet_is_sorted_and_closed() {
        let ctx = full(2, 4);
        let names: Vec<&str> = ctx.generators.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(
            names,
            ["r01", "r12", "s0", "t0", "t0^-1", "t1", "t1^-1", "t2", "t2^-1"]
        );
        assert_eq!(
            ctx.evaluate(&["t0".into(), "t0^-1".into()]).unwrap(),
            Automorphism::identity(t3())
        );
    }

    #[test]
    fn minimality() {
        assert_eq!(
            check_minimal(&full(3, 6)).verdict,
            MinimalityVerdict::MinimalAtDepth
        );
        let id = ActionContext::new(
            t3(),
            vec![("e".to_string(), Automorphism::identity(t3()))],
            1,
            4,
        )
        .unwrap();
        assert_eq!(check_minimal(&id).verdict, MinimalityVerdict::NotMinimal);
        // the base-vertex rotations are transitive on depth-2 cylinders
        let r = check_minimal(&rotations(2));
        assert_eq!(r.verdict, MinimalityVerdict::MinimalAtDepth);
        let s0 = ActionContext::new(
            t3(),
            vec![(
                "s0".to_string(),
                Portrait::elementary(t3(), "0".parse().unwrap(), Perm::parse("(1 2)", 3).unwrap())
                    .unwrap()
                    .to_automorphism(),
            )],
            1,
            4,
        )
        .unwrap();
        let r = check_minimal(&s0);
        assert_eq!(r.verdict, MinimalityVerdict::NotMinimal);
        assert_eq!(r.counterexample, Some((cyl("0"), cyl("1"))));
    }

    #[test]
    fn skewering() {
        let s = skewering_search(&full(2, 4)).unwrap();
        assert_eq!(s.word, ["t0"]);
        assert_eq!(s.alpha, cyl("0"));
        assert_eq!(s.g_alpha, cyl("01"));
        assert!(s.g_alpha.measure() < s.alpha.measure());
        assert!(skewering_search(&rotations(3)).is_none());
    }

    #[test]
    fn minorising_and_degree() {
        let m = minorising_set(&full(2, 8)).unwrap();
        assert_eq!(m.set.len(), 1);
        assert_eq!(m.witnesses.len(), 6);
        assert!(m.longest_word <= 5);
        for w in &m.witnesses {
            let g = full(2, 8).evaluate(&w.word).unwrap();
            assert!(g.image_clopen(&w.source).lt(&w.target));
        }
        let d = minorising_degree(&full(2, 8)).unwrap();
        assert_eq!(d.degree, 1);
        assert_eq!(d.minimal_invariant, vec![CylinderClopen::top(t3())]);
        assert!(all_passed(&d.checks), "{:?}", d.checks);
    }

    #[test]
    fn compression() {
        let ctx = full(6, 8);
        let s = pair_compression(
            &ctx,
            &"0101".parse().unwrap(),
            &"2121".parse().unwrap(),
            &cyl("01"),
        )
        .unwrap();
        assert!(s.replay(&ctx).unwrap());
        assert!(s.word.len() <= 4);
        let same = pair_compression(
            &ctx,
            &"12".parse().unwrap(),
            &"12".parse().unwrap(),
            &cyl("01"),
        )
        .unwrap();
        assert!(same.replay(&ctx).unwrap());
    }

    #[test]
    fn free_semigroup_small() {
        let c = free_semigroup_certificate(&full(2, 4), 3).unwrap();
        assert_eq!(c.rows, 15);
        assert_eq!(c.collisions, 0);
        assert_eq!(c.h_alpha, cyl("02"));
        assert!(all_passed(&c.checks), "{:?}", c.checks);
    }

    #[test]
    fn orbit_joins() {
        let j = orbit_join(&full(2, 8), &cyl("01")).unwrap();
        assert!(j.alpha_star.is_top());
        assert!(j.witnesses.len() <= 6);
        assert!(j.invariant);
        let j = orbit_join(&rotations(2), &cyl("01")).unwrap();
        assert!(j.alpha_star.is_top());
        let top = orbit_join(&full(2, 8), &CylinderClopen::top(t3())).unwrap();
        assert_eq!(top.witnesses.len(), 1);
    }

    #[test]
    fn measure_dichotomy() {
        for n in 2..=3 {
            let r = invariant_measure_search(&full(n, 8), n).unwrap();
            assert!(!r.feasible(), "depth {n}");
            assert!(r.verified);
        }
        let r = invariant_measure_search(&rotations(2), 2).unwrap();
        assert!(r.verified);
        match r.verdict {
            MeasureVerdict::Feasible { uniform, weights } => {
                assert!(uniform);
                assert_eq!(weights.len(), 6);
                assert!(weights.values().all(|w| w == "1/6"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stone_graph_nodes() {
        assert_eq!(stone_orbit_graph(&full(2, 4)).node_count(), 6);
    }
}
