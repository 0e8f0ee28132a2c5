use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use serde::Serialize;

use crate::boolalg::{Address, TreeShape};
use crate::error::{LabError, Result};
use crate::permgrp::{prime_factors, FiniteGroup, Perm};
use crate::tree::element::{local_degree, Automorphism, Portrait};

/// The universal group `U(F)` of a shape: all automorphisms whose local
/// action at every vertex lies in `F`. On a rooted tree this is the
/// iterated wreath product of `F`.
#[derive(Clone, Debug)]
pub struct UniversalGroup {
    shape: TreeShape,
    local: FiniteGroup,
}

/// Prime-exponent form of a positive integer.
pub type Exponents = BTreeMap<u64, u64>;

fn exponents(n: usize) -> Exponents {
    let mut out = Exponents::new();
    for p in prime_factors(n as u64) {
        *out.entry(p).or_default() += 1;
    }
    out
}

fn value(e: &Exponents) -> BigUint {
    e.iter().fold(BigUint::from(1u32), |acc, (&p, &k)| {
        acc * BigUint::from(p).pow(k as u32)
    })
}

impl UniversalGroup {
    pub fn new(shape: TreeShape, local: FiniteGroup) -> Result<Self> {
        if local.degree() != local_degree(shape) {
            return Err(LabError::invalid(format!(
                "local group has degree {} but {shape} needs {}",
                local.degree(),
                local_degree(shape)
            )));
        }
        local.closure()?;
        Ok(UniversalGroup { shape, local })
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    pub fn local_group(&self) -> &FiniteGroup {
        &self.local
    }

    /// Colour that decorations at `v` must fix, if any.
    fn fixed_colour(&self, v: &Address) -> Option<u8> {
        match self.shape {
            TreeShape::Rooted { .. } => None,
            TreeShape::Regular { .. } => v.last(),
            TreeShape::Forest { .. } => {
                if v.len() >= 2 {
                    v.last()
                } else {
                    None
                }
            }
        }
    }

    /// Group of decorations allowed at `v`.
    pub fn site_group(&self, v: &Address) -> Result<FiniteGroup> {
        if matches!(self.shape, TreeShape::Forest { .. }) && v.is_empty() {
            return Ok(FiniteGroup::trivial(local_degree(self.shape)));
        }
        match self.fixed_colour(v) {
            None => Ok(self.local.clone()),
            Some(c) => self.local.point_stabiliser(c as usize),
        }
    }

    /// Elementary portraits: one per vertex `v` with `lo ≤ |v| < hi` and per
    /// generator of the site group at `v`.
    pub fn elementary_generators(&self, lo: usize, hi: usize) -> Result<Vec<Portrait>> {
        let mut site_gens: HashMap<Option<u8>, Vec<Perm>> = HashMap::new();
        let mut out = Vec::new();
        for depth in lo..hi {
            for v in self.shape.sphere(depth) {
                if matches!(self.shape, TreeShape::Forest { .. }) && v.is_empty() {
                    continue;
                }
                let key = self.fixed_colour(&v);
                if let std::collections::hash_map::Entry::Vacant(e) = site_gens.entry(key) {
                    let g = self.site_group(&v)?;
                    e.insert(g.generators().to_vec());
                }
                for p in &site_gens[&key] {
                    if !p.is_identity() {
                        out.push(Portrait::elementary(self.shape, v.clone(), p.clone())?);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn contains(&self, g: &Automorphism) -> bool {
        g.local_actions_within(&|p| self.local.contains(p).unwrap_or(false))
    }

    /// Number of depth-`k` vertices, grouped by the colour their decorations fix.
    fn site_counts(&self, k: usize) -> Vec<(Option<u8>, u64)> {
        let q = self.shape.degree() as u64;
        match self.shape {
            TreeShape::Rooted { degree } => vec![(None, (degree as u64).pow(k as u32))],
            TreeShape::Regular { .. } => {
                if k == 0 {
                    vec![(None, 1)]
                } else {
                    (0..q as u8)
                        .map(|c| (Some(c), (q - 1).pow(k as u32 - 1)))
                        .collect()
                }
            }
            TreeShape::Forest { copies, .. } => match k {
                0 => Vec::new(),
                1 => vec![(None, copies as u64)],
                _ => (0..q as u8)
                    .map(|c| (Some(c), copies as u64 * (q - 1).pow(k as u32 - 2)))
                    .collect(),
            },
        }
    }

    /// Order of the action of the base-vertex stabiliser on the radius-`n`
    /// ball, as prime exponents: the product of site-group orders over all
    /// vertices of depth below `n`.
    pub fn level_order_exponents(&self, n: usize) -> Result<Exponents> {
        let mut stab_orders: HashMap<Option<u8>, usize> = HashMap::new();
        let mut total = Exponents::new();
        for k in 0..n {
            for (colour, count) in self.site_counts(k) {
                let order = match stab_orders.get(&colour) {
                    Some(&o) => o,
                    None => {
                        let o = match colour {
                            None => self.local.order()?,
                            Some(c) => self.local.point_stabiliser(c as usize)?.order()?,
                        };
                        stab_orders.insert(colour, o);
                        o
                    }
                };
                for (p, e) in exponents(order) {
                    *total.entry(p).or_default() += e * count;
                }
            }
        }
        Ok(total)
    }

    pub fn level_order(&self, n: usize) -> Result<BigUint> {
        Ok(value(&self.level_order_exponents(n)?))
    }

    /// The group generated by decorations at depths `lo..hi`, acting on the
    /// depth-`n` sphere (`n ≥ hi`).
    pub fn sphere_action(&self, lo: usize, hi: usize, n: usize) -> Result<FiniteGroup> {
        let points = self.shape.sphere(n);
        let index: HashMap<&Address, usize> =
            points.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let gens = self
            .elementary_generators(lo, hi)?
            .into_iter()
            .map(|p| {
                let g = p.to_automorphism();
                let images = points.iter().map(|a| index[&g.image(a)]).collect();
                Perm::from_images(images)
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteGroup::new(points.len(), gens)
    }

    /// Realized level `n`: the base-vertex stabiliser acting on the `n`-sphere.
    pub fn realized_level(&self, n: usize) -> Result<FiniteGroup> {
        self.sphere_action(0, n, n)
    }
}

/// `W_n(F, d)`: the `n`-fold iterated wreath product of `F ≤ Sym(d)`, acting
/// on the `dⁿ` leaves of the rooted `d`-ary tree.
#[derive(Clone, Debug)]
pub struct WreathLevel {
    universal: UniversalGroup,
    level: usize,
}

impl WreathLevel {
    pub fn new(local: FiniteGroup, level: usize) -> Result<Self> {
        let d = local.degree();
        if !(2..=10).contains(&d) {
            return Err(LabError::invalid(format!(
                "wreath degree {d} outside 2..=10"
            )));
        }
        let universal = UniversalGroup::new(TreeShape::rooted(d as u8), local)?;
        Ok(WreathLevel { universal, level })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.universal.local.degree()
    }

    /// `|F|^((dⁿ − 1)/(d − 1))`, without enumeration.
    pub fn order(&self) -> Result<BigUint> {
        let d = self.degree() as u32;
        let sites = (d.pow(self.level as u32) - 1) / (d - 1);
        Ok(BigUint::from(self.universal.local.order()?).pow(sites))
    }

    pub fn realized(&self) -> Result<FiniteGroup> {
        self.universal.sphere_action(0, self.level, self.level)
    }

    /// `U_k / U_n`, where `U_k` fixes the depth-`k` sphere pointwise, acting
    /// on the leaves.
    pub fn congruence_quotient(&self, k: usize) -> Result<FiniteGroup> {
        if k > self.level {
            return Err(LabError::invalid(format!(
                "congruence level {k} exceeds wreath level {}",
                self.level
            )));
        }
        self.universal.sphere_action(k, self.level, self.level)
    }
}

/// Orbits of the level-`n` congruence subgroup on the `(n+1)`-sphere.
#[derive(Clone, Debug, Serialize)]
pub struct SphereOrbitReport {
    pub level: usize,
    /// orbit size → number of orbits of that size
    pub orbit_sizes: BTreeMap<usize, usize>,
    pub max_orbit: usize,
    /// Every composition factor of `U_n/U_{n+1}` is a section of `Sym(max_orbit)`.
    pub factor_order_bound: u64,
    pub divides_degree_bound: bool,
    pub note: Option<String>,
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Orbits of `U_n` (decorations at depth `n`) on the `(n+1)`-sphere.
pub fn sphere_orbit_bound(u: &UniversalGroup, n: usize) -> Result<SphereOrbitReport> {
    let points = u.shape.sphere(n + 1);
    let index: HashMap<&Address, usize> = points.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for gen in u.elementary_generators(n, n + 1)? {
        let g = gen.to_automorphism();
        for (i, a) in points.iter().enumerate() {
            let j = index[&g.image(a)];
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for i in 0..points.len() {
        *sizes.entry(find(&mut parent, i)).or_default() += 1;
    }
    let mut orbit_sizes = BTreeMap::new();
    for &s in sizes.values() {
        *orbit_sizes.entry(s).or_default() += 1;
    }
    let max_orbit = orbit_sizes.keys().copied().max().unwrap_or(1);
    let d = u.shape.degree() as usize;
    let bound = factorial(max_orbit);
    let divides = factorial(d.saturating_sub(1)).is_multiple_of(bound);
    let note = (n == 0 && !matches!(u.shape, TreeShape::Rooted { .. })).then(|| {
        format!(
            "level 0: the base-vertex stabiliser acts through F on all {d} neighbours, so the orbit bound d-1 is not claimed here"
        )
    });
    Ok(SphereOrbitReport {
        level: n,
        orbit_sizes,
        max_orbit,
        factor_order_bound: bound,
        divides_degree_bound: divides,
        note,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Grows,
    Stabilised,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeTrend {
    pub prime: u64,
    pub exponents: Vec<u64>,
    pub trend: Trend,
}

/// Finite-depth verdict on the local prime content.
#[derive(Clone, Debug, Serialize)]
pub struct EtaReport {
    pub depths: (usize, usize),
    pub level_orders: Vec<(usize, String)>,
    pub primes: Vec<PrimeTrend>,
    pub eta: BTreeSet<u64>,
    pub verdict: &'static str,
}

/// Growth of the `p`-parts of the level orders over a window of depths.
///
/// A prime whose exponent strictly increases at every step is reported in
/// `η`; one that is nondecreasing and constant over the last two depths is
/// reported as stabilised; anything else is inconclusive.
pub fn local_prime_content(u: &UniversalGroup, depths: RangeInclusive<usize>) -> Result<EtaReport> {
    let (a, b) = (*depths.start(), *depths.end());
    let mut orders = Vec::new();
    for n in depths.clone() {
        orders.push((n, u.level_order_exponents(n)?));
    }
    let primes: BTreeSet<u64> = orders.iter().flat_map(|(_, e)| e.keys().copied()).collect();
    let mut trends = Vec::new();
    let mut eta = BTreeSet::new();
    for p in primes {
        let ex: Vec<u64> = orders
            .iter()
            .map(|(_, e)| e.get(&p).copied().unwrap_or(0))
            .collect();
        let strictly = ex.windows(2).all(|w| w[0] < w[1]) && ex.len() >= 2;
        let nondecreasing = ex.windows(2).all(|w| w[0] <= w[1]);
        let flat_tail = ex.len() >= 2 && ex[ex.len() - 1] == ex[ex.len() - 2];
        let trend = if strictly {
            eta.insert(p);
            Trend::Grows
        } else if nondecreasing && flat_tail {
            Trend::Stabilised
        } else {
            Trend::Inconclusive
        };
        trends.push(PrimeTrend {
            prime: p,
            exponents: ex,
            trend,
        });
    }
    Ok(EtaReport {
        depths: (a, b),
        level_orders: orders
            .iter()
            .map(|(n, e)| (*n, value(e).to_string()))
            .collect(),
        primes: trends,
        eta,
        verdict: "finite-depth verdict",
    })
}
