//! Cylinder-supported classes of the structure lattice: meets, joins, the
//! perp map, direct-factor decompositions and fixed-point scans.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::boolalg::{Address, CylinderClopen, TreeShape};
use crate::boundary::rist_generators;
use crate::check::{all_passed, Check};
use crate::dynamics::{orbit_join, ActionContext, OrbitJoin};
use crate::error::{LabError, Result};
use crate::permgrp::{FiniteGroup, Perm};
use crate::tree::{Automorphism, UniversalGroup};

/// A class represented by the rigid stabiliser of a clopen region.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Zero,
    Top,
    Cylinder(CylinderClopen),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalClass {
    pub kind: ClassKind,
    pub depth: usize,
}

impl LocalClass {
    pub fn from_region(region: CylinderClopen, depth: usize) -> Self {
        let kind = if region.is_zero() {
            ClassKind::Zero
        } else if region.is_top() {
            ClassKind::Top
        } else {
            ClassKind::Cylinder(region)
        };
        LocalClass { kind, depth }
    }

    pub fn zero(shape: TreeShape, depth: usize) -> Self {
        Self::from_region(CylinderClopen::zero(shape), depth)
    }

    pub fn top(shape: TreeShape, depth: usize) -> Self {
        Self::from_region(CylinderClopen::top(shape), depth)
    }

    pub fn region(&self, shape: TreeShape) -> CylinderClopen {
        match &self.kind {
            ClassKind::Zero => CylinderClopen::zero(shape),
            ClassKind::Top => CylinderClopen::top(shape),
            ClassKind::Cylinder(r) => r.clone(),
        }
    }

    pub fn is_proper(&self) -> bool {
        matches!(self.kind, ClassKind::Cylinder(_))
    }
}

impl fmt::Display for LocalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ClassKind::Zero => f.write_str("{}"),
            ClassKind::Top => f.write_str("TOP"),
            ClassKind::Cylinder(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for LocalClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LocalClass", 2)?;
        st.serialize_field("region", &self.to_string())?;
        st.serialize_field("depth", &self.depth)?;
        st.end()
    }
}

fn shape_of(a: &LocalClass, b: &LocalClass) -> Option<TreeShape> {
    [a, b].iter().find_map(|c| match &c.kind {
        ClassKind::Cylinder(r) => Some(r.shape()),
        _ => None,
    })
}

pub fn class_meet(shape: TreeShape, a: &LocalClass, b: &LocalClass) -> LocalClass {
    let shape = shape_of(a, b).unwrap_or(shape);
    LocalClass::from_region(a.region(shape).meet(&b.region(shape)), a.depth.max(b.depth))
}

/// Join through the centraliser-lattice identity `a ∨ b = (a⊥ ∧ b⊥)⊥`.
pub fn class_join(shape: TreeShape, a: &LocalClass, b: &LocalClass) -> LocalClass {
    perp(shape, &class_meet(shape, &perp(shape, a), &perp(shape, b)))
}

/// Join computed directly as the union of regions.
pub fn region_join(shape: TreeShape, a: &LocalClass, b: &LocalClass) -> LocalClass {
    LocalClass::from_region(a.region(shape).join(&b.region(shape)), a.depth.max(b.depth))
}

pub fn perp(shape: TreeShape, a: &LocalClass) -> LocalClass {
    LocalClass::from_region(a.region(shape).complement(), a.depth)
}

/// Permutation induced on the depth-`n` sphere.
pub fn sphere_permutation(g: &Automorphism, n: usize) -> Result<Perm> {
    let points = g.shape().sphere(n);
    let index: HashMap<&Address, usize> = points.iter().enumerate().map(|(i, a)| (a, i)).collect();
    Perm::from_images(points.iter().map(|a| index[&g.image(a)]).collect())
}

/// The group generated by `gens` acting on the depth-`n` sphere.
pub fn sphere_group(shape: TreeShape, gens: &[Automorphism], n: usize) -> Result<FiniteGroup> {
    let perms = gens
        .iter()
        .map(|g| sphere_permutation(g, n))
        .collect::<Result<Vec<_>>>()?;
    FiniteGroup::new(shape.sphere_size(n), perms)
}

/// Truncation of `rist(region)` to the depth-`n` sphere.
fn rist_on_sphere(
    u: &UniversalGroup,
    region: &CylinderClopen,
    n: usize,
) -> Result<(Vec<Automorphism>, FiniteGroup)> {
    let gens = rist_generators(u, region, n.saturating_sub(1))?.automorphisms();
    let group = sphere_group(u.shape(), &gens, n)?;
    Ok((gens, group))
}

fn commute_all(a: &[Automorphism], b: &[Automorphism]) -> bool {
    a.iter().all(|x| b.iter().all(|y| x.commutes_with(y)))
}

fn intersection_order(a: &FiniteGroup, b: &FiniteGroup) -> Result<usize> {
    let small = if a.order()? <= b.order()? { a } else { b };
    let other = if std::ptr::eq(small, a) { b } else { a };
    let mut n = 0;
    for x in small.elements()? {
        if other.contains(x)? {
            n += 1;
        }
    }
    Ok(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct PerpLevel {
    pub depth: usize,
    pub commute: bool,
    /// `None` above the enumerable levels
    pub intersection_order: Option<usize>,
    pub index: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerpReport {
    pub class: LocalClass,
    pub complement: LocalClass,
    pub levels: Vec<PerpLevel>,
    pub checks: Vec<Check>,
    pub verified: bool,
}

/// `a⊥` with, at each depth `k ≤ n`, commutation of `rist(a)` and `rist(a⊥)`
/// and, where the level is enumerable, their trivial intersection and the
/// index of their product in the base-vertex stabiliser.
pub fn perp_report(u: &UniversalGroup, a: &LocalClass, n: usize) -> Result<PerpReport> {
    let shape = u.shape();
    let comp = perp(shape, a);
    let (ra, rb) = (a.region(shape), comp.region(shape));
    let mut levels = Vec::new();
    for k in 1..=n {
        let ga = rist_generators(u, &ra, k)?.automorphisms();
        let gb = rist_generators(u, &rb, k)?.automorphisms();
        let commute = commute_all(&ga, &gb);
        let (intersection_order, index) = match realized_perp(u, &ra, &rb, k) {
            Ok((i, x)) => (Some(i), Some(x)),
            Err(LabError::ClosureCapExceeded { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        levels.push(PerpLevel {
            depth: k,
            commute,
            intersection_order,
            index,
        });
    }
    let stable: Vec<usize> = levels
        .iter()
        .filter(|l| l.depth > ra.depth())
        .filter_map(|l| l.index)
        .collect();
    let checks = vec![
        Check::new("involution", perp(shape, &comp) == *a, "perp(perp(a)) = a"),
        Check::new(
            "commutation",
            levels.iter().all(|l| l.commute),
            format!("rist({ra}) and rist({rb}) commute at depths 1..={n}"),
        ),
        Check::new(
            "trivial-intersection",
            levels
                .iter()
                .all(|l| l.intersection_order.is_none_or(|o| o == 1)),
            "checked on enumerable levels",
        ),
        Check::new(
            "finite-index",
            stable.windows(2).all(|w| w[0] == w[1]),
            format!(
                "indices {:?} stabilise beyond depth {}",
                levels.iter().map(|l| l.index).collect::<Vec<_>>(),
                ra.depth()
            ),
        ),
    ];
    Ok(PerpReport {
        class: a.clone(),
        complement: comp,
        verified: all_passed(&checks),
        levels,
        checks,
    })
}

fn realized_perp(
    u: &UniversalGroup,
    ra: &CylinderClopen,
    rb: &CylinderClopen,
    k: usize,
) -> Result<(usize, usize)> {
    let (ga, a) = rist_on_sphere(u, ra, k)?;
    let (gb, b) = rist_on_sphere(u, rb, k)?;
    let inter = intersection_order(&a, &b)?;
    let both: Vec<Automorphism> = ga.into_iter().chain(gb).collect();
    let generated = sphere_group(u.shape(), &both, k)?.order()?;
    let full = u.realized_level(k)?.order()?;
    Ok((inter, full / generated))
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub depth: usize,
    pub factors: Vec<LocalClass>,
    pub factor_orders: Vec<usize>,
    pub group_order: usize,
    pub checks: Vec<Check>,
    pub verified: bool,
}

/// Splits the stabiliser of the radius-1 ball, acting on the depth-`n`
/// sphere, into the rigid stabilisers of the depth-1 cylinders. At depth
/// `n ≤ 1` the group is its own single factor.
pub fn decomposition_factors(u: &UniversalGroup, n: usize) -> Result<Decomposition> {
    let shape = u.shape();
    let first = match shape {
        TreeShape::Forest { .. } => 2,
        _ => 1,
    };
    let group = u.sphere_action(first, n.max(first), n)?;
    let group_order = group.order()?;
    if n <= first {
        let top = LocalClass::top(shape, n);
        return Ok(Decomposition {
            depth: n,
            factors: vec![top],
            factor_orders: vec![group_order],
            group_order,
            checks: vec![Check::new("single-factor", true, "the group itself")],
            verified: true,
        });
    }
    let regions: Vec<CylinderClopen> = shape
        .sphere(first)
        .into_iter()
        .map(|a| CylinderClopen::cylinder(shape, a))
        .collect();
    let mut gens = Vec::new();
    let mut groups = Vec::new();
    for r in &regions {
        let (g, h) = rist_on_sphere(u, r, n)?;
        gens.push(g);
        groups.push(h);
    }
    let factor_orders = groups
        .iter()
        .map(FiniteGroup::order)
        .collect::<Result<Vec<_>>>()?;
    let mut commute = true;
    let mut trivial = true;
    for i in 0..groups.len() {
        for j in 0..i {
            commute &= commute_all(&gens[i], &gens[j]);
            trivial &= intersection_order(&groups[i], &groups[j])? == 1;
        }
    }
    let all: Vec<Automorphism> = gens.iter().flatten().cloned().collect();
    let generated = sphere_group(shape, &all, n)?;
    let generating = generated.order()? == group_order && generated.is_subgroup_of(&group)?;
    let product = factor_orders.iter().product::<usize>() == group_order;
    let factors: Vec<LocalClass> = regions
        .iter()
        .map(|r| LocalClass::from_region(r.clone(), n))
        .collect();
    let perp_ok = factors.iter().enumerate().all(|(i, f)| {
        let others = factors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(LocalClass::zero(shape, n), |acc, (_, g)| {
                region_join(shape, &acc, g)
            });
        perp(shape, f) == others
    });
    let checks = vec![
        Check::new("commuting", commute, "factor generators commute pairwise"),
        Check::new(
            "trivial-intersection",
            trivial,
            "pairwise intersections are trivial",
        ),
        Check::new(
            "generating",
            generating,
            format!("factors generate a group of order {group_order}"),
        ),
        Check::new(
            "order-product",
            product,
            format!("factor orders {factor_orders:?}"),
        ),
        Check::new(
            "perp",
            perp_ok,
            "each factor is the perp of the join of the others",
        ),
    ];
    Ok(Decomposition {
        depth: n,
        factors,
        factor_orders,
        group_order,
        verified: all_passed(&checks),
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointScan {
    pub depth: usize,
    /// classes of depth-`n` cylinders linked by generator images
    pub components: Vec<CylinderClopen>,
    pub fixed_count: u64,
    /// every fixed class, when there are at most 2^16 of them
    pub fixed: Option<Vec<LocalClass>>,
    pub scope: &'static str,
}

/// Invariant regions at depth `n` are exactly the unions of the connected
/// components of the graph linking `c` to `d` whenever `g·c` meets `d`.
pub fn fixed_point_scan(ctx: &ActionContext, n: usize) -> FixedPointScan {
    let shape = ctx.shape;
    let cyls = ctx.cylinders(n);
    let mut uf = crate::permgrp::UnionFind::new(cyls.len());
    for (i, c) in cyls.iter().enumerate() {
        for g in &ctx.generators {
            let img = g.element.image_clopen(c);
            for (j, d) in cyls.iter().enumerate() {
                if !img.is_disjoint(d) {
                    uf.union(i, j);
                }
            }
        }
    }
    let mut groups: Vec<BTreeSet<usize>> = Vec::new();
    let mut root_of: HashMap<usize, usize> = HashMap::new();
    for i in 0..cyls.len() {
        let r = uf.find(i);
        let k = *root_of.entry(r).or_insert_with(|| {
            groups.push(BTreeSet::new());
            groups.len() - 1
        });
        groups[k].insert(i);
    }
    let components: Vec<CylinderClopen> = groups
        .iter()
        .map(|g| {
            CylinderClopen::from_addresses(shape, g.iter().map(|&i| cyls[i].cover()[0].clone()))
        })
        .collect();
    let k = components.len();
    let fixed_count = if k < 64 { 1u64 << k } else { u64::MAX };
    let fixed = (k <= 16).then(|| {
        let mut out: Vec<LocalClass> = (0u32..1 << k)
            .map(|mask| {
                let region = (0..k)
                    .filter(|b| mask >> b & 1 == 1)
                    .fold(CylinderClopen::zero(shape), |acc, b| {
                        acc.join(&components[b])
                    });
                LocalClass::from_region(region, n)
            })
            .collect();
        out.sort_by_key(|c| (c.region(shape).measure(), c.to_string()));
        out
    });
    FixedPointScan {
        depth: n,
        components,
        fixed_count,
        fixed,
        scope: "over cylinder classes",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommensuratedReport {
    pub class: LocalClass,
    pub commensurated: bool,
    /// generators moving the region
    pub moved_by: Vec<String>,
    pub orbit_join: Option<OrbitJoin>,
}

/// A region is commensurated at depth `n` when every generator maps it onto itself.
pub fn commensurated_check(ctx: &ActionContext, a: &LocalClass) -> Result<CommensuratedReport> {
    let region = a.region(ctx.shape);
    let moved_by: Vec<String> = ctx
        .generators
        .iter()
        .filter(|g| g.element.image_clopen(&region) != region)
        .map(|g| g.name.clone())
        .collect();
    let commensurated = moved_by.is_empty();
    let orbit_join = if commensurated || region.is_zero() {
        None
    } else {
        Some(orbit_join(ctx, &region)?)
    };
    Ok(CommensuratedReport {
        class: a.clone(),
        commensurated,
        moved_by,
        orbit_join,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> TreeShape {
        TreeShape::regular(3)
    }

    fn class(s: &str) -> LocalClass {
        LocalClass::from_region(crate::boolalg::parse_clopen(t3(), s).unwrap(), 3)
    }

    fn u_s3() -> UniversalGroup {
        UniversalGroup::new(t3(), FiniteGroup::symmetric(3)).unwrap()
    }

    #[test]
    fn lattice_ops() {
        assert_eq!(
            class_meet(t3(), &class("{0}"), &class("{1}")).kind,
            ClassKind::Zero
        );
        assert_eq!(
            class_join(t3(), &class("{0}"), &class("{1,2}")).kind,
            ClassKind::Top
        );
        assert_eq!(perp(t3(), &class("{0}")), class("{1,2}"));
        assert_eq!(perp(t3(), &LocalClass::zero(t3(), 3)).kind, ClassKind::Top);
        let json = serde_json::to_string(&class("{01,12}")).unwrap();
        assert_eq!(json, r#"{"region":"{01,12}","depth":3}"#);
    }

    #[test]
    fn perp_of_half_tree() {
        let r = perp_report(&u_s3(), &class("{0}"), 3).unwrap();
        assert_eq!(r.complement, class("{1,2}"));
        assert!(r.verified, "{:?}", r.checks);
        // the product misses exactly the rotations at the base vertex
        assert_eq!(r.levels[2].index, Some(6));
    }

    #[test]
    fn decompositions() {
        let d = decomposition_factors(&u_s3(), 0).unwrap();
        assert_eq!(d.factors.len(), 1);
        let d = decomposition_factors(&u_s3(), 2).unwrap();
        assert_eq!(d.factors.len(), 3);
        assert!(d.verified, "{:?}", d.checks);
        assert_eq!(d.group_order, 8);
        let w = UniversalGroup::new(TreeShape::rooted(2), FiniteGroup::cyclic(2)).unwrap();
        let d = decomposition_factors(&w, 2).unwrap();
        assert_eq!(d.factors.len(), 2);
        assert_eq!(d.factor_orders, vec![2, 2]);
        assert!(d.verified);
    }
}
