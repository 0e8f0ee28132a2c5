//! Rigid stabilisers, contraction and nub certificates, and Tits-core
//! generators for elements acting on the boundary.

use serde::Serialize;

use crate::boolalg::{Address, CylinderClopen, TreeShape};
use crate::check::{all_passed, Check};
use crate::error::{LabError, Result};
use crate::par;
use crate::tree::{Automorphism, Portrait, UniversalGroup};

/// Depth of a vertex below the base vertex of its own tree.
fn component_depth(shape: TreeShape, a: &Address) -> usize {
    match shape {
        TreeShape::Forest { .. } => a.len().saturating_sub(1),
        _ => a.len(),
    }
}

/// Whether `g` fixes every end of `region`.
pub fn fixes_pointwise(g: &Automorphism, region: &CylinderClopen) -> bool {
    if region.is_zero() {
        return true;
    }
    if region.is_top() {
        return g.is_identity();
    }
    let shape = g.shape();
    let support = g.support();
    let quiet = |w: &Address| {
        let s = g.local_action(w);
        shape.children(w.letters()).all(|c| s.fixes(c as usize))
    };
    region.cover().iter().all(|c| {
        g.image(c) == *c && quiet(c) && support.iter().filter(|w| c.is_prefix_of(w)).all(quiet)
    })
}

/// Membership in `rist_U(region)`: local actions in `F` and trivial outside `region`.
pub fn in_rist(u: &UniversalGroup, g: &Automorphism, region: &CylinderClopen) -> bool {
    u.contains(g) && fixes_pointwise(g, &region.complement())
}

/// Elementary generators of a rigid stabiliser truncated at a depth.
#[derive(Clone, Debug, Serialize)]
pub struct RigidStabiliserGens {
    pub region: CylinderClopen,
    pub depth: usize,
    pub sites: Vec<Address>,
    pub gens: Vec<Portrait>,
    /// every generator was checked to fix the complement of the region pointwise
    pub verified: bool,
}

impl RigidStabiliserGens {
    pub fn automorphisms(&self) -> Vec<Automorphism> {
        self.gens.iter().map(Portrait::to_automorphism).collect()
    }
}

/// Vertices `v` with `1 ≤ depth(v) ≤ n` whose cylinder lies in `region`;
/// the base vertex joins only when the region is everything.
pub fn rist_sites(region: &CylinderClopen, n: usize) -> Vec<Address> {
    let shape = region.shape();
    if region.is_top() {
        let mut out = vec![Address::root()];
        out.extend(shape.ball_addresses(n));
        return out;
    }
    let mut out = Vec::new();
    for c in region.cover() {
        for len in c.len()..=n {
            out.extend(shape.extensions(&c, len));
        }
    }
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    out
}

pub fn rist_generators(
    u: &UniversalGroup,
    region: &CylinderClopen,
    depth: usize,
) -> Result<RigidStabiliserGens> {
    let shape = u.shape();
    let sites = rist_sites(region, depth);
    let mut gens = Vec::new();
    for v in &sites {
        if matches!(shape, TreeShape::Forest { .. }) && v.is_empty() {
            continue;
        }
        for p in u.site_group(v)?.generators() {
            if !p.is_identity() {
                gens.push(Portrait::elementary(shape, v.clone(), p.clone())?);
            }
        }
    }
    let outside = region.complement();
    let verified = gens
        .iter()
        .all(|p| fixes_pointwise(&p.to_automorphism(), &outside));
    Ok(RigidStabiliserGens {
        region: region.clone(),
        depth,
        sites,
        gens,
        verified,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HalfTreeFixator {
    pub edge: Address,
    pub rist: RigidStabiliserGens,
    pub nontrivial: bool,
    pub witness: Option<Portrait>,
}

/// Fixator of the complement of the half-tree beyond `edge`, i.e. the rigid
/// stabiliser of that half-tree.
pub fn half_tree_fixator(
    u: &UniversalGroup,
    edge: &Address,
    depth: usize,
) -> Result<HalfTreeFixator> {
    if edge.is_empty() {
        return Err(LabError::invalid(
            "a half-tree needs a nonempty edge address",
        ));
    }
    let region = CylinderClopen::cylinder(u.shape(), edge.clone());
    let rist = rist_generators(u, &region, depth)?;
    let witness = rist.gens.first().cloned();
    Ok(HalfTreeFixator {
        edge: edge.clone(),
        nontrivial: witness.is_some(),
        witness,
        rist,
    })
}

/// Smallest depth of a moved vertex: `None` for the identity, `0` when the
/// base vertex moves.
pub fn support_distance(g: &Automorphism) -> Option<usize> {
    if g.is_identity() {
        return None;
    }
    if g.displacement() > 0 {
        return Some(0);
    }
    let shape = g.shape();
    g.support().iter().map(|w| component_depth(shape, w)).min()
}

/// Acts trivially on the radius-`n` ball: nothing moves at depth ≤ `n + 1`
/// and all local actions up to depth `n` are trivial.
pub fn trivial_on_ball(g: &Automorphism, n: usize) -> bool {
    support_distance(g).is_none_or(|d| d > n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionVerdict {
    Contracts,
    NoContractionWithinBounds,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionCertificate {
    pub g: Automorphism,
    pub u: Automorphism,
    pub ball_radius: usize,
    pub k_max: usize,
    pub step: Option<usize>,
    /// support distances of `gᵏ u g⁻ᵏ` for `k = step..step+3`
    pub support_distances: Vec<Option<usize>>,
    pub monotone: bool,
    pub verdict: ContractionVerdict,
}

/// Finds the least `k ≤ k_max` with `gᵏ u g⁻ᵏ` trivial on the radius-`n` ball.
pub fn contraction_certificate(
    g: &Automorphism,
    u: &Automorphism,
    n: usize,
    k_max: usize,
) -> ContractionCertificate {
    let ginv = g.inverse();
    let mut c = u.clone();
    let mut step = None;
    for k in 0..=k_max {
        if trivial_on_ball(&c, n) {
            step = Some(k);
            break;
        }
        c = g.compose(&c).compose(&ginv);
    }
    let mut support_distances = Vec::new();
    let mut monotone = false;
    if step.is_some() {
        let mut d = c.clone();
        for _ in 0..4 {
            support_distances.push(support_distance(&d));
            d = g.compose(&d).compose(&ginv);
        }
        let key = |x: &Option<usize>| x.unwrap_or(usize::MAX);
        monotone = support_distances
            .windows(2)
            .all(|w| key(&w[0]) <= key(&w[1]));
    }
    let verdict = if step.is_some() && monotone {
        ContractionVerdict::Contracts
    } else {
        ContractionVerdict::NoContractionWithinBounds
    };
    ContractionCertificate {
        g: g.clone(),
        u: u.clone(),
        ball_radius: n,
        k_max,
        step,
        support_distances,
        monotone,
        verdict,
    }
}

fn require_skewering(g: &Automorphism, alpha: &CylinderClopen) -> Result<CylinderClopen> {
    let ga = g.image_clopen(alpha);
    if !ga.lt(alpha) {
        return Err(LabError::NotSkewering(format!(
            "g{alpha} = {ga} is not strictly below {alpha}"
        )));
    }
    Ok(ga)
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodshrinkCertificate {
    pub alpha: CylinderClopen,
    pub g_alpha: CylinderClopen,
    pub beta: CylinderClopen,
    pub partition_level: usize,
    pub n0: usize,
    /// depth-`depth` interior of the meet of `gⁿα`, `0 ≤ n ≤ 2·depth`
    pub xi_interior: CylinderClopen,
    /// clopen over-approximation of κ at the working depth
    pub kappa: CylinderClopen,
    pub depth: usize,
    pub rist_kappa_size: usize,
    pub rist_shift_beta_size: usize,
    pub checks: Vec<Check>,
    pub verified: bool,
}

/// Builds `κ = g^{n0}α ∖ int(⋂ gⁿα)` and checks, on truncated rigid
/// stabiliser generators, that `g·rist(κ)·g⁻¹` and `rist(g^{n0}β)` both lie
/// in `rist(κ)`, commute with each other, and that every generator of
/// `rist(κ)` is contracted by `g`.
pub fn goodshrink_construct(
    u: &UniversalGroup,
    g: &Automorphism,
    alpha: &CylinderClopen,
    depth: usize,
    parallel: bool,
) -> Result<GoodshrinkCertificate> {
    let shape = u.shape();
    let ga = require_skewering(g, alpha)?;
    let beta = alpha.difference(&ga);
    let ginv = g.inverse();
    let bound = 2 * depth.max(1);
    let mut powers = vec![alpha.clone()];
    for _ in 0..bound {
        let next = g.image_clopen(powers.last().expect("nonempty"));
        powers.push(next);
    }
    // n0: over the partition into cylinders at the level where g⁻¹ moves the
    // base vertex, the first power of α failing to contain each part.
    let level = ginv.displacement().max(1);
    let mut n0 = 0;
    for gamma in crate::boolalg::DepthPartition::cylinders(shape, level).parts() {
        if let Some(m) = powers.iter().position(|p| !gamma.le(p)) {
            n0 = n0.max(m)
        }
    }
    let meet = powers
        .iter()
        .fold(CylinderClopen::top(shape), |acc, p| acc.meet(p));
    let xi_interior = CylinderClopen::from_addresses(
        shape,
        shape
            .sphere(depth)
            .into_iter()
            .filter(|a| CylinderClopen::cylinder(shape, a.clone()).le(&meet)),
    );
    let kappa = powers[n0].difference(&xi_interior);
    let g_n0 = g.pow(n0 as i64);
    let shifted_beta = g_n0.image_clopen(&beta);
    let rk = rist_generators(u, &kappa, depth)?.automorphisms();
    let rb = rist_generators(u, &shifted_beta, depth)?.automorphisms();
    let conj: Vec<Automorphism> = rk.iter().map(|r| g.compose(r).compose(&ginv)).collect();

    let mut checks = Vec::new();
    checks.push(Check::new(
        "skewering",
        true,
        format!("g{alpha} = {ga} < {alpha}; beta = {beta}"),
    ));
    let a_ok = par::all(&conj, parallel, |c| in_rist(u, c, &kappa));
    checks.push(Check::new(
        "conjugate-inclusion",
        a_ok,
        format!("g r g^-1 in rist({kappa}) for {} generators", conj.len()),
    ));
    let b_ok = par::all(&rb, parallel, |s| in_rist(u, s, &kappa));
    checks.push(Check::new(
        "product-inclusion",
        b_ok && a_ok,
        format!(
            "rist({shifted_beta}) <= rist({kappa}) on {} generators",
            rb.len()
        ),
    ));
    let c_ok = par::all(&conj, parallel, |c| rb.iter().all(|s| c.commutes_with(s)));
    checks.push(Check::new(
        "commutation",
        c_ok,
        format!("{} generator pairs commute", conj.len() * rb.len()),
    ));
    let certs = par::map(&rk, parallel, |r| {
        contraction_certificate(g, r, depth, 2 * depth + 2)
    });
    let d_ok = certs
        .iter()
        .all(|c| c.verdict == ContractionVerdict::Contracts);
    let max_step = certs.iter().filter_map(|c| c.step).max().unwrap_or(0);
    checks.push(Check::new(
        "contraction",
        d_ok,
        format!(
            "{} generators contract on the radius-{depth} ball within {max_step} steps",
            certs.len()
        ),
    ));
    let verified = all_passed(&checks);
    Ok(GoodshrinkCertificate {
        alpha: alpha.clone(),
        g_alpha: ga,
        beta,
        partition_level: level,
        n0,
        xi_interior,
        kappa,
        depth,
        rist_kappa_size: rk.len(),
        rist_shift_beta_size: rb.len(),
        checks,
        verified,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NubWindow {
    pub beta: CylinderClopen,
    pub m: usize,
    pub depth: usize,
    pub translates: Vec<(i64, CylinderClopen)>,
    pub factor_size: usize,
    pub factor_pairs: usize,
    pub generator_pairs_checked: usize,
    pub checks: Vec<Check>,
    pub verified: bool,
    pub note: &'static str,
}

/// Shifted copies `L_i = gⁱ rist(β) g⁻ⁱ`, `|i| ≤ m`, of a truncated rigid
/// stabiliser: checks that they commute pairwise and that conjugation by
/// `g` maps `L_i` onto `L_{i+1}` generator by generator.
pub fn nub_window(
    u: &UniversalGroup,
    g: &Automorphism,
    beta: &CylinderClopen,
    m: usize,
    depth: usize,
    parallel: bool,
) -> Result<NubWindow> {
    let ginv = g.inverse();
    let mi = m as i64;
    let translates: Vec<(i64, CylinderClopen)> = (-mi..=mi)
        .map(|i| (i, g.pow(i).image_clopen(beta)))
        .collect();
    for (a, (i, x)) in translates.iter().enumerate() {
        for (j, y) in &translates[..a] {
            if !x.is_disjoint(y) {
                return Err(LabError::DisjointnessFailure(format!(
                    "g^{j}{beta} = {y} meets g^{i}{beta} = {x}"
                )));
            }
        }
    }
    let base = rist_generators(u, beta, depth)?.automorphisms();
    let factors: Vec<Vec<Automorphism>> = (-mi..=mi)
        .map(|i| {
            let h = g.pow(i);
            let hinv = h.inverse();
            base.iter().map(|r| h.compose(r).compose(&hinv)).collect()
        })
        .collect();
    let mut pairs = Vec::new();
    for a in 0..factors.len() {
        for b in 0..a {
            pairs.push((b, a));
        }
    }
    let commute = par::all(&pairs, parallel, |&(a, b)| {
        factors[a]
            .iter()
            .all(|x| factors[b].iter().all(|y| x.commutes_with(y)))
    });
    let indices: Vec<usize> = (0..factors.len().saturating_sub(1)).collect();
    let shift = par::all(&indices, parallel, |&i| {
        factors[i]
            .iter()
            .zip(&factors[i + 1])
            .all(|(x, y)| g.compose(x).compose(&ginv) == *y)
    });
    let supported = translates
        .iter()
        .zip(&factors)
        .all(|((_, t), f)| f.iter().all(|x| in_rist(u, x, t)));
    let checks = vec![
        Check::new(
            "disjoint-translates",
            true,
            format!("{} translates pairwise disjoint", translates.len()),
        ),
        Check::new("supports", supported, "each L_i lies in rist(g^i beta)"),
        Check::new(
            "commutation",
            commute,
            format!(
                "{} factor pairs, {} generator pairs",
                pairs.len(),
                pairs.len() * base.len() * base.len()
            ),
        ),
        Check::new(
            "shift",
            shift,
            format!(
                "g L_i g^-1 = L_(i+1) on {} generators",
                indices.len() * base.len()
            ),
        ),
    ];
    let verified = all_passed(&checks);
    Ok(NubWindow {
        beta: beta.clone(),
        m,
        depth,
        translates,
        factor_size: base.len(),
        factor_pairs: pairs.len(),
        generator_pairs_checked: pairs.len() * base.len() * base.len(),
        checks,
        verified,
        note: "finite shadow of the shift action on a product of commuting copies; the contraction group is not closed",
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TitsCoreEntry {
    pub generator: Automorphism,
    pub forward: ContractionCertificate,
    pub backward: ContractionCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct TitsCoreReport {
    pub beta: CylinderClopen,
    pub depth: usize,
    pub entries: Vec<TitsCoreEntry>,
    pub normalisers: Vec<Automorphism>,
    pub checks: Vec<Check>,
    pub verified: bool,
}

/// Generators of `rist(β)`, `β = α ∖ gα`, each contracted by `g`, with its
/// `g⁻¹`-conjugate contracted by `g⁻¹`.
pub fn tits_core_generators(
    u: &UniversalGroup,
    g: &Automorphism,
    alpha: &CylinderClopen,
    depth: usize,
) -> Result<TitsCoreReport> {
    let ga = require_skewering(g, alpha)?;
    let beta = alpha.difference(&ga);
    let ginv = g.inverse();
    let gens = rist_generators(u, &beta, depth)?.automorphisms();
    let k_max = 2 * depth + 2;
    let entries: Vec<TitsCoreEntry> = gens
        .iter()
        .map(|r| TitsCoreEntry {
            generator: r.clone(),
            forward: contraction_certificate(g, r, depth, k_max),
            backward: contraction_certificate(&ginv, &ginv.compose(r).compose(g), depth, k_max),
        })
        .collect();
    let contracts = entries.iter().all(|e| {
        e.forward.verdict == ContractionVerdict::Contracts
            && e.backward.verdict == ContractionVerdict::Contracts
    });
    let mut normalisers = Vec::new();
    for c in beta.cover() {
        for p in u.site_group(&c)?.generators() {
            if !p.is_identity() {
                normalisers
                    .push(Portrait::elementary(u.shape(), c.clone(), p.clone())?.to_automorphism());
            }
        }
    }
    let normalised = normalisers
        .iter()
        .all(|n| gens.iter().all(|r| in_rist(u, &n.conjugate(r), &beta)));
    let checks = vec![
        Check::new(
            "nonempty",
            !entries.is_empty(),
            format!("{} generators of rist({beta})", entries.len()),
        ),
        Check::new(
            "contraction",
            contracts,
            "forward under g, backward under g^-1",
        ),
        Check::new(
            "normalised",
            normalised,
            format!(
                "{} rotations at the cone vertices of {beta}",
                normalisers.len()
            ),
        ),
    ];
    let verified = all_passed(&checks);
    Ok(TitsCoreReport {
        beta,
        depth,
        entries,
        normalisers,
        checks,
        verified,
    })
}
