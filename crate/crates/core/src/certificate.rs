//! Replayable JSON certificates for every finite verification.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boolalg::TreeShape;
use crate::boolalg::{parse_clopen, CylinderClopen};
use crate::boundary::{self, ContractionVerdict};
use crate::check::{all_passed, Check};
use crate::dynamics::{self, ActionContext, MinimalityVerdict};
use crate::error::{LabError, Result};
use crate::localstruct::{self, LocalClass};
use crate::permgrp::{self, FiniteGroup};
use crate::specfile::GroupSpec;
use crate::tree::{local_prime_content, sphere_orbit_bound};

pub const SCHEMA: &str = "tdlc-cert/1";

/// The operation a certificate records, with its own parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Operation {
    ReportLocal {
        from: usize,
        to: usize,
    },
    Minimal,
    Skewering,
    Minorising,
    Degree,
    Proximal {
        end_depth: usize,
        count: usize,
        target: String,
    },
    Measure {
        depths: Vec<usize>,
    },
    FixedPoints {
        depths: Vec<usize>,
    },
    Commensurated {
        region: String,
    },
    Contraction {
        element: String,
        u: String,
        ball: usize,
        k_max: usize,
    },
    Goodshrink {
        element: String,
        alpha: String,
    },
    Nub {
        element: String,
        beta: String,
        m: usize,
    },
    FreeSemigroup {
        length: usize,
    },
    TitsCore {
        element: String,
        alpha: String,
    },
    OrbitJoin {
        alpha: String,
    },
}

impl Operation {
    pub fn kind(&self) -> &'static str {
        match self {
            Operation::ReportLocal { .. } => "report-local",
            Operation::Minimal => "minimal",
            Operation::Skewering => "skewering",
            Operation::Minorising => "minorising",
            Operation::Degree => "degree",
            Operation::Proximal { .. } => "proximal",
            Operation::Measure { .. } => "measure",
            Operation::FixedPoints { .. } => "fixed-points",
            Operation::Commensurated { .. } => "commensurated",
            Operation::Contraction { .. } => "contraction",
            Operation::Goodshrink { .. } => "goodshrink",
            Operation::Nub { .. } => "nub",
            Operation::FreeSemigroup { .. } => "free-semigroup",
            Operation::TitsCore { .. } => "tits-core",
            Operation::OrbitJoin { .. } => "orbit-join",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    /// canonical text of the group spec
    pub spec: String,
    pub depth: usize,
    pub word_bound: usize,
    pub seed: u64,
    pub operation: Operation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    RefutedAtDepth,
    NotFoundWithinBounds,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::RefutedAtDepth => 1,
            Verdict::NotFoundWithinBounds => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub depth: usize,
    pub word_bound: usize,
    pub closure_cap: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub kind: String,
    pub tool_version: String,
    pub group_spec_hash: String,
    pub parameters: Parameters,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub bounds: Bounds,
    pub result: Value,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::parse(e.line(), e.column(), e.to_string()))
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn clopen(spec: &GroupSpec, text: &str) -> Result<CylinderClopen> {
    parse_clopen(spec.shape, text)
}

struct Outcome {
    checks: Vec<Check>,
    verdict: Verdict,
    result: Value,
}

impl Outcome {
    fn from_checks(checks: Vec<Check>, result: Value) -> Self {
        let verdict = if all_passed(&checks) {
            Verdict::Verified
        } else {
            Verdict::RefutedAtDepth
        };
        Outcome {
            checks,
            verdict,
            result,
        }
    }

    /// Search failures and refutations raised as errors become verdicts.
    fn from_error(e: LabError) -> Result<Self> {
        let verdict = match &e {
            LabError::SearchExhausted { .. } | LabError::NotTransitiveAtRadius { .. } => {
                Verdict::NotFoundWithinBounds
            }
            LabError::NotSkewering(_) | LabError::DisjointnessFailure(_) => Verdict::RefutedAtDepth,
            _ => return Err(e),
        };
        Ok(Outcome {
            checks: vec![Check::new("precondition", false, e.to_string())],
            verdict,
            result: json!({ "error": e.to_string() }),
        })
    }
}

fn ctx_for(spec: &GroupSpec, p: &Parameters) -> Result<ActionContext> {
    spec.context(p.depth, p.word_bound)
}

/// Runs `p.operation` against the spec and packages the outcome.
pub fn run(
    spec: &GroupSpec,
    depth: usize,
    word_bound: usize,
    seed: u64,
    operation: Operation,
) -> Result<Certificate> {
    let p = Parameters {
        spec: spec.render(),
        depth,
        word_bound,
        seed,
        operation,
    };
    let outcome = match execute(spec, &p) {
        Ok(o) => o,
        Err(e) => Outcome::from_error(e)?,
    };
    Ok(Certificate {
        schema: SCHEMA.to_string(),
        kind: p.operation.kind().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        group_spec_hash: spec.hash(),
        bounds: Bounds {
            depth,
            word_bound,
            closure_cap: permgrp::default_cap(),
        },
        parameters: p,
        checks: outcome.checks,
        verdict: outcome.verdict,
        result: outcome.result,
    })
}

fn execute(spec: &GroupSpec, p: &Parameters) -> Result<Outcome> {
    match &p.operation {
        Operation::ReportLocal { from, to } => report_local(spec, *from, *to),
        Operation::Minimal => {
            let r = dynamics::check_minimal(&ctx_for(spec, p)?);
            let ok = r.verdict == MinimalityVerdict::MinimalAtDepth;
            let detail = match &r.counterexample {
                None => format!(
                    "all {} ordered pairs of depth-{} cylinders connected",
                    r.pairs, r.depth
                ),
                Some((a, b)) => {
                    format!("no word of length <= {} carries {a} into {b}", r.word_bound)
                }
            };
            Ok(Outcome::from_checks(
                vec![Check::new("minimal-at-depth", ok, detail)],
                to_value(&r),
            ))
        }
        Operation::Skewering => match dynamics::skewering_search(&ctx_for(spec, p)?) {
            Some(s) => Ok(Outcome::from_checks(
                vec![Check::new(
                    "strict-inclusion",
                    s.g_alpha.lt(&s.alpha),
                    format!("{} < {}", s.g_alpha, s.alpha),
                )],
                to_value(&s),
            )),
            None => Err(LabError::SearchExhausted {
                what: "skewering element".into(),
                bound: p.word_bound,
            }),
        },
        Operation::Minorising => {
            let ctx = ctx_for(spec, p)?;
            let m = dynamics::minorising_set(&ctx)?;
            let replay = m.witnesses.iter().all(|w| {
                ctx.evaluate(&w.word)
                    .map(|g| g.image_clopen(&w.source).lt(&w.target))
                    .unwrap_or(false)
            });
            Ok(Outcome::from_checks(
                vec![Check::new(
                    "witnesses",
                    replay,
                    format!(
                        "{} targets below translates of {} cylinders",
                        m.witnesses.len(),
                        m.set.len()
                    ),
                )],
                to_value(&m),
            ))
        }
        Operation::Degree => {
            let d = dynamics::minorising_degree(&ctx_for(spec, p)?)?;
            Ok(Outcome::from_checks(d.checks.clone(), to_value(&d)))
        }
        Operation::Proximal {
            end_depth,
            count,
            target,
        } => {
            let ctx = ctx_for(spec, p)?;
            let target = clopen(spec, target)?;
            let r = dynamics::proximality_sample(&ctx, *end_depth, *count, p.seed, &target)?;
            let replay = r.schedules.iter().all(|s| s.replay(&ctx).unwrap_or(false));
            let checks = vec![
                Check::new(
                    "replay",
                    replay,
                    "every schedule maps both cylinders into the target",
                ),
                Check::new(
                    "all-compressed",
                    r.failures.is_empty(),
                    format!(
                        "{}/{} pairs, longest word {}",
                        r.compressed, r.attempted, r.longest_word
                    ),
                ),
            ];
            let verdict = if !replay {
                Verdict::RefutedAtDepth
            } else if r.failures.is_empty() {
                Verdict::Verified
            } else {
                Verdict::NotFoundWithinBounds
            };
            Ok(Outcome {
                checks,
                verdict,
                result: to_value(&r),
            })
        }
        Operation::Measure { depths } => {
            let ctx = ctx_for(spec, p)?;
            let mut checks = Vec::new();
            let mut reports = Vec::new();
            for &n in depths {
                let r = dynamics::invariant_measure_search(&ctx.with_depth(n), n)?;
                checks.push(Check::new(
                    format!("exact-depth-{n}"),
                    r.verified,
                    "certificate re-verified in exact arithmetic",
                ));
                checks.push(Check::new(
                    format!("infeasible-depth-{n}"),
                    !r.feasible(),
                    format!("{} variables, {} constraints", r.variables, r.constraints),
                ));
                reports.push(r);
            }
            Ok(Outcome::from_checks(checks, to_value(&reports)))
        }
        Operation::FixedPoints { depths } => {
            let ctx = ctx_for(spec, p)?;
            let scans: Vec<_> = depths
                .iter()
                .map(|&n| localstruct::fixed_point_scan(&ctx, n))
                .collect();
            let checks = scans
                .iter()
                .map(|s| {
                    Check::new(
                        format!("only-trivial-depth-{}", s.depth),
                        s.fixed_count == 2,
                        format!("{} fixed classes {}", s.fixed_count, s.scope),
                    )
                })
                .collect();
            Ok(Outcome::from_checks(checks, to_value(&scans)))
        }
        Operation::Commensurated { region } => {
            let ctx = ctx_for(spec, p)?;
            let class = LocalClass::from_region(clopen(spec, region)?, p.depth);
            let r = localstruct::commensurated_check(&ctx, &class)?;
            Ok(Outcome::from_checks(
                vec![Check::new(
                    "commensurated-at-depth",
                    r.commensurated,
                    format!("moved by {:?}", r.moved_by),
                )],
                to_value(&r),
            ))
        }
        Operation::Contraction {
            element,
            u,
            ball,
            k_max,
        } => {
            let c = boundary::contraction_certificate(
                spec.element(element)?,
                spec.element(u)?,
                *ball,
                *k_max,
            );
            let ok = c.verdict == ContractionVerdict::Contracts;
            let checks = vec![Check::new(
                "contraction",
                ok,
                match c.step {
                    Some(k) => format!("trivial on the radius-{ball} ball after {k} conjugations"),
                    None => format!("not trivial within {k_max} conjugations"),
                },
            )];
            Ok(Outcome {
                checks,
                verdict: if ok {
                    Verdict::Verified
                } else {
                    Verdict::NotFoundWithinBounds
                },
                result: to_value(&c),
            })
        }
        Operation::Goodshrink { element, alpha } => {
            let u = spec.universal()?;
            let c = boundary::goodshrink_construct(
                &u,
                spec.element(element)?,
                &clopen(spec, alpha)?,
                p.depth,
                true,
            )?;
            Ok(Outcome::from_checks(c.checks.clone(), to_value(&c)))
        }
        Operation::Nub { element, beta, m } => {
            let u = spec.universal()?;
            let w = boundary::nub_window(
                &u,
                spec.element(element)?,
                &clopen(spec, beta)?,
                *m,
                p.depth,
                true,
            )?;
            Ok(Outcome::from_checks(w.checks.clone(), to_value(&w)))
        }
        Operation::FreeSemigroup { length } => {
            let c = dynamics::free_semigroup_certificate(&ctx_for(spec, p)?, *length)?;
            Ok(Outcome::from_checks(c.checks.clone(), to_value(&c)))
        }
        Operation::TitsCore { element, alpha } => {
            let u = spec.universal()?;
            let r = boundary::tits_core_generators(
                &u,
                spec.element(element)?,
                &clopen(spec, alpha)?,
                p.depth,
            )?;
            Ok(Outcome::from_checks(r.checks.clone(), to_value(&r)))
        }
        Operation::OrbitJoin { alpha } => {
            let j = dynamics::orbit_join(&ctx_for(spec, p)?, &clopen(spec, alpha)?)?;
            Ok(Outcome::from_checks(
                vec![Check::new(
                    "invariant",
                    j.invariant,
                    format!("{} witnesses", j.witnesses.len()),
                )],
                to_value(&j),
            ))
        }
    }
}

fn report_local(spec: &GroupSpec, from: usize, to: usize) -> Result<Outcome> {
    if from > to {
        return Err(LabError::invalid(format!(
            "empty depth window {from}..{to}"
        )));
    }
    let u = spec.universal()?;
    let eta = local_prime_content(&u, from..=to)?;
    let orbits = (from..=to)
        .map(|n| sphere_orbit_bound(&u, n))
        .collect::<Result<Vec<_>>>()?;
    let mut levels = Vec::new();
    for n in from.max(1)..=to {
        if u.level_order(n)? > 4096u32.into() {
            break;
        }
        let g = u.realized_level(n)?;
        let factors: Vec<String> = permgrp::composition_factors(&g)?
            .iter()
            .map(ToString::to_string)
            .collect();
        levels.push(json!({ "level": n, "order": g.order()?, "composition_factors": factors }));
    }
    let f = std::sync::Arc::new(spec.local_group()?);
    let local = local_group_data(&f, &eta.eta)?;
    let d = spec.shape.degree() as usize;
    let mut checks = Vec::new();
    if !matches!(spec.shape, TreeShape::Rooted { .. }) {
        let ok = orbits
            .iter()
            .filter(|r| r.level >= 1)
            .all(|r| r.max_orbit < d);
        checks.push(Check::new(
            "orbit-bound",
            ok,
            format!(
                "orbits of level-n stabilisers on the (n+1)-sphere have size at most {} for n >= 1",
                d - 1
            ),
        ));
    }
    checks.push(Check::new(
        "realized-orders",
        levels.iter().all(|l| {
            let n = l["level"].as_u64().unwrap_or(0) as usize;
            u.level_order(n).map(|o| o.to_string()) == Ok(l["order"].to_string())
        }),
        "enumerated levels match the counting formula",
    ));
    Ok(Outcome::from_checks(
        checks,
        json!({ "eta": eta, "sphere_orbits": orbits, "realized_levels": levels, "local_group": local }),
    ))
}

fn local_group_data(
    f: &std::sync::Arc<FiniteGroup>,
    eta: &std::collections::BTreeSet<u64>,
) -> Result<Value> {
    let factors: Vec<String> = permgrp::composition_factors(f)?
        .iter()
        .map(ToString::to_string)
        .collect();
    Ok(json!({
        "order": f.order()?,
        "composition_factors": factors,
        "soluble": permgrp::is_soluble(f)?,
        "melnikov_order": permgrp::melnikov(f)?.order()?,
        "prosoluble_core_order": permgrp::prosoluble_core(f)?.order()?,
        "prosoluble_residual_order": permgrp::prosoluble_residual(f)?.order()?,
        "eta_core_order": permgrp::pi_core(f, eta)?.order()?,
        "eta_residual_order": permgrp::pi_residual(f, eta)?.order()?,
    }))
}

/// The original certificate, its re-run, and whether the re-run serialises
/// to exactly the same bytes.
#[derive(Clone, Debug)]
pub struct Replay {
    pub original: Certificate,
    pub rerun: Certificate,
    pub identical: bool,
}

pub fn replay(text: &str) -> Result<Replay> {
    let original = Certificate::from_json(text)?;
    if original.schema != SCHEMA {
        return Err(LabError::invalid(format!(
            "unknown schema {}",
            original.schema
        )));
    }
    let spec = GroupSpec::parse(&original.parameters.spec)?;
    if spec.hash() != original.group_spec_hash {
        return Err(LabError::invalid("embedded spec does not match its hash"));
    }
    let p = &original.parameters;
    let rerun = run(&spec, p.depth, p.word_bound, p.seed, p.operation.clone())?;
    let identical = rerun.to_json() == text.trim_end();
    Ok(Replay {
        original,
        rerun,
        identical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn certificates_replay_exactly() {
        let spec = GroupSpec::parse(presets::U_S3).unwrap();
        let c = run(&spec, 2, 4, 0, Operation::FreeSemigroup { length: 3 }).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        let r = replay(&c.to_json()).unwrap();
        assert!(r.identical);
        assert_eq!(r.rerun.verdict, Verdict::Verified);
        let tampered = c.to_json().replace("\"rows\": 15", "\"rows\": 16");
        assert!(!replay(&tampered).unwrap().identical);
    }

    #[test]
    fn errors_become_verdicts() {
        let spec = GroupSpec::parse(presets::U_S3).unwrap();
        let c = run(
            &spec,
            3,
            8,
            0,
            Operation::Goodshrink {
                element: "r01".into(),
                alpha: "{0}".into(),
            },
        )
        .unwrap();
        assert_eq!(c.verdict, Verdict::RefutedAtDepth);
        let rot = GroupSpec::parse(presets::ROTATIONS).unwrap();
        let c = run(&rot, 2, 4, 0, Operation::Skewering).unwrap();
        assert_eq!(c.verdict, Verdict::NotFoundWithinBounds);
        assert!(run(
            &spec,
            2,
            4,
            0,
            Operation::OrbitJoin {
                alpha: "{9}".into()
            }
        )
        .is_err());
    }

    #[test]
    fn local_report() {
        let spec = GroupSpec::parse(presets::U_S3).unwrap();
        let c = run(&spec, 4, 8, 0, Operation::ReportLocal { from: 1, to: 4 }).unwrap();
        assert_eq!(c.verdict, Verdict::Verified, "{:?}", c.checks);
        assert_eq!(c.result["eta"]["eta"], json!([2]));
    }
}
