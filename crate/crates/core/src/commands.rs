//! The four operations behind the command line: solve, verify, certify-flex
//! and describe.

use std::collections::BTreeMap;
use std::fmt;

use log::{debug, info};

use crate::derivation::{AutomorphismScript, Derivation, FlowStep};
use crate::error::{Error, Result};
use crate::format::{
    CertStep, Certificate, FlexReport, Instance, InstanceBody, StepAction, Summary,
};
use crate::geometry::{
    BaseGeometry, ComponentLabel, MockComponent, MockFlow, MockGeometry, MockToken, PolyGeometry,
    RangeDescriptor,
};
use crate::scalar::{fmt_rational, Rational};
use crate::tower::{SuspensionTower, TowerPoint};
use crate::transit::{
    flexibility_certificate, lift_with, transport, LevelPoint, LiftedStep, Suspension,
    TransportPlan,
};

/// Outcome of `solve`: the certificate, the plan that produced it and the
/// verification it passed.
#[derive(Debug, Clone)]
pub struct Solution {
    pub certificate: Certificate,
    pub plan: Option<TransportPlan>,
    pub report: VerifyReport,
}

/// One family of checks with the failures found, each naming its location.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckGroup {
    pub name: &'static str,
    pub total: usize,
    pub failures: Vec<String>,
}

impl CheckGroup {
    fn new(name: &'static str) -> Self {
        CheckGroup {
            name,
            total: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub groups: Vec<CheckGroup>,
    pub max_nilpotency: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(CheckGroup::passed)
    }

    pub fn group(&self, name: &str) -> Option<&CheckGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    /// `"<check>: <location and reason>"` for the first failure.
    pub fn first_failure(&self) -> Option<String> {
        self.groups
            .iter()
            .find_map(|g| g.failures.first().map(|f| format!("{}: {f}", g.name)))
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            if g.passed() {
                writeln!(f, "{:<11} ok ({} checked)", g.name, g.total)?;
            } else {
                writeln!(
                    f,
                    "{:<11} FAILED ({} of {})",
                    g.name,
                    g.failures.len(),
                    g.total
                )?;
                for fail in &g.failures {
                    writeln!(f, "  {fail}")?;
                }
            }
        }
        write!(
            f,
            "verdict     {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

fn tuple(xs: &[Rational]) -> String {
    let parts: Vec<_> = xs.iter().map(fmt_rational).collect();
    format!("({})", parts.join(", "))
}

fn mock_geometry(
    components: &[MockComponent],
    tokens: &[MockToken],
    dim: usize,
) -> Result<MockGeometry> {
    MockGeometry::new(components.to_vec(), tokens.to_vec(), dim)
}

/// Builds a script for the instance and verifies it before returning.
pub fn cmd_solve(inst: &Instance) -> Result<Solution> {
    let opts = &inst.options;
    let (variables, steps, tokens, plan) = match &inst.body {
        InstanceBody::Affine {
            tower,
            sources,
            targets,
        } => {
            for (role, pts) in [("source", sources), ("target", targets)] {
                for (i, p) in pts.iter().enumerate() {
                    let p = tower
                        .check_point(p.coords.clone())
                        .map_err(|e| e.at_stage("input"))?;
                    if !tower.is_regular(&p) {
                        return Err(
                            Error::Precondition(format!("{role} {i} is a singular point"))
                                .at_stage("input"),
                        );
                    }
                }
            }
            let geo = PolyGeometry::new(tower.clone(), opts.transit.clone());
            info!(
                "transporting {} points at depth {}",
                sources.len(),
                tower.depth()
            );
            let (flows, plan) = geo
                .transport_plan(sources, targets)
                .map_err(|e| e.at_stage("transport"))?;
            let steps = flows
                .iter()
                .map(|(fl, t)| {
                    let d = fl.to_derivation(tower)?;
                    let (side, multiplier) = match fl.lift_data() {
                        Some((s, q)) => (Some(s), Some(q.clone())),
                        None => (None, None),
                    };
                    Ok(CertStep {
                        stage: fl.stage().to_string(),
                        level: fl.level(),
                        side,
                        multiplier,
                        time: t.clone(),
                        action: StepAction::Derivation(d.images),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.at_stage("lift"))?;
            let vars = tower.vars().iter().map(|n| n.to_string()).collect();
            (vars, steps, Vec::new(), plan)
        }
        InstanceBody::Mock {
            components,
            tokens,
            dim,
            names,
            sources,
            targets,
        } => {
            let geo = mock_geometry(components, tokens, *dim)?;
            let susp = Suspension::new(geo.clone(), (), opts.transit.clone());
            info!("transporting {} mock points", sources.len());
            let res = transport(&susp, sources, targets).map_err(|e| e.at_stage("transport"))?;
            let steps = res
                .steps
                .iter()
                .map(|s| CertStep {
                    stage: s.stage.to_string(),
                    level: 1,
                    side: Some(s.side),
                    multiplier: Some(s.multiplier.clone()),
                    time: s.time.clone(),
                    action: StepAction::Permutation(s.flow.pairs.clone()),
                })
                .collect();
            let created: Vec<_> = geo.tokens().into_iter().skip(tokens.len()).collect();
            let vars = vec!["base".to_string(), names.0.clone(), names.1.clone()];
            (vars, steps, created, Some(res.plan))
        }
    };
    debug!("script has {} steps", steps.len());
    let mut certificate = Certificate {
        instance_digest: inst.digest(),
        variables,
        summary: Summary::default(),
        tokens,
        steps,
    };
    let report = cmd_verify(inst, &certificate)?;
    if !report.passed() {
        return Err(
            Error::Verification(report.first_failure().unwrap_or_default()).at_stage("verify"),
        );
    }
    let plan_ref = plan.as_ref();
    certificate.summary = Summary {
        steps: certificate.steps.len(),
        pool_size: plan_ref.map_or(0, |p| p.pool_size),
        alphas: plan_ref.map_or_else(Vec::new, |p| {
            p.alphas
                .iter()
                .map(|(c, a)| (c.to_string(), a.clone()))
                .collect()
        }),
        contractions: plan_ref.map_or(0, |p| p.contractions.len()),
        max_nilpotency: report.max_nilpotency,
        verified: true,
    };
    Ok(Solution {
        certificate,
        plan,
        report,
    })
}

/// Re-checks a certificate against an instance from scratch.
///
/// Errors are reserved for malformed input; failed checks are reported in
/// the returned [`VerifyReport`].
pub fn cmd_verify(inst: &Instance, cert: &Certificate) -> Result<VerifyReport> {
    let mut digest = CheckGroup::new("digest");
    let expected = inst.digest();
    digest.record(cert.instance_digest == expected, || {
        format!(
            "certificate is for {}, instance is {expected}",
            cert.instance_digest
        )
    });
    let mut report = match &inst.body {
        InstanceBody::Affine {
            tower,
            sources,
            targets,
        } => verify_affine(inst, tower, sources, targets, cert)?,
        InstanceBody::Mock {
            components,
            tokens,
            dim,
            names,
            sources,
            targets,
        } => {
            let expected = ["base", names.0.as_str(), names.1.as_str()];
            if cert.variables != expected {
                return Err(Error::Format(format!(
                    "certificate variables {:?} do not match {expected:?}",
                    cert.variables
                )));
            }
            let mut all = tokens.clone();
            all.extend(cert.tokens.iter().cloned());
            let geo = mock_geometry(components, &all, *dim)?;
            verify_mock(inst, geo, sources, targets, cert)?
        }
    };
    report.groups.insert(0, digest);
    Ok(report)
}

fn verify_affine(
    inst: &Instance,
    tower: &SuspensionTower,
    sources: &[TowerPoint],
    targets: &[TowerPoint],
    cert: &Certificate,
) -> Result<VerifyReport> {
    let names: Vec<String> = tower.vars().iter().map(|n| n.to_string()).collect();
    if cert.variables != names {
        return Err(Error::Format(format!(
            "certificate variables {:?} do not match the tower {names:?}",
            cert.variables
        )));
    }
    let cap = inst.options.nilpotency_cap;
    let mut relation = CheckGroup::new("relation");
    let mut nilpotency = CheckGroup::new("nilpotency");
    let mut endpoint = CheckGroup::new("endpoint");
    let mut max_nil = 0;
    let mut script = Vec::new();
    for (k, step) in cert.steps.iter().enumerate() {
        let StepAction::Derivation(images) = &step.action else {
            relation.record(false, || {
                format!("step {k}: a permutation step in an affine certificate")
            });
            continue;
        };
        let d = Derivation::new(images.clone(), step.stage.clone());
        let failing = tower.failing_relation(&d);
        relation.record(failing.is_none(), || match failing {
            Some(0) => format!(
                "step {k}: {} generator images for {} generators",
                d.nvars(),
                tower.ambient()
            ),
            Some(l) => format!("step {k}: relation of level {l} is not annihilated"),
            None => unreachable!(),
        });
        let nil = d.check_nilpotent(cap);
        nilpotency.record(nil.is_ok(), || {
            format!("step {k}: not nilpotent within {cap} iterations")
        });
        if let Ok(n) = nil {
            max_nil = max_nil.max(n);
        }
        script.push(FlowStep::new(d, step.time.clone()));
    }
    if sources.len() != targets.len() {
        endpoint.record(false, || {
            format!("{} sources for {} targets", sources.len(), targets.len())
        });
    } else if relation.passed() && nilpotency.passed() {
        let pts: Vec<_> = sources.iter().map(|p| p.coords.clone()).collect();
        let images = AutomorphismScript::new(script).apply_points(&pts, cap)?;
        for (i, (img, t)) in images.iter().zip(targets).enumerate() {
            endpoint.record(*img == t.coords, || {
                format!(
                    "pair {i}: image {} differs from target {}",
                    tuple(img),
                    tuple(&t.coords)
                )
            });
        }
    } else {
        endpoint.record(false, || "skipped: earlier checks failed".into());
    }
    Ok(VerifyReport {
        groups: vec![relation, nilpotency, endpoint],
        max_nilpotency: max_nil,
    })
}

fn verify_mock(
    inst: &Instance,
    geo: MockGeometry,
    sources: &[LevelPoint<String>],
    targets: &[LevelPoint<String>],
    cert: &Certificate,
) -> Result<VerifyReport> {
    let mut relation = CheckGroup::new("relation");
    let mut endpoint = CheckGroup::new("endpoint");
    let mut steps = Vec::new();
    for (k, step) in cert.steps.iter().enumerate() {
        let problem = mock_step_problem(&geo, step);
        relation.record(problem.is_none(), || {
            format!("step {k}: {}", problem.clone().unwrap_or_default())
        });
        if problem.is_some() {
            continue;
        }
        let StepAction::Permutation(pairs) = &step.action else {
            unreachable!()
        };
        steps.push(LiftedStep {
            flow: MockFlow {
                pairs: pairs.clone(),
            },
            time: step.time.clone(),
            side: step.side.expect("checked"),
            multiplier: step.multiplier.clone().expect("checked"),
            stage: "certificate",
        });
    }
    let susp = Suspension::new(geo, (), inst.options.transit.clone());
    if sources.len() != targets.len() {
        endpoint.record(false, || {
            format!("{} sources for {} targets", sources.len(), targets.len())
        });
    } else if relation.passed() {
        for (i, (s, t)) in sources.iter().zip(targets).enumerate() {
            match susp.apply_steps(&steps, s) {
                Ok(img) => endpoint.record(img == *t, || {
                    format!(
                        "pair {i}: image ({}, {}, {}) differs from target ({}, {}, {})",
                        img.base, img.u, img.v, t.base, t.u, t.v
                    )
                }),
                Err(e) => endpoint.record(false, || format!("pair {i}: {e}")),
            }
        }
    } else {
        endpoint.record(false, || "skipped: earlier checks failed".into());
    }
    Ok(VerifyReport {
        groups: vec![relation, endpoint],
        max_nilpotency: 0,
    })
}

/// A mock step must be a component-preserving permutation of known tokens,
/// lifted with a multiplier vanishing at zero.
fn mock_step_problem(geo: &MockGeometry, step: &CertStep) -> Option<String> {
    let StepAction::Permutation(pairs) = &step.action else {
        return Some("a derivation step in a mock certificate".into());
    };
    if step.side.is_none() || step.multiplier.is_none() {
        return Some("missing side or multiplier".into());
    }
    let mut from = BTreeMap::new();
    let mut to = BTreeMap::new();
    for (a, b) in pairs {
        let (ta, tb) = match (geo.token(a), geo.token(b)) {
            (Ok(ta), Ok(tb)) => (ta, tb),
            _ => return Some(format!("unknown token in `{a}` -> `{b}`")),
        };
        if ta.component != tb.component {
            return Some(format!("`{a}` and `{b}` lie in different components"));
        }
        if from.insert(a.clone(), b.clone()).is_some() || to.insert(b.clone(), a.clone()).is_some()
        {
            return Some(format!("`{a}` -> `{b}` repeats a token"));
        }
    }
    if from.keys().ne(to.keys()) {
        return Some("pairs do not form a permutation".into());
    }
    None
}

/// Rank certificate of the lifted flexibility flows at a point of the top
/// level.
pub fn cmd_certify_flex(inst: &Instance, point: &BTreeMap<String, Rational>) -> Result<FlexReport> {
    let InstanceBody::Affine { tower, .. } = &inst.body else {
        return Err(Error::MockUnrealizable(
            "mock geometry has no tangent vectors".into(),
        ));
    };
    if tower.depth() == 0 {
        return Err(Error::Precondition(
            "affine space has no suspension level".into(),
        ));
    }
    let p = tower.check_named(point)?;
    if !tower.is_regular(&p) {
        return Err(Error::Precondition("point is singular".into()));
    }
    let geo = PolyGeometry::new(tower.clone(), inst.options.transit.clone());
    let susp = geo.suspension()?;
    let cert = flexibility_certificate(&susp, &geo.split(&p))?;
    let derivations = cert
        .flows
        .iter()
        .map(|(fl, side, q)| {
            Ok(lift_with(&fl.to_derivation(tower)?, tower, tower.depth(), q, *side)?.images)
        })
        .collect::<Result<_>>()?;
    Ok(FlexReport {
        variables: tower.vars().iter().map(|n| n.to_string()).collect(),
        point: p,
        matrix: cert.matrix,
        rank: cert.rank,
        dim: cert.dim,
        derivations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointInfo {
    pub role: &'static str,
    pub index: usize,
    pub coords: String,
    /// First level whose relation fails, with its residual.
    pub off_variety: Option<(usize, Rational)>,
    pub regular: bool,
    pub hyperbolic: bool,
    pub component: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Description {
    pub kind: &'static str,
    pub base_dim: usize,
    pub depth: usize,
    pub dim: usize,
    /// One line per level (or per mock component).
    pub levels: Vec<String>,
    pub components: Vec<String>,
    pub points: Vec<PointInfo>,
}

impl fmt::Display for Description {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "geometry    {} (base dimension {}, depth {}, dimension {})",
            self.kind, self.base_dim, self.depth, self.dim
        )?;
        for l in &self.levels {
            writeln!(f, "  {l}")?;
        }
        writeln!(
            f,
            "components  {}: {}",
            self.components.len(),
            self.components.join(", ")
        )?;
        for p in &self.points {
            write!(f, "{} {}  {}", p.role, p.index, p.coords)?;
            match &p.off_variety {
                Some((l, r)) => write!(f, "  off variety at level {l} (residual {r})")?,
                None => {
                    let comp = p.component.as_deref().unwrap_or("?");
                    write!(
                        f,
                        "  component {comp}, {}, {}",
                        if p.regular { "regular" } else { "singular" },
                        if p.hyperbolic {
                            "hyperbolic"
                        } else {
                            "not hyperbolic"
                        }
                    )?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn split_labels(labels: Vec<ComponentLabel>, split: bool) -> Vec<ComponentLabel> {
    if !split {
        return labels;
    }
    labels
        .into_iter()
        .flat_map(|l| {
            ["+", "-"].map(|s| {
                let mut parts = l.0.clone();
                parts.push(s.to_string());
                ComponentLabel(parts)
            })
        })
        .collect()
}

pub fn cmd_describe(inst: &Instance) -> Result<Description> {
    match &inst.body {
        InstanceBody::Affine {
            tower,
            sources,
            targets,
        } => {
            let geo = PolyGeometry::new(tower.clone(), inst.options.transit.clone());
            let vars = tower.vars();
            let mut levels = Vec::new();
            let mut labels = vec![ComponentLabel::new(format!("A{}", tower.base_dim()))];
            for k in 1..=tower.depth() {
                let lvl = tower.level(k);
                let range = geo.at_depth(k - 1).range_of(&lvl.f, &labels[0]);
                let range_text = match &range {
                    Ok(r) => r.to_string(),
                    Err(e) => format!("unsupported ({e})"),
                };
                levels.push(format!(
                    "level {k}: {}*{} = {}, range {range_text}",
                    vars.name(lvl.u),
                    vars.name(lvl.v),
                    lvl.f.to_text(vars)
                ));
                labels = split_labels(labels, range.as_ref().is_ok_and(RangeDescriptor::splits));
            }
            let mut points = Vec::new();
            for (role, pts) in [("source", sources), ("target", targets)] {
                for (i, p) in pts.iter().enumerate() {
                    let off = match tower.check_point(p.coords.clone()) {
                        Err(Error::OffVariety { level, residual }) => Some((level, residual)),
                        Err(e) => return Err(e),
                        Ok(_) => None,
                    };
                    let ok = off.is_none();
                    points.push(PointInfo {
                        role,
                        index: i,
                        coords: tuple(&p.coords),
                        regular: ok && tower.is_regular(p),
                        hyperbolic: ok && (1..=tower.depth()).all(|k| tower.is_hyperbolic(p, k)),
                        component: if ok {
                            geo.component_of(p).ok().map(|c| c.to_string())
                        } else {
                            None
                        },
                        off_variety: off,
                    });
                }
            }
            Ok(Description {
                kind: "affine",
                base_dim: tower.base_dim(),
                depth: tower.depth(),
                dim: tower.dim(),
                levels,
                components: labels.iter().map(ToString::to_string).collect(),
                points,
            })
        }
        InstanceBody::Mock {
            components,
            tokens,
            dim,
            names,
            sources,
            targets,
        } => {
            let geo = mock_geometry(components, tokens, *dim)?;
            let susp = Suspension::new(geo.clone(), (), inst.options.transit.clone());
            let levels = components
                .iter()
                .map(|c| {
                    format!(
                        "component {}: {}*{} = f, range {}{}",
                        c.label,
                        names.0,
                        names.1,
                        c.range,
                        if c.range.splits() { ", splits" } else { "" }
                    )
                })
                .collect();
            let labels: Vec<String> = components
                .iter()
                .flat_map(|c| {
                    split_labels(vec![ComponentLabel::new(c.label.clone())], c.range.splits())
                })
                .map(|l| l.to_string())
                .collect();
            let mut points = Vec::new();
            for (role, pts) in [("source", sources), ("target", targets)] {
                for (i, p) in pts.iter().enumerate() {
                    let value = geo.value(&(), &p.base)?;
                    let residual = &p.u * &p.v - &value;
                    let ok = residual == Rational::from_integer(0.into());
                    points.push(PointInfo {
                        role,
                        index: i,
                        coords: format!(
                            "({}, {}, {})",
                            p.base,
                            fmt_rational(&p.u),
                            fmt_rational(&p.v)
                        ),
                        off_variety: if ok { None } else { Some((1, residual)) },
                        regular: ok,
                        hyperbolic: ok && p.is_hyperbolic(),
                        component: if ok {
                            susp.component_of(p).ok().map(|c| c.to_string())
                        } else {
                            None
                        },
                    });
                }
            }
            Ok(Description {
                kind: "mock",
                base_dim: *dim,
                depth: 1,
                dim: dim + 1,
                levels,
                components: labels,
                points,
            })
        }
    }
}
