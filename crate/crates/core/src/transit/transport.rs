//! Transport of tuples on a suspension, component by component.

use std::collections::BTreeMap;

use super::session::level_steps;
use super::{
    choose_alpha, invert_steps, ContractionRecord, LevelPoint, LiftedStep, Session, StabSpec,
    Suspension,
};
use crate::error::{Error, Result};
use crate::geometry::{BaseGeometry, ComponentLabel};
use crate::scalar::Rational;
use crate::tower::Side;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransportPlan {
    /// Transit level `U_α` per component, pairwise distinct.
    pub alphas: Vec<(ComponentLabel, Rational)>,
    /// Distinct tracked points (sources and targets merged).
    pub pool_size: usize,
    /// Leading coefficients of the single-point movers.
    pub betas: Vec<Rational>,
    /// Leading coefficients of the per-component transits.
    pub gammas: Vec<Rational>,
    pub contractions: Vec<ContractionRecord>,
    pub epsilons: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct TransportResult<F> {
    pub steps: Vec<LiftedStep<F>>,
    pub plan: TransportPlan,
}

fn leading(steps: &[LiftedStep<impl Clone>]) -> Option<Rational> {
    steps
        .first()
        .and_then(|s| s.multiplier.coeffs().last().cloned())
}

/// Script sending `sources[i]` to `targets[i]` for all `i`; the points of
/// each component must be matched in number and pairwise.
///
/// The pool of all points is made hyperbolic with distinct coordinates, each
/// component gets its own `α`, every point is carried into `U_α` inside its
/// `v`-level (this is `g₀`), then each `U_α` is interpolated with the other
/// `α`s fixed (`g`). The result is `g₀ · g · g₀⁻¹`.
pub fn transport<B: BaseGeometry>(
    susp: &Suspension<B>,
    sources: &[LevelPoint<B::Point>],
    targets: &[LevelPoint<B::Point>],
) -> Result<TransportResult<B::Flow>> {
    if sources.len() != targets.len() {
        return Err(Error::ComponentMismatch(format!(
            "{} sources for {} targets",
            sources.len(),
            targets.len()
        )));
    }
    for (name, pts) in [("sources", sources), ("targets", targets)] {
        for (i, p) in pts.iter().enumerate() {
            susp.check(p)?;
            if pts[..i].contains(p) {
                return Err(Error::Precondition(format!(
                    "{name} must be pairwise distinct"
                )));
            }
        }
    }
    for (i, (s, t)) in sources.iter().zip(targets).enumerate() {
        let (cs, ct) = (susp.component_of(s)?, susp.component_of(t)?);
        if cs != ct {
            return Err(Error::ComponentMismatch(format!(
                "pair {i}: source in {cs}, target in {ct}"
            )));
        }
    }
    let mut plan = TransportPlan::default();
    if sources == targets {
        return Ok(TransportResult {
            steps: Vec::new(),
            plan,
        });
    }

    let mut pool: Vec<LevelPoint<B::Point>> = Vec::new();
    let index = |p: &LevelPoint<B::Point>, pool: &mut Vec<_>| match pool.iter().position(|q| q == p)
    {
        Some(i) => i,
        None => {
            pool.push(p.clone());
            pool.len() - 1
        }
    };
    let src: Vec<usize> = sources.iter().map(|p| index(p, &mut pool)).collect();
    let tgt: Vec<usize> = targets.iter().map(|p| index(p, &mut pool)).collect();
    plan.pool_size = pool.len();

    let mut groups: BTreeMap<ComponentLabel, Vec<usize>> = BTreeMap::new();
    for (i, p) in pool.iter().enumerate() {
        groups.entry(susp.component_of(p)?).or_default().push(i);
    }

    let mut session = Session::new(susp, pool)?;
    session
        .distinct_coords(&[], &[])
        .map_err(|e| e.at_stage("separate"))?;

    let mut alphas: Vec<Rational> = Vec::new();
    for (comp, group) in &groups {
        let choice = choose_alpha(&mut session, group, &alphas).map_err(|e| e.at_stage("alpha"))?;
        alphas.push(choice.alpha.clone());
        plan.alphas.push((comp.clone(), choice.alpha));
        plan.contractions.extend(choice.records);
        plan.epsilons.extend(choice.epsilon);
    }

    for ((_, group), alpha) in groups.iter().zip(&alphas) {
        for &i in group {
            let p = session.point(i).clone();
            if p.u == *alpha {
                continue;
            }
            let comp = susp.base.component_of(&p.base)?;
            let r = susp
                .base
                .section(&susp.f, &(alpha * &p.v), &comp, &[])
                .map_err(|e| e.at_stage("mover"))?;
            let before = session.steps().len();
            session
                .move_within_level(Side::V, &p.v, &[(i, r)], &[], "mover")
                .map_err(|e| e.at_stage("mover"))?;
            plan.betas.extend(leading(&session.steps()[before..]));
        }
    }

    let moved: Vec<_> = session.points().to_vec();
    let g0 = session.into_steps();
    let mut g = Vec::new();
    for ((comp, _), alpha) in groups.iter().zip(&alphas) {
        let pairs: Vec<_> = (0..sources.len())
            .filter(|&k| susp.component_of(&sources[k]).is_ok_and(|c| c == *comp))
            .collect();
        let from: Vec<_> = pairs.iter().map(|&k| moved[src[k]].base.clone()).collect();
        let to: Vec<_> = pairs.iter().map(|&k| moved[tgt[k]].base.clone()).collect();
        let spec = StabSpec {
            side: Side::U,
            fixed_values: alphas.iter().filter(|a| *a != alpha).cloned().collect(),
            normalize_at: Some(alpha.clone()),
            fix_zero: false,
        };
        let steps =
            level_steps(susp, &spec, &from, &to, "transit").map_err(|e| e.at_stage("transit"))?;
        plan.gammas.extend(leading(&steps));
        g.extend(steps);
    }

    let mut steps = g0.clone();
    steps.extend(g);
    steps.extend(invert_steps(&g0));
    for (k, (s, t)) in sources.iter().zip(targets).enumerate() {
        if susp.apply_steps(&steps, s)? != *t {
            return Err(Error::Verification(format!("transport misses pair {k}")));
        }
    }
    Ok(TransportResult { steps, plan })
}

/// [`transport`] for tuples inside a single component.
pub fn transport_component<B: BaseGeometry>(
    susp: &Suspension<B>,
    sources: &[LevelPoint<B::Point>],
    targets: &[LevelPoint<B::Point>],
) -> Result<TransportResult<B::Flow>> {
    let mut comps = Vec::new();
    for p in sources.iter().chain(targets) {
        let c = susp.component_of(p)?;
        if !comps.contains(&c) {
            comps.push(c);
        }
    }
    if comps.len() > 1 {
        return Err(Error::ComponentMismatch(format!(
            "points span {} components",
            comps.len()
        )));
    }
    transport(susp, sources, targets)
}
