//! Affine space `𝔸ⁿ` and its iterated suspensions as base geometries.
//!
//! A [`PolyGeometry`] of depth `k` is the variety cut out by the first `k`
//! levels of a tower. Its flows are shears of `𝔸ⁿ` (depth 0) or lifts of the
//! flows one level down, so interpolation on depth `k` recurses through the
//! transport construction on depth `k − 1`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};

use super::{BaseGeometry, ComponentLabel, RangeDescriptor};
use crate::derivation::DEFAULT_NILPOTENCY_CAP;
use crate::error::{Error, Result};
use crate::linalg::lagrange;
use crate::polyring::Monomial;
use crate::scalar::Rational;
use crate::tower::{is_designated, Side, SuspensionTower, TowerPoint};
use crate::transit::{
    generic_param, lift_with, transport, LevelPoint, Multiplier, Suspension, TransitOptions,
    TransportPlan,
};
use crate::{Derivation, Polynomial};

/// A flow of a [`PolyGeometry`], shared cheaply between scripts.
#[derive(Clone)]
pub struct PolyFlow(Arc<FlowNode>);

enum FlowNode {
    Base {
        derivation: Derivation,
        /// `iterates[i][k] = δᵏ(x_i)`.
        iterates: Vec<Vec<Polynomial>>,
    },
    Lift {
        inner: PolyFlow,
        level: usize,
        side: Side,
        multiplier: Multiplier,
        stage: &'static str,
        derivation: OnceLock<Derivation>,
    },
}

impl PolyFlow {
    /// A locally nilpotent derivation of the base ring.
    pub fn base(derivation: Derivation) -> Result<Self> {
        let iterates = (0..derivation.nvars())
            .map(|i| derivation.iterates(&Polynomial::var(i), DEFAULT_NILPOTENCY_CAP))
            .collect::<Result<_>>()?;
        Ok(PolyFlow(Arc::new(FlowNode::Base {
            derivation,
            iterates,
        })))
    }

    pub fn lift(
        inner: PolyFlow,
        level: usize,
        side: Side,
        multiplier: Multiplier,
        stage: &'static str,
    ) -> Self {
        PolyFlow(Arc::new(FlowNode::Lift {
            inner,
            level,
            side,
            multiplier,
            stage,
            derivation: OnceLock::new(),
        }))
    }

    /// Level of the tower the flow lives on; 0 for shears of the base.
    pub fn level(&self) -> usize {
        match &*self.0 {
            FlowNode::Base { .. } => 0,
            FlowNode::Lift { level, .. } => *level,
        }
    }

    pub fn stage(&self) -> &'static str {
        match &*self.0 {
            FlowNode::Base { .. } => "shear",
            FlowNode::Lift { stage, .. } => stage,
        }
    }

    /// Side and multiplier of the outermost lift.
    pub fn lift_data(&self) -> Option<(Side, &Multiplier)> {
        match &*self.0 {
            FlowNode::Base { .. } => None,
            FlowNode::Lift {
                side, multiplier, ..
            } => Some((*side, multiplier)),
        }
    }

    /// The derivation on the ring of the tower truncated at this flow's
    /// level.
    pub fn to_derivation(&self, tower: &SuspensionTower) -> Result<Derivation> {
        match &*self.0 {
            FlowNode::Base { derivation, .. } => Ok(derivation.clone()),
            FlowNode::Lift {
                inner,
                level,
                side,
                multiplier,
                derivation,
                ..
            } => {
                if let Some(d) = derivation.get() {
                    return Ok(d.clone());
                }
                let d0 = inner.to_derivation(tower)?;
                let d = lift_with(&d0, tower, *level, multiplier, *side)?;
                Ok(derivation.get_or_init(|| d).clone())
            }
        }
    }
}

impl fmt::Debug for PolyFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            FlowNode::Base { derivation, .. } => write!(f, "Base({:?})", derivation.images),
            FlowNode::Lift {
                inner,
                level,
                side,
                multiplier,
                ..
            } => write!(f, "Lift{level}{side}[{multiplier}]({inner:?})"),
        }
    }
}

/// The first `depth` levels of a tower over `𝔸ⁿ`.
#[derive(Debug, Clone)]
pub struct PolyGeometry {
    tower: Arc<SuspensionTower>,
    depth: usize,
    opts: TransitOptions,
}

impl PolyGeometry {
    /// The full tower.
    pub fn new(tower: SuspensionTower, opts: TransitOptions) -> Self {
        PolyGeometry {
            depth: tower.depth(),
            tower: Arc::new(tower),
            opts,
        }
    }

    pub fn at_depth(&self, depth: usize) -> Self {
        assert!(depth <= self.tower.depth(), "depth beyond the tower");
        PolyGeometry {
            tower: self.tower.clone(),
            depth,
            opts: self.opts.clone(),
        }
    }

    pub fn tower(&self) -> &SuspensionTower {
        &self.tower
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn options(&self) -> &TransitOptions {
        &self.opts
    }

    fn ambient(&self) -> usize {
        self.tower.ambient_at(self.depth)
    }

    /// The top level as a suspension over the geometry one level down.
    pub fn suspension(&self) -> Result<Suspension<PolyGeometry>> {
        if self.depth == 0 {
            return Err(Error::Precondition(
                "affine space is not a suspension".into(),
            ));
        }
        Ok(Suspension::new(
            self.at_depth(self.depth - 1),
            self.tower.level(self.depth).f.clone(),
            self.opts.clone(),
        ))
    }

    /// `(R, u, v)` for a point of depth ≥ 1.
    pub fn split(&self, p: &TowerPoint) -> LevelPoint<TowerPoint> {
        let lvl = self.tower.level(self.depth);
        LevelPoint::new(
            TowerPoint::new(p.coords[..lvl.u].to_vec()),
            p.coords[lvl.u].clone(),
            p.coords[lvl.v].clone(),
        )
    }

    pub fn join(lp: &LevelPoint<TowerPoint>) -> TowerPoint {
        let mut coords = lp.base.coords.clone();
        coords.push(lp.u.clone());
        coords.push(lp.v.clone());
        TowerPoint::new(coords)
    }

    fn check_len(&self, p: &TowerPoint) -> Result<()> {
        if p.len() == self.ambient() {
            Ok(())
        } else {
            Err(Error::VariableMismatch {
                left: p.len(),
                right: self.ambient(),
            })
        }
    }

    fn check_level(&self, flow: &PolyFlow) -> Result<()> {
        if flow.level() == self.depth {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "flow of level {} used on depth {}",
                flow.level(),
                self.depth
            )))
        }
    }

    /// Transport on the top level together with its plan.
    pub fn transport_plan(
        &self,
        sources: &[TowerPoint],
        targets: &[TowerPoint],
    ) -> Result<(Vec<(PolyFlow, Rational)>, Option<TransportPlan>)> {
        if self.depth == 0 {
            return Ok((self.shear_interpolate(sources, targets)?, None));
        }
        for p in sources.iter().chain(targets) {
            self.check_len(p)?;
        }
        let susp = self.suspension()?;
        let src: Vec<_> = sources.iter().map(|p| self.split(p)).collect();
        let tgt: Vec<_> = targets.iter().map(|p| self.split(p)).collect();
        let res = transport(&susp, &src, &tgt)?;
        let steps = res
            .steps
            .into_iter()
            .map(|s| {
                (
                    PolyFlow::lift(s.flow, self.depth, s.side, s.multiplier, s.stage),
                    s.time,
                )
            })
            .collect();
        Ok((steps, Some(res.plan)))
    }

    fn shear_interpolate(
        &self,
        sources: &[TowerPoint],
        targets: &[TowerPoint],
    ) -> Result<Vec<(PolyFlow, Rational)>> {
        let n = self.tower.base_dim();
        let src: Vec<_> = sources.iter().map(|p| p.coords.clone()).collect();
        let tgt: Vec<_> = targets.iter().map(|p| p.coords.clone()).collect();
        shear_script(n, &src, &tgt, self.opts.generic_cap)?
            .into_iter()
            .map(|(d, t)| Ok((PolyFlow::base(d)?, t)))
            .collect()
    }

    /// Designated variable of `f`, preferring the one declared for the level
    /// `f` defines.
    fn designated_of(&self, f: &Polynomial) -> Option<usize> {
        if let Some(next) = self.tower.levels().get(self.depth) {
            if next.f == *f && next.designated.is_some() {
                return next.designated;
            }
        }
        (0..self.ambient()).rev().find(|&i| is_designated(f, i))
    }

    fn unsupported(&self, f: &Polynomial) -> Error {
        Error::UnsupportedFunction(format!(
            "`{}` has no designated variable",
            f.to_text(self.tower.vars())
        ))
    }

    fn gradient_dot(&self, f: &Polynomial, p: &TowerPoint, t: &[Rational]) -> Result<Rational> {
        let mut acc = Rational::zero();
        for i in f.support() {
            if i >= t.len() {
                return Err(Error::UnknownVariable(format!("#{i}")));
            }
            if t[i].is_zero() {
                continue;
            }
            acc += f.partial(i).try_eval(&p.coords).expect("checked support") * &t[i];
        }
        Ok(acc)
    }
}

/// Evaluates `Σ tᵏ/k!·δᵏ(x)` at a point.
fn exp_eval(iterates: &[Polynomial], time: &Rational, point: &[Rational]) -> Result<Rational> {
    let mut acc = Rational::zero();
    let mut coeff = Rational::one();
    for (k, it) in iterates.iter().enumerate() {
        if k > 0 {
            coeff = coeff * time / Rational::from_integer(k.into());
        }
        if coeff.is_zero() {
            break;
        }
        let val = it
            .try_eval(point)
            .map_err(|i| Error::UnknownVariable(format!("#{i}")))?;
        acc += val * &coeff;
    }
    Ok(acc)
}

impl BaseGeometry for PolyGeometry {
    type Point = TowerPoint;
    type Flow = PolyFlow;
    type Function = Polynomial;

    fn dim(&self) -> usize {
        self.tower.base_dim() + self.depth
    }

    fn value(&self, f: &Polynomial, p: &TowerPoint) -> Result<Rational> {
        f.try_eval(&p.coords)
            .map_err(|i| Error::UnknownVariable(format!("#{i}")))
    }

    fn flow_point(&self, flow: &PolyFlow, time: &Rational, p: &TowerPoint) -> Result<TowerPoint> {
        self.check_len(p)?;
        self.check_level(flow)?;
        match &*flow.0 {
            FlowNode::Base { iterates, .. } => {
                let coords = iterates
                    .iter()
                    .map(|its| exp_eval(its, time, &p.coords))
                    .collect::<Result<_>>()?;
                Ok(TowerPoint::new(coords))
            }
            FlowNode::Lift {
                inner,
                side,
                multiplier,
                ..
            } => {
                let susp = self.suspension()?;
                let out = susp.apply_flow(inner, *side, multiplier, time, &self.split(p))?;
                Ok(Self::join(&out))
            }
        }
    }

    fn flow_rate(&self, flow: &PolyFlow, f: &Polynomial, p: &TowerPoint) -> Result<Rational> {
        let t = self.tangent(flow, p)?;
        self.gradient_dot(f, p, &t)
    }

    fn interpolate(
        &self,
        sources: &[TowerPoint],
        targets: &[TowerPoint],
    ) -> Result<Vec<(PolyFlow, Rational)>> {
        self.transport_plan(sources, targets)
            .map(|(steps, _)| steps)
    }

    fn flexibility_flows(&self, p: &TowerPoint) -> Result<Vec<PolyFlow>> {
        self.check_len(p)?;
        let n = self.tower.base_dim();
        if self.depth == 0 {
            return (0..n)
                .map(|i| PolyFlow::base(Derivation::coordinate(n, i)))
                .collect();
        }
        let below = self.at_depth(self.depth - 1);
        let f = &self.tower.level(self.depth).f;
        let lp = self.split(p);
        let flows = below.flexibility_flows(&lp.base)?;
        let lift = |fl: &PolyFlow, side| {
            PolyFlow::lift(fl.clone(), self.depth, side, Multiplier::linear(), "flex")
        };
        let mut nonzero_rate = None;
        for fl in &flows {
            if !below.flow_rate(fl, f, &lp.base)?.is_zero() {
                nonzero_rate = Some(fl);
                break;
            }
        }
        let (main, other) = match (lp.u.is_zero(), lp.v.is_zero()) {
            (_, false) => (Side::V, Side::U),
            (false, true) => (Side::U, Side::V),
            // Rank-deficient: lifts only move the fiber coordinates here.
            (true, true) => {
                let mut out: Vec<_> = flows.iter().map(|fl| lift(fl, Side::V)).collect();
                out.extend(flows.iter().map(|fl| lift(fl, Side::U)));
                return Ok(out);
            }
        };
        let mut out: Vec<_> = flows.iter().map(|fl| lift(fl, main)).collect();
        if let Some(fl) = nonzero_rate {
            out.push(lift(fl, other));
        }
        Ok(out)
    }

    fn tangent(&self, flow: &PolyFlow, p: &TowerPoint) -> Result<Vec<Rational>> {
        self.check_len(p)?;
        self.check_level(flow)?;
        match &*flow.0 {
            FlowNode::Base { derivation, .. } => {
                derivation.images.iter().map(|g| self.value(g, p)).collect()
            }
            FlowNode::Lift {
                inner,
                side,
                multiplier,
                ..
            } => self
                .suspension()?
                .tangent(inner, *side, multiplier, &self.split(p)),
        }
    }

    /// Generate-and-check over the designated variable: all other free
    /// coordinates run through small nonnegative integers (fiber
    /// coordinates through positive ones), the designated variable is solved
    /// for, and fiber partners follow from the relations.
    fn section(
        &self,
        f: &Polynomial,
        value: &Rational,
        comp: &ComponentLabel,
        avoid: &[TowerPoint],
    ) -> Result<TowerPoint> {
        let range = self.range_of(f, comp)?;
        if !range.contains_interior(value) {
            return Err(Error::OutOfRange {
                value: value.clone(),
                range: range.to_string(),
            });
        }
        let z = self.designated_of(f).ok_or_else(|| self.unsupported(f))?;
        let plan = SectionPlan::new(self, f, z)?;
        let mut tries = 0;
        for total in 0u64.. {
            for params in compositions(plan.free.len(), total) {
                tries += 1;
                if tries > self.opts.section_cap {
                    return Err(Error::NoRationalPreimage {
                        value: value.clone(),
                        tries: self.opts.section_cap,
                    });
                }
                let Some(p) = plan.solve(self, value, &params) else {
                    continue;
                };
                if avoid.contains(&p) || !self.is_regular(&p) {
                    continue;
                }
                if self.component_of(&p)? == *comp {
                    return Ok(p);
                }
            }
        }
        unreachable!("enumeration is unbounded")
    }

    fn range_of(&self, f: &Polynomial, _comp: &ComponentLabel) -> Result<RangeDescriptor> {
        if let Some(i) = f.support().into_iter().find(|&i| i >= self.ambient()) {
            return Err(Error::UnknownVariable(format!("#{i}")));
        }
        match self.designated_of(f) {
            Some(_) => Ok(RangeDescriptor::FullLine),
            None => Err(self.unsupported(f)),
        }
    }

    fn component_of(&self, p: &TowerPoint) -> Result<ComponentLabel> {
        self.check_len(p)?;
        let mut label = ComponentLabel::new(format!("A{}", self.tower.base_dim()));
        for k in 1..=self.depth {
            let lvl = self.tower.level(k);
            let range = self.at_depth(k - 1).range_of(&lvl.f, &label)?;
            label = label.extended(range.splits(), &p.coords[lvl.u], &p.coords[lvl.v]);
        }
        Ok(label)
    }

    fn is_regular(&self, p: &TowerPoint) -> bool {
        p.len() == self.ambient() && self.tower.is_regular(p)
    }
}

/// How a section point is assembled from free parameters.
struct SectionPlan {
    /// Free generators, with the offset added to their parameter.
    free: Vec<(usize, u64)>,
    order: Vec<Assign>,
    z: usize,
    a: Rational,
    g: Polynomial,
}

enum Assign {
    Designated,
    /// `dep = f_level / by`.
    Partner {
        level: usize,
        dep: usize,
        by: usize,
    },
}

impl SectionPlan {
    fn new(geo: &PolyGeometry, f: &Polynomial, z: usize) -> Result<Self> {
        let tower = &geo.tower;
        let ambient = geo.ambient();
        let a = f.coeff(&Monomial::var(z));
        let g = f - &Polynomial::term(a.clone(), Monomial::var(z));
        let mut free = Vec::new();
        let mut partners = Vec::new();
        for i in 0..tower.base_dim() {
            if i != z {
                free.push((i, 0));
            }
        }
        for k in 1..=geo.depth {
            let lvl = tower.level(k);
            let (dep, by) = if z == lvl.u {
                (lvl.v, lvl.u)
            } else if z == lvl.v {
                (lvl.u, lvl.v)
            } else {
                free.push((lvl.v, 1));
                (lvl.u, lvl.v)
            };
            partners.push((k, dep, by));
        }
        let mut known = vec![false; ambient];
        for &(i, _) in &free {
            known[i] = true;
        }
        let mut order = Vec::new();
        loop {
            let mut progress = false;
            if !known[z] && g.support().iter().all(|&i| known[i]) {
                known[z] = true;
                order.push(Assign::Designated);
                progress = true;
            }
            for &(level, dep, by) in &partners {
                let ready = known[by] && tower.level(level).f.support().iter().all(|&i| known[i]);
                if !known[dep] && ready {
                    known[dep] = true;
                    order.push(Assign::Partner { level, dep, by });
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        if known.iter().any(|k| !k) {
            return Err(Error::UnsupportedFunction(format!(
                "`{}`: the designated variable cannot be solved for",
                f.to_text(tower.vars())
            )));
        }
        Ok(SectionPlan {
            free,
            order,
            z,
            a,
            g,
        })
    }

    fn solve(&self, geo: &PolyGeometry, value: &Rational, params: &[u64]) -> Option<TowerPoint> {
        let mut coords = vec![Rational::zero(); geo.ambient()];
        for (&(i, offset), &p) in self.free.iter().zip(params) {
            coords[i] = Rational::from_integer((p + offset).into());
        }
        for step in &self.order {
            match *step {
                Assign::Designated => {
                    let g = self.g.try_eval(&coords).ok()?;
                    coords[self.z] = (value - g) / &self.a;
                }
                Assign::Partner { level, dep, by } => {
                    if coords[by].is_zero() {
                        return None;
                    }
                    let fv = geo.tower.level(level).f.try_eval(&coords).ok()?;
                    coords[dep] = fv / &coords[by];
                }
            }
        }
        geo.tower.check_point(coords).ok()
    }
}

/// Tuples of `len` nonnegative integers summing to `total`, in lexicographic
/// order.
fn compositions(len: usize, total: u64) -> Vec<Vec<u64>> {
    if len == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(len - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Shear script on `𝔸ⁿ` sending `sources[i]` to `targets[i]`: both tuples
/// are driven to the normal form `(0, i, 0, …, 0)` and the second run is
/// inverted.
pub fn shear_script(
    n: usize,
    sources: &[Vec<Rational>],
    targets: &[Vec<Rational>],
    cap: usize,
) -> Result<Vec<(Derivation, Rational)>> {
    if sources.len() != targets.len() {
        return Err(Error::ComponentMismatch(format!(
            "{} sources for {} targets",
            sources.len(),
            targets.len()
        )));
    }
    for pts in [sources, targets] {
        for (i, p) in pts.iter().enumerate() {
            if p.len() != n {
                return Err(Error::VariableMismatch {
                    left: p.len(),
                    right: n,
                });
            }
            if pts[..i].contains(p) {
                return Err(Error::Precondition(
                    "points must be pairwise distinct".into(),
                ));
            }
        }
    }
    if sources == targets {
        return Ok(Vec::new());
    }
    if sources.len() == 1 {
        return Ok((0..n)
            .filter(|&j| sources[0][j] != targets[0][j])
            .map(|j| {
                (
                    Derivation::new(translation(n, j), format!("shift{j}")),
                    &targets[0][j] - &sources[0][j],
                )
            })
            .collect());
    }
    let mut steps = normalize(n, sources, cap)?;
    let back = normalize(n, targets, cap)?;
    steps.extend(back.into_iter().rev().map(|(d, t)| (d, -t)));
    Ok(steps)
}

fn translation(n: usize, j: usize) -> Vec<Polynomial> {
    let mut images = vec![Polynomial::zero(); n];
    images[j] = Polynomial::one();
    images
}

fn pairwise_distinct(xs: &[Rational]) -> bool {
    xs.iter().enumerate().all(|(i, x)| !xs[..i].contains(x))
}

fn normalize(
    n: usize,
    points: &[Vec<Rational>],
    cap: usize,
) -> Result<Vec<(Derivation, Rational)>> {
    let m = points.len();
    let mut pts = points.to_vec();
    let mut steps = Vec::new();
    let x1 = |pts: &[Vec<Rational>]| pts.iter().map(|p| p[0].clone()).collect::<Vec<_>>();

    if !pairwise_distinct(&x1(&pts)) {
        let ell = |lambda: &Rational, p: &[Rational]| {
            let mut acc = Rational::zero();
            let mut pw = Rational::one();
            for x in &p[1..] {
                acc += &pw * x;
                pw *= lambda;
            }
            acc
        };
        let lambda = generic_param(cap, |l| {
            (0..m).all(|i| {
                (0..i).all(|j| pts[i][0] != pts[j][0] || ell(l, &pts[i]) != ell(l, &pts[j]))
            })
        })?;
        let ells: Vec<_> = pts.iter().map(|p| ell(&lambda, p)).collect();
        let c = generic_param(cap, |c| {
            let moved: Vec<_> = (0..m).map(|i| &pts[i][0] + c * &ells[i]).collect();
            pairwise_distinct(&moved)
        })?;
        let mut images = vec![Polynomial::zero(); n];
        let mut pw = Rational::one();
        for j in 1..n {
            images[0] = &images[0] + &Polynomial::term(pw.clone(), Monomial::var(j));
            pw *= &lambda;
        }
        steps.push((Derivation::new(images, "shear-x1"), c.clone()));
        for (p, e) in pts.iter_mut().zip(&ells) {
            p[0] += &c * e;
        }
    }

    let xs = x1(&pts);
    let mut images = vec![Polynomial::zero(); n];
    for (j, image) in images.iter_mut().enumerate().skip(1) {
        let ys: Vec<_> = (0..m)
            .map(|i| {
                let target = if j == 1 {
                    Rational::from_integer(i.into())
                } else {
                    Rational::zero()
                };
                target - &pts[i][j]
            })
            .collect();
        *image = lagrange(0, &xs, &ys);
    }
    if images.iter().any(|h| !h.is_zero()) {
        steps.push((Derivation::new(images, "shear-rest"), Rational::one()));
    }

    let x2: Vec<_> = (0..m).map(|i| Rational::from_integer(i.into())).collect();
    let ys: Vec<_> = pts.iter().map(|p| -p[0].clone()).collect();
    let h = lagrange(1, &x2, &ys);
    if !h.is_zero() {
        let mut images = vec![Polynomial::zero(); n];
        images[0] = h;
        steps.push((Derivation::new(images, "shear-x1-back"), Rational::one()));
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;
    use crate::scalar::{rat, ratio};
    use crate::AutomorphismScript;
    use crate::FlowStep;

    fn pt(xs: &[i64]) -> TowerPoint {
        TowerPoint::new(xs.iter().map(|&x| rat(x)).collect())
    }

    fn tower1() -> SuspensionTower {
        let b = SuspensionTower::affine(["x", "y"]).unwrap();
        let f = parse_poly("x + y^2", b.vars()).unwrap();
        b.suspend(f, "u", "v").unwrap()
    }

    fn tower2() -> SuspensionTower {
        let t = tower1();
        let f = parse_poly("u", t.vars()).unwrap();
        t.suspend(f, "u2", "v2").unwrap()
    }

    fn run(geo: &PolyGeometry, steps: &[(PolyFlow, Rational)], p: &TowerPoint) -> TowerPoint {
        steps.iter().fold(p.clone(), |acc, (fl, t)| {
            geo.flow_point(fl, t, &acc).unwrap()
        })
    }

    /// Independent check through the symbolic exponentials.
    fn run_symbolic(
        geo: &PolyGeometry,
        steps: &[(PolyFlow, Rational)],
        p: &TowerPoint,
    ) -> TowerPoint {
        let script = AutomorphismScript::new(
            steps
                .iter()
                .map(|(fl, t)| FlowStep::new(fl.to_derivation(geo.tower()).unwrap(), t.clone()))
                .collect(),
        );
        let out = script
            .apply_points(std::slice::from_ref(&p.coords), 64)
            .unwrap();
        TowerPoint::new(out[0].clone())
    }

    #[test]
    fn translations_for_one_point() {
        let geo = PolyGeometry::new(
            SuspensionTower::affine(["x", "y"]).unwrap(),
            TransitOptions::default(),
        );
        let steps = geo.interpolate(&[pt(&[0, 0])], &[pt(&[1, 1])]).unwrap();
        assert_eq!(steps.len(), 2);
        assert!(steps.iter().all(|(_, t)| *t == rat(1)));
        assert_eq!(run(&geo, &steps, &pt(&[0, 0])), pt(&[1, 1]));
        assert!(geo
            .interpolate(&[pt(&[3, 4])], &[pt(&[3, 4])])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn shear_interpolation_examples() {
        let geo = PolyGeometry::new(
            SuspensionTower::affine(["x", "y", "z"]).unwrap(),
            TransitOptions::default(),
        );
        let cases = [
            (
                vec![pt(&[0, 0, 0]), pt(&[0, 1, 0])],
                vec![pt(&[1, 0, 0]), pt(&[2, 0, 0])],
            ),
            (
                vec![pt(&[0, 0, 0]), pt(&[0, 0, 1]), pt(&[5, 5, 5])],
                vec![pt(&[0, 0, 1]), pt(&[0, 0, 0]), pt(&[-1, 2, 7])],
            ),
        ];
        for (src, tgt) in cases {
            let steps = geo.interpolate(&src, &tgt).unwrap();
            for (s, t) in src.iter().zip(&tgt) {
                assert_eq!(&run(&geo, &steps, s), t);
                assert_eq!(&run_symbolic(&geo, &steps, s), t);
            }
        }
    }

    #[test]
    fn section_examples() {
        let t = tower1();
        let geo = PolyGeometry::new(t.clone(), TransitOptions::default()).at_depth(0);
        let f = t.level(1).f.clone();
        let comp = ComponentLabel::new("A2");
        assert_eq!(geo.section(&f, &rat(5), &comp, &[]).unwrap(), pt(&[5, 0]));
        assert_eq!(
            geo.section(&f, &rat(5), &comp, &[pt(&[5, 0])]).unwrap(),
            pt(&[4, 1])
        );
        let geo1 = PolyGeometry::new(tower2(), TransitOptions::default()).at_depth(1);
        let f2 = tower2().level(2).f.clone();
        let p = geo1
            .section(
                &f2,
                &ratio(3, 2),
                &geo1.component_of(&pt(&[0, 0, 0, 0])).unwrap(),
                &[],
            )
            .unwrap();
        assert_eq!(p.coords[2], ratio(3, 2));
        assert!(geo1.is_regular(&p));
        let xy = {
            let b = SuspensionTower::affine(["x", "y"]).unwrap();
            parse_poly("x*y", b.vars()).unwrap()
        };
        assert!(matches!(
            geo.range_of(&xy, &comp),
            Err(Error::UnsupportedFunction(_))
        ));
    }

    #[test]
    fn lifted_flow_matches_derivation() {
        let t = tower1();
        let geo = PolyGeometry::new(t.clone(), TransitOptions::default());
        let dy = PolyFlow::base(Derivation::coordinate(2, 1)).unwrap();
        let q = Multiplier::from_roots(&ratio(1, 3), 1, &[rat(2)]);
        let fl = PolyFlow::lift(dy, 1, Side::V, q, "test");
        let steps = vec![(fl, ratio(5, 2))];
        for p in [
            pt(&[3, 1, 2, 2]),
            pt(&[-1, 1, 0, 7]),
            pt(&[0, 0, 0, 0]),
            pt(&[4, 0, 4, 1]),
        ] {
            let p = t.check_point(p.coords).unwrap();
            assert_eq!(run(&geo, &steps, &p), run_symbolic(&geo, &steps, &p));
        }
    }

    #[test]
    fn depth_one_interpolation() {
        let t = tower1();
        let geo = PolyGeometry::new(t.clone(), TransitOptions::default());
        let src = vec![pt(&[3, 1, 2, 2])];
        let tgt = vec![pt(&[0, 2, 1, 4])];
        let steps = geo.interpolate(&src, &tgt).unwrap();
        assert_eq!(run(&geo, &steps, &src[0]), tgt[0]);
        assert_eq!(run_symbolic(&geo, &steps, &src[0]), tgt[0]);
        for (fl, _) in &steps {
            assert!(t.preserves_relations(&fl.to_derivation(&t).unwrap()));
        }
    }

    #[test]
    fn flexibility_flows_span() {
        let t = tower2();
        let geo = PolyGeometry::new(t.clone(), TransitOptions::default());
        let p = t
            .check_point(vec![rat(1), rat(1), rat(1), rat(2), rat(1), rat(1)])
            .unwrap();
        let rows: Vec<_> = geo
            .flexibility_flows(&p)
            .unwrap()
            .iter()
            .map(|fl| geo.tangent(fl, &p).unwrap())
            .collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(crate::linalg::rank_fraction_free(&rows), 4);
    }

    #[test]
    fn compositions_order() {
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(0, 0), vec![Vec::<u64>::new()]);
        assert!(compositions(0, 1).is_empty());
    }
}
