//! Constructive transitivity on suspensions `X = {u·v = f(y)}` over a base
//! geometry: lifts of base flows, stabilizers of levels, hyperbolization,
//! coordinate separation, the choice of α, and transport of tuples.
//!
//! Everything here is generic over the base. A step is a base flow lifted
//! along `v` (or `u`) by a multiplier `q` with `q(0) = 0`; on a point
//! `(R, u, v)` with `v ≠ 0` it moves `R` by the base flow for time `t·q(v)` and
//! keeps `u·v = f(R)`.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{BaseGeometry, ComponentLabel, RangeDescriptor};
use crate::scalar::{ratio, Rational};
use crate::tower::{Side, SuspensionTower};
use crate::{AutomorphismScript, Derivation, FlowStep, Polynomial};

mod alpha;
mod flex;
mod session;
mod transport;

#[cfg(test)]
mod fixtures;

pub use alpha::{choose_alpha, AlphaChoice, ContractionRecord};
pub use flex::{flexibility_certificate, FlexCertificate};
pub use session::{avoid_zero, distinct_coords, Session};
pub use transport::{transport, transport_component, TransportPlan, TransportResult};

/// Tunable constants of the constructions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitOptions {
    /// Candidates tried by [`generic_param`] and by other enumerations.
    pub generic_cap: usize,
    /// Candidates tried by a geometry's section search.
    pub section_cap: usize,
    /// `ε = (b − a)·epsilon_fraction` in the contraction loop; must lie in
    /// `(0, 1/2)`.
    pub epsilon_fraction: Rational,
    /// Safety bound on contraction iterations.
    pub max_contractions: usize,
}

impl Default for TransitOptions {
    fn default() -> Self {
        TransitOptions {
            generic_cap: 10_000,
            section_cap: 100_000,
            epsilon_fraction: ratio(1, 4),
            max_contractions: 10_000,
        }
    }
}

/// First of `1, −1, 2, −2, …` accepted by `pred`.
pub fn generic_param(cap: usize, pred: impl Fn(&Rational) -> bool) -> Result<Rational> {
    crate::geometry::signed_integers()
        .take(cap)
        .find(|t| pred(t))
        .ok_or(Error::GenericExhausted(cap))
}

/// [`generic_param`] with a list of predicates that must all hold.
pub fn generic_param_all(cap: usize, preds: &[&dyn Fn(&Rational) -> bool]) -> Result<Rational> {
    generic_param(cap, |t| preds.iter().all(|p| p(t)))
}

/// Univariate multiplier `q(z) = Σ c_k z^k` with `q(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multiplier {
    coeffs: Vec<Rational>,
}

impl Multiplier {
    /// `q(z) = z`.
    pub fn linear() -> Self {
        Multiplier {
            coeffs: vec![Rational::zero(), Rational::one()],
        }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Result<Self> {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.first().is_some_and(|c| !c.is_zero()) {
            return Err(Error::NotDivisible {
                var: "multiplier variable".into(),
            });
        }
        Ok(Multiplier { coeffs })
    }

    /// `α·z^zero_order·∏(z − r)`.
    pub fn from_roots(alpha: &Rational, zero_order: u32, roots: &[Rational]) -> Self {
        let mut c = vec![alpha.clone()];
        for r in roots {
            let mut next = vec![Rational::zero(); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        let mut coeffs = vec![Rational::zero(); zero_order as usize];
        coeffs.extend(c);
        Multiplier::from_coeffs(coeffs).expect("zero_order >= 1")
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * z + c)
    }

    /// `(q(z)/z)` at `z`; at `z = 0` this is `q'(0)`.
    pub fn quotient_eval(&self, z: &Rational) -> Rational {
        self.coeffs
            .iter()
            .skip(1)
            .rev()
            .fold(Rational::zero(), |acc, c| acc * z + c)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Multiplier::from_coeffs(self.coeffs.iter().map(|x| x * c).collect()).expect("q(0) = 0")
    }

    /// As a polynomial in generator `var`.
    pub fn to_poly(&self, var: usize) -> Polynomial {
        Polynomial::univariate(var, &self.coeffs)
    }

    /// Reads a univariate polynomial in `var`.
    pub fn from_poly(q: &Polynomial, var: usize) -> Result<Self> {
        if let Some(i) = q.support().into_iter().find(|&i| i != var) {
            return Err(Error::Precondition(format!(
                "multiplier must be univariate in generator #{var}, uses #{i}"
            )));
        }
        let deg = q.degree().unwrap_or(0) as usize;
        let coeffs = (0..=deg)
            .map(|k| q.coeff(&crate::polyring::Monomial::var_pow(var, k as u32)))
            .collect();
        Multiplier::from_coeffs(coeffs)
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = crate::polyring::Vars::new(["z"]).expect("valid name");
        write!(f, "{}", self.to_poly(0).display(&vars))
    }
}

/// `q(z) = α·z·∏(z − c_s)` with `q(c0) = 1`.
pub fn stab_multiplier(c0: &Rational, fixed: &[Rational]) -> Result<Multiplier> {
    stab_multiplier_ext(c0, fixed, false)
}

/// As [`stab_multiplier`]; with `fix_zero` the factor `z` is squared so that
/// the lift also fixes the level `{z = 0}` pointwise.
pub fn stab_multiplier_ext(
    c0: &Rational,
    fixed: &[Rational],
    fix_zero: bool,
) -> Result<Multiplier> {
    if c0.is_zero() {
        return Err(Error::Degenerate("normalization value c0 = 0".into()));
    }
    for (i, c) in fixed.iter().enumerate() {
        if c.is_zero() {
            return Err(Error::Degenerate("fixed level 0".into()));
        }
        if c == c0 {
            return Err(Error::Degenerate(format!("fixed level {c} equals c0")));
        }
        if fixed[..i].contains(c) {
            return Err(Error::Degenerate(format!("fixed level {c} repeated")));
        }
    }
    let zero_order = if fix_zero { 2 } else { 1 };
    let unit = Multiplier::from_roots(&Rational::one(), zero_order, fixed);
    let at = unit.eval(c0);
    Ok(unit.scale(&(Rational::one() / at)))
}

/// Point of a suspension: base point with the two extra coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPoint<P> {
    pub base: P,
    pub u: Rational,
    pub v: Rational,
}

impl<P> LevelPoint<P> {
    pub fn new(base: P, u: Rational, v: Rational) -> Self {
        LevelPoint { base, u, v }
    }

    pub fn side(&self, side: Side) -> &Rational {
        match side {
            Side::U => &self.u,
            Side::V => &self.v,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        !self.u.is_zero() && !self.v.is_zero()
    }
}

/// One lifted flow `exp(time·δ₁)`, where `δ₁` lifts the base flow along
/// `side` with `multiplier`.
#[derive(Debug, Clone)]
pub struct LiftedStep<F> {
    pub flow: F,
    pub time: Rational,
    pub side: Side,
    pub multiplier: Multiplier,
    pub stage: &'static str,
}

impl<F: Clone> LiftedStep<F> {
    pub fn inverse(&self) -> Self {
        LiftedStep {
            time: -self.time.clone(),
            ..self.clone()
        }
    }
}

/// Reversed steps with negated times.
pub fn invert_steps<F: Clone>(steps: &[LiftedStep<F>]) -> Vec<LiftedStep<F>> {
    steps.iter().rev().map(LiftedStep::inverse).collect()
}

/// `Susp(Y, f)` for a base geometry `Y`.
#[derive(Debug, Clone)]
pub struct Suspension<B: BaseGeometry> {
    pub base: B,
    pub f: B::Function,
    pub opts: TransitOptions,
}

impl<B: BaseGeometry> Suspension<B> {
    pub fn new(base: B, f: B::Function, opts: TransitOptions) -> Self {
        Suspension { base, f, opts }
    }

    /// Checks `u·v = f(R)`.
    pub fn check(&self, p: &LevelPoint<B::Point>) -> Result<()> {
        let r = &p.u * &p.v - self.base.value(&self.f, &p.base)?;
        if r.is_zero() {
            Ok(())
        } else {
            Err(Error::OffVariety {
                level: 0,
                residual: r,
            })
        }
    }

    pub fn is_regular(&self, p: &LevelPoint<B::Point>) -> bool {
        self.base.is_regular(&p.base)
    }

    pub fn range_at(&self, p: &LevelPoint<B::Point>) -> Result<RangeDescriptor> {
        let comp = self.base.component_of(&p.base)?;
        self.base.range_of(&self.f, &comp)
    }

    pub fn component_of(&self, p: &LevelPoint<B::Point>) -> Result<ComponentLabel> {
        let comp = self.base.component_of(&p.base)?;
        let range = self.base.range_of(&self.f, &comp)?;
        Ok(comp.extended(range.splits(), &p.u, &p.v))
    }

    /// Image of `p` under one lifted flow.
    pub fn apply_flow(
        &self,
        flow: &B::Flow,
        side: Side,
        q: &Multiplier,
        time: &Rational,
        p: &LevelPoint<B::Point>,
    ) -> Result<LevelPoint<B::Point>> {
        let z = p.side(side).clone();
        if time.is_zero() || q.is_zero() {
            return Ok(p.clone());
        }
        if z.is_zero() {
            // The base is fixed; only the other coordinate drifts, linearly.
            let r0 = q.quotient_eval(&z);
            if r0.is_zero() {
                return Ok(p.clone());
            }
            let rate = self.base.flow_rate(flow, &self.f, &p.base)?;
            let shift = time * r0 * rate;
            let mut out = p.clone();
            match side {
                Side::V => out.u += shift,
                Side::U => out.v += shift,
            }
            return Ok(out);
        }
        let s = time * q.eval(&z);
        if s.is_zero() {
            return Ok(p.clone());
        }
        let base = self.base.flow_point(flow, &s, &p.base)?;
        let fval = self.base.value(&self.f, &base)?;
        Ok(match side {
            Side::V => LevelPoint::new(base, fval / &z, z),
            Side::U => LevelPoint::new(base, z.clone(), fval / &z),
        })
    }

    pub fn apply_step(
        &self,
        step: &LiftedStep<B::Flow>,
        p: &LevelPoint<B::Point>,
    ) -> Result<LevelPoint<B::Point>> {
        self.apply_flow(&step.flow, step.side, &step.multiplier, &step.time, p)
    }

    pub fn apply_steps(
        &self,
        steps: &[LiftedStep<B::Flow>],
        p: &LevelPoint<B::Point>,
    ) -> Result<LevelPoint<B::Point>> {
        steps
            .iter()
            .try_fold(p.clone(), |acc, s| self.apply_step(s, &acc))
    }

    /// Tangent vector of a lifted flow at `p`: the base tangent scaled by
    /// `q`, then the `u` and `v` components.
    pub fn tangent(
        &self,
        flow: &B::Flow,
        side: Side,
        q: &Multiplier,
        p: &LevelPoint<B::Point>,
    ) -> Result<Vec<Rational>> {
        let z = p.side(side);
        let t0 = self.base.tangent(flow, &p.base)?;
        let rate = self.base.flow_rate(flow, &self.f, &p.base)?;
        let qz = q.eval(z);
        let mut out: Vec<Rational> = t0.iter().map(|x| x * &qz).collect();
        let drift = q.quotient_eval(z) * rate;
        match side {
            Side::V => out.extend([drift, Rational::zero()]),
            Side::U => out.extend([Rational::zero(), drift]),
        }
        Ok(out)
    }
}

/// A stabilizer subgroup of one side: lifts vanishing on the levels
/// `{side = c}` for `c` in `fixed_values`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabSpec {
    pub side: Side,
    pub fixed_values: Vec<Rational>,
    /// Level on which the lifted flows act as the base flows; `None` takes
    /// the level the points lie on.
    pub normalize_at: Option<Rational>,
    /// Also fix the level `{side = 0}` pointwise.
    pub fix_zero: bool,
}

/// Script inside the level `{side = c0}` sending `sources[i]` to
/// `targets[i]` and fixing every level of `spec.fixed_values` pointwise.
pub fn level_transit<B: BaseGeometry>(
    susp: &Suspension<B>,
    spec: &StabSpec,
    sources: &[LevelPoint<B::Point>],
    targets: &[LevelPoint<B::Point>],
) -> Result<Vec<LiftedStep<B::Flow>>> {
    let c0 = match (&spec.normalize_at, sources.first()) {
        (Some(c), _) => c.clone(),
        (None, Some(p)) => p.side(spec.side).clone(),
        (None, None) => return Ok(Vec::new()),
    };
    for p in sources.iter().chain(targets) {
        susp.check(p)?;
        if *p.side(spec.side) != c0 {
            return Err(Error::Precondition(format!(
                "point off the level {} = {c0}",
                spec.side
            )));
        }
    }
    let spec = StabSpec {
        normalize_at: Some(c0),
        ..spec.clone()
    };
    let bases =
        |pts: &[LevelPoint<B::Point>]| pts.iter().map(|p| p.base.clone()).collect::<Vec<_>>();
    session::level_steps(susp, &spec, &bases(sources), &bases(targets), "level")
}

/// The lift of `d0` to level `level` of `tower`, over the generators up to
/// that level: `δ₁ = q·δ₀` on lower generators, the side variable is
/// annihilated, and the partner receives `(q/z)·δ₀(f)`.
pub fn lift_lnd(
    d0: &Derivation,
    tower: &SuspensionTower,
    level: usize,
    q: &Polynomial,
    side: Side,
) -> Result<Derivation> {
    let lvl = tower.level(level);
    let (z, partner) = match side {
        Side::V => (lvl.v, lvl.u),
        Side::U => (lvl.u, lvl.v),
    };
    let lower = tower.ambient_at(level - 1);
    if d0.nvars() != lower {
        return Err(Error::VariableMismatch {
            left: d0.nvars(),
            right: lower,
        });
    }
    if let Some(i) = q.support().into_iter().find(|&i| i != z) {
        return Err(Error::Precondition(format!(
            "multiplier must be a polynomial in `{}` only, uses `{}`",
            tower.vars().name(z),
            tower.vars().name(i)
        )));
    }
    let quotient = q.divide_by_var(z, tower.vars())?;
    let mut images: Vec<Polynomial> = d0.images.iter().map(|g| g * q).collect();
    images.resize(lower + 2, Polynomial::zero());
    images[partner] = &quotient * &d0.apply(&lvl.f)?;
    images[z] = Polynomial::zero();
    let label = format!("lift{}{}({})", level, side, d0.label);
    Ok(Derivation::new(images, label))
}

/// [`lift_lnd`] with a [`Multiplier`], whose variable is the level's side
/// generator.
pub fn lift_with(
    d0: &Derivation,
    tower: &SuspensionTower,
    level: usize,
    q: &Multiplier,
    side: Side,
) -> Result<Derivation> {
    let lvl = tower.level(level);
    let z = match side {
        Side::V => lvl.v,
        Side::U => lvl.u,
    };
    lift_lnd(d0, tower, level, &q.to_poly(z), side)
}

/// Lifts every step of a script on the tower below `level`, keeping times.
pub fn lift_base_script(
    s: &AutomorphismScript,
    tower: &SuspensionTower,
    level: usize,
    q: &Polynomial,
    side: Side,
) -> Result<AutomorphismScript> {
    let steps = s
        .steps
        .iter()
        .map(|st| {
            Ok(FlowStep::new(
                lift_lnd(&st.derivation, tower, level, q, side)?,
                st.time.clone(),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(AutomorphismScript::new(steps))
}
