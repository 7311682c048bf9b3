//! A working set of tracked points and the script applied to them so far.

use num_traits::Zero;

use super::{
    generic_param, stab_multiplier_ext, LevelPoint, LiftedStep, Multiplier, StabSpec, Suspension,
};
use crate::error::{Error, Result};
use crate::geometry::BaseGeometry;
use crate::scalar::Rational;
use crate::tower::Side;

pub struct Session<'a, B: BaseGeometry> {
    susp: &'a Suspension<B>,
    points: Vec<LevelPoint<B::Point>>,
    steps: Vec<LiftedStep<B::Flow>>,
}

impl<'a, B: BaseGeometry> Session<'a, B> {
    pub fn new(susp: &'a Suspension<B>, points: Vec<LevelPoint<B::Point>>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            susp.check(p)?;
            if !susp.is_regular(p) {
                return Err(Error::Precondition(format!(
                    "tracked point {i} is not regular"
                )));
            }
            if points[..i].contains(p) {
                return Err(Error::Precondition(
                    "tracked points must be pairwise distinct".into(),
                ));
            }
        }
        Ok(Session {
            susp,
            points,
            steps: Vec::new(),
        })
    }

    pub fn suspension(&self) -> &'a Suspension<B> {
        self.susp
    }

    pub fn points(&self) -> &[LevelPoint<B::Point>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LevelPoint<B::Point> {
        &self.points[i]
    }

    pub fn steps(&self) -> &[LiftedStep<B::Flow>] {
        &self.steps
    }

    pub fn into_steps(self) -> Vec<LiftedStep<B::Flow>> {
        self.steps
    }

    /// Appends steps and moves every tracked point along.
    pub fn push(&mut self, steps: Vec<LiftedStep<B::Flow>>) -> Result<()> {
        for step in &steps {
            for p in &mut self.points {
                *p = self.susp.apply_step(step, p)?;
            }
        }
        self.steps.extend(steps);
        Ok(())
    }

    pub fn values(&self, side: Side) -> Vec<Rational> {
        self.points.iter().map(|p| p.side(side).clone()).collect()
    }

    fn on_level(&self, side: Side, c0: &Rational) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.points[i].side(side) == c0)
            .collect()
    }

    /// Bases of the tracked points on `{side = c0}` other than `except`.
    fn level_bases(&self, side: Side, c0: &Rational, except: usize) -> Vec<B::Point> {
        self.on_level(side, c0)
            .into_iter()
            .filter(|&i| i != except)
            .map(|i| self.points[i].base.clone())
            .collect()
    }

    /// Moves points of the level `{side = c0}` to new base points, keeping
    /// the other points of that level and every other tracked level fixed.
    pub fn move_within_level(
        &mut self,
        side: Side,
        c0: &Rational,
        moves: &[(usize, B::Point)],
        extra_fixed: &[Rational],
        stage: &'static str,
    ) -> Result<()> {
        let idx = self.on_level(side, c0);
        for (i, _) in moves {
            if !idx.contains(i) {
                return Err(Error::Precondition(format!(
                    "point {i} is not on the level {side} = {c0}"
                )));
            }
        }
        let sources: Vec<_> = idx.iter().map(|&i| self.points[i].base.clone()).collect();
        let targets: Vec<_> = idx
            .iter()
            .map(|&i| match moves.iter().find(|(j, _)| *j == i) {
                Some((_, t)) => t.clone(),
                None => self.points[i].base.clone(),
            })
            .collect();
        let mut fixed: Vec<Rational> = Vec::new();
        for c in self.values(side).iter().chain(extra_fixed) {
            if !c.is_zero() && c != c0 && !fixed.contains(c) {
                fixed.push(c.clone());
            }
        }
        let fix_zero = self.values(side).iter().any(Zero::is_zero);
        let spec = StabSpec {
            side,
            fixed_values: fixed,
            normalize_at: Some(c0.clone()),
            fix_zero,
        };
        let steps = level_steps(self.susp, &spec, &sources, &targets, stage)?;
        self.push(steps)?;
        for (&i, t) in idx.iter().zip(&targets) {
            if self.points[i].base != *t {
                return Err(Error::Verification(format!(
                    "{stage}: level move missed point {i}"
                )));
            }
        }
        Ok(())
    }

    /// A base point of `R`'s component at which `f` takes an interior value
    /// accepted by `accept`, avoiding `avoid`.
    fn section_where(
        &self,
        base: &B::Point,
        avoid: &[B::Point],
        accept: impl Fn(&Rational) -> bool,
    ) -> Result<(Rational, B::Point)> {
        let geo = &self.susp.base;
        let comp = geo.component_of(base)?;
        let range = geo.range_of(&self.susp.f, &comp)?;
        let cap = self.susp.opts.generic_cap;
        let value = range
            .interior_candidates()
            .take(cap)
            .find(|c| accept(c))
            .ok_or(Error::GenericExhausted(cap))?;
        let r = geo.section(&self.susp.f, &value, &comp, avoid)?;
        Ok((value, r))
    }

    /// Makes every tracked point hyperbolic; hyperbolic points stay put.
    pub fn avoid_zero(&mut self) -> Result<()> {
        for i in 0..self.points.len() {
            let p = &self.points[i];
            if p.u.is_zero() && p.v.is_zero() {
                self.leave_origin(i)?;
            }
            let p = &self.points[i];
            if p.u.is_zero() {
                self.leave_axis(i, Side::V)?;
            } else if p.v.is_zero() {
                self.leave_axis(i, Side::U)?;
            }
        }
        Ok(())
    }

    /// Point on `{side = c ≠ 0}` with the other coordinate zero: moved
    /// within its level to where `f ≠ 0`.
    fn leave_axis(&mut self, i: usize, side: Side) -> Result<()> {
        let p = self.points[i].clone();
        let c0 = p.side(side).clone();
        let avoid = self.level_bases(side, &c0, i);
        let (_, r) = self.section_where(&p.base, &avoid, |_| true)?;
        self.move_within_level(side, &c0, &[(i, r)], &[], "hyperbolize")
    }

    /// `u = v = 0`: a lift along `v` with `q = v·∏(v − v_j)` over the other
    /// nonzero `v`-levels drifts `u` off zero while fixing those levels.
    fn leave_origin(&mut self, i: usize) -> Result<()> {
        let geo = &self.susp.base;
        let f = &self.susp.f;
        let base = self.points[i].base.clone();
        let mut chosen = None;
        for fl in geo.flexibility_flows(&base)? {
            if !geo.flow_rate(&fl, f, &base)?.is_zero() {
                chosen = Some(fl);
                break;
            }
        }
        let flow = chosen.ok_or(Error::NoFlexibleDirection)?;
        let mut roots: Vec<Rational> = Vec::new();
        for v in self.values(Side::V) {
            if !v.is_zero() && !roots.contains(&v) {
                roots.push(v);
            }
        }
        let q = Multiplier::from_roots(&Rational::from_integer(1.into()), 1, &roots);
        let r0 = q.quotient_eval(&Rational::zero());
        let mut drifting = Vec::new();
        for p in &self.points {
            if p.v.is_zero() && !p.u.is_zero() {
                drifting.push((p.u.clone(), geo.flow_rate(&flow, f, &p.base)?));
            }
        }
        let cap = self.susp.opts.generic_cap;
        let t0 = generic_param(cap, |t| {
            !t.is_zero()
                && drifting
                    .iter()
                    .all(|(u, rate)| !(u + t * &r0 * rate).is_zero())
        })?;
        self.push(vec![LiftedStep {
            flow,
            time: t0,
            side: Side::V,
            multiplier: q,
            stage: "hyperbolize",
        }])
    }

    /// Hyperbolizes, then makes all `u` and all `v` values pairwise distinct
    /// and distinct from `avoid_u` / `avoid_v`.
    pub fn distinct_coords(&mut self, avoid_u: &[Rational], avoid_v: &[Rational]) -> Result<()> {
        self.avoid_zero()?;
        for (moved, fixed_side, avoid) in [(Side::U, Side::V, avoid_u), (Side::V, Side::U, avoid_v)]
        {
            for i in 0..self.points.len() {
                let x = self.points[i].side(moved).clone();
                let clash =
                    self.points[..i].iter().any(|p| *p.side(moved) == x) || avoid.contains(&x);
                if !clash {
                    continue;
                }
                let p = self.points[i].clone();
                let c0 = p.side(fixed_side).clone();
                let used = self.values(moved);
                let others = self.level_bases(fixed_side, &c0, i);
                let (_, r) = self.section_where(&p.base, &others, |val| {
                    let w = val / &c0;
                    !used.contains(&w) && !avoid.contains(&w)
                })?;
                self.move_within_level(fixed_side, &c0, &[(i, r)], &[], "separate")?;
            }
        }
        Ok(())
    }
}

/// Lifts a base interpolation of `sources` to `targets` to the level named by
/// `spec`, fixing its other levels pointwise.
pub(crate) fn level_steps<B: BaseGeometry>(
    susp: &Suspension<B>,
    spec: &StabSpec,
    sources: &[B::Point],
    targets: &[B::Point],
    stage: &'static str,
) -> Result<Vec<LiftedStep<B::Flow>>> {
    if sources == targets {
        return Ok(Vec::new());
    }
    let c0 = spec
        .normalize_at
        .clone()
        .ok_or_else(|| Error::Precondition("level move needs a normalization value".into()))?;
    let q = stab_multiplier_ext(&c0, &spec.fixed_values, spec.fix_zero)?;
    let base = susp.base.interpolate(sources, targets)?;
    Ok(base
        .into_iter()
        .map(|(flow, time)| LiftedStep {
            flow,
            time,
            side: spec.side,
            multiplier: q.clone(),
            stage,
        })
        .collect())
}

/// Script making every point hyperbolic.
pub fn avoid_zero<B: BaseGeometry>(
    susp: &Suspension<B>,
    points: &[LevelPoint<B::Point>],
) -> Result<Vec<LiftedStep<B::Flow>>> {
    let mut s = Session::new(susp, points.to_vec())?;
    s.avoid_zero()?;
    Ok(s.into_steps())
}

/// Script after which the points are hyperbolic with pairwise distinct `u`
/// values and pairwise distinct `v` values.
pub fn distinct_coords<B: BaseGeometry>(
    susp: &Suspension<B>,
    points: &[LevelPoint<B::Point>],
) -> Result<Vec<LiftedStep<B::Flow>>> {
    let mut s = Session::new(susp, points.to_vec())?;
    s.distinct_coords(&[], &[])?;
    Ok(s.into_steps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::transit::fixtures::{lp, plane};

    fn distinct<T: PartialEq>(xs: &[T]) -> bool {
        xs.iter().enumerate().all(|(i, x)| !xs[..i].contains(x))
    }

    #[test]
    fn hyperbolic_points_need_nothing() {
        let s = plane();
        assert!(avoid_zero(&s, &[lp([3, 1, 2, 2]), lp([0, 2, 1, 4])])
            .unwrap()
            .is_empty());
        assert!(distinct_coords(&s, &[lp([3, 1, 2, 2]), lp([0, 2, 1, 4])])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn origin_and_axis_points_become_hyperbolic() {
        let s = plane();
        let start = vec![lp([0, 0, 0, 0]), lp([-1, 1, 0, 1]), lp([3, 1, 2, 2])];
        let mut sess = Session::new(&s, start.clone()).unwrap();
        sess.avoid_zero().unwrap();
        assert!(!sess.steps().is_empty());
        for (p, q) in start.iter().zip(sess.points()) {
            s.check(q).unwrap();
            assert!(q.is_hyperbolic());
            assert_eq!(&s.apply_steps(sess.steps(), p).unwrap(), q);
        }
        assert_eq!(sess.point(2), &start[2]);
    }

    #[test]
    fn axis_point_keeps_its_level() {
        let s = plane();
        let mut sess = Session::new(&s, vec![lp([-1, 1, 0, 1])]).unwrap();
        sess.avoid_zero().unwrap();
        let p = sess.point(0);
        assert!(p.is_hyperbolic());
        assert_eq!(p.v, rat(1));
    }

    #[test]
    fn shared_coordinates_are_separated() {
        let s = plane();
        for start in [
            vec![lp([3, 1, 2, 2]), lp([0, 2, 2, 2])],
            vec![lp([3, 1, 2, 2]), lp([3, 1, 4, 1])],
            vec![lp([3, 1, 2, 2]), lp([0, 2, 2, 2]), lp([0, 0, 0, 0])],
        ] {
            let mut sess = Session::new(&s, start.clone()).unwrap();
            sess.distinct_coords(&[], &[]).unwrap();
            assert!(sess.points().iter().all(LevelPoint::is_hyperbolic));
            assert!(distinct(&sess.values(Side::U)));
            assert!(distinct(&sess.values(Side::V)));
            for (p, q) in start.iter().zip(sess.points()) {
                assert_eq!(&s.apply_steps(sess.steps(), p).unwrap(), q);
            }
        }
    }

    #[test]
    fn separation_avoids_given_values() {
        let s = plane();
        let mut sess = Session::new(&s, vec![lp([3, 1, 2, 2])]).unwrap();
        sess.distinct_coords(&[rat(2)], &[]).unwrap();
        assert_ne!(sess.point(0).u, rat(2));
        assert_eq!(sess.point(0).v, rat(2));
    }

    #[test]
    fn session_rejects_bad_points() {
        let s = plane();
        assert!(Session::new(&s, vec![lp([1, 1, 1, 1])]).is_err());
        assert!(matches!(
            Session::new(&s, vec![lp([3, 1, 2, 2]), lp([3, 1, 2, 2])]),
            Err(Error::Precondition(_))
        ));
    }
}
