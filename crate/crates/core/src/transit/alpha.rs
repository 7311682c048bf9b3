//! Choosing the level `U_α` a component is transported through.

use num_traits::{Signed, Zero};

use super::{generic_param, Session};
use crate::error::{Error, Result};
use crate::geometry::{interval_candidates, BaseGeometry, RangeDescriptor};
use crate::scalar::{rat, sign, Rational};
use crate::tower::Side;

/// One pass of the contraction loop, on the product of `|v|` over the group.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRecord {
    pub product_before: Rational,
    pub product_after: Rational,
    pub factor: Rational,
    /// `(a + ε)/(b − ε)` in magnitudes.
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaChoice {
    pub alpha: Rational,
    pub epsilon: Option<Rational>,
    pub records: Vec<ContractionRecord>,
}

/// Picks `α ∉ avoid_alpha` with `α·v` interior to the range of `f` for every
/// point of `group`, first contracting the spread of `|v|` when the range is
/// bounded away from zero. Moves only points of `group`.
pub fn choose_alpha<B: BaseGeometry>(
    session: &mut Session<'_, B>,
    group: &[usize],
    avoid_alpha: &[Rational],
) -> Result<AlphaChoice> {
    let first = *group
        .first()
        .ok_or_else(|| Error::Precondition("empty point group".into()))?;
    let susp = session.suspension();
    let range = susp.range_at(session.point(first))?;
    let cap = susp.opts.generic_cap;
    for &i in group {
        if !session.point(i).is_hyperbolic() {
            return Err(Error::Precondition(format!("point {i} is not hyperbolic")));
        }
    }
    let vs = |s: &Session<'_, B>| {
        group
            .iter()
            .map(|&i| s.point(i).v.clone())
            .collect::<Vec<_>>()
    };
    let fits = |alpha: &Rational, vs: &[Rational]| {
        !alpha.is_zero()
            && !avoid_alpha.contains(alpha)
            && vs.iter().all(|v| range.contains_interior(&(alpha * v)))
    };
    let done = |alpha: Rational| AlphaChoice {
        alpha,
        epsilon: None,
        records: Vec::new(),
    };
    let powers = |up: bool| {
        (0..cap as i64).flat_map(move |k| {
            let m = if up {
                rat(2).pow(k as i32)
            } else {
                rat(2).pow(-(k as i32))
            };
            [m.clone(), -m]
        })
    };
    use RangeDescriptor::*;
    match &range {
        FullLine => {
            let v = vs(session);
            Ok(done(generic_param(cap, |a| fits(a, &v))?))
        }
        ZeroInterior { .. } | UnboundedPositive(_) | UnboundedNegative(_) => {
            let v = vs(session);
            let up = !matches!(range, ZeroInterior { .. });
            powers(up)
                .find(|a| fits(a, &v))
                .map(done)
                .ok_or(Error::GenericExhausted(cap))
        }
        BoundedPositive(..) | BoundedNegative(..) | BoundedTouchingZero(..) => {
            let (a, b) = (
                range.bounds().0.expect("bounded"),
                range.bounds().1.expect("bounded"),
            );
            let (lo, hi) = if a.abs() < b.abs() {
                (a.abs(), b.abs())
            } else {
                (b.abs(), a.abs())
            };
            let s = range.sign();
            let sigma = sign(&session.point(first).v);
            if group.iter().any(|&i| sign(&session.point(i).v) != sigma) {
                return Err(Error::Precondition(
                    "v changes sign inside a split component".into(),
                ));
            }
            let mut choice = done(Rational::zero());
            if !lo.is_zero() {
                contract(session, group, s, &lo, &hi, &mut choice)?;
            }
            let v = vs(session);
            let vmin = v.iter().map(Signed::abs).min().expect("nonempty");
            let vmax = v.iter().map(Signed::abs).max().expect("nonempty");
            let alpha_sign = rat((s * sigma) as i64);
            choice.alpha = interval_candidates(&lo / &vmin, &hi / &vmax)
                .take(cap)
                .map(|m| m * &alpha_sign)
                .find(|al| fits(al, &v))
                .ok_or(Error::GenericExhausted(cap))?;
            Ok(choice)
        }
    }
}

/// Shrinks the spread `max|v| / min|v|` of the group below `hi/lo` by moving
/// the point of largest `|v|` first to `|f| = hi − ε₁` inside its `v`-level,
/// then to `|f| = lo + ε₂` inside its new `u`-level.
fn contract<B: BaseGeometry>(
    session: &mut Session<'_, B>,
    group: &[usize],
    s: i32,
    lo: &Rational,
    hi: &Rational,
    choice: &mut AlphaChoice,
) -> Result<()> {
    let susp = session.suspension();
    let cap = susp.opts.generic_cap;
    let eps = (hi - lo) * &susp.opts.epsilon_fraction;
    if !(eps.is_positive() && eps < (hi - lo) / rat(2)) {
        return Err(Error::Precondition(
            "epsilon fraction must lie in (0, 1/2)".into(),
        ));
    }
    let bound = (lo + &eps) / (hi - &eps);
    let sr = rat(s as i64);
    let product = |s: &Session<'_, B>| {
        group
            .iter()
            .fold(rat(1), |acc, &i| acc * s.point(i).v.abs())
    };
    let spread = |s: &Session<'_, B>| {
        let v: Vec<_> = group.iter().map(|&i| s.point(i).v.abs()).collect();
        v.iter().max().expect("nonempty") / v.iter().min().expect("nonempty")
    };
    let small = |t: usize| &eps / rat(t as i64 + 1);
    choice.epsilon = Some(eps.clone());
    let mut iterations = 0;
    while spread(session) >= hi / lo {
        iterations += 1;
        if iterations > susp.opts.max_contractions {
            return Err(Error::GenericExhausted(susp.opts.max_contractions));
        }
        let before = product(session);
        let i = *group
            .iter()
            .max_by(|&&a, &&b| session.point(a).v.abs().cmp(&session.point(b).v.abs()))
            .expect("nonempty");
        let p = session.point(i).clone();
        let comp = susp.base.component_of(&p.base)?;

        let us = session.values(Side::U);
        let eps1 = (1..=cap)
            .map(small)
            .find(|e1| !us.contains(&(&sr * (hi - e1) / &p.v)))
            .ok_or(Error::GenericExhausted(cap))?;
        let avoid: Vec<_> = session
            .points()
            .iter()
            .enumerate()
            .filter(|&(j, q)| j != i && q.v == p.v)
            .map(|(_, q)| q.base.clone())
            .collect();
        let r1 = susp
            .base
            .section(&susp.f, &(&sr * (hi - &eps1)), &comp, &avoid)?;
        session.move_within_level(Side::V, &p.v, &[(i, r1)], &[], "contract")?;

        let u1 = session.point(i).u.clone();
        let vs = session.values(Side::V);
        let eps2 = (1..=cap)
            .map(small)
            .find(|e2| !vs.contains(&(&sr * (lo + e2) / &u1)))
            .ok_or(Error::GenericExhausted(cap))?;
        let avoid: Vec<_> = session
            .points()
            .iter()
            .enumerate()
            .filter(|&(j, q)| j != i && q.u == u1)
            .map(|(_, q)| q.base.clone())
            .collect();
        let r2 = susp
            .base
            .section(&susp.f, &(&sr * (lo + &eps2)), &comp, &avoid)?;
        session.move_within_level(Side::U, &u1, &[(i, r2)], &[], "contract")?;

        let after = product(session);
        choice.records.push(ContractionRecord {
            factor: &after / &before,
            product_before: before,
            product_after: after,
            bound: bound.clone(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::transit::fixtures::{lp, mock, mp, plane};

    fn interior<B: BaseGeometry>(s: &Session<'_, B>, group: &[usize], alpha: &Rational) -> bool {
        let range = s.suspension().range_at(s.point(group[0])).unwrap();
        group
            .iter()
            .all(|&i| range.contains_interior(&(alpha * &s.point(i).v)))
    }

    #[test]
    fn full_line_takes_one() {
        let s = plane();
        let mut sess = Session::new(&s, vec![lp([3, 1, 4, 1]), lp([0, 2, 2, 2])]).unwrap();
        let c = choose_alpha(&mut sess, &[0, 1], &[]).unwrap();
        assert_eq!(c.alpha, rat(1));
        assert!(c.records.is_empty());
        assert!(sess.steps().is_empty());
        let c = choose_alpha(&mut sess, &[0, 1], &[rat(1)]).unwrap();
        assert_eq!(c.alpha, rat(-1));
    }

    #[test]
    fn bounded_range_without_contraction() {
        let s = mock(
            &[("A", "[1, 4]")],
            &[("a", "A", rat(2)), ("b", "A", rat(3))],
        );
        let pts = vec![mp(&s, "a", rat(1)), mp(&s, "b", rat(3))];
        let mut sess = Session::new(&s, pts).unwrap();
        let c = choose_alpha(&mut sess, &[0, 1], &[]).unwrap();
        assert!(c.alpha > rat(1) && c.alpha < ratio(4, 3));
        assert!(c.records.is_empty());
        assert!(sess.steps().is_empty());
        assert!(interior(&sess, &[0, 1], &c.alpha));
    }

    #[test]
    fn wide_spread_is_contracted() {
        let s = mock(
            &[("A", "[1, 4]")],
            &[("a", "A", rat(2)), ("b", "A", rat(3))],
        );
        let pts = vec![mp(&s, "a", rat(1)), mp(&s, "b", rat(8))];
        let mut sess = Session::new(&s, pts).unwrap();
        let c = choose_alpha(&mut sess, &[0, 1], &[]).unwrap();
        assert_eq!(c.epsilon, Some(ratio(3, 4)));
        assert!(!c.records.is_empty());
        for r in &c.records {
            assert_eq!(r.bound, ratio(7, 13));
            assert_eq!(r.factor, &r.product_after / &r.product_before);
            assert!(r.factor <= r.bound);
        }
        let v: Vec<_> = sess.values(Side::V).iter().map(Signed::abs).collect();
        assert!(v.iter().max().unwrap() / v.iter().min().unwrap() < rat(4));
        assert!(interior(&sess, &[0, 1], &c.alpha));
    }

    #[test]
    fn negative_and_unbounded_ranges() {
        for (range, vs) in [
            ("[-4, -1]", [rat(1), rat(-2)]),
            ("[2, inf)", [rat(1), ratio(1, 3)]),
            ("(-inf, -2]", [rat(-1), rat(5)]),
            ("(-1, 1)", [rat(3), rat(-7)]),
        ] {
            let desc: RangeDescriptor = range.parse().unwrap();
            let vals: Vec<_> = desc.interior_candidates().take(2).collect();
            let s = mock(
                &[("A", range)],
                &[("a", "A", vals[0].clone()), ("b", "A", vals[1].clone())],
            );
            let pts = vec![mp(&s, "a", vs[0].clone()), mp(&s, "b", vs[1].clone())];
            let mut sess = Session::new(&s, pts).unwrap();
            let groups = if desc.splits() {
                vec![vec![0], vec![1]]
            } else {
                vec![vec![0, 1]]
            };
            let mut avoid = Vec::new();
            for g in &groups {
                let c = choose_alpha(&mut sess, g, &avoid).unwrap();
                assert!(!avoid.contains(&c.alpha), "{range}");
                assert!(interior(&sess, g, &c.alpha), "{range}");
                avoid.push(c.alpha);
            }
        }
    }

    #[test]
    fn rejects_empty_and_non_hyperbolic_groups() {
        let s = plane();
        let mut sess = Session::new(&s, vec![lp([-1, 1, 0, 1])]).unwrap();
        assert!(matches!(
            choose_alpha(&mut sess, &[], &[]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            choose_alpha(&mut sess, &[0], &[]),
            Err(Error::Precondition(_))
        ));
    }
}
