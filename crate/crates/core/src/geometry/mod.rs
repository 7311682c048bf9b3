//! Base geometries: the hypotheses a suspension needs from its base, packaged
//! as capabilities.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rat, sign, Rational};

mod affine;
mod mock;

pub use affine::{PolyFlow, PolyGeometry};
pub use mock::{MockComponent, MockFlow, MockGeometry, MockToken};

/// Shape of `f(Y¹)` for one component `Y¹`. Bounds are those of the closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RangeDescriptor {
    FullLine,
    /// Zero is interior; either bound may be infinite.
    ZeroInterior {
        lo: Option<Rational>,
        hi: Option<Rational>,
    },
    /// `f > 0`, unbounded above, infimum `a ≥ 0`.
    UnboundedPositive(Rational),
    /// `f < 0`, unbounded below, supremum `b ≤ 0`.
    UnboundedNegative(Rational),
    /// `0 < a < b`.
    BoundedPositive(Rational, Rational),
    /// `a < b < 0`.
    BoundedNegative(Rational, Rational),
    /// `a < b`, `a·b = 0`.
    BoundedTouchingZero(Rational, Rational),
}

impl RangeDescriptor {
    /// Classifies the closed interval `[lo, hi]`, `None` meaning infinite.
    pub fn from_bounds(lo: Option<Rational>, hi: Option<Rational>) -> Result<Self> {
        use RangeDescriptor::*;
        let bad = |why: &str| Err(Error::UnsupportedRange(why.to_string()));
        if let (Some(a), Some(b)) = (&lo, &hi) {
            if a >= b {
                return bad("empty or degenerate interval");
            }
        }
        Ok(match (lo, hi) {
            (None, None) => FullLine,
            (Some(a), None) if !a.is_negative() => UnboundedPositive(a),
            (None, Some(b)) if !b.is_positive() => UnboundedNegative(b),
            (lo, None) => ZeroInterior { lo, hi: None },
            (None, hi) => ZeroInterior { lo: None, hi },
            (Some(a), Some(b)) => {
                if a.is_positive() {
                    BoundedPositive(a, b)
                } else if b.is_negative() {
                    BoundedNegative(a, b)
                } else if a.is_zero() || b.is_zero() {
                    BoundedTouchingZero(a, b)
                } else {
                    ZeroInterior {
                        lo: Some(a),
                        hi: Some(b),
                    }
                }
            }
        })
    }

    pub fn bounds(&self) -> (Option<Rational>, Option<Rational>) {
        use RangeDescriptor::*;
        match self {
            FullLine => (None, None),
            ZeroInterior { lo, hi } => (lo.clone(), hi.clone()),
            UnboundedPositive(a) => (Some(a.clone()), None),
            UnboundedNegative(b) => (None, Some(b.clone())),
            BoundedPositive(a, b) | BoundedNegative(a, b) | BoundedTouchingZero(a, b) => {
                (Some(a.clone()), Some(b.clone()))
            }
        }
    }

    pub fn contains_interior(&self, x: &Rational) -> bool {
        let (lo, hi) = self.bounds();
        lo.is_none_or(|a| a < *x) && hi.is_none_or(|b| *x < b)
    }

    /// Zero is not an interior value, so `f` has constant sign on the
    /// component and the regular part of the suspension over it splits by
    /// the sign of `u` (or `v`). At a zero of a semidefinite `f`, `df = 0`, so
    /// `u = v = 0` is singular there.
    pub fn splits(&self) -> bool {
        use RangeDescriptor::*;
        !matches!(self, FullLine | ZeroInterior { .. })
    }

    /// Sign of `f` on a split component.
    pub fn sign(&self) -> i32 {
        use RangeDescriptor::*;
        match self {
            UnboundedPositive(_) | BoundedPositive(..) => 1,
            UnboundedNegative(_) | BoundedNegative(..) => -1,
            BoundedTouchingZero(a, _) if a.is_zero() => 1,
            BoundedTouchingZero(..) => -1,
            FullLine | ZeroInterior { .. } => 0,
        }
    }

    pub fn is_bounded(&self) -> bool {
        let (lo, hi) = self.bounds();
        lo.is_some() && hi.is_some()
    }

    /// Deterministic sequence of distinct nonzero interior values, smallest
    /// "simple" values first.
    pub fn interior_candidates(&self) -> Box<dyn Iterator<Item = Rational> + '_> {
        use RangeDescriptor::*;
        match self {
            FullLine => Box::new(signed_integers()),
            ZeroInterior { lo, hi } => {
                let hi = hi.clone().unwrap_or_else(|| rat(2));
                let lo = lo.clone().unwrap_or_else(|| rat(-2));
                Box::new((2..).flat_map(move |t| {
                    let t = rat(t);
                    [hi.clone() / t.clone(), lo.clone() / t]
                }))
            }
            UnboundedPositive(a) => Box::new((1..).map(move |t| a.clone() + rat(t))),
            UnboundedNegative(b) => Box::new((1..).map(move |t| b.clone() - rat(t))),
            BoundedPositive(a, b) | BoundedNegative(a, b) | BoundedTouchingZero(a, b) => {
                Box::new((1..).map(move |t| a.clone() + (b.clone() - a.clone()) / rat(t + 1)))
            }
        }
    }
}

/// `1, −1, 2, −2, 3, …`
pub fn signed_integers() -> impl Iterator<Item = Rational> {
    (1i64..).flat_map(|k| [rat(k), rat(-k)])
}

impl fmt::Display for RangeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.bounds();
        match lo {
            Some(a) => write!(f, "[{a}, ")?,
            None => f.write_str("(-inf, ")?,
        }
        match hi {
            Some(b) => write!(f, "{b}]"),
            None => f.write_str("inf)"),
        }
    }
}

impl FromStr for RangeDescriptor {
    type Err = Error;

    /// Accepts `full`, or an interval `[a, b]` whose bounds are rationals or
    /// `-inf` / `inf`; bracket style is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "full" {
            return Ok(RangeDescriptor::FullLine);
        }
        let bad = || Error::Format(format!("invalid range `{s}`"));
        let inner = t
            .strip_prefix(['[', '('])
            .and_then(|r| r.strip_suffix([']', ')']))
            .ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let bound = |x: &str, inf: &str| -> Result<Option<Rational>> {
            let x = x.trim();
            if x == inf {
                Ok(None)
            } else {
                parse_rational(x).map(Some)
            }
        };
        RangeDescriptor::from_bounds(bound(a, "-inf")?, bound(b, "inf")?)
    }
}

/// Opaque component token: the base label followed by one sign per split
/// suspension level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ComponentLabel(pub Vec<String>);

impl ComponentLabel {
    pub fn new(base: impl Into<String>) -> Self {
        ComponentLabel(vec![base.into()])
    }

    /// Label of the suspension component: the sign of `u` (or of `v` when
    /// `u = 0`) is appended when the range of `f` splits.
    pub fn extended(&self, split: bool, u: &Rational, v: &Rational) -> Self {
        let mut parts = self.0.clone();
        if split {
            let s = if u.is_zero() { sign(v) } else { sign(u) };
            parts.push(if s >= 0 { "+" } else { "-" }.to_string());
        }
        ComponentLabel(parts)
    }

    /// Drops the top-level sign, if one was recorded.
    pub fn without_sign(&self) -> ComponentLabel {
        let mut parts = self.0.clone();
        if self.top_sign().is_some() {
            parts.pop();
        }
        ComponentLabel(parts)
    }

    /// Sign recorded for the top level, if any.
    pub fn top_sign(&self) -> Option<i32> {
        match self.0.last().map(String::as_str) {
            Some("+") => Some(1),
            Some("-") => Some(-1),
            _ => None,
        }
    }
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("/"))
    }
}

/// What the suspension constructions need from the base `Y`.
///
/// Flows are one-parameter unipotent subgroups of `SAut(Y)`; a script is a
/// list of `(flow, time)` pairs applied left to right.
pub trait BaseGeometry {
    type Point: Clone + PartialEq + fmt::Debug;
    type Flow: Clone + fmt::Debug;
    type Function: Clone + fmt::Debug;

    fn dim(&self) -> usize;

    fn value(&self, f: &Self::Function, p: &Self::Point) -> Result<Rational>;

    /// Image of `p` under `exp(time·δ)`.
    fn flow_point(
        &self,
        flow: &Self::Flow,
        time: &Rational,
        p: &Self::Point,
    ) -> Result<Self::Point>;

    /// `δ(f)(p)`.
    fn flow_rate(&self, flow: &Self::Flow, f: &Self::Function, p: &Self::Point)
        -> Result<Rational>;

    /// Script sending `sources[i]` to `targets[i]`. Both lists consist of
    /// distinct regular points, matched by component.
    fn interpolate(
        &self,
        sources: &[Self::Point],
        targets: &[Self::Point],
    ) -> Result<Vec<(Self::Flow, Rational)>>;

    /// Flows whose tangent vectors at `p` span `T_p Y`.
    fn flexibility_flows(&self, p: &Self::Point) -> Result<Vec<Self::Flow>>;

    /// Tangent vector of a flow at `p` in ambient coordinates, when the
    /// geometry has coordinates.
    fn tangent(&self, flow: &Self::Flow, p: &Self::Point) -> Result<Vec<Rational>>;

    /// A point `R` of component `comp` with `f(R) = value`, outside `avoid`.
    fn section(
        &self,
        f: &Self::Function,
        value: &Rational,
        comp: &ComponentLabel,
        avoid: &[Self::Point],
    ) -> Result<Self::Point>;

    fn range_of(&self, f: &Self::Function, comp: &ComponentLabel) -> Result<RangeDescriptor>;

    fn component_of(&self, p: &Self::Point) -> Result<ComponentLabel>;

    fn is_regular(&self, p: &Self::Point) -> bool;
}

/// Interior rationals of the open interval `(lo, hi)`, midpoint first.
pub fn interval_candidates(lo: Rational, hi: Rational) -> impl Iterator<Item = Rational> {
    (1i64..).flat_map(move |den| {
        let lo = lo.clone();
        let hi = hi.clone();
        let d = 2 * den;
        (1..d).step_by(2).map(move |k| {
            let w = Rational::new(k.into(), d.into());
            lo.clone() * (Rational::one() - w.clone()) + hi.clone() * w
        })
    })
}
