//! Derivations of a polynomial ring, their exponential flows, and scripts of
//! flows.
//!
//! Composition convention: a script is applied left to right, the first step
//! acting on a point first. [`PolyEndomorphism::compose`]`(a, b)` is "`a`
//! then `b`" on points.

use crate::error::{Error, Result};
use crate::polyring::Poly;
use crate::scalar::{factorial, Scalar};

/// Default bound on the nilpotency order accepted for a flow.
pub const DEFAULT_NILPOTENCY_CAP: usize = 64;

/// A derivation given by its images on the generators `0..images.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation<S> {
    pub images: Vec<Poly<S>>,
    pub label: String,
}

impl<S: Scalar> Derivation<S> {
    pub fn new(images: Vec<Poly<S>>, label: impl Into<String>) -> Self {
        Derivation {
            images,
            label: label.into(),
        }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::new(vec![Poly::zero(); nvars], "0")
    }

    /// `∂/∂x_i` on a ring with `nvars` generators.
    pub fn coordinate(nvars: usize, i: usize) -> Self {
        let mut images = vec![Poly::zero(); nvars];
        images[i] = Poly::one();
        Self::new(images, format!("d{i}"))
    }

    pub fn nvars(&self) -> usize {
        self.images.len()
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(Poly::is_zero)
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(
            self.images.iter().map(|p| p.scale(c)).collect(),
            self.label.clone(),
        )
    }

    /// Leibniz extension: `d(p) = Σ ∂p/∂x_i · d(x_i)`.
    pub fn apply(&self, p: &Poly<S>) -> Result<Poly<S>> {
        if let Some(&i) = p.support().iter().find(|&&i| i >= self.nvars()) {
            return Err(Error::UnknownVariable(format!("#{i}")));
        }
        let mut acc = Poly::zero();
        for i in p.support() {
            if self.images[i].is_zero() {
                continue;
            }
            acc = &acc + &(&p.partial(i) * &self.images[i]);
        }
        Ok(acc)
    }

    /// `[p, d(p), d²(p), …]` up to the last nonzero iterate.
    pub fn iterates(&self, p: &Poly<S>, cap: usize) -> Result<Vec<Poly<S>>> {
        let mut out = Vec::new();
        let mut cur = p.clone();
        while !cur.is_zero() {
            if out.len() >= cap {
                return Err(Error::CapExceeded {
                    label: self.label.clone(),
                    cap,
                });
            }
            let next = self.apply(&cur)?;
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// Smallest `N ≤ cap` with `d^N(p) = 0`.
    pub fn nilpotency_order(&self, p: &Poly<S>, cap: usize) -> Result<usize> {
        assert!(cap >= 1, "nilpotency cap must be positive");
        self.iterates(p, cap).map(|it| it.len())
    }

    /// Largest nilpotency order over all generators.
    pub fn check_nilpotent(&self, cap: usize) -> Result<usize> {
        (0..self.nvars())
            .map(|i| self.nilpotency_order(&Poly::var(i), cap))
            .try_fold(0, |acc, n| n.map(|n| acc.max(n)))
    }

    /// `exp(t·d)`: generator `x ↦ Σ_k t^k/k! · d^k(x)`; the series stops at
    /// the nilpotency order.
    pub fn exp_flow(&self, time: &S, cap: usize) -> Result<PolyEndomorphism<S>> {
        let mut images = Vec::with_capacity(self.nvars());
        for i in 0..self.nvars() {
            let its = self.iterates(&Poly::var(i), cap)?;
            let mut acc = Poly::zero();
            let mut tk = S::one();
            for (k, term) in its.iter().enumerate() {
                if k > 0 {
                    tk = tk * time.clone();
                }
                if tk.is_zero() {
                    break;
                }
                acc = &acc + &term.scale(&(tk.clone() / factorial::<S>(k)));
            }
            images.push(acc);
        }
        Ok(PolyEndomorphism { images })
    }
}

/// One-parameter subgroup element `exp(time·derivation)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowStep<S> {
    pub derivation: Derivation<S>,
    pub time: S,
}

impl<S: Scalar> FlowStep<S> {
    pub fn new(derivation: Derivation<S>, time: S) -> Self {
        FlowStep { derivation, time }
    }

    pub fn exp_flow(&self, cap: usize) -> Result<PolyEndomorphism<S>> {
        self.derivation.exp_flow(&self.time, cap)
    }

    pub fn inverse(&self) -> Self {
        FlowStep::new(self.derivation.clone(), -self.time.clone())
    }
}

/// Polynomial map given by the images of the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyEndomorphism<S> {
    pub images: Vec<Poly<S>>,
}

impl<S: Scalar> PolyEndomorphism<S> {
    pub fn identity(nvars: usize) -> Self {
        PolyEndomorphism {
            images: (0..nvars).map(Poly::var).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.images.len()
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, p)| *p == Poly::var(i))
    }

    /// `a` then `b` on points: each generator `x ↦ b(x)` with `a`'s images
    /// substituted.
    pub fn compose(a: &Self, b: &Self) -> Result<Self> {
        if a.nvars() != b.nvars() {
            return Err(Error::VariableMismatch {
                left: a.nvars(),
                right: b.nvars(),
            });
        }
        let images = b
            .images
            .iter()
            .map(|p| {
                p.try_substitute(&a.images)
                    .map_err(|i| Error::UnknownVariable(format!("#{i}")))
            })
            .collect::<Result<_>>()?;
        Ok(PolyEndomorphism { images })
    }

    pub fn apply_point(&self, point: &[S]) -> Result<Vec<S>> {
        self.images
            .iter()
            .map(|p| {
                p.try_eval(point)
                    .map_err(|i| Error::MissingVariable(format!("#{i}")))
            })
            .collect()
    }

    /// Pullback of a function: `p ∘ self`.
    pub fn apply_poly(&self, p: &Poly<S>) -> Result<Poly<S>> {
        p.try_substitute(&self.images)
            .map_err(|i| Error::UnknownVariable(format!("#{i}")))
    }
}

/// Ordered product of flows; the first step acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct AutomorphismScript<S> {
    pub steps: Vec<FlowStep<S>>,
}

impl<S: Scalar> Default for AutomorphismScript<S> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<S: Scalar> AutomorphismScript<S> {
    pub fn empty() -> Self {
        AutomorphismScript { steps: Vec::new() }
    }

    pub fn new(steps: Vec<FlowStep<S>>) -> Self {
        AutomorphismScript { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Reversed steps with negated times.
    pub fn invert(&self) -> Self {
        AutomorphismScript {
            steps: self.steps.iter().rev().map(FlowStep::inverse).collect(),
        }
    }

    pub fn then(mut self, other: &Self) -> Self {
        self.steps.extend(other.steps.iter().cloned());
        self
    }

    /// Composite polynomial map on a ring with `nvars` generators.
    pub fn realize(&self, nvars: usize, cap: usize) -> Result<PolyEndomorphism<S>> {
        let mut acc = PolyEndomorphism::identity(nvars);
        for step in &self.steps {
            let e = step.exp_flow(cap)?;
            acc = PolyEndomorphism::compose(&acc, &e)?;
        }
        Ok(acc)
    }

    /// Images of several points, one flow evaluation per step. Equivalent to
    /// evaluating [`realize`](Self::realize) but without expanding the
    /// composite map.
    pub fn apply_points(&self, points: &[Vec<S>], cap: usize) -> Result<Vec<Vec<S>>> {
        let mut pts = points.to_vec();
        for step in &self.steps {
            let e = step.exp_flow(cap)?;
            for p in &mut pts {
                *p = e.apply_point(p)?;
            }
        }
        Ok(pts)
    }
}
