//! Sparse multivariate polynomials over a [`Scalar`] field.
//!
//! A polynomial is a map from [`Monomial`] to a nonzero coefficient. Variables
//! are addressed by index into an ordered [`Vars`] list; names are only needed
//! for parsing and printing.

mod monomial;
mod parse;
mod vars;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Signed;

pub use monomial::Monomial;
pub use parse::parse_poly;
pub use vars::{is_identifier, VarName, Vars};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Default for Poly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(i: usize) -> Self {
        Self::term(S::one(), Monomial::var(i))
    }

    pub fn term(c: S, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, S)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Univariate polynomial `Σ coeffs[k]·x_i^k`.
    pub fn univariate(i: usize, coeffs: &[S]) -> Self {
        Self::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (Monomial::var_pow(i, k as u32), c.clone())),
        )
    }

    fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_term(&self) -> S {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.exponent(i)).max().unwrap_or(0)
    }

    /// One past the largest generator index occurring in the polynomial.
    pub fn width(&self) -> usize {
        self.terms.keys().map(Monomial::width).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.exponent(i) > 0)
    }

    /// Indices of the generators that occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.width()).filter(|&i| self.uses_var(i)).collect()
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact value at a point given as a coordinate slice. A missing
    /// coordinate is reported by its generator index.
    pub fn try_eval(&self, point: &[S]) -> std::result::Result<S, usize> {
        if let Some(i) = self.support().into_iter().find(|&i| i >= point.len()) {
            return Err(i);
        }
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    t = t * point[i].clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    pub fn eval(&self, point: &[S], vars: &Vars) -> Result<S> {
        self.try_eval(point).map_err(|i| missing(vars, i))
    }

    /// Formal partial derivative with respect to generator `i`.
    pub fn partial(&self, i: usize) -> Self {
        Self::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponent(i);
            let lowered = m.div_var(i)?;
            Some((lowered, c.clone() * S::from_u32(e).expect("exponent fits")))
        }))
    }

    /// Replaces generator `j` by `images[j]` and expands.
    pub fn try_substitute(&self, images: &[Poly<S>]) -> std::result::Result<Self, usize> {
        if let Some(&i) = self.support().iter().find(|&&i| i >= images.len()) {
            return Err(i);
        }
        // Cache powers of each image; substitution is the hot path of every
        // flow composition.
        let mut powers: Vec<Vec<Poly<S>>> = vec![Vec::new(); images.len()];
        let mut acc = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[i];
                if cache.is_empty() {
                    cache.push(Self::one());
                }
                while cache.len() <= e as usize {
                    let next = cache.last().expect("seeded") * &images[i];
                    cache.push(next);
                }
                t = &t * &cache[e as usize];
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    pub fn substitute(&self, images: &[Poly<S>], vars: &Vars) -> Result<Self> {
        self.try_substitute(images).map_err(|i| missing(vars, i))
    }

    /// Exact quotient by generator `i`; `None` if some term lacks it.
    pub fn try_divide_by_var(&self, i: usize) -> Option<Self> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            out.insert(m.div_var(i)?, c.clone());
        }
        Some(Poly { terms: out })
    }

    pub fn divide_by_var(&self, i: usize, vars: &Vars) -> Result<Self> {
        self.try_divide_by_var(i)
            .ok_or_else(|| Error::NotDivisible {
                var: var_label(vars, i),
            })
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

fn var_label(vars: &Vars, i: usize) -> String {
    if i < vars.len() {
        vars.name(i).to_string()
    } else {
        format!("#{i}")
    }
}

fn missing(vars: &Vars, i: usize) -> Error {
    Error::MissingVariable(var_label(vars, i))
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, rhs: &Poly<S>) -> Poly<S> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, rhs: &Poly<S>) -> Poly<S> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, rhs: &Poly<S>) -> Poly<S> {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl<S: Scalar> $tr for Poly<S> {
            type Output = Poly<S>;
            fn $method(self, rhs: Poly<S>) -> Poly<S> {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<S: Scalar> Neg for Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        -&self
    }
}

impl Poly<Rational> {
    /// Canonical text: terms in descending graded-lex order, signs absorbed
    /// into the joining operators, `*` between factors.
    pub fn display<'a>(&'a self, vars: &'a Vars) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }

    pub fn to_text(&self, vars: &Vars) -> String {
        self.display(vars).to_string()
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly<Rational>,
    vars: &'a Vars,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            if m.is_one() || abs != Rational::from_integer(1.into()) {
                factors.push(abs.to_string());
            }
            for (i, &e) in m.exponents().iter().enumerate() {
                let name = var_label(self.vars, i);
                match e {
                    0 => {}
                    1 => factors.push(name),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}
