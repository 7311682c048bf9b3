//! Iterated suspensions over affine space.
//!
//! Generators are ordered `x_1, …, x_n, u_1, v_1, u_2, v_2, …`; the ring of a
//! truncated tower is a prefix of the full ring. Levels are numbered from 1.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::rank_fraction_free;
use crate::polyring::{Monomial, VarName, Vars};
use crate::scalar::Rational;
use crate::{Derivation, Polynomial};

/// One relation `u·v − f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuspensionLevel {
    pub u: usize,
    pub v: usize,
    pub f: Polynomial,
    pub relation: Polynomial,
    /// Generator entering `f` linearly, in a single monomial, with a constant
    /// coefficient.
    pub designated: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuspensionTower {
    vars: Vars,
    base_dim: usize,
    levels: Vec<SuspensionLevel>,
}

/// Full ambient coordinates of a point; the quotient ring is never formed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TowerPoint {
    pub coords: Vec<Rational>,
}

impl TowerPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        TowerPoint { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

impl fmt::Display for TowerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    U,
    V,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::U => Side::V,
            Side::V => Side::U,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::U => "u",
            Side::V => "v",
        })
    }
}

/// The hyperplane section `{u = value}` or `{v = value}` of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub level: usize,
    pub side: Side,
    pub value: Rational,
}

impl LevelSet {
    pub fn contains(&self, tower: &SuspensionTower, p: &TowerPoint) -> bool {
        let lvl = tower.level(self.level);
        let i = match self.side {
            Side::U => lvl.u,
            Side::V => lvl.v,
        };
        p.coords.get(i) == Some(&self.value)
    }
}

/// A generator usable as designated variable of `f`: it occurs in exactly one
/// monomial, to the first power, alone.
pub fn is_designated(f: &Polynomial, var: usize) -> bool {
    let hits: Vec<_> = f.terms().filter(|(m, _)| m.exponent(var) > 0).collect();
    hits.len() == 1 && *hits[0].0 == Monomial::var(var)
}

impl SuspensionTower {
    /// Affine space with the given coordinate names, `n ≥ 2`.
    pub fn affine<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vars = Vars::new(names)?;
        if vars.len() < 2 {
            return Err(Error::Precondition(format!(
                "base dimension must be at least 2, got {}",
                vars.len()
            )));
        }
        Ok(SuspensionTower {
            base_dim: vars.len(),
            vars,
            levels: Vec::new(),
        })
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Krull dimension: `n + depth`.
    pub fn dim(&self) -> usize {
        self.base_dim + self.levels.len()
    }

    /// Number of generators of the ring of the tower truncated to `depth`
    /// levels.
    pub fn ambient_at(&self, depth: usize) -> usize {
        self.base_dim + 2 * depth
    }

    pub fn ambient(&self) -> usize {
        self.vars.len()
    }

    /// Level `k`, counted from 1.
    pub fn level(&self, k: usize) -> &SuspensionLevel {
        &self.levels[k - 1]
    }

    pub fn levels(&self) -> &[SuspensionLevel] {
        &self.levels
    }

    /// Appends `u·v − f`, detecting a designated variable of `f` (the last
    /// eligible generator).
    pub fn suspend(&self, f: Polynomial, u: &str, v: &str) -> Result<Self> {
        let designated = (0..self.ambient()).rev().find(|&i| is_designated(&f, i));
        self.suspend_with(f, u, v, designated)
    }

    /// Appends `u·v − f` with an explicit designated variable.
    pub fn suspend_with(
        &self,
        f: Polynomial,
        u: &str,
        v: &str,
        designated: Option<usize>,
    ) -> Result<Self> {
        if f.is_constant() {
            return Err(Error::ConstantSuspension);
        }
        if let Some(i) = f.support().into_iter().find(|&i| i >= self.ambient()) {
            return Err(Error::UnknownVariable(format!("#{i}")));
        }
        if let Some(d) = designated {
            if d >= self.ambient() || !is_designated(&f, d) {
                return Err(Error::Precondition(format!(
                    "`{}` is not a designated variable of f",
                    self.var_label(d)
                )));
            }
        }
        let mut vars = self.vars.clone();
        let ui = vars.push(VarName::new(u)?)?;
        let vi = vars.push(VarName::new(v)?)?;
        let relation = &(&Polynomial::var(ui) * &Polynomial::var(vi)) - &f;
        let mut levels = self.levels.clone();
        levels.push(SuspensionLevel {
            u: ui,
            v: vi,
            f,
            relation,
            designated,
        });
        Ok(SuspensionTower {
            vars,
            base_dim: self.base_dim,
            levels,
        })
    }

    /// The tower with only its first `depth` levels.
    pub fn truncate(&self, depth: usize) -> SuspensionTower {
        SuspensionTower {
            vars: self.vars.prefix(self.ambient_at(depth)),
            base_dim: self.base_dim,
            levels: self.levels[..depth].to_vec(),
        }
    }

    fn var_label(&self, i: usize) -> String {
        if i < self.ambient() {
            self.vars.name(i).to_string()
        } else {
            format!("#{i}")
        }
    }

    /// Depth of the smallest truncation containing the point's coordinates.
    fn depth_of(&self, p: &TowerPoint) -> Result<usize> {
        let extra = p.len().checked_sub(self.base_dim);
        match extra {
            Some(e) if e % 2 == 0 && e / 2 <= self.depth() => Ok(e / 2),
            _ => Err(Error::Precondition(format!(
                "point has {} coordinates, not a truncation of a tower with {} generators",
                p.len(),
                self.ambient()
            ))),
        }
    }

    /// Validates a coordinate vector; the point may belong to a truncation.
    pub fn check_point(&self, coords: Vec<Rational>) -> Result<TowerPoint> {
        let p = TowerPoint::new(coords);
        let depth = self.depth_of(&p)?;
        for k in 1..=depth {
            let r = self
                .level(k)
                .relation
                .try_eval(&p.coords)
                .expect("prefix ring");
            if !r.is_zero() {
                return Err(Error::OffVariety {
                    level: k,
                    residual: r,
                });
            }
        }
        Ok(p)
    }

    /// Point from a name → value map over the full tower.
    pub fn check_named(&self, coords: &BTreeMap<String, Rational>) -> Result<TowerPoint> {
        for name in coords.keys() {
            self.vars.index(name)?;
        }
        let values = self
            .vars
            .iter()
            .map(|n| {
                coords
                    .get(n.as_str())
                    .cloned()
                    .ok_or_else(|| Error::MissingVariable(n.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.check_point(values)
    }

    /// Jacobian criterion: the relations' gradients at `p` have full rank.
    pub fn is_regular(&self, p: &TowerPoint) -> bool {
        let Ok(depth) = self.depth_of(p) else {
            return false;
        };
        let rows: Vec<Vec<Rational>> = (1..=depth)
            .map(|k| {
                let rel = &self.level(k).relation;
                (0..p.len())
                    .map(|i| rel.partial(i).try_eval(&p.coords).expect("prefix ring"))
                    .collect()
            })
            .collect();
        rank_fraction_free(&rows) == depth
    }

    /// Restriction to the first `to_level` levels.
    pub fn project(&self, p: &TowerPoint, to_level: usize) -> TowerPoint {
        TowerPoint::new(p.coords[..self.ambient_at(to_level)].to_vec())
    }

    /// `u·v ≠ 0` at level `k`.
    pub fn is_hyperbolic(&self, p: &TowerPoint, k: usize) -> bool {
        let lvl = self.level(k);
        !p.coords[lvl.u].is_zero() && !p.coords[lvl.v].is_zero()
    }

    /// True iff `d` annihilates every relation identically in the ambient
    /// ring.
    pub fn preserves_relations(&self, d: &Derivation) -> bool {
        self.failing_relation(d).is_none()
    }

    /// First level whose relation `d` does not annihilate.
    pub fn failing_relation(&self, d: &Derivation) -> Option<usize> {
        if d.nvars() != self.ambient() {
            return Some(0);
        }
        (1..=self.depth()).find(|&k| match d.apply(&self.level(k).relation) {
            Ok(r) => !r.is_zero(),
            Err(_) => true,
        })
    }

    /// Name → value map of a point.
    pub fn named(&self, p: &TowerPoint) -> BTreeMap<String, Rational> {
        self.vars
            .iter()
            .zip(&p.coords)
            .map(|(n, c)| (n.to_string(), c.clone()))
            .collect()
    }
}
