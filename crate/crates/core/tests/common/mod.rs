//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use susp::geometry::{MockComponent, MockFlow, MockToken, PolyFlow, PolyGeometry};
use susp::polyring::parse_poly;
use susp::scalar::ratio;
use susp::tower::{SuspensionTower, TowerPoint};
use susp::transit::{LevelPoint, LiftedStep};
use susp::Rational;
use susp::{AutomorphismScript, FlowStep};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Numerator and denominator bounded by 20 in absolute value.
pub fn small(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-20..=20), rng.gen_range(1..=20))
}

pub fn nonzero(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let r = small(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

/// `u·v = x + y²` over the plane.
pub fn depth1() -> SuspensionTower {
    let t = SuspensionTower::affine(["x", "y"]).unwrap();
    let f = parse_poly("x + y^2", t.vars()).unwrap();
    t.suspend(f, "u", "v").unwrap()
}

/// [`depth1`] followed by `w·z = u`.
pub fn depth2() -> SuspensionTower {
    let t = depth1();
    let f = parse_poly("u", t.vars()).unwrap();
    t.suspend(f, "w", "z").unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Hyperbolic,
    UZero,
    VZero,
    Origin,
}

pub fn random_kind(rng: &mut ChaCha8Rng) -> Kind {
    match rng.gen_range(0..10) {
        0 => Kind::UZero,
        1 => Kind::VZero,
        2 => Kind::Origin,
        _ => Kind::Hyperbolic,
    }
}

fn fiber(rng: &mut ChaCha8Rng, kind: Kind) -> (Rational, Rational) {
    match kind {
        Kind::Hyperbolic => (nonzero(rng), nonzero(rng)),
        Kind::UZero => (Rational::zero(), nonzero(rng)),
        Kind::VZero => (nonzero(rng), Rational::zero()),
        Kind::Origin => (Rational::zero(), Rational::zero()),
    }
}

/// A point of [`depth1`] of the given kind; `x` is solved for.
pub fn point1(rng: &mut ChaCha8Rng, kind: Kind) -> TowerPoint {
    let y = small(rng);
    let (u, v) = fiber(rng, kind);
    let x = &u * &v - &y * &y;
    TowerPoint::new(vec![x, y, u, v])
}

/// A point of [`depth2`], of the given kind at the top level.
pub fn point2(rng: &mut ChaCha8Rng, kind: Kind) -> TowerPoint {
    let y = small(rng);
    let (w, z) = fiber(rng, kind);
    let u = &w * &z;
    let v = if rng.gen_bool(0.2) {
        Rational::zero()
    } else {
        nonzero(rng)
    };
    let x = &u * &v - &y * &y;
    TowerPoint::new(vec![x, y, u, v, w, z])
}

pub fn distinct(
    rng: &mut ChaCha8Rng,
    m: usize,
    mut gen: impl FnMut(&mut ChaCha8Rng) -> TowerPoint,
) -> Vec<TowerPoint> {
    let mut out: Vec<TowerPoint> = Vec::new();
    while out.len() < m {
        let p = gen(rng);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// `f = x + y²` at a base point of the plane.
pub fn f1(base: &TowerPoint) -> Rational {
    &base.coords[0] + &base.coords[1] * &base.coords[1]
}

/// Lifted steps of the suspension of `geo` as a derivation script.
pub fn lifted_script(geo: &PolyGeometry, steps: &[LiftedStep<PolyFlow>]) -> AutomorphismScript {
    let tower = geo.tower();
    AutomorphismScript::new(
        steps
            .iter()
            .map(|s| {
                let fl = PolyFlow::lift(
                    s.flow.clone(),
                    geo.depth(),
                    s.side,
                    s.multiplier.clone(),
                    s.stage,
                );
                FlowStep::new(fl.to_derivation(tower).unwrap(), s.time.clone())
            })
            .collect(),
    )
}

pub fn mock_steps(steps: &[susp::format::CertStep]) -> Vec<LiftedStep<MockFlow>> {
    steps
        .iter()
        .map(|s| match &s.action {
            susp::format::StepAction::Permutation(pairs) => LiftedStep {
                flow: MockFlow {
                    pairs: pairs.clone(),
                },
                time: s.time.clone(),
                side: s.side.unwrap(),
                multiplier: s.multiplier.clone().unwrap(),
                stage: "test",
            },
            _ => panic!("mock step expected"),
        })
        .collect()
}

pub fn component(label: &str, range: &str) -> MockComponent {
    MockComponent {
        label: label.into(),
        range: range.parse().unwrap(),
    }
}

/// Interior values of `[lo, hi]` on a grid of ninths.
pub fn interior_value(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    ratio(rng.gen_range(lo * 9 + 1..hi * 9), 9)
}

pub struct MockBuilder {
    pub tokens: Vec<MockToken>,
}

impl MockBuilder {
    pub fn new() -> Self {
        MockBuilder { tokens: Vec::new() }
    }

    /// A fresh token with value `value` and a point over it with `v` given.
    pub fn point(&mut self, component: &str, value: Rational, v: Rational) -> LevelPoint<String> {
        let name = format!("k{}", self.tokens.len());
        self.tokens.push(MockToken {
            name: name.clone(),
            component: component.into(),
            value: value.clone(),
        });
        let u = value / &v;
        LevelPoint::new(name, u, v)
    }
}

pub fn shuffle<T>(rng: &mut ChaCha8Rng, xs: &mut [T]) {
    xs.shuffle(rng);
}
