//! Small suspensions shared by the unit tests of this module.

use super::{LevelPoint, Suspension, TransitOptions};
use crate::geometry::{MockComponent, MockGeometry, MockToken, PolyGeometry};
use crate::polyring::parse_poly;
use crate::scalar::{rat, Rational};
use crate::tower::{SuspensionTower, TowerPoint};

/// `u·v = x + y²` as a suspension of the plane.
pub fn plane() -> Suspension<PolyGeometry> {
    let b = SuspensionTower::affine(["x", "y"]).unwrap();
    let f = parse_poly("x + y^2", b.vars()).unwrap();
    let t = b.suspend(f, "u", "v").unwrap();
    PolyGeometry::new(t, TransitOptions::default())
        .suspension()
        .unwrap()
}

/// `(x, y, u, v)` as a level point of [`plane`].
pub fn lp(c: [i64; 4]) -> LevelPoint<TowerPoint> {
    LevelPoint::new(
        TowerPoint::new(vec![rat(c[0]), rat(c[1])]),
        rat(c[2]),
        rat(c[3]),
    )
}

/// Mock suspension with the given `(label, range)` components and
/// `(name, component, value)` tokens.
pub fn mock(comps: &[(&str, &str)], tokens: &[(&str, &str, Rational)]) -> Suspension<MockGeometry> {
    let comps = comps
        .iter()
        .map(|(l, r)| MockComponent {
            label: l.to_string(),
            range: r.parse().unwrap(),
        })
        .collect();
    let tokens = tokens
        .iter()
        .map(|(n, c, v)| MockToken {
            name: n.to_string(),
            component: c.to_string(),
            value: v.clone(),
        })
        .collect();
    Suspension::new(
        MockGeometry::new(comps, tokens, 2).unwrap(),
        (),
        TransitOptions::default(),
    )
}

/// The point over token `name` with the given `v`; `u` is solved for.
pub fn mp(susp: &Suspension<MockGeometry>, name: &str, v: Rational) -> LevelPoint<String> {
    let value = susp.base.token(name).unwrap().value;
    LevelPoint::new(name.to_string(), value / &v, v)
}
