//! A base geometry of opaque tokens with declared `f`-values and ranges.
//!
//! No polynomial `f` on `𝔸ⁿ` has a bounded range, so the bounded cases of
//! the α-selection and multi-component bookkeeping are exercised here. Flows
//! are permutations of tokens inside components, realizable only at times
//! `0` and `±1`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use super::{BaseGeometry, ComponentLabel, RangeDescriptor};
use crate::error::{Error, Result};
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct MockComponent {
    pub label: String,
    pub range: RangeDescriptor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockToken {
    pub name: String,
    pub component: String,
    pub value: Rational,
}

/// A permutation of tokens, stored as its non-fixed pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct MockFlow {
    pub pairs: Vec<(String, String)>,
}

impl MockFlow {
    fn image(&self, p: &str, inverse: bool) -> String {
        self.pairs
            .iter()
            .find(|(a, b)| if inverse { b == p } else { a == p })
            .map(|(a, b)| if inverse { a.clone() } else { b.clone() })
            .unwrap_or_else(|| p.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct MockGeometry {
    components: Vec<MockComponent>,
    tokens: Arc<Mutex<Vec<MockToken>>>,
    dim: usize,
}

impl MockGeometry {
    /// Token values must lie in the closure of their component's range.
    pub fn new(components: Vec<MockComponent>, tokens: Vec<MockToken>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Precondition(
                "mock dimension must be at least 2".into(),
            ));
        }
        let mut labels = BTreeSet::new();
        for c in &components {
            if !labels.insert(c.label.as_str()) || c.label.contains('/') || c.label.is_empty() {
                return Err(Error::Format(format!(
                    "bad or repeated component `{}`",
                    c.label
                )));
            }
        }
        let geo = MockGeometry {
            components,
            tokens: Arc::new(Mutex::new(Vec::new())),
            dim,
        };
        let mut names = BTreeSet::new();
        for t in &tokens {
            if !names.insert(t.name.clone()) {
                return Err(Error::Format(format!("repeated token `{}`", t.name)));
            }
            let range = &geo.component(&t.component)?.range;
            let (lo, hi) = range.bounds();
            if lo.is_some_and(|a| t.value < a) || hi.is_some_and(|b| t.value > b) {
                return Err(Error::OutOfRange {
                    value: t.value.clone(),
                    range: range.to_string(),
                });
            }
        }
        *geo.lock() = tokens;
        Ok(geo)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Vec<MockToken>> {
        self.tokens.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn components(&self) -> &[MockComponent] {
        &self.components
    }

    pub fn component(&self, label: &str) -> Result<&MockComponent> {
        self.components
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::ComponentMismatch(format!("unknown mock component `{label}`")))
    }

    pub fn token(&self, name: &str) -> Result<MockToken> {
        self.lock()
            .iter()
            .find(|t| t.name == name)
            .cloned()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn tokens(&self) -> Vec<MockToken> {
        self.lock().clone()
    }

    /// Allocates a fresh token `t{N}`.
    pub fn add_token(&self, component: &str, value: Rational) -> Result<String> {
        self.component(component)?;
        let mut tokens = self.lock();
        let name = (tokens.len()..)
            .map(|k| format!("t{k}"))
            .find(|n| tokens.iter().all(|t| t.name != *n))
            .expect("unbounded");
        tokens.push(MockToken {
            name: name.clone(),
            component: component.to_string(),
            value,
        });
        Ok(name)
    }

    fn unsupported(what: &str) -> Error {
        Error::MockUnrealizable(format!("mock geometry has no {what}"))
    }
}

impl BaseGeometry for MockGeometry {
    type Point = String;
    type Flow = MockFlow;
    type Function = ();

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _f: &(), p: &String) -> Result<Rational> {
        Ok(self.token(p)?.value)
    }

    fn flow_point(&self, flow: &MockFlow, time: &Rational, p: &String) -> Result<String> {
        self.token(p)?;
        if time.is_zero() {
            Ok(p.clone())
        } else if time.is_one() {
            Ok(flow.image(p, false))
        } else if *time == -Rational::one() {
            Ok(flow.image(p, true))
        } else {
            Err(Error::MockUnrealizable(format!(
                "permutation flow at time {time}"
            )))
        }
    }

    fn flow_rate(&self, _flow: &MockFlow, _f: &(), _p: &String) -> Result<Rational> {
        Err(Self::unsupported("derivatives"))
    }

    /// One permutation, completing the partial matching by closing each
    /// chain into a cycle.
    fn interpolate(
        &self,
        sources: &[String],
        targets: &[String],
    ) -> Result<Vec<(MockFlow, Rational)>> {
        if sources.len() != targets.len() {
            return Err(Error::ComponentMismatch(format!(
                "{} sources for {} targets",
                sources.len(),
                targets.len()
            )));
        }
        let mut map = BTreeMap::new();
        for (i, (s, t)) in sources.iter().zip(targets).enumerate() {
            if sources[..i].contains(s) || targets[..i].contains(t) {
                return Err(Error::Precondition(
                    "mock points must be pairwise distinct".into(),
                ));
            }
            let (cs, ct) = (self.token(s)?.component, self.token(t)?.component);
            if cs != ct {
                return Err(Error::ComponentMismatch(format!(
                    "`{s}` in {cs}, `{t}` in {ct}"
                )));
            }
            map.insert(s.clone(), t.clone());
        }
        let heads: Vec<_> = sources
            .iter()
            .filter(|s| !targets.contains(s))
            .cloned()
            .collect();
        for head in heads {
            let mut end = head.clone();
            while let Some(next) = map.get(&end) {
                end = next.clone();
            }
            map.insert(end, head);
        }
        let pairs: Vec<_> = map.into_iter().filter(|(a, b)| a != b).collect();
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        Ok(vec![(MockFlow { pairs }, Rational::one())])
    }

    fn flexibility_flows(&self, _p: &String) -> Result<Vec<MockFlow>> {
        Err(Self::unsupported("flexibility flows"))
    }

    fn tangent(&self, _flow: &MockFlow, _p: &String) -> Result<Vec<Rational>> {
        Err(Self::unsupported("tangent vectors"))
    }

    fn section(
        &self,
        _f: &(),
        value: &Rational,
        comp: &ComponentLabel,
        _avoid: &[String],
    ) -> Result<String> {
        let label = comp.to_string();
        let range = &self.component(&label)?.range;
        if !range.contains_interior(value) {
            return Err(Error::OutOfRange {
                value: value.clone(),
                range: range.to_string(),
            });
        }
        self.add_token(&label, value.clone())
    }

    fn range_of(&self, _f: &(), comp: &ComponentLabel) -> Result<RangeDescriptor> {
        Ok(self.component(&comp.to_string())?.range.clone())
    }

    fn component_of(&self, p: &String) -> Result<ComponentLabel> {
        Ok(ComponentLabel::new(self.token(p)?.component))
    }

    fn is_regular(&self, p: &String) -> bool {
        self.token(p).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn geo() -> MockGeometry {
        let comps = vec![
            MockComponent {
                label: "A".into(),
                range: "[1, 4]".parse().unwrap(),
            },
            MockComponent {
                label: "B".into(),
                range: "[1, 4]".parse().unwrap(),
            },
        ];
        let tok = |n: &str, c: &str, v| MockToken {
            name: n.into(),
            component: c.into(),
            value: rat(v),
        };
        let tokens = vec![
            tok("a", "A", 2),
            tok("b", "A", 3),
            tok("c", "A", 2),
            tok("d", "B", 2),
        ];
        MockGeometry::new(comps, tokens, 2).unwrap()
    }

    #[test]
    fn permutation_completion() {
        let g = geo();
        let src = vec!["a".to_string(), "b".to_string()];
        let tgt = vec!["b".to_string(), "c".to_string()];
        let steps = g.interpolate(&src, &tgt).unwrap();
        let (fl, t) = &steps[0];
        for (s, d) in src.iter().zip(&tgt) {
            assert_eq!(&g.flow_point(fl, t, s).unwrap(), d);
            assert_eq!(&g.flow_point(fl, &-t, d).unwrap(), s);
        }
        assert_eq!(g.flow_point(fl, t, &"c".to_string()).unwrap(), "a");
        assert_eq!(g.flow_point(fl, &rat(0), &"a".to_string()).unwrap(), "a");
        assert!(matches!(
            g.flow_point(fl, &rat(2), &"a".to_string()),
            Err(Error::MockUnrealizable(_))
        ));
        assert!(matches!(
            g.interpolate(&["a".into()], &["d".into()]),
            Err(Error::ComponentMismatch(_))
        ));
    }

    #[test]
    fn sections_and_ranges() {
        let g = geo();
        let comp = ComponentLabel::new("A");
        assert!(matches!(
            g.section(&(), &rat(5), &comp, &[]),
            Err(Error::OutOfRange { .. })
        ));
        let t = g.section(&(), &rat(3), &comp, &[]).unwrap();
        assert_eq!(g.value(&(), &t).unwrap(), rat(3));
        assert_eq!(g.component_of(&t).unwrap(), comp);
        assert_eq!(
            g.range_of(&(), &comp).unwrap(),
            RangeDescriptor::BoundedPositive(rat(1), rat(4))
        );
        let t2 = g.section(&(), &rat(3), &comp, &[]).unwrap();
        assert_ne!(t, t2);
    }
}
