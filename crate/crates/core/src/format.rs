//! Versioned text formats: instances, certificates and flexibility reports.
//!
//! All three are TOML. Rationals are written as `"p/q"` strings (integers
//! are also accepted on input), polynomials in the tower's variable names.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::derivation::DEFAULT_NILPOTENCY_CAP;
use crate::error::{Error, Result};
use crate::geometry::{MockComponent, MockGeometry, MockToken, RangeDescriptor};
use crate::polyring::{parse_poly, Vars};
use crate::scalar::{fmt_rational, parse_rational, Rational};
use crate::tower::{Side, SuspensionTower, TowerPoint};
use crate::transit::{LevelPoint, Multiplier, TransitOptions};
use crate::Polynomial;

pub const INSTANCE_FORMAT: &str = "susp-instance/1";
pub const CERTIFICATE_FORMAT: &str = "susp-certificate/1";
pub const FLEX_FORMAT: &str = "susp-flex/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Int(i64),
    Text(String),
}

impl RawValue {
    fn text(&self) -> String {
        match self {
            RawValue::Int(n) => n.to_string(),
            RawValue::Text(s) => s.clone(),
        }
    }

    fn rational(&self) -> Result<Rational> {
        parse_rational(&self.text())
    }

    fn of(r: &Rational) -> Self {
        RawValue::Text(fmt_rational(r))
    }
}

type RawPoint = BTreeMap<String, RawValue>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    format: String,
    geometry: RawGeometry,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    levels: Vec<RawLevel>,
    #[serde(default, skip_serializing_if = "RawOptions::is_empty")]
    options: RawOptions,
    #[serde(default)]
    sources: Vec<RawPoint>,
    #[serde(default)]
    targets: Vec<RawPoint>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    components: Vec<RawComponent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tokens: Vec<RawToken>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    u: String,
    v: String,
    f: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    designated: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    label: String,
    range: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToken {
    name: String,
    component: String,
    value: RawValue,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nilpotency_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generic_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    section_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon_fraction: Option<RawValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_contractions: Option<usize>,
}

impl RawOptions {
    fn is_empty(&self) -> bool {
        self.nilpotency_cap.is_none()
            && self.generic_cap.is_none()
            && self.section_cap.is_none()
            && self.epsilon_fraction.is_none()
            && self.max_contractions.is_none()
    }
}

/// Engine settings of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub nilpotency_cap: usize,
    pub transit: TransitOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            nilpotency_cap: DEFAULT_NILPOTENCY_CAP,
            transit: TransitOptions::default(),
        }
    }
}

/// Instance points are kept as written; relations are checked by the
/// commands, so that `describe` can report off-variety points.
#[derive(Debug, Clone)]
pub enum InstanceBody {
    Affine {
        tower: SuspensionTower,
        sources: Vec<TowerPoint>,
        targets: Vec<TowerPoint>,
    },
    Mock {
        components: Vec<MockComponent>,
        tokens: Vec<MockToken>,
        dim: usize,
        names: (String, String),
        sources: Vec<LevelPoint<String>>,
        targets: Vec<LevelPoint<String>>,
    },
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub options: RunOptions,
    pub body: InstanceBody,
    canonical: String,
}

fn toml_error(e: impl std::fmt::Display) -> Error {
    Error::Format(e.to_string().trim_end().to_string())
}

fn check_format(found: &str, expected: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::Format(format!(
            "expected format `{expected}`, found `{found}`"
        )))
    }
}

fn affine_point(tower: &SuspensionTower, raw: &RawPoint) -> Result<TowerPoint> {
    for name in raw.keys() {
        tower.vars().index(name)?;
    }
    let coords = tower
        .vars()
        .iter()
        .map(|n| {
            raw.get(n.as_str())
                .ok_or_else(|| Error::MissingVariable(n.to_string()))
                .and_then(RawValue::rational)
        })
        .collect::<Result<_>>()?;
    Ok(TowerPoint::new(coords))
}

fn mock_point(raw: &RawPoint, names: &(String, String)) -> Result<LevelPoint<String>> {
    for key in raw.keys() {
        if key != "base" && *key != names.0 && *key != names.1 {
            return Err(Error::UnknownVariable(key.clone()));
        }
    }
    let get = |k: &str| {
        raw.get(k)
            .ok_or_else(|| Error::MissingVariable(k.to_string()))
    };
    Ok(LevelPoint::new(
        get("base")?.text(),
        get(&names.0)?.rational()?,
        get(&names.1)?.rational()?,
    ))
}

impl Instance {
    pub fn parse(text: &str) -> Result<Instance> {
        let raw: RawInstance = toml::from_str(text).map_err(toml_error)?;
        check_format(&raw.format, INSTANCE_FORMAT)?;
        let mut options = RunOptions::default();
        let o = &raw.options;
        if let Some(c) = o.nilpotency_cap {
            options.nilpotency_cap = c;
        }
        if let Some(c) = o.generic_cap {
            options.transit.generic_cap = c;
        }
        if let Some(c) = o.section_cap {
            options.transit.section_cap = c;
        }
        if let Some(c) = o.max_contractions {
            options.transit.max_contractions = c;
        }
        if let Some(e) = &o.epsilon_fraction {
            options.transit.epsilon_fraction = e.rational()?;
        }
        let body = match raw.geometry.kind.as_str() {
            "affine" => {
                if raw.geometry.dim.is_some()
                    || !raw.geometry.components.is_empty()
                    || !raw.geometry.tokens.is_empty()
                {
                    return Err(Error::Format(
                        "affine geometry takes only `variables`".into(),
                    ));
                }
                let mut tower = SuspensionTower::affine(raw.geometry.variables.iter().cloned())?;
                for lvl in &raw.levels {
                    let f = parse_poly(&lvl.f, tower.vars())?;
                    tower = match &lvl.designated {
                        Some(d) => {
                            let i = tower.vars().index(d)?;
                            tower.suspend_with(f, &lvl.u, &lvl.v, Some(i))?
                        }
                        None => tower.suspend(f, &lvl.u, &lvl.v)?,
                    };
                }
                let pts = |raw: &[RawPoint]| {
                    raw.iter()
                        .map(|p| affine_point(&tower, p))
                        .collect::<Result<Vec<_>>>()
                };
                InstanceBody::Affine {
                    sources: pts(&raw.sources)?,
                    targets: pts(&raw.targets)?,
                    tower,
                }
            }
            "mock" => {
                if !raw.levels.is_empty() || !raw.geometry.variables.is_empty() {
                    return Err(Error::Format(
                        "mock geometry takes no variables or levels".into(),
                    ));
                }
                let names = (
                    raw.geometry.u.clone().unwrap_or_else(|| "u".into()),
                    raw.geometry.v.clone().unwrap_or_else(|| "v".into()),
                );
                if names.0 == names.1 || names.0 == "base" || names.1 == "base" {
                    return Err(Error::VariableClash(names.1.clone()));
                }
                let components = raw
                    .geometry
                    .components
                    .iter()
                    .map(|c| {
                        Ok(MockComponent {
                            label: c.label.clone(),
                            range: c.range.parse::<RangeDescriptor>()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let tokens = raw
                    .geometry
                    .tokens
                    .iter()
                    .map(|t| {
                        Ok(MockToken {
                            name: t.name.clone(),
                            component: t.component.clone(),
                            value: t.value.rational()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let dim = raw.geometry.dim.unwrap_or(2);
                MockGeometry::new(components.clone(), tokens.clone(), dim)?;
                let pts = |raw: &[RawPoint]| {
                    raw.iter()
                        .map(|p| mock_point(p, &names))
                        .collect::<Result<Vec<_>>>()
                };
                InstanceBody::Mock {
                    sources: pts(&raw.sources)?,
                    targets: pts(&raw.targets)?,
                    components,
                    tokens,
                    dim,
                    names,
                }
            }
            other => return Err(Error::Format(format!("unknown geometry kind `{other}`"))),
        };
        Instance::from_body(body, options)
    }

    pub fn affine(
        tower: SuspensionTower,
        sources: Vec<TowerPoint>,
        targets: Vec<TowerPoint>,
        options: RunOptions,
    ) -> Result<Instance> {
        for p in sources.iter().chain(&targets) {
            if p.len() != tower.ambient() {
                return Err(Error::VariableMismatch {
                    left: p.len(),
                    right: tower.ambient(),
                });
            }
        }
        Instance::from_body(
            InstanceBody::Affine {
                tower,
                sources,
                targets,
            },
            options,
        )
    }

    /// Fiber coordinates are named `u` and `v`.
    pub fn mock(
        components: Vec<MockComponent>,
        tokens: Vec<MockToken>,
        dim: usize,
        sources: Vec<LevelPoint<String>>,
        targets: Vec<LevelPoint<String>>,
        options: RunOptions,
    ) -> Result<Instance> {
        MockGeometry::new(components.clone(), tokens.clone(), dim)?;
        let body = InstanceBody::Mock {
            components,
            tokens,
            dim,
            names: ("u".into(), "v".into()),
            sources,
            targets,
        };
        Instance::from_body(body, options)
    }

    fn from_body(body: InstanceBody, options: RunOptions) -> Result<Instance> {
        let mut inst = Instance {
            options,
            body,
            canonical: String::new(),
        };
        inst.canonical = inst.render(true)?;
        Ok(inst)
    }

    /// Without options, the text covers only the geometry and the points.
    fn render(&self, with_options: bool) -> Result<String> {
        let o = &self.options;
        let options = if !with_options {
            RawOptions::default()
        } else {
            RawOptions {
                nilpotency_cap: Some(o.nilpotency_cap),
                generic_cap: Some(o.transit.generic_cap),
                section_cap: Some(o.transit.section_cap),
                epsilon_fraction: Some(RawValue::of(&o.transit.epsilon_fraction)),
                max_contractions: Some(o.transit.max_contractions),
            }
        };
        let raw = match &self.body {
            InstanceBody::Affine {
                tower,
                sources,
                targets,
            } => {
                let vars = tower.vars();
                let point = |p: &TowerPoint| -> RawPoint {
                    vars.iter()
                        .zip(&p.coords)
                        .map(|(n, c)| (n.to_string(), RawValue::of(c)))
                        .collect()
                };
                RawInstance {
                    format: INSTANCE_FORMAT.into(),
                    geometry: RawGeometry {
                        kind: "affine".into(),
                        variables: vars
                            .iter()
                            .take(tower.base_dim())
                            .map(|n| n.to_string())
                            .collect(),
                        dim: None,
                        u: None,
                        v: None,
                        components: Vec::new(),
                        tokens: Vec::new(),
                    },
                    levels: tower
                        .levels()
                        .iter()
                        .map(|l| RawLevel {
                            u: vars.name(l.u).to_string(),
                            v: vars.name(l.v).to_string(),
                            f: l.f.to_text(vars),
                            designated: l.designated.map(|d| vars.name(d).to_string()),
                        })
                        .collect(),
                    options,
                    sources: sources.iter().map(point).collect(),
                    targets: targets.iter().map(point).collect(),
                }
            }
            InstanceBody::Mock {
                components,
                tokens,
                dim,
                names,
                sources,
                targets,
            } => {
                let point = |p: &LevelPoint<String>| -> RawPoint {
                    [
                        ("base".to_string(), RawValue::Text(p.base.clone())),
                        (names.0.clone(), RawValue::of(&p.u)),
                        (names.1.clone(), RawValue::of(&p.v)),
                    ]
                    .into_iter()
                    .collect()
                };
                RawInstance {
                    format: INSTANCE_FORMAT.into(),
                    geometry: RawGeometry {
                        kind: "mock".into(),
                        variables: Vec::new(),
                        dim: Some(*dim),
                        u: Some(names.0.clone()),
                        v: Some(names.1.clone()),
                        components: components
                            .iter()
                            .map(|c| RawComponent {
                                label: c.label.clone(),
                                range: c.range.to_string(),
                            })
                            .collect(),
                        tokens: tokens.iter().map(raw_token).collect(),
                    },
                    levels: Vec::new(),
                    options,
                    sources: sources.iter().map(point).collect(),
                    targets: targets.iter().map(point).collect(),
                }
            }
        };
        toml::to_string(&raw).map_err(toml_error)
    }

    /// Normalized text of the instance, with every option spelled out.
    pub fn canonical_text(&self) -> &str {
        &self.canonical
    }

    /// SHA-256 of the canonical text without options, in hex; engine caps
    /// do not change which problem a certificate answers.
    pub fn digest(&self) -> String {
        let text = self.render(false).expect("rendered once already");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn len(&self) -> usize {
        match &self.body {
            InstanceBody::Affine { sources, .. } => sources.len(),
            InstanceBody::Mock { sources, .. } => sources.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn raw_token(t: &MockToken) -> RawToken {
    RawToken {
        name: t.name.clone(),
        component: t.component.clone(),
        value: RawValue::of(&t.value),
    }
}

/// What a certificate step does to the ring or to the tokens.
#[derive(Debug, Clone, PartialEq)]
pub enum StepAction {
    /// Images of the generators under the derivation.
    Derivation(Vec<Polynomial>),
    /// Non-fixed pairs of a token permutation.
    Permutation(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertStep {
    pub stage: String,
    pub level: usize,
    pub side: Option<Side>,
    pub multiplier: Option<Multiplier>,
    pub time: Rational,
    pub action: StepAction,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub steps: usize,
    pub pool_size: usize,
    pub alphas: Vec<(String, Rational)>,
    pub contractions: usize,
    pub max_nilpotency: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub instance_digest: String,
    /// Ring generators for affine towers; `base` and the fiber names for
    /// the mock geometry.
    pub variables: Vec<String>,
    pub summary: Summary,
    /// Tokens created while solving a mock instance.
    pub tokens: Vec<MockToken>,
    pub steps: Vec<CertStep>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    format: String,
    instance_digest: String,
    variables: Vec<String>,
    summary: RawSummary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tokens: Vec<RawToken>,
    #[serde(default)]
    steps: Vec<RawStep>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSummary {
    steps: usize,
    pool_size: usize,
    alphas: Vec<[String; 2]>,
    contractions: usize,
    max_nilpotency: usize,
    verified: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    stage: String,
    level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    side: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multiplier: Option<Vec<String>>,
    time: RawValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    images: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<[String; 2]>>,
}

fn parse_side(s: &str) -> Result<Side> {
    match s {
        "u" => Ok(Side::U),
        "v" => Ok(Side::V),
        _ => Err(Error::Format(format!(
            "side must be `u` or `v`, found `{s}`"
        ))),
    }
}

impl Certificate {
    pub fn parse(text: &str) -> Result<Certificate> {
        let raw: RawCertificate = toml::from_str(text).map_err(toml_error)?;
        check_format(&raw.format, CERTIFICATE_FORMAT)?;
        let vars = Vars::new(raw.variables.iter().cloned())?;
        let steps = raw
            .steps
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let action = match (&s.images, &s.permutation) {
                    (Some(images), None) => StepAction::Derivation(
                        images
                            .iter()
                            .map(|t| parse_poly(t, &vars))
                            .collect::<Result<_>>()?,
                    ),
                    (None, Some(pairs)) => StepAction::Permutation(
                        pairs.iter().map(|[a, b]| (a.clone(), b.clone())).collect(),
                    ),
                    _ => {
                        return Err(Error::Format(format!(
                            "step {k} needs exactly one of `images` and `permutation`"
                        )))
                    }
                };
                let multiplier = match &s.multiplier {
                    Some(cs) => Some(Multiplier::from_coeffs(
                        cs.iter()
                            .map(|c| parse_rational(c))
                            .collect::<Result<_>>()?,
                    )?),
                    None => None,
                };
                Ok(CertStep {
                    stage: s.stage.clone(),
                    level: s.level,
                    side: s.side.as_deref().map(parse_side).transpose()?,
                    multiplier,
                    time: s.time.rational()?,
                    action,
                })
            })
            .collect::<Result<_>>()?;
        let summary = Summary {
            steps: raw.summary.steps,
            pool_size: raw.summary.pool_size,
            alphas: raw
                .summary
                .alphas
                .iter()
                .map(|[c, a]| Ok((c.clone(), parse_rational(a)?)))
                .collect::<Result<_>>()?,
            contractions: raw.summary.contractions,
            max_nilpotency: raw.summary.max_nilpotency,
            verified: raw.summary.verified,
        };
        let tokens = raw
            .tokens
            .iter()
            .map(|t| {
                Ok(MockToken {
                    name: t.name.clone(),
                    component: t.component.clone(),
                    value: t.value.rational()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Certificate {
            instance_digest: raw.instance_digest,
            variables: raw.variables,
            summary,
            tokens,
            steps,
        })
    }

    pub fn to_text(&self) -> Result<String> {
        let vars = Vars::new(self.variables.iter().cloned())?;
        let raw = RawCertificate {
            format: CERTIFICATE_FORMAT.into(),
            instance_digest: self.instance_digest.clone(),
            variables: self.variables.clone(),
            summary: RawSummary {
                steps: self.summary.steps,
                pool_size: self.summary.pool_size,
                alphas: self
                    .summary
                    .alphas
                    .iter()
                    .map(|(c, a)| [c.clone(), fmt_rational(a)])
                    .collect(),
                contractions: self.summary.contractions,
                max_nilpotency: self.summary.max_nilpotency,
                verified: self.summary.verified,
            },
            tokens: self.tokens.iter().map(raw_token).collect(),
            steps: self
                .steps
                .iter()
                .map(|s| {
                    let (images, permutation) = match &s.action {
                        StepAction::Derivation(images) => (
                            Some(images.iter().map(|p| p.to_text(&vars)).collect()),
                            None,
                        ),
                        StepAction::Permutation(pairs) => (
                            None,
                            Some(pairs.iter().map(|(a, b)| [a.clone(), b.clone()]).collect()),
                        ),
                    };
                    RawStep {
                        stage: s.stage.clone(),
                        level: s.level,
                        side: s.side.map(|x| x.to_string()),
                        multiplier: s
                            .multiplier
                            .as_ref()
                            .map(|q| q.coeffs().iter().map(fmt_rational).collect()),
                        time: RawValue::of(&s.time),
                        images,
                        permutation,
                    }
                })
                .collect(),
        };
        toml::to_string(&raw).map_err(toml_error)
    }
}

/// Rank certificate of the tangent vectors of lifted flows at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexReport {
    pub variables: Vec<String>,
    pub point: TowerPoint,
    pub matrix: Vec<Vec<Rational>>,
    pub rank: usize,
    pub dim: usize,
    /// Generator images of the derivation behind each row.
    pub derivations: Vec<Vec<Polynomial>>,
}

impl FlexReport {
    pub fn is_valid(&self) -> bool {
        self.rank == self.dim
    }

    pub fn to_text(&self) -> Result<String> {
        let vars = Vars::new(self.variables.iter().cloned())?;
        let mut out = String::new();
        let q = |s: &str| toml::Value::String(s.to_string()).to_string();
        let _ = writeln!(out, "format = {}", q(FLEX_FORMAT));
        let _ = writeln!(out, "rank = {}", self.rank);
        let _ = writeln!(out, "dim = {}", self.dim);
        let _ = writeln!(out, "valid = {}", self.is_valid());
        let _ = writeln!(out, "matrix = [");
        for row in &self.matrix {
            let cells: Vec<_> = row.iter().map(|c| q(&fmt_rational(c))).collect();
            let _ = writeln!(out, "    [{}],", cells.join(", "));
        }
        let _ = writeln!(out, "]");
        let _ = writeln!(out, "\n[point]");
        for (n, c) in self.variables.iter().zip(&self.point.coords) {
            let _ = writeln!(out, "{n} = {}", q(&fmt_rational(c)));
        }
        for d in &self.derivations {
            let _ = writeln!(out, "\n[[derivations]]");
            let images: Vec<_> = d.iter().map(|p| q(&p.to_text(&vars))).collect();
            let _ = writeln!(out, "images = [{}]", images.join(", "));
        }
        Ok(out)
    }
}

/// A point given as `name=value` pairs separated by commas or whitespace.
pub fn parse_assignments(text: &str) -> Result<BTreeMap<String, Rational>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("expected name=value, found `{kv}`")))?;
            Ok((k.trim().to_string(), parse_rational(v)?))
        })
        .collect()
}

/// A point from a TOML table of `name = value` entries.
pub fn parse_point_table(text: &str) -> Result<BTreeMap<String, Rational>> {
    let raw: RawPoint = toml::from_str(text).map_err(toml_error)?;
    raw.into_iter()
        .map(|(k, v)| Ok((k, v.rational()?)))
        .collect()
}
