//! Acceptance suite: one line per criterion, exact arithmetic throughout.
//!
//! Runs as a plain binary so the verdict lines are always printed:
//! `cargo test -p susp-core --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_traits::{One, Zero};
use rand::Rng;

use common::*;
use susp::commands::{cmd_certify_flex, cmd_solve, cmd_verify};
use susp::format::{Certificate, Instance, RunOptions, StepAction};
use susp::geometry::{MockGeometry, PolyGeometry, RangeDescriptor};
use susp::polyring::parse_poly;
use susp::scalar::{rat, ratio};
use susp::tower::{Side, SuspensionTower, TowerPoint};
use susp::transit::{
    avoid_zero, choose_alpha, level_transit, lift_lnd, LevelPoint, Session, StabSpec, Suspension,
    TransitOptions,
};
use susp::{Derivation, Polynomial, Rational};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn transport_runs(tower: SuspensionTower, runs: u64, max_m: usize, seed: u64) -> Outcome {
    let depth = tower.depth();
    let mut steps = 0;
    for run in 0..runs {
        let mut r = rng(seed + run);
        let m = 1 + (run as usize) % max_m;
        let gen = |r: &mut _| {
            let k = random_kind(r);
            if depth == 1 {
                point1(r, k)
            } else {
                point2(r, k)
            }
        };
        let sources = distinct(&mut r, m, gen);
        let targets = distinct(&mut r, m, gen);
        let inst = ok(
            Instance::affine(
                tower.clone(),
                sources.clone(),
                targets.clone(),
                RunOptions::default(),
            ),
            "instance",
        )?;
        let sol = ok(cmd_solve(&inst), &format!("run {run}: solve"))?;
        let text = ok(sol.certificate.to_text(), "print")?;
        let back = ok(Certificate::parse(&text), "parse")?;
        ensure!(
            back == sol.certificate,
            "run {run}: certificate does not round-trip"
        );
        let report = ok(cmd_verify(&inst, &back), "verify")?;
        ensure!(
            report.passed(),
            "run {run}: {}",
            report.first_failure().unwrap_or_default()
        );
        let relation = report.group("relation").unwrap();
        ensure!(
            relation.total == back.steps.len(),
            "run {run}: relation checks missing"
        );

        for (k, st) in back.steps.iter().enumerate() {
            let StepAction::Derivation(images) = &st.action else {
                unreachable!()
            };
            let step = susp::FlowStep::new(Derivation::new(images.clone(), ""), st.time.clone());
            let probes = distinct(&mut r, 2, gen);
            let coords: Vec<_> = probes.iter().map(|p| p.coords.clone()).collect();
            let script = susp::AutomorphismScript::new(vec![step]);
            for img in ok(
                script.apply_points(&coords, inst.options.nilpotency_cap),
                "probe",
            )? {
                ensure!(
                    tower.check_point(img).is_ok(),
                    "run {run}: step {k} sends a probe off the variety"
                );
            }
        }
        steps += back.steps.len();
    }
    Ok(format!("{runs} instances, {steps} steps verified"))
}

fn criterion_1() -> Outcome {
    transport_runs(depth1(), 50, 4, 1_000)
}

fn criterion_2() -> Outcome {
    transport_runs(depth2(), 20, 3, 2_000)
}

fn level_point(r: &mut rand_chacha::ChaCha8Rng, v: &Rational) -> LevelPoint<TowerPoint> {
    let base = TowerPoint::new(vec![small(r), small(r)]);
    let u = f1(&base) / v;
    LevelPoint::new(base, u, v.clone())
}

fn criterion_3() -> Outcome {
    let tower = depth1();
    let geo = PolyGeometry::new(tower.clone(), TransitOptions::default());
    let susp = ok(geo.suspension(), "suspension")?;
    let mut checked = 0;
    for run in 0..25u64 {
        let mut r = rng(3_000 + run);
        let side = if run % 2 == 0 { Side::V } else { Side::U };
        let c0 = nonzero(&mut r);
        let c1 = loop {
            let c = nonzero(&mut r);
            if c != c0 {
                break c;
            }
        };
        let on = |r: &mut _, c: &Rational| {
            let p = level_point(r, c);
            match side {
                Side::V => p,
                Side::U => LevelPoint::new(p.base, p.v, p.u),
            }
        };
        let m = 1 + (run as usize) % 3;
        let mut sources: Vec<LevelPoint<TowerPoint>> = Vec::new();
        let mut targets: Vec<LevelPoint<TowerPoint>> = Vec::new();
        while sources.len() < m {
            let (s, t) = (on(&mut r, &c0), on(&mut r, &c0));
            if !sources.iter().any(|p| p.base == s.base)
                && !targets.iter().any(|p| p.base == t.base)
            {
                sources.push(s);
                targets.push(t);
            }
        }
        let spec = StabSpec {
            side,
            fixed_values: vec![c1.clone()],
            normalize_at: Some(c0.clone()),
            fix_zero: false,
        };
        let steps = ok(
            level_transit(&susp, &spec, &sources, &targets),
            "level transit",
        )?;
        let script = lifted_script(&geo, &steps);
        for st in &script.steps {
            ensure!(
                tower.preserves_relations(&st.derivation),
                "run {run}: a step breaks the relation"
            );
        }
        let fixed: Vec<_> = (0..10)
            .map(|_| PolyGeometry::join(&on(&mut r, &c1)))
            .collect();
        let coords: Vec<_> = fixed.iter().map(|p| p.coords.clone()).collect();
        let images = ok(script.apply_points(&coords, 64), "apply")?;
        ensure!(
            images == coords,
            "run {run}: a point of the fixed level moved"
        );
        let src: Vec<_> = sources
            .iter()
            .map(|p| PolyGeometry::join(p).coords)
            .collect();
        let tgt: Vec<_> = targets
            .iter()
            .map(|p| PolyGeometry::join(p).coords)
            .collect();
        ensure!(
            ok(script.apply_points(&src, 64), "apply")? == tgt,
            "run {run}: sources miss targets"
        );
        checked += fixed.len();
    }
    Ok(format!("25 runs, {checked} fixed-level points unmoved"))
}

fn criterion_4() -> Outcome {
    let tower = depth1();
    let geo = PolyGeometry::new(tower.clone(), TransitOptions::default());
    let susp = ok(geo.suspension(), "suspension")?;
    let (mut case1, mut case2) = (0, 0);
    for run in 0..25u64 {
        let mut r = rng(4_000 + run);
        let m = 2 + (run as usize) % 4;
        let mut kinds = vec![
            Kind::Origin,
            if run % 2 == 0 {
                Kind::UZero
            } else {
                Kind::VZero
            },
        ];
        while kinds.len() < m {
            kinds.push(random_kind(&mut r));
        }
        let mut pts: Vec<TowerPoint> = Vec::new();
        for k in kinds {
            loop {
                let p = point1(&mut r, k);
                if !pts.contains(&p) {
                    pts.push(p);
                    break;
                }
            }
        }
        shuffle(&mut r, &mut pts);
        case1 += pts
            .iter()
            .filter(|p| p.coords[2].is_zero() != p.coords[3].is_zero())
            .count();
        case2 += pts
            .iter()
            .filter(|p| p.coords[2].is_zero() && p.coords[3].is_zero())
            .count();
        let lps: Vec<_> = pts.iter().map(|p| geo.split(p)).collect();
        let steps = ok(avoid_zero(&susp, &lps), &format!("run {run}: avoid_zero"))?;
        let script = lifted_script(&geo, &steps);
        let hyper = |c: &Vec<Rational>| !c[2].is_zero() && !c[3].is_zero();
        for st in &script.steps {
            ensure!(
                tower.preserves_relations(&st.derivation),
                "run {run}: a step breaks the relation"
            );
        }
        let start: Vec<_> = pts.iter().map(|p| p.coords.clone()).collect();
        let cur = ok(script.apply_points(&start, 64), "apply")?;
        for (a, b) in start.iter().zip(&cur) {
            ensure!(
                !hyper(a) || hyper(b),
                "run {run}: a hyperbolic point lost hyperbolicity"
            );
        }
        ensure!(
            cur.iter().all(hyper),
            "run {run}: a point is still not hyperbolic"
        );
        let structural: Vec<_> = lps
            .iter()
            .map(|p| {
                susp.apply_steps(&steps, p)
                    .map(|q| PolyGeometry::join(&q).coords)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure!(
            structural == cur,
            "run {run}: structural and symbolic images differ"
        );
    }
    Ok(format!(
        "25 sets, {case1} axis points and {case2} origin points hyperbolized"
    ))
}

/// Smallest `k` with `base^k ≥ spread`.
fn log_ceiling(spread: &Rational, base: &Rational) -> usize {
    let mut k = 0;
    let mut acc = Rational::one();
    while acc < *spread {
        acc *= base;
        k += 1;
    }
    k
}

fn criterion_5() -> Outcome {
    let eps = ratio(3, 4);
    let bound = (rat(1) + &eps) / (rat(4) - &eps);
    let range: RangeDescriptor = "[1, 4]".parse().unwrap();
    let mut iterations = 0;
    let mut max_spread = Rational::zero();
    for run in 0..25u64 {
        let mut r = rng(5_000 + run);
        let mut b = MockBuilder::new();
        let v1 = ratio(1, r.gen_range(1..=100));
        let spread = if run == 0 {
            rat(1_000_000)
        } else {
            rat(10).pow(r.gen_range(0..6)) * ratio(r.gen_range(10..=99), 10)
        };
        let sign = if run % 2 == 0 { rat(1) } else { rat(-1) };
        let p1 = b.point("A", interior_value(&mut r, 1, 4), &sign * &v1);
        let p2 = b.point("A", interior_value(&mut r, 1, 4), &sign * &v1 * &spread);
        if p1.u == p2.u {
            continue;
        }
        let geo = ok(
            MockGeometry::new(vec![component("A", "[1, 4]")], b.tokens.clone(), 2),
            "mock",
        )?;
        let susp = Suspension::new(geo, (), TransitOptions::default());
        let pts = vec![p1, p2];
        let mut session = ok(Session::new(&susp, pts.clone()), "session")?;
        let choice = ok(
            choose_alpha(&mut session, &[0, 1], &[]),
            &format!("run {run}: choose_alpha"),
        )?;
        ensure!(
            choice.epsilon.as_ref() == Some(&eps),
            "run {run}: epsilon {:?}",
            choice.epsilon
        );
        for (k, rec) in choice.records.iter().enumerate() {
            ensure!(
                rec.bound == bound,
                "run {run}: recorded bound {}",
                rec.bound
            );
            ensure!(
                rec.factor == &rec.product_after / &rec.product_before,
                "run {run}: factor record"
            );
            ensure!(
                rec.factor <= bound,
                "run {run}: iteration {k} contracted only by {}",
                rec.factor
            );
        }
        let limit = log_ceiling(&spread, &(rat(1) / &bound)) + 1;
        ensure!(
            choice.records.len() <= limit,
            "run {run}: {} iterations exceed {limit}",
            choice.records.len()
        );
        for p in session.points() {
            ensure!(
                range.contains_interior(&(&choice.alpha * &p.v)),
                "run {run}: alpha {} puts a point outside (1, 4)",
                choice.alpha
            );
        }
        for (p, q) in pts.iter().zip(session.points()) {
            ensure!(
                ok(susp.apply_steps(session.steps(), p), "replay")? == *q,
                "run {run}: replay differs"
            );
        }
        iterations += choice.records.len();
        max_spread = max_spread.max(spread);
    }
    Ok(format!(
        "25 runs, spreads up to {max_spread}, {iterations} contractions within bounds"
    ))
}

fn criterion_6() -> Outcome {
    let tower = depth1();
    let inst = ok(
        Instance::affine(tower.clone(), vec![], vec![], RunOptions::default()),
        "instance",
    )?;
    let p = TowerPoint::new(vec![rat(1), rat(1), rat(1), rat(2)]);
    let rep = ok(cmd_certify_flex(&inst, &tower.named(&p)), "worked example")?;
    let expected: Vec<Vec<Rational>> = [[2, 0, 1, 0], [0, 2, 2, 0], [1, 0, 0, 1]]
        .iter()
        .map(|row| row.iter().map(|&c| rat(c)).collect())
        .collect();
    ensure!(
        rep.matrix == expected,
        "worked example gave {:?}",
        rep.matrix
    );
    ensure!(
        rep.rank == 3 && rep.dim == 3,
        "worked example rank {}",
        rep.rank
    );
    let mut count = 0;
    for (tower, seed) in [(depth1(), 6_000u64), (depth2(), 6_500)] {
        let inst = ok(
            Instance::affine(tower.clone(), vec![], vec![], RunOptions::default()),
            "instance",
        )?;
        for run in 0..25u64 {
            let mut r = rng(seed + run);
            let p = if tower.depth() == 1 {
                point1(&mut r, Kind::Hyperbolic)
            } else {
                point2(&mut r, Kind::Hyperbolic)
            };
            let rep = ok(cmd_certify_flex(&inst, &tower.named(&p)), "certify")?;
            ensure!(
                rep.dim == tower.dim() && rep.rank == rep.dim,
                "depth {}: rank {} of {} at {:?}",
                tower.depth(),
                rep.rank,
                tower.dim(),
                p.coords
            );
            for d in &rep.derivations {
                let d = Derivation::new(d.clone(), "");
                ensure!(
                    tower.preserves_relations(&d),
                    "a certificate row breaks a relation"
                );
            }
            count += 1;
        }
    }
    Ok(format!(
        "worked matrix exact, {count} random points at full rank"
    ))
}

fn random_base_lnd(r: &mut rand_chacha::ChaCha8Rng) -> Derivation {
    let vars = susp::polyring::Vars::new(["x", "y"]).unwrap();
    let (target, source) = if r.gen_bool(0.5) { (0, "y") } else { (1, "x") };
    let deg = r.gen_range(0..=2);
    let mut text = small(r).to_string();
    for k in 1..=deg {
        text = format!("{text} + ({})*{source}^{k}", small(r));
    }
    let p = parse_poly(&text, &vars).unwrap();
    let mut images = vec![Polynomial::zero(), Polynomial::zero()];
    images[target] = p;
    Derivation::new(images, "base")
}

fn random_multiplier(r: &mut rand_chacha::ChaCha8Rng, var: usize) -> Polynomial {
    let z = Polynomial::var(var);
    let c = Polynomial::constant(nonzero(r));
    let d = Polynomial::constant(small(r));
    &z * &(&c + &(&d * &z))
}

fn criterion_7() -> Outcome {
    let t2 = depth2();
    let t1 = depth1();
    let mut terms = 0;
    for run in 0..100u64 {
        let mut r = rng(7_000 + run);
        let side =
            |r: &mut rand_chacha::ChaCha8Rng| if r.gen_bool(0.5) { Side::V } else { Side::U };
        let var = |t: &SuspensionTower, level: usize, s: Side| match s {
            Side::V => t.level(level).v,
            Side::U => t.level(level).u,
        };
        let s1 = side(&mut r);
        let q1 = random_multiplier(&mut r, var(&t1, 1, s1));
        let mut d = ok(lift_lnd(&random_base_lnd(&mut r), &t1, 1, &q1, s1), "lift")?;
        let tower = if run % 2 == 1 {
            let s2 = side(&mut r);
            let q2 = random_multiplier(&mut r, var(&t2, 2, s2));
            d = ok(lift_lnd(&d, &t2, 2, &q2, s2), "lift")?;
            &t2
        } else {
            &t1
        };
        ensure!(
            tower.preserves_relations(&d),
            "run {run}: lift breaks a relation"
        );
        let (s, t) = (small(&mut r), small(&mut r));
        let e = |x: &Rational| ok(d.exp_flow(x, 64), "exp");
        let id = ok(
            susp::PolyEndomorphism::compose(&e(&t)?, &e(&-&t)?),
            "compose",
        )?;
        ensure!(
            id.is_identity(),
            "run {run}: exp(t)∘exp(-t) is not the identity"
        );
        let st = ok(susp::PolyEndomorphism::compose(&e(&s)?, &e(&t)?), "compose")?;
        ensure!(
            st == e(&(&s + &t))?,
            "run {run}: exp(s)∘exp(t) differs from exp(s+t)"
        );
        terms += st.images.iter().map(|p| p.num_terms()).sum::<usize>();
    }
    Ok(format!(
        "100 lifts, group law exact ({terms} image terms compared)"
    ))
}

fn criterion_8() -> Outcome {
    let comps = vec![component("A", "[1, 4]"), component("B", "[-3, -1]")];
    let mut alphas_seen = 0;
    for run in 0..20u64 {
        let mut r = rng(8_000 + run);
        let mut b = MockBuilder::new();
        let mut sources = Vec::new();
        let mut targets = Vec::new();
        // (component, bounds, sign of v)
        let labels = [
            ("A", 1, 4, 1),
            ("A", 1, 4, -1),
            ("B", -3, -1, 1),
            ("B", -3, -1, -1),
        ];
        let mut used = 0;
        for &(c, lo, hi, s) in &labels {
            let n = r.gen_range(0..=2);
            if n > 0 {
                used += 1;
            }
            for _ in 0..n {
                let vs = rat(s) * ratio(r.gen_range(1..=20), r.gen_range(1..=20));
                let vt = rat(s) * ratio(r.gen_range(1..=20), r.gen_range(1..=20));
                sources.push(b.point(c, interior_value(&mut r, lo, hi), vs));
                targets.push(b.point(c, interior_value(&mut r, lo, hi), vt));
            }
        }
        if used < 2 {
            continue;
        }
        let inst = ok(
            Instance::mock(
                comps.clone(),
                b.tokens.clone(),
                2,
                sources.clone(),
                targets.clone(),
                RunOptions::default(),
            ),
            "instance",
        )?;
        let sol = ok(cmd_solve(&inst), &format!("run {run}: solve"))?;
        let plan = sol.plan.clone().unwrap();
        ensure!(
            plan.alphas.len() == used,
            "run {run}: {} alphas for {used} components",
            plan.alphas.len()
        );
        for (i, (_, a)) in plan.alphas.iter().enumerate() {
            ensure!(
                plan.alphas[..i].iter().all(|(_, b)| b != a),
                "run {run}: repeated alpha {a}"
            );
        }
        let mut tokens = b.tokens.clone();
        tokens.extend(sol.certificate.tokens.iter().cloned());
        let geo = ok(MockGeometry::new(comps.clone(), tokens, 2), "mock")?;
        let susp = Suspension::new(geo, (), TransitOptions::default());
        let steps = mock_steps(&sol.certificate.steps);
        for (k, (s, t)) in sources.iter().zip(&targets).enumerate() {
            let label = ok(susp.component_of(s), "component")?;
            let mut p = s.clone();
            for st in &steps {
                p = ok(susp.apply_step(st, &p), "apply")?;
                ensure!(
                    ok(susp.component_of(&p), "component")? == label,
                    "run {run}: point {k} changed component"
                );
            }
            ensure!(p == *t, "run {run}: point {k} ends at {:?}, not {:?}", p, t);
        }
        ensure!(
            ok(cmd_verify(&inst, &sol.certificate), "verify")?.passed(),
            "run {run}: verify failed"
        );
        alphas_seen += plan.alphas.len();
    }
    Ok(format!(
        "20 instances, {alphas_seen} distinct transit levels, components preserved"
    ))
}

fn criterion_9() -> Outcome {
    let tower = depth1();
    let mut rejected = 0;
    for run in 0..10u64 {
        let mut r = rng(9_000 + run);
        let m = 1 + (run as usize) % 3;
        let sources = distinct(&mut r, m, |r| point1(r, Kind::Hyperbolic));
        let targets = distinct(&mut r, m, |r| point1(r, Kind::Hyperbolic));
        let inst = ok(
            Instance::affine(tower.clone(), sources, targets, RunOptions::default()),
            "instance",
        )?;
        let cert = ok(cmd_solve(&inst), "solve")?.certificate;
        let k = cert.steps.len() / 2;

        let mut timed = cert.clone();
        timed.steps[k].time += rat(1);
        let rep = ok(cmd_verify(&inst, &timed), "verify")?;
        ensure!(
            rep.group("relation").unwrap().passed() && rep.group("nilpotency").unwrap().passed(),
            "run {run}: a time change broke a relation check"
        );
        let fail = rep.first_failure().unwrap_or_default();
        ensure!(
            fail.starts_with("endpoint: "),
            "run {run}: time change reported as `{fail}`"
        );

        let mut edited = cert.clone();
        if let StepAction::Derivation(images) = &mut edited.steps[k].action {
            images[2] = &images[2] + &Polynomial::one();
        }
        let rep = ok(cmd_verify(&inst, &edited), "verify")?;
        let relation = rep.group("relation").unwrap();
        ensure!(
            relation.failures.len() == 1
                && relation.failures[0].starts_with(&format!("step {k}: ")),
            "run {run}: image edit reported as {:?}",
            relation.failures
        );
        ensure!(!rep.passed(), "run {run}: edited certificate accepted");
        rejected += 2;
    }
    Ok(format!(
        "{rejected} perturbed certificates rejected at the right check"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("end-to-end transport, depth 1", criterion_1),
        ("end-to-end transport, depth 2", criterion_2),
        ("stabilizer fixes its levels", criterion_3),
        ("hyperbolization", criterion_4),
        ("contraction loop", criterion_5),
        ("flexibility certificates", criterion_6),
        ("group law of lifted flows", criterion_7),
        ("component preservation", criterion_8),
        ("negative controls", criterion_9),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|n| n != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
