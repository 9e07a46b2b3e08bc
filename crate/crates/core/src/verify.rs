//! Seeded invariant suite: interval laws, envelope and breakpoint conditions,
//! the Lipschitz certificate, estimator enclosures, Cantor measures and
//! density windows. Every check is an exact comparison.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::builder::{check_stream_conditions, BreakpointRule, BreakpointStream, LipFunction, NestedChain, Toward};
use crate::cantor::{
    self, build_full_measure_sosd, density_window_check, levelk_open, neighbourhood_violations, CantorStage,
    LevelSchedule, WindowCheckOptions,
};
use crate::density::{sosd_certify, sosd_scan, Verdict};
use crate::estimator::{lip_scan, m_f, OscillationQuery};
use crate::interval::{ExtendedPoint, Interval, IntervalSet, MeasuredSet};
use crate::rational::{int, pow2, ratio, Rational};

pub const DEFAULT_SEED: u64 = 0x5EED_11F1;

/// Check groups selectable with `--suite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Interval,
    Builder,
    Estimator,
    Cantor,
    Density,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Interval, Suite::Builder, Suite::Estimator, Suite::Cantor, Suite::Density];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Interval => "interval",
            Suite::Builder => "builder",
            Suite::Estimator => "estimator",
            Suite::Cantor => "cantor",
            Suite::Density => "density",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub status: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub suites: Vec<Suite>,
    /// Depth of the Cantor ledger and density-window checks.
    pub depth: u32,
    /// Breakpoint rule used by the builder suite (the default passes).
    pub rule: BreakpointRule,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: DEFAULT_SEED, suites: Suite::ALL.to_vec(), depth: 2, rule: BreakpointRule::default() }
    }
}

/// Uniform rational `p/q` in `[lo, hi]` with `q ≤ 1024`.
pub fn random_rational(rng: &mut impl Rng, lo: &Rational, hi: &Rational) -> Rational {
    let q: i64 = rng.gen_range(1..=1024);
    let qr = int(q);
    let p_lo = (lo * &qr).ceil().to_integer();
    let p_hi = (hi * &qr).floor().to_integer();
    let span: i64 = (&p_hi - &p_lo).try_into().expect("ranges are small");
    let offset: i64 = rng.gen_range(0..=span);
    Rational::new(p_lo + offset, q.into())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn closed(a: i64, b: i64) -> Interval {
    Interval::closed(int(a), int(b))
}

/// The chains shipped in `examples/`: `([0,1])`, `([0,1] ∪ [2,3], [0,3])` and
/// a three-stage chain with unbounded contiguous intervals on both sides.
pub fn bundled_chains() -> Vec<(&'static str, NestedChain)> {
    let unit = NestedChain::new(vec![IntervalSet::from_interval(closed(0, 1))]).expect("valid");
    let two = NestedChain::new(vec![
        IntervalSet::from_intervals([closed(0, 1), closed(2, 3)]),
        IntervalSet::from_interval(closed(0, 3)),
    ])
    .expect("valid");
    let spread = NestedChain::new(vec![
        IntervalSet::from_interval(closed(0, 1)),
        IntervalSet::from_intervals([closed(-10, -3), closed(0, 1), closed(3, 10)]),
        IntervalSet::from_intervals([closed(-10, -3), closed(-2, 1), closed(2, 10)]),
    ])
    .expect("valid");
    vec![("unit", unit), ("two-stage", two), ("spread", spread)]
}

struct Recorder {
    checks: Vec<CheckResult>,
}

impl Recorder {
    fn record(&mut self, suite: Suite, name: impl Into<String>, outcome: Result<String, String>) {
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        self.checks.push(CheckResult { suite, name: name.into(), status, detail });
    }
}

pub fn run(config: &VerifyConfig) -> VerifyReport {
    let mut rec = Recorder { checks: Vec::new() };
    let mut suites = config.suites.clone();
    suites.sort();
    suites.dedup();
    for suite in suites {
        // Each suite gets its own stream so selecting suites does not shift the others.
        let mut r = rng(config.seed ^ (suite as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        match suite {
            Suite::Interval => interval_suite(&mut rec, &mut r),
            Suite::Builder => builder_suite(&mut rec, &mut r, &config.rule),
            Suite::Estimator => estimator_suite(&mut rec, &mut r),
            Suite::Cantor => cantor_suite(&mut rec, &mut r, config.depth),
            Suite::Density => density_suite(&mut rec, &mut r),
        }
    }
    let passed = rec.checks.iter().all(|c| c.status == "PASS");
    VerifyReport { seed: config.seed, passed, checks: rec.checks }
}

fn random_set(r: &mut ChaCha8Rng) -> IntervalSet {
    let n = r.gen_range(0..6);
    IntervalSet::from_intervals((0..n).map(|_| {
        let a: i64 = r.gen_range(-64..64);
        let len: i64 = r.gen_range(0..24);
        let (lc, hc) = if len == 0 { (true, true) } else { (r.gen(), r.gen()) };
        Interval::new(
            ExtendedPoint::Finite(ratio(a, 16)),
            ExtendedPoint::Finite(ratio(a + len, 16)),
            lc,
            hc,
        )
        .expect("valid by construction")
    }))
}

fn finite(m: ExtendedPoint) -> Rational {
    match m {
        ExtendedPoint::Finite(v) => v,
        _ => unreachable!("bounded sets have finite measure"),
    }
}

fn interval_suite(rec: &mut Recorder, r: &mut ChaCha8Rng) {
    let trials = 200;
    let window = Interval::closed(int(-8), int(8));
    let mut failures = Vec::new();
    for i in 0..trials {
        let (a, b) = (random_set(r), random_set(r));
        let union = a.union(&b);
        let inter = a.intersect(&b);
        if union != b.union(&a) || inter != b.intersect(&a) {
            failures.push(format!("trial {i}: commutativity"));
        }
        let lhs = finite(union.measure()) + finite(inter.measure());
        let rhs = finite(a.measure()) + finite(b.measure());
        if lhs != rhs {
            failures.push(format!("trial {i}: inclusion-exclusion"));
        }
        if a.complement().complement() != a {
            failures.push(format!("trial {i}: double complement"));
        }
        if union.complement_in(&window) != a.complement_in(&window).intersect(&b.complement_in(&window)) {
            failures.push(format!("trial {i}: De Morgan"));
        }
        if IntervalSet::from_json(&a.to_json()).ok().as_ref() != Some(&a) {
            failures.push(format!("trial {i}: JSON round trip"));
        }
        if IntervalSet::from_intervals(a.parts().iter().cloned()) != a {
            failures.push(format!("trial {i}: canonical form is a fixed point"));
        }
    }
    rec.record(
        Suite::Interval,
        "set algebra laws",
        if failures.is_empty() { Ok(format!("{trials} random pairs")) } else { Err(failures.join("; ")) },
    );
}

fn builder_suite(rec: &mut Recorder, r: &mut ChaCha8Rng, rule: &BreakpointRule) {
    let queries: Vec<Rational> = (1..=12).map(|j| pow2(-j)).collect();
    for (label, interval) in [
        ("(1,2)", Interval::open(int(1), int(2))),
        ("(1,inf)", Interval::new(ExtendedPoint::Finite(int(1)), ExtendedPoint::PosInf, false, false).expect("valid")),
    ] {
        for level in [2u32, 3, 4] {
            let mut stream =
                BreakpointStream::new(&interval, level, Toward::Lower, rule.clone()).expect("finite lower end");
            let reachable: Vec<Rational> =
                queries.iter().filter(|h| **h <= stream.gap(0).expect("first gap")).cloned().collect();
            let outcome = check_stream_conditions(&interval, &mut stream, 1000, &reachable)
                .map(|()| format!("1000 breakpoints, {} queries bracketed", reachable.len()))
                .map_err(|v| v.to_string());
            rec.record(Suite::Builder, format!("breakpoint conditions {label} level {level}"), outcome);
        }
    }

    for (name, chain) in bundled_chains() {
        let f = LipFunction::with_rule(chain.clone(), rule.clone());
        let (lo, hi) = (int(-2), int(5));
        let mut envelope_failures = Vec::new();
        let mut tested = 0;
        for level in 2..=chain.len() as u32 {
            for _ in 0..200 {
                let x = random_rational(r, &lo, &hi);
                let value = f.eval_fn(level, &x);
                tested += 1;
                if value.is_negative() || value > f.envelope(level, &x) {
                    envelope_failures.push(format!("f_{level}({x}) = {value}"));
                }
            }
        }
        rec.record(
            Suite::Builder,
            format!("envelope bound [{name}]"),
            if envelope_failures.is_empty() {
                Ok(format!("{tested} points"))
            } else {
                Err(envelope_failures.into_iter().take(5).collect::<Vec<_>>().join("; "))
            },
        );
        let pairs: Vec<(Rational, Rational)> =
            (0..300).map(|_| (random_rational(r, &lo, &hi), random_rational(r, &lo, &hi))).collect();
        let report = f.lipschitz_certificate(&pairs);
        rec.record(
            Suite::Builder,
            format!("Lipschitz certificate [{name}]"),
            if report.passed() {
                Ok(format!("{} pairs", report.checked))
            } else {
                let v = &report.violations[0];
                Err(format!("{} violations, first at ({}, {})", report.violations.len(), v.a, v.b))
            },
        );
        let last = chain.len() as u32 + 1;
        let x = random_rational(r, &lo, &hi);
        rec.record(
            Suite::Builder,
            format!("levels beyond N vanish [{name}]"),
            if f.eval_fn(last, &x).is_zero() { Ok(format!("f_{last}({x}) = 0")) } else { Err(format!("f_{last}({x}) != 0")) },
        );
    }
}

fn estimator_suite(rec: &mut Recorder, r: &mut ChaCha8Rng) {
    let (_, unit) = bundled_chains().swap_remove(0);
    let f = LipFunction::new(unit);
    type Check = (&'static str, Rational, Box<dyn Fn(&crate::estimator::LipEstimate) -> bool>);
    let checks: [Check; 3] = [
        ("lip_lower = 1 at 1/3", ratio(1, 3), Box::new(|e| e.lip_lower == int(1))),
        ("Lip_upper within slack at 3", int(3), Box::new(|e| e.big_lip_upper <= ratio(2, 64))),
        ("lip_lower = 1 at the boundary 1", int(1), Box::new(|e| e.lip_lower == int(1))),
    ];
    for (name, x, ok) in checks {
        let outcome = lip_scan(&f, &x, &pow2(-4), &pow2(-16), &ratio(1, 2), 64)
            .map_err(|e| e.to_string())
            .and_then(|e| {
                let detail = format!("lip in [{}, {}], Lip in [{}, {}]", e.lip_lower, e.lip_upper, e.big_lip_lower, e.big_lip_upper);
                if ok(&e) && e.scale_inconsistency().is_none() {
                    Ok(detail)
                } else {
                    Err(detail)
                }
            });
        rec.record(Suite::Estimator, name, outcome);
    }

    let (_, two) = bundled_chains().swap_remove(1);
    let g = LipFunction::new(two);
    let mut failures = Vec::new();
    for _ in 0..12 {
        let x = random_rational(r, &int(-1), &int(4));
        let rad = random_rational(r, &ratio(1, 64), &ratio(1, 2));
        if rad.is_zero() {
            continue;
        }
        let coarse = m_f(&g, &OscillationQuery { x: x.clone(), r: rad.clone(), refinement: 8 });
        let fine = m_f(&g, &OscillationQuery { x: x.clone(), r: rad.clone(), refinement: 32 });
        match (coarse, fine) {
            (Ok(c), Ok(f)) if c.0 <= f.0 && f.1 <= c.1 && f.0 <= f.1 && f.1 <= Rational::one() => {}
            _ => failures.push(format!("x = {x}, r = {rad}")),
        }
    }
    rec.record(
        Suite::Estimator,
        "nested refinement tightens enclosures",
        if failures.is_empty() { Ok("12 seeded queries".into()) } else { Err(failures.join("; ")) },
    );
}

fn cantor_suite(rec: &mut Recorder, r: &mut ChaCha8Rng, depth: u32) {
    let mut bad = Vec::new();
    let mut previous = Rational::one();
    for k in 0..=8 {
        let m = finite(levelk_open(&int(0), &int(1), k).expect("small level").measure());
        if m != num_traits::pow(cantor::rho(), k as usize) || (k > 0 && m != &previous * cantor::rho()) {
            bad.push(format!("k = {k}: {m}"));
        }
        previous = m;
    }
    rec.record(
        Suite::Cantor,
        "level-k measures equal (9/11)^k",
        if bad.is_empty() { Ok("k = 0..8".into()) } else { Err(bad.join("; ")) },
    );

    let mut bad = Vec::new();
    for _ in 0..8 {
        let a = random_rational(r, &int(-3), &int(3));
        let b = &a + random_rational(r, &ratio(1, 8), &int(4));
        for k in 0..=4 {
            let direct = levelk_open(&a, &b, k).expect("small level");
            let scaled = levelk_open(&int(0), &int(1), k).expect("small level").affine_image(&a, &(&b - &a));
            if direct != scaled {
                bad.push(format!("({a}, {b}) k = {k}"));
            }
        }
    }
    rec.record(
        Suite::Cantor,
        "self-similarity",
        if bad.is_empty() { Ok("8 random windows, k = 0..4".into()) } else { Err(bad.join("; ")) },
    );

    let mut bad = Vec::new();
    for k in 1..=3 {
        match neighbourhood_violations(&int(0), &int(1), k) {
            Ok(v) if v.is_empty() => {}
            Ok(v) => bad.push(format!("k = {k}: {}", v[0])),
            Err(e) => bad.push(e.to_string()),
        }
    }
    rec.record(
        Suite::Cantor,
        "finest components have open 7t neighbourhoods",
        if bad.is_empty() { Ok("k = 1..3".into()) } else { Err(bad.join("; ")) },
    );

    let ledger_depth = depth.max(1);
    let schedule = LevelSchedule::default_for_depth(ledger_depth);
    let outcome = CantorStage::build_f_infinity(&schedule, ledger_depth)
        .map_err(|e| e.to_string())
        .and_then(|stage| {
            let removed: Rational = stage.ledger().iter().map(|e| e.removed.clone()).sum();
            let consistent = Rational::one() - &removed == stage.complement_measure();
            let decreasing = stage.ledger().windows(2).all(|w| w[1].complement < w[0].complement);
            let detail = format!("levels {:?}, complement {}", stage.levels(), stage.complement_measure());
            if consistent && decreasing && stage.complement_measure() >= Rational::one() - &schedule.budget {
                Ok(detail)
            } else {
                Err(detail)
            }
        });
    rec.record(Suite::Cantor, format!("default schedule ledger at depth {ledger_depth}"), outcome);

    let small = CantorStage::new((int(0), int(1)), vec![2, 1], true, true).expect("valid");
    let outcome = small
        .open_measure_by_summation(100_000)
        .map_err(|e| e.to_string())
        .and_then(|m| if m == small.removed_measure() { Ok(format!("{m}")) } else { Err(format!("{m} != {}", small.removed_measure())) });
    rec.record(Suite::Cantor, "ledger matches explicit summation", outcome);

    for d in 1..=depth {
        let stage = CantorStage::new((int(0), int(1)), vec![2; d as usize], true, true).expect("valid");
        let options = WindowCheckOptions { critical: true, all_levels: false, limit: 1 << 20 };
        let outcome = density_window_check(&stage, options).map_err(|e| e.to_string()).and_then(|rep| {
            let detail = format!("{} components, max density {}", rep.components, rep.max_density);
            if rep.passed {
                Ok(detail)
            } else {
                Err(detail)
            }
        });
        rec.record(Suite::Cantor, format!("density windows at depth {d} (levels 2)"), outcome);
    }
}

fn density_suite(rec: &mut Recorder, r: &mut ChaCha8Rng) {
    let unit = IntervalSet::from_interval(closed(0, 1));
    let outcome = sosd_scan(&unit, &int(1), &ratio(1, 4), &pow2(-10), &ratio(9, 10))
        .map_err(|e| e.to_string())
        .and_then(|rep| {
            if rep.verdict == Verdict::Pass && rep.min_max_density == int(1) {
                Ok("endpoint of [0,1] is one-sided dense".into())
            } else {
                Err(format!("{}", rep.min_max_density))
            }
        });
    rec.record(Suite::Density, "closed interval endpoint", outcome);

    let with_point = IntervalSet::from_intervals([closed(0, 1), Interval::point(int(5))]);
    let outcome = sosd_scan(&with_point, &int(5), &ratio(1, 4), &pow2(-10), &ratio(9, 10))
        .map_err(|e| e.to_string())
        .and_then(|rep| {
            if rep.verdict == Verdict::Fail {
                Ok("isolated point fails".into())
            } else {
                Err("isolated point passed".into())
            }
        });
    rec.record(Suite::Density, "isolated point", outcome);

    let outcome = build_full_measure_sosd(&closed(0, 1), &ratio(1, 4), 3, 1)
        .map_err(|e| e.to_string())
        .and_then(|asm| {
            let uncovered = asm.uncovered();
            if uncovered > ratio(1, 4) {
                return Err(format!("uncovered {uncovered}"));
            }
            let seed = r.gen();
            for x in asm.sample_points(5, seed) {
                let cert = sosd_certify(&asm, &x, &pow2(-4), &pow2(-12), &ratio(1, 2), 100_000)
                    .map_err(|e| e.to_string())?;
                if cert.verdict != Verdict::Pass {
                    return Err(format!("x = {x}: {:?}", cert.verdict));
                }
            }
            Ok(format!("uncovered {uncovered}; 5 sample points certified"))
        });
    rec.record(Suite::Density, "full-measure stage", outcome);

    let outcome = {
        let stage = CantorStage::new((int(0), int(1)), vec![2, 2], true, true).expect("valid");
        let closed_set = stage.closed_set(10_000).expect("small stage");
        let mut bad = Vec::new();
        for _ in 0..20 {
            let lo = random_rational(r, &int(0), &int(1));
            let hi = random_rational(r, &lo, &int(1));
            if stage.measure_between(&lo, &hi) != closed_set.measure_between(&lo, &hi) {
                bad.push(format!("[{lo}, {hi}]"));
            }
        }
        if bad.is_empty() {
            Ok("20 random windows".into())
        } else {
            Err(bad.join("; "))
        }
    };
    rec.record(Suite::Density, "implicit stage measure matches explicit set", outcome);
}
