//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Signed};
use rand::Rng;

use lipone::builder::{check_stream_conditions, BreakpointStream, LipFunction, Toward};
use lipone::cantor::{
    build_full_measure_sosd, density_window_check, levelk_open, CantorStage, LevelSchedule, WindowCheckOptions,
};
use lipone::density::{sosd_certify, Verdict};
use lipone::estimator::lip_scan;
use lipone::interval::{ExtendedPoint, Interval};
use lipone::rational::{int, pow2, ratio, Rational};
use lipone::verify::{bundled_chains, random_rational, rng, Suite, VerifyConfig};
use lipone::BreakpointRule;

const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

fn timed(limit: Duration, body: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    match outcome {
        Ok(detail) if elapsed <= limit => Ok(format!("{detail}; {:.2}s", elapsed.as_secs_f64())),
        Ok(detail) => Err(format!("{detail}; took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs())),
        Err(detail) => Err(detail),
    }
}

fn two_chains() -> Vec<(&'static str, lipone::NestedChain)> {
    bundled_chains().into_iter().filter(|(name, _)| *name != "spread").collect()
}

fn lipschitz_growth() -> Outcome {
    timed(Duration::from_secs(60), || {
        let mut r = rng(SEED);
        let mut details = Vec::new();
        for (name, chain) in two_chains() {
            let f = LipFunction::new(chain);
            let pairs: Vec<(Rational, Rational)> = (0..10_000)
                .map(|_| (random_rational(&mut r, &int(-2), &int(5)), random_rational(&mut r, &int(-2), &int(5))))
                .collect();
            let report = f.lipschitz_certificate(&pairs);
            if !report.passed() {
                let v = &report.violations[0];
                return Err(format!("{name}: {} violations, first ({}, {})", report.violations.len(), v.a, v.b));
            }
            details.push(format!("{name}: {} pairs, 0 violations", report.checked));
        }
        Ok(details.join(", "))
    })
}

fn envelope_bound() -> Outcome {
    let mut r = rng(SEED + 1);
    let mut details = Vec::new();
    for (name, chain) in two_chains() {
        let f = LipFunction::new(chain.clone());
        let mut tested = 0;
        for level in 1..=chain.len() as u32 {
            for _ in 0..1000 {
                let x = random_rational(&mut r, &int(-2), &int(5));
                let value = f.eval_fn(level, &x);
                tested += 1;
                if value.is_negative() {
                    return Err(format!("{name}: f_{level}({x}) = {value} < 0"));
                }
                // The upper envelope constrains the correction terms, n ≥ 2.
                if level >= 2 && value > f.envelope(level, &x) {
                    return Err(format!("{name}: f_{level}({x}) = {value} above the envelope"));
                }
            }
        }
        details.push(format!("{name}: {tested} evaluations"));
    }
    Ok(format!("{}; upper bound checked for n >= 2, f_1 checked for sign", details.join(", ")))
}

fn breakpoint_conditions() -> Outcome {
    let mut streams = 0;
    let mut queries = 0;
    let bounded = Interval::open(int(1), int(2));
    let half_line = Interval::new(ExtendedPoint::Finite(int(1)), ExtendedPoint::PosInf, false, false).expect("valid");
    for level in [2u32, 3, 4] {
        for (interval, toward) in [(&bounded, Toward::Lower), (&bounded, Toward::Upper), (&half_line, Toward::Lower)] {
            let mut stream = BreakpointStream::new(interval, level, toward, BreakpointRule::default()).expect("valid");
            let first_gap = stream.gap(0).expect("first gap");
            // x = a + 2^-j (or b - 2^-j) for every j ≤ 12 inside the stream's half.
            let gaps: Vec<Rational> = (0..=12).map(|j| pow2(-j)).filter(|h| *h <= first_gap).collect();
            queries += gaps.len();
            check_stream_conditions(interval, &mut stream, 1000, &gaps)
                .map_err(|v| format!("{interval} level {level} {toward:?}: {v}"))?;
            for h in &gaps {
                let x = match toward {
                    Toward::Lower => int(1) + h,
                    Toward::Upper => int(2) - h,
                };
                let (lo, hi) = stream.cell_of(&x).ok_or_else(|| format!("{x} not bracketed"))?;
                if !(lo < x && x <= hi) && !(lo <= x && x < hi) {
                    return Err(format!("cell ({lo}, {hi}) misses {x}"));
                }
            }
            streams += 1;
        }
    }
    Ok(format!("{streams} streams x 1000 breakpoints, {queries} queries bracketed"))
}

fn lip_desk_scale() -> Outcome {
    timed(Duration::from_secs(30), || {
        let (_, unit) = bundled_chains().swap_remove(0);
        let f = LipFunction::new(unit);
        let scan = |x: Rational| lip_scan(&f, &x, &pow2(-4), &pow2(-16), &ratio(1, 2), 64).map_err(|e| e.to_string());
        let third = scan(ratio(1, 3))?;
        let three = scan(int(3))?;
        let one = scan(int(1))?;
        let detail = format!(
            "lip_lower(1/3) = {}, Lip_upper(3) = {}, lip_lower(1) = {}",
            third.lip_lower, three.big_lip_upper, one.lip_lower
        );
        if third.lip_lower == int(1) && three.big_lip_upper <= ratio(2, 64) && one.lip_lower == int(1) {
            Ok(detail)
        } else {
            Err(detail)
        }
    })
}

fn cantor_measures() -> Outcome {
    timed(Duration::from_secs(60), || {
        for k in 0..=6u32 {
            let m = match levelk_open(&int(0), &int(1), k).map_err(|e| e.to_string())?.measure() {
                ExtendedPoint::Finite(m) => m,
                other => return Err(format!("k = {k}: measure {other}")),
            };
            let expected = num_traits::pow(ratio(9, 11), k as usize);
            if m != expected {
                return Err(format!("k = {k}: {m} != {expected}"));
            }
        }
        let stage = CantorStage::build_f_infinity(&LevelSchedule::default_for_depth(3), 3).map_err(|e| e.to_string())?;
        // Independent oracle: each generation keeps 1 - (9/11)^l of what is left.
        let oracle: Rational =
            [12u32, 16, 20].iter().map(|&l| Rational::one() - num_traits::pow(ratio(9, 11), l as usize)).product();
        let complement = stage.complement_measure();
        if complement != oracle {
            return Err(format!("ledger {complement} != oracle {oracle}"));
        }
        if complement < ratio(1, 2) {
            return Err(format!("complement {complement} < 1/2"));
        }
        Ok(format!("(9/11)^k exact for k = 0..6; depth-3 complement {:.6} >= 1/2", lipone::rational::approx_f64(&complement)))
    })
}

fn density_windows() -> Outcome {
    let mut details = Vec::new();
    for depth in 1..=2usize {
        let stage = CantorStage::new((int(0), int(1)), vec![2; depth], true, true).map_err(|e| e.to_string())?;
        let options = WindowCheckOptions { critical: true, all_levels: false, limit: 1 << 20 };
        let report = density_window_check(&stage, options).map_err(|e| e.to_string())?;
        if !report.passed || report.max_density > ratio(1, 2) {
            return Err(format!("depth {depth}: max density {}", report.max_density));
        }
        details.push(format!("depth {depth}: {} components, {} windows, max {}", report.components, report.rows.len(), report.max_density));
    }
    Ok(details.join("; "))
}

fn full_measure_stage() -> Outcome {
    let window = Interval::closed(int(0), int(1));
    let asm = build_full_measure_sosd(&window, &ratio(1, 4), 3, 1).map_err(|e| e.to_string())?;
    let uncovered = asm.uncovered();
    if uncovered > ratio(1, 4) {
        return Err(format!("uncovered {uncovered} > 1/4"));
    }
    // Disjointness: consecutive tiles meet in one point, owned by exactly one stage.
    for pair in asm.stages.windows(2) {
        let shared = pair[0].window().1;
        if pair[0].window().1 != pair[1].window().0 {
            return Err("tiles are not adjacent".into());
        }
        if pair[0].contains_point(shared) == pair[1].contains_point(shared) {
            return Err(format!("tile point {shared} is not owned by exactly one stage"));
        }
    }
    let mut r = rng(SEED + 7);
    let points = asm.sample_points(20, r.gen());
    let mut worst: Option<Rational> = None;
    for x in &points {
        let cert = sosd_certify(&asm, x, &pow2(-4), &pow2(-12), &ratio(1, 2), 1_000_000).map_err(|e| e.to_string())?;
        if cert.verdict != Verdict::Pass {
            return Err(format!("x = {x}: {:?}, smallest value {}", cert.verdict, cert.min_found));
        }
        let bound = cert.lower_bound.expect("PASS carries a bound");
        worst = Some(worst.map_or(bound.clone(), |w| if bound < w { bound } else { w }));
    }
    Ok(format!(
        "uncovered {:.6} <= 1/4; 20 points certified, min_max_density >= {}",
        lipone::rational::approx_f64(&uncovered),
        worst.expect("twenty points")
    ))
}

fn negative_control() -> Outcome {
    let config = VerifyConfig {
        suites: vec![Suite::Builder],
        rule: BreakpointRule::unchecked(int(2)),
        ..Default::default()
    };
    let first = lipone::verify::run(&config);
    let second = lipone::verify::run(&config);
    let names_two = |rep: &lipone::verify::VerifyReport| {
        rep.checks.iter().any(|c| c.status == "FAIL" && c.detail.contains("condition (II)"))
    };
    if first.passed || !names_two(&first) || first != second {
        return Err("library verify did not fail condition (II) deterministically".into());
    }
    let output = Command::new(env!("CARGO_BIN_EXE_lipone"))
        .args(["verify", "--suite", "builder", "--breakpoint-factor", "2"])
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    if output.status.code() != Some(1) || !stdout.contains("condition (II)") {
        return Err(format!("cli exit {:?}", output.status.code()));
    }
    Ok("factor 2 fails condition (II) in the library and the CLI (exit 1)".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 Lipschitz growth bound", lipschitz_growth),
        ("2 envelope bound", envelope_bound),
        ("3 breakpoint conditions", breakpoint_conditions),
        ("4 lip at desk scale", lip_desk_scale),
        ("5 Cantor measures", cantor_measures),
        ("6 density windows", density_windows),
        ("7 full-measure SOSD stage", full_measure_stage),
        ("8 negative control", negative_control),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
