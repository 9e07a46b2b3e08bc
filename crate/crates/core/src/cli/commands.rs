use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use num_traits::Signed;
use serde::Serialize;
use serde_json::json;

use lipone::builder::{BreakpointRule, LipFunction, NestedChain};
use lipone::cantor::{self, build_full_measure_sosd, density_window_check, CantorStage, LevelSchedule, WindowCheckOptions};
use lipone::density::{density_profile, sosd_certify, sosd_scan_with_ratio, Verdict};
use lipone::estimator::lip_scan;
use lipone::export;
use lipone::interval::{Interval, IntervalSet};
use lipone::rational::{format_rational, int, ratio};
use lipone::verify::{self, Suite, VerifyConfig};
use lipone::Rational;

use super::{
    read, BuildArgs, CantorCommand, Cli, Command, Format, LipscanArgs, Outcome, ProfileArgs, ScheduleArgs,
    SetCommand, VerifyArgs,
};

/// Evaluation budget per point for certified SOSD scans.
const CERTIFY_BUDGET: usize = 200_000;

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Set(cmd) => cmd_set(cli, cmd),
        Command::Build(args) => cmd_build(cli, args),
        Command::Profile(args) => cmd_profile(cli, args),
        Command::Lipscan(args) => cmd_lipscan(cli, args),
        Command::Cantor(cmd) => cmd_cantor(cli, cmd),
        Command::Verify(args) => cmd_verify(cli, args),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn json_text<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}

fn format_or(cli: &Cli, default: Format, allowed: &[Format], command: &str) -> Result<Format> {
    let format = cli.format.unwrap_or(default);
    if !allowed.contains(&format) {
        bail!("{command} does not support --format {format:?}");
    }
    Ok(format)
}

fn load_set(path: &std::path::PathBuf) -> Result<IntervalSet> {
    IntervalSet::from_json(&read(path)?).with_context(|| format!("invalid set file {}", path.display()))
}

fn load_chain(path: &std::path::PathBuf) -> Result<NestedChain> {
    NestedChain::from_json(&read(path)?).with_context(|| format!("invalid chain file {}", path.display()))
}

fn closed_window(bounds: &[Rational]) -> Result<Interval> {
    let (lo, hi) = (&bounds[0], &bounds[1]);
    if lo > hi {
        bail!("window needs LO <= HI");
    }
    Ok(Interval::closed(lo.clone(), hi.clone()))
}

fn cmd_set(cli: &Cli, cmd: &SetCommand) -> Result<Outcome> {
    let fold = |files: &[std::path::PathBuf], op: fn(&IntervalSet, &IntervalSet) -> IntervalSet| -> Result<IntervalSet> {
        let (first, rest) = files.split_first().ok_or_else(|| anyhow!("at least one set file is required"))?;
        rest.iter().try_fold(load_set(first)?, |acc, path| Ok(op(&acc, &load_set(path)?)))
    };
    format_or(cli, Format::Json, &[Format::Json], "set")?;
    let result = match cmd {
        SetCommand::Union { files } => fold(files, IntervalSet::union)?,
        SetCommand::Intersect { files } => fold(files, IntervalSet::intersect)?,
        SetCommand::Difference { files } => fold(files, IntervalSet::difference)?,
        SetCommand::Complement { file, window } => {
            let set = load_set(file)?;
            match window {
                Some(w) => set.complement_in(&closed_window(w)?),
                None => set.complement(),
            }
        }
        SetCommand::Measure { file, window } => {
            let set = load_set(file)?;
            let text = match window {
                Some(w) => format_rational(&set.measure_in(&closed_window(w)?)?),
                None => set.measure().to_string(),
            };
            emit(cli, &text)?;
            return Ok(Outcome::Success);
        }
    };
    emit(cli, &result.to_json())?;
    Ok(Outcome::Success)
}

fn breakpoint_rule(factor: &Option<Rational>, allow_invalid: bool) -> Result<BreakpointRule> {
    match factor {
        None => Ok(BreakpointRule::default()),
        Some(f) if allow_invalid => {
            // Up to 4 the gaps stay positive at every level n ≥ 2, so streams never stop.
            if !f.is_positive() || *f > ratio(4, 1) {
                bail!("breakpoint factor must lie in (0, 4]");
            }
            Ok(BreakpointRule::unchecked(f.clone()))
        }
        Some(f) => Ok(BreakpointRule::new(f.clone())?),
    }
}

fn cmd_build(cli: &Cli, args: &BuildArgs) -> Result<Outcome> {
    let chain = load_chain(&args.chain)?;
    if args.diagnose {
        for w in chain.sosd_diagnostics(64) {
            eprintln!(
                "warning: stage {} endpoint {} reaches only {} on the scanned range",
                w.stage,
                format_rational(&w.point),
                format_rational(&w.min_max_density)
            );
        }
    }
    let f = LipFunction::with_rule(chain, breakpoint_rule(&args.breakpoint_factor, false)?);
    let mut points = args.eval.clone();
    if let Some(grid) = &args.grid {
        let lo = super::rational(&grid[0]).map_err(|e| anyhow!(e))?;
        let hi = super::rational(&grid[1]).map_err(|e| anyhow!(e))?;
        let n: u32 = grid[2].parse().context("grid point count")?;
        if n == 0 || lo > hi {
            bail!("grid needs LO <= HI and N >= 1");
        }
        let step = (&hi - &lo) / Rational::from_integer(n.into());
        points.extend((0..=n).map(|i| &lo + &step * Rational::from_integer(i.into())));
    }
    if points.is_empty() {
        bail!("give --eval points or a --grid");
    }
    if let Some(level) = args.level {
        if level == 0 {
            bail!("levels start at 1");
        }
    }
    let single = args.eval.len() == 1 && args.grid.is_none() && cli.format.is_none() && cli.out.is_none();
    let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json], "build")?;
    if let (Some(tol), None) = (&args.tolerance, args.level) {
        let rows: Vec<(Rational, Rational, Rational)> = points
            .iter()
            .map(|x| {
                let (v, b) = f.eval_truncated(x, tol);
                (x.clone(), v, b)
            })
            .collect();
        let text = match format {
            Format::Csv => export::truncated_values_csv(&rows, cli.decimal),
            Format::Json => json_text(
                &rows
                    .iter()
                    .map(|(x, v, b)| json!({"x": format_rational(x), "value": format_rational(v), "skipped_bound": format_rational(b)}))
                    .collect::<Vec<_>>(),
            ),
        };
        emit(cli, &text)?;
        return Ok(Outcome::Success);
    }
    let values: Vec<(Rational, Rational)> = points
        .iter()
        .map(|x| {
            let v = match args.level {
                Some(n) => f.eval_fn(n, x),
                None => f.eval(x),
            };
            (x.clone(), v)
        })
        .collect();
    let text = if single {
        format_rational(&values[0].1)
    } else {
        match format {
            Format::Csv => export::values_csv(&values, cli.decimal),
            Format::Json => json_text(
                &values
                    .iter()
                    .map(|(x, v)| json!({"x": format_rational(x), "value": format_rational(v)}))
                    .collect::<Vec<_>>(),
            ),
        }
    };
    emit(cli, &text)?;
    Ok(Outcome::Success)
}

fn cmd_profile(cli: &Cli, args: &ProfileArgs) -> Result<Outcome> {
    let set = load_set(&args.set)?;
    let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json], "profile")?;
    if args.scan {
        let reports = args
            .points
            .iter()
            .map(|x| sosd_scan_with_ratio(&set, x, &args.rmax, &args.rmin, &args.threshold, &args.ratio))
            .collect::<lipone::Result<Vec<_>>>()?;
        let text = match format {
            Format::Csv => export::sosd_csv(&reports, cli.decimal),
            Format::Json => json_text(&reports),
        };
        emit(cli, &text)?;
        let failed = reports.iter().any(|r| r.verdict != Verdict::Pass);
        return Ok(if failed { Outcome::VerificationFailed } else { Outcome::Success });
    }
    if args.radii.is_empty() {
        bail!("give --radii for a profile or --scan for an SOSD scan");
    }
    let profiles = args
        .points
        .iter()
        .map(|x| density_profile(&set, x, &args.radii))
        .collect::<lipone::Result<Vec<_>>>()?;
    let text = match format {
        Format::Csv => export::profiles_csv(&profiles, cli.decimal),
        Format::Json => json_text(&profiles),
    };
    emit(cli, &text)?;
    Ok(Outcome::Success)
}

fn cmd_lipscan(cli: &Cli, args: &LipscanArgs) -> Result<Outcome> {
    let f = LipFunction::new(load_chain(&args.chain)?);
    let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json], "lipscan")?;
    let mut points = args.points.clone();
    points.sort();
    points.dedup();
    let estimates = points
        .iter()
        .map(|x| lip_scan(&f, x, &args.rmax, &args.rmin, &args.ratio, args.refinement))
        .collect::<lipone::Result<Vec<_>>>()?;
    let text = match format {
        Format::Csv => export::lipscan_csv(&estimates, cli.decimal),
        Format::Json => json_text(&estimates),
    };
    emit(cli, &text)?;
    Ok(Outcome::Success)
}

fn schedule_from(args: &ScheduleArgs) -> Result<LevelSchedule> {
    if let Some(path) = &args.schedule {
        return LevelSchedule::from_json(&read(path)?).with_context(|| format!("invalid schedule {}", path.display()));
    }
    if args.levels.is_empty() {
        return Ok(LevelSchedule::default_for_depth(args.depth));
    }
    Ok(LevelSchedule::new(args.levels.clone(), args.budget.clone())?)
}

fn cmd_cantor(cli: &Cli, cmd: &CantorCommand) -> Result<Outcome> {
    match cmd {
        CantorCommand::Level { lo, hi, k, components } => {
            let format = format_or(cli, Format::Json, &[Format::Csv, Format::Json], "cantor level")?;
            let g = cantor::levelk_open(lo, hi, *k)?;
            if !components {
                if format == Format::Csv {
                    bail!("cantor level emits sets as JSON; use --components for CSV");
                }
                emit(cli, &g.to_json())?;
                return Ok(Outcome::Success);
            }
            let comps = cantor::f_components(&g, &Interval::closed(lo.clone(), hi.clone()))?;
            let text = match format {
                Format::Json => json_text(&comps),
                Format::Csv => {
                    let mut t = export::Table::new(&["lo", "hi", "level"]);
                    for c in &comps {
                        let (a, b) = c.interval.bounds().expect("bounded");
                        let level = c.level.map(|l| l.to_string()).unwrap_or_default();
                        t.push(vec![a.into(), b.into(), level.into()]);
                    }
                    t.render(cli.decimal)
                }
            };
            emit(cli, &text)?;
            Ok(Outcome::Success)
        }
        CantorCommand::Stage { schedule, emit_set } => {
            format_or(cli, Format::Json, &[Format::Json], "cantor stage")?;
            let sched = schedule_from(schedule)?;
            let stage = CantorStage::build_f_infinity(&sched, schedule.depth)?;
            let closed = emit_set.map(|limit| stage.closed_set(limit)).transpose()?;
            #[derive(Serialize)]
            struct StageReport {
                budget: String,
                stage: cantor::StageSummary,
                closed_set: Option<IntervalSet>,
            }
            let report = StageReport { budget: format_rational(&sched.budget), stage: stage.summary(), closed_set: closed };
            emit(cli, &json_text(&report))?;
            Ok(Outcome::Success)
        }
        CantorCommand::Check { schedule, critical, all_levels } => {
            let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json], "cantor check")?;
            let sched = schedule_from(schedule)?;
            let depth = schedule.depth as usize;
            if sched.levels.len() < depth {
                bail!("schedule has {} levels, depth {depth} requested", sched.levels.len());
            }
            let stage = CantorStage::new((int(0), int(1)), sched.levels[..depth].to_vec(), true, true)?;
            let options = WindowCheckOptions { critical: *critical, all_levels: *all_levels, limit: 1 << 20 };
            let report = density_window_check(&stage, options)?;
            let text = match format {
                Format::Csv => export::windows_csv(&report, cli.decimal),
                Format::Json => json_text(&report),
            };
            emit(cli, &text)?;
            Ok(if report.passed { Outcome::Success } else { Outcome::VerificationFailed })
        }
        CantorCommand::Full { window, epsilon, copies, depth, sample, rmin, rmax, threshold } => {
            let format = format_or(cli, Format::Json, &[Format::Csv, Format::Json], "cantor full")?;
            let asm = build_full_measure_sosd(&closed_window(window)?, epsilon, *copies, *depth)?;
            let certificates = asm
                .sample_points(*sample, cli.seed)
                .iter()
                .map(|x| sosd_certify(&asm, x, rmax, rmin, threshold, CERTIFY_BUDGET))
                .collect::<lipone::Result<Vec<_>>>()?;
            let summary = asm.summary();
            let ok = summary.uncovered <= summary.allowed && certificates.iter().all(|c| c.verdict == Verdict::Pass);
            let text = match format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct FullReport<'a> {
                        assembly: &'a cantor::AssemblySummary,
                        certificates: &'a [lipone::density::SosdCertificate],
                    }
                    json_text(&FullReport { assembly: &summary, certificates: &certificates })
                }
                Format::Csv => export::certificates_csv(&certificates, cli.decimal),
            };
            emit(cli, &text)?;
            Ok(if ok { Outcome::Success } else { Outcome::VerificationFailed })
        }
    }
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<Outcome> {
    format_or(cli, Format::Json, &[Format::Json], "verify")?;
    let config = VerifyConfig {
        seed: cli.seed,
        suites: if args.suites.is_empty() { Suite::ALL.to_vec() } else { args.suites.clone() },
        depth: args.depth,
        rule: breakpoint_rule(&args.breakpoint_factor, true)?,
    };
    let report = verify::run(&config);
    emit(cli, &json_text(&report))?;
    Ok(if report.passed { Outcome::Success } else { Outcome::VerificationFailed })
}
