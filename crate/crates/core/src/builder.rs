//! Construction of `f = Σ f_n` from a nested chain of closed sets.
//!
//! `f_1(x) = |[0, x] ∩ E_1|` (mirrored for `x < 0`). For `n ≥ 2`, `f_n`
//! vanishes on `E_{n-1}`; on each contiguous interval `(a, b)` of `E_{n-1}`
//! it is a zig-zag of cell-relative measures of `E_n` over cells cut by a
//! breakpoint sequence `a_0 > a_1 > … ↘ a` (mirrored toward `b`), or by a
//! uniform grid of width `2^-n` beyond `a + 1` on half-lines. Each `f_n` obeys
//! `0 ≤ f_n(x) ≤ min{2^-n, 2^-n·d(x, E_{n-1})²}` and stages past `N` add nothing,
//! so `f` is a finite sum evaluated exactly.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::density::{default_threshold, sosd_scan, Verdict};
use crate::error::{ChainDefect, Error, Result};
use crate::interval::{ExtendedPoint, Interval, IntervalSet, MeasuredSet, SetFile};
use crate::rational::{int, min_of, pow2, pow2_floor, ratio, Rational};

/// Finite increasing chain `E_1 ⊆ … ⊆ E_N` of closed sets with `E_1 ≠ ∅`.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedChain {
    stages: Vec<IntervalSet>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChainFile {
    stages: Vec<SetFile>,
}

/// A stage endpoint where the finite-range SOSD scan did not reach the threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SosdWarning {
    pub stage: usize,
    #[serde(with = "crate::rational::serde_rational")]
    pub point: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub min_max_density: Rational,
}

impl NestedChain {
    /// Checks closedness, nesting and `E_1 ≠ ∅`; errors name the 1-based stage.
    pub fn new(stages: Vec<IntervalSet>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidChain { stage: 0, defect: ChainDefect::Empty });
        }
        for (i, stage) in stages.iter().enumerate() {
            if !stage.is_closed() {
                return Err(Error::InvalidChain { stage: i + 1, defect: ChainDefect::NotClosed });
            }
            if i == 0 && stage.is_empty() {
                return Err(Error::InvalidChain { stage: 1, defect: ChainDefect::FirstStageEmpty });
            }
            if i > 0 && !stages[i - 1].is_subset_of(stage) {
                return Err(Error::InvalidChain { stage: i + 1, defect: ChainDefect::NotNested });
            }
        }
        Ok(NestedChain { stages })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChainFile = serde_json::from_str(text)?;
        let stages = file
            .stages
            .iter()
            .map(|s| IntervalSet::canonicalize(&s.parts))
            .collect::<Result<Vec<_>>>()?;
        NestedChain::new(stages)
    }

    pub fn to_json(&self) -> String {
        let file = ChainFile {
            stages: self
                .stages
                .iter()
                .map(|s| SetFile { parts: s.parts().iter().map(Interval::to_raw).collect() })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("chains always serialize")
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn stages(&self) -> &[IntervalSet] {
        &self.stages
    }

    /// `E_n` for `1 ≤ n`; stages past `N` repeat `E_N`. `E_0` is empty.
    pub fn stage(&self, n: usize) -> &IntervalSet {
        static EMPTY: std::sync::OnceLock<IntervalSet> = std::sync::OnceLock::new();
        if n == 0 {
            return EMPTY.get_or_init(IntervalSet::empty);
        }
        &self.stages[(n - 1).min(self.stages.len() - 1)]
    }

    pub fn last(&self) -> &IntervalSet {
        self.stages.last().expect("chains are nonempty")
    }

    /// Finite-range SOSD scan at the endpoints of every stage (at most
    /// `max_points` per stage). SOSD is a limit property, so failures are
    /// reported as warnings rather than rejecting the chain.
    pub fn sosd_diagnostics(&self, max_points: usize) -> Vec<SosdWarning> {
        let (r_max, r_min, threshold) = (int(1), pow2(-20), default_threshold());
        let mut warnings = Vec::new();
        for (i, stage) in self.stages.iter().enumerate() {
            let mut endpoints: Vec<Rational> = stage
                .parts()
                .iter()
                .flat_map(|p| [p.lo().finite().cloned(), p.hi().finite().cloned()])
                .flatten()
                .collect();
            endpoints.dedup();
            for x in endpoints.into_iter().take(max_points) {
                if let Ok(rep) = sosd_scan(stage, &x, &r_max, &r_min, &threshold) {
                    if rep.verdict == Verdict::Fail {
                        warnings.push(SosdWarning {
                            stage: i + 1,
                            point: x,
                            min_max_density: rep.min_max_density,
                        });
                    }
                }
            }
        }
        warnings
    }
}

/// Step rule for breakpoint gaps `g_k = a_k - a`:
/// `g_k = g_{k-1} - s_k` with `s_k` the largest power of two not exceeding
/// `factor · min{2^-n g_{k-1}², 2^-n, g_{k-1}}`.
///
/// Rounding the step down to a power of two keeps denominators bounded; the
/// unrounded recurrence squares them at every step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BreakpointRule {
    factor: Rational,
}

impl Default for BreakpointRule {
    fn default() -> Self {
        BreakpointRule { factor: ratio(1, 4) }
    }
}

impl BreakpointRule {
    /// Accepts factors in `(0, 3/8]`, the range where the gap condition is guaranteed.
    pub fn new(factor: Rational) -> Result<Self> {
        if !factor.is_positive() || factor > ratio(3, 8) {
            return Err(Error::InvalidArgument("breakpoint factor must lie in (0, 3/8]".into()));
        }
        Ok(BreakpointRule { factor })
    }

    /// Any positive factor, including ones that break the gap condition.
    pub fn unchecked(factor: Rational) -> Self {
        BreakpointRule { factor }
    }

    pub fn factor(&self) -> &Rational {
        &self.factor
    }

    fn scaled_bound(&self, gap: &Rational, level: u32) -> Rational {
        let scale = pow2(-(level as i64));
        let squared = &scale * gap * gap;
        let bound = min_of(&min_of(&squared, &scale), gap);
        &self.factor * bound
    }

    /// Step taken from `gap`, or `None` once the gap is no longer positive.
    pub fn step(&self, gap: &Rational, level: u32) -> Option<Rational> {
        if !gap.is_positive() {
            return None;
        }
        let bound = self.scaled_bound(gap, level);
        bound.is_positive().then(|| pow2_floor(&bound))
    }
}

/// Which end of the contiguous interval the breakpoints approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Toward {
    /// `a_k = a + g_k ↘ a`.
    Lower,
    /// `b_k = b - g_k ↗ b`.
    Upper,
}

#[derive(Debug, Clone)]
struct Run {
    // Covers breakpoints first_k .. first_k + count with g_{first_k + j} = start_gap - (j+1)·step.
    first_k: u64,
    start_gap: Rational,
    step: Rational,
    count: u64,
}

impl Run {
    fn end_gap(&self) -> Rational {
        &self.start_gap - &self.step * Rational::from_integer(self.count.into())
    }
}

/// Breakpoint sequence of one level inside one contiguous interval.
///
/// Gaps are generated lazily and stored as runs of equal power-of-two steps,
/// so locating the cell of any point costs a handful of exact operations
/// no matter how many breakpoints precede it.
#[derive(Debug, Clone)]
pub struct BreakpointStream {
    anchor: Rational,
    toward: Toward,
    level: u32,
    rule: BreakpointRule,
    first_gap: Rational,
    runs: Vec<Run>,
    exhausted: bool,
    cursor: u64,
}

impl BreakpointStream {
    /// Stream for the contiguous interval `(a, b)` at `level`.
    ///
    /// `a_0 = (a+b)/2` when both ends are finite and `a_0 = a + 1` (resp.
    /// `b - 1`) on half-lines. The interval must have a finite end on the
    /// side given by `toward`.
    pub fn new(interval: &Interval, level: u32, toward: Toward, rule: BreakpointRule) -> Result<Self> {
        let (anchor, first_gap) = match (interval.lo(), interval.hi(), toward) {
            (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b), _) => {
                let half = (b - a) / int(2);
                let anchor = if toward == Toward::Lower { a.clone() } else { b.clone() };
                (anchor, half)
            }
            (ExtendedPoint::Finite(a), ExtendedPoint::PosInf, Toward::Lower) => (a.clone(), int(1)),
            (ExtendedPoint::NegInf, ExtendedPoint::Finite(b), Toward::Upper) => (b.clone(), int(1)),
            _ => return Err(Error::InvalidArgument(format!("interval {interval} has no finite end toward {toward:?}"))),
        };
        if !first_gap.is_positive() {
            return Err(Error::InvalidArgument("contiguous interval must be nondegenerate".into()));
        }
        Ok(BreakpointStream {
            anchor,
            toward,
            level,
            rule,
            first_gap,
            runs: Vec::new(),
            exhausted: false,
            cursor: 0,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn anchor(&self) -> &Rational {
        &self.anchor
    }

    pub fn toward(&self) -> Toward {
        self.toward
    }

    fn point_at_gap(&self, gap: &Rational) -> Rational {
        match self.toward {
            Toward::Lower => &self.anchor + gap,
            Toward::Upper => &self.anchor - gap,
        }
    }

    fn last_gap(&self) -> Rational {
        self.runs.last().map_or_else(|| self.first_gap.clone(), Run::end_gap)
    }

    fn generated(&self) -> u64 {
        self.runs.last().map_or(0, |r| r.first_k + r.count - 1)
    }

    /// Appends one run of equal steps; returns false once exhausted.
    fn extend(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        let gap = self.last_gap();
        let Some(step) = self.rule.step(&gap, self.level) else {
            self.exhausted = true;
            return false;
        };
        // Largest j with rule.step(gap - j·step) == step; m(g) is nondecreasing,
        // so this is the last j with factor·m(gap - j·step) >= step.
        let same_step = |j: u64| -> bool {
            let g = &gap - &step * Rational::from_integer(j.into());
            g.is_positive() && self.rule.scaled_bound(&g, self.level) >= step
        };
        let (mut lo, mut hi) = (0u64, 1u64);
        while same_step(hi) {
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if same_step(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let first_k = self.generated() + 1;
        self.runs.push(Run { first_k, start_gap: gap, step, count: lo + 1 });
        true
    }

    /// Gap `g_k = |a_k - a|`, generating as needed; `None` if the rule stops producing.
    pub fn gap(&mut self, k: u64) -> Option<Rational> {
        if k == 0 {
            return Some(self.first_gap.clone());
        }
        while self.generated() < k {
            if !self.extend() {
                return None;
            }
        }
        let idx = self.runs.partition_point(|r| r.first_k + r.count <= k);
        let run = &self.runs[idx];
        let j = k - run.first_k + 1;
        Some(&run.start_gap - &run.step * Rational::from_integer(j.into()))
    }

    /// Breakpoint `a_k` (or `b_k` for upper streams).
    pub fn breakpoint(&mut self, k: u64) -> Option<Rational> {
        self.gap(k).map(|g| self.point_at_gap(&g))
    }

    /// Next breakpoint in sequence, starting from `a_0`.
    pub fn next_breakpoint(&mut self) -> Option<Rational> {
        let k = self.cursor;
        let point = self.breakpoint(k)?;
        self.cursor += 1;
        Some(point)
    }

    /// Index `k ≥ 1` with `g_k < h ≤ g_{k-1}`, plus both gaps. Needs `0 < h ≤ g_0`.
    pub fn bracket_gap(&mut self, h: &Rational) -> Option<(u64, Rational, Rational)> {
        if !h.is_positive() || *h > self.first_gap {
            return None;
        }
        while self.last_gap() >= *h {
            if !self.extend() {
                return None;
            }
        }
        let idx = self.runs.partition_point(|r| r.end_gap() >= *h);
        let run = &self.runs[idx];
        let ratio_steps = (&run.start_gap - h) / &run.step;
        let j = ratio_steps.floor().to_integer();
        let j: u64 = j.try_into().expect("run offsets are small");
        let k = run.first_k + j;
        let prev = &run.start_gap - &run.step * Rational::from_integer(j.into());
        let gap = &prev - &run.step;
        Some((k, gap, prev))
    }

    /// Cell `(lo, hi)` of the zig-zag containing `x`, which must lie between
    /// the anchor (exclusive) and `a_0` (inclusive).
    pub fn cell_of(&mut self, x: &Rational) -> Option<(Rational, Rational)> {
        let h = match self.toward {
            Toward::Lower => x - &self.anchor,
            Toward::Upper => &self.anchor - x,
        };
        let (_, gap, prev) = self.bracket_gap(&h)?;
        let (p, q) = (self.point_at_gap(&gap), self.point_at_gap(&prev));
        Some(if p <= q { (p, q) } else { (q, p) })
    }

    /// Number of stored runs (diagnostics).
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }
}

/// A breakpoint condition that failed, with the index where it failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionViolation {
    /// `a_0` is not the midpoint (or `a ± 1` on half-lines).
    First,
    /// `|a_{k-1} - a_k| < min{2^-n (a_k - a)², 2^-n}` fails at `k`.
    Gap { k: u64 },
    /// Breakpoints stop decreasing toward the anchor at `k`.
    Monotone { k: u64 },
    /// The query gap `h` was never bracketed.
    Bracket,
}

impl std::fmt::Display for ConditionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConditionViolation::First => f.write_str("condition (I) violated at k = 0"),
            ConditionViolation::Gap { k } => write!(f, "condition (II) violated at k = {k}"),
            ConditionViolation::Monotone { k } => write!(f, "condition (III) violated at k = {k}"),
            ConditionViolation::Bracket => f.write_str("condition (III) violated: query never bracketed"),
        }
    }
}

/// Checks conditions (I)–(III) on the first `count` breakpoints and brackets each gap in `queries`.
pub fn check_stream_conditions(
    interval: &Interval,
    stream: &mut BreakpointStream,
    count: u64,
    queries: &[Rational],
) -> std::result::Result<(), ConditionViolation> {
    let expected_first = match (interval.lo(), interval.hi()) {
        (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b)) => (a + b) / int(2),
        (ExtendedPoint::Finite(a), ExtendedPoint::PosInf) => a + int(1),
        (ExtendedPoint::NegInf, ExtendedPoint::Finite(b)) => b - int(1),
        _ => return Err(ConditionViolation::First),
    };
    let a0 = stream.breakpoint(0).ok_or(ConditionViolation::First)?;
    if a0 != expected_first {
        return Err(ConditionViolation::First);
    }
    let scale = pow2(-(stream.level() as i64));
    let mut prev_gap = stream.gap(0).ok_or(ConditionViolation::First)?;
    for k in 1..=count {
        let gap = stream.gap(k).ok_or(ConditionViolation::Monotone { k })?;
        let step = &prev_gap - &gap;
        if step >= min_of(&(&scale * &gap * &gap), &scale) {
            return Err(ConditionViolation::Gap { k });
        }
        if !gap.is_positive() || !step.is_positive() {
            return Err(ConditionViolation::Monotone { k });
        }
        prev_gap = gap;
    }
    for h in queries {
        match stream.bracket_gap(h) {
            Some((_, gap, prev)) if gap < *h && *h <= prev => {}
            _ => return Err(ConditionViolation::Bracket),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct StreamKey {
    level: u32,
    lo: ExtendedPoint,
    hi: ExtendedPoint,
    toward: Toward,
}

/// Exactly evaluable `f = Σ_{n=1}^N f_n` for a validated chain.
///
/// Breakpoint streams are memoized per (level, contiguous interval, side)
/// behind a mutex, so evaluation from several threads is safe and gives the
/// same results as sequential evaluation.
#[derive(Debug)]
pub struct LipFunction {
    chain: NestedChain,
    rule: BreakpointRule,
    memo: Mutex<HashMap<StreamKey, BreakpointStream>>,
}

/// Pair where `|f(a) - f(b)| ≤ |[a, b] ∩ E_N|` failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateViolation {
    #[serde(with = "crate::rational::serde_rational")]
    pub a: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub b: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub difference: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub measure: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub checked: usize,
    pub violations: Vec<CertificateViolation>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl LipFunction {
    pub fn new(chain: NestedChain) -> Self {
        LipFunction::with_rule(chain, BreakpointRule::default())
    }

    pub fn with_rule(chain: NestedChain, rule: BreakpointRule) -> Self {
        LipFunction { chain, rule, memo: Mutex::new(HashMap::new()) }
    }

    pub fn chain(&self) -> &NestedChain {
        &self.chain
    }

    pub fn stage_count(&self) -> usize {
        self.chain.len()
    }

    pub fn rule(&self) -> &BreakpointRule {
        &self.rule
    }

    /// `f_1(x) = |[0, x] ∩ E_1|` for `x ≥ 0`, `|[x, 0] ∩ E_1|` for `x < 0`.
    pub fn eval_f1(&self, x: &Rational) -> Rational {
        let e1 = self.chain.stage(1);
        let zero = Rational::zero();
        if x.is_negative() {
            e1.measure_between(x, &zero)
        } else {
            e1.measure_between(&zero, x)
        }
    }

    fn with_stream<T>(
        &self,
        level: u32,
        interval: &Interval,
        toward: Toward,
        f: impl FnOnce(&mut BreakpointStream) -> T,
    ) -> T {
        let key = StreamKey { level, lo: interval.lo().clone(), hi: interval.hi().clone(), toward };
        let mut memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
        let stream = memo.entry(key).or_insert_with(|| {
            BreakpointStream::new(interval, level, toward, self.rule.clone())
                .expect("contiguous intervals of a nonempty closed set have a finite end")
        });
        f(stream)
    }

    /// Zig-zag cell of level `n ≥ 2` containing `x ∉ E_{n-1}`.
    fn cell(&self, level: u32, interval: &Interval, x: &Rational) -> (Rational, Rational) {
        let grid = pow2(-(level as i64));
        let from_stream = |toward: Toward| {
            self.with_stream(level, interval, toward, |s| s.cell_of(x))
                .expect("valid rules bracket every interior point")
        };
        match (interval.lo(), interval.hi()) {
            (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b)) => {
                let mid = (a + b) / int(2);
                if *x <= mid {
                    from_stream(Toward::Lower)
                } else {
                    from_stream(Toward::Upper)
                }
            }
            (ExtendedPoint::Finite(a), ExtendedPoint::PosInf) => {
                let a0 = a + int(1);
                if *x <= a0 {
                    from_stream(Toward::Lower)
                } else {
                    let k = ((x - &a0) / &grid).ceil();
                    let hi = &a0 + &k * &grid;
                    (&hi - &grid, hi)
                }
            }
            (ExtendedPoint::NegInf, ExtendedPoint::Finite(b)) => {
                let b0 = b - int(1);
                if *x >= b0 {
                    from_stream(Toward::Upper)
                } else {
                    let k = ((&b0 - x) / &grid).ceil();
                    let lo = &b0 - &k * &grid;
                    let hi = &lo + &grid;
                    (lo, hi)
                }
            }
            _ => unreachable!("E_1 is nonempty, so no later contiguous interval is the whole line"),
        }
    }

    /// Exact `f_n(x)`; levels past `N` are identically zero.
    pub fn eval_fn(&self, level: u32, x: &Rational) -> Rational {
        assert!(level >= 1, "levels start at 1");
        if level == 1 {
            return self.eval_f1(x);
        }
        if level as usize > self.chain.len() {
            return Rational::zero();
        }
        let previous = self.chain.stage(level as usize - 1);
        let Some(interval) = previous.contiguous_interval_at(x) else {
            return Rational::zero();
        };
        let (lo, hi) = self.cell(level, &interval, x);
        let current = self.chain.stage(level as usize);
        min_of(&current.measure_between(&lo, x), &current.measure_between(x, &hi))
    }

    /// Exact `f(x) = Σ_{n=1}^N f_n(x)`.
    pub fn eval(&self, x: &Rational) -> Rational {
        (1..=self.chain.len() as u32).map(|n| self.eval_fn(n, x)).sum()
    }

    /// Sum over levels with `2^-n > tolerance` only, with a bound on what was skipped.
    ///
    /// Each skipped `f_n` is at most `2^-n`, so the exact value lies within
    /// `[value, value + bound]`.
    pub fn eval_truncated(&self, x: &Rational, tolerance: &Rational) -> (Rational, Rational) {
        let mut value = self.eval_f1(x);
        let mut bound = Rational::zero();
        for n in 2..=self.chain.len() as u32 {
            let scale = pow2(-(n as i64));
            if &scale > tolerance {
                value += self.eval_fn(n, x);
            } else {
                bound += scale;
            }
        }
        (value, bound)
    }

    /// `min{2^-n, 2^-n·d(x, E_{n-1})²}` for `n ≥ 2`.
    pub fn envelope(&self, level: u32, x: &Rational) -> Rational {
        assert!(level >= 2, "the envelope bound applies from level 2 on");
        let scale = pow2(-(level as i64));
        match self.chain.stage(level as usize - 1).distance(x) {
            ExtendedPoint::Finite(d) => min_of(&scale, &(&scale * &d * &d)),
            _ => scale,
        }
    }

    /// Checks `|f(a) - f(b)| ≤ |[a, b] ∩ E_N|` exactly for every pair.
    pub fn lipschitz_certificate(&self, pairs: &[(Rational, Rational)]) -> CertificateReport {
        let e = self.chain.last();
        let violations = pairs
            .iter()
            .filter_map(|(a, b)| {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let difference = (self.eval(a) - self.eval(b)).abs();
                let measure = e.measure_between(lo, hi);
                (difference > measure).then(|| CertificateViolation {
                    a: a.clone(),
                    b: b.clone(),
                    difference,
                    measure,
                })
            })
            .collect();
        CertificateReport { checked: pairs.len(), violations }
    }

    /// Cells of level `n` whose breakpoints have been generated so far (diagnostics).
    pub fn memoized_streams(&self) -> usize {
        self.memo.lock().map(|m| m.len()).unwrap_or(0)
    }
}

impl Clone for LipFunction {
    fn clone(&self) -> Self {
        LipFunction::with_rule(self.chain.clone(), self.rule.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn closed(a: Rational, b: Rational) -> Interval {
        Interval::closed(a, b)
    }

    fn set(parts: &[(i64, i64)]) -> IntervalSet {
        IntervalSet::from_intervals(parts.iter().map(|&(a, b)| closed(int(a), int(b))))
    }

    fn unit_chain() -> NestedChain {
        NestedChain::new(vec![set(&[(0, 1)])]).unwrap()
    }

    fn two_stage_chain() -> NestedChain {
        NestedChain::new(vec![set(&[(0, 1), (2, 3)]), set(&[(0, 3)])]).unwrap()
    }

    #[test]
    fn chain_validation() {
        assert!(NestedChain::new(vec![set(&[(0, 1)])]).is_ok());
        assert!(NestedChain::new(vec![set(&[(0, 1)]), set(&[(0, 1), (2, 3)])]).is_ok());
        let open = IntervalSet::from_interval(Interval::open(int(0), int(1)));
        match NestedChain::new(vec![open]).unwrap_err() {
            Error::InvalidChain { stage, defect } => {
                assert_eq!(stage, 1);
                assert_eq!(defect, ChainDefect::NotClosed);
            }
            other => panic!("unexpected {other:?}"),
        }
        match NestedChain::new(vec![set(&[(0, 1)]), set(&[(2, 3)])]).unwrap_err() {
            Error::InvalidChain { stage, defect } => {
                assert_eq!(stage, 2);
                assert_eq!(defect, ChainDefect::NotNested);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            NestedChain::new(vec![IntervalSet::empty()]),
            Err(Error::InvalidChain { stage: 1, defect: ChainDefect::FirstStageEmpty })
        ));
        assert!(matches!(NestedChain::new(vec![]), Err(Error::InvalidChain { stage: 0, .. })));
    }

    #[test]
    fn chain_json_round_trip() {
        let chain = two_stage_chain();
        assert_eq!(NestedChain::from_json(&chain.to_json()).unwrap(), chain);
    }

    #[test]
    fn sosd_diagnostics_flag_isolated_points() {
        let with_point = IntervalSet::from_intervals([closed(int(0), int(1)), Interval::point(int(5))]);
        let chain = NestedChain::new(vec![with_point]).unwrap();
        let warnings = chain.sosd_diagnostics(16);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].point, int(5));
        assert!(unit_chain().sosd_diagnostics(16).is_empty());
    }

    #[test]
    fn first_level_values() {
        let f = LipFunction::new(unit_chain());
        assert_eq!(f.eval_f1(&ratio(1, 2)), ratio(1, 2));
        assert_eq!(f.eval_f1(&int(-3)), int(0));
        let g = LipFunction::new(NestedChain::new(vec![set(&[(0, 1), (2, 3)])]).unwrap());
        assert_eq!(g.eval_f1(&ratio(5, 2)), ratio(3, 2));
        let h = LipFunction::new(NestedChain::new(vec![set(&[(-2, -1)])]).unwrap());
        assert_eq!(h.eval_f1(&int(-5)), int(1));
    }

    #[test]
    fn first_breakpoints() {
        let iv = Interval::open(int(1), int(2));
        let mut s = BreakpointStream::new(&iv, 2, Toward::Lower, BreakpointRule::default()).unwrap();
        assert_eq!(s.next_breakpoint().unwrap(), ratio(3, 2));
        assert_eq!(s.next_breakpoint().unwrap(), ratio(95, 64));
        let half = Interval::new(ExtendedPoint::Finite(int(1)), ExtendedPoint::PosInf, false, false).unwrap();
        let mut s = BreakpointStream::new(&half, 2, Toward::Lower, BreakpointRule::default()).unwrap();
        assert_eq!(s.next_breakpoint().unwrap(), int(2));
        // g_0 = 1: step = pow2floor(1/4 · min{1/4, 1/4, 1}) = 1/16
        assert_eq!(s.next_breakpoint().unwrap(), ratio(31, 16));
    }

    #[test]
    fn upper_stream_mirrors_lower() {
        let iv = Interval::open(int(1), int(2));
        let mut lo = BreakpointStream::new(&iv, 3, Toward::Lower, BreakpointRule::default()).unwrap();
        let mut hi = BreakpointStream::new(&iv, 3, Toward::Upper, BreakpointRule::default()).unwrap();
        for k in 0..200 {
            assert_eq!(lo.breakpoint(k).unwrap() + hi.breakpoint(k).unwrap(), int(3));
        }
    }

    // Independent step-by-step generation straight from the rule.
    fn naive_gaps(first: Rational, level: u32, count: usize) -> Vec<Rational> {
        let mut gaps = vec![first];
        for _ in 0..count {
            let g = gaps.last().unwrap().clone();
            let scale = pow2(-(level as i64));
            let bound = ratio(1, 4) * min_of(&min_of(&(&scale * &g * &g), &scale), &g);
            gaps.push(&g - pow2_floor(&bound));
        }
        gaps
    }

    #[test]
    fn run_encoding_matches_naive_recurrence() {
        for (iv, level) in [
            (Interval::open(int(1), int(2)), 2),
            (Interval::open(ratio(1, 3), ratio(5, 7)), 4),
            (Interval::new(ExtendedPoint::Finite(int(1)), ExtendedPoint::PosInf, false, false).unwrap(), 3),
        ] {
            let mut s = BreakpointStream::new(&iv, level, Toward::Lower, BreakpointRule::default()).unwrap();
            let first = s.gap(0).unwrap();
            let naive = naive_gaps(first, level, 1500);
            for (k, g) in naive.iter().enumerate() {
                assert_eq!(&s.gap(k as u64).unwrap(), g, "k = {k}");
            }
            assert!(s.run_count() < 40);
        }
    }

    #[test]
    fn conditions_hold_and_deep_queries_bracket() {
        let queries: Vec<Rational> = (1..=12).map(|j| pow2(-j)).collect();
        for level in [2, 3, 4] {
            let iv = Interval::open(int(1), int(2));
            let mut s = BreakpointStream::new(&iv, level, Toward::Lower, BreakpointRule::default()).unwrap();
            check_stream_conditions(&iv, &mut s, 1000, &queries[1..]).unwrap();
        }
    }

    #[test]
    fn oversized_factor_breaks_gap_condition() {
        let iv = Interval::open(int(1), int(2));
        let mut s = BreakpointStream::new(&iv, 2, Toward::Lower, BreakpointRule::unchecked(int(2))).unwrap();
        assert_eq!(check_stream_conditions(&iv, &mut s, 1000, &[]), Err(ConditionViolation::Gap { k: 1 }));
        assert!(BreakpointRule::new(int(2)).is_err());
        assert!(BreakpointRule::new(ratio(3, 8)).is_ok());
    }

    #[test]
    fn second_level_zig_zag_value() {
        let f = LipFunction::new(two_stage_chain());
        assert_eq!(f.eval_fn(2, &ratio(191, 128)), ratio(1, 128));
        assert_eq!(f.eval_fn(2, &int(1)), int(0));
        assert_eq!(f.eval_fn(2, &ratio(3, 2)), int(0));
        assert_eq!(f.eval_fn(2, &ratio(95, 64)), int(0));
        assert_eq!(f.eval_fn(3, &ratio(191, 128)), int(0));
        assert_eq!(f.eval(&int(1)), int(1));
    }

    #[test]
    fn saturates_beyond_the_set() {
        let f = LipFunction::new(unit_chain());
        assert_eq!(f.eval(&ratio(1, 2)), ratio(1, 2));
        assert_eq!(f.eval(&int(2)), int(1));
        assert_eq!(f.eval(&int(3)), int(1));
    }

    #[test]
    fn half_line_grid_cells() {
        // E_1 = [0,1], E_2 = [0,1] ∪ [3,10]: the right half-line (1, ∞) has a_0 = 2 and a
        // grid of width 1/4 beyond it.
        let chain = NestedChain::new(vec![set(&[(0, 1)]), set(&[(0, 1), (3, 10)])]).unwrap();
        let f = LipFunction::new(chain);
        assert_eq!(f.eval_fn(2, &ratio(25, 8)), ratio(1, 8));
        assert_eq!(f.eval_fn(2, &ratio(13, 4)), int(0));
        assert_eq!(f.eval_fn(2, &ratio(3, 2)), int(0));
        // mirrored half-line (-∞, 0): b_0 = -1, grid beyond it
        let chain = NestedChain::new(vec![set(&[(0, 1)]), set(&[(-10, -3), (0, 1)])]).unwrap();
        let f = LipFunction::new(chain);
        assert_eq!(f.eval_fn(2, &ratio(-25, 8)), ratio(1, 8));
        assert_eq!(f.eval_fn(2, &ratio(-13, 4)), int(0));
    }

    #[test]
    fn truncated_evaluation_brackets_exact_value() {
        let chain = NestedChain::new(vec![set(&[(0, 1)]), set(&[(0, 1), (2, 3)]), set(&[(0, 3)])]).unwrap();
        let f = LipFunction::new(chain);
        let x = ratio(5, 3);
        let exact = f.eval(&x);
        let (value, bound) = f.eval_truncated(&x, &ratio(1, 4));
        assert!(value <= exact && exact <= &value + &bound);
        assert_eq!(bound, ratio(1, 4) + ratio(1, 8));
    }

    #[test]
    fn certificate_on_simple_pairs() {
        let f = LipFunction::new(unit_chain());
        let rep = f.lipschitz_certificate(&[(int(0), int(1)), (int(2), int(5))]);
        assert!(rep.passed());
        assert_eq!(rep.checked, 2);
    }

    #[test]
    fn concurrent_evaluation_is_deterministic() {
        let f = std::sync::Arc::new(LipFunction::new(two_stage_chain()));
        let points: Vec<Rational> = (0..64).map(|k| int(1) + ratio(k, 64) + ratio(1, 4096)).collect();
        let expected: Vec<Rational> = points.iter().map(|x| LipFunction::new(two_stage_chain()).eval(x)).collect();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let f = f.clone();
                let points = points.clone();
                std::thread::spawn(move || points.iter().map(|x| f.eval(x)).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), expected);
        }
    }
}
