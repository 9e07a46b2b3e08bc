//! Cantor-type constructions built from the five-piece pattern
//! `(a, a+3w) ∪ [a+3w, a+4w] ∪ (a+4w, a+7w) ∪ [a+7w, a+8w] ∪ (a+8w, b)`,
//! `w = (b-a)/11`, whose three open pieces carry `9/11` of the length.
//!
//! Level-k open sets are produced explicitly. Multi-generation stages are
//! far too large for that (`3^48` pieces at the default depth 3), so a
//! [`CantorStage`] stores only its window and level schedule and answers
//! measure, membership and component queries by descending the pattern.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{ExtendedPoint, Interval, IntervalSet, MeasuredSet};
use crate::rational::{int, max_of, min_of, pow2, ratio, Rational};

/// Fraction of an interval covered by the open part of one pattern step.
pub fn rho() -> Rational {
    ratio(9, 11)
}

/// Largest `k` accepted by [`levelk_open`] (`3^k` open pieces).
pub const MAX_EXPLICIT_LEVEL: u32 = 13;

fn rho_pow(k: u32) -> Rational {
    num_traits::pow(rho(), k as usize)
}

fn check_window(a: &Rational, b: &Rational) -> Result<()> {
    if a >= b {
        return Err(Error::InvalidArgument(format!("window needs a < b, got [{a}, {b}]")));
    }
    Ok(())
}

// Cut points a+3w, a+4w, a+7w, a+8w.
fn cuts(a: &Rational, b: &Rational) -> [Rational; 4] {
    let w = (b - a) / int(11);
    [a + &w * int(3), a + &w * int(4), a + &w * int(7), a + &w * int(8)]
}

fn bounded(iv: &Interval) -> Result<(Rational, Rational)> {
    iv.bounds()
        .map(|(a, b)| (a.clone(), b.clone()))
        .ok_or(Error::InfiniteWindow)
}

/// The three open pieces of one pattern step on `(a, b)`.
pub fn level1_open(a: &Rational, b: &Rational) -> Result<IntervalSet> {
    levelk_open(a, b, 1)
}

/// `k`-fold refinement: level 0 is `(a, b)`, level `k` replaces every open
/// piece of level `k-1` by its own level-1 set.
pub fn levelk_open(a: &Rational, b: &Rational, k: u32) -> Result<IntervalSet> {
    check_window(a, b)?;
    if k > MAX_EXPLICIT_LEVEL {
        return Err(Error::TooLarge { count: 3u128.pow(k.min(80)), limit: 3u128.pow(MAX_EXPLICIT_LEVEL) });
    }
    let mut pieces = vec![(a.clone(), b.clone())];
    for _ in 0..k {
        pieces = pieces
            .into_iter()
            .flat_map(|(lo, hi)| {
                let [c1, c2, c3, c4] = cuts(&lo, &hi);
                [(lo, c1), (c2, c3), (c4, hi)]
            })
            .collect();
    }
    Ok(IntervalSet::from_canonical(pieces.into_iter().map(|(lo, hi)| Interval::open(lo, hi)).collect()))
}

/// A nondegenerate closed component of `window ∖ G` with its pattern level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaggedComponent {
    pub interval: Interval,
    /// `m` when the component belongs to the level-m set of the window but
    /// not the level-(m-1) set; `None` if it is not a pattern component.
    pub level: Option<u32>,
}

/// Pattern level of `[c, d]` inside `[a, b]`, found by descending the pattern.
pub fn pattern_level(a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> Option<u32> {
    let (mut a, mut b) = (a.clone(), b.clone());
    let length = d - c;
    let mut level = 1;
    loop {
        let w = (&b - &a) / int(11);
        if w < length {
            return None;
        }
        let [c1, c2, c3, c4] = cuts(&a, &b);
        if (*c == c1 && *d == c2) || (*c == c3 && *d == c4) {
            return Some(level);
        }
        let next = if *d <= c1 && *c >= a {
            (a.clone(), c1)
        } else if *c >= c2 && *d <= c3 {
            (c2, c3)
        } else if *c >= c4 && *d <= b {
            (c4, b.clone())
        } else {
            return None;
        };
        (a, b) = next;
        level += 1;
    }
}

/// Nondegenerate closed components of `window ∖ g`, tagged with their pattern level.
pub fn f_components(g: &IntervalSet, window: &Interval) -> Result<Vec<TaggedComponent>> {
    let (a, b) = bounded(window)?;
    let closed_window = IntervalSet::from_interval(Interval::closed(a.clone(), b.clone()));
    if !g.is_subset_of(&closed_window) {
        return Err(Error::InvalidArgument("open set is not contained in the window".into()));
    }
    let rest = g.complement_in(&Interval::closed(a.clone(), b.clone()));
    Ok(rest
        .parts()
        .iter()
        .filter(|p| !p.is_degenerate())
        .map(|p| {
            let (c, d) = p.bounds().expect("window parts are bounded");
            TaggedComponent { interval: p.clone(), level: pattern_level(&a, &b, c, d) }
        })
        .collect())
}

/// Level schedule `l_1, l_2, …` with an upper bound on the removed fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub levels: Vec<u32>,
    #[serde(with = "crate::rational::serde_rational")]
    pub budget: Rational,
}

impl LevelSchedule {
    pub fn new(levels: Vec<u32>, budget: Rational) -> Result<Self> {
        if levels.contains(&0) {
            return Err(Error::InvalidArgument("schedule levels must be positive".into()));
        }
        if !budget.is_positive() || budget >= Rational::one() {
            return Err(Error::InvalidArgument("budget must lie in (0, 1)".into()));
        }
        Ok(LevelSchedule { levels, budget })
    }

    /// `l_n = 4(n+2)` for `n = 1..=depth` with budget `1/2`.
    ///
    /// `(9/11)^4 < 1/2`, so generation n removes at most `2^-(n+2)` of what is
    /// left and the total stays below `1/2`.
    pub fn default_for_depth(depth: u32) -> Self {
        LevelSchedule { levels: (1..=depth).map(|n| 4 * (n + 2)).collect(), budget: ratio(1, 2) }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: LevelSchedule = serde_json::from_str(text)?;
        LevelSchedule::new(s.levels, s.budget)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedules always serialize")
    }
}

/// Exact bookkeeping of one generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub generation: u32,
    pub level: u32,
    /// `|G_n|`.
    #[serde(with = "crate::rational::serde_rational")]
    pub removed: Rational,
    /// `|G_1| + … + |G_n|`.
    #[serde(with = "crate::rational::serde_rational")]
    pub removed_total: Rational,
    /// Measure of what is left after generation n.
    #[serde(with = "crate::rational::serde_rational")]
    pub complement: Rational,
    /// Closed components after generation n, if it fits in 128 bits; written
    /// as a decimal string since JSON numbers lose precision past 2^53.
    #[serde(serialize_with = "count_as_string")]
    pub components: Option<u128>,
}

fn count_as_string<S: serde::Serializer>(count: &Option<u128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match count {
        Some(c) => s.serialize_str(&c.to_string()),
        None => s.serialize_none(),
    }
}

/// A closed component of a stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageComponent {
    #[serde(with = "crate::rational::serde_rational")]
    pub lo: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub hi: Rational,
    /// Pattern level inside the generation that created it (0 for the bare window).
    pub level: u32,
    pub generation: u32,
}

impl StageComponent {
    pub fn half_length(&self) -> Rational {
        (&self.hi - &self.lo) / int(2)
    }

    pub fn center(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }
}

/// Generation `d` of the construction on a window `[a, b]`.
///
/// Generation 1 removes a level-`l_1` open set from `(a, b)`; generation n
/// removes a level-`l_n` open set from every closed component left by
/// generation `n-1`, together with that component's endpoints. What remains
/// is the closed set `{a, b} ∪ ⋃ (generation-d components)`.
#[derive(Debug, Clone)]
pub struct CantorStage {
    lo: Rational,
    hi: Rational,
    levels: Vec<u32>,
    include_lo: bool,
    include_hi: bool,
    // survive[g] = ∏_{m ≥ g} (1 - ρ^{l_m}), survive[d] = 1
    survive: Vec<Rational>,
    ledger: Vec<LedgerEntry>,
}

/// Per-stage summary for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    #[serde(with = "crate::rational::serde_rational")]
    pub window_lo: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub window_hi: Rational,
    pub levels: Vec<u32>,
    pub ledger: Vec<LedgerEntry>,
    #[serde(with = "crate::rational::serde_rational")]
    pub complement: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub open_measure: Rational,
}

impl CantorStage {
    /// Builds the stage; endpoint flags say whether `a` and `b` belong to the closed set.
    pub fn new(window: (Rational, Rational), levels: Vec<u32>, include_lo: bool, include_hi: bool) -> Result<Self> {
        let (lo, hi) = window;
        check_window(&lo, &hi)?;
        if levels.contains(&0) {
            return Err(Error::InvalidArgument("schedule levels must be positive".into()));
        }
        let d = levels.len();
        let keep: Vec<Rational> = levels.iter().map(|&l| Rational::one() - rho_pow(l)).collect();
        let mut survive = vec![Rational::one(); d + 1];
        for g in (0..d).rev() {
            survive[g] = &survive[g + 1] * &keep[g];
        }
        let length = &hi - &lo;
        let mut ledger = Vec::with_capacity(d);
        let mut complement = length.clone();
        let mut components: Option<u128> = Some(1);
        for (g, &l) in levels.iter().enumerate() {
            let removed = &complement * rho_pow(l);
            complement -= &removed;
            components = components.and_then(|c| 3u128.checked_pow(l).and_then(|p| c.checked_mul(p - 1)));
            ledger.push(LedgerEntry {
                generation: g as u32 + 1,
                level: l,
                removed,
                removed_total: &length - &complement,
                complement: complement.clone(),
                components,
            });
        }
        Ok(CantorStage { lo, hi, levels, include_lo, include_hi, survive, ledger })
    }

    /// The construction on `[0, 1]`, rejecting schedules whose removals exceed the budget.
    pub fn build_f_infinity(schedule: &LevelSchedule, depth: u32) -> Result<Self> {
        let depth = depth as usize;
        if schedule.levels.len() < depth {
            return Err(Error::InvalidArgument(format!(
                "schedule has {} levels, depth {depth} requested",
                schedule.levels.len()
            )));
        }
        let stage = CantorStage::new((int(0), int(1)), schedule.levels[..depth].to_vec(), true, true)?;
        let removed = stage.removed_measure();
        if removed > schedule.budget {
            return Err(Error::BudgetExceeded { overshoot: removed - &schedule.budget });
        }
        Ok(stage)
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn window(&self) -> (&Rational, &Rational) {
        (&self.lo, &self.hi)
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    /// Measure of the closed set (from the ledger).
    pub fn complement_measure(&self) -> Rational {
        self.ledger.last().map_or_else(|| &self.hi - &self.lo, |e| e.complement.clone())
    }

    /// Measure of the accumulated open set `G_1 ∪ … ∪ G_d`.
    pub fn removed_measure(&self) -> Rational {
        &self.hi - &self.lo - self.complement_measure()
    }

    /// Number of closed components of the final generation, if it fits in 128 bits.
    pub fn component_count(&self) -> Option<u128> {
        self.ledger.last().map_or(Some(1), |e| e.components)
    }

    /// Components of the final generation whose pattern level is the finest one, `l_d`.
    pub fn finest_component_count(&self) -> Option<u128> {
        let d = self.levels.len();
        if d == 0 {
            return Some(1);
        }
        let before = if d == 1 { Some(1) } else { self.ledger[d - 2].components };
        let l = self.levels[d - 1];
        before.and_then(|c| 3u128.checked_pow(l - 1).and_then(|p| c.checked_mul(2 * p)))
    }

    pub fn summary(&self) -> StageSummary {
        StageSummary {
            window_lo: self.lo.clone(),
            window_hi: self.hi.clone(),
            levels: self.levels.clone(),
            ledger: self.ledger.clone(),
            complement: self.complement_measure(),
            open_measure: self.removed_measure(),
        }
    }

    /// Recomputes the open measure by exact summation over an explicit
    /// materialization; independent of the ledger.
    pub fn open_measure_by_summation(&self, limit: usize) -> Result<Rational> {
        let open = self.accumulated_open(limit)?;
        match open.measure() {
            ExtendedPoint::Finite(m) => Ok(m),
            _ => unreachable!("stages are bounded"),
        }
    }

    fn measure_component(&self, a: &Rational, b: &Rational, g: usize, lo: &Rational, hi: &Rational) -> Rational {
        if hi <= a || lo >= b {
            return Rational::zero();
        }
        if g == self.levels.len() {
            return min_of(b, hi) - max_of(a, lo);
        }
        if lo <= a && b <= hi {
            return (b - a) * &self.survive[g];
        }
        self.measure_pattern(a, b, self.levels[g], g, lo, hi)
    }

    fn measure_pattern(&self, a: &Rational, b: &Rational, k: u32, g: usize, lo: &Rational, hi: &Rational) -> Rational {
        if hi <= a || lo >= b || k == 0 {
            return Rational::zero();
        }
        if lo <= a && b <= hi {
            return (b - a) * (Rational::one() - rho_pow(k)) * &self.survive[g + 1];
        }
        let [c1, c2, c3, c4] = cuts(a, b);
        self.measure_pattern(a, &c1, k - 1, g, lo, hi)
            + self.measure_component(&c1, &c2, g + 1, lo, hi)
            + self.measure_pattern(&c2, &c3, k - 1, g, lo, hi)
            + self.measure_component(&c3, &c4, g + 1, lo, hi)
            + self.measure_pattern(&c4, b, k - 1, g, lo, hi)
    }

    /// Whether `x` lies in the closed set of the stage.
    pub fn contains_point(&self, x: &Rational) -> bool {
        if *x < self.lo || *x > self.hi {
            return false;
        }
        let d = self.levels.len();
        if d == 0 {
            return true;
        }
        if *x == self.lo {
            return self.include_lo;
        }
        if *x == self.hi {
            return self.include_hi;
        }
        // x is strictly inside the closed component [a, b] about to receive generation g.
        let (mut a, mut b) = (self.lo.clone(), self.hi.clone());
        let mut g = 0;
        let mut k = self.levels[0];
        loop {
            if k == 0 {
                return false;
            }
            let [c1, c2, c3, c4] = cuts(&a, &b);
            if [&c1, &c2, &c3, &c4].contains(&x) {
                return g + 1 == d;
            }
            if *x < c1 {
                b = c1;
                k -= 1;
            } else if *x < c2 {
                (a, b) = (c1, c2);
                g += 1;
                if g == d {
                    return true;
                }
                k = self.levels[g];
            } else if *x < c3 {
                (a, b) = (c2, c3);
                k -= 1;
            } else if *x < c4 {
                (a, b) = (c3, c4);
                g += 1;
                if g == d {
                    return true;
                }
                k = self.levels[g];
            } else {
                a = c4;
                k -= 1;
            }
        }
    }

    fn collect_component(
        &self,
        (a, b): (&Rational, &Rational),
        g: usize,
        level: u32,
        range: (&Rational, &Rational),
        out: &mut Vec<StageComponent>,
    ) {
        if b < range.0 || a > range.1 {
            return;
        }
        if g == self.levels.len() {
            out.push(StageComponent { lo: a.clone(), hi: b.clone(), level, generation: g as u32 });
            return;
        }
        self.collect_pattern((a, b), self.levels[g], 1, g, range, out);
    }

    fn collect_pattern(
        &self,
        (a, b): (&Rational, &Rational),
        k: u32,
        depth: u32,
        g: usize,
        range: (&Rational, &Rational),
        out: &mut Vec<StageComponent>,
    ) {
        if k == 0 || b < range.0 || a > range.1 {
            return;
        }
        let [c1, c2, c3, c4] = cuts(a, b);
        self.collect_pattern((a, &c1), k - 1, depth + 1, g, range, out);
        self.collect_component((&c1, &c2), g + 1, depth, range, out);
        self.collect_pattern((&c2, &c3), k - 1, depth + 1, g, range, out);
        self.collect_component((&c3, &c4), g + 1, depth, range, out);
        self.collect_pattern((&c4, b), k - 1, depth + 1, g, range, out);
    }

    /// Final-generation components meeting `[lo, hi]`, in increasing order.
    /// The caller bounds the range; the count grows like `3^(Σ l_n)`.
    pub fn components_between(&self, lo: &Rational, hi: &Rational) -> Vec<StageComponent> {
        let mut out = Vec::new();
        self.collect_component((&self.lo, &self.hi), 0, 0, (lo, hi), &mut out);
        out
    }

    /// All final-generation components, refusing more than `limit`.
    pub fn components(&self, limit: usize) -> Result<Vec<StageComponent>> {
        self.ensure_count(self.component_count(), limit)?;
        Ok(self.components_between(&self.lo.clone(), &self.hi.clone()))
    }

    fn ensure_count(&self, count: Option<u128>, limit: usize) -> Result<()> {
        match count {
            Some(c) if c <= limit as u128 => Ok(()),
            other => Err(Error::TooLarge { count: other.unwrap_or(u128::MAX), limit: limit as u128 }),
        }
    }

    /// Explicit closed set, refusing more than `limit` components.
    pub fn closed_set(&self, limit: usize) -> Result<IntervalSet> {
        let mut parts: Vec<Interval> =
            self.components(limit)?.into_iter().map(|c| Interval::closed(c.lo, c.hi)).collect();
        if !self.levels.is_empty() {
            if self.include_lo {
                parts.push(Interval::point(self.lo.clone()));
            }
            if self.include_hi {
                parts.push(Interval::point(self.hi.clone()));
            }
        }
        Ok(IntervalSet::from_intervals(parts))
    }

    /// Explicit accumulated open set `(a, b) ∖ closed set`.
    pub fn accumulated_open(&self, limit: usize) -> Result<IntervalSet> {
        let window = Interval::open(self.lo.clone(), self.hi.clone());
        let closed = self.closed_set(limit)?;
        Ok(IntervalSet::from_interval(window).difference(&closed))
    }
}

impl MeasuredSet for CantorStage {
    fn measure_between(&self, lo: &Rational, hi: &Rational) -> Rational {
        if lo >= hi {
            return Rational::zero();
        }
        self.measure_component(&self.lo, &self.hi, 0, lo, hi)
    }

    fn contains(&self, x: &Rational) -> bool {
        self.contains_point(x)
    }

    fn endpoints_between(&self, lo: &Rational, hi: &Rational) -> Vec<Rational> {
        let mut out = Vec::new();
        let in_range = |x: &Rational| lo <= x && x <= hi;
        if !self.levels.is_empty() && self.include_lo && in_range(&self.lo) {
            out.push(self.lo.clone());
        }
        for c in self.components_between(lo, hi) {
            for e in [c.lo, c.hi] {
                if in_range(&e) {
                    out.push(e);
                }
            }
        }
        if !self.levels.is_empty() && self.include_hi && in_range(&self.hi) {
            out.push(self.hi.clone());
        }
        out.dedup();
        out
    }
}

/// Geometric neighbourhood property of finest-level components of a level-k set:
/// `(p-7t, p-t) ∪ (p+t, p+7t) ⊆ G` for every component `[p-t, p+t]` of level k.
/// Returns the offending components.
pub fn neighbourhood_violations(a: &Rational, b: &Rational, k: u32) -> Result<Vec<Interval>> {
    let g = levelk_open(a, b, k)?;
    let window = Interval::closed(a.clone(), b.clone());
    Ok(f_components(&g, &window)?
        .into_iter()
        .filter(|c| c.level == Some(k))
        .filter(|c| {
            let (lo, hi) = c.interval.bounds().expect("bounded");
            let t = (hi - lo) / int(2);
            let six_t = &t * int(6);
            let left = Interval::open(lo - &six_t, lo.clone());
            let right = Interval::open(hi.clone(), hi + &six_t);
            let nbhd = IntervalSet::from_intervals([left, right]);
            !nbhd.is_subset_of(&g)
        })
        .map(|c| c.interval)
        .collect())
}

/// Which side of the sample point a density window extends to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// One evaluated density window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRow {
    #[serde(with = "crate::rational::serde_rational")]
    pub component_lo: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub component_hi: Rational,
    pub level: u32,
    #[serde(with = "crate::rational::serde_rational")]
    pub x: Rational,
    pub side: Side,
    #[serde(with = "crate::rational::serde_rational")]
    pub density: Rational,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WindowCheckOptions {
    /// Add every point where a window edge crosses a stage endpoint; the
    /// densities are affine between those, so the maximum becomes exact.
    pub critical: bool,
    /// Include components of every pattern level, not only the finest.
    pub all_levels: bool,
    /// Refuse stages with more components than this.
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport {
    pub rows: Vec<WindowRow>,
    #[serde(with = "crate::rational::serde_rational")]
    pub max_density: Rational,
    pub components: usize,
    pub passed: bool,
}

/// For each final-generation component `[p-t, p+t]` and sample `x` in it,
/// the density of the stage in `[x-4t, x]` and `[x, x+4t]` (clipped to the
/// window, divided by `4t`); passes when every density is at most `1/2`.
pub fn density_window_check(stage: &CantorStage, options: WindowCheckOptions) -> Result<WindowReport> {
    let limit = if options.limit == 0 { 1 << 20 } else { options.limit };
    let mut rows = Vec::new();
    let mut max_density = Rational::zero();
    let mut count = 0;
    if stage.depth() == 0 {
        return Ok(WindowReport { rows, max_density, components: 0, passed: true });
    }
    let finest = *stage.levels.last().expect("depth ≥ 1");
    let expected = if options.all_levels { stage.component_count() } else { stage.finest_component_count() };
    stage.ensure_count(expected, limit)?;
    let (wlo, whi) = (stage.lo.clone(), stage.hi.clone());
    for comp in stage.components_between(&wlo, &whi) {
        if !options.all_levels && comp.level != finest {
            continue;
        }
        count += 1;
        let t = comp.half_length();
        let p = comp.center();
        let four_t = &t * int(4);
        let mut samples = vec![
            comp.lo.clone(),
            &p - &t / int(2),
            p.clone(),
            &p + &t / int(2),
            comp.hi.clone(),
        ];
        if options.critical {
            let reach_lo = &comp.lo - &four_t;
            let reach_hi = &comp.hi + &four_t;
            for e in stage.endpoints_between(&reach_lo, &reach_hi) {
                for x in [&e + &four_t, &e - &four_t] {
                    if x >= comp.lo && x <= comp.hi {
                        samples.push(x);
                    }
                }
            }
        }
        samples.sort();
        samples.dedup();
        for x in samples {
            for side in [Side::Left, Side::Right] {
                let (lo, hi) = match side {
                    Side::Left => (max_of(&(&x - &four_t), &wlo), x.clone()),
                    Side::Right => (x.clone(), min_of(&(&x + &four_t), &whi)),
                };
                let density = stage.measure_between(&lo, &hi) / &four_t;
                if density > max_density {
                    max_density = density.clone();
                }
                rows.push(WindowRow {
                    component_lo: comp.lo.clone(),
                    component_hi: comp.hi.clone(),
                    level: comp.level,
                    x: x.clone(),
                    side,
                    density,
                });
            }
        }
    }
    let passed = max_density <= ratio(1, 2);
    Ok(WindowReport { rows, max_density, components: count, passed })
}

/// Finite surrogate of a full-measure union: disjoint stages tiling a window.
#[derive(Debug, Clone)]
pub struct FullMeasureAssembly {
    pub stages: Vec<CantorStage>,
    pub epsilon: Rational,
    pub window: (Rational, Rational),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssemblySummary {
    #[serde(with = "crate::rational::serde_rational")]
    pub epsilon: Rational,
    pub stages: Vec<StageSummary>,
    #[serde(with = "crate::rational::serde_rational")]
    pub uncovered: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub allowed: Rational,
}

/// Upper bound on the first schedule level searched by [`build_full_measure_sosd`].
pub const MAX_FIRST_LEVEL: u32 = 256;

/// Smallest first level `L` for which the schedule `L, L+4, L+8, …` of
/// `depth` generations removes at most `fraction` of a window.
pub fn minimal_first_level(fraction: &Rational, depth: u32) -> Option<u32> {
    let uncovered = |first: u32| -> Rational {
        let kept: Rational = (0..depth).map(|n| Rational::one() - rho_pow(first + 4 * n)).product();
        Rational::one() - kept
    };
    // The removed fraction decreases in L: double, then bisect.
    let feasible = |first: u32| uncovered(first) <= *fraction;
    let mut hi = 1u32;
    while !feasible(hi) {
        if hi >= 1 << 16 {
            return None;
        }
        hi *= 2;
    }
    let mut lo = 0u32;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Tiles `window` by `copies` closed pieces of equal length and builds a
/// stage of `depth` generations in copy j with levels `L_j, L_j+4, …`, `L_j`
/// minimal such that the copy leaves at most `epsilon·2^-j` of its length
/// uncovered. Tile points are owned by the copy on their left so the closed
/// stages are pairwise disjoint.
pub fn build_full_measure_sosd(
    window: &Interval,
    epsilon: &Rational,
    copies: u32,
    depth: u32,
) -> Result<FullMeasureAssembly> {
    let (a, b) = bounded(window)?;
    check_window(&a, &b)?;
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1)".into()));
    }
    if copies == 0 || depth == 0 || copies > 64 {
        return Err(Error::InvalidArgument("copies must lie in 1..=64 and depth must be positive".into()));
    }
    let width = (&b - &a) / int(copies as i64);
    let mut stages = Vec::with_capacity(copies as usize);
    for j in 1..=copies {
        let fraction = epsilon * pow2(-(j as i64));
        let first = minimal_first_level(&fraction, depth)
            .filter(|&l| l <= MAX_FIRST_LEVEL)
            .ok_or_else(|| Error::InfeasibleBudget {
                required_level: minimal_first_level(&fraction, depth).unwrap_or(u32::MAX),
                max_level: MAX_FIRST_LEVEL,
            })?;
        let left = &a + &width * int(j as i64 - 1);
        let right = if j == copies { b.clone() } else { &left + &width };
        let levels = (0..depth).map(|n| first + 4 * n).collect();
        stages.push(CantorStage::new((left, right), levels, j == 1, true)?);
    }
    Ok(FullMeasureAssembly { stages, epsilon: epsilon.clone(), window: (a, b) })
}

impl FullMeasureAssembly {
    /// Exact measure of the window not covered by any stage.
    pub fn uncovered(&self) -> Rational {
        let covered: Rational = self.stages.iter().map(CantorStage::complement_measure).sum();
        &self.window.1 - &self.window.0 - covered
    }

    pub fn summary(&self) -> AssemblySummary {
        AssemblySummary {
            epsilon: self.epsilon.clone(),
            stages: self.stages.iter().map(CantorStage::summary).collect(),
            uncovered: self.uncovered(),
            allowed: &self.epsilon * (&self.window.1 - &self.window.0),
        }
    }

    /// `count` seeded points of the union that are not isolated tile points,
    /// drawn as multiples of `2^-24` of the window.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Rational> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (&self.window.0, &self.window.1);
        let grid = pow2(-24);
        let isolated: Vec<&Rational> = self.stages.iter().flat_map(|s| [&s.lo, &s.hi]).collect();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let k: u32 = rng.gen_range(0..=(1 << 24));
            let x = a + (b - a) * &grid * Rational::from_integer(k.into());
            if isolated.contains(&&x) || !self.contains(&x) {
                continue;
            }
            out.push(x);
        }
        out
    }
}

impl MeasuredSet for FullMeasureAssembly {
    fn measure_between(&self, lo: &Rational, hi: &Rational) -> Rational {
        self.stages.iter().map(|s| s.measure_between(lo, hi)).sum()
    }

    fn contains(&self, x: &Rational) -> bool {
        self.stages.iter().any(|s| s.contains_point(x))
    }

    fn endpoints_between(&self, lo: &Rational, hi: &Rational) -> Vec<Rational> {
        let mut out: Vec<Rational> = self
            .stages
            .iter()
            .filter(|s| s.hi >= *lo && s.lo <= *hi)
            .flat_map(|s| s.endpoints_between(lo, hi))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> Interval {
        Interval::closed(int(0), int(1))
    }

    fn finite(m: ExtendedPoint) -> Rational {
        match m {
            ExtendedPoint::Finite(v) => v,
            other => panic!("unbounded measure {other:?}"),
        }
    }

    #[test]
    fn level_one_pattern() {
        let g = level1_open(&int(0), &int(1)).unwrap();
        let expected = IntervalSet::from_intervals([
            Interval::open(int(0), ratio(3, 11)),
            Interval::open(ratio(4, 11), ratio(7, 11)),
            Interval::open(ratio(8, 11), int(1)),
        ]);
        assert_eq!(g, expected);
        assert_eq!(finite(g.measure()), ratio(9, 11));
        let g11 = level1_open(&int(0), &int(11)).unwrap();
        assert_eq!(
            g11,
            IntervalSet::from_intervals([
                Interval::open(int(0), int(3)),
                Interval::open(int(4), int(7)),
                Interval::open(int(8), int(11)),
            ])
        );
        assert!(level1_open(&int(1), &int(1)).is_err());
    }

    // Oracle: sum lengths of the recursive expansion written out independently.
    fn expanded_measure(k: u32) -> Rational {
        fn go(a: Rational, b: Rational, k: u32) -> Rational {
            if k == 0 {
                return b - a;
            }
            let w = (&b - &a) / int(11);
            go(a.clone(), &a + &w * int(3), k - 1)
                + go(&a + &w * int(4), &a + &w * int(7), k - 1)
                + go(&a + &w * int(8), b, k - 1)
        }
        go(int(0), int(1), k)
    }

    #[test]
    fn level_k_measures() {
        assert_eq!(levelk_open(&int(0), &int(1), 0).unwrap(), IntervalSet::from_interval(Interval::open(int(0), int(1))));
        let two = levelk_open(&int(0), &int(1), 2).unwrap();
        assert_eq!(two.len(), 9);
        assert_eq!(finite(two.measure()), ratio(81, 121));
        for k in 0..=8 {
            let m = finite(levelk_open(&int(0), &int(1), k).unwrap().measure());
            assert_eq!(m, expanded_measure(k));
            assert_eq!(m, rho_pow(k));
        }
    }

    #[test]
    fn component_tags() {
        let g = level1_open(&int(0), &int(1)).unwrap();
        let comps = f_components(&g, &unit()).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].interval, Interval::closed(ratio(3, 11), ratio(4, 11)));
        assert_eq!(comps[1].interval, Interval::closed(ratio(7, 11), ratio(8, 11)));
        assert!(comps.iter().all(|c| c.level == Some(1)));
        let g0 = levelk_open(&int(0), &int(1), 0).unwrap();
        assert!(f_components(&g0, &unit()).unwrap().is_empty());
        let g2 = levelk_open(&int(0), &int(1), 2).unwrap();
        let comps = f_components(&g2, &unit()).unwrap();
        assert_eq!(comps.iter().filter(|c| c.level == Some(1)).count(), 2);
        assert_eq!(comps.iter().filter(|c| c.level == Some(2)).count(), 6);
        let outside = IntervalSet::from_interval(Interval::open(int(2), int(3)));
        assert!(f_components(&outside, &unit()).is_err());
    }

    #[test]
    fn finest_components_have_open_neighbourhoods() {
        for k in 1..=3 {
            assert!(neighbourhood_violations(&int(0), &int(1), k).unwrap().is_empty());
        }
    }

    #[test]
    fn coarser_components_lose_open_neighbourhoods() {
        // [3/11, 4/11] at level 2: (0, 3/11) is refined and no longer open territory.
        let g2 = levelk_open(&int(0), &int(1), 2).unwrap();
        let left = IntervalSet::from_interval(Interval::open(int(0), ratio(3, 11)));
        assert!(!left.is_subset_of(&g2));
    }

    #[test]
    fn default_schedule_ledger() {
        let sched = LevelSchedule::default_for_depth(3);
        assert_eq!(sched.levels, vec![12, 16, 20]);
        let s1 = CantorStage::build_f_infinity(&sched, 1).unwrap();
        assert_eq!(s1.ledger()[0].removed, rho_pow(12));
        assert_eq!(s1.complement_measure(), Rational::one() - rho_pow(12));
        let s3 = CantorStage::build_f_infinity(&sched, 3).unwrap();
        let expected: Rational = [12, 16, 20].iter().map(|&l| Rational::one() - rho_pow(l)).product();
        assert_eq!(s3.complement_measure(), expected);
        assert!(s3.complement_measure() >= ratio(1, 2));
        let total: Rational = s3.ledger().iter().map(|e| e.removed.clone()).sum();
        assert_eq!(Rational::one() - total, s3.complement_measure());
        let s0 = CantorStage::build_f_infinity(&sched, 0).unwrap();
        assert_eq!(s0.complement_measure(), int(1));
        assert!(s0.contains_point(&ratio(1, 2)));
    }

    #[test]
    fn budget_and_schedule_errors() {
        let greedy = LevelSchedule::new(vec![1], ratio(1, 2)).unwrap();
        match CantorStage::build_f_infinity(&greedy, 1).unwrap_err() {
            Error::BudgetExceeded { overshoot } => assert_eq!(overshoot, ratio(9, 11) - ratio(1, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(CantorStage::build_f_infinity(&LevelSchedule::default_for_depth(1), 2).is_err());
        assert!(LevelSchedule::new(vec![0], ratio(1, 2)).is_err());
        assert!(LevelSchedule::new(vec![3], int(1)).is_err());
    }

    #[test]
    fn implicit_queries_match_materialized_stage() {
        let stage = CantorStage::new((int(0), int(1)), vec![2, 1], true, true).unwrap();
        let closed = stage.closed_set(10_000).unwrap();
        assert_eq!(finite(closed.measure()), stage.complement_measure());
        assert_eq!(stage.open_measure_by_summation(10_000).unwrap(), stage.removed_measure());
        let probes: Vec<Rational> = (0..=242).map(|i| ratio(i, 242)).chain((0..=121).map(|i| ratio(i, 121))).collect();
        for x in &probes {
            assert_eq!(stage.contains_point(x), closed.contains(x), "x = {x}");
        }
        for (lo, hi) in [(ratio(1, 7), ratio(5, 9)), (int(0), int(1)), (ratio(3, 11), ratio(4, 11)), (ratio(-1, 2), ratio(1, 3))] {
            assert_eq!(stage.measure_between(&lo, &hi), closed.measure_between(&lo, &hi));
            assert_eq!(stage.endpoints_between(&lo, &hi), closed.endpoints_between(&lo, &hi));
        }
        assert_eq!(stage.component_count(), Some(8 * 2));
    }

    #[test]
    fn window_check_small_schedule() {
        let stage = CantorStage::new((int(0), int(1)), vec![1], true, true).unwrap();
        let options = WindowCheckOptions { critical: true, ..Default::default() };
        let rep = density_window_check(&stage, options).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.max_density, ratio(1, 2));
        let row = rep
            .rows
            .iter()
            .find(|r| r.x == ratio(7, 22) && r.side == Side::Left)
            .expect("midpoint sample");
        assert!(row.density <= ratio(1, 4));
        for depth in 1..=2u32 {
            let stage = CantorStage::new((int(0), int(1)), vec![2; depth as usize], true, true).unwrap();
            let rep = density_window_check(&stage, options).unwrap();
            assert!(rep.passed, "depth {depth}: {}", rep.max_density);
        }
        let empty = CantorStage::new((int(0), int(1)), vec![], true, true).unwrap();
        assert!(density_window_check(&empty, options).unwrap().rows.is_empty());
    }

    #[test]
    fn full_measure_tiling() {
        let asm = build_full_measure_sosd(&unit(), &ratio(1, 4), 2, 1).unwrap();
        assert_eq!(asm.stages.len(), 2);
        assert!(asm.uncovered() <= ratio(1, 4));
        let (s1, s2) = (&asm.stages[0], &asm.stages[1]);
        assert_eq!(s1.window().1, s2.window().0);
        assert!(s1.contains_point(s1.window().1));
        assert!(!s2.contains_point(s2.window().0));
        // (9/11)^11 ≤ 1/8 < (9/11)^10 and (9/11)^14 ≤ 1/16 < (9/11)^13
        assert_eq!(s1.levels(), &[11]);
        assert_eq!(s2.levels(), &[14]);
        for (j, s) in asm.stages.iter().enumerate() {
            let allowed = ratio(1, 4) * pow2(-(j as i64 + 1));
            assert!(s.removed_measure() <= allowed);
        }
        let asm3 = build_full_measure_sosd(&unit(), &ratio(1, 4), 3, 1).unwrap();
        assert_eq!(asm3.stages[2].levels(), &[18]);
        let pts = asm3.sample_points(10, 7);
        assert!(pts.iter().all(|x| asm3.contains(x)));
        assert_eq!(pts, asm3.sample_points(10, 7));
        assert!(build_full_measure_sosd(&unit(), &int(1), 2, 1).is_err());
        assert_eq!(minimal_first_level(&ratio(1, 2), 1), Some(4));
    }

    #[test]
    fn single_copy_matches_direct_construction() {
        let asm = build_full_measure_sosd(&unit(), &ratio(1, 4), 1, 2).unwrap();
        let l = asm.stages[0].levels().to_vec();
        let direct = CantorStage::build_f_infinity(&LevelSchedule::new(l, ratio(1, 8)).unwrap(), 2).unwrap();
        assert_eq!(direct.complement_measure(), asm.stages[0].complement_measure());
    }

    proptest! {
        #[test]
        fn self_similarity(p in -50i64..50, q in 1i64..20, len in 1i64..40, k in 0u32..=4) {
            let a = ratio(p, q);
            let b = &a + ratio(len, 7);
            let scaled = levelk_open(&int(0), &int(1), k).unwrap().affine_image(&a, &(&b - &a));
            prop_assert_eq!(levelk_open(&a, &b, k).unwrap(), scaled);
        }

        #[test]
        fn stage_measure_is_additive(l1 in 1u32..3, l2 in 1u32..3, cut in 1i64..99) {
            let stage = CantorStage::new((int(0), int(1)), vec![l1, l2], true, true).unwrap();
            let c = ratio(cut, 99);
            let total = stage.measure_between(&int(0), &int(1));
            prop_assert_eq!(total.clone(), stage.complement_measure());
            prop_assert_eq!(stage.measure_between(&int(0), &c) + stage.measure_between(&c, &int(1)), total);
        }
    }
}
