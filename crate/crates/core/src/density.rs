//! One-sided Lebesgue densities and finite-range SOSD diagnostics.
//!
//! A set is strongly one-sided dense at `x` when the larger of
//! `|E ∩ [x-r, x]| / r` and `|E ∩ [x, x+r]| / r` tends to 1 as `r → 0+`.
//! That is a limit statement, so [`sosd_scan`] instead reports the exact
//! minimum of the larger density over a declared radius range.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::MeasuredSet;
use crate::rational::{int, max_of, min_of, ratio, Rational};

pub fn default_ratio() -> Rational {
    ratio(1, 2)
}

pub fn default_threshold() -> Rational {
    ratio(9, 10)
}

fn check_radius(r: &Rational) -> Result<()> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveRadius(r.clone()))
    }
}

/// `|E ∩ [x-r, x]| / r`.
pub fn left_density<S: MeasuredSet + ?Sized>(set: &S, x: &Rational, r: &Rational) -> Result<Rational> {
    check_radius(r)?;
    Ok(set.measure_between(&(x - r), x) / r)
}

/// `|E ∩ [x, x+r]| / r`.
pub fn right_density<S: MeasuredSet + ?Sized>(set: &S, x: &Rational, r: &Rational) -> Result<Rational> {
    check_radius(r)?;
    Ok(set.measure_between(x, &(x + r)) / r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    #[serde(with = "crate::rational::serde_rational")]
    pub radius: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub left: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub right: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub max: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    #[serde(with = "crate::rational::serde_rational")]
    pub point: Rational,
    pub rows: Vec<DensityRow>,
}

/// One row per radius; radii must be positive and strictly decreasing.
pub fn density_profile<S: MeasuredSet + ?Sized>(set: &S, x: &Rational, radii: &[Rational]) -> Result<DensityProfile> {
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
    }
    let rows = radii
        .iter()
        .map(|r| {
            let left = left_density(set, x, r)?;
            let right = right_density(set, x, r)?;
            let max = max_of(&left, &right);
            Ok(DensityRow { radius: r.clone(), left, right, max })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityProfile { point: x.clone(), rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// The evaluation budget ran out before either outcome was established.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SosdReport {
    #[serde(with = "crate::rational::serde_rational")]
    pub point: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub min_max_density: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub worst_radius: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub threshold: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub r_min: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub r_max: Rational,
    pub verdict: Verdict,
    pub radii_examined: usize,
}

/// [`sosd_scan_with_ratio`] using the default grid ratio 1/2.
pub fn sosd_scan<S: MeasuredSet + ?Sized>(
    set: &S,
    x: &Rational,
    r_max: &Rational,
    r_min: &Rational,
    threshold: &Rational,
) -> Result<SosdReport> {
    sosd_scan_with_ratio(set, x, r_max, r_min, threshold, &default_ratio())
}

/// Exact minimum over `r ∈ [r_min, r_max]` of `max(left, right)` density at `x`.
///
/// Between consecutive critical radii `|x - e|` (for part endpoints `e`) both
/// window measures are affine in `r`, so each density is monotone there and
/// the minimum of their maximum sits at a segment end or at the crossing of
/// the two measures. Those candidates, together with the geometric grid, are
/// evaluated exactly.
pub fn sosd_scan_with_ratio<S: MeasuredSet + ?Sized>(
    set: &S,
    x: &Rational,
    r_max: &Rational,
    r_min: &Rational,
    threshold: &Rational,
    grid_ratio: &Rational,
) -> Result<SosdReport> {
    check_radius(r_min)?;
    if r_min >= r_max {
        return Err(Error::InvalidArgument("need 0 < r_min < r_max".into()));
    }
    if threshold.is_negative() || *threshold > Rational::one() {
        return Err(Error::InvalidArgument("threshold must lie in [0, 1]".into()));
    }
    if !grid_ratio.is_positive() || *grid_ratio >= Rational::one() {
        return Err(Error::InvalidArgument("grid ratio must lie in (0, 1)".into()));
    }
    if !set.contains(x) {
        return Err(Error::PointNotInSet(x.clone()));
    }

    let mut window_measures: BTreeMap<Rational, (Rational, Rational)> = BTreeMap::new();
    let mut measures_at = |r: &Rational| -> (Rational, Rational) {
        window_measures
            .entry(r.clone())
            .or_insert_with(|| (set.measure_between(&(x - r), x), set.measure_between(x, &(x + r))))
            .clone()
    };

    let mut breaks: BTreeSet<Rational> = BTreeSet::new();
    breaks.insert(r_min.clone());
    breaks.insert(r_max.clone());
    for e in set.endpoints_between(&(x - r_max), &(x + r_max)) {
        let r = (&e - x).abs();
        if &r > r_min && &r < r_max {
            breaks.insert(r);
        }
    }

    let mut candidates: BTreeSet<Rational> = breaks.clone();
    let mut r = r_max.clone();
    while &r >= r_min {
        candidates.insert(r.clone());
        r = &r * grid_ratio;
    }

    let breaks: Vec<Rational> = breaks.into_iter().collect();
    for seg in breaks.windows(2) {
        let (s1, s2) = (&seg[0], &seg[1]);
        let (l1, r1) = measures_at(s1);
        let (l2, r2) = measures_at(s2);
        let width = s2 - s1;
        let slope_left = (&l2 - &l1) / &width;
        let slope_right = (&r2 - &r1) / &width;
        if slope_left != slope_right {
            let crossing = s1 + (&r1 - &l1) / (&slope_left - &slope_right);
            if &crossing > s1 && &crossing < s2 {
                candidates.insert(crossing);
            }
        }
    }

    let mut best: Option<(Rational, Rational)> = None;
    for r in candidates.iter().rev() {
        let (l, rt) = measures_at(r);
        let value = max_of(&l, &rt) / r;
        if best.as_ref().is_none_or(|(v, _)| &value < v) {
            best = Some((value, r.clone()));
        }
    }
    let (min_max_density, worst_radius) = best.expect("radius range is nonempty");
    let verdict = if &min_max_density >= threshold { Verdict::Pass } else { Verdict::Fail };
    Ok(SosdReport {
        point: x.clone(),
        min_max_density,
        worst_radius,
        threshold: threshold.clone(),
        r_min: r_min.clone(),
        r_max: r_max.clone(),
        verdict,
        radii_examined: candidates.len(),
    })
}

/// Outcome of [`sosd_certify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SosdCertificate {
    #[serde(with = "crate::rational::serde_rational")]
    pub point: Rational,
    /// Proven lower bound on `max(left, right)` over the whole radius range;
    /// present only when the verdict is PASS.
    #[serde(serialize_with = "crate::rational::serde_rational_option::serialize")]
    pub lower_bound: Option<Rational>,
    /// Smallest value actually attained at an evaluated radius.
    #[serde(with = "crate::rational::serde_rational")]
    pub min_found: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub worst_radius: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub threshold: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub r_min: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub r_max: Rational,
    pub verdict: Verdict,
    pub radii_examined: usize,
}

/// Decides whether `max(left, right) ≥ threshold` on all of `[r_min, r_max]`
/// without enumerating endpoints, for sets too fine for [`sosd_scan`].
///
/// Window measures grow with `r`, so on a segment `[r1, r2]` the larger
/// density is at least `max(|E∩[x-r1,x]|, |E∩[x,x+r1]|) / r2`. Segments are
/// bisected until that bound reaches the threshold (PASS) or an evaluated
/// radius falls below it (FAIL, with the radius as witness).
pub fn sosd_certify<S: MeasuredSet + ?Sized>(
    set: &S,
    x: &Rational,
    r_max: &Rational,
    r_min: &Rational,
    threshold: &Rational,
    max_evaluations: usize,
) -> Result<SosdCertificate> {
    check_radius(r_min)?;
    if r_min >= r_max {
        return Err(Error::InvalidArgument("need 0 < r_min < r_max".into()));
    }
    if threshold.is_negative() || *threshold > Rational::one() {
        return Err(Error::InvalidArgument("threshold must lie in [0, 1]".into()));
    }
    if !set.contains(x) {
        return Err(Error::PointNotInSet(x.clone()));
    }
    let mut evaluated: BTreeMap<Rational, Rational> = BTreeMap::new();
    let mut larger_measure = |r: &Rational| -> Rational {
        evaluated
            .entry(r.clone())
            .or_insert_with(|| max_of(&set.measure_between(&(x - r), x), &set.measure_between(x, &(x + r))))
            .clone()
    };

    let mut segments = Vec::new();
    let mut hi = r_max.clone();
    while &hi > r_min {
        let lo = max_of(&(&hi * default_ratio()), r_min);
        segments.push((lo.clone(), hi));
        hi = lo;
    }

    let mut lower_bound: Option<Rational> = None;
    let mut min_found: Option<(Rational, Rational)> = None;
    let mut verdict = Verdict::Pass;
    let mut evaluations = 0usize;
    while let Some((r1, r2)) = segments.pop() {
        let m1 = larger_measure(&r1);
        let m2 = larger_measure(&r2);
        evaluations += 2;
        for (r, m) in [(&r1, &m1), (&r2, &m2)] {
            let value = m / r;
            if min_found.as_ref().is_none_or(|(v, _)| &value < v) {
                min_found = Some((value, r.clone()));
            }
        }
        let bound = &m1 / &r2;
        if min_found.as_ref().is_some_and(|(v, _)| v < threshold) {
            verdict = Verdict::Fail;
            break;
        }
        if &bound >= threshold {
            lower_bound = Some(lower_bound.map_or(bound.clone(), |b| min_of(&b, &bound)));
            continue;
        }
        if evaluations >= max_evaluations {
            verdict = Verdict::Inconclusive;
            break;
        }
        let mid = (&r1 + &r2) / int(2);
        segments.push((mid.clone(), r2));
        segments.push((r1, mid));
    }
    let (min_found, worst_radius) = min_found.expect("radius range is nonempty");
    Ok(SosdCertificate {
        point: x.clone(),
        lower_bound: if verdict == Verdict::Pass { lower_bound } else { None },
        min_found,
        worst_radius,
        threshold: threshold.clone(),
        r_min: r_min.clone(),
        r_max: r_max.clone(),
        verdict,
        radii_examined: evaluated.len(),
    })
}
