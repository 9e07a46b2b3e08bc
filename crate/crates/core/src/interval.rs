//! Canonical finite unions of intervals over the extended rational line.
//!
//! Endpoint inclusivity is tracked exactly, so topology (closedness,
//! isolated points) is preserved along with Lebesgue measure. An
//! [`IntervalSet`] is immutable once built and always canonical: parts are
//! sorted, pairwise disjoint and never mergeable, so equal point sets have
//! identical part lists.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, max_of, min_of, parse_rational, Rational};

/// A point of the extended line. Variant order gives `NegInf < Finite(_) < PosInf`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedPoint {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtendedPoint {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedPoint::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedPoint::Finite(_))
    }

    fn cmp_rational(&self, x: &Rational) -> Ordering {
        match self {
            ExtendedPoint::NegInf => Ordering::Less,
            ExtendedPoint::Finite(q) => q.cmp(x),
            ExtendedPoint::PosInf => Ordering::Greater,
        }
    }
}

impl From<Rational> for ExtendedPoint {
    fn from(q: Rational) -> Self {
        ExtendedPoint::Finite(q)
    }
}

impl fmt::Display for ExtendedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedPoint::NegInf => f.write_str("-inf"),
            ExtendedPoint::Finite(q) => f.write_str(&format_rational(q)),
            ExtendedPoint::PosInf => f.write_str("+inf"),
        }
    }
}

impl std::str::FromStr for ExtendedPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "-inf" | "-infinity" => Ok(ExtendedPoint::NegInf),
            "+inf" | "inf" | "+infinity" | "infinity" => Ok(ExtendedPoint::PosInf),
            other => parse_rational(other).map(ExtendedPoint::Finite),
        }
    }
}

impl Serialize for ExtendedPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtendedPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// An interval as it appears in input files, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInterval {
    pub lo: ExtendedPoint,
    pub hi: ExtendedPoint,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl RawInterval {
    fn validate(&self) -> std::result::Result<Interval, String> {
        if self.lo > self.hi {
            return Err(format!("lo {} exceeds hi {}", self.lo, self.hi));
        }
        if self.lo == ExtendedPoint::PosInf || self.hi == ExtendedPoint::NegInf {
            return Err("interval lies at infinity".into());
        }
        if (!self.lo.is_finite() && self.lo_closed) || (!self.hi.is_finite() && self.hi_closed) {
            return Err("infinite endpoints cannot be closed".into());
        }
        if self.lo == self.hi && !(self.lo_closed && self.hi_closed) {
            return Err("degenerate interval must be closed on both ends".into());
        }
        Ok(Interval {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            lo_closed: self.lo_closed,
            hi_closed: self.hi_closed,
        })
    }
}

/// A nonempty interval with explicit endpoint inclusivity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: ExtendedPoint,
    hi: ExtendedPoint,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: ExtendedPoint, hi: ExtendedPoint, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        RawInterval { lo, hi, lo_closed, hi_closed }
            .validate()
            .map_err(|reason| Error::MalformedInterval { index: 0, reason })
    }

    /// `[a, b]`; panics if `a > b`.
    pub fn closed(a: Rational, b: Rational) -> Self {
        assert!(a <= b, "closed interval with lo > hi");
        Interval { lo: a.into(), hi: b.into(), lo_closed: true, hi_closed: true }
    }

    /// `(a, b)`; panics unless `a < b`.
    pub fn open(a: Rational, b: Rational) -> Self {
        assert!(a < b, "open interval must be nondegenerate");
        Interval { lo: a.into(), hi: b.into(), lo_closed: false, hi_closed: false }
    }

    pub fn point(x: Rational) -> Self {
        Interval::closed(x.clone(), x)
    }

    pub fn real_line() -> Self {
        Interval {
            lo: ExtendedPoint::NegInf,
            hi: ExtendedPoint::PosInf,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn lo(&self) -> &ExtendedPoint {
        &self.lo
    }

    pub fn hi(&self) -> &ExtendedPoint {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Finite endpoints as a pair, if both are finite.
    pub fn bounds(&self) -> Option<(&Rational, &Rational)> {
        Some((self.lo.finite()?, self.hi.finite()?))
    }

    /// Length, or `None` for unbounded intervals.
    pub fn length(&self) -> Option<Rational> {
        self.bounds().map(|(a, b)| b - a)
    }

    /// Closed at every finite endpoint.
    pub fn is_closed(&self) -> bool {
        (!self.lo.is_finite() || self.lo_closed) && (!self.hi.is_finite() || self.hi_closed)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above_lo = match self.lo.cmp_rational(x) {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Greater => false,
        };
        let below_hi = match self.hi.cmp_rational(x) {
            Ordering::Greater => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Less => false,
        };
        above_lo && below_hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        match lo.cmp(&hi) {
            Ordering::Less => Some(Interval { lo, hi, lo_closed, hi_closed }),
            Ordering::Equal if lo_closed && hi_closed && lo.is_finite() => {
                Some(Interval { lo, hi, lo_closed, hi_closed })
            }
            _ => None,
        }
    }

    /// Image under `t -> offset + scale * t` with `scale > 0`.
    pub fn affine_image(&self, offset: &Rational, scale: &Rational) -> Interval {
        assert!(scale.is_positive());
        let map = |p: &ExtendedPoint| match p {
            ExtendedPoint::Finite(q) => ExtendedPoint::Finite(offset + scale * q),
            other => other.clone(),
        };
        Interval { lo: map(&self.lo), hi: map(&self.hi), ..self.clone() }
    }

    pub fn to_raw(&self) -> RawInterval {
        RawInterval {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            lo_closed: self.lo_closed,
            hi_closed: self.hi_closed,
        }
    }

    /// `(hi, hi_closed)` ordering key: an open end precedes a closed end at the same point.
    fn end_key(&self) -> (&ExtendedPoint, bool) {
        (&self.hi, self.hi_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_degenerate() {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

/// Read access to a subset of the line for exact measure queries.
///
/// Implemented by explicit [`IntervalSet`]s and by the implicit Cantor-type
/// stages, so density scans run on either.
pub trait MeasuredSet {
    /// `|self ∩ [lo, hi]|` for finite `lo <= hi`.
    fn measure_between(&self, lo: &Rational, hi: &Rational) -> Rational;

    fn contains(&self, x: &Rational) -> bool;

    /// Sorted, deduplicated finite part endpoints lying in `[lo, hi]`.
    fn endpoints_between(&self, lo: &Rational, hi: &Rational) -> Vec<Rational>;
}

/// Canonical finite union of disjoint, non-adjacent intervals.
#[derive(Clone)]
pub struct IntervalSet {
    parts: Vec<Interval>,
    // prefix[k] = total length of parts[..k]; unbounded parts count as 0.
    prefix: Vec<Rational>,
}

impl PartialEq for IntervalSet {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Eq for IntervalSet {}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntervalSet({self})")
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("∅");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Default for IntervalSet {
    fn default() -> Self {
        IntervalSet::empty()
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new(), prefix: vec![Rational::zero()] }
    }

    pub fn real_line() -> Self {
        IntervalSet::from_interval(Interval::real_line())
    }

    pub fn from_interval(interval: Interval) -> Self {
        IntervalSet::from_canonical(vec![interval])
    }

    /// Validates and canonicalizes raw input; errors name the offending index.
    pub fn canonicalize(raw: &[RawInterval]) -> Result<Self> {
        let parts = raw
            .iter()
            .enumerate()
            .map(|(index, r)| r.validate().map_err(|reason| Error::MalformedInterval { index, reason }))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntervalSet::from_intervals(parts))
    }

    /// Canonical form of an arbitrary union of valid intervals.
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut items: Vec<Interval> = intervals.into_iter().collect();
        items.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| b.lo_closed.cmp(&a.lo_closed)));
        let mut merged: Vec<Interval> = Vec::with_capacity(items.len());
        for next in items {
            if let Some(cur) = merged.last_mut() {
                let touches = match next.lo.cmp(&cur.hi) {
                    Ordering::Less => true,
                    Ordering::Equal => cur.hi_closed || next.lo_closed,
                    Ordering::Greater => false,
                };
                if touches {
                    if next.lo == cur.lo {
                        cur.lo_closed |= next.lo_closed;
                    }
                    match next.hi.cmp(&cur.hi) {
                        Ordering::Greater => {
                            cur.hi = next.hi;
                            cur.hi_closed = next.hi_closed;
                        }
                        Ordering::Equal => cur.hi_closed |= next.hi_closed,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            merged.push(next);
        }
        IntervalSet::from_canonical(merged)
    }

    /// Caller guarantees `parts` is already canonical.
    pub(crate) fn from_canonical(parts: Vec<Interval>) -> Self {
        let mut prefix = Vec::with_capacity(parts.len() + 1);
        let mut acc = Rational::zero();
        prefix.push(acc.clone());
        for p in &parts {
            if let Some(len) = p.length() {
                acc += len;
            }
            prefix.push(acc.clone());
        }
        IntervalSet { parts, prefix }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.parts.iter().chain(other.parts.iter()).cloned())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.parts, &other.parts);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if let Some(piece) = a[i].intersect(&b[j]) {
                out.push(piece);
            }
            match a[i].end_key().cmp(&b[j].end_key()) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        IntervalSet::from_intervals(out)
    }

    /// `ℝ \ self`.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.parts.len() + 1);
        let mut cursor = ExtendedPoint::NegInf;
        let mut cursor_included = false;
        for p in &self.parts {
            if p.lo != ExtendedPoint::NegInf {
                let gap = Interval {
                    lo: cursor.clone(),
                    hi: p.lo.clone(),
                    lo_closed: cursor_included,
                    hi_closed: !p.lo_closed,
                };
                let nonempty = match gap.lo.cmp(&gap.hi) {
                    Ordering::Less => true,
                    Ordering::Equal => gap.lo_closed && gap.hi_closed,
                    Ordering::Greater => false,
                };
                if nonempty {
                    out.push(gap);
                }
            }
            cursor = p.hi.clone();
            cursor_included = !p.hi_closed && cursor.is_finite();
        }
        if cursor != ExtendedPoint::PosInf {
            out.push(Interval {
                lo: cursor,
                hi: ExtendedPoint::PosInf,
                lo_closed: cursor_included,
                hi_closed: false,
            });
        }
        IntervalSet::from_canonical(out)
    }

    /// `window \ self`.
    pub fn complement_in(&self, window: &Interval) -> IntervalSet {
        self.complement().intersect(&IntervalSet::from_interval(window.clone()))
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.intersect(&other.complement())
    }

    /// Lebesgue measure; `PosInf` when some part is unbounded.
    pub fn measure(&self) -> ExtendedPoint {
        if self.parts.iter().any(|p| !p.is_bounded()) {
            ExtendedPoint::PosInf
        } else {
            ExtendedPoint::Finite(self.prefix[self.parts.len()].clone())
        }
    }

    /// Measure of `self ∩ window`; the window must be bounded.
    pub fn measure_in(&self, window: &Interval) -> Result<Rational> {
        let (lo, hi) = window.bounds().ok_or(Error::InfiniteWindow)?;
        Ok(self.measure_between(lo, hi))
    }

    fn clipped_length(part: &Interval, lo: &Rational, hi: &Rational) -> Rational {
        let a = match &part.lo {
            ExtendedPoint::Finite(q) => max_of(q, lo),
            _ => lo.clone(),
        };
        let b = match &part.hi {
            ExtendedPoint::Finite(q) => min_of(q, hi),
            _ => hi.clone(),
        };
        if b > a {
            b - a
        } else {
            Rational::zero()
        }
    }

    /// Index of the part containing `x`, if any.
    pub fn locate(&self, x: &Rational) -> Option<usize> {
        let idx = self.parts.partition_point(|p| p.lo.cmp_rational(x) != Ordering::Greater);
        (idx > 0 && self.parts[idx - 1].contains(x)).then(|| idx - 1)
    }

    /// Distance from `x` to the set; `PosInf` for the empty set.
    pub fn distance(&self, x: &Rational) -> ExtendedPoint {
        if self.parts.is_empty() {
            return ExtendedPoint::PosInf;
        }
        let idx = self.parts.partition_point(|p| p.lo.cmp_rational(x) != Ordering::Greater);
        let mut best: Option<Rational> = None;
        if idx > 0 {
            let d = match &self.parts[idx - 1].hi {
                ExtendedPoint::Finite(h) if h < x => x - h,
                _ => Rational::zero(),
            };
            best = Some(d);
        }
        if let Some(next) = self.parts.get(idx) {
            if let ExtendedPoint::Finite(l) = &next.lo {
                let d = l - x;
                best = Some(match best {
                    Some(b) => min_of(&b, &d),
                    None => d,
                });
            }
        }
        ExtendedPoint::Finite(best.expect("nonempty set yields a distance"))
    }

    pub fn is_closed(&self) -> bool {
        self.parts.iter().all(Interval::is_closed)
    }

    /// Open components of `ℝ \ self`, including up to two half-lines.
    pub fn contiguous_intervals(&self) -> Result<Vec<Interval>> {
        if let Some(index) = self.parts.iter().position(|p| !p.is_closed()) {
            return Err(Error::NotClosed { index });
        }
        Ok(self.complement().parts)
    }

    /// Component of `ℝ \ self` containing `x` for a closed set, or `None` if `x ∈ self`.
    pub fn contiguous_interval_at(&self, x: &Rational) -> Option<Interval> {
        if self.locate(x).is_some() {
            return None;
        }
        let idx = self.parts.partition_point(|p| p.lo.cmp_rational(x) != Ordering::Greater);
        let (lo, lo_closed) = match idx.checked_sub(1).map(|i| &self.parts[i]) {
            Some(p) => (p.hi.clone(), !p.hi_closed),
            None => (ExtendedPoint::NegInf, false),
        };
        let (hi, hi_closed) = match self.parts.get(idx) {
            Some(p) => (p.lo.clone(), !p.lo_closed),
            None => (ExtendedPoint::PosInf, false),
        };
        Some(Interval { lo, hi, lo_closed, hi_closed })
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intersect(other) == *self
    }

    pub fn affine_image(&self, offset: &Rational, scale: &Rational) -> IntervalSet {
        IntervalSet::from_canonical(self.parts.iter().map(|p| p.affine_image(offset, scale)).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("interval sets always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SetFile = serde_json::from_str(text)?;
        IntervalSet::canonicalize(&file.parts)
    }
}

impl MeasuredSet for IntervalSet {
    fn measure_between(&self, lo: &Rational, hi: &Rational) -> Rational {
        if hi <= lo {
            return Rational::zero();
        }
        // parts[i..j] are the parts that can overlap (lo, hi) in positive length.
        let i = self.parts.partition_point(|p| p.hi.cmp_rational(lo) != Ordering::Greater);
        let j = self.parts.partition_point(|p| p.lo.cmp_rational(hi) == Ordering::Less);
        if j <= i {
            return Rational::zero();
        }
        let first = IntervalSet::clipped_length(&self.parts[i], lo, hi);
        if j - i == 1 {
            return first;
        }
        let last = IntervalSet::clipped_length(&self.parts[j - 1], lo, hi);
        first + last + (&self.prefix[j - 1] - &self.prefix[i + 1])
    }

    fn contains(&self, x: &Rational) -> bool {
        self.locate(x).is_some()
    }

    fn endpoints_between(&self, lo: &Rational, hi: &Rational) -> Vec<Rational> {
        let i = self.parts.partition_point(|p| p.hi.cmp_rational(lo) == Ordering::Less);
        let j = self.parts.partition_point(|p| p.lo.cmp_rational(hi) != Ordering::Greater);
        let mut out: Vec<Rational> = Vec::new();
        for p in &self.parts[i..j.max(i)] {
            for e in [&p.lo, &p.hi] {
                if let ExtendedPoint::Finite(q) = e {
                    if q >= lo && q <= hi && out.last() != Some(q) {
                        out.push(q.clone());
                    }
                }
            }
        }
        out
    }
}

/// On-disk set description: `{"parts": [{"lo", "hi", "lo_closed", "hi_closed"}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetFile {
    pub parts: Vec<RawInterval>,
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetFile { parts: self.parts.iter().map(Interval::to_raw).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = SetFile::deserialize(d)?;
        IntervalSet::canonicalize(&file.parts).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn closed(a: i64, b: i64) -> Interval {
        Interval::closed(int(a), int(b))
    }

    fn raw(lo: &str, hi: &str, lc: bool, hc: bool) -> RawInterval {
        RawInterval { lo: lo.parse().unwrap(), hi: hi.parse().unwrap(), lo_closed: lc, hi_closed: hc }
    }

    #[test]
    fn adjacent_closed_intervals_merge() {
        let s = IntervalSet::from_intervals([closed(0, 1), closed(1, 2)]);
        assert_eq!(s.parts(), &[closed(0, 2)]);
    }

    #[test]
    fn open_intervals_sharing_an_endpoint_stay_apart() {
        let s = IntervalSet::from_intervals([Interval::open(int(0), int(1)), Interval::open(int(1), int(2))]);
        assert_eq!(s.len(), 2);
        assert!(!s.contains(&int(1)));
    }

    #[test]
    fn nested_interval_is_absorbed() {
        let s = IntervalSet::from_intervals([closed(0, 3), closed(1, 2)]);
        assert_eq!(s.parts(), &[closed(0, 3)]);
    }

    #[test]
    fn isolated_point_bridges_open_neighbours() {
        let s = IntervalSet::from_intervals([
            Interval::open(int(0), int(1)),
            Interval::point(int(1)),
            Interval::open(int(1), int(2)),
        ]);
        assert_eq!(s.parts(), &[Interval::open(int(0), int(2))]);
    }

    #[test]
    fn malformed_input_names_its_index() {
        let err = IntervalSet::canonicalize(&[raw("0", "1", true, true), raw("3", "2", true, true)]).unwrap_err();
        match err {
            Error::MalformedInterval { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(IntervalSet::canonicalize(&[raw("-inf", "0", true, true)]).is_err());
        assert!(IntervalSet::canonicalize(&[raw("1", "1", true, false)]).is_err());
    }

    #[test]
    fn closed_sets_sharing_an_endpoint_meet_in_a_point() {
        let a = IntervalSet::from_interval(closed(0, 1));
        let b = IntervalSet::from_interval(closed(1, 2));
        assert_eq!(a.intersect(&b).parts(), &[Interval::point(int(1))]);
    }

    #[test]
    fn union_with_empty_is_identity() {
        let a = IntervalSet::from_intervals([closed(0, 1), closed(2, 3)]);
        assert_eq!(IntervalSet::empty().union(&a), a);
    }

    #[test]
    fn complement_of_level_one_pattern() {
        let g = IntervalSet::from_intervals([
            Interval::open(int(0), ratio(3, 11)),
            Interval::open(ratio(4, 11), ratio(7, 11)),
            Interval::open(ratio(8, 11), int(1)),
        ]);
        let f = g.complement_in(&closed(0, 1));
        assert_eq!(
            f.parts(),
            &[
                Interval::point(int(0)),
                Interval::closed(ratio(3, 11), ratio(4, 11)),
                Interval::closed(ratio(7, 11), ratio(8, 11)),
                Interval::point(int(1)),
            ]
        );
        assert_eq!(g.measure(), ExtendedPoint::Finite(ratio(9, 11)));
    }

    #[test]
    fn measures() {
        let s = IntervalSet::from_intervals([
            Interval::closed(int(0), ratio(1, 2)),
            Interval::closed(ratio(3, 4), int(1)),
        ]);
        assert_eq!(s.measure(), ExtendedPoint::Finite(ratio(3, 4)));
        assert_eq!(IntervalSet::from_interval(Interval::point(int(1))).measure(), ExtendedPoint::Finite(int(0)));
        assert_eq!(IntervalSet::real_line().measure(), ExtendedPoint::PosInf);
    }

    #[test]
    fn windowed_measures() {
        let unit = IntervalSet::from_interval(closed(0, 1));
        assert_eq!(unit.measure_in(&Interval::closed(ratio(1, 4), ratio(3, 4))).unwrap(), ratio(1, 2));
        assert_eq!(unit.measure_in(&closed(2, 3)).unwrap(), int(0));
        let two = IntervalSet::from_intervals([closed(0, 1), closed(2, 3)]);
        assert_eq!(two.measure_in(&Interval::closed(ratio(1, 2), ratio(5, 2))).unwrap(), int(1));
        let half_line = Interval::new(ExtendedPoint::Finite(int(0)), ExtendedPoint::PosInf, true, false).unwrap();
        assert!(matches!(unit.measure_in(&half_line), Err(Error::InfiniteWindow)));
        let line = IntervalSet::real_line();
        assert_eq!(line.measure_between(&int(-5), &int(5)), int(10));
    }

    #[test]
    fn distances() {
        let unit = IntervalSet::from_interval(closed(0, 1));
        assert_eq!(unit.distance(&int(2)), ExtendedPoint::Finite(int(1)));
        assert_eq!(unit.distance(&ratio(1, 2)), ExtendedPoint::Finite(int(0)));
        assert_eq!(IntervalSet::empty().distance(&int(0)), ExtendedPoint::PosInf);
        let open = IntervalSet::from_interval(Interval::open(int(0), int(1)));
        assert_eq!(open.distance(&int(1)), ExtendedPoint::Finite(int(0)));
        assert_eq!(open.distance(&int(-3)), ExtendedPoint::Finite(int(3)));
    }

    #[test]
    fn contiguous_components() {
        let unit = IntervalSet::from_interval(closed(0, 1));
        let comps = unit.contiguous_intervals().unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].to_string(), "(-inf, 0)");
        assert_eq!(comps[1].to_string(), "(1, +inf)");
        let two = IntervalSet::from_intervals([closed(0, 1), closed(2, 3)]);
        let comps = two.contiguous_intervals().unwrap();
        assert_eq!(comps.iter().map(|c| c.to_string()).collect::<Vec<_>>(), ["(-inf, 0)", "(1, 2)", "(3, +inf)"]);
        assert_eq!(IntervalSet::empty().contiguous_intervals().unwrap(), vec![Interval::real_line()]);
        let open = IntervalSet::from_interval(Interval::open(int(0), int(1)));
        assert!(matches!(open.contiguous_intervals(), Err(Error::NotClosed { index: 0 })));
        assert_eq!(two.contiguous_interval_at(&ratio(3, 2)), Some(Interval::open(int(1), int(2))));
        assert_eq!(two.contiguous_interval_at(&int(1)), None);
    }

    #[test]
    fn closedness() {
        assert!(IntervalSet::from_interval(closed(0, 1)).is_closed());
        assert!(!IntervalSet::from_interval(Interval::open(int(0), int(1))).is_closed());
        assert!(IntervalSet::from_interval(Interval::point(int(1))).is_closed());
        assert!(IntervalSet::real_line().is_closed());
    }

    #[test]
    fn json_round_trip_and_integer_strings() {
        let text = r#"{"parts": [{"lo": "1", "hi": "2", "lo_closed": true, "hi_closed": true},
                                  {"lo": "0", "hi": "3/2", "lo_closed": true, "hi_closed": false},
                                  {"lo": "5", "hi": "+inf", "lo_closed": false, "hi_closed": false}]}"#;
        let s = IntervalSet::from_json(text).unwrap();
        assert_eq!(s.to_string(), "[0, 2] ∪ (5, +inf)");
        assert_eq!(IntervalSet::from_json(&s.to_json()).unwrap(), s);
        assert!(IntervalSet::from_json(r#"{"parts": [{"lo": "x", "hi": "1", "lo_closed": true, "hi_closed": true}]}"#).is_err());
    }

    #[test]
    fn endpoints_in_window() {
        let two = IntervalSet::from_intervals([closed(0, 1), closed(2, 3)]);
        assert_eq!(two.endpoints_between(&ratio(1, 2), &int(2)), vec![int(1), int(2)]);
        assert_eq!(two.endpoints_between(&int(-5), &int(5)), vec![int(0), int(1), int(2), int(3)]);
    }
}
