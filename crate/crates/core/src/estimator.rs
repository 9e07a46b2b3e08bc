//! Rigorous enclosures of `M_f(x, r) = sup{|f(x) - f(y)| : |x - y| ≤ r} / r`
//! and of its minimum and maximum over a finite radius range.
//!
//! `f` is evaluated exactly on a uniform grid of each one-sided window. Because
//! `f` is 1-Lipschitz, on a grid cell `[u, v]` of width `h` it stays between
//! `(f(u) + f(v) - h)/2` and `(f(u) + f(v) + h)/2`, which turns the grid maximum
//! into a certified upper bound.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::builder::LipFunction;
use crate::error::{Error, Result};
use crate::rational::{int, max_of, min_of, Rational};

/// Default grid points per one-sided window.
pub const DEFAULT_REFINEMENT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscillationQuery {
    pub x: Rational,
    pub r: Rational,
    pub refinement: u32,
}

impl OscillationQuery {
    pub fn new(x: Rational, r: Rational, refinement: u32) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::NonPositiveRadius(r));
        }
        if refinement < 2 {
            return Err(Error::InvalidArgument("refinement must be at least 2".into()));
        }
        Ok(OscillationQuery { x, r, refinement })
    }
}

/// `lower ≤ M_f(x, r) ≤ upper`.
pub fn m_f(f: &LipFunction, q: &OscillationQuery) -> Result<(Rational, Rational)> {
    if !q.r.is_positive() {
        return Err(Error::NonPositiveRadius(q.r.clone()));
    }
    if q.refinement < 2 {
        return Err(Error::InvalidArgument("refinement must be at least 2".into()));
    }
    let fx = f.eval(&q.x);
    let steps = q.refinement as i64;
    let h = &q.r / int(steps);
    let mut best = Rational::zero();
    let mut cone = Rational::zero();
    for start in [&q.x - &q.r, q.x.clone()] {
        let values: Vec<Rational> = (0..=steps).map(|i| f.eval(&(&start + &h * int(i)))).collect();
        for v in &values {
            best = max_of(&best, &(v - &fx).abs());
        }
        for pair in values.windows(2) {
            let mid = (&pair[0] + &pair[1]) / int(2);
            let half = &h / int(2);
            let above = &mid + &half - &fx;
            let below = &fx - (&mid - &half);
            cone = max_of(&cone, &max_of(&above, &below));
        }
    }
    let lower = &best / &q.r;
    let upper = min_of(&(max_of(&best, &cone) / &q.r), &Rational::one());
    Ok((lower, upper))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRow {
    #[serde(with = "crate::rational::serde_rational")]
    pub r: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub lower: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub upper: Rational,
}

/// Enclosures of `min_r M_f(x, r)` and `max_r M_f(x, r)` over the scanned radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipEstimate {
    #[serde(with = "crate::rational::serde_rational")]
    pub x: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub r_min: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub r_max: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub lip_lower: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub lip_upper: Rational,
    #[serde(rename = "Lip_lower", with = "crate::rational::serde_rational")]
    pub big_lip_lower: Rational,
    #[serde(rename = "Lip_upper", with = "crate::rational::serde_rational")]
    pub big_lip_upper: Rational,
    /// Radii in decreasing order.
    pub rows: Vec<RadiusRow>,
}

impl LipEstimate {
    /// `r·M_f(x, r)` is nondecreasing in `r`; returns the first pair of rows
    /// whose enclosures contradict that.
    pub fn scale_inconsistency(&self) -> Option<(usize, usize)> {
        for (i, small) in self.rows.iter().enumerate() {
            for (j, large) in self.rows.iter().enumerate().take(i) {
                if &small.r * &small.lower > &large.r * &large.upper {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Radii `r_max·ratio^k` down to `r_min`, with `r_min` itself last.
pub fn radius_grid(r_max: &Rational, r_min: &Rational, ratio: &Rational) -> Result<Vec<Rational>> {
    if !r_min.is_positive() || r_min >= r_max {
        return Err(Error::InvalidArgument("radii need 0 < r_min < r_max".into()));
    }
    if !ratio.is_positive() || *ratio >= Rational::one() {
        return Err(Error::InvalidArgument("ratio must lie in (0, 1)".into()));
    }
    let mut radii = Vec::new();
    let mut r = r_max.clone();
    while r > *r_min {
        radii.push(r.clone());
        r *= ratio;
    }
    radii.push(r_min.clone());
    Ok(radii)
}

pub fn lip_scan(
    f: &LipFunction,
    x: &Rational,
    r_max: &Rational,
    r_min: &Rational,
    ratio: &Rational,
    refinement: u32,
) -> Result<LipEstimate> {
    let mut rows = Vec::new();
    for r in radius_grid(r_max, r_min, ratio)? {
        let (lower, upper) = m_f(f, &OscillationQuery::new(x.clone(), r.clone(), refinement)?)?;
        rows.push(RadiusRow { r, lower, upper });
    }
    let fold = |pick: fn(&RadiusRow) -> &Rational, better: fn(&Rational, &Rational) -> Rational| {
        rows.iter().skip(1).fold(pick(&rows[0]).clone(), |acc, row| better(&acc, pick(row)))
    };
    Ok(LipEstimate {
        x: x.clone(),
        r_min: r_min.clone(),
        r_max: r_max.clone(),
        lip_lower: fold(|r| &r.lower, min_of),
        lip_upper: fold(|r| &r.upper, min_of),
        big_lip_lower: fold(|r| &r.lower, max_of),
        big_lip_upper: fold(|r| &r.upper, max_of),
        rows,
    })
}
