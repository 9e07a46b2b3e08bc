//! Naive recomputation of every term f_n, independent of the run-length
//! streams, the cell cache and the interval-set algebra.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lipone::rational::{int, ratio, Rational};
use lipone::verify::bundled_chains;
use lipone::{ExtendedPoint, LipFunction};

type Part = (Rational, Rational);

fn parts(f: &LipFunction, n: usize) -> Vec<Part> {
    f.chain()
        .stage(n)
        .parts()
        .iter()
        .map(|p| match (p.lo(), p.hi()) {
            (ExtendedPoint::Finite(a), ExtendedPoint::Finite(b)) => (a.clone(), b.clone()),
            _ => panic!("bundled chains are bounded"),
        })
        .collect()
}

fn overlap(stage: &[Part], lo: &Rational, hi: &Rational) -> Rational {
    stage
        .iter()
        .map(|(a, b)| {
            let l = if a > lo { a } else { lo };
            let h = if b < hi { b } else { hi };
            if l < h {
                h - l
            } else {
                Rational::zero()
            }
        })
        .sum()
}

fn largest_power_of_two_below(q: &Rational) -> Rational {
    let mut p = Rational::one();
    while &p > q {
        p /= int(2);
    }
    while &(&p * int(2)) <= q {
        p *= int(2);
    }
    p
}

fn step(gap: &Rational, level: u32) -> Rational {
    let scale = Rational::one() / Rational::from_integer((1u64 << level).into());
    let mut m = &scale * gap * gap;
    if scale < m {
        m = scale.clone();
    }
    if *gap < m {
        m = gap.clone();
    }
    largest_power_of_two_below(&(ratio(1, 4) * m))
}

/// `(g_k, g_{k-1})` with `g_k < h <= g_{k-1}`, walking the gaps one by one.
fn bracket(first_gap: &Rational, h: &Rational, level: u32) -> (Rational, Rational) {
    let mut prev = first_gap.clone();
    loop {
        let next = &prev - step(&prev, level);
        if next < *h {
            return (next, prev);
        }
        prev = next;
    }
}

/// Complementary open intervals of a stage, `None` standing for ±∞.
fn gaps(stage: &[Part]) -> Vec<(Option<Rational>, Option<Rational>)> {
    let mut out = vec![(None, Some(stage[0].0.clone()))];
    for w in stage.windows(2) {
        out.push((Some(w[0].1.clone()), Some(w[1].0.clone())));
    }
    out.push((Some(stage[stage.len() - 1].1.clone()), None));
    out
}

fn oracle_fn(f: &LipFunction, level: u32, x: &Rational) -> Rational {
    if level == 1 {
        let e1 = parts(f, 1);
        return if x.is_negative() { overlap(&e1, x, &int(0)) } else { overlap(&e1, &int(0), x) };
    }
    let previous = parts(f, level as usize - 1);
    let Some((a, b)) = gaps(&previous).into_iter().find(|(a, b)| {
        a.as_ref().is_none_or(|a| a < x) && b.as_ref().is_none_or(|b| x < b)
    }) else {
        return Rational::zero();
    };
    let grid = Rational::one() / Rational::from_integer((1u64 << level).into());
    let (lo, hi) = match (a, b) {
        (Some(a), Some(b)) => {
            let half = (&b - &a) / int(2);
            if *x <= &a + &half {
                let (gk, gk1) = bracket(&half, &(x - &a), level);
                (&a + gk, &a + gk1)
            } else {
                let (gk, gk1) = bracket(&half, &(&b - x), level);
                (&b - gk1, &b - gk)
            }
        }
        (Some(a), None) => {
            if *x <= &a + int(1) {
                let (gk, gk1) = bracket(&int(1), &(x - &a), level);
                (&a + gk, &a + gk1)
            } else {
                let a0 = &a + int(1);
                let lo = &a0 + ((x - &a0) / &grid).floor() * &grid;
                let hi = &lo + &grid;
                (lo, hi)
            }
        }
        (None, Some(b)) => {
            if *x >= &b - int(1) {
                let (gk, gk1) = bracket(&int(1), &(&b - x), level);
                (&b - gk1, &b - gk)
            } else {
                let b0 = &b - int(1);
                let hi = &b0 - ((&b0 - x) / &grid).floor() * &grid;
                let lo = &hi - &grid;
                (lo, hi)
            }
        }
        (None, None) => unreachable!(),
    };
    let current = parts(f, level as usize);
    let left = overlap(&current, &lo, x);
    let right = overlap(&current, x, &hi);
    if left < right {
        left
    } else {
        right
    }
}

#[test]
fn every_term_matches_the_naive_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, chain) in bundled_chains() {
        let f = LipFunction::new(chain.clone());
        for _ in 0..300 {
            // Dyadic and non-dyadic points, kept at least 2^-10 from stage ends by the denominators.
            let q: i64 = rng.gen_range(1..=1024);
            let p: i64 = rng.gen_range(-12 * q..=12 * q);
            let x = ratio(p, q);
            for level in 1..=chain.len() as u32 {
                assert_eq!(f.eval_fn(level, &x), oracle_fn(&f, level, &x), "{name}: f_{level}({x})");
            }
        }
    }
}
