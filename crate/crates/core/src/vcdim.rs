//! Shattering, VC dimension, the augmented class as an explicit class, and
//! the growth-function threshold that bounds its VC dimension.

use std::collections::HashSet;

use crate::classes::{make_explicit, ClassKind, HypothesisClass};
use crate::data::Hypothesis;
use crate::error::{Error, Result};

/// Largest `cap` accepted by [`vc_dimension`].
pub const MAX_VC_CAP: usize = 16;
/// Largest `|F|^k * k^n` accepted by [`augment_class`].
pub const MAX_AUGMENTED_CANDIDATES: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcResult {
    Exact(usize),
    /// A set of `cap` points is shattered; the true value may be larger.
    AtLeast(usize),
}

impl VcResult {
    pub fn value(self) -> usize {
        match self {
            VcResult::Exact(d) | VcResult::AtLeast(d) => d,
        }
    }
}

/// Whether `hyps` realize all `2^|points|` labelings of `points`.
pub fn is_shattered(hyps: &[Hypothesis], points: &[usize]) -> bool {
    if points.len() >= 64 {
        return false;
    }
    let need = 1usize << points.len();
    if hyps.len() < need {
        return false;
    }
    let mut patterns = HashSet::with_capacity(need);
    for h in hyps {
        let p = points
            .iter()
            .enumerate()
            .fold(0u64, |acc, (b, &x)| acc | (u64::from(h.label(x)) << b));
        patterns.insert(p);
        if patterns.len() == need {
            return true;
        }
    }
    false
}

/// A largest shattered set of size at most `cap`, searched level by level.
///
/// Shattered sets are closed under taking subsets, so every shattered set
/// of size `t + 1` extends one of size `t` by a later point.
pub fn largest_shattered_set(hyps: &[Hypothesis], points: usize, cap: usize) -> Vec<usize> {
    if hyps.is_empty() {
        return Vec::new();
    }
    // points on which the class never disagrees cannot be shattered; try the
    // most evenly split points first
    let mut order: Vec<(usize, usize)> = (0..points)
        .map(|x| {
            let ones = hyps.iter().filter(|h| h.label(x)).count();
            (x, ones.min(hyps.len() - ones))
        })
        .filter(|&(_, split)| split > 0)
        .collect();
    order.sort_by_key(|&(x, split)| (std::cmp::Reverse(split), x));
    let order: Vec<usize> = order.into_iter().map(|(x, _)| x).collect();

    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let mut best = Vec::new();
    // a set of size t needs 2^t distinct hypotheses
    let max_size = cap.min(usize::BITS as usize - 1 - hyps.len().leading_zeros() as usize);
    while best.len() < max_size {
        let mut next = Vec::new();
        for set in &level {
            let start = set.last().map_or(0, |&x| order.iter().position(|&y| y == x).unwrap() + 1);
            for &x in &order[start..] {
                let mut grown = set.clone();
                grown.push(x);
                if is_shattered(hyps, &grown) {
                    next.push(grown);
                }
            }
        }
        match next.first() {
            Some(s) => best = s.clone(),
            None => break,
        }
        level = next;
    }
    best.sort_unstable();
    best
}

/// The VC dimension of `class`, exact up to `cap`.
pub fn vc_dimension(class: &HypothesisClass, cap: usize) -> Result<VcResult> {
    if cap > MAX_VC_CAP {
        return Err(Error::capacity(format!("cap {cap} exceeds {MAX_VC_CAP}")));
    }
    let capped = |d: usize| {
        if d >= cap {
            VcResult::AtLeast(cap)
        } else {
            VcResult::Exact(d)
        }
    };
    match class.kind() {
        ClassKind::AllFunctions { d } => return Ok(capped(*d)),
        ClassKind::AtMostOnePositive { d } => return Ok(capped(usize::from(*d >= 1))),
        ClassKind::ThresholdBudget { d } => return Ok(capped(*d as usize)),
        _ => {}
    }
    let hyps = class.enumerate()?;
    let found = largest_shattered_set(&hyps, class.space().size(), cap).len();
    Ok(capped(found))
}

/// The augmented class over `[n] x X` as an explicit class: every labeling
/// `(i, x) -> f_{c_i}(x)` for `f in F^k` and `c in [k]^n`. Point `(i, x)` has
/// id `i * |X| + x`.
pub fn augment_class(class: &HypothesisClass, n: usize, k: usize) -> Result<HypothesisClass> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("n and k must be at least 1"));
    }
    let base = class.enumerate()?;
    let x = class.space().size();
    let candidates = (base.len() as u128)
        .checked_pow(k as u32)
        .and_then(|a| (k as u128).checked_pow(n as u32).and_then(|b| a.checked_mul(b)));
    if candidates.is_none_or(|c| c > MAX_AUGMENTED_CANDIDATES) {
        return Err(Error::capacity(format!(
            "|F|^k * k^n exceeds {MAX_AUGMENTED_CANDIDATES} (|F| = {}, n = {n}, k = {k})",
            base.len()
        )));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut tuple = vec![0usize; k];
    loop {
        let mut assign = vec![0usize; n];
        loop {
            let h = Hypothesis::from_fn(n * x, |p| base[tuple[assign[p / x]]].label(p % x));
            if seen.insert(h.clone()) {
                out.push(h);
            }
            if !odometer(&mut assign, k) {
                break;
            }
        }
        if !odometer(&mut tuple, base.len()) {
            break;
        }
    }
    make_explicit(n * x, out, None)
}

/// Advances `digits` in base `radix`; false after the last value.
fn odometer(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Natural log of the growth bound: `m` when `m <= d`, else `d (1 + ln(m/d))`.
pub fn sauer_bound_ln(m: usize, d: usize) -> f64 {
    if m <= d {
        m as f64
    } else {
        let (m, d) = (m as f64, d as f64);
        d * (1.0 + (m / d).ln())
    }
}

/// `e^m` when `m <= d`, else `(e m / d)^d`.
pub fn sauer_bound(m: usize, d: usize) -> f64 {
    sauer_bound_ln(m, d).exp()
}

/// Smallest `m >= kd` with `n ln k + kd ln(e m / (kd)) < m ln 2`. No set of
/// `m` points of the augmented class is shattered, so its VC dimension is at
/// most `m - 1`.
pub fn vc_bound_threshold(d: usize, n: usize, k: usize) -> Result<usize> {
    if d == 0 || k == 0 || n < k {
        return Err(Error::invalid(format!(
            "need n >= k >= 1 and d >= 1 (d = {d}, n = {n}, k = {k})"
        )));
    }
    let kd = (k * d) as f64;
    let lhs = |m: usize| n as f64 * (k as f64).ln() + kd * (std::f64::consts::E * m as f64 / kd).ln();
    let mut m = k * d;
    while lhs(m) >= m as f64 * std::f64::consts::LN_2 {
        m += 1;
    }
    Ok(m)
}
