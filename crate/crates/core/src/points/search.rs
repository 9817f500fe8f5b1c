use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::local::DiagonalForm;

/// Primitive integer triple with first nonzero coordinate positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RationalPoint {
    pub coords: [i64; 3],
}

impl RationalPoint {
    /// Canonical representative of the projective class of `x`.
    pub fn canonical(x: [i64; 3]) -> Option<Self> {
        let g = x[0].unsigned_abs().gcd(&x[1].unsigned_abs()).gcd(&x[2].unsigned_abs());
        if g == 0 {
            return None;
        }
        let g = g as i64;
        let mut c = [x[0] / g, x[1] / g, x[2] / g];
        if c.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        Some(Self { coords: c })
    }

    pub fn height(&self) -> u64 {
        self.coords.iter().map(|c| c.unsigned_abs()).max().unwrap()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.coords;
        write!(f, "({a}, {b}, {c})")
    }
}

/// Integer d-th root of `s >= 0` when exact.
fn exact_root(s: i128, d: u32) -> Option<i128> {
    if s < 0 {
        return None;
    }
    if s < 2 {
        return Some(s);
    }
    if d == 2 {
        // quadratic residues mod 64 filter out most non-squares cheaply
        const SQ64: u64 = {
            let mut mask = 0u64;
            let mut x = 0;
            while x < 64 {
                mask |= 1 << ((x * x) % 64);
                x += 1;
            }
            mask
        };
        if (SQ64 >> (s & 63)) & 1 == 0 {
            return None;
        }
    }
    let mut r = (s as f64).powf(1.0 / d as f64).round() as i128;
    for _ in 0..3 {
        match r.checked_pow(d) {
            Some(v) if v == s => return Some(r),
            Some(v) if v > s => r -= 1,
            _ => r += 1,
        }
    }
    let lo = (r - 2).max(0);
    (lo..=r + 2).find(|&c| c.checked_pow(d) == Some(s))
}

struct Searcher<'a> {
    a: [i128; 3],
    d: u32,
    bound: i64,
    powers: Vec<i128>,
    form: &'a DiagonalForm,
}

impl<'a> Searcher<'a> {
    fn new(form: &'a DiagonalForm, bound: u64) -> Result<Self> {
        if form.arity() != 3 {
            return domain("point search needs a ternary form");
        }
        let d = form.degree();
        let c = form.coeffs();
        let max_a = c.iter().map(|a| a.unsigned_abs()).max().unwrap() as i128;
        let bound_i = i64::try_from(bound).map_err(|_| Error::Overflow("height bound"))?;
        // |a1 x1^d| + |a2 x2^d| must fit
        (bound as i128)
            .checked_pow(d)
            .and_then(|v| v.checked_mul(2 * max_a))
            .ok_or(Error::Overflow("point search"))?;
        let powers = (0..=bound as i128).map(|x| x.pow(d)).collect();
        Ok(Self { a: [c[0] as i128, c[1] as i128, c[2] as i128], d, bound: bound_i, powers, form })
    }

    fn definite(&self) -> bool {
        self.d.is_multiple_of(2) && (self.a.iter().all(|&v| v > 0) || self.a.iter().all(|&v| v < 0))
    }

    fn pow(&self, x: i64) -> i128 {
        let v = self.powers[x.unsigned_abs() as usize];
        if x < 0 && self.d % 2 == 1 {
            -v
        } else {
            v
        }
    }

    /// Points with the given first two coordinates.
    fn complete(&self, x1: i64, x2: i64, mut out: impl FnMut(RationalPoint) -> bool) -> bool {
        if x1 == 0 && x2 == 0 {
            return false;
        }
        let rest = self.a[0] * self.pow(x1) + self.a[1] * self.pow(x2);
        if rest % self.a[2] != 0 {
            return false;
        }
        let s = -rest / self.a[2];
        let root = if self.d.is_multiple_of(2) {
            exact_root(s, self.d)
        } else {
            exact_root(s.abs(), self.d).map(|r| if s < 0 { -r } else { r })
        };
        let Some(r) = root else {
            return false;
        };
        if r.abs() > self.bound as i128 {
            return false;
        }
        let r = r as i64;
        if x1.gcd(&x2).gcd(&r) != 1 {
            return false;
        }
        let candidates: &[i64] = if self.d.is_multiple_of(2) && r != 0 { &[r, -r] } else { &[r] };
        for &x3 in candidates {
            let p = RationalPoint::canonical([x1, x2, x3]).unwrap();
            debug_assert_eq!(self.form.evaluate(&p.coords), Some(0));
            if out(p) {
                return true;
            }
        }
        false
    }
}

/// All projective points of height at most `bound`, canonically sorted.
pub fn search_points(form: &DiagonalForm, bound: u64) -> Result<Vec<RationalPoint>> {
    let s = Searcher::new(form, bound)?;
    let mut pts = Vec::new();
    if s.definite() {
        return Ok(pts);
    }
    let b = s.bound;
    // x and -x are the same point, so x1 >= 0 suffices
    for x1 in 0..=b {
        let lo = if x1 == 0 { 0 } else { -b };
        for x2 in lo..=b {
            s.complete(x1, x2, |p| {
                pts.push(p);
                false
            });
        }
    }
    pts.sort_unstable();
    pts.dedup();
    Ok(pts)
}

/// Some point of height at most `bound`, searching `max(|x1|, |x2|)` shells
/// outward so small points are found first.
pub fn has_point(form: &DiagonalForm, bound: u64) -> Result<Option<RationalPoint>> {
    let s = Searcher::new(form, bound)?;
    if s.definite() {
        return Ok(None);
    }
    let mut found = None;
    let mut hit = |p: RationalPoint| {
        found = Some(p);
        true
    };
    for h in 1..=s.bound {
        // shell max(|x1|, |x2|) = h with x1 >= 0
        if s.complete(0, h, &mut hit) {
            break;
        }
        let mut done = false;
        for x2 in -h..=h {
            if s.complete(h, x2, &mut hit) {
                done = true;
                break;
            }
        }
        if done {
            break;
        }
        for x1 in 1..h {
            if s.complete(x1, h, &mut hit) || s.complete(x1, -h, &mut hit) {
                done = true;
                break;
            }
        }
        if done {
            break;
        }
    }
    Ok(found)
}
