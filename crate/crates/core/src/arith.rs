//! Exact elementary number theory on signed 64-bit integers.
//!
//! Everything here is a pure function of its arguments. Intermediate
//! products go through `u128` or checked arithmetic; nothing wraps.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::Rational;

const TRIAL_LIMIT: u64 = 1_000_000;

/// Prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub value: u64,
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mu(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
    }

    /// Exponent of `p` in the factorization (0 when absent).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_dfree(&self, d: u32) -> bool {
        self.factors.iter().all(|&(_, e)| e < d)
    }
}

/// `a = u * v^d` with `|u|` d-free and `v >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DfreeDecomposition {
    pub u: i64,
    pub v: u64,
    pub d: u32,
}

// ---------------------------------------------------------------------------
// modular helpers

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Least non-negative residue of a signed integer.
#[inline]
pub fn rem_euclid_u(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// `p^k`, or an overflow error.
pub fn checked_pow(p: u64, k: u32) -> Result<u64> {
    p.checked_pow(k).ok_or(Error::Overflow("prime power"))
}

pub fn gcd_i64(a: i64, b: i64) -> u64 {
    a.unsigned_abs().gcd(&b.unsigned_abs())
}

// ---------------------------------------------------------------------------
// primality and factorization

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Odd primes and 2 up to `n` by an Eratosthenes sieve.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime_above(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

// Brent's variant of Pollard rho with a fixed polynomial sequence, so that
// the split found for a given n never changes between runs.
fn rho_split(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 0u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(r - k).min(128) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let f = rho_split(n);
    split_large(f, out);
    split_large(n / f, out);
}

/// Factorization of `|n|`.
pub fn factorize(n: i64) -> Result<Factorization> {
    if n == 0 {
        return domain("cannot factorize 0");
    }
    let value = n.unsigned_abs();
    let mut m = value;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, m: &mut u64, factors: &mut Vec<(u64, u32)>| {
        let mut e = 0;
        while (*m).is_multiple_of(p) {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m, &mut factors);
    push(3, &mut m, &mut factors);
    let mut p = 5u64;
    while p <= TRIAL_LIMIT && p * p <= m {
        push(p, &mut m, &mut factors);
        push(p + 2, &mut m, &mut factors);
        p += 6;
    }
    if m > 1 {
        if p * p > m {
            factors.push((m, 1));
        } else {
            let mut big = Vec::new();
            split_large(m, &mut big);
            big.sort_unstable();
            for q in big {
                match factors.last_mut() {
                    Some((last, e)) if *last == q => *e += 1,
                    _ => factors.push((q, 1)),
                }
            }
        }
    }
    Ok(Factorization { value, factors })
}

pub fn omega(n: i64) -> Result<u32> {
    Ok(factorize(n)?.omega())
}

pub fn mu(n: i64) -> Result<i8> {
    Ok(factorize(n)?.mu())
}

pub fn phi(n: i64) -> Result<u64> {
    Ok(factorize(n)?.phi())
}

/// p-adic valuation of a nonzero integer.
pub fn vp(n: i64, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return domain(format!("vp: {p} is not prime"));
    }
    if n == 0 {
        return domain("vp: valuation of 0 is infinite");
    }
    Ok(vp_unchecked(n.unsigned_abs(), p))
}

#[inline]
pub(crate) fn vp_unchecked(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    e
}

// ---------------------------------------------------------------------------
// d-free structure

pub fn is_dfree(a: i64, d: u32) -> Result<bool> {
    check_degree(d)?;
    Ok(factorize(a)?.is_dfree(d))
}

pub fn dfree_decompose(a: i64, d: u32) -> Result<DfreeDecomposition> {
    check_degree(d)?;
    let f = factorize(a)?;
    let mut u: u64 = 1;
    let mut v: u64 = 1;
    for &(p, e) in &f.factors {
        u *= p.pow(e % d);
        v *= p.pow(e / d);
    }
    let u = if a < 0 { -(u as i64) } else { u as i64 };
    Ok(DfreeDecomposition { u, v, d })
}

fn check_degree(d: u32) -> Result<()> {
    if d < 2 {
        return domain(format!("degree must be at least 2, got {d}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// power residues

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return domain("p = 2 is excluded for power-residue counts");
    }
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    Ok(())
}

/// Number of nonzero d-th power residues modulo an odd prime.
pub fn rd(p: u64, d: u32) -> Result<u64> {
    check_odd_prime(p)?;
    if d == 0 {
        return domain("degree must be positive");
    }
    Ok((p - 1) / (p - 1).gcd(&(d as u64)))
}

/// `{x^d mod p : x in F_p^*}` by enumeration.
pub fn dth_power_residues(p: u64, d: u32) -> Result<BTreeSet<u64>> {
    check_odd_prime(p)?;
    if d == 0 {
        return domain("degree must be positive");
    }
    Ok((1..p).map(|x| pow_mod(x, d as u64, p)).collect())
}

/// `(delta, gamma)` with `delta = v_p(d)`; `gamma = delta + 1` unless
/// `p = 2` and `delta >= 1`, in which case `gamma = delta + 2`.
pub fn gamma_exponent(p: u64, d: u32) -> (u32, u32) {
    let delta = vp_unchecked(d as u64, p);
    let gamma = if p == 2 && delta >= 1 { delta + 2 } else { delta + 1 };
    (delta, gamma)
}

/// Predicted number of solutions of `x^d = b (mod p^k)` for `k >= gamma`
/// when the congruence is soluble.
pub fn power_congruence_count(p: u64, d: u32) -> u64 {
    let (delta, gamma) = gamma_exponent(p, d);
    let modulus = p.pow(delta) * (p - 1);
    p.pow(gamma - delta - 1) * (d as u64).gcd(&modulus)
}

/// All `x mod p^k` with `x^d = b (mod p^k)`, sorted.
///
/// Roots are found modulo `p` by enumeration and lifted one power of `p`
/// at a time. When `p` does not divide `d` every root lifts uniquely by a
/// Newton step; otherwise all `p` candidate digits are tried.
pub fn solve_power_congruence(b: i64, d: u32, p: u64, k: u32) -> Result<Vec<u64>> {
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    if k == 0 {
        return domain("modulus exponent must be at least 1");
    }
    if d == 0 {
        return domain("degree must be positive");
    }
    if b.unsigned_abs().is_multiple_of(p) {
        return domain(format!("{p} divides {b}"));
    }
    let modulus = checked_pow(p, k)?;
    let b = rem_euclid_u(b, modulus);
    let d64 = d as u64;
    let mut roots: Vec<u64> = (1..p).filter(|&x| pow_mod(x, d64, p) == b % p).collect();
    let mut pj = p;
    for _ in 1..k {
        let next = pj * p;
        let target = b % next;
        let mut lifted = Vec::with_capacity(roots.len());
        if !d64.is_multiple_of(p) {
            for &r in &roots {
                // f(r) = r^d - b, f'(r) = d r^(d-1) is a unit mod p.
                let fr = (pow_mod(r, d64, next) + next - target) % next;
                let dr = mul_mod(d64 % p, pow_mod(r, d64 - 1, p), p);
                let inv = inv_mod(dr, p).expect("unit derivative");
                let t = mul_mod((fr / pj) % p, inv, p);
                let x = (r + (p - t) % p * pj) % next;
                debug_assert_eq!(pow_mod(x, d64, next), target);
                lifted.push(x);
            }
        } else {
            for &r in &roots {
                for t in 0..p {
                    let x = r + t * pj;
                    if pow_mod(x, d64, next) == target {
                        lifted.push(x);
                    }
                }
            }
        }
        roots = lifted;
        pj = next;
    }
    roots.sort_unstable();
    Ok(roots)
}

/// `psi(d) = 3 (1 - 1/d) / phi(d)` as an exact rational.
pub fn psi(d: u32) -> Result<Rational> {
    check_degree(d)?;
    let phi_d = phi(d as i64)?;
    Ok(Rational::new(
        BigInt::from(3 * (d as u64 - 1)),
        BigInt::from(phi_d * d as u64),
    ))
}
