//! Large-sieve quantities for the density of soluble coefficient triples.
//!
//! `tau(p)` here is the computable exclusion count: triples in `F_p^3` with
//! exactly one zero coordinate whose other two coordinates admit no unit
//! solution of `a_j x^d + a_k y^d = 0`. It is a lower bound for the full
//! excluded set and is reported as `tau_lower`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{self, pow_mod, primes_up_to, rd};
use crate::error::{domain, Result};
use crate::{Rational, Real};

/// Largest sieve level accepted by [`g_sum`].
pub const Z_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SieveParams<F> {
    pub d: u32,
    pub z: F,
    pub h: [F; 3],
}

impl<F: Real> SieveParams<F> {
    pub fn new(d: u32, z: F, h: [F; 3]) -> Result<Self> {
        if d < 2 {
            return domain("degree must be at least 2");
        }
        if !(z >= F::one()) {
            return domain("sieve level z must be at least 1");
        }
        if h.iter().any(|&x| !(x >= F::one())) {
            return domain("box sides must be at least 1");
        }
        Ok(Self { d, z, h })
    }
}

/// `(a_j, a_k)` in `(F_p^*)^2` for which `a_j x^d + a_k y^d = 0` has no
/// solution with `p` not dividing `xy`: `(p-1)((p-1) - R_d(p))`.
pub fn unit_pair_insoluble_count(p: u64, d: u32) -> Result<u64> {
    let r = rd(p, d)?;
    Ok((p - 1) * (p - 1 - r))
}

/// Same count by testing `-a_k / a_j` against the d-th power residues.
pub fn unit_pair_insoluble_count_brute(p: u64, d: u32) -> Result<u64> {
    let residues = arith::dth_power_residues(p, d)?;
    let mut count = 0;
    for aj in 1..p {
        let inv = arith::inv_mod(aj, p).expect("unit");
        for ak in 1..p {
            let ratio = arith::mul_mod(p - ak, inv, p);
            if !residues.contains(&ratio) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Exclusion count `3 (p-1) ((p-1) - R_d(p))` at an odd prime.
pub fn tau(p: u64, d: u32) -> Result<u64> {
    Ok(3 * unit_pair_insoluble_count(p, d)?)
}

/// Brute-force `tau` over `F_p^3`: vectors with exactly one zero
/// coordinate whose remaining pair has no unit solution.
pub fn tau_brute(p: u64, d: u32) -> Result<u64> {
    if p == 2 {
        return domain("p = 2 is excluded");
    }
    let powers: Vec<u64> = (1..p).map(|x| pow_mod(x, d as u64, p)).collect();
    let pair_soluble = |a: u64, b: u64| {
        powers
            .iter()
            .any(|&xd| powers.iter().any(|&yd| (a * xd + b * yd).is_multiple_of(p)))
    };
    let mut count = 0;
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                let v = [a, b, c];
                let zeros = v.iter().filter(|&&x| x == 0).count();
                if zeros != 1 {
                    continue;
                }
                let rest: Vec<u64> = v.iter().copied().filter(|&x| x != 0).collect();
                if !pair_soluble(rest[0], rest[1]) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

fn floor_level(z: f64) -> Result<u64> {
    if !(z >= 1.0) {
        return domain("sieve level z must be at least 1");
    }
    let n = z.floor() as u64;
    if n > Z_CAP {
        return domain(format!("sieve level {n} above cap {Z_CAP}"));
    }
    Ok(n)
}

/// `G(z)`: sum over odd square-free `n <= z` of
/// `prod_{p | n} tau(p) / (p^3 - tau(p))`, exactly.
pub fn g_sum(z: f64, d: u32) -> Result<Rational> {
    let n_max = floor_level(z)?;
    let weights: Vec<(u64, Rational)> = primes_up_to(n_max)
        .into_iter()
        .filter(|&p| p > 2)
        .map(|p| {
            let t = tau(p, d)?;
            Ok((p, Rational::new(BigInt::from(t), BigInt::from(p * p * p - t))))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, w)| !w.is_zero())
        .collect();
    // depth-first over increasing prime sequences with product <= n_max
    fn walk(weights: &[(u64, Rational)], start: usize, n: u64, acc: &Rational, n_max: u64, total: &mut Rational) {
        for i in start..weights.len() {
            let (p, w) = &weights[i];
            let Some(next) = n.checked_mul(*p).filter(|&v| v <= n_max) else {
                break;
            };
            let term = acc * w;
            *total += &term;
            walk(weights, i + 1, next, &term, n_max, total);
        }
    }
    let mut total = Rational::one();
    walk(&weights, 0, 1, &Rational::one(), n_max, &mut total);
    Ok(total)
}

/// `G(z)` in floating point, for levels where the exact sum is too large
/// to be useful.
pub fn g_sum_approx<F: Real>(z: f64, d: u32) -> Result<F> {
    let n_max = floor_level(z)?;
    let mut weights: Vec<(u64, f64)> = Vec::new();
    for p in primes_up_to(n_max).into_iter().filter(|&p| p > 2) {
        let t = tau(p, d)? as f64;
        if t > 0.0 {
            weights.push((p, t / ((p as f64).powi(3) - t)));
        }
    }
    fn walk(weights: &[(u64, f64)], start: usize, n: u64, acc: f64, n_max: u64) -> f64 {
        let mut s = 0.0;
        for i in start..weights.len() {
            let (p, w) = weights[i];
            let Some(next) = n.checked_mul(p).filter(|&v| v <= n_max) else {
                break;
            };
            let term = acc * w;
            s += term + walk(weights, i + 1, next, term, n_max);
        }
        s
    }
    Ok(F::from_f64(1.0 + walk(&weights, 0, 1, 1.0, n_max)).expect("finite"))
}

/// `g_k(n) = |mu(n)| (3 (1 - 1/k))^omega(n) / n`.
pub fn g_k(n: u64, k: u32) -> Result<Rational> {
    if n == 0 {
        return domain("g_k is defined for n >= 1");
    }
    if k < 2 {
        return domain("k must be at least 2");
    }
    let f = arith::factorize(n as i64)?;
    if !f.is_squarefree() {
        return Ok(Rational::zero());
    }
    let w = f.omega();
    let num = BigInt::from(3 * (k as u64 - 1)).pow(w);
    let den = BigInt::from(k).pow(w) * BigInt::from(n);
    Ok(Rational::new(num, den))
}

pub(crate) fn rational_to<F: Real>(r: &Rational) -> F {
    // exact enough: numerator and denominator are converted after scaling
    let v = r.numer().to_f64().zip(r.denom().to_f64()).map(|(a, b)| a / b);
    let v = match v {
        Some(x) if x.is_finite() => x,
        _ => {
            // huge numerator/denominator: shift both down
            let bits = r.denom().bits().max(r.numer().bits()) as i64 - 1000;
            let shift = bits.max(0) as usize;
            let a = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let b = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            a / b
        }
    };
    F::from_f64(v).expect("finite")
}

/// `prod (H_i + z^2) / G(z)`; the implied constant is not included.
pub fn large_sieve_bound<F: Real>(params: &SieveParams<F>) -> Result<F> {
    let z = params.z.to_f64().expect("finite");
    let g: F = if z < 10_000.0 {
        rational_to(&g_sum(z, params.d)?)
    } else {
        g_sum_approx(z, params.d)?
    };
    let z2 = params.z * params.z;
    Ok(params.h.iter().fold(F::one(), |acc, &h| acc * (h + z2)) / g)
}

/// `H^(1/2) (v_1 v_2 v_3)^(-d/2)`, floored at 1.
pub fn choose_z<F: Real>(h: F, v: [u64; 3], d: u32) -> Result<F> {
    if !(h >= F::one()) || v.contains(&0) {
        return domain("need H >= 1 and v_i >= 1");
    }
    let prod = F::from_u64(v[0] * v[1] * v[2]).expect("finite");
    let half_d = F::from_u32(d).expect("finite") / F::from_u32(2).unwrap();
    let z = h.sqrt() * prod.powf(-half_d);
    Ok(if z < F::one() { F::one() } else { z })
}

/// `H^3 / (log H)^psi(d)` with the natural logarithm.
pub fn theorem1_bound<F: Real>(h: F, d: u32) -> Result<F> {
    if !(h > F::one()) {
        return domain("H must exceed 1");
    }
    let psi: F = rational_to(&arith::psi(d)?);
    Ok(h.powi(3) / h.ln().powf(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(5, 2).unwrap(), 24);
        assert_eq!(tau(7, 3).unwrap(), 72);
        assert_eq!(tau(5, 3).unwrap(), 0);
        assert_eq!(tau_brute(5, 2).unwrap(), 24);
        assert_eq!(tau_brute(7, 3).unwrap(), 72);
        assert!(tau(2, 2).is_err());
    }

    #[test]
    fn tau_closed_form() {
        // 3 (p-1)^2 (1 - 1/gcd(d, p-1))
        for p in [3u64, 5, 7, 11, 13] {
            for d in 2..=6u32 {
                let g = num_integer::gcd(d as u64, p - 1);
                assert_eq!(tau(p, d).unwrap() * g, 3 * (p - 1) * (p - 1) * (g - 1));
            }
        }
    }

    #[test]
    fn pair_counts() {
        assert_eq!(unit_pair_insoluble_count(5, 2).unwrap(), 8);
        assert_eq!(unit_pair_insoluble_count_brute(5, 2).unwrap(), 8);
        assert_eq!(unit_pair_insoluble_count(7, 2).unwrap(), 18);
        assert_eq!(unit_pair_insoluble_count(11, 3).unwrap(), 0);
        assert!(unit_pair_insoluble_count(2, 3).is_err());
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_sum(1.0, 5).unwrap(), r(1, 1));
        assert_eq!(g_sum(3.0, 2).unwrap(), r(9, 7));
        assert_eq!(g_sum(5.0, 2).unwrap(), r(9, 7) + r(24, 101));
        assert_eq!(g_sum(5.9, 2).unwrap(), r(9, 7) + r(24, 101));
        assert!(g_sum(0.5, 2).is_err());
    }

    #[test]
    fn g_matches_direct_sum() {
        for d in 2..=6 {
            let direct = (1..=60u64)
                .filter(|n| n % 2 == 1)
                .filter_map(|n| {
                    let f = arith::factorize(n as i64).unwrap();
                    f.is_squarefree().then(|| {
                        f.primes().fold(Rational::one(), |acc, p| {
                            let t = tau(p, d).unwrap();
                            acc * r(t as i64, (p * p * p - t) as i64)
                        })
                    })
                })
                .fold(Rational::zero(), |a, b| a + b);
            assert_eq!(g_sum(60.0, d).unwrap(), direct);
            let approx: f64 = g_sum_approx(60.0, d).unwrap();
            assert!((approx - rational_to::<f64>(&direct)).abs() < 1e-12);
        }
    }

    #[test]
    fn g_monotone() {
        let mut prev = Rational::zero();
        for z in 1..=200 {
            let g = g_sum(z as f64, 2).unwrap();
            assert!(g >= prev && g >= Rational::one());
            prev = g;
        }
    }

    #[test]
    fn g_k_examples() {
        assert_eq!(g_k(1, 3).unwrap(), r(1, 1));
        assert_eq!(g_k(15, 2).unwrap(), r(3, 20));
        assert_eq!(g_k(12, 5).unwrap(), r(0, 1));
    }

    #[test]
    fn g_k_multiplicative() {
        for k in [2u32, 3, 4] {
            for m in 1..=1000u64 {
                for n in (1..=1000u64).step_by(37) {
                    if num_integer::gcd(m, n) != 1 {
                        continue;
                    }
                    assert_eq!(g_k(m * n, k).unwrap(), g_k(m, k).unwrap() * g_k(n, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn bound_examples() {
        let p = SieveParams::new(2, 1.0, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(large_sieve_bound(&p).unwrap(), 8.0);
        let p = SieveParams::new(2, 10.0, [100.0; 3]).unwrap();
        let g = rational_to::<f64>(&g_sum(10.0, 2).unwrap());
        assert!((large_sieve_bound(&p).unwrap() - 200f64.powi(3) / g).abs() < 1e-6);
        assert!(SieveParams::new(2, 0.5, [1.0; 3]).is_err());
    }

    #[test]
    fn bound_monotone_in_h() {
        let base = large_sieve_bound(&SieveParams::new(3, 7.0, [10.0, 20.0, 30.0]).unwrap()).unwrap();
        for i in 0..3 {
            let mut h = [10.0, 20.0, 30.0];
            h[i] += 5.0;
            let b = large_sieve_bound(&SieveParams::new(3, 7.0, h).unwrap()).unwrap();
            assert!(b > base);
        }
    }

    #[test]
    fn choose_z_examples() {
        assert_eq!(choose_z(1e4, [1, 1, 1], 3).unwrap(), 100.0);
        assert_eq!(choose_z(1e4, [2, 1, 1], 2).unwrap(), 50.0);
        assert_eq!(choose_z(4.0, [2, 2, 2], 3).unwrap(), 1.0);
        let z32: f32 = choose_z(1e4f32, [1, 1, 1], 2).unwrap();
        assert!((z32 - 100.0).abs() < 1e-3);
    }

    #[test]
    fn theorem1_examples() {
        let e = std::f64::consts::E;
        assert!((theorem1_bound(e, 3).unwrap() - e.powi(3)).abs() < 1e-9);
        let v: f64 = theorem1_bound(100.0, 2).unwrap();
        assert!((v - 1e6 / 100f64.ln().powf(1.5)).abs() < 1e-6);
        assert!(theorem1_bound(1.0, 2).is_err());
        let v32: f32 = theorem1_bound(100.0f32, 2).unwrap();
        assert!((v32 as f64 - v).abs() / v < 1e-5);
    }

    #[test]
    fn rational_conversion_handles_large_parts() {
        let big = Rational::new(BigInt::from(3) << 3000, BigInt::from(2) << 3000);
        assert_eq!(rational_to::<f64>(&big), 1.5);
        assert!(!rational_to::<f64>(&-big).is_positive());
    }
}
