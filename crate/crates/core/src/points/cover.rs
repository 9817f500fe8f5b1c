//! Lattice covers of the integer solutions of a diagonal ternary form with
//! pairwise coprime coefficients.
//!
//! For each prime `p | a1 a2 a3` exactly one coefficient, relabelled `a3`,
//! is divisible by `p`, with `alpha = v_p(a3)`. Writing `x_i = p^xi_i x_i'`
//! for the other two coordinates, every solution falls in one of:
//!
//! * high valuation: `alpha <= d xi_1`, so `p^ceil(alpha/d)` divides both;
//! * short interval: `xi_1 = xi_2 = xi` with `alpha - d xi < gamma`, so
//!   `p^xi` divides both (only the least admissible `xi` is needed, the
//!   lattices are nested);
//! * congruence: `xi_1 = xi_2 = xi` with `alpha - d xi >= gamma`, so
//!   `x_1' = lambda x_2' (mod p^(alpha - d xi))` for a root `lambda` of
//!   `a_1 lambda^d + a_2 = 0`.
//!
//! Families at different primes are combined by intersecting one lattice
//! per prime.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Pow;
use serde::Serialize;

use super::lattice::{det3, reduce_basis, Lattice3, ReducedBasis};
use super::search::{search_points, RationalPoint};
use super::require_pairwise_coprime;
use crate::arith::{self, inv_mod, mul_mod, rem_euclid_u, vp_unchecked};
use crate::error::{domain, Error, Result};
use crate::local::DiagonalForm;

/// Box constant `c` in `|lambda_i| <= c B / |b_i|` from the reduced-basis
/// coordinate estimate. The enumeration itself uses the exact adjugate
/// bound; this constant is what that bound is compared against.
pub const LAMBDA_BOX_CONSTANT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CaseKind {
    HighValuation,
    ShortInterval,
    Congruence { lambda: u64, modulus: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeProvenance {
    pub prime: u64,
    #[serde(flatten)]
    pub case: CaseKind,
    pub xi: u32,
    pub alpha: u32,
    pub gamma: u32,
    /// 1-based index of the coefficient divisible by `prime`.
    pub divisible_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Whole,
    Prime(PrimeProvenance),
    Combined(Vec<PrimeProvenance>),
}

impl Provenance {
    fn parts(&self) -> Vec<PrimeProvenance> {
        match self {
            Provenance::Whole => Vec::new(),
            Provenance::Prime(p) => vec![p.clone()],
            Provenance::Combined(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FamilySummary {
    pub size: usize,
    pub high_valuation: usize,
    pub short_interval: usize,
    pub congruence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeCover {
    pub form: DiagonalForm,
    pub lattices: Vec<Lattice3>,
    #[serde(rename = "J")]
    pub j: usize,
    pub per_prime: BTreeMap<u64, FamilySummary>,
}

/// `det^d >= p^(2 alpha - d (gamma - 1))`, i.e. `det >= p^(2 alpha/d - gamma + 1)`.
pub fn meets_case_bound(det: u64, p: u64, alpha: u32, gamma: u32, d: u32) -> bool {
    let rhs_exp = 2 * alpha as i64 - d as i64 * (gamma as i64 - 1);
    if rhs_exp <= 0 {
        return true;
    }
    BigInt::from(det).pow(d) >= BigInt::from(p).pow(rhs_exp as u32)
}

fn divisibility_lattice(idx: [usize; 3], e: u32, p: u64, prov: PrimeProvenance) -> Result<Lattice3> {
    let q = arith::checked_pow(p, e)? as i64;
    let [i, j, k] = idx;
    let mut rows = [[0i64; 3]; 3];
    rows[0][i] = q;
    rows[1][j] = q;
    rows[2][k] = 1;
    Lattice3::from_generators(&rows, Provenance::Prime(prov))
}

fn congruence_lattice(idx: [usize; 3], xi: u32, kappa: u32, lambda: u64, p: u64, prov: PrimeProvenance) -> Result<Lattice3> {
    let s = arith::checked_pow(p, xi)? as i64;
    let sk = arith::checked_pow(p, xi + kappa)? as i64;
    let [i, j, k] = idx;
    let mut rows = [[0i64; 3]; 3];
    rows[0][i] = s.checked_mul(lambda as i64).ok_or(Error::Overflow("congruence lattice"))?;
    rows[0][j] = s;
    rows[1][i] = sk;
    rows[2][k] = 1;
    Lattice3::from_generators(&rows, Provenance::Prime(prov))
}

/// The per-prime family covering every integer solution.
pub fn build_prime_family(form: &DiagonalForm, p: u64) -> Result<Vec<Lattice3>> {
    require_pairwise_coprime(form)?;
    if !arith::is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    let a = form.coeffs();
    let divisible: Vec<usize> = (0..3).filter(|&i| a[i].unsigned_abs().is_multiple_of(p)).collect();
    let k = match divisible.as_slice() {
        [k] => *k,
        [] => return domain(format!("{p} divides no coefficient")),
        _ => return domain(format!("{p} divides more than one coefficient")),
    };
    let others: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    let (i, j) = (others[0], others[1]);
    let idx = [i, j, k];
    let d = form.degree();
    let alpha = vp_unchecked(a[k].unsigned_abs(), p);
    let (_, gamma) = arith::gamma_exponent(p, d);
    let prov = |case, xi| PrimeProvenance { prime: p, case, xi, alpha, gamma, divisible_index: k + 1 };
    let mut family = Vec::new();

    let e_high = alpha.div_ceil(d);
    family.push(divisibility_lattice(idx, e_high, p, prov(CaseKind::HighValuation, e_high))?);

    // short interval: least xi with alpha - d xi < gamma, and d xi < alpha
    let xi_b = if alpha >= gamma { (alpha - gamma) / d + 1 } else { 0 };
    if d * xi_b < alpha {
        family.push(divisibility_lattice(idx, xi_b, p, prov(CaseKind::ShortInterval, xi_b))?);
    }

    // congruence: alpha - d xi >= gamma
    if alpha >= gamma {
        for xi in 0..=(alpha - gamma) / d {
            let kappa = alpha - d * xi;
            let modulus = arith::checked_pow(p, kappa)?;
            // lambda^d = -a_j / a_i (mod p^kappa)
            let ai = rem_euclid_u(a[i], modulus);
            let aj = rem_euclid_u(a[j], modulus);
            let inv = inv_mod(ai, modulus).ok_or_else(|| Error::Internal("non-unit coefficient".into()))?;
            let b = mul_mod((modulus - aj) % modulus, inv, modulus);
            let b = i64::try_from(b).map_err(|_| Error::Overflow("congruence target"))?;
            for lambda in arith::solve_power_congruence(b, d, p, kappa)? {
                let case = CaseKind::Congruence { lambda, modulus };
                family.push(congruence_lattice(idx, xi, kappa, lambda, p, prov(case, xi))?);
            }
        }
    }
    Ok(family)
}

fn summarize(family: &[Lattice3]) -> FamilySummary {
    let mut s = FamilySummary { size: family.len(), ..Default::default() };
    for l in family {
        if let Provenance::Prime(pp) = &l.provenance {
            match pp.case {
                CaseKind::HighValuation => s.high_valuation += 1,
                CaseKind::ShortInterval => s.short_interval += 1,
                CaseKind::Congruence { .. } => s.congruence += 1,
            }
        }
    }
    s
}

/// One lattice per prime, intersected, for every choice.
pub fn crt_combine(form: &DiagonalForm, families: &[(u64, Vec<Lattice3>)]) -> Result<LatticeCover> {
    let mut lattices = vec![Lattice3::whole()];
    let mut per_prime = BTreeMap::new();
    for (p, family) in families {
        per_prime.insert(*p, summarize(family));
        let mut next = Vec::with_capacity(lattices.len() * family.len());
        for base in &lattices {
            for l in family {
                let mut parts = base.provenance.parts();
                parts.extend(l.provenance.parts());
                let prov = if parts.len() == 1 {
                    Provenance::Prime(parts.pop().unwrap())
                } else {
                    Provenance::Combined(parts)
                };
                let combined = if base.det == 1 {
                    Lattice3 { provenance: prov, ..l.clone() }
                } else {
                    base.intersect_coprime(l, prov)?
                };
                next.push(combined);
            }
        }
        lattices = next;
    }
    let j = lattices.len();
    Ok(LatticeCover { form: form.clone(), lattices, j, per_prime })
}

/// Families at every prime dividing `a1 a2 a3`, combined.
pub fn build_cover(form: &DiagonalForm) -> Result<LatticeCover> {
    require_pairwise_coprime(form)?;
    let a = form.coefficient_product()?;
    let mut families = Vec::new();
    for p in arith::factorize(a as i64)?.primes() {
        families.push((p, build_prime_family(form, p)?));
    }
    crt_combine(form, &families)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub covered: bool,
    pub misses: Vec<RationalPoint>,
    pub points: usize,
    #[serde(rename = "J")]
    pub j: usize,
    /// `2 d^omega(a)`.
    pub bound_j: u64,
    pub det_min: u64,
    /// `a^(2/d) prod_{p | a} p^(1 - gamma_p)`.
    pub det_bound: f64,
    pub det_bound_met: bool,
    /// Every per-prime provenance meets `p^(2 alpha/d - gamma + 1)`.
    pub case_bounds_met: bool,
}

/// Check that every point of height `<= bound` lies in some lattice.
pub fn verify_cover(form: &DiagonalForm, bound: u64, cover: &LatticeCover) -> Result<CoverReport> {
    let pts = search_points(form, bound)?;
    let misses: Vec<RationalPoint> = pts
        .iter()
        .filter(|pt| !cover.lattices.iter().any(|l| l.contains(pt.coords)))
        .copied()
        .collect();
    let d = form.degree();
    let a = form.coefficient_product()?;
    let fact = arith::factorize(a as i64)?;
    let bound_j = 2 * (d as u64).pow(fact.omega());
    let det_min = cover.lattices.iter().map(|l| l.det).min().unwrap_or(1);
    let mut gamma_scale = 1.0f64;
    // det^d * prod p^(d (gamma - 1)) >= a^2
    let mut lhs_extra = BigInt::from(1);
    for p in fact.primes() {
        let (_, gamma) = arith::gamma_exponent(p, d);
        gamma_scale *= (p as f64).powi(1 - gamma as i32);
        lhs_extra *= BigInt::from(p).pow(d * (gamma - 1));
    }
    let det_bound = (a as f64).powf(2.0 / d as f64) * gamma_scale;
    let det_bound_met = BigInt::from(det_min).pow(d) * &lhs_extra >= BigInt::from(a).pow(2u32);
    let case_bounds_met = cover.lattices.iter().all(|l| {
        let parts = l.provenance.parts();
        let per_prime_ok = parts.iter().all(|pp| {
            let det_p = per_prime_det(pp, d);
            meets_case_bound(det_p, pp.prime, pp.alpha, pp.gamma, d)
        });
        let product: u128 = parts.iter().map(|pp| per_prime_det(pp, d) as u128).product();
        per_prime_ok && product == l.det as u128
    });
    Ok(CoverReport {
        covered: misses.is_empty(),
        misses,
        points: pts.len(),
        j: cover.j,
        bound_j,
        det_min,
        det_bound,
        det_bound_met,
        case_bounds_met,
    })
}

/// Determinant of the per-prime lattice a provenance describes.
fn per_prime_det(pp: &PrimeProvenance, d: u32) -> u64 {
    let exp = match pp.case {
        CaseKind::HighValuation | CaseKind::ShortInterval => 2 * pp.xi,
        CaseKind::Congruence { .. } => 2 * pp.xi + (pp.alpha - d * pp.xi),
    };
    pp.prime.pow(exp)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeCount {
    pub count: u64,
    pub siegel_bound: f64,
    /// Enumeration box half-widths for the reduced-basis coordinates.
    pub lambda_box: [u64; 3],
    /// `max_i lambda_box_i |b_i| / B`, to compare with [`LAMBDA_BOX_CONSTANT`].
    pub box_constant: f64,
    pub basis: ReducedBasis,
}

/// Primitive solutions of height `<= bound` inside `lattice`, counted once
/// per projective point, by enumerating reduced-basis coordinates.
pub fn lattice_point_count(form: &DiagonalForm, lattice: &Lattice3, bound: u64) -> Result<LatticeCount> {
    if form.arity() != 3 {
        return domain("expected a ternary form");
    }
    let basis = reduce_basis(lattice)?;
    let b: [[i128; 3]; 3] = basis.vectors.map(|r| r.map(|v| v as i128));
    let det = det3(&b);
    // lambda = x M^{-1}; column i of adj(M) gives |lambda_i| <= B sum_k |adj_ki| / |det|
    let adj = adjugate(&b);
    let big_b = bound as i128;
    let mut lambda_box = [0u64; 3];
    for i in 0..3 {
        let col: i128 = (0..3).map(|k| adj[k][i].abs()).sum();
        lambda_box[i] = (big_b.checked_mul(col).ok_or(Error::Overflow("lambda box"))? / det.abs()) as u64;
    }
    let norms = basis.max_norms();
    let box_constant = (0..3)
        .map(|i| lambda_box[i] as f64 * norms[i] as f64 / bound.max(1) as f64)
        .fold(0.0, f64::max);
    let (l0, l1, l2) = (lambda_box[0] as i128, lambda_box[1] as i128, lambda_box[2] as i128);
    let mut count = 0u64;
    for u in -l0..=l0 {
        for v in -l1..=l1 {
            let base = [u * b[0][0] + v * b[1][0], u * b[0][1] + v * b[1][1], u * b[0][2] + v * b[1][2]];
            // range of w keeping every |x_k| <= B
            let (mut lo, mut hi) = (-l2, l2);
            for k in 0..3 {
                let c = b[2][k];
                if c == 0 {
                    if base[k].abs() > big_b {
                        lo = 1;
                        hi = 0;
                    }
                    continue;
                }
                let (a1, a2) = ((-big_b - base[k]), (big_b - base[k]));
                let (mn, mx) = if c > 0 { (a1, a2) } else { (a2, a1) };
                lo = lo.max(ceil_div(mn, c));
                hi = hi.min(floor_div(mx, c));
            }
            for w in lo..=hi {
                let x = [base[0] + w * b[2][0], base[1] + w * b[2][1], base[2] + w * b[2][2]];
                let x = x.map(|c| c as i64);
                let Some(pt) = RationalPoint::canonical(x) else {
                    continue;
                };
                if pt.coords != x {
                    continue;
                }
                if form.evaluate(&x) == Some(0) {
                    count += 1;
                }
            }
        }
    }
    let prod = basis.max_norm_product() as f64;
    let siegel_bound = 1.0 + ((bound as f64).powi(3) / prod).sqrt();
    Ok(LatticeCount { count, siegel_bound, lambda_box, box_constant, basis })
}

fn adjugate(m: &[[i128; 3]; 3]) -> [[i128; 3]; 3] {
    let mut out = [[0i128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            out[i][j] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        }
    }
    out
}

fn floor_div(a: i128, b: i128) -> i128 {
    num_integer::Integer::div_floor(&a, &b)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}
