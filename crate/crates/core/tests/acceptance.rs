//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and runtime limits are fixed below.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use fermatlab::arith::{self, gamma_exponent, pow_mod, primes_up_to, vp};
use fermatlab::counts::{self, CountConfig, MMode, Variant};
use fermatlab::local::{self, is_everywhere_locally_soluble, DiagonalForm};
use fermatlab::points::{
    build_cover, build_prime_family, has_point, meets_case_bound, reduce_basis, search_points, theorem3_bound,
    verify_cover, Lattice3, Provenance,
};
use fermatlab::sieve::{g_sum, tau, theorem1_bound, unit_pair_insoluble_count};
use fermatlab::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{pairwise_coprime, qp_oracle, squarefree, symmetric_triples, Verdict};

/// Frozen at 0.8 times the pilot estimate 0.91881 (seed 1, see docs/pilot.md).
const THETA0: f64 = 0.735;
/// Allowed spread of `N_2(H) / theorem1_bound(H, 2)` along the ladder.
const A5_BAND: f64 = 4.0;
const A6_SEED: u64 = 42;
const A7_SEED: u64 = 7;
const A8_SEED: u64 = 8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn a1() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in primes_up_to(200).into_iter().filter(|&p| p > 2) {
        for d in 2..=12u32 {
            let set: BTreeSet<u64> = (1..p).map(|x| pow_mod(x, d as u64, p)).collect();
            checked += 1;
            if arith::rd(p, d).unwrap() != set.len() as u64 {
                bad.push((p, d));
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} (p, d) pairs, mismatches {bad:?}"))
}

fn a2() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in primes_up_to(50).into_iter().filter(|&p| p > 2) {
        for d in 2..=8u32 {
            let powers: BTreeSet<u64> = (1..p).map(|x| pow_mod(x, d as u64, p)).collect();
            // u x^d + v y^d = 0 has no solution with x y != 0
            let brute = (1..p)
                .flat_map(|u| (1..p).map(move |v| (u, v)))
                .filter(|&(u, v)| powers.iter().all(|&s| powers.iter().all(|&t| (u * s + v * t) % p != 0)))
                .count() as u64;
            let formula = unit_pair_insoluble_count(p, d).unwrap();
            checked += 1;
            if formula != brute || tau(p, d).unwrap() != 3 * brute {
                bad.push((p, d));
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} (p, d) pairs, mismatches {bad:?}"))
}

fn a3() -> Outcome {
    let values: Vec<i64> = (-20..=20).filter(|&v| v != 0).collect();
    let triples = symmetric_triples(&values);
    let mut disagreements = Vec::new();
    let mut undecided = 0;
    let mut checks = 0;
    for d in [2u32, 3] {
        for t in &triples {
            let form = DiagonalForm::new(d, t.to_vec()).unwrap();
            for p in [2u64, 3, 5, 7] {
                let cert = local::qp_soluble(&form, p).unwrap();
                checks += 1;
                match qp_oracle(t, d, p) {
                    Verdict::Undecided => undecided += 1,
                    v => {
                        if (v == Verdict::Soluble) != cert.soluble || !cert.verify(&form) {
                            disagreements.push((d, *t, p));
                        }
                    }
                }
            }
        }
    }
    outcome(
        disagreements.is_empty() && undecided == 0,
        format!(
            "{checks} checks over {} forms per degree, {} disagreements {:?}, {undecided} undecided",
            triples.len(),
            disagreements.len(),
            &disagreements[..disagreements.len().min(5)]
        ),
    )
}

fn a4() -> Outcome {
    let values: Vec<i64> = (-25..=25).filter(|&v| v != 0 && squarefree(v)).collect();
    let triples: Vec<[i64; 3]> = symmetric_triples(&values).into_iter().filter(|t| pairwise_coprime(t)).collect();
    let mut exceptions = Vec::new();
    let mut soluble = 0;
    for t in &triples {
        let form = DiagonalForm::new(2, t.to_vec()).unwrap();
        let els = is_everywhere_locally_soluble(&form).unwrap();
        let bound = form.coefficient_product().unwrap();
        let point = has_point(&form, bound).unwrap();
        if els != point.is_some() {
            exceptions.push(*t);
        }
        soluble += els as usize;
    }
    outcome(
        exceptions.is_empty(),
        format!("{} triples, {soluble} soluble, exceptions {exceptions:?}", triples.len()),
    )
}

fn a5() -> Outcome {
    let cfg = CountConfig { search_bound: None, workers: None, guard_override: false };
    let rows = counts::density_ladder(2, Variant::Nstar, &[16, 32, 64, 128], &cfg).unwrap();
    let dens: Vec<f64> = rows.iter().map(|r| r.density_upper).collect();
    let ratios: Vec<f64> = rows
        .iter()
        .map(|r| r.count_upper as f64 / theorem1_bound(r.h as f64, 2).unwrap())
        .collect();
    let exact = rows.iter().all(|r| r.is_exact());
    let decreasing = dens.windows(2).all(|w| w[1] < w[0]);
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let band = hi / lo;
    outcome(
        exact && decreasing && band <= A5_BAND,
        format!("densities {dens:.5?}, count/bound {ratios:.3?}, band {band:.3} (limit {A5_BAND})"),
    )
}

fn a6() -> Outcome {
    let cfg = CountConfig { search_bound: None, workers: None, guard_override: false };
    let mode = MMode::Sampled { samples: 100_000, seed: A6_SEED };
    let r1 = counts::count_m(50, 3, mode, &cfg).unwrap();
    let r2 = counts::count_m(50, 3, mode, &CountConfig { workers: Some(1), ..cfg.clone() }).unwrap();
    let reproducible = r1.count_upper == r2.count_upper
        && r1.density_upper.to_bits() == r2.density_upper.to_bits()
        && r1.half_width.map(f64::to_bits) == r2.half_width.map(f64::to_bits);
    let prop = r1.density_upper;

    // witness class: c mod Q, mixed signs, each p >= p0 dividing at most one coefficient
    let wc = local::witness_class(2, 4).unwrap();
    let p0 = local::p0(2);
    let mut rng = ChaCha8Rng::seed_from_u64(A6_SEED);
    let q = wc.modulus as i64;
    let mut failures = Vec::new();
    let mut drawn = 0;
    while drawn < 100 {
        let a: Vec<i64> = wc
            .residues
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k: i64 = rng.gen_range(0..60);
                let v = c as i64 + q * k;
                if i == 1 {
                    v - q * 60
                } else {
                    v
                }
            })
            .collect();
        if !(a[0] > 0 && a[1] < 0) || !wc.contains(&a) {
            continue;
        }
        let prod: i64 = a.iter().product();
        let ok = arith::factorize(prod)
            .unwrap()
            .primes()
            .filter(|&p| p >= p0)
            .all(|p| a.iter().filter(|&&x| x.unsigned_abs() % p == 0).count() <= 1);
        if !ok {
            continue;
        }
        drawn += 1;
        if !is_everywhere_locally_soluble(&DiagonalForm::new(2, a.clone()).unwrap()).unwrap() {
            failures.push(a);
        }
    }
    outcome(
        prop >= THETA0 && reproducible && failures.is_empty(),
        format!(
            "M_3(50) proportion {prop:.5} +/- {:.5} (theta0 {THETA0}), reproducible {reproducible}, \
             witness class Q = {} failures {}/100",
            r1.half_width.unwrap(),
            wc.modulus,
            failures.len()
        ),
    )
}

fn random_coprime_form(rng: &mut ChaCha8Rng, d: u32) -> DiagonalForm {
    loop {
        let a: Vec<i64> = (0..3)
            .map(|_| {
                let v = rng.gen_range(1..=100i64);
                if rng.gen_bool(0.5) {
                    -v
                } else {
                    v
                }
            })
            .collect();
        if pairwise_coprime(&a) {
            return DiagonalForm::new(d, a).unwrap();
        }
    }
}

fn a7_suite() -> Vec<DiagonalForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(A7_SEED);
    (0..100).map(|i| random_coprime_form(&mut rng, if i % 2 == 0 { 2 } else { 3 })).collect()
}

fn a7() -> Outcome {
    let mut misses = 0;
    let mut det_failures = Vec::new();
    let mut over_j = 0;
    let mut j_log = Vec::new();
    let mut lattices = 0;
    for form in a7_suite() {
        let d = form.degree();
        let cover = build_cover(&form).unwrap();
        let rep = verify_cover(&form, 200, &cover).unwrap();
        misses += rep.misses.len();
        if !rep.case_bounds_met {
            det_failures.push(form.coeffs().to_vec());
        }
        let a = form.coefficient_product().unwrap();
        for p in arith::factorize(a as i64).unwrap().primes() {
            let alpha = vp(a as i64, p).unwrap();
            let (_, gamma) = gamma_exponent(p, d);
            for l in build_prime_family(&form, p).unwrap() {
                lattices += 1;
                let provenance_ok = matches!(&l.provenance, Provenance::Prime(pp) if pp.alpha == alpha && pp.gamma == gamma);
                if !provenance_ok || !meets_case_bound(l.det, p, alpha, gamma, d) {
                    det_failures.push(form.coeffs().to_vec());
                }
            }
        }
        over_j += (rep.j as u64 > rep.bound_j) as usize;
        j_log.push(format!("{}:{}/{}", d, rep.j, rep.bound_j));
    }
    outcome(
        misses == 0 && det_failures.is_empty(),
        format!(
            "100 forms, {misses} misses, {lattices} per-prime lattices, det bound failures {det_failures:?}; \
             J > 2d^omega on {over_j} forms; J/2d^omega by form [{}]",
            j_log.join(" ")
        ),
    )
}

/// Max-norm product bounds for reduced bases, with the Euclidean Hadamard
/// bound reported alongside.
fn a8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(A8_SEED);
    let mut lower = 0;
    let mut upper = 0;
    let mut euclid = 0;
    let mut worst_low = f64::MAX;
    let mut worst_high: f64 = 0.0;
    for _ in 0..1000 {
        let diag: [i64; 3] = std::array::from_fn(|_| rng.gen_range(1..=1000));
        let mut rows = [[0i64; 3]; 3];
        for i in 0..3 {
            rows[i][i] = diag[i];
            for j in i + 1..3 {
                rows[i][j] = rng.gen_range(0..diag[j]);
            }
        }
        let l = Lattice3::from_generators(&rows, Provenance::Whole).unwrap();
        let r = reduce_basis(&l).unwrap();
        let det = l.det as u128;
        let prod = r.max_norm_product();
        lower += (det > prod) as usize;
        upper += (prod > 8 * det) as usize;
        euclid += (det as f64 > r.euclidean_product() * (1.0 + 1e-12)) as usize;
        worst_low = worst_low.min(prod as f64 / det as f64);
        worst_high = worst_high.max(prod as f64 / det as f64);
    }
    outcome(
        lower == 0 && upper == 0,
        format!(
            "1000 lattices: det <= prod|b|_inf violated {lower}, prod|b|_inf <= 8 det violated {upper}; \
             prod/det in [{worst_low:.3}, {worst_high:.3}]; Euclidean det <= prod|b|_2 violated {euclid}"
        ),
    )
}

fn a9_constant() -> (f64, Vec<(DiagonalForm, usize)>) {
    let mut c: f64 = 0.0;
    let mut rows = Vec::new();
    for form in a7_suite() {
        let n = search_points(&form, 200).unwrap().len();
        let t3: f64 = theorem3_bound(&form, 200.0).unwrap();
        c = c.max(n as f64 / t3);
        rows.push((form, n));
    }
    (c, rows)
}

fn a9() -> Outcome {
    let (c, rows) = a9_constant();
    let (c_again, _) = a9_constant();
    let stable = c.to_bits() == c_again.to_bits();
    let mut over = Vec::new();
    let mut needed: f64 = 0.0;
    for (form, _) in &rows {
        let d = form.degree();
        let a = form.coefficient_product().unwrap();
        let bt = (a as f64).powf(2.0 / (3.0 * d as f64)).floor() as u64;
        let n = search_points(form, bt).unwrap().len();
        let omega = arith::omega(a as i64).unwrap();
        let collapsed = 2.0 * (d as f64).powi(omega as i32);
        needed = needed.max(n as f64 / collapsed);
        if n as f64 > c * collapsed {
            over.push((form.coeffs().to_vec(), bt, n));
        }
    }
    let with_points = rows.iter().filter(|(_, n)| *n > 0).count();
    outcome(
        stable && over.is_empty(),
        format!(
            "C = {c:.6} (stable {stable}), {with_points}/100 forms with points at B = 200; \
             threshold counts need C >= {needed:.6}; excess (form, B, count) {over:?}"
        ),
    )
}

fn a10() -> Outcome {
    let r = |a: i64, b: i64| Rational::new(a.into(), b.into());
    let g3 = g_sum(3.0, 2).unwrap();
    let g5 = g_sum(5.0, 2).unwrap();
    let psi2 = arith::psi(2).unwrap();
    let psi3 = arith::psi(3).unwrap();
    let ok = g3 == r(9, 7) && g5 == r(9, 7) + r(24, 101) && psi2 == r(3, 2) && psi3 == r(1, 1);
    outcome(ok, format!("G(3) = {g3}, G(5) = {g5}, psi(2) = {psi2}, psi(3) = {psi3}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("A1", a1, Duration::from_secs(5)),
        ("A2", a2, Duration::from_secs(10)),
        ("A3", a3, Duration::from_secs(600)),
        ("A4", a4, Duration::from_secs(600)),
        ("A5", a5, Duration::from_secs(1800)),
        ("A6", a6, Duration::from_secs(600)),
        ("A7", a7, Duration::from_secs(600)),
        ("A8", a8, Duration::from_secs(60)),
        ("A9", a9, Duration::from_secs(600)),
        ("A10", a10, Duration::from_secs(1)),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with('A')).collect();
    let mut failed = Vec::new();
    for (name, run, limit) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = out.pass && in_time;
        println!(
            "{name} {} [{:.2}s / limit {}s] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
        if !pass {
            failed.push(name);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
