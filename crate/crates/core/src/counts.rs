//! Density experiments over coefficient boxes.
//!
//! `N` counts triples `a in [-H, H]^3` whose curve has a rational point,
//! `Nstar` restricts to `a1 a2 a3 != 0` with `gcd = 1`, `Nstarstar` further to
//! d-free coordinates. `M` counts everywhere locally soluble quaternary
//! forms with nonzero coefficients in `[-H, H]`.
//!
//! Counts are taken over orbits of coordinate permutations and global sign
//! flip (both preserve every filter and the solubility verdict) and
//! weighted by orbit size.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith;
use crate::error::{domain, Error, Result};
use crate::local::{is_everywhere_locally_soluble, DiagonalForm};
use crate::points::has_point;
use crate::sieve::theorem1_bound;

/// Largest `H` for exact quadratic counts without the override.
pub const N2_MAX_H: u64 = 200;
/// Cap on `(2H+1)^3 * B_search^2` for the point-search arm.
pub const SEARCH_WORK_CAP: f64 = 1e12;
/// Cap on `(2H+1)^4` for exhaustive `M`.
pub const M_EXHAUSTIVE_CAP: u64 = 100_000_000;
/// Name of the sampling generator, recorded in reports.
pub const GENERATOR: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Variant {
    N,
    Nstar,
    Nstarstar,
    M,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::N => "N",
            Variant::Nstar => "Nstar",
            Variant::Nstarstar => "Nstarstar",
            Variant::M => "M",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" => Ok(Variant::N),
            "Nstar" => Ok(Variant::Nstar),
            "Nstarstar" => Ok(Variant::Nstarstar),
            "M" => Ok(Variant::M),
            _ => domain(format!("unknown variant {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

/// Knobs shared by every experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountConfig {
    /// Point-search height for the lower arm when `d >= 3`; `None` means
    /// `10 |a1 a2 a3|` per form.
    pub search_bound: Option<u64>,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub guard_override: bool,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self { search_bound: None, workers: None, guard_override: crate::guard_override_from_env() }
    }
}

/// One experiment row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub variant: Variant,
    pub d: u32,
    #[serde(rename = "H")]
    pub h: u64,
    /// Box size after the variant filter.
    pub total: u64,
    pub count_lower: u64,
    pub count_upper: u64,
    pub density_lower: f64,
    pub density_upper: f64,
    pub bound_value: f64,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub elapsed_ms: u64,
    /// Binomial 95% half-width, sampled runs only.
    pub half_width: Option<f64>,
    pub generator: Option<String>,
}

impl DensityReport {
    pub fn is_exact(&self) -> bool {
        self.count_lower == self.count_upper
    }
}

pub const CSV_HEADER: [&str; 12] = [
    "variant",
    "d",
    "H",
    "total",
    "count_lower",
    "count_upper",
    "density_lower",
    "density_upper",
    "bound_value",
    "seed",
    "samples",
    "elapsed_ms",
];

/// Rows in the fixed column order of [`CSV_HEADER`].
pub fn write_csv<W: Write>(out: W, rows: &[DensityReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Internal(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            r.variant.to_string(),
            r.d.to_string(),
            r.h.to_string(),
            r.total.to_string(),
            r.count_lower.to_string(),
            r.count_upper.to_string(),
            r.density_lower.to_string(),
            r.density_upper.to_string(),
            r.bound_value.to_string(),
            opt(r.seed),
            opt(r.samples),
            r.elapsed_ms.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Internal(format!("csv: {e}")))?;
    Ok(())
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Internal(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Number of distinct orderings of a sorted tuple.
fn permutations(s: &[i64]) -> u64 {
    let mut n = 1u64;
    let mut run = 1u64;
    let mut fact = 1u64;
    for i in 1..=s.len() {
        fact *= i as u64;
        if i < s.len() && s[i] == s[i - 1] {
            run += 1;
            n *= run;
        } else {
            run = 1;
        }
    }
    fact / n
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    total: u64,
    lower: u64,
    upper: u64,
}

impl Tally {
    fn add(self, o: Tally) -> Tally {
        Tally { total: self.total + o.total, lower: self.lower + o.lower, upper: self.upper + o.upper }
    }
}

/// Weighted sum over sorted tuples from `values`, one per orbit. `classify`
/// returns `None` for tuples outside the filter, else `(lower, upper)`.
fn orbit_sum<F>(values: &[i64], arity: usize, classify: F) -> Result<Tally>
where
    F: Fn(&[i64]) -> Result<Option<(bool, bool)>> + Sync,
{
    fn rec<F>(values: &[i64], start: usize, cur: &mut Vec<i64>, arity: usize, classify: &F, t: &mut Tally) -> Result<()>
    where
        F: Fn(&[i64]) -> Result<Option<(bool, bool)>>,
    {
        if cur.len() == arity {
            let mut neg: Vec<i64> = cur.iter().rev().map(|v| -v).collect();
            if neg.as_slice() < cur.as_slice() {
                return Ok(());
            }
            let w = permutations(cur) * if neg == *cur { 1 } else { 2 };
            neg.clear();
            if let Some((lo, up)) = classify(cur)? {
                t.total += w;
                t.lower += w * lo as u64;
                t.upper += w * up as u64;
            }
            return Ok(());
        }
        for i in start..values.len() {
            cur.push(values[i]);
            rec(values, i, cur, arity, classify, t)?;
            cur.pop();
        }
        Ok(())
    }
    // slices by first coordinate, merged by addition
    let parts: Vec<Result<Tally>> = (0..values.len())
        .into_par_iter()
        .map(|i| {
            let mut t = Tally::default();
            let mut cur = vec![values[i]];
            rec(values, i, &mut cur, arity, &classify, &mut t)?;
            Ok(t)
        })
        .collect();
    parts.into_iter().try_fold(Tally::default(), |acc, t| Ok(acc.add(t?)))
}

fn passes_filter(a: &[i64], variant: Variant, d: u32) -> Result<bool> {
    Ok(match variant {
        Variant::N | Variant::M => true,
        Variant::Nstar | Variant::Nstarstar => {
            if a.contains(&0) || a.iter().fold(0i64, |g, &x| g.gcd(&x)) != 1 {
                false
            } else if variant == Variant::Nstarstar {
                a.iter().try_fold(true, |ok, &x| Ok::<_, Error>(ok && arith::is_dfree(x, d)?))?
            } else {
                true
            }
        }
    })
}

/// `(lower, upper)` verdicts for one ternary coefficient triple.
fn classify_ternary(a: &[i64], d: u32, search_bound: Option<u64>) -> Result<(bool, bool)> {
    if a.contains(&0) {
        // a zero coefficient leaves a coordinate free
        return Ok((true, true));
    }
    let form = DiagonalForm::new(d, a.to_vec())?;
    let els = is_everywhere_locally_soluble(&form)?;
    if d == 2 || !els {
        return Ok((els, els));
    }
    let bound = match search_bound {
        Some(b) => b,
        None => form.coefficient_product()?.checked_mul(10).ok_or(Error::Overflow("search bound"))?,
    };
    Ok((has_point(&form, bound)?.is_some(), true))
}

fn check_h(h: u64) -> Result<()> {
    if h < 1 {
        return domain("H must be at least 1");
    }
    if h > 1 << 20 {
        return Err(Error::Overflow("box side"));
    }
    Ok(())
}

/// `N_d(H)` under one of the ternary variants.
pub fn count_n(h: u64, d: u32, variant: Variant, cfg: &CountConfig) -> Result<DensityReport> {
    check_h(h)?;
    if d < 2 {
        return domain("degree must be at least 2");
    }
    if variant == Variant::M {
        return domain("count_n takes N, Nstar or Nstarstar");
    }
    let side = (2 * h + 1) as f64;
    if !cfg.guard_override {
        if d == 2 && h > N2_MAX_H {
            return Err(Error::Guard(format!("H = {h} exceeds {N2_MAX_H} for d = 2")));
        }
        if d >= 3 {
            let b = cfg.search_bound.unwrap_or(10 * h.pow(3)) as f64;
            let work = side.powi(3) * b * b;
            if work > SEARCH_WORK_CAP {
                return Err(Error::Guard(format!("estimated search work {work:.3e} exceeds {SEARCH_WORK_CAP:e}")));
            }
        }
    }
    let start = Instant::now();
    let values: Vec<i64> = (-(h as i64)..=h as i64).collect();
    let search_bound = cfg.search_bound;
    let tally = in_pool(cfg.workers, || {
        orbit_sum(&values, 3, |a| {
            if !passes_filter(a, variant, d)? {
                return Ok(None);
            }
            classify_ternary(a, d, search_bound).map(Some)
        })
    })??;
    let cube = side.powi(3);
    Ok(DensityReport {
        variant,
        d,
        h,
        total: tally.total,
        count_lower: tally.lower,
        count_upper: tally.upper,
        density_lower: tally.lower as f64 / cube,
        density_upper: tally.upper as f64 / cube,
        bound_value: if h > 1 { theorem1_bound(h as f64, d)? } else { f64::NAN },
        seed: None,
        samples: None,
        elapsed_ms: start.elapsed().as_millis() as u64,
        half_width: None,
        generator: None,
    })
}

/// Uniform nonzero value in `[-H, H]`.
fn nonzero_coord(rng: &mut ChaCha8Rng, h: i64) -> i64 {
    let k = rng.gen_range(0..2 * h);
    if k < h {
        k - h
    } else {
        k - h + 1
    }
}

/// The coefficient vectors drawn by a sampled `M` run, in draw order.
pub fn sample_vectors(h: u64, samples: u64, seed: u64) -> Vec<[i64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = h as i64;
    (0..samples)
        .map(|_| std::array::from_fn(|_| nonzero_coord(&mut rng, h)))
        .collect()
}

/// `M_d(H)`: everywhere locally soluble quaternary forms.
pub fn count_m(h: u64, d: u32, mode: MMode, cfg: &CountConfig) -> Result<DensityReport> {
    check_h(h)?;
    if d < 2 {
        return domain("degree must be at least 2");
    }
    let start = Instant::now();
    let (total, count, seed, samples, half_width, generator) = match mode {
        MMode::Exhaustive => {
            let size = (2 * h + 1).checked_pow(4).ok_or(Error::Overflow("box size"))?;
            if !cfg.guard_override && size > M_EXHAUSTIVE_CAP {
                return Err(Error::Guard(format!("(2H+1)^4 = {size} exceeds {M_EXHAUSTIVE_CAP}")));
            }
            let values: Vec<i64> = (-(h as i64)..=h as i64).filter(|&v| v != 0).collect();
            let tally = in_pool(cfg.workers, || {
                orbit_sum(&values, 4, |a| {
                    let els = is_everywhere_locally_soluble(&DiagonalForm::new(d, a.to_vec())?)?;
                    Ok(Some((els, els)))
                })
            })??;
            (tally.total, tally.upper, None, None, None, None)
        }
        MMode::Sampled { samples, seed } => {
            if samples == 0 {
                return domain("sample count must be positive");
            }
            let draws = sample_vectors(h, samples, seed);
            let hits: Result<Vec<bool>> = in_pool(cfg.workers, || {
                draws
                    .par_iter()
                    .map(|a| is_everywhere_locally_soluble(&DiagonalForm::new(d, a.to_vec())?))
                    .collect()
            })?;
            let count = hits?.into_iter().filter(|&b| b).count() as u64;
            let p = count as f64 / samples as f64;
            let hw = 1.96 * (p * (1.0 - p) / samples as f64).sqrt();
            (samples, count, Some(seed), Some(samples), Some(hw), Some(GENERATOR.to_string()))
        }
    };
    let density = count as f64 / total as f64;
    Ok(DensityReport {
        variant: Variant::M,
        d,
        h,
        total,
        count_lower: count,
        count_upper: count,
        density_lower: density,
        density_upper: density,
        bound_value: (h as f64).powi(4),
        seed,
        samples,
        elapsed_ms: start.elapsed().as_millis() as u64,
        half_width,
        generator,
    })
}

/// One report per `H`, in the given ascending order.
pub fn density_ladder(d: u32, variant: Variant, h_list: &[u64], cfg: &CountConfig) -> Result<Vec<DensityReport>> {
    if h_list.windows(2).any(|w| w[0] >= w[1]) {
        return domain("H list must be strictly ascending");
    }
    h_list
        .iter()
        .map(|&h| match variant {
            Variant::M => count_m(h, d, MMode::Exhaustive, cfg),
            v => count_n(h, d, v, cfg),
        })
        .collect()
}
