//! Real and p-adic solubility of diagonal forms `sum a_i x_i^d = 0`.
//!
//! The p-adic decision normalizes a putative solution so that its smallest
//! coordinate valuation is 0, guesses which coordinates vanish (the support
//! `S`) and the valuation `xi_i` of every other coordinate, and then looks
//! for p-adic units `u_i` with
//!
//! ```text
//!     sum_{i in S} a_i p^(d xi_i) u_i^d = 0   (mod p^m)
//! ```
//!
//! where `m = 2 tau_j + 1` and `tau_j = v_p(d) + v_p(a_j) + d xi_j` is the
//! smallest derivative valuation over the support. A hit lifts to a true
//! solution by Hensel's lemma in coordinate `j`; if no pattern has a hit the
//! form has no nontrivial p-adic zero. Valuations are capped at
//! `ceil(m_cap / d)` with `m_cap = 2 (v_p(d) + max v_p(a_i)) + 1`; a larger
//! valuation contributes nothing modulo `p^m` and is represented by 0.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::arith::{
    self, checked_pow, inv_mod, is_prime, mul_mod, next_prime_above, pow_mod, primes_up_to,
    rem_euclid_u, vp_unchecked,
};
use crate::error::{domain, Error, Result};

/// `a_1 x_1^d + ... + a_n x_n^d` with nonzero integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DiagonalForm {
    degree: u32,
    coeffs: Vec<i64>,
}

impl DiagonalForm {
    pub fn new(degree: u32, coeffs: Vec<i64>) -> Result<Self> {
        if degree < 2 {
            return domain(format!("degree must be at least 2, got {degree}"));
        }
        if !(2..=4).contains(&coeffs.len()) {
            return domain(format!("unsupported arity {}", coeffs.len()));
        }
        if coeffs.contains(&0) {
            return domain("coefficients must be nonzero");
        }
        if coeffs.contains(&i64::MIN) {
            return Err(Error::Overflow("coefficient magnitude"));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    /// `|a_1 ... a_n|`, if it fits.
    pub fn coefficient_product(&self) -> Result<u64> {
        self.coeffs
            .iter()
            .try_fold(1u64, |acc, &a| acc.checked_mul(a.unsigned_abs()))
            .ok_or(Error::Overflow("coefficient product"))
    }

    /// Value of the form at an integer vector, with overflow detection.
    pub fn evaluate(&self, x: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (&a, &xi) in self.coeffs.iter().zip(x) {
            let pw = (xi as i128).checked_pow(self.degree)?;
            acc = acc.checked_add((a as i128).checked_mul(pw)?)?;
        }
        Some(acc)
    }

    /// Value of the form at `x` reduced modulo `modulus`.
    pub fn evaluate_mod(&self, x: &[u64], modulus: u64) -> u64 {
        self.coeffs.iter().zip(x).fold(0u64, |acc, (&a, &xi)| {
            let term = mul_mod(rem_euclid_u(a, modulus), pow_mod(xi, self.degree as u64, modulus), modulus);
            ((acc as u128 + term as u128) % modulus as u128) as u64
        })
    }
}

impl fmt::Display for DiagonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} a={:?}", self.degree, self.coeffs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => f.write_str("real"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A solution modulo `p^m` with enough Hensel margin to lift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Residues modulo `p^m`.
    pub x: Vec<u64>,
    pub m: u32,
    /// Lifting coordinate, 1-based.
    pub j: usize,
    pub tau: u32,
}

/// One `(support, valuation pattern)` pair that was searched and found empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternRecord {
    /// 1-based coordinate indices.
    pub support: Vec<usize>,
    pub xi: Vec<u32>,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalCertificate {
    pub place: Place,
    pub soluble: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustion: Option<Vec<PatternRecord>>,
}

impl LocalCertificate {
    /// Re-check the certificate arithmetically against `form`.
    ///
    /// For a soluble p-adic verdict this plugs the witness into the form
    /// modulo `p^m` and checks the margin `m >= 2 tau_j + 1`. For an
    /// insoluble verdict it checks that the exhaustion record lists every
    /// admissible pattern.
    pub fn verify(&self, form: &DiagonalForm) -> bool {
        let p = match self.place {
            Place::Real => return self.soluble == real_soluble(form),
            Place::Prime(p) => p,
        };
        match (&self.witness, &self.exhaustion) {
            (Some(w), _) if self.soluble => verify_witness(form, p, w),
            (None, Some(records)) if !self.soluble => {
                let expected = enumerate_patterns(form, p);
                let got: BTreeSet<(Vec<usize>, Vec<u32>)> = records
                    .iter()
                    .map(|r| (r.support.clone(), r.xi.clone()))
                    .collect();
                expected.len() == records.len()
                    && expected.iter().all(|r| got.contains(&(r.support.clone(), r.xi.clone())))
            }
            _ => false,
        }
    }
}

/// Check that `w` solves `form` modulo `p^m` with a valid Hensel margin.
pub fn verify_witness(form: &DiagonalForm, p: u64, w: &Witness) -> bool {
    if w.x.len() != form.arity() || w.j == 0 || w.j > form.arity() {
        return false;
    }
    let Ok(modulus) = checked_pow(p, w.m) else {
        return false;
    };
    if form.evaluate_mod(&w.x, modulus) != 0 {
        return false;
    }
    let xj = w.x[w.j - 1] % modulus;
    if xj == 0 {
        return false;
    }
    let xi_j = vp_unchecked(xj, p);
    let tau = vp_unchecked(form.degree as u64, p)
        + vp_unchecked(form.coeffs[w.j - 1].unsigned_abs(), p)
        + form.degree * xi_j;
    tau == w.tau && w.m > 2 * tau
}

/// Nonzero real zero exists.
pub fn real_soluble(form: &DiagonalForm) -> bool {
    if form.degree % 2 == 1 {
        return true;
    }
    let pos = form.coeffs.iter().any(|&a| a > 0);
    let neg = form.coeffs.iter().any(|&a| a < 0);
    pos && neg
}

/// Smallest prime above `max(d, ((d-1)(d-2))^2)`.
///
/// For primes at or beyond this threshold that do not divide `d a1 a2 a3`,
/// the Hasse-Weil bound gives the smooth curve a point over `F_p`, and that
/// point lifts.
pub fn p0(d: u32) -> u64 {
    let g2 = ((d as u64 - 1) * (d as u64).saturating_sub(2)).pow(2);
    next_prime_above(g2.max(d as u64))
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// pattern search

struct Context<'a> {
    form: &'a DiagonalForm,
    p: u64,
    d: u32,
    v_d: u32,
    vals: Vec<u32>,
    units: Vec<i64>,
    xi_cap: u32,
    // sorted (x^d mod p, x) for x in 1..p; built on first use
    root_table: Option<Vec<(u64, u64)>>,
}

impl<'a> Context<'a> {
    fn new(form: &'a DiagonalForm, p: u64) -> Self {
        let d = form.degree;
        let v_d = vp_unchecked(d as u64, p);
        let mut vals = Vec::with_capacity(form.arity());
        let mut units = Vec::with_capacity(form.arity());
        for &a in &form.coeffs {
            let v = vp_unchecked(a.unsigned_abs(), p);
            vals.push(v);
            let mut u = a;
            for _ in 0..v {
                u /= p as i64;
            }
            units.push(u);
        }
        let max_v = vals.iter().copied().max().unwrap_or(0);
        let m_cap = 2 * (v_d + max_v) + 1;
        let xi_cap = m_cap.div_ceil(d);
        Self { form, p, d, v_d, vals, units, xi_cap, root_table: None }
    }

    fn roots_mod_p(&mut self, target: u64) -> Vec<u64> {
        let (p, d) = (self.p, self.d as u64);
        let table = self.root_table.get_or_insert_with(|| {
            let mut t: Vec<(u64, u64)> = (1..p).map(|x| (pow_mod(x, d, p), x)).collect();
            t.sort_unstable();
            t
        });
        let start = table.partition_point(|&(v, _)| v < target);
        table[start..]
            .iter()
            .take_while(|&&(v, _)| v == target)
            .map(|&(_, x)| x)
            .collect()
    }
}

/// Every `(S, xi)` visited by the search, in search order.
fn enumerate_patterns(form: &DiagonalForm, p: u64) -> Vec<PatternRecord> {
    let ctx = Context::new(form, p);
    let mut out = Vec::new();
    for_each_pattern(form.arity(), ctx.xi_cap, |support, xi| {
        out.push(PatternRecord {
            support: support.iter().map(|i| i + 1).collect(),
            xi: xi.to_vec(),
            m: pattern_modulus_exponent(&ctx, support, xi),
        });
        false
    });
    out
}

fn pattern_modulus_exponent(ctx: &Context<'_>, support: &[usize], xi: &[u32]) -> u32 {
    let t_min = support
        .iter()
        .zip(xi)
        .map(|(&i, &x)| ctx.vals[i] + ctx.d * x)
        .min()
        .unwrap();
    2 * (ctx.v_d + t_min) + 1
}

/// Calls `visit(support, xi)` for supports of size >= 2 (by size, then
/// lexicographically) and valuation patterns in `{0..=cap}^|S|` with
/// minimum 0 (lexicographically). Stops early when `visit` returns true.
fn for_each_pattern(n: usize, cap: u32, mut visit: impl FnMut(&[usize], &[u32]) -> bool) -> bool {
    for size in 2..=n {
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            let mut xi = vec![0u32; size];
            loop {
                if xi.contains(&0) && visit(&support, &xi) {
                    return true;
                }
                // odometer, last coordinate fastest
                let mut k = size;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    if xi[k] < cap {
                        xi[k] += 1;
                        for x in &mut xi[k + 1..] {
                            *x = 0;
                        }
                        break;
                    }
                    if k == 0 {
                        k = usize::MAX;
                        break;
                    }
                }
                if k == usize::MAX {
                    break;
                }
            }
            // next combination
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if support[i] < n - size + i {
                    support[i] += 1;
                    for k in i + 1..size {
                        support[k] = support[k - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
    }
    false
}

/// Search one pattern. Returns the witness on success.
fn search_pattern(ctx: &mut Context<'_>, support: &[usize], xi: &[u32]) -> Result<Option<Witness>> {
    let (p, d) = (ctx.p, ctx.d);
    let t: Vec<u32> = support.iter().zip(xi).map(|(&i, &x)| ctx.vals[i] + d * x).collect();
    let t_min = *t.iter().min().unwrap();
    // the minimal valuation must be attained twice, otherwise the sum has
    // exact valuation t_min < m
    if t.iter().filter(|&&v| v == t_min).count() < 2 {
        return Ok(None);
    }
    let levels = 2 * ctx.v_d + t_min + 1;
    let m = levels + t_min;
    let modulus = checked_pow(p, levels)?;
    let k = support.len();
    let shift: Vec<u32> = t.iter().map(|&v| v - t_min).collect();
    let mut coef = Vec::with_capacity(k);
    for (pos, &i) in support.iter().enumerate() {
        let c = if shift[pos] >= levels {
            0
        } else {
            mul_mod(rem_euclid_u(ctx.units[i], modulus), p.pow(shift[pos]), modulus)
        };
        coef.push(c);
    }
    let fixed = shift.iter().position(|&s| s == 0).unwrap();
    let solved = if ctx.v_d == 0 {
        shift.iter().enumerate().position(|(pos, &s)| s == 0 && pos != fixed)
    } else {
        None
    };
    let mut powers = Vec::with_capacity(levels as usize + 1);
    let mut acc = 1u64;
    for _ in 0..=levels {
        powers.push(acc);
        acc = acc.saturating_mul(p);
    }
    let mut u = vec![0u64; k];
    u[fixed] = 1;
    for pos in 0..k {
        if coef[pos] == 0 && pos != fixed {
            u[pos] = 1;
        }
    }
    let mut dfs = Dfs { p, d, coef, shift, fixed, solved, powers, levels };
    if !dfs.descend(ctx, 1, &mut u) {
        return Ok(None);
    }
    // assemble the witness modulo p^m
    let full = checked_pow(p, m)?;
    let mut x = vec![0u64; ctx.form.arity()];
    for (pos, &i) in support.iter().enumerate() {
        let scale = if xi[pos] >= m { 0 } else { p.pow(xi[pos]) };
        x[i] = mul_mod(scale, u[pos], full);
    }
    let j = support[fixed] + 1;
    let tau = ctx.v_d + t_min;
    Ok(Some(Witness { x, m, j, tau }))
}

struct Dfs {
    p: u64,
    d: u32,
    coef: Vec<u64>,
    shift: Vec<u32>,
    fixed: usize,
    solved: Option<usize>,
    powers: Vec<u64>,
    levels: u32,
}

impl Dfs {
    fn value_mod(&self, u: &[u64], level: u32) -> u64 {
        let m = self.powers[level as usize];
        self.coef.iter().zip(u).fold(0u64, |acc, (&c, &x)| {
            let term = mul_mod(c % m, pow_mod(x, self.d as u64, m), m);
            (acc + term) % m
        })
    }

    /// Digit position of coordinate `pos` that first matters at `level`.
    fn position(&self, pos: usize, level: u32) -> Option<u32> {
        let s = self.shift[pos];
        if pos == self.fixed || self.coef[pos] == 0 || level <= s {
            None
        } else {
            Some(level - 1 - s)
        }
    }

    fn descend(&mut self, ctx: &mut Context<'_>, level: u32, u: &mut [u64]) -> bool {
        if level > self.levels {
            return true;
        }
        let p = self.p;
        let free: Vec<(usize, u32)> = (0..u.len())
            .filter(|&pos| Some(pos) != self.solved)
            .filter_map(|pos| self.position(pos, level).map(|q| (pos, q)))
            .collect();
        let base: Vec<u64> = u.to_vec();
        let mut digits: Vec<u64> = free.iter().map(|&(_, q)| if q == 0 { 1 } else { 0 }).collect();
        loop {
            for (slot, &(pos, q)) in free.iter().enumerate() {
                u[pos] = base[pos] + digits[slot] * self.powers[q as usize];
            }
            match self.solved {
                Some(s) => {
                    let q = level - 1;
                    u[s] = base[s];
                    let candidates: Vec<u64> = if q == 0 {
                        let rest = self.value_mod(u, 1);
                        let target = mul_mod(
                            (p - rest) % p,
                            inv_mod(self.coef[s] % p, p).expect("unit coefficient"),
                            p,
                        );
                        // coefficient of the solved coordinate includes u_s = 0 here
                        ctx.roots_mod_p(target)
                    } else {
                        let g = self.value_mod(u, level);
                        let carry = (g / self.powers[q as usize]) % p;
                        let deriv = mul_mod(
                            mul_mod(self.coef[s] % p, self.d as u64 % p, p),
                            pow_mod(u[s], self.d as u64 - 1, p),
                            p,
                        );
                        let t = mul_mod((p - carry) % p, inv_mod(deriv, p).expect("unit derivative"), p);
                        vec![base[s] + t * self.powers[q as usize]]
                    };
                    for c in candidates {
                        u[s] = c;
                        debug_assert_eq!(self.value_mod(u, level), 0);
                        if self.descend(ctx, level + 1, u) {
                            return true;
                        }
                    }
                    u[s] = base[s];
                }
                None => {
                    if self.value_mod(u, level) == 0 && self.descend(ctx, level + 1, u) {
                        return true;
                    }
                }
            }
            // advance odometer over free digits
            let mut advanced = false;
            for slot in (0..free.len()).rev() {
                if digits[slot] + 1 < p {
                    digits[slot] += 1;
                    for later in slot + 1..free.len() {
                        digits[later] = if free[later].1 == 0 { 1 } else { 0 };
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
        u.copy_from_slice(&base);
        false
    }
}

fn search(form: &DiagonalForm, p: u64, record: bool) -> Result<(Option<Witness>, Vec<PatternRecord>)> {
    let mut ctx = Context::new(form, p);
    let mut records = Vec::new();
    let mut found = None;
    let mut failure = None;
    let cap = ctx.xi_cap;
    for_each_pattern(form.arity(), cap, |support, xi| {
        match search_pattern(&mut ctx, support, xi) {
            Ok(Some(w)) => {
                found = Some(w);
                true
            }
            Ok(None) => {
                if record {
                    records.push(PatternRecord {
                        support: support.iter().map(|i| i + 1).collect(),
                        xi: xi.to_vec(),
                        m: pattern_modulus_exponent(&ctx, support, xi),
                    });
                }
                false
            }
            Err(e) => {
                failure = Some(e);
                true
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((found, records))
}

/// Binary forms: `-a2/a1` must be a d-th power in `Q_p`.
fn search_binary(form: &DiagonalForm, p: u64) -> Result<Option<Witness>> {
    let ctx = Context::new(form, p);
    let (v1, v2) = (ctx.vals[0], ctx.vals[1]);
    let d = form.degree;
    if v1.abs_diff(v2) % d != 0 {
        return Ok(None);
    }
    let (xi1, xi2) = if v1 <= v2 { ((v2 - v1) / d, 0) } else { (0, (v1 - v2) / d) };
    let t_min = v1 + d * xi1;
    let levels = 2 * ctx.v_d + t_min + 1;
    let m = levels + t_min;
    let modulus = checked_pow(p, levels)?;
    // w1 * 1 + w2 u^d = 0 (mod p^levels)
    let w1 = rem_euclid_u(ctx.units[0], modulus);
    let w2 = rem_euclid_u(ctx.units[1], modulus);
    let b = mul_mod((modulus - w1) % modulus, inv_mod(w2, modulus).expect("unit"), modulus);
    let b = i64::try_from(b).map_err(|_| Error::Overflow("binary search modulus"))?;
    let roots = arith::solve_power_congruence(b, d, p, levels)?;
    let Some(&u2) = roots.first() else {
        return Ok(None);
    };
    let full = checked_pow(p, m)?;
    let s1 = if xi1 >= m { 0 } else { p.pow(xi1) };
    let s2 = if xi2 >= m { 0 } else { p.pow(xi2) };
    Ok(Some(Witness {
        x: vec![s1 % full, mul_mod(s2, u2, full)],
        m,
        j: 1,
        tau: ctx.v_d + t_min,
    }))
}

/// Exact `Q_p` solubility with a certificate.
pub fn qp_soluble(form: &DiagonalForm, p: u64) -> Result<LocalCertificate> {
    check_prime(p)?;
    let witness = if form.arity() == 2 {
        search_binary(form, p)?
    } else {
        search(form, p, false)?.0
    };
    Ok(match witness {
        Some(w) => LocalCertificate { place: Place::Prime(p), soluble: true, witness: Some(w), exhaustion: None },
        None => LocalCertificate {
            place: Place::Prime(p),
            soluble: false,
            witness: None,
            exhaustion: Some(enumerate_patterns(form, p)),
        },
    })
}

/// Verdict only; skips certificate bookkeeping.
pub fn is_qp_soluble(form: &DiagonalForm, p: u64) -> Result<bool> {
    check_prime(p)?;
    if form.arity() == 2 {
        return Ok(search_binary(form, p)?.is_some());
    }
    Ok(search(form, p, false)?.0.is_some())
}

/// Primes that can obstruct solubility: divisors of `d a_1 ... a_n` and
/// every prime below `p0(d)`.
pub fn test_primes(form: &DiagonalForm) -> Result<Vec<u64>> {
    let mut set: BTreeSet<u64> = primes_up_to(p0(form.degree) - 1).into_iter().collect();
    set.extend(arith::factorize(form.degree as i64)?.primes());
    for &a in &form.coeffs {
        set.extend(arith::factorize(a)?.primes());
    }
    Ok(set.into_iter().collect())
}

/// Solubility at the real place and at every prime in [`test_primes`].
pub fn everywhere_locally_soluble(form: &DiagonalForm) -> Result<(bool, Vec<LocalCertificate>)> {
    let real = real_soluble(form);
    let mut certs = vec![LocalCertificate { place: Place::Real, soluble: real, witness: None, exhaustion: None }];
    let mut all = real;
    for p in test_primes(form)? {
        let cert = qp_soluble(form, p)?;
        all &= cert.soluble;
        certs.push(cert);
    }
    Ok((all, certs))
}

/// Short-circuiting verdict of [`everywhere_locally_soluble`].
pub fn is_everywhere_locally_soluble(form: &DiagonalForm) -> Result<bool> {
    if !real_soluble(form) {
        return Ok(false);
    }
    for p in test_primes(form)? {
        if !is_qp_soluble(form, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// witness class

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeClass {
    pub p: u64,
    pub q: u64,
    pub residues: Vec<u64>,
}

/// Residue class `c mod Q` of coefficient vectors that are soluble at every
/// prime below `p0(d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessClass {
    pub d: u32,
    pub arity: usize,
    pub modulus: u64,
    pub residues: Vec<u64>,
    pub prime_data: Vec<PrimeClass>,
}

impl WitnessClass {
    pub fn contains(&self, coeffs: &[i64]) -> bool {
        coeffs.len() == self.arity
            && coeffs
                .iter()
                .zip(&self.residues)
                .all(|(&a, &c)| rem_euclid_u(a, self.modulus) == c)
    }

    /// Run `qp_soluble` on the signed representative of every `a_p`.
    pub fn verify(&self) -> Result<bool> {
        for pc in &self.prime_data {
            let coeffs: Vec<i64> = pc.residues.iter().map(|&r| signed_rep(r, pc.q)).collect();
            let form = DiagonalForm::new(self.d, coeffs)?;
            if !qp_soluble(&form, pc.p)?.soluble {
                return Ok(false);
            }
            for (&c, &r) in self.residues.iter().zip(&pc.residues) {
                if c % pc.q != r {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn signed_rep(r: u64, q: u64) -> i64 {
    if r == 0 {
        q as i64
    } else if r > q / 2 {
        r as i64 - q as i64
    } else {
        r as i64
    }
}

/// Build `(Q, c)` prime by prime and combine with the CRT.
///
/// At each prime `p < p0(d)` the class `a_p = (1, -1, 1, ..., 1) mod q_p`
/// is tried for `q_p = p, p^2, ...` until the fixed witness
/// `(1, 1, 0, ..., 0)` carries a Hensel margin for every member of the
/// class. That happens at `q_p = p^(2 v_p(d) + 1)`.
pub fn witness_class(d: u32, arity: usize) -> Result<WitnessClass> {
    if d < 2 {
        return domain("degree must be at least 2");
    }
    if !(2..=4).contains(&arity) {
        return domain(format!("unsupported arity {arity}"));
    }
    let mut prime_data = Vec::new();
    for p in primes_up_to(p0(d) - 1) {
        let v_d = vp_unchecked(d as u64, p);
        let m_cap = 2 * v_d + 1;
        let mut chosen = None;
        for e in 1..=m_cap {
            let q = checked_pow(p, e)?;
            let mut residues = vec![1 % q; arity];
            residues[1] = q - 1;
            // members have a_1 = 1 (mod q), so v_p(a_1) = 0 and tau = v_p(d)
            let mut x = vec![0u64; arity];
            x[0] = 1;
            x[1] = 1;
            let w = Witness { x, m: e, j: 1, tau: v_d };
            let rep = DiagonalForm::new(d, residues.iter().map(|&r| signed_rep(r, q)).collect())?;
            if verify_witness(&rep, p, &w) {
                chosen = Some(PrimeClass { p, q, residues });
                break;
            }
        }
        match chosen {
            Some(pc) => prime_data.push(pc),
            None => return Err(Error::Internal(format!("no witness class found at p = {p}"))),
        }
    }
    let mut modulus: u64 = 1;
    let mut residues = vec![0u64; arity];
    for pc in &prime_data {
        let new_mod = modulus.checked_mul(pc.q).ok_or(Error::Overflow("witness modulus"))?;
        for (c, &r) in residues.iter_mut().zip(&pc.residues) {
            *c = crt_pair(*c, modulus, r, pc.q);
        }
        modulus = new_mod;
    }
    Ok(WitnessClass { d, arity, modulus, residues, prime_data })
}

/// `x = a mod m`, `x = b mod n` for coprime `m`, `n`.
fn crt_pair(a: u64, m: u64, b: u64, n: u64) -> u64 {
    let mn = m as u128 * n as u128;
    let inv = inv_mod(m % n, n).unwrap_or(0) as u128;
    let diff = (b as i128 - a as i128).rem_euclid(n as i128) as u128;
    let k = diff * inv % n as u128;
    ((a as u128 + m as u128 * k) % mn) as u64
}
