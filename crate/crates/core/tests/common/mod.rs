//! Independent oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use num_integer::Integer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Soluble,
    Insoluble,
    Undecided,
}

fn pow_mod(mut b: u128, mut e: u32, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn vp(mut n: u128, p: u128) -> u32 {
    let mut v = 0;
    while n != 0 && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

struct Tree<'a> {
    a: &'a [i64],
    d: u32,
    p: u128,
    limit: u32,
    undecided: bool,
}

impl Tree<'_> {
    fn value(&self, x: &[u128], m: u128) -> u128 {
        self.a.iter().zip(x).fold(0, |acc, (&a, &xi)| {
            let ai = (a as i128).rem_euclid(m as i128) as u128;
            (acc + ai * pow_mod(xi, self.d, m)) % m
        })
    }

    /// Some coordinate carries a Hensel margin at level `k`.
    fn margin(&self, x: &[u128], k: u32) -> bool {
        let pk = self.p.pow(k);
        x.iter().zip(self.a).any(|(&xi, &a)| {
            if xi % pk == 0 {
                return false;
            }
            let v = vp(self.d as u128, self.p) + vp(a.unsigned_abs() as u128, self.p) + (self.d - 1) * vp(xi, self.p);
            2 * v < k
        })
    }

    /// Depth-first over primitive zeros mod `p^k`; true once a margin appears.
    fn dfs(&mut self, x: &mut Vec<u128>, fixed: usize, k: u32) -> bool {
        if self.margin(x, k) {
            return true;
        }
        if k == self.limit {
            self.undecided = true;
            return false;
        }
        let pk = self.p.pow(k);
        let next = pk * self.p;
        let free: Vec<usize> = (0..x.len()).filter(|&i| i != fixed).collect();
        let combos = self.p.pow(free.len() as u32);
        let base = x.clone();
        for c in 0..combos {
            let mut t = c;
            for &i in &free {
                x[i] = base[i] + (t % self.p) * pk;
                t /= self.p;
            }
            if self.value(x, next) == 0 && self.dfs(x, fixed, k + 1) {
                return true;
            }
        }
        x.copy_from_slice(&base);
        false
    }
}

/// Brute-force `Q_p` solubility of `sum a_i x_i^d = 0`.
///
/// Primitive zeros are normalised so the first unit coordinate equals 1
/// and earlier coordinates are divisible by `p`. A zero mod `p^k` with
/// `k >= 2 v_p(dF/dx_j) + 1` lifts; no primitive zero mod `p^k` rules out
/// solubility. Depth starts at 6 and is extended to 12 when undecided.
pub fn qp_oracle(a: &[i64], d: u32, p: u64) -> Verdict {
    for limit in [6, 12] {
        let mut tree = Tree { a, d, p: p as u128, limit, undecided: false };
        let n = a.len();
        let mut found = false;
        'outer: for fixed in 0..n {
            let tail = n - fixed - 1;
            for c in 0..(p as u128).pow(tail as u32) {
                let mut x = vec![0u128; n];
                x[fixed] = 1;
                let mut t = c;
                for xi in x.iter_mut().skip(fixed + 1) {
                    *xi = t % p as u128;
                    t /= p as u128;
                }
                if tree.value(&x, p as u128) == 0 && tree.dfs(&mut x, fixed, 1) {
                    found = true;
                    break 'outer;
                }
            }
        }
        if found {
            return Verdict::Soluble;
        }
        if !tree.undecided {
            return Verdict::Insoluble;
        }
    }
    Verdict::Undecided
}

/// Coefficient triples in `values`, one per orbit of permutations and
/// global sign change.
pub fn symmetric_triples(values: &[i64]) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    let mut v = values.to_vec();
    v.sort_unstable();
    for i in 0..v.len() {
        for j in i..v.len() {
            for k in j..v.len() {
                let t = [v[i], v[j], v[k]];
                let neg = [-t[2], -t[1], -t[0]];
                if neg >= t {
                    out.push(t);
                }
            }
        }
    }
    out
}

pub fn pairwise_coprime(a: &[i64]) -> bool {
    (0..a.len()).all(|i| (i + 1..a.len()).all(|j| a[i].gcd(&a[j]) == 1))
}

pub fn squarefree(n: i64) -> bool {
    let n = n.unsigned_abs();
    (2..).take_while(|q| q * q <= n).all(|q| !n.is_multiple_of(q * q))
}
