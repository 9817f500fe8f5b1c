//! Full-rank sublattices of `Z^3`: Hermite normal form, exact membership,
//! coprime intersection and basis reduction.

use num_integer::Integer;
use serde::Serialize;

use super::cover::Provenance;
use crate::error::{domain, Error, Result};

type Row = [i128; 3];

/// Full-rank sublattice of `Z^3` with rows as basis vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lattice3 {
    pub basis: [[i64; 3]; 3],
    /// Upper-triangular Hermite normal form: positive diagonal, entries
    /// above each pivot reduced into `[0, pivot)`.
    pub hnf: [[i64; 3]; 3],
    pub det: u64,
    pub provenance: Provenance,
}

impl Lattice3 {
    /// Lattice generated by `rows` (at least three, spanning `Q^3`).
    pub fn from_generators(rows: &[[i64; 3]], provenance: Provenance) -> Result<Self> {
        let wide: Vec<Row> = rows.iter().map(|r| [r[0] as i128, r[1] as i128, r[2] as i128]).collect();
        let h = hnf(&wide)?;
        let hnf = narrow(&h)?;
        let det = (h[0][0] * h[1][1] * h[2][2]) as u64;
        let basis = if rows.len() == 3 { [rows[0], rows[1], rows[2]] } else { hnf };
        Ok(Self { basis, hnf, det, provenance })
    }

    /// The whole of `Z^3`.
    pub fn whole() -> Self {
        let id = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        Self { basis: id, hnf: id, det: 1, provenance: Provenance::Whole }
    }

    /// Exact membership by back-substitution against the HNF.
    pub fn contains(&self, x: [i64; 3]) -> bool {
        let h = &self.hnf;
        let mut r = [x[0] as i128, x[1] as i128, x[2] as i128];
        for i in 0..3 {
            let pivot = h[i][i] as i128;
            if r[i] % pivot != 0 {
                return false;
            }
            let c = r[i] / pivot;
            for j in i..3 {
                r[j] -= c * h[i][j] as i128;
            }
        }
        true
    }

    /// `L1 ∩ L2` for lattices of coprime determinant: `D1 L2 + D2 L1`.
    pub fn intersect_coprime(&self, other: &Lattice3, provenance: Provenance) -> Result<Lattice3> {
        if self.det.gcd(&other.det) != 1 {
            return domain("intersection requires coprime determinants");
        }
        let d1 = self.det as i128;
        let d2 = other.det as i128;
        let mut gens: Vec<Row> = Vec::with_capacity(6);
        for r in &other.hnf {
            gens.push(r.map(|v| v as i128 * d1));
        }
        for r in &self.hnf {
            gens.push(r.map(|v| v as i128 * d2));
        }
        let h = hnf(&gens)?;
        let hnf = narrow(&h)?;
        let det = (h[0][0] * h[1][1] * h[2][2]) as u64;
        debug_assert_eq!(det as u128, self.det as u128 * other.det as u128);
        Ok(Lattice3 { basis: hnf, hnf, det, provenance })
    }
}

fn narrow(h: &[Row; 3]) -> Result<[[i64; 3]; 3]> {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = i64::try_from(h[i][j]).map_err(|_| Error::Overflow("lattice entry"))?;
        }
    }
    Ok(out)
}

/// Row-style Hermite normal form of a generator matrix of rank 3.
pub(crate) fn hnf(rows: &[Row]) -> Result<[Row; 3]> {
    let mut m: Vec<Row> = rows.to_vec();
    let mut out = [[0i128; 3]; 3];
    for col in 0..3 {
        // Euclid on column `col` across the remaining rows
        loop {
            let nonzero: Vec<usize> = (0..m.len()).filter(|&i| m[i][col] != 0).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let piv = *nonzero.iter().min_by_key(|&&i| m[i][col].abs()).unwrap();
            let pr = m[piv];
            for &i in &nonzero {
                if i != piv {
                    let q = Integer::div_floor(&m[i][col], &pr[col]);
                    for k in 0..3 {
                        m[i][k] = m[i][k]
                            .checked_sub(q.checked_mul(pr[k]).ok_or(Error::Overflow("hnf"))?)
                            .ok_or(Error::Overflow("hnf"))?;
                    }
                }
            }
        }
        let Some(idx) = (0..m.len()).find(|&i| m[i][col] != 0) else {
            return domain("generators do not span a rank-3 lattice");
        };
        let mut row = m.swap_remove(idx);
        if row[col] < 0 {
            row = row.map(|v| -v);
        }
        out[col] = row;
        m.retain(|r| r.iter().any(|&v| v != 0));
    }
    // reduce entries above each pivot
    for j in 1..3 {
        let pivot = out[j][j];
        for i in 0..j {
            let q = Integer::div_floor(&out[i][j], &pivot);
            if q != 0 {
                let rj = out[j];
                for k in 0..3 {
                    out[i][k] -= q * rj[k];
                }
            }
        }
    }
    Ok(out)
}

fn dot(a: &Row, b: &Row) -> i128 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub_mul(a: &Row, b: &Row, c: i128) -> Row {
    [a[0] - c * b[0], a[1] - c * b[1], a[2] - c * b[2]]
}

/// Reduced basis, shortest vector first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedBasis {
    pub vectors: [[i64; 3]; 3],
    pub det: u64,
}

impl ReducedBasis {
    pub fn max_norms(&self) -> [u64; 3] {
        self.vectors.map(|v| v.iter().map(|c| c.unsigned_abs()).max().unwrap())
    }

    pub fn max_norm_product(&self) -> u128 {
        self.max_norms().iter().map(|&n| n as u128).product()
    }

    pub fn euclidean_norms(&self) -> [f64; 3] {
        self.vectors
            .map(|v| v.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt())
    }

    pub fn euclidean_product(&self) -> f64 {
        self.euclidean_norms().iter().product()
    }
}

/// Greedy reduction in dimension 3.
///
/// Vectors are kept sorted by Euclidean length; the second is reduced
/// against the first and the third against the plane lattice of the first
/// two (exact closest vector over a small window around the rounded real
/// solution). Passes repeat until no vector gets shorter. In dimension 3
/// the result reaches the successive minima, so
/// `det <= prod |b_i|_2 <= sqrt(2) det`.
pub fn reduce_basis(lattice: &Lattice3) -> Result<ReducedBasis> {
    let mut b: [Row; 3] = lattice.basis.map(|r| r.map(|v| v as i128));
    let det = det3(&b).unsigned_abs();
    if det == 0 {
        return domain("rank-deficient basis");
    }
    loop {
        b.sort_by_key(|v| (dot(v, v), *v));
        let mut improved = false;
        // b1 against b0
        let n0 = dot(&b[0], &b[0]);
        let c = round_div(dot(&b[1], &b[0]), n0);
        let mut best = b[1];
        for cand in [c - 1, c, c + 1] {
            let v = sub_mul(&b[1], &b[0], cand);
            if dot(&v, &v) < dot(&best, &best) {
                best = v;
            }
        }
        if best != b[1] {
            b[1] = best;
            improved = true;
        }
        // b2 against span(b0, b1)
        let g00 = dot(&b[0], &b[0]) as f64;
        let g01 = dot(&b[0], &b[1]) as f64;
        let g11 = dot(&b[1], &b[1]) as f64;
        let r0 = dot(&b[2], &b[0]) as f64;
        let r1 = dot(&b[2], &b[1]) as f64;
        let den = g00 * g11 - g01 * g01;
        let x = ((r0 * g11 - r1 * g01) / den).round() as i128;
        let y = ((r1 * g00 - r0 * g01) / den).round() as i128;
        let mut best = b[2];
        for dx in -2..=2 {
            for dy in -2..=2 {
                let v = sub_mul(&sub_mul(&b[2], &b[0], x + dx), &b[1], y + dy);
                if dot(&v, &v) < dot(&best, &best) {
                    best = v;
                }
            }
        }
        if best != b[2] {
            b[2] = best;
            improved = true;
        }
        if !improved {
            break;
        }
    }
    b.sort_by_key(|v| (dot(v, v), *v));
    debug_assert_eq!(det3(&b).unsigned_abs(), det);
    let vectors = narrow(&b)?;
    Ok(ReducedBasis { vectors, det: u64::try_from(det).map_err(|_| Error::Overflow("determinant"))? })
}

fn round_div(a: i128, b: i128) -> i128 {
    Integer::div_floor(&(2 * a + b), &(2 * b))
}

pub(crate) fn det3(m: &[Row; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
