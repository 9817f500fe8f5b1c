//! Rational points of bounded height on `a1 x1^d + a2 x2^d + a3 x3^d = 0`
//! and the lattice machinery that bounds how many there can be.

mod cover;
mod lattice;
mod search;

pub use cover::{
    build_cover, build_prime_family, crt_combine, lattice_point_count, meets_case_bound, verify_cover,
    CaseKind, CoverReport, FamilySummary, LatticeCount, LatticeCover, PrimeProvenance, Provenance, LAMBDA_BOX_CONSTANT,
};
pub use lattice::{reduce_basis, Lattice3, ReducedBasis};
pub use search::{has_point, search_points, RationalPoint};

use crate::arith;
use crate::error::{domain, Result};
use crate::local::DiagonalForm;
use crate::Real;

/// Ternary form with pairwise coprime coefficients, or a domain error.
pub(crate) fn require_pairwise_coprime(form: &DiagonalForm) -> Result<()> {
    if form.arity() != 3 {
        return domain("expected a ternary form");
    }
    let a = form.coeffs();
    for i in 0..3 {
        for j in i + 1..3 {
            if arith::gcd_i64(a[i], a[j]) != 1 {
                return domain(format!("coefficients {} and {} are not coprime", a[i], a[j]));
            }
        }
    }
    Ok(())
}

/// `(1 + B^(3/2) / a^(1/d)) d^omega(a)` with `a = |a1 a2 a3|`.
pub fn theorem3_bound<F: Real>(form: &DiagonalForm, height: F) -> Result<F> {
    require_pairwise_coprime(form)?;
    let a = form.coefficient_product()?;
    let omega = arith::factorize(a as i64)?.omega();
    let d = F::from_u32(form.degree()).unwrap();
    let af = F::from_u64(a).unwrap();
    let three_halves = F::from_f64(1.5).unwrap();
    Ok((F::one() + height.powf(three_halves) / af.powf(d.recip())) * d.powi(omega as i32))
}

/// Height `a^(2/(3d))` at which [`theorem3_bound`] collapses to
/// `2 d^omega(a)`.
pub fn height_threshold<F: Real>(form: &DiagonalForm) -> Result<F> {
    let a = F::from_u64(form.coefficient_product()?).unwrap();
    let d = F::from_u32(form.degree()).unwrap();
    Ok(a.powf(F::from_u32(2).unwrap() / (F::from_u32(3).unwrap() * d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem3_examples() {
        let f = DiagonalForm::new(3, vec![1, 1, 1]).unwrap();
        let v: f64 = theorem3_bound(&f, 10.0).unwrap();
        assert!((v - (1.0 + 10f64.powf(1.5))).abs() < 1e-9);
        assert!((v - 32.62).abs() < 0.01);
        let f = DiagonalForm::new(2, vec![1, 1, -5]).unwrap();
        let v: f64 = theorem3_bound(&f, 50.0).unwrap();
        assert!((v - (1.0 + 50f64.powf(1.5) / 5f64.sqrt()) * 2.0).abs() < 1e-9);
        assert!(theorem3_bound(&DiagonalForm::new(2, vec![2, 4, 1]).unwrap(), 3.0f64).is_err());
    }

    #[test]
    fn threshold_collapses_bound() {
        for coeffs in [[1i64, 2, -15], [3, 5, 7], [1, 1, -30]] {
            for d in 2..=4 {
                let f = DiagonalForm::new(d, coeffs.to_vec()).unwrap();
                let b: f64 = height_threshold(&f).unwrap();
                let omega = arith::omega(f.coefficient_product().unwrap() as i64).unwrap();
                let v: f64 = theorem3_bound(&f, b).unwrap();
                let expected = 2.0 * (d as f64).powi(omega as i32);
                assert!((v - expected).abs() < 1e-9 * expected);
            }
        }
    }
}
