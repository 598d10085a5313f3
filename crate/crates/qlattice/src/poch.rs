//! q-Pochhammer symbols.
//!
//! - [`q_pochhammer`]: (a;q)_k for any integer k, negative indices via
//!   reciprocal factors.
//! - [`q_pochhammer_multi`]: the product shorthand (a1,...,ar;q)_k.
//! - [`q_pochhammer_infinite`]: the truncated infinite product (a;q)_inf.
//! - [`q_pochhammer_complex`]: (a;q)_s for complex index s, as the ratio
//!   (a;q)_inf / (a q^s;q)_inf, valid for |q| < 1.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::QParam;

/// Iteration cap for infinite products.
pub const INFINITE_PRODUCT_CAP: usize = 100_000;

/// Minimum number of factors taken before the truncation test may stop.
const MIN_FACTORS: usize = 8;

/// Guard threshold for vanishing factors in reciprocals.
const POLE_TOL: f64 = 1e-14;

/// A truncated limit together with the number of terms or factors it took.
#[derive(Debug, Clone, Copy)]
pub struct Truncated {
    pub value: Complex64,
    pub terms: usize,
}

/// (a;q)_k for integer k.
///
/// k >= 0 gives the finite product (1-a)(1-aq)...(1-aq^{k-1}); k < 0 gives
/// 1 / [(1-aq^{-1})...(1-aq^{k})], erroring when a reciprocal factor vanishes.
pub fn q_pochhammer(a: Complex64, q: &QParam, k: i64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    if k >= 0 {
        let mut qj = Complex64::new(1.0, 0.0);
        for _ in 0..k {
            acc *= Complex64::ONE - a * qj;
            qj *= q.value();
        }
        Ok(acc)
    } else {
        let qinv = 1.0 / q.value();
        let mut qj = Complex64::new(1.0, 0.0);
        for j in 1..=k.unsigned_abs() {
            qj *= qinv;
            let factor = Complex64::ONE - a * qj;
            if factor.norm() < POLE_TOL * (1.0 + (a * qj).norm()) {
                return Err(Error::PochhammerPole { j: j as u32 });
            }
            acc *= factor;
        }
        Ok(1.0 / acc)
    }
}

/// Product of q-Pochhammer symbols over a parameter list; empty list gives 1.
pub fn q_pochhammer_multi(params: &[Complex64], q: &QParam, k: i64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for &a in params {
        acc *= q_pochhammer(a, q, k)?;
    }
    Ok(acc)
}

/// (a;q)_inf as a truncated product, requiring |q| < 1.
///
/// Stops once |a q^k| < tol with at least 8 factors taken; the tail of the
/// product then differs from 1 by O(|a q^k| / (1 - |q|)).
pub fn q_pochhammer_infinite(a: Complex64, q: &QParam, tol: f64) -> Result<Truncated> {
    if q.value().norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "infinite q-Pochhammer products need |q| < 1, got |q| = {}",
            q.value().norm()
        )));
    }
    if tol <= 0.0 {
        return Err(Error::Parameter("truncation tolerance must be positive".into()));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    let mut aqk = a;
    for k in 0..INFINITE_PRODUCT_CAP {
        if aqk.norm() < tol && k >= MIN_FACTORS {
            return Ok(Truncated { value: acc, terms: k });
        }
        acc *= Complex64::ONE - aqk;
        aqk *= q.value();
    }
    Err(Error::Convergence {
        what: format!("infinite q-Pochhammer product, |a| = {}", a.norm()),
        iterations: INFINITE_PRODUCT_CAP,
    })
}

/// (a;q)_s for complex index s, via (a;q)_inf / (a q^s;q)_inf.
///
/// Agrees with the finite products for integer s. Errors when a q^s lies on
/// a pole of the reciprocal (i.e. a q^{s+j} = 1 for some j >= 0).
pub fn q_pochhammer_complex(a: Complex64, q: &QParam, s: Complex64, tol: f64) -> Result<Complex64> {
    let num = q_pochhammer_infinite(a, q, tol)?.value;
    let den = q_pochhammer_infinite(a * q.pow(s), q, tol)?.value;
    if den.norm() < POLE_TOL * POLE_TOL {
        return Err(Error::Domain(format!(
            "complex-index q-Pochhammer pole: (a q^s;q)_inf vanishes for a = {a}, s = {s}"
        )));
    }
    Ok(num / den)
}

/// Default truncation tolerance for internal weight evaluations: below the
/// double-precision noise floor, so products are machine-accurate.
pub const WEIGHT_PRODUCT_TOL: f64 = 1e-17;
