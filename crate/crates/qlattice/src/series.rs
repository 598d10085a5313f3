//! Terminating and truncated basic hypergeometric series r_phi_s.
//!
//! A [`SeriesSpec`] is always built from its termination degree: the upper
//! parameter q^{-n} is inserted structurally, never detected by floating-point
//! comparison. Terms are accumulated with compensated summation since the
//! series alternate heavily for small q.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::QParam;
use crate::poch::Truncated;

const POLE_TOL: f64 = 1e-14;

/// Cap on the number of terms of a non-terminating partial sum.
pub const TRUNCATED_TERM_CAP: usize = 10_000;

/// A terminating basic hypergeometric series.
///
/// `upper` holds every numerator parameter including the structural
/// q^{-degree}; `lower` holds the denominator parameters, none of which may
/// equal q^{-m} for 0 <= m < degree.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    upper: Vec<Complex64>,
    lower: Vec<Complex64>,
    q: QParam,
    z: Complex64,
    degree: usize,
}

impl SeriesSpec {
    /// Build a terminating series of the given degree.
    ///
    /// `extra_upper` are the numerator parameters besides q^{-degree}.
    pub fn terminating(
        degree: usize,
        extra_upper: Vec<Complex64>,
        lower: Vec<Complex64>,
        q: QParam,
        z: Complex64,
    ) -> Result<Self> {
        for (i, &l) in lower.iter().enumerate() {
            for m in 0..degree as i64 {
                let pole = q.powi(-m);
                if (l - pole).norm() < POLE_TOL * (1.0 + pole.norm()) {
                    return Err(Error::Parameter(format!(
                        "lower parameter #{i} equals q^-{m}: the sum has a vanishing denominator"
                    )));
                }
            }
        }
        let mut upper = Vec::with_capacity(extra_upper.len() + 1);
        upper.push(q.powi(-(degree as i64)));
        upper.extend(extra_upper);
        Ok(Self { upper, lower, q, z, degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn upper(&self) -> &[Complex64] {
        &self.upper
    }

    pub fn lower(&self) -> &[Complex64] {
        &self.lower
    }

    pub fn argument(&self) -> Complex64 {
        self.z
    }
}

/// Kahan-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: Complex64,
    comp: Complex64,
}

impl Kahan {
    fn add(&mut self, term: Complex64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Evaluate a terminating r_phi_s by the standard term recurrence.
///
/// Includes the [(-1)^k q^{k(k-1)/2}]^{1 + s - r} normalization factor; for
/// the balanced case r = s + 1 that exponent is zero.
pub fn eval_terminating(spec: &SeriesSpec) -> Result<Complex64> {
    let p = 1 + spec.lower.len() as i64 - spec.upper.len() as i64;
    let q = spec.q.value();
    let mut acc = Kahan::default();
    let mut term = Complex64::new(1.0, 0.0);
    acc.add(term);
    let mut qk = Complex64::new(1.0, 0.0);
    let mut qk1 = q;
    for k in 0..spec.degree {
        let mut ratio = spec.z;
        for &u in &spec.upper {
            ratio *= Complex64::ONE - u * qk;
        }
        let qq = Complex64::ONE - qk1;
        if qq.norm() < POLE_TOL {
            return Err(Error::SeriesPole { k: k + 1 });
        }
        ratio /= qq;
        for &l in &spec.lower {
            let factor = Complex64::ONE - l * qk;
            if factor.norm() < POLE_TOL * (1.0 + (l * qk).norm()) {
                return Err(Error::SeriesPole { k: k + 1 });
            }
            ratio /= factor;
        }
        if p != 0 {
            // ratio of [(-1)^k q^{C(k,2)}]^p between consecutive terms is (-q^k)^p
            let mut extra = Complex64::new(1.0, 0.0);
            let base = -qk;
            for _ in 0..p.unsigned_abs() {
                extra *= base;
            }
            if p < 0 {
                ratio /= extra;
            } else {
                ratio *= extra;
            }
        }
        term *= ratio;
        acc.add(term);
        qk *= q;
        qk1 *= q;
    }
    Ok(acc.sum)
}

/// Partial sum of a non-terminating series, stopping once three consecutive
/// terms fall below `tol` relative to the running sum.
pub fn eval_truncated(
    upper: &[Complex64],
    lower: &[Complex64],
    q: &QParam,
    z: Complex64,
    tol: f64,
) -> Result<Truncated> {
    if q.value().norm() >= 1.0 {
        return Err(Error::Domain("truncated series need |q| < 1".into()));
    }
    if tol <= 0.0 {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let p = 1 + lower.len() as i64 - upper.len() as i64;
    let qv = q.value();
    let mut acc = Kahan::default();
    let mut term = Complex64::new(1.0, 0.0);
    acc.add(term);
    if z.norm() == 0.0 {
        return Ok(Truncated { value: acc.sum, terms: 1 });
    }
    let mut qk = Complex64::new(1.0, 0.0);
    let mut qk1 = qv;
    let mut small_streak = 0usize;
    for k in 0..TRUNCATED_TERM_CAP {
        let mut ratio = z;
        for &u in upper {
            ratio *= Complex64::ONE - u * qk;
        }
        ratio /= Complex64::ONE - qk1;
        for &l in lower {
            let factor = Complex64::ONE - l * qk;
            if factor.norm() < POLE_TOL * (1.0 + (l * qk).norm()) {
                return Err(Error::SeriesPole { k: k + 1 });
            }
            ratio /= factor;
        }
        if p != 0 {
            let mut extra = Complex64::new(1.0, 0.0);
            let base = -qk;
            for _ in 0..p.unsigned_abs() {
                extra *= base;
            }
            if p < 0 {
                ratio /= extra;
            } else {
                ratio *= extra;
            }
        }
        term *= ratio;
        acc.add(term);
        qk *= qv;
        qk1 *= qv;
        if term.norm() < tol * acc.sum.norm().max(f64::MIN_POSITIVE) {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok(Truncated { value: acc.sum, terms: k + 2 });
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::Convergence { what: "basic hypergeometric partial sum".into(), iterations: TRUNCATED_TERM_CAP })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rel_residual;
    use crate::poch::q_pochhammer_infinite;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn degree_zero_is_one() {
        let p = q(0.5);
        let spec = SeriesSpec::terminating(0, vec![c(0.3)], vec![c(0.9)], p, c(0.7)).unwrap();
        assert!((eval_terminating(&spec).unwrap() - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn al_salam_carlitz_first_degree_assembles_by_hand() {
        // U_1^{(a)}(x;q) = (-a) 2phi1(q^{-1}, 1/x; 0; q, qx/a) = x - 1 - a
        for &(av, xv, qv) in &[(0.5, 0.8123, 0.5), (-0.4, 1.7, 0.3), (0.25, 0.4, 0.7)] {
            let p = q(qv);
            let a = c(av);
            let x = c(xv);
            let spec =
                SeriesSpec::terminating(1, vec![1.0 / x], vec![c(0.0)], p, p.value() * x / a)
                    .unwrap();
            let got = -a * eval_terminating(&spec).unwrap();
            let expect = x - 1.0 - a;
            assert!(rel_residual(got, expect) < 1e-14, "a={av}, x={xv}, q={qv}");
        }
    }

    #[test]
    fn q_meixner_degree_zero_prefactor_is_unit() {
        // (bq;q)_0 (-c)^0 / q^0 times the unit series
        let p = q(0.5);
        let spec = SeriesSpec::terminating(0, vec![c(1.9)], vec![c(0.2)], p, c(-3.1)).unwrap();
        let m0 = Complex64::ONE * eval_terminating(&spec).unwrap();
        assert!((m0 - 1.0).norm() < 1e-15);
    }

    #[test]
    fn lower_parameter_pole_rejected() {
        let p = q(0.5);
        // lower parameter q^{-2} poles inside a degree-3 sum
        let err = SeriesSpec::terminating(3, vec![c(0.4)], vec![p.powi(-2)], p, c(0.5));
        assert!(err.is_err());
    }

    #[test]
    fn polynomial_in_z_of_bounded_degree() {
        // finite differences of order degree+1 in z vanish
        let p = q(0.45);
        let degree = 3usize;
        let upper = vec![c(0.3), c(0.8)];
        let lower = vec![c(0.25)];
        let f = |z: Complex64| {
            let spec = SeriesSpec::terminating(degree, upper.clone(), lower.clone(), p, z).unwrap();
            eval_terminating(&spec).unwrap()
        };
        let h = 0.35f64;
        let mut vals: Vec<Complex64> =
            (0..=degree + 1).map(|j| f(c(0.2 + h * j as f64))).collect();
        let scale = vals.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
        for _ in 0..degree + 1 {
            vals = vals.windows(2).map(|w| w[1] - w[0]).collect();
        }
        assert!(vals[0].norm() / scale < 1e-10);
    }

    #[test]
    fn truncated_agrees_with_terminating() {
        let p = q(0.5);
        let n = 4usize;
        let extra = vec![c(0.3), c(0.7)];
        let lower = vec![c(0.4)];
        let spec = SeriesSpec::terminating(n, extra.clone(), lower.clone(), p, c(0.6)).unwrap();
        let exact = eval_terminating(&spec).unwrap();
        let mut upper = vec![p.powi(-(n as i64))];
        upper.extend(extra);
        let approx = eval_truncated(&upper, &lower, &p, c(0.6), 1e-15).unwrap();
        assert!(rel_residual(exact, approx.value) < 1e-12);
    }

    #[test]
    fn truncated_edge_cases() {
        let p = q(0.5);
        assert!(
            (eval_truncated(&[c(0.2)], &[], &p, c(0.0), 1e-12).unwrap().value - 1.0).norm()
                < 1e-15
        );
        // divergent argument |z| > 1 with no decay never converges
        let err = eval_truncated(&[c(1.7), c(2.3)], &[c(0.45)], &p, c(3.0), 1e-12);
        assert!(matches!(err, Err(Error::Convergence { .. })));
    }

    #[test]
    fn q_binomial_theorem() {
        // 1phi0(a; -; q, z) = (az;q)_inf / (z;q)_inf
        for &(av, zv, qv) in &[(0.3, 0.5, 0.4), (0.8, -0.3, 0.6), (-0.5, 0.7, 0.5)] {
            let p = q(qv);
            let got = eval_truncated(&[c(av)], &[], &p, c(zv), 1e-15).unwrap().value;
            let num = q_pochhammer_infinite(c(av * zv), &p, 1e-16).unwrap().value;
            let den = q_pochhammer_infinite(c(zv), &p, 1e-16).unwrap().value;
            assert!(rel_residual(got, num / den) < 1e-11, "a={av}, z={zv}, q={qv}");
        }
    }

    proptest! {
        #[test]
        fn parameter_order_is_irrelevant(
            u1 in -0.8f64..0.8, u2 in -0.8f64..0.8, l1 in 1.1f64..2.0, l2 in -0.9f64..-0.1,
            qv in 0.25f64..0.75, zv in -0.9f64..0.9,
        ) {
            let p = QParam::new(qv).unwrap();
            let a = SeriesSpec::terminating(3, vec![c(u1), c(u2)], vec![c(l1), c(l2)], p, c(zv)).unwrap();
            let b = SeriesSpec::terminating(3, vec![c(u2), c(u1)], vec![c(l2), c(l1)], p, c(zv)).unwrap();
            let va = eval_terminating(&a).unwrap();
            let vb = eval_terminating(&b).unwrap();
            prop_assert!(rel_residual(va, vb) < 1e-12);
        }
    }
}
