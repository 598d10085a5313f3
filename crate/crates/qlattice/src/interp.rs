//! Newton interpolation of functions of s as polynomials in a lattice coordinate.
//!
//! Used to read off tau'(x), sigma-hat''(x), leading coefficients of the
//! families, and for every "is a polynomial on x_k(s)" verification.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// A polynomial in Newton form over complex nodes.
#[derive(Debug, Clone)]
pub struct NewtonPoly {
    nodes: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl NewtonPoly {
    /// Fit by divided differences; nodes must be pairwise distinct.
    pub fn fit(nodes: Vec<Complex64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::Parameter("interpolation needs matching, nonempty node/value lists".into()));
        }
        let n = nodes.len();
        let scale = nodes.iter().map(|x| x.norm()).fold(1.0f64, f64::max);
        for i in 0..n {
            for j in i + 1..n {
                if (nodes[i] - nodes[j]).norm() < 1e-13 * scale {
                    return Err(Error::Parameter(format!(
                        "interpolation nodes {i} and {j} coincide"
                    )));
                }
            }
        }
        let mut table = values;
        let mut coeffs = Vec::with_capacity(n);
        coeffs.push(table[0]);
        for order in 1..n {
            for i in 0..n - order {
                table[i] = (table[i + 1] - table[i]) / (nodes[i + order] - nodes[i]);
            }
            coeffs.push(table[0]);
        }
        Ok(Self { nodes, coeffs })
    }

    /// Evaluate via Horner's scheme on the Newton form.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        let n = self.coeffs.len();
        let mut acc = self.coeffs[n - 1];
        for i in (0..n - 1).rev() {
            acc = acc * (x - self.nodes[i]) + self.coeffs[i];
        }
        acc
    }

    /// Degree of the fitted form (node count minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Top divided difference: the leading coefficient when the data is an
    /// exact polynomial of this degree.
    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }
}

/// Sample f on `s_nodes` and fit a polynomial in x_level(s).
pub fn fit_on_lattice<F>(
    f: F,
    lat: &Lattice,
    level: f64,
    s_nodes: &[Complex64],
) -> Result<NewtonPoly>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let xs: Vec<Complex64> = s_nodes.iter().map(|&s| lat.x_m(level, s)).collect();
    let mut ys = Vec::with_capacity(s_nodes.len());
    for &s in s_nodes {
        ys.push(f(s)?);
    }
    NewtonPoly::fit(xs, ys)
}

/// Unit-step nodes s_ref, s_ref+1, ..., s_ref+count-1.
pub fn unit_nodes(s_ref: Complex64, count: usize) -> Vec<Complex64> {
    (0..count).map(|j| s_ref + Complex64::new(j as f64, 0.0)).collect()
}

/// Max relative deviation between f and the fit at the held-out s points.
pub fn max_rel_residual<F>(
    f: F,
    poly: &NewtonPoly,
    lat: &Lattice,
    level: f64,
    holdout: &[Complex64],
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut worst = 0.0f64;
    for &s in holdout {
        let x = lat.x_m(level, s);
        let truth = f(s)?;
        let approx = poly.eval(x);
        let r = (truth - approx).norm() / 1.0f64.max(truth.norm()).max(approx.norm());
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{rel_residual, QParam};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn recovers_quadratic() {
        let q = QParam::new(0.5).unwrap();
        let lat = Lattice::new(c(0.5), c(0.5), c(0.1), q).unwrap();
        let f = |s: Complex64| {
            let x = lat.x(s);
            Ok(c(2.0) * x * x - c(0.5) * x + c(3.0))
        };
        let poly = fit_on_lattice(f, &lat, 0.0, &unit_nodes(c(0.3), 3)).unwrap();
        assert!(rel_residual(poly.leading(), c(2.0)) < 1e-12);
        let holdout = unit_nodes(c(4.15), 6);
        assert!(max_rel_residual(f, &poly, &lat, 0.0, &holdout).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_coincident_nodes() {
        let r = NewtonPoly::fit(vec![c(1.0), c(1.0)], vec![c(2.0), c(3.0)]);
        assert!(r.is_err());
    }
}
