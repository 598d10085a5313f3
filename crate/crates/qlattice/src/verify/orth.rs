//! Orthogonality checks: finite discrete Gram matrices and the Askey-Wilson
//! continuous inner product by point-doubling quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::families::{FamilyName, FamilySpec, Support};
use crate::lattice::delta_div;
use crate::poch::q_pochhammer_infinite;
use crate::report::CheckReport;
use crate::verify::params_of;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The Gram matrix of a finite orthogonality check.
#[derive(Debug, Clone)]
pub struct OrthogonalityGram {
    pub entries: Vec<Vec<Complex64>>,
    pub diag_floor: f64,
}

impl OrthogonalityGram {
    fn from_entries(entries: Vec<Vec<Complex64>>) -> Self {
        let diag_floor = entries
            .iter()
            .enumerate()
            .map(|(i, row)| row[i].norm())
            .fold(f64::INFINITY, f64::min);
        Self { entries, diag_floor }
    }

    /// Worst off-diagonal magnitude, normalized per entry by the geometric
    /// mean of the two diagonal entries it couples.
    ///
    /// The families keep their own (non-monic) normalizations, so diagonal
    /// magnitudes span many orders; dividing |G_nm| by sqrt(G_nn G_mm) makes
    /// the criterion invariant under rescaling any p_n.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    let scale = (self.entries[i][i].norm() * self.entries[j][j].norm()).sqrt();
                    worst = worst.max(v.norm() / scale);
                }
            }
        }
        worst
    }
}

/// Discrete orthogonality sum_{s=a}^{b-1} p_n p_m rho(s) nabla x_1(s).
pub fn check_orthogonality_discrete(
    spec: &FamilySpec,
    n_max: usize,
    tol: f64,
) -> Result<(OrthogonalityGram, CheckReport)> {
    let Support::Discrete { a, b } = spec.support() else {
        return Err(Error::Config(format!(
            "discrete orthogonality needs a finite discrete support; {} has none",
            spec.name().as_str()
        )));
    };
    let len = (b - a).re.round() as usize;
    if len < n_max + 2 {
        return Err(Error::Config(format!(
            "support length {len} too short for degrees up to {n_max}"
        )));
    }
    let lat = spec.lattice();
    let mut values: Vec<Vec<Complex64>> = Vec::with_capacity(len);
    let mut masses: Vec<Complex64> = Vec::with_capacity(len);
    for j in 0..len {
        let s = a + cx(j as f64);
        let w = spec
            .weight(0, s)
            .map_err(|e| Error::Config(format!("weight pole on support at s = {s}: {e}")))?;
        masses.push(w * lat.nabla_x(1.0, s)?);
        let row: Result<Vec<Complex64>> = (0..=n_max).map(|n| spec.eval(n, s)).collect();
        values.push(row?);
    }
    let mut entries = vec![vec![Complex64::default(); n_max + 1]; n_max + 1];
    for n in 0..=n_max {
        for m in 0..=n_max {
            let mut acc = Complex64::default();
            for j in 0..len {
                acc += values[j][n] * values[j][m] * masses[j];
            }
            entries[n][m] = acc;
        }
    }
    let gram = OrthogonalityGram::from_entries(entries);
    let ratio = gram.off_diagonal_ratio();
    let report = CheckReport::new(
        "orthogonality-discrete",
        spec.name().as_str(),
        params_of(spec),
        ratio,
        tol,
    )
    .with_n(n_max as i64)
    .with_note(format!(
        "{len}-point support, smallest diagonal {:.3e}",
        gram.diag_floor
    ));
    Ok((gram, report))
}

/// Orthogonality of the differentiated sequence Delta^(1) p_{n+1} against
/// rho_1 on the shifted lattice, summed over s = a..b-2.
pub fn check_orthogonality_derived(
    spec: &FamilySpec,
    n_max: usize,
    tol: f64,
) -> Result<(OrthogonalityGram, CheckReport)> {
    let Support::Discrete { a, b } = spec.support() else {
        return Err(Error::Config(format!(
            "derived-sequence orthogonality needs a finite discrete support; {} has none",
            spec.name().as_str()
        )));
    };
    let len = (b - a).re.round() as usize;
    if len < n_max + 3 {
        return Err(Error::Config(format!(
            "support length {len} too short for derived degrees up to {n_max}"
        )));
    }
    let lat = spec.lattice();
    let points = len - 1;
    let mut values: Vec<Vec<Complex64>> = Vec::with_capacity(points);
    let mut masses: Vec<Complex64> = Vec::with_capacity(points);
    for j in 0..points {
        let s = a + cx(j as f64);
        let w = spec
            .weight(1, s)
            .map_err(|e| Error::Config(format!("rho_1 pole on support at s = {s}: {e}")))?;
        masses.push(w * lat.nabla_x(2.0, s)?);
        let row: Result<Vec<Complex64>> = (0..=n_max)
            .map(|n| delta_div(|t| spec.eval(n + 1, t), lat, 0.0, s))
            .collect();
        values.push(row?);
    }
    let mut entries = vec![vec![Complex64::default(); n_max + 1]; n_max + 1];
    for n in 0..=n_max {
        for m in 0..=n_max {
            let mut acc = Complex64::default();
            for j in 0..points {
                acc += values[j][n] * values[j][m] * masses[j];
            }
            entries[n][m] = acc;
        }
    }
    let gram = OrthogonalityGram::from_entries(entries);
    let report = CheckReport::new(
        "orthogonality-derived",
        spec.name().as_str(),
        params_of(spec),
        gram.off_diagonal_ratio(),
        tol,
    )
    .with_n(n_max as i64)
    .with_note(format!("{points} points of the shifted chain"));
    Ok((gram, report))
}

/// Quadrature configuration for the continuous Askey-Wilson inner product.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub initial_points: usize,
    pub max_points: usize,
    /// Relative change between point-count doublings that counts as converged.
    pub convergence_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { initial_points: 128, max_points: 4096, convergence_tol: 1e-7 }
    }
}

/// Continuous orthogonality of the Askey-Wilson family over x in (-1, 1).
///
/// The integral is taken in theta with x = cos(theta): the inverse-square-root
/// endpoint factor cancels against the Jacobian and the integrand vanishes at
/// both ends, so the trapezoid rule converges rapidly; point counts double
/// until the Gram matrix stabilizes.
pub fn check_orthogonality_continuous_aw(
    spec: &FamilySpec,
    n_max: usize,
    quad: QuadConfig,
    tol: f64,
) -> Result<(OrthogonalityGram, CheckReport)> {
    if spec.name() != FamilyName::AskeyWilson {
        return Err(Error::Config("continuous orthogonality is Askey-Wilson only".into()));
    }
    let q = spec.q();
    if q.value().im != 0.0 || !(q.value().re > 0.0 && q.value().re < 1.0) {
        return Err(Error::Config("continuous orthogonality needs real 0 < q < 1".into()));
    }
    for (name, v) in spec.params() {
        if name != "q" && (v.im != 0.0 || !(v.re > 0.0 && v.re < 1.0)) {
            return Err(Error::Config(format!(
                "continuous orthogonality needs 0 < {name} < 1, got {v}"
            )));
        }
    }
    let ln_q = q.value().re.ln();
    let abcd: Vec<Complex64> = ["a", "b", "c", "d"].iter().map(|k| spec.params()[*k]).collect();

    let gram_at = |points: usize| -> Result<Vec<Vec<Complex64>>> {
        let h = std::f64::consts::PI / points as f64;
        let mut entries = vec![vec![Complex64::default(); n_max + 1]; n_max + 1];
        for j in 0..=points {
            let theta = h * j as f64;
            let e_itheta = Complex64::from_polar(1.0, theta);
            let num = q_pochhammer_infinite(e_itheta * e_itheta, q, 1e-16)?.value;
            let mut den = ONE;
            for &v in &abcd {
                den *= q_pochhammer_infinite(v * e_itheta, q, 1e-16)?.value;
            }
            let w = num.norm_sqr() / den.norm_sqr();
            let s = Complex64::new(0.0, theta / ln_q);
            let mut p = Vec::with_capacity(n_max + 1);
            for n in 0..=n_max {
                p.push(spec.eval(n, s)?);
            }
            let trapezoid = if j == 0 || j == points { 0.5 } else { 1.0 };
            for n in 0..=n_max {
                for m in 0..=n_max {
                    entries[n][m] += p[n] * p[m] * w * trapezoid * h;
                }
            }
        }
        Ok(entries)
    };

    let mut points = quad.initial_points;
    let mut current = gram_at(points)?;
    loop {
        if points * 2 > quad.max_points {
            return Err(Error::Convergence {
                what: format!(
                    "Askey-Wilson quadrature still moving at {points} points"
                ),
                iterations: points,
            });
        }
        let next = gram_at(points * 2)?;
        let mut change = 0.0f64;
        let mut scale = 0.0f64;
        for n in 0..=n_max {
            change = change.max((next[n][n] - current[n][n]).norm());
            scale = scale.max(next[n][n].norm());
        }
        current = next;
        points *= 2;
        if change <= quad.convergence_tol * scale {
            break;
        }
    }

    let gram = OrthogonalityGram::from_entries(current);
    let report = CheckReport::new(
        "orthogonality-continuous",
        spec.name().as_str(),
        params_of(spec),
        gram.off_diagonal_ratio(),
        tol,
    )
    .with_n(n_max as i64)
    .with_note(format!("converged at {points} quadrature points"));
    Ok((gram, report))
}
