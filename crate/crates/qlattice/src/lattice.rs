//! Scalar q-calculus primitives.
//!
//! - [`QParam`]: the deformation parameter q, validated away from 0, 1, and
//!   roots of unity.
//! - [`q_number`] / [`alpha_q`]: the symmetric q-number [s]_q and its cosine-like
//!   companion alpha_q(s).
//! - [`Lattice`]: the q-quadratic grid x(s) = c1 q^s + c2 q^-s + c3 together
//!   with its half-shifted companions x_m(s) = x(s + m/2).
//! - [`delta_div`], [`nabla_div`], [`delta_chain`], [`nabla_chain`], [`mean_op`]:
//!   the divided-difference and forward-mean operators all higher layers use.
//!
//! All scalars are complex doubles; powers of q are taken on the principal
//! branch, so q^{s/2} is well defined for complex s.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest power screened when rejecting roots of unity in [`QParam`].
pub const ROOT_OF_UNITY_SCREEN: u32 = 64;

const ROOT_TOL: f64 = 1e-12;

/// Relative threshold snapping a lattice step to "degenerate".
const STEP_TOL: f64 = 1e-14;

/// The deformation parameter q with its principal logarithm cached.
///
/// Validated so that q != 0, q != 1 and q^n != 1 for n up to
/// [`ROOT_OF_UNITY_SCREEN`]. Plain construction accepts real 0 < q < 1;
/// anything else goes through [`QParam::new_unrestricted`].
#[derive(Debug, Clone, Copy)]
pub struct QParam {
    q: Complex64,
    ln_q: Complex64,
}

impl QParam {
    /// Standard construction: real q with 0 < q < 1.
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) || !q.is_finite() {
            return Err(Error::InvalidQ(format!(
                "default construction requires real 0 < q < 1, got {q}; use new_unrestricted for other values"
            )));
        }
        Self::new_unrestricted(Complex64::new(q, 0.0))
    }

    /// Construction for any complex q outside {0} and the roots of unity.
    pub fn new_unrestricted(q: Complex64) -> Result<Self> {
        if !q.re.is_finite() || !q.im.is_finite() {
            return Err(Error::InvalidQ("q must be finite".into()));
        }
        if q.norm() < ROOT_TOL {
            return Err(Error::InvalidQ("q = 0 is excluded".into()));
        }
        let mut p = Complex64::new(1.0, 0.0);
        for n in 1..=ROOT_OF_UNITY_SCREEN {
            p *= q;
            if (p - 1.0).norm() < ROOT_TOL {
                return Err(Error::InvalidQ(format!("q^{n} = 1 within tolerance {ROOT_TOL}")));
            }
        }
        Ok(Self { q, ln_q: q.ln() })
    }

    pub fn value(&self) -> Complex64 {
        self.q
    }

    /// q^w on the principal branch.
    pub fn pow(&self, w: Complex64) -> Complex64 {
        (w * self.ln_q).exp()
    }

    /// q^k for integer k, computed by repeated multiplication (keeps real q exact-ish).
    pub fn powi(&self, k: i64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let base = if k >= 0 { self.q } else { 1.0 / self.q };
        for _ in 0..k.unsigned_abs() {
            acc *= base;
        }
        acc
    }

    /// kappa_q = q^{1/2} - q^{-1/2}.
    pub fn kappa(&self) -> Complex64 {
        self.pow(Complex64::new(0.5, 0.0)) - self.pow(Complex64::new(-0.5, 0.0))
    }

    /// The parameter 1/q, revalidated.
    pub fn inverse(&self) -> Result<QParam> {
        QParam::new_unrestricted(1.0 / self.q)
    }
}

/// The symmetric q-number [s]_q = (q^{s/2} - q^{-s/2}) / (q^{1/2} - q^{-1/2}).
pub fn q_number(s: Complex64, q: &QParam) -> Complex64 {
    let half = Complex64::new(0.5, 0.0);
    (q.pow(s * half) - q.pow(-s * half)) / (q.pow(half) - q.pow(-half))
}

/// alpha_q(s) = (q^{s/2} + q^{-s/2}) / 2.
pub fn alpha_q(s: Complex64, q: &QParam) -> Complex64 {
    let half = Complex64::new(0.5, 0.0);
    (q.pow(s * half) + q.pow(-s * half)) / 2.0
}

/// The q-quadratic lattice x(s) = c1 q^s + c2 q^-s + c3.
///
/// Setting c1 = 0 or c2 = 0 degenerates to a q-linear lattice; both zero is
/// rejected. Nondegeneracy of individual steps is checked where steps are
/// actually divided by.
#[derive(Debug, Clone, Copy)]
pub struct Lattice {
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
    q: QParam,
}

impl Lattice {
    pub fn new(c1: Complex64, c2: Complex64, c3: Complex64, q: QParam) -> Result<Self> {
        if c1.norm() == 0.0 && c2.norm() == 0.0 {
            return Err(Error::InvalidLattice("c1 and c2 cannot both vanish".into()));
        }
        Ok(Self { c1, c2, c3, q })
    }

    pub fn q(&self) -> &QParam {
        &self.q
    }

    /// x(s).
    pub fn x(&self, s: Complex64) -> Complex64 {
        self.c1 * self.q.pow(s) + self.c2 * self.q.pow(-s) + self.c3
    }

    /// x_m(s) = x(s + m/2); m may be any real (integers and half-integers in practice).
    pub fn x_m(&self, m: f64, s: Complex64) -> Complex64 {
        self.x(s + Complex64::new(0.5 * m, 0.0))
    }

    /// Forward step Delta x_m(s) = x_m(s+1) - x_m(s), rejected when degenerate.
    pub fn delta_x(&self, m: f64, s: Complex64) -> Result<Complex64> {
        let a = self.x_m(m, s + Complex64::ONE);
        let b = self.x_m(m, s);
        let step = a - b;
        if step.norm() <= STEP_TOL * (1.0 + a.norm() + b.norm()) {
            return Err(Error::DegenerateStep { level: m, s, stage: String::new() });
        }
        Ok(step)
    }

    /// Backward step Nabla x_m(s) = x_m(s) - x_m(s-1), rejected when degenerate.
    pub fn nabla_x(&self, m: f64, s: Complex64) -> Result<Complex64> {
        let a = self.x_m(m, s);
        let b = self.x_m(m, s - Complex64::ONE);
        let step = a - b;
        if step.norm() <= STEP_TOL * (1.0 + a.norm() + b.norm()) {
            return Err(Error::DegenerateStep { level: m, s, stage: String::new() });
        }
        Ok(step)
    }
}

/// A window of unit-step grid points s0, s0+1, ..., s0+count-1.
#[derive(Debug, Clone, Copy)]
pub struct GridWindow {
    s0: Complex64,
    count: usize,
}

impl GridWindow {
    pub fn new(s0: Complex64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Parameter("grid window needs count >= 1".into()));
        }
        Ok(Self { s0, count })
    }

    pub fn start(&self) -> Complex64 {
        self.s0
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.count).map(move |j| self.s0 + Complex64::new(j as f64, 0.0))
    }
}

/// Forward divided difference (f(s+1) - f(s)) / (x_k(s+1) - x_k(s)).
pub fn delta_div<F>(f: F, lat: &Lattice, k: f64, s: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let step = lat.delta_x(k, s)?;
    Ok((f(s + Complex64::ONE)? - f(s)?) / step)
}

/// Backward divided difference (f(s) - f(s-1)) / (x_k(s) - x_k(s-1)).
pub fn nabla_div<F>(f: F, lat: &Lattice, k: f64, s: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let step = lat.nabla_x(k, s)?;
    Ok((f(s)? - f(s - Complex64::ONE)?) / step)
}

/// The m-fold forward chain (Delta/Delta x_{m-1}) ... (Delta/Delta x_1)(Delta/Delta x_0).
///
/// Evaluated as a triangular table over the stencil s, ..., s+m. Applied to a
/// polynomial of degree d < m in x(s) the result vanishes identically.
pub fn delta_chain<F>(f: F, lat: &Lattice, m: usize, s: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if m == 0 {
        return f(s);
    }
    let mut row: Vec<Complex64> = Vec::with_capacity(m + 1);
    for j in 0..=m {
        row.push(f(s + Complex64::new(j as f64, 0.0))?);
    }
    for stage in 1..=m {
        let level = (stage - 1) as f64;
        let mut next = Vec::with_capacity(row.len() - 1);
        for j in 0..row.len() - 1 {
            let sj = s + Complex64::new(j as f64, 0.0);
            let step = lat.delta_x(level, sj).map_err(|e| annotate_stage(e, stage))?;
            next.push((row[j + 1] - row[j]) / step);
        }
        row = next;
    }
    Ok(row[0])
}

/// The backward chain (Nabla/Nabla x_{k+1}) ... (Nabla/Nabla x_n), of length n - k.
///
/// The innermost factor acts on lattice x_n, the outermost on x_{k+1}.
pub fn nabla_chain<F>(f: F, lat: &Lattice, n: usize, k: usize, s: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if k >= n {
        return Err(Error::Parameter(format!("nabla_chain needs k < n, got n = {n}, k = {k}")));
    }
    let len = n - k;
    let mut row: Vec<Complex64> = Vec::with_capacity(len + 1);
    for j in 0..=len {
        row.push(f(s - Complex64::new(j as f64, 0.0))?);
    }
    for stage in 1..=len {
        // stage i applies Nabla/Nabla x_{n-i+1}
        let level = (n - stage + 1) as f64;
        let mut next = Vec::with_capacity(row.len() - 1);
        for j in 0..row.len() - 1 {
            let sj = s - Complex64::new(j as f64, 0.0);
            let step = lat.nabla_x(level, sj).map_err(|e| annotate_stage(e, stage))?;
            next.push((row[j] - row[j + 1]) / step);
        }
        row = next;
    }
    Ok(row[0])
}

/// Forward arithmetic mean (f(s+1) + f(s)) / 2.
pub fn mean_op<F>(f: F, s: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    Ok((f(s + Complex64::ONE)? + f(s)?) / 2.0)
}

fn annotate_stage(e: Error, stage: usize) -> Error {
    match e {
        Error::DegenerateStep { level, s, .. } => {
            Error::DegenerateStep { level, s, stage: format!(" (chain stage {stage})") }
        }
        other => other,
    }
}

/// Relative residual |a - b| / max(1, |a|, |b|).
pub fn rel_residual(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / 1.0f64.max(a.norm()).max(b.norm())
}
