//! The iterated Rodrigues-type operator and the Rodrigues representation of
//! the family polynomials.
//!
//! R_0(rho_m, x_m) is the identity; R_1(rho_m, x_m) f = (1/rho_m) *
//! Nabla[rho_{m+1} f] / Nabla x_{m+1}; higher orders compose with the weight
//! level advancing by one per factor. Applying R_n(rho, x) to 1 and scaling by
//! B_n reproduces p_n.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::lattice::{delta_chain, delta_div, nabla_chain, GridWindow};
use crate::report::{CheckReport, CxPair};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Placement of an iterated Rodrigues operator: weight level `m`, order `k`.
#[derive(Clone, Copy)]
pub struct RodriguesContext<'a> {
    pub spec: &'a FamilySpec,
    pub m: i64,
    pub k: usize,
}

/// Evaluate R_k(rho_m, x_m)(f) at s by a triangular backward-difference table.
///
/// Cost is O(k^2) stencil evaluations; weight values are cached per
/// (level, offset) within the call.
pub fn rodrigues_apply<F>(ctx: RodriguesContext<'_>, f: F, s: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let spec = ctx.spec;
    let lat = spec.lattice();
    let k = ctx.k;
    if k == 0 {
        return f(s);
    }
    let mut cache: HashMap<(i64, i64), Complex64> = HashMap::new();
    let mut rho = |level: i64, off: i64| -> Result<Complex64> {
        if let Some(v) = cache.get(&(level, off)) {
            return Ok(*v);
        }
        let v = spec.weight(level, s - cx(off as f64))?;
        cache.insert((level, off), v);
        Ok(v)
    };

    let mut row: Vec<Complex64> = Vec::with_capacity(k + 1);
    for j in 0..=k {
        row.push(f(s - cx(j as f64))?);
    }
    for stage in 1..=k {
        let out_level = ctx.m + (k - stage) as i64;
        let in_level = out_level + 1;
        let mut next = Vec::with_capacity(row.len() - 1);
        for j in 0..row.len() - 1 {
            let t = s - cx(j as f64);
            let w_out = rho(out_level, j as i64)?;
            if w_out.norm() < 1e-280 {
                return Err(Error::SingularWeight { level: out_level, s: t });
            }
            let w_in0 = rho(in_level, j as i64)?;
            let w_in1 = rho(in_level, j as i64 + 1)?;
            let step = lat.nabla_x(in_level as f64, t)?;
            next.push((w_in0 * row[j] - w_in1 * row[j + 1]) / (w_out * step));
        }
        row = next;
    }
    Ok(row[0])
}

/// p_n(x(s)) through the Rodrigues representation B_n R_n(rho, x)(1).
///
/// Also evaluates the flattened form (B_n / rho(s)) Nabla-chain(rho_n) and
/// errors if the two disagree beyond 1e-10 relative.
pub fn rodrigues_poly(spec: &FamilySpec, n: usize, s: Complex64) -> Result<Complex64> {
    let b_n = spec.b_n(n)?;
    let ctx = RodriguesContext { spec, m: 0, k: n };
    let nested = b_n * rodrigues_apply(ctx, |_| Ok(ONE), s)?;
    if n == 0 {
        return Ok(nested);
    }
    let rho0 = spec.weight(0, s)?;
    if rho0.norm() < 1e-280 {
        return Err(Error::SingularWeight { level: 0, s });
    }
    let flattened = b_n / rho0
        * nabla_chain(|t| spec.weight(n as i64, t), spec.lattice(), n, 0, s)?;
    let dev = (nested - flattened).norm() / 1.0f64.max(nested.norm()).max(flattened.norm());
    if dev > 1e-10 {
        return Err(Error::Inconsistency(format!(
            "nested and flattened Rodrigues forms disagree at n = {n}, s = {s}: {nested} vs {flattened} (rel {dev:.3e})"
        )));
    }
    Ok(nested)
}

/// Ratio test: Delta^(k) p_n against R_{n-k}(rho_k, x_k)(1) across a grid.
///
/// Passes when the pointwise ratio is constant; the constant is reported in
/// the notes. Grid points where the denominator vanishes (or a weight is
/// singular) are skipped with a note; no usable point is an error.
pub fn delta_k_rodrigues_check(
    spec: &FamilySpec,
    n: usize,
    k: usize,
    grid: &GridWindow,
    tolerance: f64,
) -> Result<CheckReport> {
    if k > n {
        return Err(Error::Parameter(format!("need 0 <= k <= n, got n = {n}, k = {k}")));
    }
    let lat = spec.lattice();
    let mut ratios: Vec<Complex64> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    for s in grid.points() {
        let num = if k == 0 {
            spec.eval(n, s)?
        } else {
            delta_chain(|t| spec.eval(n, t), lat, k, s)?
        };
        let ctx = RodriguesContext { spec, m: k as i64, k: n - k };
        let den = match rodrigues_apply(ctx, |_| Ok(ONE), s) {
            Ok(v) => v,
            Err(Error::SingularWeight { level, s }) => {
                notes.push(format!("skipped s = {s}: singular weight rho_{level}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        if den.norm() < 1e-12 * 1.0f64.max(num.norm()) {
            notes.push(format!("skipped s = {s}: vanishing denominator"));
            continue;
        }
        ratios.push(num / den);
    }
    if ratios.is_empty() {
        return Err(Error::Inconclusive(
            "rodrigues ratio check: no usable grid point".into(),
        ));
    }
    let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let max_dev = ratios
        .iter()
        .map(|r| (r - mean).norm() / 1.0f64.max(mean.norm()))
        .fold(0.0f64, f64::max);
    let params: std::collections::BTreeMap<String, CxPair> =
        spec.params().iter().map(|(k, &v)| (k.clone(), CxPair::from(v))).collect();
    let mut report = CheckReport::new(
        "rodrigues-ratio",
        spec.name().as_str(),
        params,
        max_dev,
        tolerance,
    )
    .with_n(n as i64)
    .with_m(k as i64)
    .with_note(format!("C(n,k) = {mean} over {} points", ratios.len()));
    for note in notes {
        report.push_note(note);
    }
    Ok(report)
}

/// The hypergeometric difference operator in its theta/sigma split:
/// H f(s) = [theta(s) Delta f / Delta x - sigma(s) Nabla f / Nabla x] / Nabla x_1.
pub fn hyperop_apply<F>(spec: &FamilySpec, f: F, s: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64> + Copy,
{
    let lat = spec.lattice();
    let fwd = delta_div(f, lat, 0.0, s)?;
    let bwd = crate::lattice::nabla_div(f, lat, 0.0, s)?;
    let step1 = lat.nabla_x(1.0, s)?;
    Ok((spec.theta(s) * fwd - spec.sigma(s) * bwd) / step1)
}
