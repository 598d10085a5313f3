//! Closed-form structure-relation coefficients as displayed per family, and
//! their comparison against numerically solved values.
//!
//! The displays are transcribed literally. Where a display references
//! quantities that are only fixed numerically (the recurrence ingredients
//! A_n, C_n of the Askey-Wilson family, the beta_n of q-Racah), those are
//! resolved through recurrence extraction on the spot. Comparisons are
//! reported as notes; agreement is never a pass criterion here because
//! several printed displays are suspected transcription errors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::families::{askey_wilson, q_racah, CoeffTriple, FamilyName, FamilySpec};
use crate::lattice::{q_number, GridWindow};
use crate::verify::checks::extract_ttrr;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Closed-form (e_n, f_n, g_n) as displayed, when the family has a display.
///
/// Returns None when no display exists for the family/degree combination
/// (degree 0 divides by [0]_q in every display).
pub fn closed_coeffs(
    spec: &FamilySpec,
    n: usize,
    grid: &GridWindow,
) -> Option<Result<CoeffTriple>> {
    if n == 0 {
        return None;
    }
    match spec.name() {
        FamilyName::QMeixner => Some(q_meixner_display(spec, n)),
        FamilyName::AlSalamCarlitz1 | FamilyName::AlSalamCarlitz2 => {
            Some(al_salam_carlitz_display(spec, n))
        }
        FamilyName::QRacah => Some(q_racah_display(spec, n, grid)),
        FamilyName::AskeyWilson => Some(askey_wilson_display(spec, n, grid)),
    }
}

fn qn(spec: &FamilySpec, v: Complex64) -> Complex64 {
    q_number(v, spec.q())
}

fn q_meixner_display(spec: &FamilySpec, n: usize) -> Result<CoeffTriple> {
    let q = spec.q();
    let qv = q.value();
    let b = spec.params()["b"];
    let c = spec.params()["c"];
    let nf = cx(n as f64);
    let ni = n as i64;
    let two = qn(spec, cx(2.0));
    let e = ONE - two * qn(spec, nf + ONE) * q.pow(cx(-0.5)) / (2.0 * qn(spec, nf));
    let f = (ONE - qv) / 2.0
        + q.powi(-2 * ni - 1) / 2.0 * (c - c * b * q.powi(ni + 1)) * (2.0 - qv - qv * qv)
        + q.powi(-2 * ni) / 2.0
            * (c + q.powi(ni))
            * (2.0 - qv - qv * qv + q.powi(ni) - q.powi(ni - 1));
    let g = c * q.powi(-4 * ni + 1) * (ONE - b * q.powi(ni)) * (c + q.powi(ni))
        / (2.0 * qn(spec, nf))
        * (2.0 * qn(spec, nf) * (ONE - q.powi(ni))
            - (qv + qv * qv) * qn(spec, nf - ONE) * (ONE - q.powi(ni - 1)));
    Ok(CoeffTriple { first: e, middle: f, last: g })
}

fn al_salam_carlitz_display(spec: &FamilySpec, n: usize) -> Result<CoeffTriple> {
    // the second kind inherits the display with its own internal q = 1/q
    let q = spec.q();
    let qv = q.value();
    let a = spec.params()["a"];
    let nf = cx(n as f64);
    let ni = n as i64;
    let two = qn(spec, cx(2.0));
    let e = ONE - (ONE + qv) * qn(spec, nf + ONE) / (2.0 * qv * qn(spec, nf));
    let f = (ONE + a) * q.powi(ni) * (ONE - two / 2.0 * q.pow(cx(-1.5)));
    let g = a * q.pow(nf - cx(2.5)) / (2.0 * qn(spec, nf))
        * (2.0 * qn(spec, nf) * q.pow(cx(1.5)) * (q.powi(ni) - ONE)
            - two * qn(spec, nf - ONE) * (q.powi(ni - 1) - ONE));
    Ok(CoeffTriple { first: e, middle: f, last: g })
}

fn q_racah_display(spec: &FamilySpec, n: usize, grid: &GridWindow) -> Result<CoeffTriple> {
    let alpha = spec.params()["alpha"];
    let beta = spec.params()["beta"];
    let a = spec.params()["a"];
    let b = spec.params()["b"];
    let q = *spec.q();
    let nf = cx(n as f64);
    let two = qn(spec, cx(2.0));
    let ab = alpha + beta;
    let e = (2.0 * qn(spec, nf + ab + ONE) - two * qn(spec, nf + ab + cx(2.0)))
        / (2.0 * qn(spec, 2.0 * nf + ab + ONE) * qn(spec, 2.0 * nf + ab + cx(2.0)))
        * qn(spec, nf + ONE);
    // f_n needs the recurrence middle coefficient of this family and of the
    // (alpha+1, beta+1, a+1/2, b-1/2) companion
    let beta_here = extract_ttrr(spec, n, grid, 1e-8)?.0.middle;
    let shifted = q_racah(alpha + ONE, beta + ONE, a + cx(0.5), b - cx(0.5), q)?;
    let beta_shifted = extract_ttrr(&shifted, n, grid, 1e-8)?.0.middle;
    let f = beta_here - two / 2.0 * beta_shifted;
    let g = qn(spec, a + b + alpha + nf)
        * qn(spec, a + b - beta - nf)
        * qn(spec, alpha + nf)
        * qn(spec, beta + nf)
        * qn(spec, b - a + alpha + beta + nf)
        * qn(spec, b - a - nf)
        / (2.0 * qn(spec, ab + 2.0 * nf) * qn(spec, ab + 2.0 * nf + ONE) * qn(spec, nf + ab + ONE))
        * (2.0 * qn(spec, nf + ab + ONE) - two * qn(spec, nf + ab));
    Ok(CoeffTriple { first: e, middle: f, last: g })
}

/// The Askey-Wilson display, reading the "[n-2]_q" tokens inside exponents
/// and subscripts as the plain integer n-2; A_m and C_m are resolved from the
/// extracted recurrence as 2 alpha_m and 2 gamma_m.
fn askey_wilson_display(spec: &FamilySpec, n: usize, grid: &GridWindow) -> Result<CoeffTriple> {
    if n < 2 {
        return Err(Error::Parameter(
            "the displayed Askey-Wilson f_n, g_n reference indices n-2; defined for n >= 2".into(),
        ));
    }
    let a = spec.params()["a"];
    let b = spec.params()["b"];
    let c = spec.params()["c"];
    let d = spec.params()["d"];
    let q = *spec.q();
    let qv = q.value();
    let abcd = a * b * c * d;
    let nf = cx(n as f64);
    let ni = n as i64;
    let two = qn(spec, cx(2.0));

    let e = (2.0 * qn(spec, nf) * (ONE - abcd * q.powi(ni - 1)).powi(2)
        - two * qn(spec, nf + ONE) * (ONE - abcd * q.powi(ni)).powi(2))
        / (4.0
            * qn(spec, nf)
            * (ONE - abcd * q.powi(ni - 1))
            * (ONE - abcd * q.powi(2 * ni - 1))
            * (ONE - abcd * q.powi(2 * ni)));

    let rt = q.pow(cx(0.5));
    let shifted = askey_wilson(a * rt, b * rt, c * rt, d * rt, q)?;
    let ac_here = |m: usize| -> Result<(Complex64, Complex64)> {
        let t = extract_ttrr(spec, m, grid, 1e-8)?.0;
        Ok((2.0 * t.first, 2.0 * t.last))
    };
    let ac_shifted = |m: usize| -> Result<(Complex64, Complex64)> {
        let t = extract_ttrr(&shifted, m, grid, 1e-8)?.0;
        Ok((2.0 * t.first, 2.0 * t.last))
    };

    let (a_n, c_n) = ac_here(n)?;
    let (a_nm1, _) = ac_here(n - 1)?;
    let (a_nm1_sh, c_nm1_sh) = ac_shifted(n - 1)?;
    let (a_nm2_sh, _) = ac_shifted(n - 2)?;

    let f = (ONE - qv) / 4.0 * (a - ONE / (a * qv))
        - 0.5 * (a_n + c_n - two / 2.0 * (a_nm1_sh + c_nm1_sh));

    let g = (ONE - abcd * q.powi(ni - 2))
        * (ONE - abcd * q.powi(2 * ni - 2))
        * (ONE - abcd * q.powi(2 * ni - 1))
        / (4.0 * qn(spec, nf) * (ONE - abcd * q.powi(ni - 1)).powi(2))
        * (2.0 * qn(spec, nf) * (a_nm1 * c_n) / (ONE - abcd * q.powi(ni - 2)).powi(2)
            - two * qn(spec, nf - ONE) * (a_nm2_sh * c_nm1_sh)
                / (ONE - abcd * q.powi(ni - 1)).powi(2));

    Ok(CoeffTriple { first: e, middle: f, last: g })
}

/// Compare a solved triple against the family's closed display; the returned
/// notes record per-slot relative deviations with matched/flagged verdicts.
pub fn compare_with_display(
    spec: &FamilySpec,
    n: usize,
    solved: &CoeffTriple,
    grid: &GridWindow,
    match_tol: f64,
) -> Vec<String> {
    let mut notes = Vec::new();
    match closed_coeffs(spec, n, grid) {
        None => notes.push("no closed-form display for this degree".into()),
        Some(Err(e)) => notes.push(format!("closed-form display unavailable: {e}")),
        Some(Ok(display)) => {
            for (label, got, disp) in [
                ("e", solved.first, display.first),
                ("f", solved.middle, display.middle),
                ("g", solved.last, display.last),
            ] {
                if n < 2 && label == "g" {
                    continue;
                }
                if n < 1 && label == "f" {
                    continue;
                }
                let rel = (got - disp).norm() / 1.0f64.max(got.norm()).max(disp.norm());
                if rel < match_tol {
                    notes.push(format!("display {label}_{n} matches: rel {rel:.2e}"));
                } else {
                    notes.push(format!(
                        "display {label}_{n} DISAGREES (suspected transcription error): solved {got}, displayed {disp}, rel {rel:.2e}"
                    ));
                }
            }
        }
    }
    notes
}
