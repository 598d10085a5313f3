//! The concrete q-classical families.
//!
//! - [`askey_wilson`]: x(s) = (q^s + q^-s)/2, closed-form weight.
//! - [`q_racah`]: x(s) = [s]_q [s+1]_q, finite discrete support, weight built
//!   by the Pearson recurrence.
//! - [`q_meixner`]: x(s) = q^-s.
//! - [`al_salam_carlitz_1`] / [`al_salam_carlitz_2`]: x(s) = q^s, the second
//!   kind delegating to the first with q replaced by 1/q.
//!
//! A [`FamilySpec`] stores the operator pair (sigma, theta) as callbacks and
//! derives tau = (theta - sigma)/nabla x_1 as an interpolated degree-1
//! polynomial in x(s), so the defining consistency is checked at construction
//! rather than assumed per family.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interp::{fit_on_lattice, max_rel_residual, unit_nodes, NewtonPoly};
use crate::lattice::{alpha_q, q_number, Lattice, QParam, ROOT_OF_UNITY_SCREEN};
use crate::poch::{q_pochhammer, q_pochhammer_complex, WEIGHT_PRODUCT_TOL};
use crate::series::{eval_terminating, SeriesSpec};

/// Reference point for the interpolations deriving tau and sigma-hat.
/// Fractional, so lattice steps never degenerate and weight recurrences
/// never touch the zeros of sigma or theta for the default parameter regimes.
const S_REF: f64 = 0.3;

/// Residual allowed when validating the tau / sigma-hat interpolations.
const POLY_VALIDATE_TOL: f64 = 1e-9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Supported family identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    AskeyWilson,
    QRacah,
    QMeixner,
    AlSalamCarlitz1,
    AlSalamCarlitz2,
}

impl FamilyName {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyName::AskeyWilson => "askey-wilson",
            FamilyName::QRacah => "q-racah",
            FamilyName::QMeixner => "q-meixner",
            FamilyName::AlSalamCarlitz1 => "al-salam-carlitz-1",
            FamilyName::AlSalamCarlitz2 => "al-salam-carlitz-2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "askey-wilson" | "aw" => Ok(FamilyName::AskeyWilson),
            "q-racah" | "qracah" => Ok(FamilyName::QRacah),
            "q-meixner" | "qmeixner" => Ok(FamilyName::QMeixner),
            "al-salam-carlitz-1" | "asc1" => Ok(FamilyName::AlSalamCarlitz1),
            "al-salam-carlitz-2" | "asc2" => Ok(FamilyName::AlSalamCarlitz2),
            other => Err(Error::Parameter(format!("unknown family '{other}'"))),
        }
    }
}

/// Orthogonality support of a family.
#[derive(Debug, Clone, Copy)]
pub enum Support {
    /// Points s = a, a+1, ..., b-1 with b - a a positive integer.
    Discrete { a: Complex64, b: Complex64 },
    /// A real interval carrying a continuous weight density.
    Continuous { lo: f64, hi: f64 },
    /// Unbounded discrete chains; no finite orthogonality sum is exposed.
    HalfLine,
}

/// A (first, middle, last) coefficient triple: (alpha_n, beta_n, gamma_n) for
/// the three-term recurrence, (e_n, f_n, g_n) for the structure relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffTriple {
    pub first: Complex64,
    pub middle: Complex64,
    pub last: Complex64,
}

type ScalarFn = Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type SeriesFn = Box<dyn Fn(usize, Complex64) -> Result<Complex64> + Send + Sync>;
type ConstFn = Box<dyn Fn(usize) -> Complex64 + Send + Sync>;

enum WeightModel {
    /// Closed form for every integer iteration level.
    Closed(Box<dyn Fn(i64, Complex64) -> Result<Complex64> + Send + Sync>),
    /// Pearson recurrence rho(s+1) = rho(s) theta(s) / sigma(s+1), normalized
    /// to 1 at the anchor of each unit-step chain.
    Pearson { anchor: Complex64 },
}

/// Which ingredient a falsifiability perturbation rescales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbTarget {
    Sigma,
    Tau,
    Rho,
    Lambda,
}

impl PerturbTarget {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigma" => Ok(PerturbTarget::Sigma),
            "tau" => Ok(PerturbTarget::Tau),
            "rho" => Ok(PerturbTarget::Rho),
            "lambda" => Ok(PerturbTarget::Lambda),
            other => Err(Error::Parameter(format!(
                "unknown perturbation target '{other}' (expected sigma|tau|rho|lambda)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PerturbTarget::Sigma => "sigma",
            PerturbTarget::Tau => "tau",
            PerturbTarget::Rho => "rho",
            PerturbTarget::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Perturbation {
    target: PerturbTarget,
    eps: f64,
}

/// One q-classical family: lattice, operator coefficients, weight, series
/// evaluation, and the Rodrigues normalization constants.
///
/// Immutable after construction; all evaluations are pure.
pub struct FamilySpec {
    name: FamilyName,
    params: BTreeMap<String, Complex64>,
    lattice: Lattice,
    sigma: ScalarFn,
    theta: ScalarFn,
    tau_poly: NewtonPoly,
    sigma_hat_poly: NewtonPoly,
    weight_model: WeightModel,
    support: Support,
    series: SeriesFn,
    b_displayed: Option<ConstFn>,
    /// Anchor for leading-coefficient interpolation nodes, placed outside the
    /// family's oscillation region where the series evaluates cancellation-free.
    leading_anchor: f64,
    perturbation: Option<Perturbation>,
}

impl FamilySpec {
    pub fn name(&self) -> FamilyName {
        self.name
    }

    /// Rescale one ingredient by (1 + eps); the weight target additionally
    /// modulates across the grid so that ratio-based identities break too.
    /// The underlying family construction is untouched, so every other
    /// ingredient keeps its consistent value.
    pub fn with_perturbation(mut self, target: PerturbTarget, eps: f64) -> Self {
        self.perturbation = Some(Perturbation { target, eps });
        self
    }

    pub fn perturbation_label(&self) -> Option<String> {
        self.perturbation.map(|p| format!("{} * (1 + {:.1e})", p.target.as_str(), p.eps))
    }

    pub fn params(&self) -> &BTreeMap<String, Complex64> {
        &self.params
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn q(&self) -> &QParam {
        self.lattice.q()
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// sigma(s): the backward-slot operator coefficient.
    pub fn sigma(&self, s: Complex64) -> Complex64 {
        let v = (self.sigma)(s);
        match self.perturbation {
            Some(Perturbation { target: PerturbTarget::Sigma, eps }) => v * (1.0 + eps),
            _ => v,
        }
    }

    /// theta(s) = sigma(s) + tau(s) nabla x_1(s): the forward-slot coefficient.
    pub fn theta(&self, s: Complex64) -> Complex64 {
        (self.theta)(s)
    }

    /// tau evaluated through its degree-1 interpolation in x(s).
    pub fn tau(&self, s: Complex64) -> Complex64 {
        let v = self.tau_poly.eval(self.lattice.x(s));
        match self.perturbation {
            Some(Perturbation { target: PerturbTarget::Tau, eps }) => v * (1.0 + eps),
            _ => v,
        }
    }

    /// Leading coefficient of tau.
    pub fn tau_prime(&self) -> Complex64 {
        let v = self.tau_poly.leading();
        match self.perturbation {
            Some(Perturbation { target: PerturbTarget::Tau, eps }) => v * (1.0 + eps),
            _ => v,
        }
    }

    /// sigma-hat(x(s)) = sigma(s) + tau(s) nabla x_1(s) / 2 = (sigma + theta)/2.
    pub fn sigma_hat(&self, s: Complex64) -> Complex64 {
        self.sigma_hat_poly.eval(self.lattice.x(s))
    }

    /// Second derivative of sigma-hat (twice its leading coefficient).
    pub fn sigma_hat_second(&self) -> Complex64 {
        self.sigma_hat_poly.leading() * 2.0
    }

    /// The iterated weight rho_k(s); rho_0 = rho.
    ///
    /// Pearson-model weights always walk with the family's own (unperturbed)
    /// sigma and theta: a rho perturbation modulates the finished value, a
    /// sigma perturbation leaves the weight object alone.
    pub fn weight(&self, k: i64, s: Complex64) -> Result<Complex64> {
        let raw = match &self.weight_model {
            WeightModel::Closed(f) => f(k, s)?,
            WeightModel::Pearson { anchor } => self.pearson_weight(*anchor, k, s)?,
        };
        match self.perturbation {
            Some(Perturbation { target: PerturbTarget::Rho, eps }) => {
                Ok(raw * (1.0 + eps * (s.re + 0.7 * k as f64).sin()))
            }
            _ => Ok(raw),
        }
    }

    fn rho0_by_recurrence(&self, anchor: Complex64, s: Complex64) -> Result<Complex64> {
        let steps = (s - anchor).re.round() as i64;
        let mut u = s - cx(steps as f64);
        let mut rho = ONE;
        // boundary zeros of sigma and theta evaluate to exact 0.0 here (they
        // are products of q-numbers with exactly cancelling exponents), so an
        // exact test suffices; non-finite ratios are rejected after the fact
        if steps >= 0 {
            for _ in 0..steps {
                let den = (self.sigma)(u + ONE);
                if den.norm() == 0.0 {
                    return Err(Error::SingularWeight { level: 0, s: u + ONE });
                }
                rho *= (self.theta)(u) / den;
                u += ONE;
            }
        } else {
            for _ in 0..(-steps) {
                let den = (self.theta)(u - ONE);
                if den.norm() == 0.0 {
                    return Err(Error::SingularWeight { level: 0, s: u - ONE });
                }
                rho *= (self.sigma)(u) / den;
                u -= ONE;
            }
        }
        if !rho.re.is_finite() || !rho.im.is_finite() {
            return Err(Error::SingularWeight { level: 0, s });
        }
        Ok(rho)
    }

    fn pearson_weight(&self, anchor: Complex64, k: i64, s: Complex64) -> Result<Complex64> {
        let base = self.rho0_by_recurrence(anchor, s + cx(k as f64))?;
        if k >= 0 {
            let mut acc = base;
            for j in 1..=k {
                acc *= (self.sigma)(s + cx(j as f64));
            }
            Ok(acc)
        } else {
            let mut acc = base;
            for j in 0..(-k) {
                let den = (self.sigma)(s - cx(j as f64));
                if den.norm() < 1e-12 * (1.0 + acc.norm().min(1.0)) {
                    return Err(Error::SingularWeight { level: k, s: s - cx(j as f64) });
                }
                acc /= den;
            }
            Ok(acc)
        }
    }

    /// p_n(x(s)) in the family's own normalization.
    pub fn eval(&self, n: usize, s: Complex64) -> Result<Complex64> {
        (self.series)(n, s)
    }

    /// Eigenvalue lambda_n of the difference equation, with the sign
    /// convention H p_n + lambda_n p_n = 0.
    pub fn eigenvalue(&self, n: usize) -> Complex64 {
        let q = self.q();
        let nn = cx(n as f64);
        let lambda = -q_number(nn, q)
            * (alpha_q(nn - ONE, q) * self.tau_prime()
                + q_number(nn - ONE, q) * self.sigma_hat_second() / 2.0);
        match self.perturbation {
            Some(Perturbation { target: PerturbTarget::Lambda, eps }) => lambda * (1.0 + eps),
            _ => lambda,
        }
    }

    /// Leading coefficient of p_n in x(s), read off by interpolation.
    pub fn leading_coeff(&self, n: usize) -> Result<Complex64> {
        let nodes = unit_nodes(cx(self.leading_anchor), n + 1);
        let poly = fit_on_lattice(|s| self.eval(n, s), &self.lattice, 0.0, &nodes)?;
        Ok(poly.leading())
    }

    /// Leading coefficient of the n-fold Rodrigues operator applied to 1:
    /// the product of the per-stage degree-raising factors
    /// alpha_q(n+m-1) tau' + [n+m-1]_q sigma-hat''/2, m = 0..n-1.
    pub fn rodrigues_leading_product(&self, n: usize) -> Complex64 {
        let q = self.q();
        let mut acc = ONE;
        for m in 0..n {
            let j = cx((n + m) as f64 - 1.0);
            acc *= alpha_q(j, q) * self.tau_prime() + q_number(j, q) * self.sigma_hat_second() / 2.0;
        }
        acc
    }

    /// The Rodrigues constant B_n with p_n = B_n R_n(rho, x)(1).
    ///
    /// Askey-Wilson uses its closed form; the other families derive B_n from
    /// the numeric leading coefficient of p_n and the degree-raising product.
    pub fn b_n(&self, n: usize) -> Result<Complex64> {
        if let Some(disp) = &self.b_displayed {
            return Ok(disp(n));
        }
        let lead = self.leading_coeff(n)?;
        let prod = self.rodrigues_leading_product(n);
        if prod.norm() < 1e-250 {
            return Err(Error::Parameter(format!(
                "degenerate Rodrigues normalization at n = {n}: degree-raising product vanishes"
            )));
        }
        Ok(lead / prod)
    }
}

/// Shared tail of every constructor: derive tau and sigma-hat by
/// interpolation and validate their degrees.
#[allow(clippy::too_many_arguments)]
fn assemble(
    name: FamilyName,
    params: BTreeMap<String, Complex64>,
    lattice: Lattice,
    sigma: ScalarFn,
    theta: ScalarFn,
    weight_model: WeightModel,
    support: Support,
    series: SeriesFn,
    b_displayed: Option<ConstFn>,
    leading_anchor: f64,
) -> Result<FamilySpec> {
    let tau_fn = |s: Complex64| -> Result<Complex64> {
        let step = lattice.nabla_x(1.0, s)?;
        Ok((theta(s) - sigma(s)) / step)
    };
    let fit_nodes = unit_nodes(cx(S_REF), 2);
    let tau_poly = fit_on_lattice(tau_fn, &lattice, 0.0, &fit_nodes)?;
    let validate: Vec<Complex64> =
        [-2.55, -1.35, 2.3, 3.45, 4.6, 5.85].iter().map(|&t| cx(S_REF + t)).collect();
    let r = max_rel_residual(tau_fn, &tau_poly, &lattice, 0.0, &validate)?;
    if r > POLY_VALIDATE_TOL {
        return Err(Error::Inconsistency(format!(
            "(theta - sigma)/nabla x_1 is not a degree-1 polynomial in x(s) for {}: residual {r:.3e}",
            name.as_str()
        )));
    }

    let hat_fn = |s: Complex64| -> Result<Complex64> { Ok((sigma(s) + theta(s)) / 2.0) };
    let hat_nodes = unit_nodes(cx(S_REF), 3);
    let sigma_hat_poly = fit_on_lattice(hat_fn, &lattice, 0.0, &hat_nodes)?;
    let r = max_rel_residual(hat_fn, &sigma_hat_poly, &lattice, 0.0, &validate)?;
    if r > POLY_VALIDATE_TOL {
        return Err(Error::Inconsistency(format!(
            "sigma + tau nabla x_1 / 2 is not a degree-2 polynomial in x(s) for {}: residual {r:.3e}",
            name.as_str()
        )));
    }

    Ok(FamilySpec {
        name,
        params,
        lattice,
        sigma,
        theta,
        tau_poly,
        sigma_hat_poly,
        weight_model,
        support,
        series,
        b_displayed,
        leading_anchor,
        perturbation: None,
    })
}

/// Error unless no value of `labeled` sits on the geometric sequence {q^m}.
fn screen_q_powers(labeled: &[(&str, Complex64)], q: &QParam) -> Result<()> {
    for &(label, v) in labeled {
        for m in -(ROOT_OF_UNITY_SCREEN as i64)..=(ROOT_OF_UNITY_SCREEN as i64) {
            let qm = q.powi(m);
            if (v - qm).norm() < 1e-10 * (1.0 + qm.norm()) {
                return Err(Error::Parameter(format!(
                    "excluded parameter: {label} = {v} coincides with q^{m}"
                )));
            }
        }
    }
    Ok(())
}

/// The Askey-Wilson family on x(s) = (q^s + q^-s)/2.
pub fn askey_wilson(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    q: QParam,
) -> Result<FamilySpec> {
    screen_q_powers(
        &[
            ("a", a),
            ("b", b),
            ("c", c),
            ("d", d),
            ("ab", a * b),
            ("ac", a * c),
            ("ad", a * d),
            ("bc", b * c),
            ("bd", b * d),
            ("cd", c * d),
            ("abcd", a * b * c * d),
        ],
        &q,
    )?;
    let lattice = Lattice::new(cx(0.5), cx(0.5), cx(0.0), q)?;
    let kappa = q.kappa();

    let sigma_at = move |s: Complex64| -> Complex64 {
        let qs = q.pow(s);
        -kappa * kappa
            * q.pow(-2.0 * s + cx(0.5))
            * (qs - a)
            * (qs - b)
            * (qs - c)
            * (qs - d)
    };
    let sigma: ScalarFn = Box::new(sigma_at);
    let theta: ScalarFn = Box::new(move |s| sigma_at(-s));

    // rho_k(s) = (-1)^k kappa^{2k} q^{-2s^2 - 2ks - k^2 + 3k/2}
    //            (a,b,c,d;q)_{s+k} (a,b,c,d;q)_{-s},
    // the sign keeping rho_k = rho_{k-1}(s+1) sigma(s+1) exact for the sigma above.
    let weight = move |k: i64, s: Complex64| -> Result<Complex64> {
        let kf = cx(k as f64);
        let expo = -2.0 * s * s - 2.0 * kf * s - kf * kf + 1.5 * kf;
        let mut acc = q.pow(expo) * kappa.powi(2 * k as i32);
        if k % 2 != 0 {
            acc = -acc;
        }
        for v in [a, b, c, d] {
            acc *= q_pochhammer_complex(v, &q, s + kf, WEIGHT_PRODUCT_TOL)?;
            acc *= q_pochhammer_complex(v, &q, -s, WEIGHT_PRODUCT_TOL)?;
        }
        Ok(acc)
    };

    let series = move |n: usize, s: Complex64| -> Result<Complex64> {
        let ni = n as i64;
        let mut pref = q_pochhammer(a * b, &q, ni)?
            * q_pochhammer(a * c, &q, ni)?
            * q_pochhammer(a * d, &q, ni)?;
        pref /= a.powi(n as i32);
        let qs = q.pow(s);
        let spec = SeriesSpec::terminating(
            n,
            vec![a * b * c * d * q.powi(ni - 1), a * qs, a / qs],
            vec![a * b, a * c, a * d],
            q,
            q.value(),
        )?;
        Ok(pref * eval_terminating(&spec)?)
    };

    // B_n = 2^-n kappa^-n q^{n(3n-5)/4}
    let b_displayed = move |n: usize| -> Complex64 {
        let nf = n as f64;
        q.pow(cx(nf * (3.0 * nf - 5.0) / 4.0)) / (cx(2.0).powi(n as i32) * kappa.powi(n as i32))
    };

    let mut params = BTreeMap::new();
    params.insert("a".into(), a);
    params.insert("b".into(), b);
    params.insert("c".into(), c);
    params.insert("d".into(), d);
    params.insert("q".into(), q.value());

    assemble(
        FamilyName::AskeyWilson,
        params,
        lattice,
        sigma,
        theta,
        WeightModel::Closed(Box::new(weight)),
        Support::Continuous { lo: -1.0, hi: 1.0 },
        Box::new(series),
        Some(Box::new(b_displayed)),
        2.35,
    )
}

/// The q-Racah family on x(s) = [s]_q [s+1]_q with support s = a, ..., b-1.
pub fn q_racah(
    alpha: Complex64,
    beta: Complex64,
    a: Complex64,
    b: Complex64,
    q: QParam,
) -> Result<FamilySpec> {
    let diff = b - a;
    if diff.im.abs() > 1e-9 || (diff.re - diff.re.round()).abs() > 1e-9 || diff.re.round() < 1.0 {
        return Err(Error::Support(format!(
            "q-Racah needs b - a a positive integer, got {diff}"
        )));
    }
    let kappa = q.kappa();
    let k2 = kappa * kappa;
    let half = cx(0.5);
    let lattice = Lattice::new(
        q.pow(half) / k2,
        q.pow(-half) / k2,
        -q_number(cx(2.0), &q) / k2,
        q,
    )?;

    let sigma_at = move |s: Complex64| -> Complex64 {
        q_number(s - a, &q)
            * q_number(s + b, &q)
            * q_number(s + a - beta, &q)
            * q_number(b + alpha - s, &q)
    };
    let sigma: ScalarFn = Box::new(sigma_at);
    let theta: ScalarFn = Box::new(move |s| sigma_at(-s - ONE));

    let series = move |n: usize, s: Complex64| -> Result<Complex64> {
        let ni = n as i64;
        let nf = cx(n as f64);
        let l1 = q.pow(a - b + ONE);
        let l2 = q.pow(beta + ONE);
        let l3 = q.pow(a + b + alpha + ONE);
        let dn = q.pow(-nf / 2.0 * (2.0 * a + alpha + beta + nf + ONE))
            * q_pochhammer(l1, &q, ni)?
            * q_pochhammer(l2, &q, ni)?
            * q_pochhammer(l3, &q, ni)?
            / (kappa.powi(2 * n as i32) * q_pochhammer(q.value(), &q, ni)?);
        let spec = SeriesSpec::terminating(
            n,
            vec![q.pow(alpha + beta + nf + ONE), q.pow(a - s), q.pow(a + s + ONE)],
            vec![l1, l2, l3],
            q,
            q.value(),
        )?;
        Ok(dn * eval_terminating(&spec)?)
    };

    let mut params = BTreeMap::new();
    params.insert("alpha".into(), alpha);
    params.insert("beta".into(), beta);
    params.insert("a".into(), a);
    params.insert("b".into(), b);
    params.insert("q".into(), q.value());

    assemble(
        FamilyName::QRacah,
        params,
        lattice,
        sigma,
        theta,
        WeightModel::Pearson { anchor: a },
        Support::Discrete { a, b },
        Box::new(series),
        None,
        b.re + 0.35,
    )
}

/// The q-Meixner family on the q-linear lattice x(s) = q^-s.
pub fn q_meixner(b: Complex64, c: Complex64, q: QParam) -> Result<FamilySpec> {
    if c.norm() < 1e-12 {
        return Err(Error::Parameter("q-Meixner needs c != 0".into()));
    }
    if (ONE - b * q.value()).norm() < 1e-12 {
        return Err(Error::Parameter("q-Meixner needs bq != 1".into()));
    }
    let lattice = Lattice::new(cx(0.0), cx(1.0), cx(0.0), q)?;

    // The factor (x-1)(x+bc) sits in the backward slot: it vanishes at the
    // support bottom x(0) = 1, and M_n are eigenfunctions only with this
    // orientation on x(s) = q^-s.
    let x_of = move |s: Complex64| q.pow(-s);
    let sigma: ScalarFn = Box::new(move |s| {
        let x = x_of(s);
        (x - ONE) * (x + b * c)
    });
    let theta: ScalarFn = Box::new(move |s| {
        let x = x_of(s);
        c / q.value() * (x - b * q.value())
    });

    let series = move |n: usize, s: Complex64| -> Result<Complex64> {
        let ni = n as i64;
        let x = x_of(s);
        let pref = q_pochhammer(b * q.value(), &q, ni)? * (-c).powi(n as i32)
            / q.pow(cx((n * n) as f64));
        let spec = SeriesSpec::terminating(
            n,
            vec![x],
            vec![b * q.value()],
            q,
            -q.powi(ni + 1) / c,
        )?;
        Ok(pref * eval_terminating(&spec)?)
    };

    let mut params = BTreeMap::new();
    params.insert("b".into(), b);
    params.insert("c".into(), c);
    params.insert("q".into(), q.value());

    assemble(
        FamilyName::QMeixner,
        params,
        lattice,
        sigma,
        theta,
        WeightModel::Pearson { anchor: cx(0.0) },
        Support::HalfLine,
        Box::new(series),
        None,
        0.35,
    )
}

/// The Al-Salam & Carlitz I family on x(s) = q^s.
pub fn al_salam_carlitz_1(a: Complex64, q: QParam) -> Result<FamilySpec> {
    if a.norm() < 1e-12 {
        return Err(Error::Parameter("Al-Salam & Carlitz needs a != 0".into()));
    }
    let lattice = Lattice::new(cx(1.0), cx(0.0), cx(0.0), q)?;

    let x_of = move |s: Complex64| q.pow(s);
    let sigma: ScalarFn = Box::new(move |s| {
        let x = x_of(s);
        (x - ONE) * (x - a)
    });
    let theta: ScalarFn = Box::new(move |_s| a);

    let series = move |n: usize, s: Complex64| -> Result<Complex64> {
        let x = x_of(s);
        let nf = n as f64;
        let pref = (-a).powi(n as i32) * q.pow(cx(nf * (nf - 1.0) / 2.0));
        let spec =
            SeriesSpec::terminating(n, vec![ONE / x], vec![cx(0.0)], q, q.value() * x / a)?;
        Ok(pref * eval_terminating(&spec)?)
    };

    let mut params = BTreeMap::new();
    params.insert("a".into(), a);
    params.insert("q".into(), q.value());

    assemble(
        FamilyName::AlSalamCarlitz1,
        params,
        lattice,
        sigma,
        theta,
        WeightModel::Pearson { anchor: cx(0.0) },
        Support::HalfLine,
        Box::new(series),
        None,
        0.35,
    )
}

/// The Al-Salam & Carlitz II family: V_n(x; q) = U_n(x; 1/q).
pub fn al_salam_carlitz_2(a: Complex64, q: QParam) -> Result<FamilySpec> {
    let qinv = q.inverse()?;
    let mut spec = al_salam_carlitz_1(a, qinv)?;
    spec.name = FamilyName::AlSalamCarlitz2;
    spec.params.insert("q".into(), q.value());
    spec.params.insert("q-internal".into(), qinv.value());
    Ok(spec)
}
