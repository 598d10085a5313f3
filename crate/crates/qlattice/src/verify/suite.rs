//! Suite configuration and the deterministic check runner.
//!
//! A suite is described by a TOML file: a seed, degree cap, default grid,
//! optional tolerance overrides, and a list of family blocks. Running the
//! suite executes every applicable check per family; individual failures and
//! errors are recorded per report and never abort the run.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::families::{
    al_salam_carlitz_1, al_salam_carlitz_2, askey_wilson, q_meixner, q_racah, FamilyName,
    FamilySpec, PerturbTarget, Support,
};
use crate::lattice::{GridWindow, QParam};
use crate::report::{sort_reports, CheckReport};
use crate::verify::{checks, orth, structure, tol};

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Degree cap the double-precision envelope is documented for.
pub const N_MAX_LIMIT: usize = 12;

/// Fewest grid points that leave ten held-out samples for a 3-way solve.
pub const MIN_GRID_COUNT: usize = 13;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub families: Vec<FamilyConfig>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

fn default_n_max() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub s0: f64,
    #[serde(default)]
    pub s0_im: f64,
    pub count: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { s0: 0.3, s0_im: 0.0, count: 20 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub pearson: Option<f64>,
    pub sode: Option<f64>,
    pub ttrr: Option<f64>,
    pub structure: Option<f64>,
    pub derivative: Option<f64>,
    pub rodrigues_representation: Option<f64>,
    pub rodrigues_ratio: Option<f64>,
    pub orthogonality: Option<f64>,
    pub quadrature: Option<f64>,
    pub identities: Option<f64>,
}

impl Tolerances {
    pub fn pearson(&self) -> f64 {
        self.pearson.unwrap_or(tol::PEARSON)
    }
    pub fn sode(&self) -> f64 {
        self.sode.unwrap_or(tol::SODE)
    }
    pub fn ttrr(&self) -> f64 {
        self.ttrr.unwrap_or(tol::TTRR)
    }
    pub fn structure(&self) -> f64 {
        self.structure.unwrap_or(tol::STRUCTURE)
    }
    pub fn derivative(&self) -> f64 {
        self.derivative.unwrap_or(tol::DERIVATIVE)
    }
    pub fn rodrigues_representation(&self) -> f64 {
        self.rodrigues_representation.unwrap_or(tol::RODRIGUES_REPRESENTATION)
    }
    pub fn rodrigues_ratio(&self) -> f64 {
        self.rodrigues_ratio.unwrap_or(tol::RODRIGUES_RATIO)
    }
    pub fn orthogonality(&self) -> f64 {
        self.orthogonality.unwrap_or(tol::ORTHOGONALITY)
    }
    pub fn quadrature(&self) -> f64 {
        self.quadrature.unwrap_or(tol::QUADRATURE)
    }
    pub fn identities(&self) -> f64 {
        self.identities.unwrap_or(tol::IDENTITIES)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    pub q: f64,
    pub params: std::collections::BTreeMap<String, f64>,
    #[serde(default)]
    pub perturb: Option<PerturbConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbConfig {
    pub target: String,
    pub eps: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: String,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "json".into()
}

/// Parse and validate a TOML suite configuration.
pub fn parse_config(text: &str) -> Result<SuiteConfig> {
    let cfg: SuiteConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
    if cfg.n_max > N_MAX_LIMIT {
        return Err(Error::Config(format!(
            "n_max = {} exceeds the documented precision envelope ({N_MAX_LIMIT})",
            cfg.n_max
        )));
    }
    if cfg.grid.count < MIN_GRID_COUNT {
        return Err(Error::Config(format!(
            "grid count {} leaves too few held-out points (need >= {MIN_GRID_COUNT})",
            cfg.grid.count
        )));
    }
    if let Some(out) = &cfg.output {
        if out.format != "json" {
            return Err(Error::Config(format!(
                "unsupported report format '{}', only json",
                out.format
            )));
        }
    }
    for fc in &cfg.families {
        FamilyName::parse(&fc.name)?;
        if let Some(p) = &fc.perturb {
            PerturbTarget::parse(&p.target)?;
        }
    }
    Ok(cfg)
}

/// Build the family a config block describes, perturbation applied.
pub fn build_family(fc: &FamilyConfig) -> Result<FamilySpec> {
    let q = QParam::new(fc.q)?;
    let get = |key: &str| -> Result<Complex64> {
        fc.params
            .get(key)
            .map(|&v| cx(v))
            .ok_or_else(|| Error::Config(format!("family '{}' needs parameter '{key}'", fc.name)))
    };
    let spec = match FamilyName::parse(&fc.name)? {
        FamilyName::AskeyWilson => askey_wilson(get("a")?, get("b")?, get("c")?, get("d")?, q)?,
        FamilyName::QRacah => q_racah(get("alpha")?, get("beta")?, get("a")?, get("b")?, q)?,
        FamilyName::QMeixner => q_meixner(get("b")?, get("c")?, q)?,
        FamilyName::AlSalamCarlitz1 => al_salam_carlitz_1(get("a")?, q)?,
        FamilyName::AlSalamCarlitz2 => al_salam_carlitz_2(get("a")?, q)?,
    };
    match &fc.perturb {
        Some(p) => Ok(spec.with_perturbation(PerturbTarget::parse(&p.target)?, p.eps)),
        None => Ok(spec),
    }
}

fn fnv1a(text: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn rng_for(seed: u64, family_index: usize, check: &str) -> ChaCha8Rng {
    let mixed = seed ^ fnv1a(check) ^ (family_index as u64).wrapping_mul(0x9e3779b97f4a7c15);
    ChaCha8Rng::seed_from_u64(mixed)
}

fn support_len(spec: &FamilySpec) -> Option<usize> {
    match spec.support() {
        Support::Discrete { a, b } => Some((b - a).re.round() as usize),
        _ => None,
    }
}

/// Number of random trials per identity check inside a suite run.
const SUITE_IDENTITY_TRIALS: usize = 25;

/// Run every applicable check for every configured family.
///
/// Deterministic for a fixed config (the seed drives every random draw);
/// reports come back sorted by (check id, family, n, m).
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut reports: Vec<CheckReport> = Vec::new();
    for (idx, fc) in cfg.families.iter().enumerate() {
        match build_family(fc) {
            Ok(spec) => run_family(cfg, idx, fc, &spec, &mut reports),
            Err(e) => reports.push(CheckReport::errored(
                "family-construction",
                fc.name.clone(),
                Default::default(),
                1.0,
                e.to_string(),
            )),
        }
    }
    sort_reports(&mut reports);
    reports
}

fn run_family(
    cfg: &SuiteConfig,
    idx: usize,
    fc: &FamilyConfig,
    spec: &FamilySpec,
    reports: &mut Vec<CheckReport>,
) {
    let t = &cfg.tolerances;
    let count = cfg.grid.count;
    // per-family window shifts keep the solve grids where the series evaluate
    // at full precision: Askey-Wilson cancels heavily for x near 1 (small s),
    // the decaying Al-Salam & Carlitz chain crowds together for large s
    let shift = match spec.name() {
        FamilyName::AskeyWilson => 4.0,
        FamilyName::AlSalamCarlitz1 => -13.0,
        _ => 0.0,
    };
    let base_grid = GridWindow::new(Complex64::new(cfg.grid.s0 + shift, cfg.grid.s0_im), count)
        .expect("validated count");
    // operator-grade checks keep every stencil point outside the family's
    // oscillation region and away from the crowded lattice end, where series
    // values would be dominated by their low-order terms
    let op_s0 = match (spec.name(), spec.support()) {
        (FamilyName::QRacah, Support::Discrete { b, .. }) => b.re + 2.45,
        (FamilyName::AlSalamCarlitz1, _) => -9.55,
        (FamilyName::QMeixner, _) | (FamilyName::AlSalamCarlitz2, _) => 1.45,
        _ => -2.55,
    };
    let op_grid = GridWindow::new(cx(op_s0), 10).expect("static");
    let ratio_grid = GridWindow::new(cx(op_s0), 8).expect("static");
    let len = support_len(spec);
    let cap = |n: usize| match len {
        Some(l) => n.min(l.saturating_sub(2)),
        None => n,
    };
    let perturb_note = spec.perturbation_label();
    let mut push = |mut r: CheckReport| {
        if let Some(p) = &perturb_note {
            r.push_note(format!("perturbed: {p}"));
        }
        reports.push(r);
    };

    // Pearson on a family-appropriate window
    let pearson_grid = match spec.support() {
        Support::Discrete { a, b } => {
            let l = (b - a).re.round() as usize;
            GridWindow::new(a, (l.saturating_sub(1)).max(1)).expect("support len")
        }
        Support::Continuous { .. } => {
            GridWindow::new(cx(-(count as f64 - 1.0) / 2.0 - 0.2), count).expect("count")
        }
        Support::HalfLine => base_grid,
    };
    push(checks::check_pearson(spec, &pearson_grid, t.pearson()));

    for n in 0..=cap(cfg.n_max) {
        push(checks::check_sode(spec, n, &base_grid, t.sode()));
    }
    for n in 0..=cap(cfg.n_max.min(8)) {
        push(checks::check_ttrr(spec, n, &base_grid, t.ttrr()));
    }
    for n in 0..=cap(6) {
        let mut r = checks::check_structure_relation(spec, n, &base_grid, t.structure());
        if r.max_residual < crate::report::ERROR_RESIDUAL {
            if let Ok((solved, _)) = checks::solve_structure_relation(spec, n, &base_grid, t.structure()) {
                for note in structure::compare_with_display(
                    spec,
                    n,
                    &solved,
                    &base_grid,
                    tol::DISPLAY_MATCH,
                ) {
                    r.push_note(note);
                }
            }
        }
        push(r);
    }
    for n in 1..=cap(6) {
        push(checks::check_derivative_structure(spec, n, &base_grid, t.derivative()));
    }

    let rep_max = match spec.name() {
        FamilyName::AskeyWilson | FamilyName::QRacah => 5,
        _ => 6,
    };
    for n in 0..=cap(rep_max) {
        push(representation_report(spec, n, &op_grid, t.rodrigues_representation()));
    }
    for n in 0..=cap(5) {
        for k in 0..=n {
            match crate::rodrigues::delta_k_rodrigues_check(spec, n, k, &ratio_grid, t.rodrigues_ratio()) {
                Ok(r) => push(r),
                Err(e) => push(
                    CheckReport::errored(
                        "rodrigues-ratio",
                        spec.name().as_str(),
                        crate::verify::params_of(spec),
                        t.rodrigues_ratio(),
                        e.to_string(),
                    )
                    .with_n(n as i64)
                    .with_m(k as i64),
                ),
            }
        }
    }

    // identity micro-suite
    let mut rng = rng_for(cfg.seed, idx, "product-rule");
    push(checks::check_product_rule(spec, &base_grid, &mut rng, SUITE_IDENTITY_TRIALS, t.identities()));
    let mut rng = rng_for(cfg.seed, idx, "mean-product-identity");
    push(checks::check_mean_product_identity(spec, &base_grid, &mut rng, SUITE_IDENTITY_TRIALS, t.identities()));
    let mut rng = rng_for(cfg.seed, idx, "pair-sum-polynomiality");
    push(checks::check_pair_sum_polynomiality(spec, &base_grid, &mut rng, SUITE_IDENTITY_TRIALS, t.identities()));
    push(checks::check_x_product_mean(spec, &op_grid, t.identities()));
    {
        let mut rng = rng_for(cfg.seed, idx, "summation-by-parts");
        let lat = *spec.lattice();
        let (_, f) = checks::random_poly(&mut rng, lat, 3);
        let (_, g) = checks::random_poly(&mut rng, lat, 3);
        let mut r = checks::check_summation_by_parts(f, g, 0, 10, spec.name().as_str(), t.identities());
        r.params = crate::verify::params_of(spec);
        push(r);
    }

    if let Some(l) = len {
        let nmax = cap(5).min(l.saturating_sub(3));
        match orth::check_orthogonality_discrete(spec, nmax, t.orthogonality()) {
            Ok((_, r)) => push(r),
            Err(e) => push(CheckReport::errored(
                "orthogonality-discrete",
                spec.name().as_str(),
                crate::verify::params_of(spec),
                t.orthogonality(),
                e.to_string(),
            )),
        }
        let nmax = cap(4).min(l.saturating_sub(4));
        match orth::check_orthogonality_derived(spec, nmax, t.orthogonality()) {
            Ok((_, r)) => push(r),
            Err(e) => push(CheckReport::errored(
                "orthogonality-derived",
                spec.name().as_str(),
                crate::verify::params_of(spec),
                t.orthogonality(),
                e.to_string(),
            )),
        }
    }
    if spec.name() == FamilyName::AskeyWilson && fc.perturb.is_none() {
        match orth::check_orthogonality_continuous_aw(
            spec,
            4,
            orth::QuadConfig::default(),
            t.quadrature(),
        ) {
            Ok((_, r)) => push(r),
            Err(e) => push(CheckReport::errored(
                "orthogonality-continuous",
                spec.name().as_str(),
                crate::verify::params_of(spec),
                t.quadrature(),
                e.to_string(),
            )),
        }
    }
}

fn representation_report(
    spec: &FamilySpec,
    n: usize,
    grid: &GridWindow,
    tolerance: f64,
) -> CheckReport {
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let mut used = 0usize;
    for s in grid.points() {
        match (crate::rodrigues::rodrigues_poly(spec, n, s), spec.eval(n, s)) {
            (Ok(rod), Ok(ser)) => {
                worst = worst.max(crate::lattice::rel_residual(rod, ser));
                used += 1;
            }
            (Err(e), _) | (_, Err(e)) => notes.push(format!("skipped s = {s}: {e}")),
        }
    }
    let mut report = if used == 0 {
        CheckReport::errored(
            "rodrigues-representation",
            spec.name().as_str(),
            crate::verify::params_of(spec),
            tolerance,
            "no usable grid point",
        )
    } else {
        CheckReport::new(
            "rodrigues-representation",
            spec.name().as_str(),
            crate::verify::params_of(spec),
            worst,
            tolerance,
        )
    };
    report = report.with_n(n as i64).with_note(format!("{used} sample points"));
    report.notes.extend(notes);
    report
}

/// Serialize reports as a pretty JSON array with a trailing newline.
pub fn reports_to_json(reports: &[CheckReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_empty_reports() {
        let cfg = parse_config("seed = 1\n").unwrap();
        assert!(run_suite(&cfg).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(parse_config("").is_err()); // missing seed
        assert!(parse_config("seed = 1\nn_max = 20\n").is_err());
        assert!(parse_config("seed = 1\n[grid]\ns0 = 0.3\ncount = 5\n").is_err());
        assert!(parse_config("seed = 1\nunknown_key = 2\n").is_err());
        let cfg = parse_config(
            "seed = 7\n[[families]]\nname = \"al-salam-carlitz-1\"\nq = 0.5\n[families.params]\na = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.families.len(), 1);
        assert!(build_family(&cfg.families[0]).is_ok());
    }

    #[test]
    fn seeded_runs_are_byte_identical() {
        let text = "seed = 11\nn_max = 4\n[[families]]\nname = \"al-salam-carlitz-1\"\nq = 0.5\n[families.params]\na = 0.5\n";
        let cfg = parse_config(text).unwrap();
        let a = reports_to_json(&run_suite(&cfg));
        let b = reports_to_json(&run_suite(&cfg));
        assert_eq!(a, b);
    }
}
