//! Verification campaigns: ordered inequality chains with error bars.
//!
//! A strict inequality passes when its margin exceeds `margin_ratio` times
//! the combined error estimate. An equality passes when the difference stays
//! below the combined estimate. Every reported number is a pure function of
//! the config, so repeated runs agree bit for bit except for timings.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aux1d::{kappa1, kappa1_direct, truncation_study, AuxProblem, Weight, DEFAULT_NODES, ROUTE_TOL as AUX_ROUTE_TOL};
use crate::disk::{lambda_disk_with, RegimePolicy};
use crate::exterior::{trial_quotient_exterior, TrialNode};
use crate::geometry::{build_domain, Domain, DomainSpec, Family};
use crate::meshing::{triangulate, Mesh};
use crate::steklov2d::{lambda_robin_root, assemble_forms, solve_on_mesh, Gauge, LevelResult, SpectralRoute};
use crate::torsion::{level_statistics, weight_function, ScalarField, WeightTable, DEFAULT_LEVELS, DEFAULT_TOL_MESH};
use crate::{Error, Result};

pub const SCHEMA: u32 = 1;
/// Lower end of the computed `b⋆` bracket at `R = 1`, used as the override ceiling.
pub const B_STAR_ESTIMATE: f64 = 3.0;
/// Weight tolerance on the next-to-finest level.
pub const COARSE_TOL_MESH: f64 = 0.05;
pub const TRUNCATION_LEVELS: [usize; 6] = [1, 2, 3, 4, 6, 8];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub route: f64,
    pub margin_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { route: 1e-6, margin_ratio: 3.0 }
    }
}

fn default_h() -> f64 {
    0.1
}

fn default_refinements() -> usize {
    2
}

fn default_aux_nodes() -> usize {
    DEFAULT_NODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundedCampaign {
    pub domain: DomainSpec,
    pub b: Vec<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_refinements")]
    pub refinements: usize,
    #[serde(default = "default_aux_nodes")]
    pub aux_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorCampaign {
    pub domain: DomainSpec,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub schema: u32,
    #[serde(default)]
    pub bounded: Vec<BoundedCampaign>,
    #[serde(default)]
    pub exterior: Vec<ExteriorCampaign>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub override_regime: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Options shared by the single-item verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOptions {
    pub tolerances: Tolerances,
    pub override_regime: bool,
}

impl VerifyOptions {
    fn policy(&self) -> RegimePolicy {
        if self.override_regime {
            RegimePolicy::Override
        } else {
            RegimePolicy::Enforce
        }
    }
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: CampaignConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn options(&self) -> VerifyOptions {
        VerifyOptions { tolerances: self.tolerances, override_regime: self.override_regime }
    }

    /// Schema, tolerances and regime guards for every `(domain, b)` pair.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported schema {} (expected {SCHEMA})", self.schema)));
        }
        let t = self.tolerances;
        if !(t.route > 0.0 && t.margin_ratio > 0.0) {
            return Err(Error::Config(format!("tolerances must be positive: {t:?}")));
        }
        for c in &self.bounded {
            if !(c.h > 0.0) || c.aux_nodes < 8 {
                return Err(Error::Config(format!("invalid mesh or grid size in {:?}", c.domain)));
            }
            let d = build_domain(&c.domain)?;
            for &b in &c.b {
                bounded_guard(&d, b, self.override_regime)?;
            }
        }
        for c in &self.exterior {
            let d = build_domain(&c.domain)?;
            for &b in &c.b {
                exterior_guard(&d, b, self.override_regime)?;
            }
        }
        Ok(())
    }
}

fn check_b(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("b must be positive and finite, got {b}")))
    }
}

/// `b|Ω| < π`, or `b|Ω| < π·b⋆` under override.
pub fn bounded_guard(d: &Domain, b: f64, override_regime: bool) -> Result<()> {
    check_b(b)?;
    let s = b * d.metrics().area / PI;
    let limit = if override_regime { B_STAR_ESTIMATE } else { 1.0 };
    if s < limit {
        Ok(())
    } else {
        Err(Error::RegimeViolation(format!("{}: b|Ω|/π = {s} is not below {limit}", d.label())))
    }
}

/// `b·|∂Ω|² < 4π²` unless overridden.
pub fn exterior_guard(d: &Domain, b: f64, override_regime: bool) -> Result<()> {
    check_b(b)?;
    let l = d.metrics().perimeter;
    let s = b * l * l / (4.0 * PI * PI);
    if override_regime || s < 1.0 {
        Ok(())
    } else {
        Err(Error::RegimeViolation(format!("{}: b|∂Ω|²/4π² = {s} is not below 1", d.label())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Strict,
    NonStrict,
    Equality,
}

/// A chain member with its error bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub name: String,
    pub value: f64,
    pub error: f64,
}

/// `lower (relation) upper` with `margin = upper − lower`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub relation: Relation,
    pub lower: f64,
    pub upper: f64,
    pub margin: f64,
    pub error: f64,
    pub pass: bool,
}

impl Comparison {
    fn new(name: &str, relation: Relation, lower: &Member, upper: &Member, ratio: f64) -> Self {
        let margin = upper.value - lower.value;
        let error = lower.error + upper.error;
        let pass = match relation {
            Relation::Strict => margin > ratio * error,
            Relation::NonStrict => margin >= -error,
            Relation::Equality => margin.abs() <= error,
        };
        Comparison { name: name.into(), relation, lower: lower.value, upper: upper.value, margin, error, pass }
    }

    /// Violated beyond the error bars, as opposed to merely unresolved.
    fn is_violation(&self) -> bool {
        match self.relation {
            Relation::Equality => false,
            _ => self.margin < -self.error,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundedRecord {
    pub domain: String,
    pub b: f64,
    pub area: f64,
    pub perimeter: f64,
    pub equality_case: bool,
    pub regime_overridden: bool,
    pub levels: Vec<LevelResult>,
    pub lambda: f64,
    pub lambda_error: f64,
    pub lambda_symmetric: f64,
    pub gauge_gap: f64,
    pub gauge_error: f64,
    pub route_gap: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    pub kappa_route_gap: f64,
    pub members: Vec<Member>,
    /// `λ(b, B′)` from the scaling identity and directly; their relative gap.
    pub lambda_perimeter_disk: f64,
    pub scaling_gap: f64,
    pub comparisons: Vec<Comparison>,
    pub truncation: Vec<(usize, f64)>,
    pub pass: bool,
    pub wall_clock_s: f64,
    #[serde(skip)]
    pub weight: Option<Arc<WeightTable>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExteriorRecord {
    pub domain: String,
    pub b: f64,
    pub perimeter: f64,
    pub is_disk: bool,
    pub regime_overridden: bool,
    pub quotient: f64,
    pub comparison: f64,
    pub margin: f64,
    pub error: f64,
    pub steiner_ok: bool,
    pub moment_ok: bool,
    pub centroid_ok: bool,
    pub pass: bool,
    pub wall_clock_s: f64,
    #[serde(skip)]
    pub nodes: Vec<TrialNode>,
}

/// An item that did not produce a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: String,
    pub domain: String,
    pub b: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub tolerances: Tolerances,
    pub bounded: Vec<BoundedRecord>,
    pub exterior: Vec<ExteriorRecord>,
    pub failures: Vec<Failure>,
    pub all_pass: bool,
}

fn hierarchy(d: &Domain, h: f64, refinements: usize) -> Result<Vec<Arc<Mesh>>> {
    let mut mesh = triangulate(d, h, 0)?;
    let mut out = vec![Arc::new(mesh.clone())];
    for _ in 0..refinements {
        mesh = mesh.refine(d);
        out.push(Arc::new(mesh.clone()));
    }
    Ok(out)
}

fn weight_of(psi: &ScalarField, tol_mesh: f64) -> Result<Arc<WeightTable>> {
    let lt = level_statistics(psi, DEFAULT_LEVELS)?;
    Ok(Arc::new(weight_function(&lt, tol_mesh)?))
}

/// Extrapolated value, error of the finest level and the contraction factor used.
///
/// With three or more levels the observed ratio of successive differences
/// replaces the asymptotic factor 4 when it is smaller.
fn extrapolate(levels: &[LevelResult]) -> (f64, f64, f64) {
    let n = levels.len();
    let d1 = levels[n - 1].lambda - levels[n - 2].lambda;
    let q = if n >= 3 {
        let d0 = levels[n - 2].lambda - levels[n - 3].lambda;
        (d0 / d1).abs().clamp(2.0, 4.0)
    } else {
        4.0
    };
    let e = d1.abs() / (q - 1.0);
    (levels[n - 1].lambda + d1 / (q - 1.0), e, q)
}

/// `κ₁(b, G)` on `|Ω|` with the 1D error from a halved grid and the route gap.
fn kappa_member(name: &str, b: f64, a_star: f64, g: &Weight, nodes: usize) -> Result<(Member, f64)> {
    let full = kappa1(&AuxProblem::new(b, a_star, g, nodes)?)?;
    let (half, _) = kappa1_direct(&AuxProblem::new(b, a_star, g, nodes / 2)?)?;
    let gap = full.route_gap();
    let error = (full.kappa - half).abs() + gap.max(AUX_ROUTE_TOL) * full.kappa;
    Ok((Member { name: name.into(), value: full.kappa, error }, gap))
}

/// The bounded chain `|∂Ω|λ(b,Ω) ≤ κ₁(b,G_Ω) < κ₁(b,4π) = |∂B|λ(b,B)` and
/// the perimeter-matched comparison `λ(b,Ω) < λ(b,B′)`.
pub fn verify_bounded(d: &Domain, b: f64, h: f64, refinements: usize, aux_nodes: usize, opts: &VerifyOptions) -> Result<BoundedRecord> {
    let start = Instant::now();
    bounded_guard(d, b, opts.override_regime)?;
    if refinements < 1 {
        return Err(Error::InvalidParameters("at least one refinement is needed for error estimates".into()));
    }
    let ratio = opts.tolerances.margin_ratio;
    let metrics = d.metrics();
    let (area, perimeter) = (metrics.area, metrics.perimeter);
    let equality_case = d.family() == Family::Disk;
    let meshes = hierarchy(d, h, refinements)?;
    let n = meshes.len();

    let mut levels = Vec::with_capacity(n);
    let mut fields = Vec::with_capacity(n);
    for m in &meshes {
        let (r, psi) = solve_on_mesh(m.clone(), b, Gauge::Torsion, SpectralRoute::Dtn)?;
        levels.push(LevelResult { h: m.h, nodes: m.num_nodes(), lambda: r.lambda });
        fields.push(psi.expect("torsion gauge returns its field"));
    }
    let (lambda, lambda_error, ratio_used) = extrapolate(&levels);

    // gauge invariance on the two finest meshes
    let sym: Vec<f64> = meshes[n - 2..]
        .iter()
        .map(|m| solve_on_mesh(m.clone(), b, Gauge::Symmetric, SpectralRoute::Dtn).map(|r| r.0.lambda))
        .collect::<Result<_>>()?;
    let sym_error = (sym[1] - sym[0]).abs() / (ratio_used - 1.0);
    let gauge_gap = (levels[n - 1].lambda - sym[1]).abs();
    let gauge_error = lambda_error + sym_error;

    // route agreement on the coarsest mesh
    let fs = assemble_forms(meshes[0].clone(), b, Gauge::Torsion, Some(&fields[0]))?;
    let robin = lambda_robin_root(&fs)?.lambda;
    let route_gap = (robin - levels[0].lambda).abs() / levels[0].lambda;
    if route_gap > opts.tolerances.route {
        return Err(Error::RouteMismatch { first: levels[0].lambda, second: robin, gap: route_gap });
    }

    let weight = weight_of(&fields[n - 1], DEFAULT_TOL_MESH)?;
    // the coarser level only feeds the error estimate; its peak region is under-resolved
    let weight_coarse = weight_of(&fields[n - 2], COARSE_TOL_MESH)?;
    let (kappa_domain, kappa_route_gap) = kappa_member("kappa-domain", b, area, &Weight::Table(weight.clone()), aux_nodes)?;
    let (kappa_coarse, _) = kappa_member("kappa-domain", b, area, &Weight::Table(weight_coarse), aux_nodes)?;
    let kappa_domain = Member { error: kappa_domain.error + (kappa_domain.value - kappa_coarse.value).abs(), ..kappa_domain };
    let (kappa_disk, _) = kappa_member("kappa-disk", b, area, &Weight::four_pi(), aux_nodes)?;

    let policy = opts.policy();
    let r_area = metrics.area_radius();
    let lam_b = lambda_disk_with(b, r_area, policy)?;
    let boundary_energy = Member { name: "boundary-energy".into(), value: perimeter * lambda, error: perimeter * lambda_error };
    let disk_energy = Member { name: "disk-energy".into(), value: 2.0 * PI * r_area * lam_b, error: 1e-14 * lam_b };

    let t = perimeter / (4.0 * PI * area).sqrt();
    let lam_scaled = lambda_disk_with(b * t * t, r_area, RegimePolicy::Override)? / t;
    let lam_direct = lambda_disk_with(b, metrics.perimeter_radius(), RegimePolicy::Override)?;
    let scaling_gap = (lam_scaled - lam_direct).abs() / lam_direct;
    let lam_member = Member { name: "lambda".into(), value: lambda, error: lambda_error };
    let lam_prime = Member { name: "lambda-perimeter-disk".into(), value: lam_scaled, error: 1e-14 * lam_scaled };

    let strict = if equality_case { Relation::Equality } else { Relation::Strict };
    let first = if equality_case { Relation::Equality } else { Relation::NonStrict };
    let comparisons = vec![
        Comparison::new("boundary-energy <= kappa-domain", first, &boundary_energy, &kappa_domain, ratio),
        Comparison::new("kappa-domain < kappa-disk", strict, &kappa_domain, &kappa_disk, ratio),
        Comparison::new("kappa-disk = disk-energy", Relation::Equality, &kappa_disk, &disk_energy, ratio),
        Comparison::new("boundary-energy < disk-energy", strict, &boundary_energy, &disk_energy, ratio),
        Comparison::new("lambda < lambda-perimeter-disk", strict, &lam_member, &lam_prime, ratio),
    ];
    if let Some(c) = comparisons.iter().find(|c| c.is_violation()) {
        return Err(Error::ChainViolation(format!(
            "{} at b = {b}: {} fails against {} (error {:e})",
            d.label(),
            c.lower,
            c.upper,
            c.error
        )));
    }
    let truncation = truncation_study(b, &weight, &TRUNCATION_LEVELS, aux_nodes)?;
    let pass = comparisons.iter().all(|c| c.pass) && gauge_gap < gauge_error;
    Ok(BoundedRecord {
        domain: d.label(),
        b,
        area,
        perimeter,
        equality_case,
        regime_overridden: bounded_guard(d, b, false).is_err(),
        levels,
        lambda,
        lambda_error,
        lambda_symmetric: sym[1],
        gauge_gap,
        gauge_error,
        route_gap,
        weight_min: weight.min(),
        weight_max: weight.max(),
        kappa_route_gap,
        members: vec![boundary_energy, kappa_domain, kappa_disk, disk_energy],
        lambda_perimeter_disk: lam_scaled,
        scaling_gap,
        comparisons,
        truncation,
        pass,
        wall_clock_s: start.elapsed().as_secs_f64(),
        weight: Some(weight),
    })
}

/// The exterior comparison `λ(b, Ω^ext) ≤ Q[u⋆] < λ(b, (B′)^ext)`.
pub fn verify_exterior(d: &Domain, b: f64, opts: &VerifyOptions) -> Result<ExteriorRecord> {
    let start = Instant::now();
    exterior_guard(d, b, opts.override_regime)?;
    let r = trial_quotient_exterior(d, b, opts.policy())?;
    let geometric = r.steiner_ok && r.moment_ok && r.centroid_ok;
    let pass = geometric
        && if r.is_disk {
            r.margin.abs() <= r.error_estimate.max(1e-12 * r.comparison)
        } else {
            r.margin > opts.tolerances.margin_ratio * r.error_estimate
        };
    Ok(ExteriorRecord {
        domain: r.domain,
        b,
        perimeter: r.perimeter,
        is_disk: r.is_disk,
        regime_overridden: exterior_guard(d, b, false).is_err(),
        quotient: r.quotient,
        comparison: r.comparison,
        margin: r.margin,
        error: r.error_estimate,
        steiner_ok: r.steiner_ok,
        moment_ok: r.moment_ok,
        centroid_ok: r.centroid_ok,
        pass,
        wall_clock_s: start.elapsed().as_secs_f64(),
        nodes: r.nodes,
    })
}

enum Item {
    Bounded(Domain, f64, f64, usize, usize),
    Exterior(Domain, f64),
}

enum Outcome {
    Bounded(Result<BoundedRecord>),
    Exterior(Result<ExteriorRecord>),
}

/// Execute every campaign item, in parallel when `workers > 1`.
pub fn execute(cfg: &CampaignConfig, workers: usize) -> Result<VerificationReport> {
    cfg.validate()?;
    let opts = cfg.options();
    let mut items = Vec::new();
    for c in &cfg.bounded {
        let d = build_domain(&c.domain)?;
        for &b in &c.b {
            items.push(Item::Bounded(d.clone(), b, c.h, c.refinements, c.aux_nodes));
        }
    }
    for c in &cfg.exterior {
        let d = build_domain(&c.domain)?;
        for &b in &c.b {
            items.push(Item::Exterior(d.clone(), b));
        }
    }
    let work = || -> Vec<Outcome> {
        items
            .par_iter()
            .map(|it| match it {
                Item::Bounded(d, b, h, r, n) => Outcome::Bounded(verify_bounded(d, *b, *h, *r, *n, &opts)),
                Item::Exterior(d, b) => Outcome::Exterior(verify_exterior(d, *b, &opts)),
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let outcomes = pool.install(work);

    let mut report = VerificationReport { schema: SCHEMA, tolerances: cfg.tolerances, ..Default::default() };
    for (it, out) in items.iter().zip(outcomes) {
        let (kind, d, b) = match it {
            Item::Bounded(d, b, ..) => ("bounded", d, *b),
            Item::Exterior(d, b) => ("exterior", d, *b),
        };
        let failure = |e: Error| Failure { kind: kind.into(), domain: d.label(), b, message: e.to_string() };
        match out {
            Outcome::Bounded(Ok(r)) => report.bounded.push(r),
            Outcome::Exterior(Ok(r)) => report.exterior.push(r),
            Outcome::Bounded(Err(e)) | Outcome::Exterior(Err(e)) => report.failures.push(failure(e)),
        }
    }
    report.all_pass = report.failures.is_empty()
        && report.bounded.iter().all(|r| r.pass)
        && report.exterior.iter().all(|r| r.pass);
    Ok(report)
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    kind: &'a str,
    domain: &'a str,
    b: f64,
    lambda: f64,
    boundary_energy: f64,
    kappa_domain: f64,
    kappa_disk: f64,
    disk_energy: f64,
    lambda_perimeter_disk: f64,
    quotient: f64,
    exterior_disk: f64,
    min_margin_ratio: f64,
    pass: bool,
}

/// Smallest `margin / error` over the strict comparisons.
fn min_margin_ratio(r: &BoundedRecord) -> f64 {
    r.comparisons
        .iter()
        .filter(|c| c.relation == Relation::Strict)
        .map(|c| c.margin / c.error)
        .fold(f64::INFINITY, f64::min)
}

/// Serialize rows with a header line.
pub fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn slug(s: &str) -> String {
    let raw: String = s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
    raw.split('_').filter(|p| !p.is_empty()).collect::<Vec<_>>().join("_")
}

/// `report.json`, `summary.csv` and per-record tables under `out`.
pub fn write_report(report: &VerificationReport, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    let nan = f64::NAN;
    let mut rows = Vec::new();
    for r in &report.bounded {
        let m = |i: usize| r.members[i].value;
        rows.push(SummaryRow {
            kind: "bounded",
            domain: &r.domain,
            b: r.b,
            lambda: r.lambda,
            boundary_energy: m(0),
            kappa_domain: m(1),
            kappa_disk: m(2),
            disk_energy: m(3),
            lambda_perimeter_disk: r.lambda_perimeter_disk,
            quotient: nan,
            exterior_disk: nan,
            min_margin_ratio: min_margin_ratio(r),
            pass: r.pass,
        });
    }
    for r in &report.exterior {
        rows.push(SummaryRow {
            kind: "exterior",
            domain: &r.domain,
            b: r.b,
            lambda: nan,
            boundary_energy: nan,
            kappa_domain: nan,
            kappa_disk: nan,
            disk_energy: nan,
            lambda_perimeter_disk: nan,
            quotient: r.quotient,
            exterior_disk: r.comparison,
            min_margin_ratio: if r.is_disk { nan } else { r.margin / r.error },
            pass: r.pass,
        });
    }
    write_csv(&out.join("summary.csv"), rows)?;

    let tables = out.join("tables");
    fs::create_dir_all(&tables)?;
    for (i, r) in report.bounded.iter().enumerate() {
        let stem = format!("bounded_{i:02}_{}_b{}", slug(&r.domain), r.b);
        if let Some(w) = &r.weight {
            #[derive(Serialize)]
            struct Row {
                a: f64,
                #[serde(rename = "G")]
                g: f64,
            }
            write_csv(&tables.join(format!("{stem}_weight.csv")), w.a.iter().zip(&w.g).map(|(&a, &g)| Row { a, g }))?;
        }
        #[derive(Serialize)]
        struct Trunc {
            n: usize,
            kappa_n: f64,
        }
        write_csv(&tables.join(format!("{stem}_truncation.csv")), r.truncation.iter().map(|&(n, kappa_n)| Trunc { n, kappa_n }))?;
    }
    for (i, r) in report.exterior.iter().enumerate() {
        #[derive(Serialize)]
        struct Row {
            t: f64,
            sigma_length: f64,
            second_moment: f64,
            psi: f64,
            dpsi: f64,
        }
        let rows = r.nodes.iter().map(|n| Row { t: n.t, sigma_length: n.sigma_length, second_moment: n.second_moment, psi: n.psi, dpsi: n.dpsi });
        write_csv(&tables.join(format!("exterior_{i:02}_{}_b{}_trace.csv", slug(&r.domain), r.b)), rows)?;
    }
    Ok(())
}

/// Load, execute and write a campaign. Returns the report; callers exit 0 iff `all_pass`.
pub fn run(config: &Path, out: Option<&Path>, workers: usize) -> Result<VerificationReport> {
    let cfg = CampaignConfig::load(config)?;
    let out = out.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let report = execute(&cfg, workers)?;
    write_report(&report, &out)?;
    Ok(report)
}

/// Three bounded domains and three exterior domains, two fields each.
pub fn default_config() -> CampaignConfig {
    use crate::geometry::Normalization;
    let area = Normalization::Area(PI);
    let perimeter = Normalization::Perimeter(2.0 * PI);
    let bounded = [
        DomainSpec::ellipse(1.2, 1.0 / 1.2),
        DomainSpec::rectangle(1.0, 1.0).normalized(area),
        DomainSpec::perturbed_disk(0.08, 3),
    ]
    .into_iter()
    .map(|domain| BoundedCampaign { domain, b: vec![0.3, 0.7], h: default_h(), refinements: default_refinements(), aux_nodes: DEFAULT_NODES })
    .collect();
    let exterior = [
        DomainSpec::rectangle(1.0, 1.0).normalized(perimeter),
        DomainSpec::ellipse(1.2, 1.0 / 1.2).normalized(perimeter),
        DomainSpec::perturbed_disk(0.1, 2).normalized(perimeter),
    ]
    .into_iter()
    .map(|domain| ExteriorCampaign { domain, b: vec![0.5, 0.8] })
    .collect();
    CampaignConfig { schema: SCHEMA, bounded, exterior, tolerances: Tolerances::default(), override_regime: false, out: None }
}
