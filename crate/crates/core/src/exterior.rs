//! Exterior of a disk and the parallel-curve trial quotient.
//!
//! In the symmetric gauge the radial exterior problem is
//! `−f″ − f′/r + (b²r²/4) f = 0` on `r > R′` with `−f′(R′) = λ f(R′)`
//! (the outward normal of the exterior points toward the origin). The
//! decaying solution is `K₀(br²/4)`, giving
//! `λ(b, (B′)^ext) = (bR′/2)·K₁(bR′²/4)/K₀(bR′²/4)`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::disk::{default_n_max, RegimePolicy, UNDERCUT_TOL};
use crate::geometry::{offset_curve, Domain, OffsetOptions, Symmetry};
use crate::linalg::{CsrMatrix, ProfileLdl};
use crate::quadrature::GaussRule;
use crate::specfun::{k0, k1, ratio_k1_k0};
use crate::{Error, Result};

/// Agreement required between the Bessel ratio and the shooting solve.
pub const ROUTE_TOL: f64 = 1e-6;
/// `K₀` argument advance over the truncated interval.
pub const DECAY_ARGUMENT: f64 = 40.0;
pub const TRIAL_PANELS: usize = 512;
const PANEL_POINTS: usize = 4;
const SHOOTING_STEPS: usize = 40_000;
pub const EXTERIOR_FIBER_NODES: usize = 8000;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `None` when `bR′² < 1`, otherwise a warning message.
pub fn regime_warning(b: f64, r_inner: f64) -> Option<String> {
    let s = b * r_inner * r_inner;
    (s >= 1.0).then(|| format!("bR′² = {s} is outside the exterior regime bR′² < 1"))
}

fn guard(b: f64, r_inner: f64, policy: RegimePolicy) -> Result<()> {
    check_positive("b", b)?;
    check_positive("R′", r_inner)?;
    match (regime_warning(b, r_inner), policy) {
        (Some(w), RegimePolicy::Enforce) => Err(Error::RegimeViolation(w)),
        _ => Ok(()),
    }
}

/// `R_out = √(R′² + 4·40/b)`, where `K₀(br²/4)` has decayed by `e^{−40}`.
pub fn truncation_radius(b: f64, r_inner: f64) -> f64 {
    (r_inner * r_inner + 4.0 * DECAY_ARGUMENT / b).sqrt()
}

/// `λ` from the Bessel ratio alone.
pub fn lambda_exterior_closed_form(b: f64, r_inner: f64) -> f64 {
    0.5 * b * r_inner * ratio_k1_k0(0.25 * b * r_inner * r_inner)
}

/// Backward RK4 integration from `r_out` with `f = 0`, `f′ = −1`, returning
/// `−f′(R′)/f(R′)`. The step is `(r_out − R′)/steps`.
pub fn shooting_exterior(b: f64, r_inner: f64, r_out: f64, steps: usize) -> f64 {
    shooting_exterior_fiber(0, b, r_inner, r_out, steps)
}

/// [`shooting_exterior`] for the angular mode `n`, potential `(n/r − br/2)²`.
pub fn shooting_exterior_fiber(n: i64, b: f64, r_inner: f64, r_out: f64, steps: usize) -> f64 {
    let nf = n as f64;
    let rhs = |r: f64, y: [f64; 2]| {
        let v = (nf / r - 0.5 * b * r).powi(2);
        [y[1], -y[1] / r + v * y[0]]
    };
    let h = -(r_out - r_inner) / steps as f64;
    let mut y = [0.0, -1.0];
    let mut r = r_out;
    for _ in 0..steps {
        let k1 = rhs(r, y);
        let k2 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
    }
    -y[1] / y[0]
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExteriorDisk {
    pub b: f64,
    pub r_inner: f64,
    pub lambda: f64,
    pub lambda_shooting: f64,
    pub route_gap: f64,
    pub r_out: f64,
    /// `|λ(R_out) − λ(2R_out)|` of the shooting route at a fixed step.
    pub truncation_shift: f64,
}

/// `λ(b, (B′)^ext)` with the default guard.
pub fn lambda_disk_exterior(b: f64, r_inner: f64) -> Result<f64> {
    Ok(exterior_disk(b, r_inner, RegimePolicy::Enforce)?.lambda)
}

/// Bessel-ratio value, reconciled against the shooting solve.
pub fn exterior_disk(b: f64, r_inner: f64, policy: RegimePolicy) -> Result<ExteriorDisk> {
    guard(b, r_inner, policy)?;
    let lambda = lambda_exterior_closed_form(b, r_inner);
    let r_out = truncation_radius(b, r_inner);
    let lambda_shooting = shooting_exterior(b, r_inner, r_out, SHOOTING_STEPS);
    let steps2 = (SHOOTING_STEPS as f64 * (2.0 * r_out - r_inner) / (r_out - r_inner)).round() as usize;
    let far = shooting_exterior(b, r_inner, 2.0 * r_out, steps2);
    let route_gap = (lambda - lambda_shooting).abs() / lambda;
    if !(lambda > 0.0) {
        return Err(Error::SolverFailure(format!("exterior value {lambda} is not positive")));
    }
    if route_gap > ROUTE_TOL {
        return Err(Error::RouteMismatch { first: lambda, second: lambda_shooting, gap: route_gap });
    }
    Ok(ExteriorDisk { b, r_inner, lambda, lambda_shooting, route_gap, r_out, truncation_shift: (far - lambda_shooting).abs() })
}

/// Exterior ground state as a function of the distance `t` to the disk.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub r_inner: f64,
    pub r_out: f64,
    pub b: f64,
    pub lambda: f64,
    pub t: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    /// `ψ∘(0) = |∂B′|^{−1/2}`.
    pub trace_value: f64,
}

/// `ψ∘(t)` and `ψ∘′(t)` normalized to unit boundary trace on a circle of radius `R′`.
#[derive(Debug, Clone, Copy)]
pub struct ProfileFn {
    pub b: f64,
    pub r_inner: f64,
    scale: f64,
}

impl ProfileFn {
    pub fn new(b: f64, r_inner: f64) -> Self {
        let x0 = 0.25 * b * r_inner * r_inner;
        ProfileFn { b, r_inner, scale: 1.0 / (k0(x0) * (TAU * r_inner).sqrt()) }
    }

    pub fn psi(&self, t: f64) -> f64 {
        let r = self.r_inner + t;
        self.scale * k0(0.25 * self.b * r * r)
    }

    pub fn dpsi(&self, t: f64) -> f64 {
        let r = self.r_inner + t;
        -self.scale * k1(0.25 * self.b * r * r) * 0.5 * self.b * r
    }

    /// `∫_T^∞ (|ψ′|²·2π(R′+t) + (b²/4)|ψ|²·2π(R′+t)³) dt = −2π(R′+T)ψ(T)ψ′(T)`.
    pub fn disk_tail(&self, t: f64) -> f64 {
        -TAU * (self.r_inner + t) * self.psi(t) * self.dpsi(t)
    }
}

pub fn radial_profile_exterior(b: f64, r_inner: f64, n: usize, policy: RegimePolicy) -> Result<RadialProfile> {
    let ext = exterior_disk(b, r_inner, policy)?;
    if n < 2 {
        return Err(Error::InvalidParameters("profile needs at least two points".into()));
    }
    let f = ProfileFn::new(b, r_inner);
    let t_max = ext.r_out - r_inner;
    let t: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
    let psi: Vec<f64> = t.iter().map(|&s| f.psi(s)).collect();
    let dpsi: Vec<f64> = t.iter().map(|&s| f.dpsi(s)).collect();
    if psi[n - 1] >= 1e-14 * psi[0] {
        return Err(Error::TruncationInadequate(format!("ψ(T)/ψ(0) = {:e}", psi[n - 1] / psi[0])));
    }
    if psi.windows(2).any(|w| !(w[1] < w[0])) || psi.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::TruncationInadequate("profile is not positive and decreasing".into()));
    }
    Ok(RadialProfile { r_inner, r_out: ext.r_out, b, lambda: ext.lambda, t, psi, dpsi, trace_value: f.psi(0.0) })
}

/// Quotient of the profile over the exterior disk itself; equals `λ`.
pub fn profile_quotient(b: f64, r_inner: f64) -> f64 {
    let f = ProfileFn::new(b, r_inner);
    let t_max = truncation_radius(b, r_inner) - r_inner;
    let rule = GaussRule::new(PANEL_POINTS);
    let integrand = |t: f64| {
        let r = r_inner + t;
        f.dpsi(t).powi(2) * TAU * r + 0.25 * b * b * f.psi(t).powi(2) * TAU * r * r * r
    };
    let body = rule.composite(0.0, t_max, TRIAL_PANELS, integrand);
    (body + f.disk_tail(t_max)) / (TAU * r_inner * f.psi(0.0).powi(2))
}

/// Geometry of `Σ_t` at one quadrature node.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialNode {
    pub t: f64,
    pub sigma_length: f64,
    pub second_moment: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub steiner_bound: f64,
    pub moment_bound: f64,
    pub centroid_offset: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub domain: String,
    pub b: f64,
    pub perimeter: f64,
    pub r_prime: f64,
    pub gradient_integral: f64,
    pub moment_integral: f64,
    /// Certified remainder beyond the truncation, included in the numerator.
    pub tail_bound: f64,
    pub trace_norm: f64,
    pub quotient: f64,
    pub comparison: f64,
    pub margin: f64,
    /// Panel-halving difference of the `t`-quadrature.
    pub quadrature_error: f64,
    /// Change under doubled boundary resolution, scaled to the quotient.
    pub geometry_error: f64,
    pub error_estimate: f64,
    pub steiner_ok: bool,
    pub moment_ok: bool,
    pub centroid_ok: bool,
    pub is_disk: bool,
    pub nodes: Vec<TrialNode>,
}

fn offset_moments(d: &Domain, t: f64, opts: &OffsetOptions) -> Result<(f64, f64, f64)> {
    match offset_curve(d, t, opts) {
        Ok(c) => Ok((c.length, c.second_moment, c.centroid[0].hypot(c.centroid[1]))),
        Err(Error::NotSimple { t, components }) => {
            Err(Error::HypothesisViolation(format!("parallel curve at t = {t} has {components} components")))
        }
        Err(e) => Err(e),
    }
}

struct Quadrature {
    gradient: f64,
    moment: f64,
    nodes: Vec<TrialNode>,
}

fn integrate_offsets(d: &Domain, f: &ProfileFn, t_max: f64, panels: usize, opts: &OffsetOptions) -> Result<Quadrature> {
    let rule = GaussRule::new(PANEL_POINTS);
    let h = t_max / panels as f64;
    let points: Vec<(f64, f64)> = (0..panels).flat_map(|k| rule.on(k as f64 * h, (k + 1) as f64 * h).collect::<Vec<_>>()).collect();
    let r_inner = f.r_inner;
    let values = points
        .par_iter()
        .map(|&(t, w)| {
            let (len, m2, c) = offset_moments(d, t, opts)?;
            let node = TrialNode {
                t,
                sigma_length: len,
                second_moment: m2,
                psi: f.psi(t),
                dpsi: f.dpsi(t),
                steiner_bound: TAU * (r_inner + t),
                moment_bound: TAU * (r_inner + t).powi(3),
                centroid_offset: c,
            };
            Ok((w, node))
        })
        .collect::<Result<Vec<_>>>()?;
    let gradient = values.iter().map(|(w, n)| w * n.dpsi * n.dpsi * n.sigma_length).sum();
    let moment = values.iter().map(|(w, n)| w * 0.25 * f.b * f.b * n.psi * n.psi * n.second_moment).sum();
    Ok(Quadrature { gradient, moment, nodes: values.into_iter().map(|(_, n)| n).collect() })
}

/// Quotient of `u⋆ = ψ∘(ρ_Ω)` against `λ(b, (B′)^ext)` for the disk of equal perimeter.
pub fn trial_quotient_exterior(d: &Domain, b: f64, policy: RegimePolicy) -> Result<TrialReport> {
    let metrics = d.metrics();
    let length_scale = d.length_scale();
    if metrics.symmetry == Symmetry::None {
        return Err(Error::HypothesisViolation(format!("{} has neither central symmetry nor two axes", d.label())));
    }
    let c = metrics.centroid;
    if c[0].hypot(c[1]) > 1e-9 * length_scale {
        return Err(Error::HypothesisViolation(format!("{} is not centred at the origin (centroid {c:?})", d.label())));
    }
    let l = metrics.perimeter;
    let r_prime = l / TAU;
    let comparison = exterior_disk(b, r_prime, policy)?.lambda;
    let f = ProfileFn::new(b, r_prime);
    let t_max = truncation_radius(b, r_prime) - r_prime;
    let opts = OffsetOptions::default();

    let fine = integrate_offsets(d, &f, t_max, TRIAL_PANELS, &opts)?;
    let coarse = integrate_offsets(d, &f, t_max, TRIAL_PANELS / 2, &opts)?;
    // Steiner and Hurwitz bound the remainder by the disk's own tail
    let tail_bound = f.disk_tail(t_max);
    let trace_norm = l * f.psi(0.0).powi(2);
    let numerator = fine.gradient + fine.moment + tail_bound;
    let quotient = numerator / trace_norm;
    let quadrature_error = ((fine.gradient + fine.moment) - (coarse.gradient + coarse.moment)).abs() / trace_norm;

    let geometry_error = if d.is_smooth() {
        let finer = d.with_resolution(2 * d.resolution());
        let mut worst: f64 = 0.0;
        for node in fine.nodes.iter().step_by(64) {
            let (len, m2, _) = offset_moments(&finer, node.t, &opts)?;
            worst = worst.max((len - node.sigma_length).abs() / len).max((m2 - node.second_moment).abs() / m2);
        }
        worst * quotient
    } else {
        0.0
    };
    let error_estimate = quadrature_error + geometry_error;

    let tol = 1e-9 * length_scale;
    let steiner_ok = fine.nodes.iter().all(|n| n.sigma_length <= n.steiner_bound + tol * (1.0 + n.t));
    let moment_ok = fine.nodes.iter().all(|n| n.second_moment <= n.moment_bound * (1.0 + 1e-9) + tol);
    let centroid_ok = fine.nodes.iter().all(|n| n.centroid_offset <= tol * (1.0 + n.t));
    let is_disk = d.family() == crate::geometry::Family::Disk;
    let margin = comparison - quotient;
    if !is_disk && margin < 0.0 && -margin > error_estimate {
        return Err(Error::ChainViolation(format!(
            "trial quotient {quotient} exceeds the exterior disk value {comparison} beyond the error {error_estimate:e}"
        )));
    }
    Ok(TrialReport {
        domain: d.label(),
        b,
        perimeter: l,
        r_prime,
        gradient_integral: fine.gradient,
        moment_integral: fine.moment,
        tail_bound,
        trace_norm,
        quotient,
        comparison,
        margin,
        quadrature_error,
        geometry_error,
        error_estimate,
        steiner_ok,
        moment_ok,
        centroid_ok,
        is_disk,
        nodes: fine.nodes,
    })
}

/// Fiber `n` of the exterior of the unit-scaled disk `r > R′`, truncated at `R_out`.
#[derive(Debug, Clone)]
pub struct ExteriorFiber {
    pub n: i64,
    pub b: f64,
    pub r_inner: f64,
    pub grid: Vec<f64>,
}

impl ExteriorFiber {
    pub fn new(n: i64, b: f64, r_inner: f64, nodes: usize) -> Result<Self> {
        check_positive("b", b)?;
        check_positive("R′", r_inner)?;
        let r_out = truncation_radius(b, r_inner);
        let grid = (0..nodes).map(|i| r_inner + (r_out - r_inner) * i as f64 / (nodes - 1) as f64).collect();
        Ok(ExteriorFiber { n, b, r_inner, grid })
    }

    /// Rank-one route on the Steklov node `r = R′` with the outer node pinned to zero.
    pub fn lambda(&self) -> Result<f64> {
        let rule = GaussRule::new(5);
        let dim = self.grid.len() - 1;
        let (nf, b) = (self.n as f64, self.b);
        let mut k = Vec::with_capacity(4 * dim);
        for (c, w) in self.grid.windows(2).enumerate() {
            let (r0, r1) = (w[0], w[1]);
            let h = r1 - r0;
            let mut loc = [[0.0; 2]; 2];
            for (r, wq) in rule.on(r0, r1) {
                let v = (nf / r - 0.5 * b * r).powi(2) * r;
                let phi = [(r1 - r) / h, (r - r0) / h];
                let dphi = [-1.0 / h, 1.0 / h];
                for i in 0..2 {
                    for j in 0..2 {
                        loc[i][j] += wq * (dphi[i] * dphi[j] * r + v * phi[i] * phi[j]);
                    }
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    if c + i < dim && c + j < dim {
                        k.push((c + i, c + j, loc[i][j]));
                    }
                }
            }
        }
        let k = CsrMatrix::from_triplets(dim, k);
        let ldl = ProfileLdl::factor(&k)?;
        if !ldl.is_positive_definite() {
            return Err(Error::NonPositiveForm(b));
        }
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        let x = ldl.solve(&e);
        Ok(1.0 / (self.r_inner * x[0]))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExteriorScanPoint {
    pub b: f64,
    pub lambda_radial: f64,
    pub mode: i64,
    pub lambda_min: f64,
    pub radial: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BCircScan {
    pub n_max: i64,
    pub points: Vec<ExteriorScanPoint>,
    pub bracket: Option<(f64, f64)>,
    pub crossings: Vec<(f64, f64)>,
    pub radial_up_to: Option<f64>,
}

/// Experimental fiberwise scan for the exterior threshold at `R′ = 1`.
pub fn estimate_b_circ(b_grid: &[f64], n_max: Option<i64>, nodes: usize) -> Result<BCircScan> {
    if b_grid.is_empty() || b_grid.windows(2).any(|w| !(w[1] > w[0])) || b_grid.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidParameters("b grid must be non-empty, positive and increasing".into()));
    }
    let n_max = n_max.unwrap_or_else(|| default_n_max(b_grid[b_grid.len() - 1]));
    let tasks: Vec<(f64, i64)> = b_grid.iter().flat_map(|&b| (-n_max..=n_max).map(move |n| (b, n))).collect();
    let values = tasks
        .par_iter()
        .map(|&(b, n)| ExteriorFiber::new(n, b, 1.0, nodes)?.lambda())
        .collect::<Result<Vec<_>>>()?;
    let width = (2 * n_max + 1) as usize;
    let points: Vec<ExteriorScanPoint> = b_grid
        .iter()
        .zip(values.chunks(width))
        .map(|(&b, row)| {
            let radial = row[n_max as usize];
            let (mode, lambda_min) = row
                .iter()
                .enumerate()
                .map(|(k, &l)| (k as i64 - n_max, l))
                .filter(|&(n, _)| n != 0)
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .filter(|&(_, l)| l < radial * (1.0 - UNDERCUT_TOL))
                .unwrap_or((0, radial));
            ExteriorScanPoint { b, lambda_radial: radial, mode, lambda_min, radial: mode == 0 }
        })
        .collect();
    let crossings: Vec<(f64, f64)> =
        points.windows(2).filter(|w| w[0].radial != w[1].radial).map(|w| (w[0].b, w[1].b)).collect();
    let bracket = if points[0].radial {
        points.windows(2).find(|w| w[0].radial && !w[1].radial).map(|w| (w[0].b, w[1].b))
    } else {
        None
    };
    let radial_up_to = points.iter().take_while(|p| p.radial).last().map(|p| p.b);
    Ok(BCircScan { n_max, points, bracket, crossings, radial_up_to })
}
