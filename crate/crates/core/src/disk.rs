//! Magnetic Steklov eigenvalues of the disk.
//!
//! For the symmetric gauge the problem separates in angular modes `n`. Each
//! fiber is the weighted radial problem
//!
//! `λ_n = inf ∫₀^R (|f′|² + v_n|f|²) r dr / (R|f(R)|²)`, `v_n = (n/r − br/2)²`,
//!
//! and the radial fiber `n = 0` has the closed form
//! `λ(b, B_R) = (bR/2)·I₁(bR²/4)/I₀(bR²/4)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::aux1d::{graded_grid, mu_robin_with, steklov_robin_root, GRADING_RATIO, ROUTE_FAIL};
use crate::linalg::{CsrMatrix, ProfileLdl};
use crate::quadrature::GaussRule;
use crate::specfun::{i0, ratio_i1_i0};
use crate::{Error, Result};

pub const FIBER_NODES: usize = 4000;
/// Regime `bR² ≤ 1` in which the ground state is radial.
pub const RADIAL_REGIME: f64 = 1.0;
/// Relative undercut required before a fiber counts as below the radial one.
pub const UNDERCUT_TOL: f64 = 1e-8;
const QUAD_POINTS: usize = 5;

/// Whether the proven-regime guard is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimePolicy {
    #[default]
    Enforce,
    /// Allow `bR² ≥ 1`; the caller is responsible for reporting it.
    Override,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `None` inside the proven regime, otherwise a warning message.
pub fn regime_warning(b: f64, r: f64) -> Option<String> {
    let s = b * r * r;
    (s > RADIAL_REGIME).then(|| format!("bR² = {s} is outside the radial regime bR² ≤ 1"))
}

/// Closed-form `λ(b, B_R)` with the default guard.
pub fn lambda_disk(b: f64, r: f64) -> Result<f64> {
    lambda_disk_with(b, r, RegimePolicy::Enforce)
}

pub fn lambda_disk_with(b: f64, r: f64, policy: RegimePolicy) -> Result<f64> {
    check_positive("b", b)?;
    check_positive("R", r)?;
    if let (Some(w), RegimePolicy::Enforce) = (regime_warning(b, r), policy) {
        return Err(Error::RegimeViolation(w));
    }
    Ok(0.5 * b * r * ratio_i1_i0(0.25 * b * r * r))
}

/// A single angular fiber on `(0, R]`.
#[derive(Debug, Clone)]
pub struct FiberProblem {
    pub n: i64,
    pub b: f64,
    pub radius: f64,
    /// Radial nodes. For `n ≠ 0` the node at the origin is pinned to zero
    /// and not a degree of freedom.
    pub grid: Vec<f64>,
}

impl FiberProblem {
    pub fn new(n: i64, b: f64, radius: f64, nodes: usize) -> Result<Self> {
        check_positive("b", b)?;
        check_positive("R", radius)?;
        if nodes < 16 {
            return Err(Error::InvalidParameters(format!("need at least 16 radial nodes, got {nodes}")));
        }
        let grid = if n == 0 {
            (0..nodes).map(|i| radius * i as f64 / (nodes - 1) as f64).collect()
        } else {
            graded_grid(radius, nodes, GRADING_RATIO)
        };
        Ok(FiberProblem { n, b, radius, grid })
    }

    pub fn potential(&self, r: f64) -> f64 {
        let s = self.n as f64 / r - 0.5 * self.b * r;
        s * s
    }

    fn first_dof(&self) -> usize {
        usize::from(self.n != 0)
    }

    /// Degrees of freedom; the last one is the boundary node.
    pub fn dofs(&self) -> usize {
        self.grid.len() - self.first_dof()
    }

    /// Form matrix of `∫(|f′|² + v_n|f|²) r dr` and mass matrix of `∫|f|² r dr`.
    pub fn matrices(&self) -> (CsrMatrix<f64>, CsrMatrix<f64>) {
        let rule = GaussRule::new(QUAD_POINTS);
        let off = self.first_dof();
        let dim = self.dofs();
        let (nf, b) = (self.n as f64, self.b);
        let mut k = Vec::with_capacity(4 * dim);
        let mut m = Vec::with_capacity(4 * dim);
        for (c, w) in self.grid.windows(2).enumerate() {
            let (r0, r1) = (w[0], w[1]);
            let h = r1 - r0;
            let (mut k_loc, mut m_loc) = ([[0.0; 2]; 2], [[0.0; 2]; 2]);
            for (r, wq) in rule.on(r0, r1) {
                let vr = nf * nf / r - nf * b * r + 0.25 * b * b * r * r * r;
                let phi = [(r1 - r) / h, (r - r0) / h];
                let dphi = [-1.0 / h, 1.0 / h];
                for i in 0..2 {
                    for j in 0..2 {
                        k_loc[i][j] += wq * (dphi[i] * dphi[j] * r + vr * phi[i] * phi[j]);
                        m_loc[i][j] += wq * phi[i] * phi[j] * r;
                    }
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    let (gi, gj) = (c + i, c + j);
                    if gi < off || gj < off {
                        continue;
                    }
                    k.push((gi - off, gj - off, k_loc[i][j]));
                    m.push((gi - off, gj - off, m_loc[i][j]));
                }
            }
        }
        (CsrMatrix::from_triplets(dim, k), CsrMatrix::from_triplets(dim, m))
    }

    /// `μ¹ᴰ(β)`: lowest eigenvalue of the form plus `βR|f(R)|²` against the mass.
    pub fn mu_robin(&self, beta: f64) -> Result<f64> {
        let (k, m) = self.matrices();
        mu_robin_with(&k, &m, -beta * self.radius)
    }

    /// Rank-one route `λ = 1/(R·x_N)` with `Kx = e_N`, and the profile `f(R) = 1`.
    pub fn lambda_direct(&self) -> Result<(f64, Vec<f64>)> {
        let (k, _) = self.matrices();
        let dim = k.dim();
        let ldl = ProfileLdl::factor(&k)?;
        if !ldl.is_positive_definite() {
            return Err(Error::NonPositiveForm(self.b));
        }
        let mut e = vec![0.0; dim];
        e[dim - 1] = 1.0;
        let x = ldl.solve(&e);
        let xn = x[dim - 1];
        let mut f = vec![0.0; self.first_dof()];
        f.extend(x.iter().map(|v| v / xn));
        Ok((1.0 / (self.radius * xn), f))
    }

    /// Robin route: the root `β⋆` of `μ¹ᴰ`, returned as `−β⋆`.
    pub fn lambda_robin(&self, guess: f64) -> Result<f64> {
        let (k, m) = self.matrices();
        steklov_robin_root(&k, &m, self.radius, guess)
    }
}

/// Which formula produced a disk result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiskRoute {
    ClosedForm,
    FiberNumeric,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberResult {
    pub n: i64,
    pub lambda: f64,
    pub lambda_direct: f64,
    pub grid: Vec<f64>,
    pub profile: Vec<f64>,
}

impl FiberResult {
    pub fn route_gap(&self) -> f64 {
        (self.lambda - self.lambda_direct).abs() / self.lambda.abs()
    }
}

/// Lowest Steklov value of fiber `n`, by the Robin root with the rank-one
/// route as cross-check.
pub fn fiber_lambda(n: i64, b: f64, radius: f64) -> Result<FiberResult> {
    fiber_lambda_nodes(n, b, radius, FIBER_NODES)
}

pub fn fiber_lambda_nodes(n: i64, b: f64, radius: f64, nodes: usize) -> Result<FiberResult> {
    let p = FiberProblem::new(n, b, radius, nodes)?;
    let (direct, profile) = p.lambda_direct()?;
    let lambda = p.lambda_robin(direct)?;
    let gap = (lambda - direct).abs() / lambda.abs();
    if gap > ROUTE_FAIL {
        return Err(Error::RouteMismatch { first: lambda, second: direct, gap });
    }
    Ok(FiberResult { n, lambda, lambda_direct: direct, grid: p.grid, profile })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiskResult {
    pub lambda: f64,
    pub mode: i64,
    pub grid: Vec<f64>,
    pub profile: Vec<f64>,
    pub route: DiskRoute,
}

/// Ground state on `B_R`: closed form in the proven regime, otherwise the
/// minimum over fibers `|n| ≤ ceil(bR²) + 5`.
pub fn solve_disk(b: f64, radius: f64, policy: RegimePolicy) -> Result<DiskResult> {
    if regime_warning(b, radius).is_none() {
        let lambda = lambda_disk(b, radius)?;
        let grid: Vec<f64> = (0..FIBER_NODES).map(|i| radius * i as f64 / (FIBER_NODES - 1) as f64).collect();
        let edge = i0(0.25 * b * radius * radius);
        let profile = grid.iter().map(|r| i0(0.25 * b * r * r) / edge).collect();
        return Ok(DiskResult { lambda, mode: 0, grid, profile, route: DiskRoute::ClosedForm });
    }
    lambda_disk_with(b, radius, policy)?;
    let n_max = default_n_max(b * radius * radius);
    let best = (-n_max..=n_max)
        .into_par_iter()
        .map(|n| FiberProblem::new(n, b, radius, FIBER_NODES)?.lambda_direct().map(|(l, _)| (n, l)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("at least one fiber");
    let fr = fiber_lambda(best.0, b, radius)?;
    Ok(DiskResult { lambda: fr.lambda, mode: fr.n, grid: fr.grid, profile: fr.profile, route: DiskRoute::FiberNumeric })
}

/// `ceil(bR²) + 5`.
pub fn default_n_max(b_r2: f64) -> i64 {
    b_r2.ceil() as i64 + 5
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiberRow {
    pub b: f64,
    pub n: i64,
    pub lambda_fiber: f64,
}

/// Fiber minima at one field strength.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub b: f64,
    pub lambda_radial: f64,
    /// Minimizing mode; `0` unless another fiber undercuts by more than [`UNDERCUT_TOL`].
    pub mode: i64,
    pub lambda_min: f64,
    pub radial: bool,
    /// `λ_{n+1} − λ_n` minimized over the tail `ceil(bR²) < n < n_max`; positive when the tail is monotone.
    pub tail_margin: f64,
    /// `min_{|n| = n_max} λ_n − λ_min`; positive when the scanned range contains the minimum with room.
    pub edge_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BStarScan {
    pub radius: f64,
    pub n_max: i64,
    pub rows: Vec<FiberRow>,
    pub points: Vec<ScanPoint>,
    /// `[last radial b, first non-radial b]` of the first transition, if any.
    pub bracket: Option<(f64, f64)>,
    /// Every interval of consecutive grid points where radiality changes.
    pub crossings: Vec<(f64, f64)>,
    /// Largest scanned `b` before the first transition: a lower estimate of `b⋆/R²`.
    pub radial_up_to: Option<f64>,
}

/// Scan `b_grid` for the first field strength at which a non-radial fiber
/// undercuts the radial one. Uses the rank-one route for every fiber.
pub fn estimate_b_star(b_grid: &[f64], n_max: i64, radius: f64, resolution: Option<f64>) -> Result<BStarScan> {
    check_positive("R", radius)?;
    if b_grid.is_empty() {
        return Err(Error::InvalidParameters("empty b grid".into()));
    }
    if b_grid.windows(2).any(|w| !(w[1] > w[0])) || b_grid.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidParameters("b grid must be positive and strictly increasing".into()));
    }
    let b_top = b_grid[b_grid.len() - 1];
    let needed = default_n_max(b_top * radius * radius);
    if n_max < needed {
        return Err(Error::InvalidParameters(format!("n_max = {n_max} below ceil(bR²) + 5 = {needed}")));
    }
    let tasks: Vec<(f64, i64)> = b_grid.iter().flat_map(|&b| (-n_max..=n_max).map(move |n| (b, n))).collect();
    let rows = tasks
        .par_iter()
        .map(|&(b, n)| {
            let (l, _) = FiberProblem::new(n, b, radius, FIBER_NODES)?.lambda_direct()?;
            Ok(FiberRow { b, n, lambda_fiber: l })
        })
        .collect::<Result<Vec<_>>>()?;
    let width = (2 * n_max + 1) as usize;
    let points: Vec<ScanPoint> = rows
        .chunks(width)
        .map(|chunk| {
            let b = chunk[0].b;
            let at = |n: i64| chunk[(n + n_max) as usize].lambda_fiber;
            let radial = at(0);
            let (mode, lambda_min) = chunk
                .iter()
                .filter(|r| r.n != 0)
                .map(|r| (r.n, r.lambda_fiber))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .filter(|&(_, l)| l < radial * (1.0 - UNDERCUT_TOL))
                .unwrap_or((0, radial));
            let tail_start = default_n_max(b * radius * radius) - 5;
            let tail_margin = (tail_start.max(0)..n_max)
                .flat_map(|n| [at(n + 1) - at(n), at(-n - 1) - at(-n)])
                .fold(f64::INFINITY, f64::min);
            let edge_margin = at(n_max).min(at(-n_max)) - lambda_min;
            ScanPoint { b, lambda_radial: radial, mode, lambda_min, radial: mode == 0, tail_margin, edge_margin }
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
    if let (Some((lo, hi)), Some(res)) = (bracket, resolution) {
        if hi - lo > res {
            return Err(Error::GridTooCoarse(format!("transition bracket [{lo}, {hi}] wider than {res}")));
        }
    }
    Ok(BStarScan { radius, n_max, rows, points, bracket, crossings, radial_up_to })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_reference() {
        assert!((lambda_disk(1.0, 1.0).unwrap() - 0.06201675095896236).abs() < 1e-12);
        assert!(matches!(lambda_disk(2.0, 1.0), Err(Error::RegimeViolation(_))));
        assert!(lambda_disk_with(2.0, 1.0, RegimePolicy::Override).unwrap() > 0.0);
    }

    #[test]
    fn radial_fiber_matches_closed_form() {
        let exact = lambda_disk(1.0, 1.0).unwrap();
        let f = fiber_lambda(0, 1.0, 1.0).unwrap();
        assert!((f.lambda - exact).abs() / exact < 1e-6, "{} vs {exact}", f.lambda);
        assert!(f.route_gap() < 1e-8);
    }

    #[test]
    fn constant_trial_bound() {
        let p = FiberProblem::new(0, 1.0, 1.0, 800).unwrap();
        assert!(p.mu_robin(-0.07).unwrap() < 0.0);
        assert!(p.mu_robin(0.0).unwrap() > 0.0);
    }

    #[test]
    fn first_modes_above_radial() {
        let l0 = FiberProblem::new(0, 0.5, 1.0, FIBER_NODES).unwrap().lambda_direct().unwrap().0;
        for n in [-1, 1] {
            let ln = FiberProblem::new(n, 0.5, 1.0, FIBER_NODES).unwrap().lambda_direct().unwrap().0;
            assert!(ln > l0, "n = {n}: {ln} vs {l0}");
        }
    }
}
