//! The one-dimensional weighted Steklov problem
//!
//! `κ₁(b, G) = inf { ∫₀^{a⋆} (aG|f′|² + b²a|f|²/G) da / |f(a⋆)|² }`
//!
//! solved with linear elements on a grid graded toward `a = 0`, where the
//! weight `aG` degenerates and the natural condition applies.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{lowest_eigenpair, CsrMatrix, ProfileLdl};
use crate::roots::illinois;
use crate::torsion::{WeightTable, FOUR_PI};
use crate::{Error, Result};

pub const DEFAULT_NODES: usize = 2000;
pub const GRADING_RATIO: f64 = 1.05;
const GRADED_CELLS: usize = 200;
/// Agreement demanded between the two routes.
pub const ROUTE_TOL: f64 = 1e-8;
/// Disagreement beyond which the result is rejected.
pub const ROUTE_FAIL: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-3;

/// A weight `a ↦ G(a)` on `(0, a⋆]`.
#[derive(Debug, Clone)]
pub enum Weight {
    /// Exact constant, e.g. `4π`.
    Constant(f64),
    Table(Arc<WeightTable>),
    /// `min{G, 4πn}`.
    Truncated(Arc<WeightTable>, usize),
}

impl Weight {
    pub fn four_pi() -> Self {
        Weight::Constant(FOUR_PI)
    }

    pub fn eval(&self, a: f64) -> f64 {
        match self {
            Weight::Constant(g) => *g,
            Weight::Table(t) => t.eval(a),
            Weight::Truncated(t, n) => t.eval_truncated(a, *n),
        }
    }
}

/// Nodes `0 = a₀ < … < a_{n−1} = a⋆`: cells grow by `ratio` away from the
/// origin until they reach the uniform size used on the rest of the interval.
pub fn graded_grid(a_star: f64, n: usize, ratio: f64) -> Vec<f64> {
    assert!(n >= 8);
    let cells = n - 1;
    let graded = GRADED_CELLS.min(cells / 4);
    // graded widths h_u·ratio^{k−graded}, k = 0..graded, then uniform h_u
    let graded_sum: f64 = (0..graded).map(|k| ratio.powi(k as i32 - graded as i32)).sum();
    let h_u = a_star / (graded_sum + (cells - graded) as f64);
    let mut a = Vec::with_capacity(n);
    a.push(0.0);
    let mut x = 0.0;
    for k in 0..cells {
        x += if k < graded { h_u * ratio.powi(k as i32 - graded as i32) } else { h_u };
        a.push(x);
    }
    a[cells] = a_star;
    a
}

/// Discretized auxiliary problem with cell-constant weight.
#[derive(Debug, Clone)]
pub struct AuxProblem {
    pub b: f64,
    pub a_star: f64,
    pub grid: Vec<f64>,
    /// Weight at cell midpoints.
    pub g_cells: Vec<f64>,
}

impl AuxProblem {
    pub fn new(b: f64, a_star: f64, weight: &Weight, n: usize) -> Result<Self> {
        Self::from_fn(b, a_star, n, |a| weight.eval(a))
    }

    pub fn from_fn(b: f64, a_star: f64, n: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::NonPositiveForm(b));
        }
        if !(a_star > 0.0) {
            return Err(Error::InvalidParameters(format!("a_star must be positive, got {a_star}")));
        }
        if n < 8 {
            return Err(Error::InvalidParameters(format!("need at least 8 grid nodes, got {n}")));
        }
        let grid = graded_grid(a_star, n, GRADING_RATIO);
        let g_cells: Vec<f64> = grid.windows(2).map(|w| g(0.5 * (w[0] + w[1]))).collect();
        Self::with_cells(b, a_star, grid, g_cells)
    }

    pub fn with_cells(b: f64, a_star: f64, grid: Vec<f64>, g_cells: Vec<f64>) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::NonPositiveForm(b));
        }
        if let Some(g) = g_cells.iter().find(|g| !(**g >= FOUR_PI * (1.0 - 1e-12))) {
            return Err(Error::InvalidParameters(format!("weight value {g} below 4π")));
        }
        Ok(AuxProblem { b, a_star, grid, g_cells })
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    /// Form matrix `K` and mass matrix `M`.
    pub fn matrices(&self) -> (CsrMatrix<f64>, CsrMatrix<f64>) {
        let n = self.grid.len();
        let b2 = self.b * self.b;
        let mut k = Vec::with_capacity(4 * n);
        let mut m = Vec::with_capacity(4 * n);
        for (c, w) in self.grid.windows(2).enumerate() {
            let (a0, a1) = (w[0], w[1]);
            let h = a1 - a0;
            let g = self.g_cells[c];
            let stiff = g * 0.5 * (a0 + a1) / h;
            let q = b2 / g;
            let (k00, k01, k11) = (stiff + q * h * (3.0 * a0 + a1) / 12.0, -stiff + q * h * (a0 + a1) / 12.0, stiff + q * h * (a0 + 3.0 * a1) / 12.0);
            k.extend([(c, c, k00), (c, c + 1, k01), (c + 1, c, k01), (c + 1, c + 1, k11)]);
            m.extend([(c, c, h / 3.0), (c, c + 1, h / 6.0), (c + 1, c, h / 6.0), (c + 1, c + 1, h / 3.0)]);
        }
        (CsrMatrix::from_triplets(n, k), CsrMatrix::from_triplets(n, m))
    }
}

/// Lowest eigenvalue `μ(κ)` of `K − κ e eᵀ` against the mass matrix.
pub fn mu_robin_1d(p: &AuxProblem, kappa: f64) -> Result<f64> {
    let (k, m) = p.matrices();
    mu_robin_with(&k, &m, kappa)
}

pub(crate) fn mu_robin_with(k: &CsrMatrix<f64>, m: &CsrMatrix<f64>, kappa: f64) -> Result<f64> {
    let n = k.dim();
    let e = CsrMatrix::from_triplets(n, [(n - 1, n - 1, 1.0)]);
    let a = CsrMatrix::combine(&[(k, 1.0), (&e, -kappa)]);
    let start: Vec<f64> = (0..n).map(|i| 0.1 + i as f64 / n as f64).collect();
    Ok(lowest_eigenpair(&a, m, start, 1e-12)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxRoute {
    RobinRoot,
    Schur,
}

/// `κ₁` with its ground state and the flux diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Kappa1Result {
    pub kappa: f64,
    /// Value from the Robin root, kept for the agreement check.
    pub kappa_robin: f64,
    pub route: AuxRoute,
    pub grid: Vec<f64>,
    /// Ground state with `f(a⋆) = 1`.
    pub f: Vec<f64>,
    /// `Y(a) = aG f′`, accumulated from the equation so that `Y(a⋆) = κ` exactly.
    pub y: Vec<f64>,
    /// `R = Y / f`.
    pub r: Vec<f64>,
    /// `|Y(a⋆) − κ f(a⋆)| / κ`.
    pub residual: f64,
}

impl Kappa1Result {
    pub fn route_gap(&self) -> f64 {
        (self.kappa - self.kappa_robin).abs() / self.kappa.abs()
    }
}

/// Direct route only: `κ₁ = 1/(eᵀK⁻¹e)`.
pub fn kappa1_direct(p: &AuxProblem) -> Result<(f64, Vec<f64>)> {
    let (k, _) = p.matrices();
    let n = k.dim();
    let ldl = ProfileLdl::factor(&k)?;
    if !ldl.is_positive_definite() {
        return Err(Error::SolverFailure("auxiliary form is not positive definite".into()));
    }
    let mut e = vec![0.0; n];
    e[n - 1] = 1.0;
    let x = ldl.solve(&e);
    let kappa = 1.0 / x[n - 1];
    let f = x.iter().map(|v| v * kappa).collect();
    Ok((kappa, f))
}

/// Root of `μ(κ) = 0` bracketed from `[0, κ_hi]`, then secant steps.
pub fn kappa1_robin(p: &AuxProblem) -> Result<f64> {
    let (k, m) = p.matrices();
    steklov_robin_root(&k, &m, 1.0, p.b * p.b * p.a_star / FOUR_PI + p.b)
}

/// Positive `s` at which the lowest eigenvalue of `K − s·c·e eᵀ` against `M`
/// crosses zero, `e` selecting the last node. The bracket starts at
/// `[0, guess]` and doubles until the sign changes; Illinois steps follow.
pub(crate) fn steklov_robin_root(k: &CsrMatrix<f64>, m: &CsrMatrix<f64>, c: f64, guess: f64) -> Result<f64> {
    let mu = |s: f64| mu_robin_with(k, m, s * c);
    let mut lo = (0.0, mu(0.0)?);
    if !(lo.1 > 0.0) {
        return Err(Error::BracketFailure(format!("mu(0) = {} is not positive", lo.1)));
    }
    let mut sh = guess;
    let mut hi = (sh, mu(sh)?);
    let mut samples = vec![lo, hi];
    while hi.1 >= 0.0 {
        lo = hi;
        sh *= 2.0;
        hi = (sh, mu(sh)?);
        samples.push(hi);
        if samples.len() > 200 {
            return Err(Error::BracketFailure(format!("no sign change, samples {samples:?}")));
        }
    }
    illinois(mu, lo, hi, 1e-14)
}

/// `κ₁(b, G)` by both routes, reconciled, with `f`, `Y` and `R` tabulated.
pub fn kappa1(p: &AuxProblem) -> Result<Kappa1Result> {
    let (kappa, f) = kappa1_direct(p)?;
    let kappa_robin = kappa1_robin(p)?;
    let gap = (kappa - kappa_robin).abs() / kappa;
    if gap > ROUTE_FAIL {
        return Err(Error::RouteMismatch { first: kappa, second: kappa_robin, gap });
    }
    Ok(tabulate(p, kappa, kappa_robin, f))
}

fn tabulate(p: &AuxProblem, kappa: f64, kappa_robin: f64, f: Vec<f64>) -> Kappa1Result {
    let n = p.grid.len();
    let b2 = p.b * p.b;
    let mut y = vec![0.0; n];
    for c in 0..n - 1 {
        let (a0, a1) = (p.grid[c], p.grid[c + 1]);
        let h = a1 - a0;
        let integral = f[c] * h * (2.0 * a0 + a1) / 6.0 + f[c + 1] * h * (a0 + 2.0 * a1) / 6.0;
        y[c + 1] = y[c] + b2 / p.g_cells[c] * integral;
    }
    let r = y.iter().zip(&f).map(|(y, f)| y / f).collect();
    let residual = (y[n - 1] - kappa * f[n - 1]).abs() / kappa;
    Kappa1Result { kappa, kappa_robin, route: AuxRoute::Schur, grid: p.grid.clone(), f, y, r, residual }
}

/// One row of a homotopy table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomotopyRow {
    pub z: f64,
    pub kappa: f64,
    pub dkappa_formula: f64,
    pub dkappa_fd: f64,
}

/// `κ(z)` for `G_z = (1 − z)G₀ + zG₁` and its derivative two ways.
///
/// The finite difference is central for interior `z` and second-order
/// one-sided at `z = 0` and `z = 1`, so `G_z` never leaves the segment.
pub fn kappa_homotopy(b: f64, a_star: f64, g0: &Weight, g1: &Weight, z_grid: &[f64], n: usize) -> Result<Vec<HomotopyRow>> {
    let grid = graded_grid(a_star, n, GRADING_RATIO);
    let mids: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let c0: Vec<f64> = mids.iter().map(|&a| g0.eval(a)).collect();
    let c1: Vec<f64> = mids.iter().map(|&a| g1.eval(a)).collect();
    if let Some(k) = (0..mids.len()).find(|&k| c1[k] < c0[k]) {
        return Err(Error::WeightOrderViolation(mids[k]));
    }
    let problem = |z: f64| {
        let cells = c0.iter().zip(&c1).map(|(a, b)| (1.0 - z) * a + z * b).collect();
        AuxProblem::with_cells(b, a_star, grid.clone(), cells)
    };
    let kappa_at = |z: f64| -> Result<f64> { Ok(kappa1_direct(&problem(z)?)?.0) };
    z_grid
        .par_iter()
        .map(|&z| {
            if !(0.0..=1.0).contains(&z) {
                return Err(Error::InvalidParameters(format!("homotopy parameter {z} outside [0, 1]")));
            }
            let p = problem(z)?;
            let res = kappa1(&p)?;
            let formula = dkappa_formula(&p, &res, &c0, &c1);
            let h = FD_STEP;
            let fd = if z - h < 0.0 {
                (-3.0 * res.kappa + 4.0 * kappa_at(z + h)? - kappa_at(z + 2.0 * h)?) / (2.0 * h)
            } else if z + h > 1.0 {
                (3.0 * res.kappa - 4.0 * kappa_at(z - h)? + kappa_at(z - 2.0 * h)?) / (2.0 * h)
            } else {
                (kappa_at(z + h)? - kappa_at(z - h)?) / (2.0 * h)
            };
            Ok(HomotopyRow { z, kappa: res.kappa, dkappa_formula: formula, dkappa_fd: fd })
        })
        .collect()
}

/// `∫ (Y² − b²a²X²) δG / (a G_z²) da` by the midpoint rule on cells.
fn dkappa_formula(p: &AuxProblem, res: &Kappa1Result, c0: &[f64], c1: &[f64]) -> f64 {
    let b2 = p.b * p.b;
    (0..p.g_cells.len())
        .map(|c| {
            let (a0, a1) = (p.grid[c], p.grid[c + 1]);
            let h = a1 - a0;
            let am = 0.5 * (a0 + a1);
            let g = p.g_cells[c];
            let dg = c1[c] - c0[c];
            let yc = am * g * (res.f[c + 1] - res.f[c]) / h;
            let xm = 0.5 * (res.f[c] + res.f[c + 1]);
            h * dg / (am * g * g) * (yc * yc - b2 * am * am * xm * xm)
        })
        .sum()
}

/// `κ₁(b, min{G, 4πn})` for each `n`.
pub fn truncation_study(b: f64, g: &Arc<WeightTable>, n_list: &[usize], nodes: usize) -> Result<Vec<(usize, f64)>> {
    n_list
        .par_iter()
        .map(|&n| {
            let p = AuxProblem::new(b, g.a_star, &Weight::Truncated(g.clone(), n), nodes)?;
            Ok((n, kappa1_direct(&p)?.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk_problem(b: f64) -> AuxProblem {
        AuxProblem::new(b, PI, &Weight::four_pi(), DEFAULT_NODES).unwrap()
    }

    #[test]
    fn grid_is_graded_then_uniform() {
        let a = graded_grid(PI, 2000, GRADING_RATIO);
        assert_eq!(a.len(), 2000);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[1999], PI);
        let h: Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
        assert!((h[1] / h[0] - GRADING_RATIO).abs() < 1e-9);
        assert!((h[1500] - h[1000]).abs() < 1e-12);
        assert!(h.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn robin_eigenvalue_signs() {
        let p = disk_problem(1.0);
        assert!(mu_robin_1d(&p, 0.0).unwrap() > 0.0);
        assert!(mu_robin_1d(&p, 100.0).unwrap() < 0.0);
        let (m1, m2) = (mu_robin_1d(&p, 0.2).unwrap(), mu_robin_1d(&p, 0.6).unwrap());
        assert!(m2 < m1);
    }

    #[test]
    fn routes_agree() {
        for b in [0.3, 1.0, 3.0] {
            let r = kappa1(&disk_problem(b)).unwrap();
            assert!(r.route_gap() < ROUTE_TOL, "b = {b}: gap {}", r.route_gap());
            assert!(r.residual < 1e-8);
        }
    }

    #[test]
    fn nonpositive_field_is_rejected() {
        assert!(matches!(AuxProblem::new(0.0, PI, &Weight::four_pi(), 100), Err(Error::NonPositiveForm(_))));
    }

    #[test]
    fn ground_state_and_ratio_bounds() {
        let b = 2.0;
        let r = kappa1(&disk_problem(b)).unwrap();
        let n = r.grid.len();
        for i in 1..n {
            let a = r.grid[i];
            assert!(r.f[i] > 0.0);
            assert!(r.y[i] > r.y[i - 1]);
            assert!(r.r[i] > 0.0 && r.r[i] < b * a);
            assert!(r.r[i] <= b * b * a * a / (8.0 * PI) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn equal_weights_have_flat_homotopy() {
        let rows = kappa_homotopy(1.0, PI, &Weight::four_pi(), &Weight::four_pi(), &[0.0, 0.5, 1.0], 400).unwrap();
        for row in rows {
            assert!(row.dkappa_formula.abs() < 1e-14);
            assert!(row.dkappa_fd.abs() < 1e-10);
        }
    }

    #[test]
    fn reversed_weights_are_rejected() {
        let err = kappa_homotopy(1.0, PI, &Weight::Constant(2.0 * FOUR_PI), &Weight::four_pi(), &[0.5], 200).unwrap_err();
        assert!(matches!(err, Error::WeightOrderViolation(_)));
    }
}
