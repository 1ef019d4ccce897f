//! Torsion function `−Δψ = 1, ψ|∂Ω = 0`, the gauge field `A_Ω = (∂₂ψ, −∂₁ψ)`
//! and the level-set statistics behind the weight `G_Ω`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::linalg::{CsrMatrix, ProfileLdl};
use crate::meshing::Mesh;
use crate::{Error, Result};

pub const FOUR_PI: f64 = 4.0 * PI;
/// Relative tolerance on `G ≥ 4π` at default resolution.
pub const DEFAULT_TOL_MESH: f64 = 0.02;
pub const DEFAULT_LEVELS: usize = 128;

/// Piecewise-linear nodal field with per-triangle gradients.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

/// Per-triangle constant vector field.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub mesh: Arc<Mesh>,
    pub values: Vec<[f64; 2]>,
}

impl ScalarField {
    pub fn from_values(mesh: Arc<Mesh>, values: Vec<f64>) -> Self {
        let grads = (0..mesh.triangles.len())
            .map(|t| {
                let e = mesh.element(t);
                let tri = mesh.triangles[t];
                let mut g = [0.0; 2];
                for k in 0..3 {
                    g[0] += values[tri[k]] * e.grads[k][0];
                    g[1] += values[tri[k]] * e.grads[k][1];
                }
                g
            })
            .collect();
        ScalarField { mesh, values, grads }
    }

    /// Largest nodal value `t⋆`.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫|∇ψ|²`.
    pub fn energy(&self) -> f64 {
        self.grads
            .iter()
            .enumerate()
            .map(|(t, g)| self.mesh.signed_area(t) * (g[0] * g[0] + g[1] * g[1]))
            .sum()
    }

    /// `∫ψ`.
    pub fn integral(&self) -> f64 {
        self.mesh
            .triangles
            .iter()
            .enumerate()
            .map(|(t, tri)| self.mesh.signed_area(t) * tri.iter().map(|&i| self.values[i]).sum::<f64>() / 3.0)
            .sum()
    }
}

/// Linear-element solution of the torsion problem.
pub fn solve_torsion(mesh: Arc<Mesh>) -> Result<ScalarField> {
    let n = mesh.num_nodes();
    let mut index = vec![usize::MAX; n];
    let mut interior = Vec::new();
    for i in 0..n {
        if !mesh.is_boundary[i] {
            index[i] = interior.len();
            interior.push(i);
        }
    }
    if interior.is_empty() {
        return Err(Error::SolverFailure("mesh has no interior nodes".into()));
    }
    let mut triplets = Vec::with_capacity(9 * mesh.triangles.len());
    let mut rhs = vec![0.0; interior.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let e = mesh.element(t);
        for a in 0..3 {
            let ia = index[tri[a]];
            if ia == usize::MAX {
                continue;
            }
            rhs[ia] += e.area / 3.0;
            for b in 0..3 {
                let ib = index[tri[b]];
                if ib != usize::MAX {
                    let k = e.area * (e.grads[a][0] * e.grads[b][0] + e.grads[a][1] * e.grads[b][1]);
                    triplets.push((ia, ib, k));
                }
            }
        }
    }
    let k = CsrMatrix::from_triplets(interior.len(), triplets);
    let ldl = ProfileLdl::factor(&k)?;
    if !ldl.is_positive_definite() {
        return Err(Error::SolverFailure("torsion stiffness matrix is not positive definite".into()));
    }
    let mut x = ldl.solve(&rhs);
    let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..3 {
        let kx = k.apply(&x);
        let r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, y)| b - y).collect();
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-12 * bnorm {
            break;
        }
        let dx = ldl.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
    }
    let mut values = vec![0.0; n];
    for (k, &i) in interior.iter().enumerate() {
        values[i] = x[k];
    }
    if let Some(&i) = interior.iter().find(|&&i| !(values[i] > 0.0)) {
        return Err(Error::SolverFailure(format!("torsion value {} at interior node {i} is not positive", values[i])));
    }
    Ok(ScalarField::from_values(mesh, values))
}

/// `A_Ω = (∂₂ψ, −∂₁ψ)` per triangle.
pub fn vector_potential(psi: &ScalarField) -> VectorField {
    VectorField { mesh: psi.mesh.clone(), values: psi.grads.iter().map(|g| [g[1], -g[0]]).collect() }
}

/// Superlevel areas `μ(t)` and contour integrals `γ(t) = ∫_{ψ=t} |∇ψ|⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    pub t: Vec<f64>,
    pub mu: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Centered difference `−dμ/dt`; the end levels use one-sided differences.
    pub gamma_fd: Vec<f64>,
    pub t_star: f64,
    /// `μ(0)`, the mesh area.
    pub area: f64,
}

impl LevelTable {
    /// Largest `|γ + dμ/dt| / γ` over interior levels.
    pub fn coarea_gap(&self) -> f64 {
        let n = self.t.len();
        (1..n - 1).map(|j| (self.gamma[j] - self.gamma_fd[j]).abs() / self.gamma[j]).fold(0.0, f64::max)
    }
}

/// Area of `{ψ > t}` and contribution to `γ(t)` of one triangle.
fn triangle_level(area: f64, vals: [f64; 3], pts: [[f64; 2]; 3], grad: f64, t: f64) -> (f64, f64) {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let [v0, v1, v2] = idx.map(|k| vals[k]);
    let [p0, p1, p2] = idx.map(|k| pts[k]);
    if t <= v0 {
        return (area, 0.0);
    }
    if t >= v2 {
        return (0.0, 0.0);
    }
    let lerp = |p: [f64; 2], q: [f64; 2], a: f64, b: f64| {
        let s = (t - a) / (b - a);
        [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
    };
    let x02 = lerp(p0, p2, v0, v2);
    let (mu, other) = if t <= v1 {
        (area * (1.0 - (t - v0).powi(2) / ((v1 - v0) * (v2 - v0))), lerp(p0, p1, v0, v1))
    } else {
        (area * (v2 - t).powi(2) / ((v2 - v0) * (v2 - v1)), lerp(p1, p2, v1, v2))
    };
    let len = (x02[0] - other[0]).hypot(x02[1] - other[1]);
    (mu, len / grad)
}

fn level_sums(psi: &ScalarField, t: f64) -> (f64, f64) {
    let m = &psi.mesh;
    let mut mu = 0.0;
    let mut gamma = 0.0;
    for (k, tri) in m.triangles.iter().enumerate() {
        let g = psi.grads[k];
        let (a, c) = triangle_level(m.signed_area(k), tri.map(|i| psi.values[i]), tri.map(|i| m.nodes[i]), g[0].hypot(g[1]), t);
        mu += a;
        gamma += c;
    }
    (mu, gamma)
}

/// Level statistics on `n_levels` uniform levels in `[δ, t⋆ − δ]`, `δ = t⋆/(4·n_levels)`.
pub fn level_statistics(psi: &ScalarField, n_levels: usize) -> Result<LevelTable> {
    if n_levels < 16 {
        return Err(Error::InvalidParameters(format!("need at least 16 levels, got {n_levels}")));
    }
    let t_star = psi.max();
    let delta = t_star / (4.0 * n_levels as f64);
    let levels: Vec<f64> = (0..n_levels)
        .map(|j| delta + (t_star - 2.0 * delta) * j as f64 / (n_levels - 1) as f64)
        .collect();
    let stats: Vec<(f64, f64, f64)> = levels
        .par_iter()
        .map(|&t0| {
            // a level through a vertex is measure-zero but breaks the contour walk
            let mut t = t0;
            for _ in 0..16 {
                if !psi.values.contains(&t) {
                    break;
                }
                t += 1e-12 * t_star;
            }
            let (mu, gamma) = level_sums(psi, t);
            (t, mu, gamma)
        })
        .collect();
    let t: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let mu: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let gamma: Vec<f64> = stats.iter().map(|s| s.2).collect();
    if let Some(j) = gamma.iter().position(|g| !(*g > 0.0)) {
        return Err(Error::DegenerateLevel(t[j]));
    }
    let n = t.len();
    let gamma_fd = (0..n)
        .map(|j| {
            let (a, b) = (j.saturating_sub(1), (j + 1).min(n - 1));
            -(mu[b] - mu[a]) / (t[b] - t[a])
        })
        .collect();
    Ok(LevelTable { t, mu, gamma, gamma_fd, t_star, area: psi.mesh.area() })
}

/// Sampled weight `a ↦ G_Ω(a)` on `(0, a⋆]` with monotone cubic interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    /// Increasing, ending at `a⋆`.
    pub a: Vec<f64>,
    pub g: Vec<f64>,
    pub a_star: f64,
    /// Smallest raw value before clamping to `4π`.
    pub raw_min: f64,
    /// Number of samples lifted to `4π`.
    pub clamped: usize,
    slopes: Vec<f64>,
}

/// Reparametrize a level table by `a = μ(t)`.
pub fn weight_function(lt: &LevelTable, tol_mesh: f64) -> Result<WeightTable> {
    let n = lt.t.len();
    if lt.mu.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::NonMonotoneMu);
    }
    // γ at t = 0 by linear extrapolation from the first two levels
    let (t0, t1) = (lt.t[0], lt.t[1]);
    let g_end = lt.gamma[0] - t0 * (lt.gamma[1] - lt.gamma[0]) / (t1 - t0);
    let mut a: Vec<f64> = lt.mu.iter().rev().copied().collect();
    let mut g: Vec<f64> = lt.gamma.iter().rev().copied().collect();
    if !(lt.area > a[n - 1]) {
        return Err(Error::NonMonotoneMu);
    }
    a.push(lt.area);
    g.push(g_end);
    let raw_min = g.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = FOUR_PI * (1.0 - tol_mesh);
    let mut clamped = 0;
    for (ai, gi) in a.iter().zip(g.iter_mut()) {
        if *gi < floor {
            return Err(Error::WeightBelowBound { a: *ai, value: *gi });
        }
        if *gi < FOUR_PI {
            *gi = FOUR_PI;
            clamped += 1;
        }
    }
    let slopes = pchip_slopes(&a, &g);
    Ok(WeightTable { a_star: lt.area, a, g, raw_min, clamped, slopes })
}

impl WeightTable {
    /// Table for the constant weight `g` sampled on `n` points.
    pub fn constant(a_star: f64, g: f64, n: usize) -> Self {
        let a: Vec<f64> = (1..=n).map(|k| a_star * k as f64 / n as f64).collect();
        let gv = vec![g; n];
        let slopes = vec![0.0; n];
        WeightTable { a, g: gv, a_star, raw_min: g, clamped: 0, slopes }
    }

    /// Monotone cubic interpolant; constant beyond the sampled range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.a.len();
        if x <= self.a[0] {
            return self.g[0];
        }
        if x >= self.a[n - 1] {
            return self.g[n - 1];
        }
        let k = self.a.partition_point(|&v| v <= x) - 1;
        let (x0, x1) = (self.a[k], self.a[k + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1, d0, d1) = (self.g[k], self.g[k + 1], self.slopes[k], self.slopes[k + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s).powi(2);
        let h10 = s * (1.0 - s).powi(2);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    /// `G_n = min{G, 4πn}`.
    pub fn eval_truncated(&self, x: f64, n: usize) -> f64 {
        self.eval(x).min(FOUR_PI * n as f64)
    }

    pub fn min(&self) -> f64 {
        self.g.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.g.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `G(a⋆)`.
    pub fn endpoint(&self) -> f64 {
        *self.g.last().unwrap()
    }
}

/// Fritsch-Carlson derivative estimates.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![del[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    let end = |h0: f64, h1: f64, m0: f64, m1: f64| {
        let mut s = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if s * m0 <= 0.0 {
            s = 0.0;
        } else if m0 * m1 <= 0.0 && s.abs() > 3.0 * m0.abs() {
            s = 3.0 * m0;
        }
        s
    };
    d[0] = end(h[0], h[1], del[0], del[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

/// Mesh, torsion field and weight for one domain.
#[derive(Debug, Clone)]
pub struct TorsionRun {
    pub psi: ScalarField,
    pub levels: LevelTable,
    pub weight: WeightTable,
}

pub fn torsion_run(mesh: Arc<Mesh>, n_levels: usize, tol_mesh: f64) -> Result<TorsionRun> {
    let psi = solve_torsion(mesh)?;
    let levels = level_statistics(&psi, n_levels)?;
    let weight = weight_function(&levels, tol_mesh)?;
    Ok(TorsionRun { psi, levels, weight })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainSpec};
    use crate::meshing::triangulate;

    fn disk_field(h: f64) -> ScalarField {
        let d = build_domain(&DomainSpec::disk(1.0)).unwrap();
        solve_torsion(Arc::new(triangulate(&d, h, 0).unwrap())).unwrap()
    }

    #[test]
    fn disk_peak_and_green_identity() {
        let psi = disk_field(0.05);
        assert!((psi.max() - 0.25).abs() < 2e-3);
        let (e, i) = (psi.energy(), psi.integral());
        assert!((e - i).abs() < 1e-10 * i);
        assert!(psi.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn gauge_field_is_rotated_gradient() {
        let psi = disk_field(0.1);
        let a = vector_potential(&psi);
        for (g, v) in psi.grads.iter().zip(&a.values) {
            assert_eq!(v[0], g[1]);
            assert_eq!(v[1], -g[0]);
        }
    }

    #[test]
    fn triangle_level_pieces() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let vals = [0.0, 1.0, 0.0];
        // ψ = x, superlevel {x > t} has area (1 − t)²/2
        for t in [0.1, 0.5, 0.9] {
            let (mu, g) = triangle_level(0.5, vals, pts, 1.0, t);
            assert!((mu - 0.5 * (1.0 - t) * (1.0 - t)).abs() < 1e-15);
            assert!((g - (1.0 - t)).abs() < 1e-15);
        }
    }

    #[test]
    fn pchip_preserves_monotone_data() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.1, 0.2, 3.0, 3.1];
        let d = pchip_slopes(&x, &y);
        let wt = WeightTable { a: x.to_vec(), g: y.to_vec(), a_star: 4.0, raw_min: 0.0, clamped: 0, slopes: d };
        let mut prev = -1.0;
        for k in 0..=400 {
            let v = wt.eval(4.0 * k as f64 / 400.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}
