//! Lowest magnetic Steklov eigenvalue `λ(b, Ω)` on a triangulated domain.
//!
//! The magnetic form `‖(−i∇ − bA)u‖²` is discretized with complex linear
//! elements. Two independent routes are provided: the discrete
//! Dirichlet-to-Neumann map obtained as a Schur complement onto the
//! boundary nodes, and the root of the lowest Robin eigenvalue as a function
//! of the boundary parameter.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::Domain;
use crate::linalg::{lowest_eigenpair, lowest_eigenpair_dense, norm2, CsrMatrix, DenseMatrix, ProfileLdl};
use crate::meshing::{triangulate, Mesh};
use crate::roots::illinois;
use crate::torsion::{solve_torsion, ScalarField};
use crate::{Error, Result};

/// Residual tolerance for the pencil eigensolves.
pub const EIGEN_TOL: f64 = 1e-12;
/// Smallest admissible ratio of boundary-trace norm to full nodal norm.
pub const TRACE_FLOOR: f64 = 1e-8;

type C64 = Complex64;

/// Choice of unit-field vector potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// `A_Ω = (∂₂ψ, −∂₁ψ)` from the torsion function, constant per triangle.
    #[default]
    Torsion,
    /// `A∘(x) = ½(−x₂, x₁)`.
    Symmetric,
}

impl Gauge {
    pub fn label(self) -> &'static str {
        match self {
            Gauge::Torsion => "torsion",
            Gauge::Symmetric => "symmetric",
        }
    }
}

/// Assembled matrices of one magnetic Steklov problem.
#[derive(Debug, Clone)]
pub struct FormSet {
    pub mesh: Arc<Mesh>,
    pub b: f64,
    pub gauge: Gauge,
    /// Hermitian magnetic stiffness.
    pub stiffness: CsrMatrix<C64>,
    /// Consistent mass over the domain.
    pub mass: CsrMatrix<C64>,
    /// Consistent mass over the boundary edges.
    pub boundary_mass: CsrMatrix<C64>,
}

fn symmetric_potential(p: [f64; 2]) -> [f64; 2] {
    [-0.5 * p[1], 0.5 * p[0]]
}

/// Assemble `K`, `M` and `M_∂`. The torsion gauge needs the torsion field
/// computed on the same mesh.
pub fn assemble_forms(mesh: Arc<Mesh>, b: f64, gauge: Gauge, psi: Option<&ScalarField>) -> Result<FormSet> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameters(format!("field strength must be non-negative, got {b}")));
    }
    let potentials: Option<&[[f64; 2]]> = match gauge {
        Gauge::Torsion => {
            let psi = psi.ok_or(Error::MissingTorsionField)?;
            if !Arc::ptr_eq(&psi.mesh, &mesh) && *psi.mesh != *mesh {
                return Err(Error::InvalidParameters("torsion field lives on a different mesh".into()));
            }
            Some(&psi.grads)
        }
        Gauge::Symmetric => None,
    };
    let n = mesh.num_nodes();
    let local: Vec<Vec<(usize, usize, C64, f64)>> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangles[t];
            let e = mesh.element(t);
            let w = e.area / 3.0;
            let mut out = Vec::with_capacity(9);
            // edge-midpoint rule: exact for the quadratic integrands of a constant potential
            let mut k = [[C64::new(0.0, 0.0); 3]; 3];
            for q in 0..3 {
                let phi = {
                    let mut v = [0.5; 3];
                    v[q] = 0.0;
                    v
                };
                let a = match potentials {
                    Some(g) => [g[t][1], -g[t][0]],
                    None => {
                        let (p, r) = (mesh.nodes[tri[(q + 1) % 3]], mesh.nodes[tri[(q + 2) % 3]]);
                        symmetric_potential([0.5 * (p[0] + r[0]), 0.5 * (p[1] + r[1])])
                    }
                };
                let a2 = a[0] * a[0] + a[1] * a[1];
                for i in 0..3 {
                    let ag_i = a[0] * e.grads[i][0] + a[1] * e.grads[i][1];
                    for j in 0..3 {
                        let ag_j = a[0] * e.grads[j][0] + a[1] * e.grads[j][1];
                        let gg = e.grads[i][0] * e.grads[j][0] + e.grads[i][1] * e.grads[j][1];
                        let re = gg + b * b * a2 * phi[i] * phi[j];
                        let im = b * (phi[i] * ag_j - phi[j] * ag_i);
                        k[i][j] += C64::new(re, im) * w;
                    }
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    let m = e.area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 };
                    out.push((tri[i], tri[j], k[i][j], m));
                }
            }
            out
        })
        .collect();
    let flat = || local.iter().flatten();
    let stiffness = CsrMatrix::from_triplets(n, flat().map(|&(i, j, k, _)| (i, j, k)));
    let mass = CsrMatrix::from_triplets(n, flat().map(|&(i, j, _, m)| (i, j, C64::new(m, 0.0))));
    let boundary_mass = CsrMatrix::from_triplets(
        n,
        mesh.boundary.iter().flat_map(|&[p, q]| {
            let l = dist(mesh.nodes[p], mesh.nodes[q]);
            let (d, o) = (C64::new(l / 3.0, 0.0), C64::new(l / 6.0, 0.0));
            [(p, p, d), (q, q, d), (p, q, o), (q, p, o)]
        }),
    );
    Ok(FormSet { mesh, b, gauge, stiffness, mass, boundary_mass })
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl FormSet {
    /// `|∂Ω_h|`, the length of the mesh boundary.
    pub fn boundary_length(&self) -> f64 {
        let one = vec![C64::new(1.0, 0.0); self.mesh.num_nodes()];
        self.boundary_mass.quadratic_form(&one)
    }

    /// Form value of the constant function, `b²∫|A|²`.
    pub fn constant_energy(&self) -> f64 {
        let one = vec![C64::new(1.0, 0.0); self.mesh.num_nodes()];
        self.stiffness.quadratic_form(&one)
    }

    /// Rayleigh quotient `⟨Ku, u⟩ / ⟨M_∂u, u⟩`.
    pub fn steklov_quotient(&self, u: &[C64]) -> f64 {
        self.stiffness.quadratic_form(u) / self.boundary_mass.quadratic_form(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralRoute {
    Dtn,
    RobinRoot,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub lambda: f64,
    #[serde(skip)]
    pub eigenfunction: Vec<C64>,
    pub route: SpectralRoute,
    pub h: f64,
    pub nodes: usize,
    /// Richardson estimate when a coarser level is available.
    pub error_estimate: Option<f64>,
    /// `‖u|_∂‖ / ‖u‖` over nodal values.
    pub trace_fraction: f64,
}

/// Fixes the phase so the entry of largest modulus is real and positive,
/// and scales to unit boundary mass.
fn normalize(u: &mut [C64], mb: &CsrMatrix<C64>) {
    let (_, big) = u.iter().enumerate().fold((0.0, C64::new(1.0, 0.0)), |acc, (_, v)| {
        if v.norm() > acc.0 {
            (v.norm(), *v)
        } else {
            acc
        }
    });
    let phase = big.conj() / big.norm();
    let s = mb.quadratic_form(u).sqrt();
    for v in u.iter_mut() {
        *v = *v * phase / s;
    }
}

fn finish(fs: &FormSet, lambda: f64, mut u: Vec<C64>, route: SpectralRoute) -> Result<SpectralResult> {
    if !(lambda > 0.0) {
        return Err(Error::SolverFailure(format!("non-positive Steklov value {lambda}")));
    }
    normalize(&mut u, &fs.boundary_mass);
    let full = norm2(&u);
    let trace = fs.mesh.is_boundary.iter().zip(&u).filter(|(b, _)| **b).map(|(_, v)| v.norm_sqr()).sum::<f64>().sqrt();
    let trace_fraction = trace / full;
    if !(trace_fraction >= TRACE_FLOOR) {
        return Err(Error::SolverFailure(format!("eigenfunction trace fraction {trace_fraction:e}")));
    }
    Ok(SpectralResult {
        lambda,
        eigenfunction: u,
        route,
        h: fs.mesh.h,
        nodes: fs.mesh.num_nodes(),
        error_estimate: None,
        trace_fraction,
    })
}

fn split_nodes(mesh: &Mesh) -> (Vec<usize>, Vec<usize>) {
    (0..mesh.num_nodes()).partition(|&i| mesh.is_boundary[i])
}

/// Discrete Dirichlet-to-Neumann route: `S = K_ΓΓ − K_ΓI K_II⁻¹ K_IΓ`,
/// lowest eigenvalue of `(S, M_∂ΓΓ)`, harmonic extension of the eigenvector.
pub fn lambda_dtn(fs: &FormSet) -> Result<SpectralResult> {
    let (bnd, int) = split_nodes(&fs.mesh);
    let kii = ProfileLdl::factor(&fs.stiffness.principal(&int)).map_err(|_| Error::InteriorSolveFailure)?;
    if !kii.is_positive_definite() {
        return Err(Error::InteriorSolveFailure);
    }
    let k_ig = fs.stiffness.block(&int, &bnd);
    let k_gi = fs.stiffness.block(&bnd, &int);
    let nb = bnd.len();
    let columns: Vec<Vec<C64>> = (0..nb)
        .into_par_iter()
        .map(|j| {
            let x = kii.solve(&k_ig.column(j));
            let kx = k_gi.apply(&x);
            (0..nb).map(|i| fs.stiffness.get(bnd[i], bnd[j]) - kx[i]).collect()
        })
        .collect();
    let mut s = DenseMatrix::zeros(nb);
    let mut mg = DenseMatrix::zeros(nb);
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            s.set(i, j, *v);
            mg.set(i, j, fs.boundary_mass.get(bnd[i], bnd[j]));
        }
    }
    s.hermitize();
    let pair = lowest_eigenpair_dense(&s, &mg, vec![C64::new(1.0, 0.0); nb], EIGEN_TOL)?;
    let interior = kii.solve(&k_ig.apply(&pair.vector));
    let mut u = vec![C64::new(0.0, 0.0); fs.mesh.num_nodes()];
    for (k, &i) in bnd.iter().enumerate() {
        u[i] = pair.vector[k];
    }
    for (k, &i) in int.iter().enumerate() {
        u[i] = -interior[k];
    }
    finish(fs, pair.value, u, SpectralRoute::Dtn)
}

/// Lowest eigenvalue of `(K + βM_∂, M)` with its eigenvector.
pub fn mu_robin(fs: &FormSet, beta: f64, start: Option<Vec<C64>>) -> Result<(f64, Vec<C64>)> {
    let a = CsrMatrix::combine(&[(&fs.stiffness, 1.0), (&fs.boundary_mass, beta)]);
    let start = start.unwrap_or_else(|| vec![C64::new(1.0, 0.0); fs.mesh.num_nodes()]);
    let pair = lowest_eigenpair(&a, &fs.mass, start, EIGEN_TOL)?;
    Ok((pair.value, pair.vector))
}

/// Robin route: `λ = −β⋆` where the lowest Robin eigenvalue vanishes. The
/// bracket is `[1.05 β_c, 0]` with `β_c` the parameter at which the constant
/// function has zero Robin quotient.
pub fn lambda_robin_root(fs: &FormSet) -> Result<SpectralResult> {
    let beta_c = -fs.constant_energy() / fs.boundary_length();
    let mu = |beta: f64| mu_robin(fs, beta, None).map(|(m, _)| m);
    let top = (0.0, mu(0.0)?);
    let bottom_beta = if beta_c < 0.0 { 1.05 * beta_c } else { -1e-3 };
    let bottom = (bottom_beta, mu(bottom_beta)?);
    if !(top.1 > 0.0 && bottom.1 < 0.0) {
        return Err(Error::BracketFailure(format!("Robin samples {bottom:?}, {top:?} do not change sign")));
    }
    let beta_star = illinois(mu, bottom, top, 1e-12)?;
    let (_, u) = mu_robin(fs, beta_star, None)?;
    finish(fs, -beta_star, u, SpectralRoute::RobinRoot)
}

/// `(extrapolated, error estimate)` from two levels of a method of order `p`
/// with mesh ratio 2.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> (f64, f64) {
    let d = (fine - coarse) / (2f64.powf(order) - 1.0);
    (fine + d, d.abs())
}

/// One level of a refinement study.
#[derive(Debug, Clone, Serialize)]
pub struct LevelResult {
    pub h: f64,
    pub nodes: usize,
    pub lambda: f64,
}

/// Mesh hierarchy solve with a Richardson estimate on the finest level.
#[derive(Debug, Clone, Serialize)]
pub struct SteklovStudy {
    pub b: f64,
    pub gauge: Gauge,
    pub route: SpectralRoute,
    pub levels: Vec<LevelResult>,
    pub finest: SpectralResult,
    pub extrapolated: f64,
    #[serde(skip)]
    pub mesh: Arc<Mesh>,
}

/// Solve `λ(b, Ω)` on `refinements + 1` nested meshes starting at size `h`.
pub fn steklov_study(d: &Domain, b: f64, h: f64, refinements: usize, gauge: Gauge, route: SpectralRoute) -> Result<SteklovStudy> {
    let mut mesh = triangulate(d, h, 0)?;
    let mut levels = Vec::new();
    let mut last: Option<(SpectralResult, Arc<Mesh>)> = None;
    for level in 0..=refinements {
        if level > 0 {
            mesh = mesh.refine(d);
        }
        let m = Arc::new(mesh.clone());
        let (r, _) = solve_on_mesh(m.clone(), b, gauge, route)?;
        levels.push(LevelResult { h: m.h, nodes: m.num_nodes(), lambda: r.lambda });
        last = Some((r, m));
    }
    let (mut finest, mesh) = last.expect("at least one level");
    let extrapolated = if levels.len() >= 2 {
        let n = levels.len();
        let (x, e) = richardson(levels[n - 2].lambda, levels[n - 1].lambda, 2.0);
        finest.error_estimate = Some(e);
        x
    } else {
        finest.lambda
    };
    Ok(SteklovStudy { b, gauge, route, levels, finest, extrapolated, mesh })
}

/// Assemble and solve on one mesh; returns the torsion field when computed.
pub fn solve_on_mesh(mesh: Arc<Mesh>, b: f64, gauge: Gauge, route: SpectralRoute) -> Result<(SpectralResult, Option<ScalarField>)> {
    let psi = match gauge {
        Gauge::Torsion => Some(solve_torsion(mesh.clone())?),
        Gauge::Symmetric => None,
    };
    let fs = assemble_forms(mesh, b, gauge, psi.as_ref())?;
    let r = match route {
        SpectralRoute::Dtn => lambda_dtn(&fs)?,
        SpectralRoute::RobinRoot => lambda_robin_root(&fs)?,
    };
    Ok((r, psi))
}
