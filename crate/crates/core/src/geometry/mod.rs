//! Planar domains: parametric families and polygons, their metrics, symmetry and
//! outer parallel curves.

mod contour;
mod offset;
pub mod polyline;

pub use contour::{marching_squares, GridField};
pub use offset::{offset_curve, OffsetCurve, OffsetMethod, OffsetOptions};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::quadrature::{adaptive, GaussRule};
use crate::{Error, Result};

pub type Point = [f64; 2];

pub const DEFAULT_RESOLUTION: usize = 512;
/// Largest tangent turn across one boundary segment of a smooth domain.
pub const MAX_TURN: f64 = 0.3;
const SYMMETRY_TOL: f64 = 1e-10;

/// Declared or detected symmetry class of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    #[default]
    None,
    Central,
    TwoAxes,
    FullRotational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Disk,
    Ellipse,
    Rectangle,
    RegularPolygon,
    PerturbedDisk,
    Polygon,
}

/// Parameters of a domain as they appear in JSON input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Shape {
    Disk {
        params: DiskParams,
    },
    Ellipse {
        params: EllipseParams,
    },
    Rectangle {
        params: RectangleParams,
    },
    RegularPolygon {
        params: RegularPolygonParams,
    },
    PerturbedDisk {
        params: PerturbedDiskParams,
    },
    Polygon {
        vertices: Vec<Point>,
        #[serde(default)]
        symmetry: Symmetry,
        /// Axis directions in radians through `center`, used to verify a two-axes declaration.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        axes: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskParams {
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangleParams {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularPolygonParams {
    pub sides: usize,
    pub circumradius: f64,
}

/// `r(θ) = scale · (1 + eps · cos(kθ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedDiskParams {
    pub eps: f64,
    pub k: u32,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

/// Rescale a domain so that its area or perimeter takes a given value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Area(f64),
    Perimeter(f64),
}

/// Full JSON description of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub center: Point,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<Normalization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

impl DomainSpec {
    pub fn new(shape: Shape) -> Self {
        DomainSpec { shape, center: [0.0, 0.0], normalize: None, resolution: None }
    }

    pub fn disk(radius: f64) -> Self {
        Self::new(Shape::Disk { params: DiskParams { radius } })
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::new(Shape::Ellipse { params: EllipseParams { a, b } })
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        Self::new(Shape::Rectangle { params: RectangleParams { width, height } })
    }

    pub fn regular_polygon(sides: usize, circumradius: f64) -> Self {
        Self::new(Shape::RegularPolygon { params: RegularPolygonParams { sides, circumradius } })
    }

    pub fn perturbed_disk(eps: f64, k: u32) -> Self {
        Self::new(Shape::PerturbedDisk { params: PerturbedDiskParams { eps, k, scale: 1.0 } })
    }

    pub fn polygon(vertices: Vec<Point>, symmetry: Symmetry) -> Self {
        Self::new(Shape::Polygon { vertices, symmetry, axes: Vec::new() })
    }

    pub fn with_center(mut self, center: Point) -> Self {
        self.center = center;
        self
    }

    pub fn normalized(mut self, n: Normalization) -> Self {
        self.normalize = Some(n);
        self
    }

    pub fn family(&self) -> Family {
        match self.shape {
            Shape::Disk { .. } => Family::Disk,
            Shape::Ellipse { .. } => Family::Ellipse,
            Shape::Rectangle { .. } => Family::Rectangle,
            Shape::RegularPolygon { .. } => Family::RegularPolygon,
            Shape::PerturbedDisk { .. } => Family::PerturbedDisk,
            Shape::Polygon { .. } => Family::Polygon,
        }
    }

    /// Short label such as `ellipse(a=1.2,b=0.8333)`.
    pub fn label(&self) -> String {
        match &self.shape {
            Shape::Disk { params } => format!("disk(R={})", params.radius),
            Shape::Ellipse { params } => format!("ellipse(a={},b={})", params.a, params.b),
            Shape::Rectangle { params } => format!("rectangle({}x{})", params.width, params.height),
            Shape::RegularPolygon { params } => {
                format!("regular-polygon(n={},R={})", params.sides, params.circumradius)
            }
            Shape::PerturbedDisk { params } => {
                format!("perturbed-disk(eps={},k={},scale={})", params.eps, params.k, params.scale)
            }
            Shape::Polygon { vertices, .. } => format!("polygon({} vertices)", vertices.len()),
        }
    }
}

/// Area, perimeter and shape descriptors of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainMetrics {
    pub area: f64,
    pub perimeter: f64,
    pub centroid: Point,
    pub convex: bool,
    pub symmetry: Symmetry,
}

impl DomainMetrics {
    /// `perimeter² − 4π·area`.
    pub fn isoperimetric_deficit(&self) -> f64 {
        self.perimeter * self.perimeter - 4.0 * PI * self.area
    }

    /// Radius of the disk with the same area.
    pub fn area_radius(&self) -> f64 {
        (self.area / PI).sqrt()
    }

    /// Radius of the disk with the same perimeter.
    pub fn perimeter_radius(&self) -> f64 {
        self.perimeter / TAU
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Boundary {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Perturbed { eps: f64, k: u32, scale: f64 },
    Polygon { vertices: Vec<Point> },
}

/// A validated domain with cached metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    spec: DomainSpec,
    boundary: Boundary,
    center: Point,
    resolution: usize,
    metrics: DomainMetrics,
}

/// Validate a domain description and compute its metrics.
pub fn build_domain(spec: &DomainSpec) -> Result<Domain> {
    let mut spec = spec.clone();
    if let Some(norm) = spec.normalize.take() {
        let raw = build_domain(&spec)?;
        let m = raw.metrics();
        let s = match norm {
            Normalization::Area(a) => {
                positive("normalized area", a)?;
                (a / m.area).sqrt()
            }
            Normalization::Perimeter(l) => {
                positive("normalized perimeter", l)?;
                l / m.perimeter
            }
        };
        spec = scale_spec(&spec, s);
    }
    let resolution = spec.resolution.unwrap_or(DEFAULT_RESOLUTION);
    if resolution < 16 {
        return Err(Error::InvalidParameters(format!("boundary resolution {resolution} below 16")));
    }
    let c = spec.center;
    if !(c[0].is_finite() && c[1].is_finite()) {
        return Err(Error::InvalidParameters("center must be finite".into()));
    }
    let (boundary, declared) = match &spec.shape {
        Shape::Disk { params } => {
            positive("radius", params.radius)?;
            (Boundary::Circle { radius: params.radius }, Symmetry::FullRotational)
        }
        Shape::Ellipse { params } => {
            positive("semi-axis a", params.a)?;
            positive("semi-axis b", params.b)?;
            let sym = if params.a == params.b { Symmetry::FullRotational } else { Symmetry::TwoAxes };
            (Boundary::Ellipse { a: params.a, b: params.b }, sym)
        }
        Shape::Rectangle { params } => {
            positive("width", params.width)?;
            positive("height", params.height)?;
            let (w, h) = (0.5 * params.width, 0.5 * params.height);
            let vertices = [[-w, -h], [w, -h], [w, h], [-w, h]].iter().map(|p| add(*p, c)).collect();
            (Boundary::Polygon { vertices }, Symmetry::TwoAxes)
        }
        Shape::RegularPolygon { params } => {
            if params.sides < 3 {
                return Err(Error::InvalidParameters(format!("regular polygon needs at least 3 sides, got {}", params.sides)));
            }
            positive("circumradius", params.circumradius)?;
            let n = params.sides;
            let vertices = (0..n)
                .map(|j| {
                    let a = TAU * j as f64 / n as f64;
                    add([params.circumradius * a.cos(), params.circumradius * a.sin()], c)
                })
                .collect();
            (Boundary::Polygon { vertices }, Symmetry::TwoAxes)
        }
        Shape::PerturbedDisk { params } => {
            positive("scale", params.scale)?;
            if params.k == 0 {
                return Err(Error::InvalidParameters("perturbation frequency k must be at least 1".into()));
            }
            let bound = 1.0 / (1.0 + (params.k as f64).powi(2));
            if !(params.eps.abs() < bound) {
                return Err(Error::InvalidParameters(format!(
                    "perturbation amplitude |eps| = {} must be below 1/(1+k^2) = {bound}",
                    params.eps.abs()
                )));
            }
            let sym = if params.eps == 0.0 {
                Symmetry::FullRotational
            } else if params.k >= 2 {
                Symmetry::TwoAxes
            } else {
                Symmetry::None
            };
            (Boundary::Perturbed { eps: params.eps, k: params.k, scale: params.scale }, sym)
        }
        Shape::Polygon { vertices, symmetry, .. } => {
            if vertices.len() < 3 {
                return Err(Error::InvalidParameters("polygon needs at least 3 vertices".into()));
            }
            if vertices.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
                return Err(Error::InvalidParameters("polygon vertices must be finite".into()));
            }
            let mut v = vertices.clone();
            if polyline::signed_area(&v) < 0.0 {
                v.reverse();
            }
            (Boundary::Polygon { vertices: v }, *symmetry)
        }
    };
    let mut domain = Domain {
        spec,
        boundary,
        center: c,
        resolution,
        metrics: DomainMetrics { area: 0.0, perimeter: 0.0, centroid: c, convex: false, symmetry: Symmetry::None },
    };
    let samples = domain.sample_boundary(domain.resolution.max(64));
    if polyline::self_intersects(&samples) {
        return Err(Error::SelfIntersecting);
    }
    domain.metrics = domain.compute_metrics(declared)?;
    if !(domain.metrics.area > 0.0) {
        return Err(Error::InvalidParameters("domain has zero area".into()));
    }
    let deficit = domain.metrics.isoperimetric_deficit();
    if deficit < -1e-10 * domain.metrics.perimeter.powi(2) {
        return Err(Error::InvalidParameters(format!("isoperimetric deficit {deficit} is negative")));
    }
    Ok(domain)
}

/// Metrics of a validated domain.
pub fn domain_metrics(d: &Domain) -> DomainMetrics {
    d.metrics
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} must be positive and finite, got {v}")))
    }
}

fn scale_spec(spec: &DomainSpec, s: f64) -> DomainSpec {
    let c = spec.center;
    let shape = match &spec.shape {
        Shape::Disk { params } => Shape::Disk { params: DiskParams { radius: params.radius * s } },
        Shape::Ellipse { params } => Shape::Ellipse { params: EllipseParams { a: params.a * s, b: params.b * s } },
        Shape::Rectangle { params } => {
            Shape::Rectangle { params: RectangleParams { width: params.width * s, height: params.height * s } }
        }
        Shape::RegularPolygon { params } => Shape::RegularPolygon {
            params: RegularPolygonParams { sides: params.sides, circumradius: params.circumradius * s },
        },
        Shape::PerturbedDisk { params } => Shape::PerturbedDisk {
            params: PerturbedDiskParams { scale: params.scale * s, ..*params },
        },
        Shape::Polygon { vertices, symmetry, axes } => Shape::Polygon {
            vertices: vertices.iter().map(|p| [c[0] + s * (p[0] - c[0]), c[1] + s * (p[1] - c[1])]).collect(),
            symmetry: *symmetry,
            axes: axes.clone(),
        },
    };
    DomainSpec { shape, ..spec.clone() }
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

/// Exact boundary point and derivatives at parameter `θ` of a smooth boundary.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub x: Point,
    pub dx: Point,
    pub ddx: Point,
}

impl CurvePoint {
    pub fn speed(&self) -> f64 {
        self.dx[0].hypot(self.dx[1])
    }

    /// Outward unit normal for a counterclockwise curve.
    pub fn normal(&self) -> Point {
        let s = self.speed();
        [self.dx[1] / s, -self.dx[0] / s]
    }

    /// Signed curvature, positive where the curve is convex.
    pub fn curvature(&self) -> f64 {
        (self.dx[0] * self.ddx[1] - self.dx[1] * self.ddx[0]) / self.speed().powi(3)
    }
}

impl Domain {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family()
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn metrics(&self) -> DomainMetrics {
        self.metrics
    }

    pub fn label(&self) -> String {
        self.spec.label()
    }

    /// Copy with a different boundary sampling resolution.
    pub fn with_resolution(&self, resolution: usize) -> Domain {
        Domain { resolution: resolution.max(16), ..self.clone() }
    }

    /// Counterclockwise vertex list for polygonal families.
    pub fn polygon_vertices(&self) -> Option<&[Point]> {
        match &self.boundary {
            Boundary::Polygon { vertices } => Some(vertices),
            _ => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.polygon_vertices().is_none()
    }

    /// Evaluate a smooth boundary at parameter `θ ∈ [0, 2π)`; `None` for polygons.
    pub fn curve(&self, theta: f64) -> Option<CurvePoint> {
        let c = self.center;
        let (s, co) = theta.sin_cos();
        let p = match self.boundary {
            Boundary::Circle { radius: r } => CurvePoint {
                x: [c[0] + r * co, c[1] + r * s],
                dx: [-r * s, r * co],
                ddx: [-r * co, -r * s],
            },
            Boundary::Ellipse { a, b } => CurvePoint {
                x: [c[0] + a * co, c[1] + b * s],
                dx: [-a * s, b * co],
                ddx: [-a * co, -b * s],
            },
            Boundary::Perturbed { eps, k, scale } => {
                let kf = k as f64;
                let (sk, ck) = (kf * theta).sin_cos();
                let r = scale * (1.0 + eps * ck);
                let dr = -scale * eps * kf * sk;
                let ddr = -scale * eps * kf * kf * ck;
                CurvePoint {
                    x: [c[0] + r * co, c[1] + r * s],
                    dx: [dr * co - r * s, dr * s + r * co],
                    ddx: [ddr * co - 2.0 * dr * s - r * co, ddr * s + 2.0 * dr * co - r * s],
                }
            }
            Boundary::Polygon { .. } => return None,
        };
        Some(p)
    }

    /// `n` counterclockwise boundary samples.
    ///
    /// Smooth boundaries are sampled uniformly in the curve parameter, polygons
    /// by arc length with every vertex included.
    pub fn sample_boundary(&self, n: usize) -> Vec<Point> {
        match &self.boundary {
            Boundary::Polygon { vertices } => {
                let per = polyline::perimeter(vertices);
                polyline::resample_closed(vertices, per / n as f64)
            }
            _ => (0..n).map(|j| self.curve(TAU * j as f64 / n as f64).unwrap().x).collect(),
        }
    }

    /// Counterclockwise boundary nodes with spacing at most `h`, equally spaced in
    /// arc length on each smooth piece. Smooth boundaries are further refined so
    /// that no segment turns by more than [`MAX_TURN`] radians.
    pub fn boundary_nodes(&self, h: f64) -> Vec<Point> {
        match &self.boundary {
            Boundary::Polygon { vertices } => polyline::resample_closed(vertices, h),
            _ => {
                let table = ArcLengthTable::new(self);
                let samples = 4 * self.resolution;
                let kappa_max = (0..samples)
                    .map(|j| self.curve(TAU * j as f64 / samples as f64).unwrap().curvature().abs())
                    .fold(0.0, f64::max);
                let n = (table.total / h).max(table.total * kappa_max / MAX_TURN).ceil().max(3.0) as usize;
                (0..n)
                    .map(|j| {
                        let theta = table.theta_at(table.total * j as f64 / n as f64);
                        self.curve(theta).unwrap().x
                    })
                    .collect()
            }
        }
    }

    /// Map a point near the boundary onto it.
    ///
    /// Smooth families project radially from the center. Polygon boundaries are
    /// straight between nodes so points are returned unchanged.
    pub fn project_to_boundary(&self, p: Point) -> Point {
        let c = self.center;
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        match self.boundary {
            Boundary::Circle { radius } => {
                let r = dx.hypot(dy);
                [c[0] + radius * dx / r, c[1] + radius * dy / r]
            }
            Boundary::Ellipse { a, b } => {
                let rho = (dx / a).hypot(dy / b);
                [c[0] + dx / rho, c[1] + dy / rho]
            }
            Boundary::Perturbed { eps, k, scale } => {
                let theta = dy.atan2(dx);
                let r = scale * (1.0 + eps * (k as f64 * theta).cos());
                let rr = dx.hypot(dy);
                [c[0] + r * dx / rr, c[1] + r * dy / rr]
            }
            Boundary::Polygon { .. } => p,
        }
    }

    /// Zero on the boundary, negative inside, positive outside.
    ///
    /// Exact distance for disks and polygons; a scaled level function otherwise.
    pub fn boundary_residual(&self, p: Point) -> f64 {
        let c = self.center;
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        match &self.boundary {
            Boundary::Circle { radius } => dx.hypot(dy) - radius,
            Boundary::Ellipse { a, b } => ((dx / a).hypot(dy / b) - 1.0) * a.min(*b),
            Boundary::Perturbed { eps, k, scale } => {
                let theta = dy.atan2(dx);
                dx.hypot(dy) - scale * (1.0 + eps * (*k as f64 * theta).cos())
            }
            Boundary::Polygon { vertices } => {
                let d = polyline::distance_to_closed(vertices, p);
                if polyline::winding_contains(vertices, p) {
                    -d
                } else {
                    d
                }
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.boundary_residual(p) < 0.0
    }

    /// Diameter-scale length used for tolerances.
    pub fn length_scale(&self) -> f64 {
        self.metrics.perimeter / TAU
    }

    fn compute_metrics(&self, declared: Symmetry) -> Result<DomainMetrics> {
        let (area, perimeter, centroid, convex) = match &self.boundary {
            Boundary::Circle { radius } => (PI * radius * radius, TAU * radius, self.center, true),
            Boundary::Polygon { vertices } => (
                polyline::signed_area(vertices),
                polyline::perimeter(vertices),
                polyline::area_centroid(vertices),
                polyline::is_convex(vertices),
            ),
            _ => {
                let tol = 1e-14 * self.spec_size();
                let pt = |t: f64| self.curve(t).unwrap();
                let perimeter = adaptive(|t| pt(t).speed(), 0.0, TAU, tol);
                let area = adaptive(|t| { let q = pt(t); 0.5 * (q.x[0] * q.dx[1] - q.x[1] * q.dx[0]) }, 0.0, TAU, tol * self.spec_size());
                let mx = adaptive(|t| { let q = pt(t); 0.5 * q.x[0] * q.x[0] * q.dx[1] }, 0.0, TAU, tol);
                let my = adaptive(|t| { let q = pt(t); -0.5 * q.x[1] * q.x[1] * q.dx[0] }, 0.0, TAU, tol);
                let convex = (0..4 * self.resolution).all(|j| pt(TAU * j as f64 / (4 * self.resolution) as f64).curvature() >= -1e-12);
                (area, perimeter, [mx / area, my / area], convex)
            }
        };
        let symmetry = self.verify_symmetry(declared)?;
        Ok(DomainMetrics { area, perimeter, centroid, convex, symmetry })
    }

    fn spec_size(&self) -> f64 {
        match &self.boundary {
            Boundary::Circle { radius } => *radius,
            Boundary::Ellipse { a, b } => a.max(*b),
            Boundary::Perturbed { eps, scale, .. } => scale * (1.0 + eps.abs()),
            Boundary::Polygon { vertices } => vertices
                .iter()
                .map(|p| (p[0] - self.center[0]).hypot(p[1] - self.center[1]))
                .fold(0.0, f64::max),
        }
    }

    /// Check the declared symmetry on sampled boundary points.
    fn verify_symmetry(&self, declared: Symmetry) -> Result<Symmetry> {
        let tol = SYMMETRY_TOL * self.spec_size().max(1.0);
        let samples: Vec<Point> = match &self.boundary {
            Boundary::Polygon { .. } => self.sample_boundary(96),
            _ => (0..64).map(|j| self.curve(TAU * (j as f64 + 0.3) / 64.0).unwrap().x).collect(),
        };
        let c = self.center;
        let maps_onto = |f: &dyn Fn(Point) -> Point| samples.iter().all(|p| self.boundary_residual(f(*p)).abs() < tol);
        let reflect = |alpha: f64| {
            move |p: Point| {
                let (s, co) = (2.0 * alpha).sin_cos();
                let (x, y) = (p[0] - c[0], p[1] - c[1]);
                [c[0] + co * x + s * y, c[1] + s * x - co * y]
            }
        };
        let central = |p: Point| [2.0 * c[0] - p[0], 2.0 * c[1] - p[1]];
        let ok = match declared {
            Symmetry::None => true,
            Symmetry::Central => maps_onto(&central),
            Symmetry::FullRotational => [0.37, 1.9, 4.1].iter().all(|&a: &f64| {
                let (s, co) = a.sin_cos();
                maps_onto(&|p: Point| {
                    let (x, y) = (p[0] - c[0], p[1] - c[1]);
                    [c[0] + co * x - s * y, c[1] + s * x + co * y]
                })
            }),
            Symmetry::TwoAxes => {
                let axes = self.candidate_axes();
                axes.iter().filter(|&&a| maps_onto(&reflect(a))).take(2).count() == 2
            }
        };
        if ok {
            Ok(declared)
        } else {
            Err(Error::InvalidParameters(format!("declared symmetry {declared:?} fails the sampled boundary test")))
        }
    }

    fn candidate_axes(&self) -> Vec<f64> {
        match (&self.boundary, &self.spec.shape) {
            (Boundary::Ellipse { .. }, _) => vec![0.0, PI / 2.0],
            (Boundary::Perturbed { k, .. }, _) => vec![0.0, PI / *k as f64],
            (_, Shape::Polygon { axes, .. }) if !axes.is_empty() => axes.clone(),
            (Boundary::Polygon { vertices }, _) => {
                let c = self.center;
                let n = vertices.len();
                let mut out = Vec::new();
                for i in 0..n {
                    let v = vertices[i];
                    let w = vertices[(i + 1) % n];
                    let m = [0.5 * (v[0] + w[0]), 0.5 * (v[1] + w[1])];
                    for p in [v, m] {
                        if (p[0] - c[0]).hypot(p[1] - c[1]) > 1e-12 {
                            out.push((p[1] - c[1]).atan2(p[0] - c[0]));
                        }
                    }
                }
                // axes through a point and its antipode coincide
                out.iter_mut().for_each(|a| *a = a.rem_euclid(PI));
                out.sort_by(|a, b| a.total_cmp(b));
                out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
                out
            }
            _ => Vec::new(),
        }
    }
}

/// Cumulative arc length of a smooth boundary on a fine parameter grid.
struct ArcLengthTable<'a> {
    domain: &'a Domain,
    thetas: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl<'a> ArcLengthTable<'a> {
    fn new(domain: &'a Domain) -> Self {
        let panels = 4 * domain.resolution.max(256);
        let rule = GaussRule::new(6);
        let mut thetas = Vec::with_capacity(panels + 1);
        let mut cumulative = Vec::with_capacity(panels + 1);
        let mut s = 0.0;
        for j in 0..=panels {
            let t = TAU * j as f64 / panels as f64;
            thetas.push(t);
            cumulative.push(s);
            if j < panels {
                let t1 = TAU * (j + 1) as f64 / panels as f64;
                s += rule.integrate(t, t1, |x| domain.curve(x).unwrap().speed());
            }
        }
        ArcLengthTable { domain, thetas, cumulative, total: s }
    }

    fn theta_at(&self, s: f64) -> f64 {
        let j = match self.cumulative.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(j) => return self.thetas[j],
            Err(j) => j.clamp(1, self.thetas.len() - 1) - 1,
        };
        let (t0, t1) = (self.thetas[j], self.thetas[j + 1]);
        let (s0, s1) = (self.cumulative[j], self.cumulative[j + 1]);
        let mut t = t0 + (s - s0) / (s1 - s0) * (t1 - t0);
        let rule = GaussRule::new(6);
        for _ in 0..8 {
            let here = s0 + rule.integrate(t0, t, |x| self.domain.curve(x).unwrap().speed());
            let step = (here - s) / self.domain.curve(t).unwrap().speed();
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }
}
