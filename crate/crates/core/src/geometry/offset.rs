//! Outer parallel curves `Σ_t = {x : dist(x, Ω) = t}`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::contour::{marching_squares, GridField};
use super::{polyline, Domain, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetMethod {
    /// Translated edges joined by circular arcs.
    ExactPolygon,
    /// `x + t·ν(x)` on a smooth convex boundary.
    SmoothParametric,
    /// Contour of a sampled distance field.
    GridContour,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetOptions {
    /// Allow the distance-field contour for nonconvex domains.
    pub grid_fallback: bool,
    /// Use the distance-field contour even when an exact construction exists.
    pub force_grid: bool,
    /// Grid cell size is `perimeter / grid_cells`.
    pub grid_cells: usize,
}

impl Default for OffsetOptions {
    fn default() -> Self {
        OffsetOptions { grid_fallback: false, force_grid: false, grid_cells: 2000 }
    }
}

impl OffsetOptions {
    pub fn with_fallback() -> Self {
        OffsetOptions { grid_fallback: true, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetCurve {
    pub t: f64,
    pub vertices: Vec<Point>,
    pub length: f64,
    pub centroid: Point,
    /// `∫_{Σ_t} |x|² ds` about the origin.
    pub second_moment: f64,
    pub simple: bool,
    /// Number of closed components found.
    pub components: usize,
    pub method: OffsetMethod,
}

/// Outer parallel curve at distance `t`; fails when it is not a simple closed curve.
pub fn offset_curve(d: &Domain, t: f64, opts: &OffsetOptions) -> Result<OffsetCurve> {
    let c = trace_offset(d, t, opts)?;
    if !c.simple {
        return Err(Error::NotSimple { t, components: c.components });
    }
    Ok(c)
}

/// Outer parallel curve at distance `t` with the simplicity flag left to the caller.
pub fn trace_offset(d: &Domain, t: f64, opts: &OffsetOptions) -> Result<OffsetCurve> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameters(format!("offset distance must be positive, got {t}")));
    }
    let convex = d.metrics().convex;
    if opts.force_grid || !convex {
        if !opts.grid_fallback && !opts.force_grid {
            return Err(Error::UnsupportedDomain(format!("{} is not convex and the grid fallback is disabled", d.label())));
        }
        return grid_offset(d, t, opts.grid_cells);
    }
    Ok(match d.polygon_vertices() {
        Some(v) => polygon_offset(v, t),
        None => smooth_offset(d, t),
    })
}

fn polygon_offset(v: &[Point], t: f64) -> OffsetCurve {
    let n = v.len();
    let normal = |i: usize| {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let l = (b[0] - a[0]).hypot(b[1] - a[1]);
        [(b[1] - a[1]) / l, -(b[0] - a[0]) / l]
    };
    let (mut length, mut mx, mut my, mut m2) = (0.0, 0.0, 0.0, 0.0);
    let mut vertices = Vec::new();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let nu = normal(i);
        let p = [a[0] + t * nu[0], a[1] + t * nu[1]];
        let dvec = [b[0] - a[0], b[1] - a[1]];
        let l = dvec[0].hypot(dvec[1]);
        length += l;
        mx += l * (p[0] + 0.5 * dvec[0]);
        my += l * (p[1] + 0.5 * dvec[1]);
        m2 += polyline::segment_second_moment(p, dvec);
        vertices.push(p);

        // arc around vertex b from this edge's normal to the next one's
        let nn = normal((i + 1) % n);
        let phi0 = nu[1].atan2(nu[0]);
        let turn = (nu[0] * nn[1] - nu[1] * nn[0]).atan2(nu[0] * nn[0] + nu[1] * nn[1]);
        let phi1 = phi0 + turn;
        let (s0, c0) = phi0.sin_cos();
        let (s1, c1) = phi1.sin_cos();
        length += t * turn;
        mx += t * b[0] * turn + t * t * (s1 - s0);
        my += t * b[1] * turn - t * t * (c1 - c0);
        let bb = b[0] * b[0] + b[1] * b[1];
        m2 += t * ((bb + t * t) * turn + 2.0 * t * (b[0] * (s1 - s0) - b[1] * (c1 - c0)));
        let pieces = 16;
        for k in 0..pieces {
            let phi = phi0 + turn * k as f64 / pieces as f64;
            vertices.push([b[0] + t * phi.cos(), b[1] + t * phi.sin()]);
        }
    }
    OffsetCurve {
        t,
        vertices,
        length,
        centroid: [mx / length, my / length],
        second_moment: m2,
        simple: true,
        components: 1,
        method: OffsetMethod::ExactPolygon,
    }
}

fn smooth_offset(d: &Domain, t: f64) -> OffsetCurve {
    // trapezoid rule in the periodic parameter is spectrally accurate here
    let n = (4 * d.resolution()).max(2048);
    let w = TAU / n as f64;
    let (mut length, mut mx, mut my, mut m2) = (0.0, 0.0, 0.0, 0.0);
    let mut vertices = Vec::with_capacity(n);
    for j in 0..n {
        let q = d.curve(TAU * j as f64 / n as f64).unwrap();
        let nu = q.normal();
        let x = [q.x[0] + t * nu[0], q.x[1] + t * nu[1]];
        let ds = w * q.speed() * (1.0 + t * q.curvature());
        length += ds;
        mx += ds * x[0];
        my += ds * x[1];
        m2 += ds * (x[0] * x[0] + x[1] * x[1]);
        vertices.push(x);
    }
    OffsetCurve {
        t,
        vertices,
        length,
        centroid: [mx / length, my / length],
        second_moment: m2,
        simple: true,
        components: 1,
        method: OffsetMethod::SmoothParametric,
    }
}

/// Nearest-segment queries on a closed counterclockwise polyline.
struct SegmentIndex<'a> {
    pts: &'a [Point],
    origin: Point,
    size: f64,
    nb: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> SegmentIndex<'a> {
    fn new(pts: &'a [Point], origin: Point, extent: [f64; 2]) -> Self {
        let size = (extent[0].max(extent[1]) / 64.0).max(1e-12);
        let nb = [(extent[0] / size).ceil() as usize + 1, (extent[1] / size).ceil() as usize + 1];
        let mut buckets = vec![Vec::new(); nb[0] * nb[1]];
        let n = pts.len();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let lo = [a[0].min(b[0]), a[1].min(b[1])];
            let hi = [a[0].max(b[0]), a[1].max(b[1])];
            let cell = |x: f64, k: usize| (((x - origin[k]) / size).floor().max(0.0) as usize).min(nb[k] - 1);
            for by in cell(lo[1], 1)..=cell(hi[1], 1) {
                for bx in cell(lo[0], 0)..=cell(hi[0], 0) {
                    buckets[by * nb[0] + bx].push(i);
                }
            }
        }
        SegmentIndex { pts, origin, size, nb, buckets }
    }

    /// Signed distance (negative inside) if a segment lies within `cap`.
    fn query(&self, p: Point, cap: f64) -> Option<f64> {
        let cell = |k: usize| (((p[k] - self.origin[k]) / self.size).floor().max(0.0) as i64).min(self.nb[k] as i64 - 1);
        let (cx, cy) = (cell(0), cell(1));
        let mut best = (f64::INFINITY, 0usize, 0.0f64);
        let n = self.pts.len();
        let mut r: i64 = 0;
        loop {
            for by in (cy - r)..=(cy + r) {
                for bx in (cx - r)..=(cx + r) {
                    let ring = (by - cy).abs() == r || (bx - cx).abs() == r;
                    if !ring || bx < 0 || by < 0 || bx >= self.nb[0] as i64 || by >= self.nb[1] as i64 {
                        continue;
                    }
                    for &i in &self.buckets[by as usize * self.nb[0] + bx as usize] {
                        let (a, b) = (self.pts[i], self.pts[(i + 1) % n]);
                        let d = [b[0] - a[0], b[1] - a[1]];
                        let dd = d[0] * d[0] + d[1] * d[1];
                        let s = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / dd).clamp(0.0, 1.0);
                        let dist = (a[0] + s * d[0] - p[0]).hypot(a[1] + s * d[1] - p[1]);
                        if dist < best.0 {
                            best = (dist, i, s);
                        }
                    }
                }
            }
            let reach = r as f64 * self.size;
            if best.0 <= reach {
                break;
            }
            if reach > cap || (r as usize) > self.nb[0].max(self.nb[1]) {
                if best.0 <= cap {
                    break;
                }
                return None;
            }
            r += 1;
        }
        let (dist, i, s) = best;
        let outward = |j: usize| {
            let (a, b) = (self.pts[j % n], self.pts[(j + 1) % n]);
            let l = (b[0] - a[0]).hypot(b[1] - a[1]);
            [(b[1] - a[1]) / l, -(b[0] - a[0]) / l]
        };
        let (v, nu) = if s <= 0.0 {
            let (p0, p1) = (outward(i + n - 1), outward(i));
            (self.pts[i], [p0[0] + p1[0], p0[1] + p1[1]])
        } else if s >= 1.0 {
            let (p0, p1) = (outward(i), outward(i + 1));
            (self.pts[(i + 1) % n], [p0[0] + p1[0], p0[1] + p1[1]])
        } else {
            (self.pts[i], outward(i))
        };
        let side = (p[0] - v[0]) * nu[0] + (p[1] - v[1]) * nu[1];
        Some(if side < 0.0 { -dist } else { dist })
    }
}

fn grid_offset(d: &Domain, t: f64, cells: usize) -> Result<OffsetCurve> {
    let perimeter = d.metrics().perimeter;
    let h = perimeter / cells.max(16) as f64;
    let boundary: Vec<Point> = match d.polygon_vertices() {
        Some(v) => v.to_vec(),
        None => d.sample_boundary((4.0 * perimeter / h).ceil() as usize),
    };
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &boundary {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let margin = t + 3.0 * h;
    let origin = [lo[0] - margin, lo[1] - margin];
    let nx = ((hi[0] - lo[0] + 2.0 * margin) / h).ceil() as usize + 1;
    let ny = ((hi[1] - lo[1] + 2.0 * margin) / h).ceil() as usize + 1;
    let index = SegmentIndex::new(&boundary, origin, [nx as f64 * h, ny as f64 * h]);

    // value of dist(x, Ω) − t
    let value = |p: Point, cap: f64| -> f64 {
        match index.query(p, cap) {
            Some(sd) => sd.max(0.0) - t,
            None if polyline::winding_contains(&boundary, p) => -t,
            None => cap.max(t) + h,
        }
    };

    // coarse pass, then exact values only in coarse cells near the level set
    let m = 16usize;
    let cx = (nx - 1).div_ceil(m) + 1;
    let cy = (ny - 1).div_ceil(m) + 1;
    let fine_of = |c: usize, n: usize| (c * m).min(n - 1);
    let reach = (m as f64) * h * std::f64::consts::SQRT_2 + 2.0 * h;
    let cap = t + 2.0 * reach;
    let mut coarse = vec![0.0; cx * cy];
    for j in 0..cy {
        for i in 0..cx {
            let p = [origin[0] + fine_of(i, nx) as f64 * h, origin[1] + fine_of(j, ny) as f64 * h];
            coarse[j * cx + i] = value(p, cap);
        }
    }
    let mut values = vec![f64::NAN; nx * ny];
    for j in 0..cy - 1 {
        for i in 0..cx - 1 {
            let corners = [coarse[j * cx + i], coarse[j * cx + i + 1], coarse[(j + 1) * cx + i], coarse[(j + 1) * cx + i + 1]];
            let near = corners.iter().any(|v| v.abs() <= reach);
            for fj in fine_of(j, ny)..=fine_of(j + 1, ny) {
                for fi in fine_of(i, nx)..=fine_of(i + 1, nx) {
                    let k = fj * nx + fi;
                    if near {
                        if values[k].is_nan() || values[k].abs() == f64::MAX {
                            let p = [origin[0] + fi as f64 * h, origin[1] + fj as f64 * h];
                            values[k] = value(p, cap);
                        }
                    } else if values[k].is_nan() {
                        values[k] = f64::MAX.copysign(corners[0]);
                    }
                }
            }
        }
    }
    let field = GridField { origin, h, nx, ny, values };
    let loops = marching_squares(&field, 0.0);
    let closed: Vec<&Vec<Point>> = loops.iter().filter(|l| l.len() >= 3).collect();
    let main = closed
        .iter()
        .max_by(|a, b| polyline::signed_area(a).abs().total_cmp(&polyline::signed_area(b).abs()))
        .ok_or_else(|| Error::GridTooCoarse(format!("no contour found at t = {t}")))?;
    let mut vertices = (*main).clone();
    if polyline::signed_area(&vertices) < 0.0 {
        vertices.reverse();
    }
    let simple = closed.len() == 1 && !polyline::self_intersects(&vertices);
    Ok(OffsetCurve {
        t,
        length: polyline::perimeter(&vertices),
        centroid: polyline::curve_centroid(&vertices),
        second_moment: polyline::second_moment(&vertices),
        vertices,
        simple,
        components: closed.len(),
        method: OffsetMethod::GridContour,
    })
}
