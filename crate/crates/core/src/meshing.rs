//! Linear triangle meshes of planar domains.
//!
//! The coarse mesh comes from constrained Delaunay refinement of the sampled
//! boundary polygon. Uniform refinement quadrisects every triangle and moves
//! new boundary nodes onto the exact boundary.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use num_complex::Complex64;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::geometry::{Domain, Point};
use crate::{Error, Result};

/// Smallest admissible interior angle in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;
const REFINE_ANGLE_DEG: f64 = 28.0;
const MIN_BOUNDARY_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Counterclockwise index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary edges oriented with the domain on their left.
    pub boundary: Vec<[usize; 2]>,
    pub is_boundary: Vec<bool>,
    pub h: f64,
}

/// Area and barycentric gradients of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

/// Boundary nodes in counterclockwise order with lumped arc-length weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub nodes: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Nodal values stored alongside a mesh dump.
#[derive(Debug, Clone, PartialEq)]
pub enum NodalValues {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Mesh `d` with boundary spacing at most `h`, then quadrisect `levels` times.
pub fn triangulate(d: &Domain, h: f64, levels: usize) -> Result<Mesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameters(format!("mesh size must be positive, got {h}")));
    }
    let mut size = h;
    let mut last = None;
    for _ in 0..4 {
        match coarse_mesh(d, size) {
            Ok(m) => {
                let mut m = m;
                for _ in 0..levels {
                    m = m.refine(d);
                }
                return Ok(m);
            }
            Err(e @ Error::DegenerateMesh(_)) => {
                last = Some(e);
                size *= 0.8;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

fn coarse_mesh(d: &Domain, h: f64) -> Result<Mesh> {
    // judged on the nominal count; curvature-capped spacing would hide a too large h
    let nominal = (d.metrics().perimeter / h).ceil() as usize;
    if nominal < MIN_BOUNDARY_NODES {
        return Err(Error::MeshTooCoarse { nodes: nominal });
    }
    let ring = d.boundary_nodes(h);
    let n = ring.len();
    let vertices: Vec<Point2<f64>> = ring.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::bulk_load_cdt(vertices, edges)
        .map_err(|e| Error::DegenerateMesh(format!("constrained triangulation failed: {e:?}")))?;
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
        .with_max_allowed_area(0.45 * h * h)
        .with_max_additional_vertices(2_000_000)
        .keep_constraint_edges()
        .exclude_outer_faces(true);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::DegenerateMesh("Delaunay refinement did not complete".into()));
    }
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();

    let mut index = HashMap::new();
    let mut nodes = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (k, v) in face.vertices().iter().enumerate() {
            let id = *index.entry(v.fix()).or_insert_with(|| {
                let p = v.position();
                nodes.push([p.x, p.y]);
                nodes.len() - 1
            });
            tri[k] = id;
        }
        triangles.push(tri);
    }
    let mut mesh = Mesh::from_parts(nodes, triangles, h)?;
    // Steiner points inserted on boundary chords go onto the exact curve
    for i in 0..mesh.nodes.len() {
        if mesh.is_boundary[i] {
            mesh.nodes[i] = d.project_to_boundary(mesh.nodes[i]);
        }
    }
    mesh.orient();
    mesh.check_quality()?;
    Ok(mesh)
}

impl Mesh {
    /// Build from nodes and triangles, deriving the boundary.
    pub fn from_parts(nodes: Vec<Point>, triangles: Vec<[usize; 3]>, h: f64) -> Result<Mesh> {
        let mut mesh = Mesh { is_boundary: vec![false; nodes.len()], nodes, triangles, boundary: Vec::new(), h };
        mesh.orient();
        let mut count: BTreeMap<(usize, usize), (usize, [usize; 2])> = BTreeMap::new();
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = count.entry((a.min(b), a.max(b))).or_insert((0, [a, b]));
                e.0 += 1;
            }
        }
        for (_, (c, e)) in count {
            if c == 1 {
                mesh.boundary.push(e);
                mesh.is_boundary[e[0]] = true;
                mesh.is_boundary[e[1]] = true;
            } else if c > 2 {
                return Err(Error::DegenerateMesh("edge shared by more than two triangles".into()));
            }
        }
        Ok(mesh)
    }

    fn orient(&mut self) {
        for i in 0..self.triangles.len() {
            if self.signed_area(i) < 0.0 {
                self.triangles[i].swap(1, 2);
            }
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn element(&self, t: usize) -> Element {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        let area = self.signed_area(t);
        let s = 0.5 / area;
        Element {
            area,
            grads: [
                [(b[1] - c[1]) * s, (c[0] - b[0]) * s],
                [(c[1] - a[1]) * s, (a[0] - c[0]) * s],
                [(a[1] - b[1]) * s, (b[0] - a[0]) * s],
            ],
        }
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut best = 180.0f64;
        for t in &self.triangles {
            let p = t.map(|i| self.nodes[i]);
            for k in 0..3 {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let ang = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
                best = best.min(ang.to_degrees());
            }
        }
        best
    }

    pub fn num_edges(&self) -> usize {
        let mut set = HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary.iter().map(|e| dist(self.nodes[e[0]], self.nodes[e[1]])).sum()
    }

    fn check_quality(&self) -> Result<()> {
        if let Some(t) = (0..self.triangles.len()).find(|&t| self.signed_area(t) <= 0.0) {
            return Err(Error::DegenerateMesh(format!("triangle {t} has non-positive area")));
        }
        let angle = self.min_angle_deg();
        if angle < MIN_ANGLE_DEG {
            return Err(Error::DegenerateMesh(format!("minimum angle {angle:.2} degrees below {MIN_ANGLE_DEG}")));
        }
        boundary_trace(self).map(|_| ())
    }

    /// Quadrisect every triangle; boundary midpoints are projected onto `d`.
    pub fn refine(&self, d: &Domain) -> Mesh {
        let mut nodes = self.nodes.clone();
        let boundary_edges: HashSet<(usize, usize)> = self.boundary.iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point>| {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                let (p, q) = (nodes[a], nodes[b]);
                let mut m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                if boundary_edges.contains(&key) {
                    m = d.project_to_boundary(m);
                }
                nodes.push(m);
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        let mut boundary = Vec::with_capacity(2 * self.boundary.len());
        let mut is_boundary = vec![false; nodes.len()];
        for &[a, b] in &self.boundary {
            let m = mid(a, b, &mut nodes);
            boundary.extend([[a, m], [m, b]]);
            is_boundary[a] = true;
            is_boundary[b] = true;
            is_boundary[m] = true;
        }
        let mut mesh = Mesh { nodes, triangles, boundary, is_boundary, h: 0.5 * self.h };
        mesh.orient();
        mesh
    }

    /// Plain-text dump; values follow the mesh when given.
    pub fn dump(&self, values: Option<&NodalValues>) -> String {
        let mut s = String::new();
        writeln!(s, "nodes {}", self.nodes.len()).unwrap();
        for p in &self.nodes {
            writeln!(s, "{} {}", fmt(p[0]), fmt(p[1])).unwrap();
        }
        writeln!(s, "triangles {}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        writeln!(s, "boundary {}", self.boundary.len()).unwrap();
        for e in &self.boundary {
            writeln!(s, "{} {}", e[0], e[1]).unwrap();
        }
        match values {
            Some(NodalValues::Real(v)) => {
                writeln!(s, "values {}", v.len()).unwrap();
                for x in v {
                    writeln!(s, "{}", fmt(*x)).unwrap();
                }
            }
            Some(NodalValues::Complex(v)) => {
                writeln!(s, "values {}", v.len()).unwrap();
                for z in v {
                    writeln!(s, "{} {}", fmt(z.re), fmt(z.im)).unwrap();
                }
            }
            None => {}
        }
        s
    }

    /// Parse a dump written by [`Mesh::dump`].
    pub fn parse(text: &str) -> Result<(Mesh, Option<NodalValues>)> {
        let bad = |msg: String| Error::InvalidParameters(format!("mesh dump: {msg}"));
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let mut pos = 0;
        let mut block = |name: &str, required: bool| -> Result<Option<Vec<Vec<f64>>>> {
            let Some(line) = lines.get(pos) else {
                return if required { Err(bad(format!("missing '{name}' section"))) } else { Ok(None) };
            };
            let mut it = line.split_whitespace();
            if it.next() != Some(name) {
                return Err(bad(format!("expected '{name}', found '{line}'")));
            }
            let n: usize = it.next().and_then(|n| n.parse().ok()).ok_or_else(|| bad(format!("bad count in '{line}'")))?;
            pos += 1;
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let line = lines.get(pos).ok_or_else(|| bad(format!("'{name}' section truncated")))?;
                pos += 1;
                let row = line.split_whitespace().map(|w| w.parse::<f64>().map_err(|_| bad(format!("bad number '{w}'"))));
                out.push(row.collect::<Result<Vec<_>>>()?);
            }
            Ok(Some(out))
        };
        let node_rows = block("nodes", true)?.unwrap();
        let tri_rows = block("triangles", true)?.unwrap();
        let bnd_rows = block("boundary", true)?.unwrap();
        let value_rows = block("values", false)?;
        let nn = node_rows.len();
        let nodes = node_rows
            .iter()
            .map(|r| if r.len() == 2 { Ok([r[0], r[1]]) } else { Err(bad("node rows need two coordinates".into())) })
            .collect::<Result<Vec<Point>>>()?;
        let index = |r: &[f64], k: usize| -> Result<usize> {
            let v = *r.get(k).ok_or_else(|| bad("short index row".into()))?;
            if v < 0.0 || v.fract() != 0.0 || v as usize >= nn {
                return Err(bad(format!("bad node index {v}")));
            }
            Ok(v as usize)
        };
        let triangles = tri_rows.iter().map(|r| Ok([index(r, 0)?, index(r, 1)?, index(r, 2)?])).collect::<Result<Vec<_>>>()?;
        let boundary = bnd_rows.iter().map(|r| Ok([index(r, 0)?, index(r, 1)?])).collect::<Result<Vec<_>>>()?;
        let mut is_boundary = vec![false; nn];
        for e in &boundary {
            is_boundary[e[0]] = true;
            is_boundary[e[1]] = true;
        }
        let h = boundary.iter().map(|e| dist(nodes[e[0]], nodes[e[1]])).fold(0.0, f64::max);
        let values = value_rows.map(|rows| {
            if !rows.is_empty() && rows.iter().all(|r| r.len() == 2) {
                NodalValues::Complex(rows.iter().map(|r| Complex64::new(r[0], r[1])).collect())
            } else {
                NodalValues::Real(rows.iter().map(|r| r[0]).collect())
            }
        });
        Ok((Mesh { nodes, triangles, boundary, is_boundary, h }, values))
    }
}

fn fmt(x: f64) -> String {
    // shortest representation that parses back to the same bits
    format!("{x:?}")
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Order boundary nodes along the boundary cycle and lump arc length onto them.
pub fn boundary_trace(m: &Mesh) -> Result<BoundaryTrace> {
    if m.boundary.is_empty() {
        return Err(Error::DisconnectedBoundary);
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    for e in &m.boundary {
        if next.insert(e[0], e[1]).is_some() {
            return Err(Error::DisconnectedBoundary);
        }
    }
    let start = m.boundary.iter().map(|e| e[0]).min().unwrap();
    let mut nodes = vec![start];
    let mut cur = start;
    loop {
        cur = *next.get(&cur).ok_or(Error::DisconnectedBoundary)?;
        if cur == start {
            break;
        }
        nodes.push(cur);
        if nodes.len() > m.boundary.len() {
            return Err(Error::DisconnectedBoundary);
        }
    }
    if nodes.len() != m.boundary.len() {
        return Err(Error::DisconnectedBoundary);
    }
    let n = nodes.len();
    let weights = (0..n)
        .map(|k| {
            let (prev, here, after) = (nodes[(k + n - 1) % n], nodes[k], nodes[(k + 1) % n]);
            0.5 * (dist(m.nodes[prev], m.nodes[here]) + dist(m.nodes[here], m.nodes[after]))
        })
        .collect();
    Ok(BoundaryTrace { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainSpec};
    use std::f64::consts::PI;

    #[test]
    fn square_is_meshed_exactly() {
        let d = build_domain(&DomainSpec::rectangle(1.0, 1.0)).unwrap();
        let m = triangulate(&d, 0.25, 0).unwrap();
        assert!((m.area() - 1.0).abs() < 1e-14);
        let tr = boundary_trace(&m).unwrap();
        assert_eq!(tr.nodes.len(), 16);
        assert!((tr.weights.iter().sum::<f64>() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn disk_mesh_quality() {
        let d = build_domain(&DomainSpec::disk(1.0)).unwrap();
        let m = triangulate(&d, 0.2, 0).unwrap();
        assert!((m.area() - PI).abs() < 0.02 * PI);
        assert!(m.min_angle_deg() >= MIN_ANGLE_DEG);
        assert_eq!(m.nodes.len() + m.triangles.len(), m.num_edges() + 1);
        let tr = boundary_trace(&m).unwrap();
        assert!(tr.weights.iter().sum::<f64>() < 2.0 * PI);
    }

    #[test]
    fn refinement_shrinks_area_error() {
        let d = build_domain(&DomainSpec::disk(1.0)).unwrap();
        let m0 = triangulate(&d, 0.2, 0).unwrap();
        let m1 = m0.refine(&d);
        let m2 = m1.refine(&d);
        let e: Vec<f64> = [&m0, &m1, &m2].iter().map(|m| PI - m.area()).collect();
        assert!(e[0] / e[1] > 3.5 && e[1] / e[2] > 3.5, "{e:?}");
        assert!(m2.min_angle_deg() >= m0.min_angle_deg() - 1.0);
        assert_eq!(m2.nodes.len() + m2.triangles.len(), m2.num_edges() + 1);
    }

    #[test]
    fn too_coarse_is_rejected() {
        let d = build_domain(&DomainSpec::disk(1.0)).unwrap();
        assert!(matches!(triangulate(&d, 1.0, 0), Err(Error::MeshTooCoarse { .. })));
    }

    #[test]
    fn dump_round_trips_bits() {
        let d = build_domain(&DomainSpec::ellipse(1.3, 0.7)).unwrap();
        let m = triangulate(&d, 0.2, 1).unwrap();
        let vals = NodalValues::Complex(m.nodes.iter().map(|p| Complex64::new(p[0].sin(), p[1] / 3.0)).collect());
        let text = m.dump(Some(&vals));
        let (back, v) = Mesh::parse(&text).unwrap();
        assert_eq!(back.nodes, m.nodes);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.boundary, m.boundary);
        assert_eq!(v, Some(vals));
        assert_eq!(back.dump(v.as_ref()), text);
    }
}
