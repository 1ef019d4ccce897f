//! Closed polylines: area, length moments, point queries and self-intersection.

use super::Point;

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn edges(p: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    (0..p.len()).map(move |i| (p[i], p[(i + 1) % p.len()]))
}

/// Shoelace area, positive for counterclockwise order.
pub fn signed_area(p: &[Point]) -> f64 {
    0.5 * edges(p).map(|(a, b)| cross(a, b)).sum::<f64>()
}

pub fn perimeter(p: &[Point]) -> f64 {
    edges(p).map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1])).sum()
}

/// Centroid of the enclosed region.
pub fn area_centroid(p: &[Point]) -> Point {
    let a = signed_area(p);
    let (mut cx, mut cy) = (0.0, 0.0);
    for (u, v) in edges(p) {
        let c = cross(u, v);
        cx += (u[0] + v[0]) * c;
        cy += (u[1] + v[1]) * c;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

/// Centroid of the curve itself with respect to arc length.
pub fn curve_centroid(p: &[Point]) -> Point {
    let (mut cx, mut cy, mut len) = (0.0, 0.0, 0.0);
    for (u, v) in edges(p) {
        let l = (v[0] - u[0]).hypot(v[1] - u[1]);
        cx += l * 0.5 * (u[0] + v[0]);
        cy += l * 0.5 * (u[1] + v[1]);
        len += l;
    }
    [cx / len, cy / len]
}

/// `∫|x|² ds` along the closed polyline, exact per segment.
pub fn second_moment(p: &[Point]) -> f64 {
    edges(p).map(|(u, v)| segment_second_moment(u, sub(v, u))).sum()
}

/// `∫|p + s·d|² |d| ds` over `s ∈ [0, 1]`.
pub fn segment_second_moment(p: Point, d: Point) -> f64 {
    let l = d[0].hypot(d[1]);
    l * (dot(p, p) + dot(p, d) + dot(d, d) / 3.0)
}

pub fn is_convex(p: &[Point]) -> bool {
    let n = p.len();
    let scale = perimeter(p).powi(2);
    (0..n).all(|i| cross(sub(p[(i + 1) % n], p[i]), sub(p[(i + 2) % n], p[(i + 1) % n])) >= -1e-14 * scale)
}

/// Subdivide each edge into equal pieces no longer than `h`, keeping every vertex.
pub fn resample_closed(p: &[Point], h: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for (a, b) in edges(p) {
        let l = (b[0] - a[0]).hypot(b[1] - a[1]);
        let k = (l / h).ceil().max(1.0) as usize;
        for j in 0..k {
            let s = j as f64 / k as f64;
            out.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
    }
    out
}

pub fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    let d = sub(b, a);
    let dd = dot(d, d);
    let s = if dd > 0.0 { (dot(sub(p, a), d) / dd).clamp(0.0, 1.0) } else { 0.0 };
    (a[0] + s * d[0] - p[0]).hypot(a[1] + s * d[1] - p[1])
}

/// Distance from `q` to the closed polyline.
pub fn distance_to_closed(p: &[Point], q: Point) -> f64 {
    edges(p).map(|(a, b)| segment_distance(a, b, q)).fold(f64::INFINITY, f64::min)
}

/// Nonzero winding number test.
pub fn winding_contains(p: &[Point], q: Point) -> bool {
    let mut w = 0i32;
    for (a, b) in edges(p) {
        if a[1] <= q[1] {
            if b[1] > q[1] && cross(sub(b, a), sub(q, a)) > 0.0 {
                w += 1;
            }
        } else if b[1] <= q[1] && cross(sub(b, a), sub(q, a)) < 0.0 {
            w -= 1;
        }
    }
    w != 0
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = cross(sub(b, a), sub(c, a));
    let o2 = cross(sub(b, a), sub(d, a));
    let o3 = cross(sub(d, c), sub(a, c));
    let o4 = cross(sub(d, c), sub(b, c));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0 && r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// Whether any two non-adjacent edges of the closed polyline meet.
pub fn self_intersects(p: &[Point]) -> bool {
    let n = p.len();
    if n < 4 {
        return false;
    }
    let mut order: Vec<usize> = (0..n).collect();
    let lo = |i: usize| p[i][0].min(p[(i + 1) % n][0]);
    let hi = |i: usize| p[i][0].max(p[(i + 1) % n][0]);
    order.sort_by(|&i, &j| lo(i).total_cmp(&lo(j)));
    for (k, &i) in order.iter().enumerate() {
        let xi = hi(i);
        for &j in &order[k + 1..] {
            if lo(j) > xi {
                break;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}
