//! Marching squares on a uniform node grid.

use std::collections::HashMap;

use super::Point;

/// Nodal values on a uniform grid, row-major with `x` varying fastest.
#[derive(Debug, Clone)]
pub struct GridField {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn node(&self, i: usize, j: usize) -> Point {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }
}

/// Closed contour loops of `field = level`; nodes below `level` count as inside.
///
/// Saddle cells are resolved with the cell-center average. Chains that run
/// into the grid border are returned open.
pub fn marching_squares(field: &GridField, level: f64) -> Vec<Vec<Point>> {
    let nx = field.nx;
    let inside = |i: usize, j: usize| field.value(i, j) < level;
    let hkey = |i: usize, j: usize| 2 * (j * nx + i);
    let vkey = |i: usize, j: usize| 2 * (j * nx + i) + 1;

    let mut points: HashMap<usize, Point> = HashMap::new();
    let mut links: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut crossing = |key: usize, a: (usize, usize), b: (usize, usize)| {
        points.entry(key).or_insert_with(|| {
            let (va, vb) = (field.value(a.0, a.1), field.value(b.0, b.1));
            let s = (level - va) / (vb - va);
            let (pa, pb) = (field.node(a.0, a.1), field.node(b.0, b.1));
            [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]
        });
        key
    };

    for j in 0..field.ny - 1 {
        for i in 0..nx - 1 {
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            if c.iter().all(|&x| x) || c.iter().all(|&x| !x) {
                continue;
            }
            let mut e = [usize::MAX; 4];
            if c[0] != c[1] {
                e[0] = crossing(hkey(i, j), (i, j), (i + 1, j));
            }
            if c[1] != c[2] {
                e[1] = crossing(vkey(i + 1, j), (i + 1, j), (i + 1, j + 1));
            }
            if c[3] != c[2] {
                e[2] = crossing(hkey(i, j + 1), (i, j + 1), (i + 1, j + 1));
            }
            if c[0] != c[3] {
                e[3] = crossing(vkey(i, j), (i, j), (i, j + 1));
            }
            let present: Vec<usize> = e.iter().copied().filter(|&k| k != usize::MAX).collect();
            let mut link = |a: usize, b: usize| {
                links.entry(a).or_default().push(b);
                links.entry(b).or_default().push(a);
            };
            if present.len() == 2 {
                link(present[0], present[1]);
            } else {
                let center = 0.25 * (field.value(i, j) + field.value(i + 1, j) + field.value(i + 1, j + 1) + field.value(i, j + 1));
                if (center < level) == c[0] {
                    link(e[0], e[1]);
                    link(e[2], e[3]);
                } else {
                    link(e[3], e[0]);
                    link(e[1], e[2]);
                }
            }
        }
    }

    let mut keys: Vec<usize> = links.keys().copied().collect();
    keys.sort_unstable();
    let mut visited: HashMap<usize, bool> = HashMap::new();
    let mut loops = Vec::new();
    // open chains first, starting from their degree-one ends
    keys.sort_by_key(|k| links[k].len());
    for &start in &keys {
        if visited.contains_key(&start) {
            continue;
        }
        let mut chain = vec![points[&start]];
        visited.insert(start, true);
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = links[&cur].iter().copied().find(|&n| n != prev && !visited.contains_key(&n));
            match next {
                Some(n) => {
                    visited.insert(n, true);
                    chain.push(points[&n]);
                    prev = cur;
                    cur = n;
                }
                None => break,
            }
        }
        chain.dedup_by(|a, b| (a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-12 * field.h);
        while chain.len() > 1 && {
            let (a, b) = (chain[0], chain[chain.len() - 1]);
            (a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-12 * field.h
        } {
            chain.pop();
        }
        loops.push(chain);
    }
    loops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polyline;

    #[test]
    fn circle_contour_is_one_loop() {
        let n = 201;
        let h = 3.0 / (n - 1) as f64;
        let origin = [-1.5, -1.5];
        let values = (0..n * n)
            .map(|k| {
                let (i, j) = (k % n, k / n);
                (origin[0] + i as f64 * h).hypot(origin[1] + j as f64 * h)
            })
            .collect();
        let f = GridField { origin, h, nx: n, ny: n, values };
        let loops = marching_squares(&f, 1.0);
        assert_eq!(loops.len(), 1);
        let len = polyline::perimeter(&loops[0]);
        assert!((len - std::f64::consts::TAU).abs() < 1e-3);
    }

    #[test]
    fn two_blobs_give_two_loops() {
        let n = 161;
        let h = 4.0 / (n - 1) as f64;
        let origin = [-2.0, -1.0];
        let values = (0..n * n)
            .map(|k| {
                let (x, y) = (origin[0] + (k % n) as f64 * h, origin[1] + (k / n) as f64 * h);
                (x - 1.0).hypot(y).min((x + 1.0).hypot(y))
            })
            .collect();
        let f = GridField { origin, h, nx: n, ny: n, values };
        assert_eq!(marching_squares(&f, 0.5).len(), 2);
    }
}
