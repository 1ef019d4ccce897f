//! Sparse Hermitian storage, a profile (skyline) `L D L^H` factorization
//! with reverse Cuthill-McKee ordering, and shifted inverse iteration for
//! Hermitian-definite pencils.
//!
//! The factorization does no pivoting. It is used on positive definite
//! matrices and on shifted pencils whose inertia is the quantity of interest,
//! where the count of negative pivots equals the number of eigenvalues below
//! the shift (Sylvester).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + Debug
    + Default
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self {
        Self::default()
    }
    fn from_real(r: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn abs2(self) -> f64;
    fn scale(self, r: f64) -> Self;
}

impl Scalar for f64 {
    fn from_real(r: f64) -> Self {
        r
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn scale(self, r: f64) -> Self {
        self * r
    }
}

impl Scalar for Complex64 {
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, r: f64) -> Self {
        self * r
    }
}

/// `x^H y`
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (a, b)| acc + a.conj() * *b)
}

pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
}

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a square matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut iter = row.into_iter();
            if let Some((mut cj, mut cv)) = iter.next() {
                for (j, v) in iter {
                    if j == cj {
                        cv += v;
                    } else {
                        col_idx.push(cj);
                        vals.push(cv);
                        cj = j;
                        cv = v;
                    }
                }
                col_idx.push(cj);
                vals.push(cv);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n, row_ptr, col_idx, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `x^H A x`, real part.
    pub fn quadratic_form(&self, x: &[T]) -> f64 {
        dot(x, &self.apply(x)).re()
    }

    /// Sum of `c_k A_k` over matrices of equal dimension.
    pub fn combine(terms: &[(&CsrMatrix<T>, f64)]) -> Self {
        let n = terms[0].0.n;
        CsrMatrix::from_triplets(
            n,
            terms.iter().flat_map(|(m, c)| m.triplets().map(move |(i, j, v)| (i, j, v.scale(*c)))),
        )
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs2().sqrt()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - self.get(j, i).conj()).abs2().sqrt());
        }
        worst
    }

    /// Extracts the block `A[rows, cols]` with local numbering.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Block<T> {
        let mut local = vec![usize::MAX; self.n];
        for (k, &c) in cols.iter().enumerate() {
            local[c] = k;
        }
        let entries = rows
            .iter()
            .map(|&r| {
                self.row(r)
                    .filter(|(j, _)| local[*j] != usize::MAX)
                    .map(|(j, v)| (local[j], v))
                    .collect()
            })
            .collect();
        Block { ncols: cols.len(), rows: entries }
    }

    /// Principal submatrix on `idx`, renumbered.
    pub fn principal(&self, idx: &[usize]) -> CsrMatrix<T> {
        let b = self.block(idx, idx);
        CsrMatrix::from_triplets(
            idx.len(),
            b.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v))),
        )
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
            .collect()
    }
}

/// Rectangular sparse block stored by rows.
#[derive(Debug, Clone)]
pub struct Block<T> {
    ncols: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Block<T> {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.rows.iter().map(|r| r.iter().fold(T::zero(), |acc, &(j, v)| acc + v * x[j])).collect()
    }
    /// Column `j` as a dense vector.
    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows
            .iter()
            .map(|r| r.iter().find(|e| e.0 == j).map(|e| e.1).unwrap_or_default())
            .collect()
    }
}

/// Row-major dense square matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![T::zero(); n * n] }
    }
    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).fold(T::zero(), |acc, (a, b)| acc + *a * *b))
            .collect()
    }
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().map(|v| v.abs2().sqrt()).sum::<f64>())
            .fold(0.0, f64::max)
    }
    /// Replaces `A` by `(A + A^H) / 2`.
    pub fn hermitize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = (self.get(i, j) + self.get(j, i).conj()).scale(0.5);
                self.set(i, j, v);
                self.set(j, i, v.conj());
            }
            let d = T::from_real(self.get(i, i).re());
            self.set(i, i, d);
        }
    }
}

/// Something a shifted pencil can be built from and that can be applied.
pub trait Operator<T: Scalar> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T]) -> Vec<T>;
    fn norm_inf(&self) -> f64;
}

impl<T: Scalar> Operator<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[T]) -> Vec<T> {
        CsrMatrix::apply(self, x)
    }
    fn norm_inf(&self) -> f64 {
        CsrMatrix::norm_inf(self)
    }
}

impl<T: Scalar> Operator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[T]) -> Vec<T> {
        DenseMatrix::apply(self, x)
    }
    fn norm_inf(&self) -> f64 {
        DenseMatrix::norm_inf(self)
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn rcm_ordering(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let degree = |i: usize| adj[i].len();
    while order.len() < n {
        // start each component from a pseudo-peripheral node
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree(i), i)).unwrap();
        let start = pseudo_peripheral(adj, seed, &visited);
        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree(w), w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize, blocked: &[bool]) -> usize {
    let mut node = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(adj, node, blocked);
        let max_level = *levels.iter().flatten().max().unwrap_or(&0);
        if max_level <= ecc {
            break;
        }
        ecc = max_level;
        node = (0..adj.len())
            .filter(|&i| levels[i] == Some(max_level))
            .min_by_key(|&i| (adj[i].len(), i))
            .unwrap();
    }
    node
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, blocked: &[bool]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() && !blocked[w] {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

/// `P A P^T = L D L^H` with unit lower `L` stored by rows in profile format.
#[derive(Debug, Clone)]
pub struct ProfileLdl<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<T>,
    diag: Vec<f64>,
}

impl<T: Scalar> ProfileLdl<T> {
    /// Factors a sparse Hermitian matrix with RCM ordering.
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let perm = rcm_ordering(&a.adjacency());
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0; n];
        for new in 0..n {
            let old = perm[new];
            first[new] = a.row(old).map(|(j, _)| inv[j]).filter(|&j| j <= new).min().unwrap_or(new);
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        let mut lower = vec![T::zero(); offset[n]];
        let mut diag = vec![0.0; n];
        for new in 0..n {
            let old = perm[new];
            for (j, v) in a.row(old) {
                let jn = inv[j];
                if jn < new {
                    lower[offset[new] + jn - first[new]] += v;
                } else if jn == new {
                    diag[new] += v.re();
                }
            }
        }
        let mut f = ProfileLdl { perm, first, offset, lower, diag };
        f.eliminate()?;
        Ok(f)
    }

    /// Dense Hermitian matrix, natural ordering, full profile.
    pub fn factor_dense(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let first = vec![0; n];
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + i);
        }
        let mut lower = Vec::with_capacity(offset[n]);
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..i {
                lower.push(a.get(i, j));
            }
            diag.push(a.get(i, i).re());
        }
        let mut f = ProfileLdl { perm: (0..n).collect(), first, offset, lower, diag };
        f.eliminate()?;
        Ok(f)
    }

    fn eliminate(&mut self) -> Result<()> {
        let n = self.diag.len();
        let scale = self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = self.first[i];
            let oi = self.offset[i];
            // g_ij = a_ij - sum_k g_ik conj(l_jk), stored in place of row i
            for j in fi..i {
                let fj = self.first[j];
                let oj = self.offset[j];
                let k0 = fi.max(fj);
                let mut acc = T::zero();
                for k in k0..j {
                    acc += self.lower[oi + k - fi] * self.lower[oj + k - fj].conj();
                }
                self.lower[oi + j - fi] -= acc;
            }
            let mut d = self.diag[i];
            for j in fi..i {
                let g = self.lower[oi + j - fi];
                let l = g.scale(1.0 / self.diag[j]);
                d -= (g * l.conj()).re();
                self.lower[oi + j - fi] = l;
            }
            if d.abs() <= 1e-300 || d.abs() < 1e-15 * scale * f64::EPSILON {
                return Err(Error::SolverFailure(format!("zero pivot at row {i}")));
            }
            self.diag[i] = d;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of negative pivots, i.e. negative eigenvalues of `A`.
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|d| **d < 0.0).count()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.negative_pivots() == 0
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let oi = self.offset[i];
            let mut acc = T::zero();
            for k in fi..i {
                acc += self.lower[oi + k - fi] * y[k];
            }
            y[i] -= acc;
        }
        for (yi, d) in y.iter_mut().zip(&self.diag) {
            *yi = yi.scale(1.0 / d);
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let oi = self.offset[i];
            let yi = y[i];
            for k in fi..i {
                let l = self.lower[oi + k - fi];
                y[k] -= l.conj() * yi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub value: f64,
    pub vector: Vec<T>,
    pub iterations: usize,
    pub residual: f64,
}

/// Eigenpair of `A x = mu B x` closest to `shift`, by inverse iteration with a
/// fixed shift. `factor` must factor `A - shift B`. The vector is returned
/// `B`-normalized.
pub fn inverse_iteration<T, A, B>(
    a: &A,
    b: &B,
    factor: &ProfileLdl<T>,
    start: Vec<T>,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair<T>>
where
    T: Scalar,
    A: Operator<T> + ?Sized,
    B: Operator<T> + ?Sized,
{
    let a_norm = a.norm_inf();
    let b_norm = b.norm_inf();
    let mut x = start;
    let normalize = |x: &mut Vec<T>| {
        let bx = b.apply(x);
        let nb = dot(x, &bx).re().sqrt();
        for v in x.iter_mut() {
            *v = v.scale(1.0 / nb);
        }
    };
    normalize(&mut x);
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let bx = b.apply(&x);
        let mut y = factor.solve(&bx);
        normalize(&mut y);
        x = y;
        let ax = a.apply(&x);
        let bx = b.apply(&x);
        let rho = dot(&x, &ax).re();
        let r: Vec<T> = ax.iter().zip(&bx).map(|(p, q)| *p - q.scale(rho)).collect();
        let xn = norm2(&x);
        residual = norm2(&r) / ((a_norm + rho.abs() * b_norm) * xn);
        if residual < tol {
            return Ok(EigenPair { value: rho, vector: x, iterations: it, residual });
        }
    }
    Err(Error::EigensolverStagnation { iterations: max_iter, residual })
}

/// Lowest eigenpair of the Hermitian-definite pencil `(A, B)` for sparse
/// matrices. A lower bound is located by inertia, the lowest eigenvalue is
/// isolated by bisection on the negative-pivot count, then polished by
/// shifted inverse iteration.
pub fn lowest_eigenpair<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    start: Vec<T>,
    tol: f64,
) -> Result<EigenPair<T>> {
    let perm = rcm_ordering(&CsrMatrix::combine(&[(a, 1.0), (b, 1.0)]).adjacency());
    let shifted = |sigma: f64| ProfileLdl::factor_with(&CsrMatrix::combine(&[(a, 1.0), (b, -sigma)]), perm.clone());
    lowest_of_pencil(a, b, shifted, start, tol)
}

/// [`lowest_eigenpair`] for dense matrices.
pub fn lowest_eigenpair_dense<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    start: Vec<T>,
    tol: f64,
) -> Result<EigenPair<T>> {
    let shifted = |sigma: f64| {
        let mut c = a.clone();
        for (v, w) in c.data.iter_mut().zip(&b.data) {
            *v -= w.scale(sigma);
        }
        ProfileLdl::factor_dense(&c)
    };
    lowest_of_pencil(a, b, shifted, start, tol)
}

fn lowest_of_pencil<T, A, B>(
    a: &A,
    b: &B,
    shifted: impl Fn(f64) -> Result<ProfileLdl<T>>,
    start: Vec<T>,
    tol: f64,
) -> Result<EigenPair<T>>
where
    T: Scalar,
    A: Operator<T>,
    B: Operator<T>,
{
    let count = |sigma: f64| shifted(sigma).map(|f| f.negative_pivots()).unwrap_or(usize::MAX);
    // the Rayleigh quotient of the start vector bounds mu_1 from above
    let rq = dot(&start, &a.apply(&start)).re() / dot(&start, &b.apply(&start)).re();
    let scale = (a.norm_inf() / b.norm_inf().max(f64::MIN_POSITIVE)).max(rq.abs()).max(1e-300);
    let mut hi = rq + 1e-9 * rq.abs().max(1e-9 * scale);
    let mut d = rq.abs().max(1e-9 * scale);
    let mut lo = rq - d;
    let mut guard = 0;
    while count(lo) != 0 {
        d *= 8.0;
        lo = rq - d;
        guard += 1;
        if guard > 60 {
            return Err(Error::SolverFailure("no lower bound for the pencil".into()));
        }
    }
    // isolate mu_1, then tighten so that the shift sits well below mu_2
    let mut isolated: Option<f64> = None;
    let mut extra = 0;
    for _ in 0..400 {
        if isolated.is_none() && count(hi) == 1 {
            isolated = Some(hi);
        }
        if let Some(h_iso) = isolated {
            let w = hi - lo;
            if extra >= 10 || w <= 0.05 * (h_iso - lo) || w <= 1e-3 * hi.abs().max(lo.abs()) {
                break;
            }
            extra += 1;
        }
        let mid = 0.5 * (lo + hi);
        match count(mid) {
            0 => lo = mid,
            _ => hi = mid,
        }
    }
    // shifted inverse iteration, re-shifting at the Rayleigh quotient
    let mut x = start;
    let mut shift = lo;
    let mut last = None;
    for _ in 0..8 {
        let factor = shifted(shift)?;
        match inverse_iteration(a, b, &factor, x.clone(), tol, 25) {
            Ok(pair) => {
                if pair.value > hi + 1e-8 * (hi.abs() + scale * 1e-8) {
                    return Err(Error::SolverFailure("inverse iteration left the lowest eigenvalue".into()));
                }
                return Ok(pair);
            }
            Err(Error::EigensolverStagnation { iterations, residual }) => {
                let pair = inverse_iteration(a, b, &factor, x, f64::INFINITY, 1)?;
                x = pair.vector;
                // stay strictly below the Rayleigh quotient so the pencil stays regular
                let rho = pair.value.min(hi);
                shift = (rho - 1e-9 * rho.abs().max(1e-12 * scale)).max(lo);
                last = Some((iterations, residual));
            }
            Err(e) => return Err(e),
        }
    }
    let (iterations, residual) = last.unwrap_or((0, f64::INFINITY));
    Err(Error::EigensolverStagnation { iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn ldl_solves_and_counts_inertia() {
        let n = 50;
        let a = laplace_1d(n);
        let f = ProfileLdl::factor(&a).unwrap();
        assert!(f.is_positive_definite());
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.apply(&x_true);
        let x = f.solve(&b);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-11);
        }
        // eigenvalues 2 - 2cos(k pi/(n+1)); shift 0.5 lies above a known count
        let sigma = 0.5;
        let expected = (1..=n)
            .filter(|k| 2.0 - 2.0 * (*k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() < sigma)
            .count();
        let id = CsrMatrix::from_triplets(n, (0..n).map(|i| (i, i, 1.0)));
        let shifted = CsrMatrix::combine(&[(&a, 1.0), (&id, -sigma)]);
        let f = ProfileLdl::factor(&shifted).unwrap();
        assert_eq!(f.negative_pivots(), expected);
    }

    #[test]
    fn complex_hermitian_solve() {
        let n = 6;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, Complex64::new(4.0, 0.0)));
            if i + 1 < n {
                let v = Complex64::new(-1.0, 0.5);
                t.push((i, i + 1, v));
                t.push((i + 1, i, v.conj()));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        assert!(a.hermitian_defect() == 0.0);
        let f = ProfileLdl::factor(&a).unwrap();
        let x_true: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let x = f.solve(&a.apply(&x_true));
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn lowest_eigenpair_of_laplacian() {
        let n = 40;
        let a = laplace_1d(n);
        let id = CsrMatrix::from_triplets(n, (0..n).map(|i| (i, i, 1.0)));
        let start = vec![1.0; n];
        let e = lowest_eigenpair(&a, &id, start, 1e-12).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((e.value - exact).abs() < 1e-12, "{} vs {}", e.value, exact);
    }

    #[test]
    fn dense_factor_matches_sparse() {
        let n = 8;
        let a = laplace_1d(n);
        let mut d = DenseMatrix::zeros(n);
        for (i, j, v) in a.triplets() {
            d.set(i, j, v);
        }
        let fs = ProfileLdl::factor(&a).unwrap();
        let fd = ProfileLdl::factor_dense(&d).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
        for (p, q) in fs.solve(&b).iter().zip(fd.solve(&b)) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
