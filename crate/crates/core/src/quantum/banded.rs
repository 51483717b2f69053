//! Banded Hermitian storage and a lowest-eigenpair solver for real symmetric
//! band matrices.
//!
//! Eigenvalues come from bisection on the Sylvester inertia of `A − σI`
//! (negative pivots of a banded LDLᵀ), eigenvectors from inverse iteration
//! with a partially pivoted band LU. Cost is `O(N p²)` per inertia count, so
//! grids with thousands of points stay cheap.

use nalgebra::{Complex, DMatrix};

type C64 = Complex<f64>;

/// Square matrix with equal lower and upper half bandwidth `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    half_width: usize,
    // row-major: entry (i, j) lives at i * (2p + 1) + (j + p - i)
    data: Vec<C64>,
}

impl BandedMatrix {
    pub fn zeros(dim: usize, half_width: usize) -> Self {
        Self { dim, half_width, data: vec![C64::new(0.0, 0.0); dim * (2 * half_width + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let p = self.half_width;
        if i >= self.dim || j >= self.dim || j + p < i || j > i + p {
            return None;
        }
        Some(i * (2 * p + 1) + (j + p - i))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.slot(i, j).map_or(C64::new(0.0, 0.0), |s| self.data[s])
    }

    /// Sets entry `(i, j)`. Panics if the entry lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = value;
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let p = self.half_width;
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(p);
                let hi = (i + p).min(self.dim - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|M_ij − conj(M_ji)|` over the band.
    pub fn hermiticity_defect(&self) -> f64 {
        let p = self.half_width;
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..(i + p + 1).min(self.dim) {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Lower band `band[k][i] = A[i][i-k]` if every entry is real.
    pub(crate) fn real_lower_band(&self) -> Option<Vec<Vec<f64>>> {
        if self.data.iter().any(|z| z.im != 0.0) {
            return None;
        }
        let p = self.half_width;
        let band = (0..=p)
            .map(|k| (0..self.dim).map(|i| if i >= k { self.get(i, i - k).re } else { 0.0 }).collect())
            .collect();
        Some(band)
    }
}

/// Real symmetric band matrix in lower-band storage.
pub(crate) struct SymmetricBand {
    n: usize,
    p: usize,
    band: Vec<Vec<f64>>,
}

impl SymmetricBand {
    pub(crate) fn new(band: Vec<Vec<f64>>) -> Self {
        let p = band.len() - 1;
        let n = band[0].len();
        Self { n, p, band }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.p {
            0.0
        } else {
            self.band[k][i]
        }
    }

    fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let lo_j = i.saturating_sub(self.p);
            let hi_j = (i + self.p).min(self.n - 1);
            let radius: f64 = (lo_j..=hi_j).filter(|&j| j != i).map(|j| self.at(i, j).abs()).sum();
            lo = lo.min(self.at(i, i) - radius);
            hi = hi.max(self.at(i, i) + radius);
        }
        (lo, hi)
    }

    fn norm_estimate(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `sigma`.
    fn count_below(&self, sigma: f64, tiny: f64) -> usize {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        // l[i * w + k] = L[i][i - k]
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        let mut negatives = 0;
        for i in 0..n {
            let start = i.saturating_sub(p);
            for j in start..i {
                let mut s = self.at(i, j);
                for m in start..j {
                    s -= l[i * w + (i - m)] * l[j * w + (j - m)] * d[m];
                }
                l[i * w + (i - j)] = s / d[j];
            }
            let mut dii = self.at(i, i) - sigma;
            for m in start..i {
                let lim = l[i * w + (i - m)];
                dii -= lim * lim * d[m];
            }
            if dii == 0.0 {
                dii = -tiny;
            }
            if dii < 0.0 {
                negatives += 1;
            }
            d[i] = dii;
        }
        negatives
    }

    /// Lowest `levels` eigenvalues in ascending order.
    pub(crate) fn lowest_eigenvalues(&self, levels: usize) -> Vec<f64> {
        let (mut lo0, hi0) = self.gershgorin();
        let norm = self.norm_estimate();
        let tiny = f64::EPSILON * norm;
        let mut out = Vec::with_capacity(levels);
        for k in 0..levels {
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..200 {
                let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
                if hi - lo <= tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid, tiny) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let lambda = 0.5 * (lo + hi);
            out.push(lambda);
            lo0 = lo;
        }
        out
    }

    /// Unit eigenvector for an (accurate) eigenvalue by inverse iteration,
    /// orthogonalized against `previous`.
    pub(crate) fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
        let lu = BandLu::factor(self, lambda);
        let n = self.n;
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin()).collect();
        for _ in 0..4 {
            for v in previous {
                let dot: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= dot * vi);
            }
            normalize(&mut x);
            x = lu.solve(x);
            normalize(&mut x);
        }
        for v in previous {
            let dot: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= dot * vi);
        }
        normalize(&mut x);
        x
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Partially pivoted LU of `A − σI` for a symmetric band matrix.
struct BandLu {
    n: usize,
    p: usize,
    // row at position i holds columns [i - p, i + 2p]
    rows: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn width(p: usize) -> usize {
        3 * p + 1
    }

    fn idx(&self, row: usize, col: usize) -> usize {
        row * Self::width(self.p) + (col + self.p - row)
    }

    fn factor(a: &SymmetricBand, sigma: f64) -> Self {
        let (n, p) = (a.n, a.p);
        let w = Self::width(p);
        let mut lu = Self { n, p, rows: vec![0.0; n * w], mult: vec![0.0; n * p.max(1)], piv: vec![0; n] };
        for i in 0..n {
            for j in i.saturating_sub(p)..=(i + p).min(n - 1) {
                let v = a.at(i, j) - if i == j { sigma } else { 0.0 };
                let s = lu.idx(i, j);
                lu.rows[s] = v;
            }
        }
        let floor = f64::EPSILON * a.norm_estimate();
        for j in 0..n {
            let last = (j + p).min(n - 1);
            let mut r = j;
            let mut best = lu.rows[lu.idx(j, j)].abs();
            for cand in (j + 1)..=last {
                let v = lu.rows[lu.idx(cand, j)].abs();
                if v > best {
                    best = v;
                    r = cand;
                }
            }
            lu.piv[j] = r;
            let top = (j + 2 * p).min(n - 1);
            if r != j {
                for c in j..=top {
                    let (a_idx, b_idx) = (lu.idx(j, c), lu.idx(r, c));
                    lu.rows.swap(a_idx, b_idx);
                }
            }
            let pivot_idx = lu.idx(j, j);
            if lu.rows[pivot_idx].abs() < floor {
                lu.rows[pivot_idx] = if lu.rows[pivot_idx] < 0.0 { -floor } else { floor };
            }
            let pivot = lu.rows[pivot_idx];
            for (k, row) in ((j + 1)..=last).enumerate() {
                let factor = lu.rows[lu.idx(row, j)] / pivot;
                lu.mult[j * p + k] = factor;
                let zero_idx = lu.idx(row, j);
                lu.rows[zero_idx] = 0.0;
                if factor != 0.0 {
                    for c in (j + 1)..=top {
                        let (dst, src) = (lu.idx(row, c), lu.idx(j, c));
                        lu.rows[dst] -= factor * lu.rows[src];
                    }
                }
            }
        }
        lu
    }

    fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        for j in 0..n {
            b.swap(j, self.piv[j]);
            let last = (j + p).min(n - 1);
            for (k, row) in ((j + 1)..=last).enumerate() {
                b[row] -= self.mult[j * p + k] * b[j];
            }
        }
        for i in (0..n).rev() {
            let top = (i + 2 * p).min(n - 1);
            let mut s = b[i];
            for c in (i + 1)..=top {
                s -= self.rows[self.idx(i, c)] * b[c];
            }
            b[i] = s / self.rows[self.idx(i, i)];
        }
        b
    }
}
