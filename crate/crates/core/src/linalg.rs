//! Dense symmetric matrices and the semidefiniteness tests used by the
//! certificate verifier.

use serde::Serialize;

/// Dense symmetric matrix. Only the upper triangle is stored; reads of the
/// lower triangle are mirrored, so symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    // Packed upper triangle, row by row: (0,0) (0,1) .. (0,n-1) (1,1) ..
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            upper: vec![0.0; order * (order + 1) / 2],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.upper[k] = value;
    }

    /// Adds `value` to the symmetric pair (i, j) / (j, i); for `i == j` the
    /// diagonal entry grows by `value`.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.upper[k] += value;
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        assert!(c < self.order, "index ({i},{j}) out of range for order {}", self.order);
        let n = self.order;
        r * n - r * (r + 1) / 2 + c
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &SymMatrix) {
        assert_eq!(self.order, other.order);
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += alpha * b;
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.order, other.order);
        self.upper
            .iter()
            .zip(&other.upper)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `0.5 * (e_p - e_q)(e_p - e_q)^T` scaled by `alpha`.
    pub(crate) fn add_half_diff_outer(&mut self, alpha: f64, p: usize, q: usize) {
        if p == q {
            return;
        }
        self.add(p, p, 0.5 * alpha);
        self.add(q, q, 0.5 * alpha);
        self.add(p, q, -0.5 * alpha);
    }

    /// `0.5 * (e_p e_q^T + e_q e_p^T)` scaled by `alpha`.
    pub(crate) fn add_half_sym_outer(&mut self, alpha: f64, p: usize, q: usize) {
        if p == q {
            self.add(p, p, alpha);
        } else {
            self.add(p, q, 0.5 * alpha);
        }
    }

    /// Row-wise diagonal dominance with a nonnegative diagonal:
    /// `S_ii >= -slack` and `S_ii >= sum_{j != i} |S_ij| - slack` for every row.
    pub fn is_diagonally_dominant(&self, slack: f64) -> bool {
        (0..self.order).all(|i| {
            let diag = self.get(i, i);
            let off: f64 = (0..self.order).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum();
            diag >= -slack && diag >= off - slack
        })
    }

    /// Semidefiniteness decision by a diagonally pivoted Cholesky
    /// factorization. Pivots at or below `tol` end the factorization; the
    /// remaining Schur complement must then vanish to within `tol`.
    pub fn psd_test(&self, tol: f64) -> PsdTest {
        let n = self.order;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = self.get(i, j);
            }
        }
        let mut smallest_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, dmax) = (k..n)
                .map(|i| (i, w[i * n + i]))
                .fold((k, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(dmax > tol) {
                // Remaining block must be numerically zero.
                let mut min_diag = f64::INFINITY;
                let mut max_off = 0.0_f64;
                for i in k..n {
                    min_diag = min_diag.min(w[i * n + i]);
                    for j in k..i {
                        max_off = max_off.max(w[i * n + j].abs());
                    }
                }
                let psd = min_diag >= -tol && max_off <= tol && min_diag.is_finite();
                return PsdTest {
                    psd,
                    rank: k,
                    margin: min_diag.min(smallest_pivot),
                };
            }
            if p != k {
                swap_sym(&mut w, n, k, p);
            }
            let l_kk = dmax.sqrt();
            smallest_pivot = smallest_pivot.min(dmax);
            w[k * n + k] = l_kk;
            for i in k + 1..n {
                w[i * n + k] /= l_kk;
            }
            for j in k + 1..n {
                let l_jk = w[j * n + k];
                if l_jk == 0.0 {
                    continue;
                }
                for i in j..n {
                    let v = w[i * n + j] - w[i * n + k] * l_jk;
                    w[i * n + j] = v;
                    w[j * n + i] = v;
                }
            }
        }
        PsdTest {
            psd: true,
            rank: n,
            margin: if n == 0 { 0.0 } else { smallest_pivot },
        }
    }
}

fn swap_sym(w: &mut [f64], n: usize, a: usize, b: usize) {
    for j in 0..n {
        w.swap(a * n + j, b * n + j);
    }
    for i in 0..n {
        w.swap(i * n + a, i * n + b);
    }
}

/// Result of [`SymMatrix::psd_test`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdTest {
    pub psd: bool,
    /// Number of pivots accepted before the remainder fell below tolerance.
    pub rank: usize,
    /// Smallest pivot, or the smallest diagonal entry of the rejected
    /// remainder; near zero for singular semidefinite matrices and negative
    /// for indefinite ones.
    pub margin: f64,
}
