//! Legendre–Gauss–Lobatto nodes, weights, derivative matrix and the
//! nodal-to-modal Legendre transform for one polynomial degree.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::real::Real;

const NEWTON_MAX_ITER: usize = 100;

/// Dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    size: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![T::zero(); size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.size..(r + 1) * self.size]
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.size)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.size);
        for r in 0..self.size {
            for c in 0..self.size {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    /// Gauss–Jordan inverse with partial pivoting. `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.size;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    a[(x, col)]
                        .abs()
                        .partial_cmp(&a[(y, col)].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[(pivot, col)] == T::zero() {
                return None;
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                    inv.data.swap(pivot * n + c, col * n + c);
                }
            }
            let scale = a[(col, col)].recip();
            for c in 0..n {
                a[(col, c)] = a[(col, c)] * scale;
                inv[(col, c)] = inv[(col, c)] * scale;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == T::zero() {
                    continue;
                }
                for c in 0..n {
                    a[(r, c)] = a[(r, c)] - factor * a[(col, c)];
                    inv[(r, c)] = inv[(r, c)] - factor * inv[(col, c)];
                }
            }
        }
        Some(inv)
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.size + c]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.size + c]
    }
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence. For `n = 0` the
/// second entry is zero.
pub fn legendre_pair<T: Real>(n: usize, x: T) -> (T, T) {
    if n == 0 {
        return (T::one(), T::zero());
    }
    let mut prev = T::one();
    let mut cur = x;
    for k in 1..n {
        let k_t = T::from_usize_lossy(k);
        let next = ((k_t + k_t + T::one()) * x * cur - k_t * prev) / (k_t + T::one());
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Legendre polynomial `P_n(x)`, normalised so that `P_n(1) = 1`.
pub fn legendre<T: Real>(n: usize, x: T) -> T {
    legendre_pair(n, x).0
}

/// One-dimensional LGL operators for polynomial degree `N`.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct ElementOperators<T> {
    degree: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
    /// `D[(j, i)] = l_i'(xi_j)`
    deriv: SquareMatrix<T>,
    /// Legendre Vandermonde `V[(i, m)] = P_m(xi_i)`; maps modal to nodal.
    vandermonde: SquareMatrix<T>,
    /// `V^{-1}`; maps nodal to modal.
    modal_transform: SquareMatrix<T>,
}

impl<T: Real> ElementOperators<T> {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidDegree(degree));
        }
        let nodes = lgl_nodes::<T>(degree);
        let n_t = T::from_usize_lossy(degree);
        let two = T::lit(2.0);
        let weights = nodes
            .iter()
            .map(|&x| {
                let p = legendre(degree, x);
                two / (n_t * (n_t + T::one()) * p * p)
            })
            .collect();
        let deriv = derivative_matrix(&nodes);

        let size = degree + 1;
        let mut vandermonde = SquareMatrix::zeros(size);
        for (i, &x) in nodes.iter().enumerate() {
            for m in 0..size {
                vandermonde[(i, m)] = legendre(m, x);
            }
        }
        let modal_transform = vandermonde
            .inverse()
            .expect("Legendre Vandermonde at distinct LGL nodes is nonsingular");

        Ok(Self {
            degree,
            nodes,
            weights,
            deriv,
            vandermonde,
            modal_transform,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `N + 1`.
    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn deriv_matrix(&self) -> &SquareMatrix<T> {
        &self.deriv
    }

    pub fn vandermonde(&self) -> &SquareMatrix<T> {
        &self.vandermonde
    }

    pub fn modal_transform(&self) -> &SquareMatrix<T> {
        &self.modal_transform
    }

    /// Legendre coefficients `m` with `sum_k m_k P_k(xi_i) = nodal_i`.
    pub fn nodal_to_modal(&self, nodal: &[T]) -> Result<Vec<T>> {
        self.check_len(nodal.len())?;
        Ok(self.modal_transform.mul_vec(nodal))
    }

    pub fn modal_to_nodal(&self, modal: &[T]) -> Result<Vec<T>> {
        self.check_len(modal.len())?;
        Ok(self.vandermonde.mul_vec(modal))
    }

    /// Tensor-product transform of an `(N+1) x (N+1)` nodal array stored
    /// as `values[i * (N+1) + j]`, `i` along the first reference axis.
    /// Output uses the same layout with modal indices.
    pub fn nodal_to_modal_2d(&self, nodal: &[T]) -> Result<Vec<T>> {
        let n = self.n_nodes();
        self.check_len_2d(nodal.len())?;
        let t = &self.modal_transform;
        // along j first, then along i
        let mut tmp = vec![T::zero(); n * n];
        for i in 0..n {
            for q in 0..n {
                tmp[i * n + q] = (0..n).map(|j| t[(q, j)] * nodal[i * n + j]).sum();
            }
        }
        let mut out = vec![T::zero(); n * n];
        for p in 0..n {
            for q in 0..n {
                out[p * n + q] = (0..n).map(|i| t[(p, i)] * tmp[i * n + q]).sum();
            }
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_nodes(),
                got: len,
            });
        }
        Ok(())
    }

    fn check_len_2d(&self, len: usize) -> Result<()> {
        let n = self.n_nodes();
        if len != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: len,
            });
        }
        Ok(())
    }
}

/// Roots of `(1 - x^2) P_N'(x)` in increasing order.
///
/// Newton iteration on `x P_N - P_{N-1}`, which vanishes exactly at the
/// LGL points, started from Chebyshev–Gauss–Lobatto points.
fn lgl_nodes<T: Real>(degree: usize) -> Vec<T> {
    let n = degree;
    let n1 = T::from_usize_lossy(n + 1);
    let tol = T::lit(1e-15).max(T::epsilon() * T::lit(4.0));
    let mut x: Vec<T> = (0..=n)
        .map(|j| -(T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(n)).cos())
        .collect();
    x[0] = -T::one();
    x[n] = T::one();
    for xj in x.iter_mut().take(n).skip(1) {
        for _ in 0..NEWTON_MAX_ITER {
            let (p, p_prev) = legendre_pair(n, *xj);
            let step = (*xj * p - p_prev) / (n1 * p);
            *xj = *xj - step;
            if step.abs() <= tol {
                break;
            }
        }
    }
    // enforce exact antisymmetry
    let mut sym: Vec<T> = (0..=n).map(|j| (x[j] - x[n - j]) * T::lit(0.5)).collect();
    if n.is_multiple_of(2) {
        sym[n / 2] = T::zero();
    }
    sym
}

fn derivative_matrix<T: Real>(nodes: &[T]) -> SquareMatrix<T> {
    let n = nodes.len();
    let bary: Vec<T> = (0..n)
        .map(|j| {
            let prod = (0..n)
                .filter(|&k| k != j)
                .fold(T::one(), |acc, k| acc * (nodes[j] - nodes[k]));
            prod.recip()
        })
        .collect();
    let mut d = SquareMatrix::zeros(n);
    for r in 0..n {
        let mut diag = T::zero();
        for c in 0..n {
            if c != r {
                let v = (bary[c] / bary[r]) / (nodes[r] - nodes[c]);
                d[(r, c)] = v;
                diag = diag - v;
            }
        }
        d[(r, r)] = diag;
    }
    d
}
