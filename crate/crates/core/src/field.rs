//! Uniform periodic Cartesian mesh and nodal solution storage.

use crate::error::{Error, NodeLocation, Result};
use crate::lgl::ElementOperators;
use crate::physics::{ConservativeState, GasModel};
use crate::real::Real;

/// Uniform, doubly periodic quadrilateral mesh on `[x0, x1] x [y0, y1]`.
///
/// Elements are numbered row-major: `k = ey * elements_x + ex`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh2D<T> {
    elements_x: usize,
    elements_y: usize,
    x0: T,
    x1: T,
    y0: T,
    y1: T,
}

/// Face neighbours of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbors {
    pub left: usize,
    pub right: usize,
    pub bottom: usize,
    pub top: usize,
}

impl Neighbors {
    pub fn as_array(&self) -> [usize; 4] {
        [self.left, self.right, self.bottom, self.top]
    }
}

impl<T: Real> Mesh2D<T> {
    pub fn new(elements_x: usize, elements_y: usize, x_range: (T, T), y_range: (T, T)) -> Result<Self> {
        if elements_x == 0 || elements_y == 0 {
            return Err(Error::InvalidMesh(format!(
                "need at least one element per axis, got {elements_x} x {elements_y}"
            )));
        }
        if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) {
            return Err(Error::InvalidMesh("domain bounds must be increasing".into()));
        }
        Ok(Self {
            elements_x,
            elements_y,
            x0: x_range.0,
            x1: x_range.1,
            y0: y_range.0,
            y1: y_range.1,
        })
    }

    pub fn elements_x(&self) -> usize {
        self.elements_x
    }

    pub fn elements_y(&self) -> usize {
        self.elements_y
    }

    pub fn n_elements(&self) -> usize {
        self.elements_x * self.elements_y
    }

    pub fn x_range(&self) -> (T, T) {
        (self.x0, self.x1)
    }

    pub fn y_range(&self) -> (T, T) {
        (self.y0, self.y1)
    }

    pub fn dx(&self) -> T {
        (self.x1 - self.x0) / T::from_usize_lossy(self.elements_x)
    }

    pub fn dy(&self) -> T {
        (self.y1 - self.y0) / T::from_usize_lossy(self.elements_y)
    }

    /// `dx / 2`, the metric factor of x-direction operators.
    pub fn metric_x(&self) -> T {
        self.dx() * T::lit(0.5)
    }

    pub fn metric_y(&self) -> T {
        self.dy() * T::lit(0.5)
    }

    /// Volume Jacobian `(dx / 2)(dy / 2)`.
    pub fn jacobian(&self) -> T {
        self.metric_x() * self.metric_y()
    }

    pub fn area(&self) -> T {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    #[inline]
    pub fn element_index(&self, ex: usize, ey: usize) -> usize {
        ey * self.elements_x + ex
    }

    #[inline]
    pub fn element_coords(&self, k: usize) -> (usize, usize) {
        (k % self.elements_x, k / self.elements_x)
    }

    pub fn neighbors(&self, k: usize) -> Neighbors {
        let (ex, ey) = self.element_coords(k);
        let (nx, ny) = (self.elements_x, self.elements_y);
        Neighbors {
            left: self.element_index((ex + nx - 1) % nx, ey),
            right: self.element_index((ex + 1) % nx, ey),
            bottom: self.element_index(ex, (ey + ny - 1) % ny),
            top: self.element_index(ex, (ey + 1) % ny),
        }
    }

    /// Physical coordinates of LGL node `(i, j)` of element `k`.
    pub fn node_position(&self, ops: &ElementOperators<T>, k: usize, i: usize, j: usize) -> (T, T) {
        let (ex, ey) = self.element_coords(k);
        let half = T::lit(0.5);
        let xc = self.x0 + self.dx() * (T::from_usize_lossy(ex) + half);
        let yc = self.y0 + self.dy() * (T::from_usize_lossy(ey) + half);
        (
            xc + self.metric_x() * ops.nodes()[i],
            yc + self.metric_y() * ops.nodes()[j],
        )
    }
}

/// Conservative variables at every LGL node of every element.
///
/// Layout is element-major, then node index `i` (x direction), then `j`
/// (y direction): `values[(k * n + i) * n + j]` with `n = N + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField<T> {
    n: usize,
    n_elements: usize,
    values: Vec<ConservativeState<T>>,
}

/// Nodal solution values.
pub type SolutionField<T> = NodalField<T>;

impl<T: Real> NodalField<T> {
    pub fn zeros(n_elements: usize, degree: usize) -> Self {
        let n = degree + 1;
        Self {
            n,
            n_elements,
            values: vec![ConservativeState::zero(); n_elements * n * n],
        }
    }

    pub fn uniform(n_elements: usize, degree: usize, state: ConservativeState<T>) -> Self {
        let n = degree + 1;
        Self {
            n,
            n_elements,
            values: vec![state; n_elements * n * n],
        }
    }

    /// Fill by evaluating `f(x, y)` at every node.
    pub fn from_fn(
        mesh: &Mesh2D<T>,
        ops: &ElementOperators<T>,
        mut f: impl FnMut(T, T) -> ConservativeState<T>,
    ) -> Self {
        let mut field = Self::zeros(mesh.n_elements(), ops.degree());
        let n = field.n;
        for k in 0..mesh.n_elements() {
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = mesh.node_position(ops, k, i, j);
                    *field.get_mut(k, i, j) = f(x, y);
                }
            }
        }
        field
    }

    pub fn degree(&self) -> usize {
        self.n - 1
    }

    /// Nodes per direction, `N + 1`.
    pub fn nodes_per_side(&self) -> usize {
        self.n
    }

    pub fn nodes_per_element(&self) -> usize {
        self.n * self.n
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.n + i) * self.n + j
    }

    #[inline]
    pub fn location(&self, flat: usize) -> NodeLocation {
        let nn = self.n * self.n;
        let local = flat % nn;
        NodeLocation {
            element: flat / nn,
            i: local / self.n,
            j: local % self.n,
        }
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> &ConservativeState<T> {
        &self.values[self.index(k, i, j)]
    }

    #[inline]
    pub fn get_mut(&mut self, k: usize, i: usize, j: usize) -> &mut ConservativeState<T> {
        let idx = self.index(k, i, j);
        &mut self.values[idx]
    }

    pub fn values(&self) -> &[ConservativeState<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [ConservativeState<T>] {
        &mut self.values
    }

    pub fn element(&self, k: usize) -> &[ConservativeState<T>] {
        let nn = self.n * self.n;
        &self.values[k * nn..(k + 1) * nn]
    }

    pub fn element_mut(&mut self, k: usize) -> &mut [ConservativeState<T>] {
        let nn = self.n * self.n;
        &mut self.values[k * nn..(k + 1) * nn]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n && self.n_elements == other.n_elements
    }

    pub(crate) fn check_shape(&self, other: &Self) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    /// `self += scale * other`
    pub fn axpy(&mut self, scale: T, other: &Self) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a = a.axpy(scale, b);
        }
    }

    pub fn scale(&mut self, s: T) {
        for a in &mut self.values {
            *a = *a * s;
        }
    }

    /// First node that is not strictly admissible, if any.
    pub fn first_inadmissible(&self, gas: &GasModel<T>) -> Option<usize> {
        self.values.iter().position(|u| !gas.is_admissible(u))
    }

    /// Quadrature-weighted integral of each conserved variable.
    pub fn totals(&self, ops: &ElementOperators<T>, mesh: &Mesh2D<T>) -> [T; 4] {
        let w = ops.weights();
        let jac = mesh.jacobian();
        let mut acc = [T::zero(); 4];
        for k in 0..self.n_elements {
            for i in 0..self.n {
                for j in 0..self.n {
                    let wij = w[i] * w[j] * jac;
                    let u = self.get(k, i, j);
                    for (a, v) in acc.iter_mut().zip(u.0.iter()) {
                        *a = *a + wij * *v;
                    }
                }
            }
        }
        acc
    }
}
