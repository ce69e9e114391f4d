//! Dense SVD-based rank, kernel and cokernel computations.
//!
//! Every rank decision uses the same threshold: a singular value counts as
//! nonzero when it exceeds `tol * max(1, sigma_max) * max(rows, cols)`.

use nalgebra::{DMatrix, DVector, SVD};
use serde::Serialize;

use crate::scalar::Scalar;

/// Orthonormal column basis of a linear subspace of `R^ambient_dim`.
#[derive(Clone, Debug)]
pub struct SubspaceBasis<T: Scalar> {
    ambient_dim: usize,
    basis: DMatrix<T>,
    tol: T,
}

impl<T: Scalar> SubspaceBasis<T> {
    /// The zero subspace.
    pub fn zero(ambient_dim: usize, tol: T) -> Self {
        Self {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
            tol,
        }
    }

    /// The whole ambient space, with the standard basis.
    pub fn full(ambient_dim: usize, tol: T) -> Self {
        Self {
            ambient_dim,
            basis: DMatrix::identity(ambient_dim, ambient_dim),
            tol,
        }
    }

    /// Orthonormal basis for the column span of `vectors`.
    pub fn span_of(vectors: &DMatrix<T>, tol: T) -> Self {
        let ambient_dim = vectors.nrows();
        if vectors.ncols() == 0 || ambient_dim == 0 {
            return Self::zero(ambient_dim, tol);
        }
        let svd = FullSvd::new(&vectors.transpose());
        // Row space of the transpose is the column space of `vectors`.
        let keep: Vec<usize> = (0..svd.sv.len())
            .filter(|&i| svd.sv[i] > svd.threshold(tol))
            .collect();
        let mut basis = DMatrix::zeros(ambient_dim, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            basis.set_column(c, &svd.v.column(i));
        }
        Self {
            ambient_dim,
            basis,
            tol,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Number of basis vectors.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Columns are the orthonormal spanning vectors.
    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<T> {
        &self.basis * self.basis.transpose()
    }

    /// Euclidean distance from `v` to the subspace.
    pub fn distance(&self, v: &DVector<T>) -> T {
        (v - &self.basis * (self.basis.transpose() * v)).norm()
    }

    /// Largest distance from a column of `other` to this subspace.
    pub fn containment_residual(&self, other: &SubspaceBasis<T>) -> T {
        let diff = other.basis() - &self.basis * (self.basis.transpose() * other.basis());
        max_abs(&diff)
    }

    /// Whether `other` lies inside this subspace up to `10 * tol`.
    pub fn contains(&self, other: &SubspaceBasis<T>) -> bool {
        self.containment_residual(other) <= T::lit(10.0) * self.tol
    }

    /// Intersection of two subspaces of the same ambient space.
    ///
    /// Computed as the kernel of the stacked complement projectors
    /// `[I - P_a; I - P_b]`.
    pub fn intersection(&self, other: &SubspaceBasis<T>) -> SubspaceBasis<T> {
        assert_eq!(
            self.ambient_dim, other.ambient_dim,
            "ambient dimension mismatch"
        );
        let n = self.ambient_dim;
        let id = DMatrix::<T>::identity(n, n);
        let ca = &id - self.projector();
        let cb = &id - other.projector();
        let mut stacked = DMatrix::zeros(2 * n, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&ca);
        stacked.view_mut((n, 0), (n, n)).copy_from(&cb);
        kernel_basis(&stacked, self.tol)
    }

    /// Orthonormal basis of the part of `self` orthogonal to `inner`.
    pub fn orthogonal_complement_within(&self, inner: &SubspaceBasis<T>) -> SubspaceBasis<T> {
        let residual = &self.basis - inner.projector() * &self.basis;
        SubspaceBasis::span_of(&residual, self.tol)
    }

    /// Maps the subspace through an injective linear map and re-orthonormalizes.
    pub fn map(&self, linear: &DMatrix<T>) -> SubspaceBasis<T> {
        SubspaceBasis::span_of(&(linear * &self.basis), self.tol)
    }

    /// Trace of `op` compressed to this subspace, `tr(Q^T op Q)`.
    pub fn compressed_trace(&self, op: &DMatrix<T>) -> T {
        (self.basis.transpose() * op * &self.basis).trace()
    }

    /// Largest deviation of `Q^T Q` from the identity.
    pub fn orthonormality_residual(&self) -> T {
        let k = self.dim();
        max_abs(&(self.basis.transpose() * &self.basis - DMatrix::identity(k, k)))
    }
}

/// Rank and threshold evidence from a singular value decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankEvidence {
    pub rank: usize,
    pub threshold: f64,
    pub sigma_max: f64,
}

/// SVD with a complete set of right singular vectors.
struct FullSvd<T: Scalar> {
    rows: usize,
    cols: usize,
    sv: DVector<T>,
    /// `cols x cols`, columns are right singular vectors.
    v: DMatrix<T>,
}

impl<T: Scalar> FullSvd<T> {
    fn new(m: &DMatrix<T>) -> Self {
        let (rows, cols) = m.shape();
        if cols == 0 {
            return Self {
                rows,
                cols,
                sv: DVector::zeros(0),
                v: DMatrix::zeros(0, 0),
            };
        }
        if rows == 0 {
            return Self {
                rows,
                cols,
                sv: DVector::zeros(cols),
                v: DMatrix::identity(cols, cols),
            };
        }
        // The thin SVD only returns min(rows, cols) right vectors; zero rows
        // complete it without changing the row space.
        let padded;
        let work = if rows < cols {
            let mut p = DMatrix::zeros(cols, cols);
            p.view_mut((0, 0), (rows, cols)).copy_from(m);
            padded = p;
            &padded
        } else {
            m
        };
        let svd = SVD::new(work.clone(), false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        Self {
            rows,
            cols,
            sv: svd.singular_values,
            v: v_t.transpose(),
        }
    }

    fn sigma_max(&self) -> T {
        self.sv.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    fn threshold(&self, tol: T) -> T {
        let scale = T::one().max(self.sigma_max());
        tol * scale * T::int(self.rows.max(self.cols) as i64)
    }

    fn rank(&self, tol: T) -> usize {
        let t = self.threshold(tol);
        self.sv.iter().filter(|&&s| s > t).count()
    }

    fn null_vectors(&self, tol: T) -> DMatrix<T> {
        let t = self.threshold(tol);
        let idx: Vec<usize> = (0..self.sv.len()).filter(|&i| self.sv[i] <= t).collect();
        let mut out = DMatrix::zeros(self.cols, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            out.set_column(c, &self.v.column(i));
        }
        out
    }
}

/// Effective singular-value threshold used for `m` at tolerance `tol`.
pub fn rank_evidence<T: Scalar>(m: &DMatrix<T>, tol: T) -> RankEvidence {
    let svd = FullSvd::new(m);
    RankEvidence {
        rank: svd.rank(tol),
        threshold: svd.threshold(tol).as_f64(),
        sigma_max: svd.sigma_max().as_f64(),
    }
}

/// Number of singular values above the effective threshold.
pub fn numeric_rank<T: Scalar>(m: &DMatrix<T>, tol: T) -> usize {
    FullSvd::new(m).rank(tol)
}

/// Orthonormal basis of `{x : m x = 0}`.
pub fn kernel_basis<T: Scalar>(m: &DMatrix<T>, tol: T) -> SubspaceBasis<T> {
    let svd = FullSvd::new(m);
    SubspaceBasis {
        ambient_dim: m.ncols(),
        basis: svd.null_vectors(tol),
        tol,
    }
}

/// Orthonormal basis of `{w : w^T m = 0}`.
pub fn cokernel_basis<T: Scalar>(m: &DMatrix<T>, tol: T) -> SubspaceBasis<T> {
    kernel_basis(&m.transpose(), tol)
}

/// Largest absolute entry, zero for empty matrices.
pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

/// Kronecker product `a (x) b`.
pub fn kron<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a.kronecker(b)
}

/// Column-stacked vectorization of a matrix.
pub fn vec_of<T: Scalar>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`] for a square `d x d` matrix.
pub fn unvec<T: Scalar>(v: &[T], d: usize) -> DMatrix<T> {
    DMatrix::from_column_slice(d, d, v)
}
