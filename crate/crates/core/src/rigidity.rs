//! Strict, affine and restricted rigidity matrices and the subspaces and
//! Maxwell-Calladine counts derived from them.
//!
//! Three coordinate systems appear on the domain side:
//!
//! * raw: `(u, vec M)` with `M = A Z`, the domain of `[R X]`;
//! * affine: `(u, vec A)`, where symmetry representations act;
//! * restricted: `(u, alpha)` with `A = sum alpha_j A_j` over a basis of a
//!   [`MatrixSpace`], the domain of [`restricted_operator`].
//!
//! `vec` stacks columns. Flex and rigid-motion subspaces are returned in raw
//! coordinates so that they can be compared for every choice of space.
//!
//! The row of edge `e = [(kappa,k), (tau,k')]` evaluates
//! `<v_e, u_kappa - u_tau + M delta(e)>`, and a pair `(u, A)` extends to the
//! infinite framework as `u_{kappa,k} = u_kappa - A Z k`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::CrystalFramework;
use crate::linalg::{
    self, cokernel_basis, kernel_basis, numeric_rank, unvec, vec_of, SubspaceBasis,
};
use crate::scalar::Scalar;

/// Per-vertex velocities together with an affine velocity matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineVelocity<T: Scalar> {
    /// Blocks `u_kappa`, `d` entries per vertex class.
    pub u: DVector<T>,
    pub a: DMatrix<T>,
}

impl<T: Scalar> AffineVelocity<T> {
    pub fn zero(d: usize, vertices: usize) -> Self {
        Self {
            u: DVector::zeros(d * vertices),
            a: DMatrix::zeros(d, d),
        }
    }

    pub fn velocity(&self, kappa: usize) -> DVector<T> {
        let d = self.a.nrows();
        self.u.rows(kappa * d, d).into_owned()
    }

    /// Velocity of vertex `(kappa, k)` in the infinite extension.
    pub fn extended_velocity(&self, z: &DMatrix<T>, kappa: usize, k: &[i64]) -> DVector<T> {
        let kv = DVector::from_iterator(k.len(), k.iter().map(|&x| T::int(x)));
        self.velocity(kappa) - &self.a * z * kv
    }

    /// Uniform translation by `c`.
    pub fn translation(c: &DVector<T>, vertices: usize) -> Self {
        let d = c.len();
        let mut u = DVector::zeros(d * vertices);
        for k in 0..vertices {
            u.rows_mut(k * d, d).copy_from(c);
        }
        Self {
            u,
            a: DMatrix::zeros(d, d),
        }
    }

    /// Infinitesimal rotation `x -> S x` about the origin, `S` skew.
    pub fn rotation<U: Scalar>(fw: &CrystalFramework<U>, s: &DMatrix<U>) -> AffineVelocity<U> {
        let d = fw.dim();
        let mut u = DVector::zeros(d * fw.vertex_count());
        for (k, v) in fw.vertices().iter().enumerate() {
            u.rows_mut(k * d, d).copy_from(&(s * &v.position));
        }
        AffineVelocity { u, a: -s }
    }
}

/// Encodes `(u, A)` as `(u, vec(A Z))`.
pub fn encode_raw<T: Scalar>(fw: &CrystalFramework<T>, x: &AffineVelocity<T>) -> DVector<T> {
    let m = &x.a * fw.lattice().matrix();
    concat(&x.u, &vec_of(&m))
}

/// Encodes `(u, A)` as `(u, vec A)`.
pub fn encode_affine<T: Scalar>(x: &AffineVelocity<T>) -> DVector<T> {
    concat(&x.u, &vec_of(&x.a))
}

/// Decodes raw coordinates `(u, vec M)` into `(u, A = M Z^{-1})`.
pub fn decode_raw<T: Scalar>(fw: &CrystalFramework<T>, x: &DVector<T>) -> AffineVelocity<T> {
    let d = fw.dim();
    let n = d * fw.vertex_count();
    let m = unvec(&x.as_slice()[n..n + d * d], d);
    AffineVelocity {
        u: x.rows(0, n).into_owned(),
        a: m * fw.lattice().inverse(),
    }
}

/// Decodes affine coordinates `(u, vec A)`.
pub fn decode_affine<T: Scalar>(fw: &CrystalFramework<T>, x: &DVector<T>) -> AffineVelocity<T> {
    let d = fw.dim();
    let n = d * fw.vertex_count();
    AffineVelocity {
        u: x.rows(0, n).into_owned(),
        a: unvec(&x.as_slice()[n..n + d * d], d),
    }
}

fn concat<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> DVector<T> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// The strict motif rigidity matrix `R` and the affine block `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidityMatrices<T: Scalar> {
    /// `|F_e| x d|F_v|`.
    pub strict: DMatrix<T>,
    /// `|F_e| x d^2`, acting on `vec(A Z)`.
    pub affine: DMatrix<T>,
}

impl<T: Scalar> RigidityMatrices<T> {
    /// `[R X]`.
    pub fn full(&self) -> DMatrix<T> {
        let (rows, n) = self.strict.shape();
        let dd = self.affine.ncols();
        let mut out = DMatrix::zeros(rows, n + dd);
        out.view_mut((0, 0), (rows, n)).copy_from(&self.strict);
        out.view_mut((0, n), (rows, dd)).copy_from(&self.affine);
        out
    }
}

/// Builds `R` and `X` row by row from the motif.
pub fn build_matrices<T: Scalar>(fw: &CrystalFramework<T>) -> Result<RigidityMatrices<T>> {
    fw.ensure_valid()?;
    let d = fw.dim();
    let rows = fw.edge_count();
    let mut strict = DMatrix::zeros(rows, d * fw.vertex_count());
    let mut affine = DMatrix::zeros(rows, d * d);
    for (r, e) in fw.edges().iter().enumerate() {
        let g = fw.edge_geometry(e)?;
        if !e.is_reflexive() {
            let (a, b) = (e.from.vertex, e.to.vertex);
            for i in 0..d {
                strict[(r, a * d + i)] = g.vector[i];
                strict[(r, b * d + i)] = -g.vector[i];
            }
        }
        for (j, &dj) in g.exponent.iter().enumerate() {
            for i in 0..d {
                affine[(r, j * d + i)] = T::int(dj) * g.vector[i];
            }
        }
    }
    Ok(RigidityMatrices { strict, affine })
}

/// Label for the standard matrix spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Zero,
    Full,
    Symmetric,
    Skew,
    Diagonal,
    Commutant,
    Custom,
}

impl SpaceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceKind::Zero => "zero",
            SpaceKind::Full => "full",
            SpaceKind::Symmetric => "symmetric",
            SpaceKind::Skew => "skew",
            SpaceKind::Diagonal => "diagonal",
            SpaceKind::Commutant => "commutant",
            SpaceKind::Custom => "custom",
        }
    }
}

/// A linear space `E` of admissible affine velocity matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSpace<T: Scalar> {
    d: usize,
    basis: Vec<DMatrix<T>>,
    kind: SpaceKind,
}

fn unit<T: Scalar>(d: usize, i: usize, j: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(d, d);
    m[(i, j)] = T::one();
    m
}

impl<T: Scalar> MatrixSpace<T> {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            basis: Vec::new(),
            kind: SpaceKind::Zero,
        }
    }

    /// All `d x d` matrices, with the column-stacked unit basis.
    pub fn full(d: usize) -> Self {
        let mut basis = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                basis.push(unit(d, i, j));
            }
        }
        Self {
            d,
            basis,
            kind: SpaceKind::Full,
        }
    }

    pub fn symmetric(d: usize) -> Self {
        let mut basis = Vec::new();
        for j in 0..d {
            for i in 0..=j {
                let m = if i == j {
                    unit(d, i, i)
                } else {
                    unit(d, i, j) + unit(d, j, i)
                };
                basis.push(m);
            }
        }
        Self {
            d,
            basis,
            kind: SpaceKind::Symmetric,
        }
    }

    pub fn skew(d: usize) -> Self {
        let mut basis = Vec::new();
        for j in 0..d {
            for i in 0..j {
                basis.push(unit(d, i, j) - unit(d, j, i));
            }
        }
        Self {
            d,
            basis,
            kind: SpaceKind::Skew,
        }
    }

    pub fn diagonal(d: usize) -> Self {
        Self {
            d,
            basis: (0..d).map(|i| unit(d, i, i)).collect(),
            kind: SpaceKind::Diagonal,
        }
    }

    /// Named standard space: `zero`, `full`, `symmetric`, `skew` or `diagonal`.
    pub fn named(name: &str, d: usize) -> Option<Self> {
        Some(match name {
            "zero" => Self::zero(d),
            "full" => Self::full(d),
            "symmetric" => Self::symmetric(d),
            "skew" => Self::skew(d),
            "diagonal" => Self::diagonal(d),
            _ => return None,
        })
    }

    /// User-supplied basis; rejects wrong shapes and dependent families.
    pub fn custom(d: usize, basis: Vec<DMatrix<T>>, tol: T) -> Result<Self> {
        Self::from_basis(d, basis, SpaceKind::Custom, tol)
    }

    pub(crate) fn from_basis(
        d: usize,
        basis: Vec<DMatrix<T>>,
        kind: SpaceKind,
        tol: T,
    ) -> Result<Self> {
        for m in &basis {
            if m.shape() != (d, d) {
                return Err(Error::Dimension {
                    what: "matrix space basis element".into(),
                    expected: d,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        let space = Self { d, basis, kind };
        if numeric_rank(&space.columns(), tol) != space.dim() {
            return Err(Error::DependentBasis);
        }
        Ok(space)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn basis(&self) -> &[DMatrix<T>] {
        &self.basis
    }

    /// `d^2 x dim` matrix whose columns are `vec A_j`.
    pub fn columns(&self) -> DMatrix<T> {
        let mut out = DMatrix::zeros(self.d * self.d, self.basis.len());
        for (j, m) in self.basis.iter().enumerate() {
            out.set_column(j, &vec_of(m));
        }
        out
    }

    /// Orthonormal basis of `E` inside `R^{d^2}` (Frobenius inner product).
    pub fn subspace(&self, tol: T) -> SubspaceBasis<T> {
        SubspaceBasis::span_of(&self.columns(), tol)
    }

    /// Whether `A -> B A B^{-1}` maps the space into itself.
    pub fn is_conjugation_invariant(&self, b: &DMatrix<T>, tol: T) -> bool {
        let Some(b_inv) = b.clone().try_inverse() else {
            return false;
        };
        let sub = self.subspace(tol);
        self.basis.iter().all(|a| {
            let img = vec_of(&(b * a * &b_inv));
            sub.distance(&img) <= T::lit(10.0) * tol * T::one().max(img.norm())
        })
    }
}

/// Kernel of a space `E` and the rigid motions admissible in it.
fn check_space<T: Scalar>(fw: &CrystalFramework<T>, space: &MatrixSpace<T>) -> Result<()> {
    if space.d() != fw.dim() {
        return Err(Error::Dimension {
            what: "matrix space".into(),
            expected: fw.dim(),
            found: space.d(),
        });
    }
    Ok(())
}

/// `K_Z`, the matrix of `vec A -> vec(A Z)`, i.e. `Z^T (x) I`.
pub fn lattice_map<T: Scalar>(z: &DMatrix<T>) -> DMatrix<T> {
    let d = z.nrows();
    linalg::kron(&z.transpose(), &DMatrix::identity(d, d))
}

/// Embedding of restricted coordinates `(u, alpha)` into raw coordinates
/// `(u, vec(A Z))`.
pub fn domain_embedding<T: Scalar>(fw: &CrystalFramework<T>, space: &MatrixSpace<T>) -> DMatrix<T> {
    let d = fw.dim();
    let n = d * fw.vertex_count();
    let lifted = lattice_map(fw.lattice().matrix()) * space.columns();
    let mut out = DMatrix::zeros(n + d * d, n + space.dim());
    out.view_mut((0, 0), (n, n)).fill_with_identity();
    out.view_mut((n, n), (d * d, space.dim()))
        .copy_from(&lifted);
    out
}

/// `R(M, E) = [R | X L_E]`, shape `|F_e| x (d|F_v| + dim E)`.
pub fn restricted_operator<T: Scalar>(
    fw: &CrystalFramework<T>,
    space: &MatrixSpace<T>,
) -> Result<DMatrix<T>> {
    check_space(fw, space)?;
    let m = build_matrices(fw)?;
    Ok(m.full() * domain_embedding(fw, space))
}

/// `[R | X K_Z]`, acting on affine coordinates `(u, vec A)`.
pub fn affine_operator<T: Scalar>(fw: &CrystalFramework<T>) -> Result<DMatrix<T>> {
    restricted_operator(fw, &MatrixSpace::full(fw.dim()))
}

/// Generators of the rigid motions whose affine part lies in `space`:
/// `d` translations followed by rotations `(S p, -S)` for skew `S` in `space`.
pub fn rigid_motion_generators<T: Scalar>(
    fw: &CrystalFramework<T>,
    space: &MatrixSpace<T>,
) -> Result<Vec<AffineVelocity<T>>> {
    check_space(fw, space)?;
    let d = fw.dim();
    let tol = fw.tol();
    let mut out = Vec::new();
    for i in 0..d {
        let mut c = DVector::zeros(d);
        c[i] = T::one();
        out.push(AffineVelocity::translation(&c, fw.vertex_count()));
    }
    let skew_in_space = MatrixSpace::<T>::skew(d)
        .subspace(tol)
        .intersection(&space.subspace(tol));
    for col in skew_in_space.basis().column_iter() {
        let s = unvec(col.as_slice(), d);
        out.push(AffineVelocity::<T>::rotation(fw, &s));
    }
    Ok(out)
}

/// Rigid motions with affine part in `space`, in raw coordinates.
pub fn rigid_motion_space<T: Scalar>(
    fw: &CrystalFramework<T>,
    space: &MatrixSpace<T>,
) -> Result<SubspaceBasis<T>> {
    let gens = rigid_motion_generators(fw, space)?;
    let d = fw.dim();
    let dim = d * fw.vertex_count() + d * d;
    let mut cols = DMatrix::zeros(dim, gens.len());
    for (j, g) in gens.iter().enumerate() {
        cols.set_column(j, &encode_raw(fw, g));
    }
    Ok(SubspaceBasis::span_of(&cols, fw.tol()))
}

/// Affinely periodic flexes with affine part in `space`, in raw coordinates.
pub fn flex_space<T: Scalar>(
    fw: &CrystalFramework<T>,
    space: &MatrixSpace<T>,
) -> Result<SubspaceBasis<T>> {
    let op = restricted_operator(fw, space)?;
    let kernel = kernel_basis(&op, fw.tol());
    Ok(kernel.map(&domain_embedding(fw, space)))
}

/// Periodic self-stresses of `R(M, E)`.
pub fn stress_space<T: Scalar>(
    fw: &CrystalFramework<T>,
    space: &MatrixSpace<T>,
) -> Result<SubspaceBasis<T>> {
    let op = restricted_operator(fw, space)?;
    Ok(cokernel_basis(&op, fw.tol()))
}

/// Maxwell-Calladine counts for one admissible space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub mode: String,
    pub space: SpaceKind,
    pub d: usize,
    pub vertex_classes: usize,
    pub edge_classes: usize,
    /// `d |F_v|`.
    pub vertex_dofs: usize,
    pub dim_e: usize,
    pub rank: usize,
    pub flex_dim: usize,
    /// Internal mechanisms.
    pub m: usize,
    /// Self-stresses.
    pub s: usize,
    /// Rigid motions.
    pub f: usize,
    /// `(m - s) - (d|F_v| + dim E - |F_e| - f)`.
    pub identity_residual: i64,
    /// False if some rigid motion failed to be a flex (geometry inconsistency).
    pub rigid_contained: bool,
}

impl CountReport {
    /// Right-hand side `d|F_v| + dim E - |F_e| - f`.
    pub fn rhs(&self) -> i64 {
        self.vertex_dofs as i64 + self.dim_e as i64 - self.edge_classes as i64 - self.f as i64
    }
}

/// Flex, stress and rigid-motion dimensions for `space`, and the residual of
/// `m - s = d|F_v| + dim E - |F_e| - f`.
pub fn analyze_counts<T: Scalar>(
    fw: &CrystalFramework<T>,
    space: &MatrixSpace<T>,
) -> Result<CountReport> {
    let flex = flex_space(fw, space)?;
    let stress = stress_space(fw, space)?;
    let rigid = rigid_motion_space(fw, space)?;
    let op = restricted_operator(fw, space)?;
    let rank = numeric_rank(&op, fw.tol());
    let rigid_contained = flex.contains(&rigid);
    let f = rigid.dim();
    let m = flex.dim().saturating_sub(f);
    let s = stress.dim();
    let mode = match space.kind() {
        SpaceKind::Zero => "strict".to_string(),
        SpaceKind::Full => "affine".to_string(),
        k => k.as_str().to_string(),
    };
    let mut report = CountReport {
        mode,
        space: space.kind(),
        d: fw.dim(),
        vertex_classes: fw.vertex_count(),
        edge_classes: fw.edge_count(),
        vertex_dofs: fw.dim() * fw.vertex_count(),
        dim_e: space.dim(),
        rank,
        flex_dim: flex.dim(),
        m,
        s,
        f,
        identity_residual: 0,
        rigid_contained,
    };
    report.identity_residual = (m as i64 - s as i64) - report.rhs();
    Ok(report)
}

/// Outcome of the rank test for affine infinitesimal rigidity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AffineRigidity {
    pub rigid: bool,
    pub rank: usize,
    /// `d|F_v| + d(d-1)/2`.
    pub required: usize,
}

/// Affine infinitesimal rigidity: `rank [R X] = d|F_v| + d(d-1)/2`.
pub fn is_affinely_rigid<T: Scalar>(fw: &CrystalFramework<T>) -> Result<AffineRigidity> {
    let d = fw.dim();
    let rank = numeric_rank(&build_matrices(fw)?.full(), fw.tol());
    let required = d * fw.vertex_count() + d * (d - 1) / 2;
    Ok(AffineRigidity {
        rigid: rank == required,
        rank,
        required,
    })
}

/// Largest change of bar length when every vertex moves linearly along the
/// affinely periodic extension of `flex` for time `t`.
///
/// The deformed framework has vertices `p_{kappa,0} + t u_kappa` and period
/// matrix `(I - tA) Z`, i.e. vertex `(kappa, k)` moves to
/// `p_{kappa,k} + t (u_kappa - A Z k)`. For a genuine flex the result is
/// `O(t^2)`.
pub fn edge_deviation<T: Scalar>(
    fw: &CrystalFramework<T>,
    flex: &AffineVelocity<T>,
    t: T,
) -> Result<T> {
    let d = fw.dim();
    if flex.u.len() != d * fw.vertex_count() || flex.a.shape() != (d, d) {
        return Err(Error::Dimension {
            what: "affine velocity".into(),
            expected: d * fw.vertex_count(),
            found: flex.u.len(),
        });
    }
    let flow = DMatrix::<T>::identity(d, d) - &flex.a * t;
    if flow.determinant().abs() <= fw.tol() {
        return Err(Error::SingularFlow { t: t.as_f64() });
    }
    let z_t = &flow * fw.lattice().matrix();
    let moved = |kappa: usize, k: &[i64]| -> DVector<T> {
        let kv = DVector::from_iterator(k.len(), k.iter().map(|&x| T::int(x)));
        &fw.vertices()[kappa].position + flex.velocity(kappa) * t + &z_t * kv
    };
    let mut worst = T::zero();
    for e in fw.edges() {
        let rest = fw.edge_geometry(e)?.length;
        let now = (moved(e.from.vertex, &e.from.cell) - moved(e.to.vertex, &e.to.cell)).norm();
        worst = worst.max((rest - now).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin_framework;
    use crate::lattice::MotifEdge;

    fn kagome() -> CrystalFramework<f64> {
        builtin_framework("kagome").unwrap()
    }

    #[test]
    fn matrix_shapes() {
        let m = build_matrices(&kagome()).unwrap();
        assert_eq!(m.strict.shape(), (6, 6));
        assert_eq!(m.full().shape(), (6, 10));
        let hex = builtin_framework::<f64>("hexahedron").unwrap();
        let m = build_matrices(&hex).unwrap();
        assert_eq!(m.strict.shape(), (9, 6));
        assert_eq!(m.full().shape(), (9, 15));
        for r in 0..3 {
            assert!(m.strict.row(r).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn square_grid_rows_by_hand() {
        let sq = builtin_framework::<f64>("square_grid").unwrap();
        let m = build_matrices(&sq).unwrap();
        assert_eq!(m.strict, DMatrix::zeros(2, 2));
        assert_eq!(
            m.affine.row(0).iter().copied().collect::<Vec<_>>(),
            vec![-1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            m.affine.row(1).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.0, 0.0, -1.0]
        );
    }

    #[test]
    fn restricted_operator_shapes_and_ranks() {
        let k = kagome();
        let zero = restricted_operator(&k, &MatrixSpace::zero(2)).unwrap();
        assert_eq!(zero, build_matrices(&k).unwrap().strict);
        let full = restricted_operator(&k, &MatrixSpace::full(2)).unwrap();
        assert_eq!(full.shape(), (6, 10));
        assert_eq!(
            numeric_rank(&full, 1e-9),
            numeric_rank(&build_matrices(&k).unwrap().full(), 1e-9)
        );
        let sq = builtin_framework::<f64>("square_grid").unwrap();
        assert_eq!(
            numeric_rank(
                &restricted_operator(&sq, &MatrixSpace::full(2)).unwrap(),
                1e-9
            ),
            2
        );
        assert!(matches!(
            restricted_operator(&k, &MatrixSpace::full(3)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn custom_space_rejects_dependence() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = a.clone() * 2.0;
        assert_eq!(
            MatrixSpace::custom(2, vec![a.clone(), b], 1e-9),
            Err(Error::DependentBasis)
        );
        assert_eq!(MatrixSpace::custom(2, vec![a], 1e-9).unwrap().dim(), 1);
    }

    #[test]
    fn named_space_dimensions() {
        for (name, dim) in [
            ("zero", 0),
            ("full", 9),
            ("symmetric", 6),
            ("skew", 3),
            ("diagonal", 3),
        ] {
            assert_eq!(
                MatrixSpace::<f64>::named(name, 3).unwrap().dim(),
                dim,
                "{name}"
            );
        }
        assert!(MatrixSpace::<f64>::named("bogus", 2).is_none());
    }

    #[test]
    fn rigid_motion_dimensions() {
        let k = kagome();
        assert_eq!(
            rigid_motion_space(&k, &MatrixSpace::zero(2)).unwrap().dim(),
            2
        );
        assert_eq!(
            rigid_motion_space(&k, &MatrixSpace::full(2)).unwrap().dim(),
            3
        );
        let hex = builtin_framework::<f64>("hexahedron").unwrap();
        assert_eq!(
            rigid_motion_space(&hex, &MatrixSpace::full(3))
                .unwrap()
                .dim(),
            6
        );
        assert_eq!(
            rigid_motion_space(&hex, &MatrixSpace::zero(3))
                .unwrap()
                .dim(),
            3
        );
        // Symmetric matrices admit no rotations.
        assert_eq!(
            rigid_motion_space(&hex, &MatrixSpace::symmetric(3))
                .unwrap()
                .dim(),
            3
        );
    }

    #[test]
    fn kagome_flex_and_stress() {
        let k = kagome();
        assert_eq!(flex_space(&k, &MatrixSpace::zero(2)).unwrap().dim(), 3);
        assert_eq!(stress_space(&k, &MatrixSpace::zero(2)).unwrap().dim(), 3);
        assert_eq!(flex_space(&k, &MatrixSpace::full(2)).unwrap().dim(), 4);
        assert_eq!(stress_space(&k, &MatrixSpace::full(2)).unwrap().dim(), 0);
    }

    #[test]
    fn kagome_stresses_pair_collinear_edges() {
        // Each stress of the strict matrix is supported on a collinear pair.
        let k = kagome();
        let s = stress_space(&k, &MatrixSpace::zero(2)).unwrap();
        let collinear = [(0usize, 3usize), (1, 4), (2, 5)];
        let mut expected = DMatrix::zeros(6, 3);
        for (c, &(a, b)) in collinear.iter().enumerate() {
            expected[(a, c)] = 1.0;
            expected[(b, c)] = 1.0;
        }
        let target = SubspaceBasis::span_of(&expected, 1e-9);
        assert!(target.contains(&s) && s.contains(&target));
    }

    #[test]
    fn counts() {
        let k = kagome();
        let strict = analyze_counts(&k, &MatrixSpace::zero(2)).unwrap();
        assert_eq!(
            (strict.m, strict.s, strict.f, strict.identity_residual),
            (1, 3, 2, 0)
        );
        let affine = analyze_counts(&k, &MatrixSpace::full(2)).unwrap();
        assert_eq!(
            (affine.m, affine.s, affine.f, affine.identity_residual),
            (1, 0, 3, 0)
        );
        let hex = builtin_framework::<f64>("hexahedron").unwrap();
        let strict = analyze_counts(&hex, &MatrixSpace::zero(3)).unwrap();
        assert_eq!((strict.m, strict.s, strict.f), (0, 6, 3));
    }

    #[test]
    fn affine_rigidity() {
        let k = is_affinely_rigid(&kagome()).unwrap();
        assert_eq!((k.rigid, k.rank, k.required), (false, 6, 7));
        let sq = is_affinely_rigid(&builtin_framework::<f64>("square_grid").unwrap()).unwrap();
        assert_eq!((sq.rigid, sq.rank, sq.required), (false, 2, 3));
    }

    #[test]
    fn empty_edge_set() {
        let sq = builtin_framework::<f64>("square_grid").unwrap();
        let bare = CrystalFramework::new(sq.lattice().clone(), sq.vertices().to_vec(), Vec::new());
        let r = analyze_counts(&bare, &MatrixSpace::full(2)).unwrap();
        assert_eq!((r.edge_classes, r.s, r.identity_residual), (0, 0, 0));
        assert_eq!(r.flex_dim, 6);
    }

    #[test]
    fn deviation_of_trivial_motions_vanishes() {
        let k = kagome();
        let zero = AffineVelocity::zero(2, 3);
        assert_eq!(edge_deviation(&k, &zero, 0.3).unwrap(), 0.0);
        let tr = AffineVelocity::translation(&DVector::from_column_slice(&[0.3, -1.2]), 3);
        assert!(edge_deviation(&k, &tr, 0.7).unwrap() < 1e-14);
        let mut singular = AffineVelocity::zero(2, 3);
        singular.a = DMatrix::identity(2, 2);
        assert!(matches!(
            edge_deviation(&k, &singular, 1.0),
            Err(Error::SingularFlow { .. })
        ));
    }

    #[test]
    fn reversing_an_edge_keeps_its_row() {
        let k = kagome();
        let base = build_matrices(&k).unwrap().full();
        for i in 0..k.edge_count() {
            let mut edges = k.edges().to_vec();
            edges[i] = edges[i].reversed().translated(&[2, -1]);
            let flipped = CrystalFramework::new(k.lattice().clone(), k.vertices().to_vec(), edges);
            let m = build_matrices(&flipped).unwrap().full();
            assert!(linalg::max_abs(&(&m - &base)) < 1e-12);
        }
    }

    #[test]
    fn invalid_framework_is_rejected() {
        let sq = builtin_framework::<f64>("square_grid").unwrap();
        let bad = CrystalFramework::new(
            sq.lattice().clone(),
            sq.vertices().to_vec(),
            vec![MotifEdge::from_origin(0, 0, vec![0, 0])],
        );
        assert!(matches!(
            build_matrices(&bad),
            Err(Error::InvalidFramework(_))
        ));
    }
}
