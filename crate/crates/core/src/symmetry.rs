//! Space-group elements acting on a motif, their finite-dimensional
//! representations, and symmetry-adapted counting.
//!
//! An element is an isometry `x -> B x + c`. Resolving it against a framework
//! records where each vertex and edge class goes and with which lattice
//! offset. Representations act on affine coordinates `(u, vec A)`:
//!
//! ```text
//! pi_v(g) = [ mu_v(g)  phi1(g) ]      mu_v:  block B at (g.kappa, kappa)
//!           [   0      phi2(g) ]      phi2:  A -> B A B^{-1}
//! ```
//!
//! with `(phi1(g) A)_{g.kappa} = -B A (T_g^{-1} p_{g.kappa,0} - p_{kappa,0})`,
//! which vanishes when every vertex offset is zero. Velocities transform by the
//! linear part `B` only. `pi_e(g)` sends the basis vector of edge class `f` to
//! that of `g.f`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{cell_add, cell_sub, Cell, CrystalFramework, Endpoint, MotifEdge};
use crate::linalg::{self, kernel_basis, numeric_rank, unvec, vec_of, SubspaceBasis};
use crate::rigidity::{
    affine_operator, encode_affine, rigid_motion_generators, MatrixSpace, SpaceKind,
};
use crate::scalar::Scalar;

/// Image `(g.kappa, k_g(kappa))` of a vertex class: `B p_kappa + c = p_{g.kappa} + Z k_g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexImage {
    pub vertex: usize,
    pub offset: Cell,
}

/// Image of an edge class: the translate of motif edge `edge` by `offset`,
/// possibly with its endpoints swapped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeImage {
    pub edge: usize,
    pub offset: Cell,
    pub reversed: bool,
}

/// A space-group element resolved against a particular framework.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryElement<T: Scalar> {
    name: String,
    linear: DMatrix<T>,
    translation: DVector<T>,
    lattice_map: DMatrix<i64>,
    vertex_action: Vec<VertexImage>,
    edge_action: Vec<EdgeImage>,
}

impl<T: Scalar> SymmetryElement<T> {
    /// Matches `x -> B x + c` against the motif classes modulo the lattice.
    pub fn resolve(
        fw: &CrystalFramework<T>,
        linear: DMatrix<T>,
        translation: DVector<T>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let name = name.into();
        let d = fw.dim();
        if linear.shape() != (d, d) || translation.len() != d {
            return Err(Error::Dimension {
                what: format!("symmetry {name:?}"),
                expected: d,
                found: if linear.shape() != (d, d) {
                    linear.nrows()
                } else {
                    translation.len()
                },
            });
        }
        let tol = fw.tol();
        let gram = linear.transpose() * &linear - DMatrix::identity(d, d);
        if linalg::max_abs(&gram) > T::lit(10.0) * tol {
            return Err(Error::NotOrthogonal { name });
        }
        let lattice_map = fw
            .lattice()
            .integral_conjugate(&linear, T::lit(1e3) * tol)
            .ok_or_else(|| Error::LatticeIncompatible { name: name.clone() })?;

        let not_sym = |detail: String| Error::NotASymmetry {
            name: name.clone(),
            detail,
        };

        let mut vertex_action = Vec::with_capacity(fw.vertex_count());
        for (kappa, v) in fw.vertices().iter().enumerate() {
            let image = &linear * &v.position + &translation;
            let hit = fw.locate(&image).ok_or_else(|| {
                not_sym(format!("image of vertex {kappa} is not a framework vertex"))
            })?;
            vertex_action.push(VertexImage {
                vertex: hit.vertex,
                offset: hit.cell,
            });
        }
        if !is_bijection(vertex_action.iter().map(|v| v.vertex), fw.vertex_count()) {
            return Err(not_sym("vertex action is not a bijection".into()));
        }

        let classes: BTreeMap<_, usize> = fw
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| (e.class_key(), i))
            .collect();
        let map_end = |end: &Endpoint| -> Endpoint {
            let img = &vertex_action[end.vertex];
            Endpoint {
                vertex: img.vertex,
                cell: cell_add(&img.offset, &mul_int(&lattice_map, &end.cell)),
            }
        };
        let mut edge_action = Vec::with_capacity(fw.edge_count());
        for (i, e) in fw.edges().iter().enumerate() {
            let img = MotifEdge::new(map_end(&e.from), map_end(&e.to));
            let j = *classes
                .get(&img.class_key())
                .ok_or_else(|| not_sym(format!("image of edge {i} is not a framework edge")))?;
            let target = &fw.edges()[j];
            let same = img.from.vertex == target.from.vertex && img.exponent() == target.exponent();
            let (reversed, offset) = if same {
                (false, cell_sub(&img.from.cell, &target.from.cell))
            } else {
                (true, cell_sub(&img.to.cell, &target.from.cell))
            };
            edge_action.push(EdgeImage {
                edge: j,
                offset,
                reversed,
            });
        }
        if !is_bijection(edge_action.iter().map(|e| e.edge), fw.edge_count()) {
            return Err(not_sym("edge action is not a bijection".into()));
        }

        Ok(Self {
            name,
            linear,
            translation,
            lattice_map,
            vertex_action,
            edge_action,
        })
    }

    /// The identity element of `fw`.
    pub fn identity(fw: &CrystalFramework<T>) -> Self {
        let d = fw.dim();
        Self::resolve(fw, DMatrix::identity(d, d), DVector::zeros(d), "identity")
            .expect("identity resolves on a valid framework")
    }

    /// `g h`, the isometry `x -> g(h(x))`, resolved against `fw`.
    pub fn compose(fw: &CrystalFramework<T>, g: &Self, h: &Self) -> Result<Self> {
        let linear = &g.linear * &h.linear;
        let translation = &g.linear * &h.translation + &g.translation;
        Self::resolve(fw, linear, translation, format!("{}*{}", g.name, h.name))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Linear part `B`.
    pub fn linear(&self) -> &DMatrix<T> {
        &self.linear
    }

    /// Translation part `c`.
    pub fn translation(&self) -> &DVector<T> {
        &self.translation
    }

    /// Integer matrix `M_B` with `B Z = Z M_B`.
    pub fn lattice_map(&self) -> &DMatrix<i64> {
        &self.lattice_map
    }

    pub fn vertex_action(&self) -> &[VertexImage] {
        &self.vertex_action
    }

    pub fn edge_action(&self) -> &[EdgeImage] {
        &self.edge_action
    }

    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        &self.linear * x + &self.translation
    }

    pub fn apply_inverse(&self, x: &DVector<T>) -> DVector<T> {
        self.linear.transpose() * (x - &self.translation)
    }

    /// True iff every motif vertex is mapped to a cell-zero motif vertex.
    pub fn is_separable(&self) -> bool {
        self.vertex_action
            .iter()
            .all(|v| v.offset.iter().all(|&x| x == 0))
    }

    /// Orbits of the cyclic group generated by `self` on edge classes.
    pub fn edge_orbits(&self) -> Vec<Vec<usize>> {
        let n = self.edge_action.len();
        let cap = 48 * n.max(1);
        let mut seen = vec![false; n];
        let mut orbits = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut cur = self.edge_action[start].edge;
            let mut steps = 1;
            while cur != start {
                assert!(steps <= cap, "edge action failed to close an orbit");
                seen[cur] = true;
                orbit.push(cur);
                cur = self.edge_action[cur].edge;
                steps += 1;
            }
            orbits.push(orbit);
        }
        orbits
    }

    fn check_resolved(&self, fw: &CrystalFramework<T>) -> Result<()> {
        if self.vertex_action.len() != fw.vertex_count()
            || self.edge_action.len() != fw.edge_count()
            || self.linear.nrows() != fw.dim()
        {
            return Err(Error::Unresolved {
                name: self.name.clone(),
            });
        }
        Ok(())
    }
}

fn is_bijection(images: impl Iterator<Item = usize>, n: usize) -> bool {
    let mut hit = vec![false; n];
    for i in images {
        if i >= n || hit[i] {
            return false;
        }
        hit[i] = true;
    }
    hit.into_iter().all(|x| x)
}

fn mul_int(m: &DMatrix<i64>, k: &[i64]) -> Cell {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * k[j]).sum())
        .collect()
}

/// Free-function form of [`SymmetryElement::resolve`].
pub fn resolve_symmetry<T: Scalar>(
    fw: &CrystalFramework<T>,
    linear: DMatrix<T>,
    translation: DVector<T>,
    name: &str,
) -> Result<SymmetryElement<T>> {
    SymmetryElement::resolve(fw, linear, translation, name)
}

pub fn is_separable<T: Scalar>(g: &SymmetryElement<T>) -> bool {
    g.is_separable()
}

/// The matrices of one element in the vertex, edge and affine representations.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationMatrices<T: Scalar> {
    /// `d|F_v| x d|F_v|`.
    pub mu_v: DMatrix<T>,
    /// `|F_e| x |F_e|` permutation.
    pub pi_e: DMatrix<T>,
    /// `d|F_v| x d^2`.
    pub phi1: DMatrix<T>,
    /// `d^2 x d^2`.
    pub phi2: DMatrix<T>,
    /// `[[mu_v, phi1], [0, phi2]]`.
    pub pi_v: DMatrix<T>,
}

pub fn representation_matrices<T: Scalar>(
    fw: &CrystalFramework<T>,
    g: &SymmetryElement<T>,
) -> Result<RepresentationMatrices<T>> {
    g.check_resolved(fw)?;
    let d = fw.dim();
    let nv = fw.vertex_count();
    let n = d * nv;
    let dd = d * d;
    let b = g.linear();
    let b_inv = b.transpose();

    let mut mu_v = DMatrix::zeros(n, n);
    for (kappa, img) in g.vertex_action().iter().enumerate() {
        mu_v.view_mut((img.vertex * d, kappa * d), (d, d))
            .copy_from(b);
    }

    let ne = fw.edge_count();
    let mut pi_e = DMatrix::zeros(ne, ne);
    for (f, img) in g.edge_action().iter().enumerate() {
        pi_e[(img.edge, f)] = T::one();
    }

    let mut phi2 = DMatrix::zeros(dd, dd);
    let mut phi1 = DMatrix::zeros(n, dd);
    for j in 0..d {
        for i in 0..d {
            let mut unit = DMatrix::zeros(d, d);
            unit[(i, j)] = T::one();
            let col = j * d + i;
            phi2.set_column(col, &vec_of(&(b * &unit * &b_inv)));
            let conj = b * &unit * &b_inv;
            for img in g.vertex_action() {
                if img.offset.iter().all(|&x| x == 0) {
                    continue;
                }
                let block = &conj * fw.lattice().translation(&img.offset);
                phi1.view_mut((img.vertex * d, col), (d, 1))
                    .copy_from(&block);
            }
        }
    }

    let mut pi_v = DMatrix::zeros(n + dd, n + dd);
    pi_v.view_mut((0, 0), (n, n)).copy_from(&mu_v);
    pi_v.view_mut((0, n), (n, dd)).copy_from(&phi1);
    pi_v.view_mut((n, n), (dd, dd)).copy_from(&phi2);
    Ok(RepresentationMatrices {
        mu_v,
        pi_e,
        phi1,
        phi2,
        pi_v,
    })
}

/// Block-diagonal embedding `(u, alpha) -> (u, sum alpha_j A_j)` with an
/// orthonormal basis of `space`, in affine coordinates.
fn affine_embedding<T: Scalar>(fw: &CrystalFramework<T>, space: &MatrixSpace<T>) -> DMatrix<T> {
    let d = fw.dim();
    let n = d * fw.vertex_count();
    let e = space.subspace(fw.tol());
    let k = e.dim();
    let mut q = DMatrix::zeros(n + d * d, n + k);
    q.view_mut((0, 0), (n, n)).fill_with_identity();
    q.view_mut((n, n), (d * d, k)).copy_from(e.basis());
    q
}

/// `max |pi_e(g) R_A - R_A pi_v(g)|`, over the full affine domain (`None`) or
/// restricted to `R^{d|F_v|} (+) E`.
pub fn verify_symmetry_equation<T: Scalar>(
    fw: &CrystalFramework<T>,
    g: &SymmetryElement<T>,
    space: Option<&MatrixSpace<T>>,
) -> Result<T> {
    let reps = representation_matrices(fw, g)?;
    let r_a = affine_operator(fw)?;
    match space {
        None => Ok(linalg::max_abs(&(&reps.pi_e * &r_a - &r_a * &reps.pi_v))),
        Some(e) => {
            if !e.is_conjugation_invariant(g.linear(), fw.tol()) {
                return Err(Error::NotInvariant {
                    name: g.name().to_string(),
                });
            }
            let q = affine_embedding(fw, e);
            let p = q.transpose() * &reps.pi_v * &q;
            let invariance = linalg::max_abs(&(&reps.pi_v * &q - &q * &p));
            let r_e = &r_a * &q;
            let equation = linalg::max_abs(&(&reps.pi_e * &r_e - &r_e * &p));
            Ok(invariance.max(equation))
        }
    }
}

/// `{A : A B = B A}`, the kernel of `vec A -> vec(A B - B A)`.
pub fn commutant_basis<T: Scalar>(b: &DMatrix<T>, tol: T) -> MatrixSpace<T> {
    let d = b.nrows();
    let id = DMatrix::identity(d, d);
    let op = linalg::kron(&b.transpose(), &id) - linalg::kron(&id, b);
    let k = kernel_basis(&op, tol);
    let basis = k
        .basis()
        .column_iter()
        .map(|c| unvec(c.as_slice(), d))
        .collect();
    MatrixSpace::from_basis(d, basis, SpaceKind::Commutant, tol)
        .expect("kernel vectors are independent")
}

/// Vectors fixed by `p`, i.e. the kernel of `p - I`.
pub fn fixed_space<T: Scalar>(p: &DMatrix<T>, tol: T) -> SubspaceBasis<T> {
    let n = p.nrows();
    kernel_basis(&(p - DMatrix::identity(n, n)), tol)
}

/// Symmetry-adapted Maxwell-Calladine counts for a single element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryCountReport {
    pub element: String,
    pub separable: bool,
    /// Fixed vectors of `mu_v(g)`.
    pub dim_f_g: usize,
    /// Dimension of the commutant of `B`.
    pub dim_e_g: usize,
    /// Fixed vectors of `pi_v(g)`; equals `dim_f_g + dim_e_g` when separable.
    pub dim_h_v_g: usize,
    /// Orbits of `<g>` on edge classes.
    pub e_g: usize,
    /// Fixed rigid motions.
    pub f_g: usize,
    pub m_g: i64,
    pub s_g: i64,
    pub identity_residual: i64,
    pub predictor_fires: bool,
}

impl SymmetryCountReport {
    /// Dimension used on the right-hand side of the count.
    pub fn domain_dim(&self) -> usize {
        if self.separable {
            self.dim_f_g + self.dim_e_g
        } else {
            self.dim_h_v_g
        }
    }

    pub fn rhs(&self) -> i64 {
        self.domain_dim() as i64 - self.e_g as i64 - self.f_g as i64
    }
}

/// Counts `m_g`, `s_g` from the operator restricted to fixed vectors and
/// compares `m_g - s_g` with `dim F_g + dim E_g - e_g - f_g`
/// (`dim H_v^g - e_g - f_g` for nonseparable elements).
pub fn symmetry_counts<T: Scalar>(
    fw: &CrystalFramework<T>,
    g: &SymmetryElement<T>,
) -> Result<SymmetryCountReport> {
    let tol = fw.tol();
    let reps = representation_matrices(fw, g)?;
    let h_v = fixed_space(&reps.pi_v, tol);
    let h_e = fixed_space(&reps.pi_e, tol);
    let dim_f_g = fixed_space(&reps.mu_v, tol).dim();
    let e_space = commutant_basis(g.linear(), tol);
    let e_g = g.edge_orbits().len();

    let gens = rigid_motion_generators(fw, &e_space)?;
    let mut cols = DMatrix::zeros(h_v.ambient_dim(), gens.len());
    for (j, x) in gens.iter().enumerate() {
        cols.set_column(j, &encode_affine(x));
    }
    let rigid = SubspaceBasis::span_of(&cols, tol);
    let f_g = rigid.intersection(&h_v).dim();

    let r_a = affine_operator(fw)?;
    let restricted = h_e.basis().transpose() * &r_a * h_v.basis();
    let rank = numeric_rank(&restricted, tol);
    let m_g = (h_v.dim() - rank) as i64 - f_g as i64;
    let s_g = e_g as i64 - rank as i64;

    let mut report = SymmetryCountReport {
        element: g.name().to_string(),
        separable: g.is_separable(),
        dim_f_g,
        dim_e_g: e_space.dim(),
        dim_h_v_g: h_v.dim(),
        e_g,
        f_g,
        m_g,
        s_g,
        identity_residual: 0,
        predictor_fires: false,
    };
    report.identity_residual = (m_g - s_g) - report.rhs();
    report.predictor_fires = (e_g as i64) < report.domain_dim() as i64 - f_g as i64;
    Ok(report)
}

/// Whether the counting inequality `e_g < dim H_v^g - f_g` guarantees a
/// `g`-symmetric non-rigid flex.
pub fn flexibility_predictor<T: Scalar>(
    fw: &CrystalFramework<T>,
    g: &SymmetryElement<T>,
) -> Result<bool> {
    Ok(symmetry_counts(fw, g)?.predictor_fires)
}

/// Traces of one element on the vertex, edge, rigid, mechanism and stress
/// representations for an admissible space `E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterRow {
    pub element: String,
    pub space: SpaceKind,
    pub dim_e: usize,
    pub trace_vertex: f64,
    pub trace_edge: f64,
    pub trace_rigid: f64,
    pub trace_flex: f64,
    pub trace_mech: f64,
    pub trace_stress: f64,
    /// `|(mech - stress) - (vertex - edge - rigid)|`.
    pub residual: f64,
    /// Largest failure of the flex, rigid and stress subspaces to be invariant.
    pub invariance_residual: f64,
}

fn invariance<T: Scalar>(sub: &SubspaceBasis<T>, p: &DMatrix<T>) -> T {
    let q = sub.basis();
    linalg::max_abs(&(p * q - q * (q.transpose() * p * q)))
}

pub fn character_row<T: Scalar>(
    fw: &CrystalFramework<T>,
    g: &SymmetryElement<T>,
    space: &MatrixSpace<T>,
) -> Result<CharacterRow> {
    let tol = fw.tol();
    if space.d() != fw.dim() {
        return Err(Error::Dimension {
            what: "matrix space".into(),
            expected: fw.dim(),
            found: space.d(),
        });
    }
    if !space.is_conjugation_invariant(g.linear(), tol) {
        return Err(Error::NotInvariant {
            name: g.name().to_string(),
        });
    }
    let reps = representation_matrices(fw, g)?;
    let q = affine_embedding(fw, space);
    let p = q.transpose() * &reps.pi_v * &q;
    let r_e = affine_operator(fw)? * &q;

    let flex = kernel_basis(&r_e, tol);
    let gens = rigid_motion_generators(fw, space)?;
    let mut cols = DMatrix::zeros(q.ncols(), gens.len());
    for (j, x) in gens.iter().enumerate() {
        cols.set_column(j, &(q.transpose() * encode_affine(x)));
    }
    let rigid = SubspaceBasis::span_of(&cols, tol);
    let mech = flex.orthogonal_complement_within(&rigid);
    let stress = linalg::cokernel_basis(&r_e, tol);

    let trace_vertex = p.trace();
    let trace_edge = reps.pi_e.trace();
    let trace_rigid = rigid.compressed_trace(&p);
    let trace_flex = flex.compressed_trace(&p);
    let trace_mech = mech.compressed_trace(&p);
    let trace_stress = stress.compressed_trace(&reps.pi_e);
    let residual = ((trace_mech - trace_stress) - (trace_vertex - trace_edge - trace_rigid)).abs();
    let inv = invariance(&flex, &p)
        .max(invariance(&rigid, &p))
        .max(invariance(&stress, &reps.pi_e));

    Ok(CharacterRow {
        element: g.name().to_string(),
        space: space.kind(),
        dim_e: space.dim(),
        trace_vertex: trace_vertex.as_f64(),
        trace_edge: trace_edge.as_f64(),
        trace_rigid: trace_rigid.as_f64(),
        trace_flex: trace_flex.as_f64(),
        trace_mech: trace_mech.as_f64(),
        trace_stress: trace_stress.as_f64(),
        residual: residual.as_f64(),
        invariance_residual: inv.as_f64(),
    })
}
