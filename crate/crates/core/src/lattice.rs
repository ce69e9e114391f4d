//! Motifs, period lattices and the crystal framework they generate.
//!
//! A framework is stored as a finite motif: vertex classes `F_v` with their
//! cell-zero positions, and edge classes `F_e` whose endpoints carry explicit
//! cell indices. The vertex labelled `(kappa, k)` sits at `p_kappa + Z k`.
//!
//! Vertex indices are zero-based throughout the API.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{nearest_integer, Scalar};
use crate::symmetry::SymmetryElement;

/// Integer lattice coordinates of a cell.
pub type Cell = Vec<i64>;

pub(crate) fn cell_add(a: &[i64], b: &[i64]) -> Cell {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn cell_sub(a: &[i64], b: &[i64]) -> Cell {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn cell_neg(a: &[i64]) -> Cell {
    a.iter().map(|x| -x).collect()
}

/// The translation group of a framework, given by the matrix `Z` whose
/// columns are the period vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodLattice<T: Scalar> {
    z: DMatrix<T>,
    z_inv: DMatrix<T>,
}

impl<T: Scalar> PeriodLattice<T> {
    /// Builds a lattice from `Z`; fails unless `Z` is square with `|det Z| > tol`.
    pub fn new(z: DMatrix<T>, tol: T) -> Result<Self> {
        if z.nrows() != z.ncols() || z.nrows() == 0 {
            return Err(Error::Dimension {
                what: "period matrix".into(),
                expected: z.nrows(),
                found: z.ncols(),
            });
        }
        let det = z.determinant();
        if det.abs() <= tol {
            return Err(Error::SingularLattice { det: det.as_f64() });
        }
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or(Error::SingularLattice { det: det.as_f64() })?;
        Ok(Self { z, z_inv })
    }

    /// Builds a lattice from a list of period vectors `a_1, ..., a_d`.
    pub fn from_vectors(vectors: &[DVector<T>], tol: T) -> Result<Self> {
        let d = vectors.len();
        let mut z = DMatrix::zeros(d, d);
        for (j, a) in vectors.iter().enumerate() {
            if a.len() != d {
                return Err(Error::Dimension {
                    what: format!("period vector {j}"),
                    expected: d,
                    found: a.len(),
                });
            }
            z.set_column(j, a);
        }
        Self::new(z, tol)
    }

    pub fn dim(&self) -> usize {
        self.z.nrows()
    }

    /// The period matrix `Z`.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.z
    }

    pub fn inverse(&self) -> &DMatrix<T> {
        &self.z_inv
    }

    pub fn det(&self) -> T {
        self.z.determinant()
    }

    /// `Z k`.
    pub fn translation(&self, k: &[i64]) -> DVector<T> {
        let kv = DVector::from_iterator(k.len(), k.iter().map(|&x| T::int(x)));
        &self.z * kv
    }

    /// Fractional coordinates `Z^{-1} x`.
    pub fn fractional(&self, x: &DVector<T>) -> DVector<T> {
        &self.z_inv * x
    }

    /// If `diff = Z k` for an integer vector `k` (to `tol`), returns `k`.
    pub fn lattice_offset(&self, diff: &DVector<T>, tol: T) -> Option<Cell> {
        let f = self.fractional(diff);
        let k: Cell = f
            .iter()
            .map(|x| x.round().to_i64())
            .collect::<Option<_>>()?;
        let residual = (diff - self.translation(&k)).norm();
        (residual <= tol).then_some(k)
    }

    /// Multiplies the period vectors by the integers `n`, i.e. `Z diag(n)`.
    pub fn scaled(&self, n: &[i64], tol: T) -> Result<Self> {
        let mut z = self.z.clone();
        for (j, &nj) in n.iter().enumerate() {
            let s = T::int(nj);
            z.column_mut(j).scale_mut(s);
        }
        Self::new(z, tol)
    }

    /// `Z^{-1} B Z`, rounded to integers if every entry is within `tol`.
    pub fn integral_conjugate(&self, b: &DMatrix<T>, tol: T) -> Option<DMatrix<i64>> {
        let m = &self.z_inv * b * &self.z;
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = nearest_integer(m[(i, j)], tol)?;
            }
        }
        Some(out)
    }
}

/// A vertex class with its cell-zero position.
#[derive(Clone, Debug, PartialEq)]
pub struct MotifVertex<T: Scalar> {
    pub position: DVector<T>,
    pub name: Option<String>,
}

impl<T: Scalar> MotifVertex<T> {
    pub fn new(position: DVector<T>) -> Self {
        Self {
            position,
            name: None,
        }
    }

    pub fn named(position: DVector<T>, name: impl Into<String>) -> Self {
        Self {
            position,
            name: Some(name.into()),
        }
    }
}

/// A labelled vertex `(kappa, k)` of the infinite framework.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Endpoint {
    pub vertex: usize,
    pub cell: Cell,
}

impl Endpoint {
    pub fn new(vertex: usize, cell: impl Into<Cell>) -> Self {
        Self {
            vertex,
            cell: cell.into(),
        }
    }

    pub fn translated(&self, l: &[i64]) -> Self {
        Self {
            vertex: self.vertex,
            cell: cell_add(&self.cell, l),
        }
    }
}

/// An edge class `[(kappa, k), (tau, k')]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MotifEdge {
    pub from: Endpoint,
    pub to: Endpoint,
}

/// Orientation-free identity of an edge class modulo translation.
pub type EdgeClassKey = (usize, usize, Cell);

impl MotifEdge {
    pub fn new(from: Endpoint, to: Endpoint) -> Self {
        Self { from, to }
    }

    /// Shorthand for the common case of an edge leaving cell zero.
    pub fn from_origin(kappa: usize, tau: usize, exponent: impl Into<Cell>) -> Self {
        let exponent = exponent.into();
        let zero = vec![0; exponent.len()];
        Self::new(Endpoint::new(kappa, zero), Endpoint::new(tau, exponent))
    }

    /// `delta(e) = k' - k`.
    pub fn exponent(&self) -> Cell {
        cell_sub(&self.to.cell, &self.from.cell)
    }

    pub fn reversed(&self) -> Self {
        Self {
            from: self.to.clone(),
            to: self.from.clone(),
        }
    }

    pub fn translated(&self, l: &[i64]) -> Self {
        Self {
            from: self.from.translated(l),
            to: self.to.translated(l),
        }
    }

    pub fn is_reflexive(&self) -> bool {
        self.from.vertex == self.to.vertex
    }

    /// `(kappa, tau, delta)` with the orientation chosen so that the
    /// triple is lexicographically smallest.
    pub fn class_key(&self) -> EdgeClassKey {
        let fwd = (self.from.vertex, self.to.vertex, self.exponent());
        let rev = (self.to.vertex, self.from.vertex, cell_neg(&fwd.2));
        fwd.min(rev)
    }
}

/// Edge vector, exponent and length of a motif edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeGeometry<T: Scalar> {
    /// `v_e = p_{kappa,k} - p_{tau,k'}`.
    pub vector: DVector<T>,
    pub exponent: Cell,
    pub length: T,
}

/// A single invariant violation found by [`CrystalFramework::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    VertexDimension { vertex: usize, found: usize },
    EdgeCellDimension { edge: usize },
    VerticesCoincide { a: usize, b: usize },
    InvalidEndpoint { edge: usize, vertex: usize },
    SelfLoop { edge: usize },
    ZeroLength { edge: usize },
    DuplicateEdge { a: usize, b: usize },
    NonPositiveTolerance,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexDimension { vertex, found } => {
                write!(f, "vertex {vertex}: position has dimension {found}")
            }
            Violation::EdgeCellDimension { edge } => {
                write!(f, "edge {edge}: cell index has the wrong dimension")
            }
            Violation::VerticesCoincide { a, b } => {
                write!(f, "vertices {a} and {b}: vertices coincide mod lattice")
            }
            Violation::InvalidEndpoint { edge, vertex } => {
                write!(f, "edge {edge}: endpoint vertex {vertex} does not exist")
            }
            Violation::SelfLoop { edge } => write!(f, "edge {edge}: self-loop"),
            Violation::ZeroLength { edge } => write!(f, "edge {edge}: zero-length bar"),
            Violation::DuplicateEdge { a, b } => {
                write!(f, "edges {a} and {b}: duplicate edge class (translates)")
            }
            Violation::NonPositiveTolerance => write!(f, "tolerance must be positive"),
        }
    }
}

/// List of violations; empty means the framework is valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport(pub Vec<Violation>);

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.0.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Inclusive box of cells `lo <= k <= hi` (componentwise).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellRange {
    pub lo: Cell,
    pub hi: Cell,
}

impl CellRange {
    pub fn new(lo: Cell, hi: Cell) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::EmptyRange);
        }
        Ok(Self { lo, hi })
    }

    /// `{0, ..., n-1}^d`.
    pub fn cube(d: usize, n: i64) -> Result<Self> {
        Self::new(vec![0; d], vec![n - 1; d])
    }

    /// `prod [0, n_i)`.
    pub fn from_counts(n: &[i64]) -> Result<Self> {
        Self::new(vec![0; n.len()], n.iter().map(|x| x - 1).collect())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.lo.len()
            && k.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| a <= x && x <= b)
    }

    pub fn len(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a + 1) as usize)
            .product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in mixed-radix order, first coordinate fastest.
    pub fn cells(&self) -> Vec<Cell> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.len());
        let mut cur = self.lo.clone();
        loop {
            out.push(cur.clone());
            let mut i = 0;
            loop {
                if i == d {
                    return out;
                }
                if cur[i] < self.hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = self.lo[i];
                i += 1;
            }
        }
    }
}

/// A framework vertex placed in space.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedPoint<T: Scalar> {
    pub label: Endpoint,
    pub position: DVector<T>,
}

/// One end of a placed edge; `point` indexes into [`Fragment::points`] when the
/// endpoint lies inside the box.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedEnd<T: Scalar> {
    pub label: Endpoint,
    pub position: DVector<T>,
    pub point: Option<usize>,
}

/// The translate `T_shift(e)` of motif edge `class`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedEdge<T: Scalar> {
    pub class: usize,
    pub shift: Cell,
    pub from: PlacedEnd<T>,
    pub to: PlacedEnd<T>,
}

/// Finite piece of the infinite framework owned by a box of cells.
///
/// Every motif edge translated by each cell in the box is listed exactly
/// once, either in `edges` (both ends in the box) or in `dangling`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragment<T: Scalar> {
    pub points: Vec<PlacedPoint<T>>,
    pub edges: Vec<PlacedEdge<T>>,
    pub dangling: Vec<PlacedEdge<T>>,
}

/// A crystal framework: lattice, motif, declared symmetries and tolerance.
#[derive(Clone, Debug)]
pub struct CrystalFramework<T: Scalar> {
    pub(crate) lattice: PeriodLattice<T>,
    pub(crate) vertices: Vec<MotifVertex<T>>,
    pub(crate) edges: Vec<MotifEdge>,
    pub(crate) symmetries: Vec<SymmetryElement<T>>,
    pub(crate) tol: T,
}

impl<T: Scalar> PartialEq for CrystalFramework<T> {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.tol == other.tol
            && self.symmetries.len() == other.symmetries.len()
            && self
                .symmetries
                .iter()
                .zip(&other.symmetries)
                .all(|(a, b)| a.name() == b.name() && a.linear() == b.linear())
    }
}

impl<T: Scalar> CrystalFramework<T> {
    /// Assembles a framework without validating it; see [`Self::validate`].
    pub fn new(
        lattice: PeriodLattice<T>,
        vertices: Vec<MotifVertex<T>>,
        edges: Vec<MotifEdge>,
    ) -> Self {
        Self {
            lattice,
            vertices,
            edges,
            symmetries: Vec::new(),
            tol: T::default_tol(),
        }
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    /// Resolves `x -> B x + c` against the motif and records it as a declared
    /// symmetry.
    pub fn with_symmetry(
        mut self,
        name: impl Into<String>,
        linear: DMatrix<T>,
        translation: DVector<T>,
    ) -> Result<Self> {
        let g = SymmetryElement::resolve(&self, linear, translation, name)?;
        self.symmetries.push(g);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn lattice(&self) -> &PeriodLattice<T> {
        &self.lattice
    }

    pub fn vertices(&self) -> &[MotifVertex<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[MotifEdge] {
        &self.edges
    }

    pub fn symmetries(&self) -> &[SymmetryElement<T>] {
        &self.symmetries
    }

    pub fn symmetry(&self, name: &str) -> Option<&SymmetryElement<T>> {
        self.symmetries.iter().find(|g| g.name() == name)
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Tolerance for comparing positions, scaled by the lattice size.
    pub(crate) fn geometric_tol(&self) -> T {
        let scale = self
            .lattice
            .matrix()
            .iter()
            .fold(T::one(), |a, &b| a.max(b.abs()));
        self.tol * scale
    }

    /// Checks every motif invariant and returns the violations found.
    pub fn validate(&self) -> ValidationReport {
        let d = self.dim();
        let mut out = Vec::new();
        if self.tol <= T::zero() {
            out.push(Violation::NonPositiveTolerance);
        }
        let mut dims_ok = true;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.position.len() != d {
                out.push(Violation::VertexDimension {
                    vertex: i,
                    found: v.position.len(),
                });
                dims_ok = false;
            }
        }
        let gtol = self.geometric_tol();
        if dims_ok {
            for a in 0..self.vertices.len() {
                for b in a + 1..self.vertices.len() {
                    let diff = &self.vertices[a].position - &self.vertices[b].position;
                    if self.lattice.lattice_offset(&diff, gtol).is_some() {
                        out.push(Violation::VerticesCoincide { a, b });
                    }
                }
            }
        }
        let mut seen: BTreeMap<EdgeClassKey, usize> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.from.cell.len() != d || e.to.cell.len() != d {
                out.push(Violation::EdgeCellDimension { edge: i });
                continue;
            }
            let mut endpoints_ok = true;
            for v in [e.from.vertex, e.to.vertex] {
                if v >= self.vertices.len() {
                    out.push(Violation::InvalidEndpoint { edge: i, vertex: v });
                    endpoints_ok = false;
                }
            }
            if !endpoints_ok {
                continue;
            }
            if e.is_reflexive() && e.exponent().iter().all(|&x| x == 0) {
                out.push(Violation::SelfLoop { edge: i });
                continue;
            }
            if dims_ok {
                if let Ok(g) = self.edge_geometry(e) {
                    if g.length <= gtol {
                        out.push(Violation::ZeroLength { edge: i });
                    }
                }
            }
            if let Some(&j) = seen.get(&e.class_key()) {
                out.push(Violation::DuplicateEdge { a: j, b: i });
            } else {
                seen.insert(e.class_key(), i);
            }
        }
        ValidationReport(out)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidFramework(report))
        }
    }

    /// Position `p_{kappa,k} = p_{kappa,0} + Z k`.
    pub fn point_of(&self, kappa: usize, k: &[i64]) -> Result<DVector<T>> {
        let v = self.vertices.get(kappa).ok_or(Error::VertexIndex {
            index: kappa,
            count: self.vertices.len(),
        })?;
        if k.len() != self.dim() {
            return Err(Error::Dimension {
                what: "cell index".into(),
                expected: self.dim(),
                found: k.len(),
            });
        }
        Ok(&v.position + self.lattice.translation(k))
    }

    pub fn endpoint_position(&self, end: &Endpoint) -> Result<DVector<T>> {
        self.point_of(end.vertex, &end.cell)
    }

    /// Edge vector `v_e`, exponent `delta(e)` and bar length.
    pub fn edge_geometry(&self, e: &MotifEdge) -> Result<EdgeGeometry<T>> {
        let vector = self.endpoint_position(&e.from)? - self.endpoint_position(&e.to)?;
        let length = vector.norm();
        Ok(EdgeGeometry {
            vector,
            exponent: e.exponent(),
            length,
        })
    }

    /// Vertex class and cell containing the point `x`, if it is a framework vertex.
    pub fn locate(&self, x: &DVector<T>) -> Option<Endpoint> {
        let gtol = self.geometric_tol();
        self.vertices.iter().enumerate().find_map(|(i, v)| {
            self.lattice
                .lattice_offset(&(x - &v.position), gtol)
                .map(|cell| Endpoint { vertex: i, cell })
        })
    }

    /// The same infinite framework described with period matrix `Z diag(n)`.
    ///
    /// Vertex `kappa` with residue `r` becomes vertex `kappa * N + index(r)`,
    /// where residues are enumerated first coordinate fastest. Declared
    /// symmetries are re-resolved; those incompatible with the larger cell are
    /// dropped.
    pub fn supercell(&self, n: &[i64]) -> Result<Self> {
        if n.len() != self.dim() {
            return Err(Error::Dimension {
                what: "supercell multiplicities".into(),
                expected: self.dim(),
                found: n.len(),
            });
        }
        if n.iter().any(|&x| x < 1) {
            return Err(Error::Multiplicity(n.to_vec()));
        }
        self.ensure_valid()?;
        let residues = CellRange::from_counts(n)?.cells();
        let copies = residues.len();
        let residue_index = |r: &[i64]| -> usize {
            let mut idx = 0usize;
            for i in (0..r.len()).rev() {
                idx = idx * n[i] as usize + r[i] as usize;
            }
            idx
        };
        let split = |k: &[i64]| -> (Cell, Cell) {
            let q = k.iter().zip(n).map(|(x, m)| x.div_euclid(*m)).collect();
            let r = k.iter().zip(n).map(|(x, m)| x.rem_euclid(*m)).collect();
            (q, r)
        };

        let mut vertices = Vec::with_capacity(self.vertices.len() * copies);
        for v in &self.vertices {
            for r in &residues {
                let position = &v.position + self.lattice.translation(r);
                let name = v.name.as_ref().map(|s| format!("{s}@{r:?}"));
                vertices.push(MotifVertex { position, name });
            }
        }
        let relabel = |end: &Endpoint, shift: &[i64]| -> Endpoint {
            let (q, r) = split(&cell_add(&end.cell, shift));
            Endpoint {
                vertex: end.vertex * copies + residue_index(&r),
                cell: q,
            }
        };
        let mut edges = Vec::with_capacity(self.edges.len() * copies);
        for e in &self.edges {
            for r in &residues {
                edges.push(MotifEdge {
                    from: relabel(&e.from, r),
                    to: relabel(&e.to, r),
                });
            }
        }
        let lattice = self.lattice.scaled(n, self.tol)?;
        let mut out = CrystalFramework {
            lattice,
            vertices,
            edges,
            symmetries: Vec::new(),
            tol: self.tol,
        };
        for g in &self.symmetries {
            if let Ok(h) = SymmetryElement::resolve(
                &out,
                g.linear().clone(),
                g.translation().clone(),
                g.name(),
            ) {
                out.symmetries.push(h);
            }
        }
        Ok(out)
    }

    /// Points of the cells in `range` and the translates of every motif edge
    /// by those cells.
    pub fn fragment(&self, range: &CellRange) -> Result<Fragment<T>> {
        if range.dim() != self.dim() {
            return Err(Error::EmptyRange);
        }
        let mut index: BTreeMap<Endpoint, usize> = BTreeMap::new();
        let mut points = Vec::new();
        let cells = range.cells();
        for k in &cells {
            for kappa in 0..self.vertices.len() {
                let label = Endpoint::new(kappa, k.clone());
                let position = self.endpoint_position(&label)?;
                index.insert(label.clone(), points.len());
                points.push(PlacedPoint { label, position });
            }
        }
        let mut edges = Vec::new();
        let mut dangling = Vec::new();
        for k in &cells {
            for (class, e) in self.edges.iter().enumerate() {
                let t = e.translated(k);
                let place = |label: Endpoint| -> Result<PlacedEnd<T>> {
                    Ok(PlacedEnd {
                        position: self.endpoint_position(&label)?,
                        point: index.get(&label).copied(),
                        label,
                    })
                };
                let placed = PlacedEdge {
                    class,
                    shift: k.clone(),
                    from: place(t.from)?,
                    to: place(t.to)?,
                };
                if placed.from.point.is_some() && placed.to.point.is_some() {
                    edges.push(placed);
                } else {
                    dangling.push(placed);
                }
            }
        }
        Ok(Fragment {
            points,
            edges,
            dangling,
        })
    }
}
