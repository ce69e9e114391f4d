//! Built-in example frameworks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::{CrystalFramework, Endpoint, MotifEdge, MotifVertex, PeriodLattice};
use crate::scalar::Scalar;

/// Names accepted by [`builtin_framework`].
pub const BUILTIN_NAMES: &[&str] = &["square_grid", "kagome", "hexahedron"];

/// Returns the named built-in framework with its declared symmetries.
pub fn builtin_framework<T: Scalar>(name: &str) -> Result<CrystalFramework<T>> {
    match name {
        "square_grid" => Ok(square_grid()),
        "kagome" => kagome(),
        "hexahedron" => hexahedron(),
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

fn v<T: Scalar>(x: &[f64]) -> DVector<T> {
    DVector::from_iterator(x.len(), x.iter().map(|&a| T::lit(a)))
}

/// Rotation of the plane by `angle`, embedded in the leading 2x2 block of a
/// `d x d` identity.
fn rotation<T: Scalar>(d: usize, angle: f64) -> DMatrix<T> {
    let (s, c) = angle.sin_cos();
    let mut b = DMatrix::identity(d, d);
    b[(0, 0)] = T::lit(c);
    b[(0, 1)] = T::lit(-s);
    b[(1, 0)] = T::lit(s);
    b[(1, 1)] = T::lit(c);
    b
}

/// Translation part of the rotation `b` about the fixed point `centre`.
fn about<T: Scalar>(b: &DMatrix<T>, centre: &DVector<T>) -> DVector<T> {
    centre - b * centre
}

/// Unit square lattice, one vertex, horizontal and vertical bars.
pub fn square_grid<T: Scalar>() -> CrystalFramework<T> {
    let lattice =
        PeriodLattice::new(DMatrix::identity(2, 2), T::default_tol()).expect("identity lattice");
    CrystalFramework::new(
        lattice,
        vec![MotifVertex::named(v(&[0.0, 0.0]), "p1")],
        vec![
            MotifEdge::from_origin(0, 0, vec![1, 0]),
            MotifEdge::from_origin(0, 0, vec![0, 1]),
        ],
    )
}

/// Kagome framework with `a1 = (1, 0)`, `a2 = (1/2, sqrt3/2)` and triangles of
/// side 1/2, with the 3-fold rotation about the motif triangle centre.
pub fn kagome<T: Scalar>() -> Result<CrystalFramework<T>> {
    let r3 = 3f64.sqrt();
    let lattice =
        PeriodLattice::from_vectors(&[v(&[1.0, 0.0]), v(&[0.5, r3 / 2.0])], T::default_tol())?;
    let vertices = vec![
        MotifVertex::named(v(&[0.0, 0.0]), "p1"),
        MotifVertex::named(v(&[0.5, 0.0]), "p2"),
        MotifVertex::named(v(&[0.25, r3 / 4.0]), "p3"),
    ];
    let edges = vec![
        MotifEdge::from_origin(0, 1, vec![0, 0]),
        MotifEdge::from_origin(1, 2, vec![0, 0]),
        MotifEdge::from_origin(0, 2, vec![0, 0]),
        MotifEdge::from_origin(0, 1, vec![-1, 0]),
        MotifEdge::from_origin(1, 2, vec![1, -1]),
        MotifEdge::from_origin(0, 2, vec![0, -1]),
    ];
    let b = rotation::<T>(2, 2.0 * std::f64::consts::PI / 3.0);
    let c = about(&b, &v(&[0.25, r3 / 12.0]));
    CrystalFramework::new(lattice, vertices, edges).with_symmetry("C3", b, c)
}

/// Stacked triangular bipyramids with unit edges, with the 3-fold rotation
/// about the vertical axis through the bipyramid centre.
pub fn hexahedron<T: Scalar>() -> Result<CrystalFramework<T>> {
    let r3 = 3f64.sqrt();
    let h = 2f64.sqrt() / r3;
    let lattice = PeriodLattice::from_vectors(
        &[
            v(&[1.0, 0.0, 0.0]),
            v(&[0.5, r3 / 2.0, 0.0]),
            v(&[0.0, 0.0, 2.0 * h]),
        ],
        T::default_tol(),
    )?;
    let vertices = vec![
        MotifVertex::named(v(&[0.0, 0.0, 0.0]), "equatorial"),
        MotifVertex::named(v(&[0.5, r3 / 6.0, -h]), "south_pole"),
    ];
    let equator = [vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]];
    let mut edges = vec![
        MotifEdge::from_origin(0, 0, vec![1, 0, 0]),
        MotifEdge::from_origin(0, 0, vec![0, 1, 0]),
        MotifEdge::new(
            Endpoint::new(0, vec![1, 0, 0]),
            Endpoint::new(0, vec![0, 1, 0]),
        ),
    ];
    for c in &equator {
        edges.push(MotifEdge::new(
            Endpoint::new(1, vec![0, 0, 0]),
            Endpoint::new(0, c.clone()),
        ));
    }
    for c in &equator {
        edges.push(MotifEdge::new(
            Endpoint::new(1, vec![0, 0, 1]),
            Endpoint::new(0, c.clone()),
        ));
    }
    let b = rotation::<T>(3, 2.0 * std::f64::consts::PI / 3.0);
    let c = about(&b, &v(&[0.5, r3 / 6.0, 0.0]));
    CrystalFramework::new(lattice, vertices, edges).with_symmetry("C3", b, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let k = builtin_framework::<f64>("kagome").unwrap();
        assert_eq!((k.vertex_count(), k.edge_count()), (3, 6));
        let h = builtin_framework::<f64>("hexahedron").unwrap();
        assert_eq!((h.vertex_count(), h.edge_count()), (2, 9));
        let s = builtin_framework::<f64>("square_grid").unwrap();
        assert_eq!((s.vertex_count(), s.edge_count()), (1, 2));
        assert_eq!(s.lattice().matrix(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn all_builtins_validate() {
        for name in BUILTIN_NAMES {
            let fw = builtin_framework::<f64>(name).unwrap();
            assert!(fw.validate().is_valid(), "{name}: {}", fw.validate());
            let fw32 = builtin_framework::<f32>(name).unwrap();
            assert!(fw32.validate().is_valid(), "{name} (f32)");
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            builtin_framework::<f64>("roman"),
            Err(Error::UnknownBuiltin(_))
        ));
    }
}
