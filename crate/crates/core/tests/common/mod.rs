#![allow(dead_code)]

use std::collections::BTreeSet;

use crystal_rigidity::{CellRange, Endpoint, Framework, MotifEdge, MotifVertex, PeriodLattice};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Small random valid frameworks in dimension 2 or 3.
pub fn framework_strategy() -> impl Strategy<Value = Framework> {
    (2usize..=3)
        .prop_flat_map(|d| {
            (
                Just(d),
                prop::collection::vec(-0.3f64..0.3, d * d),
                prop::collection::vec(prop::collection::vec(0.0f64..1.0, d), 1..=3),
                prop::collection::vec(
                    (0usize..3, 0usize..3, prop::collection::vec(-1i64..=1, d)),
                    0..=6,
                ),
            )
        })
        .prop_filter_map("invalid framework", |(d, noise, fracs, raw_edges)| {
            let z = DMatrix::<f64>::identity(d, d) + DMatrix::from_column_slice(d, d, &noise);
            let lattice = PeriodLattice::new(z.clone(), 1e-9).ok()?;
            if lattice.det().abs() < 0.2 {
                return None;
            }
            let n = fracs.len();
            let vertices: Vec<_> = fracs
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    MotifVertex::named(&z * DVector::from_column_slice(f), format!("q{i}"))
                })
                .collect();
            let mut seen = BTreeSet::new();
            let mut edges = Vec::new();
            for (a, b, cell) in raw_edges {
                let e = MotifEdge::from_origin(a % n, b % n, cell);
                if seen.insert(e.class_key()) {
                    edges.push(e);
                }
            }
            let fw = Framework::new(lattice, vertices, edges);
            fw.validate().is_valid().then_some(fw)
        })
}

/// Rigidity matrix of the one-cell fragment with its endpoints identified
/// modulo the lattice: row per placed edge, `x_a - x_b` at the class of `a`
/// and `x_b - x_a` at the class of `b`.
pub fn torus_matrix(fw: &Framework) -> DMatrix<f64> {
    let d = fw.dim();
    let frag = fw.fragment(&CellRange::cube(d, 1).unwrap()).unwrap();
    let placed: Vec<_> = frag.edges.iter().chain(&frag.dangling).collect();
    let mut m = DMatrix::zeros(placed.len(), d * fw.vertex_count());
    for (row, e) in placed.iter().enumerate() {
        let a: Endpoint = fw.locate(&e.from.position).unwrap();
        let b: Endpoint = fw.locate(&e.to.position).unwrap();
        let diff = &e.from.position - &e.to.position;
        for i in 0..d {
            m[(row, a.vertex * d + i)] += diff[i];
            m[(row, b.vertex * d + i)] -= diff[i];
        }
    }
    m
}

/// True if every row of `a` matches a distinct row of `b` up to sign.
pub fn equal_up_to_row_permutation_and_sign(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let mut used = vec![false; b.nrows()];
    'rows: for i in 0..a.nrows() {
        let r = a.row(i);
        for (j, taken) in used.iter_mut().enumerate() {
            if *taken {
                continue;
            }
            let s = b.row(j);
            if (r - s).amax() <= tol || (r + s).amax() <= tol {
                *taken = true;
                continue 'rows;
            }
        }
        return false;
    }
    true
}

/// Sorted coordinates, for comparing point sets.
pub fn sorted_points(points: impl Iterator<Item = DVector<f64>>) -> Vec<Vec<f64>> {
    let mut v: Vec<Vec<f64>> = points
        .map(|p| p.iter().map(|x| (x * 1e9).round() / 1e9 + 0.0).collect())
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}
