#![allow(dead_code)]

use pdcoeff_core::{Complex64, ComplexRootList, PersistenceDiagram, TriangleMesh, VertexFunction};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Elementary symmetric values by enumerating every subset of the roots.
pub fn subset_oracle(roots: &[Complex64], k: usize) -> Vec<Complex64> {
    let n = roots.len();
    let mut c = vec![Complex64::new(0.0, 0.0); k];
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > k {
            continue;
        }
        let product = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .fold(Complex64::new(1.0, 0.0), |acc, i| acc * roots[i]);
        c[size - 1] += product;
    }
    c
}

pub fn random_roots(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
        .collect()
}

pub fn root_list(values: &[Complex64]) -> ComplexRootList {
    ComplexRootList::from_values(values.iter().copied())
}

/// Random diagram with `n` unit points; coordinates snap to a coarse grid
/// half of the time so that ties and repeated points occur.
pub fn random_diagram(rng: &mut ChaCha8Rng, n: usize) -> PersistenceDiagram {
    let snap = rng.gen_bool(0.5);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            if snap {
                let b = rng.gen_range(0..6) as f64 * 0.25;
                let d = b + rng.gen_range(1..6) as f64 * 0.25;
                (b, d)
            } else {
                let b: f64 = rng.gen_range(0.0..1.0);
                (b, b + rng.gen_range(0.01..1.0))
            }
        })
        .collect();
    PersistenceDiagram::from_pairs(pairs).unwrap()
}

/// Random vertex positions, random triangles, distinct random values.
pub fn random_mesh(rng: &mut ChaCha8Rng, max_vertices: usize) -> (TriangleMesh, VertexFunction) {
    let n = rng.gen_range(1..=max_vertices);
    let vertices = (0..n)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]
        })
        .collect();
    let mut triangles = Vec::new();
    if n >= 3 {
        for _ in 0..rng.gen_range(0..=2 * n) {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let c = rng.gen_range(0..n);
            if a != b && b != c && a != c {
                triangles.push([a, b, c]);
            }
        }
    }
    let values = loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        s.dedup();
        if s.len() == n {
            break v;
        }
    };
    (
        TriangleMesh::new(vertices, triangles).unwrap(),
        VertexFunction::new(values).unwrap(),
    )
}

/// Largest relative discrepancy, measured against the oracle's modulus
/// (absolute when the oracle value is zero).
pub fn max_rel_error(got: &[Complex64], want: &[Complex64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| {
            let scale = w.norm();
            let diff = (g - w).norm();
            if scale > 0.0 {
                diff / scale
            } else {
                diff
            }
        })
        .fold(0.0, f64::max)
}
