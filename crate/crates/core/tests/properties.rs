#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use pdcoeff_core::mesh::{lower_star_pairs, multiplicity0, zero_persistence, Point3};
use pdcoeff_core::metrics::point_distance;
use pdcoeff_core::retrieval::{bottleneck_ranking, pr_curve, two_stage_query, Entry};
use pdcoeff_core::transforms::transform_diagram;
use pdcoeff_core::{
    bottleneck, bottleneck_bruteforce, coeff_distance, elementary_symmetric, embed, pad_roots,
    CoeffMetric, Complex64, DistanceMatrix, EmbeddingIndex, FilterKind, LabeledDatabase, MeshFrame,
    PersistenceDiagram, SynthConfig, Transform, TriangleMesh, VertexFunction,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- viete

#[test]
fn viete_matches_subset_enumeration() {
    let mut rng = rng(11);
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let roots = random_roots(&mut rng, n);
        let k = rng.gen_range(1..=n);
        let got = elementary_symmetric(&root_list(&roots), k).unwrap();
        let want = subset_oracle(&roots, k);
        assert!(max_rel_error(got.coefficients(), &want) <= 1e-10);
    }
}

#[test]
fn viete_is_order_independent() {
    let mut rng = rng(12);
    for _ in 0..100 {
        let n = rng.gen_range(1..=50);
        let mut roots = random_roots(&mut rng, n);
        let k = rng.gen_range(1..=n);
        let a = elementary_symmetric(&root_list(&roots), k).unwrap();
        roots.shuffle(&mut rng);
        // root_list sorts, so this only checks the canonical order is reached.
        let b = elementary_symmetric(&root_list(&roots), k).unwrap();
        assert_eq!(a, b);
        // The recurrence itself, applied in shuffled order.
        let mut acc = vec![Complex64::new(0.0, 0.0); k + 1];
        acc[0] = Complex64::new(1.0, 0.0);
        for z in &roots {
            for j in (1..=k).rev() {
                let prev = acc[j - 1];
                acc[j] += z * prev;
            }
        }
        // Relative to e_j(|z|), the sum of |products|: individual c_j can
        // cancel to near zero, so a componentwise bound would test luck.
        let mut scale = vec![0.0f64; k + 1];
        scale[0] = 1.0;
        for z in &roots {
            for j in (1..=k).rev() {
                scale[j] += z.norm() * scale[j - 1];
            }
        }
        for j in 1..=k {
            let err = (acc[j] - a.coefficients()[j - 1]).norm();
            assert!(err <= 1e-10 * scale[j], "c_{j}: {err} vs {}", scale[j]);
        }
    }
}

#[test]
fn first_coefficient_moves_at_most_total_root_shift() {
    let mut rng = rng(13);
    for _ in 0..100 {
        let n = rng.gen_range(1..=20);
        let d = random_diagram(&mut rng, n);
        let delta = 1e-3;
        let moved = PersistenceDiagram::from_pairs(d.expanded().map(|(b, e)| {
            let b2 = b + rng.gen_range(-delta..delta);
            let e2 = e + rng.gen_range(-delta..delta);
            (b2, e2.max(b2 + 1e-9))
        }))
        .unwrap();
        let m = d.total_multiplicity();
        let c = embed(&d, Transform::R, m, 1).unwrap().coefficients()[0];
        let c2 = embed(&moved, Transform::R, m, 1).unwrap().coefficients()[0];
        assert!((c - c2).norm() <= m as f64 * delta * 2f64.sqrt() * (1.0 + 1e-12) + 1e-9);
    }
}

proptest! {
    #[test]
    fn padding_commutes_with_coefficients(seed in any::<u64>(), n in 1usize..15, factor in 1usize..=4) {
        let mut rng = rng(seed);
        let roots = random_roots(&mut rng, n);
        let list = root_list(&roots);
        let width = n * factor;
        let padded = pad_roots(&list, width).unwrap();
        let full = elementary_symmetric(&padded, width).unwrap();
        let short = elementary_symmetric(&list, n).unwrap();
        let mut extended = short.coefficients().to_vec();
        extended.resize(width, Complex64::new(0.0, 0.0));
        prop_assert!(max_rel_error(full.coefficients(), &extended) <= 1e-12);
    }
}

// ---------------------------------------------------------------- transforms

#[test]
fn transform_preserves_total_multiplicity() {
    let mut rng = rng(14);
    for _ in 0..50 {
        let n = rng.gen_range(0..20);
        let d = random_diagram(&mut rng, n);
        for t in Transform::ALL {
            let l = transform_diagram(&d, t).unwrap();
            let sum: usize = l.roots().iter().map(|r| r.multiplicity as usize).sum();
            assert_eq!(sum, d.total_multiplicity());
        }
    }
}

// ---------------------------------------------------------------- metrics

#[test]
fn bottleneck_matches_bruteforce() {
    let mut rng = rng(15);
    for _ in 0..300 {
        let r = rng.gen_range(0..=5);
        let s = rng.gen_range(0..=(8 - r).min(5));
        let a = random_diagram(&mut rng, r);
        let b = random_diagram(&mut rng, s);
        let fast = bottleneck(&a, &b);
        let slow = bottleneck_bruteforce(&a, &b).unwrap();
        assert!(
            (fast - slow).abs() <= 1e-12,
            "{a:?} {b:?}: {fast} vs {slow}"
        );
    }
}

#[test]
fn bottleneck_shift_stability() {
    let mut rng = rng(16);
    for _ in 0..100 {
        let n = rng.gen_range(0..15);
        let d = random_diagram(&mut rng, n);
        let s: f64 = rng.gen_range(-0.3..0.3);
        let shifted =
            PersistenceDiagram::from_pairs(d.expanded().map(|(b, e)| (b + s, e + s))).unwrap();
        assert!(bottleneck(&d, &shifted) <= s.abs() + 1e-12);
    }
}

#[test]
fn d2_never_exceeds_d1_and_d3_brackets_d1() {
    let mut rng = rng(17);
    let vec_of = |v: Vec<Complex64>| {
        let w = v.len();
        pdcoeff_core::CoefficientVector::new(v, w).unwrap()
    };
    for _ in 0..500 {
        let k = rng.gen_range(1..10);
        let a = random_roots(&mut rng, k);
        let b = random_roots(&mut rng, k);
        let (va, vb) = (vec_of(a.clone()), vec_of(b.clone()));
        let d1 = coeff_distance(&va, &vb, CoeffMetric::D1).unwrap();
        let d2 = coeff_distance(&va, &vb, CoeffMetric::D2).unwrap();
        assert!(d2 <= d1 + 1e-15);

        // All differences at most 1: d3 >= d1. All at least 1: d3 <= d1.
        let small: Vec<Complex64> = a
            .iter()
            .map(|z| z + Complex64::new(rng.gen_range(0.0..0.7), 0.0))
            .collect();
        let vs = vec_of(small);
        assert!(
            coeff_distance(&va, &vs, CoeffMetric::D3).unwrap()
                >= coeff_distance(&va, &vs, CoeffMetric::D1).unwrap() - 1e-15
        );
        let large: Vec<Complex64> = a
            .iter()
            .map(|z| z + Complex64::new(rng.gen_range(1.0..5.0), 0.0))
            .collect();
        let vl = vec_of(large);
        assert!(
            coeff_distance(&va, &vl, CoeffMetric::D3).unwrap()
                <= coeff_distance(&va, &vl, CoeffMetric::D1).unwrap() + 1e-15
        );
    }
}

#[test]
fn point_distance_is_symmetric() {
    let mut rng = rng(18);
    for _ in 0..1000 {
        let p = (rng.gen_range(-1.0..1.0), 0.0);
        let p = (p.0, p.0 + rng.gen_range(0.0..1.0));
        let q = (rng.gen_range(-1.0..1.0), 0.0);
        let q = (q.0, q.0 + rng.gen_range(0.0..1.0));
        assert_eq!(point_distance(p, q).unwrap(), point_distance(q, p).unwrap());
    }
}

// ---------------------------------------------------------------- mesh

fn rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    // Rotation from a random unit quaternion.
    let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|c| c / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn apply(r: &[[f64; 3]; 3], v: Point3) -> Point3 {
    std::array::from_fn(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
}

fn asymmetric_cloud(rng: &mut impl Rng, n: usize) -> TriangleMesh {
    // Skewed along z so the axis is well defined.
    let vertices = (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(0.0..1.0);
            [
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                z * z * z * 3.0,
            ]
        })
        .collect();
    let triangles = (2..n).map(|i| [i - 2, i - 1, i]).collect();
    TriangleMesh::new(vertices, triangles).unwrap()
}

#[test]
fn filters_are_rigid_motion_invariant() {
    let mut rng = rng(19);
    for _ in 0..30 {
        let mesh = asymmetric_cloud(&mut rng, 40);
        let frame = MeshFrame::from_mesh(&mesh).unwrap();
        let r = rotation(&mut rng);
        let t: Point3 = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let moved = TriangleMesh::new(
            mesh.vertices()
                .iter()
                .map(|&v| {
                    let rv = apply(&r, v);
                    [rv[0] + t[0], rv[1] + t[1], rv[2] + t[2]]
                })
                .collect(),
            mesh.triangles().to_vec(),
        )
        .unwrap();
        let c = apply(&r, frame.center);
        let moved_frame = MeshFrame::new(
            [c[0] + t[0], c[1] + t[1], c[2] + t[2]],
            apply(&r, frame.axis),
        )
        .unwrap();
        for (a, b) in mesh
            .line_distances(&frame)
            .iter()
            .zip(moved.line_distances(&moved_frame))
        {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in mesh
            .plane_distances(&frame)
            .iter()
            .zip(moved.plane_distances(&moved_frame))
        {
            assert!((a - b).abs() < 1e-12);
        }
        // The axis recomputed from the moved mesh agrees with the moved axis.
        let recomputed = MeshFrame::from_mesh(&moved).unwrap();
        for i in 0..3 {
            assert!((recomputed.axis[i] - moved_frame.axis[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn pipeline_is_scale_invariant() {
    let mut rng = rng(20);
    for _ in 0..20 {
        let mesh = asymmetric_cloud(&mut rng, 30);
        let s: f64 = rng.gen_range(0.1..10.0);
        let scaled = TriangleMesh::new(
            mesh.vertices().iter().map(|v| v.map(|c| c * s)).collect(),
            mesh.triangles().to_vec(),
        )
        .unwrap();
        for kind in [FilterKind::Line, FilterKind::Plane] {
            let a = mesh.normalized(mesh.center_of_mass()).unwrap();
            let b = scaled.normalized(scaled.center_of_mass()).unwrap();
            let fa = a.filter(&MeshFrame::from_mesh(&a).unwrap(), kind);
            let fb = b.filter(&MeshFrame::from_mesh(&b).unwrap(), kind);
            for (x, y) in fa.values().iter().zip(fb.values()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn center_of_mass_matches_compensated_sum() {
    let mut rng = rng(21);
    for _ in 0..20 {
        let n = rng.gen_range(1..500);
        let vertices: Vec<Point3> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1e3..1e3)))
            .collect();
        let mesh = TriangleMesh::new(vertices.clone(), vec![]).unwrap();
        let got = mesh.center_of_mass();
        for axis in 0..3 {
            // Kahan summation.
            let (mut sum, mut comp) = (0.0f64, 0.0f64);
            for v in &vertices {
                let y = v[axis] - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            let want = sum / n as f64;
            assert!((got[axis] - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
}

#[test]
fn normalized_mesh_has_unit_radius() {
    let mut rng = rng(22);
    for _ in 0..50 {
        let mesh = asymmetric_cloud(&mut rng, 25);
        let n = mesh.normalized(mesh.center_of_mass()).unwrap();
        let r = n
            .vertices()
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max);
        assert!((r - 1.0).abs() <= 1e-12);
        let c = n.center_of_mass();
        assert!(c.iter().all(|x| x.abs() < 1e-12));
    }
}

#[test]
fn sweep_balances_minima_against_merges() {
    let mut rng = rng(23);
    for _ in 0..100 {
        let (mesh, f) = random_mesh(&mut rng, 30);
        let g = mesh.skeleton();
        let s = lower_star_pairs(&g, &f).unwrap();
        // Independent count: vertices below all their neighbors.
        let v = f.values();
        let mut minima = 0;
        for i in 0..v.len() {
            let lower_neighbor = g
                .edges()
                .iter()
                .any(|&[a, b]| (a == i && v[b] < v[i]) || (b == i && v[a] < v[i]));
            if !lower_neighbor {
                minima += 1;
            }
        }
        assert_eq!(s.births, minima);
        assert_eq!(s.pairs.len() + s.essential.len(), minima);
    }
}

#[test]
fn persistence_ignores_vertex_order() {
    let mut rng = rng(24);
    for _ in 0..50 {
        let (mesh, f) = random_mesh(&mut rng, 30);
        let n = mesh.vertices().len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        // new index perm[i] holds old vertex i
        let mut vertices = vec![[0.0; 3]; n];
        let mut values = vec![0.0; n];
        for i in 0..n {
            vertices[perm[i]] = mesh.vertices()[i];
            values[perm[i]] = f.values()[i];
        }
        let triangles = mesh
            .triangles()
            .iter()
            .map(|t| t.map(|i| perm[i]))
            .collect();
        let permuted = TriangleMesh::new(vertices, triangles).unwrap();
        let a = zero_persistence(&mesh.skeleton(), &f).unwrap();
        let b =
            zero_persistence(&permuted.skeleton(), &VertexFunction::new(values).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn persistence_of_tied_values_still_matches_multiplicity() {
    // Values on a coarse grid produce ties; the diagram is still determined
    // by the rank function.
    let mut rng = rng(25);
    for _ in 0..50 {
        let (mesh, _) = random_mesh(&mut rng, 20);
        let n = mesh.vertices().len();
        let f = VertexFunction::new((0..n).map(|_| rng.gen_range(0..5) as f64).collect()).unwrap();
        let g = mesh.skeleton();
        let d = zero_persistence(&g, &f).unwrap();
        let Some(eps) = f.default_eps() else { continue };
        for p in d.points() {
            assert_eq!(
                multiplicity0(&g, &f, p.birth, p.death, eps).unwrap(),
                p.multiplicity as i64
            );
        }
    }
}

// ---------------------------------------------------------------- retrieval

fn small_db(seed: u64) -> LabeledDatabase {
    SynthConfig {
        classes: 3,
        per_class: 4,
        seed,
        ..Default::default()
    }
    .generate()
    .unwrap()
}

#[test]
fn matrix_cells_match_direct_distances() {
    let db = small_db(1);
    let index = db.embed(Transform::T, Some(3)).unwrap();
    let m = index.distance_matrix(CoeffMetric::D3).unwrap();
    let b = db.bottleneck_matrix();
    for i in 0..db.len() {
        assert_eq!(m.get(i, i), 0.0);
        for j in 0..db.len() {
            let direct = coeff_distance(
                &index.entries()[i].1,
                &index.entries()[j].1,
                CoeffMetric::D3,
            )
            .unwrap();
            assert!((m.get(i, j) - direct).abs() <= 1e-12);
            assert_eq!(m.get(i, j), m.get(j, i));
            let bd = bottleneck(&db.entries()[i].diagram, &db.entries()[j].diagram);
            assert!((b.get(i, j) - bd).abs() <= 1e-12);
        }
    }
}

#[test]
fn pr_curve_ignores_class_names_and_order() {
    let mut rng = rng(26);
    let n = 12;
    let labels: Vec<String> = (0..n).map(|i| format!("c{}", i % 3)).collect();
    let ids: Vec<String> = (0..n).map(|i| format!("id{i:02}")).collect();
    let mut raw = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = rng.gen_range(0..4) as f64;
            raw[i][j] = d;
            raw[j][i] = d;
        }
    }
    let m = DistanceMatrix::from_rows(ids.clone(), raw.clone()).unwrap();
    let base = pr_curve(&m, &labels).unwrap();

    let renamed: Vec<String> = labels.iter().map(|l| format!("other-{l}")).collect();
    assert_eq!(pr_curve(&m, &renamed).unwrap(), base);

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let p_ids = perm.iter().map(|&i| ids[i].clone()).collect();
    let p_rows = perm
        .iter()
        .map(|&i| perm.iter().map(|&j| raw[i][j]).collect())
        .collect();
    let p_labels: Vec<String> = perm.iter().map(|&i| labels[i].clone()).collect();
    let pm = DistanceMatrix::from_rows(p_ids, p_rows).unwrap();
    let permuted = pr_curve(&pm, &p_labels).unwrap();
    for (a, b) in base.rows.iter().zip(&permuted.rows) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).abs() < 1e-15);
    }
}

#[test]
fn index_round_trip_is_exact() {
    let db = SynthConfig {
        classes: 2,
        per_class: 5,
        seed: 9,
        ..Default::default()
    }
    .generate()
    .unwrap();
    for t in Transform::ALL {
        let index = db.embed(t, None).unwrap();
        assert_eq!(index.len(), 10);
        let back = EmbeddingIndex::from_csv(&index.to_csv()).unwrap();
        assert_eq!(back, index);
    }
}

#[test]
fn full_prefilter_equals_bottleneck_ranking() {
    let db = small_db(2);
    let index = db.embed(Transform::S, None).unwrap();
    for id in db.ids() {
        let two = two_stage_query(&id, &db, &index, CoeffMetric::D1, db.len() - 1).unwrap();
        let pure = bottleneck_ranking(&id, &db).unwrap();
        let a: Vec<&str> = two.iter().map(|r| r.id.as_str()).collect();
        let b: Vec<&str> = pure.iter().map(|r| r.0.as_str()).collect();
        assert_eq!(a, b);
    }
}

#[test]
fn database_rejects_duplicate_ids() {
    let d = PersistenceDiagram::empty();
    let e = |id: &str| Entry {
        id: id.into(),
        label: "x".into(),
        diagram: d.clone(),
    };
    assert!(LabeledDatabase::new(vec![e("a"), e("a")]).is_err());
    assert!(LabeledDatabase::new(vec![e("a,b")]).is_err());
}

#[test]
fn prefilter_keeps_nearest_neighbor_report() {
    // Reported, not asserted: how often the bottleneck-nearest neighbor
    // survives a prefilter that keeps a quarter of the database.
    let db = SynthConfig {
        classes: 3,
        per_class: 10,
        seed: 4,
        ..Default::default()
    }
    .generate()
    .unwrap();
    let keep = (db.len() - 1) / 4;
    for (transform, metric) in [
        (Transform::S, CoeffMetric::D3),
        (Transform::T, CoeffMetric::D3),
        (Transform::R, CoeffMetric::D1),
    ] {
        let index = db.embed(transform, None).unwrap();
        let mut kept = 0;
        for id in db.ids() {
            let nearest = &bottleneck_ranking(&id, &db).unwrap()[0].0;
            let two = two_stage_query(&id, &db, &index, metric, keep).unwrap();
            if two[..keep].iter().any(|r| &r.id == nearest) {
                kept += 1;
            }
        }
        println!(
            "prefilter {transform}/{metric} keeping {keep}/{}: nearest neighbor survives for {kept}/{} queries",
            db.len() - 1,
            db.len()
        );
    }
}
