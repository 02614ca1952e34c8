use ffpm::coupling::{projection_weights, ProjectionKind};
use ffpm::mesh::basis::eval_reference;
use ffpm::mesh::generate::tensor_mesh;
use ffpm::mesh::{intersect_interface, markers, BoxMesh, DualTopology, StaggeredGrid};
use ffpm::porous::solve_forchheimer_speed;
use ffpm::verify::total_variation;
use ffpm::{Point, Rect};
use proptest::prelude::*;

/// Sorted nodes on `[a, b]` with `n` cells whose interior nodes are moved by
/// up to `jitter` of the cell width.
fn jittered(a: f64, b: f64, n: usize, shifts: &[f64], jitter: f64) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                a + i as f64 * h
            } else {
                a + (i as f64 + jitter * shifts[i % shifts.len()]) * h
            }
        })
        .collect()
}

/// Tensor mesh on the unit square with every interior vertex displaced
/// independently, so quadrilaterals are general convex ones.
fn random_mesh(nx: usize, ny: usize, tri: bool, shifts: &[f64]) -> BoxMesh<f64> {
    let xs: Vec<f64> = (0..=nx).map(|i| i as f64 / nx as f64).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| j as f64 / ny as f64).collect();
    let mut m = tensor_mesh(&xs, &ys, tri, Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap();
    let (hx, hy) = (1.0 / nx as f64, 1.0 / ny as f64);
    for (k, v) in m.vertices.iter_mut().enumerate() {
        let interior = v.x > 1e-12 && v.x < 1.0 - 1e-12 && v.y > 1e-12 && v.y < 1.0 - 1e-12;
        if interior {
            v.x += 0.3 * hx * shifts[(2 * k) % shifts.len()];
            v.y += 0.3 * hy * shifts[(2 * k + 1) % shifts.len()];
        }
    }
    m.validate().unwrap();
    m
}

fn bisect(d: f64, beta: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, d.max(0.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * (1.0 + beta * mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn forchheimer_speed_matches_bisection(ld in -8.0f64..4.0, lb in -8.0f64..4.0) {
        let (d, beta) = (10f64.powf(ld), 10f64.powf(lb));
        let s = solve_forchheimer_speed(d, beta).unwrap();
        let r = bisect(d, beta);
        prop_assert!((s - r).abs() <= 1e-10 * r.max(1e-300), "d={d} beta={beta}: {s} vs {r}");
        prop_assert!(s <= d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn basis_partition_and_gradients(
        nx in 1usize..5, ny in 1usize..5, tri in any::<bool>(),
        shifts in prop::collection::vec(-1.0f64..1.0, 16),
        xi in 0.0f64..1.0, eta in 0.0f64..1.0,
    ) {
        let m = random_mesh(nx, ny, tri, &shifts);
        for e in 0..m.n_elements() {
            let c = m.corners(e);
            let (a, b) = if c.len() == 3 { (xi * (1.0 - eta), eta) } else { (xi, eta) };
            let ev = eval_reference(&c, a, b);
            let s: f64 = ev.values.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            let g = ev.gradients.iter().fold(Point::zero(), |acc, g| acc + *g);
            prop_assert!(g.norm() < 1e-12 * (nx.max(ny) as f64));
            // linear functions are reproduced
            let gx = ev.gradients.iter().zip(&c).fold(Point::zero(), |acc, (g, p)| acc + *g * p.x);
            prop_assert!((gx - Point::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn scv_measures_partition(
        nx in 1usize..6, ny in 1usize..6, tri in any::<bool>(),
        shifts in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let m = random_mesh(nx, ny, tri, &shifts);
        let d = DualTopology::build(&m).unwrap();
        for e in 0..m.n_elements() {
            let s: f64 = d.element_scvs[e].clone().map(|k| d.scvs[k].volume).sum();
            prop_assert!((s - m.area(e)).abs() < 1e-12);
        }
        let cv: f64 = d.cv_volume.iter().sum();
        prop_assert!((cv - 1.0).abs() < 1e-12);
        prop_assert!((d.total_volume() - 1.0).abs() < 1e-12);
        // boundary sub-faces tile the boundary
        let len: f64 = d.subfaces.iter().map(|s| s.area).sum();
        prop_assert!((len - 4.0).abs() < 1e-12);
    }

    #[test]
    fn facets_tile_both_sides(
        nff in 1usize..9, npm in 1usize..9, tri in any::<bool>(),
        shifts in prop::collection::vec(-0.45f64..0.45, 8),
    ) {
        let xs = jittered(0.0, 1.0, npm, &shifts, 1.0);
        let mesh = tensor_mesh(&xs, &[0.0, 0.5, 1.0], tri, Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        let dual = DualTopology::build(&mesh).unwrap();
        let grid = StaggeredGrid::new(Rect::new(0.0, 1.0, 1.0, 1.5), nff, 2).unwrap();
        let ff: Vec<usize> = (0..grid.n_faces()).filter(|&f| grid.faces[f].marker == Some(markers::BOTTOM)).collect();
        let pm: Vec<usize> = (0..dual.subfaces.len()).filter(|&s| dual.subfaces[s].marker == markers::TOP).collect();
        let facets = intersect_interface(&grid, &ff, &mesh, &dual, &pm).unwrap();
        let total: f64 = facets.iter().map(|f| f.length).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for &f in &ff {
            let s: f64 = facets.iter().filter(|k| k.ff_face == f).map(|k| k.length).sum();
            prop_assert!((s - grid.faces[f].area).abs() < 1e-12);
        }
        for &s in &pm {
            let l: f64 = facets.iter().filter(|k| k.subface == s).map(|k| k.length).sum();
            prop_assert!((l - dual.subfaces[s].area).abs() < 1e-12);
        }

        let mut face_facets = vec![Vec::new(); grid.n_faces()];
        for (k, fc) in facets.iter().enumerate() {
            face_facets[fc.ff_face].push(k);
        }
        for kind in [ProjectionKind::L2, ProjectionKind::AreaWeightedVertex] {
            let rows = projection_weights(&facets, &face_facets, |f| grid.faces[f].area, kind);
            for &f in &ff {
                let row = &rows[f];
                prop_assert!(row.iter().all(|&(_, w)| w >= -1e-15));
                let s: f64 = row.iter().map(|&(_, w)| w).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
                let c: f64 = row.iter().map(|&(_, w)| 3.5 * w).sum();
                prop_assert!((c - 3.5).abs() < 1e-12);
                if kind == ProjectionKind::L2 {
                    // the trace average of x is the face centre
                    let x: f64 = row.iter().map(|&(v, w)| w * mesh.vertices[v].x).sum();
                    prop_assert!((x - grid.faces[f].center.x).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn total_variation_properties(
        seq in prop::collection::vec(-10.0f64..10.0, 2..40),
        a in 0.01f64..100.0,
    ) {
        let (tv, sc) = total_variation(&seq).unwrap();
        let scaled: Vec<f64> = seq.iter().map(|v| a * v).collect();
        let (tv2, sc2) = total_variation(&scaled).unwrap();
        prop_assert!((tv2 - a * tv).abs() <= 1e-12 * (1.0 + a * tv));
        prop_assert_eq!(sc, sc2);
        let flipped: Vec<f64> = seq.iter().map(|v| -v).collect();
        prop_assert_eq!(total_variation(&flipped).unwrap().1, sc);
        prop_assert!(sc < seq.len());
        let lo = seq.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = seq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(tv + 1e-12 >= hi - lo);

        let mut sorted = seq.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (tvm, _) = total_variation(&sorted).unwrap();
        prop_assert!((tvm - (sorted[sorted.len() - 1] - sorted[0])).abs() < 1e-9);
        prop_assert_eq!(total_variation(&vec![seq[0]; seq.len()]).unwrap().0, 0.0);
    }
}

#[test]
fn total_variation_examples() {
    assert_eq!(total_variation(&[1.0, -1.0, 1.0]).unwrap(), (4.0, 2));
    assert_eq!(total_variation(&[1.0, 0.0, 1.0]).unwrap(), (2.0, 0));
    assert_eq!(total_variation(&[2.0, 2.0]).unwrap(), (0.0, 0));
    assert!(total_variation(&[1.0]).is_err());
}
