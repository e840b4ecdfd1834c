use polyqf::assembly::{assemble_global, AssemblyOptions, AssemblyPath, TransportData};
use polyqf::basis::Normalization;
use polyqf::mesh::{agglomerate, mesh_from_json, mesh_to_json, structured_mesh};
use polyqf::solver::{
    broken_l2_error, flow_order, relative_residual, solve, solve_iterative, FlowResult,
};
use polyqf::Point;
use proptest::prelude::*;

fn linear_case(d: usize) -> (TransportData, fn(&Point) -> f64) {
    let b = if d == 2 {
        Point::new(0.8, 0.5, 0.0)
    } else {
        Point::new(0.8, 0.5, 0.3)
    };
    let u: fn(&Point) -> f64 = |x| 2.0 - x.x + 0.5 * x.y + 0.25 * x.z;
    let du = Point::new(-1.0, 0.5, 0.25);
    let data = TransportData::constant(b, 0.5, move |x| b.dot(&du) + 0.5 * u(x), u).unwrap();
    (data, u)
}

fn sweep(
    mesh: &polyqf::mesh::PolytopicMesh,
    data: &TransportData,
    p: usize,
    path: AssemblyPath,
) -> (f64, f64) {
    let sys = assemble_global(
        mesh,
        data,
        p,
        AssemblyOptions {
            path,
            ..Default::default()
        },
    )
    .unwrap();
    // Non-convex agglomerates may couple both ways across a pair of faces.
    let x = match flow_order(mesh, &data.wind) {
        FlowResult::Order(order) => solve(&sys, Some(&order)).unwrap(),
        FlowResult::Cycle(_) => solve(&sys, None).unwrap(),
    };
    let (y, _) = solve_iterative(&sys, 1e-13, 1000).unwrap();
    (relative_residual(&sys, &x), (&x - &y).amax() / x.amax())
}

#[test]
fn agglomerated_meshes_reproduce_linear_solutions() {
    for (dim, level) in [(2, 1), (3, 1)] {
        let fine = structured_mesh(dim, level).unwrap();
        let coarse = agglomerate(&fine, fine.len() / 10, 3).unwrap();
        let (data, u) = linear_case(dim);
        for path in [AssemblyPath::QuadratureFree, AssemblyPath::Quadrature] {
            let sys = assemble_global(
                &coarse,
                &data,
                1,
                AssemblyOptions {
                    path,
                    ..Default::default()
                },
            )
            .unwrap();
            let x = solve(&sys, None).unwrap();
            let err = broken_l2_error(&coarse, &x, u, 1, Normalization::Orthonormal).unwrap();
            assert!(err < 1e-10, "d={dim} {path}: {err}");
        }
    }
}

#[test]
fn block_solve_matches_iterative_on_agglomerates() {
    let fine = structured_mesh(2, 2).unwrap();
    let coarse = agglomerate(&fine, 40, 11).unwrap();
    let (data, _) = linear_case(2);
    let (res, diff) = sweep(&coarse, &data, 2, AssemblyPath::QuadratureFree);
    assert!(res < 1e-12, "{res}");
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn json_round_trip_preserves_assembly() {
    let fine = structured_mesh(3, 1).unwrap();
    let coarse = agglomerate(&fine, 5, 1).unwrap();
    let again = mesh_from_json(&mesh_to_json(&coarse).unwrap()).unwrap();
    let (data, _) = linear_case(3);
    let opts = AssemblyOptions::default();
    let a = assemble_global(&coarse, &data, 1, opts).unwrap();
    let b = assemble_global(&again, &data, 1, opts).unwrap();
    assert_eq!(a.to_dense(), b.to_dense());
    assert_eq!(a.rhs, b.rhs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn agglomeration_preserves_the_domain(seed in 0u64..1000, target in 2usize..30) {
        let fine = structured_mesh(2, 1).unwrap();
        let coarse = agglomerate(&fine, target, seed).unwrap();
        prop_assert!((coarse.total_measure() - 1.0).abs() < 1e-12);
        let boundary: f64 = coarse.boundary_faces().map(|f| f.measure).sum();
        prop_assert!((boundary - 4.0).abs() < 1e-12);
        let fine_count: usize = coarse.elements().iter().map(|e| e.fine.len()).sum();
        prop_assert_eq!(fine_count, fine.len());
    }

    #[test]
    fn upwind_sweep_solves_random_winds(angle in 0.0..std::f64::consts::TAU, c in 0.0..2.0f64) {
        let mesh = structured_mesh(2, 0).unwrap();
        let b = Point::new(angle.cos(), angle.sin(), 0.0);
        let data = TransportData::constant(b, c, |x| x.x * x.y, |x| x.x - x.y).unwrap();
        let (res, diff) = sweep(&mesh, &data, 2, AssemblyPath::QuadratureFree);
        prop_assert!(res < 1e-12, "{}", res);
        prop_assert!(diff < 1e-9, "{}", diff);
    }
}
