//! Acceptance checks. Prints one line per check and exits nonzero when any
//! check fails.

use polyqf::assembly::{
    assemble_global, element_matrix_quadrature, element_rule, q_count, AssemblyOptions,
    AssemblyPath, ReconstructionPlan,
};
use polyqf::basis::{basis_index_map, build_product_tables, Normalization};
use polyqf::bench::{
    assemble_all, integrate_all, monomial_discrepancy, records_to_csv, run_assemble, run_integrate,
    run_lattice_stats, run_solve, solve_case, write_lattice_records, AssembleJob, IntegrateJob,
    Method, ShapeSpec,
};
use polyqf::geometry::{build_facet_lattice, Polytope};
use polyqf::homint::{compute_integrals, extend_integrals, monomial_set, IntegrationOptions};
use polyqf::solver::write_solution_csv;
use polyqf::with_threads;
use std::time::Instant;

struct Report {
    failed: usize,
    total: usize,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, detail: String) {
        self.total += 1;
        if !ok {
            self.failed += 1;
        }
        println!("{} {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn poly(s: &ShapeSpec) -> Polytope {
    s.polytope().unwrap().unwrap()
}

fn both() -> Vec<Method> {
    vec![Method::Quad, Method::Qfree]
}

fn assemble_discrepancy(shape: ShapeSpec, p: usize) -> f64 {
    let job = AssembleJob {
        shape,
        p,
        methods: both(),
        pruned: true,
    };
    run_assemble(&job, 0).unwrap()[0]
        .max_rel_discrepancy
        .unwrap()
}

fn integration_flops(shape: &ShapeSpec, p: usize, method: Method, pruned: bool) -> u64 {
    let job = IntegrateJob {
        shape: shape.clone(),
        p,
        methods: vec![method],
        pruned,
    };
    run_integrate(&job, 0).unwrap()[0].flops_integration
}

fn slope(ps: &[usize], ys: &[u64]) -> f64 {
    let xs: Vec<f64> = ps.iter().map(|&p| (p as f64).ln()).collect();
    let ys: Vec<f64> = ys.iter().map(|&y| (y as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: u64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn ac1(r: &mut Report) {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 5..=16 {
        worst = worst.max(monomial_discrepancy(&poly(&ShapeSpec::Ngon(n)), 32, true).unwrap());
    }
    r.check(
        "AC1",
        worst <= 1e-12,
        format!(
            "n-gons 5..16, |α| ≤ 32: max discrepancy {worst:.3e} (≤ 1e-12), {:.1}s",
            t.elapsed().as_secs_f64()
        ),
    );
}

fn ac2(r: &mut Report) {
    let t = Instant::now();
    let worst_a = (3..=64)
        .map(|n| assemble_discrepancy(ShapeSpec::Ngon(n), 4))
        .fold(0.0, f64::max);
    r.check(
        "AC2a",
        worst_a <= 1e-11,
        format!("n-gons 3..64, p = 4: max relative difference {worst_a:.3e} (≤ 1e-11)"),
    );
    let per_p: Vec<f64> = (1..=12)
        .map(|p| assemble_discrepancy(ShapeSpec::Ngon(6), p))
        .collect();
    let worst_b = per_p.iter().copied().fold(0.0, f64::max);
    let list = per_p
        .iter()
        .map(|v| format!("{v:.1e}"))
        .collect::<Vec<_>>()
        .join(" ");
    r.check(
        "AC2b",
        worst_b <= 1e-11,
        format!("hexagon, p = 1..12: max {worst_b:.3e} (≤ 1e-11) per p [{list}]"),
    );
    let mut worst_c: f64 = 0.0;
    for l in 0..=2 {
        for shape in [ShapeSpec::Tets(l), ShapeSpec::AggloTets(l)] {
            for p in 0..=4 {
                worst_c = worst_c.max(assemble_discrepancy(shape.clone(), p));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    r.check(
        "AC2c",
        worst_c <= 1e-11,
        format!("tets and agglomerated tets, ℓ ≤ 2, p ≤ 4: max {worst_c:.3e} (≤ 1e-11)"),
    );
    r.check("AC2-runtime", secs < 300.0, format!("{secs:.1}s (< 300s)"));
}

fn ac3(r: &mut Report) {
    let mut cases: Vec<(ShapeSpec, usize, usize)> = Vec::new();
    for d in [2u32, 3] {
        cases.push((
            ShapeSpec::Simplex(d as usize),
            2usize.pow(d + 1),
            2usize.pow(d) * (d as usize + 1),
        ));
        cases.push((
            ShapeSpec::Cube(d as usize),
            3usize.pow(d) + 1,
            2 * 3usize.pow(d - 1) * d as usize,
        ));
    }
    for n in 3..=16 {
        cases.push((ShapeSpec::Ngon(n), 2 * (n + 1), 4 * n));
    }
    for n in 3..=8 {
        cases.push((ShapeSpec::Prism(n), 2 * (3 * n + 2), 15 * n + 2));
        cases.push((ShapeSpec::Pyramid(n), 4 * (n + 1), 2 * (5 * n + 1)));
    }
    let mut bad = Vec::new();
    for (shape, v, e) in &cases {
        let s = run_lattice_stats(shape).unwrap();
        // Hypercube edge counts leave out the edges into the empty facet.
        let got_e = if matches!(shape, ShapeSpec::Cube(_)) {
            s.lattice_E_no_empty
        } else {
            s.lattice_E
        };
        if s.lattice_V != *v || got_e != *e {
            bad.push(format!("{shape}: ({}, {got_e}) vs ({v}, {e})", s.lattice_V));
        }
    }
    r.check(
        "AC3",
        bad.is_empty(),
        format!("{} shapes, mismatches [{}]", cases.len(), bad.join("; ")),
    );
}

fn ac4(r: &mut Report) {
    let pent = ShapeSpec::Ngon(5);
    let ps = [8, 16, 32];
    let qf: Vec<u64> = ps
        .iter()
        .map(|&p| integration_flops(&pent, p, Method::Qfree, true))
        .collect();
    let qd: Vec<u64> = ps
        .iter()
        .map(|&p| integration_flops(&pent, p, Method::Quad, true))
        .collect();
    let (sf, sq) = (slope(&ps, &qf), slope(&ps, &qd));
    r.check(
        "AC4-qfree-exponent",
        (sf - 2.0).abs() <= 0.2,
        format!("pentagon, p ∈ {{8,16,32}}, counters {qf:?}: exponent {sf:.3} (2.0 ± 0.2)"),
    );
    r.check(
        "AC4-quad-exponent",
        (sq - 4.0).abs() <= 0.3,
        format!("pentagon, p ∈ {{8,16,32}}, counters {qd:?}: exponent {sq:.3} (4.0 ± 0.3)"),
    );

    let mut bad = Vec::new();
    let mut n_cases = 0;
    for (shape, pmax) in [
        (ShapeSpec::Ngon(5), 8),
        (ShapeSpec::Ngon(6), 8),
        (ShapeSpec::Simplex(3), 6),
        (ShapeSpec::Cube(3), 5),
        (ShapeSpec::AggloTris(1), 4),
    ] {
        for p in 0..=pmax {
            n_cases += 1;
            let job = AssembleJob {
                shape: shape.clone(),
                p,
                methods: vec![Method::Qfree],
                pruned: true,
            };
            let rec = &run_assemble(&job, 0).unwrap()[0];
            let d = if matches!(shape, ShapeSpec::Ngon(_) | ShapeSpec::AggloTris(_)) {
                2
            } else {
                3
            };
            let want = q_count(p, d) * rec.no_eles as u64;
            if rec.reconstruction_visits != want {
                bad.push(format!(
                    "{shape} p={p}: {} vs {want}",
                    rec.reconstruction_visits
                ));
            }
        }
    }
    r.check(
        "AC4-visits",
        bad.is_empty(),
        format!(
            "reconstruction counter = Q_d(p) per element on {n_cases} cases [{}]",
            bad.join("; ")
        ),
    );

    let tables = build_product_tables(1, Normalization::Orthonormal).unwrap();
    let plan = ReconstructionPlan::new(1, 2, &tables).unwrap();
    let q21 = plan.visits();
    r.check(
        "AC4-Q2(1)",
        q21 == 23 && q_count(1, 2) == 23,
        format!("Q_2(1) = {q21} counted, {} closed (23)", q_count(1, 2)),
    );

    let (d, p) = (2u64, 16u64);
    let asym = (p as f64).powi(3 * d as i32) * binom(4 * d, 2 * d) / factorial(3 * d);
    let ratio = q_count(p as usize, d as usize) as f64 / asym;
    let larger = [32usize, 64, 128]
        .iter()
        .map(|&p| {
            let a = (p as f64).powi(6) * binom(8, 4) / factorial(6);
            format!("p={p} {:.4}", q_count(p, 2) as f64 / a)
        })
        .collect::<Vec<_>>()
        .join(", ");
    r.check(
        "AC4-asymptote",
        (ratio - 1.0).abs() <= 0.2,
        format!(
            "Q_2(16) = {} vs p^6·C(8,4)/6! = {asym:.1}: ratio {ratio:.4} (1 ± 0.2); larger p [{larger}]",
            q_count(16, 2)
        ),
    );
}

fn ac5(r: &mut Report) {
    let data2 = solve_case("smooth", 2).unwrap().data;
    let data3 = solve_case("smooth", 3).unwrap().data;
    let mut bad = Vec::new();
    let mut n_cases = 0;
    let shapes = [
        ShapeSpec::Ngon(3),
        ShapeSpec::Ngon(5),
        ShapeSpec::Ngon(12),
        ShapeSpec::Cube(2),
        ShapeSpec::Simplex(3),
        ShapeSpec::Cube(3),
        ShapeSpec::Prism(5),
        ShapeSpec::Pyramid(4),
        ShapeSpec::AggloTris(1),
        ShapeSpec::AggloTets(1),
    ];
    for shape in &shapes {
        let mesh = shape.mesh(0).unwrap();
        let d = mesh.dim();
        let data = if d == 2 { &data2 } else { &data3 };
        for p in 0..=5 {
            let n = basis_index_map(p, d).len() as u64;
            for e in 0..mesh.len() {
                n_cases += 1;
                let kappa = mesh.polytope(e);
                let rule = element_rule(kappa, p).unwrap();
                let a =
                    element_matrix_quadrature(kappa, e, data, p, &rule, Normalization::Orthonormal)
                        .unwrap();
                let want = 2 * (d as u64 + 2) * n * n * rule.len() as u64;
                if a.counters.main_flops != want {
                    bad.push(format!(
                        "{shape} p={p} e={e}: {} vs {want}",
                        a.counters.main_flops
                    ));
                }
            }
        }
    }
    r.check(
        "AC5",
        bad.is_empty(),
        format!(
            "main-loop counter = 2(d+2)n²N on {n_cases} element matrices [{}]",
            bad.join("; ")
        ),
    );
}

fn ac6(r: &mut Report) {
    let mut shapes: Vec<ShapeSpec> = Vec::new();
    shapes.extend((3..=16).map(ShapeSpec::Ngon));
    shapes.extend([2, 3].map(ShapeSpec::Simplex));
    shapes.extend([2, 3].map(ShapeSpec::Cube));
    shapes.extend((3..=8).map(ShapeSpec::Prism));
    shapes.extend((3..=8).map(ShapeSpec::Pyramid));
    shapes.extend([
        ShapeSpec::Tris(0),
        ShapeSpec::Tets(0),
        ShapeSpec::Tets(1),
        ShapeSpec::AggloTris(1),
        ShapeSpec::AggloTets(1),
    ]);
    let simplicial = |s: &ShapeSpec| {
        matches!(
            s,
            ShapeSpec::Simplex(_) | ShapeSpec::Tris(_) | ShapeSpec::Tets(_)
        )
    };
    let mut not_le = Vec::new();
    let mut not_lt = Vec::new();
    for s in &shapes {
        for p in 0..=8 {
            let on = integration_flops(s, p, Method::Qfree, true);
            let off = integration_flops(s, p, Method::Qfree, false);
            if on > off {
                not_le.push(format!("{s} p={p}: {on} > {off}"));
            }
            if simplicial(s) && p >= 1 && on >= off {
                not_lt.push(format!("{s} p={p}: {on} ≥ {off}"));
            }
        }
    }
    r.check(
        "AC6-le",
        not_le.is_empty(),
        format!(
            "pruned ≤ unpruned on {} geometries, p ≤ 8 [{}]",
            shapes.len(),
            not_le.join("; ")
        ),
    );
    r.check(
        "AC6-strict",
        not_lt.is_empty(),
        format!(
            "pruned < unpruned on simplices, 1 ≤ p ≤ 8 [{}]",
            not_lt.join("; ")
        ),
    );
    for s in [ShapeSpec::Simplex(3), ShapeSpec::Tets(1)] {
        let ratios: Vec<f64> = [0, 2, 4, 6, 8]
            .iter()
            .map(|&p| {
                integration_flops(&s, p, Method::Qfree, true) as f64
                    / integration_flops(&s, p, Method::Qfree, false) as f64
            })
            .collect();
        let ok = ratios.windows(2).all(|w| w[1] <= w[0]);
        let list = ratios
            .iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(" ");
        r.check(
            &format!("AC6-ratio {s}"),
            ok,
            format!("pruned/unpruned over p ∈ {{0,2,4,6,8}}: [{list}] non-increasing"),
        );
    }
}

fn ac7(r: &mut Report) {
    let cases = [(0, "const"), (1, "poly1"), (2, "poly2")];
    for shape in [ShapeSpec::Tris(2), ShapeSpec::Tets(1)] {
        for path in [AssemblyPath::QuadratureFree, AssemblyPath::Quadrature] {
            let mut worst: f64 = 0.0;
            let mut list = Vec::new();
            for (p, case) in cases {
                let (rec, _, _) = run_solve(&shape, p, case, path, 0).unwrap();
                let err = rec.l2_error.unwrap();
                worst = worst.max(err);
                list.push(format!("p={p} {err:.1e}"));
            }
            r.check(
                &format!("AC7 {shape} {path}"),
                worst <= 1e-10,
                format!(
                    "broken L2 error of degree-p solutions: max {worst:.3e} (≤ 1e-10) [{}]",
                    list.join(", ")
                ),
            );
        }
    }
}

fn ac8(r: &mut Report) {
    for shape in [ShapeSpec::Ngon(5), ShapeSpec::Simplex(3)] {
        let kappa = poly(&shape);
        let lattice = build_facet_lattice(&kappa, false).unwrap();
        let mut bad = Vec::new();
        for pruning in [true, false] {
            let opts = IntegrationOptions {
                pruning,
                ..Default::default()
            };
            for p in 0..=5 {
                let d = kappa.dim();
                let base = compute_integrals(&lattice, &monomial_set(p, d), opts).unwrap();
                let ext = extend_integrals(&base, &lattice, p, p + 1).unwrap();
                let fresh = compute_integrals(&lattice, &monomial_set(p + 1, d), opts).unwrap();
                if ext.bits() != fresh.bits() || ext.set().indices() != fresh.set().indices() {
                    bad.push(format!("p={p} pruned={pruning}"));
                }
            }
        }
        r.check(
            &format!("AC8 {shape}"),
            bad.is_empty(),
            format!(
                "extension p → p+1 bitwise equal to fresh tables, p = 0..5 [{}]",
                bad.join("; ")
            ),
        );
    }
}

fn outputs() -> Vec<String> {
    let shapes = [
        ShapeSpec::Ngon(5),
        ShapeSpec::Simplex(3),
        ShapeSpec::Prism(4),
        ShapeSpec::Tets(1),
        ShapeSpec::AggloTris(1),
        ShapeSpec::AggloTets(1),
    ];
    let mut ij = Vec::new();
    let mut aj = Vec::new();
    for s in &shapes {
        for p in 0..=3 {
            for pruned in [true, false] {
                ij.push(IntegrateJob {
                    shape: s.clone(),
                    p,
                    methods: both(),
                    pruned,
                });
            }
            aj.push(AssembleJob {
                shape: s.clone(),
                p,
                methods: both(),
                pruned: true,
            });
        }
    }
    let mut out = vec![
        records_to_csv(&integrate_all(&ij, 0).unwrap(), false).unwrap(),
        records_to_csv(&assemble_all(&aj, 0).unwrap(), false).unwrap(),
    ];
    let lattice: Vec<_> = shapes
        .iter()
        .filter_map(|s| s.polytope().unwrap().map(|_| run_lattice_stats(s).unwrap()))
        .collect();
    let mut buf = Vec::new();
    write_lattice_records(&lattice, &mut buf).unwrap();
    out.push(String::from_utf8(buf).unwrap());
    for s in [ShapeSpec::AggloTris(2), ShapeSpec::Tets(1)] {
        let (rec, x, nb) = run_solve(&s, 2, "smooth", AssemblyPath::QuadratureFree, 0).unwrap();
        let mut buf = Vec::new();
        write_solution_csv(&x, nb, &mut buf).unwrap();
        out.push(String::from_utf8(buf).unwrap());
        out.push(records_to_csv(&[rec], false).unwrap());
        let mesh = s.mesh(0).unwrap();
        let data = solve_case("smooth", mesh.dim()).unwrap().data;
        let sys = assemble_global(&mesh, &data, 2, AssemblyOptions::default()).unwrap();
        let mut buf = Vec::new();
        sys.write_coordinates(&mut buf).unwrap();
        out.push(String::from_utf8(buf).unwrap());
    }
    out
}

fn ac9(r: &mut Report) {
    let runs: Vec<Vec<String>> = [1, 2, 8]
        .iter()
        .map(|&t| with_threads(t, outputs).unwrap())
        .collect();
    let ok = runs[1] == runs[0] && runs[2] == runs[0];
    let bytes: usize = runs[0].iter().map(|s| s.len()).sum();
    r.check(
        "AC9",
        ok,
        format!(
            "{} CSV outputs ({bytes} bytes) identical across 1, 2 and 8 threads",
            runs[0].len()
        ),
    );
}

type Check = fn(&mut Report);

fn main() {
    let mut r = Report {
        failed: 0,
        total: 0,
    };
    let checks: [(&str, Check); 9] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with("AC"))
        .collect();
    for (name, f) in checks {
        if filter.is_empty() || filter.iter().any(|a| a == name) {
            f(&mut r);
        }
    }
    println!("{} of {} checks passed", r.total - r.failed, r.total);
    if r.failed > 0 {
        std::process::exit(1);
    }
}
