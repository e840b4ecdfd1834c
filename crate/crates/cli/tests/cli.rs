use std::process::Command;

fn polyqf(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_polyqf"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().to_string())
        .collect()
}

#[test]
fn integrate_pentagon_both_methods() {
    let (ok, out, err) = polyqf(&[
        "integrate",
        "--shape",
        "ngon:5",
        "--p",
        "32",
        "--method",
        "both",
    ]);
    assert!(ok, "{err}");
    let d: Vec<f64> = column(&out, "max_rel_discrepancy")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(d.len(), 2);
    assert!(d.iter().all(|&x| x <= 1e-12), "{d:?}");
}

#[test]
fn lattice_columns_for_tetrahedron() {
    let (ok, out, _) = polyqf(&[
        "integrate",
        "--shape",
        "simplex:3",
        "--p",
        "0",
        "--method",
        "qfree",
    ]);
    assert!(ok);
    assert_eq!(column(&out, "lattice_V"), vec!["16"]);
    assert_eq!(column(&out, "lattice_E"), vec!["32"]);
}

#[test]
fn tets_sweep_has_fifty_rows() {
    let (ok, out, err) = polyqf(&[
        "assemble",
        "--shape",
        "tets:0..4",
        "--p-min",
        "0",
        "--p-max",
        "4",
        "--method",
        "both",
        "--no-timers",
    ]);
    assert!(ok, "{err}");
    assert_eq!(out.lines().count(), 51);
    let flops = column(&out, "flops_reconstruction");
    let method = column(&out, "method");
    let pmax = column(&out, "pmax");
    let shape = column(&out, "shape");
    // qfree/quad ratio decreases with p on every mesh.
    for s in ["tets:0", "tets:2"] {
        let mut last = f64::INFINITY;
        for p in 0..=4 {
            let get = |m: &str| -> f64 {
                (0..method.len())
                    .find(|&i| shape[i] == s && method[i] == m && pmax[i] == p.to_string())
                    .map(|i| flops[i].parse().unwrap())
                    .unwrap()
            };
            let ratio = get("qfree") / get("quad");
            assert!(ratio < last, "{s} p={p}: {ratio} vs {last}");
            last = ratio;
        }
    }
}

#[test]
fn pruning_reduces_tet_integration() {
    let (ok, out, _) = polyqf(&[
        "assemble", "--shape", "tets:1", "--p", "1,2,3", "--method", "qfree", "--pruned", "both",
    ]);
    assert!(ok);
    let flops: Vec<u64> = column(&out, "flops_integration")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let pruned = column(&out, "pruned");
    for pair in flops.chunks(2).zip(pruned.chunks(2)) {
        assert_eq!(pair.1, ["false", "true"]);
        assert!(pair.0[1] < pair.0[0]);
    }
}

#[test]
fn solve_cases() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("u.csv");
    let (ok, out, err) = polyqf(&[
        "solve",
        "--shape",
        "tris:0",
        "--p",
        "2",
        "--data",
        "poly2",
        "--solution",
        sol.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    let e: f64 = column(&out, "l2_error")[0].parse().unwrap();
    assert!(e <= 1e-10);
    let text = std::fs::read_to_string(&sol).unwrap();
    assert!(text.starts_with("element,basis_index,value"));
    assert_eq!(text.lines().count(), 1 + 32 * 6);
    let (ok, out, _) = polyqf(&["solve", "--shape", "tris:0", "--data", "source-only"]);
    assert!(ok);
    assert_eq!(column(&out, "l2_error"), vec![""]);
}

#[test]
fn mesh_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sq.json");
    std::fs::write(
        &path,
        r#"{"dim":2,"vertices":[[0,0],[1,0],[1,1],[0,1]],"cells":[[0,1,2,3]]}"#,
    )
    .unwrap();
    let (ok, out, err) = polyqf(&["integrate", "--mesh", path.to_str().unwrap(), "--p", "2"]);
    assert!(ok, "{err}");
    assert_eq!(out.lines().count(), 3);
    std::fs::write(
        &path,
        r#"{"dim":2,"vertices":[[0,0],[1,0]],"cells":[[0,1,5]]}"#,
    )
    .unwrap();
    let (ok, _, err) = polyqf(&["integrate", "--mesh", path.to_str().unwrap(), "--p", "2"]);
    assert!(!ok);
    assert!(err.contains("cell 0"), "{err}");
}

#[test]
fn invalid_specs_fail() {
    let (ok, _, err) = polyqf(&["integrate", "--shape", "blob:3", "--p", "1"]);
    assert!(!ok);
    assert!(err.contains("blob:3"));
    let (ok, _, _) = polyqf(&["integrate", "--shape", "ngon:2", "--p", "1"]);
    assert!(!ok);
    let (ok, _, _) = polyqf(&["lattice-stats", "--shape", "tets:1"]);
    assert!(!ok);
}

#[test]
fn lattice_stats_rows() {
    let (ok, out, _) = polyqf(&["lattice-stats", "--shape", "cube:3", "--shape", "ngon:3..5"]);
    assert!(ok);
    assert_eq!(out.lines().count(), 5);
    assert_eq!(column(&out, "lattice_E_no_empty")[0], "54");
}

#[test]
fn output_independent_of_threads() {
    let args = [
        "assemble",
        "--shape",
        "agglo-tris:1",
        "--shape",
        "tets:1",
        "--p",
        "0,2",
        "--no-timers",
    ];
    let runs: Vec<String> = ["1", "2", "8"]
        .iter()
        .map(|t| {
            let mut a = args.to_vec();
            a.extend(["--threads", t]);
            let (ok, out, err) = polyqf(&a);
            assert!(ok, "{err}");
            out
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}
