use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_isocache")).args(args).output().unwrap()
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    all.extend(["--out", &p]);
    let out = run(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(&path).unwrap()
}

#[test]
fn subcommands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 6] = [
        &["tile", "--grid", "3:20,18,16", "--cache", "1:1:512", "--tiles", "canonical,succmin,voronoi"],
        &["partition", "--synthetic", "perturbed:8,8,8", "--mode", "starry", "--S", "32,64", "--seed", "5"],
        &["partition", "--synthetic", "tri:24", "--S", "64"],
        &["bounds", "--grid", "3:50,50,50", "--S", "1024"],
        &["fft", "--n", "5", "--strategy", "random:500", "--seed", "9"],
        &["lattice", "--grid", "2:100,100", "--S", "64"],
    ];
    for (i, args) in commands.iter().enumerate() {
        let a = run_to(dir.path(), &format!("a{i}"), args);
        let b = run_to(dir.path(), &format!("b{i}"), args);
        assert!(!a.is_empty(), "{args:?} wrote nothing");
        assert_eq!(a, b, "{args:?} differs between runs");
    }
}

#[test]
fn covering_file_lists_every_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("cov.txt");
    let out = run(&["partition", "--synthetic", "tri:16", "--S", "32", "--covering", cov.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&cov).unwrap();
    let mut vertices: Vec<usize> = text
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    vertices.sort_unstable();
    assert_eq!(vertices, (0..256).collect::<Vec<_>>());
}

#[test]
fn mesh_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.json");
    let grid = isocache::unstructured::triangulated_square(12);
    std::fs::write(&mesh, grid.to_json()).unwrap();
    let out = run(&["partition", "--mesh", mesh.to_str().unwrap(), "--S", "16", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows[0]["vertices"], 144);
}

#[test]
fn invalid_input_exit_codes() {
    assert_eq!(run(&["tile", "--grid", "3:10,10"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--grid", "2:10,10", "--S", "0"]).status.code(), Some(2));
    // Edge lengths 1 and 4 break the ratio bound c0 = 2.
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("bad.txt");
    std::fs::write(&mesh, "2 3 2\n0 0\n1 0\n5 0\n0 1\n1 2\n").unwrap();
    assert_eq!(run(&["partition", "--mesh", mesh.to_str().unwrap(), "--mode", "starry"]).status.code(), Some(2));
}
