//! The command-line flow run in-process: generate, build, verify.

use coarse_covers::cli::run;

fn main() {
    let dir = std::env::temp_dir().join(format!("coarse-covers-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["gen", "random-tree", "--seed", "7", "--size", "50", "--out", &path("tree.json")],
        vec!["build", "tree-asdim1", "--space", &path("tree.json"), "--schedule", "2,3", "--out", &path("witness.json")],
        vec!["verify", &path("witness.json"), "--out", &path("report.json")],
        vec!["build", "sfdc-from-asdim", "--space", &path("tree.json"), "--schedule", "1,3", "--out", &path("chain.json")],
        vec!["verify", &path("chain.json"), "--out", &path("chain-report.json")],
    ]
    .into_iter()
    .map(|s| s.into_iter().map(String::from).collect())
    .collect();
    for args in steps {
        let line = args.join(" ");
        match run(std::iter::once("coarse-covers".to_string()).chain(args)) {
            Ok(outcome) => println!("exit {}: {line}", outcome.code),
            Err(failure) => println!("exit {}: {line}: {}", failure.code, failure.message),
        }
    }
    let report = std::fs::read_to_string(dir.join("report.json")).expect("report");
    println!("{report}");
    let _ = std::fs::remove_dir_all(&dir);
}
