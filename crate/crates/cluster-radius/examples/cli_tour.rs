//! Drives the `cluster-radius` binary through each subcommand on generated
//! potential files, the way a shell session would.
//!
//! Run with `cargo run --release --example cli_tour`.

use std::process::Command;

fn main() {
    let dir = std::env::temp_dir().join(format!("cluster-radius-tour-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("rod.json"),
        r#"{"kind":"hard_core","params":{"radius":1.0},"dimension":1}"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("well.json"),
        r#"{"kind":"square_well","params":{"core_radius":1.0,"depth":1.0,"range":2.0},"dimension":3}"#,
    )
    .unwrap();

    let bin = std::env::var("CLUSTER_RADIUS_BIN").unwrap_or_else(|_| {
        // examples and the binary land in the same profile directory
        let mut p = std::env::current_exe().unwrap();
        p.pop(); // example file
        p.pop(); // examples/
        p.push("cluster-radius");
        p.display().to_string()
    });

    let rod = dir.join("rod.json");
    let well = dir.join("well.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["integrals", "--potential", well.to_str().unwrap(), "--beta", "1.0"],
        vec![
            "bounds",
            "--potential",
            well.to_str().unwrap(),
            "--beta",
            "1.0",
            "--stability-b",
            "1.0",
        ],
        vec!["verify-tgi", "--n", "3", "--trials", "20", "--seed", "7"],
        vec!["mayer", "--potential", rod.to_str().unwrap(), "--n", "3", "--method", "exact1d"],
        vec![
            "stability",
            "--potential",
            well.to_str().unwrap(),
            "--n",
            "4",
            "--trials",
            "2",
            "--seed",
            "1",
        ],
    ];
    for args in runs {
        println!("\n$ cluster-radius {}", args.join(" "));
        let output = match Command::new(&bin).args(&args).output() {
            Ok(out) => out,
            Err(e) => {
                eprintln!(
                    "cannot run {bin}: {e}\nbuild the binary first: cargo build --release -p cluster-radius"
                );
                std::process::exit(1);
            }
        };
        print!("{}", String::from_utf8_lossy(&output.stdout));
        if !output.status.success() {
            print!("{}", String::from_utf8_lossy(&output.stderr));
        }
    }
    let _ = std::fs::remove_dir_all(dir);
}
