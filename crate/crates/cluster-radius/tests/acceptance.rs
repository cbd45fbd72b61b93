//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! per clause (run with `--nocapture` to see them all).
//!
//! Criteria 6 and 7 encode literature-quoted targets that direct computation
//! shows to be unattainable (an exact bound saturation at n = 2, and a
//! quoted lower bound that exceeds the true integral by a factor ~220).
//! They are asserted as stated and fail honestly with the computed numbers
//! in the message; the remaining criteria must pass.

use cluster_radius::bounds::{self, BoundTheorem, coefficient_bound};
use cluster_radius::combinat;
use cluster_radius::decompose::{self, DecomposeOptions, GridTail, RadialGridFunction};
use cluster_radius::mayer::{self, CubicBox, MayerMethod};
use cluster_radius::potential::RadialPotential;
use cluster_radius::quad::{self, QuadratureSpec};
use cluster_radius::stability;
use cluster_radius::tgi;
use num_rational::Ratio;
use std::f64::consts::PI;
use std::time::Instant;

// Literature reference values for the Morse rho=6 benchmark, frozen.
const MORSE6_B_UPPER: f64 = 38.65;
const MORSE6_C_TARGET_4PI: f64 = 182.0;
const MORSE6_L1_TARGET_4PI: f64 = 204.0;
const MORSE6_RATIO_PREFACTOR: f64 = 1.13;

struct Checks {
    criterion: &'static str,
    rows: Vec<(String, bool)>,
}

impl Checks {
    fn new(criterion: &'static str) -> Checks {
        Checks { criterion, rows: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        println!("  [{}] {}", if ok { "PASS" } else { "FAIL" }, detail);
        self.rows.push((detail, ok));
    }

    fn finish(self) {
        let failed: Vec<&(String, bool)> = self.rows.iter().filter(|r| !r.1).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict}", self.criterion);
        assert!(
            failed.is_empty(),
            "criterion {} failed clauses:\n{}",
            self.criterion,
            failed.iter().map(|r| format!("  - {}", r.0)).collect::<Vec<_>>().join("\n")
        );
    }
}

#[test]
fn criterion_01_tree_graph_identity() {
    let mut c = Checks::new("1 (tree-graph identity)");
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [2usize, 3, 4] {
        let mut failures = 0u32;
        for trial in 0..200u64 {
            let v = tgi::random_bounded_matrix(n, -1.0, 2.0, 2024, trial);
            let lhs = tgi::lhs_connected_graph_sum(&v).unwrap();
            let rhs = tgi::rhs_tree_sum(&v, 24).unwrap();
            let err = (lhs - rhs.value).abs();
            let tol = 1e-8f64.max(1e-6 * lhs.abs());
            worst = worst.max(err / tol);
            if err > tol {
                failures += 1;
            }
        }
        c.check(failures == 0, format!("n={n}: 200/200 within max(1e-8, 1e-6|lhs|), failures={failures}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check(worst < 1.0, format!("worst error/tolerance ratio = {worst:.3e}"));
    c.check(elapsed < 60.0, format!("runtime {elapsed:.1} s < 60 s"));
    c.finish();
}

#[test]
fn criterion_02_measure_normalization_exact() {
    let mut c = Checks::new("2 (measure normalization)");
    for n in 2..=6usize {
        let mut bad = 0u32;
        let mut trees_checked = 0u32;
        for tree in combinat::trees(n).unwrap() {
            let total: Ratio<i64> = combinat::compatible_sequences(&tree)
                .iter()
                .map(|s| {
                    s.cross_counts
                        .iter()
                        .map(|&b| Ratio::new(1, b as i64))
                        .product::<Ratio<i64>>()
                })
                .sum();
            if total != Ratio::new(1, 1) {
                bad += 1;
            }
            trees_checked += 1;
        }
        c.check(
            bad == 0,
            format!("n={n}: sum of prod(1/b_s) == 1 exactly for all {trees_checked} trees"),
        );
    }
    c.finish();
}

#[test]
fn criterion_03_lemma_tgi3() {
    let mut c = Checks::new("3 (per-tree product identity)");
    let mut worst = 0.0f64;
    let mut failures = 0u32;
    for trial in 0..100u64 {
        let n = 2 + (trial % 4) as usize; // 2..=5
        let v = tgi::random_bounded_matrix(n, -1.5, 2.0, 303, trial);
        let tree_count = n.pow((n - 2) as u32) as u64;
        let pick = (trial.wrapping_mul(2654435761) % tree_count) as usize;
        let tree = combinat::trees(n).unwrap().nth(pick).unwrap();
        let (lhs, rhs) = tgi::lemma_posit_check(&tree, &v, 20).unwrap();
        let err = (lhs - rhs).abs();
        worst = worst.max(err);
        if err > 1e-8 {
            failures += 1;
        }
    }
    c.check(
        failures == 0,
        format!("100/100 seeded trees agree within 1e-8 (worst |lhs-rhs| = {worst:.3e})"),
    );
    c.finish();
}

#[test]
fn criterion_04_tree_inequalities() {
    let mut c = Checks::new("4 (tree-graph inequalities)");
    let mut min_margin = f64::INFINITY;
    let mut violations = 0u32;
    for trial in 0..500u64 {
        let n = 2 + (trial % 4) as usize; // 2..=5
        let v = tgi::random_matrix_with_cores(n, -1.0, 2.0, 0.3, 404, trial);
        let b = stability::finite_algebraic_b(&v).unwrap();
        let (lhs, rhs) = tgi::tree_inequality_penrose(&v, b).unwrap();
        let margin = rhs - lhs;
        min_margin = min_margin.min(margin);
        if lhs > rhs + 1e-9 {
            violations += 1;
        }
    }
    c.check(
        violations == 0,
        format!("hard-core inequality: 0 violations in 500 (min margin {min_margin:.3e})"),
    );

    let mut min_margin = f64::INFINITY;
    let mut violations = 0u32;
    for trial in 0..500u64 {
        let n = 2 + (trial % 4) as usize;
        let phi1 = tgi::random_matrix_with_cores(n, 0.0, 2.0, 0.2, 505, trial);
        let phi2 = tgi::random_bounded_matrix(n, -1.0, 1.0, 606, trial);
        let b0 = stability::finite_algebraic_b(&phi2).unwrap();
        let (lhs, rhs) = tgi::tree_inequality_ruelle(&phi1, &phi2, b0).unwrap();
        let margin = rhs - lhs;
        min_margin = min_margin.min(margin);
        if lhs > rhs + 1e-9 {
            violations += 1;
        }
    }
    c.check(
        violations == 0,
        format!("split inequality: 0 violations in 500 (min margin {min_margin:.3e})"),
    );
    c.finish();
}

#[test]
fn criterion_05_tonks_oracle() {
    let mut c = Checks::new("5 (hard-rod oracle)");
    let start = Instant::now();
    let rods = RadialPotential::hard_core(1.0, 1);
    let bx = CubicBox::new(1, 64.0);
    for n in 2..=4usize {
        let oracle = mayer::tonks_oracle(1.0, n);
        let est =
            mayer::mayer_coefficient(&rods, 1.0, bx, n, MayerMethod::Exact1D, 0, 0).unwrap();
        let rel = ((est.value - oracle) / oracle).abs();
        c.check(
            rel <= 1e-4,
            format!("n={n}: exact {:.10} vs oracle {oracle:.10} (rel {rel:.2e})", est.value),
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check(elapsed < 120.0, format!("runtime {elapsed:.1} s < 120 s"));
    c.finish();
}

#[test]
fn criterion_06_coefficient_bounds_dominate() {
    let mut c = Checks::new("6 (coefficient bounds dominate the oracle)");
    // d=1 rods with a=1: B = 0 and C* = W_1(1) + 0 = 2
    for n in 2..=4usize {
        let truth = mayer::tonks_oracle(1.0, n).abs();
        let bound = coefficient_bound(BoundTheorem::Penrose, n, 0.0, 2.0, 1.0).unwrap().value;
        let strict = truth < bound;
        let note = if strict {
            String::new()
        } else {
            ": the bound saturates exactly here (|C_2| = a and the n=2 bound is C*/2 = a \
             in infinite volume); strict domination at n=2 is unattainable"
                .to_string()
        };
        c.check(strict, format!("n={n}: |C_n| = {truth} < bound = {bound} (strict){note}"));
    }
    c.finish();
}

#[test]
fn criterion_07_morse_worked_example() {
    let mut c = Checks::new("7 (Morse rho=6 worked example)");
    let p = RadialPotential::morse(6.0, 3);
    let spec = QuadratureSpec::with_tols(1e-8, 1e-12);
    let beta = 1.0;
    let four_pi = 4.0 * PI;

    let c_beta = quad::c_beta(&p, beta, &spec).unwrap();
    let v_l1 = quad::v_l1(&p, &spec).unwrap();

    c.check(
        c_beta >= four_pi * MORSE6_C_TARGET_4PI,
        format!(
            "C(1) = {c_beta:.4} = 4pi*{:.4} >= 4pi*{MORSE6_C_TARGET_4PI} = {:.1}: the target \
             exceeds any attainable value: the integrand |e^(-V)-1| is bounded by e-1, so \
             C(1) < (e-1)*(effective volume); the quoted constant matches ||V||_1 instead",
            c_beta / four_pi,
            four_pi * MORSE6_C_TARGET_4PI
        ),
    );
    c.check(
        v_l1 <= four_pi * MORSE6_L1_TARGET_4PI,
        format!(
            "||V||_1 = {v_l1:.4} = 4pi*{:.4} <= 4pi*{MORSE6_L1_TARGET_4PI}",
            v_l1 / four_pi
        ),
    );

    let pr = bounds::penrose_ruelle_radius(MORSE6_B_UPPER, c_beta, beta).unwrap();
    let bf = bounds::brydges_federbush_radius(MORSE6_B_UPPER, v_l1, beta).unwrap();
    let ratio = pr.ratio_to(bf);
    let target_log = MORSE6_RATIO_PREFACTOR.ln() - MORSE6_B_UPPER;
    c.check(
        ratio.log <= target_log,
        format!(
            "PR/BF ratio: log = {:.4} (= -B + ln {:.4}) vs target log <= {target_log:.4} \
             (= -B + ln {MORSE6_RATIO_PREFACTOR}); the quoted prefactor presumes \
             C(1) >= 4pi*182, which does not hold",
            ratio.log,
            (ratio.log + MORSE6_B_UPPER).exp()
        ),
    );
    let finite = pr.log.is_finite()
        && bf.log.is_finite()
        && pr.value > 0.0
        && bf.value > 0.0
        && ratio.value > 0.0;
    c.check(
        finite,
        format!(
            "log-space evaluation: log PR = {:.4}, log BF = {:.4}, values {:.3e}, {:.3e}: \
             finite, no overflow/underflow",
            pr.log, bf.log, pr.value, bf.value
        ),
    );
    c.finish();
}

#[test]
fn criterion_08_penrose_improvement() {
    let mut c = Checks::new("8 (hard-core-with-tail improvement)");
    let p = RadialPotential::square_well(1.0, 1.0, 2.0, 3);
    let spec = QuadratureSpec::default();
    let b = stability::configuration_lower_bound(&p, 6, 3, 8).lower_bound;
    for beta in [0.1, 0.5, 1.0] {
        let cb = quad::c_beta(&p, beta, &spec).unwrap();
        let cs = quad::c_star_beta(&p, beta, &spec).unwrap();
        c.check(cs < cb, format!("beta={beta}: C* = {cs:.6} < C = {cb:.6}"));
        let pr = bounds::penrose_ruelle_radius(b, cb, beta).unwrap();
        let pen = bounds::penrose_potential_radius(b, cs, beta).unwrap();
        c.check(
            pen.log > pr.log,
            format!(
                "beta={beta}, B={b:.4}: hard-core radius {:.6e} > classic radius {:.6e}",
                pen.value, pr.value
            ),
        );
    }
    c.finish();
}

#[test]
fn criterion_09_decomposition_pipeline() {
    let mut c = Checks::new("9 (constructive decomposition)");
    let p = RadialPotential::lennard_jones_with_envelope(1.0, 1.0, 3);
    let res = decompose::decompose(&p, &DecomposeOptions::default()).unwrap();
    c.check(
        res.phi1.min_value() >= 0.0,
        format!("phi1 >= 0 at all {} grid points (min {:.3e})", res.phi1.radii.len(), res.phi1.min_value()),
    );
    c.check(
        res.psi1.min_value() >= -1e-9 * res.psi1.max_value().abs().max(1.0),
        format!("Psi1 >= 0 at all grid points (min {:.3e})", res.psi1.min_value()),
    );
    c.check(
        (res.constants.psi_mass - 1.0).abs() <= 1e-10,
        format!("mollifier mass = 1 {:+.3e}", res.constants.psi_mass - 1.0),
    );
    c.check(
        res.fourier_report.min >= -1e-6 * res.fourier_report.max_abs,
        format!(
            "sampled inner transform: min {:.3e} >= -1e-6 * max {:.3e}",
            res.fourier_report.min, res.fourier_report.max_abs
        ),
    );
    let b_tilde = res.constants.b_tilde_inner;
    let c_tilde = res.c_tilde_beta(1.0, &QuadratureSpec::default()).unwrap();
    let radius = bounds::ruelle_potential_radius(b_tilde, c_tilde, 1.0).unwrap();
    c.check(
        radius.log.is_finite() && radius.value >= 0.0 && c_tilde.is_finite(),
        format!(
            "split radius finite: a = {:.4}, B~ = {b_tilde:.4}, C~ = {c_tilde:.4e}, \
             log radius = {:.4}",
            res.a, radius.log
        ),
    );
    c.finish();
}

#[test]
fn criterion_10_radial_fourier() {
    let mut c = Checks::new("10 (radial transforms)");
    // d=3 Gaussian self-transform, error relative to the transform scale
    let f = |r: f64| (-r * r / 2.0).exp();
    let p_grid: Vec<f64> = (0..=32).map(|i| 8.0 * i as f64 / 32.0).collect();
    let got = decompose::radial_fourier_fn(
        &f,
        3,
        14.0,
        &p_grid,
        &QuadratureSpec::with_tols(1e-11, 1e-14),
    )
    .unwrap();
    let scale = (2.0 * PI).powf(1.5);
    let mut worst = 0.0f64;
    for (p, v) in p_grid.iter().zip(&got) {
        let exact = scale * (-p * p / 2.0).exp();
        worst = worst.max((v - exact).abs() / scale);
    }
    c.check(worst <= 1e-6, format!("gaussian d=3 on p in [0,8]: worst scale-relative error {worst:.3e}"));

    // d=1 indicator of [0,1]: 2 sin(p)/p within 1e-8 absolute
    let indicator =
        RadialGridFunction::new(vec![1e-9, 0.5, 1.0], vec![1.0, 1.0, 1.0], 1, GridTail::Zero)
            .unwrap();
    let p_grid: Vec<f64> = (1..=96).map(|i| 12.0 * i as f64 / 96.0).collect();
    let hat = decompose::radial_fourier(&indicator, &p_grid).unwrap();
    let mut worst = 0.0f64;
    for (p, v) in p_grid.iter().zip(&hat.values) {
        worst = worst.max((v - 2.0 * p.sin() / p).abs());
    }
    c.check(worst <= 1e-8, format!("indicator d=1: worst absolute error {worst:.3e}"));
    c.finish();
}

// ---------------------------------------------------------------------------
// criterion 11: CLI determinism across worker counts
// ---------------------------------------------------------------------------

mod cli_determinism {
    use super::Checks;
    use std::path::{Path, PathBuf};
    use std::process::Command;

    fn bin() -> &'static str {
        env!("CARGO_BIN_EXE_cluster-radius")
    }

    fn scratch() -> PathBuf {
        let dir = std::env::temp_dir().join(format!("cluster-radius-accept-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn write_potentials(dir: &Path) {
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
        let lj = cluster_radius::potential::RadialPotential::lennard_jones_with_envelope(1.0, 1.0, 3);
        std::fs::write(dir.join("lj.json"), serde_json::to_string_pretty(&lj).unwrap()).unwrap();
    }

    fn run_with_workers(args: &[&str], workers: &str, out: &Path) -> Vec<u8> {
        let status = Command::new(bin())
            .args(args)
            .args(["--workers", workers, "--out", out.to_str().unwrap()])
            .env_remove("CLUSTER_RADIUS_WORKERS")
            .status()
            .unwrap();
        assert!(status.success(), "subcommand {args:?} failed");
        std::fs::read(out).unwrap()
    }

    #[test]
    fn criterion_11_cli_determinism() {
        let mut c = Checks::new("11 (CLI determinism across --workers)");
        let dir = scratch();
        write_potentials(&dir);
        let rod = dir.join("rod.json");
        let well = dir.join("well.json");
        let lj = dir.join("lj.json");
        let cases: Vec<(&str, Vec<String>)> = vec![
            (
                "integrals",
                vec!["integrals", "--potential", well.to_str().unwrap(), "--beta", "1.0"]
                    .into_iter()
                    .map(String::from)
                    .collect(),
            ),
            (
                "bounds",
                vec![
                    "bounds",
                    "--potential",
                    well.to_str().unwrap(),
                    "--beta-sweep",
                    "0.5:1.5:3",
                    "--stability-b",
                    "1.0",
                    "--format",
                    "csv",
                ]
                .into_iter()
                .map(String::from)
                .collect(),
            ),
            (
                "verify-tgi",
                vec!["verify-tgi", "--n", "3", "--trials", "25", "--seed", "7"]
                    .into_iter()
                    .map(String::from)
                    .collect(),
            ),
            (
                "mayer",
                vec![
                    "mayer",
                    "--potential",
                    rod.to_str().unwrap(),
                    "--n",
                    "3",
                    "--method",
                    "monte-carlo",
                    "--trials",
                    "4000",
                    "--seed",
                    "3",
                    "--box-side",
                    "8",
                ]
                .into_iter()
                .map(String::from)
                .collect(),
            ),
            (
                "stability",
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
                ]
                .into_iter()
                .map(String::from)
                .collect(),
            ),
        ];
        for (name, args) in &cases {
            let argv: Vec<&str> = args.iter().map(String::as_str).collect();
            let out = dir.join(format!("{name}.out"));
            let b1 = run_with_workers(&argv, "1", &out);
            let b4 = run_with_workers(&argv, "4", &out);
            // the audit header echoes the worker count; everything else must
            // be byte-identical
            let p1 = strip_workers_doc(&String::from_utf8(b1).unwrap());
            let p4 = strip_workers_doc(&String::from_utf8(b4).unwrap());
            c.check(p1 == p4, format!("{name}: byte-identical payload at --workers 1 vs 4"));
        }

        // decompose writes three files from one base
        let base = dir.join("dec");
        let mut captured: Vec<Vec<String>> = Vec::new();
        for workers in ["1", "4"] {
            let status = Command::new(bin())
                .args(["decompose", "--potential", lj.to_str().unwrap(), "--out"])
                .arg(&base)
                .args(["--workers", workers])
                .env_remove("CLUSTER_RADIUS_WORKERS")
                .status()
                .unwrap();
            assert!(status.success());
            captured.push(
                [".json", "_rgrid.csv", "_pgrid.csv"]
                    .iter()
                    .map(|suffix| {
                        let doc = std::fs::read_to_string(format!("{}{suffix}", base.display()))
                            .unwrap();
                        strip_workers_doc(&doc)
                    })
                    .collect(),
            );
        }
        for (i, suffix) in [".json", "_rgrid.csv", "_pgrid.csv"].iter().enumerate() {
            c.check(
                captured[0][i] == captured[1][i],
                format!("decompose{suffix}: byte-identical payload"),
            );
        }

        // identical argv + seed => byte-identical files, with no stripping
        let repeat = dir.join("repeat.out");
        let argv = ["verify-tgi", "--n", "3", "--trials", "25", "--seed", "7"];
        let r1 = run_with_workers(&argv, "3", &repeat);
        let r2 = run_with_workers(&argv, "3", &repeat);
        c.check(r1 == r2, "repeated identical invocation: byte-identical file".to_string());

        // env var override beats the flag: CLUSTER_RADIUS_WORKERS=2 with
        // --workers 4 must equal a plain --workers 2 run
        let out_env = dir.join("env.out");
        let status = Command::new(bin())
            .args(["verify-tgi", "--n", "3", "--trials", "10", "--seed", "9", "--workers", "4"])
            .args(["--out", out_env.to_str().unwrap()])
            .env("CLUSTER_RADIUS_WORKERS", "2")
            .status()
            .unwrap();
        assert!(status.success());
        let env_doc = std::fs::read_to_string(&out_env).unwrap();
        c.check(
            env_doc.contains("\"workers\": 2"),
            "CLUSTER_RADIUS_WORKERS overrides --workers".to_string(),
        );
        c.finish();
        let _ = std::fs::remove_dir_all(dir);
    }

    fn strip_workers(line: &str) -> String {
        // drop the workers field wherever it appears in a JSON fragment
        let mut s = line.to_string();
        if let Some(idx) = s.find("\"workers\"") {
            let tail = &s[idx..];
            let end = tail.find(',').map(|e| idx + e + 1).unwrap_or(s.len());
            s.replace_range(idx..end, "");
        }
        s
    }

    fn strip_workers_doc(doc: &str) -> String {
        doc.lines().map(strip_workers).collect::<Vec<_>>().join("\n")
    }
}
