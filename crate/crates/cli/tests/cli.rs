use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dipole_phase::constants::{EPSILON_0, HBAR};
use dipole_phase::scenario::{parse_vscan_csv, Scenario};

fn gallery(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dipole-phase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            let mut parts = l.split(',');
            (parts.next() == Some(key)).then(|| parts.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no row {key}"))
}

#[test]
fn compute_matches_the_circulation_oracle() {
    let path = gallery("line_charge_uniform_B.json");
    let o = run(&["compute", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = Scenario::from_path(&path).unwrap();
    let coupling = (s.species.chi + s.species.kappa / dipole_phase::constants::C2) / HBAR;
    let expected = coupling * 1e-9 * 1e-3 / EPSILON_0;
    let got = csv_value(&stdout(&o), "phi_mix");
    assert!((got - expected).abs() <= 1e-9 * expected.abs(), "{got} vs {expected}");
    assert!(stdout(&o).contains("paper_eq16_variant"));
}

#[test]
fn zero_couplings_give_an_all_zero_table() {
    let o = run(&[
        "compute",
        fixture("zero_couplings.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    for line in stdout(&o).lines().skip(1) {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(value, 0.0, "{line}");
    }
}

#[test]
fn malformed_file_exits_2_without_output() {
    let o = run(&["compute", fixture("malformed.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    let err = stderr(&o);
    assert!(err.contains("fields[0]") && err.contains("colour"), "{err}");
    assert!(!err.contains("panicked"));
}

#[test]
fn missing_file_exits_2() {
    let o = run(&["compute", "/nonexistent/scenario.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_exit_codes() {
    let o = run(&[
        "check",
        gallery("uniform_fields.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for key in ["max_curl_A_mag", "max_curl_A_elec", "max_grad_V_mag", "max_grad_V_elec"] {
        assert!(csv_value(&out, key) < 1e-8, "{key}");
    }

    let o = run(&[
        "check",
        gallery("radial_B_synthetic.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("\ndiv_B_violation,true,"), "{}", stdout(&o));

    let o = run(&["check", fixture("through_wire.json").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("SingularPathPoint"));
}

#[test]
fn stokes_exit_codes() {
    let o = run(&[
        "stokes",
        gallery("line_charge_uniform_B.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert!(csv_value(&stdout(&o), "relative_difference") < 1e-6);

    let o = run(&[
        "stokes",
        gallery("line_charge_uniform_B_outside.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert!(csv_value(&stdout(&o), "line_form").abs() < 1e-12);
    assert!(csv_value(&stdout(&o), "surface_form").abs() < 1e-12);

    let o = run(&["stokes", gallery("wire_varying_B.json").to_str().unwrap()]);
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("NonUniformB"));
}

#[test]
fn vscan_on_pure_stark_is_one_over_v() {
    let path = gallery("septum_stark.json");
    let o = run(&[
        "vscan",
        path.to_str().unwrap(),
        "--vmin",
        "500",
        "--vmax",
        "2000",
        "--steps",
        "8",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("speed_mps,phase_rad,err_rad\n"));
    let footer = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("# {key},")))
            .and_then(|rest| rest.split(',').next())
            .unwrap()
            .parse()
            .unwrap()
    };
    let (a0, a1, a2) = (footer("a_const"), footer("a_invv"), footer("a_linv"));
    let v_mid = 1250.0;
    assert!(a1 != 0.0);
    // Compare each term's contribution at mid-range speed.
    assert!(a0.abs() < 1e-9 * a1.abs() / v_mid, "{a0} vs {a1}");
    assert!((a2 * v_mid).abs() < 1e-9 * a1.abs() / v_mid, "{a2} vs {a1}");
    let table = parse_vscan_csv(&text).unwrap();
    assert_eq!(table.speeds.len(), 8);
    assert_eq!(table.speeds[0], 500.0);
    assert_eq!(table.speeds[7], 2000.0);
    // Log spacing.
    let r = table.speeds[1] / table.speeds[0];
    assert!((table.speeds[5] / table.speeds[4] - r).abs() < 1e-12);
}

#[test]
fn vscan_on_geometric_only_is_flat() {
    let o = run(&[
        "vscan",
        gallery("line_charge_uniform_B.json").to_str().unwrap(),
        "--vmin",
        "500",
        "--vmax",
        "3000",
        "--steps",
        "10",
    ]);
    assert_eq!(code(&o), 0);
    let table = parse_vscan_csv(&stdout(&o)).unwrap();
    let first = table.phases[0];
    assert!(first != 0.0);
    for p in &table.phases {
        assert!((p - first).abs() <= 1e-9 * first.abs());
    }
}

#[test]
fn vscan_needs_four_steps() {
    let o = run(&[
        "vscan",
        gallery("septum_stark.json").to_str().unwrap(),
        "--vmin",
        "500",
        "--vmax",
        "2000",
        "--steps",
        "3",
    ]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn vscan_then_fit_round_trips() {
    let dir = std::env::temp_dir().join(format!("dipole-phase-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let data = dir.join("scan.csv");
    let o = run(&[
        "vscan",
        gallery("composite_velocity.json").to_str().unwrap(),
        "--vmin",
        "500",
        "--vmax",
        "3000",
        "--steps",
        "20",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let scan = std::fs::read_to_string(&data).unwrap();
    let o = run(&["fit", data.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fitted = stdout(&o);
    for key in ["a_const", "a_invv", "a_linv"] {
        let footer: f64 = scan
            .lines()
            .find_map(|l| l.strip_prefix(&format!("# {key},")))
            .and_then(|r| r.split(',').next())
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(csv_value(&fitted, key), footer, "{key}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn solve_reports_degeneracy_and_empty_input() {
    let o = run(&[
        "solve",
        "--measurements",
        fixture("geometric_only.csv").to_str().unwrap(),
        gallery("line_charge_uniform_B.json").to_str().unwrap(),
        gallery("lepoutre_mixed.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("rank                                1") || out.contains("rank  "),
        "{out}"
    );
    assert!(out.contains("warning"));
    assert!(out.contains("degenerate_direction_kappa"));

    let o = run(&[
        "solve",
        "--measurements",
        fixture("empty_measurements.csv").to_str().unwrap(),
        gallery("line_charge_uniform_B.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 7);
}

#[test]
fn outputs_are_deterministic() {
    let path = gallery("composite_velocity.json");
    let path = path.to_str().unwrap();
    for format in ["csv", "json"] {
        let args = ["compute", path, "--format", format];
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout);
    }
    let args = [
        "vscan", path, "--vmin", "500", "--vmax", "3000", "--steps", "12", "--noise", "0.01", "--seed", "7",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn json_round_trips_exactly() {
    let path = gallery("lepoutre_mixed.json");
    let csv = stdout(&run(&["compute", path.to_str().unwrap(), "--format", "csv"]));
    let json = stdout(&run(&["compute", path.to_str().unwrap(), "--format", "json"]));
    let rows: serde_json::Value = serde_json::from_str(&json).unwrap();
    for row in rows.as_array().unwrap() {
        let key = row["key"].as_str().unwrap();
        assert_eq!(row["value"].as_f64().unwrap(), csv_value(&csv, key), "{key}");
    }
}
