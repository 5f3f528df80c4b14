use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn uqft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqft"))
        .args(args)
        .output()
        .expect("failed to start uqft")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

const LIKELIHOOD: &str = r#"
kind = "likelihood"
[parameters]
method = "pipeline"
r = 4000.0
g = 0.02
l0 = 1000.0
c4 = 100.0
[sweep]
axis = "theta"
values = [0.3, 0.0, 0.1, 0.2]
"#;

#[test]
fn likelihood_curve_starts_at_one() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "l.toml", LIKELIHOOD);
    let out = uqft(&["likelihood", "--scenario", &s]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = body(&text);
    assert_eq!(
        lines[0],
        "theta [rad],lambda [λ_c],I [1],regime,a0 [1],a1 [1],c_R [1],flags"
    );
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "0");
    assert!((first[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    let thetas: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(thetas, vec![0.0, 0.1, 0.2, 0.3]);
}

#[test]
fn identical_scenarios_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "l.toml", LIKELIHOOD);
    let a = uqft(&["run", "--scenario", &s, "--threads", "1"]);
    let b = uqft(&["run", "--scenario", &s, "--threads", "4"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn provenance_header_names_version_and_hash() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "l.toml", LIKELIHOOD);
    let out_path = dir.path().join("curve.csv");
    let out = uqft(&["run", "--scenario", &s, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with(&format!("# uqft {}\n", env!("CARGO_PKG_VERSION"))));
    let hash = text
        .lines()
        .find_map(|l| l.strip_prefix("# scenario sha256: "))
        .unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn json_output_is_chosen_by_extension() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "l.toml", LIKELIHOOD);
    let out_path = dir.path().join("curve.json");
    assert!(
        uqft(&["run", "--scenario", &s, "--out", out_path.to_str().unwrap()])
            .status
            .success()
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["provenance"]["kind"], "likelihood");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["columns"][2]["unit"], "1");
}

#[test]
fn invalid_scenario_lists_every_error() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "bad.toml",
        "kind = \"likelihood\"\n[parameters]\nr = -1.0\ng = \"x\"\nbogus = 1\n",
    );
    let out = uqft(&["run", "--scenario", &s]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    let errors = v["errors"].as_array().unwrap();
    assert!(errors.len() >= 5, "{errors:?}");
    assert!(errors.iter().any(|e| e.as_str().unwrap().contains("bogus")));
}

#[test]
fn subcommand_must_match_scenario_kind() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "l.toml", LIKELIHOOD);
    let out = uqft(&["orbit", "--scenario", &s]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_scenario_file_is_reported() {
    let out = uqft(&["run", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["errors"][0].as_str().unwrap().contains("cannot read"));
}

#[test]
fn orbit_dump_has_trajectory_columns() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "o.toml",
        "kind = \"orbit\"\n[parameters]\ng = 1.0e-3\npositions = [[0.5, 0, 0], [-0.5, 0, 0]]\nvelocities = [[0, 0.025, 0], [0, -0.025, 0]]\nspan = [0.0, 50.0]\nsamples = 3\n",
    );
    let out = uqft(&["orbit", "--scenario", &s, "--tolerance", "1e-10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = body(&text);
    assert_eq!(
        lines[0],
        "lambda [λ_c],k [1],x [λ_c],y [λ_c],z [λ_c],vx [c],vy [c],vz [c],flags"
    );
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(text.contains("# note: integration tolerance 1e-10"));
}

#[test]
fn sweep_failures_become_rows() {
    let dir = TempDir::new().unwrap();
    let s = write(
        &dir,
        "g.toml",
        "kind = \"optimize-g\"\n[parameters]\nc4 = 1.0\nbeta0 = 1.0\n[sweep]\naxis = \"r\"\nvalues = [1.0, 1.0e6]\n",
    );
    let out = uqft(&["optimize-g", "--scenario", &s]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last = *body(&text).last().unwrap();
    assert!(last.starts_with("1000000,"));
    assert!(last.contains("error:"));
}

#[test]
fn verify_runs_selected_criteria() {
    let out = uqft(&["verify", "--criteria", "1,6"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = body(&text);
    assert_eq!(lines[0], "id [1],name,result,budget [s],detail");
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.contains(",PASS,")));
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(log.contains("verify: 2/2 criteria passed"));
}

#[test]
fn verify_rejects_unknown_criteria() {
    let out = uqft(&["verify", "--criteria", "99"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn example_scenarios_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for name in [
        "circular_likelihood",
        "kepler_orbit",
        "optimize_g",
        "escape_l0",
    ] {
        let out = uqft(&[
            "run",
            "--scenario",
            root.join(format!("{name}.toml")).to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
