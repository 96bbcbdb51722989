//! End-to-end checks of the `gyrolens` binary: configuration precedence,
//! deterministic file outputs, and the documented formats of every artifact
//! the subcommands write.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gyrolens");

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("binary must launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn size_output_directory_obeys_env_file_flag_precedence() {
    let root = tempfile::tempdir().unwrap();
    let (dir_env, dir_file, dir_flag) = (
        root.path().join("from-env"),
        root.path().join("from-file"),
        root.path().join("from-flag"),
    );
    for d in [&dir_env, &dir_file, &dir_flag] {
        fs::create_dir(d).unwrap();
    }
    let conf = root.path().join("run.conf");
    fs::write(
        &conf,
        format!(
            "out_dir = {}\nband_ceiling_ghz = 60\ncell_sizes_mm = 5\n",
            dir_file.display()
        ),
    )
    .unwrap();
    let env = [("GYROLENS_OUT_DIR", dir_env.to_str().unwrap())];

    // Environment variable alone picks the output directory.
    let out = run(&["size", "--cells-mm", "5", "--csv", "table.csv"], &env);
    assert!(out.status.success(), "env run failed: {}", stderr(&out));
    assert!(dir_env.join("table.csv").is_file(), "csv must land in the env directory");

    // A config file overrides the environment, and its 60 GHz ceiling lets
    // the 5 mm limit resolve in-band.
    let out = run(
        &["size", "--config", conf.to_str().unwrap(), "--csv", "table.csv"],
        &env,
    );
    assert!(out.status.success(), "file run failed: {}", stderr(&out));
    let csv = fs::read_to_string(dir_file.join("table.csv")).expect("csv in the file-config dir");
    assert!(csv.contains("5.00,50.2,"), "60 GHz ceiling resolves the limit in-band: {csv}");

    // Flags override the config file: directory and ceiling both move.
    let out = run(
        &[
            "size",
            "--config",
            conf.to_str().unwrap(),
            "--band-ceiling-ghz",
            "40",
            "--out-dir",
            dir_flag.to_str().unwrap(),
            "--csv",
            "table.csv",
        ],
        &env,
    );
    assert!(out.status.success(), "flag run failed: {}", stderr(&out));
    let csv = fs::read_to_string(dir_flag.join("table.csv")).expect("csv in the flag dir");
    assert!(csv.contains("5.00,>40.0,>22.0,"), "flag ceiling caps the limit: {csv}");
}

#[test]
fn design_writes_deterministic_stl_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "design".to_string(),
            "--diameter-mm".into(),
            "25".into(),
            "--unit-cell-mm".into(),
            "12.5".into(),
            "--voxels-per-cell".into(),
            "16".into(),
            "--out-dir".into(),
            out.display().to_string(),
            "--stl".into(),
            "lens.stl".into(),
            "--stats".into(),
            "stats.csv".into(),
        ]
    };
    let (run_a, run_b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&run_a, &run_b] {
        fs::create_dir(d).unwrap();
        let argv: Vec<String> = args(d);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let out = run(&argv, &[]);
        assert!(out.status.success(), "design failed: {}", stderr(&out));
        assert!(stdout(&out).contains("watertight: true"), "summary: {}", stdout(&out));
    }

    let stl_a = fs::read(run_a.join("lens.stl")).unwrap();
    let stl_b = fs::read(run_b.join("lens.stl")).unwrap();
    assert_eq!(stl_a, stl_b, "repeated runs must produce byte-identical STL");
    assert!(stl_a.starts_with(b"gyrolens"), "STL header names the tool");
    let n = u32::from_le_bytes(stl_a[80..84].try_into().unwrap()) as usize;
    assert_eq!(stl_a.len(), 84 + 50 * n, "binary STL layout: 84 header bytes + 50 per triangle");

    let stats = fs::read_to_string(run_a.join("stats.csv")).unwrap();
    let mut lines = stats.lines();
    assert_eq!(
        lines.next(),
        Some("n_vertices,n_triangles,area_m2,volume_m3,watertight"),
        "stats header"
    );
    let row = lines.next().expect("stats row");
    assert!(row.ends_with("true"), "mesh must report watertight: {row}");
    assert!(row.split(',').nth(1).unwrap().parse::<usize>().unwrap() == n, "stats match the STL");
}

#[test]
fn invalid_flags_are_reported_together() {
    let out = run(
        &["design", "--eps-min", "3.0", "--voxels-per-cell", "4", "--drop-db=-1"],
        &[],
    );
    assert!(!out.status.success(), "invalid configuration must fail");
    let err = stderr(&out);
    for needle in ["eps_min", "voxels_per_cell", "drop_db"] {
        assert!(err.contains(needle), "missing `{needle}` in: {err}");
    }
}

#[test]
fn bad_config_lines_are_reported_with_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("broken.conf");
    fs::write(&conf, "diameter_mm = wide\nno equals sign here\n").unwrap();
    let out = run(&["size", "--config", conf.to_str().unwrap()], &[]);
    assert!(!out.status.success(), "a broken config must fail");
    let err = stderr(&out);
    assert!(err.contains(":1:"), "line 1 must be named: {err}");
    assert!(err.contains(":2:"), "line 2 must be named: {err}");

    let missing = dir.path().join("does_not_exist.conf");
    let out = run(&["size", "--config", missing.to_str().unwrap()], &[]);
    assert!(!out.status.success(), "a missing config must fail");
    let err = stderr(&out);
    assert!(
        err.contains("does_not_exist.conf"),
        "the missing path must be named: {err}"
    );
}

#[test]
fn analyze_runs_the_comparison_method_to_a_report_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let (aut, reference, gain) = (
        dir.path().join("aut_power.csv"),
        dir.path().join("ref_power.csv"),
        dir.path().join("ref_gain.csv"),
    );
    // Received power with the lens rises to a knee at 30 GHz and then falls;
    // the reference channel and horn gain are flat, so the derived trace
    // inherits exactly that knee.
    let mut aut_csv = String::from("frequency_ghz,power_db\n");
    let mut ref_csv = String::from("frequency_ghz,power_db\n");
    let mut gain_csv = String::from("frequency_ghz,gain_dbi\n");
    for i in 0..45 {
        let f = 18.0 + 0.5 * i as f64;
        let p = if f <= 30.0 {
            -30.0 + 0.2 * (f - 18.0)
        } else {
            -27.6 - 2.0 * (f - 30.0)
        };
        aut_csv.push_str(&format!("{f:.2},{p:.4}\n"));
        ref_csv.push_str(&format!("{f:.2},-35.0\n"));
        gain_csv.push_str(&format!("{f:.2},15.0\n"));
    }
    fs::write(&aut, aut_csv).unwrap();
    fs::write(&reference, ref_csv).unwrap();
    fs::write(&gain, gain_csv).unwrap();

    let out = run(
        &[
            "analyze",
            "--aut-power",
            aut.to_str().unwrap(),
            "--ref-power",
            reference.to_str().unwrap(),
            "--ref-gain",
            gain.to_str().unwrap(),
            "--label",
            "lens",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "analyze failed: {}", stderr(&out));
    assert!(
        stdout(&out).contains("lens: max operating frequency 30.00 GHz"),
        "knee must surface in the summary: {}",
        stdout(&out)
    );
    let report = fs::read_to_string(dir.path().join("gain_report.csv")).unwrap();
    assert!(report.starts_with("label,f_max_ghz"), "report header: {report}");
    assert!(report.contains("lens,30.00"), "report row: {report}");
    let svg = fs::read_to_string(dir.path().join("gain_plot.svg")).unwrap();
    assert!(svg.contains("<svg"), "plot must be an SVG document");
}

#[test]
fn trace_reports_focus_quality_and_dumps_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "trace",
            "--ideal",
            "--rays",
            "5",
            "--out-dir",
            dir.path().to_str().unwrap(),
            "--paths",
            "rays.csv",
        ],
        &[],
    );
    assert!(out.status.success(), "trace failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("rays contributing: 5"), "ray count: {text}");
    assert!(text.contains("rms focal spread"), "spread line: {text}");
    let paths = fs::read_to_string(dir.path().join("rays.csv")).unwrap();
    assert!(paths.starts_with("ray_id,s,x,y,z"), "path dump header");
    assert!(paths.lines().count() > 5, "paths must carry the integration points");
}
