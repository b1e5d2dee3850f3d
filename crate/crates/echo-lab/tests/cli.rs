//! End-to-end tests of the `echo-lab` binary: subcommand behavior, exit
//! codes (0 ok, 2 input error, 3 non-convergence, 4 threshold failure),
//! file formats and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_echo-lab"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .env_remove("ECHO_LAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

fn machine_value(text: &str, key: &str) -> Option<f64> {
    text.lines().find_map(|l| {
        let (k, v) = l.split_once('=')?;
        (k.trim() == key).then(|| v.trim().parse().ok())?
    })
}

#[test]
fn simulate_2ppe_schedule_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "mims", "--i0", "1", "--t2", "1.580us", "--x", "1.072",
            "--schedule", "2ppe", "--noise", "0", "--out", "mims.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let series = echo_lab::trace::read_trace_file(&dir.path().join("mims.csv")).unwrap();
    assert_eq!(series.len(), 69);
    assert_eq!(series.points()[0].t, 1.0e-7);
    assert!((series.points()[68].t - 1.8e-6).abs() < 1e-18);
    // noiseless trace has no sigma column
    assert!(series.sigmas().is_none());
    // sidecar written with provenance
    let sidecar = std::fs::read_to_string(dir.path().join("mims.csv.meta")).unwrap();
    assert!(sidecar.contains("model = mims"));
    assert!(sidecar.contains("seed = 0"));
    assert!(sidecar.contains("version = "));
}

#[test]
fn simulate_same_seed_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--model", "hole-decay", "--amplitude", "1", "--b", "0.436", "--t1e", "82us",
        "--t1b", "2.364ms", "--schedule", "shb-decay", "--noise", "0.02", "--seed", "7", "--out",
        "decay.csv",
    ];
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("decay.csv")).unwrap();
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(0));
    let second = std::fs::read(dir.path().join("decay.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn simulate_stark_single_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["simulate", "--model", "stark", "--slope", "24.6kHzcm/V", "--field", "1000V/cm"],
    );
    assert_eq!(out.status.code(), Some(0));
    let shift = machine_value(&stdout(&out), "stark_shift_hz").unwrap();
    assert!((shift - 2.46e7).abs() < 1e-3);
    // same field given in V/mm
    let out = run_in(
        dir.path(),
        &["simulate", "--model", "stark", "--slope", "24.6kHzcm/V", "--field", "100V/mm"],
    );
    let shift2 = machine_value(&stdout(&out), "stark_shift_hz").unwrap();
    assert_eq!(shift.to_bits(), shift2.to_bits());
}

#[test]
fn simulate_invalid_params_exit_2_naming_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "mims", "--i0", "1", "--t2=-3us", "--x", "1.0",
            "--schedule", "2ppe",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("T2"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_output_parses_back_losslessly_through_fit_reader() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "mims", "--i0", "1", "--t2", "1.580us", "--x", "1.072",
            "--schedule", "2ppe", "--noise", "0.03", "--seed", "11", "--out", "noisy.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    // regenerate the identical series in-process and compare bit for bit
    let schedule =
        echo_lab::synth::ExperimentSchedule::canonical(echo_lab::synth::ScheduleKind::TwoPulseEcho);
    let params = [
        ("i0".to_string(), 1.0),
        ("t2".to_string(), 1.58e-6),
        ("x".to_string(), 1.072),
    ];
    let noise = echo_lab::synth::NoiseModel::new(0.03, 0.0, 11).unwrap();
    let reference =
        echo_lab::synth::synthesize(echo_lab::fit::ModelKind::Mims, &params, &schedule, &noise)
            .unwrap();
    let loaded = echo_lab::trace::read_trace_file(&dir.path().join("noisy.csv")).unwrap();
    assert_eq!(loaded.len(), reference.len());
    for (a, b) in loaded.points().iter().zip(reference.points()) {
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        assert_eq!(a.y.to_bits(), b.y.to_bits());
        assert_eq!(a.sigma.unwrap().to_bits(), b.sigma.unwrap().to_bits());
    }
}

#[test]
fn fit_joint_3ppe_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "3ppe", "--i0", "1", "--gamma0", "152kHz", "--gamma-sd",
            "930kHz", "--rate", "227kHz", "--b", "0.23", "--t1e", "83us", "--t1b", "2.4ms",
            "--schedule", "3ppe", "--noise", "0.03", "--floor", "1e-3", "--seed", "5", "--out",
            "tp.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for delay in ["120", "200", "280"] {
        assert!(dir.path().join(format!("tp_td{delay}ns.csv")).exists());
    }
    let out = run_in(
        dir.path(),
        &[
            "fit", "--model", "3ppe", "--fix", "t1b=2.4ms", "tp_td120ns.csv", "tp_td200ns.csv",
            "tp_td280ns.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let gamma_sd = machine_value(&text, "fit.estimate.gamma_sd").unwrap();
    let rate = machine_value(&text, "fit.estimate.rate").unwrap();
    let t1b = machine_value(&text, "fit.fixed.t1b").unwrap();
    assert!((gamma_sd / 930e3 - 1.0).abs() < 0.15, "gamma_sd {gamma_sd}");
    assert!((rate / 227e3 - 1.0).abs() < 0.15, "rate {rate}");
    assert!((t1b - 2.4e-3).abs() < 1e-12);
    // plot-data and residual CSVs per input set
    assert!(dir.path().join("tp_td120ns_set0_fit.csv").exists());
    assert!(dir.path().join("tp_td120ns_set2_residuals.csv").exists());
}

#[test]
fn fit_linear_power_sweep() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        &[
            "simulate", "--model", "linear", "--intercept", "1.5MHz", "--slope", "2.5e9",
            "--schedule", "power-sweep", "--noise", "0.05", "--seed", "3", "--out", "power.csv",
        ],
    );
    let out = run_in(dir.path(), &["fit", "--model", "linear", "power.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let intercept = machine_value(&stdout(&out), "fit.estimate.intercept").unwrap();
    assert!((intercept - 1.5e6).abs() < 0.15e6, "intercept {intercept}");
}

#[test]
fn fit_empty_csv_exit_2_no_data_rows() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("empty.csv"),
        "# echo-lab trace v1\nt_seconds,value\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["fit", "--model", "mims", "empty.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no data rows"));
}

#[test]
fn fit_malformed_row_exit_2_names_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.csv"),
        "# echo-lab trace v1\nt_seconds,value\n1e-7,0.9\noops,0.8\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["fit", "--model", "mims", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "stderr: {}", stderr(&out));
}

#[test]
fn fit_unit_mismatch_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("d.csv"),
        "# echo-lab trace v1\nt_seconds,value\n1e-7,0.9\n2e-7,0.8\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &["fit", "--model", "3ppe", "--fix", "t1b=3MHz", "d.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dimension"), "stderr: {}", stderr(&out));
}

#[test]
fn fit_non_convergence_exit_3_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        &[
            "simulate", "--model", "mims", "--i0", "1", "--t2", "1.580us", "--x", "1.072",
            "--schedule", "2ppe", "--noise", "0.03", "--seed", "2", "--out", "m.csv",
        ],
    );
    // one iteration from a remote start cannot converge
    let out = run_in(
        dir.path(),
        &[
            "fit", "--model", "mims", "--max-iter", "1", "--init", "t2=50us", "--init", "x=2.5",
            "m.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    assert!(stdout(&out).contains("fit.converged = false"));
    assert!(dir.path().join("m_fit.csv").exists());
    assert!(dir.path().join("m_residuals.csv").exists());
}

#[test]
fn roundtrip_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // passing experiment
    let out = run_in(
        dir.path(),
        &["roundtrip", "--experiment", "power-sweep", "--seeds", "20", "--seed", "1"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("result: PASS"));

    // impossible tolerance -> exit 4
    let out = run_in(
        dir.path(),
        &[
            "roundtrip", "--experiment", "mims", "--seeds", "5", "--seed", "1", "--tolerance",
            "t2=1e-12",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("result: FAIL"));

    // unknown experiment -> exit 2
    let out = run_in(dir.path(), &["roundtrip", "--experiment", "banana"]);
    assert_eq!(out.status.code(), Some(2));

    // report CSV
    let out = run_in(
        dir.path(),
        &[
            "roundtrip", "--experiment", "power-sweep", "--seeds", "5", "--seed", "1", "--out",
            "rt.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.path().join("rt.csv")).unwrap();
    assert!(report.contains("parameter,truth,median,p5,p95,pass_fraction,tolerance"));
    assert!(report.contains("intercept"));
}

#[test]
fn report_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "report", "--b", "0.436", "--t1e", "82us", "--t1b", "2.364ms", "--gamma0", "152kHz",
            "--gamma-sd", "930kHz", "--rate", "227kHz", "--afc-spacing", "3MHz", "--slope",
            "24.6kHzcm/V", "--stark-field", "100V/mm", "--d1e", "6.5", "--diffusion-time", "150",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let close = |key: &str, expect: f64, rel: f64| {
        let v = machine_value(&text, key).unwrap_or_else(|| panic!("missing {key}"));
        assert!((v / expect - 1.0).abs() < rel, "{key} = {v}, expected {expect}");
    };
    close("saturation_linewidth_hz", 617e3, 1e-12);
    close("hole_linewidth_prediction_hz", 1082e3, 1e-12);
    close("natural_linewidth_hz", 1940.9139401450651, 1e-12);
    close("branching_beta", 0.8417529610829103, 1e-12);
    close("afc_storage_time_s", 1.0 / 3e6, 1e-12);
    close("stark_shift_hz", 2.46e7, 1e-12);
    close("diffusion_coefficient_um2_per_h", 0.07041666666666667, 1e-12);
}

#[test]
fn report_missing_parameter_exit_2_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["report", "--b", "0.436", "--t1e", "82us", "--t1b", "2.364ms", "--gamma0", "152kHz"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma_sd"));
}

#[test]
fn config_file_merging_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sim.cfg"),
        "model = mims\nschedule = 2ppe\ni0 = 1\nt2 = 1.580us\nx = 1.072\nnoise = 0\nout = from_file.csv\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["simulate", "--config", "sim.cfg"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("from_file.csv").exists());

    // flag overrides the file value
    let out = run_in(
        dir.path(),
        &["simulate", "--config", "sim.cfg", "--out", "flag_wins.csv"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("flag_wins.csv").exists());

    // unknown key rejected, named
    std::fs::write(dir.path().join("bad.cfg"), "modle = mims\n").unwrap();
    let out = run_in(dir.path(), &["simulate", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("modle"));
}

#[test]
fn out_dir_env_redirects_bare_filenames() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    std::fs::create_dir(&out_dir).unwrap();
    let out = bin()
        .args([
            "simulate", "--model", "mims", "--i0", "1", "--t2", "1.580us", "--x", "1.072",
            "--schedule", "2ppe", "--noise", "0", "--out", "env.csv",
        ])
        .current_dir(dir.path())
        .env("ECHO_LAB_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.join("env.csv").exists());
    assert!(!dir.path().join("env.csv").exists());
}

#[test]
fn stark_sweep_simulate_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "stark", "--slope", "24.6kHzcm/V", "--schedule",
            "stark-sweep", "--noise", "0.02", "--seed", "9", "--out", "sweep.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run_in(dir.path(), &["fit", "--model", "stark", "sweep.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let slope = machine_value(&stdout(&out), "fit.estimate.slope").unwrap();
    assert!((slope / 24.6e3 - 1.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn coarse_3ppe_step_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "3ppe", "--gamma0", "152kHz", "--gamma-sd", "930kHz",
            "--rate", "227kHz", "--b", "0.23", "--t1e", "83us", "--t1b", "2.4ms", "--schedule",
            "3ppe", "--step", "10us", "--noise", "0", "--out", "coarse.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let series = echo_lab::trace::read_trace_file(&dir.path().join("coarse_td200ns.csv")).unwrap();
    assert_eq!(series.len(), 40);
}

#[test]
fn fit_hole_decay_recovers_reference_parameters() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        &[
            "simulate", "--model", "hole-decay", "--amplitude", "1", "--b", "0.436", "--t1e",
            "82us", "--t1b", "2.364ms", "--schedule", "shb-decay", "--noise", "0.02", "--seed",
            "4", "--out", "h.csv",
        ],
    );
    let out = run_in(dir.path(), &["fit", "--model", "hole-decay", "h.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let b = machine_value(&text, "fit.estimate.b").unwrap();
    let t1e = machine_value(&text, "fit.estimate.t1e").unwrap();
    let t1b = machine_value(&text, "fit.estimate.t1b").unwrap();
    let beta = machine_value(&text, "fit.derived.beta").unwrap();
    assert!((b / 0.436 - 1.0).abs() < 0.10);
    assert!((t1e / 82e-6 - 1.0).abs() < 0.10);
    assert!((t1b / 2.364e-3 - 1.0).abs() < 0.10);
    assert!(beta > 0.0 && beta < 2.0);
}
