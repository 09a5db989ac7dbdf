use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use voxprompt::volume::Volume3;
use voxprompt::{Grid, Mask};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_voxprompt"));
    cmd.env_remove("VOXPROMPT_SEED");
    cmd
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().expect("binary runs");
    (
        status.code().expect("exit code"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn npy(descr: &str, shape: [usize; 3], payload: &[u8]) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '{descr}', 'fortran_order': False, 'shape': ({}, {}, {}), }}",
        shape[0], shape[1], shape[2]
    );
    let pad = (64 - (10 + dict.len() + 1) % 64) % 64;
    let header = format!("{dict}{}\n", " ".repeat(pad));
    let mut out = b"\x93NUMPY\x01\x00".to_vec();
    out.extend((header.len() as u16).to_le_bytes());
    out.extend(header.as_bytes());
    out.extend(payload);
    out
}

fn ball(side: usize, c: [f64; 3], r: f64) -> Mask {
    Grid::from_fn([side; 3], |p| {
        (0..3).map(|a| (p[a] as f64 - c[a]).powi(2)).sum::<f64>() <= r * r
    })
}

struct Case {
    dir: TempDir,
}

impl Case {
    fn new() -> Self {
        Case {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn volume(&self, name: &str, vol: impl Into<Volume3>) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, vol.into().to_vvol_bytes()).unwrap();
        p
    }

    fn ball_pair(&self, side: usize) -> (PathBuf, PathBuf) {
        let gt = ball(side, [side as f64 / 2.0; 3], side as f64 / 5.0);
        let image = Grid::from_fn([side; 3], |c| if gt[c] { 200u8 } else { 40 });
        (self.volume("img.vvol", image), self.volume("gt.vvol", &gt))
    }
}

#[test]
fn convert_npy_to_vvol() {
    let case = Case::new();
    let payload: Vec<u8> = (0..2 * 3 * 4)
        .flat_map(|v: i16| (v - 5).to_le_bytes())
        .collect();
    let input = case.path("a.npy");
    std::fs::write(&input, npy("<i2", [2, 3, 4], &payload)).unwrap();
    let out = case.path("a.vvol");
    let (code, _, err) = run(bin().arg("convert").arg(&input).arg(&out));
    assert_eq!(code, 0, "{err}");
    let bytes = std::fs::read(&out).unwrap();
    assert_eq!(bytes.len(), 8 + 3 * 4 + payload.len());
    assert_eq!(&bytes[bytes.len() - payload.len()..], &payload[..]);
    let manifest = json(&case.path("a.vvol.manifest.json"));
    assert_eq!(manifest["command"], "convert");
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 1);
}

#[test]
fn convert_errors_map_to_exit_codes() {
    let case = Case::new();
    let truncated = case.path("t.npy");
    std::fs::write(&truncated, npy("<f4", [2, 2, 2], &[0u8; 20])).unwrap();
    let (code, _, err) = run(bin()
        .arg("convert")
        .arg(&truncated)
        .arg(case.path("t.vvol")));
    assert_eq!(code, 2);
    assert_eq!(err.lines().count(), 1, "{err}");

    let good = case.path("g.npy");
    std::fs::write(&good, npy("|u1", [1, 1, 2], &[1, 2])).unwrap();
    let (code, _, _) = run(bin()
        .arg("convert")
        .arg(&good)
        .arg("/nonexistent/dir/out.vvol"));
    assert_eq!(code, 3);
    let (code, _, _) = run(bin()
        .arg("convert")
        .arg(case.path("missing.npy"))
        .arg(case.path("x.vvol")));
    assert_eq!(code, 3);
}

#[test]
fn simulate_perfect_oracle() {
    let case = Case::new();
    let (img, gt) = case.ball_pair(24);
    let out = case.path("report.json");
    let (code, _, err) = run(bin()
        .args([
            "simulate",
            "--segmenter",
            "oracle",
            "--patch",
            "24",
            "--seed",
            "9",
        ])
        .arg("--image")
        .arg(&img)
        .arg("--gt")
        .arg(&gt)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 0, "{err}");
    let report = json(&out);
    assert_eq!(report["dsc_final"], 1.0);
    assert_eq!(report["dsc_auc"], 4.0);
    assert_eq!(report["budget_exceeded"], false);
    assert_eq!(report["prng"], "chacha8");
    assert_eq!(report["scores"].as_array().unwrap().len(), 6);
    let manifest = json(&case.path("report.json.manifest.json"));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 2);
    assert_eq!(manifest["config"]["episode"]["n_clicks"], 5);
}

#[test]
fn simulate_seed_from_environment() {
    let case = Case::new();
    let (img, gt) = case.ball_pair(16);
    let out = case.path("r.json");
    let (code, _, err) = run(bin()
        .env("VOXPROMPT_SEED", "77")
        .args(["simulate", "--patch", "16", "--no-bbox"])
        .arg("--image")
        .arg(&img)
        .arg("--gt")
        .arg(&gt)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["seed"], 77);

    let (code, _, _) = run(bin()
        .env("VOXPROMPT_SEED", "soon")
        .args(["simulate", "--patch", "16"])
        .arg("--image")
        .arg(&img)
        .arg("--gt")
        .arg(&gt)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 2);
}

#[test]
fn simulate_segmenter_failures() {
    let case = Case::new();
    let (img, gt) = case.ball_pair(16);
    let out = case.path("r.json");
    let base = |seg: &str| {
        let mut cmd = bin();
        cmd.args(["simulate", "--patch", "16", "--segmenter", seg])
            .arg("--image")
            .arg(&img)
            .arg("--gt")
            .arg(&gt)
            .arg("--out")
            .arg(&out);
        cmd
    };
    let (code, _, _) = run(&mut base("exec:/nonexistent/model"));
    assert_eq!(code, 4);
    let fail = format!("exec:{}/tests/fixtures/fail.sh", env!("CARGO_MANIFEST_DIR"));
    let (code, _, err) = run(&mut base(&fail));
    assert_eq!(code, 4);
    assert!(err.contains("exited"), "{err}");
    let (code, _, _) = run(&mut base("magic"));
    assert_eq!(code, 2);
}

#[test]
fn simulate_budget_overrun_is_not_an_error() {
    let case = Case::new();
    let (img, gt) = case.ball_pair(16);
    let out = case.path("r.json");
    let echo = format!(
        "exec:{}/tests/fixtures/echo_channel.py",
        env!("CARGO_MANIFEST_DIR")
    );
    let (code, _, err) = run(bin()
        .args([
            "simulate",
            "--patch",
            "16",
            "--budget",
            "0.001",
            "--seg-timeout",
            "30",
            "--segmenter",
            &echo,
        ])
        .arg("--image")
        .arg(&img)
        .arg("--gt")
        .arg(&gt)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 0, "{err}");
    let report = json(&out);
    assert_eq!(report["budget_exceeded"], true);
    for k in ["dsc_auc", "nsd_auc", "dsc_final", "nsd_final"] {
        assert_eq!(report[k], 0.0);
    }
}

#[test]
fn crop_json() {
    let (code, out, err) = run(bin().args([
        "crop",
        "--bbox",
        "0,0,0,64,64,64",
        "--patch",
        "192",
        "--shape",
        "128,128,128",
    ]));
    assert_eq!(code, 0);
    let spec: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(spec["z"], 1.0);
    assert_eq!(spec["scaled_patch"], serde_json::json!([192, 192, 192]));
    // manifest goes to stderr when the result is on stdout
    let manifest: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(manifest["command"], "crop");

    let (code, _, _) = run(bin().args([
        "crop",
        "--bbox",
        "0,0,0,64,64,200",
        "--shape",
        "128,128,128",
    ]));
    assert_eq!(code, 2);
}

#[test]
fn clickgen_outputs() {
    let case = Case::new();
    let gt = ball(16, [8.0; 3], 4.0);
    let gt_path = case.volume("gt.vvol", &gt);
    let pred_path = case.volume("pred.vvol", gt.to_f32());
    let (code, out, _) = run(bin()
        .arg("clickgen")
        .arg("--pred")
        .arg(&pred_path)
        .arg("--gt")
        .arg(&gt_path));
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "null");

    let empty = case.volume("empty.vvol", Grid::filled([16; 3], 0.0f32));
    let out_path = case.path("click.json");
    let (code, _, _) = run(bin()
        .arg("clickgen")
        .arg("--pred")
        .arg(&empty)
        .arg("--gt")
        .arg(&gt_path)
        .arg("--out")
        .arg(&out_path));
    assert_eq!(code, 0);
    let click = json(&out_path);
    assert_eq!(click["polarity"], "positive");
    assert_eq!([&click["z"], &click["y"], &click["x"]], [8, 8, 8]);
    assert!(case.path("click.json.manifest.json").exists());

    let small = case.volume("small.vvol", Grid::filled([8; 3], 0.0f32));
    let (code, _, _) = run(bin()
        .arg("clickgen")
        .arg("--pred")
        .arg(&small)
        .arg("--gt")
        .arg(&gt_path));
    assert_eq!(code, 2);
}

#[test]
fn preprocess_modes() {
    let case = Case::new();
    let ct = case.volume(
        "ct.vvol",
        Grid::from_fn([4, 4, 4], |[z, y, x]| {
            (z * 16 + y * 4 + x) as i16 * 20 - 400
        }),
    );
    let out = case.path("soft.vvol");
    let (code, _, err) = run(bin()
        .arg("preprocess")
        .arg(&ct)
        .arg(&out)
        .args(["--window", "soft"]));
    assert_eq!(code, 0, "{err}");
    let Volume3::U8(g) = Volume3::from_vvol_bytes(&std::fs::read(&out).unwrap()).unwrap() else {
        panic!("expected u8 output");
    };
    assert_eq!(g.data()[0], 0);
    assert_eq!(*g.data().last().unwrap(), 255);

    let (code, _, _) = run(bin().arg("preprocess").arg(&ct).arg(case.path("p.vvol")));
    assert_eq!(code, 0);
    let (code, _, _) = run(bin()
        .arg("preprocess")
        .arg(&ct)
        .arg(case.path("c.vvol"))
        .args(["--width", "100", "--level", "0"]));
    assert_eq!(code, 0);
    let (code, _, _) = run(bin()
        .arg("preprocess")
        .arg(&ct)
        .arg(case.path("x.vvol"))
        .args(["--window", "liver"]));
    assert_eq!(code, 2);

    let u8_input = case.volume("u8.vvol", Grid::filled([2; 3], 7u8));
    let (code, _, _) = run(bin()
        .arg("preprocess")
        .arg(&u8_input)
        .arg(case.path("y.vvol"))
        .args(["--window", "bone"]));
    assert_eq!(code, 2);

    let bad = case.path("bad.vvol");
    std::fs::write(&bad, b"NOPE\x01\x00\x00\x03").unwrap();
    let (code, _, _) = run(bin().arg("preprocess").arg(&bad).arg(case.path("z.vvol")));
    assert_eq!(code, 2);
}

#[test]
fn evaluate_means_match_cases() {
    let case = Case::new();
    let mut entries = Vec::new();
    for (i, (modality, r)) in [("CT", 4.0), ("CT", 6.0), ("MRI", 5.0)]
        .into_iter()
        .enumerate()
    {
        let a = ball(20, [6.0, 10.0, 10.0], r / 2.0 + 1.0);
        let b = ball(20, [14.0, 10.0, 10.0], r / 2.0);
        let image = Grid::from_fn([20; 3], |c| if a[c] || b[c] { 150u8 } else { 20 });
        case.volume(&format!("img{i}.vvol"), image);
        case.volume(&format!("a{i}.vvol"), &a);
        case.volume(&format!("b{i}.vvol"), &b);
        entries.push(serde_json::json!({
            "id": format!("case{i}"),
            "modality": modality,
            "image": format!("img{i}.vvol"),
            "gts": [format!("a{i}.vvol"), format!("b{i}.vvol")],
            "bboxes": [null, [11, 5, 5, 19, 15, 15]],
        }));
    }
    let cases = case.path("cases.json");
    std::fs::write(
        &cases,
        serde_json::to_vec(&serde_json::json!({ "cases": entries })).unwrap(),
    )
    .unwrap();
    let out = case.path("eval.json");
    let fused = case.path("fused");
    let (code, _, err) = run(bin()
        .args([
            "evaluate",
            "--segmenter",
            "oracle",
            "--flip-rate",
            "0.1",
            "--decay",
            "0.5",
            "--patch",
            "20",
            "--jobs",
            "2",
        ])
        .arg("--cases")
        .arg(&cases)
        .arg("--fused-dir")
        .arg(&fused)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 0, "{err}");
    let report = json(&out);
    let per_case: Vec<f64> = report["cases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["dsc_final"].as_f64().unwrap())
        .collect();
    assert_eq!(per_case.len(), 3);
    let mean = per_case.iter().sum::<f64>() / 3.0;
    assert!((report["mean"]["dsc_final"].as_f64().unwrap() - mean).abs() <= 1e-12);
    assert_eq!(report["modalities"]["CT"]["cases"], 2);
    let ct_mean = (per_case[0] + per_case[1]) / 2.0;
    assert!((report["modalities"]["CT"]["dsc_final"].as_f64().unwrap() - ct_mean).abs() <= 1e-12);
    assert_eq!(report["cases"][0]["classes"][1]["class_id"], 2);

    let Volume3::U8(labels) =
        Volume3::from_vvol_bytes(&std::fs::read(fused.join("case0.vvol")).unwrap()).unwrap()
    else {
        panic!("expected u8 label map");
    };
    assert!(labels.data().contains(&1) && labels.data().contains(&2));
    let manifest = json(&case.path("eval.json.manifest.json"));
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 10);
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, _) = run(bin().arg("frobnicate"));
    assert_eq!(code, 2);
    let (code, _, _) = run(bin().args(["simulate", "--image", "x"]));
    assert_eq!(code, 2);
    let (code, out, _) = run(bin().arg("--help"));
    assert_eq!(code, 0);
    assert!(out.contains("simulate"));
}
