#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{rng, tucker};
use tenfill_cli::dten::{load_mask, load_tensor, save_tensor};
use tenfill_core::Tensor;

fn tenfill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tenfill"))
        .args(args)
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_input(dir: &Path, name: &str, t: &Tensor) -> String {
    let path = dir.join(name);
    save_tensor(t, &path).unwrap();
    path.to_str().unwrap().to_string()
}

/// Data rows of a results or trace CSV, after the schema line and header.
fn csv_rows(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let schema = lines.next().unwrap().to_string();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (schema, header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn tlnm_on_tucker_instance_scores_above_40_db() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(5);
    let gt = tucker(&mut r, &[20, 20, 20], &[2, 2, 2]);
    let input = write_input(dir.path(), "truth.dten", &gt);
    let out = dir.path().join("run");
    let o = tenfill(&[
        "complete",
        "--input",
        &input,
        "--sampling-rate",
        "0.6",
        "--seed",
        "3",
        "--output-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (schema, header, rows) = csv_rows(&out.join("results.csv"));
    assert_eq!(schema, "# tenfill-results v1");
    assert_eq!(
        header,
        [
            "method",
            "sampling_rate",
            "seed",
            "mpsnr",
            "mssim",
            "ergas",
            "iterations",
            "wall_time"
        ]
    );
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[0], "tlnm");
    assert_eq!(row[1], "0.6");
    assert_eq!(row[2], "3");
    let mpsnr: f64 = row[col(&header, "mpsnr")].parse().unwrap();
    assert!(mpsnr >= 40.0, "mpsnr {mpsnr}");

    let (tschema, theader, trows) = csv_rows(&out.join("trace.csv"));
    assert_eq!(tschema, "# tenfill-trace v1");
    assert_eq!(theader.len(), 5 + 3);
    let iterations: usize = row[col(&header, "iterations")].parse().unwrap();
    assert_eq!(trows.len(), iterations);

    let x = load_tensor(out.join("completed.dten")).unwrap();
    assert_eq!(x.dims(), gt.dims());
}

#[test]
fn full_sampling_caps_psnr_for_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let gt = Tensor::from_fn(&[12, 12, 3], |i| {
        0.05 * (i[0] + i[1]) as f64 + 0.1 * i[2] as f64
    })
    .unwrap();
    let input = write_input(dir.path(), "truth.dten", &gt);
    for method in ["tlnm", "tlnmtv", "svt-baseline"] {
        let out = dir.path().join(method);
        let o = tenfill(&[
            "complete",
            "--input",
            &input,
            "--method",
            method,
            "--sampling-rate",
            "1",
            "--output-dir",
            p(&out),
        ]);
        assert!(
            o.status.success(),
            "{method}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let (_, header, rows) = csv_rows(&out.join("results.csv"));
        assert_eq!(rows[0][col(&header, "mpsnr")], "100", "{method}");
    }
}

#[test]
fn rerun_gives_identical_row_apart_from_time() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(6);
    let gt = tucker(&mut r, &[12, 12, 12], &[2, 2, 2]);
    let input = write_input(dir.path(), "truth.dten", &gt);
    let mut rows = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = tenfill(&[
            "complete",
            "--input",
            &input,
            "--method",
            "tlnmtv",
            "--sampling-rate",
            "0.4",
            "--seed",
            "9",
            "--max-iters",
            "40",
            "--output-dir",
            p(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let (_, _, mut r) = csv_rows(&out.join("results.csv"));
        let mut row = r.remove(0);
        row.pop();
        rows.push(row);
    }
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn several_rates_and_seeds_run_in_subdirectories() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(7);
    let gt = tucker(&mut r, &[10, 10, 10], &[2, 2, 2]);
    let input = write_input(dir.path(), "truth.dten", &gt);
    let out = dir.path().join("sweep");
    let o = tenfill(&[
        "complete",
        "--input",
        &input,
        "--sampling-rate",
        "0.3,0.5",
        "--seed",
        "1,2",
        "--max-iters",
        "30",
        "--output-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for sub in ["sr0.3_seed1", "sr0.3_seed2", "sr0.5_seed1", "sr0.5_seed2"] {
        assert!(out.join(sub).join("completed.dten").exists(), "{sub}");
    }
    let (_, _, rows) = csv_rows(&out.join("results.csv"));
    assert_eq!(rows.len(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let gt = Tensor::from_fn(&[6, 6, 6], |i| (i[0] + i[1] + i[2]) as f64 / 20.0).unwrap();
    let input = write_input(dir.path(), "truth.dten", &gt);
    let out = dir.path().join("out");

    let bad_sr = tenfill(&[
        "complete",
        "--input",
        &input,
        "--sampling-rate",
        "1.5",
        "--output-dir",
        p(&out),
    ]);
    assert_eq!(bad_sr.status.code(), Some(2));
    let bad_rank = tenfill(&[
        "complete",
        "--input",
        &input,
        "--ranks",
        "9,9,9",
        "--output-dir",
        p(&out),
    ]);
    assert_eq!(bad_rank.status.code(), Some(2));
    let unknown = tenfill(&[
        "complete",
        "--input",
        &input,
        "--method",
        "magic",
        "--output-dir",
        p(&out),
    ]);
    assert_eq!(unknown.status.code(), Some(2));

    let junk = dir.path().join("junk.dten");
    std::fs::write(&junk, b"NOTATENSOR").unwrap();
    let bad_file = tenfill(&["complete", "--input", p(&junk), "--output-dir", p(&out)]);
    assert_eq!(bad_file.status.code(), Some(3));
    let missing = tenfill(&[
        "metrics",
        "--reference",
        p(&dir.path().join("nope.dten")),
        "--estimate",
        &input,
    ]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn divergence_exits_4_and_keeps_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let gt = Tensor::from_fn(&[6, 6, 6], |i| 1e300 * (1 + i[0] * i[1] + i[2]) as f64).unwrap();
    let input = write_input(dir.path(), "huge.dten", &gt);
    let out = dir.path().join("out");
    let o = tenfill(&[
        "complete",
        "--input",
        &input,
        "--sampling-rate",
        "0.5",
        "--output-dir",
        p(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("trace.csv").exists());
    assert!(!out.join("completed.dten").exists());
}

#[test]
fn mask_subcommand_is_exact_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.dten");
    let b = dir.path().join("b.dten");
    for (path, seed) in [(&a, "4"), (&b, "4")] {
        let o = tenfill(&[
            "mask",
            "--dims",
            "10,10,10",
            "--sampling-rate",
            "0.1",
            "--seed",
            seed,
            "--output",
            p(path),
        ]);
        assert!(o.status.success());
    }
    let m = load_mask(&a).unwrap();
    assert_eq!(m.count(), 100);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn mask_file_drives_completion() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(8);
    let gt = tucker(&mut r, &[10, 10, 10], &[2, 2, 2]);
    let input = write_input(dir.path(), "truth.dten", &gt);
    let mask = dir.path().join("mask.dten");
    assert!(tenfill(&[
        "mask",
        "--dims",
        "10,10,10",
        "--sampling-rate",
        "0.5",
        "--seed",
        "2",
        "--output",
        p(&mask)
    ])
    .status
    .success());
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec![
            "complete",
            "--input",
            &input,
            "--max-iters",
            "20",
            "--output-dir",
            p(&out),
        ];
        args.extend_from_slice(extra);
        assert!(tenfill(&args).status.success());
        std::fs::read(out.join("completed.dten")).unwrap()
    };
    let from_file = run("file", &["--mask", p(&mask)]);
    let drawn = run("drawn", &["--sampling-rate", "0.5", "--seed", "2"]);
    assert_eq!(from_file, drawn);

    let wrong = dir.path().join("wrong.dten");
    tenfill(&[
        "mask",
        "--dims",
        "5,5,5",
        "--sampling-rate",
        "0.5",
        "--output",
        p(&wrong),
    ]);
    let o = tenfill(&[
        "complete",
        "--input",
        &input,
        "--mask",
        p(&wrong),
        "--output-dir",
        p(&dir.path().join("w")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convert_export_and_metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gt = Tensor::from_fn(&[12, 16, 2], |i| {
        ((i[0] * 7 + i[1] * 3 + i[2]) % 11) as f64 / 10.0
    })
    .unwrap();
    let input = write_input(dir.path(), "truth.dten", &gt);
    let mut pgms = Vec::new();
    for band in 1..=2 {
        let path = dir.path().join(format!("b{band}.pgm"));
        let o = tenfill(&[
            "export",
            "--input",
            &input,
            "--band",
            &band.to_string(),
            "--output",
            p(&path),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5"));
        pgms.push(path);
    }
    let stacked = dir.path().join("stacked.dten");
    let o = tenfill(&["convert", p(&pgms[0]), p(&pgms[1]), "--output", p(&stacked)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let back = load_tensor(&stacked).unwrap();
    assert_eq!(back.dims(), gt.dims());
    // 8-bit quantization of tenths
    assert!(back.max_abs_diff(&gt).unwrap() <= 0.5 / 255.0 + 1e-12);

    let o = tenfill(&["metrics", "--reference", &input, "--estimate", p(&stacked)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mpsnr,mssim,ergas"));
    let mpsnr: f64 = lines
        .next()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(mpsnr > 50.0);

    let bad = tenfill(&[
        "export",
        "--input",
        &input,
        "--band",
        "3",
        "--output",
        p(&dir.path().join("x.pgm")),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn raw_bands_convert() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for band in 0..3 {
        let path = dir.path().join(format!("b{band}.raw"));
        let bytes: Vec<u8> = (0..6)
            .flat_map(|k| (k as f32 + 10.0 * band as f32).to_le_bytes())
            .collect();
        std::fs::write(&path, bytes).unwrap();
        files.push(path);
    }
    let out = dir.path().join("raw.dten");
    let mut args = vec![
        "convert",
        "--raw",
        "f32",
        "--rows",
        "2",
        "--cols",
        "3",
        "--output",
        p(&out),
    ];
    args.extend(files.iter().map(|f| p(f)));
    let o = tenfill(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = load_tensor(&out).unwrap();
    assert_eq!(t.dims(), &[2, 3, 3]);
    // row-major input: element (row 1, col 0) of band 2 is 3 + 20
    assert_eq!(t.get(&[2, 1, 3]).unwrap(), 23.0);
    let missing = tenfill(&["convert", "--raw", "f32", "--output", p(&out), p(&files[0])]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn pgm_panels_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let gt = Tensor::from_fn(&[8, 9, 3], |i| {
        (i[0] + i[1]) as f64 / 20.0 + 0.1 * i[2] as f64
    })
    .unwrap();
    let input = write_input(dir.path(), "truth.dten", &gt);
    let out = dir.path().join("out");
    let o = tenfill(&[
        "complete",
        "--input",
        &input,
        "--sampling-rate",
        "0.5",
        "--max-iters",
        "10",
        "--pgm-bands",
        "1,3",
        "--output-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for kind in ["truth", "observed", "completed"] {
        for b in [1, 3] {
            assert!(out.join(format!("{kind}_b{b}.pgm")).exists());
        }
    }
    // 8×9 bands are below the SSIM window
    let (_, header, rows) = csv_rows(&out.join("results.csv"));
    assert_eq!(rows[0][col(&header, "mssim")], "NaN");
}

#[test]
fn help_documents_defaults() {
    let o = tenfill(&["complete", "--help"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in [
        "--sampling-rate",
        "--max-iters",
        "default: 1e-4",
        "default: 500",
        "--band-mode",
    ] {
        assert!(text.contains(needle), "missing {needle}");
    }
}
