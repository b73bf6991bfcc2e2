//! End-to-end tests of the `roadtk` binary: exit-code contract, output
//! formats, and determinism of seeded commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use roadtk::augment::ImageBuffer;
use roadtk::dataset::{load_split, write_submission, Detection, DetectionMap, ParseMode};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roadtk"))
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join("rdd20")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Ground truth of the fixture re-emitted as perfect predictions.
fn perfect_predictions() -> String {
    let loaded = load_split(&fixture_dir(), "rdd20", ParseMode::Strict).unwrap();
    let mut map = DetectionMap::new();
    for record in loaded.split.records() {
        map.insert(
            record.image_id.clone(),
            record
                .boxes
                .iter()
                .map(|gt| Detection {
                    bbox: gt.bbox,
                    label: gt.label,
                    confidence: 1.0,
                })
                .collect(),
        );
    }
    write_submission(&map, true)
}

#[test]
fn stats_table_and_csv() {
    let dir = fixture_dir();
    let output = run(&["stats", "--annotations", dir.to_str().unwrap()]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("D20"));
    assert!(text.contains("25"));

    let output = run(&[
        "stats",
        "--annotations",
        dir.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(
        stdout(&output),
        "class,count\nD00,7\nD10,5\nD20,9\nD40,4\n__images__,20\n"
    );
}

#[test]
fn stats_missing_directory_is_usage_error() {
    let output = run(&["stats", "--annotations", "/no/such/dir"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!stderr(&output).is_empty(), "diagnostic goes to stderr");
}

#[test]
fn stats_empty_directory_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["stats", "--annotations", dir.path().to_str().unwrap()]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("images"));
    assert!(stderr(&output).contains("no annotation files"));
}

#[test]
fn stats_reads_env_var_when_flag_is_omitted() {
    let output = bin()
        .args(["stats", "--format", "csv"])
        .env("ROADTK_DATA_ROOT", fixture_dir())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(stdout(&output).contains("__images__,20"));

    let output = bin()
        .args(["stats"])
        .env_remove("ROADTK_DATA_ROOT")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn evaluate_perfect_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let pred_path = dir.path().join("perfect.txt");
    fs::write(&pred_path, perfect_predictions()).unwrap();
    let output = run(&[
        "evaluate",
        "--annotations",
        fixture_dir().to_str().unwrap(),
        "--predictions",
        pred_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("f1 1.0000"), "{text}");
    assert!(text.contains("mAP@[.50:.95] 1.0000"), "{text}");

    // CSV format and PR-curve export
    let curves_path = dir.path().join("curves.csv");
    let output = run(&[
        "evaluate",
        "--annotations",
        fixture_dir().to_str().unwrap(),
        "--predictions",
        pred_path.to_str().unwrap(),
        "--format",
        "csv",
        "--pr-curves",
        curves_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("f1,1\n"));
    let curves = fs::read_to_string(curves_path).unwrap();
    assert!(curves.starts_with("class,iou,recall,precision\n"));
}

#[test]
fn evaluate_mixed_fixture_matches_hand_counts() {
    // perfect predictions, minus img_003's D00 box, plus one disjoint FP:
    // tp 24, fp 1, fn 1 -> precision = recall = f1 = 24/25 = 0.96
    let loaded = load_split(&fixture_dir(), "rdd20", ParseMode::Strict).unwrap();
    let mut map = DetectionMap::new();
    for record in loaded.split.records() {
        let mut dets: Vec<Detection> = record
            .boxes
            .iter()
            .filter(|gt| !(record.image_id == "img_003" && gt.label == roadtk::ClassLabel::D00))
            .map(|gt| Detection {
                bbox: gt.bbox,
                label: gt.label,
                confidence: 0.9,
            })
            .collect();
        if record.image_id == "img_002" {
            dets.push(Detection {
                bbox: roadtk::BoundingBox::new(500.0, 500.0, 590.0, 590.0).unwrap(),
                label: roadtk::ClassLabel::D40,
                confidence: 0.8,
            });
        }
        map.insert(record.image_id.clone(), dets);
    }
    let dir = tempfile::tempdir().unwrap();
    let pred_path = dir.path().join("mixed.txt");
    fs::write(&pred_path, write_submission(&map, true)).unwrap();
    let output = run(&[
        "evaluate",
        "--annotations",
        fixture_dir().to_str().unwrap(),
        "--predictions",
        pred_path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let csv = stdout(&output);
    assert!(csv.contains("tp,24\n"), "{csv}");
    assert!(csv.contains("fp,1\n"), "{csv}");
    assert!(csv.contains("fn,1\n"), "{csv}");
    assert!(csv.contains("precision,0.96\n"), "{csv}");
    assert!(csv.contains("recall,0.96\n"), "{csv}");
    assert!(csv.contains("f1,0.96\n"), "{csv}");
    // the one miss is img_003's D00 (30x350 px, not tiny); the one FP is
    // isolated, so both land in the "other" categories
    assert!(csv.contains("merged_box_fp,0\n"), "{csv}");
    assert!(csv.contains("other_fp,1\n"), "{csv}");
    assert!(csv.contains("tiny_fn,0\n"), "{csv}");
    assert!(csv.contains("other_fn,1\n"), "{csv}");
}

#[test]
fn evaluate_malformed_line_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let pred_path = dir.path().join("bad.txt");
    fs::write(
        &pred_path,
        "img_001.jpg,1 10 20 110 220 0.9\nimg_002.jpg,oops\n",
    )
    .unwrap();
    let output = run(&[
        "evaluate",
        "--annotations",
        fixture_dir().to_str().unwrap(),
        "--predictions",
        pred_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("line 2"), "{}", stderr(&output));
}

#[test]
fn evaluate_unknown_image_id_exits_one_with_the_id() {
    let dir = tempfile::tempdir().unwrap();
    let pred_path = dir.path().join("ghost.txt");
    fs::write(&pred_path, "ghost.jpg,1 10 20 110 220 0.9\n").unwrap();
    let output = run(&[
        "evaluate",
        "--annotations",
        fixture_dir().to_str().unwrap(),
        "--predictions",
        pred_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("ghost"));
}

#[test]
fn nms_collapses_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let pred_path = dir.path().join("dups.txt");
    fs::write(
        &pred_path,
        "img_001.jpg,1 10 20 110 220 0.9 1 10 20 110 220 0.8 2 10 20 110 220 0.7\n",
    )
    .unwrap();
    let output = run(&[
        "nms",
        "--predictions",
        pred_path.to_str().unwrap(),
        "--iou",
        "0.5",
    ]);
    assert!(output.status.success());
    // the duplicate D00 at 0.8 is suppressed; the D10 copy survives
    assert_eq!(
        stdout(&output),
        "img_001.jpg,1 10 20 110 220 0.9 2 10 20 110 220 0.7\n"
    );
    // machine-readable output re-parses with the module parser
    assert!(roadtk::dataset::parse_predictions(&stdout(&output)).is_ok());
}

#[test]
fn apply_filters_predictions_through_a_table() {
    let work = tempfile::tempdir().unwrap();
    let pred_path = work.path().join("preds.txt");
    fs::write(
        &pred_path,
        "img_001.jpg,1 10 20 110 220 0.9 1 10 20 110 220 0.3 2 0 0 50 50 0.5\n",
    )
    .unwrap();
    let table_path = work.path().join("thresholds.txt");
    fs::write(&table_path, "D00=0.5\nD10=0.6\nD20=0.0\nD40=0.0\n").unwrap();
    let output = run(&[
        "apply",
        "--predictions",
        pred_path.to_str().unwrap(),
        "--thresholds",
        table_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    // D00 at 0.3 and D10 at 0.5 fall below their class thresholds
    assert_eq!(stdout(&output), "img_001.jpg,1 10 20 110 220 0.9\n");

    // an incomplete table is a data error
    fs::write(&table_path, "D00=0.5\n").unwrap();
    let output = run(&[
        "apply",
        "--predictions",
        pred_path.to_str().unwrap(),
        "--thresholds",
        table_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn sweep_then_evaluate_round_trip() {
    let work = tempfile::tempdir().unwrap();
    let pred_path = work.path().join("val.txt");
    // perfect detections plus one low-confidence false positive per image
    let loaded = load_split(&fixture_dir(), "rdd20", ParseMode::Strict).unwrap();
    let mut map = DetectionMap::new();
    for record in loaded.split.records() {
        let mut dets: Vec<Detection> = record
            .boxes
            .iter()
            .map(|gt| Detection {
                bbox: gt.bbox,
                label: gt.label,
                confidence: 0.9,
            })
            .collect();
        dets.push(Detection {
            bbox: roadtk::BoundingBox::new(0.0, 0.0, 5.0, 5.0).unwrap(),
            label: roadtk::ClassLabel::D40,
            confidence: 0.1,
        });
        map.insert(record.image_id.clone(), dets);
    }
    fs::write(&pred_path, write_submission(&map, true)).unwrap();

    let table_path = work.path().join("thresholds.txt");
    let output = run(&[
        "sweep",
        "--annotations",
        fixture_dir().to_str().unwrap(),
        "--predictions",
        pred_path.to_str().unwrap(),
        "--grid-start",
        "0.05",
        "--grid-end",
        "0.95",
        "--grid-step",
        "0.05",
        "--out",
        table_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let table_text = fs::read_to_string(&table_path).unwrap();
    for class in ["D00", "D10", "D20", "D40"] {
        assert!(table_text.contains(&format!("{class}=")), "{table_text}");
    }

    // applying the swept table trims the FPs back to a perfect score
    let output = run(&[
        "evaluate",
        "--annotations",
        fixture_dir().to_str().unwrap(),
        "--predictions",
        pred_path.to_str().unwrap(),
        "--thresholds",
        table_path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    assert!(stdout(&output).contains("\nf1,1\n"), "{}", stdout(&output));
}

#[test]
fn anchors_are_deterministic_under_a_fixed_seed() {
    let dir = fixture_dir();
    let args = [
        "anchors",
        "--annotations",
        dir.to_str().unwrap(),
        "--k",
        "7",
        "--resolution",
        "512",
        "--seed",
        "21",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&second));
    let line = stdout(&first);
    let ratios: Vec<f64> = line.trim().split(',').map(|t| t.parse().unwrap()).collect();
    assert_eq!(ratios.len(), 7);
    for pair in ratios.windows(2) {
        assert!(pair[0] <= pair[1], "ratios must be sorted: {line}");
    }
}

#[test]
fn scale_emits_key_values_and_rejects_out_of_range() {
    let output = run(&["scale", "--phi", "0"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("resolution=512\n"));
    assert!(text.contains("head_depth=3\n"));

    let output = run(&["scale", "--phi", "9"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let output = run(&["definitely-not-a-command"]);
    assert_eq!(output.status.code(), Some(2));
    let output = run(&["evaluate"]); // missing required flags
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn augment_dry_run_and_determinism() {
    let work = tempfile::tempdir().unwrap();
    let image_path = work.path().join("road.png");
    let mut img = ImageBuffer::new(64, 48).unwrap();
    for y in 0..48 {
        for x in 0..64 {
            img.set_pixel(x, y, [(x * 3) as u8, (y * 5) as u8, 120]);
        }
    }
    img.write_png(&image_path).unwrap();

    let annotation_path = work.path().join("road.xml");
    fs::write(
        &annotation_path,
        "<annotation><filename>road.png</filename>\
         <size><width>64</width><height>48</height></size>\
         <object><name>D20</name><bndbox><xmin>4</xmin><ymin>6</ymin>\
         <xmax>30</xmax><ymax>40</ymax></bndbox></object></annotation>",
    )
    .unwrap();

    let dry = [
        "augment",
        "--image",
        image_path.to_str().unwrap(),
        "--annotation",
        annotation_path.to_str().unwrap(),
        "--policy",
        "v1",
        "--seed",
        "5",
        "--dry-run",
    ];
    let first = run(&dry);
    assert!(first.status.success(), "{}", stderr(&first));
    let text = stdout(&first);
    assert!(text.starts_with("label,xmin,ymin,xmax,ymax\n"), "{text}");
    // the bundled policies carry rotation; the CLI strips it and says so
    assert!(stderr(&first).contains("rotation"), "{}", stderr(&first));
    let second = run(&dry);
    assert_eq!(stdout(&first), stdout(&second), "seeded runs are identical");

    // full run writes a decodable PNG
    let out_image = work.path().join("out.png");
    let out_boxes = work.path().join("boxes.csv");
    let output = run(&[
        "augment",
        "--image",
        image_path.to_str().unwrap(),
        "--annotation",
        annotation_path.to_str().unwrap(),
        "--policy",
        "v1",
        "--seed",
        "5",
        "--out-image",
        out_image.to_str().unwrap(),
        "--out-boxes",
        out_boxes.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    assert!(ImageBuffer::read_png(&out_image).is_ok());
    assert_eq!(fs::read_to_string(&out_boxes).unwrap(), text);

    // a policy file (not a builtin name) works too
    let policy_path = work.path().join("flip.txt");
    fs::write(&policy_path, "HFlip(1,0)\n").unwrap();
    let output = run(&[
        "augment",
        "--image",
        image_path.to_str().unwrap(),
        "--annotation",
        annotation_path.to_str().unwrap(),
        "--policy",
        policy_path.to_str().unwrap(),
        "--seed",
        "1",
        "--dry-run",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    // 64-wide image: (4, 30) mirrors to (34, 60)
    assert!(
        stdout(&output).contains("D20,34,6,60,40\n"),
        "{}",
        stdout(&output)
    );
}
