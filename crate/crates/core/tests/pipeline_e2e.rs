use std::path::{Path, PathBuf};

use contourlet_pose::classify::{ClassifierKind, ClassifierModel};
use contourlet_pose::features::ProjectionModel;
use contourlet_pose::image_io::{write_pgm, GrayImage};
use contourlet_pose::pipeline::{
    decode_model, encode_model, gen_synthetic, load_manifest, load_model, run_eval, run_predict, run_train,
    save_model, PipelineError, RunConfig, SplitSpec, TrainedModel,
};
use nalgebra::{DMatrix, DVector};

fn corpus(dir: &Path, per_class: usize) -> PathBuf {
    gen_synthetic(dir, per_class, 7).unwrap()
}

fn spec() -> SplitSpec {
    SplitSpec { train_per_class: 10, seed: 3 }
}

#[test]
fn saved_model_predicts_like_the_trained_one() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 12)).unwrap();
    for kind in [ClassifierKind::Knn { k: 1 }, ClassifierKind::MinDist] {
        let cfg = RunConfig { classifier: kind, ..RunConfig::default() };
        let outcome = run_train(&entries, &cfg, spec()).unwrap();
        assert_eq!(outcome.confusion.total(), 14);
        let path = dir.path().join("model.bin");
        save_model(&path, &outcome.model).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, outcome.model);
        let again = run_eval(&entries, &loaded, Some(spec())).unwrap();
        assert_eq!(again, outcome.confusion);
    }
}

#[test]
fn training_image_predicts_its_own_label() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 12)).unwrap();
    let outcome = run_train(&entries, &RunConfig::default(), spec()).unwrap();
    for &i in outcome.split.train.iter().step_by(9) {
        let (label, trace) = run_predict(&outcome.model, &entries[i].path, None).unwrap();
        assert_eq!(label, entries[i].label);
        let stages: Vec<&str> = trace.stages.iter().map(|(s, _)| *s).collect();
        assert_eq!(stages, ["read", "grayscale", "resize", "contourlet", "vectorize", "project", "classify"]);
    }
}

#[test]
fn whole_manifest_eval_counts_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 11)).unwrap();
    let outcome = run_train(&entries, &RunConfig::default(), spec()).unwrap();
    let cm = run_eval(&entries, &outcome.model, None).unwrap();
    assert_eq!(cm.total(), 77);
    assert!(cm.row_sums().iter().all(|&s| s == 11));
}

#[test]
fn config_travels_with_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 12)).unwrap();
    let cfg = RunConfig { resize: (64, 64), q: 2, pdfb: "0,2".parse().unwrap(), ..RunConfig::default() };
    let outcome = run_train(&entries, &cfg, spec()).unwrap();
    let path = dir.path().join("m.bin");
    save_model(&path, &outcome.model).unwrap();
    let loaded = load_model(&path).unwrap();
    assert_eq!(loaded.config, cfg);
    assert_eq!(loaded.projection.q(), 2);
    let (label, _) = run_predict(&loaded, &entries[0].path, None).unwrap();
    assert!(loaded.classifier.alphabet.contains(&label));
}

#[test]
fn corrupt_model_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 11)).unwrap();
    let outcome = run_train(&entries, &RunConfig::default(), spec()).unwrap();
    let mut bytes = encode_model(&outcome.model);
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x10;
    let path = dir.path().join("bad.bin");
    std::fs::write(&path, &bytes).unwrap();
    let err = load_model(&path).unwrap_err();
    assert!(matches!(err, PipelineError::ModelFormat(_)), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn one_image_per_class_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 3)).unwrap();
    let err = run_train(&entries, &RunConfig::default(), SplitSpec { train_per_class: 1, seed: 0 }).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn mismatched_feature_dimension_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 11)).unwrap();
    let mut model = run_train(&entries, &RunConfig::default(), spec()).unwrap().model;
    // a model whose stored resize disagrees with its projection
    model.config.resize = (64, 64);
    let err = run_predict(&model, &entries[0].path, None).unwrap_err();
    assert!(matches!(err, PipelineError::FeatureDimension { expected: 2760, .. }), "{err}");
}

#[test]
fn unreadable_image_names_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 11)).unwrap();
    let model = run_train(&entries, &RunConfig::default(), spec()).unwrap().model;
    let bad = dir.path().join("broken.pgm");
    std::fs::write(&bad, b"P5 2 2\n").unwrap();
    let err = run_predict(&model, &bad, None).unwrap_err();
    assert!(err.to_string().contains("broken.pgm"));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn crop_column_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let entries = load_manifest(&corpus(dir.path(), 11)).unwrap();
    let model = run_train(&entries, &RunConfig::default(), spec()).unwrap().model;
    let big = GrayImage::from_fn(200, 150, |r, c| if r < 120 && c < 90 { 100.0 } else { 0.0 });
    let path = dir.path().join("big.pgm");
    write_pgm(&path, &big).unwrap();
    let manifest = dir.path().join("cropped.csv");
    std::fs::write(&manifest, "big.pgm,fa,0,0,120,90\n").unwrap();
    let e = load_manifest(&manifest).unwrap();
    let cm = run_eval(&e, &model, None).unwrap();
    assert_eq!(cm.total(), 1);
    let (_, trace) = run_predict(&model, &path, e[0].crop.as_ref()).unwrap();
    assert!(trace.stages.iter().any(|(s, d)| *s == "crop" && d == "120x90"));
}

fn golden_model() -> TrainedModel {
    let projection = ProjectionModel {
        mean: DVector::from_vec(vec![1.0, 2.0, -0.5, 0.25]),
        pca_basis: DMatrix::from_vec(4, 2, vec![0.5, 0.5, 0.5, 0.5, 0.5, -0.5, 0.5, -0.5]),
        pca_eigenvalues: vec![4.0, 0.75],
        lda_basis: DMatrix::from_vec(2, 1, vec![0.6, 0.8]),
        lda_eigenvalues: vec![12.5],
    };
    let alphabet: Vec<String> = ["pl", "fa", "pr"].iter().map(|s| s.to_string()).collect();
    let x = vec![vec![-2.0], vec![-1.5], vec![0.0], vec![0.5], vec![3.0]];
    let classifier = ClassifierModel::fit(ClassifierKind::Knn { k: 3 }, &x, &[0, 0, 1, 1, 2], &alphabet).unwrap();
    let config = RunConfig { q: 1, classifier: ClassifierKind::Knn { k: 3 }, ..RunConfig::default() };
    TrainedModel { config, projection, classifier }
}

#[test]
fn model_format_matches_golden_bytes() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_model.bin");
    let bytes = encode_model(&golden_model());
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, &bytes).unwrap();
    }
    let stored = std::fs::read(&golden).expect("golden file present; regenerate with UPDATE_GOLDEN=1");
    assert_eq!(bytes, stored, "model encoding changed; bump the format version");
    // offsets worked out by hand from docs/model-format.md
    let u64_at = |o: usize| u64::from_le_bytes(stored[o..o + 8].try_into().unwrap());
    assert_eq!(stored.len(), 315);
    assert_eq!((u64_at(44), u64_at(52), u64_at(60)), (4, 2, 1));
    assert_eq!(f64::from_le_bytes(stored[68..76].try_into().unwrap()), 1.0);
    assert_eq!(&stored[204..208], &3u32.to_le_bytes());
    assert_eq!(&stored[212..214], b"pl");
    assert_eq!(stored[226], 0);
    assert_eq!(&stored[227..231], &3u32.to_le_bytes());
    assert_eq!(decode_model(&stored).unwrap(), golden_model());
}
