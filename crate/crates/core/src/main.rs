use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use contourlet_pose::classify::{ClassifierKind, ConfusionMatrix};
use contourlet_pose::contourlet::{pdfb_decompose, PdfbConfig};
use contourlet_pose::features::ncsev;
use contourlet_pose::image_io::{crop, read_netpbm, resize, CropRect};
use contourlet_pose::pipeline::{
    gen_synthetic, load_manifest, load_model, run_eval, run_predict, run_train, save_model, write_decomposition,
    PipelineError, RunConfig, SplitSpec,
};

#[derive(Parser)]
#[command(name = "contourlet-pose", version, about = "Head pose estimation with contourlet features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Knn,
    Mindist,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose one image and write every subband as a P5 image.
    Decompose {
        image: PathBuf,
        #[arg(long, default_value = "0,1")]
        nlevs: PdfbConfig,
        #[arg(long)]
        out: PathBuf,
        /// Resize to ROWSxCOLS first (default: keep the image size).
        #[arg(long, value_parser = parse_size)]
        resize: Option<(usize, usize)>,
        /// Crop as TOP,LEFT,HEIGHT,WIDTH before resizing.
        #[arg(long, value_parser = parse_crop)]
        crop: Option<CropRect>,
    },
    /// Write the oriented-grating corpus and its manifest.
    GenSynthetic {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 150)]
        per_class: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Fit on a seeded split of the manifest, evaluate on the rest, save the model.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        train_per_class: usize,
        #[arg(long, value_enum, default_value = "knn")]
        classifier: Kind,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long, default_value_t = 0.99)]
        pca_energy: f64,
        #[arg(long, default_value = "0,1")]
        nlevs: PdfbConfig,
        #[arg(long, value_parser = parse_size, default_value = "120x90")]
        resize: (usize, usize),
        #[arg(long)]
        model_out: PathBuf,
        /// Also write the confusion matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print every stage's output shape for each image.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate a saved model on a manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Restrict to the test part of the split with this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10, requires = "seed")]
        train_per_class: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Classify one image with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        image: PathBuf,
        #[arg(long, value_parser = parse_crop)]
        crop: Option<CropRect>,
        #[arg(long)]
        trace: bool,
    },
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
    let r: usize = r.trim().parse().map_err(|_| format!("bad row count in {s:?}"))?;
    let c: usize = c.trim().parse().map_err(|_| format!("bad column count in {s:?}"))?;
    if r == 0 || c == 0 {
        return Err("sizes must be positive".into());
    }
    Ok((r, c))
}

fn parse_crop(s: &str) -> Result<CropRect, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected TOP,LEFT,HEIGHT,WIDTH, got {s:?}"))?;
    match v[..] {
        [t, l, h, w] if h > 0 && w > 0 => Ok(CropRect::new(t, l, h, w)),
        _ => Err(format!("expected TOP,LEFT,HEIGHT,WIDTH with positive size, got {s:?}")),
    }
}

fn write_csv(path: &Path, cm: &ConfusionMatrix) -> Result<(), PipelineError> {
    std::fs::write(path, cm.to_csv()).map_err(|e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() })
}

fn format_curve(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Decompose { image, nlevs, out, resize: size, crop: rect } => {
            let img_err = |source| PipelineError::Image { path: image.clone(), source };
            let mut gray = read_netpbm(&image).map_err(img_err)?.into_gray();
            if let Some(rect) = rect {
                gray = crop(&gray, &rect).map_err(img_err)?;
            }
            if let Some((r, c)) = size {
                gray = resize(&gray, r, c).map_err(img_err)?;
            }
            let d = pdfb_decompose(&gray, &nlevs)
                .map_err(|source| PipelineError::Transform { path: image.clone(), source })?;
            for p in write_decomposition(&d, &out)? {
                println!("{}", p.display());
            }
        }
        Command::GenSynthetic { out, per_class, seed } => {
            let manifest = gen_synthetic(&out, per_class, seed)?;
            println!("{}", manifest.display());
        }
        Command::Train {
            manifest,
            seed,
            train_per_class,
            classifier,
            k,
            q,
            pca_energy,
            nlevs,
            resize,
            model_out,
            csv,
            trace,
        } => {
            let classifier = match classifier {
                Kind::Knn => ClassifierKind::Knn { k },
                Kind::Mindist => ClassifierKind::MinDist,
            };
            let cfg = RunConfig { pdfb: nlevs, resize, pca_energy, q, classifier };
            let entries = load_manifest(&manifest)?;
            let outcome = run_train(&entries, &cfg, SplitSpec { train_per_class, seed })?;
            if trace {
                for t in &outcome.traces {
                    print!("{t}");
                }
            }
            let m = &outcome.model;
            println!("classes {}", m.classifier.alphabet.join(" "));
            println!("train {} test {}", outcome.split.train.len(), outcome.split.test.len());
            println!("raw dimension {} pca components {} features {}", m.projection.raw_dim(), m.projection.p(), m.projection.q());
            let pca_curve = ncsev(&outcome.pca_spectrum)?;
            println!("pca ncsev {}", format_curve(&pca_curve[..m.projection.p()]));
            if let Ok(curve) = ncsev(&outcome.lda_spectrum) {
                println!("lda ncsev {}", format_curve(&curve));
            }
            println!("classifier {}", m.kind());
            print!("{}", outcome.confusion);
            save_model(&model_out, m)?;
            if let Some(path) = csv {
                write_csv(&path, &outcome.confusion)?;
            }
        }
        Command::Eval { manifest, model, seed, train_per_class, csv } => {
            let model = load_model(&model)?;
            let entries = load_manifest(&manifest)?;
            let restrict = seed.map(|seed| SplitSpec { train_per_class, seed });
            let cm = run_eval(&entries, &model, restrict)?;
            print!("{cm}");
            if let Some(path) = csv {
                write_csv(&path, &cm)?;
            }
        }
        Command::Predict { model, image, crop, trace } => {
            let model = load_model(&model)?;
            let (label, t) = run_predict(&model, &image, crop.as_ref())?;
            if trace {
                print!("{t}");
            }
            println!("{label}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
