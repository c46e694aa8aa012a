#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use freqpix::dataset::{save_tensor, write_manifest, TensorFormat};
use freqpix::{derive_stream, SampleRecord, Tensor};
use rand::Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freqpix"))
}

pub fn run(args: &[&str]) -> Output {
    bin().env_remove("FREQPIX_WORKERS").args(args).output().expect("binary runs")
}

/// A smooth random image: a few low-frequency gratings plus mild noise.
pub fn smooth_image(h: usize, w: usize, c: usize, seed: u64) -> Tensor {
    let mut rng = derive_stream(seed, 0);
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.02..0.1),
            )
        })
        .collect();
    let mut data = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut v = 0.5 + 0.05 * ch as f64;
                for &(fy, fx, ph, a) in &waves {
                    let t = fy * y as f64 / h as f64 + fx * x as f64 / w as f64;
                    v += a * (std::f64::consts::TAU * t + ph).cos();
                }
                v += rng.random_range(-0.02..0.02);
                data.push(v.clamp(0.0, 1.0));
            }
        }
    }
    Tensor::new(h, w, c, data).unwrap()
}

/// Writes `n` PNGs plus `manifest.jsonl` into `dir`; domains alternate A/B.
pub fn make_dataset(dir: &Path, n: usize, h: usize, w: usize, c: usize) -> PathBuf {
    std::fs::create_dir_all(dir.join("images")).unwrap();
    let records: Vec<SampleRecord> = (0..n)
        .map(|i| {
            let rel = PathBuf::from(format!("images/img{i:04}.png"));
            save_tensor(&smooth_image(h, w, c, i as u64), dir.join(&rel), TensorFormat::Png).unwrap();
            SampleRecord {
                id: format!("img{i:04}"),
                path: rel,
                label: (i / 2 % 2).to_string(),
                domain: if i % 2 == 0 { "A" } else { "B" }.to_string(),
            }
        })
        .collect();
    let manifest = dir.join("manifest.jsonl");
    write_manifest(&manifest, &records).unwrap();
    manifest
}

/// File name to bytes for every file directly inside `dir`.
pub fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
