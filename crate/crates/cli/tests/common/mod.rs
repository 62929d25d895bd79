#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use sseval_core::audio::write_wav_file;
use sseval_core::protocol::{pairing_allowed, write_manifest, ManifestEntry, Split};
use sseval_core::ratings::write_ratings;
use sseval_core::{AudioClip, BackgroundCategory, DatasetManifest, ForegroundCategory, PromptSpec, RatingRecord};
use sseval_listen::{router, Service, Study, SystemSource};
use tower::ServiceExt;

pub const RATE: u32 = 32_000;
pub const SECONDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipKind {
    /// Quiet tones with an amplitude step between the halves.
    Tone,
    /// Loud white noise.
    Noise,
}

pub fn make_clip(kind: ClipKind, seed: u64, index: usize, rate: u32, id: &str) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(index as u64));
    let n = SECONDS * rate as usize;
    let samples = match kind {
        ClipKind::Tone => {
            let freq: f64 = rng.random_range(200.0..800.0);
            let a1: f64 = rng.random_range(0.1..0.4);
            let a2: f64 = rng.random_range(0.1..0.4);
            (0..n)
                .map(|i| {
                    let a = if i < n / 2 { a1 } else { a2 };
                    let t = i as f64 / f64::from(rate);
                    (a * (std::f64::consts::TAU * freq * t).sin() + rng.random_range(-0.01..0.01)) as f32
                })
                .collect()
        }
        ClipKind::Noise => {
            let amp: f64 = rng.random_range(0.6..0.9);
            (0..n).map(|_| (amp * rng.random_range(-1.0..1.0)) as f32).collect()
        }
    };
    AudioClip::new(samples, rate, id).unwrap()
}

pub fn clip_id(i: usize) -> String {
    format!("p{i:02}")
}

/// Writes `p00.wav`… into `dir`.
pub fn write_set(dir: &Path, n: usize, kind: ClipKind, seed: u64) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let clip = make_clip(kind, seed, i, RATE, &clip_id(i));
        write_wav_file(&clip, &dir.join(format!("{}.wav", clip_id(i)))).unwrap();
    }
    dir.to_owned()
}

pub fn copy_dir(from: &Path, to: &Path) -> PathBuf {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, to.join(p.file_name().unwrap())).unwrap();
    }
    to.to_owned()
}

pub struct ObjectiveFixture {
    pub dir: tempfile::TempDir,
    pub reference: PathBuf,
    /// Byte copy of the reference.
    pub copy: PathBuf,
    /// Same distribution as the reference, different draws.
    pub similar: PathBuf,
    pub noise: PathBuf,
}

pub const N_CLIPS: usize = 16;

impl ObjectiveFixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let reference = write_set(&dir.path().join("reference"), N_CLIPS, ClipKind::Tone, 1);
        let copy = copy_dir(&reference, &dir.path().join("sys-copy"));
        let similar = write_set(&dir.path().join("sys-similar"), N_CLIPS, ClipKind::Tone, 2);
        let noise = write_set(&dir.path().join("sys-noise"), N_CLIPS, ClipKind::Noise, 3);
        Self {
            dir,
            reference,
            copy,
            similar,
            noise,
        }
    }

    pub fn systems_arg(&self) -> String {
        [&self.noise, &self.copy, &self.similar]
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn sseval(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_sseval")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn manifest_entry(id: &str, fg: ForegroundCategory, bg: BackgroundCategory, split: Split) -> ManifestEntry {
    let bg_text = if bg == BackgroundCategory::None { String::new() } else { format!("{bg} ambience") };
    ManifestEntry {
        prompt: PromptSpec {
            prompt_id: id.into(),
            foreground_text: format!("{fg} sound"),
            foreground_category: fg,
            background_category: bg,
            background_text: bg_text,
        },
        audio_path: format!("{id}.wav"),
        split,
    }
}

/// 60 dev / 250 eval prompts with every background slot filled by the least-used admissible foreground.
pub fn balanced_manifest() -> DatasetManifest {
    use BackgroundCategory as B;
    let slots = [
        (Split::Dev, B::Traffic, 20),
        (Split::Eval, B::Traffic, 42),
        (Split::Dev, B::Crowd, 20),
        (Split::Dev, B::Water, 20),
        (Split::Eval, B::Crowd, 42),
        (Split::Eval, B::Water, 42),
        (Split::Eval, B::Birds, 62),
        (Split::Eval, B::None, 62),
    ];
    let mut fg_count: BTreeMap<ForegroundCategory, usize> = BTreeMap::new();
    let mut entries = Vec::new();
    for (split, bg, n) in slots {
        for _ in 0..n {
            let fg = *ForegroundCategory::ALL
                .iter()
                .filter(|&&f| pairing_allowed(f, bg))
                .min_by_key(|&&f| fg_count.get(&f).copied().unwrap_or(0))
                .unwrap();
            *fg_count.entry(fg).or_default() += 1;
            entries.push(manifest_entry(&format!("{split}{:03}", entries.len()), fg, bg, split));
        }
    }
    DatasetManifest::new(entries)
}

/// `p00`… with the first half in dev (crowd) and the rest in eval (birds).
pub fn split_manifest(n: usize) -> DatasetManifest {
    DatasetManifest::new(
        (0..n)
            .map(|i| {
                let (bg, split) = if i < n / 2 {
                    (BackgroundCategory::Crowd, Split::Dev)
                } else {
                    (BackgroundCategory::Birds, Split::Eval)
                };
                manifest_entry(&clip_id(i), ForegroundCategory::ALL[i % 6], bg, split)
            })
            .collect(),
    )
}

pub fn save_manifest(m: &DatasetManifest, path: &Path) -> PathBuf {
    write_manifest(m, std::fs::File::create(path).unwrap()).unwrap();
    path.to_owned()
}

pub fn save_ratings(records: &[RatingRecord], path: &Path) -> PathBuf {
    write_ratings(records, std::fs::File::create(path).unwrap()).unwrap();
    path.to_owned()
}

pub fn record(rater: &str, affiliation: &str, system: &str, prompt: &str, fg: f64, bg: Option<f64>, q: f64) -> RatingRecord {
    RatingRecord {
        rater_id: rater.into(),
        rater_affiliation: affiliation.into(),
        system_id: system.into(),
        prompt_id: prompt.into(),
        foreground_fit: fg,
        background_fit: bg,
        quality: q,
    }
}

// Listening-test study: 6 systems × 24 prompts plus 4 reference-only prompts.

pub const SYSTEMS: [&str; 6] = ["sys-a1", "sys-b2", "sys-c3", "sys-d4", "sys-base", "sys-ref"];
pub const TOKEN: &str = "operator-token";

fn fg_text(fg: ForegroundCategory) -> &'static str {
    match fg {
        ForegroundCategory::Animal => "a dog barking",
        ForegroundCategory::Vehicle => "a car passing",
        ForegroundCategory::Human => "a person laughing",
        ForegroundCategory::Alarm => "a smoke alarm beeping",
        ForegroundCategory::Tool => "a hammer striking",
        ForegroundCategory::Entrance => "a door slamming",
    }
}

fn bg_text(bg: BackgroundCategory) -> &'static str {
    match bg {
        BackgroundCategory::Crowd => "people chattering",
        BackgroundCategory::Traffic => "cars driving by",
        BackgroundCategory::Water => "a stream flowing",
        BackgroundCategory::Birds => "birds singing",
        BackgroundCategory::None => "",
    }
}

fn study_entry(id: &str, fg: ForegroundCategory, bg: BackgroundCategory) -> ManifestEntry {
    ManifestEntry {
        prompt: PromptSpec {
            prompt_id: id.into(),
            foreground_text: fg_text(fg).into(),
            foreground_category: fg,
            background_category: bg,
            background_text: bg_text(bg).into(),
        },
        audio_path: format!("{id}.wav"),
        split: Split::Eval,
    }
}

pub fn study_manifest() -> DatasetManifest {
    let mut entries = Vec::new();
    let mut k = 0;
    for (f, &fg) in ForegroundCategory::ALL.iter().enumerate() {
        for j in 0..4 {
            let mut bg = BackgroundCategory::ALL[(f * 4 + j) % 5];
            if fg == ForegroundCategory::Vehicle && bg == BackgroundCategory::Traffic {
                bg = BackgroundCategory::None;
            }
            entries.push(study_entry(&format!("p{k:02}"), fg, bg));
            k += 1;
        }
    }
    for (j, &fg) in ForegroundCategory::ALL[..4].iter().enumerate() {
        entries.push(study_entry(&format!("x{j}"), fg, BackgroundCategory::Water));
    }
    DatasetManifest::new(entries)
}

pub fn write_study(root: &Path) -> (PathBuf, Vec<SystemSource>) {
    let manifest = study_manifest();
    let manifest_path = save_manifest(&manifest, &root.join("manifest.csv"));
    let mut systems = Vec::new();
    for (si, sys) in SYSTEMS.iter().enumerate() {
        let dir = root.join(sys);
        std::fs::create_dir_all(&dir).unwrap();
        for (pi, e) in manifest.entries.iter().enumerate() {
            if e.prompt.prompt_id.starts_with('x') && *sys != "sys-ref" {
                continue;
            }
            let samples = (0..1600)
                .map(|n| 0.1 * ((n * (si + 1) + pi) as f32 * 0.01).sin())
                .collect();
            let clip = AudioClip::new(samples, RATE, "c").unwrap();
            write_wav_file(&clip, &dir.join(format!("{}.wav", e.prompt.prompt_id))).unwrap();
        }
        systems.push(SystemSource {
            id: (*sys).into(),
            dir,
        });
    }
    (manifest_path, systems)
}

pub struct ListenFixture {
    pub dir: tempfile::TempDir,
    pub manifest: PathBuf,
    pub log: PathBuf,
    pub study: Study,
}

impl ListenFixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let (manifest, systems) = write_study(dir.path());
        let study = Study::from_system_dirs(&study_manifest(), &systems, 7).unwrap();
        let log = dir.path().join("ratings.log");
        Self {
            dir,
            manifest,
            log,
            study,
        }
    }

    pub fn service(&self) -> Arc<Service> {
        Arc::new(Service::open(self.study.clone(), &self.log, TOKEN, "secret").unwrap())
    }

    pub fn app(&self) -> Router {
        router(self.service())
    }
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: String,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>, auth: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(a) = auth {
        req = req.header("authorization", a);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_owned())
        .unwrap_or_default();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply {
        status,
        content_type,
        body,
    }
}

pub fn scores_for(payload: &Value, value: u8) -> Value {
    let mut m = serde_json::Map::new();
    for k in payload["scores_required"].as_array().unwrap() {
        m.insert(k.as_str().unwrap().into(), value.into());
    }
    Value::Object(m)
}
