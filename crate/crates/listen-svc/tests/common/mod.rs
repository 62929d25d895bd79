#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use sseval_core::audio::write_wav_file;
use sseval_core::protocol::{write_manifest, ManifestEntry, Split};
use sseval_core::{AudioClip, BackgroundCategory, DatasetManifest, ForegroundCategory, PromptSpec};
use sseval_listen::{router, Service, Study, SystemSource};
use tower::ServiceExt;

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

/// 4 prompts per foreground category spanning all backgrounds, plus 4 extras.
pub fn manifest() -> DatasetManifest {
    let mut entries = Vec::new();
    let mut k = 0;
    for (f, &fg) in ForegroundCategory::ALL.iter().enumerate() {
        for j in 0..4 {
            let mut bg = BackgroundCategory::ALL[(f * 4 + j) % 5];
            if fg == ForegroundCategory::Vehicle && bg == BackgroundCategory::Traffic {
                bg = BackgroundCategory::None;
            }
            entries.push(entry(&format!("p{k:02}"), fg, bg));
            k += 1;
        }
    }
    for (j, &fg) in ForegroundCategory::ALL[..4].iter().enumerate() {
        entries.push(entry(&format!("x{j}"), fg, BackgroundCategory::Water));
    }
    DatasetManifest::new(entries)
}

fn entry(id: &str, fg: ForegroundCategory, bg: BackgroundCategory) -> ManifestEntry {
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

/// Writes the manifest and audio for 6 systems × 24 prompts, with the reference
/// system also covering the 4 extra prompts: 148 clips.
pub fn write_study(root: &Path) -> (PathBuf, Vec<SystemSource>) {
    let manifest = manifest();
    let manifest_path = root.join("manifest.csv");
    write_manifest(&manifest, std::fs::File::create(&manifest_path).unwrap()).unwrap();
    let mut systems = Vec::new();
    for (si, sys) in SYSTEMS.iter().enumerate() {
        let dir = root.join(sys);
        std::fs::create_dir_all(&dir).unwrap();
        for (pi, e) in manifest.entries.iter().enumerate() {
            let extra = e.prompt.prompt_id.starts_with('x');
            if extra && *sys != "sys-ref" {
                continue;
            }
            let samples = (0..1600)
                .map(|n| 0.1 * ((n * (si + 1) + pi) as f32 * 0.01).sin())
                .collect();
            let clip = AudioClip::new(samples, 32_000, "c").unwrap();
            write_wav_file(&clip, &dir.join(format!("{}.wav", e.prompt.prompt_id))).unwrap();
        }
        systems.push(SystemSource {
            id: (*sys).into(),
            dir,
        });
    }
    (manifest_path, systems)
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub log: PathBuf,
    pub study: Study,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let (_, systems) = write_study(dir.path());
        let study = Study::from_system_dirs(&manifest(), &systems, 7).unwrap();
        let log = dir.path().join("ratings.log");
        Self { dir, log, study }
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

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
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

/// Scores a trial payload asks for, filled with `value`.
pub fn scores_for(payload: &Value, value: u8) -> Value {
    let mut m = serde_json::Map::new();
    for k in payload["scores_required"].as_array().unwrap() {
        m.insert(k.as_str().unwrap().into(), value.into());
    }
    Value::Object(m)
}
