use std::io::Read;
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

use wait_timeout::ChildExt;

use super::{read_embeddings_file, EmbedError, EmbeddingBackend, EmbeddingBackendId};
use crate::audio::{write_wav_file, AudioClip};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

const IN_PLACEHOLDER: &str = "{in}";
const OUT_PLACEHOLDER: &str = "{out}";

/// Runs an out-of-process embedding model once per batch.
///
/// The template is split with POSIX shell quoting rules and must contain
/// `{in}` (a file listing one WAV path per line) and `{out}` (where the
/// process writes an `AEMB` file). Invocations are serialized.
#[derive(Debug)]
pub struct ExternalRunner {
    id: EmbeddingBackendId,
    argv: Vec<String>,
    timeout: Duration,
    lock: Mutex<()>,
}

pub fn external_runner_backend(
    command_template: &str,
    id: EmbeddingBackendId,
    timeout: Duration,
) -> Result<ExternalRunner, EmbedError> {
    let argv = shell_words::split(command_template).map_err(|_| EmbedError::BadTemplate)?;
    let has = |p: &str| argv.iter().any(|a| a.contains(p));
    if argv.is_empty() || !has(IN_PLACEHOLDER) || !has(OUT_PLACEHOLDER) {
        return Err(EmbedError::BadTemplate);
    }
    Ok(ExternalRunner {
        id,
        argv,
        timeout,
        lock: Mutex::new(()),
    })
}

impl EmbeddingBackend for ExternalRunner {
    fn id(&self) -> &EmbeddingBackendId {
        &self.id
    }

    fn embed_batch(&self, clips: &[AudioClip]) -> Result<Vec<Vec<f32>>, EmbedError> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let dir = tempfile::tempdir().map_err(|source| EmbedError::Io {
            path: std::env::temp_dir(),
            source,
        })?;
        let mut list = String::new();
        for (i, clip) in clips.iter().enumerate() {
            let path = dir.path().join(format!("clip_{i:05}.wav"));
            write_wav_file(clip, &path)?;
            list.push_str(&path.to_string_lossy());
            list.push('\n');
        }
        let list_path = dir.path().join("inputs.txt");
        std::fs::write(&list_path, list).map_err(|source| EmbedError::Io {
            path: list_path.clone(),
            source,
        })?;
        let out_path = dir.path().join("embeddings.aemb");
        let (in_s, out_s) = (list_path.to_string_lossy(), out_path.to_string_lossy());
        let args: Vec<String> = self
            .argv
            .iter()
            .map(|a| a.replace(IN_PLACEHOLDER, &in_s).replace(OUT_PLACEHOLDER, &out_s))
            .collect();

        let mut child = Command::new(&args[0])
            .args(&args[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| EmbedError::BackendUnavailable(format!("{}: {e}", args[0])))?;
        let status = match child.wait_timeout(self.timeout).map_err(|source| EmbedError::Io {
            path: args[0].clone().into(),
            source,
        })? {
            Some(s) => s,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(EmbedError::Timeout(self.timeout));
            }
        };
        if !status.success() {
            let mut stderr = String::new();
            if let Some(mut e) = child.stderr.take() {
                let _ = e.read_to_string(&mut stderr);
            }
            return Err(EmbedError::ProcessFailed {
                status: status.to_string(),
                stderr: stderr.trim().to_owned(),
            });
        }

        let set = read_embeddings_file(&out_path)?;
        if set.dim() != self.id.dim {
            return Err(EmbedError::DimensionMismatch {
                expected: self.id.dim,
                actual: set.dim(),
            });
        }
        if set.len() != clips.len() {
            return Err(EmbedError::RowCountMismatch {
                expected: clips.len(),
                actual: set.len(),
            });
        }
        Ok(set.rows().map(<[f32]>::to_vec).collect())
    }
}
