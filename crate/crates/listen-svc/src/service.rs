use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sseval_core::audio::{decode_wav_file, encode_wav};
use sseval_core::protocol::render_prompt;
use sseval_core::ratings::write_ratings;
use sseval_core::RatingRecord;

use crate::error::{ScoreProblem, ServiceError};
use crate::plan::{build_plan, Phase, PlannedTrial, TestPlan};
use crate::store::{LogRecord, LogRecovery, RatingLog};
use crate::study::Study;
use crate::ScoreName;

pub const SCORE_MAX: i64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionInfo {
    pub sid: String,
    pub n_trials: usize,
    pub cursor: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionInfo {
    pub index: usize,
    pub count: usize,
}

/// What a rater sees for one trial. Never carries system identity; the quality
/// phase also omits the prompt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialPayload {
    pub index: usize,
    pub n_trials: usize,
    pub phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionInfo>,
    pub audio_url: String,
    pub scores_required: Vec<ScoreName>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub rater_id: String,
    #[serde(default = "organizer")]
    pub affiliation: String,
}

fn organizer() -> String {
    "organizer".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingRequest {
    pub scores: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub played: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ack {
    pub accepted: bool,
    pub index: usize,
    pub cursor: usize,
    pub complete: bool,
}

#[derive(Debug, Clone)]
struct Submission {
    scores: BTreeMap<ScoreName, u8>,
}

#[derive(Debug)]
struct Session {
    sid: String,
    affiliation: String,
    plan: TestPlan,
    submissions: Vec<Submission>,
}

impl Session {
    fn cursor(&self) -> usize {
        self.submissions.len()
    }

    fn complete(&self) -> bool {
        self.cursor() == self.plan.len()
    }

    fn info(&self) -> SessionInfo {
        SessionInfo {
            sid: self.sid.clone(),
            n_trials: self.plan.len(),
            cursor: self.cursor(),
            complete: self.complete(),
        }
    }

    fn current(&self, index: usize) -> Result<&PlannedTrial, ServiceError> {
        let trial = self.plan.trials.get(index).ok_or(ServiceError::UnknownTrial(index))?;
        if self.complete() {
            return Err(ServiceError::SessionComplete);
        }
        if index != self.cursor() {
            return Err(ServiceError::OutOfOrder {
                requested: index,
                cursor: self.cursor(),
            });
        }
        Ok(trial)
    }
}

#[derive(Debug, Default)]
struct Sessions {
    by_sid: BTreeMap<String, Arc<Mutex<Session>>>,
    by_rater: BTreeMap<String, String>,
}

/// Session bookkeeping on top of the rating log. All state changes are
/// logged and fsynced before they become visible.
#[derive(Debug)]
pub struct Service {
    study: Study,
    export_token: String,
    session_secret: String,
    sessions: RwLock<Sessions>,
    log: Mutex<RatingLog>,
    recovery: LogRecovery,
}

impl Service {
    /// Opens the log at `log_path` and replays it.
    pub fn open(study: Study, log_path: &Path, export_token: &str, session_secret: &str) -> Result<Self, ServiceError> {
        let (log, records, recovery) = RatingLog::open(log_path)?;
        let service = Self {
            study,
            export_token: export_token.to_owned(),
            session_secret: session_secret.to_owned(),
            sessions: RwLock::new(Sessions::default()),
            log: Mutex::new(log),
            recovery,
        };
        {
            let mut sessions = service.sessions.write().expect("sessions lock");
            for (i, rec) in records.into_iter().enumerate() {
                service
                    .replay(&mut sessions, rec)
                    .map_err(|e| ServiceError::CorruptLog {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
            }
        }
        Ok(service)
    }

    fn replay(&self, sessions: &mut Sessions, rec: LogRecord) -> Result<(), ServiceError> {
        match rec {
            LogRecord::Session {
                sid,
                rater_id,
                affiliation,
                plan_digest,
            } => {
                if sessions.by_rater.contains_key(&rater_id) || sessions.by_sid.contains_key(&sid) {
                    return Err(ServiceError::SessionExists(rater_id));
                }
                let plan = build_plan(&self.study, &rater_id);
                if plan.digest() != plan_digest {
                    return Err(ServiceError::Config(format!(
                        "schedule for rater {rater_id} no longer matches the logged one; the study changed"
                    )));
                }
                sessions.by_rater.insert(rater_id, sid.clone());
                sessions.by_sid.insert(
                    sid.clone(),
                    Arc::new(Mutex::new(Session {
                        sid,
                        affiliation,
                        plan,
                        submissions: Vec::new(),
                    })),
                );
            }
            LogRecord::Rating { sid, index, scores, .. } => {
                let session = sessions.by_sid.get(&sid).ok_or(ServiceError::UnknownSession)?;
                let mut s = session.lock().expect("session lock");
                let trial = s.current(index)?;
                let widened = scores.iter().map(|(&k, &v)| (k, i64::from(v))).collect();
                check_scores(&self.required_scores(trial), &widened).map_err(ServiceError::InvalidScores)?;
                s.submissions.push(Submission { scores });
            }
        }
        Ok(())
    }

    pub fn recovery(&self) -> &LogRecovery {
        &self.recovery
    }

    pub fn study(&self) -> &Study {
        &self.study
    }

    fn session_id(&self, rater_id: &str) -> String {
        let mut h = Sha256::new();
        for part in [self.session_secret.as_bytes(), &self.study.seed().to_le_bytes(), rater_id.as_bytes()] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part);
        }
        hex::encode(&h.finalize()[..16])
    }

    fn session(&self, sid: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .by_sid
            .get(sid)
            .cloned()
            .ok_or(ServiceError::UnknownSession)
    }

    fn append(&self, rec: &LogRecord) -> Result<(), ServiceError> {
        self.log.lock().expect("log lock").append(rec)
    }

    pub fn create_session(&self, req: &CreateSession) -> Result<SessionInfo, ServiceError> {
        let rater_id = req.rater_id.trim();
        if rater_id.is_empty() {
            return Err(ServiceError::BadRequest("rater_id must not be empty".into()));
        }
        let mut sessions = self.sessions.write().expect("sessions lock");
        if sessions.by_rater.contains_key(rater_id) {
            return Err(ServiceError::SessionExists(rater_id.to_owned()));
        }
        let plan = build_plan(&self.study, rater_id);
        let sid = self.session_id(rater_id);
        self.append(&LogRecord::Session {
            sid: sid.clone(),
            rater_id: rater_id.to_owned(),
            affiliation: req.affiliation.clone(),
            plan_digest: plan.digest(),
        })?;
        let session = Session {
            sid: sid.clone(),
            affiliation: req.affiliation.clone(),
            plan,
            submissions: Vec::new(),
        };
        let info = session.info();
        sessions.by_rater.insert(rater_id.to_owned(), sid.clone());
        sessions.by_sid.insert(sid, Arc::new(Mutex::new(session)));
        Ok(info)
    }

    pub fn session_info(&self, sid: &str) -> Result<SessionInfo, ServiceError> {
        Ok(self.session(sid)?.lock().expect("session lock").info())
    }

    fn required_scores(&self, trial: &PlannedTrial) -> Vec<ScoreName> {
        match trial.phase {
            Phase::Quality => vec![ScoreName::Quality],
            Phase::Fit => {
                let has_bg = self.study.prompt(&trial.key.prompt_id).is_some_and(|p| p.has_background());
                if has_bg {
                    vec![ScoreName::Foreground, ScoreName::Background]
                } else {
                    vec![ScoreName::Foreground]
                }
            }
        }
    }

    pub fn trial(&self, sid: &str, index: usize) -> Result<TrialPayload, ServiceError> {
        let session = self.session(sid)?;
        let s = session.lock().expect("session lock");
        let trial = s.current(index)?;
        let (prompt, section) = match trial.phase {
            Phase::Fit => {
                let spec = self
                    .study
                    .prompt(&trial.key.prompt_id)
                    .ok_or(ServiceError::UnknownTrial(index))?;
                let section = s.plan.section_of(index).map(|i| SectionInfo {
                    index: i,
                    count: s.plan.sections.len(),
                });
                (Some(render_prompt(spec)?), section)
            }
            Phase::Quality => (None, None),
        };
        Ok(TrialPayload {
            index,
            n_trials: s.plan.len(),
            phase: trial.phase,
            prompt,
            section,
            audio_url: format!("/session/{sid}/trial/{index}/audio"),
            scores_required: self.required_scores(trial),
        })
    }

    /// Current trial's audio, decoded and re-encoded so no source metadata reaches the client.
    pub fn trial_audio(&self, sid: &str, index: usize) -> Result<Vec<u8>, ServiceError> {
        let path = {
            let session = self.session(sid)?;
            let s = session.lock().expect("session lock");
            let trial = s.current(index)?;
            self.study
                .audio_path(&trial.key)
                .cloned()
                .ok_or(ServiceError::UnknownTrial(index))?
        };
        let clip = decode_wav_file(&path)?.with_source_id("trial");
        Ok(encode_wav(&clip))
    }

    pub fn submit(&self, sid: &str, index: usize, req: &RatingRequest) -> Result<Ack, ServiceError> {
        let session = self.session(sid)?;
        let mut s = session.lock().expect("session lock");
        if index >= s.plan.len() {
            return Err(ServiceError::UnknownTrial(index));
        }
        if index < s.cursor() {
            return Err(ServiceError::Duplicate(index));
        }
        let trial = s.current(index)?;
        let parsed = parse_scores(&req.scores).map_err(ServiceError::InvalidScores)?;
        check_scores(&self.required_scores(trial), &parsed).map_err(ServiceError::InvalidScores)?;
        let scores: BTreeMap<ScoreName, u8> = parsed.into_iter().map(|(k, v)| (k, v as u8)).collect();
        self.append(&LogRecord::Rating {
            sid: sid.to_owned(),
            index,
            scores: scores.clone(),
            played: req.played,
        })?;
        s.submissions.push(Submission { scores });
        Ok(Ack {
            accepted: true,
            index,
            cursor: s.cursor(),
            complete: s.complete(),
        })
    }

    pub fn authorize_export(&self, authorization: Option<&str>) -> Result<(), ServiceError> {
        let presented = authorization
            .and_then(|h| h.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or(ServiceError::Unauthorized)?;
        if Sha256::digest(presented.as_bytes()) == Sha256::digest(self.export_token.as_bytes()) {
            Ok(())
        } else {
            Err(ServiceError::Unauthorized)
        }
    }

    /// Records for every (system, prompt) a rater scored in both phases,
    /// sorted by rater, system, prompt. Incomplete sessions only with `include_partial`.
    pub fn export_records(&self, include_partial: bool) -> Vec<RatingRecord> {
        let sessions = self.sessions.read().expect("sessions lock");
        let mut out = Vec::new();
        for (rater_id, sid) in &sessions.by_rater {
            let s = sessions.by_sid[sid].lock().expect("session lock");
            if !include_partial && !s.complete() {
                continue;
            }
            for (i, sub) in s.submissions.iter().enumerate() {
                let trial = &s.plan.trials[i];
                if trial.phase != Phase::Fit {
                    continue;
                }
                let Some(q) = s.plan.counterpart(i).and_then(|j| s.submissions.get(j)) else {
                    continue;
                };
                out.push(RatingRecord {
                    rater_id: rater_id.clone(),
                    rater_affiliation: s.affiliation.clone(),
                    system_id: trial.key.system_id.clone(),
                    prompt_id: trial.key.prompt_id.clone(),
                    foreground_fit: f64::from(sub.scores[&ScoreName::Foreground]),
                    background_fit: sub.scores.get(&ScoreName::Background).map(|&v| f64::from(v)),
                    quality: f64::from(q.scores[&ScoreName::Quality]),
                });
            }
        }
        out.sort_by(|a, b| {
            (&a.rater_id, &a.system_id, &a.prompt_id).cmp(&(&b.rater_id, &b.system_id, &b.prompt_id))
        });
        out
    }

    pub fn export_csv(&self, include_partial: bool) -> Result<String, ServiceError> {
        let mut buf = Vec::new();
        write_ratings(&self.export_records(include_partial), &mut buf)?;
        String::from_utf8(buf).map_err(|e| ServiceError::Storage(std::io::Error::other(e)))
    }
}

fn parse_scores(raw: &serde_json::Map<String, serde_json::Value>) -> Result<BTreeMap<ScoreName, i64>, ScoreProblem> {
    let mut out = BTreeMap::new();
    for (k, v) in raw {
        let name: ScoreName = k.parse().map_err(|_| ScoreProblem::Extra(k.clone()))?;
        let value = v.as_i64().ok_or_else(|| ScoreProblem::NotInteger(k.clone()))?;
        out.insert(name, value);
    }
    Ok(out)
}

fn check_scores(required: &[ScoreName], scores: &BTreeMap<ScoreName, i64>) -> Result<(), ScoreProblem> {
    for (&k, &v) in scores {
        if !required.contains(&k) {
            return Err(ScoreProblem::Extra(k.as_str().to_owned()));
        }
        if !(0..=SCORE_MAX).contains(&v) {
            return Err(ScoreProblem::OutOfRange(k.as_str().to_owned(), v));
        }
    }
    match required.iter().find(|k| !scores.contains_key(k)) {
        Some(k) => Err(ScoreProblem::Missing(k.as_str())),
        None => Ok(()),
    }
}
