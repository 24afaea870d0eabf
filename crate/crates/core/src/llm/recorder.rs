//! Records the responses of another backend as a replayable script.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use super::{Backend, CallCounter, CallInfo, ChatTurn, Completion, EpisodeInfo, Fingerprint, LlmError, ScriptEntry, Session};

/// Proxies `inner` and writes every response to `path` when the run
/// finishes, sorted by fingerprint so that parallel runs record identical
/// files.
pub struct RecorderBackend {
    inner: Box<dyn Backend>,
    path: PathBuf,
    recorded: Mutex<BTreeMap<Fingerprint, String>>,
}

impl RecorderBackend {
    pub fn new(inner: Box<dyn Backend>, path: impl Into<PathBuf>) -> Self {
        Self { inner, path: path.into(), recorded: Mutex::new(BTreeMap::new()) }
    }

    pub fn entries(&self) -> Vec<ScriptEntry> {
        self.recorded
            .lock()
            .expect("recorder lock")
            .iter()
            .map(|(fp, r)| ScriptEntry { fingerprint: fp.to_string(), response: r.clone() })
            .collect()
    }
}

struct RecordingSession<'a> {
    inner: Box<dyn Session + 'a>,
    episode: EpisodeInfo,
    counter: CallCounter,
    sink: &'a Mutex<BTreeMap<Fingerprint, String>>,
}

impl Backend for RecorderBackend {
    fn open(&self, episode: &EpisodeInfo) -> Box<dyn Session + '_> {
        Box::new(RecordingSession {
            inner: self.inner.open(episode),
            episode: episode.clone(),
            counter: CallCounter::default(),
            sink: &self.recorded,
        })
    }

    fn finish(&self) -> Result<(), LlmError> {
        self.inner.finish()?;
        if let Some(dir) = self.path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut out = std::io::BufWriter::new(std::fs::File::create(&self.path)?);
        for e in self.entries() {
            let line = serde_json::to_string(&e).map_err(|err| LlmError::BadScript(err.to_string()))?;
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }
}

impl Session for RecordingSession<'_> {
    fn complete(&mut self, turns: &[ChatTurn], call: CallInfo<'_>) -> Result<Completion, LlmError> {
        let fp = self.counter.next(&self.episode, call.phase);
        let c = self.inner.complete(turns, call)?;
        self.sink.lock().expect("recorder lock").insert(fp, c.text.clone());
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{Phase, ScriptedBackend};

    #[test]
    fn records_then_replays() {
        let source = ScriptedBackend::from_jsonl(
            "{\"fingerprint\":\"*/*/react/*\",\"response\":\"Action: a\"}\n{\"fingerprint\":\"*/*/react/*\",\"response\":\"Action: b\"}\n",
        )
        .unwrap();
        let dir = std::env::temp_dir().join(format!("sclplan-rec-{}", std::process::id()));
        let path = dir.join("script.jsonl");
        let rec = RecorderBackend::new(Box::new(source), &path);
        let ep = EpisodeInfo { suite: "s".into(), task_id: "t".into(), seed: 0, sample: 0 };
        let turns = [ChatTurn::user("x")];
        let call = CallInfo { phase: Phase::React, attempt: 0, history: &[] };
        let first: Vec<String> = {
            let mut s = rec.open(&ep);
            (0..2).map(|_| s.complete(&turns, call).unwrap().text).collect()
        };
        rec.finish().unwrap();
        let replay = ScriptedBackend::load(&path).unwrap();
        let mut s = replay.open(&ep);
        let again: Vec<String> = (0..2).map(|_| s.complete(&turns, call).unwrap().text).collect();
        assert_eq!(first, again);
        std::fs::remove_dir_all(dir).ok();
    }
}
