//! Replay of recorded responses.
//!
//! A script is line-delimited JSON, one `{"fingerprint": ..., "response": ...}`
//! record per line. A fingerprint is `task/sample/phase/index` (see
//! [`Fingerprint`]); any of the four components may be `*`. Exact entries are
//! looked up first, then wildcard entries in file order. Within one episode
//! each entry answers at most once.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Backend, CallCounter, CallInfo, ChatTurn, Completion, CompletionUsage, EpisodeInfo, Fingerprint, LlmError, Session};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub fingerprint: String,
    pub response: String,
}

#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    exact: HashMap<String, usize>,
    wildcards: Vec<(Vec<String>, usize)>,
    entries: Vec<ScriptEntry>,
}

impl ScriptedBackend {
    pub fn from_entries(entries: Vec<ScriptEntry>) -> Result<Self, LlmError> {
        let mut exact = HashMap::new();
        let mut wildcards = Vec::new();
        for (i, e) in entries.iter().enumerate() {
            let parts: Vec<String> = e.fingerprint.split('/').map(str::to_string).collect();
            if parts.len() != 4 {
                return Err(LlmError::BadScript(format!("fingerprint `{}` needs four components", e.fingerprint)));
            }
            if parts.iter().any(|p| p == "*") {
                wildcards.push((parts, i));
            } else if exact.insert(e.fingerprint.clone(), i).is_some() {
                return Err(LlmError::BadScript(format!("duplicate fingerprint `{}`", e.fingerprint)));
            }
        }
        Ok(Self { exact, wildcards, entries })
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LlmError> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: ScriptEntry =
                serde_json::from_str(line).map_err(|err| LlmError::BadScript(format!("line {}: {err}", n + 1)))?;
            entries.push(e);
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn find(&self, fp: &Fingerprint, used: &BTreeSet<usize>) -> Option<usize> {
        let key = fp.to_string();
        if let Some(&i) = self.exact.get(&key) {
            if !used.contains(&i) {
                return Some(i);
            }
        }
        let parts: Vec<String> = key.split('/').map(str::to_string).collect();
        self.wildcards
            .iter()
            .find(|(pat, i)| !used.contains(i) && pat.iter().zip(&parts).all(|(p, v)| p == "*" || p == v))
            .map(|(_, i)| *i)
    }
}

struct ScriptedSession<'a> {
    backend: &'a ScriptedBackend,
    episode: EpisodeInfo,
    counter: CallCounter,
    used: BTreeSet<usize>,
}

impl Backend for ScriptedBackend {
    fn open(&self, episode: &EpisodeInfo) -> Box<dyn Session + '_> {
        Box::new(ScriptedSession { backend: self, episode: episode.clone(), counter: CallCounter::default(), used: BTreeSet::new() })
    }
}

impl Session for ScriptedSession<'_> {
    fn complete(&mut self, turns: &[ChatTurn], call: CallInfo<'_>) -> Result<Completion, LlmError> {
        if turns.is_empty() {
            return Err(LlmError::EmptyConversation);
        }
        let fp = self.counter.next(&self.episode, call.phase);
        let i = self.backend.find(&fp, &self.used).ok_or_else(|| LlmError::ScriptExhausted(fp.to_string()))?;
        self.used.insert(i);
        let text = self.backend.entries[i].response.clone();
        let usage = CompletionUsage::estimate(turns, &text);
        Ok(Completion { text, usage })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Phase;

    fn episode() -> EpisodeInfo {
        EpisodeInfo { suite: "s".into(), task_id: "t1".into(), seed: 0, sample: 0 }
    }

    fn call() -> CallInfo<'static> {
        CallInfo { phase: Phase::React, attempt: 0, history: &[] }
    }

    #[test]
    fn single_entry_then_exhausted() {
        let b = ScriptedBackend::from_entries(vec![ScriptEntry { fingerprint: "t1/0/react/0".into(), response: "Action: finish".into() }])
            .unwrap();
        let mut s = b.open(&episode());
        let turns = [ChatTurn::user("hi")];
        assert_eq!(s.complete(&turns, call()).unwrap().text, "Action: finish");
        assert!(matches!(s.complete(&turns, call()), Err(LlmError::ScriptExhausted(f)) if f == "t1/0/react/1"));
        // a fresh episode starts over
        let mut again = b.open(&episode());
        assert!(again.complete(&turns, call()).is_ok());
    }

    #[test]
    fn wildcards_answer_once_each_in_order() {
        let text = "{\"fingerprint\":\"*/*/react/*\",\"response\":\"a\"}\n{\"fingerprint\":\"t1/*/react/*\",\"response\":\"b\"}\n";
        let b = ScriptedBackend::from_jsonl(text).unwrap();
        let mut s = b.open(&episode());
        let turns = [ChatTurn::user("hi")];
        assert_eq!(s.complete(&turns, call()).unwrap().text, "a");
        assert_eq!(s.complete(&turns, call()).unwrap().text, "b");
        assert!(s.complete(&turns, call()).is_err());
    }

    #[test]
    fn empty_turns_rejected() {
        let b = ScriptedBackend::from_entries(vec![]).unwrap();
        assert!(matches!(b.open(&episode()).complete(&[], call()), Err(LlmError::EmptyConversation)));
    }

    #[test]
    fn malformed_scripts_rejected() {
        assert!(ScriptedBackend::from_jsonl("{\"fingerprint\":\"a/b\",\"response\":\"x\"}").is_err());
        assert!(ScriptedBackend::from_jsonl("not json").is_err());
    }
}
