//! HTTP chat-completion backend.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Serialize;

use super::{Backend, CallInfo, ChatTurn, Completion, CompletionUsage, EpisodeInfo, LlmError, Session};

#[derive(Debug, Clone)]
pub struct LiveConfig {
    /// Base URL; requests go to `{api_base}/chat/completions`.
    pub api_base: String,
    pub api_key: Option<String>,
    pub model: String,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

impl LiveConfig {
    /// Reads `LLM_API_BASE`, `LLM_API_KEY` and `LLM_MODEL`.
    pub fn from_env() -> Result<Self, LlmError> {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        let api_base = var("LLM_API_BASE").ok_or_else(|| LlmError::Transport("LLM_API_BASE is not set".into()))?;
        let model = var("LLM_MODEL").ok_or_else(|| LlmError::Transport("LLM_MODEL is not set".into()))?;
        Ok(Self { api_base, api_key: var("LLM_API_KEY"), model, max_in_flight: 4, timeout: Duration::from_secs(120) })
    }
}

pub struct LiveBackend {
    config: LiveConfig,
    client: reqwest::blocking::Client,
    in_flight: Mutex<usize>,
    slot_free: Condvar,
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(Self { config, client, in_flight: Mutex::new(0), slot_free: Condvar::new() })
    }

    fn acquire(&self) {
        let mut n = self.in_flight.lock().expect("in-flight lock");
        while *n >= self.config.max_in_flight.max(1) {
            n = self.slot_free.wait(n).expect("in-flight lock");
        }
        *n += 1;
    }

    fn release(&self) {
        *self.in_flight.lock().expect("in-flight lock") -= 1;
        self.slot_free.notify_one();
    }

    fn request(&self, turns: &[ChatTurn]) -> Result<Completion, LlmError> {
        #[derive(Serialize)]
        struct Body<'a> {
            model: &'a str,
            messages: &'a [ChatTurn],
            temperature: f64,
        }
        let url = format!("{}/chat/completions", self.config.api_base.trim_end_matches('/'));
        let mut req = self.client.post(url).json(&Body { model: &self.config.model, messages: turns, temperature: 0.0 });
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = resp.status();
        let body: serde_json::Value = resp.json().map_err(|e| LlmError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(LlmError::Transport(format!("HTTP {status}: {body}")));
        }
        let text = body["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| LlmError::Transport("response has no message content".into()))?
            .to_string();
        let usage = match (body["usage"]["prompt_tokens"].as_u64(), body["usage"]["completion_tokens"].as_u64()) {
            (Some(p), Some(c)) => CompletionUsage { prompt_tokens: p, completion_tokens: c },
            _ => CompletionUsage::estimate(turns, &text),
        };
        Ok(Completion { text, usage })
    }
}

struct LiveSession<'a> {
    backend: &'a LiveBackend,
}

impl Backend for LiveBackend {
    fn open(&self, _episode: &EpisodeInfo) -> Box<dyn Session + '_> {
        Box::new(LiveSession { backend: self })
    }
}

impl Session for LiveSession<'_> {
    fn complete(&mut self, turns: &[ChatTurn], _call: CallInfo<'_>) -> Result<Completion, LlmError> {
        if turns.is_empty() {
            return Err(LlmError::EmptyConversation);
        }
        self.backend.acquire();
        let out = self.backend.request(turns);
        self.backend.release();
        out
    }
}
