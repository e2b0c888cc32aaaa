//! Dataset generation through a chat-completion endpoint.
//!
//! Each premise is paraphrased inside one conversation (so the model sees its
//! earlier paraphrases), then every resulting premise gets one hypothesis
//! request per label template. Replies must be numbered lists; anything else
//! is counted as skipped.

use std::io::Write;
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use factnli_core::dataset::{dedup, DedupReport, Example, LabeledDataset, Provenance};
use factnli_core::prompt::{parse_numbered_list, parse_paraphrase, GenTemplate, TaskKind};
use serde::{Deserialize, Serialize};

pub const API_KEY_VAR: &str = "FACTGEN_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct TransportError {
    pub message: String,
    /// Whether another attempt may succeed (network errors, 429, 5xx).
    pub retryable: bool,
}

pub trait ChatTransport {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, TransportError>;
}

#[derive(Debug, thiserror::Error)]
pub enum RemoteError {
    #[error("environment variable {0} is not set")]
    MissingApiKey(&'static str),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("request failed after {attempts} attempt(s): {last}")]
    Exhausted { attempts: u32, last: TransportError },
    #[error("audit log: {0}")]
    Audit(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub backoff_factor: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            initial_backoff_ms: 500,
            backoff_factor: 2.0,
        }
    }
}

impl RetryPolicy {
    fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.initial_backoff_ms as f64 * self.backoff_factor.powi(attempt as i32 - 1);
        Duration::from_millis(ms.min(60_000.0) as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub n_paraphrases: usize,
    pub n_hypotheses: usize,
    pub max_words: usize,
    pub api_url: String,
    pub api_model: String,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_paraphrases: 3,
            n_hypotheses: 5,
            max_words: 20,
            api_url: "https://api.openai.com/v1/chat/completions".into(),
            api_model: "gpt-3.5-turbo".into(),
            timeout_secs: 60,
            retry: RetryPolicy::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), RemoteError> {
        let bad = |m: &str| Err(RemoteError::InvalidConfig(m.into()));
        if self.n_paraphrases == 0 {
            return bad("n_paraphrases must be at least 1");
        }
        if self.n_hypotheses == 0 {
            return bad("n_hypotheses must be at least 1");
        }
        if self.max_words == 0 {
            return bad("max_words must be at least 1");
        }
        if self.retry.max_attempts == 0 {
            return bad("retry.max_attempts must be at least 1");
        }
        Ok(())
    }
}

/// Posts `{"model", "messages"}` and reads `choices[0].message.content`.
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    model: String,
    api_key: String,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
}

impl HttpTransport {
    pub fn new(url: &str, model: &str, api_key: String, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport {
            agent,
            url: url.to_string(),
            model: model.to_string(),
            api_key,
        }
    }

    /// Reads the API key from `FACTGEN_API_KEY`.
    pub fn from_env(cfg: &GenConfig) -> Result<Self, RemoteError> {
        let key = std::env::var(API_KEY_VAR)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or(RemoteError::MissingApiKey(API_KEY_VAR))?;
        Ok(Self::new(
            &cfg.api_url,
            &cfg.api_model,
            key,
            Duration::from_secs(cfg.timeout_secs),
        ))
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, TransportError> {
        let body = serde_json::to_string(&ChatRequest {
            model: &self.model,
            messages,
        })
        .expect("request serializes");
        let mut resp = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .content_type("application/json")
            .send(&body)
            .map_err(|e| TransportError {
                message: e.to_string(),
                retryable: true,
            })?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError {
                message: e.to_string(),
                retryable: true,
            })?;
        if !(200..300).contains(&status) {
            return Err(TransportError {
                message: format!(
                    "HTTP {status}: {}",
                    text.chars().take(200).collect::<String>()
                ),
                retryable: status == 429 || status >= 500,
            });
        }
        let parsed: ChatResponse = serde_json::from_str(&text).map_err(|e| TransportError {
            message: format!("malformed response body: {e}"),
            retryable: false,
        })?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| TransportError {
                message: "response has no choices".into(),
                retryable: false,
            })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenSummary {
    pub premises: usize,
    pub requests: usize,
    pub paraphrases: usize,
    /// Replies that yielded nothing usable.
    pub skipped: usize,
    pub generated: usize,
    pub dedup: DedupReport,
}

#[derive(Serialize)]
struct AuditRecord<'a> {
    timestamp: f64,
    task: TaskKind,
    attempt: u32,
    request: &'a [ChatMessage],
    #[serde(skip_serializing_if = "Option::is_none")]
    response: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

struct Session<'a, T: ChatTransport, W: Write> {
    transport: &'a mut T,
    audit: &'a mut W,
    retry: RetryPolicy,
    summary: GenSummary,
}

impl<T: ChatTransport, W: Write> Session<'_, T, W> {
    fn log(
        &mut self,
        task: TaskKind,
        attempt: u32,
        request: &[ChatMessage],
        result: &Result<String, TransportError>,
    ) -> Result<(), RemoteError> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let record = AuditRecord {
            timestamp,
            task,
            attempt,
            request,
            response: result.as_ref().ok().map(String::as_str),
            error: result.as_ref().err().map(|e| e.message.as_str()),
        };
        serde_json::to_writer(&mut *self.audit, &record).map_err(std::io::Error::from)?;
        self.audit.write_all(b"\n")?;
        Ok(())
    }

    fn request(&mut self, task: TaskKind, messages: &[ChatMessage]) -> Result<String, RemoteError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            self.summary.requests += 1;
            let result = self.transport.complete(messages);
            self.log(task, attempt, messages, &result)?;
            match result {
                Ok(text) => return Ok(text),
                Err(e) if !e.retryable || attempt >= self.retry.max_attempts => {
                    return Err(RemoteError::Exhausted {
                        attempts: attempt,
                        last: e,
                    });
                }
                Err(_) => thread::sleep(self.retry.backoff(attempt)),
            }
        }
    }

    fn paraphrases(
        &mut self,
        template: &GenTemplate,
        premise: &str,
        n: usize,
        max_words: usize,
    ) -> Result<Vec<String>, RemoteError> {
        let prompt = template.render(premise, 1, max_words);
        let mut conversation = Vec::new();
        let mut out = Vec::new();
        for _ in 0..n {
            conversation.push(ChatMessage::user(prompt.clone()));
            let reply = self.request(TaskKind::Paraphrase, &conversation)?;
            match parse_paraphrase(&reply) {
                Some(p) => out.push(p),
                None => self.summary.skipped += 1,
            }
            conversation.push(ChatMessage::assistant(reply));
        }
        Ok(out)
    }
}

/// Generates labelled pairs for every premise. With a paraphrase template,
/// hypotheses are requested for the paraphrases; without one, for the
/// original premise. Requests are serial and every attempt is written to
/// `audit` as one JSON line.
pub fn generate_remote<T: ChatTransport, W: Write>(
    premises: &[String],
    templates: &[GenTemplate],
    cfg: &GenConfig,
    transport: &mut T,
    audit: &mut W,
) -> Result<(LabeledDataset, GenSummary), RemoteError> {
    cfg.validate()?;
    let paraphrase = templates.iter().find(|t| t.kind() == TaskKind::Paraphrase);
    let label_templates: Vec<&GenTemplate> = templates
        .iter()
        .filter(|t| t.kind().label().is_some())
        .collect();
    if label_templates.is_empty() {
        return Err(RemoteError::InvalidConfig(
            "no label templates given".into(),
        ));
    }
    let mut session = Session {
        transport,
        audit,
        retry: cfg.retry,
        summary: GenSummary {
            premises: premises.len(),
            ..Default::default()
        },
    };
    let mut examples = Vec::new();
    for premise in premises {
        let premise = premise.trim();
        if premise.is_empty() {
            continue;
        }
        let variants = match paraphrase {
            Some(t) => session.paraphrases(t, premise, cfg.n_paraphrases, cfg.max_words)?,
            None => vec![premise.to_string()],
        };
        session.summary.paraphrases += if paraphrase.is_some() {
            variants.len()
        } else {
            0
        };
        for p in &variants {
            for template in &label_templates {
                let label = template
                    .kind()
                    .label()
                    .expect("filtered to label templates");
                let prompt = template.render(p, cfg.n_hypotheses, cfg.max_words);
                let reply = session.request(template.kind(), &[ChatMessage::user(prompt)])?;
                let items = parse_numbered_list(&reply);
                if items.is_empty() {
                    session.summary.skipped += 1;
                }
                examples.extend(items.into_iter().map(|h| Example::new(p.clone(), h, label)));
            }
        }
    }
    session.audit.flush()?;
    let mut summary = session.summary;
    summary.generated = examples.len();
    let (dataset, report) = dedup(&LabeledDataset::new(examples, Provenance::Generated));
    summary.dedup = report;
    Ok((dataset, summary))
}
