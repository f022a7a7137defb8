//! Where raw language-model answers come from: a directory of recorded
//! responses or a generic HTTP endpoint. Assembly into a [`PriorMatrix`] is
//! a deterministic fold over unordered pairs, independent of the order in
//! which responses arrive.

use std::path::PathBuf;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assemble_prior, parse_response, render_prompt, Answer, PairVerdict, PriorMatrix};
use crate::error::{Error, Result};

/// A source of raw answer text for one unordered pair `(a, b)`, `a < b`.
pub trait PriorSource: Sync {
    /// Raw response for the prompt about `names[a]` vs `names[b]`, or
    /// `None` if the source holds no answer for this pair.
    fn respond(&self, prompt: &str, a: usize, b: usize) -> Result<Option<String>>;
}

/// What to do with a response that has no usable answer tag.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnparseablePolicy {
    /// Record the pair as "no direct relationship" and log a warning.
    #[default]
    TreatAsNone,
    /// Ask again, up to `attempts` times in total, then fail.
    Retry { attempts: usize },
}

/// One UTF-8 file per pair named `<a>_<b>.txt`, `a < b` being indices into
/// the variable list.
#[derive(Clone, Debug)]
pub struct RecordedResponses {
    dir: PathBuf,
}

impl RecordedResponses {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn file_name(a: usize, b: usize) -> String {
        format!("{}_{}.txt", a.min(b), a.max(b))
    }
}

impl PriorSource for RecordedResponses {
    fn respond(&self, _prompt: &str, a: usize, b: usize) -> Result<Option<String>> {
        let path = self.dir.join(Self::file_name(a, b));
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

#[derive(Serialize)]
struct PromptBody<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct ReplyBody {
    text: String,
}

/// POSTs `{"prompt": ...}` and expects `{"text": ...}` back.
#[derive(Clone, Debug)]
pub struct HttpPriorSource {
    url: String,
    agent: ureq::Agent,
    transport_attempts: usize,
    auth_header: Option<(String, String)>,
}

impl HttpPriorSource {
    pub fn new(url: impl Into<String>, timeout: Duration, transport_attempts: usize) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self {
            url: url.into(),
            agent,
            transport_attempts: transport_attempts.max(1),
            auth_header: None,
        }
    }

    /// Adds a header (typically a credential) to every request.
    pub fn with_header(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.auth_header = Some((name.into(), value.into()));
        self
    }

    fn post(&self, prompt: &str) -> std::result::Result<String, ureq::Error> {
        let mut req = self.agent.post(&self.url);
        if let Some((k, v)) = &self.auth_header {
            req = req.header(k.as_str(), v.as_str());
        }
        let reply: ReplyBody = req
            .send_json(PromptBody { prompt })?
            .body_mut()
            .read_json()?;
        Ok(reply.text)
    }
}

impl PriorSource for HttpPriorSource {
    fn respond(&self, prompt: &str, a: usize, b: usize) -> Result<Option<String>> {
        let mut last = None;
        for attempt in 1..=self.transport_attempts {
            match self.post(prompt) {
                Ok(text) => return Ok(Some(text)),
                Err(e) => {
                    log::warn!("pair ({a}, {b}): request {attempt} failed: {e}");
                    last = Some(e);
                }
            }
        }
        Err(Error::PriorSource(format!(
            "{}: {}",
            self.url,
            last.map(|e| e.to_string()).unwrap_or_default()
        )))
    }
}

fn verdict_for_pair<S: PriorSource + ?Sized>(
    source: &S,
    names: &[String],
    prompt_names: &[String],
    policy: UnparseablePolicy,
    (a, b): (usize, usize),
) -> Result<Option<PairVerdict>> {
    let prompt = render_prompt(&prompt_names[a], &prompt_names[b])?;
    let attempts = match policy {
        UnparseablePolicy::TreatAsNone => 1,
        UnparseablePolicy::Retry { attempts } => attempts.max(1),
    };
    for attempt in 1..=attempts {
        let Some(text) = source.respond(&prompt, a, b)? else {
            log::warn!(
                "no response for ({}, {}); treating as no edge",
                names[a],
                names[b]
            );
            return Ok(None);
        };
        match parse_response(&text) {
            Ok(answer) => return Ok(Some(PairVerdict::new(&names[a], &names[b], answer)?)),
            Err(e) => match policy {
                UnparseablePolicy::TreatAsNone => {
                    log::warn!(
                        "unusable response for ({}, {}): {e}; treating as answer D",
                        names[a],
                        names[b]
                    );
                    return Ok(Some(PairVerdict::new(&names[a], &names[b], Answer::D)?));
                }
                UnparseablePolicy::Retry { .. } if attempt < attempts => {
                    log::warn!(
                        "unusable response for ({}, {}) on attempt {attempt}: {e}; retrying",
                        names[a],
                        names[b]
                    );
                }
                UnparseablePolicy::Retry { .. } => {
                    return Err(Error::PriorSource(format!(
                        "({}, {}): {e} after {attempts} attempts",
                        names[a], names[b]
                    )))
                }
            },
        }
    }
    unreachable!("loop returns on its last attempt")
}

/// Queries every unordered pair once (in parallel) and assembles the prior.
/// `prompt_names`, when given, replaces the variable names inside prompts
/// (e.g. expanded abbreviations); it must align with `names`.
pub fn acquire_prior<S: PriorSource + ?Sized>(
    source: &S,
    names: &[String],
    prompt_names: Option<&[String]>,
    policy: UnparseablePolicy,
) -> Result<PriorMatrix> {
    let prompt_names = prompt_names.unwrap_or(names);
    if prompt_names.len() != names.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} prompt names for {} variables",
            prompt_names.len(),
            names.len()
        )));
    }
    let d = names.len();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| (a + 1..d).map(move |b| (a, b)))
        .collect();
    let verdicts: Vec<Option<PairVerdict>> = pairs
        .par_iter()
        .map(|&pair| verdict_for_pair(source, names, prompt_names, policy, pair))
        .collect::<Result<_>>()?;
    let verdicts: Vec<PairVerdict> = verdicts.into_iter().flatten().collect();
    assemble_prior(&verdicts, names)
}
