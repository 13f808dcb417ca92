use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Reader, ReaderInput};
use crate::error::{Error, Result};

/// Body POSTed to a remote scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    /// Padded token ids of the budgeted context.
    pub context_tokens: Vec<u32>,
    /// The same context as whitespace-joined token surfaces, for text backends.
    pub context_text: String,
    pub question: String,
    pub choices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub logits: Vec<f64>,
}

/// Reader backed by an HTTP scorer that answers `ScoreRequest` with
/// `ScoreResponse`.
pub struct RemoteReader {
    reader_id: String,
    url: String,
    agent: ureq::Agent,
}

impl std::fmt::Debug for RemoteReader {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteReader")
            .field("reader_id", &self.reader_id)
            .field("url", &self.url)
            .finish()
    }
}

impl RemoteReader {
    pub fn new(reader_id: impl Into<String>, url: impl Into<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self {
            reader_id: reader_id.into(),
            url: url.into(),
            agent,
        }
    }
}

impl Reader for RemoteReader {
    fn reader_id(&self) -> &str {
        &self.reader_id
    }

    fn score_choices(&self, input: &ReaderInput<'_>) -> Result<Vec<f64>> {
        let request = ScoreRequest {
            context_tokens: input.context.token_ids.clone(),
            context_text: input.context.tokens().collect::<Vec<_>>().join(" "),
            question: input.question.to_string(),
            choices: input.choices.to_vec(),
        };
        let mut response = self.agent.post(&self.url).send_json(&request).map_err(|e| match e {
            ureq::Error::StatusCode(_) => Error::Remote {
                url: self.url.clone(),
                message: e.to_string(),
            },
            other => Error::ReaderUnavailable(format!("{}: {other}", self.reader_id)),
        })?;
        let body: ScoreResponse = response.body_mut().read_json().map_err(|e| Error::Remote {
            url: self.url.clone(),
            message: e.to_string(),
        })?;
        Ok(body.logits)
    }
}
