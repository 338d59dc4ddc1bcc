//! Client for an external embedding service.
//!
//! Protocol: `POST <base_url>/embed` with body `{"texts": [...]}`; the
//! response must be `{"embeddings": [[...], ...]}` with one vector per text,
//! in request order.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{check_vector, EmbeddingConfig, EmbeddingVector};
use crate::error::{Error, Result};
use crate::pipeline::DatasetRecord;

/// Overrides the configured base URL when set.
pub const EMBED_URL_ENV: &str = "SVDD_CLEAN_EMBED_URL";

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

pub(crate) fn resolve_base_url(config: &EmbeddingConfig) -> String {
    std::env::var(EMBED_URL_ENV)
        .ok()
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| config.remote.base_url.clone())
}

pub fn embed_remote(config: &EmbeddingConfig, records: &[DatasetRecord]) -> Result<Vec<EmbeddingVector>> {
    let remote = &config.remote;
    if remote.batch_size == 0 {
        return Err(Error::Config("remote batch size must be positive".into()));
    }
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let url = format!("{}/embed", resolve_base_url(config).trim_end_matches('/'));
    let agent = ureq::AgentBuilder::new()
        .timeout(Duration::from_millis(remote.timeout_ms))
        .build();

    let batches: Vec<&[DatasetRecord]> = records.chunks(remote.batch_size).collect();
    let in_flight = remote.max_in_flight.max(1);
    let mut out = Vec::with_capacity(records.len());
    for group in batches.chunks(in_flight) {
        let results: Vec<Result<Vec<EmbeddingVector>>> = if group.len() == 1 {
            vec![post_batch(&agent, &url, group[0], config)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = group
                    .iter()
                    .map(|batch| {
                        let agent = agent.clone();
                        let url = url.as_str();
                        s.spawn(move || post_batch(&agent, url, batch, config))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(Error::Transport("worker panicked".into()))))
                    .collect()
            })
        };
        for r in results {
            out.extend(r?);
        }
    }
    Ok(out)
}

fn post_batch(
    agent: &ureq::Agent,
    url: &str,
    batch: &[DatasetRecord],
    config: &EmbeddingConfig,
) -> Result<Vec<EmbeddingVector>> {
    let body = EmbedRequest {
        texts: batch.iter().map(|r| r.text.as_str()).collect(),
    };
    let body = serde_json::to_value(&body)?;
    let retries = config.remote.retries;
    let mut delay = config.remote.backoff_ms;
    let mut attempt = 0;
    let response = loop {
        let last_error = match agent.post(url).send_json(body.clone()) {
            Ok(resp) => break resp,
            Err(ureq::Error::Status(code, resp)) if code == 429 || code >= 500 => {
                format!("HTTP {code} {}", resp.status_text())
            }
            Err(ureq::Error::Status(code, resp)) => {
                return Err(Error::Protocol(format!(
                    "embedding service rejected request: HTTP {code} {}",
                    resp.status_text()
                )));
            }
            Err(ureq::Error::Transport(t)) => t.to_string(),
        };
        if attempt >= retries {
            return Err(Error::Transport(format!(
                "{url}: giving up after {} attempt(s): {last_error}",
                attempt + 1
            )));
        }
        attempt += 1;
        std::thread::sleep(Duration::from_millis(delay));
        delay = delay.saturating_mul(2);
    };

    let parsed: EmbedResponse = response
        .into_json()
        .map_err(|e| Error::Protocol(format!("malformed response body: {e}")))?;
    if parsed.embeddings.len() != batch.len() {
        return Err(Error::Protocol(format!(
            "service returned {} embeddings for {} texts",
            parsed.embeddings.len(),
            batch.len()
        )));
    }
    for (v, r) in parsed.embeddings.iter().zip(batch) {
        check_vector(v, config.dim, &format!("remote embedding for id {:?}", r.id))
            .map_err(|e| Error::Protocol(e.to_string()))?;
    }
    Ok(parsed.embeddings)
}
