//! Blocking client for a remote annealing service.
//!
//! Request body: `{"size": S, "offset": c, "qubo": [[i, j, Q_ij], ...],
//! "num_reads": n}`. The service answers `{"samples": [[0, 1, ...], ...],
//! "energies": [...]}`; energies are informational and recomputed locally.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Backend, SampleResult};
use crate::error::{Error, Result};
use crate::qubo::QuboMatrix;

pub const URL_VAR: &str = "BEAMQUBO_REMOTE_URL";
pub const TOKEN_VAR: &str = "BEAMQUBO_REMOTE_TOKEN";

#[derive(Debug, Clone)]
pub struct RemoteEndpoint {
    pub url: String,
    pub token: Option<String>,
    pub timeout: Duration,
    pub num_reads: usize,
}

impl RemoteEndpoint {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            token: None,
            timeout: Duration::from_secs(60),
            num_reads: super::DEFAULT_READS,
        }
    }

    pub fn from_env() -> Result<Self> {
        let url = std::env::var(URL_VAR)
            .map_err(|_| Error::Validation(format!("{URL_VAR} is not set")))?;
        let mut ep = Self::new(url);
        ep.token = std::env::var(TOKEN_VAR).ok().filter(|t| !t.is_empty());
        Ok(ep)
    }
}

#[derive(Serialize)]
struct Request {
    size: usize,
    offset: f64,
    qubo: Vec<(usize, usize, f64)>,
    num_reads: usize,
}

#[derive(Deserialize)]
struct Response {
    samples: Vec<Vec<u8>>,
    #[serde(default)]
    energies: Option<Vec<f64>>,
}

pub fn remote_submit(q: &QuboMatrix, endpoint: &RemoteEndpoint) -> Result<SampleResult> {
    let started = Instant::now();
    let body = Request {
        size: q.size(),
        offset: q.offset,
        qubo: q.entries().collect(),
        num_reads: endpoint.num_reads,
    };
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(endpoint.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let mut req = agent.post(&endpoint.url);
    if let Some(token) = &endpoint.token {
        req = req.header("Authorization", &format!("Bearer {token}"));
    }
    let mut resp = req
        .send_json(&body)
        .map_err(|e| Error::Transport(e.to_string()))?;
    let status = resp.status();
    if !status.is_success() {
        return Err(Error::Transport(format!("HTTP status {}", status.as_u16())));
    }
    let text = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| Error::Transport(e.to_string()))?;
    let parsed: Response =
        serde_json::from_str(&text).map_err(|e| Error::Protocol(format!("bad response body: {e}")))?;
    parse_samples(q, parsed, started)
}

fn parse_samples(q: &QuboMatrix, resp: Response, started: Instant) -> Result<SampleResult> {
    if resp.samples.is_empty() {
        return Err(Error::Protocol("response carries no samples".into()));
    }
    if let Some(e) = &resp.energies {
        if e.len() != resp.samples.len() {
            return Err(Error::Protocol(format!(
                "{} samples but {} energies",
                resp.samples.len(),
                e.len()
            )));
        }
    }
    let mut reads = Vec::with_capacity(resp.samples.len());
    for (k, s) in resp.samples.into_iter().enumerate() {
        if s.len() != q.size() {
            return Err(Error::Protocol(format!(
                "sample {k} has {} bits, expected {}",
                s.len(),
                q.size()
            )));
        }
        let bits = s
            .into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Protocol(format!("sample {k} has non-binary value {other}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        reads.push(bits);
    }
    SampleResult::from_reads(q, reads, Backend::Remote, started)
}
