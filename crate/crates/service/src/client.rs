//! Blocking client for a running batch or live server.

use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

use crate::envelope::{ConvertRequest, ConvertResponse};
use crate::examples::Example;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot reach {url}: {message}")]
    Unreachable { url: String, message: String },
    #[error("server refused the request ({status}): {}", .response.error.as_ref().map_or("", |e| e.message.as_str()))]
    Rejected { status: u16, response: Box<ConvertResponse> },
    #[error("unexpected reply from {url}: {message}")]
    Protocol { url: String, message: String },
}

#[derive(Clone, Debug)]
pub struct RemoteClient {
    base: String,
    http: reqwest::blocking::Client,
}

impl RemoteClient {
    pub fn new(base: &str) -> Result<Self, ClientError> {
        let base = base.trim_end_matches('/').to_string();
        let http = reqwest::blocking::Client::builder()
            .connect_timeout(Duration::from_secs(5))
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| ClientError::Protocol { url: base.clone(), message: e.to_string() })?;
        Ok(RemoteClient { base, http })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn transport(&self, url: &str, e: reqwest::Error) -> ClientError {
        if e.is_connect() || e.is_timeout() || e.is_request() {
            ClientError::Unreachable { url: url.to_string(), message: e.to_string() }
        } else {
            ClientError::Protocol { url: url.to_string(), message: e.to_string() }
        }
    }

    pub fn convert(&self, req: &ConvertRequest) -> Result<ConvertResponse, ClientError> {
        let url = format!("{}/convert", self.base);
        let resp = self.http.post(&url).json(req).send().map_err(|e| self.transport(&url, e))?;
        let status = resp.status();
        let body = resp.bytes().map_err(|e| self.transport(&url, e))?;
        match serde_json::from_slice::<ConvertResponse>(&body) {
            Ok(r) if status.is_success() => Ok(r),
            Ok(r) => Err(ClientError::Rejected { status: status.as_u16(), response: Box::new(r) }),
            Err(_) => Err(ClientError::Protocol { url, message: format!("{status}: {}", String::from_utf8_lossy(&body)) }),
        }
    }

    fn get_json<T: serde::de::DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        let url = format!("{}{path}", self.base);
        let resp = self.http.get(&url).send().map_err(|e| self.transport(&url, e))?;
        if !resp.status().is_success() {
            return Err(ClientError::Protocol { url, message: resp.status().to_string() });
        }
        resp.json().map_err(|e| ClientError::Protocol { url, message: e.to_string() })
    }

    pub fn examples(&self) -> Result<Vec<Example>, ClientError> {
        self.get_json("/examples")
    }

    pub fn health(&self) -> Result<Value, ClientError> {
        self.get_json("/health")
    }
}
