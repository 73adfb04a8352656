//! The JSON wire format shared by HTTP, the websocket route and the client.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use texmath::pipeline::{ConversionResult, LogEntry, ProfileOptions, Status};

/// Version of the envelope schema, echoed on every response.
pub const PROTOCOL: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ConvertRequest {
    /// Echoed verbatim on the response; any JSON value.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub id: Value,
    #[serde(default, alias = "src", skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// A base64 ZIP archive, converted as a job.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archive: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, alias = "overrides", skip_serializing_if = "ProfileOptions::is_empty")]
    pub options: ProfileOptions,
    /// Requests sharing a key on one connection supersede each other.
    #[serde(default, alias = "supersede_key", skip_serializing_if = "Option::is_none")]
    pub supersede_key: Option<String>,
    /// Superseded requests get no response at all instead of a `superseded` one.
    #[serde(default, alias = "drop_superseded", skip_serializing_if = "std::ops::Not::not")]
    pub drop_superseded: bool,
}

impl ConvertRequest {
    pub fn source(id: impl Into<Value>, source: impl Into<String>) -> Self {
        ConvertRequest { id: id.into(), source: Some(source.into()), ..Default::default() }
    }

    pub fn profile_name(&self) -> &str {
        self.profile.as_deref().unwrap_or("math")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseStatus {
    Success,
    SuccessWithWarnings,
    Failed,
    /// A newer request with the same supersede key replaced this one.
    Superseded,
    /// The request itself was unusable.
    Error,
}

impl From<Status> for ResponseStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Success => ResponseStatus::Success,
            Status::SuccessWithWarnings => ResponseStatus::SuccessWithWarnings,
            Status::Failed => ResponseStatus::Failed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub category: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub available: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvertResponse {
    pub protocol: u32,
    #[serde(default)]
    pub id: Value,
    pub status: ResponseStatus,
    #[serde(default)]
    pub result: String,
    #[serde(default)]
    pub log: Vec<LogEntry>,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl ConvertResponse {
    pub fn from_result(id: Value, r: ConversionResult) -> Self {
        ConvertResponse { protocol: PROTOCOL, id, status: r.status.into(), result: r.output, log: r.log, version: r.version, error: None }
    }

    pub fn error(id: Value, category: &str, message: impl Into<String>) -> Self {
        ConvertResponse {
            protocol: PROTOCOL,
            id,
            status: ResponseStatus::Error,
            result: String::new(),
            log: Vec::new(),
            version: texmath::pipeline::VERSION.to_string(),
            error: Some(ErrorBody { category: category.into(), message: message.into(), available: Vec::new() }),
        }
    }

    pub fn new(id: Value, status: ResponseStatus, result: String) -> Self {
        ConvertResponse { protocol: PROTOCOL, id, status, result, log: Vec::new(), version: texmath::pipeline::VERSION.to_string(), error: None }
    }

    pub fn superseded(id: Value) -> Self {
        Self::new(id, ResponseStatus::Superseded, String::new())
    }

    pub fn with_available(mut self, names: Vec<String>) -> Self {
        if let Some(e) = &mut self.error {
            e.available = names;
        }
        self
    }
}
