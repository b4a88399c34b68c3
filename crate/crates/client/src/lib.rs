//! Typed calls against a running `pqbench-service`.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use pqbench_core::api::{
    ApiError, BenchRequest, ReportRequest, ReportResponse, SchemeList, SecurityLevel, SecurityLevelRequest,
    TlsMeasureRequest, TlsMeasureResponse,
};
use pqbench_core::bench::BenchRecord;
use pqbench_core::registry::{AlgoClass, SchemeMetadata, SecurityAssessment};

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service answered with an error body.
    #[error("{0}")]
    Api(ApiError),
    #[error("http error: {0}")]
    Http(#[from] reqwest::Error),
    #[error("invalid url: {0}")]
    InvalidUrl(String),
    #[error("unexpected status {status}: {body}")]
    Status { status: u16, body: String },
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Self {
        Client {
            base: base.trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let body = resp.text().await?;
        match serde_json::from_str::<ApiError>(&body).ok() {
            Some(e) => Err(ClientError::Api(e)),
            None => Err(ClientError::Status {
                status: status.as_u16(),
                body,
            }),
        }
    }

    /// `prefix` followed by `name` as one percent-encoded path segment.
    fn named(&self, prefix: &str, name: &str) -> Result<reqwest::Url, ClientError> {
        let mut url = reqwest::Url::parse(&self.url(prefix)).map_err(|e| ClientError::InvalidUrl(e.to_string()))?;
        url.path_segments_mut()
            .map_err(|_| ClientError::InvalidUrl(self.base.clone()))?
            .push(name);
        Ok(url)
    }

    async fn get<T: DeserializeOwned>(&self, url: reqwest::Url) -> Result<T, ClientError> {
        Self::decode(self.http.get(url).send().await?).await
    }

    async fn get_path<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        let url = reqwest::Url::parse(&self.url(path)).map_err(|e| ClientError::InvalidUrl(e.to_string()))?;
        self.get(url).await
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ClientError> {
        Self::decode(self.http.post(self.url(path)).json(body).send().await?).await
    }

    pub async fn health(&self) -> Result<(), ClientError> {
        let resp = self.http.get(self.url("/health")).send().await?;
        if resp.status().is_success() {
            Ok(())
        } else {
            Err(ClientError::Status {
                status: resp.status().as_u16(),
                body: resp.text().await?,
            })
        }
    }

    pub async fn schemes(&self) -> Result<SchemeList, ClientError> {
        self.get_path("/schemes").await
    }

    pub async fn registry_entry(&self, name: &str) -> Result<SchemeMetadata, ClientError> {
        self.get(self.named("/registry", name)?).await
    }

    pub async fn assess(&self, name: &str) -> Result<SecurityAssessment, ClientError> {
        self.get(self.named("/assess", name)?).await
    }

    pub async fn security_level(&self, req: &SecurityLevelRequest) -> Result<SecurityLevel, ClientError> {
        self.post("/security-level", req).await
    }

    pub async fn nist_level(&self, level: u8) -> Result<AlgoClass, ClientError> {
        self.get_path(&format!("/nist-level/{level}")).await
    }

    pub async fn bench_kem(&self, req: &BenchRequest) -> Result<Vec<BenchRecord>, ClientError> {
        self.post("/bench/kem", req).await
    }

    pub async fn bench_sig(&self, req: &BenchRequest) -> Result<Vec<BenchRecord>, ClientError> {
        self.post("/bench/sig", req).await
    }

    pub async fn tls_measure(&self, req: &TlsMeasureRequest) -> Result<TlsMeasureResponse, ClientError> {
        self.post("/tls/measure", req).await
    }

    pub async fn report(&self, req: &ReportRequest) -> Result<ReportResponse, ClientError> {
        self.post("/report", req).await
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_become_one_segment() {
        let c = Client::new("http://h:1");
        assert_eq!(c.named("/assess", "Dilithium IV").unwrap().as_str(), "http://h:1/assess/Dilithium%20IV");
        assert_eq!(c.named("/assess", "a/b").unwrap().as_str(), "http://h:1/assess/a%2Fb");
    }

    #[test]
    fn trailing_slash_is_dropped() {
        assert_eq!(Client::new("http://h:1/").url("/x"), "http://h:1/x");
    }
}
